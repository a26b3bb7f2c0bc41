//! JSON wire formats.
//!
//! * walk: `{"n": 6, "perms": [[1,2,3,4,5,0], "(0 5 4 3 2 1)", ...]}`, each
//!   permutation in one-line form or as a cycle-notation string;
//! * state: `{"d": 3, "n": 6, "amps": [[re, im], ...]}` in coin-major order;
//! * coin operation: `N` matrices of `d × d` `[re, im]` pairs;
//! * sequence: `{"steps": [{"coins": [...]}, ...], "bound": 13, "achieved_fidelity": 1.0}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::graph::{SpecError, WalkSpec};
use crate::perm::{PermError, Permutation};
use crate::synthesis::{ControlSequence, Phase};
use crate::walk::{CMatrix, CoinOp, WalkError, WalkState};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("permutation {index}: {source}")]
    Perm { index: usize, source: PermError },
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error("{0}")]
    Shape(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PermRepr {
    OneLine(Vec<usize>),
    Cycles(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecFile {
    pub n: usize,
    pub perms: Vec<PermRepr>,
}

impl SpecFile {
    pub fn into_spec(self) -> Result<WalkSpec, FormatError> {
        let mut maps = Vec::with_capacity(self.perms.len());
        for (index, p) in self.perms.into_iter().enumerate() {
            match p {
                PermRepr::OneLine(map) => maps.push(map),
                PermRepr::Cycles(text) => {
                    let perm = Permutation::parse_cycles(self.n, &text)
                        .map_err(|source| FormatError::Perm { index, source })?;
                    maps.push(perm.into());
                }
            }
        }
        Ok(WalkSpec::validate(self.n, maps)?)
    }

    pub fn from_spec(spec: &WalkSpec) -> SpecFile {
        SpecFile {
            n: spec.n(),
            perms: spec
                .perms()
                .iter()
                .map(|p| PermRepr::OneLine(p.as_slice().to_vec()))
                .collect(),
        }
    }
}

pub fn parse_spec(text: &str) -> Result<WalkSpec, FormatError> {
    serde_json::from_str::<SpecFile>(text)?.into_spec()
}

pub fn spec_to_json(spec: &WalkSpec) -> Value {
    serde_json::to_value(SpecFile::from_spec(spec)).expect("plain data serializes")
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex([re, im]: [f64; 2]) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub d: usize,
    pub n: usize,
    pub amps: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn into_state(self) -> Result<WalkState, FormatError> {
        Ok(WalkState::new(
            self.d,
            self.n,
            self.amps.into_iter().map(complex).collect(),
        )?)
    }

    pub fn from_state(state: &WalkState) -> StateFile {
        StateFile {
            d: state.d(),
            n: state.n(),
            amps: state.amps().iter().copied().map(pair).collect(),
        }
    }
}

pub fn parse_state(text: &str) -> Result<WalkState, FormatError> {
    serde_json::from_str::<StateFile>(text)?.into_state()
}

pub fn state_to_json(state: &WalkState) -> Value {
    serde_json::to_value(StateFile::from_state(state)).expect("plain data serializes")
}

/// `blocks[j][row][col] = [re, im]`.
pub type CoinFile = Vec<Vec<Vec<[f64; 2]>>>;

pub fn coin_to_file(op: &CoinOp) -> CoinFile {
    op.blocks()
        .iter()
        .map(|q| {
            (0..q.nrows())
                .map(|r| (0..q.ncols()).map(|c| pair(q[(r, c)])).collect())
                .collect()
        })
        .collect()
}

pub fn coin_from_file(file: &CoinFile) -> Result<CoinOp, FormatError> {
    let mut blocks = Vec::with_capacity(file.len());
    for (j, rows) in file.iter().enumerate() {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(FormatError::Shape(format!("coin block at vertex {j} is not square")));
        }
        let entries: Vec<Complex64> = rows.iter().flatten().copied().map(complex).collect();
        blocks.push(CMatrix::from_row_slice(d, d, &entries));
    }
    if blocks.is_empty() {
        return Err(FormatError::Shape("coin operation has no blocks".into()));
    }
    Ok(CoinOp::new(blocks)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFile {
    pub coins: CoinFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<Phase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceFile {
    pub steps: Vec<StepFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub achieved_fidelity: Option<f64>,
}

impl SequenceFile {
    pub fn from_sequence(seq: &ControlSequence, bound: Option<usize>, achieved_fidelity: Option<f64>) -> Self {
        SequenceFile {
            steps: seq
                .ops
                .iter()
                .enumerate()
                .map(|(t, op)| StepFile {
                    coins: coin_to_file(op),
                    phase: seq.meta.get(t).copied(),
                })
                .collect(),
            bound,
            achieved_fidelity,
        }
    }

    /// Steps without a phase tag are marked as padding.
    pub fn to_sequence(&self) -> Result<ControlSequence, FormatError> {
        let mut seq = ControlSequence::new();
        for step in &self.steps {
            seq.push(coin_from_file(&step.coins)?, step.phase.unwrap_or(Phase::Padding));
        }
        Ok(seq)
    }
}

pub fn parse_sequence(text: &str) -> Result<SequenceFile, FormatError> {
    Ok(serde_json::from_str(text)?)
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// Rounds every float in `value` to `digits` significant digits; integers are left alone.
pub fn round_floats(value: Value, digits: usize) -> Value {
    match value {
        Value::Number(num) if num.is_f64() => {
            let x = round_sig(num.as_f64().expect("checked f64"), digits);
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(|v| round_floats(v, digits)).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v, digits))).collect()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_accepts_cycle_strings() {
        let spec = parse_spec(r#"{"n": 6, "perms": [[1,2,3,4,5,0], "(0 5 4 3 2 1)", "(0 3)(1 5)(2 4)"]}"#).unwrap();
        assert_eq!(spec, WalkSpec::figure1());
        assert!(matches!(
            parse_spec(r#"{"n": 4, "perms": [[1,2,3,0], "(0 1"]}"#),
            Err(FormatError::Perm { index: 1, .. })
        ));
        assert!(matches!(
            parse_spec(r#"{"n": 4, "perms": [[0,1,2,3], [1,2,3,0]]}"#),
            Err(FormatError::Spec(SpecError::SelfLoop { .. }))
        ));
    }

    #[test]
    fn spec_round_trip() {
        let spec = WalkSpec::torus(3, 3).unwrap();
        let text = spec_to_json(&spec).to_string();
        assert_eq!(parse_spec(&text).unwrap(), spec);
    }

    #[test]
    fn state_round_trip() {
        let psi = WalkState::uniform(3, 6);
        let back = parse_state(&state_to_json(&psi).to_string()).unwrap();
        assert_eq!(back, psi);
        assert!(parse_state(r#"{"d": 2, "n": 3, "amps": [[1,0]]}"#).is_err());
    }

    #[test]
    fn coin_round_trip_and_validation() {
        let op = CoinOp::identity(2, 3);
        assert_eq!(coin_from_file(&coin_to_file(&op)).unwrap(), op);
        let bad: CoinFile = vec![vec![vec![[1.0, 0.0], [1.0, 0.0]], vec![[0.0, 0.0], [1.0, 0.0]]]];
        assert!(matches!(coin_from_file(&bad), Err(FormatError::Walk(WalkError::NotUnitary { .. }))));
    }

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.999999999999987, 12), 1.0);
        assert_eq!(round_sig(1.0 / 3.0, 12), 0.333333333333);
        let v = round_floats(serde_json::json!({"a": [0.1234567890123456, 3], "b": "x"}), 12);
        assert_eq!(v, serde_json::json!({"a": [0.123456789012, 3], "b": "x"}));
    }
}
