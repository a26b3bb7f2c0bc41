//! Explicit coin sequences for state transfers.
//!
//! All constructions follow a predecessor tree inside the reachability sets
//! `𝒩ᵗ(j)`. Predecessors are chosen deterministically: smallest vertex first,
//! then the unique coin value leading to the child. Vertices not involved in a
//! step get the identity coin.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controllability::{analyze, reachable_sets, AnalysisError, VertexSet};
use crate::graph::{Degree2Kind, WalkSpec};
use crate::walk::{apply_sequence, step, CMatrix, CoinOp, ShiftOp, WalkError, WalkState, NORM_TOL};

/// Coefficients below this magnitude are dropped before recursion.
pub const STRIP_TOL: f64 = 1e-14;
/// Fidelity above which two states count as equal.
const SAME_STATE: f64 = 1.0 - 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthesisError {
    #[error("vector is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("vertex {vertex} is not in 𝒩^{k}({from})")]
    Unreachable { vertex: usize, from: usize, k: usize },
    #[error("more than d targets share predecessor {vertex}")]
    GroupTooLarge { vertex: usize },
    #[error("no shortcut pair C̃₁, C̃₂ with C̃₂ S C̃₁ = S⁻¹ is known for this walk")]
    ShortcutUnavailable,
    #[error("walk is not completely controllable; invariant partition {partition:?}")]
    NotControllable { partition: Vec<Vec<usize>> },
    #[error("target spread: {0}")]
    BadTarget(String),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// Which construction produced a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Concentrate,
    Spread,
    /// The coin step that writes the final per-node coin states.
    Reach,
    /// Identity steps completing `Sʳ = I`.
    Padding,
    Shortcut,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControlSequence {
    pub ops: Vec<CoinOp>,
    pub meta: Vec<Phase>,
}

impl ControlSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, op: CoinOp, phase: Phase) {
        self.ops.push(op);
        self.meta.push(phase);
    }

    pub fn extend(&mut self, other: ControlSequence) {
        self.ops.extend(other.ops);
        self.meta.extend(other.meta);
    }

    pub fn apply(&self, state: &WalkState, spec: &WalkSpec) -> Result<WalkState, WalkError> {
        apply_sequence(state, &self.ops, spec)
    }
}

/// `Σ_h α_h |c_h⟩ ⊗ |v_h⟩` with the coin states left free.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpread {
    pub nodes: Vec<usize>,
    pub coeffs: Vec<Complex64>,
}

impl TargetSpread {
    pub fn new(nodes: Vec<usize>, coeffs: Vec<Complex64>) -> Result<TargetSpread, SynthesisError> {
        if nodes.len() != coeffs.len() || nodes.is_empty() {
            return Err(SynthesisError::BadTarget(format!(
                "{} nodes for {} coefficients",
                nodes.len(),
                coeffs.len()
            )));
        }
        let mut sorted = nodes.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(SynthesisError::BadTarget("nodes are not distinct".into()));
        }
        let norm = coeffs.iter().map(Complex64::norm_sqr).sum::<f64>();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(SynthesisError::NotUnit(norm.sqrt()));
        }
        Ok(TargetSpread { nodes, coeffs })
    }

    /// Equal real weights on `nodes`.
    pub fn uniform(nodes: Vec<usize>) -> Result<TargetSpread, SynthesisError> {
        let a = Complex64::new(1.0 / (nodes.len() as f64).sqrt(), 0.0);
        let coeffs = vec![a; nodes.len()];
        TargetSpread::new(nodes, coeffs)
    }
}

/// Output of [`spread_from_node`]: the sequence and the coin state `c_h` left at each target node.
#[derive(Debug, Clone, PartialEq)]
pub struct Spread {
    pub sequence: ControlSequence,
    pub coin_states: BTreeMap<usize, Vec<Complex64>>,
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

fn check_unit(v: &[Complex64]) -> Result<(), SynthesisError> {
    let n = vec_norm(v);
    if (n * n - 1.0).abs() > NORM_TOL {
        return Err(SynthesisError::NotUnit(n));
    }
    Ok(())
}

fn unit(d: usize, k: usize) -> Vec<Complex64> {
    let mut e = vec![ZERO; d];
    e[k] = ONE;
    e
}

/// Householder reflection `H = I − 2ww†/(w†w)` with `H x = −α e₀`, `α = x₀/|x₀|`.
fn householder(x: &[Complex64]) -> (CMatrix, Complex64) {
    let d = x.len();
    let alpha = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
    let mut w = x.to_vec();
    w[0] += alpha;
    let ww: f64 = w.iter().map(Complex64::norm_sqr).sum();
    let mut h = CMatrix::identity(d, d);
    for a in 0..d {
        for b in 0..d {
            h[(a, b)] -= w[a] * w[b].conj() * (2.0 / ww);
        }
    }
    (h, alpha)
}

/// Unitary `Q` with `Q src = dst`. Aligned inputs give a phase times the identity.
pub fn unitary_completion(src: &[Complex64], dst: &[Complex64]) -> Result<CMatrix, SynthesisError> {
    check_unit(src)?;
    check_unit(dst)?;
    if src.len() != dst.len() {
        return Err(WalkError::DimensionMismatch {
            expected: format!("{}-vector", src.len()),
            got: format!("{}-vector", dst.len()),
        }
        .into());
    }
    let d = src.len();
    let overlap: Complex64 = src.iter().zip(dst).map(|(a, b)| a.conj() * b).sum();
    if overlap.norm() > 0.0 {
        let phase = overlap / overlap.norm();
        let gap = src.iter().zip(dst).map(|(a, b)| (a * phase - b).norm_sqr()).sum::<f64>();
        if gap.sqrt() < 1e-15 {
            return Ok(CMatrix::identity(d, d) * phase);
        }
    }
    let (hs, a_src) = householder(src);
    let (hd, a_dst) = householder(dst);
    let mut diag = CMatrix::identity(d, d);
    diag[(0, 0)] = a_dst / a_src;
    Ok(hd * diag * hs)
}

fn reach_sets(spec: &WalkSpec, j: usize, k: usize) -> Result<Vec<VertexSet>, SynthesisError> {
    Ok(reachable_sets(spec, j, k)?)
}

/// Smallest neighbour of `v` inside `allowed`.
fn pick_neighbor(spec: &WalkSpec, v: usize, allowed: &VertexSet) -> Option<usize> {
    spec.neighbors(v).iter().copied().find(|w| allowed.contains(w))
}

/// Builds a `k`-step sequence taking `c0 ⊗ |j⟩` to `Σ α_h |c_h⟩ ⊗ |v_h⟩`.
pub fn spread_from_node(
    spec: &WalkSpec,
    j: usize,
    c0: &[Complex64],
    target: &TargetSpread,
    k: usize,
) -> Result<Spread, SynthesisError> {
    let d = spec.d();
    if c0.len() != d {
        return Err(WalkError::DimensionMismatch {
            expected: format!("{d}-dimensional coin state"),
            got: format!("{}", c0.len()),
        }
        .into());
    }
    check_unit(c0)?;
    let sets = reach_sets(spec, j, k)?;

    let mut leaves: BTreeMap<usize, Complex64> = BTreeMap::new();
    for (&v, &a) in target.nodes.iter().zip(&target.coeffs) {
        if a.norm() < STRIP_TOL {
            continue;
        }
        if v >= spec.n() || !sets[k].contains(&v) {
            return Err(SynthesisError::Unreachable { vertex: v, from: j, k });
        }
        leaves.insert(v, a);
    }
    let kept = leaves.values().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    if kept == 0.0 {
        return Err(SynthesisError::BadTarget("every coefficient is negligible".into()));
    }
    leaves.values_mut().for_each(|a| *a /= kept);

    if k == 0 {
        // only j itself is reachable in zero steps
        let a = leaves[&j];
        let coin: Vec<Complex64> = c0.iter().map(|c| c * a.conj()).collect();
        return Ok(Spread {
            sequence: ControlSequence::new(),
            coin_states: BTreeMap::from([(j, coin)]),
        });
    }

    // levels[t]: node -> weight at time t; children[t][z]: (coin, child) pairs leaving z at step t+1
    let mut levels: Vec<BTreeMap<usize, Complex64>> = vec![BTreeMap::new(); k + 1];
    let mut children: Vec<BTreeMap<usize, Vec<(usize, usize)>>> = vec![BTreeMap::new(); k];
    levels[k] = leaves;
    for t in (1..=k).rev() {
        let mut parents: BTreeMap<usize, f64> = BTreeMap::new();
        for (&v, &a) in &levels[t] {
            let w = pick_neighbor(spec, v, &sets[t - 1])
                .ok_or(SynthesisError::Unreachable { vertex: v, from: j, k: t })?;
            let coin = spec.coin_between(w, v).expect("neighbours are joined by a coin");
            let group = children[t - 1].entry(w).or_default();
            group.push((coin, v));
            if group.len() > d {
                return Err(SynthesisError::GroupTooLarge { vertex: w });
            }
            *parents.entry(w).or_default() += a.norm_sqr();
        }
        levels[t - 1] = parents
            .into_iter()
            .map(|(w, g)| (w, Complex64::new(g.sqrt(), 0.0)))
            .collect();
    }

    let mut sequence = ControlSequence::new();
    let mut incoming: BTreeMap<usize, usize> = BTreeMap::new();
    for t in 0..k {
        let mut coin = CoinOp::identity(d, spec.n());
        for (&z, group) in &children[t] {
            let gamma = levels[t][&z].re;
            let delta = if t == 0 { c0.to_vec() } else { unit(d, incoming[&z]) };
            let mut out = vec![ZERO; d];
            for &(c, v) in group {
                out[c] = levels[t + 1][&v] / gamma;
            }
            coin.set_block(z, unitary_completion(&delta, &out)?)?;
        }
        incoming = children[t]
            .values()
            .flatten()
            .map(|&(c, v)| (v, c))
            .collect();
        sequence.push(coin, Phase::Spread);
    }
    let coin_states = incoming.into_iter().map(|(v, c)| (v, unit(d, c))).collect();
    Ok(Spread { sequence, coin_states })
}

/// Coin pair with `C̃₂ S C̃₁ = S⁻¹`, so two steps stand in for the `r − 1` padding steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Shortcut {
    pub first: CoinOp,
    pub second: CoinOp,
}

/// `C̃₂ S C̃₁ = S⁻¹`, checked on every basis vector.
pub fn is_shortcut_pair(spec: &WalkSpec, first: &CoinOp, second: &CoinOp) -> bool {
    let dim = spec.dim();
    let shift = ShiftOp::new(spec);
    let inverse: Vec<usize> = {
        let mut inv = vec![0; dim];
        for i in 0..dim {
            inv[shift.target(i)] = i;
        }
        inv
    };
    let first_m = first.matrix();
    let second_m = second.matrix();
    let s = shift.matrix();
    let product = second_m * s * first_m;
    (0..dim).all(|i| {
        (0..dim).all(|r| {
            let expected = if r == inverse[i] { ONE } else { ZERO };
            (product[(r, i)] - expected).norm() < 1e-12
        })
    })
}

/// Looks up a shortcut pair. Degree-2 full cycles use `[[0,1],[−1,0]] ⊗ I` and its
/// inverse; otherwise a coin relabelling `π` with `P_{π(i)} = P_i⁻¹` gives `Π ⊗ I` twice.
pub fn shortcut(spec: &WalkSpec) -> Option<Shortcut> {
    let d = spec.d();
    let n = spec.n();
    if spec.degree2_kind() == Some(Degree2Kind::FullCycle) {
        let c1 = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, -ONE, ZERO]);
        let c2 = c1.adjoint();
        let pair = Shortcut {
            first: CoinOp::uniform(&c1, n).ok()?,
            second: CoinOp::uniform(&c2, n).ok()?,
        };
        if is_shortcut_pair(spec, &pair.first, &pair.second) {
            return Some(pair);
        }
    }
    let inverses: Vec<_> = spec.perms().iter().map(|p| p.inverse()).collect();
    let pairing: Option<Vec<usize>> = (0..d)
        .map(|i| spec.perms().iter().position(|p| *p == inverses[i]))
        .collect();
    let pairing = pairing?;
    let mut pi = CMatrix::zeros(d, d);
    for (i, &target) in pairing.iter().enumerate() {
        pi[(target, i)] = ONE;
    }
    let pair = Shortcut {
        first: CoinOp::uniform(&pi, n).ok()?,
        second: CoinOp::uniform(&pi.transpose(), n).ok()?,
    };
    is_shortcut_pair(spec, &pair.first, &pair.second).then_some(pair)
}

/// Takes `c0 ⊗ |j⟩` to `target` in `k + r` steps (`k + 2` with the shortcut).
/// The node support of `target` must lie in `𝒩ᵏ(j)`.
pub fn reach_full_state(
    spec: &WalkSpec,
    j: usize,
    c0: &[Complex64],
    target: &WalkState,
    k: usize,
    use_shortcut: bool,
) -> Result<ControlSequence, SynthesisError> {
    if target.d() != spec.d() || target.n() != spec.n() {
        return Err(WalkError::DimensionMismatch {
            expected: format!("d={}, n={}", spec.d(), spec.n()),
            got: format!("d={}, n={}", target.d(), target.n()),
        }
        .into());
    }
    let short = if use_shortcut {
        Some(shortcut(spec).ok_or(SynthesisError::ShortcutUnavailable)?)
    } else {
        None
    };
    let (nodes, weights): (Vec<usize>, Vec<Complex64>) = (0..spec.n())
        .map(|v| (v, target.vertex_weight(v)))
        .filter(|&(_, b)| b >= STRIP_TOL)
        .map(|(v, b)| (v, Complex64::new(b, 0.0)))
        .unzip();
    let total = weights.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    let weights = weights.into_iter().map(|b| b / total).collect();
    let spread = spread_from_node(spec, j, c0, &TargetSpread::new(nodes, weights)?, k)?;

    let mut write = CoinOp::identity(spec.d(), spec.n());
    for (&v, c) in &spread.coin_states {
        let beta = target.vertex_weight(v);
        let want: Vec<Complex64> = target.coin_vector(v).into_iter().map(|a| a / beta).collect();
        write.set_block(v, unitary_completion(c, &want)?)?;
    }
    let mut sequence = spread.sequence;
    match short {
        Some(pair) => {
            sequence.push(pair.first.then_after(&write), Phase::Reach);
            sequence.push(pair.second, Phase::Shortcut);
        }
        None => {
            sequence.push(write, Phase::Reach);
            for _ in 1..spec.shift_order() {
                sequence.push(CoinOp::identity(spec.d(), spec.n()), Phase::Padding);
            }
        }
    }
    Ok(sequence)
}

/// Steers `state` onto vertex `j` in at most `k` steps. Returns the sequence and
/// the final (unnormalized) coin vector at `j`.
pub fn concentrate_to_node(
    spec: &WalkSpec,
    j: usize,
    state: &WalkState,
    k: usize,
) -> Result<(ControlSequence, Vec<Complex64>), SynthesisError> {
    let sets = reach_sets(spec, j, k)?;
    let support = |psi: &WalkState| -> Vec<usize> {
        (0..spec.n()).filter(|&v| psi.vertex_weight(v) >= STRIP_TOL).collect()
    };
    for v in support(state) {
        if !sets[k].contains(&v) {
            return Err(SynthesisError::Unreachable { vertex: v, from: j, k });
        }
    }
    let mut psi = state.clone();
    let mut sequence = ControlSequence::new();
    for t in (1..=k).rev() {
        let nodes = support(&psi);
        if nodes == [j] {
            break;
        }
        let mut coin = CoinOp::identity(spec.d(), spec.n());
        for v in nodes {
            let w = pick_neighbor(spec, v, &sets[t - 1])
                .ok_or(SynthesisError::Unreachable { vertex: v, from: j, k: t })?;
            let c = spec.coin_between(v, w).expect("neighbours are joined by a coin");
            let gamma = psi.vertex_weight(v);
            let here: Vec<Complex64> = psi.coin_vector(v).into_iter().map(|a| a / gamma).collect();
            coin.set_block(v, unitary_completion(&here, &unit(spec.d(), c))?)?;
        }
        psi = step(&psi, &coin, spec)?;
        sequence.push(coin, Phase::Concentrate);
    }
    Ok((sequence, psi.coin_vector(j)))
}

/// A synthesized transfer and its simulated quality.
#[derive(Debug, Clone, PartialEq)]
pub struct Transfer {
    pub sequence: ControlSequence,
    /// `2𝐤 + r`, or `2𝐤 + 2` with the shortcut.
    pub bound: usize,
    pub achieved_fidelity: f64,
}

/// `ψ1 → ψ2` via the vertex achieving `𝐤`: concentrate, then reach.
pub fn arbitrary_transfer(
    spec: &WalkSpec,
    psi1: &WalkState,
    psi2: &WalkState,
    use_shortcut: bool,
) -> Result<Transfer, SynthesisError> {
    for psi in [psi1, psi2] {
        if psi.d() != spec.d() || psi.n() != spec.n() {
            return Err(WalkError::DimensionMismatch {
                expected: format!("d={}, n={}", spec.d(), spec.n()),
                got: format!("d={}, n={}", psi.d(), psi.n()),
            }
            .into());
        }
    }
    let report = analyze(spec)?;
    if !report.controllable {
        return Err(SynthesisError::NotControllable {
            partition: report.components,
        });
    }
    let kappa = report.kappa.expect("controllable walks have finite 𝐤");
    let j = report.kappa_vertex.expect("controllable walks have a 𝐤 vertex");
    let tail = if use_shortcut { 2 } else { spec.shift_order() };
    let bound = 2 * kappa + tail;

    let sequence = if psi1.fidelity(psi2) >= SAME_STATE {
        let mut seq = ControlSequence::new();
        match use_shortcut {
            true => {
                let pair = shortcut(spec).ok_or(SynthesisError::ShortcutUnavailable)?;
                seq.push(pair.first, Phase::Shortcut);
                seq.push(pair.second, Phase::Shortcut);
            }
            false => {
                for _ in 0..spec.shift_order() {
                    seq.push(CoinOp::identity(spec.d(), spec.n()), Phase::Padding);
                }
            }
        }
        seq
    } else {
        let (mut seq, coin) = concentrate_to_node(spec, j, psi1, kappa)?;
        let norm = vec_norm(&coin);
        let coin: Vec<Complex64> = coin.into_iter().map(|c| c / norm).collect();
        seq.extend(reach_full_state(spec, j, &coin, psi2, kappa, use_shortcut)?);
        seq
    };
    let achieved = sequence.apply(psi1, spec)?;
    Ok(Transfer {
        bound,
        achieved_fidelity: psi2.fidelity(&achieved),
        sequence,
    })
}
