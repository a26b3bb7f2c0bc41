//! `qwalk`: batch command line for coined quantum walk controllability.
//!
//! Every command prints one JSON document (or writes it to `--out`).
//! Exit codes: 0 ok, 1 invalid input, 2 failed cross-check, 3 I/O error.

mod demo;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qwalk::io::{self, SequenceFile, SCHEMA_VERSION};
use qwalk::lie::{verify_structure_with, DEFAULT_CAP};
use qwalk::{analyze, arbitrary_transfer, k_of, reachable_sets, verdicts_agree, WalkSpec, WalkState};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "qwalk", version, about = "Controllability analysis and control synthesis for coined quantum walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Write the JSON result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Rank tolerance for the Lie closure (relative).
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct SpecArg {
    /// Walk file (JSON) or builtin name such as `cycle_shift(5)`, `figure1`, `torus(3,3)`.
    #[arg(long)]
    spec: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a walk description and print its normalized form.
    Validate(SpecArg),
    /// Controllability report.
    Analyze(SpecArg),
    /// Reachable sets 𝒩⁰(j)…𝒩ᵏ(j).
    Reach {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 0)]
        node: usize,
        /// Largest k (defaults to N).
        #[arg(long)]
        k: Option<usize>,
    },
    /// Numerical Lie closure against the predicted dimension.
    LieCheck {
        #[command(flatten)]
        spec: SpecArg,
        /// Largest dN accepted.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Control sequence taking `--state` to `--target`.
    Synthesize {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Use the two-step shortcut instead of r − 1 padding steps.
        #[arg(long)]
        shortcut: bool,
    },
    /// Replay a control sequence.
    Simulate {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        seq: PathBuf,
        /// Optional state to report the fidelity against.
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// Runs the builtin gallery with all cross-checks; prints a table
    /// (and the JSON summary to `--out` if given).
    Demo,
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    CrossCheck(Value),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::CrossCheck(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_spec(arg: &str) -> Result<WalkSpec, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        return io::parse_spec(&read(path)?).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())));
    }
    match WalkSpec::builtin(arg) {
        Ok(spec) => Ok(spec),
        Err(qwalk::SpecError::UnknownBuiltin(_)) if arg.ends_with(".json") || arg.contains('/') => {
            Err(Failure::Io(format!("{arg}: no such file")))
        }
        Err(e) => Err(Failure::Invalid(e.to_string())),
    }
}

fn load_state(path: &Path, spec: &WalkSpec) -> Result<WalkState, Failure> {
    let state = io::parse_state(&read(path)?).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    if state.d() != spec.d() || state.n() != spec.n() {
        return Err(Failure::Invalid(format!(
            "{}: state has d={}, n={} but the walk has d={}, n={}",
            path.display(),
            state.d(),
            state.n(),
            spec.d(),
            spec.n()
        )));
    }
    Ok(state)
}

fn with_schema(mut value: Value) -> Value {
    if let Value::Object(map) = &mut value {
        map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    }
    value
}

fn validate(spec: &WalkSpec) -> Value {
    json!({
        "valid": true,
        "n": spec.n(),
        "d": spec.d(),
        "r": spec.shift_order(),
        "perms": spec.perms().iter().map(|p| p.as_slice().to_vec()).collect::<Vec<_>>(),
        "cycles": spec.perms().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
    })
}

fn analyze_cmd(spec: &WalkSpec) -> Result<Value, Failure> {
    let report = analyze(spec).map_err(|e| Failure::CrossCheck(json!({ "error": e.to_string() })))?;
    let mut value = serde_json::to_value(&report).expect("report serializes");
    value["r"] = json!(spec.shift_order());
    if !report.verdicts_agree {
        let agreement = verdicts_agree(spec).ok();
        value["criteria"] = json!(agreement);
        return Err(Failure::CrossCheck(value));
    }
    Ok(value)
}

fn reach(spec: &WalkSpec, node: usize, k: Option<usize>) -> Result<Value, Failure> {
    let kmax = k.unwrap_or(spec.n());
    let sets = reachable_sets(spec, node, kmax).map_err(|e| Failure::Invalid(e.to_string()))?;
    let k_j = k_of(spec, node).map_err(|e| Failure::CrossCheck(json!({ "error": e.to_string() })))?;
    Ok(json!({ "node": node, "sets": sets, "k_j": k_j }))
}

fn lie_check(spec: &WalkSpec, tol: f64, cap: usize) -> Result<Value, Failure> {
    if !(tol > 0.0) {
        return Err(Failure::Invalid(format!("--tol must be positive, got {tol}")));
    }
    let check = verify_structure_with(spec, tol, cap).map_err(|e| match e {
        qwalk::LieError::ToleranceDegenerate { .. } => Failure::CrossCheck(json!({ "error": e.to_string() })),
        _ => Failure::Invalid(e.to_string()),
    })?;
    let value = serde_json::to_value(&check).expect("result serializes");
    if check.result.matched && check.block_diagonal {
        Ok(value)
    } else {
        Err(Failure::CrossCheck(value))
    }
}

fn synthesize(spec: &WalkSpec, psi1: &WalkState, psi2: &WalkState, shortcut: bool) -> Result<Value, Failure> {
    let transfer = arbitrary_transfer(spec, psi1, psi2, shortcut).map_err(|e| Failure::Invalid(e.to_string()))?;
    let file = SequenceFile::from_sequence(&transfer.sequence, Some(transfer.bound), Some(transfer.achieved_fidelity));
    let value = serde_json::to_value(file).expect("sequence serializes");
    if transfer.achieved_fidelity < 1.0 - 1e-9 || transfer.sequence.len() > transfer.bound {
        return Err(Failure::CrossCheck(value));
    }
    Ok(value)
}

fn simulate(spec: &WalkSpec, psi: &WalkState, seq_text: &str, target: Option<&WalkState>) -> Result<Value, Failure> {
    let file = io::parse_sequence(seq_text).map_err(|e| Failure::Invalid(e.to_string()))?;
    let seq = file.to_sequence().map_err(|e| Failure::Invalid(e.to_string()))?;
    let out = seq.apply(psi, spec).map_err(|e| Failure::Invalid(e.to_string()))?;
    let mut value = json!({
        "steps": seq.len(),
        "probabilities": out.position_probabilities(),
        "state": io::state_to_json(&out),
    });
    if let Some(t) = target {
        value["fidelity"] = json!(t.fidelity(&out));
    }
    Ok(value)
}

fn execute(cli: &Cli) -> Result<Value, Failure> {
    match &cli.command {
        Command::Validate(s) => Ok(validate(&load_spec(&s.spec)?)),
        Command::Analyze(s) => analyze_cmd(&load_spec(&s.spec)?),
        Command::Reach { spec, node, k } => reach(&load_spec(&spec.spec)?, *node, *k),
        Command::LieCheck { spec, cap } => lie_check(&load_spec(&spec.spec)?, cli.common.tol, *cap),
        Command::Synthesize { spec, state, target, shortcut } => {
            let spec = load_spec(&spec.spec)?;
            let psi1 = load_state(state, &spec)?;
            let psi2 = load_state(target, &spec)?;
            synthesize(&spec, &psi1, &psi2, *shortcut)
        }
        Command::Simulate { spec, state, seq, target } => {
            let spec = load_spec(&spec.spec)?;
            let psi = load_state(state, &spec)?;
            let target = target.as_deref().map(|t| load_state(t, &spec)).transpose()?;
            simulate(&spec, &psi, &read(seq)?, target.as_ref())
        }
        Command::Demo => unreachable!("demo is dispatched separately"),
    }
}

fn emit(value: Value, out: Option<&Path>) -> Result<(), Failure> {
    let value = io::round_floats(with_schema(value), 12);
    let text = serde_json::to_string_pretty(&value).expect("JSON value serializes") + "\n";
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_demo(common: &Common) -> ExitCode {
    let outcome = demo::run(common.seed, common.tol);
    print!("{}", outcome.table);
    if let Some(path) = &common.out {
        if let Err(Failure::Io(msg)) = emit(outcome.summary, Some(path)) {
            eprintln!("qwalk: {msg}");
            return ExitCode::from(3);
        }
    }
    ExitCode::from(if outcome.ok { 0 } else { 2 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if matches!(cli.command, Command::Demo) {
        return run_demo(&cli.common);
    }
    let out = cli.common.out.clone();
    let result = execute(&cli);
    let code = match &result {
        Ok(_) => 0,
        Err(f) => f.code(),
    };
    let value = match result {
        Ok(v) => v,
        Err(Failure::CrossCheck(v)) => v,
        Err(Failure::Invalid(msg)) => json!({ "valid": false, "error": msg }),
        Err(Failure::Io(msg)) => {
            eprintln!("qwalk: {msg}");
            return ExitCode::from(3);
        }
    };
    if let Err(f) = emit(value, out.as_deref()) {
        if let Failure::Io(msg) = &f {
            eprintln!("qwalk: {msg}");
        }
        return ExitCode::from(f.code());
    }
    if code == 1 {
        eprintln!("qwalk: invalid input");
    }
    ExitCode::from(code)
}
