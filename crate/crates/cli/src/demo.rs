//! Builtin gallery run with every cross-check switched on.

use std::fmt::Write as _;

use num_complex::Complex64;
use qwalk::controllability::reachable_sets;
use qwalk::lie::{verify_structure_with, DEFAULT_CAP};
use qwalk::{analyze, arbitrary_transfer, shortcut, verdicts_agree, WalkSpec, WalkState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const FIDELITY_TOL: f64 = 1e-9;

pub const GALLERY: &[&str] = &[
    "cycle_shift(3)",
    "cycle_shift(4)",
    "cycle_shift(5)",
    "cycle_shift(6)",
    "cycle_shift(7)",
    "cycle_shift(8)",
    "cycle_exchange(4)",
    "cycle_exchange(6)",
    "cycle_exchange(8)",
    "figure1",
    "complete(4)",
    "torus(3,3)",
];

pub struct DemoOutcome {
    pub table: String,
    pub summary: Value,
    pub ok: bool,
}

fn random_state(rng: &mut ChaCha8Rng, d: usize, n: usize) -> WalkState {
    let amps = (0..d * n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    WalkState::normalized(d, n, amps).expect("random vector is nonzero")
}

fn opt(x: Option<usize>) -> String {
    x.map_or("-".into(), |v| v.to_string())
}

pub fn run(seed: u64, tol: f64) -> DemoOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = String::new();
    let mut rows = Vec::new();
    let mut ok = true;
    let _ = writeln!(
        table,
        "{:<18} {:>3} {:>2} {:>3} {:>2} {:>5} {:>5} {:>5} {:>7} {:>9} {:>5} {:>12} {:>5}",
        "walk", "N", "d", "r", "m", "ctrl", "kappa", "bound", "lie_dim", "predicted", "agree", "fidelity", "steps"
    );
    for name in GALLERY {
        let spec = WalkSpec::builtin(name).expect("gallery names are valid");
        let report = match analyze(&spec) {
            Ok(r) => r,
            Err(e) => {
                ok = false;
                let _ = writeln!(table, "{name:<18} analysis failed: {e}");
                continue;
            }
        };
        let agree = verdicts_agree(&spec).map(|a| a.agree).unwrap_or(false) && report.verdicts_agree;
        let structure = (spec.dim() <= DEFAULT_CAP).then(|| verify_structure_with(&spec, tol, DEFAULT_CAP));
        let (lie_dim, lie_ok) = match &structure {
            Some(Ok(s)) => (Some(s.result.dim), s.result.matched && s.block_diagonal),
            Some(Err(_)) => (None, false),
            None => (None, true),
        };

        let mut fidelity = None;
        let mut steps = None;
        let mut transfer_ok = true;
        if report.controllable {
            let psi1 = random_state(&mut rng, spec.d(), spec.n());
            let psi2 = random_state(&mut rng, spec.d(), spec.n());
            let use_shortcut = shortcut(&spec).is_some();
            match arbitrary_transfer(&spec, &psi1, &psi2, use_shortcut) {
                Ok(t) => {
                    transfer_ok = t.achieved_fidelity >= 1.0 - FIDELITY_TOL && t.sequence.len() <= t.bound;
                    fidelity = Some(t.achieved_fidelity);
                    steps = Some(t.sequence.len());
                }
                Err(_) => transfer_ok = false,
            }
        }
        let row_ok = agree && lie_ok && transfer_ok;
        ok &= row_ok;
        let _ = writeln!(
            table,
            "{:<18} {:>3} {:>2} {:>3} {:>2} {:>5} {:>5} {:>5} {:>7} {:>9} {:>5} {:>12} {:>5}{}",
            name,
            spec.n(),
            spec.d(),
            spec.shift_order(),
            report.m,
            report.controllable,
            opt(report.kappa),
            opt(report.step_bound),
            opt(lie_dim),
            report.predicted_lie_dim,
            agree,
            fidelity.map_or("-".into(), |f| format!("{f:.10}")),
            opt(steps),
            if row_ok { "" } else { "  <- FAIL" }
        );
        rows.push(json!({
            "walk": name,
            "n": spec.n(),
            "d": spec.d(),
            "r": spec.shift_order(),
            "m": report.m,
            "components": report.components,
            "controllable": report.controllable,
            "kappa": report.kappa,
            "step_bound": report.step_bound,
            "lie_dim": lie_dim,
            "predicted_lie_dim": report.predicted_lie_dim,
            "verdicts_agree": agree,
            "transfer_fidelity": fidelity,
            "transfer_steps": steps,
            "ok": row_ok,
        }));
    }

    let fig = WalkSpec::figure1();
    let sets = reachable_sets(&fig, 0, 3).expect("vertex 0 exists");
    let _ = writeln!(table);
    for (k, set) in sets.iter().enumerate() {
        let _ = writeln!(table, "figure1  N^{k}(0) = {:?}", set.iter().collect::<Vec<_>>());
    }
    let all_six = sets[3].len() == 6;
    ok &= all_six;
    let _ = writeln!(table, "\n{}", if ok { "all checks passed" } else { "SOME CHECKS FAILED" });

    DemoOutcome {
        table,
        summary: json!({
            "rows": rows,
            "figure1_reachable": sets,
            "ok": ok,
            "seed": seed,
        }),
        ok,
    }
}
