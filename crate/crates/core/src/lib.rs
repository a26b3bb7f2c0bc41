//! Coined quantum walks on regular graphs with vertex-dependent coins:
//! simulation, controllability analysis, Lie algebra closure and explicit
//! state-transfer synthesis.
//!
//! ```
//! use qwalk::{analyze, WalkSpec};
//!
//! let report = analyze(&WalkSpec::cycle_shift(5).unwrap()).unwrap();
//! assert!(report.controllable);
//! assert_eq!(report.step_bound, Some(13));
//! ```

pub mod controllability;
pub mod graph;
pub mod io;
pub mod lie;
pub mod parallel;
pub mod perm;
pub mod synthesis;
pub mod walk;

pub use controllability::{
    analyze, joint_orbit, k_of, kappa, parity_check, reachable_sets, reduced_connectivity_graph,
    verdicts_agree, AnalysisError, ControllabilityReport, CriteriaAgreement, JointOrbit, ParityCheck,
    ReducedGraph,
};
pub use graph::{Degree2Kind, SpecError, WalkSpec};
pub use lie::{
    generator_basis, lie_closure, lie_closure_dim, verify_structure, verify_structure_with, GeneratorBasis,
    LieClosureResult, LieError,
};
pub use perm::{PermError, Permutation};
pub use synthesis::{
    arbitrary_transfer, concentrate_to_node, reach_full_state, shortcut, spread_from_node, unitary_completion,
    ControlSequence, Phase, SynthesisError, TargetSpread, Transfer,
};
pub use walk::{
    apply_sequence, coin_matrix, position_probabilities, shift_matrix, shift_order, step, CMatrix, CoinOp,
    ShiftOp, WalkError, WalkState,
};
