//! Deterministic LOCC transformations of three-qubit entangled pure states.
//!
//! Three-qubit pure states split into two inequivalent classes of genuine
//! tripartite entanglement, GHZ and W. Within each class, certain target
//! states can be reached from the standard GHZ or standard W state with unit
//! probability using two-outcome local measurements plus classical
//! communication: every measurement branch is corrected by local unitaries
//! back onto the same output.
//!
//! This crate provides:
//!
//! * [`qcore`] — dense complex linear algebra for one-, two-, and three-qubit
//!   objects: state vectors, single-party operators, tensor application,
//!   partial traces, and seeded Haar-random local unitaries.
//! * [`entangle`] — canonical coefficients, entanglement invariants
//!   (pairwise concurrences, three-tangle, entanglement phase), SLOCC
//!   classification, the local-unitary partner map, and independent
//!   density-matrix oracles for all of them.
//! * [`ghz`] — constructors for the deterministic GHZ-class measurement
//!   protocols (single-party and two-party chains), their local-unitary
//!   corrections, and the feasibility verdict embodying the no-go condition:
//!   a deterministic transformation from the standard GHZ state exists iff
//!   the target has at least one vanishing bipartite concurrence.
//! * [`w`] — the three-step deterministic W-class protocol with closed-form
//!   branch probabilities and the monotone feasibility condition.
//! * [`runner`] — exhaustive and Monte Carlo execution of protocol plans
//!   over their full branch trees, with verification reports certifying
//!   determinism.
//!
//! All operations are pure functions over immutable values; there is no
//! shared mutable state anywhere in the crate.

pub mod config;
pub mod entangle;
pub mod error;
pub mod ghz;
pub mod qcore;
pub mod runner;
pub mod w;

pub use config::Tolerances;
pub use entangle::{
    ckw_tangle, classify, ep_phase, ep_phase_from_state, invariants_from_canonical,
    invariants_from_state, lue_equivalent, lue_partner, mixed_concurrence, CanonicalCoefficients,
    ClassLabel, EpPhase, InvariantSet, KappaRelation,
};
pub use error::{Error, Result};
pub use ghz::{
    ghz_feasible, single_party_pair, three_party_third_step, two_party_plan, ConcurrencePattern,
    FeasibilityVerdict, GhzTarget, ThirdStepReport,
};
pub use qcore::{
    apply_local, branch_probability, fidelity_up_to_phase, povm_complete,
    random_haar_local_unitary, reduced_density, state_from_canonical, Branch, Complex,
    DensityMatrix, LocalOperator, LuCorrection, MeasurementPair, Party, StateVector,
};
pub use runner::{
    execute_exhaustive, execute_sampled, verify_deterministic, ExecutionReport, LeafRecord,
    ProtocolPlan, ProtocolStep, SampledReport,
};
pub use w::{
    w_canonical_flip, w_chain_plan, w_feasible, w_step_pair, WChainState, WCoefficients,
    WStepRecord,
};
