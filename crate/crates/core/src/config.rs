//! Numeric tolerances shared across the crate.
//!
//! Closed-form inputs keep everything well conditioned, so the defaults are
//! tight: 1e-10 for completeness and probability bookkeeping, 1e-12 for
//! algebraic identities. Every check that embeds a tolerance reads it from a
//! [`Tolerances`] value (or one of the named constants below) so the numbers
//! stay auditable and overridable from the command line.

/// Tolerance bundle threaded through execution and verification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// POVM completeness: max-norm defect of `M1†M1 + M2†M2 - I`.
    pub completeness: f64,
    /// Probability bookkeeping: total branch probability against 1.
    pub probability: f64,
    /// Componentwise agreement of oracle invariant fingerprints for
    /// local-unitary equivalence.
    pub lue: f64,
    /// Tight algebraic identities: norms, unitarity, linearity.
    pub algebraic: f64,
    /// Allowed leaf fidelity defect in a deterministic protocol.
    pub fidelity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            completeness: 1e-10,
            probability: 1e-10,
            lue: 1e-8,
            algebraic: 1e-12,
            fidelity: 1e-9,
        }
    }
}

/// Default POVM completeness tolerance.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Default tolerance on algebraic identities (unitarity, norms).
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// The entanglement phase is indefinite when the product of the three
/// bipartite concurrences falls at or below this value.
pub const EP_INDEFINITE_PRODUCT: f64 = 1e-12;

/// Three-tangle above this threshold marks a GHZ-class state.
pub const TANGLE_THRESHOLD: f64 = 1e-9;

/// A reduced single-qubit eigenvalue above this threshold counts towards
/// rank 2. Genuine degeneracy in closed-form inputs sits many orders below.
pub const RANK_THRESHOLD: f64 = 1e-9;

/// Feasibility of a GHZ-class target is decided on the minimum bipartite
/// concurrence, not the product, to avoid underflow masking.
pub const CONCURRENCE_FLOOR: f64 = 1e-10;

/// An arccos argument within this distance past 1 is treated as rounding and
/// clamped; anything larger is an inconsistency error.
pub const ARCCOS_SLACK: f64 = 1e-6;

/// Branches below this probability are short-circuited and recorded with
/// their fidelity omitted.
pub const BRANCH_PROB_FLOOR: f64 = 1e-14;

/// Slack on the W-chain monotonicity condition so exact-boundary targets
/// (trivial steps) are accepted.
pub const MONOTONE_SLACK: f64 = 1e-10;
