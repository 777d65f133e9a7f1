//! The three-step deterministic W-class transformation.
//!
//! A W-type state `x0|000> + x1|100> + x2|010> + x3|001>` can be transformed
//! deterministically into `x0'|000> + x1'|100> + x2'|010> + x3'|001>` iff
//! `x_i >= x_i'` for `i = 1, 2, 3`. The protocol works in the flipped basis
//! (sigma_x on qubit A), where the chain state always has the shape
//! `c000|000> + c100|100> + c101|101> + c110|110>`:
//!
//! * step A lowers the `|000>` coefficient to the retained target,
//! * step B lowers the `|110>` coefficient,
//! * step C lowers the `|101>` coefficient,
//!
//! and each step pays for the decrease by growing the `|100>` weight under
//! the conservation rule `old² + pivot² = retained² + new_weight²`. Branch
//! probabilities are `(w ± pivot)/2w` in closed form, and branch 2 returns
//! to branch 1 under `sigma_z ⊗ sigma_z ⊗ sigma_z`, which flips exactly the
//! odd-weight `|100>` component on this support.

use crate::config::MONOTONE_SLACK;
use crate::error::{Error, Result};
use crate::ghz::FeasibilityVerdict;
use crate::qcore::{
    apply_local, Complex, LocalOperator, LuCorrection, MeasurementPair, Party, StateVector,
};
use crate::runner::{ProtocolPlan, ProtocolStep};

/// W-type coefficients in the `|000>, |100>, |010>, |001>` basis:
/// `x0 >= 0`, `x1, x2, x3 > 0`, squared sum 1 within `1e-9`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WCoefficients {
    x: [f64; 4],
}

impl WCoefficients {
    pub fn new(x: [f64; 4]) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCoefficients("non-finite W coefficients".into()));
        }
        if x[0] < 0.0 {
            return Err(Error::InvalidCoefficients("x0 must be nonnegative".into()));
        }
        if x[1..].iter().any(|&v| v <= 0.0) {
            return Err(Error::InvalidCoefficients(
                "x1, x2, x3 must be positive for a W-type state".into(),
            ));
        }
        let norm_sqr: f64 = x.iter().map(|v| v * v).sum();
        if (norm_sqr - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidCoefficients(format!(
                "squared W coefficients sum to {norm_sqr}, not 1"
            )));
        }
        Ok(Self { x })
    }

    /// `x0 = 0`, `x1 = x2 = x3 = 1/sqrt(3)`: the standard W state.
    pub fn standard() -> Self {
        let t = 1.0 / 3f64.sqrt();
        Self { x: [0.0, t, t, t] }
    }

    pub fn x(&self) -> [f64; 4] {
        self.x
    }

    /// Chain form after the flip on qubit A:
    /// `x1|000> + x0|100> + x3|101> + x2|110>`.
    pub fn chain_state(&self) -> WChainState {
        WChainState {
            c000: self.x[1],
            c100: self.x[0],
            c101: self.x[3],
            c110: self.x[2],
        }
    }

    pub fn flipped_state(&self) -> StateVector {
        self.chain_state().state_vector()
    }
}

/// Intermediate chain-state amplitudes in the flipped basis
/// (`|000>`, `|100>`, `|101>`, `|110>` slots).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WChainState {
    pub c000: f64,
    pub c100: f64,
    pub c101: f64,
    pub c110: f64,
}

impl WChainState {
    pub fn state_vector(&self) -> StateVector {
        let mut amp = [Complex::new(0.0, 0.0); 8];
        amp[0] = Complex::new(self.c000, 0.0);
        amp[4] = Complex::new(self.c100, 0.0);
        amp[5] = Complex::new(self.c101, 0.0);
        amp[6] = Complex::new(self.c110, 0.0);
        StateVector::new(amp).expect("chain state is nonzero")
    }

    /// The coefficient the given party's step lowers.
    fn retained_slot(&self, party: Party) -> f64 {
        match party {
            Party::A => self.c000,
            Party::B => self.c110,
            Party::C => self.c101,
        }
    }

    fn with_step_applied(&self, party: Party, retained: f64, new_weight: f64) -> WChainState {
        let mut next = *self;
        next.c100 = new_weight;
        match party {
            Party::A => next.c000 = retained,
            Party::B => next.c110 = retained,
            Party::C => next.c101 = retained,
        }
        next
    }
}

/// One step of the chain: the party measured, the coefficient the step
/// fixes, the grown `|100>` weight, and the closed-form branch
/// probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct WStepRecord {
    pub party: Party,
    pub retained: f64,
    pub new_weight: f64,
    pub p1: f64,
    pub p2: f64,
    pub trivial: bool,
}

/// `sigma_x` on qubit A, mapping between the W basis and the chain basis.
/// Involutive.
pub fn w_canonical_flip(s: &StateVector) -> StateVector {
    apply_local(&LocalOperator::pauli_x(Party::A), s)
}

fn sigma_z_correction() -> LuCorrection {
    LuCorrection::new(
        LocalOperator::pauli_z(Party::A),
        LocalOperator::pauli_z(Party::B),
        LocalOperator::pauli_z(Party::C),
    )
    .expect("sigma_z factors are unitary")
}

/// The two-outcome pair lowering one coefficient of the chain state, with
/// its step record and the branch-2 correction.
///
/// `retained_target` may not exceed the coefficient it replaces (within the
/// `1e-10` boundary slack). At the exact boundary the step is trivial: the
/// pair degenerates to the identity with `p1 = 1` and a null second branch
/// rather than dividing by a zero new weight.
pub fn w_step_pair(
    current: &WChainState,
    party: Party,
    retained_target: f64,
) -> Result<(MeasurementPair, WStepRecord, LuCorrection)> {
    if !retained_target.is_finite() || retained_target < 0.0 {
        return Err(Error::InvalidTarget(
            "retained coefficient must be a nonnegative real".into(),
        ));
    }
    let old = current.retained_slot(party);
    let pivot = current.c100;
    if retained_target > old + MONOTONE_SLACK {
        return Err(Error::MonotonicityViolation(format!(
            "party {party}: retained target {retained_target} exceeds source coefficient {old}"
        )));
    }
    let label = match party {
        Party::A => "w-step-a",
        Party::B => "w-step-b",
        Party::C => "w-step-c",
    };

    // Exact-boundary (trivial) step, covering the w = 0 singular corner.
    if retained_target >= old - MONOTONE_SLACK {
        let pair = MeasurementPair::new(
            LocalOperator::identity(party),
            LocalOperator::new(party, [[Complex::new(0.0, 0.0); 2]; 2])?,
            label,
        )?;
        let record = WStepRecord {
            party,
            retained: old,
            new_weight: pivot,
            p1: 1.0,
            p2: 0.0,
            trivial: true,
        };
        return Ok((pair, record, sigma_z_correction()));
    }

    let r = retained_target;
    let w = (old * old + pivot * pivot - r * r).sqrt();
    if w.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::DegenerateStep(format!(
            "party {party}: new weight vanishes for retained target {r}"
        )));
    }
    let p1 = (w + pivot) / (2.0 * w);
    let p2 = (w - pivot) / (2.0 * w);
    let ratio = r / old;
    let cross = (1.0 - ratio * ratio).max(0.0).sqrt();

    let build = |k: usize| -> LocalOperator {
        let (pk, pk_other, sign) = if k == 1 {
            (p1, p2, 1.0)
        } else {
            (p2, p1, -1.0)
        };
        let diag_kept = pk.sqrt();
        let off = sign * pk_other.sqrt() * cross;
        match party {
            // sqrt(p_k) (r/old)|0><0| ± sqrt(p_{3-k}) cross |1><0| + sqrt(p_k)|1><1|
            Party::A => real_op(party, [[diag_kept * ratio, 0.0], [off, diag_kept]]),
            // sqrt(p_k)|0><0| ± sqrt(p_{3-k}) cross |0><1| + sqrt(p_k) (r/old)|1><1|
            Party::B | Party::C => real_op(party, [[diag_kept, off], [0.0, diag_kept * ratio]]),
        }
    };

    let pair = MeasurementPair::new(build(1), build(2), label)?;
    let record = WStepRecord {
        party,
        retained: r,
        new_weight: w,
        p1,
        p2,
        trivial: false,
    };
    Ok((pair, record, sigma_z_correction()))
}

fn real_op(party: Party, m: [[f64; 2]; 2]) -> LocalOperator {
    LocalOperator::from_real(party, m).expect("finite entries")
}

/// The monotone feasibility condition: possible iff `x_i >= x_i'` for
/// `i = 1, 2, 3`, each within the boundary slack. The verdict lists every
/// violated index.
pub fn w_feasible(initial: &WCoefficients, target: &WCoefficients) -> FeasibilityVerdict {
    let xi = initial.x();
    let xt = target.x();
    let violated: Vec<usize> = (1..4).filter(|&i| xt[i] > xi[i] + MONOTONE_SLACK).collect();
    if violated.is_empty() {
        FeasibilityVerdict::feasible("target respects the monotone condition x_i >= x_i'")
    } else {
        FeasibilityVerdict {
            feasible: false,
            reason: format!(
                "monotone condition violated at index {}: x_i' must not exceed x_i",
                violated
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            violated_quantity: None,
            violated_indices: violated,
        }
    }
}

/// Plans the full three-step chain `A -> B -> C` from `initial` to `target`
/// in the flipped basis, returning the executable plan and the per-step
/// records with their closed-form probabilities.
pub fn w_chain_plan(
    initial: &WCoefficients,
    target: &WCoefficients,
) -> Result<(ProtocolPlan, Vec<WStepRecord>)> {
    let verdict = w_feasible(initial, target);
    if !verdict.feasible {
        return Err(Error::MonotonicityViolation(verdict.reason));
    }
    let xt = target.x();
    let mut current = initial.chain_state();
    let mut steps = Vec::with_capacity(3);
    let mut records = Vec::with_capacity(3);
    // step A retains the target |000> slot (x1'), B the |110> slot (x2'),
    // C the |101> slot (x3')
    for (party, retained) in [(Party::A, xt[1]), (Party::B, xt[2]), (Party::C, xt[3])] {
        let (pair, record, correction) = w_step_pair(&current, party, retained)?;
        current = current.with_step_applied(party, record.retained, record.new_weight);
        steps.push(ProtocolStep::new(pair, correction));
        records.push(record);
    }
    // Conservation forces the final |100> weight onto the target's x0'; the
    // chain cannot overshoot it when the monotone condition holds.
    debug_assert!((current.c100 - xt[0]).abs() <= 1e-9);
    let plan = ProtocolPlan::new(
        initial.flipped_state(),
        steps,
        target.flipped_state(),
        "w-chain",
    )?;
    Ok((plan, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Tolerances, BRANCH_PROB_FLOOR};
    use crate::entangle::{classify, ckw_tangle, ClassLabel};
    use crate::qcore::{fidelity_up_to_phase, povm_complete};
    use crate::runner::execute_exhaustive;
    use approx::assert_abs_diff_eq;

    #[test]
    fn flip_maps_standard_w_to_canonical_form() {
        let flipped = w_canonical_flip(&StateVector::standard_w());
        let t = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(flipped.amplitude(0).re, t, epsilon = 1e-12);
        assert_abs_diff_eq!(flipped.amplitude(5).re, t, epsilon = 1e-12);
        assert_abs_diff_eq!(flipped.amplitude(6).re, t, epsilon = 1e-12);

        let twice = w_canonical_flip(&flipped);
        assert!(fidelity_up_to_phase(&twice, &StateVector::standard_w()) > 1.0 - 1e-12);

        let moved = w_canonical_flip(&StateVector::basis(0));
        assert_abs_diff_eq!(moved.amplitude(4).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn step_a_standard_w_closed_forms() {
        let chain = WCoefficients::standard().chain_state();
        let (pair, record, _) = w_step_pair(&chain, Party::A, 0.5).unwrap();
        assert!(povm_complete(&pair));
        // alpha1 = sqrt(x0² + x1² - alpha0²) = sqrt(1/3 - 1/4)
        assert_abs_diff_eq!(record.new_weight, (1.0f64 / 12.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(record.p1, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(record.p2, 0.5, epsilon = 1e-12);

        // branch outputs have the printed shape
        let s = chain.state_vector();
        let out1 = apply_local(pair.first(), &s).normalized();
        assert_abs_diff_eq!(out1.amplitude(0).re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(out1.amplitude(4).re, record.new_weight, epsilon = 1e-12);
        let out2 = apply_local(pair.second(), &s).normalized();
        assert_abs_diff_eq!(out2.amplitude(4).re, -record.new_weight, epsilon = 1e-12);
    }

    #[test]
    fn sigma_z_correction_restores_branch_one() {
        let chain = WCoefficients::standard().chain_state();
        for (party, retained) in [(Party::A, 0.4), (Party::B, 0.5), (Party::C, 0.31)] {
            let (pair, _, correction) = w_step_pair(&chain, party, retained).unwrap();
            let s = chain.state_vector();
            let b1 = apply_local(pair.first(), &s).normalized();
            let b2 = apply_local(pair.second(), &s).normalized();
            let fixed = correction.apply(&b2);
            let f = fidelity_up_to_phase(&b1, &fixed);
            assert!(f > 1.0 - 1e-12, "party {party}: fidelity {f}");
        }
    }

    #[test]
    fn trivial_step_at_the_boundary() {
        let chain = WCoefficients::standard().chain_state();
        let (pair, record, _) = w_step_pair(&chain, Party::B, chain.c110).unwrap();
        assert!(record.trivial);
        assert_abs_diff_eq!(record.p1, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(record.p2, 0.0, epsilon = 1e-15);
        assert!(povm_complete(&pair));
        let s = chain.state_vector();
        assert!(apply_local(pair.second(), &s).norm_sqr() < BRANCH_PROB_FLOOR);
    }

    #[test]
    fn step_c_probability_closed_form() {
        // from (alpha0, beta1, x3, beta3) with gamma2 = 0.3 < x3
        let chain = WChainState {
            c000: 0.45,
            c100: 0.4,
            c101: 0.55,
            c110: (1.0f64 - 0.45 * 0.45 - 0.4 * 0.4 - 0.55 * 0.55).sqrt(),
        };
        let (_, record, _) = w_step_pair(&chain, Party::C, 0.3).unwrap();
        let gamma1 = (0.55f64 * 0.55 + 0.4 * 0.4 - 0.09).sqrt();
        assert_abs_diff_eq!(record.new_weight, gamma1, epsilon = 1e-12);
        assert_abs_diff_eq!(record.p1, (gamma1 + 0.4) / (2.0 * gamma1), epsilon = 1e-12);
    }

    #[test]
    fn monotonicity_violation_is_an_error() {
        let chain = WCoefficients::standard().chain_state();
        assert!(matches!(
            w_step_pair(&chain, Party::A, 0.9),
            Err(Error::MonotonicityViolation(_))
        ));
    }

    #[test]
    fn feasibility_monotone_condition() {
        let standard = WCoefficients::standard();
        let target = WCoefficients::new([0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(w_feasible(&standard, &target).feasible);

        let bad = WCoefficients::new([0.1, 0.9, 0.3, (1.0f64 - 0.01 - 0.81 - 0.09).sqrt()])
            .unwrap();
        let verdict = w_feasible(&standard, &bad);
        assert!(!verdict.feasible);
        assert_eq!(verdict.violated_indices, vec![1]);

        assert!(w_feasible(&standard, &standard).feasible);
    }

    #[test]
    fn chain_plan_executes_deterministically() {
        let initial = WCoefficients::standard();
        let x0p = (1.0f64 - 0.25 - 0.3025 - 0.2025).sqrt();
        let target = WCoefficients::new([x0p, 0.5, 0.55, 0.45]).unwrap();
        let (plan, records) = w_chain_plan(&initial, &target).unwrap();
        assert_eq!(records.len(), 3);
        let report = execute_exhaustive(&plan, &Tolerances::default());
        assert_eq!(report.leaves.len(), 8);
        assert!(report.deterministic, "defect {}", report.max_fidelity_defect);
        assert_abs_diff_eq!(report.total_probability, 1.0, epsilon = 1e-10);

        // gamma1 lands on x0' by conservation
        assert_abs_diff_eq!(records[2].new_weight, x0p, epsilon = 1e-12);

        // intermediates stay in the W class with zero tangle
        let mut cur = initial.chain_state();
        for r in &records {
            cur = cur.with_step_applied(r.party, r.retained, r.new_weight);
            let s = cur.state_vector();
            assert!(ckw_tangle(&s) <= 1e-9);
            assert_eq!(classify(&s), ClassLabel::WClass);
        }
    }

    #[test]
    fn identity_chain_is_all_trivial() {
        let initial = WCoefficients::standard();
        let (plan, records) = w_chain_plan(&initial, &initial).unwrap();
        assert!(records.iter().all(|r| r.trivial));
        let report = execute_exhaustive(&plan, &Tolerances::default());
        assert!(report.deterministic);
        // one real path; the null branches are flagged
        let live: Vec<_> = report
            .leaves
            .iter()
            .filter(|l| l.fidelity.is_some())
            .collect();
        assert_eq!(live.len(), 1);
        assert_abs_diff_eq!(live[0].probability, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn chain_with_trivial_last_step() {
        let initial = WCoefficients::standard();
        let t = 1.0 / 3f64.sqrt();
        let x0p = (1.0f64 - 0.16 - 0.25 - t * t).sqrt();
        let target = WCoefficients::new([x0p, 0.4, 0.5, t]).unwrap();
        let (plan, records) = w_chain_plan(&initial, &target).unwrap();
        assert!(records[2].trivial);
        assert_abs_diff_eq!(records[2].p1, 1.0, epsilon = 1e-15);
        let report = execute_exhaustive(&plan, &Tolerances::default());
        assert_eq!(report.leaves.len(), 8);
        assert!(report.deterministic);
    }

    #[test]
    fn infeasible_chain_propagates_monotonicity_error() {
        let initial = WCoefficients::standard();
        let bad = WCoefficients::new([0.1, 0.9, 0.3, (1.0f64 - 0.01 - 0.81 - 0.09).sqrt()])
            .unwrap();
        assert!(matches!(
            w_chain_plan(&initial, &bad),
            Err(Error::MonotonicityViolation(_))
        ));
    }
}
