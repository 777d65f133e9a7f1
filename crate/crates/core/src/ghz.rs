//! Deterministic GHZ-class measurement protocols.
//!
//! Starting from the standard GHZ state, a single party can reach any
//! GHZ-type target with at most one nonzero bipartite concurrence, and two
//! parties measuring in sequence can reach any target with exactly one
//! vanishing concurrence. The no-go condition closes the family: a target
//! with all three concurrences nonzero (an EP-definite state) cannot be
//! reached deterministically, so feasibility amounts to
//! `C_AB C_AC C_BC = 0`.
//!
//! Every branch-2 output is related to branch 1 by explicit local unitaries;
//! the constructors return those corrections so the runner can verify them
//! instead of trusting them.

use crate::config::{CONCURRENCE_FLOOR, TANGLE_THRESHOLD};
use crate::entangle::{invariants_from_canonical, CanonicalCoefficients, InvariantSet};
use crate::error::{Error, Result};
use crate::qcore::{
    apply_local, state_from_canonical, Branch, Complex, LocalOperator, LuCorrection,
    MeasurementPair, Party, StateVector,
};
use crate::runner::{ProtocolPlan, ProtocolStep};

/// A coefficient slot that must vanish for a pattern does so within this
/// tolerance; same bar for the canonical phase of real-coefficient targets.
const SLOT_TOL: f64 = 1e-9;

/// Which bipartite concurrences a single-party target is allowed to carry.
/// The measuring party is the one not named by the pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcurrencePattern {
    /// Only `C_BC` may be nonzero; party A measures.
    OnlyBc,
    /// Only `C_AC` may be nonzero; party B measures.
    OnlyAc,
    /// Only `C_AB` may be nonzero; party C measures.
    OnlyAb,
}

impl ConcurrencePattern {
    pub fn measuring_party(self) -> Party {
        match self {
            ConcurrencePattern::OnlyBc => Party::A,
            ConcurrencePattern::OnlyAc => Party::B,
            ConcurrencePattern::OnlyAb => Party::C,
        }
    }
}

/// A GHZ-class target for the single-party protocols: canonical coefficients
/// plus the concurrence pattern they must respect.
#[derive(Debug, Clone, PartialEq)]
pub struct GhzTarget {
    coefficients: CanonicalCoefficients,
    pattern: ConcurrencePattern,
}

impl GhzTarget {
    pub fn new(coefficients: CanonicalCoefficients, pattern: ConcurrencePattern) -> Result<Self> {
        let [l0, l1, l2, l3, l4] = coefficients.lambda();
        require_real_phase(&coefficients)?;
        if 4.0 * l0 * l0 * l4 * l4 <= TANGLE_THRESHOLD {
            return Err(Error::InvalidTarget(
                "GHZ-type target needs nonzero l0 and l4 (nonzero three-tangle)".into(),
            ));
        }
        let (zeros, names) = match pattern {
            ConcurrencePattern::OnlyBc => ([l2, l3], "l2, l3"),
            ConcurrencePattern::OnlyAc => ([l1, l3], "l1, l3"),
            ConcurrencePattern::OnlyAb => ([l1, l2], "l1, l2"),
        };
        if zeros.iter().any(|&z| z > SLOT_TOL) {
            return Err(Error::InvalidTarget(format!(
                "pattern {pattern:?} forces {names} to vanish"
            )));
        }
        Ok(Self {
            coefficients,
            pattern,
        })
    }

    pub fn coefficients(&self) -> &CanonicalCoefficients {
        &self.coefficients
    }

    pub fn pattern(&self) -> ConcurrencePattern {
        self.pattern
    }
}

fn require_real_phase(c: &CanonicalCoefficients) -> Result<()> {
    let phi = c.phi();
    let wrapped = phi.min((std::f64::consts::TAU - phi).abs());
    if c.lambda()[1] > SLOT_TOL && wrapped > SLOT_TOL {
        return Err(Error::InvalidTarget(
            "protocol targets use real coefficients (phi = 0); a phased target is \
             local-unitary equivalent to its phi = 0 form"
                .into(),
        ));
    }
    Ok(())
}

/// Outcome of a feasibility check, with the violated quantity when the
/// answer is no.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    pub reason: String,
    /// `C_AB * C_AC * C_BC` for an infeasible GHZ target.
    pub violated_quantity: Option<f64>,
    /// Indices of the violated monotonicity bounds for a W target.
    pub violated_indices: Vec<usize>,
}

impl FeasibilityVerdict {
    pub fn feasible(reason: impl Into<String>) -> Self {
        Self {
            feasible: true,
            reason: reason.into(),
            violated_quantity: None,
            violated_indices: Vec::new(),
        }
    }
}

fn real_op(party: Party, m: [[f64; 2]; 2]) -> LocalOperator {
    LocalOperator::from_real(party, m).expect("finite entries")
}

/// `(a I + b (-i sigma_y)) / sqrt(a² + b²)` — the rotation-like unitaries the
/// corrections are built from.
fn rotation(party: Party, a: f64, b: f64) -> LocalOperator {
    let n = (a * a + b * b).sqrt();
    real_op(party, [[a / n, -b / n], [b / n, a / n]])
}

fn i_sigma_y(party: Party) -> LocalOperator {
    real_op(party, [[0.0, 1.0], [-1.0, 0.0]])
}

fn minus_i_sigma_y(party: Party) -> LocalOperator {
    real_op(party, [[0.0, -1.0], [1.0, 0.0]])
}

fn minus_sigma_x(party: Party) -> LocalOperator {
    real_op(party, [[0.0, -1.0], [-1.0, 0.0]])
}

/// The single-party two-outcome pair for a one-nonzero-concurrence target,
/// with the local unitaries mapping branch 2 onto branch 1.
///
/// Both branch probabilities on the standard GHZ state are 1/2. The scale
/// relating the branches is `kappa = sqrt(l0² + l1²)/l4` for party A and
/// `l0/sqrt(l_j² + l4²)` for parties B and C.
pub fn single_party_pair(target: &GhzTarget) -> Result<(MeasurementPair, LuCorrection)> {
    let [l0, l1, l2, l3, l4] = target.coefficients().lambda();
    match target.pattern() {
        ConcurrencePattern::OnlyBc => {
            let denom = l4;
            if denom <= 1e-12 || l0 * l0 + l1 * l1 <= 1e-24 {
                return Err(Error::Infeasible(
                    "kappa undefined for this degenerate target".into(),
                ));
            }
            let kappa = (l0 * l0 + l1 * l1).sqrt() / l4;
            let m1 = real_op(Party::A, [[l0, 0.0], [l1, l4]]);
            let m2 = real_op(Party::A, [[l0 / kappa, 0.0], [-l1 / kappa, kappa * l4]]);
            let pair = MeasurementPair::new(m1, m2, "ghz-single-a")?;
            // U_A = (-l1 I - i l0 sigma_y)/sqrt(l0²+l1²), U_B = i sigma_y, U_C = -sigma_x
            let correction = LuCorrection::new(
                rotation(Party::A, -l1, l0),
                i_sigma_y(Party::B),
                minus_sigma_x(Party::C),
            )?;
            Ok((pair, correction))
        }
        ConcurrencePattern::OnlyAc => {
            let denom = (l2 * l2 + l4 * l4).sqrt();
            if denom <= 1e-12 || l0 <= 1e-12 {
                return Err(Error::Infeasible(
                    "kappa undefined for this degenerate target".into(),
                ));
            }
            let kappa = l0 / denom;
            let m1 = real_op(Party::B, [[l0, l2], [0.0, l4]]);
            let m2 = real_op(Party::B, [[l0 / kappa, -kappa * l2], [0.0, kappa * l4]]);
            let pair = MeasurementPair::new(m1, m2, "ghz-single-b")?;
            // U_A = i sigma_y, U_B = (l2 I - i l4 sigma_y)/sqrt(l2²+l4²), U_C = -sigma_x
            let correction = LuCorrection::new(
                i_sigma_y(Party::A),
                rotation(Party::B, l2, l4),
                minus_sigma_x(Party::C),
            )?;
            Ok((pair, correction))
        }
        ConcurrencePattern::OnlyAb => {
            let denom = (l3 * l3 + l4 * l4).sqrt();
            if denom <= 1e-12 || l0 <= 1e-12 {
                return Err(Error::Infeasible(
                    "kappa undefined for this degenerate target".into(),
                ));
            }
            let kappa = l0 / denom;
            let m1 = real_op(Party::C, [[l0, l3], [0.0, l4]]);
            let m2 = real_op(Party::C, [[l0 / kappa, -kappa * l3], [0.0, kappa * l4]]);
            let pair = MeasurementPair::new(m1, m2, "ghz-single-c")?;
            // U_A = i sigma_y, U_B = -sigma_x, U_C = (l3 I - i l4 sigma_y)/sqrt(l3²+l4²)
            let correction = LuCorrection::new(
                i_sigma_y(Party::A),
                minus_sigma_x(Party::B),
                rotation(Party::C, l3, l4),
            )?;
            Ok((pair, correction))
        }
    }
}

/// Wraps a single-party pair into a one-step plan from the standard GHZ
/// state.
pub fn single_party_plan(target: &GhzTarget) -> Result<ProtocolPlan> {
    let (pair, correction) = single_party_pair(target)?;
    let label = pair.label().to_string();
    ProtocolPlan::new(
        StateVector::standard_ghz(),
        vec![ProtocolStep::new(pair, correction)],
        state_from_canonical(target.coefficients()),
        label,
    )
}

/// The two-party chains, one order per vanishing concurrence:
/// `(A, B)` reaches targets with `C_AB = 0` (slot `mu3 = 0`),
/// `(A, C)` reaches `C_AC = 0` (slot `mu2 = 0`), and
/// `(B, C)` reaches `C_BC = 0` (constraint `mu1 mu4 = mu2 mu3`).
///
/// The intermediate coefficients are derived from the coupling relations
/// (`l0 mu1 = l1 mu0` with the forced `1/sqrt(2)` coefficient), so the plan
/// is fully determined by the target vector.
pub fn two_party_plan(
    order: (Party, Party),
    target: &CanonicalCoefficients,
) -> Result<ProtocolPlan> {
    require_real_phase(target)?;
    let [mu0, mu1, mu2, mu3, mu4] = target.lambda();
    if 4.0 * mu0 * mu0 * mu4 * mu4 <= TANGLE_THRESHOLD {
        return Err(Error::InvalidTarget(
            "GHZ-type target needs nonzero mu0 and mu4 (nonzero three-tangle)".into(),
        ));
    }
    let half = std::f64::consts::FRAC_1_SQRT_2;

    match order {
        (Party::A, Party::B) => {
            if mu3 > SLOT_TOL {
                return Err(Error::Infeasible(
                    "order (A, B) reaches only targets with mu3 = 0 (C_AB = 0)".into(),
                ));
            }
            let m01 = mu0 * mu0 + mu1 * mu1;
            if m01 <= 1e-24 {
                return Err(Error::Infeasible(
                    "degenerate target: mu0 = mu1 = 0 cannot seed the first step".into(),
                ));
            }
            let s01 = m01.sqrt();
            let l0 = mu0 / (2.0 * m01).sqrt();
            let l1 = mu1 / (2.0 * m01).sqrt();
            let step1_target = GhzTarget::new(
                CanonicalCoefficients::new([l0, l1, 0.0, 0.0, half], 0.0)?,
                ConcurrencePattern::OnlyBc,
            )?;
            let (pair1, corr1) = single_party_pair(&step1_target)?;

            let s24 = (mu2 * mu2 + mu4 * mu4).sqrt();
            let kappa = s01 / s24;
            // mu0/(sqrt(2) l0) = s01 and mu0'/(sqrt(2) l0) = s24
            let m1 = real_op(Party::B, [[s01, mu2], [0.0, mu4]]);
            let m2 = real_op(Party::B, [[s24, -kappa * mu2], [0.0, kappa * mu4]]);
            let pair2 = MeasurementPair::new(m1, m2, "ghz-two-ab")?;
            let corr2 = LuCorrection::new(
                // U_A = (mu0 sigma_x - mu1 sigma_z)/sqrt(mu0²+mu1²)
                real_op(
                    Party::A,
                    [[-mu1 / s01, mu0 / s01], [mu0 / s01, mu1 / s01]],
                ),
                rotation(Party::B, mu2, mu4),
                minus_i_sigma_y(Party::C),
            )?;
            ProtocolPlan::new(
                StateVector::standard_ghz(),
                vec![
                    ProtocolStep::new(pair1, corr1),
                    ProtocolStep::new(pair2, corr2),
                ],
                state_from_canonical(target),
                "ghz-two-ab",
            )
        }
        (Party::A, Party::C) => {
            if mu2 > SLOT_TOL {
                return Err(Error::Infeasible(
                    "order (A, C) reaches only targets with mu2 = 0 (C_AC = 0)".into(),
                ));
            }
            let m01 = mu0 * mu0 + mu1 * mu1;
            if m01 <= 1e-24 {
                return Err(Error::Infeasible(
                    "degenerate target: mu0 = mu1 = 0 cannot seed the first step".into(),
                ));
            }
            let s01 = m01.sqrt();
            let l0 = mu0 / (2.0 * m01).sqrt();
            let l1 = mu1 / (2.0 * m01).sqrt();
            let step1_target = GhzTarget::new(
                CanonicalCoefficients::new([l0, l1, 0.0, 0.0, half], 0.0)?,
                ConcurrencePattern::OnlyBc,
            )?;
            let (pair1, corr1) = single_party_pair(&step1_target)?;

            let s34 = (mu3 * mu3 + mu4 * mu4).sqrt();
            let kappa = s01 / s34;
            let m1 = real_op(Party::C, [[s01, mu3], [0.0, mu4]]);
            let m2 = real_op(Party::C, [[s34, -kappa * mu3], [0.0, kappa * mu4]]);
            let pair2 = MeasurementPair::new(m1, m2, "ghz-two-ac")?;
            let corr2 = LuCorrection::new(
                real_op(
                    Party::A,
                    [[-mu1 / s01, mu0 / s01], [mu0 / s01, mu1 / s01]],
                ),
                minus_i_sigma_y(Party::B),
                rotation(Party::C, mu3, mu4),
            )?;
            ProtocolPlan::new(
                StateVector::standard_ghz(),
                vec![
                    ProtocolStep::new(pair1, corr1),
                    ProtocolStep::new(pair2, corr2),
                ],
                state_from_canonical(target),
                "ghz-two-ac",
            )
        }
        (Party::B, Party::C) => {
            if (mu1 * mu4 - mu2 * mu3).abs() > CONCURRENCE_FLOOR {
                return Err(Error::Infeasible(format!(
                    "order (B, C) reaches only the C_BC = 0 family: mu1 mu4 = mu2 mu3 \
                     violated by {:.3e}",
                    (mu1 * mu4 - mu2 * mu3).abs()
                )));
            }
            if mu2 <= 1e-12 || mu0 <= 1e-12 {
                return Err(Error::Infeasible(
                    "degenerate target: order (B, C) needs mu0 > 0 and mu2 > 0".into(),
                ));
            }
            let s24 = (mu2 * mu2 + mu4 * mu4).sqrt();
            let l2 = mu2 / (2.0f64).sqrt() / s24;
            let l4 = mu4 / (2.0f64).sqrt() / s24;
            let step1_target = GhzTarget::new(
                CanonicalCoefficients::new([half, 0.0, l2, 0.0, l4], 0.0)?,
                ConcurrencePattern::OnlyAc,
            )?;
            let (pair1, corr1) = single_party_pair(&step1_target)?;

            let s34 = (mu3 * mu3 + mu4 * mu4).sqrt();
            let kappa = mu0 * mu4 / (s24 * s34);
            // mu1/(sqrt(2) l2) = mu1 s24 / mu2 and mu4/(sqrt(2) l4) = s24
            let m1 = real_op(Party::C, [[mu0, mu1 * s24 / mu2], [0.0, s24]]);
            let m2 = real_op(
                Party::C,
                [
                    [mu0 / kappa, -kappa * mu1 * s24 / mu2],
                    [0.0, kappa * s24],
                ],
            );
            let pair2 = MeasurementPair::new(m1, m2, "ghz-two-bc")?;
            let corr2 = LuCorrection::new(
                minus_i_sigma_y(Party::A),
                // U_B = (mu2 sigma_z + mu4 sigma_x)/sqrt(mu2²+mu4²)
                real_op(
                    Party::B,
                    [[mu2 / s24, mu4 / s24], [mu4 / s24, -mu2 / s24]],
                ),
                rotation(Party::C, mu3, mu4),
            )?;
            ProtocolPlan::new(
                StateVector::standard_ghz(),
                vec![
                    ProtocolStep::new(pair1, corr1),
                    ProtocolStep::new(pair2, corr2),
                ],
                state_from_canonical(target),
                "ghz-two-bc",
            )
        }
        (p, q) => Err(Error::InvalidTarget(format!(
            "unsupported measurement order ({p}, {q}); the chains are (A,B), (A,C), (B,C)"
        ))),
    }
}

/// Feasibility of a deterministic transformation from the standard GHZ state
/// to a GHZ-class target, decided on the invariant fingerprints alone.
///
/// Feasible iff the smallest target concurrence is at most `1e-10` —
/// the numerically robust restatement of the vanishing-product condition.
pub fn ghz_feasible(source: &InvariantSet, target: &InvariantSet) -> Result<FeasibilityVerdict> {
    let ghz = invariants_from_canonical(&CanonicalCoefficients::standard_ghz());
    if source.max_difference(&ghz) > 1e-9 {
        return Err(Error::InvalidTarget(
            "feasibility is stated for the standard GHZ source fingerprint".into(),
        ));
    }
    if target.tau <= CONCURRENCE_FLOOR {
        return Err(Error::WrongClass(
            "target three-tangle vanishes; use the W-chain planner".into(),
        ));
    }
    let min_c = target.c_ab.min(target.c_ac).min(target.c_bc);
    if min_c <= CONCURRENCE_FLOOR {
        Ok(FeasibilityVerdict::feasible(
            "target has at least one vanishing bipartite concurrence",
        ))
    } else {
        Ok(FeasibilityVerdict {
            feasible: false,
            reason: format!(
                "all three bipartite concurrences are nonzero (min {min_c:.3e}); \
                 a deterministic transformation needs C_AB C_AC C_BC = 0"
            ),
            violated_quantity: Some(target.concurrence_product()),
            violated_indices: Vec::new(),
        })
    }
}

/// Constraint diagnostics for a third measurement on the two-party output
/// family `mu0|000> + mu1|100> + mu2|101> + mu4|111>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThirdStepReport {
    /// `|mu0² + mu1² - 1/2|`.
    pub mu_residual_first: f64,
    /// `|mu2² + mu4² - 1/2|`.
    pub mu_residual_second: f64,
    /// Completeness defect of the supplied pair.
    pub completeness_defect: f64,
    pub branches: [ThirdStepBranch; 2],
}

/// Per-branch constraint data for the third-step diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct ThirdStepBranch {
    pub probability: f64,
    /// `|a2 a3| * |a2 a3 - a1 a4|` on the normalized branch amplitudes; zero
    /// exactly on the vanishing-concurrence family.
    pub ep_constraint_residual: f64,
    pub c_ab: f64,
    pub c_ac: f64,
    pub c_bc: f64,
}

/// Evaluates the deterministic-completion constraints for a party-C
/// measurement on the Eq-53-family state. Diagnostic only: an EP-definite
/// pair of branch outputs shows a residual bounded away from zero.
pub fn three_party_third_step(
    initial: &CanonicalCoefficients,
    pair: &MeasurementPair,
) -> Result<ThirdStepReport> {
    if pair.party() != Party::C {
        return Err(Error::InvalidOperator(
            "the third step measures party C".into(),
        ));
    }
    let [mu0, mu1, mu2, mu3, mu4] = initial.lambda();
    if mu3 > SLOT_TOL {
        return Err(Error::InvalidTarget(
            "third-step initial state lives in the mu3 = 0 family".into(),
        ));
    }
    let state = state_from_canonical(initial);
    let mut branches = Vec::with_capacity(2);
    for branch in Branch::BOTH {
        let out = apply_local(pair.operator(branch), &state);
        let p = out.norm_sqr();
        if p < crate::config::BRANCH_PROB_FLOOR {
            branches.push(ThirdStepBranch {
                probability: p,
                ep_constraint_residual: 0.0,
                c_ab: 0.0,
                c_ac: 0.0,
                c_bc: 0.0,
            });
            continue;
        }
        let leaf = out.scaled(Complex::new(1.0 / p.sqrt(), 0.0));
        let a1 = leaf.amplitude(4);
        let a2 = leaf.amplitude(5);
        let a3 = leaf.amplitude(6);
        let a4 = leaf.amplitude(7);
        let cross = a2 * a3;
        let residual = cross.norm() * (cross - a1 * a4).norm();
        let inv = crate::entangle::invariants_from_state(&leaf)?;
        branches.push(ThirdStepBranch {
            probability: p,
            ep_constraint_residual: residual,
            c_ab: inv.c_ab,
            c_ac: inv.c_ac,
            c_bc: inv.c_bc,
        });
    }
    Ok(ThirdStepReport {
        mu_residual_first: (mu0 * mu0 + mu1 * mu1 - 0.5).abs(),
        mu_residual_second: (mu2 * mu2 + mu4 * mu4 - 0.5).abs(),
        completeness_defect: pair.completeness_defect(),
        branches: [branches.remove(0), branches.remove(0)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Tolerances;
    use crate::entangle::invariants_from_state;
    use crate::qcore::{branch_probability, povm_complete};
    use crate::runner::execute_exhaustive;
    use approx::assert_abs_diff_eq;

    fn target_a(l0: f64, l1: f64, l4: f64) -> GhzTarget {
        GhzTarget::new(
            CanonicalCoefficients::new([l0, l1, 0.0, 0.0, l4], 0.0).unwrap(),
            ConcurrencePattern::OnlyBc,
        )
        .unwrap()
    }

    #[test]
    fn party_a_pair_matches_closed_forms() {
        let target = target_a(0.6, 0.3, 0.55f64.sqrt());
        let (pair, _) = single_party_pair(&target).unwrap();
        assert!(povm_complete(&pair));

        // kappa = sqrt(l0² + l1²)/l4 = sqrt(0.45/0.55)
        let kappa = (0.45f64 / 0.55).sqrt();
        assert_abs_diff_eq!(kappa, 0.9045340337332909, epsilon = 1e-12);
        assert_abs_diff_eq!(
            pair.second().entry(0, 0).re,
            0.6 / kappa,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            pair.second().entry(1, 0).re,
            -0.3 / kappa,
            epsilon = 1e-12
        );

        let ghz = StateVector::standard_ghz();
        assert_abs_diff_eq!(branch_probability(pair.first(), &ghz), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(branch_probability(pair.second(), &ghz), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn identity_limit_target() {
        // l1 = 0, l0 = l4 = 1/sqrt(2): both branches are already the target
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let target = target_a(h, 0.0, h);
        let plan = single_party_plan(&target).unwrap();
        let report = execute_exhaustive(&plan, &Tolerances::default());
        assert!(report.deterministic);
        for leaf in &report.leaves {
            assert!(leaf.fidelity.unwrap() >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn corrections_map_branch_two_onto_branch_one() {
        for (pattern, l) in [
            (ConcurrencePattern::OnlyBc, [0.6, 0.3, 0.0, 0.0, 0.55f64.sqrt()]),
            (ConcurrencePattern::OnlyAc, [0.6, 0.0, 0.3, 0.0, 0.55f64.sqrt()]),
            (ConcurrencePattern::OnlyAb, [0.6, 0.0, 0.0, 0.3, 0.55f64.sqrt()]),
        ] {
            let target = GhzTarget::new(CanonicalCoefficients::new(l, 0.0).unwrap(), pattern)
                .unwrap();
            let (pair, correction) = single_party_pair(&target).unwrap();
            let ghz = StateVector::standard_ghz();
            let b1 = apply_local(pair.first(), &ghz).normalized();
            let b2 = apply_local(pair.second(), &ghz).normalized();
            let fixed = correction.apply(&b2);
            let f = crate::qcore::fidelity_up_to_phase(&b1, &fixed);
            assert!(f >= 1.0 - 1e-12, "pattern {pattern:?}: fidelity {f}");
        }
    }

    #[test]
    fn party_b_leaf_concurrence_pattern() {
        let target = GhzTarget::new(
            CanonicalCoefficients::new([0.6, 0.0, 0.3, 0.0, 0.55f64.sqrt()], 0.0).unwrap(),
            ConcurrencePattern::OnlyAc,
        )
        .unwrap();
        let (pair, _) = single_party_pair(&target).unwrap();
        let leaf = apply_local(pair.first(), &StateVector::standard_ghz()).normalized();
        let inv = invariants_from_state(&leaf).unwrap();
        assert_abs_diff_eq!(inv.c_ac, 2.0 * 0.6 * 0.3, epsilon = 1e-9);
        assert!(inv.c_ab <= 1e-10);
        assert!(inv.c_bc <= 1e-10);
    }

    #[test]
    fn rejects_pattern_mismatch() {
        let c = CanonicalCoefficients::new([0.6, 0.3, 0.3, 0.0, 0.46f64.sqrt()], 0.0);
        let r = GhzTarget::new(c.unwrap(), ConcurrencePattern::OnlyBc);
        assert!(r.is_err());
    }

    #[test]
    fn rejects_phased_target() {
        // a phased target is local-unitary equivalent to its phi = 0 form
        let c = CanonicalCoefficients::new([0.6, 0.3, 0.0, 0.0, 0.55f64.sqrt()], 1.2).unwrap();
        assert!(GhzTarget::new(c, ConcurrencePattern::OnlyBc).is_err());
        // with l1 = 0 the phase slot is inert and any value is accepted
        let c = CanonicalCoefficients::new([0.8, 0.0, 0.0, 0.0, 0.6], 1.2).unwrap();
        assert!(GhzTarget::new(c, ConcurrencePattern::OnlyBc).is_ok());
    }

    #[test]
    fn rejects_unsupported_order() {
        let target = CanonicalCoefficients::new([0.8, 0.0, 0.0, 0.0, 0.6], 0.0).unwrap();
        assert!(matches!(
            two_party_plan((Party::B, Party::A), &target),
            Err(Error::InvalidTarget(_))
        ));
    }

    #[test]
    fn two_party_ab_plan_verifies() {
        // mu = (0.55, 0.35, 0.45, 0, sqrt(1 - 0.6275))
        let mu4 = (1.0f64 - 0.6275).sqrt();
        let target = CanonicalCoefficients::new([0.55, 0.35, 0.45, 0.0, mu4], 0.0).unwrap();
        let plan = two_party_plan((Party::A, Party::B), &target).unwrap();
        let report = execute_exhaustive(&plan, &Tolerances::default());
        assert_eq!(report.leaves.len(), 4);
        assert!(report.deterministic, "defect {}", report.max_fidelity_defect);
        assert_abs_diff_eq!(report.total_probability, 1.0, epsilon = 1e-10);

        for leaf in &report.leaves {
            let inv = invariants_from_state(&leaf.state).unwrap();
            assert!(inv.c_ab <= 1e-10);
            assert_abs_diff_eq!(inv.c_ac, 2.0 * 0.55 * 0.45, epsilon = 1e-9);
            assert_abs_diff_eq!(inv.c_bc, 2.0 * 0.35 * mu4, epsilon = 1e-9);
        }
    }

    #[test]
    fn two_party_bc_needs_the_constraint() {
        // violates mu1 mu4 = mu2 mu3
        let target =
            CanonicalCoefficients::new([0.5, 0.5, 0.5, 0.1, 0.48989794855663565], 0.0).unwrap();
        assert!(matches!(
            two_party_plan((Party::B, Party::C), &target),
            Err(Error::Infeasible(_))
        ));

        // satisfies it: mu1 = mu2 mu3 / mu4
        let (mu2, mu3, mu4) = (0.4, 0.3, 0.5);
        let mu1 = mu2 * mu3 / mu4;
        let mu0 = (1.0f64 - mu1 * mu1 - mu2 * mu2 - mu3 * mu3 - mu4 * mu4).sqrt();
        let target = CanonicalCoefficients::new([mu0, mu1, mu2, mu3, mu4], 0.0).unwrap();
        let plan = two_party_plan((Party::B, Party::C), &target).unwrap();
        let report = execute_exhaustive(&plan, &Tolerances::default());
        assert!(report.deterministic, "defect {}", report.max_fidelity_defect);
        for leaf in &report.leaves {
            let inv = invariants_from_state(&leaf.state).unwrap();
            assert!(inv.c_bc <= 1e-9, "C_BC = {}", inv.c_bc);
        }
    }

    #[test]
    fn two_party_degenerate_second_step() {
        // mu1 = mu2 = 0 degenerates to the single-party family
        let target = CanonicalCoefficients::new([0.8, 0.0, 0.0, 0.0, 0.6], 0.0).unwrap();
        let plan = two_party_plan((Party::A, Party::B), &target).unwrap();
        let report = execute_exhaustive(&plan, &Tolerances::default());
        assert!(report.deterministic);
    }

    #[test]
    fn feasibility_verdicts() {
        let ghz = invariants_from_canonical(&CanonicalCoefficients::standard_ghz());

        let feasible_target = InvariantSet {
            c_ab: 0.2,
            c_ac: 0.3,
            c_bc: 0.0,
            tau: 0.5,
            ep_phase: crate::entangle::EpPhase::Indefinite,
        };
        assert!(ghz_feasible(&ghz, &feasible_target).unwrap().feasible);

        let infeasible_target = InvariantSet {
            c_ab: 0.2,
            c_ac: 0.3,
            c_bc: 0.4,
            tau: 0.3,
            ep_phase: crate::entangle::EpPhase::Definite(1.0),
        };
        let verdict = ghz_feasible(&ghz, &infeasible_target).unwrap();
        assert!(!verdict.feasible);
        assert_abs_diff_eq!(verdict.violated_quantity.unwrap(), 0.024, epsilon = 1e-12);
        assert!(!verdict.reason.is_empty());

        let identity_target = InvariantSet {
            c_ab: 0.0,
            c_ac: 0.0,
            c_bc: 0.0,
            tau: 1.0,
            ep_phase: crate::entangle::EpPhase::Indefinite,
        };
        assert!(ghz_feasible(&ghz, &identity_target).unwrap().feasible);

        let w_target = InvariantSet {
            c_ab: 0.5,
            c_ac: 0.5,
            c_bc: 0.5,
            tau: 0.0,
            ep_phase: crate::entangle::EpPhase::Definite(0.0),
        };
        assert!(matches!(
            ghz_feasible(&ghz, &w_target),
            Err(Error::WrongClass(_))
        ));
    }

    #[test]
    fn third_step_diagnostics() {
        // mu = (1/2, 1/2, 1/2, 1/2) satisfies both mu-constraints
        let initial = CanonicalCoefficients::new([0.5, 0.5, 0.5, 0.0, 0.5], 0.0).unwrap();
        let pair = MeasurementPair::new(
            LocalOperator::from_real(Party::C, [[0.8, 0.1], [0.0, 0.5]]).unwrap(),
            LocalOperator::from_real(Party::C, [[0.6, -0.1], [0.0, 0.8]]).unwrap(),
            "probe",
        )
        .unwrap();
        let report = three_party_third_step(&initial, &pair).unwrap();
        assert_abs_diff_eq!(report.mu_residual_first, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.mu_residual_second, 0.0, epsilon = 1e-12);

        // a branch with a1 = 0 and a2 a3 > 0 has a strictly positive residual
        for b in &report.branches {
            if b.probability > 1e-6 && b.c_ab > 1e-6 && b.c_ac > 1e-6 && b.c_bc > 1e-6 {
                assert!(b.ep_constraint_residual > 1e-6);
            }
        }
    }

    #[test]
    fn third_step_zero_residual_on_vanishing_concurrence_family() {
        let initial = CanonicalCoefficients::new([0.5, 0.5, 0.5, 0.0, 0.5], 0.0).unwrap();
        // identity-like pair keeps the branch in the a3 = 0 family, where
        // a2 a3 = 0 = a1 a4 residual factor
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let pair = MeasurementPair::new(
            LocalOperator::from_real(Party::C, [[h, 0.0], [0.0, h]]).unwrap(),
            LocalOperator::from_real(Party::C, [[h, 0.0], [0.0, h]]).unwrap(),
            "identity-split",
        )
        .unwrap();
        let report = three_party_third_step(&initial, &pair).unwrap();
        for b in &report.branches {
            assert_abs_diff_eq!(b.ep_constraint_residual, 0.0, epsilon = 1e-12);
        }
    }
}
