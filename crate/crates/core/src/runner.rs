//! Branch-tree execution and verification of protocol plans.
//!
//! A plan is an ordered list of two-outcome steps with per-branch unitary
//! corrections. Exhaustive execution walks every branch path, applying the
//! chosen operator, renormalizing by the branch probability, and applying
//! the branch's correction before the next step — the classical
//! communication in LOCC. A plan is deterministic when the leaf
//! probabilities sum to 1 and every leaf matches the target up to global
//! phase.
//!
//! Sampled execution draws branch paths with the exact conditional
//! probabilities using a seeded, per-trial-stream generator, so a report is
//! reproducible from `(plan, trials, seed)` regardless of evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::config::{Tolerances, BRANCH_PROB_FLOOR};
use crate::error::{Error, Result};
use crate::ghz::FeasibilityVerdict;
use crate::qcore::{
    apply_local, fidelity_up_to_phase, Branch, Complex, LuCorrection, MeasurementPair,
    StateVector,
};

/// Two-sided tail probability of a 3-sigma normal deviation; the
/// significance level of the sampling envelope.
const THREE_SIGMA_TAIL: f64 = 2.699_796_063_260_207e-3;

/// One measurement step: the pair plus the correction applied on branch 2
/// (branch 1 maps to the identity correction).
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolStep {
    pair: MeasurementPair,
    branch2_correction: LuCorrection,
}

impl ProtocolStep {
    pub fn new(pair: MeasurementPair, branch2_correction: LuCorrection) -> Self {
        Self {
            pair,
            branch2_correction,
        }
    }

    pub fn pair(&self) -> &MeasurementPair {
        &self.pair
    }

    pub fn branch2_correction(&self) -> &LuCorrection {
        &self.branch2_correction
    }

    fn correction(&self, branch: Branch) -> Option<&LuCorrection> {
        match branch {
            Branch::First => None,
            Branch::Second => Some(&self.branch2_correction),
        }
    }
}

/// An executable protocol: initial state, ordered steps, and the target all
/// leaves are expected to reach.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolPlan {
    initial: StateVector,
    steps: Vec<ProtocolStep>,
    target: StateVector,
    metadata: String,
}

impl ProtocolPlan {
    pub fn new(
        initial: StateVector,
        steps: Vec<ProtocolStep>,
        target: StateVector,
        metadata: impl Into<String>,
    ) -> Result<Self> {
        for (name, s) in [("initial", &initial), ("target", &target)] {
            if !s.is_normalized(1e-9) {
                return Err(Error::InvalidPlan(format!(
                    "{name} state is not normalized (norm {})",
                    s.norm()
                )));
            }
        }
        Ok(Self {
            initial,
            steps,
            target,
            metadata: metadata.into(),
        })
    }

    pub fn initial(&self) -> &StateVector {
        &self.initial
    }

    pub fn steps(&self) -> &[ProtocolStep] {
        &self.steps
    }

    pub fn target(&self) -> &StateVector {
        &self.target
    }

    pub fn metadata(&self) -> &str {
        &self.metadata
    }
}

/// One enumerated branch path.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafRecord {
    /// Branch labels (1 or 2) per step; shorter than the step list when the
    /// path was short-circuited at a vanishing branch.
    pub path: Vec<u8>,
    pub probability: f64,
    /// The corrected, normalized leaf state (the last well-defined state on
    /// a short-circuited path).
    pub state: StateVector,
    /// Fidelity to the plan target, omitted on vanishing-probability paths.
    pub fidelity: Option<f64>,
    /// Fidelity the same path reaches with every correction skipped.
    pub uncorrected_fidelity: Option<f64>,
}

/// Exhaustive branch-tree execution result.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionReport {
    pub leaves: Vec<LeafRecord>,
    pub total_probability: f64,
    pub deterministic: bool,
    pub max_fidelity_defect: f64,
}

/// Enumerates all branch paths of the plan.
///
/// Per path: apply each step's chosen operator, renormalize by the branch
/// probability, multiply probabilities, and apply the branch's correction.
/// Branches below `1e-14` probability are recorded with fidelity omitted and
/// not descended further.
pub fn execute_exhaustive(plan: &ProtocolPlan, tol: &Tolerances) -> ExecutionReport {
    let mut leaves = Vec::new();
    walk(
        plan,
        0,
        Vec::new(),
        1.0,
        plan.initial.clone(),
        Some(plan.initial.clone()),
        &mut leaves,
    );

    let total_probability: f64 = leaves.iter().map(|l| l.probability).sum();
    let max_fidelity_defect = leaves
        .iter()
        .filter_map(|l| l.fidelity)
        .map(|f| 1.0 - f)
        .fold(0.0f64, f64::max);
    let deterministic = (total_probability - 1.0).abs() <= tol.probability
        && leaves
            .iter()
            .all(|l| l.fidelity.is_none_or(|f| f >= 1.0 - tol.fidelity));
    ExecutionReport {
        leaves,
        total_probability,
        deterministic,
        max_fidelity_defect,
    }
}

fn walk(
    plan: &ProtocolPlan,
    depth: usize,
    path: Vec<u8>,
    probability: f64,
    corrected: StateVector,
    uncorrected: Option<StateVector>,
    leaves: &mut Vec<LeafRecord>,
) {
    if depth == plan.steps.len() {
        let fidelity = Some(fidelity_up_to_phase(&corrected, &plan.target));
        let uncorrected_fidelity =
            uncorrected.map(|u| fidelity_up_to_phase(&u, &plan.target));
        leaves.push(LeafRecord {
            path,
            probability,
            state: corrected,
            fidelity,
            uncorrected_fidelity,
        });
        return;
    }
    let step = &plan.steps[depth];
    for branch in Branch::BOTH {
        let mut path = path.clone();
        path.push(branch.label());
        let out = apply_local(step.pair.operator(branch), &corrected);
        let p = out.norm_sqr();
        let leaf_probability = probability * p;
        if p < BRANCH_PROB_FLOOR {
            leaves.push(LeafRecord {
                path,
                probability: leaf_probability,
                state: corrected.clone(),
                fidelity: None,
                uncorrected_fidelity: None,
            });
            continue;
        }
        let renormalized = out.scaled(Complex::new(1.0 / p.sqrt(), 0.0));
        let next_corrected = match step.correction(branch) {
            Some(c) => c.apply(&renormalized),
            None => renormalized,
        };
        let next_uncorrected = uncorrected.as_ref().and_then(|u| {
            let out = apply_local(step.pair.operator(branch), u);
            let pu = out.norm_sqr();
            (pu >= BRANCH_PROB_FLOOR)
                .then(|| out.scaled(Complex::new(1.0 / pu.sqrt(), 0.0)))
        });
        walk(
            plan,
            depth + 1,
            path,
            leaf_probability,
            next_corrected,
            next_uncorrected,
            leaves,
        );
    }
}

/// Seeded Monte Carlo execution result.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledReport {
    pub trials: u64,
    pub seed: u64,
    /// Branch paths in exhaustive enumeration order.
    pub paths: Vec<Vec<u8>>,
    pub exact_probabilities: Vec<f64>,
    pub frequencies: Vec<f64>,
    /// Pearson deviation statistic of the sampled counts against the exact
    /// leaf probabilities, over the paths with nonvanishing probability.
    pub statistic: f64,
    /// Chi-square quantile at the 3-sigma significance level for the same
    /// cell count; for a two-leaf plan this is exactly the textbook
    /// `|f - p| <= 3 sqrt(p(1-p)/n)` band.
    pub statistic_bound: f64,
    pub within_three_sigma: bool,
}

/// Samples `trials` branch paths with the exact conditional probabilities.
///
/// Trial `t` draws from an independent generator stream `(seed, t)`, so the
/// report is identical for identical `(plan, trials, seed)` no matter how
/// trials are scheduled.
pub fn execute_sampled(plan: &ProtocolPlan, trials: u64, seed: u64) -> SampledReport {
    assert!(trials >= 1, "at least one trial");
    let exact = execute_exhaustive(plan, &Tolerances::default());
    let paths: Vec<Vec<u8>> = exact.leaves.iter().map(|l| l.path.clone()).collect();
    let exact_probabilities: Vec<f64> = exact.leaves.iter().map(|l| l.probability).collect();
    let total: f64 = exact_probabilities.iter().sum();

    let tree = ProbabilityTree::build(&paths, &exact_probabilities);
    let mut counts = vec![0u64; paths.len()];
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let leaf = tree.sample(&mut rng);
        counts[leaf] += 1;
    }

    let frequencies: Vec<f64> = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    let live: Vec<usize> = (0..paths.len())
        .filter(|&i| exact_probabilities[i] / total >= BRANCH_PROB_FLOOR)
        .collect();
    let statistic: f64 = live
        .iter()
        .map(|&i| {
            let expected = trials as f64 * exact_probabilities[i] / total;
            let observed = counts[i] as f64;
            (observed - expected).powi(2) / expected
        })
        .sum();
    let df = live.len().saturating_sub(1);
    let statistic_bound = if df == 0 {
        0.0
    } else {
        ChiSquared::new(df as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(1.0 - THREE_SIGMA_TAIL)
    };
    let within_three_sigma = statistic <= statistic_bound + 1e-12;
    SampledReport {
        trials,
        seed,
        paths,
        exact_probabilities,
        frequencies,
        statistic,
        statistic_bound,
        within_three_sigma,
    }
}

/// Conditional-probability tree over the enumerated leaf paths. Collapses
/// the per-trial work to at most one uniform draw per step.
struct ProbabilityTree {
    root: Node,
}

enum Node {
    Leaf(usize),
    Split { p_first: f64, first: Box<Node>, second: Box<Node> },
}

impl ProbabilityTree {
    fn build(paths: &[Vec<u8>], probabilities: &[f64]) -> Self {
        let indices: Vec<usize> = (0..paths.len()).collect();
        Self {
            root: Self::node(paths, probabilities, &indices, 0),
        }
    }

    fn node(paths: &[Vec<u8>], probs: &[f64], indices: &[usize], depth: usize) -> Node {
        if indices.len() == 1 && paths[indices[0]].len() == depth {
            return Node::Leaf(indices[0]);
        }
        let firsts: Vec<usize> = indices
            .iter()
            .copied()
            .filter(|&i| paths[i].get(depth) == Some(&1))
            .collect();
        let seconds: Vec<usize> = indices
            .iter()
            .copied()
            .filter(|&i| paths[i].get(depth) == Some(&2))
            .collect();
        debug_assert_eq!(firsts.len() + seconds.len(), indices.len());
        let w1: f64 = firsts.iter().map(|&i| probs[i]).sum();
        let w2: f64 = seconds.iter().map(|&i| probs[i]).sum();
        let total = w1 + w2;
        let p_first = if total > 0.0 { w1 / total } else { 0.5 };
        Node::Split {
            p_first,
            first: Box::new(Self::node(paths, probs, &firsts, depth + 1)),
            second: Box::new(Self::node(paths, probs, &seconds, depth + 1)),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(i) => return *i,
                Node::Split {
                    p_first,
                    first,
                    second,
                } => {
                    node = if rng.random::<f64>() < *p_first {
                        first
                    } else {
                        second
                    };
                }
            }
        }
    }
}

/// Certifies an exhaustive report: feasible iff the plan proved
/// deterministic, otherwise the reason names the probability deficit or the
/// first failing leaf.
pub fn verify_deterministic(report: &ExecutionReport, tol: &Tolerances) -> FeasibilityVerdict {
    if report.deterministic {
        return FeasibilityVerdict::feasible(
            "all leaves reach the target with total probability 1",
        );
    }
    let deficit = (report.total_probability - 1.0).abs();
    if deficit > tol.probability {
        return FeasibilityVerdict {
            feasible: false,
            reason: format!(
                "probability deficit: leaf probabilities sum to {:.12}",
                report.total_probability
            ),
            violated_quantity: Some(deficit),
            violated_indices: Vec::new(),
        };
    }
    let failing = report
        .leaves
        .iter()
        .find(|l| l.fidelity.is_some_and(|f| f < 1.0 - tol.fidelity))
        .expect("a non-deterministic report without deficit has a failing leaf");
    FeasibilityVerdict {
        feasible: false,
        reason: format!(
            "leaf {:?} fidelity defect {:.3e}",
            failing.path,
            1.0 - failing.fidelity.unwrap()
        ),
        violated_quantity: failing.fidelity.map(|f| 1.0 - f),
        violated_indices: Vec::new(),
    }
}
