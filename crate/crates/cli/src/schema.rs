//! JSON document formats: states, plans, and reports.
//!
//! One document per file, UTF-8, strict parsing: unknown fields are rejected
//! so a typo in a workflow fails loudly instead of being ignored. Numbers
//! round-trip losslessly (shortest-representation float serialization).

use serde::{Deserialize, Serialize};
use serde_json::Value;

use trilocc::{
    CanonicalCoefficients, Complex, EpPhase, ExecutionReport, FeasibilityVerdict, InvariantSet,
    LocalOperator, LuCorrection, MeasurementPair, Party, ProtocolPlan, ProtocolStep, SampledReport,
    StateVector, Tolerances, WCoefficients,
};

#[derive(Debug)]
pub struct SchemaError(pub String);

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for SchemaError {}

fn err(msg: impl Into<String>) -> SchemaError {
    SchemaError(msg.into())
}

/// Parsed state input: the document kind is preserved so commands can insist
/// on coefficient forms where they need them.
#[derive(Debug, Clone)]
pub enum StateDocument {
    Canonical {
        coefficients: CanonicalCoefficients,
        label: Option<String>,
    },
    W {
        coefficients: WCoefficients,
        label: Option<String>,
    },
    Vector {
        state: StateVector,
        label: Option<String>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalDoc {
    #[allow(dead_code)]
    kind: String,
    lambda: [f64; 5],
    phi: f64,
    #[serde(default)]
    label: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WDoc {
    #[allow(dead_code)]
    kind: String,
    x: [f64; 4],
    #[serde(default)]
    label: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorDoc {
    #[allow(dead_code)]
    kind: String,
    re: [f64; 8],
    im: [f64; 8],
    #[serde(default)]
    label: Option<String>,
}

impl StateDocument {
    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| err(format!("malformed JSON: {e}")))?;
        let kind = value
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| err("state document needs a string \"kind\" field"))?;
        match kind {
            "canonical" => {
                let doc: CanonicalDoc = serde_json::from_value(value.clone())
                    .map_err(|e| err(format!("bad canonical document: {e}")))?;
                let coefficients = CanonicalCoefficients::new(doc.lambda, doc.phi)
                    .map_err(|e| err(e.to_string()))?;
                Ok(StateDocument::Canonical {
                    coefficients,
                    label: doc.label,
                })
            }
            "w" => {
                let doc: WDoc = serde_json::from_value(value.clone())
                    .map_err(|e| err(format!("bad w document: {e}")))?;
                let coefficients =
                    WCoefficients::new(doc.x).map_err(|e| err(e.to_string()))?;
                Ok(StateDocument::W {
                    coefficients,
                    label: doc.label,
                })
            }
            "vector" => {
                let doc: VectorDoc = serde_json::from_value(value.clone())
                    .map_err(|e| err(format!("bad vector document: {e}")))?;
                let mut amp = [Complex::new(0.0, 0.0); 8];
                for i in 0..8 {
                    amp[i] = Complex::new(doc.re[i], doc.im[i]);
                }
                let state = StateVector::new(amp).map_err(|e| err(e.to_string()))?;
                if !state.is_normalized(1e-9) {
                    return Err(err(format!(
                        "vector document is not normalized (norm {})",
                        state.norm()
                    )));
                }
                Ok(StateDocument::Vector {
                    state,
                    label: doc.label,
                })
            }
            other => Err(err(format!(
                "unknown state kind {other:?}; expected canonical, w, or vector"
            ))),
        }
    }

    /// The full 8-amplitude state (flipped chain form for W documents).
    pub fn state_vector(&self) -> StateVector {
        match self {
            StateDocument::Canonical { coefficients, .. } => {
                trilocc::state_from_canonical(coefficients)
            }
            StateDocument::W { coefficients, .. } => coefficients.flipped_state(),
            StateDocument::Vector { state, .. } => state.clone(),
        }
    }

    /// Canonical coefficients when the document carries them directly
    /// (W documents map onto the flipped canonical form with `l4 = 0`).
    pub fn canonical(&self) -> Option<CanonicalCoefficients> {
        match self {
            StateDocument::Canonical { coefficients, .. } => Some(coefficients.clone()),
            StateDocument::W { coefficients, .. } => {
                let [x0, x1, x2, x3] = coefficients.x();
                CanonicalCoefficients::new([x1, x0, x3, x2, 0.0], 0.0).ok()
            }
            StateDocument::Vector { .. } => None,
        }
    }

    pub fn as_w(&self) -> Option<WCoefficients> {
        match self {
            StateDocument::W { coefficients, .. } => Some(*coefficients),
            StateDocument::Canonical { coefficients, .. } => {
                let [l0, l1, l2, l3, l4] = coefficients.lambda();
                if l4 > 1e-9 || (coefficients.phi() > 1e-9 && l1 > 1e-9) {
                    return None;
                }
                WCoefficients::new([l1, l0, l3, l2]).ok()
            }
            StateDocument::Vector { .. } => None,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            StateDocument::Canonical { label, .. }
            | StateDocument::W { label, .. }
            | StateDocument::Vector { label, .. } => label.as_deref(),
        }
    }
}

// ---------------------------------------------------------------------------
// plan files
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VecJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl VecJson {
    fn from_state(s: &StateVector) -> Self {
        Self {
            re: s.amplitudes().iter().map(|z| z.re).collect(),
            im: s.amplitudes().iter().map(|z| z.im).collect(),
        }
    }

    fn to_state(&self) -> Result<StateVector, SchemaError> {
        if self.re.len() != 8 || self.im.len() != 8 {
            return Err(err("state vectors carry exactly 8 amplitudes"));
        }
        let mut amp = [Complex::new(0.0, 0.0); 8];
        for i in 0..8 {
            amp[i] = Complex::new(self.re[i], self.im[i]);
        }
        StateVector::new(amp).map_err(|e| err(e.to_string()))
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MatJson {
    pub re: [[f64; 2]; 2],
    pub im: [[f64; 2]; 2],
}

impl MatJson {
    fn from_operator(op: &LocalOperator) -> Self {
        let m = op.matrix();
        Self {
            re: [[m[0][0].re, m[0][1].re], [m[1][0].re, m[1][1].re]],
            im: [[m[0][0].im, m[0][1].im], [m[1][0].im, m[1][1].im]],
        }
    }

    fn to_operator(&self, party: Party) -> Result<LocalOperator, SchemaError> {
        let entry = |r: usize, c: usize| Complex::new(self.re[r][c], self.im[r][c]);
        LocalOperator::new(party, [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]])
            .map_err(|e| err(e.to_string()))
    }
}

fn parse_party(s: &str) -> Result<Party, SchemaError> {
    match s {
        "A" => Ok(Party::A),
        "B" => Ok(Party::B),
        "C" => Ok(Party::C),
        other => Err(err(format!("unknown party {other:?}"))),
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CorrectionJson {
    pub u_a: MatJson,
    pub u_b: MatJson,
    pub u_c: MatJson,
}

impl CorrectionJson {
    fn from_correction(c: &LuCorrection) -> Self {
        Self {
            u_a: MatJson::from_operator(c.factor(Party::A)),
            u_b: MatJson::from_operator(c.factor(Party::B)),
            u_c: MatJson::from_operator(c.factor(Party::C)),
        }
    }

    fn to_correction(&self) -> Result<LuCorrection, SchemaError> {
        LuCorrection::new(
            self.u_a.to_operator(Party::A)?,
            self.u_b.to_operator(Party::B)?,
            self.u_c.to_operator(Party::C)?,
        )
        .map_err(|e| err(e.to_string()))
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StepJson {
    pub party: String,
    pub label: String,
    pub m1: MatJson,
    pub m2: MatJson,
    pub branch2_correction: CorrectionJson,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PlanDocument {
    pub metadata: String,
    pub initial: VecJson,
    pub target: VecJson,
    pub steps: Vec<StepJson>,
}

impl PlanDocument {
    pub fn from_plan(plan: &ProtocolPlan) -> Self {
        Self {
            metadata: plan.metadata().to_string(),
            initial: VecJson::from_state(plan.initial()),
            target: VecJson::from_state(plan.target()),
            steps: plan
                .steps()
                .iter()
                .map(|step| StepJson {
                    party: step.pair().party().to_string(),
                    label: step.pair().label().to_string(),
                    m1: MatJson::from_operator(step.pair().first()),
                    m2: MatJson::from_operator(step.pair().second()),
                    branch2_correction: CorrectionJson::from_correction(step.branch2_correction()),
                })
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        serde_json::from_str(text).map_err(|e| err(format!("malformed plan JSON: {e}")))
    }

    pub fn to_plan(&self) -> Result<ProtocolPlan, SchemaError> {
        let mut steps = Vec::with_capacity(self.steps.len());
        for s in &self.steps {
            let party = parse_party(&s.party)?;
            let pair = MeasurementPair::new(
                s.m1.to_operator(party)?,
                s.m2.to_operator(party)?,
                s.label.clone(),
            )
            .map_err(|e| err(e.to_string()))?;
            steps.push(ProtocolStep::new(pair, s.branch2_correction.to_correction()?));
        }
        ProtocolPlan::new(
            self.initial.to_state()?,
            steps,
            self.target.to_state()?,
            self.metadata.clone(),
        )
        .map_err(|e| err(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// report payloads
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct InvariantsJson {
    pub c_ab: f64,
    pub c_ac: f64,
    pub c_bc: f64,
    pub tau: f64,
    /// The phase in `[0, pi]`, or the string `"indefinite"`.
    pub ep_phase: Value,
}

impl InvariantsJson {
    pub fn from_invariants(inv: &InvariantSet) -> Self {
        Self {
            c_ab: inv.c_ab,
            c_ac: inv.c_ac,
            c_bc: inv.c_bc,
            tau: inv.tau,
            ep_phase: match inv.ep_phase {
                EpPhase::Definite(p) => serde_json::json!(p),
                EpPhase::Indefinite => serde_json::json!("indefinite"),
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerdictJson {
    pub feasible: bool,
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violated_quantity: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violated_indices: Vec<usize>,
}

impl VerdictJson {
    pub fn from_verdict(v: &FeasibilityVerdict) -> Self {
        Self {
            feasible: v.feasible,
            reason: v.reason.clone(),
            violated_quantity: v.violated_quantity,
            violated_indices: v.violated_indices.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct LeafJson {
    pub path: Vec<u8>,
    pub probability: f64,
    pub state: VecJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uncorrected_fidelity: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ExecutionJson {
    pub deterministic: bool,
    pub total_probability: f64,
    pub max_fidelity_defect: f64,
    pub leaves: Vec<LeafJson>,
}

impl ExecutionJson {
    pub fn from_report(report: &ExecutionReport) -> Self {
        Self {
            deterministic: report.deterministic,
            total_probability: report.total_probability,
            max_fidelity_defect: report.max_fidelity_defect,
            leaves: report
                .leaves
                .iter()
                .map(|l| LeafJson {
                    path: l.path.clone(),
                    probability: l.probability,
                    state: VecJson::from_state(&l.state),
                    fidelity: l.fidelity,
                    uncorrected_fidelity: l.uncorrected_fidelity,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SampledJson {
    pub trials: u64,
    pub seed: u64,
    pub paths: Vec<Vec<u8>>,
    pub exact_probabilities: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub statistic: f64,
    pub statistic_bound: f64,
    pub within_three_sigma: bool,
}

impl SampledJson {
    pub fn from_report(report: &SampledReport) -> Self {
        Self {
            trials: report.trials,
            seed: report.seed,
            paths: report.paths.clone(),
            exact_probabilities: report.exact_probabilities.clone(),
            frequencies: report.frequencies.clone(),
            statistic: report.statistic,
            statistic_bound: report.statistic_bound,
            within_three_sigma: report.within_three_sigma,
        }
    }
}

// ---------------------------------------------------------------------------
// top-level report
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub tol_complete: f64,
    pub tol_lue: f64,
    pub tol_prob: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ConfigEcho {
    pub fn new(tol: &Tolerances) -> Self {
        Self {
            tol_complete: tol.completeness,
            tol_lue: tol.lue,
            tol_prob: tol.probability,
            route: None,
            mode: None,
            trials: None,
            seed: None,
        }
    }
}

/// Every command emits one of these on stdout, whatever the exit code.
#[derive(Debug, Serialize)]
pub struct ReportDocument {
    pub command: String,
    pub config: ConfigEcho,
    /// `"ok"`, `"infeasible"`, or `"error"`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
}
