//! Command-line front end: read states and targets from JSON, compute
//! invariants, classify, plan deterministic transformations, execute plans
//! exhaustively or by sampling, and emit machine-readable reports.
//!
//! Exit codes: 0 success, 1 infeasible target, 2 invalid input,
//! 3 verification failure.

mod schema;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use schema::{
    ConfigEcho, ExecutionJson, InvariantsJson, PlanDocument, ReportDocument, SampledJson,
    SchemaError, StateDocument, VerdictJson,
};
use trilocc::{
    classify, execute_exhaustive, execute_sampled, fidelity_up_to_phase, ghz_feasible,
    invariants_from_canonical, invariants_from_state, single_party_pair, two_party_plan,
    verify_deterministic, w_chain_plan, w_feasible, CanonicalCoefficients, ConcurrencePattern,
    Error as CoreError, GhzTarget, Party, ProtocolPlan, ProtocolStep, StateVector, Tolerances,
};

const EXIT_OK: u8 = 0;
const EXIT_INFEASIBLE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "trilocc",
    version,
    about = "Deterministic LOCC transformations of three-qubit GHZ- and W-class states"
)]
struct Cli {
    /// POVM completeness tolerance.
    #[arg(long, global = true)]
    tol_complete: Option<f64>,

    /// Local-unitary equivalence tolerance on invariant fingerprints.
    #[arg(long, global = true)]
    tol_lue: Option<f64>,

    /// Probability bookkeeping tolerance.
    #[arg(long, global = true)]
    tol_prob: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entanglement invariants of a state document (closed-form and oracle
    /// routes, with their largest difference when both apply).
    Invariants { state: PathBuf },

    /// SLOCC class of a state document.
    Classify { state: PathBuf },

    /// Plan a deterministic transformation and write the plan file.
    Plan {
        source: PathBuf,
        target: PathBuf,
        /// Protocol family; `auto` picks from the target's invariants.
        #[arg(long, value_enum, default_value_t = Route::Auto)]
        route: Route,
        /// Where to write the plan document.
        #[arg(long)]
        out: PathBuf,
    },

    /// Execute a plan file and report the branch tree.
    Run {
        plan: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        /// Monte Carlo trial count (sample mode).
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Monte Carlo seed (sample mode).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },

    /// Plan (auto route), execute exhaustively, and certify determinism in
    /// one shot.
    Verify { source: PathBuf, target: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Route {
    A,
    B,
    C,
    Ab,
    Ac,
    Bc,
    WChain,
    Auto,
}

impl Route {
    fn name(self) -> &'static str {
        match self {
            Route::A => "a",
            Route::B => "b",
            Route::C => "c",
            Route::Ab => "ab",
            Route::Ac => "ac",
            Route::Bc => "bc",
            Route::WChain => "w-chain",
            Route::Auto => "auto",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exhaustive,
    Sample,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Exhaustive => "exhaustive",
            Mode::Sample => "sample",
        }
    }
}

/// A command failure carrying the exit code and the report status.
struct Failure {
    code: u8,
    status: &'static str,
    message: String,
    detail: Option<serde_json::Value>,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            status: "error",
            message: message.into(),
            detail: None,
        }
    }

    fn infeasible(message: impl Into<String>, detail: Option<serde_json::Value>) -> Self {
        Self {
            code: EXIT_INFEASIBLE,
            status: "infeasible",
            message: message.into(),
            detail,
        }
    }

    fn verification(message: impl Into<String>, detail: Option<serde_json::Value>) -> Self {
        Self {
            code: EXIT_VERIFICATION,
            status: "error",
            message: message.into(),
            detail,
        }
    }
}

impl From<SchemaError> for Failure {
    fn from(e: SchemaError) -> Self {
        Failure::invalid(e.to_string())
    }
}

fn core_failure(e: CoreError) -> Failure {
    match e {
        CoreError::Infeasible(_) | CoreError::MonotonicityViolation(_) => {
            Failure::infeasible(e.to_string(), None)
        }
        other => Failure::invalid(other.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut tol = Tolerances::default();
    if let Some(v) = cli.tol_complete {
        tol.completeness = v;
    }
    if let Some(v) = cli.tol_lue {
        tol.lue = v;
    }
    if let Some(v) = cli.tol_prob {
        tol.probability = v;
    }

    let (command_echo, config, outcome) = dispatch(&cli.command, &tol);
    let (status, error, result, code) = match outcome {
        Ok(result) => ("ok".to_string(), None, Some(result), EXIT_OK),
        Err(f) => (f.status.to_string(), Some(f.message), f.detail, f.code),
    };
    let report = ReportDocument {
        command: command_echo,
        config,
        status,
        error,
        result,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    ExitCode::from(code)
}

fn dispatch(
    command: &Command,
    tol: &Tolerances,
) -> (String, ConfigEcho, Result<serde_json::Value, Failure>) {
    let mut config = ConfigEcho::new(tol);
    match command {
        Command::Invariants { state } => (
            format!("invariants {}", state.display()),
            config,
            cmd_invariants(state),
        ),
        Command::Classify { state } => (
            format!("classify {}", state.display()),
            config,
            cmd_classify(state),
        ),
        Command::Plan {
            source,
            target,
            route,
            out,
        } => {
            config.route = Some(route.name().to_string());
            (
                format!(
                    "plan --route {} --out {} {} {}",
                    route.name(),
                    out.display(),
                    source.display(),
                    target.display()
                ),
                config,
                cmd_plan(source, target, *route, out, tol),
            )
        }
        Command::Run {
            plan,
            mode,
            trials,
            seed,
        } => {
            config.mode = Some(mode.name().to_string());
            if *mode == Mode::Sample {
                config.trials = Some(*trials);
                config.seed = Some(*seed);
            }
            (
                format!("run --mode {} {}", mode.name(), plan.display()),
                config,
                cmd_run(plan, *mode, *trials, *seed, tol),
            )
        }
        Command::Verify { source, target } => (
            format!("verify {} {}", source.display(), target.display()),
            config,
            cmd_verify(source, target, tol),
        ),
    }
}

fn read_state(path: &Path) -> Result<StateDocument, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
    Ok(StateDocument::parse(&text)?)
}

fn cmd_invariants(path: &Path) -> Result<serde_json::Value, Failure> {
    let doc = read_state(path)?;
    let state = doc.state_vector();
    let oracle = invariants_from_state(&state).map_err(core_failure)?;
    let class = classify(&state);
    let formula = doc.canonical().map(|c| invariants_from_canonical(&c));
    let max_difference = formula.as_ref().map(|f| f.max_difference(&oracle));
    Ok(json!({
        "label": doc.label(),
        "formula": formula.as_ref().map(InvariantsJson::from_invariants),
        "oracle": InvariantsJson::from_invariants(&oracle),
        "max_difference": max_difference,
        "classification": class.to_string(),
    }))
}

fn cmd_classify(path: &Path) -> Result<serde_json::Value, Failure> {
    let doc = read_state(path)?;
    let class = classify(&doc.state_vector());
    Ok(json!({
        "label": doc.label(),
        "classification": class.to_string(),
    }))
}

/// The resolved plan plus the route label that produced it.
struct PlannedRoute {
    plan: ProtocolPlan,
    route: &'static str,
}

fn is_standard_ghz(doc: &StateDocument) -> bool {
    fidelity_up_to_phase(&doc.state_vector(), &StateVector::standard_ghz()) >= 1.0 - 1e-9
}

fn plan_single(
    target: &CanonicalCoefficients,
    pattern: ConcurrencePattern,
    route: &'static str,
) -> Result<PlannedRoute, Failure> {
    let ghz_target = GhzTarget::new(target.clone(), pattern).map_err(core_failure)?;
    let (pair, correction) = single_party_pair(&ghz_target).map_err(core_failure)?;
    let label = pair.label().to_string();
    let plan = ProtocolPlan::new(
        StateVector::standard_ghz(),
        vec![ProtocolStep::new(pair, correction)],
        trilocc::state_from_canonical(target),
        label,
    )
    .map_err(core_failure)?;
    Ok(PlannedRoute { plan, route })
}

fn plan_two(
    order: (Party, Party),
    target: &CanonicalCoefficients,
    route: &'static str,
) -> Result<PlannedRoute, Failure> {
    let plan = two_party_plan(order, target).map_err(core_failure)?;
    Ok(PlannedRoute { plan, route })
}

fn plan_w_chain(source: &StateDocument, target: &StateDocument) -> Result<PlannedRoute, Failure> {
    let initial = source
        .as_w()
        .ok_or_else(|| Failure::invalid("the w-chain route needs a W-form source document"))?;
    let target = target
        .as_w()
        .ok_or_else(|| Failure::invalid("the w-chain route needs a W-form target document"))?;
    let verdict = w_feasible(&initial, &target);
    if !verdict.feasible {
        return Err(Failure::infeasible(
            verdict.reason.clone(),
            Some(json!({ "verdict": VerdictJson::from_verdict(&verdict) })),
        ));
    }
    let (plan, _records) = w_chain_plan(&initial, &target).map_err(core_failure)?;
    Ok(PlannedRoute {
        plan,
        route: "w-chain",
    })
}

fn require_standard_ghz_source(source: &StateDocument) -> Result<(), Failure> {
    if is_standard_ghz(source) {
        Ok(())
    } else {
        Err(Failure::invalid(
            "GHZ-family routes start from the standard GHZ source",
        ))
    }
}

fn ghz_target_coefficients(target: &StateDocument) -> Result<CanonicalCoefficients, Failure> {
    target.canonical().ok_or_else(|| {
        Failure::invalid("planning needs a coefficient-form (canonical) target document")
    })
}

fn resolve_plan(
    source: &StateDocument,
    target: &StateDocument,
    route: Route,
) -> Result<PlannedRoute, Failure> {
    match route {
        Route::A | Route::B | Route::C => {
            require_standard_ghz_source(source)?;
            let c = ghz_target_coefficients(target)?;
            let pattern = match route {
                Route::A => ConcurrencePattern::OnlyBc,
                Route::B => ConcurrencePattern::OnlyAc,
                _ => ConcurrencePattern::OnlyAb,
            };
            plan_single(&c, pattern, route.name())
        }
        Route::Ab => {
            require_standard_ghz_source(source)?;
            plan_two((Party::A, Party::B), &ghz_target_coefficients(target)?, "ab")
        }
        Route::Ac => {
            require_standard_ghz_source(source)?;
            plan_two((Party::A, Party::C), &ghz_target_coefficients(target)?, "ac")
        }
        Route::Bc => {
            require_standard_ghz_source(source)?;
            plan_two((Party::B, Party::C), &ghz_target_coefficients(target)?, "bc")
        }
        Route::WChain => plan_w_chain(source, target),
        Route::Auto => {
            if is_standard_ghz(source) {
                let c = ghz_target_coefficients(target)?;
                let inv = invariants_from_canonical(&c);
                if inv.tau <= 1e-10 {
                    return Err(Failure::invalid(
                        "class mismatch: the target has no three-tangle; \
                         a GHZ source cannot reach the W class",
                    ));
                }
                let source_inv =
                    invariants_from_canonical(&CanonicalCoefficients::standard_ghz());
                let verdict = ghz_feasible(&source_inv, &inv).map_err(core_failure)?;
                if !verdict.feasible {
                    return Err(Failure::infeasible(
                        verdict.reason.clone(),
                        Some(json!({ "verdict": VerdictJson::from_verdict(&verdict) })),
                    ));
                }
                let floor = 1e-10;
                let zero = [
                    inv.c_bc <= floor,
                    inv.c_ac <= floor,
                    inv.c_ab <= floor,
                ];
                match zero {
                    // at most one nonzero concurrence: single party
                    [false, true, true] | [true, true, true] => {
                        plan_single(&c, ConcurrencePattern::OnlyBc, "a")
                    }
                    [true, false, true] => plan_single(&c, ConcurrencePattern::OnlyAc, "b"),
                    [true, true, false] => plan_single(&c, ConcurrencePattern::OnlyAb, "c"),
                    // exactly one vanishing concurrence: two parties
                    [false, false, true] => {
                        plan_two((Party::A, Party::B), &c, "ab")
                    }
                    [false, true, false] => {
                        plan_two((Party::A, Party::C), &c, "ac")
                    }
                    [true, false, false] => {
                        plan_two((Party::B, Party::C), &c, "bc")
                    }
                    [false, false, false] => unreachable!("rejected by the feasibility verdict"),
                }
            } else if source.as_w().is_some() {
                plan_w_chain(source, target)
            } else {
                Err(Failure::invalid(
                    "auto route needs a standard GHZ or W-form source document",
                ))
            }
        }
    }
}

fn cmd_plan(
    source_path: &Path,
    target_path: &Path,
    route: Route,
    out: &Path,
    _tol: &Tolerances,
) -> Result<serde_json::Value, Failure> {
    let source = read_state(source_path)?;
    let target = read_state(target_path)?;
    let planned = resolve_plan(&source, &target, route)?;
    let doc = PlanDocument::from_plan(&planned.plan);
    let text = serde_json::to_string_pretty(&doc).expect("plan serializes");
    std::fs::write(out, &text)
        .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", out.display())))?;
    Ok(json!({
        "route": planned.route,
        "out": out.display().to_string(),
        "steps": planned.plan.steps().len(),
        "metadata": planned.plan.metadata(),
    }))
}

/// Per-step completeness bookkeeping, so `--tol-complete` is auditable from
/// the report.
fn steps_payload(plan: &ProtocolPlan, tol: &Tolerances) -> serde_json::Value {
    let steps: Vec<serde_json::Value> = plan
        .steps()
        .iter()
        .map(|s| {
            json!({
                "label": s.pair().label(),
                "party": s.pair().party().to_string(),
                "completeness_defect": s.pair().completeness_defect(),
            })
        })
        .collect();
    let complete = plan
        .steps()
        .iter()
        .all(|s| s.pair().is_complete(tol.completeness));
    json!({ "pairs_complete": complete, "steps": steps })
}

fn cmd_run(
    plan_path: &Path,
    mode: Mode,
    trials: u64,
    seed: u64,
    tol: &Tolerances,
) -> Result<serde_json::Value, Failure> {
    let text = std::fs::read_to_string(plan_path)
        .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", plan_path.display())))?;
    let plan = PlanDocument::parse(&text)?.to_plan()?;
    match mode {
        Mode::Exhaustive => {
            let report = execute_exhaustive(&plan, tol);
            let verdict = verify_deterministic(&report, tol);
            let payload = json!({
                "measurements": steps_payload(&plan, tol),
                "execution": ExecutionJson::from_report(&report),
                "verdict": VerdictJson::from_verdict(&verdict),
            });
            if report.deterministic {
                Ok(payload)
            } else {
                Err(Failure::verification(verdict.reason.clone(), Some(payload)))
            }
        }
        Mode::Sample => {
            if trials == 0 {
                return Err(Failure::invalid("sampling needs at least one trial"));
            }
            let report = execute_sampled(&plan, trials, seed);
            Ok(json!({ "sampling": SampledJson::from_report(&report) }))
        }
    }
}

fn cmd_verify(
    source_path: &Path,
    target_path: &Path,
    tol: &Tolerances,
) -> Result<serde_json::Value, Failure> {
    let source = read_state(source_path)?;
    let target = read_state(target_path)?;
    let planned = resolve_plan(&source, &target, Route::Auto)?;
    let report = execute_exhaustive(&planned.plan, tol);
    let verdict = verify_deterministic(&report, tol);
    let payload = json!({
        "route": planned.route,
        "plan": PlanDocument::from_plan(&planned.plan),
        "measurements": steps_payload(&planned.plan, tol),
        "execution": ExecutionJson::from_report(&report),
        "verdict": VerdictJson::from_verdict(&verdict),
    });
    if report.deterministic {
        Ok(payload)
    } else {
        Err(Failure::verification(verdict.reason.clone(), Some(payload)))
    }
}
