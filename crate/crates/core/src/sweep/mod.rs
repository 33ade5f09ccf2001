//! Configuration-driven 1-D and 2-D parameter sweeps with metric
//! extraction, closed-form overlays and machine-readable output.
//!
//! Row order is fixed: the first axis is the slow (outer) index, so
//! `row = i0 * axes[1].points + i1` for two axes. Failed points are kept in
//! place with an error code, never dropped, and re-running the same plan on
//! the same build yields byte-identical CSV output.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effective::{self, DriveMode, HierarchyGates};
use crate::error::{Error, Result};
use crate::metrics::{self, TargetState};
use crate::model::{self, ModelKind, SystemSpec};
use crate::pim::{self, DickeTargetKind};
use crate::qop::partial_trace;
use crate::solvers::{self, conditional_state, TimeEvolveOptions};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Full,
    Pim,
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Steady,
    Evolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    /// A SystemSpec parameter name ("Delta_a", "P", "C", ...), or "t" for
    /// the time axis of an evolve plan.
    pub name: String,
    pub scale: AxisScale,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        match self.scale {
            AxisScale::Linear => (0..n)
                .map(|k| self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64)
                .collect(),
            AxisScale::Log => {
                let (a, b) = (self.start.ln(), self.stop.ln());
                (0..n)
                    .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricKind {
    #[serde(rename = "concurrence")]
    Concurrence,
    #[serde(rename = "fidelity_S")]
    FidelityS,
    #[serde(rename = "fidelity_A")]
    FidelityA,
    #[serde(rename = "fidelity_W")]
    FidelityW,
    #[serde(rename = "fidelity_W_heralded")]
    FidelityWHeralded,
    #[serde(rename = "n_cav")]
    NCav,
    #[serde(rename = "g2_0")]
    G2Zero,
    #[serde(rename = "analytic_rho_S")]
    AnalyticRhoS,
    #[serde(rename = "analytic_tau_S")]
    AnalyticTauS,
    #[serde(rename = "analytic_P_opt")]
    AnalyticPOpt,
}

impl MetricKind {
    pub fn column_name(&self) -> &'static str {
        match self {
            Self::Concurrence => "concurrence",
            Self::FidelityS => "fidelity_S",
            Self::FidelityA => "fidelity_A",
            Self::FidelityW => "fidelity_W",
            Self::FidelityWHeralded => "fidelity_W_heralded",
            Self::NCav => "n_cav",
            Self::G2Zero => "g2_0",
            Self::AnalyticRhoS => "analytic_rho_S",
            Self::AnalyticTauS => "analytic_tau_S",
            Self::AnalyticPOpt => "analytic_P_opt",
        }
    }

    fn needs_cavity(&self) -> bool {
        matches!(self, Self::NCav | Self::G2Zero | Self::FidelityWHeralded)
    }
}

/// How the drive strength is chosen at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DriveSetting {
    /// Use the pump/drive from the base spec (after axis substitution).
    #[default]
    Fixed,
    /// Set P to the closed-form optimum at every point (two-emitter dimer).
    OptimalPump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub base: SystemSpec,
    pub axes: Vec<Axis>,
    pub metrics: Vec<MetricKind>,
    pub solver: SolverKind,
    pub mode: SweepMode,
    #[serde(default)]
    pub drive: DriveSetting,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::InvalidPlan("plans take one or two axes".into()));
        }
        if self.metrics.is_empty() {
            return Err(Error::InvalidPlan("no metrics requested".into()));
        }
        for ax in &self.axes {
            if ax.points < 2 {
                return Err(Error::InvalidPlan(format!(
                    "axis {} needs >= 2 points",
                    ax.name
                )));
            }
            if ax.scale == AxisScale::Log && (ax.start <= 0.0 || ax.stop <= 0.0) {
                return Err(Error::InvalidPlan(format!(
                    "log axis {} needs positive range",
                    ax.name
                )));
            }
            if !(ax.start.is_finite() && ax.stop.is_finite()) || ax.start == ax.stop {
                return Err(Error::InvalidPlan(format!("bad axis range on {}", ax.name)));
            }
            match self.mode {
                SweepMode::Evolve => {
                    if ax.name != "t" {
                        return Err(Error::InvalidPlan(
                            "evolve plans sweep the single axis 't'".into(),
                        ));
                    }
                }
                SweepMode::Steady => {
                    // reject unknown parameter names before any compute
                    let mut probe = self.base.clone();
                    probe.set_param(&ax.name, ax.start)?;
                }
            }
        }
        if self.mode == SweepMode::Evolve {
            if self.axes.len() != 1 {
                return Err(Error::InvalidPlan(
                    "evolve plans take exactly the 't' axis".into(),
                ));
            }
            if self.solver != SolverKind::Full {
                return Err(Error::InvalidPlan(
                    "evolve plans run on the full solver".into(),
                ));
            }
        }
        if self.solver == SolverKind::Effective {
            if self.base.model_kind != ModelKind::Dimer {
                return Err(Error::InvalidPlan(
                    "the effective solver handles the dimer".into(),
                ));
            }
            for m in &self.metrics {
                if m.needs_cavity() {
                    return Err(Error::InvalidPlan(format!(
                        "{} requires a cavity in the model; the effective solver eliminates it",
                        m.column_name()
                    )));
                }
            }
        }
        if self.solver == SolverKind::Pim && self.base.model_kind != ModelKind::AllToAll {
            return Err(Error::InvalidPlan(
                "the pim solver requires the all_to_all model".into(),
            ));
        }
        if self.drive == DriveSetting::OptimalPump && self.base.model_kind != ModelKind::Dimer {
            return Err(Error::InvalidPlan(
                "optimal_pump drive uses the two-emitter closed form".into(),
            ));
        }
        for m in &self.metrics {
            let n = self.base.n_emitters;
            match m {
                MetricKind::Concurrence | MetricKind::FidelityS | MetricKind::FidelityA
                    if n != 2 =>
                {
                    return Err(Error::InvalidPlan(format!(
                        "{} is a two-emitter metric (N = {n})",
                        m.column_name()
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn row_count(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricOutcome {
    Value(f64),
    Failed { error: String },
}

impl MetricOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Value(v) => Some(*v),
            Self::Failed { .. } => None,
        }
    }

    fn from_result(r: Result<f64>) -> Self {
        match r {
            Ok(v) => Self::Value(v),
            Err(e) => Self::Failed {
                error: error_code(&e).into(),
            },
        }
    }
}

fn error_code(e: &Error) -> &'static str {
    match e {
        Error::LayoutMismatch(_) => "layout_mismatch",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::InvalidSpec(_) => "invalid_spec",
        Error::InvalidState(_) => "invalid_state",
        Error::DegenerateSteadyState { .. } => "degenerate_steady_state",
        Error::SolverFailure { .. } => "solver_failure",
        Error::Stiffness { .. } => "stiffness",
        Error::HeraldImpossible => "herald_impossible",
        Error::UndefinedStatistics => "undefined_statistics",
        Error::StateSpaceTooLarge { .. } => "state_space_too_large",
        Error::Unsupported(_) => "unsupported",
        Error::InvalidPlan(_) => "invalid_plan",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_values: Vec<f64>,
    pub values: Vec<MetricOutcome>,
    pub gates: HierarchyGates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub code_version: String,
    /// Reserved for stochastic extensions; every shipped solver is
    /// deterministic, so this stays 0.
    pub seed: u64,
    pub residual_target: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for SweepMetadata {
    fn default() -> Self {
        Self {
            code_version: env!("CARGO_PKG_VERSION").into(),
            seed: 0,
            residual_target: 1e-9,
            rtol: 1e-8,
            atol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub schema_version: u32,
    pub plan: SweepPlan,
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn all_succeeded(&self) -> bool {
        self.rows.iter().all(|r| {
            r.values
                .iter()
                .all(|v| matches!(v, MetricOutcome::Value(_)))
        })
    }

    /// Column of finite metric values (failed points skipped).
    pub fn metric_values(&self, metric: MetricKind) -> Vec<(usize, f64)> {
        let Some(col) = self.plan.metrics.iter().position(|m| *m == metric) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.values[col].value().map(|v| (i, v)))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// execution
// ---------------------------------------------------------------------------

/// Run a sweep with rayon's default parallelism.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepResult> {
    run_sweep_with_jobs(plan, None)
}

/// Run a sweep on a bounded worker pool. Results are identical for any job
/// count; only wall-clock time changes.
pub fn run_sweep_with_jobs(plan: &SweepPlan, jobs: Option<usize>) -> Result<SweepResult> {
    plan.validate()?;
    let rows = match plan.mode {
        SweepMode::Evolve => evolve_rows(plan)?,
        SweepMode::Steady => {
            let points = grid_points(plan);
            let work = || -> Vec<SweepRow> {
                points
                    .par_iter()
                    .map(|axis_values| steady_row(plan, axis_values))
                    .collect()
            };
            match jobs {
                Some(j) if j > 0 => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(j)
                        .build()
                        .map_err(|e| Error::InvalidPlan(format!("worker pool: {e}")))?;
                    pool.install(work)
                }
                _ => work(),
            }
        }
    };
    Ok(SweepResult {
        schema_version: SCHEMA_VERSION,
        plan: plan.clone(),
        metadata: SweepMetadata::default(),
        rows,
    })
}

fn grid_points(plan: &SweepPlan) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = plan.axes.iter().map(|a| a.values()).collect();
    let mut out = Vec::with_capacity(plan.row_count());
    match axes.len() {
        1 => {
            for &v in &axes[0] {
                out.push(vec![v]);
            }
        }
        2 => {
            for &v0 in &axes[0] {
                for &v1 in &axes[1] {
                    out.push(vec![v0, v1]);
                }
            }
        }
        _ => unreachable!("validated"),
    }
    out
}

fn point_spec(plan: &SweepPlan, axis_values: &[f64]) -> Result<SystemSpec> {
    let mut spec = plan.base.clone();
    for (ax, &v) in plan.axes.iter().zip(axis_values.iter()) {
        spec.set_param(&ax.name, v)?;
    }
    if plan.drive == DriveSetting::OptimalPump {
        spec.pump = effective::optimal_pump(&spec)?.p_opt;
    }
    spec.validate()?;
    Ok(spec)
}

fn steady_row(plan: &SweepPlan, axis_values: &[f64]) -> SweepRow {
    let spec = match point_spec(plan, axis_values) {
        Ok(s) => s,
        Err(e) => {
            let code = error_code(&e).to_string();
            return SweepRow {
                axis_values: axis_values.to_vec(),
                values: plan
                    .metrics
                    .iter()
                    .map(|_| MetricOutcome::Failed {
                        error: code.clone(),
                    })
                    .collect(),
                gates: HierarchyGates::evaluate(&plan.base),
            };
        }
    };
    let gates = HierarchyGates::evaluate(&spec);
    let values = match evaluate_point(&spec, plan.solver, &plan.metrics) {
        Ok(v) => v,
        Err(e) => {
            let code = error_code(&e).to_string();
            plan.metrics
                .iter()
                .map(|_| MetricOutcome::Failed {
                    error: code.clone(),
                })
                .collect()
        }
    };
    SweepRow {
        axis_values: axis_values.to_vec(),
        values,
        gates,
    }
}

/// Evaluate every requested metric on the steady state of one spec.
pub fn evaluate_point(
    spec: &SystemSpec,
    solver: SolverKind,
    metrics_list: &[MetricKind],
) -> Result<Vec<MetricOutcome>> {
    let n = spec.n_emitters;
    let analytic = |m: MetricKind| -> Result<f64> {
        match m {
            MetricKind::AnalyticRhoS => {
                Ok(effective::cascaded_three_level(spec, DriveMode::Incoherent)?.rho_s_ss)
            }
            MetricKind::AnalyticTauS => {
                let mode = if spec.is_incoherent() {
                    DriveMode::Incoherent
                } else {
                    DriveMode::Coherent
                };
                let pred = effective::cascaded_three_level(spec, mode)?;
                if pred.inv_tau_s <= 0.0 {
                    return Err(Error::InvalidState("nonpositive stabilization rate".into()));
                }
                Ok(1.0 / pred.inv_tau_s)
            }
            MetricKind::AnalyticPOpt => Ok(effective::optimal_pump(spec)?.p_opt),
            _ => unreachable!(),
        }
    };

    match solver {
        SolverKind::Full => {
            let l = model::build_liouvillian(spec)?;
            let ss = solvers::steady_state(&l)?;
            let emitter_sites: Vec<usize> = (0..n).collect();
            let reduced = partial_trace(&ss.rho_ss, &emitter_sites)?;
            let out = metrics_list
                .iter()
                .map(|m| {
                    MetricOutcome::from_result(match m {
                        MetricKind::Concurrence => metrics::concurrence(&reduced),
                        MetricKind::FidelityS => {
                            metrics::fidelity(&reduced, &TargetState::symmetric())
                        }
                        MetricKind::FidelityA => {
                            metrics::fidelity(&reduced, &TargetState::antisymmetric())
                        }
                        MetricKind::FidelityW => {
                            TargetState::w(n).and_then(|t| metrics::fidelity(&reduced, &t))
                        }
                        MetricKind::FidelityWHeralded => model::cavity_annihilation(spec)
                            .and_then(|a| conditional_state(&ss.rho_ss, &a))
                            .and_then(|c| partial_trace(&c, &emitter_sites))
                            .and_then(|r| {
                                TargetState::w(n).and_then(|t| metrics::fidelity(&r, &t))
                            }),
                        MetricKind::NCav => metrics::cavity_population(&ss.rho_ss),
                        MetricKind::G2Zero => metrics::g2_zero(&ss.rho_ss),
                        m => analytic(*m),
                    })
                })
                .collect();
            Ok(out)
        }
        SolverKind::Pim => {
            let l = pim::build_pim_liouvillian(spec)?;
            let ss = l.steady_state()?;
            let st = &ss.state;
            let out = metrics_list
                .iter()
                .map(|m| {
                    MetricOutcome::from_result(match m {
                        MetricKind::FidelityW => {
                            st.fidelity(&pim::dicke_target(n, DickeTargetKind::W))
                        }
                        MetricKind::FidelityS if n == 2 => {
                            // |S> is the N = 2 Dicke state |1, 0>
                            st.fidelity(&pim::dicke_target(2, DickeTargetKind::W))
                        }
                        MetricKind::FidelityWHeralded => st
                            .conditional_on_photon()
                            .and_then(|c| c.fidelity(&pim::dicke_target(n, DickeTargetKind::W))),
                        MetricKind::NCav => Ok(st.cavity_population()),
                        MetricKind::G2Zero => st.g2_zero(),
                        MetricKind::AnalyticRhoS
                        | MetricKind::AnalyticTauS
                        | MetricKind::AnalyticPOpt => analytic(*m),
                        _ => Err(Error::Unsupported(format!(
                            "{} is not available from the collective-spin solver",
                            m.column_name()
                        ))),
                    })
                })
                .collect();
            Ok(out)
        }
        SolverKind::Effective => {
            let ss = effective::effective_steady_state(spec)?;
            let reduced = &ss.rho_ss;
            let out = metrics_list
                .iter()
                .map(|m| {
                    MetricOutcome::from_result(match m {
                        MetricKind::Concurrence => metrics::concurrence(reduced),
                        MetricKind::FidelityS => {
                            metrics::fidelity(reduced, &TargetState::symmetric())
                        }
                        MetricKind::FidelityA => {
                            metrics::fidelity(reduced, &TargetState::antisymmetric())
                        }
                        MetricKind::FidelityW => {
                            metrics::fidelity(reduced, &TargetState::symmetric())
                        }
                        MetricKind::AnalyticRhoS
                        | MetricKind::AnalyticTauS
                        | MetricKind::AnalyticPOpt => analytic(*m),
                        m => Err(Error::Unsupported(format!(
                            "{} requires the cavity",
                            m.column_name()
                        ))),
                    })
                })
                .collect();
            Ok(out)
        }
    }
}

fn evolve_rows(plan: &SweepPlan) -> Result<Vec<SweepRow>> {
    let spec = plan.base.clone();
    let gates = HierarchyGates::evaluate(&spec);
    let grid = plan.axes[0].values();
    let l = model::build_liouvillian(&spec)?;
    let rho0 = crate::qop::DensityMatrix::ground(spec.layout());

    // time-resolved metrics come from the stored states
    let opts = TimeEvolveOptions {
        store_states: true,
        ..Default::default()
    };
    let traj = solvers::time_evolve(&l, &rho0, &grid, &opts)?;
    let n = spec.n_emitters;
    let emitter_sites: Vec<usize> = (0..n).collect();

    let analytic_pred = effective::cascaded_three_level(
        &spec,
        if spec.is_incoherent() {
            DriveMode::Incoherent
        } else {
            DriveMode::Coherent
        },
    );

    let mut rows = Vec::with_capacity(grid.len());
    for (&t, raw_state) in grid.iter().zip(traj.states.iter()) {
        // project out the integrator's Hermiticity/trace noise before
        // evaluating metrics that assume an exact state
        let state = &raw_state.hermitized()?;
        let reduced = partial_trace(state, &emitter_sites)?;
        let values = plan
            .metrics
            .iter()
            .map(|m| {
                MetricOutcome::from_result(match m {
                    MetricKind::Concurrence => metrics::concurrence(&reduced),
                    MetricKind::FidelityS => metrics::fidelity(&reduced, &TargetState::symmetric()),
                    MetricKind::FidelityA => {
                        metrics::fidelity(&reduced, &TargetState::antisymmetric())
                    }
                    MetricKind::FidelityW => {
                        TargetState::w(n).and_then(|tg| metrics::fidelity(&reduced, &tg))
                    }
                    MetricKind::NCav => metrics::cavity_population(state),
                    MetricKind::G2Zero => metrics::g2_zero(state),
                    MetricKind::AnalyticRhoS => analytic_pred
                        .as_ref()
                        .map(|p| p.rho_s_at(t))
                        .map_err(clone_err),
                    MetricKind::AnalyticTauS => analytic_pred
                        .as_ref()
                        .map(|p| 1.0 / p.inv_tau_s)
                        .map_err(clone_err),
                    MetricKind::AnalyticPOpt => effective::optimal_pump(&spec).map(|o| o.p_opt),
                    MetricKind::FidelityWHeralded => Err(Error::Unsupported(
                        "heralded fidelity is a steady-state metric".into(),
                    )),
                })
            })
            .collect();
        rows.push(SweepRow {
            axis_values: vec![t],
            values,
            gates,
        });
    }
    Ok(rows)
}

fn clone_err(e: &Error) -> Error {
    Error::InvalidSpec(e.to_string())
}

// ---------------------------------------------------------------------------
// emission
// ---------------------------------------------------------------------------

pub const GATE_COLUMNS: [&str; 4] = [
    "gate_J_kappa",
    "gate_kappa_GammaP",
    "gate_GammaP_gamma",
    "gate_GammaP_P",
];

fn fmt_float(v: f64) -> String {
    format!("{v:.12e}")
}

/// CSV with a single header row: axis names, metric columns, gate flags.
/// UTF-8, '.' decimal separator, '\n' line endings; failed metrics are
/// written as ERR:<code>.
pub fn emit_csv(result: &SweepResult) -> String {
    let mut out = String::new();
    let mut header: Vec<String> = result.plan.axes.iter().map(|a| a.name.clone()).collect();
    header.extend(
        result
            .plan
            .metrics
            .iter()
            .map(|m| m.column_name().to_string()),
    );
    header.extend(GATE_COLUMNS.iter().map(|s| s.to_string()));
    out.push_str(&header.join(","));
    out.push('\n');
    for row in &result.rows {
        let mut cells: Vec<String> = row.axis_values.iter().map(|v| fmt_float(*v)).collect();
        for v in &row.values {
            match v {
                MetricOutcome::Value(x) => cells.push(fmt_float(*x)),
                MetricOutcome::Failed { error } => cells.push(format!("ERR:{error}")),
            }
        }
        for flag in [
            row.gates.j_over_kappa,
            row.gates.kappa_over_gamma_p,
            row.gates.gamma_p_over_gamma,
            row.gates.gamma_p_over_pump,
        ] {
            cells.push(if flag { "1".into() } else { "0".into() });
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Schema-versioned JSON document; `parse_json` inverts it exactly.
pub fn emit_json(result: &SweepResult) -> Result<String> {
    Ok(serde_json::to_string_pretty(result)?)
}

pub fn parse_json(text: &str) -> Result<SweepResult> {
    Ok(serde_json::from_str(text)?)
}

// ---------------------------------------------------------------------------
// figure recipes
// ---------------------------------------------------------------------------

/// Named sweep plans reproducing the figure data sets. Resolutions are
/// reduced roughly four-fold from publication density so the default runs
/// finish at desk scale; `full_res` restores the dense grids.
pub mod plans {
    use super::*;
    use crate::model::presets;

    fn res(points: usize, full_res: bool) -> usize {
        if full_res {
            points * 4 + 1
        } else {
            points
        }
    }

    /// Concurrence and symmetric-state fidelity versus cavity detuning,
    /// incoherent pump.
    pub fn fig1c(full_res: bool) -> SweepPlan {
        let base = presets::fig1();
        let j = base.j;
        SweepPlan {
            base,
            axes: vec![Axis {
                name: "Delta_a".into(),
                scale: AxisScale::Linear,
                start: -1.5 * j,
                stop: 1.5 * j,
                points: res(301, full_res),
            }],
            metrics: vec![
                MetricKind::Concurrence,
                MetricKind::FidelityS,
                MetricKind::NCav,
                MetricKind::G2Zero,
            ],
            solver: SolverKind::Full,
            mode: SweepMode::Steady,
            drive: DriveSetting::Fixed,
        }
    }

    /// The coherent-drive variant of the detuning scan.
    pub fn fig1c_coherent(full_res: bool) -> SweepPlan {
        SweepPlan {
            base: presets::fig1_coherent(),
            ..fig1c(full_res)
        }
    }

    /// Relaxation of the symmetric-state fidelity from the idle state, with
    /// the closed-form overlay.
    pub fn fig1d(full_res: bool) -> SweepPlan {
        SweepPlan {
            base: presets::fig1(),
            axes: vec![Axis {
                name: "t".into(),
                scale: AxisScale::Log,
                start: 1e-6,
                stop: 10.0,
                points: res(121, full_res),
            }],
            metrics: vec![MetricKind::FidelityS, MetricKind::AnalyticRhoS],
            solver: SolverKind::Full,
            mode: SweepMode::Evolve,
            drive: DriveSetting::Fixed,
        }
    }

    pub fn fig1d_coherent(full_res: bool) -> SweepPlan {
        SweepPlan {
            base: presets::fig1_coherent(),
            metrics: vec![MetricKind::FidelityS],
            ..fig1d(full_res)
        }
    }

    /// Stationary concurrence over (C, P), incoherent pump.
    pub fn fig2a(full_res: bool) -> SweepPlan {
        SweepPlan {
            base: presets::fig1(),
            axes: vec![
                Axis {
                    name: "C".into(),
                    scale: AxisScale::Log,
                    start: 1.0,
                    stop: 1e4,
                    points: res(21, full_res),
                },
                Axis {
                    name: "P".into(),
                    scale: AxisScale::Log,
                    start: 0.1,
                    stop: 1e3,
                    points: res(21, full_res),
                },
            ],
            metrics: vec![
                MetricKind::Concurrence,
                MetricKind::FidelityS,
                MetricKind::AnalyticRhoS,
                MetricKind::AnalyticPOpt,
            ],
            solver: SolverKind::Full,
            mode: SweepMode::Steady,
            drive: DriveSetting::Fixed,
        }
    }

    /// Stationary concurrence over (C, Omega), coherent drive.
    pub fn fig2b(full_res: bool) -> SweepPlan {
        SweepPlan {
            base: presets::fig1_coherent(),
            axes: vec![
                Axis {
                    name: "C".into(),
                    scale: AxisScale::Log,
                    start: 1.0,
                    stop: 1e4,
                    points: res(21, full_res),
                },
                Axis {
                    name: "Omega".into(),
                    scale: AxisScale::Log,
                    start: 10.0,
                    stop: 1e5,
                    points: res(21, full_res),
                },
            ],
            metrics: vec![MetricKind::Concurrence, MetricKind::FidelityS],
            solver: SolverKind::Full,
            mode: SweepMode::Steady,
            drive: DriveSetting::Fixed,
        }
    }

    /// W-state fidelity versus cavity detuning for five emitters.
    pub fn fig3c(full_res: bool) -> SweepPlan {
        let base = presets::fig3_n5();
        let j = base.j;
        SweepPlan {
            base,
            axes: vec![Axis {
                name: "Delta_a".into(),
                scale: AxisScale::Linear,
                start: -4.5 * j,
                stop: -1.5 * j,
                points: res(61, full_res),
            }],
            metrics: vec![
                MetricKind::FidelityW,
                MetricKind::FidelityWHeralded,
                MetricKind::NCav,
                MetricKind::G2Zero,
            ],
            solver: SolverKind::Pim,
            mode: SweepMode::Steady,
            drive: DriveSetting::Fixed,
        }
    }

    /// The same scan at hundred-fold weaker emitter-emitter coupling.
    pub fn fig3c_lowj(full_res: bool) -> SweepPlan {
        let base = presets::fig3_n5_lowj();
        let j = base.j;
        SweepPlan {
            base,
            axes: vec![Axis {
                name: "Delta_a".into(),
                scale: AxisScale::Linear,
                start: -4.5 * j,
                stop: -1.5 * j,
                points: res(61, full_res),
            }],
            ..fig3c(full_res)
        }
    }

    /// Fifty-emitter base spec used by the fig3d recipe and the long-run
    /// acceptance check.
    pub fn n50_base() -> SystemSpec {
        let j = 1e5;
        let kappa = 12500.0;
        SystemSpec {
            j,
            gamma_collective: 0.999,
            pump: 300.0,
            kappa,
            g: 0.1 * kappa,
            delta_a: j * (2.0 - 50.0),
            n_max: 2,
            ..SystemSpec::all_to_all(50)
        }
    }

    /// W-state fidelity over (C, P) for fifty emitters. This is the slow
    /// recipe: expect a few minutes per grid point.
    pub fn fig3d(full_res: bool) -> SweepPlan {
        SweepPlan {
            base: n50_base(),
            axes: vec![
                Axis {
                    name: "C".into(),
                    scale: AxisScale::Log,
                    start: 50.0,
                    stop: 1e3,
                    points: if full_res { 9 } else { 5 },
                },
                Axis {
                    name: "P".into(),
                    scale: AxisScale::Log,
                    start: 10.0,
                    stop: 1e4,
                    points: if full_res { 9 } else { 5 },
                },
            ],
            metrics: vec![MetricKind::FidelityW, MetricKind::FidelityWHeralded],
            solver: SolverKind::Pim,
            mode: SweepMode::Steady,
            drive: DriveSetting::Fixed,
        }
    }

    /// Maximum stationary entanglement over (C, J) at the optimal pump,
    /// degenerate dimer.
    pub fn sm_s1(full_res: bool) -> SweepPlan {
        let mut base = presets::fig1();
        base.delta = 0.0;
        SweepPlan {
            base,
            axes: vec![
                Axis {
                    name: "C".into(),
                    scale: AxisScale::Log,
                    start: 1.0,
                    stop: 1e3,
                    points: res(15, full_res),
                },
                Axis {
                    name: "J".into(),
                    scale: AxisScale::Log,
                    start: 1e2,
                    stop: 1e6,
                    points: res(15, full_res),
                },
            ],
            metrics: vec![
                MetricKind::Concurrence,
                MetricKind::FidelityS,
                MetricKind::AnalyticPOpt,
            ],
            solver: SolverKind::Full,
            mode: SweepMode::Steady,
            drive: DriveSetting::OptimalPump,
        }
    }

    /// W-state fidelity over (C, P) for three emitters.
    pub fn sm_s2(full_res: bool) -> SweepPlan {
        let mut base = SystemSpec::all_to_all(3);
        base.j = 1e5;
        base.gamma_collective = 0.999;
        base.kappa = 1e4;
        base.g = 1e3;
        base.delta_a = base.j * (2.0 - 3.0);
        base.n_max = 2;
        SweepPlan {
            base,
            axes: vec![
                Axis {
                    name: "C".into(),
                    scale: AxisScale::Log,
                    start: 1.0,
                    stop: 1e3,
                    points: res(13, full_res),
                },
                Axis {
                    name: "P".into(),
                    scale: AxisScale::Log,
                    start: 0.1,
                    stop: 1e3,
                    points: res(13, full_res),
                },
            ],
            metrics: vec![MetricKind::FidelityW, MetricKind::FidelityWHeralded],
            solver: SolverKind::Pim,
            mode: SweepMode::Steady,
            drive: DriveSetting::Fixed,
        }
    }

    /// Plain and photon-heralded W fidelities over (C, P) for twenty-five
    /// emitters at J = 1e4.
    pub fn sm_s3(full_res: bool) -> SweepPlan {
        let mut base = SystemSpec::all_to_all(25);
        base.j = 1e4;
        base.gamma_collective = 0.999;
        base.kappa = 1e4;
        base.g = 1e3;
        base.delta_a = base.j * (2.0 - 25.0);
        base.n_max = 2;
        SweepPlan {
            base,
            axes: vec![
                Axis {
                    name: "C".into(),
                    scale: AxisScale::Log,
                    start: 10.0,
                    stop: 1e3,
                    points: if full_res { 17 } else { 9 },
                },
                Axis {
                    name: "P".into(),
                    scale: AxisScale::Log,
                    start: 1.0,
                    stop: 1e3,
                    points: if full_res { 17 } else { 9 },
                },
            ],
            metrics: vec![MetricKind::FidelityW, MetricKind::FidelityWHeralded],
            solver: SolverKind::Pim,
            mode: SweepMode::Steady,
            drive: DriveSetting::Fixed,
        }
    }

    /// Concurrence against extra spontaneous decay over (C, Gamma_extra).
    pub fn sm_s4(full_res: bool) -> SweepPlan {
        SweepPlan {
            base: presets::fig1(),
            axes: vec![
                Axis {
                    name: "C".into(),
                    scale: AxisScale::Log,
                    start: 1.0,
                    stop: 1e3,
                    points: res(13, full_res),
                },
                Axis {
                    name: "Gamma_extra".into(),
                    scale: AxisScale::Log,
                    start: 0.1,
                    stop: 1e4,
                    points: res(13, full_res),
                },
            ],
            metrics: vec![MetricKind::Concurrence],
            solver: SolverKind::Full,
            mode: SweepMode::Steady,
            drive: DriveSetting::Fixed,
        }
    }

    /// Concurrence against local pure dephasing.
    pub fn sm_s4_local_dephasing(full_res: bool) -> SweepPlan {
        let mut plan = sm_s4(full_res);
        plan.axes[1].name = "gamma_phi".into();
        plan
    }

    /// Concurrence against collective pure dephasing, which the incoherent
    /// scheme tolerates up to far larger rates.
    pub fn sm_s4_collective_dephasing(full_res: bool) -> SweepPlan {
        let mut plan = sm_s4(full_res);
        plan.axes[1].name = "Gamma_phi".into();
        plan.axes[1].stop = 1e5;
        plan
    }

    pub fn names() -> &'static [&'static str] {
        &[
            "fig1c",
            "fig1c_coherent",
            "fig1d",
            "fig1d_coherent",
            "fig2a",
            "fig2b",
            "fig3c",
            "fig3c_lowj",
            "fig3d",
            "sm_s1",
            "sm_s2",
            "sm_s3",
            "sm_s4",
            "sm_s4_local_dephasing",
            "sm_s4_collective_dephasing",
        ]
    }

    pub fn get(name: &str, full_res: bool) -> Option<SweepPlan> {
        match name {
            "fig1c" => Some(fig1c(full_res)),
            "fig1c_coherent" => Some(fig1c_coherent(full_res)),
            "fig1d" => Some(fig1d(full_res)),
            "fig1d_coherent" => Some(fig1d_coherent(full_res)),
            "fig2a" => Some(fig2a(full_res)),
            "fig2b" => Some(fig2b(full_res)),
            "fig3c" => Some(fig3c(full_res)),
            "fig3c_lowj" => Some(fig3c_lowj(full_res)),
            "fig3d" => Some(fig3d(full_res)),
            "sm_s1" => Some(sm_s1(full_res)),
            "sm_s2" => Some(sm_s2(full_res)),
            "sm_s3" => Some(sm_s3(full_res)),
            "sm_s4" => Some(sm_s4(full_res)),
            "sm_s4_local_dephasing" => Some(sm_s4_local_dephasing(full_res)),
            "sm_s4_collective_dephasing" => Some(sm_s4_collective_dephasing(full_res)),
            _ => None,
        }
    }
}
