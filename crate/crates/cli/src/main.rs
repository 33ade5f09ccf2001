//! purcell-sim: steady states, dynamics and parameter sweeps of driven
//! emitter ensembles in a lossy cavity, from flat JSON configs.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use purcell_core::model::{self, presets, SystemSpec};
use purcell_core::sweep::{
    self, emit_csv, emit_json, plans, run_sweep_with_jobs, Axis, AxisScale, DriveSetting,
    MetricKind, MetricOutcome, SolverKind, SweepMode, SweepPlan, SweepResult,
};

#[derive(Parser)]
#[command(
    name = "purcell-sim",
    about = "Driven-dissipative entanglement stabilization in cavity QED",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Full,
    Pim,
    Effective,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Full => SolverKind::Full,
            SolverArg::Pim => SolverKind::Pim,
            SolverArg::Effective => SolverKind::Effective,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct SpecSource {
    /// Flat JSON file with the physical parameters (units of gamma).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named parameter preset (see `presets` for the list).
    #[arg(long)]
    preset: Option<String>,
}

impl SpecSource {
    fn load(&self) -> Result<SystemSpec> {
        let spec = match (&self.config, &self.preset) {
            (Some(path), None) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| "parsing system spec")?
            }
            (None, Some(name)) => presets::get(name)
                .ok_or_else(|| anyhow!("unknown preset '{name}'; try the `presets` command"))?,
            _ => bail!("exactly one of --config or --preset is required"),
        };
        Ok(spec)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the steady state and report its metrics.
    Steady {
        #[command(flatten)]
        source: SpecSource,
        #[arg(long, value_enum, default_value = "full")]
        solver: SolverArg,
        /// Write the metric row to this file instead of only printing.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Propagate from the idle state |g..g> (x) vacuum on a time grid.
    Evolve {
        #[command(flatten)]
        source: SpecSource,
        /// First grid time (units of 1/gamma).
        #[arg(long, default_value_t = 1e-6)]
        t_min: f64,
        /// Last grid time (units of 1/gamma).
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 121)]
        points: usize,
        /// Linear instead of logarithmic grid spacing.
        #[arg(long)]
        linear: bool,
        /// Comma-separated metric list (default: fidelity_S,n_cav).
        #[arg(long, default_value = "fidelity_S,n_cav")]
        metrics: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Run a 1-D or 2-D parameter sweep from a plan file or a named recipe.
    Sweep {
        /// JSON sweep-plan file.
        #[arg(long, conflicts_with = "plan")]
        config: Option<PathBuf>,
        /// Named figure recipe (fig1c, fig2a, sm_s1, ...).
        #[arg(long)]
        plan: Option<String>,
        /// Use the publication-density grid of a named recipe.
        #[arg(long)]
        full_res: bool,
        /// Worker pool size; defaults to PURCELL_SIM_THREADS or all cores.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// List parameter presets and figure recipes (optionally write them out).
    Presets {
        /// Write every preset and plan as JSON into this directory.
        #[arg(long)]
        write_dir: Option<PathBuf>,
    },
    /// Run the built-in invariant suite and report pass/fail per check.
    Check,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Steady {
            source,
            solver,
            out,
            format,
        } => {
            let spec = source.load()?;
            let solver: SolverKind = solver.into();
            let metrics = default_metrics(&spec, solver);
            let outcomes = sweep::evaluate_point(&spec, solver, &metrics)
                .map_err(|e| anyhow!("steady solve failed: {e}"))?;
            let mut ok = true;
            println!("steady-state metrics ({} solver):", solver_name(solver));
            for (m, o) in metrics.iter().zip(outcomes.iter()) {
                match o {
                    MetricOutcome::Value(v) => println!("  {:<22} {v:.10}", m.column_name()),
                    MetricOutcome::Failed { error } => {
                        ok = false;
                        println!("  {:<22} ERR:{error}", m.column_name());
                    }
                }
            }
            if let Some(path) = out {
                let text = match format {
                    FormatArg::Csv => single_row_csv(&metrics, &outcomes),
                    FormatArg::Json => {
                        let map: serde_json::Map<String, serde_json::Value> = metrics
                            .iter()
                            .zip(outcomes.iter())
                            .map(|(m, o)| {
                                (
                                    m.column_name().to_string(),
                                    match o {
                                        MetricOutcome::Value(v) => serde_json::json!(v),
                                        MetricOutcome::Failed { error } => {
                                            serde_json::json!({ "error": error })
                                        }
                                    },
                                )
                            })
                            .collect();
                        serde_json::to_string_pretty(&map)?
                    }
                };
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }

        Command::Evolve {
            source,
            t_min,
            t_max,
            points,
            linear,
            metrics,
            out,
            format,
        } => {
            let spec = source.load()?;
            let metric_kinds = parse_metrics(&metrics)?;
            let plan = SweepPlan {
                base: spec,
                axes: vec![Axis {
                    name: "t".into(),
                    scale: if linear {
                        AxisScale::Linear
                    } else {
                        AxisScale::Log
                    },
                    start: t_min,
                    stop: t_max,
                    points,
                }],
                metrics: metric_kinds,
                solver: SolverKind::Full,
                mode: SweepMode::Evolve,
                drive: DriveSetting::Fixed,
            };
            let result = run_sweep_with_jobs(&plan, Some(1))
                .map_err(|e| anyhow!("evolution failed: {e}"))?;
            write_result(&result, out.as_deref(), format)?;
            Ok(exit_for(&result))
        }

        Command::Sweep {
            config,
            plan,
            full_res,
            jobs,
            out,
            format,
        } => {
            let plan = match (config, plan) {
                (Some(path), None) => {
                    let text = fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str::<SweepPlan>(&text).context("parsing sweep plan")?
                }
                (None, Some(name)) => plans::get(&name, full_res)
                    .ok_or_else(|| anyhow!("unknown plan '{name}'; try the `presets` command"))?,
                _ => bail!("exactly one of --config or --plan is required"),
            };
            let jobs = jobs.or_else(|| {
                std::env::var("PURCELL_SIM_THREADS")
                    .ok()
                    .and_then(|v| v.parse().ok())
            });
            let result =
                run_sweep_with_jobs(&plan, jobs).map_err(|e| anyhow!("sweep failed: {e}"))?;
            write_result(&result, out.as_deref(), format)?;
            Ok(exit_for(&result))
        }

        Command::Presets { write_dir } => {
            println!("system presets:");
            for name in presets::names() {
                println!("  {name}");
            }
            println!("figure recipes (sweep plans):");
            for name in plans::names() {
                println!("  {name}");
            }
            if let Some(dir) = write_dir {
                fs::create_dir_all(&dir)?;
                for name in presets::names() {
                    let spec = presets::get(name).unwrap();
                    fs::write(
                        dir.join(format!("{name}.json")),
                        serde_json::to_string_pretty(&spec)?,
                    )?;
                }
                for name in plans::names() {
                    let plan = plans::get(name, false).unwrap();
                    fs::write(
                        dir.join(format!("plan_{name}.json")),
                        serde_json::to_string_pretty(&plan)?,
                    )?;
                }
                println!("wrote JSON files to {}", dir.display());
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Check => run_checks(),
    }
}

fn solver_name(s: SolverKind) -> &'static str {
    match s {
        SolverKind::Full => "full",
        SolverKind::Pim => "pim",
        SolverKind::Effective => "effective",
    }
}

fn default_metrics(spec: &SystemSpec, solver: SolverKind) -> Vec<MetricKind> {
    let mut m = Vec::new();
    if spec.n_emitters == 2 {
        if solver != SolverKind::Pim {
            m.push(MetricKind::Concurrence);
        }
        m.push(MetricKind::FidelityS);
    } else {
        m.push(MetricKind::FidelityW);
    }
    if solver != SolverKind::Effective {
        if spec.n_emitters > 2 {
            m.push(MetricKind::FidelityWHeralded);
        }
        m.push(MetricKind::NCav);
        m.push(MetricKind::G2Zero);
    }
    m
}

fn parse_metrics(list: &str) -> Result<Vec<MetricKind>> {
    list.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            serde_json::from_value::<MetricKind>(serde_json::Value::String(s.to_string()))
                .map_err(|_| anyhow!("unknown metric '{s}'"))
        })
        .collect()
}

fn single_row_csv(metrics: &[MetricKind], outcomes: &[MetricOutcome]) -> String {
    let header: Vec<&str> = metrics.iter().map(|m| m.column_name()).collect();
    let cells: Vec<String> = outcomes
        .iter()
        .map(|o| match o {
            MetricOutcome::Value(v) => format!("{v:.12e}"),
            MetricOutcome::Failed { error } => format!("ERR:{error}"),
        })
        .collect();
    format!("{}\n{}\n", header.join(","), cells.join(","))
}

fn write_result(
    result: &SweepResult,
    out: Option<&std::path::Path>,
    format: FormatArg,
) -> Result<()> {
    let text = match format {
        FormatArg::Csv => emit_csv(result),
        FormatArg::Json => emit_json(result)?,
    };
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn exit_for(result: &SweepResult) -> ExitCode {
    if result.all_succeeded() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

// ---------------------------------------------------------------------------
// invariant suite
// ---------------------------------------------------------------------------

fn run_checks() -> Result<ExitCode> {
    use purcell_core::effective;
    use purcell_core::metrics::{self, TargetState};
    use purcell_core::pim;
    use purcell_core::qop::partial_trace;
    use purcell_core::solvers::{self, SolveOptions, SteadyStateMethod};

    let mut all_ok = true;
    let mut check = |name: &str, outcome: Result<()>| match outcome {
        Ok(()) => println!("[PASS] {name}"),
        Err(e) => {
            all_ok = false;
            println!("[FAIL] {name}: {e:#}");
        }
    };

    check(
        "liouvillian annihilates the trace (fig1)",
        (|| {
            let l = model::build_liouvillian(&presets::fig1())?;
            let tol = 1e-10 * l.max_abs_entry().max(1.0);
            if l.trace_violation() > tol {
                bail!("violation {:.3e} above {:.3e}", l.trace_violation(), tol);
            }
            Ok(())
        })(),
    );

    check(
        "steady-state methods agree within 1e-8 (fig1)",
        (|| {
            let l = model::build_liouvillian(&presets::fig1())?;
            let a = solvers::steady_state_with(
                &l,
                SteadyStateMethod::NullSpaceLu,
                &SolveOptions::default(),
            )?;
            let b = solvers::steady_state_with(
                &l,
                SteadyStateMethod::ShiftedInverseIteration,
                &SolveOptions::default(),
            )?;
            let d = metrics::trace_distance(&a.rho_ss, &b.rho_ss)?;
            if d > 1e-8 {
                bail!("trace distance {d:.2e}");
            }
            Ok(())
        })(),
    );

    check(
        "closed-form operating point (Gamma_P, P_opt, rho_S, tau_S)",
        (|| {
            let spec = presets::fig1();
            let d = spec.derived();
            if (d.gamma_p - 400.0).abs() > 1e-9 {
                bail!("Gamma_P = {}", d.gamma_p);
            }
            let opt = effective::optimal_pump(&spec)?;
            if (opt.p_opt - 45.5).abs() > 0.1 {
                bail!("P_opt = {}", opt.p_opt);
            }
            let pred = effective::cascaded_three_level(&spec, effective::DriveMode::Incoherent)?;
            if (pred.rho_s_ss - 0.897).abs() > 1e-3 {
                bail!("rho_S_ss = {}", pred.rho_s_ss);
            }
            if (pred.inv_tau_s - 39.9).abs() > 0.05 {
                bail!("1/tau_S = {}", pred.inv_tau_s);
            }
            Ok(())
        })(),
    );

    check(
        "full model reaches F(S) ~ 0.9 at the fig1 operating point",
        (|| {
            let spec = presets::fig1();
            let l = model::build_liouvillian(&spec)?;
            let rho = solvers::steady_state(&l)?.rho_ss;
            let red = partial_trace(&rho, &[0, 1])?;
            let f = metrics::fidelity(&red, &TargetState::symmetric())?;
            if (f - 0.897).abs() > 0.03 {
                bail!("F(S) = {f:.4}");
            }
            Ok(())
        })(),
    );

    check(
        "cavity-eliminated model matches the full solver (fig1)",
        (|| {
            let spec = presets::fig1();
            let l = model::build_liouvillian(&spec)?;
            let red = partial_trace(&solvers::steady_state(&l)?.rho_ss, &[0, 1])?;
            let eff = effective::effective_steady_state(&spec)?.rho_ss;
            let d = metrics::trace_distance(&red, &eff)?;
            if d > 1e-2 {
                bail!("trace distance {d:.3e}");
            }
            Ok(())
        })(),
    );

    check(
        "collective-spin coefficients match the symmetrization oracle",
        (|| {
            for n in [2usize, 3, 4] {
                let worst = pim::oracle::max_coefficient_deviation(n)?;
                if worst > 1e-10 {
                    bail!("N = {n}: deviation {worst:.3e}");
                }
            }
            Ok(())
        })(),
    );

    check(
        "pim solver agrees with the full solver (N = 2)",
        (|| {
            let mut spec = SystemSpec::all_to_all(2);
            spec.j = 50.0;
            spec.gamma_collective = 0.9;
            spec.pump = 10.0;
            spec.kappa = 100.0;
            spec.g = 10.0;
            spec.delta_a = 0.0;
            spec.n_max = 2;
            let p = pim::build_pim_liouvillian(&spec)?.steady_state()?;
            let basis = pim::oracle::DickeBasis::build(2)?;
            let mapped = pim::oracle::pim_to_full(&p.state, &basis)?;
            let full = solvers::steady_state(&model::build_liouvillian(&spec)?)?.rho_ss;
            let d = metrics::trace_distance(&mapped, &full)?;
            if d > 1e-8 {
                bail!("trace distance {d:.3e}");
            }
            Ok(())
        })(),
    );

    check(
        "metric ground truths (Bell concurrence, W overlap)",
        (|| {
            let layout = purcell_core::SubsystemLayout::emitters(2)?;
            let s = TargetState::symmetric();
            let rho = purcell_core::DensityMatrix::from_pure(
                layout,
                s.product_amplitudes().expect("product target"),
            )?;
            if (metrics::concurrence(&rho)? - 1.0).abs() > 1e-12 {
                bail!("Bell concurrence off");
            }
            if (metrics::fidelity(&rho, &TargetState::w(2)?)? - 1.0).abs() > 1e-12 {
                bail!("W(2) is not the symmetric state");
            }
            Ok(())
        })(),
    );

    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
