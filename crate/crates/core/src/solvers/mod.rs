//! Steady states, time propagation and photon-heralded conditioning.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qop::{expectation, unvec, vec_dm, DensityMatrix, LabeledOperator, Liouvillian};

pub mod kernel;
pub mod propagate;

pub use kernel::{SolveOptions, SteadyStateMethod};

/// Steady state of a trace-preserving generator.
#[derive(Debug, Clone)]
pub struct SteadyStateResult {
    pub rho_ss: DensityMatrix,
    /// Frobenius norm of L rho_ss.
    pub residual: f64,
    /// residual / |L|_F; this is the quantity gated by the solver contract.
    pub residual_rel: f64,
    pub method: SteadyStateMethod,
}

/// Solve L rho = 0 with the default direct method.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyStateResult> {
    steady_state_with(l, SteadyStateMethod::NullSpaceLu, &SolveOptions::default())
}

pub fn steady_state_with(
    l: &Liouvillian,
    method: SteadyStateMethod,
    opts: &SolveOptions,
) -> Result<SteadyStateResult> {
    let d = l.layout().total_dim();
    let trace_positions = l.trace_positions();
    let herm = kernel::column_stacked_herm_partner(d);
    let labels = l.sector_labels();
    let raw = kernel::solve_steady(
        l.superop(),
        &trace_positions,
        None,
        &herm,
        Some(&labels),
        method,
        opts,
    )?;
    let rho = DensityMatrix::new(l.layout().clone(), unvec(&raw.vector, d))?;
    Ok(SteadyStateResult {
        rho_ss: rho,
        residual: raw.residual,
        residual_rel: raw.residual_rel,
        method: raw.method,
    })
}

// ---------------------------------------------------------------------------
// time evolution
// ---------------------------------------------------------------------------

#[derive(Clone)]
pub struct TimeEvolveOptions {
    /// Relative local error tolerance (Krylov path).
    pub rtol: f64,
    /// Absolute local error tolerance (Krylov path).
    pub atol: f64,
    /// Named observables evaluated at every grid point.
    pub observables: Vec<(String, LabeledOperator)>,
    /// Keep the state at every grid point (otherwise observables only).
    pub store_states: bool,
    /// Route everything through the Krylov integrator even when the dense
    /// cached-propagator path would apply.
    pub force_krylov: bool,
    /// Substep budget of the Krylov integrator.
    pub max_substeps: usize,
}

impl Default for TimeEvolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            observables: Vec::new(),
            store_states: true,
            force_krylov: false,
            max_substeps: 2_000_000,
        }
    }
}

/// Time-ordered solution of rho_dot = L rho on a fixed grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub observables: Vec<(String, Vec<f64>)>,
}

impl Trajectory {
    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

/// Propagate `rho0` through the increasing time grid `t_grid` (units of
/// 1/gamma). The grid need not start at zero; the state is advanced from
/// t = 0 regardless.
pub fn time_evolve(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    opts: &TimeEvolveOptions,
) -> Result<Trajectory> {
    l.layout().check_compatible(rho0.layout())?;
    if t_grid.is_empty() {
        return Err(Error::InvalidState("empty time grid".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] < 0.0 {
        return Err(Error::InvalidState(
            "time grid must be nonnegative strictly increasing".into(),
        ));
    }

    let d = l.layout().total_dim();
    let dim = l.dim();
    let mut state = vec_dm(rho0.matrix());

    let dense_path = dim <= propagate::DENSE_PROPAGATOR_LIMIT && !opts.force_krylov;
    let dyadic = if dense_path {
        let span = t_grid.last().unwrap() - 0.0;
        Some(propagate::DyadicPropagator::new(
            l.superop(),
            span.max(f64::MIN_POSITIVE),
        ))
    } else {
        None
    };
    let kopts = propagate::KrylovOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        krylov_dim: 30,
        max_substeps: opts.max_substeps,
    };

    let mut times = Vec::with_capacity(t_grid.len());
    let mut states = Vec::new();
    let mut series: Vec<(String, Vec<f64>)> = opts
        .observables
        .iter()
        .map(|(n, _)| (n.clone(), Vec::new()))
        .collect();

    let mut t_now = 0.0f64;
    for &t in t_grid {
        let dt = t - t_now;
        if dt > 0.0 {
            match &dyadic {
                Some(p) => p.advance(&mut state, dt),
                None => propagate::krylov_exp_apply(l.superop(), dt, &mut state, &kopts)?,
            }
        }
        t_now = t;

        let m = unvec(&state, d);
        let dm = DensityMatrix::new_unchecked(l.layout().clone(), m)?;
        // integration-tolerance state checks: trace drift and Hermiticity at
        // the 1e-8 level, positivity within 10x the local tolerance
        let tol = (10.0 * opts.rtol).max(1e-8);
        dm.validate_with(tol, tol, -10.0 * tol.max(opts.atol))
            .map_err(|e| Error::InvalidState(format!("propagated state at t={t}: {e}")))?;

        for ((_, op), (_, out)) in opts.observables.iter().zip(series.iter_mut()) {
            out.push(expectation(op, &dm)?.re);
        }
        times.push(t);
        if opts.store_states {
            states.push(dm);
        }
    }

    Ok(Trajectory {
        times,
        states,
        observables: series,
    })
}

/// Logarithmic time grid, the default sampling for figure-style dynamics.
pub fn log_time_grid(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max > t_min && points >= 2);
    let (a, b) = (t_min.ln(), t_max.ln());
    (0..points)
        .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp())
        .collect()
}

// ---------------------------------------------------------------------------
// heralded conditioning
// ---------------------------------------------------------------------------

/// Conditional state after a detection event in the given jump channel:
/// rho_c = J rho J^dag / tr(J rho J^dag).
pub fn conditional_state(rho: &DensityMatrix, jump: &LabeledOperator) -> Result<DensityMatrix> {
    jump.layout().check_compatible(rho.layout())?;
    let j = jump.to_dense();
    let w = &j * rho.matrix() * j.adjoint();
    let tr: Complex64 = (0..w.nrows()).map(|i| w[(i, i)]).sum();
    if tr.re <= 1e-14 {
        return Err(Error::HeraldImpossible);
    }
    let m = w.map(|v| v / tr);
    DensityMatrix::new_unchecked(rho.layout().clone(), m)
}

impl crate::qop::SubsystemLayout {
    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::LayoutMismatch(format!(
                "{:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(())
    }
}

/// Fit 1/tau from a saturating exponential y(t) = y_inf (1 - exp(-t/tau)).
///
/// Linear regression of ln(1 - y/y_inf) over the window where y/y_inf is
/// between `lo` and `hi`; y_inf is taken from the final sample.
pub fn fit_saturation_rate(times: &[f64], values: &[f64], lo: f64, hi: f64) -> Option<f64> {
    assert_eq!(times.len(), values.len());
    let y_inf = *values.last()?;
    if y_inf <= 0.0 {
        return None;
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &y) in times.iter().zip(values.iter()) {
        let frac = y / y_inf;
        if frac >= lo && frac <= hi && frac < 1.0 {
            xs.push(t);
            ys.push((1.0 - frac).ln());
        }
    }
    if xs.len() < 3 {
        return None;
    }
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys.iter()).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Some(-slope)
}

#[cfg(test)]
mod tests;
