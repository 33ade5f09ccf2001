//! Null-space extraction for trace-preserving generators.
//!
//! Works on the raw sparse superoperator plus the trace functional, so the
//! same engine serves both the product-space Liouvillian and the
//! permutationally invariant generator.
//!
//! When the generator carries a weak U(1) symmetry (no coherent drive), its
//! superoperator is block diagonal over excitation-coherence sectors and the
//! steady state lives in the sector-0 block; the solve is then restricted to
//! that block, which is what makes large collective-spin problems tractable.
//! The residual is always verified against the full generator afterwards.

use faer::prelude::Solve;
use faer::{c64, Mat};
use num_complex::Complex64;
use sprs::CsMat;

use crate::error::{Error, Result};

/// Hard refusal threshold for direct kernel solves (coordinate count).
pub const DIRECT_SOLVE_LIMIT: usize = 200_000;
/// Largest dimension we hand to the dense factorization.
pub const DENSE_FACTOR_LIMIT: usize = 12_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SteadyStateMethod {
    NullSpaceLu,
    ShiftedInverseIteration,
}

impl std::fmt::Display for SteadyStateMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NullSpaceLu => write!(f, "null-space-LU"),
            Self::ShiftedInverseIteration => write!(f, "shifted-inverse-iteration"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Spectral shift for the inverse iteration, in rate units.
    pub shift: f64,
    /// Relative residual target, |L rho| <= target * |L|_F.
    pub residual_target: f64,
    /// Run the kernel-multiplicity check.
    pub check_degeneracy: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            shift: 1e-6,
            residual_target: 1e-9,
            check_degeneracy: true,
        }
    }
}

/// Raw steady-state vector in the generator's flat coordinates.
#[derive(Debug, Clone)]
pub struct RawSteadyState {
    pub vector: Vec<Complex64>,
    /// Frobenius norm of L rho for the returned (hermitized, normalized) state.
    pub residual: f64,
    /// residual / |L|_F.
    pub residual_rel: f64,
    pub method: SteadyStateMethod,
    /// Dimension of the subspace actually factorized.
    pub solve_dim: usize,
}

/// Solve L v = 0 with trace(v) = 1.
///
/// `trace_positions` lists the flat coordinates carrying the trace
/// functional and `trace_weights` their weights (uniform 1 when absent;
/// block multiplicities for collective-spin coordinates); `herm_partner[k]`
/// gives the coordinate of the adjoint element so the kernel vector can be
/// hermitized in place; `sector_labels`, when present, enables the block
/// restriction described in the module docs.
pub fn solve_steady(
    mat: &CsMat<Complex64>,
    trace_positions: &[usize],
    trace_weights: Option<&[f64]>,
    herm_partner: &[usize],
    sector_labels: Option<&[i64]>,
    method: SteadyStateMethod,
    opts: &SolveOptions,
) -> Result<RawSteadyState> {
    let n = mat.rows();
    assert_eq!(mat.cols(), n);
    assert_eq!(herm_partner.len(), n);

    let norm_fro = mat.iter().map(|(v, _)| v.norm_sqr()).sum::<f64>().sqrt();
    let max_abs = mat.iter().map(|(v, _)| v.norm()).fold(0.0f64, f64::max);
    let scale = if max_abs > 0.0 { max_abs } else { 1.0 };

    // choose solve space
    let subset: Option<Vec<usize>> = match sector_labels {
        Some(labels) if is_block_diagonal(mat, labels) => {
            Some((0..n).filter(|&i| labels[i] == 0).collect())
        }
        _ => None,
    };
    let solve_dim = subset.as_ref().map_or(n, |s| s.len());
    if solve_dim > DIRECT_SOLVE_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            size: solve_dim,
            limit: DIRECT_SOLVE_LIMIT,
        });
    }
    if solve_dim > DENSE_FACTOR_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            size: solve_dim,
            limit: DENSE_FACTOR_LIMIT,
        });
    }

    // position map: full coordinate -> solve coordinate
    let pos_of: Option<Vec<isize>> = subset.as_ref().map(|s| {
        let mut map = vec![-1isize; n];
        for (k, &i) in s.iter().enumerate() {
            map[i] = k as isize;
        }
        map
    });

    let dense = extract_dense(mat, subset.as_deref(), solve_dim, 1.0 / scale);
    let trace_local: Vec<usize> = match &pos_of {
        Some(map) => trace_positions
            .iter()
            .map(|&p| {
                debug_assert!(map[p] >= 0, "trace coordinate outside sector 0");
                map[p] as usize
            })
            .collect(),
        None => trace_positions.to_vec(),
    };
    let weights_true: Vec<f64> = match trace_weights {
        Some(w) => {
            assert_eq!(w.len(), trace_positions.len());
            w.to_vec()
        }
        None => vec![1.0; trace_positions.len()],
    };
    // the bordered trace row works with order-one entries; the physical
    // normalization at the end uses the true weights (block multiplicities
    // reach ~1e12 for large ensembles)
    let w_max = weights_true
        .iter()
        .cloned()
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let weights: Vec<f64> = weights_true.iter().map(|x| x / w_max).collect();

    let mut x_local = match method {
        SteadyStateMethod::NullSpaceLu => null_space_lu(&dense, &trace_local, &weights)?,
        SteadyStateMethod::ShiftedInverseIteration => {
            inverse_iteration(&dense, &trace_local, &weights, opts.shift / scale)?
        }
    };
    if x_local.iter().any(|z| !z.is_finite()) {
        // the bordered system was singular (a traceless kernel direction
        // exists); recover a finite representative through the shifted
        // solve and let the multiplicity check decide
        x_local = inverse_iteration(&dense, &trace_local, &weights, opts.shift / scale)?;
        if x_local.iter().any(|z| !z.is_finite()) {
            return Err(Error::SolverFailure {
                residual: f64::NAN,
                target: opts.residual_target,
            });
        }
        let mult = kernel_multiplicity(&dense, &x_local, opts.shift / scale, scale, 1e-11 * scale);
        return Err(Error::DegenerateSteadyState {
            multiplicity: mult.max(2),
        });
    }

    // scatter back to full coordinates
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    match &subset {
        Some(s) => {
            for (k, &i) in s.iter().enumerate() {
                v[i] = x_local[k];
            }
        }
        None => v.copy_from_slice(&x_local),
    }

    hermitize_normalize(&mut v, trace_positions, &weights_true, herm_partner)?;

    // residual against the full generator
    let mut lv = vec![Complex64::new(0.0, 0.0); n];
    sprs::prod::mul_acc_mat_vec_csr(mat.view(), &v[..], &mut lv[..]);
    let residual = lv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let residual_rel = if norm_fro > 0.0 {
        residual / norm_fro
    } else {
        residual
    };
    // negated comparison so a NaN residual counts as failure
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(residual_rel <= opts.residual_target) {
        return Err(Error::SolverFailure {
            residual: residual_rel,
            target: opts.residual_target,
        });
    }

    if opts.check_degeneracy {
        // a genuine second kernel vector converges to the same residual
        // floor as the steady state itself; a merely slow mode plateaus at
        // its eigenvalue magnitude, far above it
        let threshold = f64::max(1e4 * residual, 1e-14 * scale);
        let mult = kernel_multiplicity(&dense, &x_local, opts.shift / scale, scale, threshold);
        if mult > 1 {
            return Err(Error::DegenerateSteadyState { multiplicity: mult });
        }
    }

    Ok(RawSteadyState {
        vector: v,
        residual,
        residual_rel,
        method,
        solve_dim,
    })
}

/// True when no stored entry couples coordinates with different labels.
pub fn is_block_diagonal(mat: &CsMat<Complex64>, labels: &[i64]) -> bool {
    mat.iter()
        .all(|(v, (r, c))| labels[r] == labels[c] || v.norm() == 0.0)
}

fn extract_dense(
    mat: &CsMat<Complex64>,
    subset: Option<&[usize]>,
    dim: usize,
    scale: f64,
) -> Mat<c64> {
    let mut out = Mat::<c64>::zeros(dim, dim);
    match subset {
        None => {
            for (v, (r, c)) in mat.iter() {
                out[(r, c)] = *v * scale;
            }
        }
        Some(s) => {
            let n = mat.rows();
            let mut map = vec![-1isize; n];
            for (k, &i) in s.iter().enumerate() {
                map[i] = k as isize;
            }
            for (v, (r, c)) in mat.iter() {
                if map[r] >= 0 && map[c] >= 0 {
                    out[(map[r] as usize, map[c] as usize)] = *v * scale;
                }
            }
        }
    }
    out
}

/// Replace the first trace row with the trace functional and solve M x = e.
fn null_space_lu(l: &Mat<c64>, trace_local: &[usize], weights: &[f64]) -> Result<Vec<Complex64>> {
    let dim = l.nrows();
    let r0 = trace_local[0];
    let mut m = l.clone();
    for c in 0..dim {
        m[(r0, c)] = c64::new(0.0, 0.0);
    }
    for (&p, &w) in trace_local.iter().zip(weights.iter()) {
        m[(r0, p)] = c64::new(w, 0.0);
    }
    let lu = m.partial_piv_lu();
    let mut rhs = Mat::<c64>::zeros(dim, 1);
    rhs[(r0, 0)] = c64::new(1.0, 0.0);
    let mut x = lu.solve(&rhs);
    // one round of iterative refinement on the bordered system
    let mut r = &m * &x;
    for i in 0..dim {
        r[(i, 0)] -= rhs[(i, 0)];
    }
    let d = lu.solve(&r);
    for i in 0..dim {
        x[(i, 0)] -= d[(i, 0)];
    }
    Ok((0..dim).map(|i| x[(i, 0)]).collect())
}

/// Inverse iteration on (L - shift I); the eigenvalue nearest the shift is
/// the steady state's zero.
fn inverse_iteration(
    l: &Mat<c64>,
    trace_local: &[usize],
    weights: &[f64],
    shift: f64,
) -> Result<Vec<Complex64>> {
    let dim = l.nrows();
    let mut m = l.clone();
    for i in 0..dim {
        m[(i, i)] -= c64::new(shift, 0.0);
    }
    let lu = m.partial_piv_lu();

    // start from the maximally mixed state restricted to the solve space
    let mut x = Mat::<c64>::zeros(dim, 1);
    for &p in trace_local {
        x[(p, 0)] = c64::new(1.0, 0.0);
    }
    normalize(&mut x);

    let mut prev = x.clone();
    for it in 0..80 {
        x = lu.solve(&x);
        normalize(&mut x);
        align_phase(&mut x, trace_local, weights);
        let mut diff = 0.0f64;
        for i in 0..dim {
            let d = x[(i, 0)] - prev[(i, 0)];
            diff += d.norm_sqr();
        }
        if diff.sqrt() < 1e-14 && it >= 2 {
            break;
        }
        prev = x.clone();
    }
    Ok((0..dim).map(|i| x[(i, 0)]).collect())
}

fn normalize(x: &mut Mat<c64>) {
    let n = x.nrows();
    let norm = (0..n).map(|i| x[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for i in 0..n {
            x[(i, 0)] /= norm;
        }
    }
}

/// Rotate the global phase so the trace is real and positive (when nonzero).
fn align_phase(x: &mut Mat<c64>, trace_local: &[usize], weights: &[f64]) {
    let tr: Complex64 = trace_local
        .iter()
        .zip(weights.iter())
        .map(|(&p, &w)| x[(p, 0)] * w)
        .sum();
    let mag = tr.norm();
    if mag > 1e-300 {
        let phase = tr / mag;
        let n = x.nrows();
        for i in 0..n {
            x[(i, 0)] /= phase;
        }
    }
}

/// Estimate the numerical kernel dimension. A second orthogonal direction
/// annihilated by the generator (residual at or below `threshold`, in
/// unscaled units) means a degenerate steady-state manifold.
fn kernel_multiplicity(
    l: &Mat<c64>,
    v1: &[Complex64],
    shift: f64,
    scale: f64,
    threshold: f64,
) -> usize {
    let dim = l.nrows();
    let mut m = l.clone();
    for i in 0..dim {
        m[(i, i)] -= c64::new(shift, 0.0);
    }
    let lu = m.partial_piv_lu();

    let norm1 = v1.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm1 == 0.0 {
        return 1;
    }
    let v1n: Vec<Complex64> = v1.iter().map(|z| z / norm1).collect();

    // deterministic start with broad support
    let mut w = Mat::<c64>::zeros(dim, 1);
    for i in 0..dim {
        let t = i as f64;
        w[(i, 0)] = c64::new((1.7 * t).cos(), (0.3 * t).sin() + 0.1);
    }
    orthogonalize(&mut w, &v1n);
    normalize(&mut w);

    for _ in 0..10 {
        w = lu.solve(&w);
        orthogonalize(&mut w, &v1n);
        normalize(&mut w);
    }
    // residual of the candidate second kernel vector, in original units
    let lw = l * &w;
    let res: f64 = (0..dim).map(|i| lw[(i, 0)].norm_sqr()).sum::<f64>().sqrt() * scale;
    if res <= threshold {
        2
    } else {
        1
    }
}

fn orthogonalize(w: &mut Mat<c64>, v: &[Complex64]) {
    let dim = w.nrows();
    let mut dot = c64::new(0.0, 0.0);
    for i in 0..dim {
        dot += v[i].conj() * w[(i, 0)];
    }
    for i in 0..dim {
        w[(i, 0)] -= dot * v[i];
    }
}

/// (v + v^dag)/2 in flat coordinates, then divide by the trace.
fn hermitize_normalize(
    v: &mut [Complex64],
    trace_positions: &[usize],
    weights: &[f64],
    herm_partner: &[usize],
) -> Result<()> {
    let old = v.to_vec();
    for (k, z) in v.iter_mut().enumerate() {
        *z = 0.5 * (old[k] + old[herm_partner[k]].conj());
    }
    let tr: Complex64 = trace_positions
        .iter()
        .zip(weights.iter())
        .map(|(&p, &w)| v[p] * w)
        .sum();
    // judge "numerically traceless" by the cancellation among the terms of
    // the weighted sum itself, so wildly different block multiplicities do
    // not distort the test
    let tr_abs: f64 = trace_positions
        .iter()
        .zip(weights.iter())
        .map(|(&p, &w)| v[p].norm() * w)
        .sum();
    if tr.norm() < 1e-8 * tr_abs.max(1e-300) {
        // a (numerically) traceless kernel direction implies the kernel is
        // not one dimensional
        return Err(Error::DegenerateSteadyState { multiplicity: 2 });
    }
    for z in v.iter_mut() {
        *z /= tr;
    }
    Ok(())
}

/// Hermitian-partner map for column-stacked d x d matrices:
/// coordinate r + d*c pairs with c + d*r.
pub fn column_stacked_herm_partner(d: usize) -> Vec<usize> {
    let mut out = vec![0usize; d * d];
    for c in 0..d {
        for r in 0..d {
            out[r + d * c] = c + d * r;
        }
    }
    out
}
