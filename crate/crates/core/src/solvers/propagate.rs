//! Exponential propagation of rho_dot = L rho for a constant generator.
//!
//! The spectrum of these generators spans the slow emitter decay (order
//! gamma) up to the cavity loss and emitter-emitter coupling (1e4-1e5
//! gamma), so explicit time stepping is hopeless. Propagation is done with
//! matrix exponentials instead:
//!
//! * dense path — scaling-and-squaring Pade exponential of the superoperator
//!   at a dyadic base step, cached per squaring level; an arbitrary step is
//!   the binary composition of cached levels plus a short Taylor tail
//!   applied matrix-free;
//! * Krylov path (large / sparse generators) — adaptive-substep Arnoldi
//!   approximation of exp(h L) v with local error control.

use faer::prelude::Solve;
use faer::{c64, Mat};
use num_complex::Complex64;
use sprs::CsMat;

use crate::error::{Error, Result};

/// Largest superoperator dimension for the dense cached-propagator path.
pub const DENSE_PROPAGATOR_LIMIT: usize = 1024;

const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

// ---------------------------------------------------------------------------
// dense matrix exponential
// ---------------------------------------------------------------------------

/// Pade(13) scaling-and-squaring matrix exponential.
pub fn expm(a: &Mat<c64>) -> Mat<c64> {
    let n = a.nrows();
    let norm1 = one_norm(a);
    let theta13 = 5.371920351148152;
    let s = if norm1 > theta13 {
        (norm1 / theta13).log2().ceil() as u32
    } else {
        0
    };
    let factor = (0.5f64).powi(s as i32);
    let a_scaled = scale_mat(a, factor);
    let mut e = pade13(&a_scaled);
    for _ in 0..s {
        e = &e * &e;
    }
    debug_assert_eq!(e.nrows(), n);
    e
}

fn pade13(a: &Mat<c64>) -> Mat<c64> {
    let n = a.nrows();
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let eye = Mat::<c64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let mut inner = lincomb(&[(B[13], &a6), (B[11], &a4), (B[9], &a2)]);
    inner = &a6 * &inner;
    let u_part = lincomb(&[(B[7], &a6), (B[5], &a4), (B[3], &a2), (B[1], &eye)]);
    let u = a * &add(&inner, &u_part);

    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let mut innerv = lincomb(&[(B[12], &a6), (B[10], &a4), (B[8], &a2)]);
    innerv = &a6 * &innerv;
    let v_part = lincomb(&[(B[6], &a6), (B[4], &a4), (B[2], &a2), (B[0], &eye)]);
    let v = add(&innerv, &v_part);

    // solve (V - U) X = (V + U)
    let vmu = sub(&v, &u);
    let vpu = add(&v, &u);
    vmu.partial_piv_lu().solve(&vpu)
}

fn one_norm(a: &Mat<c64>) -> f64 {
    let (r, c) = (a.nrows(), a.ncols());
    let mut best = 0.0f64;
    for j in 0..c {
        let mut s = 0.0;
        for i in 0..r {
            s += a[(i, j)].norm();
        }
        best = best.max(s);
    }
    best
}

fn scale_mat(a: &Mat<c64>, f: f64) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * f)
}

fn lincomb(terms: &[(f64, &Mat<c64>)]) -> Mat<c64> {
    let (n, m) = (terms[0].1.nrows(), terms[0].1.ncols());
    Mat::from_fn(n, m, |i, j| {
        let mut acc = ZERO;
        for (coef, mat) in terms {
            acc += mat[(i, j)] * *coef;
        }
        acc
    })
}

fn add(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] + b[(i, j)])
}

fn sub(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - b[(i, j)])
}

// ---------------------------------------------------------------------------
// dense dyadic propagator
// ---------------------------------------------------------------------------

/// Cached propagators exp(L * base_dt * 2^k) for k = 0..levels.
pub struct DyadicPropagator {
    levels: Vec<Mat<c64>>,
    base_dt: f64,
    l_sparse: CsMat<Complex64>,
    l_inf_norm: f64,
}

impl DyadicPropagator {
    /// `span` is the longest single step the propagator will be asked for.
    pub fn new(l: &CsMat<Complex64>, span: f64) -> Self {
        let n = l.rows();
        let l_inf_norm = inf_norm_sparse(l);
        // base step chosen so the Pade argument is O(1)
        let target = 1.0;
        let k = if l_inf_norm * span > target {
            (l_inf_norm * span / target).log2().ceil() as u32
        } else {
            0
        };
        let base_dt = span / (2.0f64).powi(k as i32);

        let mut dense = Mat::<c64>::zeros(n, n);
        for (v, (r, c)) in l.iter() {
            dense[(r, c)] = *v * base_dt;
        }
        let mut levels = Vec::with_capacity(k as usize + 1);
        levels.push(expm(&dense));
        for i in 1..=k as usize {
            let prev = &levels[i - 1];
            levels.push(prev * prev);
        }
        Self {
            levels,
            base_dt,
            l_sparse: l.clone(),
            l_inf_norm,
        }
    }

    /// state <- exp(L dt) state.
    pub fn advance(&self, state: &mut [Complex64], dt: f64) {
        debug_assert!(dt >= 0.0);
        if dt == 0.0 {
            return;
        }
        let mut units = (dt / self.base_dt).floor() as u64;
        let rem = dt - units as f64 * self.base_dt;
        let mut level = 0usize;
        while units > 0 {
            if units & 1 == 1 {
                apply_dense(&self.levels[level], state);
            }
            units >>= 1;
            level += 1;
            debug_assert!(level <= self.levels.len() || units == 0);
        }
        if rem > 0.0 {
            taylor_exp_apply(&self.l_sparse, self.l_inf_norm, rem, state);
        }
    }
}

fn apply_dense(m: &Mat<c64>, v: &mut [Complex64]) {
    let n = m.nrows();
    let x = Mat::<c64>::from_fn(n, 1, |i, _| v[i]);
    let y = m * &x;
    for i in 0..n {
        v[i] = y[(i, 0)];
    }
}

fn inf_norm_sparse(l: &CsMat<Complex64>) -> f64 {
    let mut row_sums = vec![0.0f64; l.rows()];
    for (v, (r, _)) in l.iter() {
        row_sums[r] += v.norm();
    }
    row_sums.into_iter().fold(0.0, f64::max)
}

/// v <- exp(L dt) v by scaled Taylor summation; cheap for |L| dt = O(1).
pub fn taylor_exp_apply(l: &CsMat<Complex64>, l_inf: f64, dt: f64, v: &mut [Complex64]) {
    let steps = (l_inf * dt / 0.5).ceil().max(1.0) as usize;
    let h = dt / steps as f64;
    let n = v.len();
    for _ in 0..steps {
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut term = v.to_vec();
        for j in 1..=60usize {
            let mut next = vec![Complex64::new(0.0, 0.0); n];
            sprs::prod::mul_acc_mat_vec_csr(l.view(), &term[..], &mut next[..]);
            let f = h / j as f64;
            for z in next.iter_mut() {
                *z *= f;
            }
            let tnorm = next.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for (acc, z) in v.iter_mut().zip(next.iter()) {
                *acc += *z;
            }
            term = next;
            if tnorm <= 1e-18 * vnorm.max(1e-300) {
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Krylov propagator
// ---------------------------------------------------------------------------

pub struct KrylovOptions {
    pub rtol: f64,
    pub atol: f64,
    pub krylov_dim: usize,
    pub max_substeps: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            krylov_dim: 30,
            max_substeps: 2_000_000,
        }
    }
}

/// v <- exp(L dt) v using adaptive-substep Arnoldi approximation.
pub fn krylov_exp_apply(
    l: &CsMat<Complex64>,
    dt: f64,
    v: &mut Vec<Complex64>,
    opts: &KrylovOptions,
) -> Result<()> {
    if dt == 0.0 {
        return Ok(());
    }
    let n = v.len();
    let m = opts.krylov_dim.min(n);
    let l_inf = inf_norm_sparse(l);
    let mut t = 0.0f64;
    // start with a substep that keeps |L| h around the Krylov dimension
    let mut h = if l_inf > 0.0 {
        (m as f64 / l_inf).min(dt)
    } else {
        dt
    };
    let h_min = dt * 1e-14;
    let mut substeps = 0usize;

    while t < dt {
        if substeps > opts.max_substeps {
            return Err(Error::Stiffness { t, min_step: h });
        }
        substeps += 1;
        let step = h.min(dt - t);

        let beta = norm2(v);
        if beta == 0.0 {
            return Ok(());
        }
        // Arnoldi
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        basis.push(v.iter().map(|z| z / beta).collect());
        let mut hess = Mat::<c64>::zeros(m + 1, m);
        let mut actual_m = m;
        let mut breakdown = false;
        for j in 0..m {
            let mut w = vec![Complex64::new(0.0, 0.0); n];
            sprs::prod::mul_acc_mat_vec_csr(l.view(), &basis[j][..], &mut w[..]);
            for (i, b) in basis.iter().enumerate() {
                let mut dot = Complex64::new(0.0, 0.0);
                for (bb, ww) in b.iter().zip(w.iter()) {
                    dot += bb.conj() * ww;
                }
                hess[(i, j)] = dot;
                for (ww, bb) in w.iter_mut().zip(b.iter()) {
                    *ww -= dot * bb;
                }
            }
            let wn = norm2(&w);
            if wn < 1e-14 * l_inf.max(1.0) {
                actual_m = j + 1;
                breakdown = true;
                break;
            }
            hess[(j + 1, j)] = c64::new(wn, 0.0);
            if j + 1 < m + 1 {
                basis.push(w.iter().map(|z| z / wn).collect());
            }
        }

        // exp of the small Hessenberg block
        let hm = Mat::<c64>::from_fn(actual_m, actual_m, |i, j| hess[(i, j)] * step);
        let em = expm(&hm);
        // error estimate: weight leaking into the (m+1)-th direction
        let err = if breakdown {
            0.0
        } else {
            let hnext = hess[(actual_m, actual_m - 1)].norm();
            beta * hnext * em[(actual_m - 1, 0)].norm() * step
        };
        let tol = opts.atol + opts.rtol * beta;
        if err > tol && step > h_min {
            h = (step * 0.5).max(h_min);
            if h <= h_min {
                return Err(Error::Stiffness { t, min_step: h });
            }
            continue;
        }

        // accept: v = beta * V_m exp(step H_m) e1
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (j, b) in basis.iter().take(actual_m).enumerate() {
            let coef = em[(j, 0)] * beta;
            for (o, bb) in out.iter_mut().zip(b.iter()) {
                *o += coef * bb;
            }
        }
        *v = out;
        t += step;
        if err < 0.1 * tol {
            h = (h * 1.4).min(dt);
        }
    }
    Ok(())
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_diagonal() {
        let mut a = Mat::<c64>::zeros(2, 2);
        a[(0, 0)] = c64::new(-1.0, 0.0);
        a[(1, 1)] = c64::new(0.0, 2.0);
        let e = expm(&a);
        assert!((e[(0, 0)].re - (-1.0f64).exp()).abs() < 1e-14);
        assert!((e[(1, 1)] - c64::new((2.0f64).cos(), (2.0f64).sin())).norm() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-16);
    }

    #[test]
    fn expm_large_norm_uses_squaring() {
        // anti-Hermitian generator: exp must stay unitary
        let mut a = Mat::<c64>::zeros(2, 2);
        a[(0, 1)] = c64::new(0.0, 300.0);
        a[(1, 0)] = c64::new(0.0, 300.0);
        let e = expm(&a);
        // exp(i*300*sigma_x): cos(300) on the diagonal
        assert!((e[(0, 0)].re - (300.0f64).cos()).abs() < 1e-9);
        let det = e[(0, 0)] * e[(1, 1)] - e[(0, 1)] * e[(1, 0)];
        assert!((det.norm() - 1.0).abs() < 1e-9);
    }
}
