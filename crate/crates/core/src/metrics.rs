//! Entanglement and optical observables evaluated on states.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qop::{local, partial_trace, DensityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetKind {
    /// (|eg> + |ge>) / sqrt(2); the superradiant one-excitation state.
    SymmetricS,
    /// (|eg> - |ge>) / sqrt(2); the subradiant one-excitation state.
    AntisymmetricA,
    /// Equal-weight single-de-excitation state |N/2, N/2-1>.
    W,
    /// Fully excited Dicke state |N/2, N/2>.
    DickeTop,
    Custom,
}

#[derive(Debug, Clone)]
pub enum TargetRepr {
    /// Amplitudes over the 2^N product basis (site 0 most significant,
    /// |g> = 0, |e> = 1).
    Product(DVector<Complex64>),
    /// Dicke-basis coordinates (2j, 2m), for the collective-spin solver.
    Dicke { two_j: u32, two_m: i32 },
}

/// A pure target state used for fidelity evaluation.
#[derive(Debug, Clone)]
pub struct TargetState {
    pub kind: TargetKind,
    pub n_emitters: usize,
    pub repr: TargetRepr,
}

impl TargetState {
    pub fn symmetric() -> Self {
        let inv = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut amps = DVector::zeros(4);
        amps[1] = inv; // |ge>
        amps[2] = inv; // |eg>
        Self {
            kind: TargetKind::SymmetricS,
            n_emitters: 2,
            repr: TargetRepr::Product(amps),
        }
    }

    pub fn antisymmetric() -> Self {
        let inv = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut amps = DVector::zeros(4);
        amps[1] = -inv; // |ge>
        amps[2] = inv; // |eg>
        Self {
            kind: TargetKind::AntisymmetricA,
            n_emitters: 2,
            repr: TargetRepr::Product(amps),
        }
    }

    /// W state in the product basis: 1/sqrt(N) on every state with exactly
    /// one emitter de-excited.
    pub fn w(n: usize) -> Result<Self> {
        if !(2..=24).contains(&n) {
            return Err(Error::InvalidState(
                "product-basis W target supported for 2 <= N <= 24; use w_dicke".into(),
            ));
        }
        let dim = 1usize << n;
        let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        let mut amps = DVector::zeros(dim);
        let all_e = dim - 1;
        for i in 0..n {
            amps[all_e - (1 << (n - 1 - i))] = amp;
        }
        Ok(Self {
            kind: TargetKind::W,
            n_emitters: n,
            repr: TargetRepr::Product(amps),
        })
    }

    /// W state as Dicke coordinates |N/2, N/2 - 1>.
    pub fn w_dicke(n: usize) -> Self {
        Self {
            kind: TargetKind::W,
            n_emitters: n,
            repr: TargetRepr::Dicke {
                two_j: n as u32,
                two_m: n as i32 - 2,
            },
        }
    }

    /// Fully excited state |N/2, N/2> as Dicke coordinates.
    pub fn dicke_top(n: usize) -> Self {
        Self {
            kind: TargetKind::DickeTop,
            n_emitters: n,
            repr: TargetRepr::Dicke {
                two_j: n as u32,
                two_m: n as i32,
            },
        }
    }

    /// Arbitrary normalized amplitude vector over the 2^N product basis.
    pub fn custom(n: usize, amps: DVector<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << n {
            return Err(Error::DimensionMismatch {
                expected: 1usize << n,
                got: amps.len(),
                context: "target amplitudes".into(),
            });
        }
        if (amps.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!(
                "target not normalized: |amps| = {}",
                amps.norm()
            )));
        }
        Ok(Self {
            kind: TargetKind::Custom,
            n_emitters: n,
            repr: TargetRepr::Product(amps),
        })
    }

    pub fn product_amplitudes(&self) -> Option<&DVector<Complex64>> {
        match &self.repr {
            TargetRepr::Product(a) => Some(a),
            TargetRepr::Dicke { .. } => None,
        }
    }
}

/// Wootters concurrence of a two-qubit state.
///
/// Square roots of the eigenvalues of rho (sy x sy) rho* (sy x sy) in
/// decreasing order; C = max(0, l1 - l2 - l3 - l4). Computed through the
/// Hermitian form sqrt(rho) rho_tilde sqrt(rho), which has the same
/// spectrum.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.layout().dims() != [2, 2] {
        return Err(Error::LayoutMismatch(format!(
            "concurrence needs a [2, 2] state, got {:?}",
            rho.layout().dims()
        )));
    }
    let m = rho.matrix();
    let yy = local::sigma_y().kronecker(&local::sigma_y());
    let rho_tilde = &yy * m.conjugate() * &yy;
    let sq = psd_sqrt(m);
    let prod = &sq * rho_tilde * &sq;
    let herm = (&prod + prod.adjoint()).map(|v| v * 0.5);
    let mut lam: Vec<f64> = nalgebra::SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .map(|e| e.max(0.0).sqrt())
        .collect();
    lam.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((lam[0] - lam[1] - lam[2] - lam[3]).max(0.0))
}

fn psd_sqrt(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let herm = (m + m.adjoint()).map(|v| v * 0.5);
    let eig = nalgebra::SymmetricEigen::new(herm);
    let d = m.nrows();
    let mut out = DMatrix::zeros(d, d);
    for k in 0..d {
        let lam = eig.eigenvalues[k].max(0.0).sqrt();
        let v = eig.eigenvectors.column(k);
        out += (v * v.adjoint()).map(|x| x * lam);
    }
    out
}

/// Overlap fidelity <target| rho |target> for a pure target.
///
/// `rho` must already live on the emitter layout (trace out the cavity
/// first).
pub fn fidelity(rho: &DensityMatrix, target: &TargetState) -> Result<f64> {
    let amps = target.product_amplitudes().ok_or_else(|| {
        Error::Unsupported("fidelity on the product layout needs a product-basis target".into())
    })?;
    if rho.dim() != amps.len() {
        return Err(Error::DimensionMismatch {
            expected: amps.len(),
            got: rho.dim(),
            context: "fidelity target".into(),
        });
    }
    let val = (amps.adjoint() * rho.matrix() * amps)[(0, 0)];
    if val.im.abs() > 1e-12 {
        return Err(Error::InvalidState(format!(
            "fidelity has imaginary part {:.3e}",
            val.im
        )));
    }
    Ok(val.re)
}

/// Diagonal of the reduced cavity state. The cavity is the last layout site.
pub fn cavity_number_distribution(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let last = rho.layout().n_sites() - 1;
    let red = if rho.layout().n_sites() == 1 {
        rho.clone()
    } else {
        partial_trace(rho, &[last])?
    };
    Ok((0..red.dim()).map(|n| red.matrix()[(n, n)].re).collect())
}

/// <a^dag a> of the cavity mode (last layout site).
pub fn cavity_population(rho: &DensityMatrix) -> Result<f64> {
    let p = cavity_number_distribution(rho)?;
    Ok(p.iter().enumerate().map(|(n, w)| n as f64 * w).sum())
}

/// Zero-delay second-order correlation g2(0) = <adag adag a a> / <adag a>^2.
pub fn g2_zero(rho: &DensityMatrix) -> Result<f64> {
    let p = cavity_number_distribution(rho)?;
    let n_avg: f64 = p.iter().enumerate().map(|(n, w)| n as f64 * w).sum();
    if n_avg <= 1e-12 {
        return Err(Error::UndefinedStatistics);
    }
    let nn: f64 = p
        .iter()
        .enumerate()
        .map(|(n, w)| (n * n.saturating_sub(1)) as f64 * w)
        .sum();
    Ok((nn / (n_avg * n_avg)).max(0.0))
}

/// Trace distance (1/2) |a - b|_1 between two states on the same layout.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.layout() != b.layout() {
        return Err(Error::LayoutMismatch("trace distance".into()));
    }
    let diff = a.matrix() - b.matrix();
    let herm = (&diff + diff.adjoint()).map(|v| v * 0.5);
    Ok(nalgebra::SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .map(|e| e.abs())
        .sum::<f64>()
        * 0.5)
}
