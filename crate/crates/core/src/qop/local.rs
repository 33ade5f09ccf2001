//! Local (single-site) operator matrices.
//!
//! Basis conventions, fixed once for the whole crate:
//! qubit index 0 = |g>, index 1 = |e|>; Fock index n = photon number.
//! The lowering operator maps |e> -> |g>, and sigma_z = 2 sigma^dag sigma - 1
//! so that <e|sigma_z|e> = +1.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// 2x2 identity.
pub fn identity(dim: usize) -> DMatrix<Complex64> {
    DMatrix::identity(dim, dim)
}

/// Qubit lowering operator |g><e|.
pub fn sigma_minus() -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 1)] = ONE;
    m
}

/// Qubit raising operator |e><g|.
pub fn sigma_plus() -> DMatrix<Complex64> {
    sigma_minus().adjoint()
}

/// sigma_z = 2 sigma^dag sigma - 1 = diag(-1, +1) in the (g, e) ordering.
pub fn sigma_z() -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 0)] = -ONE;
    m[(1, 1)] = ONE;
    m
}

/// Pauli y in the (g, e) ordering, used by the two-qubit spin flip.
pub fn sigma_y() -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 1)] = Complex64::new(0.0, -1.0);
    m[(1, 0)] = Complex64::new(0.0, 1.0);
    m
}

/// Truncated Fock-space annihilation operator, a|n> = sqrt(n)|n-1>.
pub fn annihilation(dim: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    m
}

/// Photon number operator a^dag a.
pub fn number(dim: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(i as f64, 0.0)
        } else {
            ZERO
        }
    })
}

/// |ket><bra| on a local space of the given dimension.
pub fn projector(dim: usize, ket: usize, bra: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(dim, dim);
    m[(ket, bra)] = ONE;
    m
}
