//! Tensor-product operator algebra and superoperator construction.
//!
//! Conventions fixed here and relied on everywhere else:
//!
//! * Site 0 is the most significant factor of the tensor product: for a
//!   layout `[d0, d1, d2]` the flat basis index of `(i0, i1, i2)` is
//!   `(i0*d1 + i1)*d2 + i2`. `embed` therefore returns
//!   `I x .. x op x .. x I` built with the ordinary Kronecker product.
//! * Superoperators act on column-stacked density matrices:
//!   `vec(rho)[r + d*c] = rho[(r, c)]`, so that
//!   `vec(A rho B) = (B^T kron A) vec(rho)`.
//! * Operators are stored dense for total dimension <= 64 and sparse (CSR)
//!   above; superoperators are always sparse.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use sprs::{CsMat, TriMat};

use crate::error::{Error, Result};

pub mod local;

use local::{ONE, ZERO};

/// Total dimension up to which operators keep a dense representation.
pub const DENSE_OPERATOR_LIMIT: usize = 64;

// ---------------------------------------------------------------------------
// Layout
// ---------------------------------------------------------------------------

/// Ordered list of local Hilbert-space dimensions defining a tensor product.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
}

impl SubsystemLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::LayoutMismatch(
                "layout needs at least one site".into(),
            ));
        }
        if dims.contains(&0) {
            return Err(Error::LayoutMismatch(
                "local dimensions must be positive".into(),
            ));
        }
        Ok(Self { dims })
    }

    /// `n` two-level emitters followed by one cavity mode truncated at `n_max`.
    pub fn emitters_and_cavity(n: usize, n_max: usize) -> Result<Self> {
        let mut dims = vec![2; n];
        dims.push(n_max + 1);
        Self::new(dims)
    }

    /// Emitters only (no cavity site).
    pub fn emitters(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Stride of each site in the flat index (site 0 most significant).
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.dims[i + 1];
        }
        s
    }

    /// Decompose a flat basis index into per-site indices.
    pub fn decompose(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.dims.len()];
        for (k, &d) in self.dims.iter().enumerate().rev() {
            out[k] = index % d;
            index /= d;
        }
        out
    }

    /// Flat index from per-site indices.
    pub fn flatten(&self, parts: &[usize]) -> usize {
        debug_assert_eq!(parts.len(), self.dims.len());
        let mut idx = 0usize;
        for (p, d) in parts.iter().zip(self.dims.iter()) {
            debug_assert!(p < d);
            idx = idx * d + p;
        }
        idx
    }

    /// Total excitation number of each basis state (sum of local indices:
    /// qubit |e> counts 1, Fock |n> counts n). Used for weak-symmetry
    /// sector labelling.
    pub fn excitation_numbers(&self) -> Vec<i64> {
        let d = self.total_dim();
        let mut out = Vec::with_capacity(d);
        for idx in 0..d {
            out.push(self.decompose(idx).iter().map(|&x| x as i64).sum());
        }
        out
    }

    fn check_same(&self, other: &Self, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::LayoutMismatch(format!(
                "{what}: {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum OpMatrix {
    Dense(DMatrix<Complex64>),
    Sparse(CsMat<Complex64>),
}

/// A complex matrix tagged with the tensor-product layout it acts on.
#[derive(Debug, Clone)]
pub struct LabeledOperator {
    layout: SubsystemLayout,
    matrix: OpMatrix,
}

impl LabeledOperator {
    pub fn from_dense(layout: SubsystemLayout, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = layout.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: matrix.nrows(),
                context: "operator matrix".into(),
            });
        }
        if d <= DENSE_OPERATOR_LIMIT {
            Ok(Self {
                layout,
                matrix: OpMatrix::Dense(matrix),
            })
        } else {
            Ok(Self {
                layout,
                matrix: OpMatrix::Sparse(dense_to_sparse(&matrix)),
            })
        }
    }

    pub fn from_sparse(layout: SubsystemLayout, matrix: CsMat<Complex64>) -> Result<Self> {
        let d = layout.total_dim();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: matrix.rows(),
                context: "operator matrix".into(),
            });
        }
        Ok(Self {
            layout,
            matrix: OpMatrix::Sparse(matrix),
        })
    }

    pub fn identity(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        if d <= DENSE_OPERATOR_LIMIT {
            Self {
                layout,
                matrix: OpMatrix::Dense(DMatrix::identity(d, d)),
            }
        } else {
            Self {
                layout,
                matrix: OpMatrix::Sparse(CsMat::eye(d)),
            }
        }
    }

    pub fn zero(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        if d <= DENSE_OPERATOR_LIMIT {
            Self {
                layout,
                matrix: OpMatrix::Dense(DMatrix::zeros(d, d)),
            }
        } else {
            Self {
                layout,
                matrix: OpMatrix::Sparse(CsMat::zero((d, d))),
            }
        }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.matrix, OpMatrix::Dense(_))
    }

    /// Hermitian adjoint. An exact involution: dagger(dagger(A)) == A bitwise.
    pub fn dagger(&self) -> Self {
        let matrix = match &self.matrix {
            OpMatrix::Dense(m) => OpMatrix::Dense(m.adjoint()),
            OpMatrix::Sparse(m) => OpMatrix::Sparse(m.transpose_view().to_csr().map(|v| v.conj())),
        };
        Self {
            layout: self.layout.clone(),
            matrix,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let matrix = match &self.matrix {
            OpMatrix::Dense(m) => OpMatrix::Dense(m.map(|v| v * c)),
            OpMatrix::Sparse(m) => OpMatrix::Sparse(m.map(|v| v * c)),
        };
        Self {
            layout: self.layout.clone(),
            matrix,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.layout.check_same(&other.layout, "operator add")?;
        let matrix = match (&self.matrix, &other.matrix) {
            (OpMatrix::Dense(a), OpMatrix::Dense(b)) => OpMatrix::Dense(a + b),
            (a, b) => {
                let (sa, sb) = (op_to_sparse(a), op_to_sparse(b));
                OpMatrix::Sparse(&sa + &sb)
            }
        };
        Ok(Self {
            layout: self.layout.clone(),
            matrix,
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.layout.check_same(&other.layout, "operator product")?;
        let matrix = match (&self.matrix, &other.matrix) {
            (OpMatrix::Dense(a), OpMatrix::Dense(b)) => OpMatrix::Dense(a * b),
            (a, b) => {
                let (sa, sb) = (op_to_sparse(a), op_to_sparse(b));
                OpMatrix::Sparse(&sa * &sb)
            }
        };
        Ok(Self {
            layout: self.layout.clone(),
            matrix,
        })
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match &self.matrix {
            OpMatrix::Dense(m) => m.clone(),
            OpMatrix::Sparse(m) => sparse_to_dense(m),
        }
    }

    pub fn to_sparse(&self) -> CsMat<Complex64> {
        op_to_sparse(&self.matrix)
    }

    pub fn matrix(&self) -> &OpMatrix {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        match &self.matrix {
            OpMatrix::Dense(m) => m[(row, col)],
            OpMatrix::Sparse(m) => m.get(row, col).copied().unwrap_or(ZERO),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        match &self.matrix {
            OpMatrix::Dense(m) => {
                let d = m.nrows();
                for i in 0..d {
                    for j in i..d {
                        if (m[(i, j)] - m[(j, i)].conj()).norm() > tol {
                            return false;
                        }
                    }
                }
                true
            }
            OpMatrix::Sparse(m) => {
                let diff = &m.view().to_csr() + &m.transpose_view().to_csr().map(|v| -v.conj());
                diff.iter().all(|(v, _)| v.norm() <= tol)
            }
        }
    }

    pub fn norm_fro(&self) -> f64 {
        match &self.matrix {
            OpMatrix::Dense(m) => m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt(),
            OpMatrix::Sparse(m) => m.iter().map(|(v, _)| v.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    /// Apply the operator to a ket.
    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        match &self.matrix {
            OpMatrix::Dense(m) => m * v,
            OpMatrix::Sparse(m) => {
                let mut out = DVector::zeros(v.len());
                sprs::prod::mul_acc_mat_vec_csr(m.view(), v.as_slice(), out.as_mut_slice());
                out
            }
        }
    }
}

fn op_to_sparse(m: &OpMatrix) -> CsMat<Complex64> {
    match m {
        OpMatrix::Dense(d) => dense_to_sparse(d),
        OpMatrix::Sparse(s) => s.clone(),
    }
}

pub(crate) fn dense_to_sparse(m: &DMatrix<Complex64>) -> CsMat<Complex64> {
    let mut tri = TriMat::new((m.nrows(), m.ncols()));
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != ZERO {
                tri.add_triplet(i, j, v);
            }
        }
    }
    tri.to_csr()
}

pub(crate) fn sparse_to_dense(m: &CsMat<Complex64>) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(m.rows(), m.cols());
    for (v, (i, j)) in m.iter() {
        out[(i, j)] = *v;
    }
    out
}

// ---------------------------------------------------------------------------
// embed
// ---------------------------------------------------------------------------

/// Embed a local operator at `site`: returns `I x .. x op x .. x I`.
pub fn embed(
    local_op: &DMatrix<Complex64>,
    site: usize,
    layout: &SubsystemLayout,
) -> Result<LabeledOperator> {
    if site >= layout.n_sites() {
        return Err(Error::LayoutMismatch(format!(
            "site {site} out of range for {} sites",
            layout.n_sites()
        )));
    }
    let d_site = layout.dims()[site];
    if local_op.nrows() != d_site || local_op.ncols() != d_site {
        return Err(Error::DimensionMismatch {
            expected: d_site,
            got: local_op.nrows(),
            context: format!("local operator at site {site}"),
        });
    }
    let left: usize = layout.dims()[..site].iter().product();
    let right: usize = layout.dims()[site + 1..].iter().product();
    let total = layout.total_dim();

    if total <= DENSE_OPERATOR_LIMIT {
        let m = DMatrix::identity(left, left)
            .kronecker(local_op)
            .kronecker(&DMatrix::identity(right, right));
        LabeledOperator::from_dense(layout.clone(), m)
    } else {
        let s = dense_to_sparse(local_op);
        let m = sprs::kronecker_product(
            sprs::kronecker_product(CsMat::eye(left).view(), s.view()).view(),
            CsMat::eye(right).view(),
        );
        LabeledOperator::from_sparse(layout.clone(), m)
    }
}

// ---------------------------------------------------------------------------
// Density matrices
// ---------------------------------------------------------------------------

/// Trace tolerance for state validation.
pub const TRACE_TOL: f64 = 1e-10;
/// Hermiticity tolerance for state validation.
pub const HERM_TOL: f64 = 1e-10;
/// Most negative admissible eigenvalue for state validation.
pub const EIG_FLOOR: f64 = -1e-8;

/// Trace-one positive-semidefinite state over a layout.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    layout: SubsystemLayout,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Construct with full validation (trace, Hermiticity, positivity).
    pub fn new(layout: SubsystemLayout, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dm = Self::new_unchecked(layout, matrix)?;
        dm.validate()?;
        Ok(dm)
    }

    /// Construct checking only dimensions.
    pub fn new_unchecked(layout: SubsystemLayout, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = layout.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: matrix.nrows(),
                context: "density matrix".into(),
            });
        }
        Ok(Self { layout, matrix })
    }

    pub fn from_pure(layout: SubsystemLayout, ket: &DVector<Complex64>) -> Result<Self> {
        let d = layout.total_dim();
        if ket.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: ket.len(),
                context: "ket".into(),
            });
        }
        let n = ket.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("cannot normalize the zero ket".into()));
        }
        let k = ket.map(|v| v / Complex64::new(n, 0.0));
        let m = &k * k.adjoint();
        Ok(Self { layout, matrix: m })
    }

    /// Product basis state |parts[0], parts[1], ..>.
    pub fn basis_state(layout: SubsystemLayout, parts: &[usize]) -> Result<Self> {
        if parts.len() != layout.n_sites() {
            return Err(Error::LayoutMismatch("one index per site required".into()));
        }
        let idx = layout.flatten(parts);
        let d = layout.total_dim();
        let mut ket = DVector::zeros(d);
        ket[idx] = ONE;
        Self::from_pure(layout, &ket)
    }

    /// All emitters in |g>, cavity (if any) in vacuum: basis index 0.
    pub fn ground(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        let mut m = DMatrix::zeros(d, d);
        m[(0, 0)] = ONE;
        Self { layout, matrix: m }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()).map(|v| v * 0.5);
        let mut e: Vec<f64> = nalgebra::SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(TRACE_TOL, HERM_TOL, EIG_FLOOR)
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // negated so NaN fails validation
    pub fn validate_with(&self, trace_tol: f64, herm_tol: f64, eig_floor: f64) -> Result<()> {
        // negated comparisons so non-finite entries fail validation
        let tr = self.trace();
        if !((tr - ONE).norm() <= trace_tol) {
            return Err(Error::InvalidState(format!(
                "trace {tr} deviates from 1 by more than {trace_tol:.1e}"
            )));
        }
        let d = self.matrix.nrows();
        for i in 0..d {
            for j in i..d {
                if !((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm() <= herm_tol) {
                    return Err(Error::InvalidState(format!(
                        "not Hermitian at ({i},{j}) beyond {herm_tol:.1e}"
                    )));
                }
            }
        }
        let min_eig = self.min_eigenvalue();
        if !(min_eig >= eig_floor) {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {min_eig:.3e} below floor {eig_floor:.1e}"
            )));
        }
        Ok(())
    }

    /// (rho + rho^dag)/2, trace-normalized. Used to clean numerically
    /// extracted kernel vectors before validation.
    pub fn hermitized(&self) -> Result<Self> {
        let herm = (&self.matrix + self.matrix.adjoint()).map(|v| v * 0.5);
        let tr: Complex64 = (0..herm.nrows()).map(|i| herm[(i, i)]).sum();
        if tr.norm() < 1e-300 {
            return Err(Error::InvalidState(
                "zero-trace state cannot be normalized".into(),
            ));
        }
        let m = herm.map(|v| v / tr);
        Self::new_unchecked(self.layout.clone(), m)
    }

    /// Purity tr(rho^2).
    pub fn purity(&self) -> f64 {
        let m = &self.matrix;
        let mut s = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                s += (m[(i, j)] * m[(j, i)]).re;
            }
        }
        s
    }
}

/// Reduced state on the kept sites (strictly increasing site indices).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let layout = rho.layout();
    let n = layout.n_sites();
    if keep.is_empty() {
        return Err(Error::LayoutMismatch("keep set must be nonempty".into()));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || *keep.last().unwrap() >= n {
        return Err(Error::LayoutMismatch(
            "keep sites must be strictly increasing and in range".into(),
        ));
    }
    let kept_dims: Vec<usize> = keep.iter().map(|&s| layout.dims()[s]).collect();
    let out_layout = SubsystemLayout::new(kept_dims)?;
    let d_out = out_layout.total_dim();
    let d = layout.total_dim();
    let mut out = DMatrix::<Complex64>::zeros(d_out, d_out);

    let traced: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
    for i in 0..d {
        let pi = layout.decompose(i);
        for j in 0..d {
            let pj = layout.decompose(j);
            if traced.iter().any(|&s| pi[s] != pj[s]) {
                continue;
            }
            let ki: Vec<usize> = keep.iter().map(|&s| pi[s]).collect();
            let kj: Vec<usize> = keep.iter().map(|&s| pj[s]).collect();
            out[(out_layout.flatten(&ki), out_layout.flatten(&kj))] += rho.matrix()[(i, j)];
        }
    }
    DensityMatrix::new_unchecked(out_layout, out)
}

/// tr(op * rho). Real within 1e-10 when `op` is Hermitian.
pub fn expectation(op: &LabeledOperator, rho: &DensityMatrix) -> Result<Complex64> {
    op.layout().check_same(rho.layout(), "expectation")?;
    let m = rho.matrix();
    let mut acc = ZERO;
    match op.matrix() {
        OpMatrix::Dense(a) => {
            for i in 0..a.nrows() {
                for j in 0..a.ncols() {
                    acc += a[(i, j)] * m[(j, i)];
                }
            }
        }
        OpMatrix::Sparse(a) => {
            for (v, (i, j)) in a.iter() {
                acc += *v * m[(j, i)];
            }
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Liouvillian
// ---------------------------------------------------------------------------

/// Sparse superoperator of dimension d^2 x d^2 generating rho_dot = L rho
/// on column-stacked density matrices.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    layout: SubsystemLayout,
    superop: CsMat<Complex64>,
}

impl Liouvillian {
    pub fn from_superop(layout: SubsystemLayout, superop: CsMat<Complex64>) -> Result<Self> {
        let d2 = layout.total_dim() * layout.total_dim();
        if superop.rows() != d2 || superop.cols() != d2 {
            return Err(Error::DimensionMismatch {
                expected: d2,
                got: superop.rows(),
                context: "superoperator".into(),
            });
        }
        Ok(Self { layout, superop })
    }

    /// -i [H, .] as a superoperator.
    pub fn from_hamiltonian(h: &LabeledOperator) -> Self {
        let hs = h.to_sparse();
        let d = h.dim();
        let eye = CsMat::eye(d);
        let ht = hs.transpose_view().to_csr();
        let comm = &sprs::kronecker_product(eye.view(), hs.view())
            + &sprs::kronecker_product(ht.view(), eye.view()).map(|v| -v);
        let m_i = Complex64::new(0.0, -1.0);
        Self {
            layout: h.layout().clone(),
            superop: comm.map(|v| v * m_i),
        }
    }

    /// Zero generator.
    pub fn zero(layout: SubsystemLayout) -> Self {
        let d2 = layout.total_dim() * layout.total_dim();
        Self {
            layout,
            superop: CsMat::zero((d2, d2)),
        }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.superop.rows()
    }

    pub fn superop(&self) -> &CsMat<Complex64> {
        &self.superop
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.layout.check_same(&other.layout, "liouvillian add")?;
        Ok(Self {
            layout: self.layout.clone(),
            superop: &self.superop + &other.superop,
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            layout: self.layout.clone(),
            superop: self.superop.map(|v| v * c),
        }
    }

    pub fn norm_fro(&self) -> f64 {
        self.superop
            .iter()
            .map(|(v, _)| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Apply to a column-stacked vector.
    pub fn apply_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; x.len()];
        sprs::prod::mul_acc_mat_vec_csr(self.superop.view(), x, &mut y);
        y
    }

    /// Apply to a density matrix, returning d rho / dt as a plain matrix.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DMatrix<Complex64>> {
        self.layout.check_same(rho.layout(), "liouvillian apply")?;
        let x = vec_dm(rho.matrix());
        let y = self.apply_vec(&x);
        Ok(unvec(&y, self.layout.total_dim()))
    }

    /// Flat coordinates corresponding to diagonal entries of rho; the trace
    /// functional is the sum over these coordinates.
    pub fn trace_positions(&self) -> Vec<usize> {
        let d = self.layout.total_dim();
        (0..d).map(|i| i + d * i).collect()
    }

    /// Componentwise magnitude of 1^dag L (the trace functional applied to
    /// each column). Zero for a trace-preserving generator.
    pub fn trace_violation(&self) -> f64 {
        let d = self.layout.total_dim();
        let n2 = self.superop.cols();
        let mut colsum = vec![ZERO; n2];
        for (v, (r, c)) in self.superop.iter() {
            let (row, col) = (r % d, r / d);
            if row == col {
                colsum[c] += *v;
            }
        }
        colsum.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest magnitude among stored entries.
    pub fn max_abs_entry(&self) -> f64 {
        self.superop
            .iter()
            .map(|(v, _)| v.norm())
            .fold(0.0, f64::max)
    }

    /// Weak-symmetry sector label of each superoperator coordinate:
    /// excitation(row) - excitation(col) of the density-matrix element it
    /// addresses.
    pub fn sector_labels(&self) -> Vec<i64> {
        let d = self.layout.total_dim();
        let exc = self.layout.excitation_numbers();
        let mut out = Vec::with_capacity(d * d);
        for c in 0..d {
            for r in 0..d {
                out.push(exc[r] - exc[c]);
            }
        }
        out
    }
}

/// D[A, B] rho = 2 A rho B^dag - {B^dag A, rho} as a superoperator.
/// Rate prefactors (gamma/2 and the like) are applied by the caller.
pub fn lindblad_dissipator(a: &LabeledOperator, b: &LabeledOperator) -> Result<Liouvillian> {
    a.layout().check_same(b.layout(), "dissipator")?;
    let d = a.dim();
    let sa = a.to_sparse();
    let sb = b.to_sparse();
    let bdag = sb.transpose_view().to_csr().map(|v| v.conj());
    let bconj = sb.map(|v| v.conj());
    let bdag_a: CsMat<Complex64> = &bdag * &sa;
    let bdag_a_t = bdag_a.transpose_view().to_csr();
    let eye = CsMat::eye(d);

    let two = Complex64::new(2.0, 0.0);
    let jump = sprs::kronecker_product(bconj.view(), sa.view()).map(|v| v * two);
    let anti1 = sprs::kronecker_product(eye.view(), bdag_a.view()).map(|v| -v);
    let anti2 = sprs::kronecker_product(bdag_a_t.view(), eye.view()).map(|v| -v);

    let superop = &(&jump + &anti1) + &anti2;
    Liouvillian::from_superop(a.layout().clone(), superop)
}

/// Assemble `-i[H, .] + sum_k rate_k D[A_k, B_k]` in one pass.
pub fn liouvillian_from_terms(
    layout: &SubsystemLayout,
    hamiltonian: Option<&LabeledOperator>,
    dissipators: &[(f64, LabeledOperator, LabeledOperator)],
) -> Result<Liouvillian> {
    let mut total = match hamiltonian {
        Some(h) => {
            h.layout().check_same(layout, "hamiltonian term")?;
            Liouvillian::from_hamiltonian(h)
        }
        None => Liouvillian::zero(layout.clone()),
    };
    for (rate, a, b) in dissipators {
        if *rate == 0.0 {
            continue;
        }
        let d = lindblad_dissipator(a, b)?;
        total = total.add(&d.scale(Complex64::new(*rate, 0.0)))?;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// vec / unvec
// ---------------------------------------------------------------------------

/// Column-stack a matrix: out[r + d*c] = m[(r, c)].
pub fn vec_dm(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    m.as_slice().to_vec()
}

/// Inverse of `vec_dm`.
pub fn unvec(x: &[Complex64], d: usize) -> DMatrix<Complex64> {
    debug_assert_eq!(x.len(), d * d);
    DMatrix::from_column_slice(d, d, x)
}

#[cfg(test)]
mod tests;
