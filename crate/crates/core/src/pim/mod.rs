//! Permutationally invariant solver: the N-emitter (x) cavity problem in the
//! collective |j, m> basis, polynomial in N instead of exponential.
//!
//! A permutation-symmetric density matrix decomposes as
//! rho = (+)_j q_j (x) I_{d_j} with one block q_j per total-spin sector,
//! every degenerate copy carrying the same block. States store the
//! per-copy blocks q_j over the (m, Fock) product, ordered
//! (Dicke block, m, m', Fock); the flat coordinate layout is block-major
//! with each block column-stacked, so that the coordinate is
//! `offset_j + (idx_m * c + k) + D_j * (idx_m' * c + k')` where
//! idx_m = j - m counts from the top of the ladder.
//! Multiplicities d_j enter only as trace weights:
//! tr rho = sum_j d_j tr q_j.
//!
//! Collective operators (S+-, S_z, the cavity) act within blocks; local
//! pump, decay and dephasing mix neighbouring j blocks with the
//! permutation-symmetric coefficients of [`coeffs`], which are verified
//! against a brute-force symmetrization of the full-space dissipators
//! ([`oracle`]) before being trusted at large N.

use nalgebra::DMatrix;
use num_complex::Complex64;
use sprs::{CsMat, TriMat};

use crate::error::{Error, Result};
use crate::metrics::{TargetRepr, TargetState};
use crate::model::{ModelKind, SystemSpec};
use crate::qop::{embed, liouvillian_from_terms, local, LabeledOperator, SubsystemLayout};
use crate::solvers::kernel::{self, SolveOptions, SteadyStateMethod};

pub mod coeffs;
pub mod oracle;

pub use coeffs::{dicke_energy_over_j, LocalChannel};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

// ---------------------------------------------------------------------------
// space
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct BlockInfo {
    pub two_j: u32,
    /// Irrep multiplicity d_j.
    pub multiplicity: f64,
    /// 2j + 1.
    pub spin_dim: usize,
    /// (2j + 1) * cavity_dim.
    pub block_dim: usize,
    /// Offset of this block in the flat coordinate layout.
    pub coord_offset: usize,
}

/// Dicke block structure for N emitters plus the cavity.
#[derive(Debug, Clone)]
pub struct DickeSpace {
    n: usize,
    cavity_dim: usize,
    blocks: Vec<BlockInfo>,
}

impl DickeSpace {
    pub fn new(n: usize, n_max: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("need at least one emitter".into()));
        }
        let cavity_dim = n_max + 1;
        let mut blocks = Vec::new();
        let mut offset = 0usize;
        let mut two_j = n as u32;
        loop {
            let spin_dim = two_j as usize + 1;
            let block_dim = spin_dim * cavity_dim;
            blocks.push(BlockInfo {
                two_j,
                multiplicity: coeffs::multiplicity(n, two_j),
                spin_dim,
                block_dim,
                coord_offset: offset,
            });
            offset += block_dim * block_dim;
            if two_j < 2 {
                break;
            }
            two_j -= 2;
        }
        Ok(Self {
            n,
            cavity_dim,
            blocks,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cavity_dim(&self) -> usize {
        self.cavity_dim
    }

    pub fn blocks(&self) -> &[BlockInfo] {
        &self.blocks
    }

    /// Total number of flat coordinates, sum_j D_j^2.
    pub fn coordinate_count(&self) -> usize {
        let last = self.blocks.last().unwrap();
        last.coord_offset + last.block_dim * last.block_dim
    }

    pub fn block_of_two_j(&self, two_j: u32) -> Option<usize> {
        self.blocks.iter().position(|b| b.two_j == two_j)
    }

    /// Row index of (m, k) inside a block; m is addressed from the top,
    /// idx_m = j - m (so row 0 is m = +j).
    pub fn row(&self, b: usize, m_idx: usize, k: usize) -> usize {
        debug_assert!(m_idx < self.blocks[b].spin_dim && k < self.cavity_dim);
        m_idx * self.cavity_dim + k
    }

    /// Flat coordinate of the (row, col) element of block b.
    pub fn coord(&self, b: usize, row: usize, col: usize) -> usize {
        let info = &self.blocks[b];
        info.coord_offset + row + info.block_dim * col
    }

    /// Flat ket index of |j, m> over the spin-only Dicke basis (blocks in
    /// descending j, m descending inside each block).
    pub fn spin_ket_index(&self, two_j: u32, two_m: i32) -> Option<usize> {
        let b = self.block_of_two_j(two_j)?;
        if two_m.unsigned_abs() > two_j || (two_m - two_j as i32) % 2 != 0 {
            return None;
        }
        let before: usize = self.blocks[..b].iter().map(|i| i.spin_dim).sum();
        Some(before + ((two_j as i32 - two_m) / 2) as usize)
    }

    /// Trace functional: flat positions of block-diagonal elements and
    /// their multiplicity weights.
    pub fn trace_positions_weights(&self) -> (Vec<usize>, Vec<f64>) {
        let mut pos = Vec::new();
        let mut w = Vec::new();
        for (b, info) in self.blocks.iter().enumerate() {
            for r in 0..info.block_dim {
                pos.push(self.coord(b, r, r));
                w.push(info.multiplicity);
            }
        }
        (pos, w)
    }

    /// Hermitian-partner map over the flat coordinates.
    pub fn herm_partner(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.coordinate_count()];
        for (b, info) in self.blocks.iter().enumerate() {
            for c in 0..info.block_dim {
                for r in 0..info.block_dim {
                    out[self.coord(b, r, c)] = self.coord(b, c, r);
                }
            }
        }
        out
    }

    /// Excitation-coherence sector label of every flat coordinate:
    /// (2m + 2k) of the row minus the same of the column.
    pub fn sector_labels(&self) -> Vec<i64> {
        let mut out = vec![0i64; self.coordinate_count()];
        for (b, info) in self.blocks.iter().enumerate() {
            let exc = |row: usize| -> i64 {
                let m_idx = row / self.cavity_dim;
                let k = row % self.cavity_dim;
                let two_m = info.two_j as i64 - 2 * m_idx as i64;
                two_m + 2 * k as i64
            };
            for c in 0..info.block_dim {
                for r in 0..info.block_dim {
                    out[self.coord(b, r, c)] = exc(r) - exc(c);
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// state
// ---------------------------------------------------------------------------

/// Block-diagonal permutation-symmetric density representation.
#[derive(Debug, Clone)]
pub struct PimState {
    space: DickeSpace,
    blocks: Vec<DMatrix<Complex64>>,
}

impl PimState {
    pub fn zero(space: DickeSpace) -> Self {
        let blocks = space
            .blocks()
            .iter()
            .map(|b| DMatrix::zeros(b.block_dim, b.block_dim))
            .collect();
        Self { space, blocks }
    }

    /// |g...g> (x) vacuum: the bottom of the maximal-j ladder.
    pub fn ground(space: DickeSpace) -> Self {
        let mut st = Self::zero(space);
        let row = st.space.row(0, st.space.blocks()[0].spin_dim - 1, 0);
        st.blocks[0][(row, row)] = re(1.0);
        st
    }

    /// |e...e> (x) vacuum: the top Dicke state.
    pub fn top_excited(space: DickeSpace) -> Self {
        let mut st = Self::zero(space);
        let row = st.space.row(0, 0, 0);
        st.blocks[0][(row, row)] = re(1.0);
        st
    }

    pub fn space(&self) -> &DickeSpace {
        &self.space
    }

    pub fn block(&self, b: usize) -> &DMatrix<Complex64> {
        &self.blocks[b]
    }

    pub fn block_mut(&mut self, b: usize) -> &mut DMatrix<Complex64> {
        &mut self.blocks[b]
    }

    pub fn from_coords(space: DickeSpace, coords: &[Complex64]) -> Result<Self> {
        if coords.len() != space.coordinate_count() {
            return Err(Error::DimensionMismatch {
                expected: space.coordinate_count(),
                got: coords.len(),
                context: "pim coordinates".into(),
            });
        }
        let blocks = space
            .blocks()
            .iter()
            .map(|info| {
                let d = info.block_dim;
                DMatrix::from_column_slice(
                    d,
                    d,
                    &coords[info.coord_offset..info.coord_offset + d * d],
                )
            })
            .collect();
        Ok(Self { space, blocks })
    }

    pub fn to_coords(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.space.coordinate_count());
        for b in &self.blocks {
            out.extend_from_slice(b.as_slice());
        }
        out
    }

    /// Multiplicity-weighted trace sum_j d_j tr q_j.
    pub fn trace(&self) -> Complex64 {
        self.space
            .blocks()
            .iter()
            .zip(self.blocks.iter())
            .map(|(info, q)| {
                let tr: Complex64 = (0..info.block_dim).map(|i| q[(i, i)]).sum();
                tr * info.multiplicity
            })
            .sum()
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // negated so NaN fails validation
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if !((tr - re(1.0)).norm() <= 1e-10) {
            return Err(Error::InvalidState(format!("pim trace = {tr}")));
        }
        for (info, q) in self.space.blocks().iter().zip(self.blocks.iter()) {
            let d = info.block_dim;
            for i in 0..d {
                for jj in i..d {
                    if !((q[(i, jj)] - q[(jj, i)].conj()).norm() <= 1e-10) {
                        return Err(Error::InvalidState(format!(
                            "pim block 2j={} not Hermitian",
                            info.two_j
                        )));
                    }
                }
            }
            let herm = (q + q.adjoint()).map(|v| v * 0.5);
            let min_eig = nalgebra::SymmetricEigen::new(herm)
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            if !(min_eig >= -1e-8) {
                return Err(Error::InvalidState(format!(
                    "pim block 2j={} has eigenvalue {min_eig:.3e}",
                    info.two_j
                )));
            }
        }
        Ok(())
    }

    /// Overlap with a Dicke-basis target in the maximal-j block.
    pub fn fidelity(&self, target: &TargetState) -> Result<f64> {
        let (two_j, two_m) = match &target.repr {
            TargetRepr::Dicke { two_j, two_m } => (*two_j, *two_m),
            TargetRepr::Product(_) => {
                return Err(Error::Unsupported(
                    "pim fidelity needs a Dicke-basis target (try dicke_target)".into(),
                ))
            }
        };
        if target.n_emitters != self.space.n() {
            return Err(Error::DimensionMismatch {
                expected: self.space.n(),
                got: target.n_emitters,
                context: "target emitter count".into(),
            });
        }
        if two_j as usize != self.space.n() {
            return Err(Error::Unsupported(
                "targets outside the maximal-j block are ambiguous across irrep copies".into(),
            ));
        }
        let m_idx = ((two_j as i32 - two_m) / 2) as usize;
        let q = &self.blocks[0];
        let mut f = 0.0;
        for k in 0..self.space.cavity_dim() {
            let r = self.space.row(0, m_idx, k);
            f += q[(r, r)].re;
        }
        Ok(f)
    }

    /// Diagonal of the reduced cavity state.
    pub fn cavity_number_distribution(&self) -> Vec<f64> {
        let c = self.space.cavity_dim();
        let mut p = vec![0.0; c];
        for (info, q) in self.space.blocks().iter().zip(self.blocks.iter()) {
            for m_idx in 0..info.spin_dim {
                for (k, pk) in p.iter_mut().enumerate() {
                    let r = m_idx * c + k;
                    *pk += info.multiplicity * q[(r, r)].re;
                }
            }
        }
        p
    }

    pub fn cavity_population(&self) -> f64 {
        self.cavity_number_distribution()
            .iter()
            .enumerate()
            .map(|(k, w)| k as f64 * w)
            .sum()
    }

    pub fn g2_zero(&self) -> Result<f64> {
        let p = self.cavity_number_distribution();
        let n_avg: f64 = p.iter().enumerate().map(|(k, w)| k as f64 * w).sum();
        if n_avg <= 1e-12 {
            return Err(Error::UndefinedStatistics);
        }
        let nn: f64 = p
            .iter()
            .enumerate()
            .map(|(k, w)| (k * k.saturating_sub(1)) as f64 * w)
            .sum();
        Ok((nn / (n_avg * n_avg)).max(0.0))
    }

    /// <S_z> with multiplicity weights.
    pub fn sz_expectation(&self) -> f64 {
        let c = self.space.cavity_dim();
        let mut sz = 0.0;
        for (info, q) in self.space.blocks().iter().zip(self.blocks.iter()) {
            for m_idx in 0..info.spin_dim {
                let m = (info.two_j as f64 - 2.0 * m_idx as f64) / 2.0;
                for k in 0..c {
                    let r = m_idx * c + k;
                    sz += info.multiplicity * m * q[(r, r)].re;
                }
            }
        }
        sz
    }

    /// Mean excitation per emitter, (<S_z> + N/2) / N.
    pub fn excitation_per_emitter(&self) -> f64 {
        (self.sz_expectation() + self.space.n() as f64 / 2.0) / self.space.n() as f64
    }

    /// Photon-heralded conditional state a rho a^dag / tr.
    pub fn conditional_on_photon(&self) -> Result<Self> {
        let c = self.space.cavity_dim();
        let mut out = Self::zero(self.space.clone());
        for (b, info) in self.space.blocks().iter().enumerate() {
            let q = &self.blocks[b];
            let qn = &mut out.blocks[b];
            for m_idx in 0..info.spin_dim {
                for mp_idx in 0..info.spin_dim {
                    for k in 0..c - 1 {
                        for kp in 0..c - 1 {
                            let amp = (((k + 1) * (kp + 1)) as f64).sqrt();
                            let src = (m_idx * c + k + 1, mp_idx * c + kp + 1);
                            qn[(m_idx * c + k, mp_idx * c + kp)] = q[src] * amp;
                        }
                    }
                }
            }
        }
        let tr = out.trace();
        if tr.re <= 1e-14 {
            return Err(Error::HeraldImpossible);
        }
        for b in &mut out.blocks {
            *b = b.map(|v| v / tr);
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// targets
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DickeTargetKind {
    /// |N/2, N/2>, the fully excited state.
    Top,
    /// |N/2, N/2 - 1>, the single-de-excitation W state.
    W,
}

/// Target state in Dicke coordinates, supported on the maximal-j block.
pub fn dicke_target(n: usize, kind: DickeTargetKind) -> TargetState {
    match kind {
        DickeTargetKind::Top => TargetState::dicke_top(n),
        DickeTargetKind::W => TargetState::w_dicke(n),
    }
}

// ---------------------------------------------------------------------------
// generator
// ---------------------------------------------------------------------------

/// Generator over PimState coordinates.
#[derive(Debug, Clone)]
pub struct PimLiouvillian {
    space: DickeSpace,
    superop: CsMat<Complex64>,
}

/// Steady state of the collective-spin generator.
#[derive(Debug, Clone)]
pub struct PimSteadyState {
    pub state: PimState,
    pub residual: f64,
    pub residual_rel: f64,
    pub method: SteadyStateMethod,
}

impl PimLiouvillian {
    pub fn space(&self) -> &DickeSpace {
        &self.space
    }

    pub fn superop(&self) -> &CsMat<Complex64> {
        &self.superop
    }

    pub fn dim(&self) -> usize {
        self.superop.rows()
    }

    pub fn apply_coords(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![re(0.0); x.len()];
        sprs::prod::mul_acc_mat_vec_csr(self.superop.view(), x, &mut y);
        y
    }

    pub fn apply(&self, state: &PimState) -> Result<PimState> {
        let x = state.to_coords();
        PimState::from_coords(self.space.clone(), &self.apply_coords(&x))
    }

    /// Largest violation of the multiplicity-weighted trace functional,
    /// relative to the magnitude of the weighted terms entering each column
    /// sum (the multiplicities reach ~1e12 at N = 50, so the cancellation
    /// has to be judged against the sizes actually being cancelled).
    pub fn trace_violation(&self) -> f64 {
        let (pos, w) = self.space.trace_positions_weights();
        let mut weight_of = vec![0.0f64; self.dim()];
        for (p, ww) in pos.iter().zip(w.iter()) {
            weight_of[*p] = *ww;
        }
        let mut colsum = vec![Complex64::new(0.0, 0.0); self.dim()];
        let mut colabs = vec![0.0f64; self.dim()];
        for (v, (r, c)) in self.superop.iter() {
            if weight_of[r] != 0.0 {
                colsum[c] += *v * weight_of[r];
                colabs[c] += v.norm() * weight_of[r];
            }
        }
        colsum
            .iter()
            .zip(colabs.iter())
            .map(|(z, a)| z.norm() / a.max(1.0))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.superop
            .iter()
            .map(|(v, _)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn steady_state(&self) -> Result<PimSteadyState> {
        self.steady_state_with(SteadyStateMethod::NullSpaceLu, &SolveOptions::default())
    }

    pub fn steady_state_with(
        &self,
        method: SteadyStateMethod,
        opts: &SolveOptions,
    ) -> Result<PimSteadyState> {
        let (pos, w) = self.space.trace_positions_weights();
        let herm = self.space.herm_partner();
        let labels = self.space.sector_labels();
        let raw = kernel::solve_steady(
            &self.superop,
            &pos,
            Some(&w),
            &herm,
            Some(&labels),
            method,
            opts,
        )?;
        let state = PimState::from_coords(self.space.clone(), &raw.vector)?;
        state.validate()?;
        Ok(PimSteadyState {
            state,
            residual: raw.residual,
            residual_rel: raw.residual_rel,
            method: raw.method,
        })
    }
}

/// Spin lowering over the (2j+1)-dim block, row 0 = m = +j.
fn spin_lowering(two_j: u32) -> DMatrix<Complex64> {
    let dim = two_j as usize + 1;
    let mut sm = DMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let two_m = two_j as i32 - 2 * idx as i32;
        if two_m > -(two_j as i32) {
            // S^-|j,m> = a(j,m)|j,m-1>, landing one row below
            sm[(idx + 1, idx)] = re(coeffs::ladder_amplitude(two_j, two_m));
        }
    }
    sm
}

fn spin_z(two_j: u32) -> DMatrix<Complex64> {
    let dim = two_j as usize + 1;
    DMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            re((two_j as f64 - 2.0 * r as f64) / 2.0)
        } else {
            re(0.0)
        }
    })
}

/// Assemble the collective-spin generator for a degenerate all-to-all spec.
///
/// Collective pieces (Hamiltonian, cavity loss, collective decay and
/// dephasing) act within each j block; uniform local channels (pump, the
/// local remainder gamma - gamma_col of spontaneous decay, extra decay,
/// local dephasing) connect j to j' in {j-1, j, j+1} through the
/// coefficient functions of [`coeffs`].
pub fn build_pim_liouvillian(spec: &SystemSpec) -> Result<PimLiouvillian> {
    spec.validate()?;
    if spec.model_kind != ModelKind::AllToAll {
        return Err(Error::Unsupported(
            "the permutationally invariant solver requires the degenerate all-to-all model \
             (non-uniform emitter parameters break permutation symmetry)"
                .into(),
        ));
    }
    let n = spec.n_emitters;
    let space = DickeSpace::new(n, spec.n_max)?;
    let nc = space.coordinate_count();
    let c = space.cavity_dim();
    let mut tri = TriMat::new((nc, nc));

    // local channel rates
    let rate_lower = (spec.gamma - spec.gamma_collective) + spec.gamma_extra;
    let rate_raise = spec.pump;
    let rate_z = spec.gamma_phi;

    for (b, info) in space.blocks().iter().enumerate() {
        let two_j = info.two_j;
        let block_layout = SubsystemLayout::new(vec![info.spin_dim, c])?;
        let sm = embed(&spin_lowering(two_j), 0, &block_layout)?;
        let sp = sm.dagger();
        let sz = embed(&spin_z(two_j), 0, &block_layout)?;
        let a = embed(&local::annihilation(c), 1, &block_layout)?;

        // within-block Hamiltonian
        let mut h = sp.matmul(&sm)?.scale(re(spec.j));
        h = h.add(&a.dagger().matmul(&a)?.scale(re(spec.delta_a)))?;
        if spec.g != 0.0 {
            let coupling = a.dagger().matmul(&sm)?.scale(re(spec.g));
            h = h.add(&coupling)?.add(&coupling.dagger())?;
        }
        if spec.omega != 0.0 {
            let drive = sm.scale(re(spec.omega));
            h = h.add(&drive)?.add(&drive.dagger())?;
        }

        // collective dissipators
        let mut terms: Vec<(f64, LabeledOperator, LabeledOperator)> =
            vec![(spec.kappa / 2.0, a.clone(), a.clone())];
        if spec.gamma_collective != 0.0 {
            terms.push((spec.gamma_collective / 2.0, sm.clone(), sm.clone()));
        }
        if spec.gamma_phi_collective != 0.0 {
            let sz2 = sz.scale(re(2.0));
            terms.push((spec.gamma_phi_collective / 2.0, sz2.clone(), sz2));
        }
        let block_l = liouvillian_from_terms(&block_layout, Some(&h), &terms)?;
        for (v, (r, cc)) in block_l.superop().iter() {
            tri.add_triplet(info.coord_offset + r, info.coord_offset + cc, *v);
        }

        // diagonal (anticommutator) parts of the local channels:
        // sum_i s^dag s = N/2 + S_z, sum_i s s^dag = N/2 - S_z,
        // sum_i sigma_z^2 = N
        let d = info.block_dim;
        let sz_diag: Vec<f64> = (0..d)
            .map(|r| (two_j as f64 - 2.0 * (r / c) as f64) / 2.0)
            .collect();
        for col in 0..d {
            for row in 0..d {
                let mut v = 0.0;
                if rate_lower != 0.0 {
                    v -= rate_lower / 2.0
                        * ((n as f64 / 2.0 + sz_diag[row]) + (n as f64 / 2.0 + sz_diag[col]));
                }
                if rate_raise != 0.0 {
                    v -= rate_raise / 2.0
                        * ((n as f64 / 2.0 - sz_diag[row]) + (n as f64 / 2.0 - sz_diag[col]));
                }
                if rate_z != 0.0 {
                    v -= rate_z * n as f64;
                }
                if v != 0.0 {
                    let coord_r = space.coord(b, row, col);
                    tri.add_triplet(coord_r, coord_r, re(v));
                }
            }
        }
    }

    // block-mixing jump parts of the local channels
    for info in space.blocks() {
        let two_j = info.two_j;
        for (channel, rate) in [
            (LocalChannel::Lowering, rate_lower),
            (LocalChannel::Raising, rate_raise),
            (LocalChannel::Dephasing, rate_z),
        ] {
            if rate == 0.0 {
                continue;
            }
            for two_jp in branch_targets(two_j) {
                let Some(bp) = space.block_of_two_j(two_jp) else {
                    continue;
                };
                let x = coeffs::transfer_matrix(n, two_j, two_jp, channel);
                if x.iter().all(|v| *v == 0.0) {
                    continue;
                }
                // M = X (x) I_cavity on (m, k); the jump superoperator is
                // rate * (M (x) M) in column-stacked coordinates
                for xr1 in 0..x.nrows() {
                    for xc1 in 0..x.ncols() {
                        let v1 = x[(xr1, xc1)];
                        if v1 == 0.0 {
                            continue;
                        }
                        for xr2 in 0..x.nrows() {
                            for xc2 in 0..x.ncols() {
                                let v2 = x[(xr2, xc2)];
                                if v2 == 0.0 {
                                    continue;
                                }
                                for k1 in 0..c {
                                    for k2 in 0..c {
                                        let row_new = space.coord(bp, xr1 * c + k1, xr2 * c + k2);
                                        let col_old = info.coord_offset
                                            + (xc1 * c + k1)
                                            + info.block_dim * (xc2 * c + k2);
                                        tri.add_triplet(row_new, col_old, re(rate * v1 * v2));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    let superop = tri.to_csr();
    let out = PimLiouvillian { space, superop };
    let viol = out.trace_violation();
    if viol > 1e-10 {
        return Err(Error::InvalidState(format!(
            "pim generator violates trace preservation by {viol:.3e} (relative)"
        )));
    }
    Ok(out)
}

fn branch_targets(two_j: u32) -> Vec<u32> {
    let mut v = vec![two_j + 2, two_j];
    if two_j >= 2 {
        v.push(two_j - 2);
    }
    v
}

#[cfg(test)]
mod tests;
