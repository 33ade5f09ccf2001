//! Brute-force validation tooling for the collective-spin solver, feasible
//! for small N: a matched |j, m, alpha> basis of the full 2^N space, exact
//! maps between the block representation and full-space density matrices,
//! and direct symmetrization of the local dissipators. The production
//! coefficient functions in [`super::coeffs`] must reproduce the extracted
//! rates before they are trusted at large N.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qop::{embed, local, DensityMatrix, SubsystemLayout};

use super::coeffs::{self, LocalChannel};
use super::{DickeSpace, PimState};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Orthonormal |j, m, alpha> basis with alpha labels matched across m by
/// ladder descent from the highest-weight space of each irrep.
pub struct DickeBasis {
    n: usize,
    blocks: Vec<DickeBasisBlock>,
}

pub struct DickeBasisBlock {
    pub two_j: u32,
    /// vectors[idx_m] is 2^n x d_j; column alpha is |j, m, alpha>,
    /// idx_m = j - m from the top.
    pub vectors: Vec<DMatrix<Complex64>>,
}

impl DickeBasis {
    pub fn build(n: usize) -> Result<Self> {
        if n == 0 || n > 12 {
            return Err(Error::Unsupported(
                "the brute-force Dicke basis is intended for small N".into(),
            ));
        }
        let layout = SubsystemLayout::emitters(n)?;
        let dim = 1usize << n;
        let mut sp = DMatrix::<Complex64>::zeros(dim, dim);
        for i in 0..n {
            sp += embed(&local::sigma_plus(), i, &layout)?.to_dense();
        }
        let sm = sp.adjoint();

        // computational states grouped by excitation number
        let mut sectors: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for idx in 0..dim {
            sectors[(idx as u64).count_ones() as usize].push(idx);
        }

        let mut blocks = Vec::new();
        let mut two_j = n as u32;
        loop {
            // highest-weight space: kernel of S^+ inside the m = +j sector
            let n_exc = ((n as i32 + two_j as i32) / 2) as usize;
            let sector = &sectors[n_exc];
            let p = DMatrix::<Complex64>::from_fn(dim, sector.len(), |r, c| {
                if sector[c] == r {
                    re(1.0)
                } else {
                    re(0.0)
                }
            });
            let a = &sp * &p;
            let hw = null_space(&a, 1e-8);
            let d_j = coeffs::multiplicity(n, two_j).round() as usize;
            if hw.len() != d_j {
                return Err(Error::InvalidState(format!(
                    "highest-weight space of 2j={two_j}: found {} vectors, expected {d_j}",
                    hw.len()
                )));
            }
            let mut top = DMatrix::<Complex64>::zeros(dim, d_j);
            for (alpha, w) in hw.iter().enumerate() {
                let full = &p * w;
                top.set_column(alpha, &full);
            }

            // ladder down with matched alpha columns
            let mut vectors = vec![top];
            let mut two_m = two_j as i32;
            while two_m > -(two_j as i32) {
                let amp = coeffs::ladder_amplitude(two_j, two_m);
                let prev = vectors.last().unwrap();
                let next = (&sm * prev).map(|v| v / amp);
                vectors.push(next);
                two_m -= 2;
            }
            blocks.push(DickeBasisBlock { two_j, vectors });
            if two_j < 2 {
                break;
            }
            two_j -= 2;
        }
        Ok(Self { n, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[DickeBasisBlock] {
        &self.blocks
    }

    pub fn block_of_two_j(&self, two_j: u32) -> Option<&DickeBasisBlock> {
        self.blocks.iter().find(|b| b.two_j == two_j)
    }

    /// Invariant basis element E_{j, m, m'} = sum_alpha |j m a><j m' a|
    /// on the emitter space.
    pub fn invariant_element(&self, two_j: u32, two_m: i32, two_mp: i32) -> DMatrix<Complex64> {
        let b = self.block_of_two_j(two_j).expect("block exists");
        let i1 = ((two_j as i32 - two_m) / 2) as usize;
        let i2 = ((two_j as i32 - two_mp) / 2) as usize;
        &b.vectors[i1] * b.vectors[i2].adjoint()
    }
}

fn null_space(a: &DMatrix<Complex64>, tol: f64) -> Vec<DVector<Complex64>> {
    let cols = a.ncols();
    let svd = nalgebra::SVD::new(a.clone(), false, true);
    let v_t = svd.v_t.expect("svd with v_t");
    let mut out = Vec::new();
    for k in 0..cols.min(svd.singular_values.len()) {
        if svd.singular_values[k] < tol {
            out.push(v_t.row(k).adjoint());
        }
    }
    // columns of V beyond the number of singular values are also null
    for k in svd.singular_values.len()..v_t.nrows() {
        out.push(v_t.row(k).adjoint());
    }
    out
}

/// Expand a block state into the full product-space density matrix
/// (emitters (x) cavity).
pub fn pim_to_full(state: &PimState, basis: &DickeBasis) -> Result<DensityMatrix> {
    let space = state.space();
    let n = space.n();
    if basis.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: basis.n(),
            context: "dicke basis".into(),
        });
    }
    let c = space.cavity_dim();
    let layout = SubsystemLayout::emitters_and_cavity(n, c - 1)?;
    let dim = layout.total_dim();
    let emitter_dim = 1usize << n;
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);

    for (b, info) in space.blocks().iter().enumerate() {
        let bb = basis.block_of_two_j(info.two_j).expect("matching block");
        let d_j = bb.vectors[0].ncols();
        let q = state.block(b);
        for m_idx in 0..info.spin_dim {
            for mp_idx in 0..info.spin_dim {
                // emitter-space invariant element for this (m, m') pair
                let e = &bb.vectors[m_idx] * bb.vectors[mp_idx].adjoint();
                for k in 0..c {
                    for kp in 0..c {
                        let w = q[(m_idx * c + k, mp_idx * c + kp)];
                        if w.norm() == 0.0 {
                            continue;
                        }
                        for er in 0..emitter_dim {
                            for ec in 0..emitter_dim {
                                let v = e[(er, ec)];
                                if v.norm() == 0.0 {
                                    continue;
                                }
                                out[(er * c + k, ec * c + kp)] += w * v;
                            }
                        }
                    }
                }
            }
        }
        let _ = d_j;
    }
    DensityMatrix::new_unchecked(layout, out)
}

/// Project a full-space density matrix onto the block representation.
pub fn full_to_pim(rho: &DensityMatrix, basis: &DickeBasis, n_max: usize) -> Result<PimState> {
    let n = basis.n();
    let c = n_max + 1;
    let space = DickeSpace::new(n, n_max)?;
    let mut state = PimState::zero(space.clone());
    let emitter_dim = 1usize << n;
    let m = rho.matrix();

    for (b, info) in space.blocks().iter().enumerate() {
        let bb = basis.block_of_two_j(info.two_j).expect("matching block");
        let d_j = bb.vectors[0].ncols() as f64;
        let q = state.block_mut(b);
        for m_idx in 0..info.spin_dim {
            for mp_idx in 0..info.spin_dim {
                for k in 0..c {
                    for kp in 0..c {
                        // (1/d_j) sum_alpha <j m a, k| rho |j m' a, k'>
                        let mut acc = re(0.0);
                        for alpha in 0..bb.vectors[0].ncols() {
                            let va = bb.vectors[m_idx].column(alpha);
                            let vb = bb.vectors[mp_idx].column(alpha);
                            for er in 0..emitter_dim {
                                if va[er].norm() == 0.0 {
                                    continue;
                                }
                                for ec in 0..emitter_dim {
                                    if vb[ec].norm() == 0.0 {
                                        continue;
                                    }
                                    acc += va[er].conj() * m[(er * c + k, ec * c + kp)] * vb[ec];
                                }
                            }
                        }
                        q[(m_idx * c + k, mp_idx * c + kp)] = acc / d_j;
                    }
                }
            }
        }
    }
    Ok(state)
}

/// Brute-force block-mixing coefficient: apply sum_i O_i E O_i^dag to the
/// invariant element (j, m, m') and read off the weight landing on
/// (j', m + q, m' + q).
pub fn extract_transfer_coefficient(
    basis: &DickeBasis,
    two_j: u32,
    two_m: i32,
    two_mp: i32,
    two_jp: u32,
    channel: LocalChannel,
) -> f64 {
    let n = basis.n();
    let layout = SubsystemLayout::emitters(n).unwrap();
    let e = basis.invariant_element(two_j, two_m, two_mp);
    let mut r = DMatrix::<Complex64>::zeros(e.nrows(), e.ncols());
    for i in 0..n {
        let o = match channel {
            LocalChannel::Lowering => embed(&local::sigma_minus(), i, &layout).unwrap(),
            LocalChannel::Raising => embed(&local::sigma_minus(), i, &layout).unwrap().dagger(),
            LocalChannel::Dephasing => embed(&local::sigma_z(), i, &layout).unwrap(),
        }
        .to_dense();
        r += &o * &e * o.adjoint();
    }
    let q = channel.q();
    let (two_mq, two_mpq) = (two_m + 2 * q, two_mp + 2 * q);
    if two_mq.unsigned_abs() > two_jp || two_mpq.unsigned_abs() > two_jp {
        return 0.0;
    }
    let target = basis.invariant_element(two_jp, two_mq, two_mpq);
    let d_jp = coeffs::multiplicity(n, two_jp);
    // Tr[target^dag r] / d_j'
    let mut acc = re(0.0);
    for i in 0..r.nrows() {
        for jj in 0..r.ncols() {
            acc += target[(i, jj)].conj() * r[(i, jj)];
        }
    }
    (acc / d_jp).re
}

/// Compare every production coefficient against the brute-force extraction,
/// returning the largest absolute deviation.
pub fn max_coefficient_deviation(n: usize) -> Result<f64> {
    let basis = DickeBasis::build(n)?;
    let space = DickeSpace::new(n, 0)?;
    let mut worst = 0.0f64;
    for info in space.blocks() {
        let two_j = info.two_j;
        for channel in [
            LocalChannel::Lowering,
            LocalChannel::Raising,
            LocalChannel::Dephasing,
        ] {
            for target in super::branch_targets(two_j) {
                if space.block_of_two_j(target).is_none() {
                    continue;
                }
                let mut two_m = two_j as i32;
                while two_m >= -(two_j as i32) {
                    let mut two_mp = two_j as i32;
                    while two_mp >= -(two_j as i32) {
                        let expected = extract_transfer_coefficient(
                            &basis, two_j, two_m, two_mp, target, channel,
                        );
                        let got =
                            coeffs::transfer_coefficient(n, two_j, two_m, two_mp, target, channel);
                        worst = worst.max((expected - got).abs());
                        two_mp -= 2;
                    }
                    two_m -= 2;
                }
            }
        }
    }
    Ok(worst)
}
