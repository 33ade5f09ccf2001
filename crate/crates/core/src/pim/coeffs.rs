//! Coefficient functions for symmetrized local channels in the Dicke basis.
//!
//! A local one-body channel sum_i O_i rho O_i^dag maps the invariant block
//! j into j' in {j-1, j, j+1}. Because every O is a component of the same
//! rank-1 tensor family, the block-mixing coefficient factorizes as
//!
//!   Lambda_{j'}(m, m') = t(m) t(m'),
//!   t(m) = sqrt(pref * K(j -> j') / d_{j'}) * cg(j, m; q | j', m + q),
//!
//! with pref = 2 for the lowering/raising channels (sigma = sqrt(2) T_-1)
//! and pref = 4 for the z channel (sigma_z = 2 T_0). The channel-summed
//! reduced weights K follow from trace sum rules on sum_i s_i^- s_i^+,
//! sum_i s_i^+ s_i^-, and sum_i s_{z,i}^2:
//!
//!   K(j -> j+1) = (N - 2j)     d_j / 4
//!   K(j -> j)   = (N + 2)      d_j / 4
//!   K(j -> j-1) = (N + 2j + 2) d_j / 4
//!
//! Angular momenta are carried as doubled integers so half-integer spins
//! stay exact. Everything here is validated against the brute-force
//! symmetrization oracle for N <= 4 (see `pim::oracle`).

use nalgebra::DMatrix;

/// Jump-channel kinds of the symmetrized local dissipators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalChannel {
    /// sum_i sigma_i rho sigma_i^dag (q = -1).
    Lowering,
    /// sum_i sigma_i^dag rho sigma_i (q = +1).
    Raising,
    /// sum_i sigma_z_i rho sigma_z_i (q = 0).
    Dephasing,
}

impl LocalChannel {
    pub fn q(self) -> i32 {
        match self {
            Self::Lowering => -1,
            Self::Raising => 1,
            Self::Dephasing => 0,
        }
    }

    fn prefactor(self) -> f64 {
        match self {
            Self::Lowering | Self::Raising => 2.0,
            Self::Dephasing => 4.0,
        }
    }
}

/// Multiplicity of the spin-j irrep for N spin-1/2: the number of paths in
/// the Catalan triangle, C(N, N/2 - j) - C(N, N/2 - j - 1).
pub fn multiplicity(n: usize, two_j: u32) -> f64 {
    debug_assert_eq!((n as u32 + two_j) % 2, 0);
    let k = (n as i64 - two_j as i64) / 2;
    binomial(n, k) - binomial(n, k - 1)
}

fn binomial(n: usize, k: i64) -> f64 {
    if k < 0 || k as usize > n {
        return 0.0;
    }
    let k = (k as usize).min(n - k as usize);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Ladder matrix element: S^- |j, m> = a(j, m) |j, m-1>.
pub fn ladder_amplitude(two_j: u32, two_m: i32) -> f64 {
    let j = two_j as f64 / 2.0;
    let m = two_m as f64 / 2.0;
    ((j + m) * (j - m + 1.0)).max(0.0).sqrt()
}

/// Collective interaction eigenvalue lambda_{j,m}/J = j(j+1) - m(m-1).
pub fn dicke_energy_over_j(two_j: u32, two_m: i32) -> f64 {
    let j = two_j as f64 / 2.0;
    let m = two_m as f64 / 2.0;
    j * (j + 1.0) - m * (m - 1.0)
}

/// Clebsch-Gordan coefficient <j, m; 1, q | j', m + q> for j' in
/// {j-1, j, j+1} (Condon-Shortley phases). Zero outside the valid range.
pub fn cg_rank1(two_j: u32, two_m: i32, q: i32, two_jp: u32) -> f64 {
    let j = two_j as f64 / 2.0;
    let m = two_m as f64 / 2.0;
    let two_mp = two_m + 2 * q;
    if two_mp.unsigned_abs() > two_jp {
        return 0.0;
    }
    if two_jp == two_j + 2 {
        // j' = j + 1
        match q {
            1 => (((j + m + 1.0) * (j + m + 2.0)) / ((2.0 * j + 1.0) * (2.0 * j + 2.0))).sqrt(),
            0 => (((j - m + 1.0) * (j + m + 1.0)) / ((2.0 * j + 1.0) * (j + 1.0))).sqrt(),
            -1 => (((j - m + 1.0) * (j - m + 2.0)) / ((2.0 * j + 1.0) * (2.0 * j + 2.0))).sqrt(),
            _ => unreachable!(),
        }
    } else if two_jp == two_j {
        if two_j == 0 {
            return 0.0;
        }
        match q {
            1 => -(((j - m) * (j + m + 1.0)) / (2.0 * j * (j + 1.0))).sqrt(),
            0 => m / (j * (j + 1.0)).sqrt(),
            -1 => (((j + m) * (j - m + 1.0)) / (2.0 * j * (j + 1.0))).sqrt(),
            _ => unreachable!(),
        }
    } else if two_j >= 2 && two_jp == two_j - 2 {
        match q {
            1 => (((j - m) * (j - m - 1.0)) / (2.0 * j * (2.0 * j + 1.0))).sqrt(),
            0 => -(((j - m) * (j + m)) / (j * (2.0 * j + 1.0))).sqrt(),
            -1 => (((j + m) * (j + m - 1.0)) / (2.0 * j * (2.0 * j + 1.0))).sqrt(),
            _ => unreachable!(),
        }
    } else {
        0.0
    }
}

/// Channel-summed reduced weight K(j -> j') for N spins.
pub fn channel_weight(n: usize, two_j: u32, two_jp: u32) -> f64 {
    let d = multiplicity(n, two_j);
    let nf = n as f64;
    let jf = two_j as f64 / 2.0;
    if two_jp == two_j + 2 {
        (nf - 2.0 * jf) * d / 4.0
    } else if two_jp == two_j {
        (nf + 2.0) * d / 4.0
    } else if two_j >= 2 && two_jp == two_j - 2 {
        (nf + 2.0 * jf + 2.0) * d / 4.0
    } else {
        0.0
    }
}

/// Scalar transfer amplitude t(m): the block-mixing coefficient is
/// t(m) t(m').
pub fn transfer_amplitude(
    n: usize,
    two_j: u32,
    two_m: i32,
    two_jp: u32,
    channel: LocalChannel,
) -> f64 {
    let d_target = multiplicity(n, two_jp);
    if d_target <= 0.0 {
        return 0.0;
    }
    let k = channel_weight(n, two_j, two_jp);
    (channel.prefactor() * k / d_target).sqrt() * cg_rank1(two_j, two_m, channel.q(), two_jp)
}

/// Full block-mixing coefficient: the weight with which q_j(m, m')
/// feeds q_{j'}(m + q, m' + q) inside sum_i O_i rho O_i^dag.
pub fn transfer_coefficient(
    n: usize,
    two_j: u32,
    two_m: i32,
    two_mp: i32,
    two_jp: u32,
    channel: LocalChannel,
) -> f64 {
    transfer_amplitude(n, two_j, two_m, two_jp, channel)
        * transfer_amplitude(n, two_j, two_mp, two_jp, channel)
}

/// Dense transfer matrix X over the spin index (row 0 = m = +j):
/// X[(idx(m + q), idx(m))] = t(m), shape (2j'+1) x (2j+1).
pub fn transfer_matrix(n: usize, two_j: u32, two_jp: u32, channel: LocalChannel) -> DMatrix<f64> {
    let rows = two_jp as usize + 1;
    let cols = two_j as usize + 1;
    let mut x = DMatrix::zeros(rows, cols);
    let q = channel.q();
    for col in 0..cols {
        let two_m = two_j as i32 - 2 * col as i32;
        let two_mp = two_m + 2 * q;
        if two_mp.unsigned_abs() > two_jp {
            continue;
        }
        let row = ((two_jp as i32 - two_mp) / 2) as usize;
        let t = transfer_amplitude(n, two_j, two_m, two_jp, channel);
        if t != 0.0 {
            x[(row, col)] = t;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn multiplicities_sum_to_hilbert_dimension() {
        for n in 1..=10usize {
            let mut total = 0.0;
            let mut two_j = n as u32;
            loop {
                total += multiplicity(n, two_j) * (two_j + 1) as f64;
                if two_j < 2 {
                    break;
                }
                two_j -= 2;
            }
            assert_relative_eq!(total, (1u64 << n) as f64, epsilon = 1e-6);
        }
    }

    #[test]
    fn known_multiplicities() {
        assert_eq!(multiplicity(2, 2), 1.0);
        assert_eq!(multiplicity(2, 0), 1.0);
        assert_eq!(multiplicity(3, 3), 1.0);
        assert_eq!(multiplicity(3, 1), 2.0);
        assert_eq!(multiplicity(4, 4), 1.0);
        assert_eq!(multiplicity(4, 2), 3.0);
        assert_eq!(multiplicity(4, 0), 2.0);
    }

    #[test]
    fn cg_completeness_per_q() {
        // sum over j' of cg^2 is 1 for every (j, m, q)
        for two_j in [1u32, 2, 3, 4, 5] {
            for q in [-1i32, 0, 1] {
                let mut two_m = two_j as i32;
                while two_m >= -(two_j as i32) {
                    if (two_m + 2 * q).unsigned_abs() <= two_j + 2 {
                        let mut s = 0.0;
                        for two_jp in [two_j.saturating_sub(2), two_j, two_j + 2] {
                            if two_jp == two_j && two_j == 0 {
                                continue;
                            }
                            if two_jp < two_j && two_j < 2 {
                                continue;
                            }
                            s += cg_rank1(two_j, two_m, q, two_jp).powi(2);
                        }
                        assert_relative_eq!(s, 1.0, epsilon = 1e-12);
                    }
                    two_m -= 2;
                }
            }
        }
    }

    #[test]
    fn single_spin_transfers_reproduce_pauli_algebra() {
        // N = 1, j = 1/2: the transfer matrices are exactly sigma, sigma^dag
        // and sigma_z in the (e, g) row ordering.
        let low = transfer_matrix(1, 1, 1, LocalChannel::Lowering);
        assert_relative_eq!(low[(0, 0)], 0.0, epsilon = 1e-14); // row m=+1/2
        assert_relative_eq!(low[(1, 0)], 1.0, epsilon = 1e-14); // |g><e|
        let z = transfer_matrix(1, 1, 1, LocalChannel::Dephasing);
        assert_relative_eq!(z[(0, 0)], 1.0, epsilon = 1e-14);
        assert_relative_eq!(z[(1, 1)], -1.0, epsilon = 1e-14);
    }

    #[test]
    fn two_spin_lowering_from_ee() {
        // sum_i sigma_i |ee><ee| sigma_i^dag = |1,0><1,0| + |0,0><0,0|
        let within = transfer_coefficient(2, 2, 2, 2, 2, LocalChannel::Lowering);
        let down = transfer_coefficient(2, 2, 2, 2, 0, LocalChannel::Lowering);
        assert_relative_eq!(within, 1.0, epsilon = 1e-12);
        assert_relative_eq!(down, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn two_spin_dephasing_cross_coherence() {
        // sum_i sigma_z_i |1,1><1,-1| sigma_z_i = -2 |1,1><1,-1| + ...
        let c = transfer_coefficient(2, 2, 2, -2, 2, LocalChannel::Dephasing);
        assert_relative_eq!(c, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn dicke_energy_examples() {
        // N = 5 ladder: top 5J, W 8J; the enhanced transition is at -3J
        assert_relative_eq!(dicke_energy_over_j(5, 5), 5.0, epsilon = 1e-14);
        assert_relative_eq!(dicke_energy_over_j(5, 3), 8.0, epsilon = 1e-14);
        // N = 50: top - W = J(2 - 50)
        let n = 50u32;
        let top = dicke_energy_over_j(n, n as i32);
        let w = dicke_energy_over_j(n, n as i32 - 2);
        assert_relative_eq!(top - w, 2.0 - n as f64, epsilon = 1e-12);
    }
}
