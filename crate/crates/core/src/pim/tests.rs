use super::oracle::{self, DickeBasis};
use super::*;
use crate::metrics::{self, TargetState};
use crate::model::{self, SystemSpec};
use crate::qop::partial_trace;
use crate::solvers::steady_state;
use approx::assert_relative_eq;

fn degenerate_spec(n: usize) -> SystemSpec {
    let mut spec = SystemSpec::all_to_all(n);
    spec.j = 50.0;
    spec.gamma_collective = 0.9;
    spec.pump = 10.0;
    spec.kappa = 100.0;
    spec.g = 10.0;
    spec.delta_a = spec.j * (2.0 - n as f64);
    spec.n_max = 2;
    spec
}

#[test]
fn production_coefficients_match_symmetrization_oracle() {
    for n in [2usize, 3, 4] {
        let worst = oracle::max_coefficient_deviation(n).unwrap();
        assert!(worst < 1e-10, "N = {n}: worst deviation {worst:.3e}");
    }
}

#[test]
fn local_channel_closes_on_invariant_sector() {
    // sum_i O_i E O_i^dag decomposes exactly over the three neighbouring
    // blocks; nothing leaks outside the rank-1 tensor branches.
    let n = 3;
    let basis = DickeBasis::build(n).unwrap();
    let layout = crate::qop::SubsystemLayout::emitters(n).unwrap();
    for channel in [
        LocalChannel::Lowering,
        LocalChannel::Raising,
        LocalChannel::Dephasing,
    ] {
        let (two_j, two_m, two_mp) = (3u32, 1i32, -1i32);
        let e = basis.invariant_element(two_j, two_m, two_mp);
        let mut r = nalgebra::DMatrix::<Complex64>::zeros(8, 8);
        for i in 0..n {
            let o = match channel {
                LocalChannel::Lowering => {
                    crate::qop::embed(&crate::qop::local::sigma_minus(), i, &layout).unwrap()
                }
                LocalChannel::Raising => {
                    crate::qop::embed(&crate::qop::local::sigma_minus(), i, &layout)
                        .unwrap()
                        .dagger()
                }
                LocalChannel::Dephasing => {
                    crate::qop::embed(&crate::qop::local::sigma_z(), i, &layout).unwrap()
                }
            }
            .to_dense();
            r += &o * &e * o.adjoint();
        }
        let q = channel.q();
        let mut recon = nalgebra::DMatrix::<Complex64>::zeros(8, 8);
        for two_jp in [1u32, 3] {
            let (mq, mpq) = (two_m + 2 * q, two_mp + 2 * q);
            if mq.unsigned_abs() > two_jp || mpq.unsigned_abs() > two_jp {
                continue;
            }
            let c = coeffs::transfer_coefficient(n, two_j, two_m, two_mp, two_jp, channel);
            recon += oracle_scaled(&basis, two_jp, mq, mpq, c);
        }
        assert!(
            (&r - &recon).norm() < 1e-10,
            "channel {channel:?} leaks outside branches"
        );
    }
}

fn oracle_scaled(
    basis: &DickeBasis,
    two_j: u32,
    two_m: i32,
    two_mp: i32,
    c: f64,
) -> nalgebra::DMatrix<Complex64> {
    basis.invariant_element(two_j, two_m, two_mp).map(|v| v * c)
}

#[test]
fn dicke_basis_is_orthonormal_and_matched() {
    for n in [2usize, 3, 4] {
        let basis = DickeBasis::build(n).unwrap();
        for block in basis.blocks() {
            for (idx, v) in block.vectors.iter().enumerate() {
                let gram = v.adjoint() * v;
                let eye = nalgebra::DMatrix::<Complex64>::identity(gram.nrows(), gram.ncols());
                assert!(
                    (gram - eye).norm() < 1e-10,
                    "N={n} 2j={} m idx {idx}",
                    block.two_j
                );
            }
        }
    }
}

#[test]
fn pim_matches_full_solver_for_two_emitters() {
    let mut spec = degenerate_spec(2);
    spec.delta_a = 0.0; // N = 2: the top -> W transition sits at J(2-N) = 0
    let pim = build_pim_liouvillian(&spec).unwrap();
    let pim_ss = pim.steady_state().unwrap();

    let full = model::build_liouvillian(&spec).unwrap();
    let full_ss = steady_state(&full).unwrap();

    let basis = DickeBasis::build(2).unwrap();
    let mapped = oracle::pim_to_full(&pim_ss.state, &basis).unwrap();
    let dist = metrics::trace_distance(&mapped, &full_ss.rho_ss).unwrap();
    assert!(dist < 1e-8, "trace distance {dist:.3e}");
}

#[test]
fn pim_matches_full_solver_fidelity_for_three_emitters() {
    let spec = degenerate_spec(3);
    let pim = build_pim_liouvillian(&spec).unwrap();
    let f_pim = pim
        .steady_state()
        .unwrap()
        .state
        .fidelity(&dicke_target(3, DickeTargetKind::W))
        .unwrap();

    let full = model::build_liouvillian(&spec).unwrap();
    let rho = steady_state(&full).unwrap().rho_ss;
    let reduced = partial_trace(&rho, &[0, 1, 2]).unwrap();
    let f_full = metrics::fidelity(&reduced, &TargetState::w(3).unwrap()).unwrap();

    assert!(
        (f_pim - f_full).abs() < 1e-6,
        "pim {f_pim} vs full {f_full}"
    );
}

#[test]
fn collective_only_dynamics_never_mixes_blocks() {
    let mut spec = degenerate_spec(4);
    // remove every local channel: pump off and gamma fully collective
    spec.pump = 0.0;
    spec.gamma = 1.0;
    spec.gamma_collective = 1.0;
    let pim = build_pim_liouvillian(&spec).unwrap();
    let space = pim.space();
    // structural check: no superoperator entry couples different blocks
    let block_of = |coord: usize| -> usize {
        space
            .blocks()
            .iter()
            .position(|b| {
                coord >= b.coord_offset && coord < b.coord_offset + b.block_dim * b.block_dim
            })
            .unwrap()
    };
    for (v, (r, c)) in pim.superop().iter() {
        if v.norm() > 1e-10 {
            assert_eq!(
                block_of(r),
                block_of(c),
                "coupling between blocks at ({r},{c})"
            );
        }
    }
}

#[test]
fn pump_only_steady_state_matches_single_qubit_oracle() {
    // independent emitters under pump and decay: per-emitter excitation
    // P / (P + gamma), exercising every block-mixing coefficient
    let mut spec = SystemSpec::all_to_all(4);
    spec.pump = 3.0;
    spec.kappa = 1.0;
    spec.n_max = 1;
    let pim = build_pim_liouvillian(&spec).unwrap();
    let ss = pim.steady_state().unwrap();
    let expect = spec.pump / (spec.pump + spec.gamma);
    assert_relative_eq!(ss.state.excitation_per_emitter(), expect, epsilon = 1e-8);
}

#[test]
fn both_methods_agree_on_pim() {
    let spec = degenerate_spec(3);
    let pim = build_pim_liouvillian(&spec).unwrap();
    let a = pim.steady_state().unwrap();
    let b = pim
        .steady_state_with(
            SteadyStateMethod::ShiftedInverseIteration,
            &SolveOptions::default(),
        )
        .unwrap();
    let diff: f64 = a
        .state
        .to_coords()
        .iter()
        .zip(b.state.to_coords().iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    assert!(diff < 1e-8, "methods differ by {diff:.3e}");
}

#[test]
fn w_target_for_two_emitters_is_the_symmetric_state() {
    let space = DickeSpace::new(2, 1).unwrap();
    let mut st = PimState::zero(space.clone());
    // pure |1, 0> (x) vacuum: m = 0 -> idx 1 in the triplet block
    let r = space.row(0, 1, 0);
    st.block_mut(0)[(r, r)] = Complex64::new(1.0, 0.0);
    st.validate().unwrap();
    assert_relative_eq!(
        st.fidelity(&dicke_target(2, DickeTargetKind::W)).unwrap(),
        1.0,
        epsilon = 1e-12
    );
    let basis = DickeBasis::build(2).unwrap();
    let full = oracle::pim_to_full(&st, &basis).unwrap();
    let emitters = partial_trace(&full, &[0, 1]).unwrap();
    let f = metrics::fidelity(&emitters, &TargetState::symmetric()).unwrap();
    assert_relative_eq!(f, 1.0, epsilon = 1e-12);
}

#[test]
fn ground_and_top_states() {
    let space = DickeSpace::new(5, 2).unwrap();
    let g = PimState::ground(space.clone());
    g.validate().unwrap();
    assert_relative_eq!(g.excitation_per_emitter(), 0.0, epsilon = 1e-14);
    let t = PimState::top_excited(space);
    t.validate().unwrap();
    assert_relative_eq!(t.excitation_per_emitter(), 1.0, epsilon = 1e-14);
    assert_relative_eq!(
        t.fidelity(&dicke_target(5, DickeTargetKind::Top)).unwrap(),
        1.0,
        epsilon = 1e-14
    );
}

#[test]
fn conditional_state_lowers_the_cavity() {
    let space = DickeSpace::new(3, 2).unwrap();
    let mut st = PimState::zero(space.clone());
    // top Dicke state with one photon
    let r = space.row(0, 0, 1);
    st.block_mut(0)[(r, r)] = Complex64::new(1.0, 0.0);
    let cond = st.conditional_on_photon().unwrap();
    let p = cond.cavity_number_distribution();
    assert_relative_eq!(p[0], 1.0, epsilon = 1e-12);
    // vacuum heralding impossible
    let vac = PimState::ground(space);
    assert!(matches!(
        vac.conditional_on_photon(),
        Err(crate::Error::HeraldImpossible)
    ));
}

#[test]
fn pim_requires_the_all_to_all_model() {
    let spec = model::presets::fig1();
    assert!(matches!(
        build_pim_liouvillian(&spec),
        Err(crate::Error::Unsupported(_))
    ));
}

#[test]
fn spin_ket_index_layout() {
    let space = DickeSpace::new(3, 0).unwrap();
    // blocks: 2j = 3 (dim 4), 2j = 1 (dim 2)
    assert_eq!(space.spin_ket_index(3, 3), Some(0));
    assert_eq!(space.spin_ket_index(3, -3), Some(3));
    assert_eq!(space.spin_ket_index(1, 1), Some(4));
    assert_eq!(space.spin_ket_index(1, -1), Some(5));
    assert_eq!(space.spin_ket_index(1, 0), None);
    // coordinate count: 8^2-ish blocks: (4*1)^2 + (2*1)^2 = 20
    assert_eq!(space.coordinate_count(), 20);
}

#[test]
fn pim_matches_full_solver_on_randomized_specs() {
    use rand::{rngs::StdRng, RngExt, SeedableRng};
    let mut rng = StdRng::seed_from_u64(2024);
    for n in [2usize, 3] {
        for _ in 0..3 {
            let mut spec = SystemSpec::all_to_all(n);
            spec.j = 20.0 + 80.0 * rng.random::<f64>();
            spec.gamma_collective = rng.random::<f64>() * 0.95;
            spec.pump = 0.5 + 10.0 * rng.random::<f64>();
            spec.kappa = 30.0 + 100.0 * rng.random::<f64>();
            spec.g = 2.0 + 8.0 * rng.random::<f64>();
            spec.delta_a = spec.j * (2.0 - n as f64) + 10.0 * (rng.random::<f64>() - 0.5);
            spec.gamma_phi = rng.random::<f64>();
            spec.n_max = 2;

            let p = build_pim_liouvillian(&spec)
                .unwrap()
                .steady_state()
                .unwrap();
            let f_pim = p
                .state
                .fidelity(&dicke_target(n, DickeTargetKind::W))
                .unwrap();
            let n_pim = p.state.cavity_population();

            let full = steady_state(&model::build_liouvillian(&spec).unwrap()).unwrap();
            let sites: Vec<usize> = (0..n).collect();
            let red = partial_trace(&full.rho_ss, &sites).unwrap();
            let f_full = metrics::fidelity(&red, &TargetState::w(n).unwrap()).unwrap();
            let n_full = metrics::cavity_population(&full.rho_ss).unwrap();

            assert!(
                (f_pim - f_full).abs() < 1e-6 && (n_pim - n_full).abs() < 1e-6,
                "N={n} spec {spec:?}: dF {:.2e} dn {:.2e}",
                (f_pim - f_full).abs(),
                (n_pim - n_full).abs()
            );
        }
    }
}
