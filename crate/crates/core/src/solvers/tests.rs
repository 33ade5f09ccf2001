use super::*;
use crate::model::{self, presets, SystemSpec};
use crate::qop::{embed, local, DensityMatrix, SubsystemLayout};
use approx::assert_relative_eq;
use nalgebra::DVector;

fn trace_dist(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let diff = a.matrix() - b.matrix();
    let herm = (&diff + diff.adjoint()).map(|v| v * 0.5);
    nalgebra::SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .map(|e| e.abs())
        .sum::<f64>()
        * 0.5
}

#[test]
fn decay_only_qubit_relaxes_to_ground() {
    let mut spec = SystemSpec::dimer();
    spec.gamma_collective = 0.0;
    spec.kappa = 1.0; // lossy cavity so vacuum is its unique fixed point
    spec.n_max = 1;
    let l = model::build_liouvillian(&spec).unwrap();
    let res = steady_state(&l).unwrap();
    assert!(
        res.residual_rel < 1e-12,
        "residual {:.2e}",
        res.residual_rel
    );
    // ground state occupies basis index 0
    assert_relative_eq!(res.rho_ss.matrix()[(0, 0)].re, 1.0, epsilon = 1e-10);
}

#[test]
fn pump_dominated_dimer_saturates_to_ee() {
    let mut spec = SystemSpec::dimer();
    spec.j = 5.0;
    spec.pump = 2000.0;
    spec.kappa = 1.0;
    spec.n_max = 1;
    let l = model::build_liouvillian(&spec).unwrap();
    let rho = steady_state(&l).unwrap().rho_ss;
    let layout = spec.layout();
    let ee = layout.flatten(&[1, 1, 0]);
    assert!(
        rho.matrix()[(ee, ee)].re > 0.997,
        "P >> gamma should invert both emitters"
    );
}

#[test]
fn fig1_liouvillian_dimension_and_unique_kernel() {
    let spec = presets::fig1();
    let l = model::build_liouvillian(&spec).unwrap();
    let d = 4 * (spec.n_max + 1);
    assert_eq!(l.dim(), d * d);
    // degeneracy check is on by default; success implies kernel dimension 1
    let res = steady_state(&l).unwrap();
    assert!(res.residual_rel < 1e-9);
}

#[test]
fn dark_state_degeneracy_is_reported_not_guessed() {
    // delta = 0, P = 0, gamma_12 = gamma: the antisymmetric state is
    // perfectly dark and the kernel is more than one dimensional.
    let mut spec = SystemSpec::dimer();
    spec.j = 10.0;
    spec.gamma_collective = 1.0;
    spec.kappa = 1.0;
    spec.n_max = 1;
    let l = model::build_liouvillian(&spec).unwrap();
    match steady_state(&l) {
        Err(crate::Error::DegenerateSteadyState { multiplicity }) => {
            assert!(multiplicity >= 2)
        }
        other => panic!("expected degenerate steady state, got {other:?}"),
    }
}

#[test]
fn both_methods_agree() {
    let mut spec = SystemSpec::dimer();
    spec.j = 50.0;
    spec.delta = 0.5;
    spec.gamma_collective = 0.9;
    spec.pump = 2.0;
    spec.kappa = 20.0;
    spec.g = 5.0;
    spec.delta_a = -50.0;
    spec.n_max = 2;
    let l = model::build_liouvillian(&spec).unwrap();
    let a =
        steady_state_with(&l, SteadyStateMethod::NullSpaceLu, &SolveOptions::default()).unwrap();
    let b = steady_state_with(
        &l,
        SteadyStateMethod::ShiftedInverseIteration,
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(trace_dist(&a.rho_ss, &b.rho_ss) < 1e-8);
}

#[test]
fn sector_reduction_matches_full_solve() {
    // Omega = 0 allows the sector-0 restriction; forcing the full solve by
    // dropping the labels must give the same state.
    let mut spec = SystemSpec::dimer();
    spec.j = 30.0;
    spec.gamma_collective = 0.5;
    spec.pump = 3.0;
    spec.kappa = 40.0;
    spec.g = 8.0;
    spec.delta_a = -30.0;
    spec.n_max = 2;
    let l = model::build_liouvillian(&spec).unwrap();
    let d = l.layout().total_dim();
    let reduced = steady_state(&l).unwrap();
    let raw_full = kernel::solve_steady(
        l.superop(),
        &l.trace_positions(),
        None,
        &kernel::column_stacked_herm_partner(d),
        None,
        SteadyStateMethod::NullSpaceLu,
        &SolveOptions::default(),
    )
    .unwrap();
    assert_eq!(raw_full.solve_dim, d * d);
    assert!(reduced.residual_rel < 1e-9);
    let full_rho =
        DensityMatrix::new(l.layout().clone(), crate::qop::unvec(&raw_full.vector, d)).unwrap();
    assert!(trace_dist(&reduced.rho_ss, &full_rho) < 1e-9);
}

#[test]
fn pump_only_qubit_rate_equation() {
    // two-level rate equations: rho_ee relaxes at P + gamma toward P/(P+gamma)
    let mut spec = SystemSpec::dimer();
    spec.pump = 3.0;
    spec.n_max = 1;
    // decouple the second emitter and the cavity entirely (J = g = 0)
    let l = model::build_liouvillian(&spec).unwrap();
    let layout = spec.layout();
    let rho0 = DensityMatrix::ground(layout.clone());
    let grid = [0.05, 0.1, 0.2, 0.5, 1.0, 2.0];
    let n1 = {
        let s = model::emitter_lowering(&spec, 0).unwrap();
        s.dagger().matmul(&s).unwrap()
    };
    let opts = TimeEvolveOptions {
        observables: vec![("n1".into(), n1)],
        ..Default::default()
    };
    let traj = time_evolve(&l, &rho0, &grid, &opts).unwrap();
    let series = traj.observable("n1").unwrap();
    let (p, g) = (spec.pump, spec.gamma);
    for (&t, &got) in grid.iter().zip(series.iter()) {
        let expect = p / (p + g) * (1.0 - (-(p + g) * t).exp());
        assert_relative_eq!(got, expect, epsilon = 1e-8);
    }
}

#[test]
fn unitary_evolution_preserves_purity() {
    let mut spec = SystemSpec::dimer();
    spec.j = 4.0;
    spec.gamma = 0.0;
    spec.n_max = 1;
    let l = model::build_liouvillian(&spec).unwrap();
    let layout = spec.layout();
    // superposition of |gg> and |eg>
    let mut ket = DVector::zeros(layout.total_dim());
    ket[layout.flatten(&[0, 0, 0])] = num_complex::Complex64::new(0.6, 0.0);
    ket[layout.flatten(&[1, 0, 0])] = num_complex::Complex64::new(0.0, 0.8);
    let rho0 = DensityMatrix::from_pure(layout, &ket).unwrap();
    let traj = time_evolve(&l, &rho0, &[0.3, 0.9, 2.0], &TimeEvolveOptions::default()).unwrap();
    for st in &traj.states {
        assert!(
            (st.purity() - 1.0).abs() < 1e-9,
            "purity drift {:.2e}",
            st.purity() - 1.0
        );
    }
}

#[test]
fn krylov_and_dense_paths_agree() {
    let mut spec = SystemSpec::dimer();
    spec.j = 20.0;
    spec.pump = 1.0;
    spec.kappa = 15.0;
    spec.g = 4.0;
    spec.delta_a = -20.0;
    spec.gamma_collective = 0.8;
    spec.n_max = 2;
    let l = model::build_liouvillian(&spec).unwrap();
    let rho0 = DensityMatrix::ground(spec.layout());
    let grid = [0.02, 0.1, 0.6, 1.5];
    let dense = time_evolve(&l, &rho0, &grid, &TimeEvolveOptions::default()).unwrap();
    let kry = time_evolve(
        &l,
        &rho0,
        &grid,
        &TimeEvolveOptions {
            force_krylov: true,
            rtol: 1e-10,
            atol: 1e-12,
            ..Default::default()
        },
    )
    .unwrap();
    for (a, b) in dense.states.iter().zip(kry.states.iter()) {
        assert!(trace_dist(a, b) < 1e-7);
    }
}

#[test]
fn stiffness_error_when_substep_budget_exhausted() {
    let spec = presets::fig1();
    let l = model::build_liouvillian(&spec).unwrap();
    let rho0 = DensityMatrix::ground(spec.layout());
    let opts = TimeEvolveOptions {
        force_krylov: true,
        max_substeps: 3,
        ..Default::default()
    };
    match time_evolve(&l, &rho0, &[1.0], &opts) {
        Err(crate::Error::Stiffness { .. }) => {}
        other => panic!("expected stiffness error, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn evolution_converges_to_steady_state() {
    let mut spec = presets::fig1();
    spec.n_max = 2;
    let l = model::build_liouvillian(&spec).unwrap();
    let ss = steady_state(&l).unwrap().rho_ss;
    // tau_S estimate: 1/(P + Gamma_P - sqrt(Gamma_P^2 + P gamma_S)) ~ 1/39.9
    let tau = 1.0 / 39.9;
    let rho0 = DensityMatrix::ground(spec.layout());
    let grid = [5.0 * tau, 10.0 * tau, 20.0 * tau];
    let traj = time_evolve(&l, &rho0, &grid, &TimeEvolveOptions::default()).unwrap();
    let d: Vec<f64> = traj.states.iter().map(|s| trace_dist(s, &ss)).collect();
    assert!(d[0] >= d[1] && d[1] >= d[2], "approach not monotone: {d:?}");
    assert!(d[2] < 1e-3, "distance at 20 tau_S: {:.2e}", d[2]);
}

#[test]
fn conditional_state_lowers_fock_state() {
    let layout = SubsystemLayout::new(vec![3]).unwrap();
    let rho = DensityMatrix::basis_state(layout.clone(), &[1]).unwrap();
    let a = embed(&local::annihilation(3), 0, &layout).unwrap();
    let cond = conditional_state(&rho, &a).unwrap();
    assert_relative_eq!(cond.matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);
}

#[test]
fn conditional_state_on_vacuum_is_impossible() {
    let layout = SubsystemLayout::new(vec![3]).unwrap();
    let rho = DensityMatrix::basis_state(layout.clone(), &[0]).unwrap();
    let a = embed(&local::annihilation(3), 0, &layout).unwrap();
    match conditional_state(&rho, &a) {
        Err(crate::Error::HeraldImpossible) => {}
        other => panic!("expected herald-impossible, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn log_grid_shape() {
    let g = log_time_grid(1e-6, 10.0, 8);
    assert_eq!(g.len(), 8);
    assert_relative_eq!(g[0], 1e-6, epsilon = 1e-18);
    assert_relative_eq!(g[7], 10.0, epsilon = 1e-12);
    assert!(g.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn saturation_fit_recovers_rate() {
    let rate = 37.0;
    let times: Vec<f64> = (1..200).map(|k| k as f64 * 0.002).collect();
    let values: Vec<f64> = times
        .iter()
        .map(|t| 0.9 * (1.0 - (-rate * t).exp()))
        .collect();
    let got = fit_saturation_rate(&times, &values, 0.05, 0.95).unwrap();
    assert_relative_eq!(got, rate, max_relative = 1e-4);
}
