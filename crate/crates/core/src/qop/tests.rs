use super::local::*;
use super::*;
use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{rngs::StdRng, RngExt, SeedableRng};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_matrix(rng: &mut StdRng, d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |_, _| {
        c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    })
}

fn random_density(rng: &mut StdRng, layout: &SubsystemLayout) -> DensityMatrix {
    let d = layout.total_dim();
    let g = random_matrix(rng, d);
    let m = &g * g.adjoint();
    let tr: Complex64 = (0..d).map(|i| m[(i, i)]).sum();
    DensityMatrix::new(layout.clone(), m.map(|v| v / tr)).unwrap()
}

#[test]
fn embed_sigma_z_site0_on_eg() {
    // |eg>: site 0 excited. sigma_z at site 0 gives +1.
    let layout = SubsystemLayout::new(vec![2, 2]).unwrap();
    let op = embed(&sigma_z(), 0, &layout).unwrap();
    let idx = layout.flatten(&[1, 0]);
    let mut ket = DVector::zeros(4);
    ket[idx] = ONE;
    let out = op.apply(&ket);
    assert_eq!(out[idx], ONE);
    assert_eq!(out.iter().filter(|v| **v != ZERO).count(), 1);
}

#[test]
fn embed_identity_gives_global_identity() {
    let layout = SubsystemLayout::new(vec![2, 3]).unwrap();
    let op = embed(&identity(3), 1, &layout).unwrap();
    assert_eq!(op.to_dense(), DMatrix::identity(6, 6));
    let op0 = embed(&identity(2), 0, &layout).unwrap();
    assert_eq!(op0.to_dense(), DMatrix::identity(6, 6));
}

#[test]
fn embed_matches_brute_force_kronecker() {
    // annihilation at site 2 of [2,2,3]; <110|A|111> = 1 (Fock 1 -> 0).
    let layout = SubsystemLayout::new(vec![2, 2, 3]).unwrap();
    let a = annihilation(3);
    let op = embed(&a, 2, &layout).unwrap();
    let brute = DMatrix::<Complex64>::identity(2, 2)
        .kronecker(&DMatrix::identity(2, 2))
        .kronecker(&a);
    assert_eq!(op.to_dense(), brute);
    let bra = layout.flatten(&[1, 1, 0]);
    let ket = layout.flatten(&[1, 1, 1]);
    assert_eq!(op.entry(bra, ket), ONE);
}

#[test]
fn embed_rejects_dimension_mismatch() {
    let layout = SubsystemLayout::new(vec![2, 3]).unwrap();
    assert!(embed(&identity(2), 1, &layout).is_err());
    assert!(embed(&identity(2), 5, &layout).is_err());
}

#[test]
fn dagger_is_exact_involution_and_commutes_with_embed() {
    let mut rng = StdRng::seed_from_u64(7);
    let layout = SubsystemLayout::new(vec![2, 3]).unwrap();
    let m = random_matrix(&mut rng, 3);
    let a = embed(&m, 1, &layout).unwrap();
    let dd = a.dagger().dagger();
    assert_eq!(a.to_dense(), dd.to_dense());
    let lhs = embed(&m.adjoint(), 1, &layout).unwrap();
    assert_eq!(lhs.to_dense(), a.dagger().to_dense());
}

#[test]
fn dagger_involution_sparse_path() {
    let mut rng = StdRng::seed_from_u64(8);
    // 2^5 * 3 = 96 > dense limit, exercises the sparse representation
    let layout = SubsystemLayout::new(vec![2, 2, 2, 2, 2, 3]).unwrap();
    let m = random_matrix(&mut rng, 3);
    let a = embed(&m, 5, &layout).unwrap();
    assert!(!a.is_dense());
    assert_eq!(a.dagger().dagger().to_dense(), a.to_dense());
}

#[test]
fn single_qubit_decay_rate_from_dissipator() {
    // (gamma/2) D[sigma] drives rho_ee like exp(-gamma t): the generator
    // applied to |e><e| has d rho_ee/dt = -gamma.
    let layout = SubsystemLayout::new(vec![2]).unwrap();
    let s = embed(&sigma_minus(), 0, &layout).unwrap();
    let diss = lindblad_dissipator(&s, &s).unwrap();
    let gamma = 1.7;
    let l = diss.scale(c(gamma / 2.0, 0.0));
    let rho = DensityMatrix::basis_state(layout, &[1]).unwrap();
    let drho = l.apply(&rho).unwrap();
    assert_relative_eq!(drho[(1, 1)].re, -gamma, epsilon = 1e-12);
    assert_relative_eq!(drho[(0, 0)].re, gamma, epsilon = 1e-12);
}

#[test]
fn dissipator_of_identity_is_zero() {
    let layout = SubsystemLayout::new(vec![2, 2]).unwrap();
    let eye = LabeledOperator::identity(layout);
    let l = lindblad_dissipator(&eye, &eye).unwrap();
    assert_eq!(l.norm_fro(), 0.0);
}

#[test]
fn cross_dissipator_matches_dense_definition() {
    // D[sigma_1, sigma_2] compared element-by-element against the direct
    // dense construction from 2 A rho B^dag - B^dag A rho - rho B^dag A.
    let mut rng = StdRng::seed_from_u64(11);
    let layout = SubsystemLayout::new(vec![2, 2]).unwrap();
    let a = embed(&sigma_minus(), 0, &layout).unwrap();
    let b = embed(&sigma_minus(), 1, &layout).unwrap();
    let l = lindblad_dissipator(&a, &b).unwrap();

    let (ad, bd) = (a.to_dense(), b.to_dense());
    let bdag_a = bd.adjoint() * &ad;
    for _ in 0..4 {
        let rho = random_density(&mut rng, &layout);
        let m = rho.matrix();
        let expect = (&ad * m * bd.adjoint()).map(|v| v * 2.0) - &bdag_a * m - m * &bdag_a;
        let got = l.apply(&rho).unwrap();
        assert!((&expect - &got).norm() < 1e-13);
    }
}

#[test]
fn partial_trace_product_state() {
    // Tr_cav[rho_q (x) |0><0|] = rho_q
    let mut rng = StdRng::seed_from_u64(3);
    let ql = SubsystemLayout::new(vec![2, 2]).unwrap();
    let rho_q = random_density(&mut rng, &ql);
    let full_layout = SubsystemLayout::new(vec![2, 2, 4]).unwrap();
    let mut cav = DMatrix::<Complex64>::zeros(4, 4);
    cav[(0, 0)] = ONE;
    let full = DensityMatrix::new(full_layout, rho_q.matrix().kronecker(&cav)).unwrap();
    let red = partial_trace(&full, &[0, 1]).unwrap();
    assert!((red.matrix() - rho_q.matrix()).norm() < 1e-14);
}

#[test]
fn partial_trace_bell_state_is_maximally_mixed() {
    let layout = SubsystemLayout::new(vec![2, 2]).unwrap();
    let mut ket = DVector::zeros(4);
    ket[layout.flatten(&[0, 0])] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    ket[layout.flatten(&[1, 1])] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let rho = DensityMatrix::from_pure(layout, &ket).unwrap();
    let red = partial_trace(&rho, &[1]).unwrap();
    let expect = DMatrix::<Complex64>::identity(2, 2).map(|v| v * 0.5);
    assert!((red.matrix() - expect).norm() < 1e-14);
}

#[test]
fn partial_trace_orderings_agree() {
    let mut rng = StdRng::seed_from_u64(5);
    let layout = SubsystemLayout::new(vec![2, 2, 3]).unwrap();
    let rho = random_density(&mut rng, &layout);
    // single shot down to site 1
    let direct = partial_trace(&rho, &[1]).unwrap();
    // sequential: trace cavity first then site 0
    let step1 = partial_trace(&rho, &[0, 1]).unwrap();
    let seq = partial_trace(&step1, &[1]).unwrap();
    assert!((direct.matrix() - seq.matrix()).norm() < 1e-12);
    // opposite order: trace site 0 first
    let step1b = partial_trace(&rho, &[1, 2]).unwrap();
    let seqb = partial_trace(&step1b, &[0]).unwrap();
    assert!((direct.matrix() - seqb.matrix()).norm() < 1e-12);
    // trace is preserved
    assert_relative_eq!(direct.trace().re, 1.0, epsilon = 1e-12);
}

#[test]
fn partial_trace_empty_keep_rejected() {
    let mut rng = StdRng::seed_from_u64(6);
    let layout = SubsystemLayout::new(vec![2, 2]).unwrap();
    let rho = random_density(&mut rng, &layout);
    assert!(partial_trace(&rho, &[]).is_err());
}

#[test]
fn expectation_values() {
    let layout = SubsystemLayout::new(vec![2]).unwrap();
    let rho = DensityMatrix::basis_state(layout.clone(), &[1]).unwrap();
    let eye = LabeledOperator::identity(layout.clone());
    assert_relative_eq!(expectation(&eye, &rho).unwrap().re, 1.0, epsilon = 1e-14);
    let s = embed(&sigma_minus(), 0, &layout).unwrap();
    let n = s.dagger().matmul(&s).unwrap();
    assert_relative_eq!(expectation(&n, &rho).unwrap().re, 1.0, epsilon = 1e-14);
}

#[test]
fn expectation_thermal_cavity_population() {
    // Geometric distribution p_n = (1-q) q^n has mean q/(1-q); with a deep
    // truncation the expectation matches the closed form.
    let n_max = 29;
    let layout = SubsystemLayout::new(vec![n_max + 1]).unwrap();
    let nbar = 0.5;
    let q: f64 = nbar / (1.0 + nbar);
    let mut m = DMatrix::<Complex64>::zeros(n_max + 1, n_max + 1);
    let mut norm = 0.0;
    for n in 0..=n_max {
        let p = (1.0 - q) * q.powi(n as i32);
        m[(n, n)] = c(p, 0.0);
        norm += p;
    }
    let m = m.map(|v| v / norm);
    let rho = DensityMatrix::new(layout.clone(), m).unwrap();
    let num = embed(&number(n_max + 1), 0, &layout).unwrap();
    let got = expectation(&num, &rho).unwrap();
    assert_relative_eq!(got.re, nbar, epsilon = 1e-12);
    assert!(got.im.abs() < 1e-14);
}

#[test]
fn hamiltonian_superop_matches_commutator() {
    let mut rng = StdRng::seed_from_u64(13);
    let layout = SubsystemLayout::new(vec![2, 3]).unwrap();
    let g = random_matrix(&mut rng, 6);
    let h = LabeledOperator::from_dense(layout.clone(), &g + g.adjoint()).unwrap();
    let l = Liouvillian::from_hamiltonian(&h);
    let rho = random_density(&mut rng, &layout);
    let got = l.apply(&rho).unwrap();
    let hd = h.to_dense();
    let expect = (&hd * rho.matrix() - rho.matrix() * &hd).map(|v| v * c(0.0, -1.0));
    assert!((&got - &expect).norm() < 1e-13);
}

#[test]
fn assembled_liouvillian_annihilates_trace() {
    let layout = SubsystemLayout::new(vec![2, 2, 3]).unwrap();
    let s1 = embed(&sigma_minus(), 0, &layout).unwrap();
    let s2 = embed(&sigma_minus(), 1, &layout).unwrap();
    let a = embed(&annihilation(3), 2, &layout).unwrap();
    let mut h = embed(&number(3), 2, &layout).unwrap().scale(c(0.5, 0.0));
    let hop = a.dagger().matmul(&s1.add(&s2).unwrap()).unwrap();
    h = h.add(&hop).unwrap().add(&hop.dagger()).unwrap();
    let l = liouvillian_from_terms(
        &layout,
        Some(&h),
        &[
            (0.5, a.clone(), a.clone()),
            (0.5, s1.clone(), s1.clone()),
            (0.25, s1.clone(), s2.clone()),
            (0.25, s2.clone(), s1.clone()),
            (1.0, s2.dagger(), s2.dagger()),
        ],
    )
    .unwrap();
    assert!(l.trace_violation() < 1e-10);
}

#[test]
fn density_matrix_validation_rejects_bad_states() {
    let layout = SubsystemLayout::new(vec![2]).unwrap();
    // trace 2
    let m = DMatrix::<Complex64>::identity(2, 2);
    assert!(DensityMatrix::new(layout.clone(), m).is_err());
    // negative eigenvalue
    let mut m = DMatrix::<Complex64>::zeros(2, 2);
    m[(0, 0)] = c(1.5, 0.0);
    m[(1, 1)] = c(-0.5, 0.0);
    assert!(DensityMatrix::new(layout.clone(), m).is_err());
    // non-hermitian
    let mut m = DMatrix::<Complex64>::zeros(2, 2);
    m[(0, 0)] = ONE;
    m[(0, 1)] = c(0.2, 0.0);
    assert!(DensityMatrix::new(layout, m).is_err());
}

#[test]
fn layout_mismatch_between_objects_is_rejected() {
    let la = SubsystemLayout::new(vec![2, 2]).unwrap();
    let lb = SubsystemLayout::new(vec![2, 3]).unwrap();
    let a = LabeledOperator::identity(la.clone());
    let b = LabeledOperator::identity(lb.clone());
    assert!(a.add(&b).is_err());
    assert!(a.matmul(&b).is_err());
    assert!(lindblad_dissipator(&a, &b).is_err());
    let rho = DensityMatrix::ground(lb);
    assert!(expectation(&a, &rho).is_err());
}

#[test]
fn vec_unvec_roundtrip_and_convention() {
    let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
    let v = vec_dm(&m);
    // column stacking: [m00, m10, m01, m11]
    assert_eq!(v, vec![c(1.0, 0.0), c(3.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
    assert_eq!(unvec(&v, 2), m);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dissipator_definition_holds_for_random_pairs(seed in 0u64..1000) {
        let mut rng = StdRng::seed_from_u64(seed);
        let layout = SubsystemLayout::new(vec![2, 3]).unwrap();
        let a = LabeledOperator::from_dense(layout.clone(), random_matrix(&mut rng, 6)).unwrap();
        let b = LabeledOperator::from_dense(layout.clone(), random_matrix(&mut rng, 6)).unwrap();
        let l = lindblad_dissipator(&a, &b).unwrap();
        let rho = random_density(&mut rng, &layout);
        let (ad, bd) = (a.to_dense(), b.to_dense());
        let bdag_a = bd.adjoint() * &ad;
        let m = rho.matrix();
        let expect = (&ad * m * bd.adjoint()).map(|v| v * 2.0) - &bdag_a * m - m * &bdag_a;
        let got = l.apply(&rho).unwrap();
        prop_assert!((&expect - &got).norm() < 1e-12);
        // any D[A,B] term is traceless on any state
        let tr: Complex64 = (0..6).map(|i| got[(i, i)]).sum();
        prop_assert!(tr.norm() < 1e-12);
    }

    #[test]
    fn partial_trace_sequential_matches_single_shot(seed in 0u64..1000) {
        let mut rng = StdRng::seed_from_u64(seed);
        let layout = SubsystemLayout::new(vec![2, 2, 3]).unwrap();
        let rho = random_density(&mut rng, &layout);
        let direct = partial_trace(&rho, &[0]).unwrap();
        let step = partial_trace(&rho, &[0, 2]).unwrap();
        let seq = partial_trace(&step, &[0]).unwrap();
        prop_assert!((direct.matrix() - seq.matrix()).norm() < 1e-12);
    }
}
