//! Translation of a physical parameter set into Hamiltonian, dissipator list
//! and full Liouvillian.
//!
//! Two model kinds are supported:
//!
//! * `dimer` — two emitters detuned by +-delta with exchange coupling
//!   `J (s1^dag s2 + h.c.)`;
//! * `all_to_all` — N degenerate emitters with the collective interaction
//!   `J S^+ S^-`.
//!
//! Everything is expressed in the frame rotating at the mean emitter
//! frequency; the coherent drive is resonant with it by construction, so no
//! drive frequency appears. All rates are in units of gamma (gamma = 1).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qop::{
    embed, liouvillian_from_terms, local, LabeledOperator, Liouvillian, SubsystemLayout,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Dimer,
    AllToAll,
}

/// Full physical parameter set, in units of the local decay rate gamma.
///
/// Serialized form is a flat key-value map with the field names below;
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub n_emitters: usize,
    pub model_kind: ModelKind,
    /// Coherent emitter-emitter coupling.
    #[serde(rename = "J", default)]
    pub j: f64,
    /// Half-splitting of the two emitter frequencies (dimer only).
    #[serde(default)]
    pub delta: f64,
    /// Local spontaneous decay rate; the unit of every other rate.
    #[serde(default = "one")]
    pub gamma: f64,
    /// Collective dissipative coupling (gamma_12 for the dimer, gamma_col
    /// for the all-to-all model).
    #[serde(default)]
    pub gamma_collective: f64,
    /// Incoherent pump rate per emitter.
    #[serde(rename = "P", default)]
    pub pump: f64,
    /// Coherent drive amplitude, resonant with the mean emitter frequency.
    #[serde(rename = "Omega", default)]
    pub omega: f64,
    /// Cavity detuning from the mean emitter frequency.
    #[serde(rename = "Delta_a", default)]
    pub delta_a: f64,
    /// Cavity photon loss rate.
    #[serde(default)]
    pub kappa: f64,
    /// Emitter-cavity coupling.
    #[serde(default)]
    pub g: f64,
    /// Fock-space truncation: the cavity keeps states |0..n_max>.
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Extra spontaneous decay rate (beyond the zero-phonon line).
    #[serde(rename = "Gamma_extra", default)]
    pub gamma_extra: f64,
    /// Local pure dephasing rate.
    #[serde(default)]
    pub gamma_phi: f64,
    /// Collective pure dephasing rate.
    #[serde(rename = "Gamma_phi", default)]
    pub gamma_phi_collective: f64,
}

fn one() -> f64 {
    1.0
}

fn default_n_max() -> usize {
    4
}

impl SystemSpec {
    /// Degenerate all-to-all skeleton with everything else zero.
    pub fn all_to_all(n: usize) -> Self {
        Self {
            n_emitters: n,
            model_kind: ModelKind::AllToAll,
            j: 0.0,
            delta: 0.0,
            gamma: 1.0,
            gamma_collective: 0.0,
            pump: 0.0,
            omega: 0.0,
            delta_a: 0.0,
            kappa: 0.0,
            g: 0.0,
            n_max: 4,
            gamma_extra: 0.0,
            gamma_phi: 0.0,
            gamma_phi_collective: 0.0,
        }
    }

    /// Two-emitter dimer skeleton with everything else zero.
    pub fn dimer() -> Self {
        Self {
            n_emitters: 2,
            model_kind: ModelKind::Dimer,
            ..Self::all_to_all(2)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_emitters == 0 {
            return Err(Error::InvalidSpec("n_emitters must be positive".into()));
        }
        if self.model_kind == ModelKind::Dimer && self.n_emitters != 2 {
            return Err(Error::InvalidSpec(
                "the dimer model requires exactly 2 emitters".into(),
            ));
        }
        if self.model_kind == ModelKind::AllToAll && self.delta != 0.0 {
            return Err(Error::InvalidSpec(
                "the all-to-all model is degenerate; delta must be 0".into(),
            ));
        }
        if self.n_max < 1 {
            return Err(Error::InvalidSpec("n_max must be at least 1".into()));
        }
        for (name, v) in [
            ("gamma", self.gamma),
            ("P", self.pump),
            ("Omega", self.omega),
            ("kappa", self.kappa),
            ("g", self.g),
            ("Gamma_extra", self.gamma_extra),
            ("gamma_phi", self.gamma_phi),
            ("Gamma_phi", self.gamma_phi_collective),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if !self.j.is_finite() || !self.delta.is_finite() || !self.delta_a.is_finite() {
            return Err(Error::InvalidSpec(
                "J, delta, Delta_a must be finite".into(),
            ));
        }
        if self.delta < 0.0 {
            return Err(Error::InvalidSpec("delta must be >= 0".into()));
        }
        if self.gamma_collective.abs() > self.gamma {
            return Err(Error::InvalidSpec(format!(
                "|gamma_collective| = {} exceeds gamma = {}; the dissipation matrix \
                 would not be positive",
                self.gamma_collective.abs(),
                self.gamma
            )));
        }
        Ok(())
    }

    /// Layout of the full problem: N qubits followed by the cavity mode.
    pub fn layout(&self) -> SubsystemLayout {
        SubsystemLayout::emitters_and_cavity(self.n_emitters, self.n_max)
            .expect("valid layout for a validated spec")
    }

    pub fn cavity_dim(&self) -> usize {
        self.n_max + 1
    }

    /// True when the drive is purely incoherent (Omega = 0).
    pub fn is_incoherent(&self) -> bool {
        self.omega == 0.0
    }

    /// Set a parameter by its serialized name. `C` is accepted as a derived
    /// axis: the cooperativity is adjusted by varying g at fixed kappa.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "J" => self.j = value,
            "delta" => self.delta = value,
            "gamma" => self.gamma = value,
            "gamma_collective" => self.gamma_collective = value,
            "P" => self.pump = value,
            "Omega" => self.omega = value,
            "Delta_a" => self.delta_a = value,
            "kappa" => self.kappa = value,
            "g" => self.g = value,
            "Gamma_extra" => self.gamma_extra = value,
            "gamma_phi" => self.gamma_phi = value,
            "Gamma_phi" => self.gamma_phi_collective = value,
            "C" => {
                if self.kappa <= 0.0 || self.gamma <= 0.0 {
                    return Err(Error::InvalidSpec(
                        "setting C requires kappa > 0 and gamma > 0".into(),
                    ));
                }
                if value < 0.0 {
                    return Err(Error::InvalidSpec("C must be >= 0".into()));
                }
                self.g = (value * self.kappa * self.gamma).sqrt() / 2.0;
            }
            other => {
                return Err(Error::InvalidSpec(format!(
                    "unknown sweep parameter '{other}'"
                )))
            }
        }
        Ok(())
    }

    pub fn derived(&self) -> DerivedRates {
        DerivedRates::from_spec(self)
    }
}

/// Closed-form combinations of spec parameters used throughout the
/// effective descriptions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedRates {
    /// Two-photon Rabi frequency of the coherent drive, 2 Omega^2 / J.
    pub omega_2p: f64,
    /// Purcell rate 4 g^2 / kappa.
    pub gamma_p: f64,
    /// Cooperativity Gamma_P / gamma.
    pub cooperativity: f64,
    /// Mixing angle arctan(delta / J).
    pub beta: f64,
    /// Emitter-emitter Rabi frequency sqrt(J^2 + delta^2).
    pub rabi: f64,
    /// Superradiant decay rate gamma + gamma_collective.
    pub gamma_s: f64,
    /// Subradiant decay rate gamma - gamma_collective.
    pub gamma_a: f64,
    /// Effective incoherent pump of the symmetric state under coherent
    /// drive, Omega_2p^2 / Gamma_P.
    pub p_s: f64,
}

impl DerivedRates {
    pub fn from_spec(spec: &SystemSpec) -> Self {
        let omega_2p = if spec.j != 0.0 {
            2.0 * spec.omega * spec.omega / spec.j
        } else {
            0.0
        };
        let gamma_p = if spec.kappa > 0.0 {
            4.0 * spec.g * spec.g / spec.kappa
        } else {
            0.0
        };
        let cooperativity = if spec.gamma > 0.0 {
            gamma_p / spec.gamma
        } else {
            0.0
        };
        let beta = if spec.j == 0.0 && spec.delta == 0.0 {
            0.0
        } else {
            (spec.delta / spec.j).atan()
        };
        Self {
            omega_2p,
            gamma_p,
            cooperativity,
            beta,
            rabi: (spec.j * spec.j + spec.delta * spec.delta).sqrt(),
            gamma_s: spec.gamma + spec.gamma_collective,
            gamma_a: spec.gamma - spec.gamma_collective,
            p_s: if gamma_p > 0.0 {
                omega_2p * omega_2p / gamma_p
            } else {
                0.0
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Operator assembly
// ---------------------------------------------------------------------------

/// Lowering operator of emitter `i` on the full layout.
pub fn emitter_lowering(spec: &SystemSpec, i: usize) -> Result<LabeledOperator> {
    embed(&local::sigma_minus(), i, &spec.layout())
}

/// sigma_z of emitter `i` (2 s^dag s - 1) on the full layout.
pub fn emitter_sigma_z(spec: &SystemSpec, i: usize) -> Result<LabeledOperator> {
    embed(&local::sigma_z(), i, &spec.layout())
}

/// Cavity annihilation operator on the full layout.
pub fn cavity_annihilation(spec: &SystemSpec) -> Result<LabeledOperator> {
    embed(
        &local::annihilation(spec.cavity_dim()),
        spec.n_emitters,
        &spec.layout(),
    )
}

/// Collective lowering S^- = sum_i sigma_i.
pub fn collective_lowering(spec: &SystemSpec) -> Result<LabeledOperator> {
    let mut s = emitter_lowering(spec, 0)?;
    for i in 1..spec.n_emitters {
        s = s.add(&emitter_lowering(spec, i)?)?;
    }
    Ok(s)
}

/// System Hamiltonian in the rotating frame. Hermitian by construction.
pub fn build_hamiltonian(spec: &SystemSpec) -> Result<LabeledOperator> {
    spec.validate()?;
    let re = |x: f64| Complex64::new(x, 0.0);

    let s_minus = collective_lowering(spec)?;
    let a = cavity_annihilation(spec)?;
    let n_cav = a.dagger().matmul(&a)?;

    let mut h = n_cav.scale(re(spec.delta_a));

    match spec.model_kind {
        ModelKind::Dimer => {
            let s1 = emitter_lowering(spec, 0)?;
            let s2 = emitter_lowering(spec, 1)?;
            let n1 = s1.dagger().matmul(&s1)?;
            let n2 = s2.dagger().matmul(&s2)?;
            h = h.add(&n1.scale(re(-spec.delta)))?;
            h = h.add(&n2.scale(re(spec.delta)))?;
            let hop = s1.dagger().matmul(&s2)?.scale(re(spec.j));
            h = h.add(&hop)?.add(&hop.dagger())?;
        }
        ModelKind::AllToAll => {
            let sp_sm = s_minus.dagger().matmul(&s_minus)?;
            h = h.add(&sp_sm.scale(re(spec.j)))?;
        }
    }

    if spec.g != 0.0 {
        let coupling = a.dagger().matmul(&s_minus)?.scale(re(spec.g));
        h = h.add(&coupling)?.add(&coupling.dagger())?;
    }
    if spec.omega != 0.0 {
        let drive = s_minus.scale(re(spec.omega));
        h = h.add(&drive)?.add(&drive.dagger())?;
    }

    if !h.is_hermitian(1e-12 * (1.0 + h.norm_fro())) {
        return Err(Error::InvalidState(
            "assembled Hamiltonian is not Hermitian".into(),
        ));
    }
    Ok(h)
}

/// Complete dissipator list as (rate, A, B) triples feeding D[A, B].
///
/// The core channels (cavity loss, the full gamma_ij emitter decay matrix
/// including cross terms, and the incoherent pump) are always present; the
/// additional decoherence channels (extra decay, local and collective dephasing) are
/// appended only when their rates are nonzero.
pub fn build_dissipators(
    spec: &SystemSpec,
) -> Result<Vec<(f64, LabeledOperator, LabeledOperator)>> {
    spec.validate()?;
    let n = spec.n_emitters;
    let mut out = Vec::new();

    let a = cavity_annihilation(spec)?;
    out.push((spec.kappa / 2.0, a.clone(), a));

    let lower: Vec<LabeledOperator> = (0..n)
        .map(|i| emitter_lowering(spec, i))
        .collect::<Result<_>>()?;
    for i in 0..n {
        for j in 0..n {
            let rate = if i == j {
                spec.gamma
            } else {
                spec.gamma_collective
            };
            out.push((rate / 2.0, lower[i].clone(), lower[j].clone()));
        }
    }
    for low in &lower {
        out.push((spec.pump / 2.0, low.dagger(), low.dagger()));
    }

    if spec.gamma_extra != 0.0 {
        for low in &lower {
            out.push((spec.gamma_extra / 2.0, low.clone(), low.clone()));
        }
    }
    if spec.gamma_phi != 0.0 {
        for i in 0..n {
            let sz = emitter_sigma_z(spec, i)?;
            out.push((spec.gamma_phi / 2.0, sz.clone(), sz));
        }
    }
    if spec.gamma_phi_collective != 0.0 {
        let mut sz_tot = emitter_sigma_z(spec, 0)?;
        for i in 1..n {
            sz_tot = sz_tot.add(&emitter_sigma_z(spec, i)?)?;
        }
        out.push((spec.gamma_phi_collective / 2.0, sz_tot.clone(), sz_tot));
    }
    Ok(out)
}

/// Full Liouvillian L = -i[H, .] + sum rate D[A, B]. Trace-preserving.
pub fn build_liouvillian(spec: &SystemSpec) -> Result<Liouvillian> {
    let h = build_hamiltonian(spec)?;
    let dissipators = build_dissipators(spec)?;
    let l = liouvillian_from_terms(&spec.layout(), Some(&h), &dissipators)?;
    let tol = 1e-10 * f64::max(1.0, l.max_abs_entry());
    if l.trace_violation() > tol {
        return Err(Error::InvalidState(format!(
            "assembled Liouvillian violates trace preservation by {:.3e}",
            l.trace_violation()
        )));
    }
    Ok(l)
}

/// Outcome of the Fock-truncation convergence check.
#[derive(Debug, Clone, Copy)]
pub struct FockConvergence {
    pub value: f64,
    pub value_refined: f64,
    pub shift: f64,
    pub converged: bool,
}

/// Re-evaluate an observable with the cavity truncation increased by two and
/// report the shift. Converged means |shift| < 1e-4.
pub fn fock_convergence_check(
    spec: &SystemSpec,
    observable: impl Fn(&SystemSpec) -> Result<f64>,
) -> Result<FockConvergence> {
    let value = observable(spec)?;
    let mut refined = spec.clone();
    refined.n_max += 2;
    let value_refined = observable(&refined)?;
    let shift = value_refined - value;
    Ok(FockConvergence {
        value,
        value_refined,
        shift,
        converged: shift.abs() < 1e-4,
    })
}

/// Permutation unitary exchanging two emitter sites (identity on the cavity).
pub fn emitter_swap(spec: &SystemSpec, i: usize, j: usize) -> Result<LabeledOperator> {
    let layout = spec.layout();
    let d = layout.total_dim();
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for idx in 0..d {
        let mut parts = layout.decompose(idx);
        parts.swap(i, j);
        m[(layout.flatten(&parts), idx)] = Complex64::new(1.0, 0.0);
    }
    LabeledOperator::from_dense(layout, m)
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// Named parameter sets shipped with the crate.
pub mod presets {
    use super::*;

    /// H-aggregate dimer operating point: J = 9.18e4, gamma_12 = 0.999,
    /// delta = 1e-2 J, kappa = 1e4, g = 1e-1 kappa, incoherent pump
    /// P = 40, cavity on the symmetric resonance Delta_a = -J.
    pub fn fig1() -> SystemSpec {
        let j = 9.18e4;
        let kappa = 1.0e4;
        SystemSpec {
            n_emitters: 2,
            model_kind: ModelKind::Dimer,
            j,
            delta: 1.0e-2 * j,
            gamma: 1.0,
            gamma_collective: 0.999,
            pump: 40.0,
            omega: 0.0,
            delta_a: -j,
            kappa,
            g: 0.1 * kappa,
            n_max: 4,
            gamma_extra: 0.0,
            gamma_phi: 0.0,
            gamma_phi_collective: 0.0,
        }
    }

    /// Same dimer driven coherently: Omega = 1e4, P = 0.
    pub fn fig1_coherent() -> SystemSpec {
        SystemSpec {
            pump: 0.0,
            omega: 1.0e4,
            ..fig1()
        }
    }

    /// Five degenerate emitters, all-to-all J = 1e5, cavity on the W
    /// resonance Delta_a = J(2 - N) = -3J, cooperativity ~ 497.
    pub fn fig3_n5() -> SystemSpec {
        let j = 1.0e5;
        let kappa = 12421.0;
        SystemSpec {
            n_emitters: 5,
            model_kind: ModelKind::AllToAll,
            j,
            delta: 0.0,
            gamma: 1.0,
            gamma_collective: 0.999,
            pump: 132.3,
            omega: 0.0,
            delta_a: -3.0 * j,
            kappa,
            g: 0.1 * kappa,
            n_max: 4,
            gamma_extra: 0.0,
            gamma_phi: 0.0,
            gamma_phi_collective: 0.0,
        }
    }

    /// Five emitters with the coupling reduced a hundred-fold, J = 1e3.
    /// The cavity cannot stay at the strong-coupling numbers (it would no
    /// longer resolve the Dicke ladder at all); this preset keeps g = 0.1
    /// kappa and picks the loss rate that maximizes the W fidelity at this
    /// J, which lands at kappa = 500 (C = 20) and a pump near 28.
    pub fn fig3_n5_lowj() -> SystemSpec {
        let j = 1.0e3;
        let kappa = 500.0;
        SystemSpec {
            j,
            kappa,
            g: 0.1 * kappa,
            pump: 28.0,
            delta_a: -3.0 * j,
            ..fig3_n5()
        }
    }

    pub fn names() -> &'static [&'static str] {
        &["fig1", "fig1_coherent", "fig3_n5", "fig3_n5_lowj"]
    }

    pub fn get(name: &str) -> Option<SystemSpec> {
        match name {
            "fig1" => Some(fig1()),
            "fig1_coherent" => Some(fig1_coherent()),
            "fig3_n5" => Some(fig3_n5()),
            "fig3_n5_lowj" => Some(fig3_n5_lowj()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qop::{vec_dm, DensityMatrix};
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn sorted_eigs(h: &LabeledOperator) -> Vec<f64> {
        let herm = h.to_dense();
        let mut e: Vec<f64> = nalgebra::SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    #[test]
    fn dimer_block_eigenvalues_at_zero_detuning() {
        let mut spec = SystemSpec::dimer();
        spec.j = 3.0;
        spec.n_max = 1;
        // g = 0, Delta_a = 0: cavity contributes nothing, each emitter
        // eigenvalue appears twice.
        let h = build_hamiltonian(&spec).unwrap();
        let e = sorted_eigs(&h);
        let expect = [-3.0, -3.0, 0.0, 0.0, 0.0, 0.0, 3.0, 3.0];
        for (a, b) in e.iter().zip(expect.iter()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn all_to_all_n2_eigenvalues() {
        let mut spec = SystemSpec::all_to_all(2);
        spec.j = 2.5;
        spec.n_max = 1;
        let h = build_hamiltonian(&spec).unwrap();
        let e = sorted_eigs(&h);
        let expect = [0.0, 0.0, 0.0, 0.0, 5.0, 5.0, 5.0, 5.0];
        for (a, b) in e.iter().zip(expect.iter()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn all_to_all_n5_w_transition_energy() {
        // lambda_{5/2,5/2} = 5J and lambda_{5/2,3/2} = 8J: the top - W
        // transition sits at J(2 - N) = -3J.
        let mut spec = SystemSpec::all_to_all(5);
        spec.j = 1.0;
        spec.n_max = 1;
        let h = build_hamiltonian(&spec).unwrap();
        let e = sorted_eigs(&h);
        let has = |x: f64| e.iter().any(|v| (v - x).abs() < 1e-10);
        assert!(has(5.0), "top Dicke state eigenvalue 5J missing");
        assert!(has(8.0), "W state eigenvalue 8J missing");
        assert_relative_eq!(5.0 - 8.0, spec.j * (2.0 - 5.0), epsilon = 1e-12);
    }

    #[test]
    fn dissipator_count_without_extras() {
        let spec = presets::fig1();
        let terms = build_dissipators(&spec).unwrap();
        // 1 cavity + 4 emitter decay (2 local + 2 cross) + 2 pump
        assert_eq!(terms.len(), 7);
    }

    #[test]
    fn dark_state_is_invariant_when_fully_collective() {
        // gamma_12 = gamma, delta = 0, P = Omega = g = 0: |A><A| (x) vacuum
        // lies in the kernel of L.
        let mut spec = SystemSpec::dimer();
        spec.j = 5.0;
        spec.gamma_collective = 1.0;
        spec.n_max = 1;
        let l = build_liouvillian(&spec).unwrap();
        let layout = spec.layout();
        let mut ket = DVector::zeros(layout.total_dim());
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        ket[layout.flatten(&[1, 0, 0])] = Complex64::new(inv, 0.0);
        ket[layout.flatten(&[0, 1, 0])] = Complex64::new(-inv, 0.0);
        let rho = DensityMatrix::from_pure(layout, &ket).unwrap();
        let drho = l.apply(&rho).unwrap();
        assert!(drho.norm() < 1e-10, "dark state moved: {:.3e}", drho.norm());
    }

    #[test]
    fn collective_dephasing_leaves_populations_alone() {
        let mut spec = SystemSpec::dimer();
        spec.j = 2.0;
        spec.gamma = 0.0;
        spec.gamma_phi_collective = 3.0;
        spec.n_max = 1;
        // keep only the dephasing channel
        spec.j = 0.0;
        let terms = build_dissipators(&spec).unwrap();
        let l = liouvillian_from_terms(&spec.layout(), None, &terms).unwrap();
        let layout = spec.layout();
        let rho = DensityMatrix::basis_state(layout, &[1, 0, 0]).unwrap();
        let drho = l.apply(&rho).unwrap();
        assert!(
            drho.norm() < 1e-12,
            "diagonal state not stationary under sigma_z channels"
        );
    }

    #[test]
    fn hamiltonian_hermitian_for_generic_spec() {
        let mut spec = presets::fig1_coherent();
        spec.n_max = 2;
        let h = build_hamiltonian(&spec).unwrap();
        assert!(h.is_hermitian(1e-12 * h.norm_fro()));
    }

    #[test]
    fn liouvillian_block_structure_without_drive() {
        // Omega = 0: no superoperator element couples different
        // excitation-coherence sectors.
        let mut spec = presets::fig1();
        spec.n_max = 1;
        let l = build_liouvillian(&spec).unwrap();
        let labels = l.sector_labels();
        for (_, (r, c)) in l.superop().iter() {
            assert_eq!(labels[r], labels[c], "sector-coupling element at ({r},{c})");
        }
    }

    #[test]
    fn coherent_drive_breaks_block_structure() {
        let mut spec = presets::fig1_coherent();
        spec.n_max = 1;
        let l = build_liouvillian(&spec).unwrap();
        let labels = l.sector_labels();
        let mixed = l.superop().iter().any(|(_, (r, c))| labels[r] != labels[c]);
        assert!(mixed);
    }

    #[test]
    fn permutation_symmetry_all_to_all_n3() {
        let mut spec = SystemSpec::all_to_all(3);
        spec.j = 7.0;
        spec.gamma_collective = 0.5;
        spec.pump = 2.0;
        spec.kappa = 30.0;
        spec.g = 3.0;
        spec.delta_a = -7.0;
        spec.n_max = 1;
        let l = build_liouvillian(&spec).unwrap();
        let layout = spec.layout();
        use rand::{rngs::StdRng, RngExt, SeedableRng};
        let mut rng = StdRng::seed_from_u64(42);
        let d = layout.total_dim();
        let g = DMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let m = &g * g.adjoint();
        let tr: Complex64 = (0..d).map(|i| m[(i, i)]).sum();
        let rho = DensityMatrix::new_unchecked(layout, m.map(|v| v / tr)).unwrap();

        for (i, j) in [(0usize, 1usize), (1, 2), (0, 2)] {
            let p = emitter_swap(&spec, i, j).unwrap().to_dense();
            let conj_rho =
                DensityMatrix::new_unchecked(spec.layout(), &p * rho.matrix() * p.adjoint())
                    .unwrap();
            let lhs = l.apply(&conj_rho).unwrap();
            let rhs = &p * l.apply(&rho).unwrap() * p.adjoint();
            let scale = vec_dm(&rhs).iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(
                (&lhs - &rhs).norm() <= 1e-12 * (1.0 + scale) * (spec.layout().total_dim() as f64),
                "permutation ({i},{j}) not a symmetry"
            );
        }
    }

    #[test]
    fn spec_serde_roundtrip_and_unknown_key_rejection() {
        let spec = presets::fig1();
        let s = serde_json::to_string(&spec).unwrap();
        let back: SystemSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(spec, back);
        assert!(s.contains("\"J\""));
        assert!(s.contains("\"Delta_a\""));

        let bad = r#"{"n_emitters":2,"model_kind":"dimer","J":1.0,"bogus_key":3}"#;
        assert!(serde_json::from_str::<SystemSpec>(bad).is_err());
    }

    #[test]
    fn spec_validation_catches_bad_inputs() {
        let mut spec = SystemSpec::dimer();
        spec.gamma_collective = 1.5;
        assert!(spec.validate().is_err());
        let mut spec = SystemSpec::dimer();
        spec.n_emitters = 3;
        assert!(spec.validate().is_err());
        let mut spec = SystemSpec::all_to_all(3);
        spec.delta = 0.1;
        assert!(spec.validate().is_err());
        let mut spec = SystemSpec::dimer();
        spec.n_max = 0;
        assert!(spec.validate().is_err());
        let mut spec = SystemSpec::dimer();
        spec.pump = -1.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn derived_rates_fig1_values() {
        let d = presets::fig1().derived();
        assert_relative_eq!(d.gamma_p, 400.0, epsilon = 1e-12);
        assert_relative_eq!(d.cooperativity, 400.0, epsilon = 1e-12);
        assert_relative_eq!(d.gamma_s, 1.999, epsilon = 1e-12);
        assert_relative_eq!(d.gamma_a, 0.001, epsilon = 1e-12);
        assert_relative_eq!(d.beta, (0.01f64).atan(), epsilon = 1e-15);
        // exact identities
        assert_eq!(
            d.gamma_p * presets::fig1().kappa,
            4.0 * presets::fig1().g.powi(2)
        );
        assert_relative_eq!(
            d.gamma_s + d.gamma_a,
            2.0 * presets::fig1().gamma,
            epsilon = 1e-15
        );
        assert!(d.beta >= 0.0 && d.beta < std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn set_param_cooperativity_adjusts_g() {
        let mut spec = presets::fig1();
        spec.set_param("C", 100.0).unwrap();
        assert_relative_eq!(spec.derived().cooperativity, 100.0, epsilon = 1e-12);
        assert!(spec.set_param("n_max", 3.0).is_err());
    }
}
