//! Adiabatic elimination of the cavity for two emitters and every
//! closed-form prediction of the reduced description: the Bloch-Redfield
//! cavity term, the rank-2 effective jump operator, the cascaded
//! three-level model, stabilization timescales and the optimal pump.

use nalgebra::DMatrix;
use num_complex::Complex64;
use sprs::CsMat;

use crate::error::{Error, Result};
use crate::model::{self, SystemSpec};
use crate::qop::{
    dense_to_sparse, embed, liouvillian_from_terms, local, LabeledOperator, Liouvillian,
    SubsystemLayout,
};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

// ---------------------------------------------------------------------------
// emitter eigenbasis
// ---------------------------------------------------------------------------

/// The four dimer eigenstates |gg>, |->, |+>, |ee> expressed in the product
/// basis, with their rotating-frame energies {0, -R, +R, 0}.
#[derive(Debug, Clone)]
pub struct EmitterEigenbasis {
    /// Columns are |gg>, |->, |+>, |ee> over the [2, 2] product basis.
    pub vectors: DMatrix<Complex64>,
    pub energies: [f64; 4],
    /// Mixing angle arctan(delta / J).
    pub beta: f64,
}

/// Eigenbasis of the two-emitter Hamiltonian (dimer model, N = 2).
pub fn emitter_eigenbasis(spec: &SystemSpec) -> Result<EmitterEigenbasis> {
    require_dimer(spec)?;
    let d = spec.derived();
    let s = if d.rabi > 0.0 {
        spec.delta / d.rabi
    } else {
        0.0
    }; // sin(beta)
       // product indices: |gg> = 0, |ge> = 1, |eg> = 2, |ee> = 3
    let mut v = DMatrix::<Complex64>::zeros(4, 4);
    v[(0, 0)] = re(1.0);
    let (cp, cm) = (((1.0 + s) / 2.0).sqrt(), ((1.0 - s) / 2.0).sqrt());
    // |-> = (sqrt(1+s)|eg> - sqrt(1-s)|ge>)/sqrt(2)
    v[(2, 1)] = re(cp);
    v[(1, 1)] = re(-cm);
    // |+> = (sqrt(1-s)|eg> + sqrt(1+s)|ge>)/sqrt(2)
    v[(2, 2)] = re(cm);
    v[(1, 2)] = re(cp);
    v[(3, 3)] = re(1.0);
    Ok(EmitterEigenbasis {
        vectors: v,
        energies: [0.0, -d.rabi, d.rabi, 0.0],
        beta: d.beta,
    })
}

fn require_dimer(spec: &SystemSpec) -> Result<()> {
    spec.validate()?;
    if spec.n_emitters != 2 || spec.model_kind != model::ModelKind::Dimer {
        return Err(Error::Unsupported(
            "the cavity-eliminated description is derived for the two-emitter dimer".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// effective model container
// ---------------------------------------------------------------------------

/// Cavity-eliminated description of the dimer.
#[derive(Debug, Clone)]
pub struct EffectiveModel {
    pub eigenbasis: EmitterEigenbasis,
    /// g_couplings[(i, j)] = g <j| s1 + s2 |i> (0-based eigenstate labels).
    pub g_couplings: DMatrix<Complex64>,
    /// transition_freqs[(i, j)] = E_i - E_j.
    pub transition_freqs: DMatrix<f64>,
    /// Purcell rate 4 g^2 / kappa.
    pub gamma_p: f64,
    /// Rank-2 effective jump operator on the [2, 2] emitter layout.
    pub xi_s: LabeledOperator,
    /// Emitter-space generator: -i[H_q + H_d, .] + emitter dissipators
    /// + the Bloch-Redfield cavity term.
    pub reduced_liouvillian: Liouvillian,
}

pub fn effective_model(spec: &SystemSpec) -> Result<EffectiveModel> {
    let basis = emitter_eigenbasis(spec)?;
    let (g_couplings, transition_freqs) = transition_table(spec, &basis);
    let br = bloch_redfield_cavity_term(spec, false)?;
    let emitters = emitter_liouvillian(spec)?;
    let reduced = emitters.add(&br)?;
    let (gamma_p, xi_s) = effective_jump_model(spec)?;
    Ok(EffectiveModel {
        eigenbasis: basis,
        g_couplings,
        transition_freqs,
        gamma_p,
        xi_s,
        reduced_liouvillian: reduced,
    })
}

/// g_ij = g <j| s1 + s2 |i> and omega_ij = E_i - E_j.
fn transition_table(
    spec: &SystemSpec,
    basis: &EmitterEigenbasis,
) -> (DMatrix<Complex64>, DMatrix<f64>) {
    let layout = SubsystemLayout::emitters(2).unwrap();
    let s_tot = embed(&local::sigma_minus(), 0, &layout)
        .unwrap()
        .add(&embed(&local::sigma_minus(), 1, &layout).unwrap())
        .unwrap()
        .to_dense();
    let v = &basis.vectors;
    let g_mat = DMatrix::from_fn(4, 4, |i, j| {
        (v.column(j).adjoint() * &s_tot * v.column(i))[(0, 0)] * spec.g
    });
    let w_mat = DMatrix::from_fn(4, 4, |i, j| basis.energies[i] - basis.energies[j]);
    (g_mat, w_mat)
}

// ---------------------------------------------------------------------------
// Bloch-Redfield cavity term
// ---------------------------------------------------------------------------

/// The set of cavity-enhanced transitions at the symmetric resonance:
/// |-> -> |gg> and |ee> -> |+> (0-based (from, to) eigenstate pairs).
pub const MU_S: [(usize, usize); 2] = [(1, 0), (3, 2)];

/// Second-order cavity contribution on the 4-dimensional emitter space:
///
/// sum_{ij,mn} g_ij g*_mn / (kappa/2 + i(Delta_a - omega_ij))
///             ([sigma_ij rho, sigma_mn^dag] + h.c.)
///
/// The full double sum is kept; `restrict_to_mu_s` keeps only the resonant
/// transition set for comparison against the rank-2 jump description.
/// Valid in the bad-cavity regime kappa >> g.
pub fn bloch_redfield_cavity_term(
    spec: &SystemSpec,
    restrict_to_mu_s: bool,
) -> Result<Liouvillian> {
    let basis = emitter_eigenbasis(spec)?;
    let (g_mat, w_mat) = transition_table(spec, &basis);
    let layout = SubsystemLayout::emitters(2)?;
    let v = &basis.vectors;

    let pairs: Vec<(usize, usize)> = if restrict_to_mu_s {
        MU_S.to_vec()
    } else {
        (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).collect()
    };

    let mut total: Option<CsMat<Complex64>> = None;
    for &(i, j) in &pairs {
        if g_mat[(i, j)].norm() == 0.0 {
            continue;
        }
        // sigma_ij = |j><i| in the product basis
        let a_mat = v.column(j) * v.column(i).adjoint();
        let denom = Complex64::new(spec.kappa / 2.0, spec.delta_a - w_mat[(i, j)]);
        for &(m, n) in &pairs {
            if g_mat[(m, n)].norm() == 0.0 {
                continue;
            }
            let b_mat = v.column(n) * v.column(m).adjoint();
            let coef = g_mat[(i, j)] * g_mat[(m, n)].conj() / denom;
            let term = sandwich_commutator(&a_mat, &b_mat, coef);
            total = Some(match total {
                Some(t) => &t + &term,
                None => term,
            });
        }
    }
    let superop = total.unwrap_or_else(|| CsMat::zero((16, 16)));
    Liouvillian::from_superop(layout, superop)
}

/// coef ([A rho, B^dag]) + h.c. as a superoperator on column-stacked rho:
/// coef (A rho B^dag - B^dag A rho) + coef* (B rho A^dag - rho A^dag B).
fn sandwich_commutator(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    coef: Complex64,
) -> CsMat<Complex64> {
    let d = a.nrows();
    let eye = CsMat::eye(d);
    let sa = dense_to_sparse(a);
    let sb = dense_to_sparse(b);
    let sbc = sb.map(|v| v.conj());
    let sac = sa.map(|v| v.conj());
    let bdag_a = dense_to_sparse(&(b.adjoint() * a));
    let adag_b_t = dense_to_sparse(&(a.adjoint() * b).transpose());

    let t1 = sprs::kronecker_product(sbc.view(), sa.view()).map(|v| v * coef);
    let t2 = sprs::kronecker_product(eye.view(), bdag_a.view()).map(|v| -v * coef);
    let cc = coef.conj();
    let t3 = sprs::kronecker_product(sac.view(), sb.view()).map(|v| v * cc);
    let t4 = sprs::kronecker_product(adag_b_t.view(), eye.view()).map(|v| -v * cc);
    &(&t1 + &t2) + &(&t3 + &t4)
}

/// Emitter-only generator on the [2, 2] layout: qubit Hamiltonian, drive,
/// and every emitter dissipation channel; no cavity terms.
pub fn emitter_liouvillian(spec: &SystemSpec) -> Result<Liouvillian> {
    require_dimer(spec)?;
    let layout = SubsystemLayout::emitters(2)?;
    let s1 = embed(&local::sigma_minus(), 0, &layout)?;
    let s2 = embed(&local::sigma_minus(), 1, &layout)?;
    let n1 = s1.dagger().matmul(&s1)?;
    let n2 = s2.dagger().matmul(&s2)?;

    let mut h = n1.scale(re(-spec.delta)).add(&n2.scale(re(spec.delta)))?;
    let hop = s1.dagger().matmul(&s2)?.scale(re(spec.j));
    h = h.add(&hop)?.add(&hop.dagger())?;
    if spec.omega != 0.0 {
        let drive = s1.add(&s2)?.scale(re(spec.omega));
        h = h.add(&drive)?.add(&drive.dagger())?;
    }

    let mut terms: Vec<(f64, LabeledOperator, LabeledOperator)> = Vec::new();
    let lower = [s1.clone(), s2.clone()];
    for i in 0..2 {
        for j in 0..2 {
            let rate = if i == j {
                spec.gamma
            } else {
                spec.gamma_collective
            };
            terms.push((rate / 2.0, lower[i].clone(), lower[j].clone()));
        }
    }
    for low in &lower {
        terms.push((spec.pump / 2.0, low.dagger(), low.dagger()));
    }
    if spec.gamma_extra != 0.0 {
        for low in &lower {
            terms.push((spec.gamma_extra / 2.0, low.clone(), low.clone()));
        }
    }
    if spec.gamma_phi != 0.0 {
        for site in 0..2 {
            let sz = embed(&local::sigma_z(), site, &layout)?;
            terms.push((spec.gamma_phi / 2.0, sz.clone(), sz));
        }
    }
    if spec.gamma_phi_collective != 0.0 {
        let sz_tot =
            embed(&local::sigma_z(), 0, &layout)?.add(&embed(&local::sigma_z(), 1, &layout)?)?;
        terms.push((spec.gamma_phi_collective / 2.0, sz_tot.clone(), sz_tot));
    }
    liouvillian_from_terms(&layout, Some(&h), &terms)
}

/// Steady state of the cavity-eliminated model, on the [2, 2] layout.
pub fn effective_steady_state(spec: &SystemSpec) -> Result<crate::solvers::SteadyStateResult> {
    let br = bloch_redfield_cavity_term(spec, false)?;
    let l = emitter_liouvillian(spec)?.add(&br)?;
    crate::solvers::steady_state(&l)
}

// ---------------------------------------------------------------------------
// effective jump operator
// ---------------------------------------------------------------------------

/// Purcell rate and the rank-2 jump operator of the frequency-resolved
/// Purcell regime (J >> kappa >> g, cavity at the symmetric resonance):
/// xi_S = |+><ee| + beta |gg><-| for incoherent driving, or
/// xi_S = -|+><ee| + (beta/2) |gg><-| under a coherent drive.
pub fn effective_jump_model(spec: &SystemSpec) -> Result<(f64, LabeledOperator)> {
    let basis = emitter_eigenbasis(spec)?;
    let layout = SubsystemLayout::emitters(2)?;
    let v = &basis.vectors;
    let gamma_p = spec.derived().gamma_p;
    let coherent = spec.omega != 0.0 && spec.pump == 0.0;
    let (w_top, w_sub) = if coherent {
        (-1.0, basis.beta / 2.0)
    } else {
        (1.0, basis.beta)
    };
    let xi = (v.column(2) * v.column(3).adjoint()).map(|x| x * w_top)
        + (v.column(0) * v.column(1).adjoint()).map(|x| x * w_sub);
    Ok((gamma_p, LabeledOperator::from_dense(layout, xi)?))
}

// ---------------------------------------------------------------------------
// cascaded three-level model
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveMode {
    Incoherent,
    Coherent,
}

/// Closed-form steady state and stabilization timescale of the cascaded
/// {|gg>, |S>, |ee>} description that applies once the cavity acts as the
/// single enhanced decay |ee> -> |S>.
#[derive(Debug, Clone, Copy)]
pub struct ThreeLevelPredictions {
    /// Steady symmetric-state population from the Bloch-Redfield reduction
    /// (valid beyond the frequency-resolved regime).
    pub rho_s_ss_general: f64,
    pub rho_a_ss_general: f64,
    pub rho_ee_ss_general: f64,
    /// High-cooperativity simplification
    /// [1 + P/(2 Gamma_P) + gamma_S/P + Gamma_P (kappa/J)^2 / (8P)]^-1.
    pub rho_s_ss: f64,
    /// Purcell-regime form [1 + P/(2 Gamma_P) + gamma_S/P]^-1.
    pub rho_s_ss_purcell: f64,
    /// Stabilization rate 1/tau_S for the requested drive.
    pub inv_tau_s: f64,
    /// Un-approximated incoherent rate
    /// P + Gamma_P + gamma_S/2 - sqrt(P gamma_S + (gamma_S - 2 Gamma_P)^2/4).
    pub inv_tau_s_full: f64,
    pub mode: DriveMode,
}

impl ThreeLevelPredictions {
    /// rho_S(t) = rho_S_ss (1 - exp(-t / tau_S)).
    pub fn rho_s_at(&self, t: f64) -> f64 {
        self.rho_s_ss * (1.0 - (-t * self.inv_tau_s).exp())
    }
}

/// Evaluate the cascaded three-level predictions. Incoherent mode requires
/// P > 0 (the closed forms divide by the pump rate).
pub fn cascaded_three_level(spec: &SystemSpec, mode: DriveMode) -> Result<ThreeLevelPredictions> {
    require_dimer(spec)?;
    let d = spec.derived();
    let (gamma_p, gamma_s) = (d.gamma_p, d.gamma_s);
    let (p, g, j, kappa) = (spec.pump, spec.g, spec.j, spec.kappa);

    if mode == DriveMode::Incoherent && p <= 0.0 {
        return Err(Error::InvalidSpec(
            "incoherent three-level formulas require P > 0".into(),
        ));
    }
    if gamma_p <= 0.0 {
        return Err(Error::InvalidSpec(
            "three-level formulas require Gamma_P > 0".into(),
        ));
    }
    if j == 0.0 {
        return Err(Error::InvalidSpec(
            "three-level formulas require J != 0".into(),
        ));
    }

    let g2 = g * g;
    let g4 = g2 * g2;
    let j2 = j * j;
    let denom = 8.0 * g2 * p * j2 * (p + gamma_s) + 4.0 * g4 * p * kappa + j2 * kappa * p.powi(3);
    let (rho_s_gen, rho_a_gen, rho_ee_gen) = if denom > 0.0 {
        (
            p * p * j2 * (8.0 * g2 + gamma_s * kappa) / denom,
            p * (4.0 * g2 * j2 * gamma_s + 2.0 * g4 * kappa + j2 * kappa * gamma_s * spec.gamma)
                / denom,
            p * p * j2 * kappa * (p + spec.gamma) / denom,
        )
    } else {
        (0.0, 0.0, 0.0)
    };

    let rho_s_ss = if p > 0.0 {
        1.0 / (1.0 + p / (2.0 * gamma_p) + gamma_s / p + gamma_p / (8.0 * p) * (kappa / j).powi(2))
    } else {
        0.0
    };
    let rho_s_ss_purcell = if p > 0.0 {
        1.0 / (1.0 + p / (2.0 * gamma_p) + gamma_s / p)
    } else {
        0.0
    };

    let inv_tau_s_full = p + gamma_p + gamma_s / 2.0
        - (p * gamma_s + 0.25 * (gamma_s - 2.0 * gamma_p).powi(2)).sqrt();
    let inv_tau_s = match mode {
        DriveMode::Incoherent => p + gamma_p - (gamma_p * gamma_p + p * gamma_s).sqrt(),
        DriveMode::Coherent => {
            let disc = gamma_p * gamma_p - 4.0 * d.omega_2p * d.omega_2p;
            let re_sqrt = if disc > 0.0 { disc.sqrt() } else { 0.0 };
            (gamma_p - re_sqrt) / 2.0
        }
    };

    Ok(ThreeLevelPredictions {
        rho_s_ss_general: rho_s_gen,
        rho_a_ss_general: rho_a_gen,
        rho_ee_ss_general: rho_ee_gen,
        rho_s_ss,
        rho_s_ss_purcell,
        inv_tau_s,
        inv_tau_s_full,
        mode,
    })
}

// ---------------------------------------------------------------------------
// optimal pump
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimalRegime {
    /// C >> J/kappa: the emitter-emitter coupling limits the fidelity.
    CouplingLimited,
    /// J/kappa >> C: the cooperativity limits the fidelity.
    CooperativityLimited,
}

#[derive(Debug, Clone, Copy)]
pub struct OptimalPump {
    /// P_opt = (Gamma_P / 2) sqrt((kappa/J)^2 + 16/C).
    pub p_opt: f64,
    /// Population of |S> at the optimum,
    /// [1 + (1/2) sqrt((kappa/J)^2 + 16/C)]^-1.
    pub rho_s_max: f64,
    /// Coupling-limited ceiling (1 + kappa/(2J))^-1.
    pub limit_coupling: f64,
    /// Cooperativity-limited ceiling (1 + 2/sqrt(C))^-1.
    pub limit_cooperativity: f64,
    pub regime: OptimalRegime,
}

pub fn optimal_pump(spec: &SystemSpec) -> Result<OptimalPump> {
    spec.validate()?;
    let d = spec.derived();
    if d.cooperativity <= 0.0 || spec.j <= 0.0 {
        return Err(Error::InvalidSpec(
            "optimal pump needs C > 0 and J > 0".into(),
        ));
    }
    let root = ((spec.kappa / spec.j).powi(2) + 16.0 / d.cooperativity).sqrt();
    Ok(OptimalPump {
        p_opt: 0.5 * d.gamma_p * root,
        rho_s_max: 1.0 / (1.0 + 0.5 * root),
        limit_coupling: 1.0 / (1.0 + spec.kappa / (2.0 * spec.j)),
        limit_cooperativity: 1.0 / (1.0 + 2.0 / d.cooperativity.sqrt()),
        regime: if d.cooperativity >= spec.j / spec.kappa {
            OptimalRegime::CouplingLimited
        } else {
            OptimalRegime::CooperativityLimited
        },
    })
}

/// Scan a spec parameter over a grid and return (argmax, max) of the metric.
/// This is how the optimal coherent amplitude is determined; no closed form
/// exists for it.
pub fn scan_parameter(
    spec: &SystemSpec,
    name: &str,
    grid: &[f64],
    metric: impl Fn(&SystemSpec) -> Result<f64>,
) -> Result<(f64, f64)> {
    if grid.is_empty() {
        return Err(Error::InvalidSpec("empty scan grid".into()));
    }
    let mut best = (grid[0], f64::NEG_INFINITY);
    for &x in grid {
        let mut s = spec.clone();
        s.set_param(name, x)?;
        let v = metric(&s)?;
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

/// Logarithmic parameter grid with a fixed density of points per decade.
pub fn log_grid(start: f64, stop: f64, points_per_decade: usize) -> Vec<f64> {
    assert!(start > 0.0 && stop > start);
    let decades = (stop / start).log10();
    let n = ((decades * points_per_decade as f64).ceil() as usize).max(1) + 1;
    (0..n)
        .map(|k| start * 10f64.powf(decades * k as f64 / (n - 1) as f64))
        .collect()
}

// ---------------------------------------------------------------------------
// hierarchy gates
// ---------------------------------------------------------------------------

/// Machine-checkable form of the rate hierarchy enabling the
/// frequency-resolved Purcell mechanism; each ">>" is a ratio of at least 10.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct HierarchyGates {
    /// J >= 10 kappa: the cavity resolves the emitter spectrum.
    pub j_over_kappa: bool,
    /// kappa >= 10 Gamma_P: the cavity is adiabatically eliminable.
    pub kappa_over_gamma_p: bool,
    /// Gamma_P >= 10 gamma: high cooperativity.
    pub gamma_p_over_gamma: bool,
    /// Gamma_P >= 10 P: the enhanced decay outruns the repump.
    pub gamma_p_over_pump: bool,
}

pub const HIERARCHY_RATIO: f64 = 10.0;

impl HierarchyGates {
    pub fn evaluate(spec: &SystemSpec) -> Self {
        let d = spec.derived();
        let ge = |a: f64, b: f64| a >= HIERARCHY_RATIO * b;
        Self {
            j_over_kappa: ge(spec.j.abs(), spec.kappa),
            kappa_over_gamma_p: ge(spec.kappa, d.gamma_p),
            gamma_p_over_gamma: ge(d.gamma_p, spec.gamma),
            gamma_p_over_pump: ge(d.gamma_p, spec.pump),
        }
    }

    pub fn all(&self) -> bool {
        self.j_over_kappa
            && self.kappa_over_gamma_p
            && self.gamma_p_over_gamma
            && self.gamma_p_over_pump
    }
}
