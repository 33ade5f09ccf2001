//! Simulation of interacting quantum emitters coupled to a lossy cavity,
//! driven either coherently or incoherently, with the narrow cavity line
//! selectively Purcell-enhancing one transition of the hybridized emitter
//! spectrum so the ensemble relaxes into an entangled steady state.
//!
//! The crate provides:
//!
//! * [`qop`] — tensor-product operator algebra and sparse superoperators;
//! * [`model`] — translation of a physical parameter set ([`SystemSpec`])
//!   into Hamiltonian, dissipator list and full Liouvillian;
//! * [`solvers`] — steady states, stiff time propagation, photon-heralded
//!   conditioning;
//! * [`metrics`] — concurrence, target-state fidelities, cavity intensity
//!   and photon statistics;
//! * [`effective`] — adiabatic elimination of the cavity and the closed-form
//!   predictions of the reduced models;
//! * [`pim`] — permutationally invariant solver in the collective-spin
//!   (Dicke) basis, tractable up to tens of emitters;
//! * [`sweep`] — configuration-driven 1-D/2-D parameter sweeps with CSV and
//!   JSON output.
//!
//! All rates and frequencies are dimensionless multiples of the single
//! emitter decay rate gamma (gamma = 1 fixes the unit system), and all
//! Hamiltonians live in the frame rotating at the mean emitter frequency.

pub mod effective;
pub mod error;
pub mod metrics;
pub mod model;
pub mod pim;
pub mod qop;
pub mod solvers;
pub mod sweep;

pub use error::{Error, Result};
pub use metrics::TargetState;
pub use model::{DerivedRates, ModelKind, SystemSpec};
pub use qop::{
    embed, expectation, lindblad_dissipator, partial_trace, DensityMatrix, LabeledOperator,
    Liouvillian, SubsystemLayout,
};
pub use solvers::{steady_state, time_evolve, SteadyStateMethod, SteadyStateResult, Trajectory};
