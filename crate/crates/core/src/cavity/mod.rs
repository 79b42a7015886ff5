//! Microscopic validation: conveyed atoms crossing a detuned cavity mode.

pub mod agreement;
pub mod dynamics;
pub mod geometry;
pub mod ode;

pub use agreement::{xy_agreement, xy_agreement_with, AgreementOptions, AgreementReport, StateAgreement};
pub use dynamics::{
    asymptotic_hamiltonian, asymptotic_hamiltonian_in, integrate_effective, integrate_full, AmplitudeState,
    AsymptoticHamiltonian, Trajectory,
};
pub use geometry::{solve_geometry, Atom, CavityGeometry, TimeWindow};
pub use ode::OdeOptions;
