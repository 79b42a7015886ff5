//! Entanglement purification with a cavity-mediated Heisenberg XY interaction.
//!
//! Two conveyed Bell pairs and one stationary pair are shared between nodes A
//! (atoms 1, 2, 3) and B (atoms 4, 5, 6). Each node runs the three-atom XY ring for
//! a fixed time, the conveyed atoms are read out, and the stationary pair is kept
//! on the patterns `0101` / `1010`. Repeating the round pumps the stationary pair
//! towards a fixed point above the input fidelity.
//!
//! The numerical core is generic over the scalar type ([`num::Real`] for `f32` /
//! `f64`, [`num::Field`] for the rational maps, which also accept [`Rational`]).
//! Concrete `f64` aliases are provided below for everyday use.

// `!(x > 0)` style checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod closed_form;
pub mod cnot;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod num;
pub mod pumping;
pub mod purification;
pub mod state;
pub mod xy;

pub use cavity::{solve_geometry, xy_agreement, CavityGeometry};
pub use closed_form::{
    closed_form_at_operational_time, closed_form_fidelity, closed_form_general, closed_form_outcome_probability,
    ClosedForm,
};
pub use cnot::{cnot_fidelity_formula, cnot_round, compare_figure5b, scheme_c_pump, CnotRoundResult};
pub use error::{Error, Result};
pub use montecarlo::{run_protocol, run_trials, ProtocolConfig, ProtocolStats};
pub use num::{Field, Real};
pub use pumping::{figure6_data, fixed_point, optimal_rounds, pump, PumpMode, PumpTrace};
pub use purification::{operational_time, restore, run_round, Outcome, RoundInput, RoundResult};
pub use state::{bell_decompose, fidelity, werner, Bell, DensityMatrix, Slot, Tolerance};
pub use xy::{build_xy, evolve_composite, evolve_triplet, XyHamiltonian};

/// Exact rationals for the closed-form maps.
pub type Rational = num_rational::Ratio<i64>;

pub type DensityMatrix64 = DensityMatrix<f64>;
pub type DensityMatrix32 = DensityMatrix<f32>;
pub type XyHamiltonian64 = XyHamiltonian<f64>;
pub type RoundInput64 = RoundInput<f64>;
pub type RoundResult64 = RoundResult<f64>;
pub type CavityGeometry64 = CavityGeometry<f64>;
