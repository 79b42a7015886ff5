//! One round of the cavity-mediated purification gate, simulated on the full
//! six-qubit density matrix.
//!
//! Layout: conveyed pairs `(1,4)` and `(2,5)` carry fidelity `f`, the stationary
//! pair `(3,6)` carries an arbitrary two-qubit state. Each node evolves under the
//! XY ring, the conveyed atoms `1, 2, 4, 5` are read out in the computational
//! basis, and the round is accepted on the patterns `0101` or `1010`. The
//! transfer between cavity-active `{|0⟩,|e⟩}` and storage `{|0⟩,|1⟩}` bases is an
//! ideal relabeling `|e⟩ ↦ |1⟩`, so no extra operator appears.

use std::fmt;
use std::str::FromStr;

use nalgebra::Complex;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::num::{cr, Real};
use crate::state::{bell_decompose, werner, Bell, DensityMatrix, Slot};
use crate::xy::{build_xy, evolve_composite};

/// Conveyed atoms read out at the end of a round, in outcome bit order.
pub const MEASURED_SLOTS: [Slot; 4] = [1, 2, 4, 5];
pub const STATIONARY_PAIR: (Slot, Slot) = (3, 6);
pub const CONVEYED_PAIRS: [(Slot, Slot); 2] = [(1, 4), (2, 5)];

/// Below this acceptance weight the post-selected state is undefined.
pub const MIN_SUCCESS_PROBABILITY: f64 = 1e-14;

/// Readout of slots (1, 2, 4, 5); slot 1 is the most significant bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome(u8);

impl Outcome {
    /// `0101`: atoms 2 and 5 found in `|1⟩`.
    pub const ACCEPT_0101: Outcome = Outcome(0b0101);
    /// `1010`: atoms 1 and 4 found in `|1⟩`.
    pub const ACCEPT_1010: Outcome = Outcome(0b1010);

    pub fn new(bits: u8) -> Result<Self> {
        if bits > 0b1111 {
            return Err(Error::domain(format!("outcome {bits} has more than 4 bits")));
        }
        Ok(Self(bits))
    }

    pub fn all() -> impl Iterator<Item = Outcome> {
        (0..16u8).map(Outcome)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Bits for slots 1, 2, 4, 5.
    pub fn bits(self) -> [u8; 4] {
        [3, 2, 1, 0].map(|s| (self.0 >> s) & 1)
    }

    fn projection(self) -> [(Slot, u8); 4] {
        let b = self.bits();
        [0, 1, 2, 3].map(|i| (MEASURED_SLOTS[i], b[i]))
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04b}", self.0)
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() != 4 || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::domain(format!("outcome {s:?} is not a 4-bit string")));
        }
        Outcome::new(u8::from_str_radix(s, 2).expect("validated binary"))
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Protocol-defining acceptance set.
pub fn default_accepted() -> Vec<Outcome> {
    vec![Outcome::ACCEPT_0101, Outcome::ACCEPT_1010]
}

#[derive(Debug, Clone)]
pub struct RoundInput<T: Real> {
    /// Fidelity of both conveyed pairs.
    pub f: T,
    /// State of the stationary pair; relabeled onto slots (3, 6) in its own order.
    pub stationary_state: DensityMatrix<T>,
    /// Evolution time `t₀`.
    pub t0: T,
    /// XY coupling `J`.
    pub coupling: T,
    pub accepted: Vec<Outcome>,
}

impl<T: Real> RoundInput<T> {
    pub fn new(f: T, stationary_state: DensityMatrix<T>, t0: T, coupling: T) -> Result<Self> {
        if !(f >= T::zero() && f <= T::one()) {
            return Err(Error::domain(format!("conveyed fidelity {f} outside [0,1]")));
        }
        if stationary_state.num_qubits() != 2 {
            return Err(Error::shape(
                "two-qubit stationary state",
                stationary_state.num_qubits(),
            ));
        }
        if !t0.is_finite() {
            return Err(Error::domain("evolution time must be finite"));
        }
        let stationary_state = stationary_state.relabeled(vec![STATIONARY_PAIR.0, STATIONARY_PAIR.1])?;
        Ok(Self {
            f,
            stationary_state,
            t0,
            coupling,
            accepted: default_accepted(),
        })
    }

    /// Werner inputs `f` (conveyed) and `f′` (stationary).
    pub fn werner(f: T, f_prime: T, t0: T, coupling: T) -> Result<Self> {
        Self::new(f, werner(f_prime, STATIONARY_PAIR)?, t0, coupling)
    }

    /// Overrides the acceptance set (diagnostics only).
    pub fn with_accepted(mut self, accepted: Vec<Outcome>) -> Self {
        self.accepted = accepted;
        self
    }

    /// `ρ_f^{1,4} ⊗ ρ_f^{2,5} ⊗ ρ^{3,6}` in the canonical layout (1, …, 6).
    pub fn initial_state(&self) -> Result<DensityMatrix<T>> {
        let [p, q] = CONVEYED_PAIRS;
        werner(self.f, p)?
            .tensor(&werner(self.f, q)?)?
            .tensor(&self.stationary_state)?
            .reorder(&crate::xy::COMPOSITE_SLOTS)
    }

    /// `ρ^{1-6}(t₀) = U(t₀) ρ^{1-6}(0) U†(t₀)`.
    pub fn evolved_state(&self) -> Result<DensityMatrix<T>> {
        let h = build_xy(self.coupling)?;
        evolve_composite(&h, self.t0).apply(&self.initial_state()?)
    }
}

#[derive(Debug, Clone)]
pub struct RoundResult<T: Real> {
    /// Normalized state of the stationary pair (3, 6) given acceptance.
    pub post_state: DensityMatrix<T>,
    /// Total weight of the accepted outcomes.
    pub success_probability: T,
    pub accepted_outcomes: Vec<Outcome>,
    /// Weight of every readout, indexed by [`Outcome::index`].
    pub outcome_probabilities: [T; 16],
    /// Largest off-diagonal Bell-basis modulus of `post_state`.
    pub werner_deviation: T,
}

impl<T: Real> RoundResult<T> {
    pub fn fidelity(&self) -> T {
        crate::state::fidelity(&self.post_state, STATIONARY_PAIR).expect("post state is two-qubit")
    }

    pub fn outcome_probability(&self, outcome: Outcome) -> T {
        self.outcome_probabilities[outcome.index()]
    }
}

/// Evolves, reads out slots 1, 2, 4, 5 and post-selects on the acceptance set.
pub fn run_round<T: Real>(input: &RoundInput<T>) -> Result<RoundResult<T>> {
    measure_round(&input.evolved_state()?, &input.accepted)
}

/// Readout and post-selection on an already evolved six-qubit state.
pub fn measure_round<T: Real>(evolved: &DensityMatrix<T>, accepted: &[Outcome]) -> Result<RoundResult<T>> {
    let mut outcome_probabilities = [T::zero(); 16];
    let mut kept = CMatrix::<T>::zeros(4, 4);
    for outcome in Outcome::all() {
        let (block, labels) = evolved.conditional_block(&outcome.projection())?;
        debug_assert_eq!(labels, vec![STATIONARY_PAIR.0, STATIONARY_PAIR.1]);
        outcome_probabilities[outcome.index()] = block.trace().re;
        if accepted.contains(&outcome) {
            kept += block;
        }
    }
    let success_probability = kept.trace().re;
    if !(success_probability.to_f64_lossy() >= MIN_SUCCESS_PROBABILITY) {
        return Err(Error::ZeroProbability {
            probability: success_probability.to_f64_lossy(),
        });
    }
    let normalized = kept * cr(T::one() / success_probability);
    let post_state = DensityMatrix::from_parts(normalized, vec![STATIONARY_PAIR.0, STATIONARY_PAIR.1]);
    let werner_deviation = bell_decompose(&post_state)?.off_diagonal_norm;
    let mut accepted_outcomes = accepted.to_vec();
    accepted_outcomes.sort();
    accepted_outcomes.dedup();
    Ok(RoundResult {
        post_state,
        success_probability,
        accepted_outcomes,
        outcome_probabilities,
        werner_deviation,
    })
}

/// Operational time `T = π (n + ½) / (3|J|)` of the purification gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperationalTime<T> {
    pub n: u32,
    pub time: T,
}

pub fn operational_time<T: Real>(coupling: T, n: u32) -> Result<OperationalTime<T>> {
    if coupling == T::zero() {
        return Err(Error::DegenerateCoupling);
    }
    let half = T::from_u32(n).unwrap() + T::lit(0.5);
    Ok(OperationalTime {
        n,
        time: T::pi() * half / (T::lit(3.0) * coupling.abs()),
    })
}

/// Smallest `m ≥ 1` with `mπ/|J| ≥ elapsed`.
pub fn restoration_periods<T: Real>(elapsed: T, coupling: T) -> u32 {
    let period = T::pi() / coupling.abs();
    let m = (elapsed / period).ceil().to_f64_lossy().max(1.0);
    m as u32
}

/// Evolves the six-qubit state for a further `mπ/|J| − elapsed`, completing `m`
/// full periods; the XY ring returns every state to its pre-gate value.
pub fn restore<T: Real>(state: &DensityMatrix<T>, elapsed: T, coupling: T, m: u32) -> Result<DensityMatrix<T>> {
    if state.num_qubits() != 6 {
        return Err(Error::shape("six-qubit state", state.num_qubits()));
    }
    let h = build_xy(coupling)?;
    let period = T::from_u32(m).unwrap() * T::pi() / coupling.abs();
    let slack = T::default_epsilon() * T::lit(64.0) * period.abs().max(T::one());
    if period + slack < elapsed {
        return Err(Error::NegativeDuration {
            period: period.to_f64_lossy(),
            elapsed: elapsed.to_f64_lossy(),
        });
    }
    evolve_composite(&h, period - elapsed).apply(state)
}

/// Bell-basis coefficients of the stationary pair produced from `|00⟩⟨00|`:
/// `A Φ⁺ + B (Ψ⁺ + Ψ⁻) + C Φ⁻ + D (|φ⁺⟩⟨φ⁻| + |φ⁻⟩⟨φ⁺|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapCoefficients<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> BootstrapCoefficients<T> {
    pub fn from_state(rho: &DensityMatrix<T>) -> Result<Self> {
        let dec = bell_decompose(rho)?;
        let d: Complex<T> = dec.coherence(Bell::PhiPlus, Bell::PhiMinus);
        Ok(Self {
            a: dec.weight(Bell::PhiPlus),
            b: (dec.weight(Bell::PsiPlus) + dec.weight(Bell::PsiMinus)) * T::lit(0.5),
            c: dec.weight(Bell::PhiMinus),
            d: d.re,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BootstrapRound<T: Real> {
    pub round: RoundResult<T>,
    pub coefficients: BootstrapCoefficients<T>,
}

/// First round with the stationary atoms prepared in the product state `|0₃0₆⟩`.
pub fn bootstrap_round<T: Real>(f: T, t0: T, coupling: T) -> Result<BootstrapRound<T>> {
    if !(f > T::lit(0.5) && f <= T::one()) {
        return Err(Error::BelowThreshold { f: f.to_f64_lossy() });
    }
    let product = DensityMatrix::basis_state(&[0, 0], vec![STATIONARY_PAIR.0, STATIONARY_PAIR.1])?;
    let round = run_round(&RoundInput::new(f, product, t0, coupling)?)?;
    let coefficients = BootstrapCoefficients::from_state(&round.post_state)?;
    Ok(BootstrapRound { round, coefficients })
}

/// Bootstrap round followed by `extra_rounds` rounds that carry the full
/// stationary density matrix forward. Returns one entry per successful round.
pub fn bootstrap_sequence<T: Real>(f: T, t0: T, coupling: T, extra_rounds: usize) -> Result<Vec<BootstrapRound<T>>> {
    let first = bootstrap_round(f, t0, coupling)?;
    let mut stationary = first.round.post_state.clone();
    let mut out = vec![first];
    for _ in 0..extra_rounds {
        let round = run_round(&RoundInput::new(f, stationary, t0, coupling)?)?;
        let coefficients = BootstrapCoefficients::from_state(&round.post_state)?;
        stationary = round.post_state.clone();
        out.push(BootstrapRound { round, coefficients });
    }
    Ok(out)
}
