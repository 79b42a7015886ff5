//! Conventional purification gate used as the comparison baseline: single-qubit
//! rotations `U± = (I ± iσˣ)/√2`, bilateral CNOTs and parity post-selection.
//!
//! Qubit layout: the source pair sits on slots `(1, 4)`, the target pair on
//! `(2, 5)`. Node A holds 1 and 2, node B holds 4 and 5. Each node applies a CNOT
//! from its source qubit onto its target qubit; the targets are read out and the
//! round is kept when both agree.

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::closed_form_at_operational_time;
use crate::error::{Error, Result};
use crate::linalg::{kron, CMatrix};
use crate::num::{cr, cx, Field, Real};
use crate::pumping::{PumpMode, PumpRound, PumpTrace, DEFAULT_EPSILON};
use crate::state::{bell_decompose, werner, DensityMatrix, Slot};

const SOURCE: (Slot, Slot) = (1, 4);
const TARGET: (Slot, Slot) = (2, 5);
const LAYOUT: [Slot; 4] = [1, 2, 4, 5];
const MAX_ROUNDS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rotation {
    /// `(I + iσˣ)/√2`
    Plus,
    /// `(I − iσˣ)/√2`
    Minus,
}

impl Rotation {
    pub fn matrix<T: Real>(self) -> CMatrix<T> {
        let s = T::one() / T::lit(2.0).sqrt();
        let off = match self {
            Rotation::Plus => cx(T::zero(), s),
            Rotation::Minus => cx(T::zero(), -s),
        };
        CMatrix::from_row_slice(2, 2, &[cr(s), off, off, cr(s)])
    }
}

/// Which rotation each node applies before its CNOT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RotationAssignment {
    pub node_a: Rotation,
    pub node_b: Rotation,
}

impl Default for RotationAssignment {
    fn default() -> Self {
        Self {
            node_a: Rotation::Plus,
            node_b: Rotation::Minus,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CnotRoundResult<T: Real> {
    /// Kept pair, carrying the source pair's labels.
    pub post_state: DensityMatrix<T>,
    pub fidelity: T,
    pub success_probability: T,
}

fn cnot_matrix<T: Real>() -> CMatrix<T> {
    let mut m = CMatrix::zeros(4, 4);
    for (row, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(row, col)] = cr(T::one());
    }
    m
}

/// Full gate on the layout `[1, 2, 4, 5]`.
fn gate<T: Real>(signs: RotationAssignment) -> CMatrix<T> {
    let ua = signs.node_a.matrix::<T>();
    let ub = signs.node_b.matrix::<T>();
    let rotations = kron(&kron(&ua, &ua), &kron(&ub, &ub));
    let c = cnot_matrix::<T>();
    // CNOT 1→2 on A and 4→5 on B; the node blocks are adjacent in the layout.
    kron(&c, &c) * rotations
}

pub fn cnot_round<T: Real>(source: &DensityMatrix<T>, target: &DensityMatrix<T>) -> Result<CnotRoundResult<T>> {
    cnot_round_with(source, target, RotationAssignment::default())
}

pub fn cnot_round_with<T: Real>(
    source: &DensityMatrix<T>,
    target: &DensityMatrix<T>,
    signs: RotationAssignment,
) -> Result<CnotRoundResult<T>> {
    for (name, s) in [("source", source), ("target", target)] {
        if s.num_qubits() != 2 {
            return Err(Error::shape(format!("two-qubit {name} pair"), s.num_qubits()));
        }
    }
    let joint = source
        .relabeled(vec![SOURCE.0, SOURCE.1])?
        .tensor(&target.relabeled(vec![TARGET.0, TARGET.1])?)?
        .reorder(&LAYOUT)?;
    let u = gate::<T>(signs);
    let evolved = DensityMatrix::from_parts(&u * joint.matrix() * u.adjoint(), LAYOUT.to_vec());
    let mut kept = CMatrix::<T>::zeros(4, 4);
    for bit in [0u8, 1] {
        let (block, labels) = evolved.conditional_block(&[(TARGET.0, bit), (TARGET.1, bit)])?;
        debug_assert_eq!(labels, vec![SOURCE.0, SOURCE.1]);
        kept += block;
    }
    let success_probability = kept.trace().re;
    if !(success_probability.to_f64_lossy() >= crate::purification::MIN_SUCCESS_PROBABILITY) {
        return Err(Error::ZeroProbability {
            probability: success_probability.to_f64_lossy(),
        });
    }
    let post_state = DensityMatrix::from_parts(kept * cr(T::one() / success_probability), source.labels().to_vec());
    let fidelity = bell_decompose(&post_state)?.weight(crate::state::Bell::PhiPlus);
    Ok(CnotRoundResult {
        post_state,
        fidelity,
        success_probability,
    })
}

/// `(1 − 2f + 10f²) / (5 − 4f + 8f²)` for two Werner inputs of fidelity `f`.
pub fn cnot_fidelity_formula<T: Field>(f: T) -> T {
    let i = T::int;
    let f2 = f.clone() * f.clone();
    (i(1) - i(2) * f.clone() + i(10) * f2.clone()) / (i(5) - i(4) * f + i(8) * f2)
}

/// Acceptance probability `(5 − 4f + 8f²)/9` for two Werner inputs.
pub fn cnot_success_formula<T: Field>(f: T) -> T {
    let i = T::int;
    let f2 = f.clone() * f.clone();
    (i(5) - i(4) * f + i(8) * f2) / i(9)
}

fn check_pump_domain<T: Real>(f: T) -> Result<()> {
    if !(f <= T::one()) {
        return Err(Error::domain(format!("fidelity {f} outside (1/2, 1]")));
    }
    if f <= T::lit(0.5) {
        return Err(Error::BelowThreshold { f: f.to_f64_lossy() });
    }
    Ok(())
}

/// Stored pair as source, fresh Werner pair as target, exact state carried.
pub fn scheme_c_pump<T: Real>(f: T, n: usize) -> Result<PumpTrace<T>> {
    check_pump_domain(f)?;
    if n == 0 {
        return Err(Error::domain("pumping needs at least one round"));
    }
    let fresh = werner(f, SOURCE)?;
    let mut stored = fresh.clone();
    let mut previous = f;
    let mut fidelities = Vec::new();
    let mut rounds = Vec::with_capacity(n);
    // Run to convergence so the trace can report its own fixed point.
    for k in 1..=MAX_ROUNDS {
        let r = cnot_round(&stored, &fresh)?;
        if k <= n {
            rounds.push(PumpRound {
                n: k,
                fidelity: r.fidelity,
                delta: r.fidelity - previous,
                success_probability: r.success_probability,
            });
        }
        fidelities.push(r.fidelity);
        let settled = (r.fidelity - previous).abs() < T::lit(1e-13).max(T::default_epsilon() * T::lit(4.0));
        previous = r.fidelity;
        stored = r.post_state;
        if k >= n && settled {
            break;
        }
    }
    let fixed_point = previous;
    let epsilon = T::lit(DEFAULT_EPSILON);
    let n_optimal = std::iter::once(f)
        .chain(fidelities.iter().copied())
        .position(|x| fixed_point - x < epsilon)
        .unwrap_or(fidelities.len());
    Ok(PumpTrace {
        f,
        mode: PumpMode::SchemeC,
        rounds,
        fixed_point,
        n_optimal,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Figure5bRow<T> {
    pub f: T,
    /// One XY round, `F̃(T, f)`.
    pub xy: T,
    /// One conventional round.
    pub cnot: T,
    /// Two conventional pumping rounds.
    pub scheme_c: T,
    /// `(F̃ − f) / (F_cnot − f)`; undefined at `f = 1`.
    pub gain_ratio: Option<T>,
}

/// Comparison table; errors if the XY round fails to beat the conventional one.
pub fn compare_figure5b<T: Real>(f_grid: &[T]) -> Result<Vec<Figure5bRow<T>>> {
    let rows: Vec<Figure5bRow<T>> = f_grid
        .par_iter()
        .map(|&f| -> Result<Figure5bRow<T>> {
            let xy = closed_form_at_operational_time(f)?.fidelity;
            let cnot = cnot_fidelity_formula(f);
            let scheme_c = scheme_c_pump(f, 2)?.final_fidelity();
            let gain_ratio = (cnot - f > T::lit(1e-12)).then(|| (xy - f) / (cnot - f));
            Ok(Figure5bRow {
                f,
                xy,
                cnot,
                scheme_c,
                gain_ratio,
            })
        })
        .collect::<Result<_>>()?;
    if let Some(bad) = rows.iter().find(|r| r.f < T::one() && r.xy <= r.cnot) {
        return Err(Error::Analysis(format!(
            "XY round {} does not exceed conventional round {} at f = {}",
            bad.xy, bad.cnot, bad.f
        )));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn formula_values() {
        assert_eq!(cnot_fidelity_formula(Rational::new(3, 4)), Rational::new(41, 52));
        assert_eq!(cnot_fidelity_formula(Rational::new(1, 2)), Rational::new(1, 2));
        assert_eq!(cnot_fidelity_formula(Rational::new(1, 1)), Rational::new(1, 1));
    }

    #[test]
    fn simulation_matches_formula() {
        for f in [0.5f64, 0.6, 0.75, 0.9, 1.0] {
            let w = werner(f, (7, 8)).unwrap();
            let r = cnot_round(&w, &w).unwrap();
            assert!((r.fidelity - cnot_fidelity_formula(f)).abs() < 1e-12);
            assert!((r.success_probability - cnot_success_formula(f)).abs() < 1e-12);
            assert_eq!(r.post_state.labels(), &[7, 8]);
        }
    }

    #[test]
    fn same_sign_rotations_do_not_purify() {
        let w = werner(0.75f64, SOURCE).unwrap();
        let plus = RotationAssignment {
            node_a: Rotation::Plus,
            node_b: Rotation::Plus,
        };
        let r = cnot_round_with(&w, &w, plus).unwrap();
        assert!(r.fidelity < 0.1);
        let swapped = RotationAssignment {
            node_a: Rotation::Minus,
            node_b: Rotation::Plus,
        };
        let s = cnot_round_with(&w, &w, swapped).unwrap();
        assert!((s.fidelity - cnot_fidelity_formula(0.75)).abs() < 1e-12);
    }

    #[test]
    fn scheme_c_first_round_is_formula() {
        let trace = scheme_c_pump(0.75f64, 2).unwrap();
        assert!((trace.rounds[0].fidelity - 5.125 / 6.5).abs() < 1e-12);
        assert!(trace.final_fidelity() > trace.rounds[0].fidelity);
        assert!(trace.fixed_point >= trace.final_fidelity());
    }

    #[test]
    fn figure5b_table() {
        let rows = compare_figure5b(&[0.6f64, 0.75, 0.9, 1.0]).unwrap();
        let mid = rows[1];
        assert!((mid.xy - 42.625 / 51.5).abs() < 1e-12);
        assert!((mid.cnot - 5.125 / 6.5).abs() < 1e-12);
        assert!(rows[3].gain_ratio.is_none());
        assert!((rows[3].scheme_c - 1.0).abs() < 1e-12);
    }
}
