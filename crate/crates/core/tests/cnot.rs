mod common;

use proptest::prelude::*;
use xypurify::cnot::{cnot_round_with, cnot_success_formula, Rotation, RotationAssignment};
use xypurify::state::bell_diagonal;
use xypurify::{bell_decompose, cnot_fidelity_formula, cnot_round, werner, Rational};

use common::bell_weights;

/// Known bilateral-CNOT recurrence for Bell-diagonal inputs (weights Φ⁺, Φ⁻, Ψ⁺, Ψ⁻),
/// written out by hand as the reference.
fn recurrence(a: [f64; 4], b: [f64; 4]) -> ([f64; 4], f64) {
    let [a1, a2, a3, a4] = a;
    let [b1, b2, b3, b4] = b;
    let n = (a1 + a4) * (b1 + b4) + (a2 + a3) * (b2 + b3);
    (
        [
            (a1 * b1 + a4 * b4) / n,
            (a1 * b4 + a4 * b1) / n,
            (a2 * b2 + a3 * b3) / n,
            (a2 * b3 + a3 * b2) / n,
        ],
        n,
    )
}

#[test]
fn werner_grid_matches_formula() {
    for k in 0..=20 {
        let f = 0.5 + 0.5 * k as f64 / 20.0;
        let w = werner(f, (1, 4)).unwrap();
        let r = cnot_round(&w, &w).unwrap();
        assert!((r.fidelity - cnot_fidelity_formula(f)).abs() < 1e-12, "f={f}");
        assert!((r.success_probability - cnot_success_formula(f)).abs() < 1e-12);
    }
    assert_eq!(cnot_fidelity_formula(Rational::new(3, 4)), Rational::new(41, 52));
    assert_eq!(cnot_fidelity_formula(Rational::new(1, 2)), Rational::new(1, 2));
}

#[test]
fn rotation_assignment_matters() {
    let w = werner(0.75f64, (1, 4)).unwrap();
    let swapped = RotationAssignment {
        node_a: Rotation::Minus,
        node_b: Rotation::Plus,
    };
    let same = RotationAssignment {
        node_a: Rotation::Plus,
        node_b: Rotation::Plus,
    };
    let target = 41.0f64 / 52.0;
    assert!((cnot_round_with(&w, &w, swapped).unwrap().fidelity - target).abs() < 1e-12);
    assert!((cnot_round_with(&w, &w, same).unwrap().fidelity - target).abs() > 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bell_diagonal_inputs_stay_bell_diagonal(wa in bell_weights(), wb in bell_weights()) {
        let r = cnot_round(&bell_diagonal(wa, (1, 4)).unwrap(), &bell_diagonal(wb, (2, 5)).unwrap()).unwrap();
        let d = bell_decompose(&r.post_state).unwrap();
        prop_assert!(d.off_diagonal_norm < 1e-10);
        let (expected, p) = recurrence(wa, wb);
        prop_assert!((r.success_probability - p).abs() < 1e-12);
        for (got, want) in d.weights.iter().zip(expected) {
            prop_assert!((got - want).abs() < 1e-12);
        }
        prop_assert!(r.success_probability > 0.0 && r.success_probability <= 1.0 + 1e-12);
    }
}
