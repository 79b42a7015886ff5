use xypurify::closed_form::closed_form_general;
use xypurify::pumping::{pump_with, PumpSettings};
use xypurify::{figure6_data, fixed_point, optimal_rounds, pump, PumpMode};

fn fifty_point_grid() -> Vec<f64> {
    (1..=50).map(|k| 0.5 + 0.5 * k as f64 / 50.0).collect()
}

/// Fixed point of `x ↦ F(T, f, x)` by plain iteration, independent of the library's bisection.
fn iterate_to_fixed_point(f: f64) -> f64 {
    let mut x = f;
    for _ in 0..200_000 {
        let next = closed_form_general(f, x).unwrap().fidelity;
        if (next - x).abs() < 1e-15 {
            return next;
        }
        x = next;
    }
    x
}

#[test]
fn sequence_increases_to_fixed_point() {
    for f in fifty_point_grid() {
        let x = fixed_point(f).unwrap();
        let trace = pump(f, 30, PumpMode::ClosedForm).unwrap();
        let seq = trace.fidelities();
        for w in seq.windows(2) {
            if f < 1.0 {
                assert!(w[1] > w[0] || x - w[0] < 1e-12, "f={f}: {} -> {}", w[0], w[1]);
            }
            assert!(w[1] <= x + 1e-12);
        }
    }
}

#[test]
fn fixed_point_matches_iteration() {
    for f in [0.55, 0.6, 0.75, 0.9, 0.99] {
        let x = fixed_point(f).unwrap();
        assert!((x - iterate_to_fixed_point(f)).abs() < 1e-9, "f={f}");
        assert!((closed_form_general(f, x).unwrap().fidelity - x).abs() < 1e-10);
    }
    assert!((fixed_point(0.75f64).unwrap() - 0.8806470302).abs() < 1e-9);
}

#[test]
fn growth_is_difference_of_gains() {
    for row in figure6_data(&fifty_point_grid()[..49], 10).unwrap() {
        let trace = pump(row.f, row.n, PumpMode::ClosedForm).unwrap();
        let prev = trace.gain(row.n - 1).unwrap();
        assert!((row.growth - (row.gain - prev)).abs() < 1e-14);
    }
}

#[test]
fn optimal_rounds_reaches_tolerance() {
    for f in [0.6, 0.75, 0.9] {
        let eps = 5e-3;
        let n = optimal_rounds(f, eps).unwrap();
        let trace = pump(f, n.max(1), PumpMode::ClosedForm).unwrap();
        let seq = trace.fidelities();
        assert!(trace.fixed_point - seq[n] < eps);
        if n > 0 {
            assert!(trace.fixed_point - seq[n - 1] >= eps);
        }
    }
    assert_eq!(optimal_rounds(0.75, 0.005).unwrap(), 4);
}

#[test]
fn simulation_agrees_while_stored_pair_is_werner() {
    for k in 0..=8 {
        let f = 0.55 + 0.05 * k as f64;
        let scalar = pump(f, 10, PumpMode::ClosedForm).unwrap();
        let exact = pump(f, 2, PumpMode::Simulation).unwrap();
        for (a, b) in exact.rounds.iter().zip(&scalar.rounds) {
            assert!((a.fidelity - b.fidelity).abs() < 1e-8);
            assert!((a.success_probability - b.success_probability).abs() < 1e-8);
        }
        let settings = PumpSettings {
            twirl: true,
            ..PumpSettings::default()
        };
        let twirled = pump_with(f, 10, PumpMode::Simulation, &settings).unwrap();
        for (a, b) in twirled.rounds.iter().zip(&scalar.rounds) {
            assert!((a.fidelity - b.fidelity).abs() < 1e-8, "f={f} n={}", a.n);
        }
    }
}

#[test]
fn exact_state_departs_from_scalar_map_after_two_rounds() {
    // Reference values from an independent dense-matrix computation.
    let exact = pump(0.8f64, 3, PumpMode::Simulation).unwrap();
    let scalar = pump(0.8f64, 3, PumpMode::ClosedForm).unwrap();
    assert!((scalar.rounds[2].fidelity - 0.912600).abs() < 1e-6);
    assert!((exact.rounds[2].fidelity - 0.913545).abs() < 1e-6);
}

#[test]
fn saturation_within_six_rounds() {
    let grid: Vec<f64> = (11..=19).map(|k| k as f64 * 0.05).collect();
    for row in figure6_data(&grid, 8).unwrap() {
        if row.n >= 6 {
            assert!(row.growth < 0.005, "{row:?}");
        }
    }
}

#[test]
fn below_threshold_rejected() {
    assert!(pump(0.5, 3, PumpMode::ClosedForm).is_err());
    assert!(pump(1.1, 3, PumpMode::ClosedForm).is_err());
}
