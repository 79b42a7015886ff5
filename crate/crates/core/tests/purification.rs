mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use xypurify::closed_form::{closed_form_fidelity, closed_form_general, closed_form_outcome_probability};
use xypurify::purification::{restoration_periods, Outcome, STATIONARY_PAIR};
use xypurify::state::bell_diagonal;
use xypurify::{restore, run_round, Rational, RoundInput};

use common::bell_weights;

fn f_grid() -> Vec<f64> {
    (11..=19).map(|k| k as f64 * 0.05).collect()
}

#[test]
fn engine_matches_reference_and_trig_form() {
    for f in f_grid() {
        for k in 0..=12 {
            let t = k as f64 * PI / 24.0;
            let engine = run_round(&RoundInput::werner(f, f, t, 1.0).unwrap()).unwrap();
            let reference = common::round(f, &common::werner(f), 1.0, t);
            let (trig_f, trig_p) = common::trig_form(t, f, 1.0);
            assert!((engine.fidelity() - reference.fidelity).abs() < 1e-12, "f={f} t={t}");
            assert!((engine.fidelity() - trig_f).abs() < 1e-9, "f={f} t={t}");
            assert!((closed_form_fidelity(t, f, 1.0).unwrap() - trig_f).abs() < 1e-12);
            let p = engine.outcome_probability(Outcome::ACCEPT_0101);
            assert!((p - reference.p0101).abs() < 1e-13);
            assert!((p - trig_p).abs() < 1e-12);
            assert!((closed_form_outcome_probability(t, f, 1.0).unwrap() - trig_p).abs() < 1e-13);
        }
    }
}

#[test]
fn general_closed_form_at_operational_time() {
    let t = PI / 6.0;
    for a in 0..=10 {
        for b in 0..=10 {
            let (f, fp) = (a as f64 / 10.0, b as f64 / 10.0);
            let engine = run_round(&RoundInput::werner(f, fp, t, 1.0).unwrap()).unwrap();
            let reference = common::round(f, &common::werner(fp), 1.0, t);
            let closed = closed_form_general(f, fp).unwrap();
            assert!((engine.fidelity() - closed.fidelity).abs() < 1e-9, "f={f} f'={fp}");
            assert!((reference.fidelity - closed.fidelity).abs() < 1e-12);
            assert!((engine.success_probability - closed.success_probability()).abs() < 1e-9);
            assert!((reference.p0101 - closed.outcome_probability).abs() < 1e-13);
        }
    }
}

#[test]
fn higher_operational_times_agree() {
    for n in 1..4u32 {
        for j in [1.0, -0.5, 2.0] {
            let t = PI * (n as f64 + 0.5) / (3.0 * f64::abs(j));
            let engine = run_round(&RoundInput::werner(0.7, 0.8, t, j).unwrap()).unwrap();
            let closed = closed_form_general(0.7, 0.8).unwrap();
            assert!((engine.fidelity() - closed.fidelity).abs() < 1e-9);
        }
    }
}

#[test]
fn threshold_at_one_half_is_exact() {
    let h = Rational::new(1, 2);
    assert_eq!(closed_form_general(h, h).unwrap().fidelity, h);
}

#[test]
fn map_improves_below_fixed_point_only_above_threshold() {
    for f in [0.55, 0.7, 0.85, 0.95] {
        let x = xypurify::fixed_point(f).unwrap();
        for k in 1..20 {
            let fp = 0.5 + (x - 0.5) * k as f64 / 20.0;
            assert!(closed_form_general(f, fp).unwrap().fidelity > fp);
        }
        let above = x + (1.0 - x) / 2.0;
        assert!(closed_form_general(f, above).unwrap().fidelity < above);
    }
    for f in [0.3, 0.45, 0.5] {
        assert!(closed_form_general(f, f).unwrap().fidelity <= f + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn werner_inputs_stay_bell_diagonal(f in 0.0f64..=1.0, fp in 0.0f64..=1.0, jt in 0.0f64..(2.0 * PI)) {
        let r = run_round(&RoundInput::werner(f, fp, jt, 1.0).unwrap()).unwrap();
        prop_assert!(r.werner_deviation < 1e-10);
    }

    #[test]
    fn readout_patterns_are_symmetric(f in 0.0f64..=1.0, w in bell_weights(), jt in 0.0f64..(2.0 * PI)) {
        let stat = bell_diagonal(w, STATIONARY_PAIR).unwrap();
        let r = run_round(&RoundInput::new(f, stat, jt, 1.0).unwrap()).unwrap();
        let a = r.outcome_probability(Outcome::ACCEPT_0101);
        let b = r.outcome_probability(Outcome::ACCEPT_1010);
        prop_assert!((a - b).abs() < 1e-12);
        let reference = common::round(f, &common::bell_diagonal(w), 1.0, jt);
        prop_assert!((a - reference.p0101).abs() < 1e-12);
        prop_assert!((r.fidelity() - reference.fidelity).abs() < 1e-10);
        let total: f64 = r.outcome_probabilities.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn restoration_returns_initial_state(
        w1 in bell_weights(),
        w2 in bell_weights(),
        w3 in bell_weights(),
        elapsed in 0.0f64..10.0,
        j in prop_oneof![-2.0f64..-0.2, 0.2f64..2.0],
    ) {
        let rho = bell_diagonal(w1, (1, 4)).unwrap()
            .tensor(&bell_diagonal(w2, (2, 5)).unwrap()).unwrap()
            .tensor(&bell_diagonal(w3, (3, 6)).unwrap()).unwrap()
            .reorder(&[1, 2, 3, 4, 5, 6]).unwrap();
        let h = xypurify::build_xy(j).unwrap();
        let evolved = xypurify::evolve_composite(&h, elapsed).apply(&rho).unwrap();
        let m = restoration_periods(elapsed, j);
        let back = restore(&evolved, elapsed, j, m).unwrap();
        prop_assert!(back.trace_distance(&rho).unwrap() < 1e-10);
    }
}

#[test]
fn restoration_rejects_short_periods() {
    let rho = xypurify::state::DensityMatrix::maximally_mixed(vec![1, 2, 3, 4, 5, 6]).unwrap();
    assert!(restore(&rho, 4.0, 1.0, 1).is_err());
    assert!(restore(&rho, 3.0, 1.0, 1).is_ok());
}
