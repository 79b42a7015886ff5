use xypurify::closed_form::closed_form_general;
use xypurify::montecarlo::{expected_history, run_trials_audit, run_trials_on};
use xypurify::{run_trials, Error, ProtocolConfig};

#[test]
fn identical_across_worker_counts() {
    let mut c = ProtocolConfig::with_rounds(0.75, 4);
    c.trials = 5000;
    c.seed = 99;
    c.p_inconclusive = 0.15;
    let one = run_trials_on(&c, 1).unwrap();
    let many = run_trials_on(&c, 6).unwrap();
    assert_eq!(one.per_trial, many.per_trial);
    assert_eq!(one, many);
    let json_one = serde_json::to_string(&one).unwrap();
    assert_eq!(json_one, serde_json::to_string(&many).unwrap());
    c.seed = 100;
    assert_ne!(run_trials_on(&c, 2).unwrap().per_trial, one.per_trial);
}

#[test]
fn first_round_frequency_within_three_sigma() {
    for (f, fp, p_inc) in [
        (0.6, 0.6, 0.0),
        (0.7, 0.7, 0.1),
        (0.75, 0.75, 0.0),
        (0.85, 0.85, 0.3),
        (0.95, 0.95, 0.05),
    ] {
        let mut c = ProtocolConfig::with_rounds(f, 1);
        c.trials = 100_000;
        c.seed = 5;
        c.p_inconclusive = p_inc;
        let s = run_trials(&c).unwrap();
        let expected = closed_form_general(f, fp).unwrap().success_probability() * (1.0 - p_inc);
        let attempts: u64 = s.per_trial.iter().map(|t| t.rounds_attempted).sum();
        let freq = c.trials as f64 / attempts as f64;
        let sigma = (expected * (1.0 - expected) / attempts as f64).sqrt();
        assert!(
            (freq - expected).abs() < 3.0 * sigma,
            "f={f}: {freq} vs {expected} (sigma {sigma})"
        );
        assert_eq!(s.rounds.len(), 1);
        assert!((s.rounds[0].frequency - freq).abs() < 1e-15);
    }
}

#[test]
fn bookkeeping_is_exact() {
    let mut c = ProtocolConfig::with_rounds(0.8, 5);
    c.trials = 500;
    c.p_inconclusive = 0.2;
    c.seed = 3;
    let expected = expected_history(0.8, 5).unwrap();
    for s in run_trials(&c).unwrap().per_trial {
        assert_eq!(s.fidelity_history, expected);
        assert_eq!(s.messages_exchanged, 2 * s.rounds_attempted);
        assert_eq!(s.attempts_per_round.iter().sum::<u64>(), s.rounds_attempted);
        assert_eq!(s.rounds_succeeded, 5);
        assert_eq!(s.pairs_consumed, s.rounds_attempted);
        assert!(s.inconclusive <= s.rounds_attempted - s.rounds_succeeded);
    }
}

#[test]
fn target_fidelity_resolves_round_count() {
    let c = ProtocolConfig::with_target_fidelity(0.75, 0.87);
    let plan = c.plan().unwrap();
    let history = expected_history(0.75, plan.required_successes as usize).unwrap();
    assert!(*history.last().unwrap() >= 0.87);
    assert!(history[history.len() - 2] < 0.87);
    let bad = ProtocolConfig::with_target_fidelity(0.75, 0.9);
    match bad.plan() {
        Err(Error::Config(m)) => assert!(m.contains("0.8806")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn audit_path_agrees_for_two_rounds() {
    let mut c = ProtocolConfig::with_rounds(0.75, 2);
    c.trials = 200;
    c.seed = 21;
    c.p_inconclusive = 0.1;
    let fast = run_trials(&c).unwrap();
    let audit = run_trials_audit(&c).unwrap();
    for (a, b) in fast.per_trial.iter().zip(&audit.per_trial) {
        assert_eq!(a.attempts_per_round, b.attempts_per_round);
        for (x, y) in a.fidelity_history.iter().zip(&b.fidelity_history) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn config_round_trips_and_rejects_unknown_fields() {
    let text = r#"{"schema_version": 1, "f": 0.75, "target_rounds": 3, "seed": 4}"#;
    let c = ProtocolConfig::from_json(text).unwrap();
    let again = ProtocolConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(c, again);
    assert!(ProtocolConfig::from_json(r#"{"schema_version": 1, "f": 0.75, "target_rounds": 3, "sed": 4}"#).is_err());
    assert!(ProtocolConfig::from_json(r#"{"schema_version": 1, "f": 0.75}"#)
        .and_then(|c| c.plan())
        .is_err());
}
