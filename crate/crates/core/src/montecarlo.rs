//! Stochastic simulation of the two-node pumping protocol.
//!
//! Every attempt conveys one fresh pair per node, runs the gate, and either keeps
//! the purified stationary pair or, after a failed or inconclusive readout, lets
//! the triplets complete a full period so the stationary pair is restored.
//! Trials draw from independent ChaCha streams keyed by `(seed, trial index)`, so
//! results do not depend on how trials are scheduled across threads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::closed_form_general;
use crate::error::{Error, Result};
use crate::pumping::{fixed_point, pump, PumpMode};
use crate::purification::{operational_time, restoration_periods, restore, RoundInput, STATIONARY_PAIR};
use crate::state::{werner, DensityMatrix};

pub const SCHEMA_VERSION: u32 = 1;

fn default_coupling() -> f64 {
    1.0
}

fn default_trials() -> u64 {
    1000
}

fn default_max_attempts() -> u64 {
    10_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub schema_version: u32,
    /// Fidelity of the fresh conveyed pairs.
    pub f: f64,
    /// Stop after this many successful rounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_rounds: Option<u32>,
    /// Stop once the stationary pair reaches this fidelity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_fidelity: Option<f64>,
    /// Probability that the non-destructive readout gives no verdict.
    #[serde(default)]
    pub p_inconclusive: f64,
    #[serde(default)]
    pub seed: u64,
    /// XY coupling `J`; times are in units of `1/J` when it is 1.
    #[serde(default = "default_coupling")]
    pub coupling: f64,
    /// Index `n` of the operational time.
    #[serde(default)]
    pub time_index: u32,
    /// Duration of one gate; defaults to the operational time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate_time: Option<f64>,
    /// Extra dwell after a failure; defaults to `mπ/|J| − T` with the smallest valid `m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restore_extra_time: Option<f64>,
    /// Classical latency added to the clock for every message.
    #[serde(default)]
    pub message_latency: f64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Per-trial safety cap on attempts.
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u64,
}

impl ProtocolConfig {
    /// Minimal config with defaults for everything but `f` and the stopping rule.
    pub fn with_rounds(f: f64, target_rounds: u32) -> Self {
        Self {
            target_rounds: Some(target_rounds),
            ..Self::base(f)
        }
    }

    pub fn with_target_fidelity(f: f64, target: f64) -> Self {
        Self {
            target_fidelity: Some(target),
            ..Self::base(f)
        }
    }

    fn base(f: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            f,
            target_rounds: None,
            target_fidelity: None,
            p_inconclusive: 0.0,
            seed: 0,
            coupling: default_coupling(),
            time_index: 0,
            gate_time: None,
            restore_extra_time: None,
            message_latency: 0.0,
            trials: default_trials(),
            max_attempts: default_max_attempts(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.plan()?;
        Ok(config)
    }

    /// Validates the config and resolves derived quantities.
    pub fn plan(&self) -> Result<ProtocolPlan> {
        let cfg = |msg: String| Err(Error::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return cfg(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if !(self.f > 0.5 && self.f <= 1.0) {
            return cfg(format!("f = {} must lie in (1/2, 1]", self.f));
        }
        if !(0.0..1.0).contains(&self.p_inconclusive) {
            return cfg(format!("p_inconclusive = {} must lie in [0, 1)", self.p_inconclusive));
        }
        if !(self.coupling.is_finite() && self.coupling != 0.0) {
            return cfg("coupling must be finite and nonzero".into());
        }
        if !(self.message_latency >= 0.0 && self.message_latency.is_finite()) {
            return cfg("message_latency must be a nonnegative number".into());
        }
        if self.max_attempts == 0 {
            return cfg("max_attempts must be positive".into());
        }
        let gate_time = match self.gate_time {
            Some(t) if !(t >= 0.0 && t.is_finite()) => return cfg(format!("gate_time = {t} is invalid")),
            Some(t) => t,
            None => operational_time(self.coupling, self.time_index)?.time,
        };
        let restore_extra_time = match self.restore_extra_time {
            Some(t) if !(t >= 0.0 && t.is_finite()) => return cfg(format!("restore_extra_time = {t} is invalid")),
            Some(t) => t,
            None => {
                let m = restoration_periods(gate_time, self.coupling);
                m as f64 * PI / self.coupling.abs() - gate_time
            }
        };
        let required_successes = match (self.target_rounds, self.target_fidelity) {
            (Some(n), None) => n,
            (None, Some(target)) => rounds_for_target(self.f, target)?,
            _ => return cfg("exactly one of target_rounds and target_fidelity must be set".into()),
        };
        Ok(ProtocolPlan {
            required_successes,
            gate_time,
            restore_extra_time,
        })
    }
}

/// Successful rounds needed to reach `target` along the pump sequence.
fn rounds_for_target(f: f64, target: f64) -> Result<u32> {
    if !(target.is_finite()) {
        return Err(Error::Config("target_fidelity must be finite".into()));
    }
    if target <= f {
        return Ok(0);
    }
    let x = fixed_point(f)?;
    if target >= x {
        return Err(Error::Config(format!(
            "target_fidelity {target} is unreachable: the pump sequence for f = {f} saturates at {x:.12}"
        )));
    }
    let mut current = f;
    let mut n = 0u32;
    while current < target {
        current = closed_form_general(f, current)?.fidelity;
        n += 1;
    }
    Ok(n)
}

/// Quantities resolved from a validated config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolPlan {
    pub required_successes: u32,
    pub gate_time: f64,
    pub restore_extra_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolStats {
    pub trial: u64,
    pub rounds_attempted: u64,
    pub rounds_succeeded: u64,
    /// Attempts discarded because the readout gave no verdict.
    pub inconclusive: u64,
    pub pairs_consumed: u64,
    pub total_time: f64,
    pub messages_exchanged: u64,
    pub final_fidelity: f64,
    /// Stationary fidelity after each successful round.
    pub fidelity_history: Vec<f64>,
    /// Attempts spent on each successful round, the success included.
    pub attempts_per_round: Vec<u64>,
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

enum Verdict {
    Inconclusive,
    Failure,
    Success,
}

/// Two draws per attempt, in a fixed order shared by the fast and audit paths.
fn draw(rng: &mut ChaCha8Rng, p_inconclusive: f64, p_success: f64) -> Verdict {
    let inconclusive = rng.random::<f64>() < p_inconclusive;
    let accepted = rng.random::<f64>() < p_success;
    match (inconclusive, accepted) {
        (true, _) => Verdict::Inconclusive,
        (false, true) => Verdict::Success,
        (false, false) => Verdict::Failure,
    }
}

struct Clock<'a> {
    config: &'a ProtocolConfig,
    plan: ProtocolPlan,
    stats: ProtocolStats,
    since_success: u64,
}

impl<'a> Clock<'a> {
    fn new(config: &'a ProtocolConfig, plan: ProtocolPlan, trial: u64) -> Self {
        Self {
            config,
            plan,
            stats: ProtocolStats {
                trial,
                rounds_attempted: 0,
                rounds_succeeded: 0,
                inconclusive: 0,
                pairs_consumed: 0,
                total_time: 0.0,
                messages_exchanged: 0,
                final_fidelity: config.f,
                fidelity_history: Vec::new(),
                attempts_per_round: Vec::new(),
            },
            since_success: 0,
        }
    }

    fn done(&self) -> bool {
        self.stats.rounds_succeeded >= u64::from(self.plan.required_successes)
    }

    fn attempt(&mut self, verdict: &Verdict) -> Result<()> {
        if self.stats.rounds_attempted >= self.config.max_attempts {
            return Err(Error::Analysis(format!(
                "trial {} exceeded {} attempts",
                self.stats.trial, self.config.max_attempts
            )));
        }
        self.since_success += 1;
        let s = &mut self.stats;
        s.rounds_attempted += 1;
        s.pairs_consumed += 1;
        s.messages_exchanged += 2;
        s.total_time += self.plan.gate_time + 2.0 * self.config.message_latency;
        match verdict {
            Verdict::Success => {
                s.rounds_succeeded += 1;
                s.attempts_per_round.push(self.since_success);
                self.since_success = 0;
            }
            Verdict::Inconclusive => {
                s.inconclusive += 1;
                s.total_time += self.plan.restore_extra_time;
            }
            Verdict::Failure => s.total_time += self.plan.restore_extra_time,
        }
        Ok(())
    }
}

/// Trial 0 of the fast path.
pub fn run_protocol(config: &ProtocolConfig) -> Result<ProtocolStats> {
    let plan = config.plan()?;
    run_trial(config, &plan, 0)
}

/// One trial driven by the closed-form round maps.
pub fn run_trial(config: &ProtocolConfig, plan: &ProtocolPlan, trial: u64) -> Result<ProtocolStats> {
    let mut rng = trial_rng(config.seed, trial);
    let mut clock = Clock::new(config, *plan, trial);
    let mut current = config.f;
    while !clock.done() {
        let step = closed_form_general(config.f, current)?;
        let verdict = draw(&mut rng, config.p_inconclusive, step.success_probability());
        clock.attempt(&verdict)?;
        if let Verdict::Success = verdict {
            current = step.fidelity;
            clock.stats.fidelity_history.push(current);
        }
    }
    clock.stats.final_fidelity = current;
    Ok(clock.stats)
}

/// One trial driven by the density-matrix engine. Failed attempts evolve the
/// unmeasured six-qubit state through [`restore`] and keep its `(3,6)` marginal.
pub fn run_trial_audit(config: &ProtocolConfig, plan: &ProtocolPlan, trial: u64) -> Result<ProtocolStats> {
    let mut rng = trial_rng(config.seed, trial);
    let mut clock = Clock::new(config, *plan, trial);
    let t0 = operational_time(config.coupling, config.time_index)?.time;
    let m = restoration_periods(t0, config.coupling);
    let mut stationary: DensityMatrix<f64> = werner(config.f, STATIONARY_PAIR)?;
    while !clock.done() {
        let input = RoundInput::new(config.f, stationary.clone(), t0, config.coupling)?;
        let evolved = input.evolved_state()?;
        let round = crate::purification::measure_round(&evolved, &input.accepted)?;
        let verdict = draw(&mut rng, config.p_inconclusive, round.success_probability);
        clock.attempt(&verdict)?;
        match verdict {
            Verdict::Success => {
                stationary = round.post_state;
                clock
                    .stats
                    .fidelity_history
                    .push(crate::state::fidelity(&stationary, STATIONARY_PAIR)?);
            }
            _ => {
                let restored = restore(&evolved, t0, config.coupling, m)?;
                stationary = restored.partial_trace(&[STATIONARY_PAIR.0, STATIONARY_PAIR.1])?;
            }
        }
    }
    clock.stats.final_fidelity = crate::state::fidelity(&stationary, STATIONARY_PAIR)?;
    Ok(clock.stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_dev: f64,
    /// 95% normal-approximation half-width of the mean.
    pub ci_half_width: f64,
}

impl Estimate {
    pub fn from_samples(xs: impl Iterator<Item = f64> + Clone) -> Self {
        let n = xs.clone().count();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std_dev: f64::NAN,
                ci_half_width: f64::NAN,
            };
        }
        let mean = xs.clone().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let std_dev = var.sqrt();
        Self {
            mean,
            std_dev,
            ci_half_width: 1.96 * std_dev / (n as f64).sqrt(),
        }
    }
}

/// Pooled acceptance statistics of the `round`-th success across trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundRate {
    pub round: u32,
    pub attempts: u64,
    pub successes: u64,
    pub frequency: f64,
    /// `P_succ(T, f, F_{round−1})·(1 − p_inconclusive)`.
    pub expected: f64,
    /// Binomial standard deviation of `frequency` at the expected rate.
    pub sigma: f64,
}

impl RoundRate {
    /// `|frequency − expected|` in units of `sigma`.
    pub fn z_score(&self) -> f64 {
        (self.frequency - self.expected).abs() / self.sigma
    }
}

fn round_rates(config: &ProtocolConfig, plan: &ProtocolPlan, per_trial: &[ProtocolStats]) -> Result<Vec<RoundRate>> {
    let mut current = config.f;
    let mut out = Vec::with_capacity(plan.required_successes as usize);
    for k in 0..plan.required_successes as usize {
        let step = closed_form_general(config.f, current)?;
        let expected = step.success_probability() * (1.0 - config.p_inconclusive);
        current = step.fidelity;
        let attempts: u64 = per_trial.iter().filter_map(|s| s.attempts_per_round.get(k)).sum();
        let successes = per_trial.iter().filter(|s| s.attempts_per_round.len() > k).count() as u64;
        if attempts == 0 {
            continue;
        }
        out.push(RoundRate {
            round: k as u32 + 1,
            attempts,
            successes,
            frequency: successes as f64 / attempts as f64,
            expected,
            sigma: (expected * (1.0 - expected) / attempts as f64).sqrt(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub config: ProtocolConfig,
    pub plan: ProtocolPlan,
    pub trials: u64,
    pub attempts: Estimate,
    pub time: Estimate,
    pub final_fidelity: Estimate,
    /// Successes over conclusive-or-not attempts, pooled over all trials.
    pub success_frequency: f64,
    pub messages_total: u64,
    pub rounds: Vec<RoundRate>,
    pub analytic: AnalyticExpectation,
    #[serde(skip)]
    pub per_trial: Vec<ProtocolStats>,
}

/// Runs `config.trials` trials on the current rayon pool.
pub fn run_trials(config: &ProtocolConfig) -> Result<MonteCarloSummary> {
    run_trials_with(config, run_trial)
}

/// Same as [`run_trials`] with a dedicated pool of `workers` threads.
pub fn run_trials_on(config: &ProtocolConfig, workers: usize) -> Result<MonteCarloSummary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} worker threads: {e}")))?;
    pool.install(|| run_trials(config))
}

/// Slow path: every attempt goes through the density-matrix engine.
pub fn run_trials_audit(config: &ProtocolConfig) -> Result<MonteCarloSummary> {
    run_trials_with(config, run_trial_audit)
}

fn run_trials_with(
    config: &ProtocolConfig,
    trial_fn: fn(&ProtocolConfig, &ProtocolPlan, u64) -> Result<ProtocolStats>,
) -> Result<MonteCarloSummary> {
    let plan = config.plan()?;
    let per_trial: Vec<ProtocolStats> = (0..config.trials)
        .into_par_iter()
        .map(|i| trial_fn(config, &plan, i))
        .collect::<Result<_>>()?;
    let attempted: u64 = per_trial.iter().map(|s| s.rounds_attempted).sum();
    let succeeded: u64 = per_trial.iter().map(|s| s.rounds_succeeded).sum();
    Ok(MonteCarloSummary {
        config: config.clone(),
        plan,
        trials: config.trials,
        attempts: Estimate::from_samples(per_trial.iter().map(|s| s.rounds_attempted as f64)),
        time: Estimate::from_samples(per_trial.iter().map(|s| s.total_time)),
        final_fidelity: Estimate::from_samples(per_trial.iter().map(|s| s.final_fidelity)),
        success_frequency: if attempted > 0 {
            succeeded as f64 / attempted as f64
        } else {
            f64::NAN
        },
        messages_total: per_trial.iter().map(|s| s.messages_exchanged).sum(),
        rounds: round_rates(config, &plan, &per_trial)?,
        analytic: expected_resources(config)?,
        per_trial,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticExpectation {
    pub attempts: f64,
    pub time: f64,
    pub final_fidelity: f64,
}

/// Geometric-waiting expectations: round `k` needs `1/p_k` attempts on average.
pub fn expected_resources(config: &ProtocolConfig) -> Result<AnalyticExpectation> {
    let plan = config.plan()?;
    let mut current = config.f;
    let mut attempts = 0.0;
    let mut time = 0.0;
    let per_attempt = plan.gate_time + 2.0 * config.message_latency;
    for _ in 0..plan.required_successes {
        let step = closed_form_general(config.f, current)?;
        let p = step.success_probability() * (1.0 - config.p_inconclusive);
        let expected = 1.0 / p;
        attempts += expected;
        time += expected * per_attempt + (expected - 1.0) * plan.restore_extra_time;
        current = step.fidelity;
    }
    Ok(AnalyticExpectation {
        attempts,
        time,
        final_fidelity: current,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResourceRow {
    pub f: f64,
    pub required_rounds: u32,
    pub pairs: Estimate,
    pub analytic_pairs: f64,
    pub time: Estimate,
    pub analytic_time: f64,
    pub achieved_fidelity: f64,
}

/// Pairs and time needed to reach `target_fidelity` for every `f` in the grid.
/// `base` supplies everything except `f` and the stopping rule.
pub fn resource_curve(f_grid: &[f64], target_fidelity: f64, base: &ProtocolConfig) -> Result<Vec<ResourceRow>> {
    f_grid
        .iter()
        .map(|&f| {
            let config = ProtocolConfig {
                f,
                target_rounds: None,
                target_fidelity: Some(target_fidelity),
                ..base.clone()
            };
            let summary = run_trials(&config)?;
            Ok(ResourceRow {
                f,
                required_rounds: summary.plan.required_successes,
                pairs: summary.attempts,
                analytic_pairs: summary.analytic.attempts,
                time: summary.time,
                analytic_time: summary.analytic.time,
                achieved_fidelity: summary.analytic.final_fidelity,
            })
        })
        .collect()
}

/// Deterministic pump values the fidelity history must follow.
pub fn expected_history(f: f64, rounds: usize) -> Result<Vec<f64>> {
    if rounds == 0 {
        return Ok(Vec::new());
    }
    Ok(pump(f, rounds, PumpMode::ClosedForm)?
        .rounds
        .iter()
        .map(|r| r.fidelity)
        .collect())
}
