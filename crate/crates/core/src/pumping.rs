//! Entanglement pumping: the stationary pair is purified again and again with
//! fresh conveyed pairs of fidelity `f`.
//!
//! `F₀ = f`, `F_k = F(T, f, F_{k−1})`. The final gain is `F̂(f,n) = F_n − f` and the
//! per-round growth `F̄(f,n) = F̂(f,n) − F̂(f,n−1) = F_n − F_{n−1}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::closed_form_general;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::purification::{operational_time, run_round, RoundInput, STATIONARY_PAIR};
use crate::state::{werner, DensityMatrix};

/// Growth below which a round counts as saturated.
pub const DEFAULT_SATURATION_THRESHOLD: f64 = 0.005;
/// Default distance to the fixed point used by [`optimal_rounds`].
pub const DEFAULT_EPSILON: f64 = 1e-3;

const MAX_ROUNDS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpMode {
    /// Iterate the rational map on the fidelity alone.
    ClosedForm,
    /// Carry the full stationary density matrix through [`run_round`].
    Simulation,
    /// Conventional bilateral-CNOT pumping, see [`crate::cnot::scheme_c_pump`].
    SchemeC,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpSettings<T> {
    /// XY coupling used in simulation mode.
    pub coupling: T,
    /// Index `n` of the operational time `T = π(n + ½)/(3|J|)`.
    pub time_index: u32,
    pub epsilon: T,
    pub saturation_threshold: T,
    /// Simulation mode only: replace the stored pair by the Werner state of equal
    /// fidelity before every round. Without it the stored pair stays Bell-diagonal
    /// but its three non-`Φ⁺` weights separate from the second round on, and the
    /// scalar map (which assumes a Werner input) no longer describes it exactly.
    pub twirl: bool,
}

impl<T: Real> Default for PumpSettings<T> {
    fn default() -> Self {
        Self {
            coupling: T::one(),
            time_index: 0,
            epsilon: T::lit(DEFAULT_EPSILON),
            saturation_threshold: T::lit(DEFAULT_SATURATION_THRESHOLD),
            twirl: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PumpRound<T> {
    pub n: usize,
    /// `F_n`
    pub fidelity: T,
    /// `F̄(f,n) = F_n − F_{n−1}`
    pub delta: T,
    /// Acceptance probability of this round (either readout pattern).
    pub success_probability: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PumpTrace<T> {
    pub f: T,
    pub mode: PumpMode,
    pub rounds: Vec<PumpRound<T>>,
    pub fixed_point: T,
    pub n_optimal: usize,
}

impl<T: Real> PumpTrace<T> {
    /// `F_0, F_1, …, F_n`.
    pub fn fidelities(&self) -> Vec<T> {
        std::iter::once(self.f)
            .chain(self.rounds.iter().map(|r| r.fidelity))
            .collect()
    }

    pub fn final_fidelity(&self) -> T {
        self.rounds.last().map_or(self.f, |r| r.fidelity)
    }

    /// `F̂(f,n)`; `n = 0` gives zero.
    pub fn gain(&self, n: usize) -> Option<T> {
        if n == 0 {
            return Some(T::zero());
        }
        self.rounds.get(n - 1).map(|r| r.fidelity - self.f)
    }

    /// `F̄(f,n)` for `n ≥ 1`.
    pub fn growth(&self, n: usize) -> Option<T> {
        n.checked_sub(1).and_then(|i| self.rounds.get(i)).map(|r| r.delta)
    }

    /// First round from which every recorded growth stays below `threshold`.
    pub fn saturation_round(&self, threshold: T) -> Option<usize> {
        let last_big = self.rounds.iter().rposition(|r| r.delta >= threshold);
        match last_big {
            None => Some(1),
            Some(i) if i + 1 < self.rounds.len() => Some(i + 2),
            Some(_) => None,
        }
    }
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

/// `n` pumping rounds with default settings.
pub fn pump<T: Real>(f: T, n: usize, mode: PumpMode) -> Result<PumpTrace<T>> {
    pump_with(f, n, mode, &PumpSettings::default())
}

pub fn pump_with<T: Real>(f: T, n: usize, mode: PumpMode, settings: &PumpSettings<T>) -> Result<PumpTrace<T>> {
    check_pump_domain(f)?;
    if n == 0 {
        return Err(Error::domain("pumping needs at least one round"));
    }
    if mode == PumpMode::SchemeC {
        return crate::cnot::scheme_c_pump(f, n);
    }
    let mut rounds = Vec::with_capacity(n);
    let mut previous = f;
    match mode {
        PumpMode::ClosedForm => {
            for k in 1..=n {
                let step = closed_form_general(f, previous)?;
                let success_probability = step.success_probability();
                rounds.push(PumpRound {
                    n: k,
                    fidelity: step.fidelity,
                    delta: step.fidelity - previous,
                    success_probability,
                });
                previous = step.fidelity;
            }
        }
        PumpMode::Simulation => {
            let t0 = operational_time(settings.coupling, settings.time_index)?.time;
            let mut stationary: DensityMatrix<T> = werner(f, STATIONARY_PAIR)?;
            for k in 1..=n {
                let result = run_round(&RoundInput::new(f, stationary, t0, settings.coupling)?)?;
                let fidelity = result.fidelity();
                rounds.push(PumpRound {
                    n: k,
                    fidelity,
                    delta: fidelity - previous,
                    success_probability: result.success_probability,
                });
                previous = fidelity;
                stationary = if settings.twirl {
                    werner(fidelity, STATIONARY_PAIR)?
                } else {
                    result.post_state
                };
            }
        }
        PumpMode::SchemeC => unreachable!("handled above"),
    }
    Ok(PumpTrace {
        f,
        mode,
        rounds,
        fixed_point: fixed_point(f)?,
        n_optimal: optimal_rounds(f, settings.epsilon)?,
    })
}

/// Solves `F(T, f, x) = x` on `[1/2, 1]` by bisection.
pub fn fixed_point<T: Real>(f: T) -> Result<T> {
    if !(f >= T::lit(0.5) && f <= T::one()) {
        return Err(Error::domain(format!("fidelity {f} outside [1/2, 1]")));
    }
    let g = |x: T| -> Result<T> { Ok(closed_form_general(f, x)?.fidelity - x) };
    let tol = T::lit(1e-12).max(T::default_epsilon() * T::lit(8.0));
    let (mut lo, mut hi) = (T::lit(0.5), T::one());
    let (g_lo, g_hi) = (g(lo)?, g(hi)?);
    if g_lo.abs() <= tol {
        return Ok(lo);
    }
    if g_hi.abs() <= tol {
        return Ok(hi);
    }
    if g_lo.is_sign_negative() == g_hi.is_sign_negative() {
        return Err(Error::Analysis(format!("no fixed point in [1/2, 1] for f = {f}")));
    }
    let lo_negative = g_lo.is_sign_negative();
    for _ in 0..200 {
        if hi - lo < tol {
            break;
        }
        let mid = (lo + hi) * T::lit(0.5);
        let gm = g(mid)?;
        if gm == T::zero() {
            return Ok(mid);
        }
        if gm.is_sign_negative() == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::lit(0.5))
}

/// Smallest `n` with `x* − F_n < epsilon` along the closed-form pump sequence.
pub fn optimal_rounds<T: Real>(f: T, epsilon: T) -> Result<usize> {
    if !(epsilon > T::zero()) {
        return Err(Error::domain(format!("epsilon {epsilon} must be positive")));
    }
    let target = fixed_point(f)?;
    let mut current = f;
    for n in 0..MAX_ROUNDS {
        if target - current < epsilon {
            return Ok(n);
        }
        current = closed_form_general(f, current)?.fidelity;
    }
    Err(Error::Analysis(format!(
        "pump sequence for f = {f} did not come within {epsilon} of {target}"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Figure6Row<T> {
    pub f: T,
    pub n: usize,
    /// `F_n`
    pub final_fidelity: T,
    /// `F̂(f,n)`
    pub gain: T,
    /// `F̄(f,n)`
    pub growth: T,
    pub success_probability: T,
    pub fixed_point: T,
}

/// Rows `(f, n)` for every grid point and `n = 1..=n_max`, ordered by `f` then `n`.
pub fn figure6_data<T: Real>(f_grid: &[T], n_max: usize) -> Result<Vec<Figure6Row<T>>> {
    let traces: Vec<PumpTrace<T>> = f_grid
        .par_iter()
        .map(|&f| pump(f, n_max, PumpMode::ClosedForm))
        .collect::<Result<_>>()?;
    Ok(traces
        .iter()
        .flat_map(|trace| {
            trace.rounds.iter().map(move |r| Figure6Row {
                f: trace.f,
                n: r.n,
                final_fidelity: r.fidelity,
                gain: r.fidelity - trace.f,
                growth: r.delta,
                success_probability: r.success_probability,
                fixed_point: trace.fixed_point,
            })
        })
        .collect())
}

/// Grid point with the largest `F̄(f,n)` and that value.
pub fn peak_growth<T: Real>(f_grid: &[T], n: usize) -> Result<(T, T)> {
    let mut best: Option<(T, T)> = None;
    for &f in f_grid {
        let growth = pump(f, n, PumpMode::ClosedForm)?.growth(n).expect("n rounds recorded");
        if best.is_none_or(|(_, g)| growth > g) {
            best = Some((f, growth));
        }
    }
    best.ok_or_else(|| Error::domain("empty fidelity grid"))
}

/// `f = 0.55, 0.60, …, 0.95`.
pub fn default_f_grid<T: Real>() -> Vec<T> {
    (11..=19).map(|k| T::lit(k as f64 * 0.05)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_round_is_closed_form() {
        let trace = pump(0.75f64, 1, PumpMode::ClosedForm).unwrap();
        assert!((trace.final_fidelity() - 42.625 / 51.5).abs() < 1e-14);
        assert!((trace.rounds[0].success_probability - 2.0 * 128.75 / 972.0).abs() < 1e-14);
    }

    #[test]
    fn perfect_pairs_stay_perfect() {
        for mode in [PumpMode::ClosedForm, PumpMode::Simulation] {
            let trace = pump(1.0f64, 4, mode).unwrap();
            assert!(trace.rounds.iter().all(|r| (r.fidelity - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn exact_state_leaves_werner_family() {
        let exact = pump(0.8f64, 4, PumpMode::Simulation).unwrap();
        let scalar = pump(0.8f64, 4, PumpMode::ClosedForm).unwrap();
        for n in 1..=2 {
            assert!((exact.rounds[n - 1].fidelity - scalar.rounds[n - 1].fidelity).abs() < 1e-12);
        }
        assert!(exact.rounds[2].fidelity - scalar.rounds[2].fidelity > 5e-4);
        let twirled = PumpSettings {
            twirl: true,
            ..PumpSettings::default()
        };
        let t = pump_with(0.8f64, 4, PumpMode::Simulation, &twirled).unwrap();
        for (a, b) in t.rounds.iter().zip(&scalar.rounds) {
            assert!((a.fidelity - b.fidelity).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_points() {
        assert_eq!(fixed_point(1.0f64).unwrap(), 1.0);
        assert_eq!(fixed_point(0.5f64).unwrap(), 0.5);
        let x = fixed_point(0.75f64).unwrap();
        let image = closed_form_general(0.75, x).unwrap().fidelity;
        assert!((image - x).abs() < 1e-12);
        assert!((x - 0.880_647_030_2).abs() < 1e-9);
        assert!(fixed_point(0.4f64).is_err());
    }

    #[test]
    fn optimal_round_counts() {
        assert_eq!(optimal_rounds(0.75f64, 0.005).unwrap(), 4);
        let x = fixed_point(0.75f64).unwrap();
        assert_eq!(optimal_rounds(0.75, x - 0.75 + 1e-9).unwrap(), 0);
        assert_eq!(optimal_rounds(1.0f64, 0.1).unwrap(), 0);
        assert!(optimal_rounds(0.75f64, 0.0).is_err());
    }

    #[test]
    fn below_threshold_rejected() {
        assert!(matches!(
            pump(0.5f64, 3, PumpMode::ClosedForm),
            Err(Error::BelowThreshold { .. })
        ));
        assert!(pump(0.75f64, 0, PumpMode::ClosedForm).is_err());
    }

    #[test]
    fn saturation_round_detection() {
        let trace = pump(0.75f64, 10, PumpMode::ClosedForm).unwrap();
        let n = trace.saturation_round(0.005).unwrap();
        assert!(trace.growth(n - 1).unwrap() >= 0.005);
        assert!((n..=10).all(|k| trace.growth(k).unwrap() < 0.005));
    }

    #[test]
    fn figure6_rows() {
        let grid = default_f_grid::<f64>();
        let rows = figure6_data(&grid, 4).unwrap();
        assert_eq!(rows.len(), grid.len() * 4);
        for r in rows.iter().filter(|r| r.n == 1) {
            let one = closed_form_general(r.f, r.f).unwrap().fidelity - r.f;
            assert!((r.gain - one).abs() < 1e-15);
        }
    }
}
