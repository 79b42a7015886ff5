//! Agreement between the microscopic cavity dynamics and the XY ring.
//!
//! For each single-excitation initial state four endpoints are compared:
//! (a) full Jaynes–Cummings integration, (b) adiabatically eliminated dynamics,
//! (c) constant mean Hamiltonian `H_M` for `t′`, (d) the ring `H_I` with coupling
//! `g²/(2Δ)` for `t′` followed by the frame phase `L(t′) = exp(−i (g²/Δ) t′ N)`.

use nalgebra::{Complex, Matrix3};
use rayon::prelude::*;
use serde::Serialize;

use super::dynamics::{
    asymptotic_hamiltonian, evolve_sector, exchange_hamiltonian, integrate_effective_with, integrate_full_with,
    mean_hamiltonian_sector, sector_distance, AmplitudeState,
};
use super::geometry::{c12, CavityGeometry, TimeWindow};
use super::ode::OdeOptions;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::xy::{build_xy, frame_correction};

/// Triplet basis indices of `|e00⟩, |0e0⟩, |00e⟩` (atom 1 is the high bit).
const SINGLE_EXCITATION: [usize; 3] = [4, 2, 1];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementOptions<T> {
    /// Run even when `|Δ| < ratio_min·g0`.
    pub force: bool,
    pub ode: OdeOptions<T>,
    pub window: Option<TimeWindow<T>>,
    /// Time samples for the commutator scan.
    pub commutator_samples: usize,
    /// Grid points for the second-order Magnus estimate.
    pub magnus_samples: usize,
}

impl<T: Real> Default for AgreementOptions<T> {
    fn default() -> Self {
        Self {
            force: false,
            ode: OdeOptions::default(),
            window: None,
            commutator_samples: 41,
            magnus_samples: 2000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StateAgreement<T> {
    /// Initially excited atom (1, 2 or 3).
    pub atom: u8,
    pub full_vs_effective: T,
    pub full_vs_mean: T,
    pub effective_vs_mean: T,
    pub mean_vs_xy: T,
    pub max_leakage: T,
    /// `4 (g0/Δ)²`
    pub leakage_bound: T,
    pub full_norm_drift: T,
    pub effective_norm_drift: T,
    pub full_steps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AgreementReport<T> {
    pub geometry: CavityGeometry<T>,
    pub window: TimeWindow<T>,
    pub adiabatic: bool,
    pub mean_coupling: T,
    /// `g²/Δ`
    pub exchange_rate: T,
    /// Ring coupling `J = g²/(2Δ)`.
    pub xy_coupling: T,
    pub t_prime: T,
    /// `(g²/Δ)·t′`, the exchange phase accumulated in one transit.
    pub exchange_phase: T,
    pub c12: T,
    pub c_analytic: [[T; 3]; 3],
    pub c_numeric: [[T; 3]; 3],
    pub c_max_relative_error: T,
    /// `max ‖[H̃(t₁), H̃(t₂)]‖ / max ‖H̃(t)‖²` over sampled pairs.
    pub commutator_ratio: T,
    /// `‖Ω₁‖ = ‖∫H̃ dt‖`
    pub magnus_first_order: T,
    /// `‖Ω₂‖ = ‖½∫∫_{t₁>t₂}[H̃(t₁), H̃(t₂)]‖`
    pub magnus_second_order: T,
    pub states: Vec<StateAgreement<T>>,
}

impl<T: Real> AgreementReport<T> {
    pub fn max_full_vs_mean(&self) -> T {
        self.states
            .iter()
            .map(|s| s.full_vs_mean)
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn max_full_vs_effective(&self) -> T {
        self.states
            .iter()
            .map(|s| s.full_vs_effective)
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn max_mean_vs_xy(&self) -> T {
        self.states
            .iter()
            .map(|s| s.mean_vs_xy)
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn max_leakage(&self) -> T {
        self.states
            .iter()
            .map(|s| s.max_leakage)
            .fold(T::zero(), |a, b| a.max(b))
    }
}

pub fn xy_agreement<T: Real>(geom: &CavityGeometry<T>) -> Result<AgreementReport<T>> {
    xy_agreement_with(geom, &AgreementOptions::default())
}

pub fn xy_agreement_with<T: Real>(geom: &CavityGeometry<T>, opts: &AgreementOptions<T>) -> Result<AgreementReport<T>> {
    geom.validate()?;
    if !opts.force {
        geom.require_adiabatic()?;
    } else if !geom.is_adiabatic() {
        log::warn!(
            "running outside the adiabatic regime: |Delta|/g0 = {} < {}",
            geom.adiabatic_ratio(),
            geom.ratio_min
        );
    }
    let c_12 = c12(geom.ell, geom.d, geom.w);
    if (c_12 - T::one()).abs() > T::lit(1e-9).max(T::default_epsilon() * T::lit(64.0)) {
        return Err(Error::Geometry(format!(
            "geometry is not solved for C12 = 1 (C12 = {c_12}); use solve_geometry for d"
        )));
    }
    let window = opts.window.unwrap_or_else(|| geom.default_window());
    let asymptotic = asymptotic_hamiltonian(geom)?;
    let t_prime = geom.interaction_time();
    let h_mean = mean_hamiltonian_sector(geom);

    let ring = build_xy(geom.xy_coupling())?;
    let u_ring = frame_correction(geom.exchange_rate(), t_prime) * ring.evolve(t_prime).matrix();

    let states = (1..=3u8)
        .into_par_iter()
        .map(|atom| -> Result<StateAgreement<T>> {
            let initial = AmplitudeState::atom(atom)?;
            let full = integrate_full_with(geom, &initial, &window, &opts.ode)?;
            let effective = integrate_effective_with(geom, &initial, &window, &opts.ode)?;
            let a = full.last().atomic();
            let b = effective.last().atomic();
            let c = evolve_sector(&h_mean, t_prime, &initial.atomic());
            let col = SINGLE_EXCITATION[atom as usize - 1];
            let d: [Complex<T>; 3] = SINGLE_EXCITATION.map(|row| u_ring[(row, col)]);
            Ok(StateAgreement {
                atom,
                full_vs_effective: sector_distance(&a, &b),
                full_vs_mean: sector_distance(&a, &c),
                effective_vs_mean: sector_distance(&b, &c),
                mean_vs_xy: sector_distance(&c, &d),
                max_leakage: full.max_leakage,
                leakage_bound: T::lit(4.0) * (geom.g0 / geom.delta).powi(2),
                full_norm_drift: full.norm_drift,
                effective_norm_drift: effective.norm_drift,
                full_steps: full.accepted_steps,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (commutator_ratio, magnus_first_order, magnus_second_order) = commutator_scan(geom, &window, opts);
    Ok(AgreementReport {
        geometry: *geom,
        window,
        adiabatic: geom.is_adiabatic(),
        mean_coupling: geom.mean_coupling(),
        exchange_rate: geom.exchange_rate(),
        xy_coupling: geom.xy_coupling(),
        t_prime,
        exchange_phase: geom.exchange_rate() * t_prime,
        c12: c_12,
        c_analytic: asymptotic.c,
        c_numeric: asymptotic.c_numeric,
        c_max_relative_error: asymptotic.max_relative_error,
        commutator_ratio,
        magnus_first_order,
        magnus_second_order,
        states,
    })
}

fn commutator_scan<T: Real>(geom: &CavityGeometry<T>, window: &TimeWindow<T>, opts: &AgreementOptions<T>) -> (T, T, T) {
    let sample = |n: usize| -> Vec<Matrix3<T>> {
        let n = n.max(2);
        let step = window.duration() / T::from_usize(n - 1).unwrap();
        (0..n)
            .map(|k| exchange_hamiltonian(geom, window.start + step * T::from_usize(k).unwrap()))
            .collect()
    };
    let hs = sample(opts.commutator_samples);
    let scale = hs.iter().map(|h| h.norm_squared()).fold(T::zero(), |a, b| a.max(b));
    let mut worst = T::zero();
    for (i, a) in hs.iter().enumerate() {
        for b in &hs[i + 1..] {
            worst = worst.max((a * b - b * a).norm());
        }
    }
    let ratio = if scale > T::zero() { worst / scale } else { T::zero() };

    let grid = sample(opts.magnus_samples);
    let h = window.duration() / T::from_usize(grid.len() - 1).unwrap();
    let mut running = Matrix3::<T>::zeros();
    let mut omega2 = Matrix3::<T>::zeros();
    for m in &grid {
        omega2 += (m * running - running * m) * h;
        running += m * h;
    }
    omega2 *= T::lit(0.5);
    (ratio, running.norm(), omega2.norm())
}
