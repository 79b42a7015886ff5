//! Single-excitation dynamics of an atomic triplet in a detuned cavity.
//!
//! Full model, amplitudes of `|000;1⟩, |e00;0⟩, |0e0;0⟩, |00e;0⟩`:
//!
//! ```text
//! i ċ₀ = −Δ c₀ + i Σ_k g_k c_k,     ċ_k = −g_k c₀
//! ```
//!
//! After eliminating the photon (`ċ₀ ≈ 0`): `i ċ_k = Σ_j g_k g_j c_j / Δ`.

use nalgebra::{Complex, ComplexField, Matrix3};
use serde::Serialize;

use super::geometry::{c12, CavityGeometry, TimeWindow};
use super::ode::{dormand_prince, OdeOptions, OdeSolution};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::num::{cr, cx, Real};

/// Tail mass above which the asymptotic integrals are considered truncated.
pub const MAX_TAIL_MASS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeState<T> {
    pub t: T,
    /// `c₀` (photon), then `c₁, c₂, c₃` (atom excited).
    pub c: [Complex<T>; 4],
}

impl<T: Real> AmplitudeState<T> {
    /// Atom `k ∈ {1, 2, 3}` excited, cavity empty.
    pub fn atom(k: u8) -> Result<Self> {
        if !(1..=3).contains(&k) {
            return Err(Error::domain(format!("atom {k} is not one of 1, 2, 3")));
        }
        let mut c = [cr(T::zero()); 4];
        c[k as usize] = cr(T::one());
        Ok(Self { t: T::zero(), c })
    }

    pub fn norm_sqr(&self) -> T {
        self.c.iter().fold(T::zero(), |acc, z| acc + z.modulus_squared())
    }

    /// Cavity population `|c₀|²`.
    pub fn leakage(&self) -> T {
        self.c[0].modulus_squared()
    }

    pub fn atomic(&self) -> [Complex<T>; 3] {
        [self.c[1], self.c[2], self.c[3]]
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    /// One sample per accepted integrator step.
    pub samples: Vec<AmplitudeState<T>>,
    /// Full model: largest sampled `|c₀|²`. Effective model: largest adiabatic
    /// estimate `|Σ_j g_j c_j / Δ|²` of the eliminated photon amplitude.
    pub max_leakage: T,
    /// Largest `|‖c(t)‖² − ‖c(t_a)‖²|` along the trajectory.
    pub norm_drift: T,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &AmplitudeState<T> {
        self.samples.last().expect("trajectory has at least the initial sample")
    }
}

fn check_initial<T: Real>(initial: &AmplitudeState<T>) -> Result<()> {
    let dev = (initial.norm_sqr() - T::one()).abs();
    if !(dev <= T::lit(1e-10).max(T::default_epsilon() * T::lit(64.0))) {
        return Err(Error::domain(format!(
            "initial amplitudes have norm² {}",
            initial.norm_sqr()
        )));
    }
    Ok(())
}

fn norm_drift<T: Real>(states: &[Vec<Complex<T>>]) -> T {
    let n0: T = states[0].iter().fold(T::zero(), |a, z| a + z.modulus_squared());
    states
        .iter()
        .map(|s| (s.iter().fold(T::zero(), |a, z| a + z.modulus_squared()) - n0).abs())
        .fold(T::zero(), |a, b| a.max(b))
}

pub fn integrate_full<T: Real>(
    geom: &CavityGeometry<T>,
    initial: &AmplitudeState<T>,
    window: &TimeWindow<T>,
) -> Result<Trajectory<T>> {
    integrate_full_with(geom, initial, window, &OdeOptions::default())
}

/// `initial.t` is ignored; integration starts at `window.start`.
pub fn integrate_full_with<T: Real>(
    geom: &CavityGeometry<T>,
    initial: &AmplitudeState<T>,
    window: &TimeWindow<T>,
    opts: &OdeOptions<T>,
) -> Result<Trajectory<T>> {
    geom.validate()?;
    check_initial(initial)?;
    let delta = geom.delta;
    let rhs = |t: T, c: &[Complex<T>], dc: &mut [Complex<T>]| {
        let g = geom.couplings(t);
        // ċ₀ = iΔ c₀ + Σ g_k c_k
        dc[0] = c[0] * cx(T::zero(), delta) + c[1] * cr(g[0]) + c[2] * cr(g[1]) + c[3] * cr(g[2]);
        for k in 0..3 {
            dc[k + 1] = -c[0] * cr(g[k]);
        }
    };
    let sol = dormand_prince(rhs, window.start, window.end, &initial.c, opts)?;
    let samples = to_samples(&sol, |s| [s[0], s[1], s[2], s[3]]);
    let max_leakage = samples.iter().map(|s| s.leakage()).fold(T::zero(), |a, b| a.max(b));
    Ok(Trajectory {
        max_leakage,
        norm_drift: norm_drift(&sol.states),
        accepted_steps: sol.accepted,
        rejected_steps: sol.rejected,
        samples,
    })
}

fn to_samples<T: Real>(sol: &OdeSolution<T>, f: impl Fn(&[Complex<T>]) -> [Complex<T>; 4]) -> Vec<AmplitudeState<T>> {
    sol.times
        .iter()
        .zip(&sol.states)
        .map(|(&t, s)| AmplitudeState { t, c: f(s) })
        .collect()
}

pub fn integrate_effective<T: Real>(
    geom: &CavityGeometry<T>,
    initial: &AmplitudeState<T>,
    window: &TimeWindow<T>,
) -> Result<Trajectory<T>> {
    integrate_effective_with(geom, initial, window, &OdeOptions::default())
}

/// Samples carry `c₀ = 0`; only the atomic amplitudes are evolved.
pub fn integrate_effective_with<T: Real>(
    geom: &CavityGeometry<T>,
    initial: &AmplitudeState<T>,
    window: &TimeWindow<T>,
    opts: &OdeOptions<T>,
) -> Result<Trajectory<T>> {
    geom.validate()?;
    check_initial(initial)?;
    if initial.leakage() > T::zero() {
        return Err(Error::domain("effective dynamics starts with an empty cavity"));
    }
    let delta = geom.delta;
    let rhs = |t: T, c: &[Complex<T>], dc: &mut [Complex<T>]| {
        let g = geom.couplings(t);
        let s = c[0] * cr(g[0]) + c[1] * cr(g[1]) + c[2] * cr(g[2]);
        // ċ_k = −i g_k (g·c)/Δ
        for k in 0..3 {
            dc[k] = s * cx(T::zero(), -g[k] / delta);
        }
    };
    let sol = dormand_prince(rhs, window.start, window.end, &initial.atomic(), opts)?;
    let zero = cr(T::zero());
    let samples = to_samples(&sol, |s| [zero, s[0], s[1], s[2]]);
    let max_leakage = sol
        .times
        .iter()
        .zip(&sol.states)
        .map(|(&t, s)| {
            let g = geom.couplings(t);
            ((s[0] * cr(g[0]) + s[1] * cr(g[1]) + s[2] * cr(g[2])) * cr(T::one() / delta)).modulus_squared()
        })
        .fold(T::zero(), |a, b| a.max(b));
    Ok(Trajectory {
        max_leakage,
        norm_drift: norm_drift(&sol.states),
        accepted_steps: sol.accepted,
        rejected_steps: sol.rejected,
        samples,
    })
}

/// `H̃(t)`: exchange part of the effective Hamiltonian in the single-excitation
/// sector, each bond `g_i g_j / Δ` once.
pub fn exchange_hamiltonian<T: Real>(geom: &CavityGeometry<T>, t: T) -> Matrix3<T> {
    let g = geom.couplings(t);
    Matrix3::from_fn(|i, j| if i == j { T::zero() } else { g[i] * g[j] / geom.delta })
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticHamiltonian<T> {
    /// `g0² e^{−ℓ²/w²} / Δ = g²/Δ`.
    pub prefactor: T,
    /// `t′ = √π w / v`.
    pub t_prime: T,
    /// Closed-form `C_ij` (zero diagonal).
    pub c: [[T; 3]; 3],
    /// `∫ g_i g_j dt / (g² t′)` over the window.
    pub c_numeric: [[T; 3]; 3],
    /// Largest relative deviation between the two tables.
    pub max_relative_error: T,
    /// Bound on the envelope mass outside the window.
    pub tail: T,
    #[serde(skip)]
    pub h_inf: CMatrix<T>,
}

pub fn asymptotic_hamiltonian<T: Real>(geom: &CavityGeometry<T>) -> Result<AsymptoticHamiltonian<T>> {
    asymptotic_hamiltonian_in(geom, &geom.default_window())
}

pub fn asymptotic_hamiltonian_in<T: Real>(
    geom: &CavityGeometry<T>,
    window: &TimeWindow<T>,
) -> Result<AsymptoticHamiltonian<T>> {
    geom.validate()?;
    let tail = geom.tail_mass(window);
    if tail > T::lit(MAX_TAIL_MASS) {
        return Err(Error::Truncation {
            tail: tail.to_f64_lossy(),
        });
    }
    let g = geom.mean_coupling();
    let g2 = g * g;
    let t_prime = geom.interaction_time();
    let c_12 = c12(geom.ell, geom.d, geom.w);
    let mut c = [[T::one(); 3]; 3];
    for (i, row) in c.iter_mut().enumerate() {
        row[i] = T::zero();
    }
    c[0][1] = c_12;
    c[1][0] = c_12;

    let integrals = simpson(window, |t| {
        let g = geom.couplings(t);
        [g[0] * g[1], g[0] * g[2], g[1] * g[2]]
    });
    let mut c_numeric = [[T::zero(); 3]; 3];
    for (k, &(i, j)) in [(0usize, 1usize), (0, 2), (1, 2)].iter().enumerate() {
        let value = integrals[k] / (g2 * t_prime);
        c_numeric[i][j] = value;
        c_numeric[j][i] = value;
    }
    let mut max_relative_error = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                max_relative_error = max_relative_error.max(((c_numeric[i][j] - c[i][j]) / c[i][j]).abs());
            }
        }
    }
    let prefactor = g2 / geom.delta;
    let h_inf = CMatrix::from_fn(3, 3, |i, j| cr(prefactor * c[i][j]));
    Ok(AsymptoticHamiltonian {
        prefactor,
        t_prime,
        c,
        c_numeric,
        max_relative_error,
        tail,
        h_inf,
    })
}

/// Composite Simpson rule for three integrands at once.
fn simpson<T: Real>(window: &TimeWindow<T>, f: impl Fn(T) -> [T; 3]) -> [T; 3] {
    const INTERVALS: usize = 20_000;
    let h = window.duration() / T::from_usize(INTERVALS).unwrap();
    let mut acc = [T::zero(); 3];
    for k in 0..=INTERVALS {
        let weight = if k == 0 || k == INTERVALS {
            T::one()
        } else if k % 2 == 1 {
            T::lit(4.0)
        } else {
            T::lit(2.0)
        };
        let y = f(window.start + h * T::from_usize(k).unwrap());
        for i in 0..3 {
            acc[i] += weight * y[i];
        }
    }
    acc.map(|a| a * h / T::lit(3.0))
}

/// `H_M = (g²/Δ)(I + A)` restricted to the single-excitation sector, `C₁₂ = 1`.
pub fn mean_hamiltonian_sector<T: Real>(geom: &CavityGeometry<T>) -> CMatrix<T> {
    let j = geom.exchange_rate();
    CMatrix::from_element(3, 3, cr(j))
}

/// `exp(−i H t)` applied to a single-excitation vector.
pub fn evolve_sector<T: Real>(h: &CMatrix<T>, t: T, c: &[Complex<T>; 3]) -> [Complex<T>; 3] {
    let u = linalg::unitary_evolution(h, t);
    let v = nalgebra::DVector::from_column_slice(c);
    let out = u * v;
    [out[0], out[1], out[2]]
}

pub fn sector_distance<T: Real>(a: &[Complex<T>; 3], b: &[Complex<T>; 3]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + (*x - *y).modulus_squared())
        .sqrt()
}
