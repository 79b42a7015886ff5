//! Conveyor-belt geometry and the Gaussian atom–cavity couplings.
//!
//! Units: `ħ = 1`; callers usually set `g0 = w = 1`, so times are in `1/g0`,
//! lengths in `w` and velocities in `w·g0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::Real;

/// Default adiabaticity requirement `|Δ| ≥ 20·g0`.
pub const DEFAULT_RATIO_MIN: f64 = 20.0;
/// Default integration margin: conveyed atoms run from `−5w` to `+5w`.
pub const DEFAULT_MARGIN_WAISTS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Atom {
    /// Leading conveyed atom.
    Conveyed1,
    /// Trailing conveyed atom.
    Conveyed2,
    /// Atom held at offset `ℓ` from the cavity axis.
    Stationary,
}

impl Atom {
    pub const ALL: [Atom; 3] = [Atom::Conveyed1, Atom::Conveyed2, Atom::Stationary];

    /// Atoms are numbered 1, 2, 3.
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Atom::Conveyed1),
            2 => Ok(Atom::Conveyed2),
            3 => Ok(Atom::Stationary),
            _ => Err(Error::domain(format!("atom {n} is not one of 1, 2, 3"))),
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn index(self) -> usize {
        match self {
            Atom::Conveyed1 => 0,
            Atom::Conveyed2 => 1,
            Atom::Stationary => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityGeometry<T> {
    /// Vacuum Rabi frequency.
    pub g0: T,
    /// Waist of the cavity mode.
    pub w: T,
    /// Offset of the stationary atom.
    pub ell: T,
    /// Spacing of the conveyed pair.
    pub d: T,
    pub v: T,
    /// Detuning `(ω_E − ω₀) − ω`.
    pub delta: T,
    /// Positions of the conveyed atoms at `t = 0`.
    pub z0: [T; 2],
    /// Bare frequencies, bookkeeping only: the dynamics depends on `delta` alone.
    pub omega: T,
    pub omega0: T,
    pub omega_e: T,
    pub ratio_min: T,
}

impl<T: Real> CavityGeometry<T> {
    /// Pair centered on the axis at `t = 0` (`z⁰ = ±d/2`).
    pub fn new(g0: T, w: T, ell: T, d: T, v: T, delta: T) -> Result<Self> {
        let half = d * T::lit(0.5);
        let geom = Self {
            g0,
            w,
            ell,
            d,
            v,
            delta,
            z0: [half, -half],
            omega: T::zero(),
            omega0: T::zero(),
            omega_e: delta,
            ratio_min: T::lit(DEFAULT_RATIO_MIN),
        };
        geom.validate()?;
        Ok(geom)
    }

    /// `g0 = w = 1` with `d` chosen so that `C₁₂ = 1`.
    pub fn solved(delta: T, ell: T, v: T) -> Result<Self> {
        let d = solve_geometry(ell, T::one())?;
        Self::new(T::one(), T::one(), ell, d, v, delta)
    }

    /// Sets the bare frequencies and the detuning they imply.
    pub fn with_frequencies(mut self, omega: T, omega0: T, omega_e: T) -> Result<Self> {
        self.omega = omega;
        self.omega0 = omega0;
        self.omega_e = omega_e;
        self.delta = omega_e - omega0 - omega;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("g0", self.g0),
            ("w", self.w),
            ("ell", self.ell),
            ("d", self.d),
            ("v", self.v),
            ("delta", self.delta),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, x)| !x.is_finite()) {
            return Err(Error::domain(format!("{name} must be finite")));
        }
        for (name, x) in [("g0", self.g0), ("w", self.w), ("v", self.v)] {
            if !(x > T::zero()) {
                return Err(Error::domain(format!("{name} = {x} must be positive")));
            }
        }
        if self.d < T::zero() || self.ell < T::zero() {
            return Err(Error::domain("distances d and ell must be nonnegative"));
        }
        if self.delta == T::zero() {
            return Err(Error::domain("detuning must be nonzero"));
        }
        let spacing = (self.z0[0] - self.z0[1]).abs();
        if (spacing - self.d).abs() > T::lit(1e-12).max(T::default_epsilon() * T::lit(8.0)) * self.w {
            return Err(Error::Geometry(format!(
                "initial positions are {spacing} apart, expected d = {}",
                self.d
            )));
        }
        Ok(())
    }

    /// `|Δ|/g0`.
    pub fn adiabatic_ratio(&self) -> T {
        self.delta.abs() / self.g0
    }

    pub fn is_adiabatic(&self) -> bool {
        self.adiabatic_ratio() >= self.ratio_min
    }

    pub fn require_adiabatic(&self) -> Result<()> {
        if self.is_adiabatic() {
            Ok(())
        } else {
            Err(Error::NotAdiabatic {
                ratio: self.adiabatic_ratio().to_f64_lossy(),
                min: self.ratio_min.to_f64_lossy(),
            })
        }
    }

    /// `g = g0·exp(−ℓ²/2w²)`.
    pub fn mean_coupling(&self) -> T {
        self.g0 * (-(self.ell * self.ell) / (T::lit(2.0) * self.w * self.w)).exp()
    }

    /// `g²/Δ`: the exchange amplitude between two atoms in the single-excitation sector.
    pub fn exchange_rate(&self) -> T {
        let g = self.mean_coupling();
        g * g / self.delta
    }

    /// The ring coupling `J` that reproduces the exchange, `g²/(2Δ)`.
    pub fn xy_coupling(&self) -> T {
        self.exchange_rate() * T::lit(0.5)
    }

    /// `t′ = √π·w/v`.
    pub fn interaction_time(&self) -> T {
        T::pi().sqrt() * self.w / self.v
    }

    /// Position along the conveyor at time `t` (`None` for the stationary atom).
    pub fn position(&self, atom: Atom, t: T) -> Option<T> {
        match atom {
            Atom::Conveyed1 => Some(self.z0[0] + self.v * t),
            Atom::Conveyed2 => Some(self.z0[1] + self.v * t),
            Atom::Stationary => None,
        }
    }

    pub fn coupling(&self, atom: Atom, t: T) -> T {
        let x = match self.position(atom, t) {
            Some(z) => z / self.w,
            None => self.ell / self.w,
        };
        self.g0 * (-x * x).exp()
    }

    pub fn couplings(&self, t: T) -> [T; 3] {
        Atom::ALL.map(|a| self.coupling(a, t))
    }

    /// Time window over which both conveyed atoms sweep `[−m·w, m·w]`.
    pub fn window(&self, margin_waists: T) -> Result<TimeWindow<T>> {
        if !(margin_waists > T::zero()) {
            return Err(Error::domain("window margin must be positive"));
        }
        let reach = margin_waists * self.w;
        let starts = self.z0.map(|z| (-reach - z) / self.v);
        let ends = self.z0.map(|z| (reach - z) / self.v);
        Ok(TimeWindow {
            start: starts[0].min(starts[1]),
            end: ends[0].max(ends[1]),
        })
    }

    pub fn default_window(&self) -> TimeWindow<T> {
        self.window(T::lit(DEFAULT_MARGIN_WAISTS)).expect("positive margin")
    }

    /// Largest fraction of any coupling-product integral `∫ g_i g_j dt` (i ≠ j)
    /// that falls outside `window` (an upper bound).
    pub fn tail_mass(&self, window: &TimeWindow<T>) -> T {
        let scale = self.w / self.v;
        let centers = self.z0.map(|z| -z / self.v);
        let mid = (centers[0] + centers[1]) * T::lit(0.5);
        // (center, width) of the three Gaussians in t.
        let profiles = [
            (centers[0], scale),
            (centers[1], scale),
            (mid, scale / T::lit(2.0).sqrt()),
        ];
        profiles
            .iter()
            .map(|&(c, s)| gaussian_tail((c - window.start) / s) + gaussian_tail((window.end - c) / s))
            .fold(T::zero(), |a, b| a.max(b))
            .min(T::one())
    }
}

/// Bound on `∫_x^∞ e^{−u²} du / √π` (at most 1).
fn gaussian_tail<T: Real>(x: T) -> T {
    if x <= T::one() {
        return T::one();
    }
    ((-x * x).exp() / (T::lit(2.0) * x * T::pi().sqrt())).min(T::one())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeWindow<T> {
    pub start: T,
    pub end: T,
}

impl<T: Real> TimeWindow<T> {
    pub fn new(start: T, end: T) -> Result<Self> {
        if !(end > start) {
            return Err(Error::domain(format!("window [{start}, {end}] is empty")));
        }
        Ok(Self { start, end })
    }

    pub fn duration(&self) -> T {
        self.end - self.start
    }
}

/// `d = √(2ℓ² − w² ln 2)`, the spacing that makes `C₁₂ = 1`.
pub fn solve_geometry<T: Real>(ell: T, w: T) -> Result<T> {
    if !(w > T::zero()) || !(ell >= T::zero()) {
        return Err(Error::domain("need w > 0 and ell >= 0"));
    }
    let radicand = T::lit(2.0) * ell * ell - w * w * T::lit(2.0).ln();
    let slack = T::default_epsilon() * T::lit(16.0) * w * w;
    if radicand < -slack {
        let bound = w * (T::lit(2.0).ln() / T::lit(2.0)).sqrt();
        return Err(Error::Geometry(format!(
            "ell = {ell} is infeasible: C12 = 1 needs ell >= w*sqrt(ln 2 / 2) = {bound}"
        )));
    }
    Ok(radicand.max(T::zero()).sqrt())
}

/// `C₁₂ = exp[(2ℓ² − d²)/(2w²)]/√2`.
pub fn c12<T: Real>(ell: T, d: T, w: T) -> T {
    ((T::lit(2.0) * ell * ell - d * d) / (T::lit(2.0) * w * w)).exp() / T::lit(2.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_profile() {
        let g = CavityGeometry::new(1.0f64, 1.0, 1.0, 1.0, 1.0, 50.0).unwrap();
        assert!((g.coupling(Atom::Conveyed1, -0.5) - 1.0).abs() < 1e-15);
        assert!((g.coupling(Atom::Conveyed1, 0.5) - (-1.0f64).exp()).abs() < 1e-15);
        for t in [-3.0, 0.0, 7.0] {
            assert_eq!(g.coupling(Atom::Stationary, t), (-1.0f64).exp());
        }
    }

    #[test]
    fn solved_spacings() {
        let ln2 = 2.0f64.ln();
        assert!((solve_geometry(1.0f64, 1.0).unwrap() - (2.0 - ln2).sqrt()).abs() < 1e-15);
        assert!((solve_geometry(1.0f64, 1.0).unwrap() - 1.1432).abs() < 1e-4);
        assert!((solve_geometry(2.0f64, 1.0).unwrap() - 2.7031).abs() < 1e-4);
        assert!(solve_geometry((ln2 / 2.0).sqrt(), 1.0).unwrap() < 1e-7);
        assert!(matches!(solve_geometry(0.5f64, 1.0), Err(Error::Geometry(_))));
        assert!((c12(0.0f64, 0.0, 1.0) - 1.0 / 2.0f64.sqrt()).abs() < 1e-15);
        let d = solve_geometry(1.3f64, 1.0).unwrap();
        assert!((c12(1.3, d, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn default_window_covers_both_atoms() {
        let g = CavityGeometry::solved(50.0f64, 1.0, 1.0).unwrap();
        let win = g.default_window();
        for atom in [Atom::Conveyed1, Atom::Conveyed2] {
            assert!(g.position(atom, win.start).unwrap() <= -5.0 + 1e-12);
            assert!(g.position(atom, win.end).unwrap() >= 5.0 - 1e-12);
        }
        assert!(g.tail_mass(&win) < 1e-10);
        assert!(g.tail_mass(&g.window(1.0).unwrap()) > 1e-8);
    }

    #[test]
    fn adiabatic_flag() {
        let g = CavityGeometry::solved(10.0f64, 1.0, 1.0).unwrap();
        assert!(matches!(g.require_adiabatic(), Err(Error::NotAdiabatic { .. })));
        assert!(CavityGeometry::solved(-50.0f64, 1.0, 1.0).unwrap().is_adiabatic());
        assert!(CavityGeometry::new(1.0f64, 1.0, 1.0, 1.0, 0.0, 50.0).is_err());
    }

    #[test]
    fn frequency_bookkeeping() {
        let g = CavityGeometry::solved(50.0f64, 1.0, 1.0)
            .unwrap()
            .with_frequencies(1000.0, 10.0, 1060.0)
            .unwrap();
        assert_eq!(g.delta, 50.0);
    }
}
