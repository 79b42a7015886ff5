//! Adaptive Dormand–Prince 5(4) integrator for complex linear systems.

use nalgebra::{Complex, ComplexField};

use crate::error::{Error, Result};
use crate::num::{cr, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    /// First trial step; `None` picks one from the window length.
    pub initial_step: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        Self {
            rtol: T::lit(1e-10),
            atol: T::lit(1e-12),
            initial_step: None,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OdeSolution<T: Real> {
    /// Accepted step end points, including the start.
    pub times: Vec<T>,
    pub states: Vec<Vec<Complex<T>>>,
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [&[f64]; 7] = [
    &[],
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
    &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y′ = f(t, y)` from `t0` to `t1 > t0`.
pub fn dormand_prince<T, F>(mut f: F, t0: T, t1: T, y0: &[Complex<T>], opts: &OdeOptions<T>) -> Result<OdeSolution<T>>
where
    T: Real,
    F: FnMut(T, &[Complex<T>], &mut [Complex<T>]),
{
    if !(t1 > t0) {
        return Err(Error::domain(format!("integration window [{t0}, {t1}] is empty")));
    }
    if !(opts.rtol > T::zero() && opts.atol > T::zero()) {
        return Err(Error::domain("integrator tolerances must be positive"));
    }
    let n = y0.len();
    let a: Vec<Vec<T>> = A.iter().map(|row| row.iter().map(|&x| T::lit(x)).collect()).collect();
    let c: Vec<T> = C.iter().map(|&x| T::lit(x)).collect();
    let e: Vec<T> = E.iter().map(|&x| T::lit(x)).collect();
    let span = t1 - t0;
    let tiny = T::default_epsilon() * T::lit(16.0);

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<Complex<T>>> = vec![vec![cr(T::zero()); n]; 7];
    f(t, &y, &mut k[0]);
    let mut h = opts.initial_step.unwrap_or(span * T::lit(1e-3)).min(span);
    let mut stage = vec![cr(T::zero()); n];
    let mut y_new = vec![cr(T::zero()); n];
    let mut sol = OdeSolution {
        times: vec![t],
        states: vec![y.clone()],
        accepted: 0,
        rejected: 0,
    };
    let mut last_rejected = false;

    while t < t1 {
        if sol.accepted + sol.rejected >= opts.max_steps {
            return Err(Error::Stiffness {
                t: t.to_f64_lossy(),
                step: h.to_f64_lossy(),
            });
        }
        if h < tiny * t.abs().max(span) {
            return Err(Error::Stiffness {
                t: t.to_f64_lossy(),
                step: h.to_f64_lossy(),
            });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, &aj) in a[s].iter().enumerate() {
                    acc += k[j][i] * cr(h * aj);
                }
                stage[i] = acc;
            }
            f(t + c[s] * h, &stage, &mut k[s]);
        }
        // The seventh stage was evaluated at the fifth-order solution (FSAL).
        y_new.copy_from_slice(&stage);
        let mut err_sq = T::zero();
        for i in 0..n {
            let mut err = cr(T::zero());
            for (s, &es) in e.iter().enumerate() {
                err += k[s][i] * cr(h * es);
            }
            let scale = opts.atol + opts.rtol * y[i].modulus().max(y_new[i].modulus());
            let r = err.modulus() / scale;
            err_sq += r * r;
        }
        let err = (err_sq / T::from_usize(n.max(1)).unwrap()).sqrt();
        if err <= T::one() {
            t = if last { t1 } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            sol.times.push(t);
            sol.states.push(y.clone());
            sol.accepted += 1;
            let mut factor = if err == T::zero() {
                T::lit(5.0)
            } else {
                (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0))
            };
            if last_rejected {
                factor = factor.min(T::one());
            }
            h *= factor.max(T::lit(0.2));
            last_rejected = false;
        } else {
            sol.rejected += 1;
            h *= (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2));
            last_rejected = true;
        }
    }
    Ok(sol)
}
