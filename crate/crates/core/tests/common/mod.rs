//! Brute-force reference used by the integration tests. It shares no code with the
//! library: the ring propagator comes from the closed-form exponential of the
//! triangle adjacency matrix, states are plain 64×64 matrices.
#![allow(dead_code)]

use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;

pub type C = Complex<f64>;
pub type M = DMatrix<C>;

const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Φ⁺, Φ⁻, Ψ⁺, Ψ⁻ in the `|00⟩, |01⟩, |10⟩, |11⟩` basis.
pub const BELL: [[f64; 4]; 4] = [[S, 0.0, 0.0, S], [S, 0.0, 0.0, -S], [0.0, S, S, 0.0], [0.0, S, -S, 0.0]];

pub fn bell_diagonal(w: [f64; 4]) -> M {
    let mut m = M::zeros(4, 4);
    for (k, v) in BELL.iter().enumerate() {
        for r in 0..4 {
            for c in 0..4 {
                m[(r, c)] += C::new(w[k] * v[r] * v[c], 0.0);
            }
        }
    }
    m
}

pub fn werner(f: f64) -> M {
    let o = (1.0 - f) / 3.0;
    bell_diagonal([f, o, o, o])
}

pub fn phi_plus_overlap(m: &M) -> f64 {
    let v = BELL[0];
    let mut acc = C::new(0.0, 0.0);
    for r in 0..4 {
        for c in 0..4 {
            acc += m[(r, c)] * v[r] * v[c];
        }
    }
    acc.re
}

/// Bell-basis matrix `⟨B_i|ρ|B_j⟩`.
pub fn bell_matrix(m: &M) -> M {
    M::from_fn(4, 4, |i, j| {
        let mut acc = C::new(0.0, 0.0);
        for r in 0..4 {
            for c in 0..4 {
                acc += m[(r, c)] * BELL[i][r] * BELL[j][c];
            }
        }
        acc
    })
}

pub fn kron(a: &M, b: &M) -> M {
    a.kronecker(b)
}

/// Ring propagator for `H = J Σ_{i≠j} (σ⁺ᵢσ⁻ⱼ + σ⁺ⱼσ⁻ᵢ)`: each bond hops with
/// amplitude 2J, so in both one- and two-excitation sectors `H = 2J(E − I)` with
/// `E` the all-ones matrix, and `exp(−iθ(E − I)) = e^{iθ}(I + (e^{−3iθ} − 1)/3 E)`.
pub fn triplet_propagator(j: f64, t: f64) -> M {
    let theta = 2.0 * j * t;
    let a = C::from_polar(1.0, theta);
    let b = a * (C::from_polar(1.0, -3.0 * theta) - C::new(1.0, 0.0)) / 3.0;
    let mut u = M::zeros(8, 8);
    u[(0, 0)] = C::new(1.0, 0.0);
    u[(7, 7)] = C::new(1.0, 0.0);
    for sector in [[4usize, 2, 1], [3, 5, 6]] {
        for (r, &ir) in sector.iter().enumerate() {
            for (c, &ic) in sector.iter().enumerate() {
                u[(ir, ic)] = b + if r == c { a } else { C::new(0.0, 0.0) };
            }
        }
    }
    u
}

/// Reorders a state given on qubits `from` (first entry = most significant bit)
/// into the order `to`.
pub fn permute(rho: &M, from: &[usize], to: &[usize]) -> M {
    let n = from.len();
    let map = |i: usize| -> usize {
        let mut j = 0;
        for (pos, slot) in to.iter().enumerate() {
            let bit = (i >> (n - 1 - pos)) & 1;
            let src = from.iter().position(|s| s == slot).unwrap();
            j |= bit << (n - 1 - src);
        }
        j
    };
    let dim = 1 << n;
    M::from_fn(dim, dim, |r, c| rho[(map(r), map(c))])
}

pub struct OracleRound {
    /// Accepted weight of the readouts 0101 and 1010.
    pub p0101: f64,
    pub p1010: f64,
    pub fidelity: f64,
    /// Unnormalized accepted stationary block on (3, 6).
    pub block: M,
}

/// Canonical six-qubit state `W_f(1,4) ⊗ W_f(2,5) ⊗ σ(3,6)` on slots 1..6.
pub fn initial_state(f: f64, stationary: &M) -> M {
    let w = werner(f);
    let rho = kron(&kron(&w, &w), stationary);
    permute(&rho, &[1, 4, 2, 5, 3, 6], &[1, 2, 3, 4, 5, 6])
}

pub fn evolve(rho: &M, j: f64, t: f64) -> M {
    let u3 = triplet_propagator(j, t);
    let u = kron(&u3, &u3);
    &u * rho * u.adjoint()
}

fn block(rho: &M, b: [usize; 4]) -> M {
    let idx = |x3: usize, x6: usize| (b[0] << 5) | (b[1] << 4) | (x3 << 3) | (b[2] << 2) | (b[3] << 1) | x6;
    M::from_fn(4, 4, |r, c| rho[(idx(r >> 1, r & 1), idx(c >> 1, c & 1))])
}

pub fn round(f: f64, stationary: &M, j: f64, t: f64) -> OracleRound {
    let rho = evolve(&initial_state(f, stationary), j, t);
    let a = block(&rho, [0, 1, 0, 1]);
    let b = block(&rho, [1, 0, 1, 0]);
    let p0101 = a.trace().re;
    let p1010 = b.trace().re;
    let kept = a + b;
    let fidelity = phi_plus_overlap(&kept) / (p0101 + p1010);
    OracleRound {
        p0101,
        p1010,
        fidelity,
        block: kept,
    }
}

/// Single-argument trigonometric form of the one-round fidelity and of the
/// probability of one accepted readout, for `f′ = f`.
pub fn trig_form(t: f64, f: f64, j: f64) -> (f64, f64) {
    let c6 = (6.0 * j * t).cos();
    let c12 = (12.0 * j * t).cos();
    let num = f - 38.0 * f * f - 8.0 + 8.0 * (1.0 - 5.0 * f + 4.0 * f * f) * c6 - 12.0 * f * (4.0 * f - 1.0) * c12;
    let den = 34.0 * f - 32.0 * f * f - 47.0 + 16.0 * (1.0 - 5.0 * f + 4.0 * f * f) * c6
        - 4.0 * (2.0 * f + 8.0 * f * f - 1.0) * c12;
    (num / den, (1.0 + 2.0 * f) * (-den) / 972.0)
}

/// Random Bell-diagonal weights.
pub fn bell_weights() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(0.01f64..1.0).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.map(|x| x / s)
    })
}

pub fn max_abs_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
