//! Closed-form fidelity and success-probability maps of one XY purification round.
//!
//! These are independent of the density-matrix engine in [`crate::purification`]
//! and serve as its oracle. The rational maps at the operational time are generic
//! over [`Field`], so they can be evaluated exactly in [`crate::Rational`].
//!
//! Probability convention: the expressions give the weight of *one* accepted
//! outcome (`0101` or, equally, `1010` over slots 1, 2, 4, 5). A round succeeds on
//! either, so the acceptance probability of a round is twice that value; see
//! [`ClosedForm::success_probability`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::{Field, Real};

/// Fidelity and outcome probability after one successful round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm<T> {
    pub fidelity: T,
    /// Probability of a single accepted outcome pattern.
    pub outcome_probability: T,
}

impl<T: Field> ClosedForm<T> {
    /// Probability that the round is accepted (either pattern).
    pub fn success_probability(&self) -> T {
        self.outcome_probability.clone() + self.outcome_probability.clone()
    }
}

fn check_unit<T: Field>(name: &str, x: &T) -> Result<()> {
    if *x < T::zero() || *x > T::one() {
        return Err(Error::domain(format!("{name} = {x:?} outside [0,1]")));
    }
    Ok(())
}

/// `F(T, f, f′)` and `P(T, f, f′)` at the operational time `J T = π/3 (n + 1/2)`.
pub fn closed_form_general<T: Field>(f: T, f_prime: T) -> Result<ClosedForm<T>> {
    check_unit("f", &f)?;
    check_unit("f'", &f_prime)?;
    let i = T::int;
    let f2 = f.clone() * f.clone();
    let numerator = f_prime.clone() * (i(12) * f.clone() + i(236) * f2.clone() - i(5)) - i(16) * (f.clone() - i(1));
    let denominator =
        i(59) + (i(12) - i(64) * f_prime.clone()) * f.clone() - i(4) * (i(5) - i(64) * f_prime.clone()) * f2.clone();
    let probability_numerator = i(59) + (i(12) - i(64) * f_prime.clone()) * f + i(4) * (i(64) * f_prime - i(5)) * f2;
    Ok(ClosedForm {
        fidelity: numerator / denominator,
        outcome_probability: probability_numerator / i(972),
    })
}

/// `F̃(T, f)` and `P̃(T, f)` written in their reduced single-argument form.
pub fn closed_form_at_operational_time<T: Field>(f: T) -> Result<ClosedForm<T>> {
    check_unit("f", &f)?;
    let i = T::int;
    let f2 = f.clone() * f.clone();
    let f3 = f2.clone() * f.clone();
    Ok(ClosedForm {
        fidelity: (i(16) - i(53) * f.clone() + i(118) * f2.clone())
            / (i(59) - i(106) * f.clone() + i(128) * f2.clone()),
        outcome_probability: (i(59) + i(12) * f - i(84) * f2 + i(256) * f3) / i(972),
    })
}

struct TrigTerms<T> {
    numerator: T,
    denominator: T,
}

fn trig_terms<T: Real>(t0: T, f: T, coupling: T) -> TrigTerms<T> {
    let l = T::lit;
    let c6 = (l(6.0) * coupling * t0).cos();
    let c12 = (l(12.0) * coupling * t0).cos();
    let q = l(1.0) - l(5.0) * f + l(4.0) * f * f;
    let numerator = f - l(38.0) * f * f - l(8.0) + l(8.0) * q * c6 - l(12.0) * f * (l(4.0) * f - l(1.0)) * c12;
    let denominator = l(34.0) * f - l(32.0) * f * f - l(47.0) + l(16.0) * q * c6
        - l(4.0) * (l(2.0) * f + l(8.0) * f * f - l(1.0)) * c12;
    TrigTerms { numerator, denominator }
}

/// `F̃(t₀, f) = F(t₀, f, f)` for arbitrary evolution time.
pub fn closed_form_fidelity<T: Real>(t0: T, f: T, coupling: T) -> Result<T> {
    check_unit("f", &f)?;
    let terms = trig_terms(t0, f, coupling);
    if terms.denominator.abs() < T::lit(1e-12) {
        return Err(Error::SingularExpression {
            denominator: terms.denominator.to_f64_lossy(),
        });
    }
    Ok(terms.numerator / terms.denominator)
}

/// `P̃(t₀, f)`: probability of one accepted outcome pattern at arbitrary time.
pub fn closed_form_outcome_probability<T: Real>(t0: T, f: T, coupling: T) -> Result<T> {
    check_unit("f", &f)?;
    let terms = trig_terms(t0, f, coupling);
    Ok(-(T::one() + T::lit(2.0) * f) * terms.denominator / T::lit(972.0))
}
