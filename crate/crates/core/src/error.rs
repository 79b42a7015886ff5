use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("label error: {0}")]
    Label(String),

    #[error("matrix is not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("degenerate coupling: J must be nonzero")]
    DegenerateCoupling,

    #[error("post-selection branch has vanishing probability ({probability:e})")]
    ZeroProbability { probability: f64 },

    #[error("closed-form expression is singular (denominator {denominator:e})")]
    SingularExpression { denominator: f64 },

    #[error("restoration would need a negative duration: m*pi/J = {period} < elapsed = {elapsed}")]
    NegativeDuration { period: f64, elapsed: f64 },

    #[error("fidelity {f} is at or below the purification threshold 1/2")]
    BelowThreshold { f: f64 },

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error(
        "detuning |Delta|/g0 = {ratio} violates the adiabatic condition (a rather large \
         detuning, |Delta| >= {min}*g0); pass force to override"
    )]
    NotAdiabatic { ratio: f64, min: f64 },

    #[error(
        "step size underflow at t = {t} (h = {step:e}); the system is too stiff for the \
         requested tolerance, reduce |Delta|/g0 or loosen the tolerance"
    )]
    Stiffness { t: f64, step: f64 },

    #[error("integration window truncates the coupling envelope (tail mass {tail:e})")]
    Truncation { tail: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Numeric failures (as opposed to rejected inputs).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::ZeroProbability { .. }
                | Error::SingularExpression { .. }
                | Error::Stiffness { .. }
                | Error::Truncation { .. }
                | Error::Analysis(_)
        )
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn shape(expected: impl ToString, found: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
