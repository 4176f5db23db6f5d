use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// `s2 > s1`, which the MSE inequality rules out.
    #[error("model assumption violated: s2 = {s2} exceeds s1 = {s1}, so b2^2 + s2^2 <= s1^2 cannot hold")]
    MseViolation { s1: f64, s2: f64 },

    /// The convex combination has zero variance.
    #[error("degenerate combination: {0}")]
    Degenerate(String),

    /// A solver or estimator failed to produce a usable number.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub(crate) fn check_level(level: f64) -> Result<()> {
    if level.is_finite() && level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "confidence level must lie in (0, 1), got {level}"
        )))
    }
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && (-1.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "correlation must lie in [-1, 1], got {rho}"
        )))
    }
}

pub(crate) fn check_weight(w: f64) -> Result<()> {
    if w.is_finite() && (0.0..=1.0).contains(&w) {
        Ok(())
    } else {
        Err(Error::domain(format!("weight must lie in [0, 1], got {w}")))
    }
}

/// Checks `s1 > 0` and `0 <= s2 <= s1`.
pub(crate) fn check_std_errors(s1: f64, s2: f64) -> Result<()> {
    if !(s1.is_finite() && s1 > 0.0) {
        return Err(Error::domain(format!(
            "s1 must be positive and finite, got {s1}"
        )));
    }
    if !(s2.is_finite() && s2 >= 0.0) {
        return Err(Error::domain(format!(
            "s2 must be nonnegative and finite, got {s2}"
        )));
    }
    if s2 > s1 {
        return Err(Error::MseViolation { s1, s2 });
    }
    Ok(())
}
