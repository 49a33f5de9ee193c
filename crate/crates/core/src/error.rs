use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A distribution or queue parameter is outside its domain.
    #[error("invalid parameter `{field}` = {value}: {reason}")]
    InvalidParameter {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A function was evaluated outside the region where it is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Simulation or search settings are inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// The objective produced a non-finite value during a search.
    #[error("non-finite objective {value} at eps_i = {eps_i}, eps_b = {eps_b}")]
    NonFinite { eps_i: f64, eps_b: f64, value: f64 },

    /// The quadrature oracle did not reach its tolerance.
    #[error("quadrature did not converge: achieved relative change {achieved:e}")]
    Quadrature { achieved: f64 },

    /// A textual specification could not be parsed.
    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },
}

pub(crate) fn positive(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            field,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}

pub(crate) fn non_negative(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            field,
            value,
            reason: "must be finite and non-negative",
        })
    }
}
