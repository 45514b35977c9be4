use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// The parameters are valid but do not satisfy the interference-limited,
    /// equal-distance assumptions the closed forms rely on.
    #[error("analytic precondition violated: {0}")]
    Precondition(String),

    #[error("{method} did not converge: {detail}")]
    NoConvergence {
        method: &'static str,
        detail: String,
    },

    /// A physical quantity over- or underflowed f64.
    #[error("numeric overflow: {0}")]
    Overflow(String),
}

pub(crate) fn check_domain(
    name: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<()> {
    if ok && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected,
        })
    }
}
