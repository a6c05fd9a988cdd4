use alloc::boxed::Box;
use alloc::string::String;

use crate::rational::Rational;

/// Errors raised by the exact core.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("point {0} lies outside [0, 1]")]
    Domain(Rational),
    #[error("composition exceeds the budget of {budget} breakpoints")]
    Resource { budget: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("map `{label}` is constant on [{}, {}], so it has uncountably many preimages there", span.0, span.1)]
    FlatSegment {
        label: String,
        span: Box<(Rational, Rational)>,
    },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
