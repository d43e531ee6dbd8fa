use thiserror::Error;

/// Errors raised by parsing, evaluation, and the derived-algebra
/// constructions. Outcomes that the caller is expected to handle as a
/// verdict (cap exhaustion, undecided searches) are modelled as enum
/// results on the operations themselves; `Error` is reserved for inputs
/// that violate a precondition.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown operation symbol '{0}'")]
    UnknownSymbol(String),

    #[error("symbol '{symbol}' has arity {arity} but was applied to {given} arguments")]
    ArityMismatch {
        symbol: String,
        arity: usize,
        given: usize,
    },

    #[error("variable x{index} out of range: only {bound} values are available")]
    VariableOutOfRange { index: usize, bound: usize },

    #[error("element {value} out of range for a universe of size {size}")]
    ElementOutOfRange { value: usize, size: usize },

    #[error("universe size mismatch: {0} vs {1}")]
    UniverseMismatch(usize, usize),

    #[error("incompatible signatures: {0}")]
    SignatureMismatch(String),

    #[error("{what} requires {needed} but the cap is {cap}")]
    CapExceeded {
        what: String,
        needed: String,
        cap: usize,
    },

    #[error("not a congruence: {0}")]
    NotCongruence(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn cap(what: impl Into<String>, needed: impl ToString, cap: usize) -> Self {
        Error::CapExceeded {
            what: what.into(),
            needed: needed.to_string(),
            cap,
        }
    }

    /// True for outcomes that report resource exhaustion rather than a
    /// malformed input.
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}
