use thiserror::Error;

use crate::asymptotics::FinitenessReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A size guard tripped. `hint` suggests a way forward.
    #[error("resource limit exceeded: {what} (limit {limit}, reached {reached}){}", hint_suffix(.hint))]
    Resource {
        what: String,
        limit: usize,
        reached: usize,
        hint: Option<String>,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The requested coefficient is infinite (or not known to be finite).
    #[error("refused: {reason}")]
    Refused {
        reason: String,
        report: Box<FinitenessReport>,
    },

    #[error("insufficient data: {0}")]
    Insufficient(String),
}

fn hint_suffix(hint: &Option<String>) -> String {
    match hint {
        Some(h) => format!("; {h}"),
        None => String::new(),
    }
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
