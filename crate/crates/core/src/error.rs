use crate::circuits::Violation;

/// Errors raised across the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("capacity exceeded: {what} needs {needed}, limit is {limit}")]
    Capacity { what: String, needed: u128, limit: u128 },
    #[error("operator is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("register error: {0}")]
    Register(String),
    #[error("outcome {outcome} has vanishing probability {probability:.3e}")]
    VanishingOutcome { outcome: usize, probability: f64 },
    #[error("entry not decoupled from the rest of the register: {0}")]
    NotDecoupled(String),
    #[error("gate is not Clifford: {0}")]
    NonClifford(String),
    #[error("tensor is not normal: {0}")]
    NotNormal(String),
    #[error("branch cap {0} exceeded")]
    BranchCap(usize),
    #[error("circuit invalid: {}", fmt_violations(.0))]
    Circuit(Vec<Violation>),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn fmt_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
