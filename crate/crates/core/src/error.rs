use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Every examined candidate fell inside the avoided set.
    #[error("no candidate outside the avoided set: {0}")]
    NoCandidate(String),

    #[error("promise violated: {0}")]
    PromiseViolated(String),

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("enumeration budget exceeded: visited more than {budget} nodes")]
    Budget { budget: u64 },

    #[error("sieve consumed all pairs before reaching the target radius after {rounds} rounds")]
    Undersampled { rounds: usize },

    #[error("rejection sampling exceeded {attempts} attempts")]
    SamplingBudget { attempts: u64 },

    #[error("vector is not in the lattice")]
    NotInLattice,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Failures that describe the instance rather than the caller's usage.
    pub fn is_solver_outcome(&self) -> bool {
        matches!(
            self,
            Error::NoCandidate(_) | Error::PromiseViolated(_) | Error::Infeasible(_)
        )
    }
}
