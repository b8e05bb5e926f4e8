use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid gains: {0}")]
    InvalidGains(String),

    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    #[error("allocation infeasible: {0}")]
    AllocationInfeasible(String),

    #[error("degenerate allocation on cable {cable}: |mu| = {norm:.3e}")]
    DegenerateAllocation { cable: usize, norm: f64 },

    #[error("degenerate attitude: {0}")]
    DegenerateAttitude(String),

    #[error("certification failed: {0}")]
    CertificationFailed(String),

    #[error("numerical blow-up at step {step} (t = {time:.6})")]
    NumericalBlowup { step: usize, time: f64 },
}

impl Error {
    /// True for failures that arise while integrating (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalBlowup { .. }
                | Error::SingularConfiguration(_)
                | Error::DegenerateAllocation { .. }
                | Error::DegenerateAttitude(_)
                | Error::AllocationInfeasible(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
