use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs violate a documented precondition.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A computation would exceed its configured work budget.
    #[error("budget exceeded in {what}: need {needed}, budget {budget}")]
    Budget {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    /// The seed construction cannot fit N points at this exponent.
    #[error("N too small for p: N = {n}, p = {p}, grid N_p = {grid}, need N_p - 1 >= N - 2 = {need}")]
    Infeasible { n: u64, p: f64, grid: u64, need: u64 },

    /// A certificate or invariant check failed on computed data.
    #[error("certification failed: {0}")]
    Certification(String),

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    /// A pipeline stage failed; the partial manifest names it.
    #[error("stage {stage} failed: {source}")]
    Stage { stage: &'static str, source: Box<Error> },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Process exit code used by the CLI: 3 for budget errors, 2 for everything
    /// the caller could have fixed by changing inputs, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Budget { .. } => 3,
            Error::Stage { source, .. } => source.exit_code(),
            Error::Invalid(_)
            | Error::Infeasible { .. }
            | Error::Config(_)
            | Error::MissingArtifact(_)
            | Error::Certification(_) => 2,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
        }
    }
}

/// Fails with [`Error::Budget`] when `needed > budget`.
pub(crate) fn check_budget(what: &'static str, needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        Err(Error::Budget { what, needed, budget })
    } else {
        Ok(())
    }
}
