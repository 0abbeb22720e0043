use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("matrix factorization failed: {0}")]
    Factorization(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "no mass found: every support point has zero target density under the proposal; \
         revise the proposal (location, scale or family) so it covers the target"
    )]
    NoMass,

    #[error("target density evaluation returned {value} at point {index} ({point:?})")]
    TargetEvaluation {
        index: usize,
        point: Vec<f64>,
        value: f64,
    },

    #[error("stage {} failed with acceptance rate {}: {source}", report.stage_index, report.acceptance_rate)]
    StageFailed {
        report: Box<crate::adaptive::StageReport>,
        #[source]
        source: Box<Error>,
    },

    #[error("infeasible initial state: negative log-density is {0} at the starting point")]
    InfeasibleStart(f64),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("subprocess target: {0}")]
    Subprocess(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
