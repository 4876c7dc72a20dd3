use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("loaded pixel-port matrix is numerically singular (condition number {condition:.3e})")]
    SingularLoadedNetwork { condition: f64 },

    #[error("open-circuit pattern matrix is all zeros")]
    ZeroPatternMatrix,

    #[error("coder radiates nothing through the pattern basis{}", antenna_suffix(*.antenna))]
    DegenerateRadiator { antenna: Option<usize> },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("target rank {rank} is infeasible for q = {q}, k = {k}")]
    InfeasibleRank { rank: usize, q: usize, k: usize },

    #[error("invalid antenna coder: {0}")]
    InvalidCoder(String),

    #[error("invalid antenna data: {0}")]
    InvalidAntennaData(String),

    #[error("harmonic order {0} is not an even integer >= 2")]
    OddOrder(u32),

    #[error("objective returned a non-finite value at {at}")]
    ObjectiveNonFinite { at: String },

    #[error("channel is identically zero")]
    ZeroChannel,

    #[error("codebook is empty")]
    EmptyCodebook,

    #[error("invalid configuration at `{field}`: {reason}")]
    ConfigInvalid { field: String, reason: String },

    #[error("run failed: {0}")]
    RunFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

fn antenna_suffix(antenna: Option<usize>) -> String {
    match antenna {
        Some(i) => format!(" (antenna {i})"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
