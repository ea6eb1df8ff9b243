use alloc::string::String;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("alpha = {alpha} is outside the regime 0 <= alpha < 1")]
    WrongRegime { alpha: f64 },

    #[error("graph has {vertices} vertices, above the exact solver cap of {cap}")]
    SizeLimit { vertices: usize, cap: usize },

    #[error("coloring is not proper: vertices {0} and {1} are adjacent and share a color")]
    ImproperColoring(usize, usize),

    #[error("no payload for packet {index} of file {file}")]
    MissingPayload { file: u32, index: u32 },

    #[error("user {user} cannot decode packet {index} of file {file}")]
    DecodeFailure { user: usize, file: u32, index: u32 },

    #[error("packet quotas sum to {requested}, above the per-user budget of {budget}")]
    QuotaInfeasible { requested: usize, budget: usize },

    #[error("projected {vertices} conflict-graph vertices (n = {n}, B = {packets}) exceed the guard of {cap}")]
    ResourceGuard {
        vertices: usize,
        n: usize,
        packets: usize,
        cap: usize,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
