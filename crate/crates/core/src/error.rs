use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// One entry per violated parameter constraint.
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParameters(Vec<String>),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),

    #[error("non-finite value in stationary profile at node {node} (v = {v})")]
    NonFiniteProfile { node: usize, v: f64 },

    #[error("quadrature did not converge (w_F = {w_f}, w_R = {w_r})")]
    Quadrature { w_f: f64, w_r: f64 },

    #[error("inner firing-rate solve inconsistent at N_E = {n_e}: {reason}")]
    InnerSolve { n_e: f64, reason: String },

    #[error("delay window exceeded: query at t = {query} but oldest retained sample is at t = {oldest}")]
    DelayWindowExceeded { query: f64, oldest: f64 },

    #[error("time moved backwards: last sample at t = {last}, new sample at t = {new}")]
    TimeReversal { last: f64, new: f64 },

    #[error("non-finite input to spatial operator")]
    NonFiniteInput,

    #[error("invalid reference state: {0}")]
    InvalidReference(String),

    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {message}")]
    ConfigAt { line: usize, message: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    /// True for problems with the user's input rather than with a computation.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameters(_)
                | Error::InvalidGrid(_)
                | Error::InvalidInitialData(_)
                | Error::InvalidConfig(_)
                | Error::ConfigAt { .. }
                | Error::UnknownPreset(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
