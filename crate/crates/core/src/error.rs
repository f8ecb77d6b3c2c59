use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid species: {0}")]
    InvalidSpecies(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("symmetrization of the input vanishes (no bosonic component)")]
    DegenerateInput,
    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:.3e})")]
    EigenNotConverged { iterations: usize, residual: f64 },
    #[error("linear solve did not converge at t = {time}: residual {residual:.3e}")]
    StepNotConverged { time: f64, residual: f64 },
    #[error("norm drifted by {drift:.3e} during propagation")]
    Unstable { drift: f64 },
    #[error("no threshold crossing in speed bracket [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("size limit exceeded: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
