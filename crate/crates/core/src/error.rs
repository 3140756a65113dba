use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("quadrature degree {requested} unsupported (max {max})")]
    UnsupportedDegree { requested: usize, max: usize },

    #[error("interpolant does not vanish on the Dirichlet boundary: |f({x}, {y})| = {value:e}")]
    BoundaryCompatibility { x: f64, y: f64, value: f64 },

    #[error("no Brauer threshold: nu0 = {nu0} must exceed k1 + k3 = {bound}")]
    NoThreshold { nu0: f64, bound: f64 },

    #[error("map is not orientation preserving: J = {jacobian:e} at ({x}, {y})")]
    Orientation { x: f64, y: f64, jacobian: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("conjugate gradients did not converge in {iterations} iterations (relative residual {residual:e})")]
    CgNoConvergence { iterations: usize, residual: f64 },

    #[error("line search failed at Newton iteration {iteration} after {backtracks} backtracks")]
    LineSearch { iteration: usize, backtracks: usize },

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
