use alloc::boxed::Box;
use alloc::string::String;

/// Violations of material or discretization invariants detected at
/// construction time.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("elastic moduli violate mu > 0 and 3*lambda + 2*mu > 0 (mu = {mu}, lambda = {lambda})")]
    InvalidModuli { mu: f64, lambda: f64 },
    #[error("Norton-Hoff exponent must satisfy r > 1, got {0}")]
    InvalidExponent(f64),
    #[error("truncation level must satisfy k > 0, got {0}")]
    InvalidTruncation(f64),
    #[error("thermal stress growth parameters invalid: {0}")]
    InvalidThermalStress(String),
    #[error("yield function parameters invalid: {0}")]
    InvalidYield(String),
    #[error("solver configuration invalid: {0}")]
    InvalidSolverConfig(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("cell {cell} has nonpositive Jacobian determinant {det} at a quadrature point")]
    NonpositiveJacobian { cell: usize, det: f64 },
    #[error("cell {cell} references vertex {vertex} but the mesh has {count} vertices")]
    VertexOutOfRange { cell: usize, vertex: usize, count: usize },
    #[error("boundary face ({cell}, {face}) is invalid: {reason}")]
    InvalidFace { cell: usize, face: u8, reason: String },
    #[error("invalid box mesh request: {0}")]
    InvalidBox(String),
}

/// Failures raised while advancing the discrete system.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("{context}: Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        context: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),
    #[error("assembly failed: {0}")]
    Assembly(#[from] MeshError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("at t = {time}: {source}")]
    AtTime {
        time: f64,
        #[source]
        source: Box<SolverError>,
    },
}

impl SolverError {
    pub fn at_time(self, time: f64) -> Self {
        match self {
            e @ SolverError::AtTime { .. } => e,
            e => SolverError::AtTime {
                time,
                source: Box::new(e),
            },
        }
    }
}
