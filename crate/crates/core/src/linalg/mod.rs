//! Sparse matrices and the two linear solvers used by the Newton loops.

mod banded;
mod cg;
mod csr;

pub use banded::BandedLu;
pub use cg::{cg_solve, CgOutcome};
pub use csr::CsrMatrix;

use alloc::vec::Vec;

use crate::error::SolverError;

/// Linear solver used for every global system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinearSolver {
    /// Banded LU without pivoting, suitable for the small coercive systems
    /// produced on box meshes.
    Direct,
    /// Jacobi-preconditioned conjugate gradients with a relative residual
    /// tolerance.
    ConjugateGradient { tol: f64, max_iter: usize },
}

impl Default for LinearSolver {
    fn default() -> Self {
        LinearSolver::ConjugateGradient {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

impl LinearSolver {
    pub fn solve(&self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, SolverError> {
        match *self {
            LinearSolver::Direct => BandedLu::factor(a)?.solve(b),
            LinearSolver::ConjugateGradient { tol, max_iter } => {
                let out = cg_solve(a, b, None, tol, max_iter)?;
                Ok(out.x)
            }
        }
    }

    pub fn is_direct(&self) -> bool {
        matches!(self, LinearSolver::Direct)
    }
}
