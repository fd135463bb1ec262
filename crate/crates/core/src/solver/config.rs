use alloc::format;

use crate::error::ModelError;
use crate::linalg::LinearSolver;

/// How the momentum / flow-rule block and the heat block are coupled
/// inside one time step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OuterCoupling {
    /// Mechanics with `θⁿ`, then heat with the new stress.
    #[default]
    Staggered,
    /// Block Gauss-Seidel iteration to a fixed point of the monolithic step.
    FixedPoint,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub outer_coupling: OuterCoupling,
    /// Stopping tolerance on the mass-weighted change of `θ` between
    /// fixed-point sweeps.
    pub fixed_point_tol: f64,
    pub fixed_point_max_iter: usize,
    pub linear_solver: LinearSolver,
    /// A snapshot is stored every `snapshot_stride` steps.
    pub snapshot_stride: usize,
    /// Level `M` of the thermal test function `T_M(θ)` in the energy audit;
    /// `None` uses the truncation level `k`.
    pub audit_level: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 0.05,
            t_end: 1.0,
            newton_tol: 1e-10,
            newton_max_iter: 30,
            outer_coupling: OuterCoupling::Staggered,
            fixed_point_tol: 1e-10,
            fixed_point_max_iter: 50,
            linear_solver: LinearSolver::default(),
            snapshot_stride: 1,
            audit_level: None,
        }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Result<(), ModelError> {
        let bad = |msg: alloc::string::String| Err(ModelError::InvalidSolverConfig(msg));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= self.dt * (1.0 - 1e-9)) || !self.t_end.is_finite() {
            return bad(format!("t_end must be at least dt, got t_end = {}, dt = {}", self.t_end, self.dt));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return bad(format!(
                "newton_tol must be > 0 and newton_max_iter >= 1 (got {}, {})",
                self.newton_tol, self.newton_max_iter
            ));
        }
        if !(self.fixed_point_tol > 0.0) || self.fixed_point_max_iter == 0 {
            return bad(format!(
                "fixed_point_tol must be > 0 and fixed_point_max_iter >= 1 (got {}, {})",
                self.fixed_point_tol, self.fixed_point_max_iter
            ));
        }
        if self.snapshot_stride == 0 {
            return bad(format!("snapshot_stride must be >= 1"));
        }
        if let LinearSolver::ConjugateGradient { tol, max_iter } = self.linear_solver {
            if !(tol > 0.0) || max_iter == 0 {
                return bad(format!("cg tolerance must be > 0 and max_iter >= 1"));
            }
        }
        if let Some(m) = self.audit_level {
            if !(m > 0.0) {
                return bad(format!("audit level must be positive, got {m}"));
            }
        }
        Ok(())
    }

    /// Number of steps on the grid `t_n = n·dt` that fit in `[0, t_end]`.
    pub fn n_steps(&self) -> usize {
        libm::floor(self.t_end / self.dt + 1e-9) as usize
    }

    pub fn time_at(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }
}
