//! The two auxiliary linear problems that absorb the boundary data: an
//! elastostatic problem for the lifting velocity `ũ_t` and a linear heat
//! problem with zero initial value for `θ̃`.

use alloc::vec;
use alloc::vec::Vec;

use super::assembly::{body_force_load, elastic_action, elastic_matrix, flux_load};
use super::data::{GivenData, Lifting};
use super::dirichlet::dirichlet_rate;
use super::space::FESpace;
use crate::error::SolverError;
use crate::linalg::{CsrMatrix, LinearSolver};
use crate::tensor::ElasticModuli;

/// `ũ_t(t)` at each requested time together with `ũ(t)` accumulated by the
/// trapezoidal rule from `ũ(times[0]) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftingDisplacement {
    pub rate: Vec<Vec<f64>>,
    pub value: Vec<Vec<f64>>,
}

fn elastic_rate(
    space: &FESpace,
    moduli: &ElasticModuli,
    k: &CsrMatrix,
    data: &GivenData,
    t: f64,
    solver: &LinearSolver,
) -> Result<Vec<f64>, SolverError> {
    let bc = dirichlet_rate(space, data, t);
    let mut lifted = vec![0.0; 3 * space.n_nodes()];
    bc.impose(&mut lifted);
    let kg = elastic_action(space, moduli, &lifted);
    let f = body_force_load(space, data, t);
    let rhs: Vec<f64> = space.dofs().free().iter().map(|&d| f[d] - kg[d]).collect();
    let free = if rhs.is_empty() {
        Vec::new()
    } else {
        solver.solve(k, &rhs)?
    };
    Ok(bc.expand(space, &free))
}

/// Solves `−div C ε(ũ_t) = F`, `ũ_t = ∂g_D/∂t` on the Dirichlet boundary at
/// each time in `times`, and integrates `ũ` in time.
pub fn solve_lifting_displacement(
    space: &FESpace,
    moduli: &ElasticModuli,
    data: &GivenData,
    times: &[f64],
    solver: &LinearSolver,
) -> Result<LiftingDisplacement, SolverError> {
    let k = elastic_matrix(space, moduli);
    let mut rate = Vec::with_capacity(times.len());
    let mut value: Vec<Vec<f64>> = Vec::with_capacity(times.len());
    for (n, &t) in times.iter().enumerate() {
        let r = elastic_rate(space, moduli, &k, data, t, solver)?;
        let v = if n == 0 {
            vec![0.0; r.len()]
        } else {
            let h = t - times[n - 1];
            let prev_r: &Vec<f64> = &rate[n - 1];
            value[n - 1]
                .iter()
                .zip(prev_r.iter().zip(&r))
                .map(|(u, (a, b))| u + 0.5 * h * (a + b))
                .collect()
        };
        rate.push(r);
        value.push(v);
    }
    Ok(LiftingDisplacement { rate, value })
}

/// Backward-Euler solves of `θ̃_t − Δθ̃ = 0`, `∂θ̃/∂n = g_θ`, `θ̃(0) = 0`.
/// Returns `θ̃` at `t_n = n·dt` for `n = 0..=steps`.
pub fn solve_lifting_temperature(
    space: &FESpace,
    data: &GivenData,
    dt: f64,
    steps: usize,
    solver: &LinearSolver,
) -> Result<Vec<Vec<f64>>, SolverError> {
    let nn = space.n_nodes();
    let mut a = space.stiffness().clone();
    a.scale(dt);
    for i in 0..nn {
        let (cols, vals) = space.mass().row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            a.add(i, j, v);
        }
    }
    let mut out = vec![vec![0.0; nn]];
    for n in 1..=steps {
        let t = n as f64 * dt;
        let prev = &out[n - 1];
        let mut rhs = space.mass().mul_vec(prev);
        if data.g_theta.is_some() {
            let g = flux_load(space, data, t);
            for i in 0..nn {
                rhs[i] += dt * g[i];
            }
        }
        let next = if rhs.iter().all(|&v| v == 0.0) {
            vec![0.0; nn]
        } else {
            solver.solve(&a, &rhs)?
        };
        out.push(next);
    }
    Ok(out)
}

/// Both lifting fields on the uniform grid `t_n = n·dt`, `n = 0..=steps`.
pub fn build_lifting(
    space: &FESpace,
    moduli: &ElasticModuli,
    data: &GivenData,
    dt: f64,
    steps: usize,
    solver: &LinearSolver,
) -> Result<Lifting, SolverError> {
    let times: Vec<f64> = (0..=steps).map(|n| n as f64 * dt).collect();
    let u = solve_lifting_displacement(space, moduli, data, &times, solver)?.value;
    let theta = solve_lifting_temperature(space, data, dt, steps, solver)?;
    Ok(Lifting { dt, u, theta })
}
