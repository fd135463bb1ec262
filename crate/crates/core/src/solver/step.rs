//! One backward-Euler step of the coupled system.

use alloc::vec::Vec;

use super::config::{OuterCoupling, SolverConfig};
use super::newton::{newton_solve, NewtonEval, NewtonOptions};
use crate::constitutive::MaterialModel;
use crate::error::SolverError;
use crate::fem::assembly::{dissipation_source, qp_divergence};
use crate::fem::{
    apply_dirichlet, assemble_heat, assemble_momentum, Constraints, FESpace, FieldsState,
    GivenData, HeatInput, MomentumInput,
};
use crate::math;
use crate::tensor::SymTensor3;

/// Everything a step needs that does not change along the trajectory.
#[derive(Clone, Copy)]
pub struct StepContext<'a> {
    pub space: &'a FESpace,
    pub model: &'a MaterialModel,
    pub data: &'a GivenData,
    pub config: &'a SolverConfig,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub momentum_iterations: usize,
    pub heat_iterations: usize,
    pub outer_iterations: usize,
    pub local_iterations: usize,
}

/// Converged step. In lifted runs `state` holds the homogeneous part of the
/// solution.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub state: FieldsState,
    /// Nodal temperature that entered `f` and `β` in the final momentum solve.
    pub theta_coupling: Vec<f64>,
    pub lift_increment: Option<Vec<f64>>,
    pub theta_offset: Option<Vec<f64>>,
    pub stats: StepStats,
}

struct Mechanics {
    u: Vec<f64>,
    stress: Vec<SymTensor3>,
    iterations: usize,
    local_iterations: usize,
}

impl StepContext<'_> {
    fn options(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.config.newton_tol,
            max_iter: self.config.newton_max_iter,
            linear: self.config.linear_solver,
        }
    }

    fn solve_mechanics(
        &self,
        now: &FieldsState,
        constraints: &Constraints,
        u_start: &[f64],
        theta_coupling: &[f64],
        lift_increment: Option<&[f64]>,
        time_next: f64,
    ) -> Result<Mechanics, SolverError> {
        let space = self.space;
        let input = MomentumInput {
            u_now: &now.u,
            stress_now: &now.stress,
            theta_coupling,
            lift_increment,
            time_next,
            dt: self.config.dt,
        };
        let x0: Vec<f64> = space.dofs().free().iter().map(|&d| u_start[d]).collect();
        let mut last_stress = now.stress.clone();
        let mut local = 0;
        let res = newton_solve(
            |x: &[f64]| {
                let u = constraints.expand(space, x);
                let asm = assemble_momentum(
                    space,
                    self.model,
                    self.data,
                    &input,
                    &u,
                    Some(&last_stress),
                    true,
                )?;
                local += asm.local_iterations;
                let scale = asm.free_scale(space);
                let residual = asm.free_residual(space);
                last_stress = asm.stress;
                Ok(NewtonEval {
                    residual,
                    scale,
                    jacobian: asm.jacobian,
                })
            },
            x0,
            &self.options(),
            "momentum",
        )?;
        Ok(Mechanics {
            u: constraints.expand(space, &res.x),
            stress: last_stress,
            iterations: res.iterations,
            local_iterations: local,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn solve_heat(
        &self,
        now: &FieldsState,
        theta_start: &[f64],
        mech: &Mechanics,
        theta_coupling: &[f64],
        lift_increment: Option<&[f64]>,
        theta_offset: Option<&[f64]>,
        time_next: f64,
    ) -> Result<(Vec<f64>, usize), SolverError> {
        let space = self.space;
        let dt = self.config.dt;
        let du: Vec<f64> = mech.u.iter().zip(&now.u).map(|(a, b)| a - b).collect();
        let mut div = qp_divergence(space, &du);
        if let Some(dl) = lift_increment {
            for (d, l) in div.iter_mut().zip(qp_divergence(space, dl)) {
                *d += l;
            }
        }
        for d in &mut div {
            *d /= dt;
        }
        let (dissipation, _) = dissipation_source(space, self.model, &mech.stress, theta_coupling);
        let input = HeatInput {
            theta_now: &now.theta,
            div_rate: &div,
            dissipation: &dissipation,
            theta_offset,
            include_flux: lift_increment.is_none(),
            time_next,
            dt,
        };
        let res = newton_solve(
            |th: &[f64]| {
                let h = assemble_heat(space, self.model, self.data, &input, th, true);
                Ok(NewtonEval {
                    scale: math::norm2(&h.magnitude),
                    residual: h.residual,
                    jacobian: h.jacobian,
                })
            },
            theta_start.to_vec(),
            &self.options(),
            "heat",
        )?;
        Ok((res.x, res.iterations))
    }
}

fn add(a: &[f64], b: Option<&Vec<f64>>) -> Vec<f64> {
    match b {
        Some(b) => a.iter().zip(b).map(|(x, y)| x + y).collect(),
        None => a.to_vec(),
    }
}

fn mass_norm(space: &FESpace, v: &[f64]) -> f64 {
    math::sqrt(math::pos(math::dot(v, &space.mass().mul_vec(v))))
}

/// Advances `now` (at `t_n = n·dt`) to `t_{n+1}`.
pub fn advance_step(
    ctx: &StepContext<'_>,
    now: &FieldsState,
    n: usize,
) -> Result<StepOutcome, SolverError> {
    let space = ctx.space;
    let time_next = ctx.config.time_at(n + 1);
    let lifting = ctx.data.lifting.as_ref();
    let lift_increment: Option<Vec<f64>> = lifting.map(|l| {
        l.u[n + 1].iter().zip(&l.u[n]).map(|(a, b)| a - b).collect()
    });
    let offset_now = lifting.map(|l| l.theta[n].clone());
    let offset_next = lifting.map(|l| l.theta[n + 1].clone());
    let constraints = if lifting.is_some() {
        Constraints::homogeneous(space)
    } else {
        apply_dirichlet(space, ctx.data, time_next)
    };
    let mut u_start = now.u.clone();
    constraints.impose(&mut u_start);
    let li = lift_increment.as_deref();
    let mut stats = StepStats::default();

    let (mech, theta_next, theta_coupling) = match ctx.config.outer_coupling {
        OuterCoupling::Staggered => {
            let theta_c = add(&now.theta, offset_now.as_ref());
            let mech = ctx.solve_mechanics(now, &constraints, &u_start, &theta_c, li, time_next)?;
            let (th, hi) = ctx.solve_heat(
                now,
                &now.theta,
                &mech,
                &theta_c,
                li,
                offset_next.as_deref(),
                time_next,
            )?;
            stats.momentum_iterations = mech.iterations;
            stats.local_iterations = mech.local_iterations;
            stats.heat_iterations = hi;
            stats.outer_iterations = 1;
            (mech, th, theta_c)
        }
        OuterCoupling::FixedPoint => {
            let mut theta_it = now.theta.clone();
            let mut u_guess = u_start;
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                let theta_c = add(&theta_it, offset_next.as_ref());
                let mech =
                    ctx.solve_mechanics(now, &constraints, &u_guess, &theta_c, li, time_next)?;
                let (th, hi) = ctx.solve_heat(
                    now,
                    &theta_it,
                    &mech,
                    &theta_c,
                    li,
                    offset_next.as_deref(),
                    time_next,
                )?;
                stats.momentum_iterations += mech.iterations;
                stats.local_iterations += mech.local_iterations;
                stats.heat_iterations += hi;
                let diff: Vec<f64> = th.iter().zip(&theta_it).map(|(a, b)| a - b).collect();
                let change = mass_norm(space, &diff);
                let done = change <= ctx.config.fixed_point_tol * (1.0 + mass_norm(space, &th));
                if done {
                    stats.outer_iterations = sweeps;
                    break (mech, th, theta_c);
                }
                if sweeps >= ctx.config.fixed_point_max_iter {
                    return Err(SolverError::NonConvergence {
                        context: "fixed-point coupling",
                        iterations: sweeps,
                        residual: change,
                    });
                }
                u_guess = mech.u;
                theta_it = th;
            }
        }
    };

    Ok(StepOutcome {
        state: FieldsState {
            u: mech.u,
            theta: theta_next,
            stress: mech.stress,
            time: time_next,
        },
        theta_coupling,
        lift_increment,
        theta_offset: offset_next,
        stats,
    })
}

/// `u + ũ` and `θ + θ̃` at step `n`; the identity for direct runs.
pub fn physical_state(data: &GivenData, state: &FieldsState, n: usize) -> FieldsState {
    match data.lifting.as_ref() {
        Some(l) => FieldsState {
            u: add(&state.u, Some(&l.u[n])),
            theta: add(&state.theta, Some(&l.theta[n])),
            stress: state.stress.clone(),
            time: state.time,
        },
        None => state.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_box_mesh;
    use crate::linalg::LinearSolver;
    use alloc::sync::Arc;

    fn setup(coupling: OuterCoupling) -> (FESpace, MaterialModel, GivenData, SolverConfig) {
        let space = FESpace::new(build_box_mesh([1.0; 3], [2, 2, 2]).unwrap()).unwrap();
        let model = MaterialModel::default().with_truncation(20.0).unwrap();
        let data = GivenData {
            g_d: Some(Arc::new(|x, t| [0.3 * t * x[1], 0.0, 0.1 * t * x[0]])),
            theta0: Some(Arc::new(|x, _| 0.5 * x[0])),
            ..GivenData::default()
        };
        let config = SolverConfig {
            dt: 0.1,
            t_end: 0.1,
            outer_coupling: coupling,
            linear_solver: LinearSolver::Direct,
            ..SolverConfig::default()
        };
        (space, model, data, config)
    }

    #[test]
    fn zero_data_stays_zero() {
        let space = FESpace::new(build_box_mesh([1.0; 3], [2, 2, 2]).unwrap()).unwrap();
        let model = MaterialModel::default();
        let data = GivenData::zero();
        let config = SolverConfig::default();
        let ctx = StepContext { space: &space, model: &model, data: &data, config: &config };
        let out = advance_step(&ctx, &FieldsState::zero(&space), 0).unwrap();
        assert!(out.state.u.iter().all(|&v| v == 0.0));
        assert!(out.state.theta.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fixed_point_and_staggered_agree_to_first_order() {
        let (space, model, data, c1) = setup(OuterCoupling::Staggered);
        let c2 = SolverConfig { outer_coupling: OuterCoupling::FixedPoint, ..c1 };
        let s0 = FieldsState::initial(&space, &data, model.trunc_k);
        let a = advance_step(&StepContext { space: &space, model: &model, data: &data, config: &c1 }, &s0, 0).unwrap();
        let b = advance_step(&StepContext { space: &space, model: &model, data: &data, config: &c2 }, &s0, 0).unwrap();
        assert!(b.stats.outer_iterations >= 2);
        let du = a.state.u.iter().zip(&b.state.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(du < 0.05, "{du}");
    }

    #[test]
    fn boundary_values_imposed() {
        let (space, model, data, config) = setup(OuterCoupling::Staggered);
        let s0 = FieldsState::initial(&space, &data, model.trunc_k);
        let out = advance_step(&StepContext { space: &space, model: &model, data: &data, config: &config }, &s0, 0).unwrap();
        let c = apply_dirichlet(&space, &data, 0.1);
        for (&d, &v) in c.dofs.iter().zip(&c.values) {
            assert_eq!(out.state.u[d], v);
        }
    }
}
