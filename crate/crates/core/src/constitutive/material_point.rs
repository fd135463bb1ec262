use super::flow::flow_response;
use super::MaterialModel;
use crate::error::SolverError;
use crate::math;
use crate::tensor::{Mandel6, SymTensor3};

const MAX_HALVINGS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialPointState {
    pub stress: SymTensor3,
    pub temperature: f64,
    pub time: f64,
}

/// Result of one implicit stress update.
#[derive(Clone, Copy, Debug)]
pub struct PointUpdate {
    pub stress: SymTensor3,
    /// Consistent tangent `∂T/∂ε = (C⁻¹ + dt ∂G/∂T)⁻¹` in Mandel form,
    /// with `ε` the strain at the new time level.
    pub tangent: Mandel6,
    pub iterations: usize,
}

/// Solves `C⁻¹(T − T_now)/dt + G(T) = ė` for `T`, with the yield radius
/// `beta` held fixed.
///
/// Starts from the elastic predictor. Newton steps whose residual is larger
/// than the current one are halved, up to 30 times.
pub fn integrate_point(
    model: &MaterialModel,
    t_now: &SymTensor3,
    strain_rate: &SymTensor3,
    beta: f64,
    dt: f64,
) -> Result<PointUpdate, SolverError> {
    let guess = *t_now + model.moduli.hooke_apply(strain_rate) * dt;
    integrate_point_from(model, t_now, strain_rate, beta, dt, guess)
}

pub(crate) fn integrate_point_from(
    model: &MaterialModel,
    t_now: &SymTensor3,
    strain_rate: &SymTensor3,
    beta: f64,
    dt: f64,
    guess: SymTensor3,
) -> Result<PointUpdate, SolverError> {
    let inv_dt = 1.0 / dt;
    let compliance = model.moduli.compliance_mandel();
    let target = strain_rate.to_mandel();
    let t_now_m = t_now.to_mandel();
    let tol = model.newton_tol * (1.0 + math::norm2(&target));

    let residual = |t: &[f64; 6]| -> ([f64; 6], Mandel6) {
        let resp = flow_response(model, &SymTensor3::from_mandel(t), beta);
        let mut diff = [0.0; 6];
        for i in 0..6 {
            diff[i] = (t[i] - t_now_m[i]) * inv_dt;
        }
        let el = compliance.apply(&diff);
        let g = resp.rate.to_mandel();
        let mut r = [0.0; 6];
        for i in 0..6 {
            r[i] = el[i] + g[i] - target[i];
        }
        (r, resp.jacobian)
    };

    let mut t = guess.to_mandel();
    let (mut r, mut jac) = residual(&t);
    let mut rn = math::norm2(&r);
    let mut iterations = 0;
    while rn > tol {
        if iterations >= model.newton_max_iter {
            return Err(SolverError::NonConvergence {
                context: "material point",
                iterations,
                residual: rn,
            });
        }
        iterations += 1;
        let k = compliance * inv_dt + jac;
        let step = k.solve(&r).ok_or_else(|| {
            SolverError::LinearSolveFailure(alloc::string::String::from(
                "singular material-point Jacobian",
            ))
        })?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = t;
            for i in 0..6 {
                trial[i] -= lambda * step[i];
            }
            let (rt, jt) = residual(&trial);
            let rtn = math::norm2(&rt);
            if rtn.is_finite() && rtn < rn {
                accepted = Some((trial, rt, jt, rtn));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, rt, jt, rtn)) => {
                t = trial;
                r = rt;
                jac = jt;
                rn = rtn;
            }
            None => {
                return Err(SolverError::NonConvergence {
                    context: "material point (line search stalled)",
                    iterations,
                    residual: rn,
                })
            }
        }
    }
    let tangent = (compliance + jac * dt).inverse().ok_or_else(|| {
        SolverError::LinearSolveFailure(alloc::string::String::from(
            "singular material-point tangent",
        ))
    })?;
    Ok(PointUpdate {
        stress: SymTensor3::from_mandel(&t),
        tangent,
        iterations,
    })
}

/// Advances the stress of a material point over one step with prescribed
/// strain rate and the yield radius evaluated at `theta_next`.
pub fn material_point_step(
    model: &MaterialModel,
    state: &MaterialPointState,
    strain_rate: &SymTensor3,
    theta_next: f64,
    dt: f64,
) -> Result<SymTensor3, SolverError> {
    if !(dt > 0.0) {
        return Err(SolverError::Model(crate::error::ModelError::InvalidSolverConfig(
            alloc::format!("time step must be > 0, got {dt}"),
        )));
    }
    let beta = model.yield_fn.value(theta_next);
    integrate_point(model, &state.stress, strain_rate, beta, dt).map(|u| u.stress)
}
