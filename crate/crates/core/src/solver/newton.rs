use alloc::vec::Vec;

use crate::error::SolverError;
use crate::linalg::{CsrMatrix, LinearSolver};
use crate::math;

const MAX_HALVINGS: usize = 30;

/// One evaluation of a nonlinear residual.
pub struct NewtonEval {
    pub residual: Vec<f64>,
    /// Reference magnitude for the relative test `‖R‖ ≤ tol·scale`.
    pub scale: f64,
    /// Jacobian, required whenever the callable is asked for it.
    pub jacobian: Option<CsrMatrix>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub linear: LinearSolver,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
    pub scale: f64,
}

fn converged(rn: f64, scale: f64, tol: f64) -> bool {
    rn == 0.0 || rn <= tol * scale
}

/// The correction is below the floating-point resolution of the iterate, so
/// the residual is at roundoff level even when the reference scale is too.
fn negligible(step: &[f64], x: &[f64]) -> bool {
    let xm = x.iter().fold(0.0f64, |m, v| m.max(math::abs(*v)));
    let sm = step.iter().fold(0.0f64, |m, v| m.max(math::abs(*v)));
    sm <= 16.0 * f64::EPSILON * (1.0 + xm)
}

/// Damped Newton iteration. Steps that do not reduce the residual norm are
/// halved up to 30 times. An iterate whose Newton correction is negligible
/// is also accepted. The callable's last evaluation is always at the
/// returned iterate.
pub fn newton_solve<F>(
    mut eval: F,
    x0: Vec<f64>,
    opts: &NewtonOptions,
    context: &'static str,
) -> Result<NewtonResult, SolverError>
where
    F: FnMut(&[f64]) -> Result<NewtonEval, SolverError>,
{
    let mut x = x0;
    let mut cur = eval(&x)?;
    let mut rn = math::norm2(&cur.residual);
    let mut iterations = 0;
    loop {
        if !rn.is_finite() {
            return Err(SolverError::NonConvergence {
                context,
                iterations,
                residual: rn,
            });
        }
        if converged(rn, cur.scale, opts.tol) {
            return Ok(NewtonResult {
                x,
                iterations,
                residual_norm: rn,
                scale: cur.scale,
            });
        }
        if iterations >= opts.max_iter {
            return Err(SolverError::NonConvergence {
                context,
                iterations,
                residual: rn,
            });
        }
        iterations += 1;
        let jac = cur.jacobian.as_ref().ok_or_else(|| {
            SolverError::LinearSolveFailure(alloc::string::String::from(
                "residual callable returned no Jacobian",
            ))
        })?;
        let step = match opts.linear.solve(jac, &cur.residual) {
            Ok(s) => s,
            Err(_) if !opts.linear.is_direct() => LinearSolver::Direct.solve(jac, &cur.residual)?,
            Err(e) => return Err(e),
        };
        if negligible(&step, &x) {
            return Ok(NewtonResult {
                x,
                iterations,
                residual_norm: rn,
                scale: cur.scale,
            });
        }
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a - lambda * s).collect();
            let ev = eval(&trial)?;
            let tn = math::norm2(&ev.residual);
            if tn.is_finite() && (tn < rn || converged(tn, ev.scale, opts.tol)) {
                accepted = Some((trial, ev, tn));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, ev, tn)) => {
                x = trial;
                cur = ev;
                rn = tn;
            }
            None => {
                return Err(SolverError::NonConvergence {
                    context,
                    iterations,
                    residual: rn,
                })
            }
        }
    }
}
