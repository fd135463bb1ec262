use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::CsrMatrix;
use crate::error::SolverError;
use crate::math;

pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for symmetric positive-definite
/// `a`. Stops when `‖b − A x‖ ≤ tol ‖b‖`.
pub fn cg_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome, SolverError> {
    let n = a.dim();
    let bnorm = math::norm2(b);
    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![0.0; n],
    };
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let ax = a.mul_vec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = math::dot(&r, &z);
    let mut ap = vec![0.0; n];
    let target = tol * bnorm;
    let mut rnorm = math::norm2(&r);
    let mut it = 0;
    while rnorm > target {
        if it >= max_iter {
            return Err(SolverError::LinearSolveFailure(format!(
                "conjugate gradients reached {max_iter} iterations (relative residual {:e})",
                rnorm / bnorm
            )));
        }
        it += 1;
        a.mul_vec_into(&p, &mut ap);
        let pap = math::dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(SolverError::LinearSolveFailure(format!(
                "conjugate gradients met non-positive curvature {pap:e}; matrix is not SPD"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = math::dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rnorm = math::norm2(&r);
    }
    Ok(CgOutcome {
        x,
        iterations: it,
        relative_residual: rnorm / bnorm,
    })
}
