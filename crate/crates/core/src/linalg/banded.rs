use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::CsrMatrix;
use crate::error::SolverError;

/// LU factorization of a banded matrix without pivoting.
///
/// Storage is row-major with `2·bw + 1` slots per row; slot `bw + (j − i)`
/// holds entry `(i, j)`.
pub struct BandedLu {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self, SolverError> {
        let n = a.dim();
        let bw = a.bandwidth();
        let w = 2 * bw + 1;
        let mut data = vec![0.0; n * w];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                data[i * w + bw + j - i] = v;
            }
        }
        let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = 1e-14 * scale.max(f64::MIN_POSITIVE);
        for k in 0..n {
            let pivot = data[k * w + bw];
            if !(pivot.abs() > tiny) {
                return Err(SolverError::LinearSolveFailure(format!(
                    "zero pivot {pivot:e} at row {k} in banded LU"
                )));
            }
            let last = (k + bw).min(n - 1);
            for i in (k + 1)..=last {
                let lik_idx = i * w + bw + k - i;
                let lik = data[lik_idx] / pivot;
                if lik == 0.0 {
                    continue;
                }
                data[lik_idx] = lik;
                for j in (k + 1)..=last {
                    let ukj = data[k * w + bw + j - k];
                    if ukj != 0.0 {
                        data[i * w + bw + j - i] -= lik * ukj;
                    }
                }
            }
        }
        Ok(BandedLu { n, bw, data })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SolverError> {
        let (n, bw) = (self.n, self.bw);
        let w = 2 * bw + 1;
        let mut x = b.to_vec();
        for i in 0..n {
            let first = i.saturating_sub(bw);
            let mut s = x[i];
            for j in first..i {
                s -= self.data[i * w + bw + j - i] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let last = (i + bw).min(n.saturating_sub(1));
            let mut s = x[i];
            for j in (i + 1)..=last {
                s -= self.data[i * w + bw + j - i] * x[j];
            }
            x[i] = s / self.data[i * w + bw];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::LinearSolveFailure(
                "non-finite solution from banded LU".into(),
            ));
        }
        Ok(x)
    }
}
