//! Symmetric second-order tensors and the isotropic elasticity operator.
//!
//! Tensors are stored as six independent components `[xx, yy, zz, yz, xz, xy]`.
//! For linear algebra on tensor-valued unknowns (local Newton solves and
//! consistent tangents) the orthonormal Mandel representation is used:
//! `[xx, yy, zz, √2·yz, √2·xz, √2·xy]`, in which the Frobenius product
//! becomes the Euclidean dot product.

use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::error::ModelError;
use crate::math;

const SQRT2: f64 = core::f64::consts::SQRT_2;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymTensor3 {
    c: [f64; 6],
}

impl SymTensor3 {
    pub const ZERO: SymTensor3 = SymTensor3 { c: [0.0; 6] };

    pub const fn new(xx: f64, yy: f64, zz: f64, yz: f64, xz: f64, xy: f64) -> Self {
        SymTensor3 {
            c: [xx, yy, zz, yz, xz, xy],
        }
    }

    pub const fn from_components(c: [f64; 6]) -> Self {
        SymTensor3 { c }
    }

    pub const fn diag(a: f64, b: f64, c: f64) -> Self {
        Self::new(a, b, c, 0.0, 0.0, 0.0)
    }

    pub const fn identity() -> Self {
        Self::diag(1.0, 1.0, 1.0)
    }

    /// Symmetric part of a full 3×3 matrix.
    pub fn sym(m: &[[f64; 3]; 3]) -> Self {
        Self::new(
            m[0][0],
            m[1][1],
            m[2][2],
            0.5 * (m[1][2] + m[2][1]),
            0.5 * (m[0][2] + m[2][0]),
            0.5 * (m[0][1] + m[1][0]),
        )
    }

    /// Components in storage order `[xx, yy, zz, yz, xz, xy]`.
    pub const fn components(&self) -> [f64; 6] {
        self.c
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.c[0],
            (1, 1) => self.c[1],
            (2, 2) => self.c[2],
            (1, 2) | (2, 1) => self.c[3],
            (0, 2) | (2, 0) => self.c[4],
            (0, 1) | (1, 0) => self.c[5],
            _ => panic!("tensor index ({i}, {j}) out of range"),
        }
    }

    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        let c = &self.c;
        [[c[0], c[5], c[4]], [c[5], c[1], c[3]], [c[4], c[3], c[2]]]
    }

    pub fn trace(&self) -> f64 {
        self.c[0] + self.c[1] + self.c[2]
    }

    pub fn dev(&self) -> Self {
        let m = self.trace() / 3.0;
        Self::new(
            self.c[0] - m,
            self.c[1] - m,
            self.c[2] - m,
            self.c[3],
            self.c[4],
            self.c[5],
        )
    }

    /// Splits `S` into its deviator and its trace, `S = dev S + (tr S / 3)·Id`.
    pub fn dev_vol_split(&self) -> (Self, f64) {
        (self.dev(), self.trace())
    }

    /// Frobenius product `A : B`.
    pub fn dot(&self, other: &Self) -> f64 {
        let a = &self.c;
        let b = &other.c;
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + 2.0 * (a[3] * b[3] + a[4] * b[4] + a[5] * b[5])
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.norm_sq())
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }

    pub fn to_mandel(&self) -> [f64; 6] {
        let c = &self.c;
        [c[0], c[1], c[2], SQRT2 * c[3], SQRT2 * c[4], SQRT2 * c[5]]
    }

    pub fn from_mandel(m: &[f64; 6]) -> Self {
        Self::new(m[0], m[1], m[2], m[3] / SQRT2, m[4] / SQRT2, m[5] / SQRT2)
    }

    pub fn max_abs_component(&self) -> f64 {
        self.c.iter().fold(0.0_f64, |acc, x| acc.max(math::abs(*x)))
    }
}

impl Add for SymTensor3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c) {
            *a += b;
        }
        SymTensor3 { c }
    }
}

impl Sub for SymTensor3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c) {
            *a -= b;
        }
        SymTensor3 { c }
    }
}

impl AddAssign for SymTensor3 {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for SymTensor3 {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl Mul<f64> for SymTensor3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        let mut c = self.c;
        for a in c.iter_mut() {
            *a *= s;
        }
        SymTensor3 { c }
    }
}

impl Mul<SymTensor3> for f64 {
    type Output = SymTensor3;
    fn mul(self, t: SymTensor3) -> SymTensor3 {
        t * self
    }
}

impl Neg for SymTensor3 {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

/// Linear map on symmetric tensors in the Mandel basis (a symmetric 6×6
/// matrix for every operator used here).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mandel6(pub [[f64; 6]; 6]);

impl Mandel6 {
    pub const ZERO: Mandel6 = Mandel6([[0.0; 6]; 6]);

    pub fn identity() -> Self {
        let mut m = [[0.0; 6]; 6];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Mandel6(m)
    }

    /// `a ⊗ b` for Mandel vectors.
    pub fn outer(a: &[f64; 6], b: &[f64; 6]) -> Self {
        let mut m = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                m[i][j] = a[i] * b[j];
            }
        }
        Mandel6(m)
    }

    /// Projector onto trace-free tensors.
    pub fn deviatoric_projector() -> Self {
        let one = [1.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        Self::identity() - Self::outer(&one, &one) * (1.0 / 3.0)
    }

    pub fn apply(&self, v: &[f64; 6]) -> [f64; 6] {
        let mut out = [0.0; 6];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn apply_tensor(&self, t: &SymTensor3) -> SymTensor3 {
        SymTensor3::from_mandel(&self.apply(&t.to_mandel()))
    }

    /// Solves `self · x = b` by Gaussian elimination with partial pivoting.
    /// Returns `None` when the matrix is numerically singular.
    pub fn solve(&self, b: &[f64; 6]) -> Option<[f64; 6]> {
        let mut a = self.0;
        let mut x = *b;
        let scale = a
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0_f64, |m, v| m.max(math::abs(*v)));
        if scale == 0.0 || !scale.is_finite() {
            return None;
        }
        for col in 0..6 {
            let mut piv = col;
            for row in col + 1..6 {
                if math::abs(a[row][col]) > math::abs(a[piv][col]) {
                    piv = row;
                }
            }
            if math::abs(a[piv][col]) <= 1e-300_f64.max(scale * 1e-15) {
                return None;
            }
            a.swap(col, piv);
            x.swap(col, piv);
            let d = a[col][col];
            for row in col + 1..6 {
                let f = a[row][col] / d;
                if f != 0.0 {
                    for k in col..6 {
                        a[row][k] -= f * a[col][k];
                    }
                    x[row] -= f * x[col];
                }
            }
        }
        for col in (0..6).rev() {
            let mut s = x[col];
            for k in col + 1..6 {
                s -= a[col][k] * x[k];
            }
            x[col] = s / a[col][col];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        let mut inv = [[0.0; 6]; 6];
        for j in 0..6 {
            let mut e = [0.0; 6];
            e[j] = 1.0;
            let col = self.solve(&e)?;
            for i in 0..6 {
                inv[i][j] = col[i];
            }
        }
        Some(Mandel6(inv))
    }

    /// Bilinear form `aᵀ · self · b`.
    pub fn quad(&self, a: &[f64; 6], b: &[f64; 6]) -> f64 {
        let mb = self.apply(b);
        a.iter().zip(&mb).map(|(x, y)| x * y).sum()
    }
}

impl Add for Mandel6 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut m = self.0;
        for (r, rr) in m.iter_mut().zip(&rhs.0) {
            for (a, b) in r.iter_mut().zip(rr) {
                *a += b;
            }
        }
        Mandel6(m)
    }
}

impl Sub for Mandel6 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + rhs * -1.0
    }
}

impl Mul<f64> for Mandel6 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        let mut m = self.0;
        for r in m.iter_mut() {
            for a in r.iter_mut() {
                *a *= s;
            }
        }
        Mandel6(m)
    }
}

/// Lamé parameters of an isotropic material.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElasticModuli {
    mu: f64,
    lambda: f64,
}

impl ElasticModuli {
    pub fn new(mu: f64, lambda: f64) -> Result<Self, ModelError> {
        if !(mu > 0.0) || !(3.0 * lambda + 2.0 * mu > 0.0) || !lambda.is_finite() || !mu.is_finite()
        {
            return Err(ModelError::InvalidModuli { mu, lambda });
        }
        Ok(ElasticModuli { mu, lambda })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `C E = 2μ E + λ tr(E) Id`.
    pub fn hooke_apply(&self, e: &SymTensor3) -> SymTensor3 {
        *e * (2.0 * self.mu) + SymTensor3::identity() * (self.lambda * e.trace())
    }

    /// `C⁻¹ T = T/(2μ) − λ/(2μ(2μ+3λ)) tr(T) Id`.
    pub fn hooke_inverse_apply(&self, t: &SymTensor3) -> SymTensor3 {
        let two_mu = 2.0 * self.mu;
        let vol = self.lambda / (two_mu * (two_mu + 3.0 * self.lambda));
        *t * (1.0 / two_mu) - SymTensor3::identity() * (vol * t.trace())
    }

    /// `(C A):B`, or `(C⁻¹ A):B` when `inverse` is set.
    pub fn energy_inner(&self, a: &SymTensor3, b: &SymTensor3, inverse: bool) -> f64 {
        if inverse {
            self.hooke_inverse_apply(a).dot(b)
        } else {
            self.hooke_apply(a).dot(b)
        }
    }

    /// Smallest eigenvalue of `C` on symmetric tensors: `min(2μ, 2μ + 3λ)`.
    pub fn coercivity(&self) -> f64 {
        let two_mu = 2.0 * self.mu;
        two_mu.min(two_mu + 3.0 * self.lambda)
    }

    pub fn stiffness_mandel(&self) -> Mandel6 {
        let one = [1.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        Mandel6::identity() * (2.0 * self.mu) + Mandel6::outer(&one, &one) * self.lambda
    }

    pub fn compliance_mandel(&self) -> Mandel6 {
        let one = [1.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        let two_mu = 2.0 * self.mu;
        let vol = self.lambda / (two_mu * (two_mu + 3.0 * self.lambda));
        Mandel6::identity() * (1.0 / two_mu) - Mandel6::outer(&one, &one) * vol
    }
}
