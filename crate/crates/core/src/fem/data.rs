use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::space::FESpace;
use crate::tensor::SymTensor3;

/// `(x, t) ↦ R³`.
pub type VectorField = Arc<dyn Fn([f64; 3], f64) -> [f64; 3] + Send + Sync>;
/// `(x, t) ↦ R`.
pub type ScalarField = Arc<dyn Fn([f64; 3], f64) -> f64 + Send + Sync>;
/// Boundary flux `(x, outward normal, t) ↦ ∂θ/∂n`.
pub type FluxField = Arc<dyn Fn([f64; 3], [f64; 3], f64) -> f64 + Send + Sync>;
pub type TensorField = Arc<dyn Fn([f64; 3]) -> SymTensor3 + Send + Sync>;

/// Precomputed lifting fields at the time levels `t_n = n·dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lifting {
    pub dt: f64,
    /// `ũ(t_n)` as nodal displacement vectors.
    pub u: Vec<Vec<f64>>,
    /// `θ̃(t_n)` as nodal temperature vectors.
    pub theta: Vec<Vec<f64>>,
}

impl Lifting {
    pub fn steps(&self) -> usize {
        self.u.len().saturating_sub(1)
    }
}

/// Body force, boundary data, initial data and optional lifting fields.
/// Absent fields are zero.
#[derive(Clone, Default)]
pub struct GivenData {
    pub body_force: Option<VectorField>,
    pub g_d: Option<VectorField>,
    /// Closed-form `∂g_D/∂t`; when absent a central difference of `g_d` is
    /// used where the rate is needed.
    pub g_d_rate: Option<VectorField>,
    pub g_theta: Option<FluxField>,
    /// Extra volumetric heat source, used to inject manufactured forcing.
    pub heat_source: Option<ScalarField>,
    pub u0: Option<VectorField>,
    pub stress0: Option<TensorField>,
    pub theta0: Option<ScalarField>,
    pub lifting: Option<Lifting>,
}

impl core::fmt::Debug for GivenData {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("GivenData")
            .field("body_force", &self.body_force.is_some())
            .field("g_d", &self.g_d.is_some())
            .field("g_d_rate", &self.g_d_rate.is_some())
            .field("g_theta", &self.g_theta.is_some())
            .field("heat_source", &self.heat_source.is_some())
            .field("u0", &self.u0.is_some())
            .field("stress0", &self.stress0.is_some())
            .field("theta0", &self.theta0.is_some())
            .field("lifting", &self.lifting.as_ref().map(|l| l.steps()))
            .finish()
    }
}

impl GivenData {
    pub fn zero() -> Self {
        GivenData::default()
    }

    pub fn body_force_at(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        self.body_force.as_ref().map_or([0.0; 3], |f| f(x, t))
    }

    pub fn g_d_at(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        self.g_d.as_ref().map_or([0.0; 3], |f| f(x, t))
    }

    pub fn g_d_rate_at(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        if let Some(r) = &self.g_d_rate {
            return r(x, t);
        }
        match &self.g_d {
            None => [0.0; 3],
            Some(g) => {
                let h = 1e-6 * (1.0 + crate::math::abs(t));
                let (a, b) = (g(x, t + h), g(x, t - h));
                [
                    (a[0] - b[0]) / (2.0 * h),
                    (a[1] - b[1]) / (2.0 * h),
                    (a[2] - b[2]) / (2.0 * h),
                ]
            }
        }
    }

    pub fn g_theta_at(&self, x: [f64; 3], normal: [f64; 3], t: f64) -> f64 {
        self.g_theta.as_ref().map_or(0.0, |f| f(x, normal, t))
    }

    pub fn heat_source_at(&self, x: [f64; 3], t: f64) -> f64 {
        self.heat_source.as_ref().map_or(0.0, |f| f(x, t))
    }

    pub fn is_lifted(&self) -> bool {
        self.lifting.is_some()
    }
}

/// Discrete `(u, T, θ)` at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldsState {
    /// Nodal displacement, dof `3·vertex + component`.
    pub u: Vec<f64>,
    /// Nodal temperature.
    pub theta: Vec<f64>,
    /// One stress tensor per quadrature point, cell-major.
    pub stress: Vec<SymTensor3>,
    pub time: f64,
}

impl FieldsState {
    pub fn zero(space: &FESpace) -> Self {
        FieldsState {
            u: vec![0.0; 3 * space.n_nodes()],
            theta: vec![0.0; space.n_nodes()],
            stress: vec![SymTensor3::ZERO; space.n_qp()],
            time: 0.0,
        }
    }

    pub fn matches(&self, space: &FESpace) -> bool {
        self.u.len() == 3 * space.n_nodes()
            && self.theta.len() == space.n_nodes()
            && self.stress.len() == space.n_qp()
    }

    /// Initial state: `u₀` and `θ` truncated at `k` at the nodes, `T₀` at the
    /// quadrature points.
    pub fn initial(space: &FESpace, data: &GivenData, trunc_k: f64) -> Self {
        let mut s = Self::zero(space);
        if let Some(u0) = &data.u0 {
            s.u = space.interpolate_vector(|x| u0(x, 0.0));
        }
        if let Some(th) = &data.theta0 {
            s.theta = space.interpolate_scalar(|x| crate::constitutive::truncate(trunc_k, th(x, 0.0)));
        }
        if let Some(t0) = &data.stress0 {
            s.stress = space.quad_points().iter().map(|q| t0(q.x)).collect();
        }
        s
    }
}
