//! Constitutive relations: the temperature-dependent Norton–Hoff flow rule
//! with its `1/k` regularization, the thermal stress function `f`, the yield
//! radius `β`, and the truncation family used to tame the heat equation.

mod flow;
mod functions;
mod material_point;
mod truncation;
mod validation;

pub use flow::{
    dissipation_density, flow_rate, flow_response, plastic_dissipation, regularization_rate,
    yield_excess, FlowResponse,
};
pub use functions::{ThermalStress, ThermalStressKind, YieldFunction, YieldKind, CLAMP_BLEND};
pub use material_point::{integrate_point, material_point_step, MaterialPointState, PointUpdate};
pub(crate) use material_point::integrate_point_from;
pub use truncation::{truncate, truncate_derivative, truncation_primitive};
pub use validation::{validate_material, MaterialCheck, MaterialReport};

use crate::error::ModelError;
use crate::tensor::ElasticModuli;

/// Complete material description for the truncated thermo-visco-elastic
/// system.
///
/// `trunc_k = f64::INFINITY` selects the untruncated, unregularized system.
#[derive(Clone, Copy, Debug)]
pub struct MaterialModel {
    pub moduli: ElasticModuli,
    pub r_exp: f64,
    pub trunc_k: f64,
    pub thermal_stress: ThermalStress,
    pub yield_fn: YieldFunction,
    /// Residual tolerance of the pointwise flow-rule solve.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl MaterialModel {
    pub fn new(
        moduli: ElasticModuli,
        r_exp: f64,
        trunc_k: f64,
        thermal_stress: ThermalStress,
        yield_fn: YieldFunction,
    ) -> Result<Self, ModelError> {
        let model = MaterialModel {
            moduli,
            r_exp,
            trunc_k,
            thermal_stress,
            yield_fn,
            newton_tol: 1e-10,
            newton_max_iter: 50,
        };
        model.check()?;
        Ok(model)
    }

    /// Re-checks every invariant; used after fields are edited in place.
    pub fn check(&self) -> Result<(), ModelError> {
        ElasticModuli::new(self.moduli.mu(), self.moduli.lambda())?;
        if !(self.r_exp > 1.0) || !self.r_exp.is_finite() {
            return Err(ModelError::InvalidExponent(self.r_exp));
        }
        if !(self.trunc_k > 0.0) {
            return Err(ModelError::InvalidTruncation(self.trunc_k));
        }
        self.thermal_stress.check()?;
        self.yield_fn.check()?;
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return Err(ModelError::InvalidSolverConfig(alloc::format!(
                "material newton_tol must be > 0 and newton_max_iter >= 1 (got {}, {})",
                self.newton_tol,
                self.newton_max_iter
            )));
        }
        Ok(())
    }

    pub fn with_truncation(mut self, k: f64) -> Result<Self, ModelError> {
        self.trunc_k = k;
        self.check()?;
        Ok(self)
    }

    pub fn is_truncated(&self) -> bool {
        self.trunc_k.is_finite()
    }

    /// `1/k`, zero for the untruncated system.
    pub fn inverse_k(&self) -> f64 {
        if self.trunc_k.is_finite() {
            1.0 / self.trunc_k
        } else {
            0.0
        }
    }

    /// Thermal stress evaluated on the truncated temperature, `f(T_k(θ))`.
    pub fn thermal_stress_truncated(&self, theta: f64) -> f64 {
        self.thermal_stress.eval(truncate(self.trunc_k, theta))
    }

    /// Derivative of `θ ↦ f(T_k(θ))`, or `None` when `f` has no closed-form
    /// derivative.
    pub fn thermal_stress_truncated_derivative(&self, theta: f64) -> Option<f64> {
        let dt = truncate_derivative(self.trunc_k, theta);
        if dt == 0.0 {
            return Some(0.0);
        }
        self.thermal_stress
            .derivative(truncate(self.trunc_k, theta))
            .map(|d| d * dt)
    }
}

impl Default for MaterialModel {
    fn default() -> Self {
        MaterialModel {
            moduli: ElasticModuli::new(1.0, 1.0).expect("default moduli are admissible"),
            r_exp: 2.0,
            trunc_k: f64::INFINITY,
            thermal_stress: ThermalStress::default(),
            yield_fn: YieldFunction::default(),
            newton_tol: 1e-10,
            newton_max_iter: 50,
        }
    }
}
