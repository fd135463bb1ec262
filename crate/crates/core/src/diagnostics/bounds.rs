use alloc::format;

use crate::constitutive::MaterialModel;
use crate::error::ModelError;
use crate::fem::FESpace;
use crate::math;
use crate::solver::Trajectory;

/// Suprema and time integrals of the quantities that stay bounded
/// uniformly in `k`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BoundReport {
    /// `sup_t ‖T‖_{L²}`.
    pub sup_stress_l2: f64,
    /// `sup_t (1/k)‖dev T‖^{2r}_{L^{2r}}`.
    pub sup_regularization_energy: f64,
    /// `∫₀ᵀ ‖ε(u_t)‖²_{L²}`.
    pub strain_rate_integral: f64,
    /// `sup_t ∫|θ|`.
    pub sup_theta_l1: f64,
    /// `sup_t` of `‖T‖² + (1/k)‖dev T‖^{2r}_{L^{2r}} + ∫₀ᵗ‖ε(u_t)‖² + ∫|θ|`.
    pub energy_bound: f64,
    /// `‖θ‖_{L^q(W^{1,q})}` over the stored snapshots.
    pub theta_w1q: f64,
    pub q: f64,
    /// `‖f(T_k(θ + θ̃))‖_{L²(L²)}`.
    pub thermal_stress_l2: f64,
    /// `L^{(r+1)/r}` norm of `{|dev T| − β}₊^r dev T/|dev T|`.
    pub flow_term_norm: f64,
    /// `L^{2r/(2r−1)}` norm of `(1/k)|dev T|^{2r−2} dev T`.
    pub regularization_term_norm: f64,
    /// `L^{(r+1)/r}` norm of `T_t`.
    pub stress_rate_norm: f64,
}

impl BoundReport {
    pub fn all_finite(&self) -> bool {
        [
            self.sup_stress_l2,
            self.sup_regularization_energy,
            self.strain_rate_integral,
            self.sup_theta_l1,
            self.energy_bound,
            self.theta_w1q,
            self.thermal_stress_l2,
            self.flow_term_norm,
            self.regularization_term_norm,
            self.stress_rate_norm,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// `∫(|θ|^q + |∇θ|^q)` with the assembly quadrature and elementwise
/// gradients.
pub fn w1q_integrand(space: &FESpace, theta: &[f64], q: f64) -> f64 {
    let mut acc = 0.0;
    for c in 0..space.mesh().cell_count() {
        for p in space.cell_quad_points(c) {
            let v = space.scalar_at(c, p, theta);
            let g = space.scalar_grad_at(c, p, theta);
            let gn = math::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
            acc += p.weight * (math::powf(math::abs(v), q) + math::powf(gn, q));
        }
    }
    acc
}

pub fn apriori_bounds(
    space: &FESpace,
    model: &MaterialModel,
    trajectory: &Trajectory,
    q: f64,
) -> Result<BoundReport, ModelError> {
    if !(q > 1.0 && q < 1.25) {
        return Err(ModelError::InvalidSolverConfig(format!(
            "integrability exponent q must lie in (1, 5/4), got {q}"
        )));
    }
    let r = model.r_exp;
    let m0 = trajectory.initial_measures;
    let mut rep = BoundReport {
        q,
        sup_stress_l2: m0.stress_l2_sq,
        sup_regularization_energy: m0.regularization_energy,
        sup_theta_l1: m0.theta_l1,
        energy_bound: m0.stress_l2_sq + m0.regularization_energy + m0.theta_l1,
        ..BoundReport::default()
    };
    let (mut fl, mut rg, mut sr, mut ts) = (0.0, 0.0, 0.0, 0.0);
    for l in &trajectory.ledgers {
        let m = l.measures;
        rep.strain_rate_integral += l.strain_rate_sq;
        rep.sup_stress_l2 = rep.sup_stress_l2.max(m.stress_l2_sq);
        rep.sup_regularization_energy = rep.sup_regularization_energy.max(m.regularization_energy);
        rep.sup_theta_l1 = rep.sup_theta_l1.max(m.theta_l1);
        let e = m.stress_l2_sq + m.regularization_energy + rep.strain_rate_integral + m.theta_l1;
        rep.energy_bound = rep.energy_bound.max(e);
        fl += l.flow_term_power;
        rg += l.regularization_term_power;
        sr += l.stress_rate_power;
        ts += l.thermal_stress_sq;
    }
    rep.sup_stress_l2 = math::sqrt(rep.sup_stress_l2);
    rep.flow_term_norm = math::powf(fl, r / (r + 1.0));
    rep.regularization_term_norm = math::powf(rg, (2.0 * r - 1.0) / (2.0 * r));
    rep.stress_rate_norm = math::powf(sr, r / (r + 1.0));
    rep.thermal_stress_l2 = math::sqrt(ts);

    let mut w = 0.0;
    for pair in trajectory.snapshots.windows(2) {
        let h = (pair[1].step - pair[0].step) as f64 * trajectory.dt;
        w += h * w1q_integrand(space, &pair[1].state.theta, q);
    }
    rep.theta_w1q = math::powf(w, 1.0 / q);
    Ok(rep)
}
