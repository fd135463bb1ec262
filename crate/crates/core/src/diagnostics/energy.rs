//! Discrete energy identities of one backward-Euler step.
//!
//! Testing the momentum equation with `Δu = u^{n+1} − u^n` and using the
//! implicit flow rule at each quadrature point gives
//!
//! `ΔE_el + ½∫C⁻¹ΔT:ΔT + ∫Cε(Δu):ε(Δu)/dt + dt∫(G_flow + G_reg):T
//!   = ∫F·Δu + W_∂ + ∫T:ε(Δũ) + ∫f(T_k θ) div Δu`,
//!
//! where `W_∂` is the work of the reactions on the Dirichlet dofs. Testing
//! the heat equation with `v = I_h T_M(θ^{n+1})` gives the thermal identity.
//! Every term is evaluated with the assembly quadrature, so both identities
//! hold up to solver tolerances.

use alloc::vec::Vec;

use crate::constitutive::{truncate, truncation_primitive, MaterialModel};
use crate::error::SolverError;
use crate::fem::assembly::{assemble_momentum, flux_load, MomentumInput};
use crate::fem::{FESpace, FieldsState, GivenData, QP_PER_CELL};
use crate::math;
use crate::tensor::SymTensor3;

/// Integrals of the current state that enter the a-priori bounds.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StateMeasures {
    /// `½∫C⁻¹T:T`.
    pub elastic_energy: f64,
    /// `‖T‖²_{L²}`.
    pub stress_l2_sq: f64,
    /// `(1/k)‖dev T‖^{2r}_{L^{2r}}`.
    pub regularization_energy: f64,
    /// `∫θ`.
    pub thermal_content: f64,
    /// `∫|θ|`.
    pub theta_l1: f64,
    /// `∫φ_M(θ)`.
    pub thermal_functional: f64,
}

/// Every term of the two discrete identities over one step, plus the
/// per-step pieces of the time-integrated bound quantities.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyLedger {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub measures: StateMeasures,

    pub elastic_energy_change: f64,
    /// `½∫C⁻¹(T^{n+1} − T^n):(T^{n+1} − T^n)`, the numerical dissipation of
    /// backward Euler.
    pub algorithmic_dissipation: f64,
    /// `dt∫Cε(u_t):ε(u_t)`.
    pub viscous_dissipation: f64,
    /// `dt∫{|dev T| − β}₊^r |dev T|`, evaluated as `dt∫G_flow(T):T`.
    pub plastic_dissipation: f64,
    /// `dt(1/k)∫|dev T|^{2r}`.
    pub regularization_dissipation: f64,
    /// `dt∫F·u_t`.
    pub body_force_work: f64,
    /// Work of the Dirichlet reactions.
    pub boundary_work: f64,
    /// `∫T:ε(Δũ)`, nonzero in lifted runs only.
    pub lifting_work: f64,
    /// `dt∫f(T_k θ) div u_t`.
    pub coupling_exchange: f64,
    pub mechanical_residual: f64,

    /// `∫(θ^{n+1} − θ^n) v`.
    pub thermal_mass: f64,
    /// `dt∫∇θ·∇v`.
    pub thermal_gradient: f64,
    /// `dt∫f(T_k θ) div u_t v`.
    pub thermal_coupling: f64,
    /// `dt∫T_k(D) v`.
    pub thermal_source: f64,
    /// `dt∫_∂Ω g_θ v`.
    pub boundary_heat: f64,
    /// `dt∫s v` for an injected source `s`.
    pub injected_heat: f64,
    pub thermal_residual: f64,
    /// `dt∫D` with the untruncated plastic dissipation density, the heat
    /// budget counterpart of [`Self::plastic_dissipation`].
    pub plastic_dissipation_thermal: f64,
    /// `dt∫_∂Ω g_θ`.
    pub boundary_heat_total: f64,

    /// `|mechanical_residual| + |thermal_residual|`.
    pub balance_residual: f64,
    /// `1 + ` the largest term magnitude.
    pub balance_scale: f64,

    /// `dt‖ε(u_t)‖²_{L²}`.
    pub strain_rate_sq: f64,
    /// `dt‖f(T_k θ)‖²_{L²}`.
    pub thermal_stress_sq: f64,
    /// `dt∫{|dev T| − β}₊^{r+1}`.
    pub flow_term_power: f64,
    /// `dt∫|(1/k)|dev T|^{2r−1}|^{2r/(2r−1)}`.
    pub regularization_term_power: f64,
    /// `dt∫|T_t|^{(r+1)/r}`.
    pub stress_rate_power: f64,
}

impl EnergyLedger {
    pub fn relative_balance(&self) -> f64 {
        self.balance_residual / self.balance_scale
    }

    pub fn plastic_mismatch(&self) -> f64 {
        math::abs(self.plastic_dissipation - self.plastic_dissipation_thermal)
            / (1.0 + math::abs(self.plastic_dissipation))
    }

    fn terms(&self) -> [f64; 18] {
        [
            self.elastic_energy_change,
            self.algorithmic_dissipation,
            self.viscous_dissipation,
            self.plastic_dissipation,
            self.regularization_dissipation,
            self.body_force_work,
            self.boundary_work,
            self.lifting_work,
            self.coupling_exchange,
            self.thermal_mass,
            self.thermal_gradient,
            self.thermal_coupling,
            self.thermal_source,
            self.boundary_heat,
            self.injected_heat,
            self.measures.elastic_energy,
            self.measures.thermal_content,
            self.plastic_dissipation_thermal,
        ]
    }
}

/// Level `M` of the thermal test function; defaults to `k`.
pub fn audit_level(model: &MaterialModel, level: Option<f64>) -> f64 {
    level.unwrap_or(model.trunc_k)
}

pub fn state_measures(
    space: &FESpace,
    model: &MaterialModel,
    state: &FieldsState,
    level: f64,
) -> StateMeasures {
    let inv_k = model.inverse_k();
    let mut m = StateMeasures::default();
    for (c, _) in space.mesh().cells().iter().enumerate() {
        for (iq, q) in space.cell_quad_points(c).iter().enumerate() {
            let t = &state.stress[c * QP_PER_CELL + iq];
            let th = space.scalar_at(c, q, &state.theta);
            m.elastic_energy += 0.5 * q.weight * model.moduli.energy_inner(t, t, true);
            m.stress_l2_sq += q.weight * t.norm_sq();
            if inv_k > 0.0 {
                m.regularization_energy +=
                    q.weight * inv_k * math::powf(t.dev().norm(), 2.0 * model.r_exp);
            }
            m.thermal_content += q.weight * th;
            m.theta_l1 += q.weight * math::abs(th);
            m.thermal_functional += q.weight * truncation_primitive(level, th);
        }
    }
    m
}

/// Everything the audit needs about one converged step.
#[derive(Clone, Copy)]
pub struct AuditInput<'a> {
    pub space: &'a FESpace,
    pub model: &'a MaterialModel,
    pub data: &'a GivenData,
    pub now: &'a FieldsState,
    pub next: &'a FieldsState,
    /// Nodal temperature used in `f` and `β` by the mechanical solve.
    pub theta_coupling: &'a [f64],
    pub lift_increment: Option<&'a [f64]>,
    pub theta_offset: Option<&'a [f64]>,
    pub step: usize,
    pub dt: f64,
    pub level: f64,
}

pub fn energy_audit(input: &AuditInput<'_>) -> Result<EnergyLedger, SolverError> {
    let AuditInput {
        space,
        model,
        data,
        now,
        next,
        theta_coupling,
        lift_increment,
        theta_offset,
        step,
        dt,
        level,
    } = *input;
    let r = model.r_exp;
    let inv_k = model.inverse_k();
    let inv_dt = 1.0 / dt;
    let lifted = lift_increment.is_some();
    let du: Vec<f64> = next.u.iter().zip(&now.u).map(|(a, b)| a - b).collect();
    let v: Vec<f64> = next.theta.iter().map(|&t| truncate(level, t)).collect();

    let mut led = EnergyLedger {
        step,
        time: next.time,
        dt,
        measures: state_measures(space, model, next, level),
        ..EnergyLedger::default()
    };
    let before = state_measures(space, model, now, level);
    led.elastic_energy_change = led.measures.elastic_energy - before.elastic_energy;

    let reaction_pass = assemble_momentum(
        space,
        model,
        data,
        &MomentumInput {
            u_now: &now.u,
            stress_now: &now.stress,
            theta_coupling,
            lift_increment,
            time_next: next.time,
            dt,
        },
        &next.u,
        Some(&next.stress),
        false,
    )?;
    led.boundary_work = space
        .dofs()
        .constrained()
        .iter()
        .map(|&d| reaction_pass.residual[d] * du[d])
        .sum();

    let cells = space.mesh().cells();
    let mut inv_dt_pow = 0.0;
    for (c, cell) in cells.iter().enumerate() {
        for (iq, q) in space.cell_quad_points(c).iter().enumerate() {
            let gq = c * QP_PER_CELL + iq;
            let w = q.weight;
            let t = next.stress[gq];
            let d_t = t - now.stress[gq];
            let th_c = space.scalar_at(c, q, theta_coupling);
            let beta = model.yield_fn.value(th_c);
            let f_c = model.thermal_stress_truncated(th_c);
            let d_eps = space.strain_at(c, q, &du);

            led.algorithmic_dissipation += 0.5 * w * model.moduli.energy_inner(&d_t, &d_t, true);
            led.viscous_dissipation += w * model.moduli.energy_inner(&d_eps, &d_eps, false) * inv_dt;

            let dev = t.dev();
            let s = dev.norm();
            let ex = math::pos(s - beta);
            if ex > 0.0 && s > 0.0 {
                let flow = dev * (math::powf(ex, r) / s);
                led.plastic_dissipation += dt * w * flow.dot(&t);
                let raw = math::powf(ex, r) * s;
                led.plastic_dissipation_thermal += dt * w * raw;
                led.flow_term_power += dt * w * math::powf(ex, r + 1.0);
            }
            if inv_k > 0.0 && s > 0.0 {
                let reg = inv_k * math::powf(s, 2.0 * r);
                led.regularization_dissipation += dt * w * reg;
                let mag = inv_k * math::powf(s, 2.0 * r - 1.0);
                led.regularization_term_power +=
                    dt * w * math::powf(mag, 2.0 * r / (2.0 * r - 1.0));
            }
            if !lifted {
                let fvec = data.body_force_at(q.x, next.time);
                let uq = space.vector_at(c, q, &du);
                led.body_force_work += w * (fvec[0] * uq[0] + fvec[1] * uq[1] + fvec[2] * uq[2]);
            }
            let mut div_rate = d_eps.trace() * inv_dt;
            if let Some(dl) = lift_increment {
                let e_l = space.strain_at(c, q, dl);
                led.lifting_work += w * t.dot(&e_l);
                div_rate += e_l.trace() * inv_dt;
            }
            led.coupling_exchange += w * f_c * d_eps.trace();

            let vq = space.scalar_at(c, q, &v);
            let mut th_next = space.scalar_at(c, q, &next.theta);
            if let Some(off) = theta_offset {
                th_next += space.scalar_at(c, q, off);
            }
            let f_next = model.thermal_stress_truncated(th_next);
            led.thermal_coupling += dt * w * f_next * div_rate * vq;
            let raw_d = math::powf(ex, r) * s;
            led.thermal_source += dt * w * truncate(model.trunc_k, raw_d) * vq;
            led.injected_heat += dt * w * data.heat_source_at(q.x, next.time) * vq;

            led.strain_rate_sq += dt * w * (d_eps * inv_dt).norm_sq();
            led.thermal_stress_sq += dt * w * f_next * f_next;
            inv_dt_pow += w * math::powf((d_t * inv_dt).norm(), (r + 1.0) / r);
            let _ = cell;
        }
    }
    led.stress_rate_power = dt * inv_dt_pow;

    let dth: Vec<f64> = next.theta.iter().zip(&now.theta).map(|(a, b)| a - b).collect();
    led.thermal_mass = math::dot(&v, &space.mass().mul_vec(&dth));
    led.thermal_gradient = dt * math::dot(&v, &space.stiffness().mul_vec(&next.theta));
    if !lifted && data.g_theta.is_some() {
        let g = flux_load(space, data, next.time);
        led.boundary_heat = dt * math::dot(&v, &g);
        led.boundary_heat_total = dt * g.iter().sum::<f64>();
    }

    led.mechanical_residual = led.elastic_energy_change
        + led.algorithmic_dissipation
        + led.viscous_dissipation
        + led.plastic_dissipation
        + led.regularization_dissipation
        - led.body_force_work
        - led.boundary_work
        - led.lifting_work
        - led.coupling_exchange;
    led.thermal_residual = led.thermal_mass + led.thermal_gradient + led.thermal_coupling
        - led.thermal_source
        - led.boundary_heat
        - led.injected_heat;
    led.balance_residual = math::abs(led.mechanical_residual) + math::abs(led.thermal_residual);
    led.balance_scale = 1.0 + led.terms().iter().fold(0.0f64, |m, t| m.max(math::abs(*t)));
    Ok(led)
}

/// `½∫C⁻¹T:T` for a quadrature-point stress field.
pub fn elastic_energy(space: &FESpace, model: &MaterialModel, stress: &[SymTensor3]) -> f64 {
    space
        .quad_points()
        .iter()
        .zip(stress)
        .map(|(q, t)| 0.5 * q.weight * model.moduli.energy_inner(t, t, true))
        .sum()
}
