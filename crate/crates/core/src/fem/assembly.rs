//! Residuals and Jacobians of the discrete momentum and heat equations.
//!
//! The momentum residual eliminates the stress at each quadrature point
//! through the implicit flow-rule update, so the global unknown is the
//! displacement only.

use alloc::vec;
use alloc::vec::Vec;

use super::data::GivenData;
use super::space::{FESpace, QP_PER_CELL};
use crate::constitutive::{integrate_point, truncate, MaterialModel};
use crate::constitutive::integrate_point_from;
use crate::error::SolverError;
use crate::linalg::CsrMatrix;
use crate::math;
use crate::tensor::{ElasticModuli, Mandel6, SymTensor3};

const INV_SQRT2: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Mandel strain produced by a unit displacement of one node in each
/// coordinate direction.
#[inline]
pub fn strain_basis(g: &[f64; 3]) -> [[f64; 6]; 3] {
    [
        [g[0], 0.0, 0.0, 0.0, g[2] * INV_SQRT2, g[1] * INV_SQRT2],
        [0.0, g[1], 0.0, g[2] * INV_SQRT2, 0.0, g[0] * INV_SQRT2],
        [0.0, 0.0, g[2], g[1] * INV_SQRT2, g[0] * INV_SQRT2, 0.0],
    ]
}

/// Inputs of one momentum solve that do not change during the Newton loop.
#[derive(Clone, Copy, Debug)]
pub struct MomentumInput<'a> {
    pub u_now: &'a [f64],
    pub stress_now: &'a [SymTensor3],
    /// Nodal temperature entering `f(T_k(·))` and `β(·)`; includes `θ̃` in
    /// lifted runs.
    pub theta_coupling: &'a [f64],
    /// `ũ(t_{n+1}) − ũ(t_n)` in lifted runs; it drives the flow rule and
    /// replaces the body force.
    pub lift_increment: Option<&'a [f64]>,
    pub time_next: f64,
    pub dt: f64,
}

#[derive(Clone, Debug)]
pub struct MomentumAssembly {
    /// Residual on every displacement dof; rows of constrained dofs hold the
    /// reaction forces.
    pub residual: Vec<f64>,
    /// Per-dof sum of the magnitudes of all contributions.
    pub magnitude: Vec<f64>,
    /// Tangent on the free dofs.
    pub jacobian: Option<CsrMatrix>,
    /// Condensed stress at each quadrature point.
    pub stress: Vec<SymTensor3>,
    pub local_iterations: usize,
}

impl MomentumAssembly {
    pub fn free_residual(&self, space: &FESpace) -> Vec<f64> {
        space.dofs().free().iter().map(|&d| self.residual[d]).collect()
    }

    pub fn free_scale(&self, space: &FESpace) -> f64 {
        let v: Vec<f64> = space.dofs().free().iter().map(|&d| self.magnitude[d]).collect();
        math::norm2(&v)
    }
}

/// Nodal temperature interpolated to every quadrature point.
pub fn qp_values(space: &FESpace, nodal: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(space.n_qp());
    for c in 0..space.mesh().cell_count() {
        for q in space.cell_quad_points(c) {
            out.push(space.scalar_at(c, q, nodal));
        }
    }
    out
}

/// `div v` of a nodal displacement vector at every quadrature point.
pub fn qp_divergence(space: &FESpace, v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(space.n_qp());
    for c in 0..space.mesh().cell_count() {
        for q in space.cell_quad_points(c) {
            out.push(space.strain_at(c, q, v).trace());
        }
    }
    out
}

/// Momentum residual at the trial displacement `u_guess` (all dofs, with
/// the constrained entries already set to their boundary values).
///
/// `stress_guess`, when given, seeds the local flow-rule solves.
pub fn assemble_momentum(
    space: &FESpace,
    model: &MaterialModel,
    data: &GivenData,
    input: &MomentumInput<'_>,
    u_guess: &[f64],
    stress_guess: Option<&[SymTensor3]>,
    with_jacobian: bool,
) -> Result<MomentumAssembly, SolverError> {
    let ndof = 3 * space.n_nodes();
    let dt = input.dt;
    let inv_dt = 1.0 / dt;
    let moduli = &model.moduli;
    let stiff = moduli.stiffness_mandel();
    let lifted = input.lift_increment.is_some();
    let mut residual = vec![0.0; ndof];
    let mut magnitude = vec![0.0; ndof];
    let mut jacobian = if with_jacobian {
        Some(space.vector_matrix())
    } else {
        None
    };
    let mut stress = Vec::with_capacity(space.n_qp());
    let mut local_iterations = 0;
    let dofs = space.dofs();
    let ident = SymTensor3::identity();

    for (c, cell) in space.mesh().cells().iter().enumerate() {
        let mut ke = [[0.0; 24]; 24];
        for (iq, q) in space.cell_quad_points(c).iter().enumerate() {
            let gq = c * QP_PER_CELL + iq;
            let theta = space.scalar_at(c, q, input.theta_coupling);
            let beta = model.yield_fn.value(theta);
            let f_theta = model.thermal_stress_truncated(theta);
            let d_eps = space.strain_at(c, q, u_guess) - space.strain_at(c, q, input.u_now);
            let drive = match input.lift_increment {
                Some(dl) => d_eps + space.strain_at(c, q, dl),
                None => d_eps,
            };
            let rate = drive * inv_dt;
            let t_now = input.stress_now[gq];
            let up = match stress_guess {
                Some(sg) => integrate_point_from(model, &t_now, &rate, beta, dt, sg[gq])?,
                None => integrate_point(model, &t_now, &rate, beta, dt)?,
            };
            local_iterations += up.iterations;
            stress.push(up.stress);
            let viscous = moduli.hooke_apply(&d_eps) * inv_dt;
            let parts = [
                up.stress.to_mandel(),
                (ident * (-f_theta)).to_mandel(),
                viscous.to_mandel(),
            ];
            let force = if lifted {
                [0.0; 3]
            } else {
                data.body_force_at(q.x, input.time_next)
            };
            let mut bs = [[[0.0; 6]; 3]; 8];
            for a in 0..8 {
                bs[a] = strain_basis(&q.grad[a]);
                for comp in 0..3 {
                    let dof = 3 * cell[a] + comp;
                    let b = &bs[a][comp];
                    let mut total = 0.0;
                    let mut mag = 0.0;
                    for p in &parts {
                        let v = q.weight * math::dot(p, b);
                        total += v;
                        mag += math::abs(v);
                    }
                    let fw = q.weight * force[comp] * q.n[a];
                    residual[dof] += total - fw;
                    magnitude[dof] += mag + math::abs(fw);
                }
            }
            if with_jacobian {
                let k: Mandel6 = up.tangent + stiff * inv_dt;
                for a in 0..8 {
                    for ca in 0..3 {
                        let kb = k.apply(&bs[a][ca]);
                        for b in 0..8 {
                            for cb in 0..3 {
                                ke[3 * a + ca][3 * b + cb] += q.weight * math::dot(&kb, &bs[b][cb]);
                            }
                        }
                    }
                }
            }
        }
        if let Some(jac) = jacobian.as_mut() {
            scatter_vector(jac, dofs, cell, &ke);
        }
    }
    Ok(MomentumAssembly {
        residual,
        magnitude,
        jacobian,
        stress,
        local_iterations,
    })
}

fn scatter_vector(
    jac: &mut CsrMatrix,
    dofs: &super::space::DofMap,
    cell: &[usize; 8],
    ke: &[[f64; 24]; 24],
) {
    for a in 0..8 {
        for ca in 0..3 {
            let Some(i) = dofs.free_index(3 * cell[a] + ca) else {
                continue;
            };
            for b in 0..8 {
                for cb in 0..3 {
                    if let Some(j) = dofs.free_index(3 * cell[b] + cb) {
                        jac.add(i, j, ke[3 * a + ca][3 * b + cb]);
                    }
                }
            }
        }
    }
}

/// Free-dof matrix of `∫ C ε(v) : ε(w)`.
pub fn elastic_matrix(space: &FESpace, moduli: &ElasticModuli) -> CsrMatrix {
    let stiff = moduli.stiffness_mandel();
    let mut jac = space.vector_matrix();
    for (c, cell) in space.mesh().cells().iter().enumerate() {
        let mut ke = [[0.0; 24]; 24];
        for q in space.cell_quad_points(c) {
            let bs: [[[f64; 6]; 3]; 8] = core::array::from_fn(|a| strain_basis(&q.grad[a]));
            for a in 0..8 {
                for ca in 0..3 {
                    let kb = stiff.apply(&bs[a][ca]);
                    for b in 0..8 {
                        for cb in 0..3 {
                            ke[3 * a + ca][3 * b + cb] += q.weight * math::dot(&kb, &bs[b][cb]);
                        }
                    }
                }
            }
        }
        scatter_vector(&mut jac, space.dofs(), cell, &ke);
    }
    jac
}

/// `∫ C ε(u) : ε(N_i e_c)` on every dof.
pub fn elastic_action(space: &FESpace, moduli: &ElasticModuli, u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 3 * space.n_nodes()];
    for (c, cell) in space.mesh().cells().iter().enumerate() {
        for q in space.cell_quad_points(c) {
            let s = moduli.hooke_apply(&space.strain_at(c, q, u)).to_mandel();
            for a in 0..8 {
                let bs = strain_basis(&q.grad[a]);
                for comp in 0..3 {
                    out[3 * cell[a] + comp] += q.weight * math::dot(&s, &bs[comp]);
                }
            }
        }
    }
    out
}

/// `∫ F(·, t) · N_i e_c` on every dof.
pub fn body_force_load(space: &FESpace, data: &GivenData, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; 3 * space.n_nodes()];
    if data.body_force.is_none() {
        return out;
    }
    for (c, cell) in space.mesh().cells().iter().enumerate() {
        for q in space.cell_quad_points(c) {
            let f = data.body_force_at(q.x, t);
            for a in 0..8 {
                for comp in 0..3 {
                    out[3 * cell[a] + comp] += q.weight * f[comp] * q.n[a];
                }
            }
        }
    }
    out
}

/// `∫_∂Ω g_θ(·, t) N_i dS` on every node.
pub fn flux_load(space: &FESpace, data: &GivenData, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; space.n_nodes()];
    if data.g_theta.is_none() {
        return out;
    }
    let cells = space.mesh().cells();
    for p in space.face_points() {
        let g = data.g_theta_at(p.x, p.normal, t);
        for a in 0..8 {
            out[cells[p.cell][a]] += p.weight * g * p.n[a];
        }
    }
    out
}

/// `∫ s N_i` for a quadrature-point source `s`.
pub fn source_load(space: &FESpace, qp_source: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; space.n_nodes()];
    for (c, cell) in space.mesh().cells().iter().enumerate() {
        for (iq, q) in space.cell_quad_points(c).iter().enumerate() {
            let s = qp_source[c * QP_PER_CELL + iq];
            if s != 0.0 {
                for a in 0..8 {
                    out[cell[a]] += q.weight * s * q.n[a];
                }
            }
        }
    }
    out
}

/// Inputs of one heat solve.
#[derive(Clone, Copy, Debug)]
pub struct HeatInput<'a> {
    pub theta_now: &'a [f64],
    /// `div u_t` (including `div ũ_t` in lifted runs) at every quadrature
    /// point.
    pub div_rate: &'a [f64],
    /// Truncated dissipation source at every quadrature point.
    pub dissipation: &'a [f64],
    /// `θ̃(t_{n+1})` added inside `f` in lifted runs.
    pub theta_offset: Option<&'a [f64]>,
    /// Whether the Neumann data `g_θ` enters (it is carried by `θ̃` in lifted
    /// runs).
    pub include_flux: bool,
    pub time_next: f64,
    pub dt: f64,
}

#[derive(Clone, Debug)]
pub struct HeatAssembly {
    pub residual: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub jacobian: Option<CsrMatrix>,
}

/// Backward-Euler heat residual multiplied by `dt`:
/// `∫(θ − θₙ)v + dt∫∇θ·∇v + dt∫f(T_k(θ))div(u_t)v − dt∫(D + s)v − dt∫g_θ v`.
///
/// The Jacobian includes the `f′` coupling when `f` has a closed-form
/// derivative and falls back to the frozen-coefficient operator otherwise.
pub fn assemble_heat(
    space: &FESpace,
    model: &MaterialModel,
    data: &GivenData,
    input: &HeatInput<'_>,
    theta: &[f64],
    with_jacobian: bool,
) -> HeatAssembly {
    let nn = space.n_nodes();
    let dt = input.dt;
    let diff: Vec<f64> = theta.iter().zip(input.theta_now).map(|(a, b)| a - b).collect();
    let mass_part = space.mass().mul_vec(&diff);
    let lap_part = space.stiffness().mul_vec(theta);
    let mut residual = vec![0.0; nn];
    let mut magnitude = vec![0.0; nn];
    for i in 0..nn {
        let (m, l) = (mass_part[i], dt * lap_part[i]);
        residual[i] = m + l;
        magnitude[i] = math::abs(m) + math::abs(l);
    }
    let mut jacobian = if with_jacobian {
        let mut j = space.stiffness().clone();
        j.scale(dt);
        let m = space.mass();
        for i in 0..nn {
            let (cols, vals) = m.row(i);
            for (&col, &v) in cols.iter().zip(vals) {
                j.add(i, col, v);
            }
        }
        Some(j)
    } else {
        None
    };
    let has_source = data.heat_source.is_some();
    for (c, cell) in space.mesh().cells().iter().enumerate() {
        let mut ke = [[0.0; 8]; 8];
        let mut touched = false;
        for (iq, q) in space.cell_quad_points(c).iter().enumerate() {
            let gq = c * QP_PER_CELL + iq;
            let mut th = space.scalar_at(c, q, theta);
            if let Some(off) = input.theta_offset {
                th += space.scalar_at(c, q, off);
            }
            let div = input.div_rate[gq];
            let coupling = if div != 0.0 {
                model.thermal_stress_truncated(th) * div
            } else {
                0.0
            };
            let mut src = input.dissipation[gq];
            if has_source {
                src += data.heat_source_at(q.x, input.time_next);
            }
            for a in 0..8 {
                let cpl = dt * q.weight * coupling * q.n[a];
                let s = dt * q.weight * src * q.n[a];
                residual[cell[a]] += cpl - s;
                magnitude[cell[a]] += math::abs(cpl) + math::abs(s);
            }
            if with_jacobian && div != 0.0 {
                if let Some(df) = model.thermal_stress_truncated_derivative(th) {
                    touched = true;
                    for a in 0..8 {
                        for b in 0..8 {
                            ke[a][b] += dt * q.weight * df * div * q.n[a] * q.n[b];
                        }
                    }
                }
            }
        }
        if touched {
            if let Some(j) = jacobian.as_mut() {
                for a in 0..8 {
                    for b in 0..8 {
                        j.add(cell[a], cell[b], ke[a][b]);
                    }
                }
            }
        }
    }
    if input.include_flux && data.g_theta.is_some() {
        let g = flux_load(space, data, input.time_next);
        for i in 0..nn {
            residual[i] -= dt * g[i];
            magnitude[i] += math::abs(dt * g[i]);
        }
    }
    HeatAssembly {
        residual,
        magnitude,
        jacobian,
    }
}

/// `T_k` of the plastic dissipation `{|dev T| − β(θ)}₊^r |dev T|` at every
/// quadrature point, returned with the untruncated values.
pub fn dissipation_source(
    space: &FESpace,
    model: &MaterialModel,
    stress: &[SymTensor3],
    theta_coupling: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let th = qp_values(space, theta_coupling);
    let raw: Vec<f64> = stress
        .iter()
        .zip(&th)
        .map(|(t, &theta)| {
            crate::constitutive::plastic_dissipation(model, t, model.yield_fn.value(theta))
        })
        .collect();
    let trunc = raw.iter().map(|&d| truncate(model.trunc_k, d)).collect();
    (trunc, raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{build_box_mesh, FieldsState};

    fn fd_check(space: &FESpace, model: &MaterialModel, u: &[f64], input: &MomentumInput<'_>) {
        let data = GivenData::zero();
        let asm = assemble_momentum(space, model, &data, input, u, None, true).unwrap();
        let jac = asm.jacobian.unwrap().to_dense();
        let free = space.dofs().free().to_vec();
        let h = 1e-7;
        for (j, &dj) in free.iter().enumerate().take(6) {
            let mut up = u.to_vec();
            let mut um = u.to_vec();
            up[dj] += h;
            um[dj] -= h;
            let rp = assemble_momentum(space, model, &data, input, &up, None, false).unwrap();
            let rm = assemble_momentum(space, model, &data, input, &um, None, false).unwrap();
            for (i, &di) in free.iter().enumerate() {
                let fd = (rp.residual[di] - rm.residual[di]) / (2.0 * h);
                assert!((jac[i][j] - fd).abs() < 1e-4 * (1.0 + fd.abs()), "({i},{j}) {} {}", jac[i][j], fd);
            }
        }
    }

    #[test]
    fn zero_state_zero_residual() {
        let space = FESpace::new(build_box_mesh([1.0; 3], [2, 2, 2]).unwrap()).unwrap();
        let model = MaterialModel::default();
        let s = FieldsState::zero(&space);
        let input = MomentumInput {
            u_now: &s.u,
            stress_now: &s.stress,
            theta_coupling: &s.theta,
            lift_increment: None,
            time_next: 0.1,
            dt: 0.1,
        };
        let asm = assemble_momentum(&space, &model, &GivenData::zero(), &input, &s.u, None, false).unwrap();
        assert!(asm.residual.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn momentum_jacobian_matches_finite_differences() {
        let space = FESpace::new(build_box_mesh([1.0; 3], [2, 2, 2]).unwrap()).unwrap();
        let mut model = MaterialModel::default().with_truncation(4.0).unwrap();
        model.yield_fn = crate::constitutive::YieldFunction::constant(0.05);
        let s = FieldsState::zero(&space);
        let theta: Vec<f64> = space.mesh().vertices().iter().map(|x| x[0] + 0.5 * x[1]).collect();
        let u: Vec<f64> = (0..s.u.len()).map(|i| 0.01 * ((i * 7 % 11) as f64 - 5.0)).collect();
        let input = MomentumInput {
            u_now: &s.u,
            stress_now: &s.stress,
            theta_coupling: &theta,
            lift_increment: None,
            time_next: 0.1,
            dt: 0.1,
        };
        fd_check(&space, &model, &u, &input);
    }

    #[test]
    fn heat_constant_is_steady() {
        let space = FESpace::new(build_box_mesh([1.0; 3], [2, 2, 2]).unwrap()).unwrap();
        let mut model = MaterialModel::default();
        model.thermal_stress = crate::constitutive::ThermalStress::zero();
        let theta = vec![0.7; space.n_nodes()];
        let zeros = vec![0.0; space.n_qp()];
        let input = HeatInput {
            theta_now: &theta,
            div_rate: &zeros,
            dissipation: &zeros,
            theta_offset: None,
            include_flux: true,
            time_next: 0.1,
            dt: 0.1,
        };
        let h = assemble_heat(&space, &model, &GivenData::zero(), &input, &theta, false);
        assert!(h.residual.iter().all(|r| r.abs() < 1e-14));
    }
}
