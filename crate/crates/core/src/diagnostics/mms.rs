//! Error norms against manufactured solutions.

use crate::fem::quadrature::HexRule;
use crate::fem::{FESpace, FieldsState, QP_PER_CELL};
use crate::math;
use crate::tensor::SymTensor3;

/// Exact fields at a fixed time.
pub struct ExactFields<'a> {
    pub u: &'a dyn Fn([f64; 3]) -> [f64; 3],
    pub theta: &'a dyn Fn([f64; 3]) -> f64,
    pub stress: Option<&'a dyn Fn([f64; 3]) -> SymTensor3>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MmsErrors {
    pub u_l2: f64,
    pub theta_l2: f64,
    /// Quadrature-point error of the stress, `None` without an exact stress.
    pub stress_l2: Option<f64>,
}

/// `L²` errors of `u` and `θ` with a 3×3×3 Gauss rule per cell, and the
/// stress error at the assembly quadrature points.
pub fn mms_error(space: &FESpace, state: &FieldsState, exact: &ExactFields<'_>) -> MmsErrors {
    let rule = HexRule::gauss(3);
    let (mut eu, mut et) = (0.0, 0.0);
    for c in 0..space.mesh().cell_count() {
        for q in space.points_with_rule(c, &rule) {
            let uh = space.vector_at(c, &q, &state.u);
            let ue = (exact.u)(q.x);
            let d = [uh[0] - ue[0], uh[1] - ue[1], uh[2] - ue[2]];
            eu += q.weight * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
            let th = space.scalar_at(c, &q, &state.theta) - (exact.theta)(q.x);
            et += q.weight * th * th;
        }
    }
    let stress_l2 = exact.stress.map(|ts| {
        let mut es = 0.0;
        for c in 0..space.mesh().cell_count() {
            for (iq, q) in space.cell_quad_points(c).iter().enumerate() {
                es += q.weight * (state.stress[c * QP_PER_CELL + iq] - ts(q.x)).norm_sq();
            }
        }
        math::sqrt(es)
    });
    MmsErrors {
        u_l2: math::sqrt(eu),
        theta_l2: math::sqrt(et),
        stress_l2,
    }
}

/// Observed order `log(e_coarse / e_fine) / log(refinement)`.
pub fn observed_rate(e_coarse: f64, e_fine: f64, refinement: f64) -> f64 {
    math::ln(e_coarse / e_fine) / math::ln(refinement)
}
