use super::MaterialModel;
use crate::math;
use crate::tensor::{Mandel6, SymTensor3};

/// `{|dev T| − β(θ)}₊`.
pub fn yield_excess(model: &MaterialModel, t: &SymTensor3, theta: f64) -> f64 {
    excess_with_beta(t.dev().norm(), model.yield_fn.value(theta))
}

#[inline]
fn excess_with_beta(s: f64, beta: f64) -> f64 {
    math::pos(s - beta)
}

/// Norton–Hoff term `{|dev T| − β(θ)}₊^r dev T / |dev T|`, zero at `dev T = 0`.
pub fn flow_rate(model: &MaterialModel, t: &SymTensor3, theta: f64) -> SymTensor3 {
    let dev = t.dev();
    let s = dev.norm();
    let ex = excess_with_beta(s, model.yield_fn.value(theta));
    if ex == 0.0 || s == 0.0 {
        return SymTensor3::ZERO;
    }
    dev * (math::powf(ex, model.r_exp) / s)
}

/// `(1/k)|dev T|^{2r−2} dev T`; zero for the untruncated model.
pub fn regularization_rate(model: &MaterialModel, t: &SymTensor3) -> SymTensor3 {
    let inv_k = model.inverse_k();
    if inv_k == 0.0 {
        return SymTensor3::ZERO;
    }
    let dev = t.dev();
    let s = dev.norm();
    if s == 0.0 {
        return SymTensor3::ZERO;
    }
    dev * (inv_k * math::powf(s, 2.0 * model.r_exp - 2.0))
}

/// `{|dev T| − β}₊^r |dev T|`, plus `(1/k)|dev T|^{2r}` when requested.
pub fn dissipation_density(
    model: &MaterialModel,
    t: &SymTensor3,
    theta: f64,
    include_regularization: bool,
) -> f64 {
    dissipation_with_beta(model, t, model.yield_fn.value(theta), include_regularization)
}

pub(crate) fn dissipation_with_beta(
    model: &MaterialModel,
    t: &SymTensor3,
    beta: f64,
    include_regularization: bool,
) -> f64 {
    let s = t.dev().norm();
    let mut d = math::powf(excess_with_beta(s, beta), model.r_exp) * s;
    if include_regularization {
        d += model.inverse_k() * math::powf(s, 2.0 * model.r_exp);
    }
    d
}

/// Plastic part of the dissipation for a given yield radius, without the
/// regularization term.
pub fn plastic_dissipation(model: &MaterialModel, t: &SymTensor3, beta: f64) -> f64 {
    dissipation_with_beta(model, t, beta, false)
}

/// Total inelastic rate `G(T) = g(s) dev T / s` with `s = |dev T|`,
/// `g(s) = {s − β}₊^r + (1/k)s^{2r−1}`, and its derivative in Mandel form.
#[derive(Clone, Copy, Debug)]
pub struct FlowResponse {
    pub rate: SymTensor3,
    pub jacobian: Mandel6,
    /// `|dev T|`.
    pub dev_norm: f64,
    /// `{|dev T| − β}₊`.
    pub excess: f64,
}

/// Evaluates the inelastic rate at stress `t` for a fixed yield radius.
///
/// At the yield surface the one-sided derivative from the plastic side is
/// used; since `r > 1` both sides agree and the Jacobian is continuous.
pub fn flow_response(model: &MaterialModel, t: &SymTensor3, beta: f64) -> FlowResponse {
    let r = model.r_exp;
    let inv_k = model.inverse_k();
    let dev = t.dev();
    let s = dev.norm();
    let ex = excess_with_beta(s, beta);
    if s == 0.0 {
        return FlowResponse {
            rate: SymTensor3::ZERO,
            jacobian: Mandel6::ZERO,
            dev_norm: 0.0,
            excess: ex,
        };
    }
    let mut g = 0.0;
    let mut dg = 0.0;
    if ex > 0.0 {
        g += math::powf(ex, r);
        dg += r * math::powf(ex, r - 1.0);
    }
    if inv_k > 0.0 {
        g += inv_k * math::powf(s, 2.0 * r - 1.0);
        dg += inv_k * (2.0 * r - 1.0) * math::powf(s, 2.0 * r - 2.0);
    }
    if g == 0.0 {
        return FlowResponse {
            rate: SymTensor3::ZERO,
            jacobian: Mandel6::ZERO,
            dev_norm: s,
            excess: ex,
        };
    }
    let n = (dev * (1.0 / s)).to_mandel();
    let nn = Mandel6::outer(&n, &n);
    let jacobian = nn * dg + (Mandel6::deviatoric_projector() - nn) * (g / s);
    FlowResponse {
        rate: dev * (g / s),
        jacobian,
        dev_norm: s,
        excess: ex,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::YieldFunction;
    use approx::assert_relative_eq;

    fn model(k: f64) -> MaterialModel {
        let mut m = MaterialModel::default().with_truncation(k).unwrap();
        m.yield_fn = YieldFunction::constant(1.0);
        m
    }

    fn dev_with_norm(s: f64) -> SymTensor3 {
        SymTensor3::diag(2.0, -1.0, -1.0) * (s / 6f64.sqrt())
    }

    #[test]
    fn yield_excess_examples() {
        let m = model(f64::INFINITY);
        assert_eq!(yield_excess(&m, &dev_with_norm(0.5), 0.0), 0.0);
        assert_relative_eq!(yield_excess(&m, &dev_with_norm(2.0), 0.0), 1.0, epsilon = 1e-14);
        let mut m0 = m;
        m0.yield_fn = YieldFunction::default();
        assert_eq!(yield_excess(&m0, &(SymTensor3::identity() * 4.0), 10.0), 0.0);
    }

    #[test]
    fn flow_rate_examples() {
        let m = model(f64::INFINITY);
        assert_eq!(flow_rate(&m, &dev_with_norm(0.7), 0.0), SymTensor3::ZERO);
        assert_eq!(flow_rate(&m, &SymTensor3::identity(), 0.0), SymTensor3::ZERO);
        let t = dev_with_norm(2.0) + SymTensor3::identity() * 3.0;
        let g = flow_rate(&m, &t, 0.0);
        assert_relative_eq!(g.norm(), 1.0, epsilon = 1e-14);
        assert!(g.trace().abs() < 1e-14);
        let dir = t.dev() * 0.5;
        assert!((g - dir).norm() < 1e-14);
    }

    #[test]
    fn regularization_examples() {
        let m = model(2.0);
        let t = dev_with_norm(1.0);
        assert!((regularization_rate(&m, &t) - t * 0.5).norm() < 1e-15);
        assert_eq!(regularization_rate(&m, &SymTensor3::identity()), SymTensor3::ZERO);
        assert_eq!(regularization_rate(&model(f64::INFINITY), &t), SymTensor3::ZERO);
    }

    #[test]
    fn dissipation_examples() {
        let m = model(2.0);
        assert_eq!(dissipation_density(&m, &dev_with_norm(0.9), 0.0, false), 0.0);
        assert_relative_eq!(dissipation_density(&m, &dev_with_norm(2.0), 0.0, false), 2.0, epsilon = 1e-13);
        assert_relative_eq!(dissipation_density(&m, &dev_with_norm(2.0), 0.0, true), 10.0, epsilon = 1e-13);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let m = model(3.0);
        let t = SymTensor3::new(1.3, -0.4, 0.2, 0.7, -0.5, 0.9);
        let resp = flow_response(&m, &t, 0.4);
        let base = t.to_mandel();
        let h = 1e-6;
        for j in 0..6 {
            let mut p = base;
            let mut q = base;
            p[j] += h;
            q[j] -= h;
            let gp = flow_response(&m, &SymTensor3::from_mandel(&p), 0.4).rate.to_mandel();
            let gq = flow_response(&m, &SymTensor3::from_mandel(&q), 0.4).rate.to_mandel();
            for i in 0..6 {
                let fd = (gp[i] - gq[i]) / (2.0 * h);
                assert!((resp.jacobian.0[i][j] - fd).abs() < 1e-6, "({i},{j})");
            }
        }
    }
}
