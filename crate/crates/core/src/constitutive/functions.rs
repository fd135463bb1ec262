use alloc::format;

use crate::error::ModelError;
use crate::math;

/// Shape of the thermal stress function `f`.
#[derive(Clone, Copy, Debug)]
pub enum ThermalStressKind {
    /// `B((1+θ)^α − 1)` for `θ ≥ 0`, `−B̃((1+|θ|)^{1/2} − 1)` for `θ < 0`.
    Power,
    /// `f ≡ 0`: no thermal expansion.
    Zero,
    /// `f(θ) = slope·θ`; violates sublinear growth, kept for validation runs.
    Linear { slope: f64 },
    Custom(fn(f64) -> f64),
}

/// Thermal stress function together with the constants of its growth
/// bounds `|f(θ)| ≤ a + B|θ|^α` (θ ≥ 0) and `|f(θ)| ≤ B̃(1+|θ|)^{1/2}` (θ < 0).
#[derive(Clone, Copy, Debug)]
pub struct ThermalStress {
    pub kind: ThermalStressKind,
    pub a: f64,
    pub b: f64,
    pub b_neg: f64,
    pub alpha: f64,
}

impl Default for ThermalStress {
    fn default() -> Self {
        ThermalStress {
            kind: ThermalStressKind::Power,
            a: 0.0,
            b: 1.0,
            b_neg: 1.0,
            alpha: 0.7,
        }
    }
}

impl ThermalStress {
    pub fn zero() -> Self {
        ThermalStress {
            kind: ThermalStressKind::Zero,
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if !(self.a >= 0.0) || !(self.b >= 0.0) {
            return Err(ModelError::InvalidThermalStress(format!(
                "a and B must be nonnegative (a = {}, B = {})",
                self.a, self.b
            )));
        }
        if !(self.alpha > 0.5 && self.alpha < 5.0 / 6.0) {
            return Err(ModelError::InvalidThermalStress(format!(
                "growth exponent alpha must lie in (1/2, 5/6), got {}",
                self.alpha
            )));
        }
        if !(self.b_neg > 0.0) {
            return Err(ModelError::InvalidThermalStress(format!(
                "negative-branch constant B~ must be > 0, got {}",
                self.b_neg
            )));
        }
        Ok(())
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match self.kind {
            ThermalStressKind::Power => {
                if theta >= 0.0 {
                    self.b * (math::powf(1.0 + theta, self.alpha) - 1.0)
                } else {
                    -self.b_neg * (math::sqrt(1.0 - theta) - 1.0)
                }
            }
            ThermalStressKind::Zero => 0.0,
            ThermalStressKind::Linear { slope } => slope * theta,
            ThermalStressKind::Custom(f) => f(theta),
        }
    }

    /// Closed-form derivative (right derivative at the branch point of the
    /// power form); `None` for custom functions.
    pub fn derivative(&self, theta: f64) -> Option<f64> {
        match self.kind {
            ThermalStressKind::Power => Some(if theta >= 0.0 {
                self.b * self.alpha * math::powf(1.0 + theta, self.alpha - 1.0)
            } else {
                0.5 * self.b_neg / math::sqrt(1.0 - theta)
            }),
            ThermalStressKind::Zero => Some(0.0),
            ThermalStressKind::Linear { slope } => Some(slope),
            ThermalStressKind::Custom(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, ThermalStressKind::Zero)
    }
}

/// Width of the quadratic blending zones of the smooth clamp, as a fraction
/// of `d`.
pub const CLAMP_BLEND: f64 = 0.1;

#[derive(Clone, Copy, Debug)]
pub enum YieldKind {
    /// `β ≡ d`.
    Constant,
    /// C¹ clamp of `d − θ` onto `[0, d]`: equal to `d − θ` away from the two
    /// blending zones of half-width `CLAMP_BLEND·d` around `θ = 0` and `θ = d`.
    SmoothClamp,
    /// Returns `(β(θ), β'(θ))`.
    Custom(fn(f64) -> (f64, f64)),
}

/// Temperature-dependent yield radius `β` with bounds `0 ≤ β ≤ d`,
/// `|β'| ≤ d̃`.
#[derive(Clone, Copy, Debug)]
pub struct YieldFunction {
    pub kind: YieldKind,
    pub d: f64,
    pub d_slope: f64,
}

impl Default for YieldFunction {
    fn default() -> Self {
        YieldFunction {
            kind: YieldKind::SmoothClamp,
            d: 1.0,
            d_slope: 1.0,
        }
    }
}

impl YieldFunction {
    pub fn constant(d: f64) -> Self {
        YieldFunction {
            kind: YieldKind::Constant,
            d,
            d_slope: 1.0,
        }
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if !(self.d > 0.0) || !(self.d_slope > 0.0) {
            return Err(ModelError::InvalidYield(format!(
                "d and d~ must be > 0 (d = {}, d~ = {})",
                self.d, self.d_slope
            )));
        }
        Ok(())
    }

    /// `(β(θ), β'(θ))`.
    pub fn eval(&self, theta: f64) -> (f64, f64) {
        match self.kind {
            YieldKind::Constant => (self.d, 0.0),
            YieldKind::SmoothClamp => {
                let x = (self.d - theta) / self.d;
                let (s, ds) = smooth_unit_clamp(x);
                (self.d * s, -ds)
            }
            YieldKind::Custom(f) => f(theta),
        }
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.eval(theta).0
    }
}

/// C¹ clamp of `x` onto `[0, 1]` with quadratic blends on `|x| < w` and
/// `|x − 1| < w`. Returns the value and the slope.
fn smooth_unit_clamp(x: f64) -> (f64, f64) {
    let w = CLAMP_BLEND;
    if x <= -w {
        (0.0, 0.0)
    } else if x < w {
        let y = x + w;
        (y * y / (4.0 * w), y / (2.0 * w))
    } else if x <= 1.0 - w {
        (x, 1.0)
    } else if x < 1.0 + w {
        let y = 1.0 + w - x;
        (1.0 - y * y / (4.0 * w), y / (2.0 * w))
    } else {
        (1.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_thermal_stress_examples() {
        let f = ThermalStress::default();
        assert_eq!(f.eval(0.0), 0.0);
        let v = f.eval(1.0);
        assert_relative_eq!(v, 2f64.powf(0.7) - 1.0, epsilon = 1e-15);
        assert_relative_eq!(v, 0.624_504_792_712_471, epsilon = 1e-12);
        assert!(v.abs() <= f.a + f.b * 1f64.powf(f.alpha));
        assert_relative_eq!(f.eval(-3.0), -1.0, epsilon = 1e-15);
        assert!(f.eval(-3.0).abs() <= f.b_neg * 2.0);
    }

    #[test]
    fn power_derivative_matches_finite_differences() {
        let f = ThermalStress::default();
        for theta in [-5.0, -0.3, 0.2, 1.0, 40.0] {
            let h = 1e-6;
            let fd = (f.eval(theta + h) - f.eval(theta - h)) / (2.0 * h);
            assert_relative_eq!(f.derivative(theta).unwrap(), fd, epsilon = 1e-7);
        }
    }

    #[test]
    fn alpha_outside_range_rejected() {
        let mut f = ThermalStress::default();
        f.alpha = 0.9;
        assert!(f.check().is_err());
        f.alpha = 0.5;
        assert!(f.check().is_err());
    }

    #[test]
    fn yield_examples() {
        let c = YieldFunction::constant(1.0);
        assert_eq!(c.eval(123.0), (1.0, 0.0));
        let s = YieldFunction::default();
        assert_eq!(s.eval(-10.0), (1.0, 0.0));
        assert_eq!(s.eval(10.0), (0.0, 0.0));
        let (v, dv) = s.eval(0.5);
        assert_relative_eq!(v, 0.5, epsilon = 1e-15);
        assert_eq!(dv, -1.0);
    }

    #[test]
    fn smooth_clamp_is_c1() {
        let s = YieldFunction::default();
        let w = CLAMP_BLEND;
        for knot in [-w, w, 1.0 - w, 1.0 + w] {
            let theta = s.d * (1.0 - knot);
            let (a, da) = s.eval(theta - 1e-12);
            let (b, db) = s.eval(theta + 1e-12);
            assert!((a - b).abs() < 1e-10);
            assert!((da - db).abs() < 1e-9);
        }
    }
}
