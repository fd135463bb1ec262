/// `T_k(x) = min(k, max(x, −k))`.
#[inline]
pub fn truncate(level: f64, x: f64) -> f64 {
    debug_assert!(level > 0.0);
    if x > level {
        level
    } else if x < -level {
        -level
    } else {
        x
    }
}

/// One-sided derivative of `T_k`, taken as 1 on the closed band.
#[inline]
pub fn truncate_derivative(level: f64, x: f64) -> f64 {
    if x.abs() <= level {
        1.0
    } else {
        0.0
    }
}

/// Primitive `φ_k(x) = ∫₀ˣ T_k(s) ds`: quadratic on `|x| ≤ k`, linear outside.
#[inline]
pub fn truncation_primitive(level: f64, x: f64) -> f64 {
    debug_assert!(level > 0.0);
    let ax = x.abs();
    if ax <= level {
        0.5 * x * x
    } else {
        0.5 * level * level + level * (ax - level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncate_examples() {
        assert_eq!(truncate(5.0, 7.0), 5.0);
        assert_eq!(truncate(5.0, -3.0), -3.0);
        assert_eq!(truncate(2.0, -9.0), -2.0);
        assert_eq!(truncate(f64::INFINITY, -9.0), -9.0);
    }

    #[test]
    fn primitive_examples() {
        assert_eq!(truncation_primitive(2.0, 1.0), 0.5);
        assert_eq!(truncation_primitive(2.0, 3.0), 4.0);
        assert_eq!(truncation_primitive(2.0, -3.0), 4.0);
        for k in [0.1, 1.0, 7.0] {
            assert_eq!(truncation_primitive(k, 0.0), 0.0);
        }
        assert_eq!(truncation_primitive(f64::INFINITY, 3.0), 4.5);
    }

    #[test]
    fn primitive_derivative_is_truncation() {
        let k = 1.5;
        for i in -40..=40 {
            let x = 0.1 * i as f64 + 0.013;
            let h = 1e-6;
            let fd = (truncation_primitive(k, x + h) - truncation_primitive(k, x - h)) / (2.0 * h);
            assert!((fd - truncate(k, x)).abs() < 1e-8, "x = {x}");
        }
    }
}
