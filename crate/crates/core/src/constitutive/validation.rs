use alloc::vec::Vec;

use super::MaterialModel;
use crate::math;

const LOG_MIN: f64 = -6.0;
const LOG_MAX: f64 = 8.0;
const RATIO_TOL: f64 = 1e-9;
const SLOPE_TOL: f64 = 1e-6;

/// Outcome of one sampled admissibility condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Largest observed ratio (left side over right side of the condition);
    /// the condition holds when this is at most 1.
    pub worst_ratio: f64,
    /// Temperature at which the worst ratio was observed.
    pub worst_at: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaterialReport {
    pub sample_count: usize,
    pub checks: Vec<MaterialCheck>,
}

impl MaterialReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&MaterialCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn log_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| {
        let e = LOG_MIN + (LOG_MAX - LOG_MIN) * i as f64 / (n - 1) as f64;
        math::powf(10.0, e)
    })
}

fn worst<I: Iterator<Item = (f64, f64)>>(name: &'static str, samples: I, tol: f64) -> MaterialCheck {
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut worst_at = 0.0;
    let mut finite = true;
    for (theta, ratio) in samples {
        if !ratio.is_finite() {
            finite = false;
            worst_ratio = f64::INFINITY;
            worst_at = theta;
            break;
        }
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_at = theta;
        }
    }
    MaterialCheck {
        name,
        passed: finite && worst_ratio <= 1.0 + tol,
        worst_ratio,
        worst_at,
    }
}

/// Samples the growth conditions on `f` and the range and slope bounds on
/// `β` over a log-spaced temperature grid (both signs) plus a uniform grid
/// covering `[−2d − 2, 2d + 2]`. `sample_count` is raised to 100 if smaller.
pub fn validate_material(model: &MaterialModel, sample_count: usize) -> MaterialReport {
    let n = sample_count.max(100);
    let f = &model.thermal_stress;
    let beta = &model.yield_fn;
    let d = beta.d;
    let span = 2.0 * d + 2.0;
    let uniform = move |i: usize| -span + 2.0 * span * i as f64 / (n - 1) as f64;
    let all_points = || {
        log_grid(n)
            .chain(log_grid(n).map(|x| -x))
            .chain((0..n).map(uniform))
    };

    let growth_pos = worst(
        "f_growth_positive",
        log_grid(n).map(|theta| {
            let bound = f.a + f.b * math::powf(theta, f.alpha);
            let v = math::abs(f.eval(theta));
            (theta, if bound > 0.0 { v / bound } else if v == 0.0 { 0.0 } else { f64::INFINITY })
        }),
        RATIO_TOL,
    );
    let growth_neg = worst(
        "f_growth_negative",
        log_grid(n).map(|x| {
            let theta = -x;
            let bound = f.b_neg * math::sqrt(1.0 + x);
            (theta, math::abs(f.eval(theta)) / bound)
        }),
        RATIO_TOL,
    );
    let range = worst(
        "beta_range",
        all_points().map(|theta| {
            let v = beta.value(theta);
            // Negative values are mapped above 1 so they fail the same test.
            let ratio = if v < 0.0 { 1.0 + 1.0 + math::abs(v) / d } else { v / d };
            (theta, ratio)
        }),
        RATIO_TOL,
    );
    let slope = worst(
        "beta_slope",
        all_points().map(|theta| {
            let h = 1e-6 * (1.0 + math::abs(theta));
            let fd = (beta.value(theta + h) - beta.value(theta - h)) / (2.0 * h);
            (theta, math::abs(fd) / beta.d_slope)
        }),
        SLOPE_TOL,
    );
    MaterialReport {
        sample_count: n,
        checks: alloc::vec![growth_pos, growth_neg, range, slope],
    }
}
