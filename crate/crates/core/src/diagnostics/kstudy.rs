//! Cauchy-in-`k` comparison of trajectories of the truncated system.

use alloc::vec::Vec;

use super::bounds::{apriori_bounds, BoundReport};
use crate::constitutive::MaterialModel;
use crate::error::{ModelError, SolverError};
use crate::fem::{FESpace, FieldsState, GivenData, QP_PER_CELL};
use crate::math;
use crate::solver::{run_simulation, SolverConfig, Trajectory};

/// One entry of the sweep; `outcome` carries the error of a failed run.
#[derive(Clone, Debug)]
pub struct KRun {
    pub k: f64,
    pub outcome: Result<BoundReport, SolverError>,
}

/// Distances between the runs at two consecutive successful levels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CauchyRow {
    pub k_coarse: f64,
    pub k_fine: f64,
    /// `max_t ∫|θ^{k₁} − θ^{k₂}|` over the common snapshots.
    pub theta_l1_max: f64,
    /// `max_t ‖T^{k₁} − T^{k₂}‖_{L²}`.
    pub stress_l2_max: f64,
    /// `max_t ‖u^{k₁} − u^{k₂}‖_{L²}`.
    pub displacement_l2_max: f64,
}

#[derive(Clone, Debug)]
pub struct KStudy {
    pub runs: Vec<KRun>,
    pub cauchy: Vec<CauchyRow>,
}

impl KStudy {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.outcome.is_err()).count()
    }

    pub fn theta_distances_decrease(&self) -> bool {
        self.cauchy.windows(2).all(|w| w[1].theta_l1_max < w[0].theta_l1_max)
    }

    pub fn regularization_norms_decrease(&self) -> bool {
        let v: Vec<f64> = self
            .runs
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|b| b.regularization_term_norm))
            .collect();
        v.windows(2).all(|w| w[1] < w[0])
    }

    /// `max / min` of [`BoundReport::energy_bound`] over the successful runs.
    pub fn energy_bound_spread(&self) -> f64 {
        let v: Vec<f64> = self
            .runs
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|b| b.energy_bound))
            .collect();
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        if min > 0.0 {
            max / min
        } else if max == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    }
}

pub fn state_distances(space: &FESpace, a: &FieldsState, b: &FieldsState) -> (f64, f64, f64) {
    let (mut th, mut st, mut du) = (0.0, 0.0, 0.0);
    let dth: Vec<f64> = a.theta.iter().zip(&b.theta).map(|(x, y)| x - y).collect();
    let dd: Vec<f64> = a.u.iter().zip(&b.u).map(|(x, y)| x - y).collect();
    for c in 0..space.mesh().cell_count() {
        for (iq, q) in space.cell_quad_points(c).iter().enumerate() {
            let gq = c * QP_PER_CELL + iq;
            th += q.weight * math::abs(space.scalar_at(c, q, &dth));
            st += q.weight * (a.stress[gq] - b.stress[gq]).norm_sq();
            let v = space.vector_at(c, q, &dd);
            du += q.weight * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        }
    }
    (th, math::sqrt(st), math::sqrt(du))
}

pub fn cauchy_distance(space: &FESpace, coarse: &Trajectory, fine: &Trajectory) -> (f64, f64, f64) {
    let mut out = (0.0f64, 0.0f64, 0.0f64);
    for sa in &coarse.snapshots {
        if let Some(sb) = fine.snapshots.iter().find(|s| s.step == sa.step) {
            let d = state_distances(space, &sa.state, &sb.state);
            out = (out.0.max(d.0), out.1.max(d.1), out.2.max(d.2));
        }
    }
    out
}

/// Assembles the table from already computed runs, pairing consecutive
/// successful entries.
pub fn cauchy_table(
    space: &FESpace,
    model: &MaterialModel,
    runs: Vec<(f64, Result<Trajectory, SolverError>)>,
    q: f64,
) -> Result<KStudy, ModelError> {
    let mut out = Vec::with_capacity(runs.len());
    let mut cauchy = Vec::new();
    let mut prev: Option<(f64, Trajectory)> = None;
    for (k, res) in runs {
        match res {
            Ok(traj) => {
                let m = model.with_truncation(k)?;
                let b = apriori_bounds(space, &m, &traj, q)?;
                if let Some((pk, pt)) = prev.as_ref() {
                    let (th, st, du) = cauchy_distance(space, pt, &traj);
                    cauchy.push(CauchyRow {
                        k_coarse: *pk,
                        k_fine: k,
                        theta_l1_max: th,
                        stress_l2_max: st,
                        displacement_l2_max: du,
                    });
                }
                out.push(KRun { k, outcome: Ok(b) });
                prev = Some((k, traj));
            }
            Err(e) => out.push(KRun { k, outcome: Err(e) }),
        }
    }
    Ok(KStudy { runs: out, cauchy })
}

fn check_list(k_list: &[f64]) -> Result<(), ModelError> {
    if k_list.len() < 3 {
        return Err(ModelError::InvalidSolverConfig(alloc::format!(
            "a k-study needs at least 3 levels, got {}",
            k_list.len()
        )));
    }
    if k_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ModelError::InvalidSolverConfig(alloc::string::String::from(
            "k levels must be strictly increasing",
        )));
    }
    Ok(())
}

/// Runs one simulation per `k` (sequentially) and tabulates the distances.
/// A failing level is reported in its row and does not abort the sweep.
pub fn k_convergence_study(
    space: &FESpace,
    model: &MaterialModel,
    data: &GivenData,
    config: &SolverConfig,
    k_list: &[f64],
    q: f64,
) -> Result<KStudy, ModelError> {
    check_list(k_list)?;
    let runs = k_list
        .iter()
        .map(|&k| {
            let res = model
                .with_truncation(k)
                .map_err(SolverError::from)
                .and_then(|m| run_simulation(space, &m, data, config));
            (k, res)
        })
        .collect();
    cauchy_table(space, model, runs, q)
}

pub fn validate_k_list(k_list: &[f64]) -> Result<(), ModelError> {
    check_list(k_list)
}
