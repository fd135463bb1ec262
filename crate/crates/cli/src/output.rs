//! CSV, summary and VTK output of trajectories and studies.

use std::fs::File;
use std::io::Write as _;
use std::path::Path;

use thermovisc_core::diagnostics::{BoundReport, CauchyRow, EnergyLedger, KStudy};
use thermovisc_core::fem::FESpace;
use thermovisc_core::solver::Trajectory;
use thermovisc_core::MaterialModel;

use crate::error::CliError;
use crate::vtk;

/// Seventeen significant digits.
pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

pub const LEDGER_HEADER: [&str; 37] = [
    "step",
    "time",
    "dt",
    "elastic_energy",
    "stress_l2_sq",
    "regularization_energy",
    "thermal_content",
    "theta_l1",
    "thermal_functional",
    "elastic_energy_change",
    "algorithmic_dissipation",
    "viscous_dissipation",
    "plastic_dissipation",
    "regularization_dissipation",
    "body_force_work",
    "boundary_work",
    "lifting_work",
    "coupling_exchange",
    "mechanical_residual",
    "thermal_mass",
    "thermal_gradient",
    "thermal_coupling",
    "thermal_source",
    "boundary_heat",
    "injected_heat",
    "thermal_residual",
    "plastic_dissipation_thermal",
    "boundary_heat_total",
    "balance_residual",
    "balance_scale",
    "relative_balance",
    "plastic_mismatch",
    "strain_rate_sq",
    "thermal_stress_sq",
    "flow_term_power",
    "regularization_term_power",
    "stress_rate_power",
];

fn ledger_row(l: &EnergyLedger) -> Vec<String> {
    let m = &l.measures;
    let mut row = vec![l.step.to_string()];
    row.extend(
        [
            l.time,
            l.dt,
            m.elastic_energy,
            m.stress_l2_sq,
            m.regularization_energy,
            m.thermal_content,
            m.theta_l1,
            m.thermal_functional,
            l.elastic_energy_change,
            l.algorithmic_dissipation,
            l.viscous_dissipation,
            l.plastic_dissipation,
            l.regularization_dissipation,
            l.body_force_work,
            l.boundary_work,
            l.lifting_work,
            l.coupling_exchange,
            l.mechanical_residual,
            l.thermal_mass,
            l.thermal_gradient,
            l.thermal_coupling,
            l.thermal_source,
            l.boundary_heat,
            l.injected_heat,
            l.thermal_residual,
            l.plastic_dissipation_thermal,
            l.boundary_heat_total,
            l.balance_residual,
            l.balance_scale,
            l.relative_balance(),
            l.plastic_mismatch(),
            l.strain_rate_sq,
            l.thermal_stress_sq,
            l.flow_term_power,
            l.regularization_term_power,
            l.stress_rate_power,
        ]
        .map(fmt_f),
    );
    row
}

pub fn write_ledger_csv(path: &Path, ledgers: &[EnergyLedger]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(LEDGER_HEADER)?;
    for l in ledgers {
        w.write_record(ledger_row(l))?;
    }
    w.flush()?;
    Ok(())
}

const BOUNDS_HEADER: [&str; 14] = [
    "k",
    "status",
    "sup_stress_l2",
    "sup_regularization_energy",
    "strain_rate_integral",
    "sup_theta_l1",
    "energy_bound",
    "theta_w1q",
    "q",
    "thermal_stress_l2",
    "flow_term_norm",
    "regularization_term_norm",
    "stress_rate_norm",
    "error",
];

/// One row per truncation level; failed levels keep their error message.
pub fn write_bounds_csv(path: &Path, rows: &[(f64, Result<BoundReport, String>)]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(BOUNDS_HEADER)?;
    for (k, r) in rows {
        let mut row = vec![fmt_f(*k)];
        match r {
            Ok(b) => {
                row.push("ok".into());
                row.extend(
                    [
                        b.sup_stress_l2,
                        b.sup_regularization_energy,
                        b.strain_rate_integral,
                        b.sup_theta_l1,
                        b.energy_bound,
                        b.theta_w1q,
                        b.q,
                        b.thermal_stress_l2,
                        b.flow_term_norm,
                        b.regularization_term_norm,
                        b.stress_rate_norm,
                    ]
                    .map(fmt_f),
                );
                row.push(String::new());
            }
            Err(e) => {
                row.push("failed".into());
                row.extend(std::iter::repeat_n(String::new(), 11));
                row.push(e.clone());
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_cauchy_csv(path: &Path, rows: &[CauchyRow]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["k_coarse", "k_fine", "theta_l1_max", "stress_l2_max", "displacement_l2_max"])?;
    for r in rows {
        w.write_record(
            [r.k_coarse, r.k_fine, r.theta_l1_max, r.stress_l2_max, r.displacement_l2_max].map(fmt_f),
        )?;
    }
    w.flush()?;
    Ok(())
}

/// `key = value` lines.
pub fn write_summary(path: &Path, entries: &[(String, String)]) -> Result<(), CliError> {
    let mut f = File::create(path)?;
    for (k, v) in entries {
        writeln!(f, "{k} = {v}")?;
    }
    Ok(())
}

pub fn trajectory_summary(traj: &Trajectory, audit_tol: f64) -> Vec<(String, String)> {
    let worst_mismatch = traj.ledgers.iter().map(|l| l.plastic_mismatch()).fold(0.0, f64::max);
    let balance = traj.max_relative_balance();
    let newton: usize = traj.stats.iter().map(|s| s.momentum_iterations).sum();
    let heat: usize = traj.stats.iter().map(|s| s.heat_iterations).sum();
    vec![
        ("steps".into(), traj.n_steps().to_string()),
        ("dt".into(), fmt_f(traj.dt)),
        ("snapshots".into(), traj.snapshots.len().to_string()),
        ("max_relative_balance".into(), fmt_f(balance)),
        ("max_plastic_mismatch".into(), fmt_f(worst_mismatch)),
        ("audit_tol".into(), fmt_f(audit_tol)),
        (
            "audit".into(),
            if balance <= audit_tol && worst_mismatch <= audit_tol { "pass" } else { "fail" }.into(),
        ),
        ("momentum_newton_iterations".into(), newton.to_string()),
        ("heat_newton_iterations".into(), heat.to_string()),
    ]
}

pub fn write_snapshots(
    dir: &Path,
    space: &FESpace,
    model: &MaterialModel,
    traj: &Trajectory,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for s in &traj.snapshots {
        let title = format!("thermovisc step {} t = {}", s.step, fmt_f(s.step as f64 * traj.dt));
        vtk::write_vtk(&dir.join(format!("snapshot_{:05}.vtk", s.step)), space, model, &s.state, &title)?;
    }
    Ok(())
}

/// Everything produced by `run`: ledger, bounds, summary and, when enabled,
/// VTK snapshots under `vtk/`.
pub struct OutputOptions {
    pub csv: bool,
    pub vtk: bool,
    pub q: f64,
    pub audit_tol: f64,
}

pub fn write_outputs(
    dir: &Path,
    space: &FESpace,
    model: &MaterialModel,
    traj: &Trajectory,
    opts: &OutputOptions,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    if opts.csv {
        write_ledger_csv(&dir.join("ledger.csv"), &traj.ledgers)?;
        let b = thermovisc_core::diagnostics::apriori_bounds(space, model, traj, opts.q)
            .map_err(|e| e.to_string());
        write_bounds_csv(&dir.join("bounds.csv"), &[(model.trunc_k, b)])?;
    }
    write_summary(&dir.join("summary.txt"), &trajectory_summary(traj, opts.audit_tol))?;
    if opts.vtk {
        write_snapshots(&dir.join("vtk"), space, model, traj)?;
    }
    Ok(())
}

pub fn study_rows(study: &KStudy) -> Vec<(f64, Result<BoundReport, String>)> {
    study
        .runs
        .iter()
        .map(|r| (r.k, r.outcome.as_ref().map(|b| *b).map_err(|e| e.to_string())))
        .collect()
}
