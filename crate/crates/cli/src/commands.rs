//! Subcommands and the argument parser.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use thermovisc_core::constitutive::{material_point_step, yield_excess, MaterialPointState};
use thermovisc_core::diagnostics::{cauchy_table, mms_error, observed_rate, validate_k_list, ExactFields};
use thermovisc_core::fem::{build_lifting, FESpace, FieldsState, GivenData};
use thermovisc_core::solver::{run_simulation, SolverConfig, Trajectory};
use thermovisc_core::{MaterialModel, SolverError, SymTensor3};

use crate::config::{parse_config, RunConfig};
use crate::error::{CliError, ConfigError};
use crate::output::{self, fmt_f, OutputOptions};

#[derive(Debug, Parser)]
#[command(name = "thermovisc", version, about = "Quasi-static thermo-visco-elastic solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Overrides `output.dir`.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Size of the worker pool used by the study subcommands.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Reserved; every algorithm is deterministic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `output.snapshot_stride`.
    #[arg(long, global = true)]
    pub snapshot_stride: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Default)]
pub enum Refine {
    #[default]
    Space,
    Time,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the configured problem and write ledger, bounds and VTK.
    Run { config: PathBuf },
    /// Drive a single material point along `[material_point]`.
    MaterialPoint { config: PathBuf },
    /// Sample the admissibility conditions of the material functions.
    ValidateMaterial { config: PathBuf },
    /// Run the truncation sweep and tabulate Cauchy distances.
    StudyK {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        k_list: Option<Vec<f64>>,
    },
    /// Refinement study against `[exact]`.
    StudyMesh {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = Refine::Space)]
        refine: Refine,
    },
    /// Solve the two lifting problems and write the lifting fields.
    Lifting { config: PathBuf },
}

/// Parses `argv` and runs the command; returns the process exit status.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let load = |p: &Path| -> Result<RunConfig, CliError> {
        let mut cfg = parse_config(p)?;
        if let Some(d) = &cli.output_dir {
            cfg.output.dir = d.to_string_lossy().into_owned();
        }
        if let Some(s) = cli.snapshot_stride {
            if s == 0 {
                return Err(ConfigError::new("--snapshot-stride", "must be >= 1").into());
            }
            cfg.output.snapshot_stride = s;
        }
        cfg.echo();
        Ok(cfg)
    };
    let workers = cli.workers.unwrap_or(1);
    if workers == 0 {
        return Err(ConfigError::new("--workers", "must be >= 1").into());
    }
    match &cli.command {
        Command::Run { config } => run(&load(config)?),
        Command::MaterialPoint { config } => material_point(&load(config)?),
        Command::ValidateMaterial { config } => validate(&load(config)?),
        Command::StudyK { config, k_list } => {
            let cfg = load(config)?;
            let ks = k_list.clone().unwrap_or_else(|| cfg.diagnostics.k_list.clone());
            study_k(&cfg, &ks, workers).map(|_| ())
        }
        Command::StudyMesh { config, levels, refine } => {
            study_mesh(&load(config)?, *levels, *refine, workers).map(|_| ())
        }
        Command::Lifting { config } => lifting(&load(config)?),
    }
}

/// Assembled inputs of one simulation.
pub struct Problem {
    pub space: FESpace,
    pub model: MaterialModel,
    pub data: GivenData,
    pub solver: SolverConfig,
}

impl Problem {
    pub fn from_config(cfg: &RunConfig) -> Result<Self, CliError> {
        let space = cfg.space()?;
        let model = cfg.model()?;
        let solver = cfg.solver_config()?;
        let mut data = cfg.given_data(&space)?;
        if cfg.data.lifting {
            let l = build_lifting(
                &space,
                &model.moduli,
                &data,
                solver.dt,
                solver.n_steps(),
                &solver.linear_solver,
            )?;
            data.lifting = Some(l);
        }
        Ok(Problem {
            space,
            model,
            data,
            solver,
        })
    }

    pub fn simulate(&self) -> Result<Trajectory, SolverError> {
        run_simulation(&self.space, &self.model, &self.data, &self.solver)
    }
}

fn output_options(cfg: &RunConfig) -> OutputOptions {
    OutputOptions {
        csv: cfg.output.csv,
        vtk: cfg.output.vtk,
        q: cfg.diagnostics.q,
        audit_tol: cfg.audit_tol(),
    }
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let report = cfg.material_report()?;
    if !report.all_passed() {
        log::warn!("material functions violate a sampled admissibility condition");
    }
    let p = Problem::from_config(cfg)?;
    let traj = p.simulate()?;
    let dir = Path::new(&cfg.output.dir);
    output::write_outputs(dir, &p.space, &p.model, &traj, &output_options(cfg))?;
    let worst = traj.max_relative_balance();
    if worst > cfg.audit_tol() {
        log::warn!("energy balance residual {worst:e} exceeds audit_tol {:e}", cfg.audit_tol());
    }
    log::info!("wrote {} steps to {}", traj.n_steps(), dir.display());
    Ok(())
}

pub fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let r = cfg.material_report()?;
    println!("samples = {}", r.sample_count);
    for c in &r.checks {
        println!(
            "{} = {} (worst ratio {}, at theta = {})",
            c.name,
            if c.passed { "pass" } else { "fail" },
            fmt_f(c.worst_ratio),
            fmt_f(c.worst_at)
        );
    }
    if r.all_passed() {
        Ok(())
    } else {
        Err(CliError::Partial("material validation failed".into()))
    }
}

pub fn material_point(cfg: &RunConfig) -> Result<(), CliError> {
    let path = cfg
        .material_point_path()?
        .ok_or_else(|| ConfigError::new("material_point", "section is required for this command"))?;
    let model = cfg.model()?;
    let dir = Path::new(&cfg.output.dir);
    std::fs::create_dir_all(dir)?;
    let stress0 = cfg
        .data
        .stress0
        .as_ref()
        .map(|_| -> Result<SymTensor3, CliError> {
            let space = cfg.space()?;
            let data = cfg.given_data(&space)?;
            Ok(data.stress0.map(|f| f([0.0; 3])).unwrap_or(SymTensor3::ZERO))
        })
        .transpose()?
        .unwrap_or(SymTensor3::ZERO);
    let mut state = MaterialPointState {
        stress: stress0,
        temperature: path.theta0,
        time: 0.0,
    };
    let mut w = output::csv_writer(&dir.join("material_point.csv"))?;
    let header = [
        "step", "time", "theta", "stress_xx", "stress_yy", "stress_zz", "stress_yz", "stress_xz", "stress_xy",
        "dev_norm", "yield_excess",
    ];
    w.write_record(header)?;
    let mut record = |n: usize, s: &MaterialPointState| -> Result<(), CliError> {
        let mut row = vec![n.to_string(), fmt_f(s.time), fmt_f(s.temperature)];
        row.extend(s.stress.components().map(fmt_f));
        row.push(fmt_f(s.stress.dev().norm()));
        row.push(fmt_f(yield_excess(&model, &s.stress, s.temperature)));
        w.write_record(&row)?;
        Ok(())
    };
    record(0, &state)?;
    for (n, st) in path.steps.iter().enumerate() {
        let stress = material_point_step(&model, &state, &st.strain_rate, st.theta, st.dt).map_err(|e| e.at_time(st.t))?;
        state = MaterialPointState {
            stress,
            temperature: st.theta,
            time: st.t,
        };
        record(n + 1, &state)?;
    }
    w.flush()?;
    Ok(())
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Partial(format!("cannot start worker pool: {e}")))
}

fn k_label(k: f64) -> String {
    format!("{k}")
}

/// Outcome of `study-k`, with the per-level errors kept as text.
pub struct KStudyOutput {
    pub study: thermovisc_core::diagnostics::KStudy,
    /// `(k, message)` of the failed levels.
    pub failures: Vec<(f64, String)>,
}

/// Runs every level on a pool of `workers` threads and writes per-k ledgers,
/// `bounds.csv`, `cauchy.csv` and `summary.txt`. Returns an error (exit
/// status 1) after writing the tables when any level failed.
pub fn study_k(cfg: &RunConfig, k_list: &[f64], workers: usize) -> Result<KStudyOutput, CliError> {
    validate_k_list(k_list).map_err(|e| ConfigError::new("diagnostics.k_list", e.to_string()))?;
    let p = Problem::from_config(cfg)?;
    let dir = Path::new(&cfg.output.dir);
    std::fs::create_dir_all(dir)?;
    let runs: Vec<(f64, Result<Trajectory, SolverError>)> = pool(workers)?.install(|| {
        k_list
            .par_iter()
            .map(|&k| {
                let res = p
                    .model
                    .with_truncation(k)
                    .map_err(SolverError::from)
                    .and_then(|m| run_simulation(&p.space, &m, &p.data, &p.solver));
                (k, res)
            })
            .collect()
    });
    for (k, r) in &runs {
        match r {
            Ok(t) => output::write_ledger_csv(&dir.join(format!("ledger_k{}.csv", k_label(*k))), &t.ledgers)?,
            Err(e) => log::error!("k = {k}: {e}"),
        }
    }
    let study = cauchy_table(&p.space, &p.model, runs, cfg.diagnostics.q)
        .map_err(|e| ConfigError::new("diagnostics.q", e.to_string()))?;
    output::write_bounds_csv(&dir.join("bounds.csv"), &output::study_rows(&study))?;
    output::write_cauchy_csv(&dir.join("cauchy.csv"), &study.cauchy)?;
    let failures: Vec<(f64, String)> = study
        .runs
        .iter()
        .filter_map(|r| r.outcome.as_ref().err().map(|e| (r.k, e.to_string())))
        .collect();
    let yes_no = |b: bool| if b { "yes" } else { "no" }.to_string();
    output::write_summary(
        &dir.join("summary.txt"),
        &[
            ("levels".into(), k_list.len().to_string()),
            ("failed_levels".into(), failures.len().to_string()),
            ("energy_bound_spread".into(), fmt_f(study.energy_bound_spread())),
            ("theta_distances_decrease".into(), yes_no(study.theta_distances_decrease())),
            ("regularization_norms_decrease".into(), yes_no(study.regularization_norms_decrease())),
        ],
    )?;
    if failures.is_empty() {
        Ok(KStudyOutput { study, failures })
    } else {
        Err(CliError::Partial(format!(
            "{} of {} truncation levels failed; tables were written for the others",
            failures.len(),
            k_list.len()
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshLevel {
    pub resolution: [usize; 3],
    pub dt: f64,
    pub u_l2: f64,
    pub theta_l2: f64,
    pub stress_l2: Option<f64>,
}

/// Observed rates between consecutive levels, `(u, θ)`.
pub fn level_rates(levels: &[MeshLevel]) -> Vec<(f64, f64)> {
    levels
        .windows(2)
        .map(|w| (observed_rate(w[0].u_l2, w[1].u_l2, 2.0), observed_rate(w[0].theta_l2, w[1].theta_l2, 2.0)))
        .collect()
}

/// Halves the mesh width (or `dt`) `levels − 1` times starting from the
/// configured values and measures the final-time errors against `[exact]`.
pub fn study_mesh(cfg: &RunConfig, levels: usize, refine: Refine, workers: usize) -> Result<Vec<MeshLevel>, CliError> {
    if levels < 2 {
        return Err(ConfigError::new("--levels", "at least two levels are needed").into());
    }
    let exact = cfg
        .exact_fields()?
        .ok_or_else(|| ConfigError::new("exact", "section is required for study-mesh"))?;
    let base_res = cfg
        .mesh
        .resolution
        .ok_or_else(|| ConfigError::new("mesh.resolution", "study-mesh needs a box mesh"))?;
    let solver = cfg.solver_config()?;
    let t_end = solver.time_at(solver.n_steps());
    let mut variants = Vec::with_capacity(levels);
    for l in 0..levels {
        let mut c = cfg.clone();
        match refine {
            Refine::Space => c.mesh.resolution = Some(base_res.map(|n| n << l)),
            Refine::Time => c.solver.dt = cfg.solver.dt / (1u64 << l) as f64,
        }
        c.validate()?;
        variants.push(c);
    }
    let results: Vec<Result<MeshLevel, CliError>> = pool(workers)?.install(|| {
        variants
            .par_iter()
            .map(|c| {
                let p = Problem::from_config(c)?;
                let traj = p.simulate()?;
                let u = |x: [f64; 3]| std::array::from_fn(|i| exact.u[i].at(x, t_end));
                let th = |x: [f64; 3]| exact.theta.at(x, t_end);
                let st = |x: [f64; 3]| {
                    let s = exact.stress.as_ref().expect("checked");
                    SymTensor3::from_components(std::array::from_fn(|i| s[i].at(x, t_end)))
                };
                let e = mms_error(
                    &p.space,
                    &traj.final_state,
                    &ExactFields {
                        u: &u,
                        theta: &th,
                        stress: exact.stress.as_ref().map(|_| &st as &dyn Fn([f64; 3]) -> SymTensor3),
                    },
                );
                Ok(MeshLevel {
                    resolution: c.mesh.resolution.expect("box mesh"),
                    dt: c.solver.dt,
                    u_l2: e.u_l2,
                    theta_l2: e.theta_l2,
                    stress_l2: e.stress_l2,
                })
            })
            .collect()
    });
    let levels: Vec<MeshLevel> = results.into_iter().collect::<Result<_, _>>()?;
    let dir = Path::new(&cfg.output.dir);
    std::fs::create_dir_all(dir)?;
    let mut w = output::csv_writer(&dir.join("mesh_study.csv"))?;
    w.write_record(["nx", "ny", "nz", "dt", "u_l2", "theta_l2", "stress_l2", "rate_u", "rate_theta"])?;
    let rates = level_rates(&levels);
    for (i, l) in levels.iter().enumerate() {
        let (ru, rt) = if i == 0 {
            (String::new(), String::new())
        } else {
            (fmt_f(rates[i - 1].0), fmt_f(rates[i - 1].1))
        };
        let [nx, ny, nz] = l.resolution.map(|v| v.to_string());
        w.write_record([
            nx,
            ny,
            nz,
            fmt_f(l.dt),
            fmt_f(l.u_l2),
            fmt_f(l.theta_l2),
            l.stress_l2.map(fmt_f).unwrap_or_default(),
            ru,
            rt,
        ])?;
    }
    w.flush()?;
    Ok(levels)
}

pub fn lifting(cfg: &RunConfig) -> Result<(), CliError> {
    let space = cfg.space()?;
    let model = cfg.model()?;
    let solver = cfg.solver_config()?;
    let data = cfg.given_data(&space)?;
    let l = build_lifting(&space, &model.moduli, &data, solver.dt, solver.n_steps(), &solver.linear_solver)?;
    let dir = Path::new(&cfg.output.dir).join("lifting");
    std::fs::create_dir_all(&dir)?;
    let mut w = output::csv_writer(&dir.join("lifting.csv"))?;
    w.write_record(["step", "time", "u_max", "theta_min", "theta_max"])?;
    let stride = cfg.output.snapshot_stride;
    for n in 0..=l.steps() {
        let state = FieldsState {
            u: l.u[n].clone(),
            theta: l.theta[n].clone(),
            stress: vec![SymTensor3::ZERO; space.n_qp()],
            time: n as f64 * l.dt,
        };
        let amax = state.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tmin = state.theta.iter().cloned().fold(f64::INFINITY, f64::min);
        let tmax = state.theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        w.write_record([n.to_string(), fmt_f(state.time), fmt_f(amax), fmt_f(tmin), fmt_f(tmax)])?;
        if cfg.output.vtk && (n % stride == 0 || n == l.steps()) {
            let title = format!("lifting step {n}");
            crate::vtk::write_vtk(&dir.join(format!("lifting_{n:05}.vtk")), &space, &model, &state, &title)?;
        }
    }
    w.flush()?;
    Ok(())
}
