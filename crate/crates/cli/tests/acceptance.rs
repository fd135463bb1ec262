//! Acceptance run: one PASS/FAIL line per criterion, with the measured value
//! and the pinned tolerance. Runs without the libtest harness so the lines
//! always reach the output.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command as Proc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermovisc::commands::{level_rates, study_k, study_mesh, Problem, Refine};
use thermovisc::parse_config;
use thermovisc_core::constitutive::{
    flow_rate, flow_response, material_point_step, regularization_rate, truncate, truncation_primitive,
    MaterialPointState, ThermalStress, YieldFunction,
};
use thermovisc_core::fem::{build_box_mesh, FESpace, GivenData, Mesh};
use thermovisc_core::linalg::LinearSolver;
use thermovisc_core::solver::{run_simulation, OuterCoupling, SolverConfig};
use thermovisc_core::{ElasticModuli, MaterialModel, SymTensor3};

const ROUNDTRIP_TOL: f64 = 1e-12;
const MONOTONE_FLOOR: f64 = -1e-12;
const CONVEXITY_FLOOR: f64 = -1e-12;
const ORACLE_FACTOR: f64 = 5.0;
const PATCH_TOL: f64 = 1e-10;
const SPACE_RATE: (f64, f64) = (1.7, 2.3);
const TIME_RATE: (f64, f64) = (0.8, 1.2);
const AUDIT_TOL: f64 = 1e-8;
const PLASTIC_TOL: f64 = 1e-8;
const K_BAND: f64 = 2.0;
const LIFT_TOL: f64 = 1e-8;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch() -> tempfile::TempDir {
    tempfile::tempdir().expect("temporary directory")
}

fn random_tensor(rng: &mut ChaCha8Rng, scale: f64) -> SymTensor3 {
    SymTensor3::from_components(std::array::from_fn(|_| scale * rng.random_range(-1.0..1.0)))
}

fn random_moduli(rng: &mut ChaCha8Rng) -> ElasticModuli {
    let mu = rng.random_range(0.1..10.0);
    let lambda = rng.random_range(-0.5 * mu..10.0);
    ElasticModuli::new(mu, lambda).unwrap()
}

fn c1_roundtrip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let tensors: Vec<SymTensor3> = (0..10_000)
        .map(|_| {
            let s = 10f64.powf(rng.random_range(-3.0..3.0));
            random_tensor(&mut rng, s)
        })
        .collect();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m = random_moduli(&mut rng);
        for s in &tensors {
            let back = m.hooke_inverse_apply(&m.hooke_apply(s));
            worst = worst.max((back - *s).norm() / s.norm());
        }
    }
    outcome(worst <= ROUNDTRIP_TOL, format!("max relative error {worst:.3e} (tol {ROUNDTRIP_TOL:e})"))
}

fn operator(model: &MaterialModel, t: &SymTensor3, theta: f64) -> SymTensor3 {
    flow_rate(model, t, theta) + regularization_rate(model, t)
}

fn random_model(rng: &mut ChaCha8Rng, k: f64) -> MaterialModel {
    let mut m = MaterialModel::default();
    m.r_exp = rng.random_range(1.2..4.0);
    m.trunc_k = k;
    m.yield_fn = YieldFunction {
        d: rng.random_range(0.1..2.0),
        ..YieldFunction::default()
    };
    m
}

fn c2_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_mono, mut worst_strict, mut worst_diss) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for _ in 0..10_000 {
        let theta = rng.random_range(-1.0..3.0);
        let a = random_tensor(&mut rng, 3.0);
        let b = random_tensor(&mut rng, 3.0);
        let m = random_model(&mut rng, f64::INFINITY);
        let mono = (operator(&m, &a, theta) - operator(&m, &b, theta)).dot(&(a - b));
        worst_mono = worst_mono.min(mono);
        let k = rng.random_range(1.0..50.0);
        let mk = random_model(&mut rng, k);
        if (a.dev() - b.dev()).norm() > 0.0 {
            let strict = (operator(&mk, &a, theta) - operator(&mk, &b, theta)).dot(&(a - b));
            worst_strict = worst_strict.min(strict);
        }
        worst_diss = worst_diss.min(operator(&mk, &a, theta).dot(&a));
    }
    let ok = worst_mono >= MONOTONE_FLOOR && worst_strict > 0.0 && worst_diss >= 0.0;
    outcome(
        ok,
        format!(
            "min monotone pairing {worst_mono:.3e} (floor {MONOTONE_FLOOR:e}), min with finite k {worst_strict:.3e} (> 0), min dissipation {worst_diss:.3e} (>= 0)"
        ),
    )
}

fn c3_truncation() -> Outcome {
    let mut ok = true;
    let mut worst_conv = f64::INFINITY;
    let mut worst_lower = f64::INFINITY;
    for &m in &[0.5, 1.0, 7.0] {
        let n = 1000;
        let h = 8.0 * m / n as f64;
        let xs: Vec<f64> = (0..=n).map(|i| -4.0 * m + i as f64 * h).collect();
        for &x in &xs {
            if truncate(m, x).abs() > x.abs().min(m) {
                ok = false;
            }
            let phi = truncation_primitive(m, x);
            worst_lower = worst_lower.min(phi - 0.5 * (x * x).min(m * x.abs()));
        }
        for w in xs.windows(3) {
            let d2 = truncation_primitive(m, w[0]) - 2.0 * truncation_primitive(m, w[1]) + truncation_primitive(m, w[2]);
            worst_conv = worst_conv.min(d2);
        }
    }
    ok &= worst_conv >= CONVEXITY_FLOOR && worst_lower >= 0.0;
    outcome(
        ok,
        format!("min second difference {worst_conv:.3e} (floor {CONVEXITY_FLOOR:e}), min lower-bound slack {worst_lower:.3e}"),
    )
}

/// RK4 with many substeps on `T' = C(ė − G(T, β(θ(t))))`.
fn rk4_oracle(model: &MaterialModel, rate: &SymTensor3, theta: &dyn Fn(f64) -> f64, dt: f64, steps: usize) -> Vec<SymTensor3> {
    let sub = 50;
    let rhs = |t: &SymTensor3, time: f64| {
        let g = flow_response(model, t, model.yield_fn.value(theta(time))).rate;
        model.moduli.hooke_apply(&(*rate - g))
    };
    let h = dt / sub as f64;
    let mut t = SymTensor3::ZERO;
    let mut out = Vec::with_capacity(steps);
    for n in 0..steps {
        for s in 0..sub {
            let time = n as f64 * dt + s as f64 * h;
            let k1 = rhs(&t, time);
            let k2 = rhs(&(t + k1 * (0.5 * h)), time + 0.5 * h);
            let k3 = rhs(&(t + k2 * (0.5 * h)), time + 0.5 * h);
            let k4 = rhs(&(t + k3 * h), time + h);
            t = t + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        out.push(t);
    }
    out
}

fn c4_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (dt, steps) = (0.01, 100);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mut model = MaterialModel::default();
        model.moduli = ElasticModuli::new(rng.random_range(0.5..2.0), rng.random_range(0.0..2.0)).unwrap();
        model.r_exp = rng.random_range(1.5..3.0);
        model.trunc_k = if rng.random_bool(0.5) { rng.random_range(2.0..20.0) } else { f64::INFINITY };
        let rate = random_tensor(&mut rng, 1.0);
        let slope = rng.random_range(-0.5..1.0);
        let theta = move |t: f64| slope * t;
        let exact = rk4_oracle(&model, &rate, &theta, dt, steps);
        let scale = model.moduli.hooke_apply(&rate).norm();
        let mut state = MaterialPointState {
            stress: SymTensor3::ZERO,
            temperature: 0.0,
            time: 0.0,
        };
        for (n, ex) in exact.iter().enumerate() {
            let t = (n + 1) as f64 * dt;
            match material_point_step(&model, &state, &rate, theta(t), dt) {
                Ok(s) => state.stress = s,
                Err(e) => return outcome(false, format!("material point failed: {e}")),
            }
            worst = worst.max((state.stress - *ex).max_abs_component() / (dt * scale));
        }
    }
    outcome(
        worst <= ORACLE_FACTOR,
        format!("max error / (dt * loading scale) = {worst:.3} (limit {ORACLE_FACTOR})"),
    )
}

const GRAD: [[f64; 3]; 3] = [[0.02, 0.05, -0.01], [0.0, -0.03, 0.04], [0.01, 0.02, 0.015]];

fn linear(x: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| (0..3).map(|j| GRAD[i][j] * x[j]).sum())
}

fn rigid(x: [f64; 3], t: f64) -> [f64; 3] {
    let c = [0.1, -0.2, 0.05];
    let w = [0.03, -0.01, 0.02];
    let wx = [w[1] * x[2] - w[2] * x[1], w[2] * x[0] - w[0] * x[2], w[0] * x[1] - w[1] * x[0]];
    std::array::from_fn(|i| t * (c[i] + wx[i]))
}

fn patch_meshes() -> Vec<Mesh> {
    let one = build_box_mesh([1.0; 3], [1, 1, 1]).unwrap();
    let m = build_box_mesh([1.0; 3], [2, 2, 2]).unwrap();
    let mut v = m.vertices().to_vec();
    v[13] = [0.43, 0.57, 0.52];
    let eight = Mesh::new(v, m.cells().to_vec(), m.boundary_faces().to_vec()).unwrap();
    vec![one, eight]
}

fn c5_patch() -> Outcome {
    let cfg = SolverConfig {
        dt: 0.1,
        t_end: 0.5,
        linear_solver: LinearSolver::Direct,
        outer_coupling: OuterCoupling::FixedPoint,
        ..SolverConfig::default()
    };
    let mut elastic = MaterialModel::default();
    elastic.yield_fn = YieldFunction::constant(1e6);
    elastic.thermal_stress = ThermalStress::zero();
    let exact_stress = elastic.moduli.hooke_apply(&(SymTensor3::sym(&GRAD) * 0.5));
    let (mut worst_const, mut worst_rigid) = (0.0f64, 0.0f64);
    for mesh in patch_meshes() {
        let space = FESpace::new(mesh.clone()).unwrap();
        let data = GivenData {
            g_d: Some(Arc::new(|x, t| linear(x).map(|v| v * t))),
            ..GivenData::default()
        };
        let Ok(traj) = run_simulation(&space, &elastic, &data, &cfg) else {
            return outcome(false, "constant-stress patch run failed".into());
        };
        for (i, x) in space.mesh().vertices().iter().enumerate() {
            let ex = linear(*x).map(|v| 0.5 * v);
            for c in 0..3 {
                worst_const = worst_const.max((traj.final_state.u[3 * i + c] - ex[c]).abs());
            }
        }
        for t in &traj.final_state.stress {
            worst_const = worst_const.max((*t - exact_stress).norm());
        }

        let space = FESpace::with_dirichlet_tags(mesh, BTreeSet::from([0])).unwrap();
        let mut model = MaterialModel::default();
        model.yield_fn = YieldFunction::constant(0.5);
        let data = GivenData {
            g_d: Some(Arc::new(rigid)),
            ..GivenData::default()
        };
        let Ok(traj) = run_simulation(&space, &model, &data, &cfg) else {
            return outcome(false, "rigid-motion patch run failed".into());
        };
        for (i, x) in space.mesh().vertices().iter().enumerate() {
            let ex = rigid(*x, 0.5);
            for c in 0..3 {
                worst_rigid = worst_rigid.max((traj.final_state.u[3 * i + c] - ex[c]).abs());
            }
        }
        for t in &traj.final_state.stress {
            worst_rigid = worst_rigid.max(t.norm());
        }
    }
    outcome(
        worst_const <= PATCH_TOL && worst_rigid <= PATCH_TOL,
        format!("constant-stress error {worst_const:.3e}, rigid-motion error {worst_rigid:.3e} (tol {PATCH_TOL:e})"),
    )
}

fn in_range(v: f64, r: (f64, f64)) -> bool {
    v >= r.0 && v <= r.1
}

fn c6_mms() -> Outcome {
    let dir = scratch();
    let mut space_cfg = parse_config(&configs().join("mms.toml")).unwrap();
    space_cfg.output.dir = dir.path().join("space").to_string_lossy().into_owned();
    let mut time_cfg = parse_config(&configs().join("mms_time.toml")).unwrap();
    time_cfg.output.dir = dir.path().join("time").to_string_lossy().into_owned();
    let spatial = match study_mesh(&space_cfg, 3, Refine::Space, 3) {
        Ok(l) => level_rates(&l),
        Err(e) => return outcome(false, format!("spatial study failed: {e}")),
    };
    let temporal = match study_mesh(&time_cfg, 3, Refine::Time, 3) {
        Ok(l) => level_rates(&l),
        Err(e) => return outcome(false, format!("temporal study failed: {e}")),
    };
    let ok = spatial.iter().all(|&(u, t)| in_range(u, SPACE_RATE) && in_range(t, SPACE_RATE))
        && temporal.iter().all(|&(_, t)| in_range(t, TIME_RATE));
    let fmt = |v: &[(f64, f64)], u: bool| {
        v.iter()
            .map(|r| if u { format!("u {:.3} theta {:.3}", r.0, r.1) } else { format!("theta {:.3}", r.1) })
            .collect::<Vec<_>>()
            .join("; ")
    };
    outcome(
        ok,
        format!(
            "spatial 2/4/8: [{}] in [{}, {}]; temporal dt/2, dt/4: [{}] in [{}, {}]",
            fmt(&spatial, true),
            SPACE_RATE.0,
            SPACE_RATE.1,
            fmt(&temporal, false),
            TIME_RATE.0,
            TIME_RATE.1
        ),
    )
}

fn c7_audit() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["elastic", "thermoelastic", "yielding"] {
        let cfg = parse_config(&configs().join(format!("{name}.toml"))).unwrap();
        let p = Problem::from_config(&cfg).unwrap();
        if !p.solver.linear_solver.is_direct() {
            ok = false;
        }
        let traj = match p.simulate() {
            Ok(t) => t,
            Err(e) => return outcome(false, format!("{name}: {e}")),
        };
        let balance = traj.max_relative_balance();
        let mismatch = traj
            .ledgers
            .iter()
            .map(|l| {
                let scale = l.plastic_dissipation.abs().max(l.plastic_dissipation_thermal.abs());
                if scale > 0.0 {
                    (l.plastic_dissipation - l.plastic_dissipation_thermal).abs() / scale
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max);
        let total: f64 = traj.ledgers.iter().map(|l| l.plastic_dissipation).sum();
        ok &= balance <= AUDIT_TOL && mismatch <= PLASTIC_TOL;
        parts.push(format!("{name}: balance {balance:.2e}, plastic mismatch {mismatch:.2e} (total {total:.3e})"));
    }
    if let Some(y) = parts.last() {
        if y.ends_with("(total 0.000e0)") {
            ok = false;
            parts.push("yielding config never yields".into());
        }
    }
    outcome(ok, format!("{} (tol {AUDIT_TOL:e}, {PLASTIC_TOL:e})", parts.join("; ")))
}

fn c8_ksweep() -> Outcome {
    let dir = scratch();
    let mut cfg = parse_config(&configs().join("yielding.toml")).unwrap();
    cfg.output.dir = dir.path().to_string_lossy().into_owned();
    let ks = [2.0, 4.0, 8.0, 16.0, 32.0];
    let out = match study_k(&cfg, &ks, 5) {
        Ok(o) => o,
        Err(e) => return outcome(false, format!("study failed: {e}")),
    };
    let s = &out.study;
    let spread = s.energy_bound_spread();
    let th: Vec<String> = s.cauchy.iter().map(|r| format!("{:.3}", r.theta_l1_max)).collect();
    let rg: Vec<String> = s
        .runs
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|b| format!("{:.3}", b.regularization_term_norm)))
        .collect();
    let ok = spread <= K_BAND && s.theta_distances_decrease() && s.regularization_norms_decrease() && s.cauchy.len() == 4;
    outcome(
        ok,
        format!(
            "(a) bound spread {spread:.3} (band {K_BAND}); (b) theta distances [{}]; (c) regularization norms [{}]",
            th.join(", "),
            rg.join(", ")
        ),
    )
}

fn c9_lifting() -> Outcome {
    let lifted_cfg = parse_config(&configs().join("lifting.toml")).unwrap();
    let mut direct_cfg = lifted_cfg.clone();
    direct_cfg.data.lifting = false;
    let run = |c| Problem::from_config(c).and_then(|p| p.simulate().map_err(Into::into));
    let (lifted, direct) = match (run(&lifted_cfg), run(&direct_cfg)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return outcome(false, "one of the runs failed".into()),
    };
    let mut worst = 0.0f64;
    let mut max_u = 0.0f64;
    for (a, b) in lifted.snapshots.iter().zip(&direct.snapshots) {
        for (x, y) in a.state.u.iter().zip(&b.state.u) {
            worst = worst.max((x - y).abs());
            max_u = max_u.max(y.abs());
        }
    }
    outcome(
        worst <= LIFT_TOL && lifted.snapshots.len() == direct.snapshots.len(),
        format!("max |u_lifted - u_direct| {worst:.3e} (tol {LIFT_TOL:e}, max |u| {max_u:.3})"),
    )
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                out.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn c10_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_thermovisc");
    let dir = scratch();
    let mut names: Vec<String> = std::fs::read_dir(configs())
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension().is_some_and(|x| x == "toml")).then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    let mut compared = 0;
    for name in &names {
        let mut outs = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("{name}_{rep}"));
            let status = Proc::new(bin)
                .arg("run")
                .arg(configs().join(format!("{name}.toml")))
                .arg("--output-dir")
                .arg(&out)
                .env("RUST_LOG", "error")
                .status()
                .unwrap();
            if !status.success() {
                return outcome(false, format!("`run {name}` exited with {status}"));
            }
            outs.push(out);
        }
        let (a, b) = (csv_files(&outs[0]), csv_files(&outs[1]));
        if a.is_empty() || a != b {
            return outcome(false, format!("{name}: CSV inventories differ or are empty"));
        }
        for f in &a {
            if std::fs::read(outs[0].join(f)).unwrap() != std::fs::read(outs[1].join(f)).unwrap() {
                return outcome(false, format!("{name}: {} differs between runs", f.display()));
            }
            compared += 1;
        }
    }
    outcome(true, format!("{} configs, {compared} CSV files byte-identical", names.len()))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("elasticity roundtrip", Duration::from_secs(1), c1_roundtrip),
        ("monotonicity suite", Duration::from_secs(5), c2_monotonicity),
        ("truncation properties", Duration::from_secs(1), c3_truncation),
        ("0D oracle equivalence", Duration::from_secs(30), c4_oracle),
        ("patch tests", Duration::from_secs(5), c5_patch),
        ("MMS convergence", Duration::from_secs(300), c6_mms),
        ("energy audit", Duration::from_secs(120), c7_audit),
        ("k-sweep behavior", Duration::from_secs(600), c8_ksweep),
        ("lifting equivalence", Duration::from_secs(60), c9_lifting),
        ("determinism", Duration::from_secs(600), c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let el = start.elapsed();
        let in_time = el <= *budget;
        let pass = o.passed && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<24} {}  {} [{:.2}s of {}s]",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            el.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
