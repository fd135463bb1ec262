use std::path::{Path, PathBuf};
use std::process::Command;

use thermovisc::vtk::read_vtk;
use thermovisc::{parse_config, parse_str};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_thermovisc"));
    c.env("RUST_LOG", "error");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const ZERO_ONE_STEP: &str = r#"
[material]
mu = 1.0
lambda = 1.0

[mesh]
extent = [1.0, 1.0, 1.0]
resolution = [2, 1, 1]

[solver]
dt = 0.1
t_end = 0.1
linear_solver = "direct"
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn shipped_configs_parse_and_pass_material_validation() {
    for e in std::fs::read_dir(configs()).unwrap() {
        let p = e.unwrap().path();
        let cfg = parse_config(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert!(cfg.material_report().unwrap().all_passed(), "{}", p.display());
    }
    let out = bin().arg("validate-material").arg(configs().join("yielding.toml")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("beta_range = pass"), "{text}");
}

#[test]
fn unreadable_config_exits_with_two() {
    let st = bin().args(["run", "/nonexistent/run.toml"]).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let st = bin().arg("no-such-command").status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn invalid_exponents_are_config_errors() {
    let base = ZERO_ONE_STEP.replace("lambda = 1.0", "lambda = 1.0\nr_exp = 1.0");
    let e = parse_str(&base, Path::new(".")).unwrap_err();
    assert_eq!(e.key, "material.r_exp");
    assert!(e.reason.contains("r > 1"), "{e}");

    let text = format!("{ZERO_ONE_STEP}\n[material.thermal_stress]\nalpha = 0.9\n");
    let e = parse_str(&text, Path::new(".")).unwrap_err();
    assert_eq!(e.key, "material.thermal_stress");
    assert!(e.reason.contains("alpha"), "{e}");

    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), "bad.toml", &base);
    assert_eq!(bin().arg("run").arg(&p).status().unwrap().code(), Some(2));
}

#[test]
fn one_step_zero_run_writes_zero_fields() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), "zero.toml", ZERO_ONE_STEP);
    let out = dir.path().join("out");
    let st = bin().arg("run").arg(&p).arg("--output-dir").arg(&out).status().unwrap();
    assert!(st.success());
    let ledger = std::fs::read_to_string(out.join("ledger.csv")).unwrap();
    assert_eq!(ledger.lines().count(), 2);
    assert!(!ledger.contains('\r'));
    let grid = read_vtk(&out.join("vtk/snapshot_00001.vtk")).unwrap();
    assert_eq!(grid.points.len(), 12);
    assert_eq!(grid.cell_types, vec![12, 12]);
    assert!(grid.point_vectors["displacement"].iter().all(|v| *v == [0.0; 3]));
    assert!(grid.point_scalars["temperature"].iter().all(|v| *v == 0.0));
    for name in ["stress_xx", "stress_xy", "von_mises", "yield_excess"] {
        assert!(grid.cell_scalars[name].iter().all(|v| *v == 0.0), "{name}");
    }
}

#[test]
fn vtk_reproduces_nodal_values_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(&configs().join("thermoelastic.toml")).unwrap();
    let p = thermovisc::commands::Problem::from_config(&cfg).unwrap();
    let traj = p.simulate().unwrap();
    let state = &traj.final_state;
    let path = dir.path().join("s.vtk");
    thermovisc::vtk::write_vtk(&path, &p.space, &p.model, state, "test").unwrap();
    let grid = read_vtk(&path).unwrap();
    assert_eq!(grid.points, p.space.mesh().vertices());
    let u = &grid.point_vectors["displacement"];
    for (i, v) in u.iter().enumerate() {
        for c in 0..3 {
            assert_eq!(v[c].to_bits(), state.u[3 * i + c].to_bits());
        }
    }
    let th = &grid.point_scalars["temperature"];
    assert!(th.iter().zip(&state.theta).all(|(a, b)| a.to_bits() == b.to_bits()));
    assert!(state.theta.iter().any(|v| *v != 0.0));
}

#[test]
fn k_study_writes_inventory_and_reports_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[material]
mu = 1.0
lambda = 1.0

[mesh]
extent = [1.0, 1.0, 1.0]
resolution = [1, 1, 1]

[data]
g_d = ["2*t*y", "0", "0"]

[solver]
dt = 0.1
t_end = 0.3
linear_solver = "direct"
"#;
    let p = write_config(dir.path(), "k.toml", text);
    let ok = dir.path().join("ok");
    let st = bin()
        .args(["study-k", "--k-list", "2,4,8", "--workers", "2"])
        .arg(&p)
        .arg("--output-dir")
        .arg(&ok)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    for f in ["ledger_k2.csv", "ledger_k4.csv", "ledger_k8.csv", "cauchy.csv", "bounds.csv", "summary.txt"] {
        assert!(ok.join(f).is_file(), "{f}");
    }
    assert_eq!(std::fs::read_to_string(ok.join("cauchy.csv")).unwrap().lines().count(), 3);

    let bad = dir.path().join("bad");
    let st = bin()
        .args(["study-k", "--k-list=-1,2,4,8"])
        .arg(&p)
        .arg("--output-dir")
        .arg(&bad)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(1));
    let bounds = std::fs::read_to_string(bad.join("bounds.csv")).unwrap();
    assert_eq!(bounds.lines().filter(|l| l.contains(",failed,")).count(), 1);
    assert_eq!(bounds.lines().filter(|l| l.contains(",ok,")).count(), 3);
    assert_eq!(std::fs::read_to_string(bad.join("cauchy.csv")).unwrap().lines().count(), 3);
    assert!(!bad.join("ledger_k-1.csv").exists());

    let st = bin().args(["study-k", "--k-list", "2,4"]).arg(&p).arg("--output-dir").arg(&bad).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for rep in 0..2 {
        let out = dir.path().join(rep.to_string());
        let st = bin()
            .arg("run")
            .arg(configs().join("lifting.toml"))
            .arg("--output-dir")
            .arg(&out)
            .arg("--snapshot-stride")
            .arg("2")
            .status()
            .unwrap();
        assert!(st.success());
        files.push((std::fs::read(out.join("ledger.csv")).unwrap(), std::fs::read(out.join("bounds.csv")).unwrap()));
        let vtks: Vec<_> = std::fs::read_dir(out.join("vtk")).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(vtks.len(), 4);
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn material_point_and_lifting_commands() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin()
        .arg("material-point")
        .arg(configs().join("material_point.toml"))
        .arg("--output-dir")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(st.success());
    let mp = std::fs::read_to_string(dir.path().join("material_point.csv")).unwrap();
    assert_eq!(mp.lines().count(), 202);

    let st = bin()
        .arg("lifting")
        .arg(configs().join("lifting.toml"))
        .arg("--output-dir")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(st.success());
    let g = read_vtk(&dir.path().join("lifting/lifting_00006.vtk")).unwrap();
    assert!(g.point_vectors["displacement"].iter().any(|v| v[0] != 0.0));
    // the run without a [material_point] section is a config error
    let st = bin().arg("material-point").arg(configs().join("elastic.toml")).status().unwrap();
    assert_eq!(st.code(), Some(2));
}
