use std::sync::Arc;

use thermovisc_core::constitutive::{material_point_step, MaterialPointState, ThermalStress, YieldFunction};
use thermovisc_core::fem::{build_box_mesh, FESpace, GivenData};
use thermovisc_core::linalg::LinearSolver;
use thermovisc_core::solver::{run_simulation, OuterCoupling, SolverConfig, Trajectory};
use thermovisc_core::{MaterialModel, SolverError, SymTensor3};

fn box_space(n: usize) -> FESpace {
    FESpace::new(build_box_mesh([1.0; 3], [n, n, n]).unwrap()).unwrap()
}

fn config(dt: f64, t_end: f64) -> SolverConfig {
    SolverConfig { dt, t_end, linear_solver: LinearSolver::Direct, ..SolverConfig::default() }
}

fn shear_data() -> GivenData {
    GivenData {
        g_d: Some(Arc::new(|x, t| [1.5 * t * x[1], 0.0, 0.3 * t * x[0]])),
        theta0: Some(Arc::new(|x, _| 0.5 * x[0] * x[2])),
        ..GivenData::default()
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn zero_problem_stays_zero() {
    let space = box_space(2);
    let traj = run_simulation(&space, &MaterialModel::default(), &GivenData::zero(), &config(0.1, 0.3)).unwrap();
    assert!(traj.final_state.u.iter().chain(&traj.final_state.theta).all(|&v| v == 0.0));
    assert!(traj.final_state.stress.iter().all(|t| *t == SymTensor3::ZERO));
}

#[test]
fn single_step_run() {
    let space = box_space(2);
    let traj = run_simulation(&space, &MaterialModel::default(), &shear_data(), &config(0.1, 0.1)).unwrap();
    assert_eq!(traj.n_steps(), 1);
    assert_eq!(traj.snapshots.len(), 2);
    assert_eq!(traj.snapshots[0].step, 0);
    assert_eq!(traj.snapshots[0].state.time, 0.0);
}

#[test]
fn initial_temperature_is_truncated() {
    let space = box_space(2);
    let model = MaterialModel::default().with_truncation(0.2).unwrap();
    let traj = run_simulation(&space, &model, &shear_data(), &config(0.1, 0.1)).unwrap();
    assert!(traj.snapshots[0].state.theta.iter().all(|&t| t <= 0.2));
    assert!(traj.snapshots[0].state.theta.iter().any(|&t| t == 0.2));
}

#[test]
fn decoupled_heat_stays_cold() {
    let space = box_space(2);
    let mut model = MaterialModel::default().with_truncation(4.0).unwrap();
    model.thermal_stress = ThermalStress::zero();
    model.yield_fn = YieldFunction::constant(1e3);
    let data = GivenData { g_d: shear_data().g_d, ..GivenData::default() };
    let a = run_simulation(&space, &model, &data, &config(0.1, 0.5)).unwrap();
    assert!(a.final_state.theta.iter().all(|&t| t == 0.0));
    let fp = SolverConfig { outer_coupling: OuterCoupling::FixedPoint, ..config(0.1, 0.5) };
    let b = run_simulation(&space, &model, &data, &fp).unwrap();
    assert!(max_diff(&a.final_state.u, &b.final_state.u) < 1e-12);
    // the regularization flow is active
    assert!(a.ledgers.iter().any(|l| l.regularization_dissipation > 1e-6));
}

#[test]
fn single_cell_matches_material_point_oracle() {
    let space = box_space(1);
    let mut model = MaterialModel::default().with_truncation(8.0).unwrap();
    model.yield_fn = YieldFunction::constant(0.2);
    let grad = [[0.3, 0.4, 0.0], [-0.1, 0.2, 0.1], [0.0, 0.5, -0.2]];
    let data = GivenData {
        g_d: Some(Arc::new(move |x, t| core::array::from_fn(|i| t * (0..3).map(|j| grad[i][j] * x[j]).sum::<f64>()))),
        theta0: Some(Arc::new(|_, _| 0.4)),
        ..GivenData::default()
    };
    let cfg = config(0.05, 1.0);
    let traj = run_simulation(&space, &model, &data, &cfg).unwrap();
    let rate = SymTensor3::sym(&grad);
    let mut state = MaterialPointState { stress: SymTensor3::ZERO, temperature: 0.4, time: 0.0 };
    for _ in 0..cfg.n_steps() {
        state.stress = material_point_step(&model, &state, &rate, 0.0, cfg.dt).unwrap();
    }
    for t in &traj.final_state.stress {
        assert!((*t - state.stress).norm() <= 1e-9 * (1.0 + state.stress.norm()));
    }
}

#[test]
fn huge_k_matches_untruncated() {
    let space = box_space(2);
    let data = shear_data();
    let a = run_simulation(&space, &MaterialModel::default(), &data, &config(0.1, 0.5)).unwrap();
    let model = MaterialModel::default().with_truncation(1e12).unwrap();
    let b = run_simulation(&space, &model, &data, &config(0.1, 0.5)).unwrap();
    assert!(max_diff(&a.final_state.u, &b.final_state.u) < 1e-8);
    assert!(max_diff(&a.final_state.theta, &b.final_state.theta) < 1e-8);
}

fn theta_at_end(coupling: OuterCoupling, dt: f64) -> Trajectory {
    let space = box_space(2);
    let model = MaterialModel::default().with_truncation(10.0).unwrap();
    let cfg = SolverConfig { outer_coupling: coupling, ..config(dt, 0.4) };
    run_simulation(&space, &model, &shear_data(), &cfg).unwrap()
}

#[test]
fn splitting_error_is_first_order() {
    let mut diffs = Vec::new();
    for dt in [0.1, 0.05, 0.025] {
        let a = theta_at_end(OuterCoupling::Staggered, dt);
        let b = theta_at_end(OuterCoupling::FixedPoint, dt);
        diffs.push(max_diff(&a.final_state.theta, &b.final_state.theta) + max_diff(&a.final_state.u, &b.final_state.u));
    }
    for w in diffs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.6..2.5).contains(&ratio), "{diffs:?}");
    }
}

#[test]
fn runs_are_bit_identical() {
    let a = theta_at_end(OuterCoupling::FixedPoint, 0.1);
    let b = theta_at_end(OuterCoupling::FixedPoint, 0.1);
    assert_eq!(a.snapshots, b.snapshots);
    assert_eq!(a.ledgers, b.ledgers);
}

#[test]
fn snapshot_stride_keeps_last_step() {
    let space = box_space(1);
    let cfg = SolverConfig { snapshot_stride: 3, ..config(0.1, 1.0) };
    let traj = run_simulation(&space, &MaterialModel::default(), &shear_data(), &cfg).unwrap();
    let steps: Vec<usize> = traj.snapshots.iter().map(|s| s.step).collect();
    assert_eq!(steps, vec![0, 3, 6, 9, 10]);
}

#[test]
fn failure_reports_time() {
    let space = box_space(2);
    let cfg = SolverConfig { newton_max_iter: 1, ..config(0.5, 1.0) };
    let data = GivenData { g_d: Some(Arc::new(|x, t| [20.0 * t * x[1], 0.0, 0.0])), ..GivenData::default() };
    match run_simulation(&space, &MaterialModel::default(), &data, &cfg) {
        Err(SolverError::AtTime { time, .. }) => assert_eq!(time, 0.5),
        other => panic!("{other:?}"),
    }
}

#[test]
fn rejects_invalid_config() {
    let space = box_space(1);
    let cfg = SolverConfig { dt: -1.0, ..SolverConfig::default() };
    assert!(matches!(
        run_simulation(&space, &MaterialModel::default(), &GivenData::zero(), &cfg),
        Err(SolverError::Model(_))
    ));
}

#[test]
fn conjugate_gradient_matches_direct() {
    let space = box_space(3);
    let data = shear_data();
    let a = run_simulation(&space, &MaterialModel::default(), &data, &config(0.1, 0.3)).unwrap();
    let cg = SolverConfig { linear_solver: LinearSolver::default(), ..config(0.1, 0.3) };
    let b = run_simulation(&space, &MaterialModel::default(), &data, &cg).unwrap();
    assert!(max_diff(&a.final_state.u, &b.final_state.u) < 1e-8);
}
