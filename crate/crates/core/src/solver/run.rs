use alloc::format;
use alloc::vec::Vec;

use super::config::SolverConfig;
use super::step::{advance_step, physical_state, StepContext, StepStats};
use crate::constitutive::MaterialModel;
use crate::diagnostics::energy::{audit_level, energy_audit, state_measures, AuditInput};
use crate::diagnostics::{EnergyLedger, StateMeasures};
use crate::error::{ModelError, SolverError};
use crate::fem::{FESpace, FieldsState, GivenData};

/// Stored state at step `step`. In lifted runs the lifting fields have been
/// added back, so `state` is always the physical solution.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub state: FieldsState,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dt: f64,
    /// Step 0, every `snapshot_stride`-th step, and the final step.
    pub snapshots: Vec<Snapshot>,
    /// One energy ledger per step.
    pub ledgers: Vec<EnergyLedger>,
    pub stats: Vec<StepStats>,
    /// Measures of the initial state (solver variables).
    pub initial_measures: StateMeasures,
    pub final_state: FieldsState,
}

impl Trajectory {
    pub fn n_steps(&self) -> usize {
        self.ledgers.len()
    }

    pub fn max_relative_balance(&self) -> f64 {
        self.ledgers.iter().map(|l| l.relative_balance()).fold(0.0, f64::max)
    }
}

fn check_lifting(space: &FESpace, data: &GivenData, config: &SolverConfig) -> Result<(), ModelError> {
    let Some(l) = data.lifting.as_ref() else {
        return Ok(());
    };
    let n = config.n_steps();
    let bad = |m| Err(ModelError::InvalidSolverConfig(m));
    if (l.dt - config.dt).abs() > 1e-12 * config.dt {
        return bad(format!("lifting was built with dt = {} but the solver uses {}", l.dt, config.dt));
    }
    if l.steps() < n || l.theta.len() != l.u.len() {
        return bad(format!("lifting covers {} steps, {} needed", l.steps(), n));
    }
    let sizes_ok = l.u.iter().all(|u| u.len() == 3 * space.n_nodes())
        && l.theta.iter().all(|t| t.len() == space.n_nodes());
    if !sizes_ok {
        return bad(format!("lifting fields do not match the finite element space"));
    }
    Ok(())
}

/// Integrates the truncated system from `t = 0` to `config.t_end`.
pub fn run_simulation(
    space: &FESpace,
    model: &MaterialModel,
    data: &GivenData,
    config: &SolverConfig,
) -> Result<Trajectory, SolverError> {
    model.check()?;
    config.check()?;
    check_lifting(space, data, config)?;
    let ctx = StepContext {
        space,
        model,
        data,
        config,
    };
    let level = audit_level(model, config.audit_level);
    let n_steps = config.n_steps();
    let mut state = FieldsState::initial(space, data, model.trunc_k);
    let initial_measures = state_measures(space, model, &state, level);
    let mut snapshots = Vec::new();
    snapshots.push(Snapshot {
        step: 0,
        state: physical_state(data, &state, 0),
    });
    let mut ledgers = Vec::with_capacity(n_steps);
    let mut stats = Vec::with_capacity(n_steps);

    for n in 0..n_steps {
        let t_next = config.time_at(n + 1);
        let out = advance_step(&ctx, &state, n).map_err(|e| e.at_time(t_next))?;
        let ledger = energy_audit(&AuditInput {
            space,
            model,
            data,
            now: &state,
            next: &out.state,
            theta_coupling: &out.theta_coupling,
            lift_increment: out.lift_increment.as_deref(),
            theta_offset: out.theta_offset.as_deref(),
            step: n + 1,
            dt: config.dt,
            level,
        })
        .map_err(|e| e.at_time(t_next))?;
        ledgers.push(ledger);
        stats.push(out.stats);
        log::debug!(
            "step {} t = {:.6}: momentum {} heat {} sweeps {}",
            n + 1,
            t_next,
            out.stats.momentum_iterations,
            out.stats.heat_iterations,
            out.stats.outer_iterations
        );
        state = out.state;
        if (n + 1) % config.snapshot_stride == 0 || n + 1 == n_steps {
            snapshots.push(Snapshot {
                step: n + 1,
                state: physical_state(data, &state, n + 1),
            });
        }
    }
    let final_state = physical_state(data, &state, n_steps);
    Ok(Trajectory {
        dt: config.dt,
        snapshots,
        ledgers,
        stats,
        initial_measures,
        final_state,
    })
}
