//! Energy audit, a-priori bound quantities, the `k → ∞` convergence study
//! and manufactured-solution error measures.

mod bounds;
pub mod energy;
mod kstudy;
mod mms;

pub use bounds::{apriori_bounds, w1q_integrand, BoundReport};
pub use energy::{energy_audit, state_measures, AuditInput, EnergyLedger, StateMeasures};
pub use kstudy::{
    cauchy_distance, cauchy_table, k_convergence_study, state_distances, validate_k_list,
    CauchyRow, KRun, KStudy,
};
pub use mms::{mms_error, observed_rate, ExactFields, MmsErrors};
