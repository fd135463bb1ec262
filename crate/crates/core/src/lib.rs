//! Quasi-static thermo-visco-elasticity with a temperature-dependent
//! Norton–Hoff flow rule.
//!
//! The crate provides the tensor algebra, constitutive law, trilinear
//! hexahedral finite elements, a backward-Euler time integrator for the
//! coupled momentum / flow-rule / heat system (optionally truncated at level
//! `k`), and diagnostics that audit the discrete energy balance and the
//! a-priori bound quantities along a trajectory.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod constitutive;
pub mod diagnostics;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod math;
pub mod solver;
pub mod tensor;

pub use constitutive::MaterialModel;
pub use error::{MeshError, ModelError, SolverError};
pub use tensor::{ElasticModuli, Mandel6, SymTensor3};
