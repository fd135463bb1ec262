//! Trilinear hexahedral finite elements: meshes, spaces, assembly of the
//! weak forms, Dirichlet constraints and the lifting problems.

pub mod assembly;
mod data;
mod dirichlet;
mod lifting;
mod mesh;
pub mod quadrature;
mod space;

pub use assembly::{
    assemble_heat, assemble_momentum, HeatAssembly, HeatInput, MomentumAssembly, MomentumInput,
};
pub use data::{FieldsState, FluxField, GivenData, Lifting, ScalarField, TensorField, VectorField};
pub use dirichlet::{apply_dirichlet, dirichlet_rate, Constraints};
pub use lifting::{
    build_lifting, solve_lifting_displacement, solve_lifting_temperature, LiftingDisplacement,
};
pub use mesh::{build_box_mesh, det3, inverse3, jacobian, BoundaryFace, Mesh};
pub use space::{DofMap, FESpace, FacePoint, QuadPoint, QP_PER_CELL};
