use alloc::vec;
use alloc::vec::Vec;

use super::data::GivenData;
use super::space::FESpace;

/// Prescribed values of the constrained displacement dofs.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraints {
    pub dofs: Vec<usize>,
    pub values: Vec<f64>,
}

impl Constraints {
    pub fn homogeneous(space: &FESpace) -> Self {
        let dofs = space.dofs().constrained().to_vec();
        let values = vec![0.0; dofs.len()];
        Constraints { dofs, values }
    }

    /// Writes the prescribed values into a full dof vector.
    pub fn impose(&self, u: &mut [f64]) {
        for (&d, &v) in self.dofs.iter().zip(&self.values) {
            u[d] = v;
        }
    }

    /// Full dof vector from free values and these constraints.
    pub fn expand(&self, space: &FESpace, free_values: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; 3 * space.n_nodes()];
        for (&d, &v) in space.dofs().free().iter().zip(free_values) {
            u[d] = v;
        }
        self.impose(&mut u);
        u
    }
}

/// Nodal interpolant of `g_D(·, t)` on the Dirichlet dofs.
pub fn apply_dirichlet(space: &FESpace, data: &GivenData, t: f64) -> Constraints {
    dirichlet_from(space, |x| data.g_d_at(x, t))
}

/// Nodal interpolant of `∂g_D/∂t(·, t)` on the Dirichlet dofs.
pub fn dirichlet_rate(space: &FESpace, data: &GivenData, t: f64) -> Constraints {
    dirichlet_from(space, |x| data.g_d_rate_at(x, t))
}

fn dirichlet_from(space: &FESpace, g: impl Fn([f64; 3]) -> [f64; 3]) -> Constraints {
    let verts = space.mesh().vertices();
    let dofs = space.dofs().constrained().to_vec();
    let mut values = Vec::with_capacity(dofs.len());
    let mut cache: Option<(usize, [f64; 3])> = None;
    for &d in &dofs {
        let v = d / 3;
        let val = match cache {
            Some((cv, val)) if cv == v => val,
            _ => {
                let val = g(verts[v]);
                cache = Some((v, val));
                val
            }
        };
        values.push(val[d % 3]);
    }
    Constraints { dofs, values }
}
