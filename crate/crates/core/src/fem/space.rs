use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::mesh::{inverse3, jacobian, Mesh};
use super::quadrature::{face_rule, shape, shape_grad, tangent_axes, HexRule};
use crate::error::MeshError;
use crate::linalg::CsrMatrix;
use crate::math;

/// Quadrature points per cell (2 × 2 × 2 Gauss).
pub const QP_PER_CELL: usize = 8;

/// Cached geometry of one volume quadrature point.
#[derive(Clone, Copy, Debug)]
pub struct QuadPoint {
    /// Gauss weight times Jacobian determinant.
    pub weight: f64,
    pub x: [f64; 3],
    pub n: [f64; 8],
    /// Physical shape-function gradients.
    pub grad: [[f64; 3]; 8],
}

/// Cached geometry of one boundary-face quadrature point.
#[derive(Clone, Copy, Debug)]
pub struct FacePoint {
    pub cell: usize,
    pub tag: u32,
    /// Gauss weight times surface Jacobian.
    pub weight: f64,
    pub x: [f64; 3],
    pub normal: [f64; 3],
    /// Values of the eight cell shape functions.
    pub n: [f64; 8],
}

/// Numbering of the unconstrained displacement degrees of freedom.
/// Displacement dof `3·vertex + component`.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    free_index: Vec<Option<usize>>,
    constrained: Vec<usize>,
    free: Vec<usize>,
}

impl DofMap {
    pub fn free_index(&self, dof: usize) -> Option<usize> {
        self.free_index[dof]
    }

    pub fn constrained(&self) -> &[usize] {
        &self.constrained
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.free_index[dof].is_none()
    }
}

/// Multilinear nodal spaces for displacement and temperature, and the
/// quadrature-point layout for stress.
#[derive(Clone, Debug)]
pub struct FESpace {
    mesh: Mesh,
    qps: Vec<QuadPoint>,
    face_points: Vec<FacePoint>,
    dirichlet_tags: BTreeSet<u32>,
    dofs: DofMap,
    vector_pattern: CsrMatrix,
    mass: CsrMatrix,
    stiffness: CsrMatrix,
}

impl FESpace {
    /// Every boundary tag is Dirichlet for the displacement.
    pub fn new(mesh: Mesh) -> Result<Self, MeshError> {
        let tags = mesh.tags();
        Self::with_dirichlet_tags(mesh, tags)
    }

    pub fn with_dirichlet_tags(mesh: Mesh, dirichlet_tags: BTreeSet<u32>) -> Result<Self, MeshError> {
        let rule = HexRule::gauss(2);
        let mut qps = Vec::with_capacity(mesh.cell_count() * QP_PER_CELL);
        for c in 0..mesh.cell_count() {
            qps.extend(cell_points(&mesh, c, &rule)?);
        }

        let mut face_points = Vec::new();
        for bf in mesh.boundary_faces() {
            let coords = mesh.cell_coords(bf.cell);
            let centroid = centroid(&coords);
            let (axis, _) = super::quadrature::face_plane(bf.face);
            let (ta, tb) = tangent_axes(axis);
            let (pts, wts) = face_rule(bf.face, 2);
            for (xi, w) in pts.iter().zip(&wts) {
                let (j, _) = jacobian(&coords, &shape_grad(xi));
                let t1 = [j[0][ta], j[1][ta], j[2][ta]];
                let t2 = [j[0][tb], j[1][tb], j[2][tb]];
                let mut nrm = cross(&t1, &t2);
                let area = math::norm2(&nrm);
                let n = shape(xi);
                let x = map_point(&coords, &n);
                let out = [x[0] - centroid[0], x[1] - centroid[1], x[2] - centroid[2]];
                let sgn = if math::dot(&nrm, &out) < 0.0 { -1.0 } else { 1.0 };
                for v in nrm.iter_mut() {
                    *v *= sgn / area;
                }
                face_points.push(FacePoint {
                    cell: bf.cell,
                    tag: bf.tag,
                    weight: w * area,
                    x,
                    normal: nrm,
                    n,
                });
            }
        }

        let nv = mesh.vertex_count();
        let constrained_vertices = mesh.tagged_vertices(&dirichlet_tags);
        let mut free_index = vec![None; 3 * nv];
        let mut constrained = Vec::new();
        let mut free = Vec::new();
        for v in 0..nv {
            for comp in 0..3 {
                let dof = 3 * v + comp;
                if constrained_vertices.contains(&v) {
                    constrained.push(dof);
                } else {
                    free_index[dof] = Some(free.len());
                    free.push(dof);
                }
            }
        }
        let dofs = DofMap {
            free_index,
            constrained,
            free,
        };

        let mut vrows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); dofs.n_free()];
        let mut srows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nv];
        for cell in mesh.cells() {
            for &a in cell {
                for &b in cell {
                    srows[a].insert(b);
                    for ca in 0..3 {
                        if let Some(i) = dofs.free_index(3 * a + ca) {
                            for cb in 0..3 {
                                if let Some(j) = dofs.free_index(3 * b + cb) {
                                    vrows[i].insert(j);
                                }
                            }
                        }
                    }
                }
            }
        }
        let to_vec = |rows: Vec<BTreeSet<usize>>| -> Vec<Vec<usize>> {
            rows.into_iter().map(|r| r.into_iter().collect()).collect()
        };
        let vector_pattern = CsrMatrix::from_pattern(dofs.n_free(), &to_vec(vrows));
        let scalar_pattern = CsrMatrix::from_pattern(nv, &to_vec(srows));

        let mut mass = scalar_pattern.clone();
        let mut stiffness = scalar_pattern;
        for (c, cell) in mesh.cells().iter().enumerate() {
            for q in &qps[c * QP_PER_CELL..(c + 1) * QP_PER_CELL] {
                for a in 0..8 {
                    for b in 0..8 {
                        mass.add(cell[a], cell[b], q.weight * q.n[a] * q.n[b]);
                        let g = math::dot(&q.grad[a], &q.grad[b]);
                        stiffness.add(cell[a], cell[b], q.weight * g);
                    }
                }
            }
        }

        Ok(FESpace {
            mesh,
            qps,
            face_points,
            dirichlet_tags,
            dofs,
            vector_pattern,
            mass,
            stiffness,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn dirichlet_tags(&self) -> &BTreeSet<u32> {
        &self.dirichlet_tags
    }

    pub fn n_nodes(&self) -> usize {
        self.mesh.vertex_count()
    }

    pub fn n_qp(&self) -> usize {
        self.qps.len()
    }

    pub fn quad_points(&self) -> &[QuadPoint] {
        &self.qps
    }

    pub fn cell_quad_points(&self, c: usize) -> &[QuadPoint] {
        &self.qps[c * QP_PER_CELL..(c + 1) * QP_PER_CELL]
    }

    pub fn face_points(&self) -> &[FacePoint] {
        &self.face_points
    }

    /// Zero matrix on the free displacement dofs.
    pub fn vector_matrix(&self) -> CsrMatrix {
        let mut m = self.vector_pattern.clone();
        m.set_zero();
        m
    }

    /// Consistent mass matrix `∫ N_a N_b`.
    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    /// Laplacian stiffness `∫ ∇N_a · ∇N_b`.
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn volume(&self) -> f64 {
        self.qps.iter().map(|q| q.weight).sum()
    }

    pub fn boundary_area(&self) -> f64 {
        self.face_points.iter().map(|p| p.weight).sum()
    }

    pub fn interpolate_scalar(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        self.mesh.vertices().iter().map(|&x| f(x)).collect()
    }

    pub fn interpolate_vector(&self, f: impl Fn([f64; 3]) -> [f64; 3]) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.n_nodes());
        for &x in self.mesh.vertices() {
            out.extend_from_slice(&f(x));
        }
        out
    }

    /// Value of a nodal scalar field at a quadrature point of cell `c`.
    #[inline]
    pub fn scalar_at(&self, c: usize, q: &QuadPoint, field: &[f64]) -> f64 {
        let cell = &self.mesh.cells()[c];
        (0..8).map(|a| q.n[a] * field[cell[a]]).sum()
    }

    #[inline]
    pub fn scalar_grad_at(&self, c: usize, q: &QuadPoint, field: &[f64]) -> [f64; 3] {
        let cell = &self.mesh.cells()[c];
        let mut g = [0.0; 3];
        for a in 0..8 {
            for d in 0..3 {
                g[d] += q.grad[a][d] * field[cell[a]];
            }
        }
        g
    }

    #[inline]
    pub fn vector_at(&self, c: usize, q: &QuadPoint, field: &[f64]) -> [f64; 3] {
        let cell = &self.mesh.cells()[c];
        let mut v = [0.0; 3];
        for a in 0..8 {
            for d in 0..3 {
                v[d] += q.n[a] * field[3 * cell[a] + d];
            }
        }
        v
    }

    /// Symmetric gradient of a nodal displacement at a quadrature point.
    #[inline]
    pub fn strain_at(&self, c: usize, q: &QuadPoint, u: &[f64]) -> crate::tensor::SymTensor3 {
        let cell = &self.mesh.cells()[c];
        let mut g = [[0.0; 3]; 3];
        for a in 0..8 {
            for i in 0..3 {
                let ui = u[3 * cell[a] + i];
                for j in 0..3 {
                    g[i][j] += ui * q.grad[a][j];
                }
            }
        }
        crate::tensor::SymTensor3::sym(&g)
    }

    /// Quadrature-point geometry of an arbitrary rule on cell `c`; used for
    /// error integrals with a rule finer than the assembly rule.
    pub fn points_with_rule(&self, c: usize, rule: &HexRule) -> Vec<QuadPoint> {
        cell_points(&self.mesh, c, rule).expect("mesh validated at construction")
    }
}

fn cell_points(mesh: &Mesh, c: usize, rule: &HexRule) -> Result<Vec<QuadPoint>, MeshError> {
    let coords = mesh.cell_coords(c);
    let mut out = Vec::with_capacity(rule.len());
    for (xi, w) in rule.points.iter().zip(&rule.weights) {
        let dn = shape_grad(xi);
        let (j, det) = jacobian(&coords, &dn);
        if !(det > 0.0) {
            return Err(MeshError::NonpositiveJacobian { cell: c, det });
        }
        let jinv = inverse3(&j, det);
        let mut grad = [[0.0; 3]; 8];
        for a in 0..8 {
            for d in 0..3 {
                grad[a][d] = (0..3).map(|k| dn[a][k] * jinv[k][d]).sum();
            }
        }
        let n = shape(xi);
        out.push(QuadPoint {
            weight: w * det,
            x: map_point(&coords, &n),
            n,
            grad,
        });
    }
    Ok(out)
}

fn map_point(coords: &[[f64; 3]; 8], n: &[f64; 8]) -> [f64; 3] {
    let mut x = [0.0; 3];
    for a in 0..8 {
        for d in 0..3 {
            x[d] += n[a] * coords[a][d];
        }
    }
    x
}

fn centroid(coords: &[[f64; 3]; 8]) -> [f64; 3] {
    let mut c = [0.0; 3];
    for p in coords {
        for d in 0..3 {
            c[d] += 0.125 * p[d];
        }
    }
    c
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_box_mesh;

    #[test]
    fn volume_and_area() {
        let s = FESpace::new(build_box_mesh([2.0, 1.0, 0.5], [3, 2, 2]).unwrap()).unwrap();
        assert!((s.volume() - 1.0).abs() < 1e-13);
        assert!((s.boundary_area() - 2.0 * (2.0 + 1.0 + 0.5)).abs() < 1e-13);
        for p in s.face_points() {
            let axis = (p.tag / 2) as usize;
            let sign = if p.tag % 2 == 0 { -1.0 } else { 1.0 };
            assert!((p.normal[axis] - sign).abs() < 1e-14);
        }
    }

    #[test]
    fn all_box_nodes_constrained_on_one_cell() {
        let s = FESpace::new(build_box_mesh([1.0; 3], [1, 1, 1]).unwrap()).unwrap();
        assert_eq!(s.dofs().n_free(), 0);
        let s = FESpace::new(build_box_mesh([1.0; 3], [2, 2, 2]).unwrap()).unwrap();
        assert_eq!(s.dofs().n_free(), 3);
    }

    #[test]
    fn mass_sums_to_volume() {
        let s = FESpace::new(build_box_mesh([1.0; 3], [2, 3, 1]).unwrap()).unwrap();
        let ones = vec![1.0; s.n_nodes()];
        let m1: f64 = s.mass().mul_vec(&ones).iter().sum();
        assert!((m1 - 1.0).abs() < 1e-13);
        assert!(s.stiffness().mul_vec(&ones).iter().all(|v| v.abs() < 1e-13));
    }
}
