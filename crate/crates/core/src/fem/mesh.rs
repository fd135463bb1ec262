use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::quadrature::{face_nodes, shape_grad, HexRule};
use crate::error::MeshError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BoundaryFace {
    pub cell: usize,
    /// Local face number in `0..6`, see [`super::quadrature::face_plane`].
    pub face: u8,
    pub tag: u32,
}

/// Unstructured hexahedral mesh with tagged boundary faces.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 3]>,
    cells: Vec<[usize; 8]>,
    boundary_faces: Vec<BoundaryFace>,
}

/// Jacobian `∂x/∂ξ` of the trilinear map and its determinant.
pub fn jacobian(coords: &[[f64; 3]; 8], grads: &[[f64; 3]; 8]) -> ([[f64; 3]; 3], f64) {
    let mut j = [[0.0; 3]; 3];
    for (x, g) in coords.iter().zip(grads) {
        for r in 0..3 {
            for c in 0..3 {
                j[r][c] += x[r] * g[c];
            }
        }
    }
    (j, det3(&j))
}

pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn inverse3(m: &[[f64; 3]; 3], det: f64) -> [[f64; 3]; 3] {
    let d = 1.0 / det;
    [
        [
            (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * d,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * d,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * d,
        ],
        [
            (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * d,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * d,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * d,
        ],
        [
            (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * d,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * d,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * d,
        ],
    ]
}

fn face_key(cell: &[usize; 8], face: u8) -> [usize; 4] {
    let mut k = face_nodes(face).map(|a| cell[a]);
    k.sort_unstable();
    k
}

impl Mesh {
    /// Builds and validates a mesh.
    pub fn new(
        vertices: Vec<[f64; 3]>,
        cells: Vec<[usize; 8]>,
        boundary_faces: Vec<BoundaryFace>,
    ) -> Result<Self, MeshError> {
        let mesh = Mesh {
            vertices,
            cells,
            boundary_faces,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        let count = self.vertices.len();
        for (c, cell) in self.cells.iter().enumerate() {
            for &v in cell {
                if v >= count {
                    return Err(MeshError::VertexOutOfRange {
                        cell: c,
                        vertex: v,
                        count,
                    });
                }
            }
        }
        let rule = HexRule::gauss(2);
        for c in 0..self.cells.len() {
            let coords = self.cell_coords(c);
            for xi in &rule.points {
                let (_, det) = jacobian(&coords, &shape_grad(xi));
                if !(det > 0.0) {
                    return Err(MeshError::NonpositiveJacobian { cell: c, det });
                }
            }
        }
        let mut uses: BTreeMap<[usize; 4], usize> = BTreeMap::new();
        for cell in &self.cells {
            for f in 0..6u8 {
                *uses.entry(face_key(cell, f)).or_insert(0) += 1;
            }
        }
        let bad = |bf: &BoundaryFace, reason: String| MeshError::InvalidFace {
            cell: bf.cell,
            face: bf.face,
            reason,
        };
        let mut seen = BTreeSet::new();
        for bf in &self.boundary_faces {
            if bf.cell >= self.cells.len() || bf.face >= 6 {
                return Err(bad(bf, String::from("cell or local face index out of range")));
            }
            let key = face_key(&self.cells[bf.cell], bf.face);
            if uses.get(&key).copied() != Some(1) {
                return Err(bad(bf, String::from("face is shared by two cells")));
            }
            if !seen.insert(key) {
                return Err(bad(bf, String::from("face tagged more than once")));
            }
        }
        let exterior = uses.values().filter(|&&n| n == 1).count();
        if exterior != seen.len() {
            return Err(MeshError::InvalidFace {
                cell: 0,
                face: 0,
                reason: format!(
                    "{} exterior faces but only {} are tagged",
                    exterior,
                    seen.len()
                ),
            });
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 8]] {
        &self.cells
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary_faces
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_coords(&self, c: usize) -> [[f64; 3]; 8] {
        self.cells[c].map(|v| self.vertices[v])
    }

    pub fn tags(&self) -> BTreeSet<u32> {
        self.boundary_faces.iter().map(|f| f.tag).collect()
    }

    /// Vertices lying on a face with one of the given tags.
    pub fn tagged_vertices(&self, tags: &BTreeSet<u32>) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for bf in &self.boundary_faces {
            if tags.contains(&bf.tag) {
                for a in face_nodes(bf.face) {
                    out.insert(self.cells[bf.cell][a]);
                }
            }
        }
        out
    }

    /// Largest edge length over all cells, used as the mesh size `h`.
    pub fn max_edge(&self) -> f64 {
        const EDGES: [(usize, usize); 12] = [
            (0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6),
            (6, 7), (7, 4), (0, 4), (1, 5), (2, 6), (3, 7),
        ];
        let mut h: f64 = 0.0;
        for cell in &self.cells {
            for (a, b) in EDGES {
                let (p, q) = (self.vertices[cell[a]], self.vertices[cell[b]]);
                let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
                h = h.max(crate::math::norm2(&d));
            }
        }
        h
    }
}

/// Structured mesh of `[0, L₁] × [0, L₂] × [0, L₃]` with `n₁ × n₂ × n₃`
/// cells. Boundary tags 0..6 are −x, +x, −y, +y, −z, +z.
pub fn build_box_mesh(extent: [f64; 3], resolution: [usize; 3]) -> Result<Mesh, MeshError> {
    if resolution.iter().any(|&n| n == 0) {
        return Err(MeshError::InvalidBox(format!(
            "resolution must be >= 1 in every direction, got {resolution:?}"
        )));
    }
    if extent.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(MeshError::InvalidBox(format!(
            "extent must be positive and finite, got {extent:?}"
        )));
    }
    let [nx, ny, nz] = resolution;
    let vid = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([
                    extent[0] * i as f64 / nx as f64,
                    extent[1] * j as f64 / ny as f64,
                    extent[2] * k as f64 / nz as f64,
                ]);
            }
        }
    }
    let mut cells = Vec::with_capacity(nx * ny * nz);
    let mut faces = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let c = cells.len();
                cells.push([
                    vid(i, j, k),
                    vid(i + 1, j, k),
                    vid(i + 1, j + 1, k),
                    vid(i, j + 1, k),
                    vid(i, j, k + 1),
                    vid(i + 1, j, k + 1),
                    vid(i + 1, j + 1, k + 1),
                    vid(i, j + 1, k + 1),
                ]);
                let idx = [i, j, k];
                let n = [nx, ny, nz];
                for axis in 0..3 {
                    if idx[axis] == 0 {
                        let f = (2 * axis) as u8;
                        faces.push(BoundaryFace { cell: c, face: f, tag: f as u32 });
                    }
                    if idx[axis] + 1 == n[axis] {
                        let f = (2 * axis + 1) as u8;
                        faces.push(BoundaryFace { cell: c, face: f, tag: f as u32 });
                    }
                }
            }
        }
    }
    Mesh::new(vertices, cells, faces)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_counts() {
        let m = build_box_mesh([1.0; 3], [1, 1, 1]).unwrap();
        assert_eq!((m.vertex_count(), m.cell_count()), (8, 1));
        assert_eq!(m.boundary_faces().len(), 6);
        let m = build_box_mesh([1.0; 3], [2, 2, 2]).unwrap();
        assert_eq!((m.vertex_count(), m.cell_count()), (27, 8));
        assert_eq!(m.boundary_faces().len(), 24);
    }

    #[test]
    fn affine_jacobians_equal() {
        let m = build_box_mesh([2.0, 1.0, 1.0], [4, 2, 2]).unwrap();
        let rule = HexRule::gauss(2);
        let mut dets = Vec::new();
        for c in 0..m.cell_count() {
            for xi in &rule.points {
                dets.push(jacobian(&m.cell_coords(c), &shape_grad(xi)).1);
            }
        }
        assert!(dets.iter().all(|&d| d > 0.0 && (d - dets[0]).abs() < 1e-15));
        assert!((dets[0] - 0.25f64.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn inverted_cell_rejected() {
        let m = build_box_mesh([1.0; 3], [1, 1, 1]).unwrap();
        let mut cells = m.cells().to_vec();
        cells[0].swap(0, 1);
        cells[0].swap(3, 2);
        cells[0].swap(4, 5);
        cells[0].swap(7, 6);
        let err = Mesh::new(m.vertices().to_vec(), cells, m.boundary_faces().to_vec());
        assert!(matches!(err, Err(MeshError::NonpositiveJacobian { .. })));
    }

    #[test]
    fn missing_tag_rejected() {
        let m = build_box_mesh([1.0; 3], [2, 1, 1]).unwrap();
        let mut faces = m.boundary_faces().to_vec();
        faces.pop();
        assert!(Mesh::new(m.vertices().to_vec(), m.cells().to_vec(), faces).is_err());
    }
}
