//! Trilinear hexahedral reference element and tensor-product Gauss rules.

use alloc::vec::Vec;

/// Reference vertex coordinates, bottom face counter-clockwise then top face.
pub const REF_NODES: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

const G2: f64 = 0.577_350_269_189_625_8;
const G3: f64 = 0.774_596_669_241_483_4;

/// Gauss–Legendre points and weights on `[−1, 1]` for 1 to 3 points.
pub fn gauss_legendre(n: usize) -> (&'static [f64], &'static [f64]) {
    match n {
        1 => (&[0.0], &[2.0]),
        2 => (&[-G2, G2], &[1.0, 1.0]),
        3 => (&[-G3, 0.0, G3], &[5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0]),
        _ => panic!("Gauss rule with {n} points not tabulated"),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HexRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl HexRule {
    pub fn gauss(n: usize) -> Self {
        let (p, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n * n);
        let mut weights = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    points.push([p[i], p[j], p[k]]);
                    weights.push(w[i] * w[j] * w[k]);
                }
            }
        }
        HexRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn shape(xi: &[f64; 3]) -> [f64; 8] {
    let mut n = [0.0; 8];
    for (a, r) in REF_NODES.iter().enumerate() {
        n[a] = 0.125 * (1.0 + r[0] * xi[0]) * (1.0 + r[1] * xi[1]) * (1.0 + r[2] * xi[2]);
    }
    n
}

pub fn shape_grad(xi: &[f64; 3]) -> [[f64; 3]; 8] {
    let mut g = [[0.0; 3]; 8];
    for (a, r) in REF_NODES.iter().enumerate() {
        let f = [1.0 + r[0] * xi[0], 1.0 + r[1] * xi[1], 1.0 + r[2] * xi[2]];
        g[a] = [
            0.125 * r[0] * f[1] * f[2],
            0.125 * f[0] * r[1] * f[2],
            0.125 * f[0] * f[1] * r[2],
        ];
    }
    g
}

/// Face `f` lies on reference plane `ξ[f/2] = −1` (even `f`) or `+1` (odd).
pub fn face_plane(face: u8) -> (usize, f64) {
    let axis = (face / 2) as usize;
    let sign = if face % 2 == 0 { -1.0 } else { 1.0 };
    (axis, sign)
}

pub fn face_nodes(face: u8) -> [usize; 4] {
    let (axis, sign) = face_plane(face);
    let mut out = [0usize; 4];
    let mut k = 0;
    for (a, r) in REF_NODES.iter().enumerate() {
        if r[axis] == sign {
            out[k] = a;
            k += 1;
        }
    }
    out
}

/// Reference points and weights of an `n × n` Gauss rule on a face.
pub fn face_rule(face: u8, n: usize) -> (Vec<[f64; 3]>, Vec<f64>) {
    let (axis, sign) = face_plane(face);
    let (p, w) = gauss_legendre(n);
    let (ta, tb) = tangent_axes(axis);
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let mut xi = [0.0; 3];
            xi[axis] = sign;
            xi[ta] = p[i];
            xi[tb] = p[j];
            pts.push(xi);
            wts.push(w[i] * w[j]);
        }
    }
    (pts, wts)
}

pub fn tangent_axes(axis: usize) -> (usize, usize) {
    match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}
