//! Legacy VTK ASCII unstructured grids: writer for simulation snapshots and
//! a reader for the subset the writer produces.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thermovisc_core::constitutive::yield_excess;
use thermovisc_core::fem::{FESpace, FieldsState, QP_PER_CELL};
use thermovisc_core::MaterialModel;

const VTK_HEXAHEDRON: u8 = 12;
const STRESS_NAMES: [&str; 6] = ["stress_xx", "stress_yy", "stress_zz", "stress_yz", "stress_xz", "stress_xy"];

/// Quadrature-weighted averages per cell: six stress components, `|dev T|`
/// and the yield excess.
pub fn cell_averages(space: &FESpace, model: &MaterialModel, state: &FieldsState) -> Vec<[f64; 8]> {
    (0..space.mesh().cell_count())
        .map(|c| {
            let mut acc = [0.0; 8];
            let mut vol = 0.0;
            for (iq, q) in space.cell_quad_points(c).iter().enumerate() {
                let t = state.stress[c * QP_PER_CELL + iq];
                let theta = space.scalar_at(c, q, &state.theta);
                let comps = t.components();
                for i in 0..6 {
                    acc[i] += q.weight * comps[i];
                }
                acc[6] += q.weight * t.dev().norm();
                acc[7] += q.weight * yield_excess(model, &t, theta);
                vol += q.weight;
            }
            acc.map(|v| v / vol)
        })
        .collect()
}

pub fn write_vtk_string(space: &FESpace, model: &MaterialModel, state: &FieldsState, title: &str) -> String {
    let mesh = space.mesh();
    let nv = mesh.vertex_count();
    let nc = mesh.cell_count();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "{}", title.lines().next().unwrap_or(""));
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {nv} double");
    for v in mesh.vertices() {
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", v[0], v[1], v[2]);
    }
    let _ = writeln!(s, "CELLS {nc} {}", 9 * nc);
    for c in mesh.cells() {
        let _ = write!(s, "8");
        for v in c {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {nc}");
    for _ in 0..nc {
        let _ = writeln!(s, "{VTK_HEXAHEDRON}");
    }
    let _ = writeln!(s, "POINT_DATA {nv}");
    s.push_str("VECTORS displacement double\n");
    for i in 0..nv {
        let u = &state.u[3 * i..3 * i + 3];
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", u[0], u[1], u[2]);
    }
    scalar_block(&mut s, "temperature", state.theta.iter().copied());
    let _ = writeln!(s, "CELL_DATA {nc}");
    let avg = cell_averages(space, model, state);
    for (i, name) in STRESS_NAMES.iter().enumerate() {
        scalar_block(&mut s, name, avg.iter().map(|a| a[i]));
    }
    scalar_block(&mut s, "von_mises", avg.iter().map(|a| a[6]));
    scalar_block(&mut s, "yield_excess", avg.iter().map(|a| a[7]));
    s
}

fn scalar_block(s: &mut String, name: &str, values: impl Iterator<Item = f64>) {
    let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
    for v in values {
        let _ = writeln!(s, "{v:.16e}");
    }
}

pub fn write_vtk(
    path: &Path,
    space: &FESpace,
    model: &MaterialModel,
    state: &FieldsState,
    title: &str,
) -> std::io::Result<()> {
    std::fs::write(path, write_vtk_string(space, model, state, title))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VtkGrid {
    pub title: String,
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u8>,
    pub point_vectors: BTreeMap<String, Vec<[f64; 3]>>,
    pub point_scalars: BTreeMap<String, Vec<f64>>,
    pub cell_scalars: BTreeMap<String, Vec<f64>>,
}

struct Tokens<'a> {
    it: std::str::SplitAsciiWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    fn word(&mut self) -> Result<&'a str, String> {
        self.it.next().ok_or_else(|| "unexpected end of VTK file".to_string())
    }

    fn num<T: std::str::FromStr>(&mut self) -> Result<T, String> {
        let w = self.word()?;
        w.parse().map_err(|_| format!("invalid number '{w}' in VTK file"))
    }
}

pub fn parse_vtk(text: &str) -> Result<VtkGrid, String> {
    let mut lines = text.splitn(3, '\n');
    let head = lines.next().unwrap_or("");
    if !head.starts_with("# vtk DataFile") {
        return Err("missing VTK header".into());
    }
    let mut grid = VtkGrid {
        title: lines.next().unwrap_or("").to_string(),
        ..VtkGrid::default()
    };
    let mut tok = Tokens {
        it: lines.next().unwrap_or("").split_ascii_whitespace(),
    };
    if tok.word()? != "ASCII" {
        return Err("only ASCII VTK files are supported".into());
    }
    if tok.word()? != "DATASET" || tok.word()? != "UNSTRUCTURED_GRID" {
        return Err("expected DATASET UNSTRUCTURED_GRID".into());
    }
    let mut section_len = 0usize;
    let mut in_cells = false;
    while let Some(kw) = tok.it.next() {
        match kw {
            "POINTS" => {
                let n: usize = tok.num()?;
                tok.word()?;
                for _ in 0..n {
                    grid.points.push([tok.num()?, tok.num()?, tok.num()?]);
                }
            }
            "CELLS" => {
                let n: usize = tok.num()?;
                let _size: usize = tok.num()?;
                for _ in 0..n {
                    let k: usize = tok.num()?;
                    let cell = (0..k).map(|_| tok.num()).collect::<Result<Vec<usize>, _>>()?;
                    grid.cells.push(cell);
                }
            }
            "CELL_TYPES" => {
                let n: usize = tok.num()?;
                for _ in 0..n {
                    grid.cell_types.push(tok.num()?);
                }
            }
            "POINT_DATA" => {
                section_len = tok.num()?;
                in_cells = false;
            }
            "CELL_DATA" => {
                section_len = tok.num()?;
                in_cells = true;
            }
            "VECTORS" => {
                let name = tok.word()?.to_string();
                tok.word()?;
                let v = (0..section_len)
                    .map(|_| Ok([tok.num()?, tok.num()?, tok.num()?]))
                    .collect::<Result<Vec<_>, String>>()?;
                if in_cells {
                    return Err("cell vectors are not supported".into());
                }
                grid.point_vectors.insert(name, v);
            }
            "SCALARS" => {
                let name = tok.word()?.to_string();
                tok.word()?;
                let ncomp: usize = tok.num()?;
                if ncomp != 1 {
                    return Err("only single-component scalars are supported".into());
                }
                if tok.word()? != "LOOKUP_TABLE" {
                    return Err("expected LOOKUP_TABLE".into());
                }
                tok.word()?;
                let v = (0..section_len).map(|_| tok.num()).collect::<Result<Vec<f64>, _>>()?;
                if in_cells {
                    grid.cell_scalars.insert(name, v);
                } else {
                    grid.point_scalars.insert(name, v);
                }
            }
            other => return Err(format!("unsupported VTK keyword '{other}'")),
        }
    }
    Ok(grid)
}

pub fn read_vtk(path: &Path) -> Result<VtkGrid, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_vtk(&text)
}
