//! Plain-text hexahedral mesh format.
//!
//! ```text
//! hexmesh <vertices> <cells> <faces>
//! x y z                 one line per vertex
//! v0 v1 ... v7          one line per cell
//! cell face tag         one line per tagged boundary face
//! ```
//!
//! Blank lines and text after `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use thermovisc_core::fem::{BoundaryFace, Mesh};

pub fn write_mesh_string(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "hexmesh {} {} {}",
        mesh.vertex_count(),
        mesh.cell_count(),
        mesh.boundary_faces().len()
    );
    for v in mesh.vertices() {
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", v[0], v[1], v[2]);
    }
    for c in mesh.cells() {
        let row: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    for f in mesh.boundary_faces() {
        let _ = writeln!(s, "{} {} {}", f.cell, f.face, f.tag);
    }
    s
}

pub fn write_mesh(path: &Path, mesh: &Mesh) -> std::io::Result<()> {
    std::fs::write(path, write_mesh_string(mesh))
}

pub fn read_mesh(path: &Path) -> Result<Mesh, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_mesh(&text)
}

pub fn parse_mesh(text: &str) -> Result<Mesh, String> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (ln, header) = lines.next().ok_or("empty mesh file")?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != "hexmesh" {
        return Err(format!("line {ln}: expected `hexmesh <vertices> <cells> <faces>`"));
    }
    let count = |s: &str| s.parse::<usize>().map_err(|_| format!("line {ln}: invalid count '{s}'"));
    let (nv, nc, nf) = (count(h[1])?, count(h[2])?, count(h[3])?);

    fn fields<T: std::str::FromStr>(ln: usize, line: &str, n: usize) -> Result<Vec<T>, String> {
        let v: Vec<T> = line
            .split_whitespace()
            .map(|w| w.parse::<T>().map_err(|_| format!("line {ln}: invalid value '{w}'")))
            .collect::<Result<_, _>>()?;
        if v.len() != n {
            return Err(format!("line {ln}: expected {n} values, found {}", v.len()));
        }
        Ok(v)
    }
    let mut next = |what: &str| lines.next().ok_or_else(|| format!("unexpected end of file while reading {what}"));

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = next("vertices")?;
        let v: Vec<f64> = fields(ln, l, 3)?;
        vertices.push([v[0], v[1], v[2]]);
    }
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, l) = next("cells")?;
        let v: Vec<usize> = fields(ln, l, 8)?;
        cells.push(std::array::from_fn(|i| v[i]));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = next("faces")?;
        let v: Vec<u64> = fields(ln, l, 3)?;
        let face = u8::try_from(v[1]).map_err(|_| format!("line {ln}: face index out of range"))?;
        let tag = u32::try_from(v[2]).map_err(|_| format!("line {ln}: tag out of range"))?;
        faces.push(BoundaryFace {
            cell: v[0] as usize,
            face,
            tag,
        });
    }
    if let Some((ln, _)) = lines.next() {
        return Err(format!("line {ln}: trailing content after the declared entries"));
    }
    Mesh::new(vertices, cells, faces).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use thermovisc_core::fem::build_box_mesh;

    #[test]
    fn box_mesh_round_trip() {
        let m = build_box_mesh([1.0, 2.0, 0.5], [2, 1, 3]).unwrap();
        let back = parse_mesh(&write_mesh_string(&m)).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.cells(), m.cells());
        assert_eq!(back.boundary_faces(), m.boundary_faces());
    }

    #[test]
    fn malformed() {
        assert!(parse_mesh("").is_err());
        assert!(parse_mesh("hexmesh 1 0").is_err());
        assert!(parse_mesh("hexmesh 2 0 0\n0 0 0\n").is_err());
        let e = parse_mesh("hexmesh 1 0 0\n0 0 x\n").unwrap_err();
        assert!(e.contains("line 2"), "{e}");
    }
}
