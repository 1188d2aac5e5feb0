//! `.hcm` mesh files and diagnostics CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{TopologyTag, TriMesh};
use crate::pinch::{DiagnosticsRecord, CSV_HEADER};

/// Serializes a mesh: header `hcm 1 <n> <N> <t>`, `v` lines, then `f` lines with 1-based indices.
pub fn mesh_to_string(state: &TriMesh<f64>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "hcm 1 2 {} {:.16e}", state.ambient, state.time);
    for v in 0..state.vertex_count() {
        s.push('v');
        for x in state.vertex(v) {
            let _ = write!(s, " {x:.16e}");
        }
        s.push('\n');
    }
    for f in state.faces() {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

pub fn export_mesh(state: &TriMesh<f64>, path: &Path) -> Result<()> {
    fs::write(path, mesh_to_string(state))?;
    Ok(())
}

fn format_error(line: usize, message: impl Into<String>) -> Error {
    Error::FormatError { line, message: message.into() }
}

/// Topology guessed from the Euler characteristic of a closed mesh.
fn infer_tag(vertex_count: usize, faces: &[[usize; 3]]) -> TopologyTag {
    let probe = crate::mesh::Topology::new(vertex_count, faces.to_vec(), TopologyTag::Other);
    if probe.check_closed().is_err() {
        return TopologyTag::Open;
    }
    let chi = vertex_count as i64 - probe.edges.len() as i64 + faces.len() as i64;
    match chi {
        2 => TopologyTag::Sphere,
        0 => TopologyTag::Torus,
        _ => TopologyTag::Other,
    }
}

pub fn mesh_from_str(text: &str) -> Result<TriMesh<f64>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| format_error(1, "empty file"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 5 || parts[0] != "hcm" || parts[1] != "1" {
        return Err(format_error(1, format!("bad header {header:?}")));
    }
    let n: usize = parts[2].parse().map_err(|_| format_error(1, "bad dimension"))?;
    let ambient: usize = parts[3].parse().map_err(|_| format_error(1, "bad ambient dimension"))?;
    let time: f64 = parts[4].parse().map_err(|_| format_error(1, "bad time"))?;
    if n != 2 || ambient < 3 {
        return Err(format_error(1, format!("unsupported dimensions n = {n}, N = {ambient}")));
    }
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut last_line = 1;
    for (i, raw) in lines {
        let line = i + 1;
        last_line = line;
        let mut it = raw.split_whitespace();
        match it.next() {
            None => continue,
            Some("v") => {
                if !faces.is_empty() {
                    return Err(format_error(line, "vertex after faces"));
                }
                let p: Vec<f64> = it
                    .map(|x| x.parse::<f64>().map_err(|_| format_error(line, format!("bad coordinate {x:?}"))))
                    .collect::<Result<_>>()?;
                if p.len() != ambient {
                    return Err(format_error(line, format!("expected {ambient} coordinates, found {}", p.len())));
                }
                points.push(p);
            }
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|x| x.parse::<usize>().map_err(|_| format_error(line, format!("bad index {x:?}"))))
                    .collect::<Result<_>>()?;
                if idx.len() != 3 || idx.iter().any(|&k| k == 0 || k > points.len()) {
                    return Err(format_error(line, "face needs three indices in 1..=vertex count"));
                }
                faces.push([idx[0] - 1, idx[1] - 1, idx[2] - 1]);
            }
            Some(tok) => return Err(format_error(line, format!("unexpected record {tok:?}"))),
        }
    }
    if points.len() < 3 || faces.is_empty() {
        return Err(format_error(last_line + 1, "truncated file: no faces"));
    }
    let tag = infer_tag(points.len(), &faces);
    let mut mesh = TriMesh::new(&points, faces, tag);
    mesh.time = time;
    Ok(mesh)
}

pub fn import_mesh(path: &Path) -> Result<TriMesh<f64>> {
    mesh_from_str(&fs::read_to_string(path)?)
}

fn csv_value(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn diagnostics_to_csv(records: &[DiagnosticsRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        let row: Vec<String> = r.values().iter().map(|&x| csv_value(x)).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn diagnostics_from_csv(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(format_error(1, "missing diagnostics header")),
    }
    let mut out = Vec::new();
    for (i, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = raw
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format_error(i + 1, format!("bad number {x:?}"))))
            .collect::<Result<_>>()?;
        out.push(DiagnosticsRecord::from_values(&vals).map_err(|_| format_error(i + 1, "expected 16 columns"))?);
    }
    Ok(out)
}

/// Writes `(name, values...)` rows under a header.
pub fn write_table(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;

    #[test]
    fn round_trip_is_exact() {
        let mut m = shapes::icosphere::<f64>(2, 0.7, 3);
        m.time = 0.123456789;
        let back = mesh_from_str(&mesh_to_string(&m)).unwrap();
        assert_eq!(back.positions, m.positions);
        assert_eq!(back.faces(), m.faces());
        assert_eq!(back.time, m.time);
        assert_eq!(back.topology.tag, TopologyTag::Sphere);
    }

    #[test]
    fn torus_in_r4() {
        let m = shapes::clifford_torus_mesh::<f64>(8, 6, 0.5f64.sqrt());
        let back = mesh_from_str(&mesh_to_string(&m)).unwrap();
        assert_eq!(back.ambient, 4);
        assert_eq!(back.faces().len(), m.faces().len());
        assert_eq!(back.topology.tag, TopologyTag::Torus);
    }

    #[test]
    fn truncated_file() {
        let m = shapes::icosphere::<f64>(1, 1.0, 3);
        let text = mesh_to_string(&m);
        let cut: String = text.lines().take(10).collect::<Vec<_>>().join("\n");
        assert!(matches!(mesh_from_str(&cut), Err(Error::FormatError { .. })));
        let bad = text.replacen("v ", "v 1.0 ", 1);
        assert!(matches!(mesh_from_str(&bad), Err(Error::FormatError { line: 2, .. })));
        assert!(matches!(mesh_from_str(""), Err(Error::FormatError { line: 1, .. })));
    }

    #[test]
    fn csv_round_trip() {
        let mut r = DiagnosticsRecord::from_values(&[1.5; 16]).unwrap();
        r.psi = f64::NAN;
        let back = diagnostics_from_csv(&diagnostics_to_csv(&[r.clone()])).unwrap();
        assert_eq!(back[0].t, 1.5);
        assert!(back[0].psi.is_nan());
    }
}
