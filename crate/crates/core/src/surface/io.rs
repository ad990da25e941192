//! Mesh loading from OFF and OBJ files, and from an intrinsic format that
//! carries edge lengths instead of vertex positions.
//!
//! The intrinsic format is line oriented:
//!
//! ```text
//! INTRINSIC
//! <n_vertices> <n_faces>
//! <i> <j> <k> <l_ij> <l_jk> <l_ki>     (one line per face)
//! ```

use super::{MeshData, SurfaceMesh};
use crate::{Error, Result};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
    Intrinsic,
}

/// Load a mesh, inferring the format from the file extension or, failing
/// that, from the header line.
pub fn load_mesh(path: &Path) -> Result<SurfaceMesh> {
    let text = std::fs::read_to_string(path)?;
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("off") => MeshFormat::Off,
        Some("obj") => MeshFormat::Obj,
        _ => {
            let first = text
                .lines()
                .map(str::trim)
                .find(|l| !l.is_empty() && !l.starts_with('#'))
                .unwrap_or("");
            if first == "OFF" {
                MeshFormat::Off
            } else if first == "INTRINSIC" {
                MeshFormat::Intrinsic
            } else if first.starts_with("v ") {
                MeshFormat::Obj
            } else {
                return Err(Error::Config(format!(
                    "cannot determine mesh format of {}",
                    path.display()
                )));
            }
        }
    };
    load_mesh_str(&text, format)
}

/// Parse mesh text in the given format.
pub fn load_mesh_str(text: &str, format: MeshFormat) -> Result<SurfaceMesh> {
    match format {
        MeshFormat::Off => parse_off(text),
        MeshFormat::Obj => parse_obj(text),
        MeshFormat::Intrinsic => parse_intrinsic(text),
    }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_fields<T: std::str::FromStr>(line_no: usize, line: &str, want: usize) -> Result<Vec<T>> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() < want {
        return Err(Error::Mesh(format!(
            "line {line_no}: expected {want} fields, got {}",
            fields.len()
        )));
    }
    fields[..want]
        .iter()
        .map(|f| {
            f.parse::<T>()
                .map_err(|_| Error::Mesh(format!("line {line_no}: cannot parse '{f}'")))
        })
        .collect()
}

fn parse_off(text: &str) -> Result<SurfaceMesh> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, "OFF")) => {}
        other => {
            return Err(Error::Mesh(format!(
                "OFF header missing, found {:?}",
                other.map(|(_, l)| l)
            )))
        }
    }
    let (no, counts_line) =
        lines.next().ok_or_else(|| Error::Mesh("OFF file ends after header".into()))?;
    let counts: Vec<usize> = parse_fields(no, counts_line, 2)?;
    let (nv, nf) = (counts[0], counts[1]);
    let mut positions = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (no, line) = lines
            .next()
            .ok_or_else(|| Error::Mesh("OFF file ends inside the vertex list".into()))?;
        let p: Vec<f64> = parse_fields(no, line, 3)?;
        positions.push([p[0], p[1], p[2]]);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (no, line) = lines
            .next()
            .ok_or_else(|| Error::Mesh("OFF file ends inside the face list".into()))?;
        let f: Vec<usize> = parse_fields(no, line, 4)?;
        if f[0] != 3 {
            return Err(Error::Mesh(format!(
                "line {no}: only triangle faces are supported, got a {}-gon",
                f[0]
            )));
        }
        faces.push([f[1], f[2], f[3]]);
    }
    SurfaceMesh::build(MeshData::Embedded { positions, faces })
}

fn parse_obj(text: &str) -> Result<SurfaceMesh> {
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    for (no, line) in content_lines(text) {
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                let p: Vec<f64> = parse_fields(no, &line[1..], 3)?;
                positions.push([p[0], p[1], p[2]]);
            }
            Some("f") => {
                let ids: Vec<usize> = fields
                    .map(|f| {
                        let head = f.split('/').next().unwrap_or("");
                        head.parse::<usize>().map_err(|_| {
                            Error::Mesh(format!("line {no}: cannot parse face corner '{f}'"))
                        })
                    })
                    .collect::<Result<_>>()?;
                if ids.len() != 3 {
                    return Err(Error::Mesh(format!(
                        "line {no}: only triangle faces are supported, got {} corners",
                        ids.len()
                    )));
                }
                if ids.iter().any(|&i| i == 0) {
                    return Err(Error::Mesh(format!("line {no}: OBJ indices are 1-based")));
                }
                faces.push([ids[0] - 1, ids[1] - 1, ids[2] - 1]);
            }
            _ => {} // normals, texture coordinates, groups, materials
        }
    }
    SurfaceMesh::build(MeshData::Embedded { positions, faces })
}

fn parse_intrinsic(text: &str) -> Result<SurfaceMesh> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, "INTRINSIC")) => {}
        other => {
            return Err(Error::Mesh(format!(
                "INTRINSIC header missing, found {:?}",
                other.map(|(_, l)| l)
            )))
        }
    }
    let (no, counts_line) =
        lines.next().ok_or_else(|| Error::Mesh("intrinsic file ends after header".into()))?;
    let counts: Vec<usize> = parse_fields(no, counts_line, 2)?;
    let (nv, nf) = (counts[0], counts[1]);
    let mut faces = Vec::with_capacity(nf);
    let mut halfedge_lengths = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (no, line) = lines
            .next()
            .ok_or_else(|| Error::Mesh("intrinsic file ends inside the face list".into()))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 6 {
            return Err(Error::Mesh(format!(
                "line {no}: expected 'i j k l_ij l_jk l_ki', got {} fields",
                fields.len()
            )));
        }
        let idx: Vec<usize> = parse_fields(no, &fields[..3].join(" "), 3)?;
        let len: Vec<f64> = parse_fields(no, &fields[3..6].join(" "), 3)?;
        faces.push([idx[0], idx[1], idx[2]]);
        halfedge_lengths.push([len[0], len[1], len[2]]);
    }
    SurfaceMesh::build(MeshData::Intrinsic { n_vertices: nv, faces, halfedge_lengths })
}

/// Write a mesh back out in OFF (embedded) or intrinsic (metric only) form.
pub fn save_mesh(mesh: &SurfaceMesh, path: &Path) -> Result<()> {
    let mut out = String::new();
    match mesh.positions() {
        Some(positions) => {
            out.push_str("OFF\n");
            out.push_str(&format!("{} {} {}\n", mesh.n_vertices(), mesh.n_faces(), mesh.n_edges()));
            for p in positions {
                out.push_str(&format!("{} {} {}\n", p[0], p[1], p[2]));
            }
            for f in mesh.faces() {
                out.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
            }
        }
        None => {
            out.push_str("INTRINSIC\n");
            out.push_str(&format!("{} {}\n", mesh.n_vertices(), mesh.n_faces()));
            for (fi, f) in mesh.faces().iter().enumerate() {
                out.push_str(&format!(
                    "{} {} {} {} {} {}\n",
                    f[0],
                    f[1],
                    f[2],
                    mesh.halfedge_length(3 * fi),
                    mesh.halfedge_length(3 * fi + 1),
                    mesh.halfedge_length(3 * fi + 2),
                ));
            }
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}
