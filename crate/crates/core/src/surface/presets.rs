//! Built-in test surfaces: icospheres, flat tori, tori of revolution, and a
//! flat genus-2 surface glued from a regular octagon.

use super::{MeshData, SurfaceMesh};
use crate::{Error, Result};
use std::collections::HashMap;
use std::f64::consts::PI;

fn normalize(p: &mut [f64; 3]) {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    p[0] /= n;
    p[1] /= n;
    p[2] /= n;
}

/// Icosahedron subdivided `level` times, vertices projected to the unit
/// sphere. Level 0 has 12 vertices; each level multiplies faces by 4.
pub fn icosphere(level: usize) -> Result<SurfaceMesh> {
    if level > 8 {
        return Err(Error::Config(format!("icosphere level {level} is too large")));
    }
    let t = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut positions: Vec<[f64; 3]> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    for p in &mut positions {
        normalize(p);
    }
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut refined = Vec::with_capacity(4 * faces.len());
        for f in &faces {
            let mut mid = [0usize; 3];
            for c in 0..3 {
                let (a, b) = (f[c], f[(c + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[c] = match midpoint.get(&key) {
                    Some(&m) => m,
                    None => {
                        let (p, q) = (positions[a], positions[b]);
                        let mut m = [
                            (p[0] + q[0]) / 2.0,
                            (p[1] + q[1]) / 2.0,
                            (p[2] + q[2]) / 2.0,
                        ];
                        normalize(&mut m);
                        positions.push(m);
                        let id = positions.len() - 1;
                        midpoint.insert(key, id);
                        id
                    }
                };
            }
            refined.push([f[0], mid[0], mid[2]]);
            refined.push([f[1], mid[1], mid[0]]);
            refined.push([f[2], mid[2], mid[1]]);
            refined.push([mid[0], mid[1], mid[2]]);
        }
        faces = refined;
    }
    SurfaceMesh::build(MeshData::Embedded { positions, faces })
}

/// Flat torus from an `nx` by `ny` grid of square cells of side `cell`,
/// each split along one diagonal. Needs at least 3 cells per direction so
/// that no two vertices share more than one edge.
pub fn flat_torus(nx: usize, ny: usize, cell: f64) -> Result<SurfaceMesh> {
    if nx < 3 || ny < 3 {
        return Err(Error::Config(format!(
            "flat torus needs at least 3 cells per direction, got {nx} by {ny}"
        )));
    }
    if !(cell > 0.0) {
        return Err(Error::Config(format!("cell size must be positive, got {cell}")));
    }
    let v = |i: usize, j: usize| (i % nx) * ny + (j % ny);
    let diag = cell * 2.0f64.sqrt();
    let mut faces = Vec::with_capacity(2 * nx * ny);
    let mut lengths = Vec::with_capacity(2 * nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            let (a, b, c, d) = (v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1));
            faces.push([a, b, c]);
            lengths.push([cell, cell, diag]);
            faces.push([a, c, d]);
            lengths.push([diag, cell, cell]);
        }
    }
    SurfaceMesh::build(MeshData::Intrinsic {
        n_vertices: nx * ny,
        faces,
        halfedge_lengths: lengths,
    })
}

/// Torus of revolution embedded in 3-space: tube radius `small_r` around a
/// circle of radius `big_r`, sampled on an `nu` by `nv` grid.
pub fn torus_of_revolution(nu: usize, nv: usize, big_r: f64, small_r: f64) -> Result<SurfaceMesh> {
    if nu < 3 || nv < 3 {
        return Err(Error::Config(format!(
            "torus of revolution needs at least 3 samples per direction, got {nu} by {nv}"
        )));
    }
    if !(small_r > 0.0) || !(big_r > small_r) {
        return Err(Error::Config(format!(
            "torus of revolution needs 0 < small radius < big radius, got {small_r}, {big_r}"
        )));
    }
    let mut positions = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let w = 2.0 * PI * j as f64 / nv as f64;
            let ring = big_r + small_r * w.cos();
            positions.push([ring * u.cos(), ring * u.sin(), small_r * w.sin()]);
        }
    }
    let v = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    SurfaceMesh::build(MeshData::Embedded { positions, faces })
}

#[derive(Clone, Copy, Hash, PartialEq, Eq)]
enum OctKey {
    Center,
    Cone,
    /// Point `t` of `m` along the spoke from the center to corner `k`.
    Radial(usize, usize),
    /// Interior point `j` of `m` along octagon side `k`, after gluing.
    Side(usize, usize),
    /// Interior grid point `(r, s)` of wedge `k`.
    Wedge(usize, usize, usize),
}

/// Flat genus-2 surface: a regular octagon with sides glued in opposite
/// pairs with reversal, so all corners meet in one cone vertex of total
/// angle 6 pi. Each of the 8 center wedges is subdivided into `m * m`
/// triangles; `m` must be at least 3.
pub fn genus2_octagon(m: usize) -> Result<SurfaceMesh> {
    if m < 3 {
        return Err(Error::Config(format!(
            "octagon subdivision must be at least 3, got {m}"
        )));
    }
    // sides k and partner(k) are identified tip-to-tail
    let partner = |k: usize| match k {
        0 => 2,
        1 => 3,
        2 => 0,
        3 => 1,
        4 => 6,
        5 => 7,
        6 => 4,
        7 => 5,
        _ => unreachable!(),
    };
    let key_of = |k: usize, r: usize, s: usize| -> OctKey {
        if r == 0 {
            OctKey::Center
        } else if r == m && (s == 0 || s == m) {
            OctKey::Cone
        } else if s == 0 {
            OctKey::Radial(k, r)
        } else if s == r && r < m {
            OctKey::Radial((k + 1) % 8, r)
        } else if r == m {
            let p = partner(k);
            if k < p {
                OctKey::Side(k, s)
            } else {
                OctKey::Side(p, m - s)
            }
        } else {
            OctKey::Wedge(k, r, s)
        }
    };

    let mut ids: HashMap<OctKey, usize> = HashMap::new();
    let mut n_vertices = 0usize;
    let mut vertex = |key: OctKey, n: &mut usize| -> usize {
        *ids.entry(key).or_insert_with(|| {
            let id = *n;
            *n += 1;
            id
        })
    };

    // local wedge geometry: center at the origin, corners on the unit circle
    let wedge_point = |r: usize, s: usize| -> [f64; 2] {
        let p = [1.0, 0.0];
        let q = [(PI / 4.0).cos(), (PI / 4.0).sin()];
        let (rf, sf) = (r as f64 / m as f64, s as f64 / m as f64);
        [
            (rf - sf) * p[0] + sf * q[0],
            (rf - sf) * p[1] + sf * q[1],
        ]
    };
    let seg = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();

    let mut faces = Vec::with_capacity(8 * m * m);
    let mut lengths = Vec::with_capacity(8 * m * m);
    for k in 0..8 {
        let mut push_face = |corners: [(usize, usize); 3], n: &mut usize| {
            let ids = [
                vertex(key_of(k, corners[0].0, corners[0].1), n),
                vertex(key_of(k, corners[1].0, corners[1].1), n),
                vertex(key_of(k, corners[2].0, corners[2].1), n),
            ];
            let pts = [
                wedge_point(corners[0].0, corners[0].1),
                wedge_point(corners[1].0, corners[1].1),
                wedge_point(corners[2].0, corners[2].1),
            ];
            faces.push(ids);
            lengths.push([seg(pts[0], pts[1]), seg(pts[1], pts[2]), seg(pts[2], pts[0])]);
        };
        for r in 0..m {
            for s in 0..=r {
                push_face([(r, s), (r + 1, s), (r + 1, s + 1)], &mut n_vertices);
                if s < r {
                    push_face([(r, s), (r + 1, s + 1), (r, s + 1)], &mut n_vertices);
                }
            }
        }
    }

    SurfaceMesh::build(MeshData::Intrinsic {
        n_vertices,
        faces,
        halfedge_lengths: lengths,
    })
}
