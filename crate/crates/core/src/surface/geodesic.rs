//! Geodesic distance by fast marching with one-step triangle unfolding,
//! plus derived quantities: geodesic balls and their boundary length and
//! area, sublevel-set face fractions, and an injectivity radius estimate
//! from short noncontractible loops.

use super::{SurfaceMesh, SurfacePoint};
use crate::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

struct HeapEntry {
    d: f64,
    v: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, o: &Self) -> bool {
        self.d == o.d && self.v == o.v
    }
}
impl Eq for HeapEntry {}
impl Ord for HeapEntry {
    fn cmp(&self, o: &Self) -> Ordering {
        o.d.total_cmp(&self.d).then_with(|| o.v.cmp(&self.v))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Distance to the nearest seed, propagated across faces. Seeds carry
/// initial offsets, so a single field can start from a point inside a face.
pub(super) fn vertex_distance_field(mesh: &SurfaceMesh, seeds: &[(usize, f64)]) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; mesh.n_vertices()];
    let mut heap = BinaryHeap::new();
    for &(v, d0) in seeds {
        if d0 < dist[v] {
            dist[v] = d0;
            heap.push(HeapEntry { d: d0, v });
        }
    }
    while let Some(HeapEntry { d, v }) = heap.pop() {
        if d > dist[v] + 1e-12 * (1.0 + dist[v]) {
            continue; // stale entry
        }
        for &h in mesh.ring(v) {
            let f = mesh.halfedge_face(h);
            for tc in 0..3 {
                let t = mesh.face(f)[tc];
                if t == v {
                    continue;
                }
                let cand = face_update(mesh, f, tc, &dist);
                if cand < dist[t] - 1e-12 * (1.0 + cand) {
                    dist[t] = cand;
                    heap.push(HeapEntry { d: cand, v: t });
                }
            }
        }
    }
    dist
}

/// Best distance for corner `tc` of face `f` given the other two corners.
fn face_update(mesh: &SurfaceMesh, f: usize, tc: usize, dist: &[f64]) -> f64 {
    let face = mesh.face(f);
    let (ca, cb) = ((tc + 1) % 3, (tc + 2) % 3);
    let (da, db) = (dist[face[ca]], dist[face[cb]]);
    // edge tc -> tc+1 has the length of side (target, a); edge tc+2 -> tc of
    // side (b, target)
    let la = mesh.halfedge_length(3 * f + tc);
    let lb = mesh.halfedge_length(3 * f + cb);
    let one_point = (da + la).min(db + lb);
    if !da.is_finite() || !db.is_finite() {
        return one_point;
    }
    let lay = mesh.face_layout(f);
    match two_point_update(lay[ca], lay[cb], lay[tc], da, db) {
        Some(d2) => one_point.min(d2),
        None => one_point,
    }
}

/// Unfold a virtual source below edge AB matching the distances at A and B;
/// the target distance is exact when the straight path from the source to C
/// enters through the open edge AB.
fn two_point_update(pa: [f64; 2], pb: [f64; 2], pc: [f64; 2], da: f64, db: f64) -> Option<f64> {
    let (ux, uy) = (pb[0] - pa[0], pb[1] - pa[1]);
    let c = (ux * ux + uy * uy).sqrt();
    if !(c > 0.0) {
        return None;
    }
    let (ex, ey) = (ux / c, uy / c);
    let (wx, wy) = (pc[0] - pa[0], pc[1] - pa[1]);
    // normal coordinate of C, with the normal chosen to point toward C
    let mut cn = wx * -ey + wy * ex;
    let cx = wx * ex + wy * ey;
    if cn < 0.0 {
        cn = -cn;
    }
    if !(cn > 0.0) {
        return None;
    }
    let xs = (da * da - db * db + c * c) / (2.0 * c);
    let ys2 = da * da - xs * xs;
    if ys2 <= 0.0 {
        return None;
    }
    let ys = ys2.sqrt(); // source at (xs, -ys)
    let t = ys / (ys + cn);
    let x_cross = xs + t * (cx - xs);
    if x_cross <= 0.0 || x_cross >= c {
        return None;
    }
    let d = ((cx - xs).powi(2) + (cn + ys).powi(2)).sqrt();
    if d + 1e-12 < da.max(db) {
        return None; // would violate monotone propagation
    }
    Some(d)
}

/// Distance field from a point anywhere on the surface, seeded with exact
/// in-face distances to the corners of its face.
pub(super) fn point_distance_field(mesh: &SurfaceMesh, from: &SurfacePoint) -> Vec<f64> {
    let lay = mesh.face_layout(from.face);
    let p = mesh.point_layout(from);
    let seeds: Vec<(usize, f64)> = (0..3)
        .map(|c| {
            let q = lay[c];
            let d = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
            (mesh.face(from.face)[c], d)
        })
        .collect();
    vertex_distance_field(mesh, &seeds)
}

fn eval_at_point(mesh: &SurfaceMesh, field: &[f64], p: &SurfacePoint) -> f64 {
    let f = mesh.face(p.face);
    p.bary[0] * field[f[0]] + p.bary[1] * field[f[1]] + p.bary[2] * field[f[2]]
}

/// Symmetrized two-field geodesic distance; points sharing a face use the
/// straight in-face segment.
pub(super) fn distance(mesh: &SurfaceMesh, a: &SurfacePoint, b: &SurfacePoint) -> f64 {
    if a.face == b.face {
        let (pa, pb) = (mesh.point_layout(a), mesh.point_layout(b));
        return ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
    }
    let fa = point_distance_field(mesh, a);
    let fb = point_distance_field(mesh, b);
    0.5 * (eval_at_point(mesh, &fa, b) + eval_at_point(mesh, &fb, a))
}

/// One straight piece of a ball boundary inside a face, in that face's
/// layout coordinates.
#[derive(Clone, Copy, Debug)]
pub struct BallSegment {
    pub face: usize,
    pub a: [f64; 2],
    pub b: [f64; 2],
}

/// Geodesic ball: boundary polyline pieces, their total length, the
/// enclosed area, and how many closed loops the boundary forms.
pub struct GeodesicBall {
    pub radius: f64,
    pub boundary_length: f64,
    pub area: f64,
    pub n_loops: usize,
    pub segments: Vec<BallSegment>,
}

pub(super) fn ball_boundary(
    mesh: &SurfaceMesh,
    center: &SurfacePoint,
    r: f64,
) -> Result<GeodesicBall> {
    if !(r > 0.0) {
        return Err(Error::Precondition(format!("ball radius must be positive, got {r}")));
    }
    let mut field = point_distance_field(mesh, center);
    // push values lying exactly on the level set slightly outward
    let scale = r.max(mesh.mean_edge_length());
    for v in field.iter_mut() {
        if (*v - r).abs() < 1e-13 * scale {
            *v = r + 1e-12 * scale;
        }
    }

    // crossing parameter per edge, measured along the canonical direction
    let mut crossing_t = vec![f64::NAN; mesh.n_edges()];
    for e in 0..mesh.n_edges() {
        let [u, v] = mesh.edge_vertices(e);
        if (field[u] < r) != (field[v] < r) {
            crossing_t[e] = (r - field[u]) / (field[v] - field[u]);
        }
    }

    let mut segments = Vec::new();
    let mut crossed_edges_of = vec![[usize::MAX; 2]; mesh.n_faces()];
    let mut crossed_faces = Vec::new();
    for f in 0..mesh.n_faces() {
        let lay = mesh.face_layout(f);
        let mut pts: Vec<([f64; 2], usize)> = Vec::new();
        for c in 0..3 {
            let h = 3 * f + c;
            let e = mesh.halfedge_edge(h);
            if crossing_t[e].is_nan() {
                continue;
            }
            let t = if mesh.halfedge_sign(h) > 0.0 { crossing_t[e] } else { 1.0 - crossing_t[e] };
            let (p0, p1) = (lay[c], lay[(c + 1) % 3]);
            pts.push(([p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])], e));
        }
        match pts.len() {
            0 => {}
            2 => {
                segments.push(BallSegment { face: f, a: pts[0].0, b: pts[1].0 });
                crossed_edges_of[f] = [pts[0].1, pts[1].1];
                crossed_faces.push(f);
            }
            n => {
                return Err(Error::Numerical(format!(
                    "ball boundary crosses face {f} in {n} edges"
                )))
            }
        }
    }
    if segments.is_empty() {
        return Err(Error::Precondition(format!(
            "ball of radius {r} has no boundary on this mesh; the radius is \
             below the mesh scale or above the surface extent"
        )));
    }

    // chain segments into loops across shared edges
    let mut visited = vec![false; mesh.n_faces()];
    let mut n_loops = 0usize;
    for &start in &crossed_faces {
        if visited[start] {
            continue;
        }
        n_loops += 1;
        let mut f = start;
        let mut enter = crossed_edges_of[start][0];
        loop {
            visited[f] = true;
            let [ea, eb] = crossed_edges_of[f];
            let exit = if ea == enter { eb } else { ea };
            let [fa, fb] = mesh.edge_faces(exit);
            let g = if fa == f { fb } else { fa };
            if crossed_edges_of[g][0] == usize::MAX {
                return Err(Error::Numerical(format!(
                    "ball boundary fails to close across edge {exit}"
                )));
            }
            enter = exit;
            f = g;
            if f == start {
                break;
            }
        }
    }

    let boundary_length = segments
        .iter()
        .map(|s| ((s.a[0] - s.b[0]).powi(2) + (s.a[1] - s.b[1]).powi(2)).sqrt())
        .sum();
    let area = (0..mesh.n_faces())
        .map(|f| {
            let fa = mesh.face(f);
            face_sublevel_area(mesh, f, [field[fa[0]], field[fa[1]], field[fa[2]]], r)
        })
        .sum();

    Ok(GeodesicBall { radius: r, boundary_length, area, n_loops, segments })
}

/// Area of the part of face `f` where the linear interpolant of the corner
/// values lies below `r`.
fn face_sublevel_area(mesh: &SurfaceMesh, f: usize, vals: [f64; 3], r: f64) -> f64 {
    let inside = [vals[0] < r, vals[1] < r, vals[2] < r];
    if inside == [false; 3] {
        return 0.0;
    }
    if inside == [true; 3] {
        return mesh.face_area(f);
    }
    let lay = mesh.face_layout(f);
    let mut poly: Vec<[f64; 2]> = Vec::with_capacity(4);
    for c in 0..3 {
        let cn = (c + 1) % 3;
        if inside[c] {
            poly.push(lay[c]);
        }
        if inside[c] != inside[cn] {
            let t = (r - vals[c]) / (vals[cn] - vals[c]);
            poly.push([
                lay[c][0] + t * (lay[cn][0] - lay[c][0]),
                lay[c][1] + t * (lay[cn][1] - lay[c][1]),
            ]);
        }
    }
    let mut twice_area = 0.0;
    for i in 0..poly.len() {
        let j = (i + 1) % poly.len();
        twice_area += poly[i][0] * poly[j][1] - poly[j][0] * poly[i][1];
    }
    0.5 * twice_area.abs()
}

/// Fraction of each face below level `r` of the vertex field.
pub(super) fn sublevel_fractions(mesh: &SurfaceMesh, field: &[f64], r: f64) -> Vec<f64> {
    (0..mesh.n_faces())
        .map(|f| {
            let fa = mesh.face(f);
            face_sublevel_area(mesh, f, [field[fa[0]], field[fa[1]], field[fa[2]]], r)
                / mesh.face_area(f)
        })
        .collect()
}

/// Injectivity radius estimate: for positive genus, half the shortest
/// noncontractible loop found through sampled root vertices, where loops
/// combine two shortest-path trees branches with one crossing edge and
/// noncontractibility is certified by a nonzero integer homology class.
/// Genus 0 has no such loops; half the diameter stands in.
pub(super) fn injectivity_radius(mesh: &SurfaceMesh) -> f64 {
    if mesh.genus() == 0 {
        return mesh.diameter_estimate() / 2.0;
    }
    let tc = crate::topology::tree_cotree(mesh);
    let cochains = crate::topology::crossing_cochains(mesh, &tc);
    let nv = mesh.n_vertices();
    let n_roots = 24.min(nv);
    let mut best = f64::INFINITY;
    for s in 0..n_roots {
        let root = s * nv / n_roots;
        let (dist, parent) = dijkstra(mesh, root);
        let class = crate::topology::tree_path_classes(mesh, &parent, &cochains);
        for e in 0..mesh.n_edges() {
            let [u, v] = mesh.edge_vertices(e);
            let is_tree_edge = parent[u].map(|h| mesh.halfedge_edge(h) == e).unwrap_or(false)
                || parent[v].map(|h| mesh.halfedge_edge(h) == e).unwrap_or(false);
            if is_tree_edge {
                continue;
            }
            let total = dist[u] + mesh.edge_length(e) + dist[v];
            if total >= best {
                continue;
            }
            let nonzero = cochains
                .iter()
                .enumerate()
                .any(|(k, w)| class[u][k] + w[e] - class[v][k] != 0);
            if nonzero {
                best = total;
            }
        }
    }
    best / 2.0
}

/// Shortest paths along edges from one root; returns distances and the
/// halfedge from the parent for every reached vertex.
fn dijkstra(mesh: &SurfaceMesh, root: usize) -> (Vec<f64>, Vec<Option<usize>>) {
    let mut dist = vec![f64::INFINITY; mesh.n_vertices()];
    let mut parent = vec![None; mesh.n_vertices()];
    let mut done = vec![false; mesh.n_vertices()];
    let mut heap = BinaryHeap::new();
    dist[root] = 0.0;
    heap.push(HeapEntry { d: 0.0, v: root });
    while let Some(HeapEntry { v, .. }) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &h in mesh.ring(v) {
            let w = mesh.halfedge_head(h);
            let nd = dist[v] + mesh.halfedge_length(h);
            if nd < dist[w] {
                dist[w] = nd;
                parent[w] = Some(h);
                heap.push(HeapEntry { d: nd, v: w });
            }
        }
    }
    (dist, parent)
}
