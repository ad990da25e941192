//! Triangulated closed surfaces, embedded or intrinsic, with the metric
//! primitives the rest of the crate builds on: connectivity, corner angles,
//! areas, curvature, geodesic distance, and geodesic balls.
//!
//! A mesh is immutable after construction. Connectivity uses halfedges:
//! halfedge `3*f + c` runs from corner `c` of face `f` to corner `c + 1`.
//! Each undirected edge stores a canonical orientation (the first halfedge
//! encountered); 1-cochains are indexed by these canonical edges.

mod geodesic;
mod io;
mod presets;

pub use geodesic::{BallSegment, GeodesicBall};
pub use io::{load_mesh, load_mesh_str, save_mesh, MeshFormat};
pub use presets::{flat_torus, genus2_octagon, icosphere, torus_of_revolution};

use crate::exterior::Cochain2;
use crate::{Error, Result};
use std::sync::OnceLock;

const NO_FACE: usize = usize::MAX;

/// Input geometry for mesh construction.
pub enum MeshData {
    /// Vertex positions in 3-space; edge lengths are derived.
    Embedded { positions: Vec<[f64; 3]>, faces: Vec<[usize; 3]> },
    /// Edge lengths only. `halfedge_lengths[f][c]` is the length of the edge
    /// from corner `c` to corner `c + 1` of face `f`; shared edges must agree
    /// to within 1e-12 relative.
    Intrinsic { n_vertices: usize, faces: Vec<[usize; 3]>, halfedge_lengths: Vec<[f64; 3]> },
}

/// A point on the surface: a face and barycentric coordinates in it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub face: usize,
    pub bary: [f64; 3],
}

impl SurfacePoint {
    pub fn new(face: usize, bary: [f64; 3]) -> Result<Self> {
        let s = bary[0] + bary[1] + bary[2];
        if (s - 1.0).abs() > 1e-12 || bary.iter().any(|&b| b < -1e-12) {
            return Err(Error::Precondition(format!(
                "barycentric coordinates {bary:?} do not describe a point"
            )));
        }
        Ok(SurfacePoint { face, bary })
    }

    /// The barycenter of a face.
    pub fn face_center(face: usize) -> Self {
        SurfacePoint { face, bary: [1.0 / 3.0; 3] }
    }

    /// Corner `c` of a face.
    pub fn at_corner(face: usize, c: usize) -> Self {
        let mut bary = [0.0; 3];
        bary[c] = 1.0;
        SurfacePoint { face, bary }
    }
}

/// Triangulated closed oriented 2-manifold.
pub struct SurfaceMesh {
    n_vertices: usize,
    faces: Vec<[usize; 3]>,
    positions: Option<Vec<[f64; 3]>>,

    // halfedge connectivity (index 3*f + c)
    halfedge_twin: Vec<usize>,
    halfedge_edge: Vec<usize>,
    halfedge_sign: Vec<f64>, // +1 if aligned with the canonical edge direction
    halfedge_length: Vec<f64>,
    corner_angle: Vec<f64>, // interior angle at the tail of each halfedge

    // edges with canonical orientation
    edge_vertices: Vec<[usize; 2]>,
    edge_lengths: Vec<f64>,
    edge_faces: Vec<[usize; 2]>, // [face of aligned halfedge, face of opposite]
    edge_halfedges: Vec<[usize; 2]>,

    // outgoing halfedges per vertex in counterclockwise order
    ring_offsets: Vec<usize>,
    ring_halfedges: Vec<usize>,

    face_areas: Vec<f64>,
    dual_areas: Vec<f64>,
    total_area: f64,
    vertex_total_angle: Vec<f64>,
    genus: usize,

    injectivity_cache: OnceLock<f64>,
    diameter_cache: OnceLock<f64>,
}

impl std::fmt::Debug for SurfaceMesh {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SurfaceMesh")
            .field("vertices", &self.n_vertices)
            .field("edges", &self.n_edges())
            .field("faces", &self.n_faces())
            .field("genus", &self.genus)
            .finish()
    }
}

impl SurfaceMesh {
    pub fn build(data: MeshData) -> Result<SurfaceMesh> {
        let (n_vertices, faces, positions, halfedge_lengths) = match data {
            MeshData::Embedded { positions, faces } => {
                let n = positions.len();
                let lengths: Vec<[f64; 3]> = faces
                    .iter()
                    .map(|f| {
                        let d = |a: usize, b: usize| -> f64 {
                            let (p, q) = (positions[f[a]], positions[f[b]]);
                            ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2))
                                .sqrt()
                        };
                        [d(0, 1), d(1, 2), d(2, 0)]
                    })
                    .collect();
                (n, faces, Some(positions), lengths)
            }
            MeshData::Intrinsic { n_vertices, faces, halfedge_lengths } => {
                if halfedge_lengths.len() != faces.len() {
                    return Err(Error::Mesh("length table does not match face count".into()));
                }
                (n_vertices, faces, None, halfedge_lengths)
            }
        };

        let n_faces = faces.len();
        if n_faces == 0 {
            return Err(Error::Mesh("mesh has no faces".into()));
        }
        for (fi, f) in faces.iter().enumerate() {
            if f[0] >= n_vertices || f[1] >= n_vertices || f[2] >= n_vertices {
                return Err(Error::Mesh(format!("face {fi} references a missing vertex")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[2] == f[0] {
                return Err(Error::Mesh(format!("face {fi} is degenerate: {f:?}")));
            }
        }
        for (fi, l) in halfedge_lengths.iter().enumerate() {
            if l.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::Mesh(format!("face {fi} has a nonpositive edge length")));
            }
            for c in 0..3 {
                if l[c] >= l[(c + 1) % 3] + l[(c + 2) % 3] {
                    return Err(Error::Mesh(format!(
                        "face {fi} violates the triangle inequality: lengths {l:?}"
                    )));
                }
            }
        }

        // pair halfedges into edges
        let n_he = 3 * n_faces;
        let mut edge_map: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::with_capacity(n_he / 2);
        let mut edge_vertices: Vec<[usize; 2]> = Vec::with_capacity(n_he / 2);
        let mut edge_lengths: Vec<f64> = Vec::with_capacity(n_he / 2);
        let mut edge_faces: Vec<[usize; 2]> = Vec::with_capacity(n_he / 2);
        let mut edge_halfedges: Vec<[usize; 2]> = Vec::with_capacity(n_he / 2);
        let mut halfedge_twin = vec![usize::MAX; n_he];
        let mut halfedge_edge = vec![usize::MAX; n_he];
        let mut halfedge_sign = vec![0.0f64; n_he];
        let mut halfedge_length = vec![0.0f64; n_he];

        for (fi, f) in faces.iter().enumerate() {
            for c in 0..3 {
                let h = 3 * fi + c;
                let (a, b) = (f[c], f[(c + 1) % 3]);
                let l = halfedge_lengths[fi][c];
                halfedge_length[h] = l;
                let key = (a.min(b), a.max(b));
                match edge_map.get(&key) {
                    None => {
                        let e = edge_vertices.len();
                        edge_map.insert(key, e);
                        edge_vertices.push([a, b]);
                        edge_lengths.push(l);
                        edge_faces.push([fi, NO_FACE]);
                        edge_halfedges.push([h, usize::MAX]);
                        halfedge_edge[h] = e;
                        halfedge_sign[h] = 1.0;
                    }
                    Some(&e) => {
                        if edge_faces[e][1] != NO_FACE {
                            return Err(Error::Mesh(format!(
                                "edge ({a}, {b}) is non-manifold: more than two incident faces"
                            )));
                        }
                        if edge_vertices[e] != [b, a] {
                            return Err(Error::Mesh(format!(
                                "inconsistent orientation across edge ({a}, {b})"
                            )));
                        }
                        let rel = (l - edge_lengths[e]).abs();
                        if rel > 1e-12 * edge_lengths[e].max(1.0) {
                            return Err(Error::Mesh(format!(
                                "edge ({a}, {b}) length disagreement: {} vs {}",
                                edge_lengths[e], l
                            )));
                        }
                        edge_faces[e][1] = fi;
                        edge_halfedges[e][1] = h;
                        halfedge_edge[h] = e;
                        halfedge_sign[h] = -1.0;
                        let other = edge_halfedges[e][0];
                        halfedge_twin[h] = other;
                        halfedge_twin[other] = h;
                    }
                }
            }
        }
        for (e, ef) in edge_faces.iter().enumerate() {
            if ef[1] == NO_FACE {
                let [a, b] = edge_vertices[e];
                return Err(Error::Mesh(format!(
                    "non-closed surface: edge ({a}, {b}) has a single incident face"
                )));
            }
        }
        let n_edges = edge_vertices.len();

        // corner angles (law of cosines; at the tail of each halfedge)
        let mut corner_angle = vec![0.0f64; n_he];
        for fi in 0..n_faces {
            let l = &halfedge_lengths[fi];
            for c in 0..3 {
                let (out, opp, inc) = (l[c], l[(c + 1) % 3], l[(c + 2) % 3]);
                let cos = ((out * out + inc * inc - opp * opp) / (2.0 * out * inc)).clamp(-1.0, 1.0);
                corner_angle[3 * fi + c] = cos.acos();
            }
        }

        // vertex rings: walk twin(prev(h)) starting from the lowest outgoing halfedge
        let mut out_count = vec![0usize; n_vertices];
        let mut first_out = vec![usize::MAX; n_vertices];
        for (fi, f) in faces.iter().enumerate() {
            for c in 0..3 {
                let h = 3 * fi + c;
                let v = f[c];
                out_count[v] += 1;
                if h < first_out[v] {
                    first_out[v] = h;
                }
            }
        }
        if out_count.iter().any(|&c| c == 0) {
            return Err(Error::Mesh("mesh has an isolated vertex".into()));
        }
        let mut ring_offsets = vec![0usize; n_vertices + 1];
        for v in 0..n_vertices {
            ring_offsets[v + 1] = ring_offsets[v] + out_count[v];
        }
        let mut ring_halfedges = vec![usize::MAX; n_he];
        let prev = |h: usize| -> usize { (h / 3) * 3 + (h + 2) % 3 };
        for v in 0..n_vertices {
            let start = first_out[v];
            let mut h = start;
            let mut k = 0;
            loop {
                if k >= out_count[v] {
                    return Err(Error::Mesh(format!("vertex {v} is non-manifold")));
                }
                ring_halfedges[ring_offsets[v] + k] = h;
                k += 1;
                h = halfedge_twin[prev(h)];
                if h == start {
                    break;
                }
            }
            if k != out_count[v] {
                return Err(Error::Mesh(format!(
                    "vertex {v} is non-manifold: disconnected fan"
                )));
            }
        }

        // connectivity of the whole surface
        {
            let mut seen = vec![false; n_vertices];
            let mut stack = vec![faces[0][0]];
            seen[faces[0][0]] = true;
            let mut visited = 1;
            while let Some(v) = stack.pop() {
                for &h in &ring_halfedges[ring_offsets[v]..ring_offsets[v + 1]] {
                    let w = faces[h / 3][(h % 3 + 1) % 3];
                    if !seen[w] {
                        seen[w] = true;
                        visited += 1;
                        stack.push(w);
                    }
                }
            }
            if visited != n_vertices {
                return Err(Error::Mesh("surface is not connected".into()));
            }
        }

        let chi = n_vertices as i64 - n_edges as i64 + n_faces as i64;
        if chi % 2 != 0 || chi > 2 {
            return Err(Error::Mesh(format!("Euler characteristic {chi} is not 2 - 2g")));
        }
        let genus = ((2 - chi) / 2) as usize;

        // areas (numerically stable Heron)
        let mut face_areas = vec![0.0f64; n_faces];
        for fi in 0..n_faces {
            let mut l = halfedge_lengths[fi];
            l.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let (a, b, c) = (l[0], l[1], l[2]);
            let s = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
            if s <= 0.0 {
                return Err(Error::Mesh(format!("face {fi} is metrically degenerate")));
            }
            face_areas[fi] = 0.25 * s.sqrt();
        }
        let total_area: f64 = face_areas.iter().sum();
        let mut dual_areas = vec![0.0f64; n_vertices];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                dual_areas[v] += face_areas[fi] / 3.0;
            }
        }

        let mut vertex_total_angle = vec![0.0f64; n_vertices];
        for (fi, f) in faces.iter().enumerate() {
            for c in 0..3 {
                vertex_total_angle[f[c]] += corner_angle[3 * fi + c];
            }
        }

        Ok(SurfaceMesh {
            n_vertices,
            faces,
            positions,
            halfedge_twin,
            halfedge_edge,
            halfedge_sign,
            halfedge_length,
            corner_angle,
            edge_vertices,
            edge_lengths,
            edge_faces,
            edge_halfedges,
            ring_offsets,
            ring_halfedges,
            face_areas,
            dual_areas,
            total_area,
            vertex_total_angle,
            genus,
            injectivity_cache: OnceLock::new(),
            diameter_cache: OnceLock::new(),
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }
    pub fn n_edges(&self) -> usize {
        self.edge_vertices.len()
    }
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices as i64 - self.n_edges() as i64 + self.n_faces() as i64
    }
    pub fn genus(&self) -> usize {
        self.genus
    }
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }
    pub fn face(&self, f: usize) -> [usize; 3] {
        self.faces[f]
    }
    pub fn positions(&self) -> Option<&[[f64; 3]]> {
        self.positions.as_deref()
    }
    pub fn edge_vertices(&self, e: usize) -> [usize; 2] {
        self.edge_vertices[e]
    }
    pub fn edge_length(&self, e: usize) -> f64 {
        self.edge_lengths[e]
    }
    pub fn edge_faces(&self, e: usize) -> [usize; 2] {
        self.edge_faces[e]
    }
    pub fn face_area(&self, f: usize) -> f64 {
        self.face_areas[f]
    }
    pub fn dual_area(&self, v: usize) -> f64 {
        self.dual_areas[v]
    }
    pub fn dual_areas(&self) -> &[f64] {
        &self.dual_areas
    }
    pub fn total_area(&self) -> f64 {
        self.total_area
    }
    pub fn vertex_total_angle(&self, v: usize) -> f64 {
        self.vertex_total_angle[v]
    }

    // halfedge accessors
    pub fn halfedge_tail(&self, h: usize) -> usize {
        self.faces[h / 3][h % 3]
    }
    pub fn halfedge_head(&self, h: usize) -> usize {
        self.faces[h / 3][(h % 3 + 1) % 3]
    }
    pub fn halfedge_face(&self, h: usize) -> usize {
        h / 3
    }
    pub fn halfedge_twin(&self, h: usize) -> usize {
        self.halfedge_twin[h]
    }
    pub fn halfedge_edge(&self, h: usize) -> usize {
        self.halfedge_edge[h]
    }
    /// +1 if the halfedge runs along its canonical edge, -1 against it.
    pub fn halfedge_sign(&self, h: usize) -> f64 {
        self.halfedge_sign[h]
    }
    pub fn halfedge_length(&self, h: usize) -> f64 {
        self.halfedge_length[h]
    }
    pub fn halfedge_next(&self, h: usize) -> usize {
        (h / 3) * 3 + (h + 1) % 3
    }
    pub fn halfedge_prev(&self, h: usize) -> usize {
        (h / 3) * 3 + (h + 2) % 3
    }
    /// Interior angle at the tail of `h` inside its face.
    pub fn corner_angle(&self, h: usize) -> f64 {
        self.corner_angle[h]
    }
    /// Halfedges of the edge: `[aligned, opposite]`.
    pub fn edge_halfedges(&self, e: usize) -> [usize; 2] {
        self.edge_halfedges[e]
    }
    /// Edge id between two adjacent vertices, if any.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.ring(a)
            .iter()
            .find(|&&h| self.halfedge_head(h) == b)
            .map(|&h| self.halfedge_edge[h])
    }

    /// Outgoing halfedges of `v` in counterclockwise order.
    pub fn ring(&self, v: usize) -> &[usize] {
        &self.ring_halfedges[self.ring_offsets[v]..self.ring_offsets[v + 1]]
    }

    /// Angle defect 2 pi minus the total corner angle, per vertex.
    pub fn angle_defects(&self) -> Vec<f64> {
        self.vertex_total_angle.iter().map(|&t| 2.0 * std::f64::consts::PI - t).collect()
    }

    /// Curvature as a face 2-form: the face's share of the angle defects of
    /// its corners, computed from corner angles normalized to a 2 pi vertex
    /// total. Sums to 2 pi chi exactly up to rounding.
    pub fn gaussian_curvature(&self) -> Cochain2 {
        let pi = std::f64::consts::PI;
        let values = (0..self.n_faces())
            .map(|fi| {
                let mut s = 0.0;
                for c in 0..3 {
                    let v = self.faces[fi][c];
                    s += self.corner_angle[3 * fi + c] * (2.0 * pi / self.vertex_total_angle[v]);
                }
                pi + s - 2.0 * pi
            })
            .collect();
        Cochain2(values)
    }

    /// Mean edge length: the mesh size h.
    pub fn mean_edge_length(&self) -> f64 {
        self.edge_lengths.iter().sum::<f64>() / self.n_edges() as f64
    }

    /// Isometric planar layout of a face: corner `c` of the returned triple
    /// corresponds to corner `c` of the face. Corner 0 sits at the origin,
    /// corner 1 on the positive x-axis, corner 2 in the upper half plane.
    pub fn face_layout(&self, f: usize) -> [[f64; 2]; 3] {
        let l01 = self.halfedge_length[3 * f];
        let l12 = self.halfedge_length[3 * f + 1];
        let l20 = self.halfedge_length[3 * f + 2];
        let x = (l01 * l01 + l20 * l20 - l12 * l12) / (2.0 * l01);
        let y = (l20 * l20 - x * x).max(0.0).sqrt();
        [[0.0, 0.0], [l01, 0.0], [x, y]]
    }

    /// Planar layout coordinates of a point in its face.
    pub fn point_layout(&self, p: &SurfacePoint) -> [f64; 2] {
        let lay = self.face_layout(p.face);
        [
            p.bary[0] * lay[0][0] + p.bary[1] * lay[1][0] + p.bary[2] * lay[2][0],
            p.bary[0] * lay[0][1] + p.bary[1] * lay[1][1] + p.bary[2] * lay[2][1],
        ]
    }

    /// Largest geodesic vertex distance from the farthest-point pair found by
    /// a two-sweep probe; cached.
    pub fn diameter_estimate(&self) -> f64 {
        *self.diameter_cache.get_or_init(|| {
            let d0 = geodesic::vertex_distance_field(self, &[(0, 0.0)]);
            let far = d0
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap_or(0);
            let d1 = geodesic::vertex_distance_field(self, &[(far, 0.0)]);
            d1.iter().cloned().fold(0.0, f64::max)
        })
    }

    /// Injectivity radius estimate: half the shortest noncontractible loop
    /// found through sampled root vertices, or half the diameter estimate for
    /// genus 0; cached.
    pub fn injectivity_radius_estimate(&self) -> f64 {
        *self
            .injectivity_cache
            .get_or_init(|| geodesic::injectivity_radius(self))
    }

    /// Geodesic distance field from a point, as values at all vertices.
    pub fn distance_field(&self, from: &SurfacePoint) -> Vec<f64> {
        geodesic::point_distance_field(self, from)
    }

    /// Symmetrized geodesic distance between two points.
    pub fn geodesic_distance(&self, from: &SurfacePoint, to: &SurfacePoint) -> f64 {
        geodesic::distance(self, from, to)
    }

    /// Boundary polyline and interior of the geodesic ball of radius `r`.
    pub fn geodesic_ball_boundary(&self, center: &SurfacePoint, r: f64) -> Result<GeodesicBall> {
        geodesic::ball_boundary(self, center, r)
    }

    /// Fraction of each face inside the sublevel set {field < r} of a per
    /// vertex field, by linear interpolation.
    pub fn sublevel_fractions(&self, field: &[f64], r: f64) -> Vec<f64> {
        geodesic::sublevel_fractions(self, field, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn icosahedron_counts() {
        let m = icosphere(0).unwrap();
        assert_eq!(m.n_vertices(), 12);
        assert_eq!(m.n_edges(), 30);
        assert_eq!(m.n_faces(), 20);
        assert_eq!(m.euler_characteristic(), 2);
        assert_eq!(m.genus(), 0);
    }

    #[test]
    fn icosphere_gauss_bonnet() {
        for level in [0, 2, 3] {
            let m = icosphere(level).unwrap();
            let total: f64 = m.angle_defects().iter().sum();
            assert!((total - 4.0 * PI).abs() < 1e-9, "level {level}: defect sum {total}");
            let k: f64 = m.gaussian_curvature().0.iter().sum();
            assert!((k - 4.0 * PI).abs() < 1e-9, "level {level}: curvature sum {k}");
        }
    }

    #[test]
    fn flat_torus_is_flat() {
        let m = flat_torus(8, 8, 1.0).unwrap();
        assert_eq!(m.euler_characteristic(), 0);
        assert_eq!(m.genus(), 1);
        assert_eq!(m.n_vertices(), 64);
        for d in m.angle_defects() {
            assert!(d.abs() < 1e-12);
        }
        for k in m.gaussian_curvature().0 {
            assert!(k.abs() < 1e-12);
        }
        assert!((m.total_area() - 64.0).abs() < 1e-9);
    }

    #[test]
    fn torus_of_revolution_curvature() {
        let m = torus_of_revolution(48, 24, 2.0, 0.7).unwrap();
        assert_eq!(m.genus(), 1);
        let k = m.gaussian_curvature().0;
        let total: f64 = k.iter().sum();
        assert!(total.abs() < 1e-9, "total curvature {total}");
        assert!(k.iter().any(|&v| v > 1e-6) && k.iter().any(|&v| v < -1e-6));
    }

    #[test]
    fn genus2_octagon_curvature() {
        let m = genus2_octagon(4).unwrap();
        assert_eq!(m.euler_characteristic(), -2);
        assert_eq!(m.genus(), 2);
        let total: f64 = m.gaussian_curvature().0.iter().sum();
        assert!((total + 4.0 * PI).abs() < 1e-9, "total curvature {total}");
        // a single cone vertex carries the whole defect
        let defects = m.angle_defects();
        let cones: Vec<f64> = defects.iter().copied().filter(|d| d.abs() > 1e-9).collect();
        assert_eq!(cones.len(), 1);
        assert!((cones[0] + 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn boundary_surface_rejected() {
        let data = MeshData::Embedded {
            positions: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            faces: vec![[0, 1, 2]],
        };
        let err = SurfaceMesh::build(data).unwrap_err();
        assert!(err.to_string().contains("non-closed"), "{err}");
    }

    #[test]
    fn inconsistent_orientation_rejected() {
        // tetrahedron with one face flipped
        let positions = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let faces = vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]];
        let ok = SurfaceMesh::build(MeshData::Embedded {
            positions: positions.clone(),
            faces,
        });
        assert!(ok.is_ok());
        let flipped = vec![[0, 2, 1], [0, 1, 3], [2, 1, 3], [0, 3, 2]];
        let err = SurfaceMesh::build(MeshData::Embedded { positions, faces: flipped }).unwrap_err();
        assert!(err.to_string().contains("orientation"), "{err}");
    }

    #[test]
    fn triangle_inequality_rejected() {
        let data = MeshData::Intrinsic {
            n_vertices: 3,
            faces: vec![[0, 1, 2], [0, 2, 1]],
            halfedge_lengths: vec![[1.0, 1.0, 2.5], [2.5, 1.0, 1.0]],
        };
        let err = SurfaceMesh::build(data).unwrap_err();
        assert!(err.to_string().contains("triangle inequality"), "{err}");
    }

    #[test]
    fn ring_order_covers_vertex() {
        let m = icosphere(1).unwrap();
        for v in 0..m.n_vertices() {
            let ring = m.ring(v);
            assert!(ring.len() == 5 || ring.len() == 6);
            for &h in ring {
                assert_eq!(m.halfedge_tail(h), v);
            }
            // consecutive ring halfedges share a face
            for i in 0..ring.len() {
                let a = ring[i];
                let b = ring[(i + 1) % ring.len()];
                assert_eq!(m.halfedge_twin(m.halfedge_prev(a)), b);
            }
        }
    }

    #[test]
    fn face_layout_matches_lengths() {
        let m = torus_of_revolution(12, 8, 2.0, 0.7).unwrap();
        for f in [0usize, 5, 17] {
            let lay = m.face_layout(f);
            let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            assert!((d(lay[0], lay[1]) - m.halfedge_length(3 * f)).abs() < 1e-12);
            assert!((d(lay[1], lay[2]) - m.halfedge_length(3 * f + 1)).abs() < 1e-12);
            assert!((d(lay[2], lay[0]) - m.halfedge_length(3 * f + 2)).abs() < 1e-12);
        }
    }
}
