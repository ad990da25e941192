//! The discrete Levi-Civita connection: per-vertex frames on the intrinsic
//! tangent polygon, parallel-transport angles along edges, the connection
//! 1-form of a frame choice, and tangent vector fields as complex vertex
//! coefficients with their covariant Dirichlet energy and current 1-form.
//!
//! A vertex's tangent polygon is its corner fan with angles rescaled to a
//! total of 2 pi; directions are angles from a reference halfedge. The
//! transport angle along an edge matches the two endpoint views of that
//! edge, so the oriented sum of transport angles around a face reproduces
//! the face's curvature share exactly, up to rounding.

use crate::exterior::{cotan_weights, Cochain1};
use crate::profile::PotentialF;
use crate::surface::SurfaceMesh;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::sync::Arc;

/// Wrap an angle to (-pi, pi].
pub(crate) fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut y = x % two_pi;
    if y <= -PI {
        y += two_pi;
    } else if y > PI {
        y -= two_pi;
    }
    y
}

/// Per-vertex frames plus the transport angles they induce.
pub struct FrameField {
    n_vertices: usize,
    /// Direction of each outgoing halfedge in its tail vertex's frame.
    halfedge_angle: Vec<f64>,
    /// Transport angle along each canonical edge, in (-pi, pi].
    connection: Vec<f64>,
}

impl FrameField {
    /// Frames referenced to each vertex's first outgoing halfedge.
    pub fn new(mesh: &SurfaceMesh) -> FrameField {
        FrameField::with_offsets(mesh, &vec![0.0; mesh.n_vertices()])
    }

    /// Frames rotated by a per-vertex offset angle. Different offsets give a
    /// different connection 1-form, but only by the differential of the
    /// offsets; face holonomies are unchanged.
    pub fn with_offsets(mesh: &SurfaceMesh, offsets: &[f64]) -> FrameField {
        assert_eq!(offsets.len(), mesh.n_vertices(), "one offset per vertex");
        let mut halfedge_angle = vec![0.0; 3 * mesh.n_faces()];
        for v in 0..mesh.n_vertices() {
            let scale = 2.0 * PI / mesh.vertex_total_angle(v);
            let mut cum = -offsets[v];
            for &h in mesh.ring(v) {
                halfedge_angle[h] = cum;
                cum += mesh.corner_angle(h) * scale;
            }
        }
        let connection = (0..mesh.n_edges())
            .map(|e| {
                let [huv, hvu] = mesh.edge_halfedges(e);
                wrap_angle(halfedge_angle[hvu] + PI - halfedge_angle[huv])
            })
            .collect();
        FrameField { n_vertices: mesh.n_vertices(), halfedge_angle, connection }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Direction of halfedge `h` in the frame of its tail vertex.
    pub fn halfedge_angle(&self, h: usize) -> f64 {
        self.halfedge_angle[h]
    }

    /// The connection 1-form: transport angle per canonical edge.
    pub fn connection(&self) -> Cochain1 {
        Cochain1(self.connection.clone())
    }

    /// Transport angle along edge `e` in its canonical direction.
    pub fn transport(&self, e: usize) -> f64 {
        self.connection[e]
    }

    /// Transport angle along halfedge `h`.
    pub fn transport_along(&self, mesh: &SurfaceMesh, h: usize) -> f64 {
        self.connection[mesh.halfedge_edge(h)] * mesh.halfedge_sign(h)
    }

    /// Wrapped oriented sum of transport angles around face `f`: the
    /// discrete curvature 2-form of the connection.
    pub fn face_holonomy(&self, mesh: &SurfaceMesh, f: usize) -> f64 {
        let mut sum = 0.0;
        for c in 0..3 {
            sum += self.transport_along(mesh, 3 * f + c);
        }
        wrap_angle(sum)
    }
}

/// A tangent vector field: complex coefficient per vertex, read against a
/// frame field. Multiplying a coefficient by i rotates the vector a
/// quarter turn counterclockwise.
#[derive(Clone)]
pub struct TangentVectorField {
    pub frame: Arc<FrameField>,
    pub values: Vec<Complex64>,
}

impl TangentVectorField {
    pub fn new(frame: Arc<FrameField>, values: Vec<Complex64>) -> Result<TangentVectorField> {
        if values.len() != frame.n_vertices {
            return Err(Error::Precondition(
                "coefficient count does not match the frame's vertex count".into(),
            ));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Precondition("field coefficients must be finite".into()));
        }
        Ok(TangentVectorField { frame, values })
    }

    pub fn constant(frame: Arc<FrameField>, z: Complex64) -> TangentVectorField {
        let n = frame.n_vertices;
        TangentVectorField { frame, values: vec![z; n] }
    }

    /// The same field rotated by a global phase.
    pub fn rotated(&self, beta: f64) -> TangentVectorField {
        let r = Complex64::from_polar(1.0, beta);
        TangentVectorField {
            frame: self.frame.clone(),
            values: self.values.iter().map(|z| z * r).collect(),
        }
    }

    /// Write as CSV: vertex id, Re z, Im z.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "vertex,re,im")?;
        for (v, z) in self.values.iter().enumerate() {
            writeln!(out, "{v},{},{}", z.re, z.im)?;
        }
        Ok(())
    }

    /// Read coefficients written by `write_csv`.
    pub fn read_csv<R: BufRead>(frame: Arc<FrameField>, input: R) -> Result<TangentVectorField> {
        let mut values = vec![Complex64::new(0.0, 0.0); frame.n_vertices];
        let mut seen = vec![false; frame.n_vertices];
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if i == 0 && line.starts_with("vertex") {
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Config(format!("csv line {}: expected 3 fields", i + 1)));
            }
            let v: usize = fields[0]
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("csv line {}: bad vertex id", i + 1)))?;
            if v >= values.len() {
                return Err(Error::Config(format!("csv line {}: vertex {v} out of range", i + 1)));
            }
            let re: f64 = fields[1]
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("csv line {}: bad value", i + 1)))?;
            let im: f64 = fields[2]
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("csv line {}: bad value", i + 1)))?;
            values[v] = Complex64::new(re, im);
            seen[v] = true;
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::Config(format!("csv is missing vertex {v}")));
        }
        TangentVectorField::new(frame, values)
    }
}

/// Current 1-form of a field: per canonical edge (u, v), the phase turned
/// by the coefficient after transport, `arg(conj(z_u) z_v e^{-iA})`. For
/// unit fields this is exactly the angle increment along the edge; edges
/// with a vanishing endpoint carry zero.
pub fn j_form(mesh: &SurfaceMesh, u: &TangentVectorField) -> Cochain1 {
    let values = (0..mesh.n_edges())
        .map(|e| {
            let [a, b] = mesh.edge_vertices(e);
            let t = Complex64::from_polar(1.0, -u.frame.connection[e]);
            (u.values[a].conj() * u.values[b] * t).arg()
        })
        .collect();
    Cochain1(values)
}

/// Covariant Dirichlet energy: half the cotan-weighted sum of transported
/// coefficient differences.
pub fn dirichlet_energy(mesh: &SurfaceMesh, u: &TangentVectorField) -> f64 {
    let w = cotan_weights(mesh);
    let mut energy = 0.0;
    for e in 0..mesh.n_edges() {
        let [a, b] = mesh.edge_vertices(e);
        let t = Complex64::from_polar(1.0, -u.frame.connection[e]);
        energy += 0.5 * w[e] * (u.values[b] * t - u.values[a]).norm_sqr();
    }
    energy
}

/// Potential energy (1 / 4 eps^2) * integral of F(|u|^2) by dual-area
/// quadrature.
pub fn potential_energy(
    mesh: &SurfaceMesh,
    u: &TangentVectorField,
    well: &PotentialF,
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("eps must be positive, got {eps}")));
    }
    let total: f64 = (0..mesh.n_vertices())
        .map(|v| mesh.dual_area(v) * well.eval(u.values[v].norm_sqr()))
        .sum();
    Ok(total / (4.0 * eps * eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{flat_torus, icosphere, torus_of_revolution};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn holonomy_matches_curvature() {
        for mesh in [
            icosphere(2).unwrap(),
            flat_torus(5, 4, 1.0).unwrap(),
            torus_of_revolution(16, 8, 2.0, 0.7).unwrap(),
            crate::surface::genus2_octagon(3).unwrap(),
        ] {
            let frame = FrameField::new(&mesh);
            let curvature = mesh.gaussian_curvature();
            for f in 0..mesh.n_faces() {
                let hol = frame.face_holonomy(&mesh, f);
                assert!(
                    (hol - curvature.0[f]).abs() < 1e-12,
                    "face {f}: holonomy {hol} vs curvature {}",
                    curvature.0[f]
                );
            }
        }
    }

    #[test]
    fn total_holonomy_is_gauss_bonnet() {
        let mesh = icosphere(3).unwrap();
        let frame = FrameField::new(&mesh);
        let total: f64 = (0..mesh.n_faces()).map(|f| frame.face_holonomy(&mesh, f)).sum();
        assert!((total - 4.0 * PI).abs() < 1e-9, "total {total}");
    }

    #[test]
    fn holonomy_is_frame_independent() {
        let mesh = torus_of_revolution(12, 8, 2.0, 0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let offsets: Vec<f64> = (0..mesh.n_vertices()).map(|_| rng.random_range(-PI..PI)).collect();
        let plain = FrameField::new(&mesh);
        let rotated = FrameField::with_offsets(&mesh, &offsets);
        for f in 0..mesh.n_faces() {
            let a = plain.face_holonomy(&mesh, f);
            let b = rotated.face_holonomy(&mesh, f);
            assert!((a - b).abs() < 1e-12, "face {f}: {a} vs {b}");
        }
    }

    #[test]
    fn flat_torus_admits_parallel_frames() {
        let mesh = flat_torus(5, 7, 0.5).unwrap();
        let base = FrameField::new(&mesh);
        // propagate offsets along a spanning tree so that transport vanishes
        let mut offsets = vec![f64::NAN; mesh.n_vertices()];
        offsets[0] = 0.0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &h in mesh.ring(v) {
                let w = mesh.halfedge_head(h);
                if offsets[w].is_nan() {
                    offsets[w] = offsets[v] + base.transport_along(&mesh, h);
                    queue.push_back(w);
                }
            }
        }
        let aligned = FrameField::with_offsets(&mesh, &offsets);
        for e in 0..mesh.n_edges() {
            assert!(
                wrap_angle(aligned.transport(e)).abs() < 1e-12,
                "edge {e}: transport {}",
                aligned.transport(e)
            );
        }
    }

    #[test]
    fn constant_unit_field_on_parallel_frames_has_no_energy_or_current() {
        let mesh = flat_torus(4, 4, 1.0).unwrap();
        let base = FrameField::new(&mesh);
        let mut offsets = vec![f64::NAN; mesh.n_vertices()];
        offsets[0] = 0.0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &h in mesh.ring(v) {
                let w = mesh.halfedge_head(h);
                if offsets[w].is_nan() {
                    offsets[w] = offsets[v] + base.transport_along(&mesh, h);
                    queue.push_back(w);
                }
            }
        }
        let frame = Arc::new(FrameField::with_offsets(&mesh, &offsets));
        let u = TangentVectorField::constant(frame, Complex64::new(1.0, 0.0));
        assert!(dirichlet_energy(&mesh, &u) < 1e-24);
        let j = j_form(&mesh, &u);
        assert!(j.0.iter().all(|v| v.abs() < 1e-12));
        let e0 = potential_energy(&mesh, &u, &PotentialF::standard(), 0.1).unwrap();
        assert_eq!(e0, 0.0);
    }

    #[test]
    fn zero_field_potential_energy() {
        let mesh = icosphere(1).unwrap();
        let frame = Arc::new(FrameField::new(&mesh));
        let u = TangentVectorField::constant(frame, Complex64::new(0.0, 0.0));
        let eps = 0.2;
        let e = potential_energy(&mesh, &u, &PotentialF::standard(), eps).unwrap();
        let expected = mesh.total_area() / (4.0 * eps * eps);
        assert!((e - expected).abs() < 1e-12 * expected);
        assert!(potential_energy(&mesh, &u, &PotentialF::standard(), 0.0).is_err());
    }

    #[test]
    fn current_ignores_global_phase() {
        let mesh = icosphere(2).unwrap();
        let frame = Arc::new(FrameField::new(&mesh));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let values: Vec<Complex64> = (0..mesh.n_vertices())
            .map(|_| Complex64::from_polar(1.0, rng.random_range(-PI..PI)))
            .collect();
        let u = TangentVectorField::new(frame, values).unwrap();
        let v = u.rotated(1.234);
        let (ju, jv) = (j_form(&mesh, &u), j_form(&mesh, &v));
        for e in 0..mesh.n_edges() {
            assert!((ju.0[e] - jv.0[e]).abs() < 1e-12);
        }
        let (eu, ev) = (dirichlet_energy(&mesh, &u), dirichlet_energy(&mesh, &v));
        assert!((eu - ev).abs() < 1e-12 * (1.0 + eu.abs()));
    }

    #[test]
    fn linear_phase_current_matches_gradient() {
        // z = e^{i theta} with theta linear on the flat torus, measured in
        // parallel frames: the current reads the phase increment per edge
        let n = 8usize;
        let mesh = flat_torus(n, n, 1.0).unwrap();
        let base = FrameField::new(&mesh);
        let mut offsets = vec![f64::NAN; mesh.n_vertices()];
        offsets[0] = 0.0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &h in mesh.ring(v) {
                let w = mesh.halfedge_head(h);
                if offsets[w].is_nan() {
                    offsets[w] = offsets[v] + base.transport_along(&mesh, h);
                    queue.push_back(w);
                }
            }
        }
        let frame = Arc::new(FrameField::with_offsets(&mesh, &offsets));
        // theta = 2 pi i_x / n winds once around the x generator
        let theta = |v: usize| 2.0 * PI * (v / n) as f64 / n as f64;
        let values: Vec<Complex64> =
            (0..mesh.n_vertices()).map(|v| Complex64::from_polar(1.0, theta(v))).collect();
        let u = TangentVectorField::new(frame, values).unwrap();
        let j = j_form(&mesh, &u);
        for e in 0..mesh.n_edges() {
            let [a, b] = mesh.edge_vertices(e);
            let expected = wrap_angle(theta(b) - theta(a));
            assert!(
                (j.0[e] - expected).abs() < 1e-12,
                "edge {e}: {} vs {expected}",
                j.0[e]
            );
        }
    }

    #[test]
    fn csv_roundtrip() {
        let mesh = icosphere(0).unwrap();
        let frame = Arc::new(FrameField::new(&mesh));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let values: Vec<Complex64> = (0..mesh.n_vertices())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let u = TangentVectorField::new(frame.clone(), values).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let back = TangentVectorField::read_csv(frame, buf.as_slice()).unwrap();
        for v in 0..mesh.n_vertices() {
            assert!((u.values[v] - back.values[v]).norm() < 1e-15);
        }
    }

    #[test]
    fn unit_frame_field_dirichlet_energy_on_icosphere() {
        // z = 1 in the default frame: the energy is the frame's own bending,
        // Sum_e w_e |1 - e^{-iA_e}|^2 / 2; value pinned as a regression
        let mesh = icosphere(3).unwrap();
        let frame = Arc::new(FrameField::new(&mesh));
        let u = TangentVectorField::constant(frame.clone(), Complex64::new(1.0, 0.0));
        let direct: f64 = {
            let w = cotan_weights(&mesh);
            (0..mesh.n_edges())
                .map(|e| {
                    let t = Complex64::from_polar(1.0, -frame.connection[e]);
                    0.5 * w[e] * (t - Complex64::new(1.0, 0.0)).norm_sqr()
                })
                .sum()
        };
        let energy = dirichlet_energy(&mesh, &u);
        assert!((energy - direct).abs() < 1e-12 * direct);
        assert!(energy > 0.0);
    }
}
