//! Discrete exterior calculus on a triangulated surface: cochains, the
//! exterior derivative, diagonal Hodge stars, the codifferential on
//! 1-forms, and Poisson solvers.
//!
//! 1-cochains are indexed by canonical edge orientations; a value flips
//! sign when the edge is traversed the other way. The codifferential is
//! defined by discrete adjointness, `<d* a, z>_0 = <a, d z>_1`, which fixes
//! its matrix to `hodge0^-1 . d0^T . hodge1`.
//!
//! Mesh quality enters only through the cotan weights in `hodge1`. The
//! weights may vanish (grid diagonals on a flat torus) or go negative
//! (obtuse pairs), so nothing here ever inverts `hodge1`; Laplace problems
//! reduce to the vertex operator `d0^T hodge1 d0`.

use crate::sparse::PinnedSolver;
use crate::surface::SurfaceMesh;
use crate::{Error, Result};

/// Values at vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain0(pub Vec<f64>);

/// Values on canonically oriented edges.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain1(pub Vec<f64>);

/// Integrals over faces.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain2(pub Vec<f64>);

impl Cochain0 {
    pub fn zeros(mesh: &SurfaceMesh) -> Self {
        Cochain0(vec![0.0; mesh.n_vertices()])
    }
}
impl Cochain1 {
    pub fn zeros(mesh: &SurfaceMesh) -> Self {
        Cochain1(vec![0.0; mesh.n_edges()])
    }
}
impl Cochain2 {
    pub fn zeros(mesh: &SurfaceMesh) -> Self {
        Cochain2(vec![0.0; mesh.n_faces()])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CochainSpace {
    Vertices,
    Edges,
    Faces,
}

/// Sparse matrix between cochain spaces, rows in CSR order.
#[derive(Clone, Debug)]
pub struct LinearOperator {
    pub domain: CochainSpace,
    pub codomain: CochainSpace,
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl LinearOperator {
    fn from_triplets(
        domain: CochainSpace,
        codomain: CochainSpace,
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> LinearOperator {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&i| (triplets[i].0, triplets[i].1));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for &i in &order {
            let (r, c, v) = triplets[i];
            debug_assert!(r < rows && c < cols);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        LinearOperator { domain, codomain, rows, cols, row_ptr, col_idx, values }
    }

    fn diagonal(space: CochainSpace, diag: &[f64]) -> LinearOperator {
        let triplets: Vec<(usize, usize, f64)> =
            diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        LinearOperator::from_triplets(space, space, diag.len(), diag.len(), &triplets)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Diagonal entries, for diagonal operators like the Hodge stars.
    pub fn diagonal_values(&self) -> Vec<f64> {
        let n = self.rows.min(self.cols);
        let mut d = vec![0.0; n];
        for r in 0..self.rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.col_idx[k] == r {
                    d[r] = self.values[k];
                }
            }
        }
        d
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "operator applied to wrong cochain space");
        let mut y = vec![0.0; self.rows];
        for r in 0..self.rows {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
        y
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &LinearOperator) -> LinearOperator {
        assert_eq!(self.cols, other.rows, "operator shapes do not compose");
        assert_eq!(self.domain, other.codomain, "cochain spaces do not compose");
        let mut triplets = Vec::new();
        let mut acc: Vec<f64> = vec![0.0; other.cols];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let m = self.col_idx[k];
                let v = self.values[k];
                for j in other.row_ptr[m]..other.row_ptr[m + 1] {
                    let c = other.col_idx[j];
                    if acc[c] == 0.0 && !touched.contains(&c) {
                        touched.push(c);
                    }
                    acc[c] += v * other.values[j];
                }
            }
            for &c in &touched {
                triplets.push((r, c, acc[c]));
                acc[c] = 0.0;
            }
            touched.clear();
        }
        LinearOperator::from_triplets(other.domain, self.codomain, self.rows, other.cols, &triplets)
    }

    pub fn transpose(&self) -> LinearOperator {
        let mut triplets = Vec::with_capacity(self.values.len());
        for r in 0..self.rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                triplets.push((self.col_idx[k], r, self.values[k]));
            }
        }
        LinearOperator::from_triplets(self.codomain, self.domain, self.cols, self.rows, &triplets)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Exterior derivative on 0-forms: rows are edges, `(d0 f)_e = f_head - f_tail`
/// along the canonical orientation.
pub fn d0(mesh: &SurfaceMesh) -> LinearOperator {
    let mut triplets = Vec::with_capacity(2 * mesh.n_edges());
    for e in 0..mesh.n_edges() {
        let [u, v] = mesh.edge_vertices(e);
        triplets.push((e, u, -1.0));
        triplets.push((e, v, 1.0));
    }
    LinearOperator::from_triplets(
        CochainSpace::Vertices,
        CochainSpace::Edges,
        mesh.n_edges(),
        mesh.n_vertices(),
        &triplets,
    )
}

/// Exterior derivative on 1-forms: rows are faces, the signed sum of edge
/// values around the face boundary.
pub fn d1(mesh: &SurfaceMesh) -> LinearOperator {
    let mut triplets = Vec::with_capacity(3 * mesh.n_faces());
    for f in 0..mesh.n_faces() {
        for c in 0..3 {
            let h = 3 * f + c;
            triplets.push((f, mesh.halfedge_edge(h), mesh.halfedge_sign(h)));
        }
    }
    LinearOperator::from_triplets(
        CochainSpace::Edges,
        CochainSpace::Faces,
        mesh.n_faces(),
        mesh.n_edges(),
        &triplets,
    )
}

/// Barycentric dual areas per vertex.
pub fn hodge0(mesh: &SurfaceMesh) -> LinearOperator {
    LinearOperator::diagonal(CochainSpace::Vertices, mesh.dual_areas())
}

/// Cotan weights per edge. Weights can legitimately vanish or go negative
/// on poor or borderline triangle pairs; that is reported, not rejected.
pub fn hodge1(mesh: &SurfaceMesh) -> LinearOperator {
    let w = cotan_weights(mesh);
    let bad: Vec<usize> = (0..w.len()).filter(|&e| w[e] <= 0.0).collect();
    if !bad.is_empty() {
        let shown: Vec<String> = bad.iter().take(8).map(|e| e.to_string()).collect();
        log::warn!(
            "{} of {} edges have nonpositive cotan weight (edges {}{})",
            bad.len(),
            w.len(),
            shown.join(", "),
            if bad.len() > 8 { ", ..." } else { "" }
        );
    }
    LinearOperator::diagonal(CochainSpace::Edges, &w)
}

/// Inverse face areas.
pub fn hodge2(mesh: &SurfaceMesh) -> LinearOperator {
    let inv: Vec<f64> = (0..mesh.n_faces()).map(|f| 1.0 / mesh.face_area(f)).collect();
    LinearOperator::diagonal(CochainSpace::Faces, &inv)
}

/// Cotan weight of each edge: half the sum of the cotangents of the two
/// opposite corner angles.
pub fn cotan_weights(mesh: &SurfaceMesh) -> Vec<f64> {
    (0..mesh.n_edges())
        .map(|e| {
            let [ha, hb] = mesh.edge_halfedges(e);
            let cot = |h: usize| {
                let a = mesh.corner_angle(mesh.halfedge_prev(h));
                a.cos() / a.sin()
            };
            0.5 * (cot(ha) + cot(hb))
        })
        .collect()
}

/// Codifferential on 1-forms, defined by the adjointness identity
/// `<d* a, z>_0 = <a, d0 z>_1`: the matrix `hodge0^-1 . d0^T . hodge1`.
pub fn codifferential1(mesh: &SurfaceMesh) -> LinearOperator {
    let w = cotan_weights(mesh);
    let mut triplets = Vec::with_capacity(2 * mesh.n_edges());
    for e in 0..mesh.n_edges() {
        let [u, v] = mesh.edge_vertices(e);
        triplets.push((u, e, -w[e] / mesh.dual_area(u)));
        triplets.push((v, e, w[e] / mesh.dual_area(v)));
    }
    LinearOperator::from_triplets(
        CochainSpace::Edges,
        CochainSpace::Vertices,
        mesh.n_vertices(),
        mesh.n_edges(),
        &triplets,
    )
}

/// L2 pairing of 0-forms against dual areas.
pub fn inner0(mesh: &SurfaceMesh, a: &Cochain0, b: &Cochain0) -> f64 {
    (0..mesh.n_vertices()).map(|v| mesh.dual_area(v) * a.0[v] * b.0[v]).sum()
}

/// L2 pairing of 1-forms with cotan weights.
pub fn inner1(weights: &[f64], a: &Cochain1, b: &Cochain1) -> f64 {
    (0..weights.len()).map(|e| weights[e] * a.0[e] * b.0[e]).sum()
}

/// L2 pairing of 2-forms against inverse face areas.
pub fn inner2(mesh: &SurfaceMesh, a: &Cochain2, b: &Cochain2) -> f64 {
    (0..mesh.n_faces()).map(|f| a.0[f] * b.0[f] / mesh.face_area(f)).sum()
}

/// The vertex Laplace operator `d0^T hodge1 d0` with a factorization, for
/// the balanced Poisson problems everything downstream reduces to.
/// Solutions are normalized to zero area-weighted mean and verified against
/// a residual contract.
pub struct VertexPoisson {
    solver: PinnedSolver,
    n: usize,
}

impl VertexPoisson {
    pub fn new(mesh: &SurfaceMesh) -> Result<VertexPoisson> {
        let w = cotan_weights(mesh);
        let mut triplets = Vec::with_capacity(4 * mesh.n_edges());
        for e in 0..mesh.n_edges() {
            let [u, v] = mesh.edge_vertices(e);
            triplets.push((u, u, w[e]));
            triplets.push((v, v, w[e]));
            triplets.push((u, v, -w[e]));
            triplets.push((v, u, -w[e]));
        }
        let solver = PinnedSolver::new(mesh.n_vertices(), &triplets, mesh.dual_areas().to_vec())?;
        Ok(VertexPoisson { solver, n: mesh.n_vertices() })
    }

    /// Solve `L x = rhs` for the zero-mean solution. The rhs must balance:
    /// its entries must sum to zero relative to their magnitude.
    pub fn solve(&self, rhs: &Cochain0) -> Result<Cochain0> {
        if rhs.0.len() != self.n {
            return Err(Error::Precondition("rhs length does not match vertex count".into()));
        }
        Ok(Cochain0(self.solver.solve_mean_zero(&rhs.0, 1e-9)?))
    }
}

/// Solve the 2-form Poisson problem `d d* psi = rhs` for a zero-mean
/// 2-form. Face integrals convert to vertex loads by barycentric thirds,
/// the vertex problem is solved, and the solution returns as face
/// integrals of the vertex function; its total vanishes exactly because
/// the vertex solution has zero area-weighted mean.
pub fn solve_poisson2(mesh: &SurfaceMesh, rhs: &Cochain2) -> Result<Cochain2> {
    if rhs.0.len() != mesh.n_faces() {
        return Err(Error::Precondition("rhs length does not match face count".into()));
    }
    let total: f64 = rhs.0.iter().sum();
    let scale: f64 = rhs.0.iter().map(|v| v.abs()).sum();
    if total.abs() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Precondition(format!(
            "2-form Poisson rhs must have zero total integral, got {total:.3e}"
        )));
    }
    let mut loads = vec![0.0; mesh.n_vertices()];
    for (f, &v) in rhs.0.iter().enumerate() {
        for &corner in &mesh.face(f) {
            loads[corner] += v / 3.0;
        }
    }
    let poisson = VertexPoisson::new(mesh)?;
    let x = poisson.solve(&Cochain0(loads))?;
    let psi = (0..mesh.n_faces())
        .map(|f| {
            let fa = mesh.face(f);
            mesh.face_area(f) * (x.0[fa[0]] + x.0[fa[1]] + x.0[fa[2]]) / 3.0
        })
        .collect();
    Ok(Cochain2(psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{flat_torus, icosphere, torus_of_revolution};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn d_after_d_is_zero() {
        for mesh in [
            icosphere(2).unwrap(),
            flat_torus(5, 7, 1.0).unwrap(),
            torus_of_revolution(12, 8, 2.0, 0.7).unwrap(),
        ] {
            let dd = d1(&mesh).compose(&d0(&mesh));
            assert_eq!(dd.max_abs_entry(), 0.0);
        }
    }

    #[test]
    fn d0_kills_constants() {
        let mesh = icosphere(1).unwrap();
        let c = Cochain0(vec![2.5; mesh.n_vertices()]);
        let dc = d0(&mesh).apply(&c.0);
        assert!(dc.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hodge0_sums_to_area() {
        let mesh = torus_of_revolution(16, 10, 2.0, 0.7).unwrap();
        let total: f64 = hodge0(&mesh).diagonal_values().iter().sum();
        assert!((total - mesh.total_area()).abs() < 1e-12 * mesh.total_area());
    }

    #[test]
    fn flat_torus_cotan_weights() {
        // right isoceles triangles: legs get (cot 45 + cot 45)/2 = 1,
        // diagonals get (cot 90 + cot 90)/2 = 0
        let mesh = flat_torus(4, 4, 1.0).unwrap();
        let w = cotan_weights(&mesh);
        for e in 0..mesh.n_edges() {
            let expected = if mesh.edge_length(e) > 1.1 { 0.0 } else { 1.0 };
            assert!((w[e] - expected).abs() < 1e-12, "edge {e}: {}", w[e]);
        }
    }

    #[test]
    fn equilateral_pair_cotan_weight() {
        let mesh = crate::surface::SurfaceMesh::build(crate::surface::MeshData::Intrinsic {
            n_vertices: 3,
            faces: vec![[0, 1, 2], [0, 2, 1]],
            halfedge_lengths: vec![[1.0, 1.0, 1.0], [1.0, 1.0, 1.0]],
        })
        .unwrap();
        let w = cotan_weights(&mesh);
        for e in 0..3 {
            assert!((w[e] - 1.0 / 3.0f64.sqrt()).abs() < 1e-14, "edge {e}: {}", w[e]);
        }
    }

    #[test]
    fn codifferential_is_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for mesh in [icosphere(2).unwrap(), flat_torus(6, 5, 0.8).unwrap()] {
            let dstar = codifferential1(&mesh);
            let w = cotan_weights(&mesh);
            let d = d0(&mesh);
            for _ in 0..20 {
                let alpha = Cochain1(random_vec(mesh.n_edges(), &mut rng));
                let zeta = Cochain0(random_vec(mesh.n_vertices(), &mut rng));
                let lhs = inner0(&mesh, &Cochain0(dstar.apply(&alpha.0)), &zeta);
                let rhs = inner1(&w, &alpha, &Cochain1(d.apply(&zeta.0)));
                let scale = lhs.abs().max(rhs.abs()).max(1e-30);
                assert!((lhs - rhs).abs() / scale < 1e-10, "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn codifferential_composes_to_laplacian() {
        let mesh = icosphere(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = random_vec(mesh.n_vertices(), &mut rng);
        let lap_via_dstar = codifferential1(&mesh).apply(&d0(&mesh).apply(&f));
        // direct cotan Laplacian divided by dual areas
        let w = cotan_weights(&mesh);
        let mut lap = vec![0.0; mesh.n_vertices()];
        for e in 0..mesh.n_edges() {
            let [u, v] = mesh.edge_vertices(e);
            lap[u] += w[e] * (f[u] - f[v]);
            lap[v] += w[e] * (f[v] - f[u]);
        }
        for v in 0..mesh.n_vertices() {
            let direct = lap[v] / mesh.dual_area(v);
            assert!((lap_via_dstar[v] - direct).abs() < 1e-10 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn constant_field_on_flat_torus_is_harmonic() {
        let mesh = flat_torus(5, 5, 1.0).unwrap();
        // 1-form measuring x-displacement along each edge
        let alpha: Vec<f64> = (0..mesh.n_edges())
            .map(|e| {
                let [u, v] = mesh.edge_vertices(e);
                let (iu, iv) = ((u / 5) as i64, (v / 5) as i64);
                let mut dx = iv - iu;
                if dx > 2 {
                    dx -= 5;
                }
                if dx < -2 {
                    dx += 5;
                }
                dx as f64
            })
            .collect();
        let closed = d1(&mesh).apply(&alpha);
        assert!(closed.iter().all(|&v| v == 0.0), "not closed");
        let coclosed = codifferential1(&mesh).apply(&alpha);
        assert!(coclosed.iter().all(|&v| v.abs() < 1e-14), "not co-closed");
    }

    #[test]
    fn vertex_poisson_roundtrip() {
        let mesh = icosphere(2).unwrap();
        let poisson = VertexPoisson::new(&mesh).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut x = random_vec(mesh.n_vertices(), &mut rng);
        let mean: f64 = (0..x.len()).map(|v| x[v] * mesh.dual_area(v)).sum::<f64>()
            / mesh.total_area();
        for v in x.iter_mut() {
            *v -= mean;
        }
        let w = cotan_weights(&mesh);
        let mut b = vec![0.0; mesh.n_vertices()];
        for e in 0..mesh.n_edges() {
            let [u, v] = mesh.edge_vertices(e);
            b[u] += w[e] * (x[u] - x[v]);
            b[v] += w[e] * (x[v] - x[u]);
        }
        let sol = poisson.solve(&Cochain0(b)).unwrap();
        let err = x
            .iter()
            .zip(&sol.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-8, "roundtrip error {err}");
    }

    #[test]
    fn poisson2_zero_rhs() {
        let mesh = flat_torus(4, 4, 1.0).unwrap();
        let sol = solve_poisson2(&mesh, &Cochain2::zeros(&mesh)).unwrap();
        assert!(sol.0.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn poisson2_rejects_unbalanced_rhs() {
        let mesh = flat_torus(4, 4, 1.0).unwrap();
        let mut rhs = Cochain2::zeros(&mesh);
        rhs.0[0] = 1.0;
        assert!(solve_poisson2(&mesh, &rhs).is_err());
    }

    #[test]
    fn poisson2_matches_dense_oracle() {
        let mesh = flat_torus(8, 8, 1.0).unwrap();
        let nv = mesh.n_vertices();
        let mut rhs = Cochain2::zeros(&mesh);
        // opposite unit loads spread over the faces around two vertices
        for (v, sign) in [(0usize, 1.0), (27usize, -1.0)] {
            let ring = mesh.ring(v);
            for &h in ring {
                rhs.0[h / 3] += sign / ring.len() as f64;
            }
        }
        let sol = solve_poisson2(&mesh, &rhs).unwrap();

        // dense solve of the same vertex system
        let w = cotan_weights(&mesh);
        let mut dense = nalgebra::DMatrix::<f64>::zeros(nv + 1, nv + 1);
        for e in 0..mesh.n_edges() {
            let [u, v] = mesh.edge_vertices(e);
            dense[(u, u)] += w[e];
            dense[(v, v)] += w[e];
            dense[(u, v)] -= w[e];
            dense[(v, u)] -= w[e];
        }
        // Lagrange multiplier for the area-weighted mean
        for v in 0..nv {
            dense[(nv, v)] = mesh.dual_area(v);
            dense[(v, nv)] = mesh.dual_area(v);
        }
        let mut loads = nalgebra::DVector::<f64>::zeros(nv + 1);
        for (f, &val) in rhs.0.iter().enumerate() {
            for &c in &mesh.face(f) {
                loads[c] += val / 3.0;
            }
        }
        let x = dense.lu().solve(&loads).unwrap();
        let oracle: Vec<f64> = (0..mesh.n_faces())
            .map(|f| {
                let fa = mesh.face(f);
                mesh.face_area(f) * (x[fa[0]] + x[fa[1]] + x[fa[2]]) / 3.0
            })
            .collect();
        let scale = oracle.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
        for f in 0..mesh.n_faces() {
            assert!(
                (sol.0[f] - oracle[f]).abs() < 1e-9 * scale,
                "face {f}: {} vs {}",
                sol.0[f],
                oracle[f]
            );
        }
        let total: f64 = sol.0.iter().sum();
        assert!(total.abs() < 1e-12 * scale);
    }
}
