//! Canonical currents and unit tangent fields from vortex data: the
//! co-exact current of a degree configuration, its holonomy offsets around
//! the homology generators, the lattice of admissible harmonic fluxes,
//! phase reconstruction, degree and vorticity bookkeeping, and a dual-norm
//! distance between vorticity measures.

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use num_complex::Complex64;

use crate::connection::{j_form, wrap_angle, FrameField, TangentVectorField};
use crate::exterior::{cotan_weights, Cochain0, Cochain1, Cochain2, VertexPoisson};
use crate::surface::{SurfaceMesh, SurfacePoint};
use crate::topology::{route_dual_tree, tree_cotree, CycleBasis, HarmonicBasis, TreeCotree};
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Vortex positions and degrees together with a harmonic flux vector.
#[derive(Clone)]
pub struct VortexConfiguration {
    pub vortices: Vec<(SurfacePoint, i64)>,
    /// Flux coordinates in the harmonic basis, length 2 * genus.
    pub flux: Vec<f64>,
}

impl VortexConfiguration {
    pub fn new(
        mesh: &SurfaceMesh,
        vortices: Vec<(SurfacePoint, i64)>,
        flux: Vec<f64>,
    ) -> Result<Self> {
        check_degree_sum(mesh, &vortices)?;
        for (p, _) in &vortices {
            if p.face >= mesh.n_faces() {
                return Err(Error::Precondition(format!(
                    "vortex face {} out of range",
                    p.face
                )));
            }
        }
        if flux.len() != 2 * mesh.genus() {
            return Err(Error::Precondition(format!(
                "flux vector has {} entries on a genus {} surface",
                flux.len(),
                mesh.genus()
            )));
        }
        Ok(VortexConfiguration { vortices, flux })
    }

    pub fn points(&self) -> Vec<SurfacePoint> {
        self.vortices.iter().map(|(p, _)| p.clone()).collect()
    }

    pub fn degrees(&self) -> Vec<i64> {
        self.vortices.iter().map(|&(_, d)| d).collect()
    }
}

fn check_degree_sum(mesh: &SurfaceMesh, vortices: &[(SurfacePoint, i64)]) -> Result<()> {
    let total: i64 = vortices.iter().map(|&(_, d)| d).sum();
    let chi = mesh.euler_characteristic();
    if total != chi {
        return Err(Error::Precondition(format!(
            "Poincaré–Hopf violation: degrees sum to {total} but the Euler characteristic is {chi}"
        )));
    }
    Ok(())
}

/// Face source of the canonical current: point masses 2 pi d_k on the
/// vortex faces minus the curvature 2-form. Total zero for admissible
/// degrees.
fn vorticity_source(mesh: &SurfaceMesh, vortices: &[(SurfacePoint, i64)]) -> Cochain2 {
    let k = mesh.gaussian_curvature();
    let mut b: Vec<f64> = (0..mesh.n_faces()).map(|f| -k.0[f]).collect();
    for (p, d) in vortices {
        b[p.face] += TWO_PI * *d as f64;
    }
    Cochain2(b)
}

/// Shared factorization for repeated current solves.
pub struct CurrentSolver<'m> {
    mesh: &'m SurfaceMesh,
    tc: TreeCotree,
    poisson: VertexPoisson,
    weights: Vec<f64>,
}

impl<'m> CurrentSolver<'m> {
    pub fn new(mesh: &'m SurfaceMesh) -> Result<Self> {
        Ok(CurrentSolver {
            mesh,
            tc: tree_cotree(mesh),
            poisson: VertexPoisson::new(mesh)?,
            weights: cotan_weights(mesh),
        })
    }

    /// The unique co-exact 1-form whose exterior derivative balances the
    /// vortex masses against curvature: a particular solution is routed
    /// along the dual spanning tree, its exact part is removed by one
    /// scalar solve, and its harmonic part by projection.
    pub fn coexact_current(
        &self,
        basis: &HarmonicBasis,
        vortices: &[(SurfacePoint, i64)],
    ) -> Result<Cochain1> {
        check_degree_sum(self.mesh, vortices)?;
        let mesh = self.mesh;
        let b2 = vorticity_source(mesh, vortices);
        let mut xi = route_dual_tree(mesh, &self.tc, &b2.0);

        let mut rhs = vec![0.0; mesh.n_vertices()];
        for e in 0..mesh.n_edges() {
            let [u, v] = mesh.edge_vertices(e);
            let w = self.weights[e] * xi[e];
            rhs[u] -= w;
            rhs[v] += w;
        }
        let phi = self.poisson.solve(&Cochain0(rhs))?;
        for e in 0..mesh.n_edges() {
            let [u, v] = mesh.edge_vertices(e);
            xi[e] -= phi.0[v] - phi.0[u];
        }

        let harmonic = basis.project(&self.weights, &Cochain1(xi.clone()));
        for e in 0..mesh.n_edges() {
            xi[e] -= harmonic.0[e];
        }
        Ok(Cochain1(xi))
    }
}

/// Oriented sum of a 1-form plus the connection along a halfedge loop.
fn loop_integral(
    mesh: &SurfaceMesh,
    frame: &FrameField,
    form: &[f64],
    lp: &[usize],
) -> f64 {
    lp.iter()
        .map(|&h| {
            mesh.halfedge_sign(h) * form[mesh.halfedge_edge(h)] + frame.transport_along(mesh, h)
        })
        .sum()
}

/// Detour a loop around the given faces: every halfedge bordering one of
/// them is replaced by the two-edge path through a clean adjacent face.
/// Each detour shifts the loop across whole faces, so any integral of a
/// current plus connection changes by an exact multiple of 2 pi.
fn reroute_loop(mesh: &SurfaceMesh, lp: &[usize], bad: &HashSet<usize>) -> Result<Vec<usize>> {
    let mut cur = lp.to_vec();
    for _pass in 0..64 {
        let mut next = Vec::with_capacity(cur.len());
        let mut dirty = false;
        for &h in &cur {
            let t = mesh.halfedge_twin(h);
            let own_bad = bad.contains(&mesh.halfedge_face(h));
            let twin_bad = bad.contains(&mesh.halfedge_face(t));
            if !own_bad && !twin_bad {
                next.push(h);
                continue;
            }
            dirty = true;
            if !twin_bad {
                // walk through the twin's face
                next.push(mesh.halfedge_next(t));
                next.push(mesh.halfedge_next(mesh.halfedge_next(t)));
            } else {
                // walk through this halfedge's own face (or keep moving if
                // both sides are blocked; later passes continue the walk)
                next.push(mesh.halfedge_twin(mesh.halfedge_prev(h)));
                next.push(mesh.halfedge_twin(mesh.halfedge_next(h)));
            }
        }
        cur = next;
        if !dirty {
            return Ok(cur);
        }
    }
    Err(Error::Numerical(
        "no vortex-free homologous loop found; the mesh is too coarse for this configuration"
            .into(),
    ))
}

fn zeta_of_current(
    mesh: &SurfaceMesh,
    frame: &FrameField,
    cycles: &CycleBasis,
    xi: &Cochain1,
    vortices: &[(SurfacePoint, i64)],
) -> Result<Vec<f64>> {
    let bad: HashSet<usize> = vortices.iter().map(|(p, _)| p.face).collect();
    cycles
        .loops
        .iter()
        .map(|lp| {
            let routed = reroute_loop(mesh, lp, &bad)?;
            Ok(wrap_angle(loop_integral(mesh, frame, &xi.0, &routed)))
        })
        .collect()
}

/// Holonomy offsets of a degree configuration around the homology
/// generators, each taken modulo 2 pi: the loop integrals of the co-exact
/// current plus the connection, with generators detoured around vortex
/// faces. Changing the detour moves the value by exact multiples of 2 pi.
pub fn zeta(
    mesh: &SurfaceMesh,
    frame: &FrameField,
    cycles: &CycleBasis,
    basis: &HarmonicBasis,
    vortices: &[(SurfacePoint, i64)],
) -> Result<Vec<f64>> {
    let solver = CurrentSolver::new(mesh)?;
    let xi = solver.coexact_current(basis, vortices)?;
    zeta_of_current(mesh, frame, cycles, &xi, vortices)
}

/// The lattice of admissible harmonic flux vectors: those whose periods
/// close the holonomy offsets to multiples of 2 pi.
pub struct FluxLattice {
    /// Holonomy offsets, length 2 * genus.
    pub zeta: Vec<f64>,
    /// Period matrix of the harmonic basis over the generators.
    pub periods: Vec<Vec<f64>>,
    /// Membership tolerance on the closing defect.
    pub tolerance: f64,
}

impl FluxLattice {
    pub fn dimension(&self) -> usize {
        self.zeta.len()
    }

    /// Largest deviation of the closing condition from 2 pi multiples;
    /// invariant under shifting any offset by 2 pi.
    pub fn membership_defect(&self, flux: &[f64]) -> f64 {
        let n = self.zeta.len();
        let mut worst = 0.0f64;
        for l in 0..n {
            let s: f64 =
                (0..n).map(|k| self.periods[l][k] * flux[k]).sum::<f64>() + self.zeta[l];
            worst = worst.max(wrap_angle(s).abs());
        }
        worst
    }

    pub fn contains(&self, flux: &[f64]) -> bool {
        self.membership_defect(flux) <= self.tolerance
    }

    /// Nearest lattice member to a raw flux vector and the distance to it.
    /// The branch index starts at the rounded closing condition and a
    /// {-1, 0, 1} neighborhood is searched in every coordinate.
    pub fn project(&self, flux_raw: &[f64]) -> Result<(Vec<f64>, f64)> {
        let n = self.zeta.len();
        if n == 0 {
            return Ok((Vec::new(), 0.0));
        }
        let alpha = nalgebra::DMatrix::from_fn(n, n, |l, k| self.periods[l][k]);
        let lu = alpha.clone().lu();
        let raw = nalgebra::DVector::from_column_slice(flux_raw);
        let closing = &alpha * &raw + nalgebra::DVector::from_column_slice(&self.zeta);
        let m0: Vec<f64> = (0..n).map(|l| (closing[l] / TWO_PI).round()).collect();

        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut offsets = vec![-1i64; n];
        loop {
            let m = nalgebra::DVector::from_fn(n, |l, _| {
                TWO_PI * (m0[l] + offsets[l] as f64) - self.zeta[l]
            });
            let candidate = lu
                .solve(&m)
                .ok_or_else(|| Error::Numerical("period matrix is singular".into()))?;
            let dist = (&candidate - &raw).norm();
            if best.as_ref().map(|(_, d)| dist < *d).unwrap_or(true) {
                best = Some((candidate.iter().cloned().collect(), dist));
            }
            // advance the mixed-radix counter over {-1, 0, 1}^n
            let mut i = 0;
            loop {
                if i == n {
                    let (flux, dist) = best.unwrap();
                    debug_assert!(self.membership_defect(&flux) <= 1e-9);
                    return Ok((flux, dist));
                }
                offsets[i] += 1;
                if offsets[i] <= 1 {
                    break;
                }
                offsets[i] = -1;
                i += 1;
            }
        }
    }
}

/// Assemble the flux lattice of a configuration.
pub fn flux_lattice(
    mesh: &SurfaceMesh,
    frame: &FrameField,
    cycles: &CycleBasis,
    basis: &HarmonicBasis,
    vortices: &[(SurfacePoint, i64)],
    tolerance: f64,
) -> Result<FluxLattice> {
    Ok(FluxLattice {
        zeta: zeta(mesh, frame, cycles, basis, vortices)?,
        periods: basis.periods.clone(),
        tolerance,
    })
}

/// Default membership tolerance for analytically constructed flux vectors.
pub const FLUX_TOLERANCE_EXACT: f64 = 1e-6 * TWO_PI;
/// Looser tolerance for flux vectors measured from minimizers, which are
/// then projected onto the lattice.
pub const FLUX_TOLERANCE_MEASURED: f64 = 0.1 * TWO_PI;

/// The canonical current of a configuration: co-exact part from the vortex
/// data plus the harmonic part selected by the flux vector. The flux must
/// lie on the lattice, or the resulting phase would not close up.
pub fn canonical_jstar(
    mesh: &SurfaceMesh,
    frame: &FrameField,
    cycles: &CycleBasis,
    basis: &HarmonicBasis,
    config: &VortexConfiguration,
) -> Result<Cochain1> {
    let solver = CurrentSolver::new(mesh)?;
    let xi = solver.coexact_current(basis, &config.vortices)?;
    let zeta = zeta_of_current(mesh, frame, cycles, &xi, &config.vortices)?;
    let lat = FluxLattice {
        zeta,
        periods: basis.periods.clone(),
        tolerance: FLUX_TOLERANCE_EXACT,
    };
    let defect = lat.membership_defect(&config.flux);
    if defect > lat.tolerance {
        return Err(Error::Precondition(format!(
            "flux vector is off the admissible lattice by {defect:.3e}"
        )));
    }
    let mut j = xi.0;
    for (k, eta) in basis.forms.iter().enumerate() {
        for e in 0..j.len() {
            j[e] += config.flux[k] * eta.0[e];
        }
    }
    Ok(Cochain1(j))
}

/// Integrate phase increments of `jstar` plus the connection over a
/// spanning tree from `root` and exponentiate. The periods around all
/// homology generators must be multiples of 2 pi first; face and vertex
/// loops close automatically for currents built from admissible data.
pub fn reconstruct_field_rooted(
    mesh: &SurfaceMesh,
    frame: &Arc<FrameField>,
    cycles: &CycleBasis,
    jstar: &Cochain1,
    root: usize,
) -> Result<TangentVectorField> {
    for (l, lp) in cycles.loops.iter().enumerate() {
        let defect = wrap_angle(loop_integral(mesh, frame, &jstar.0, lp));
        if defect.abs() > 1e-3 {
            return Err(Error::Precondition(format!(
                "phase increments do not close: cycle {l} has period defect {defect:.3e}"
            )));
        }
    }
    let nv = mesh.n_vertices();
    let mut theta = vec![f64::NAN; nv];
    theta[root] = 0.0;
    let mut queue = VecDeque::new();
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        for &h in mesh.ring(v) {
            let w = mesh.halfedge_head(h);
            if theta[w].is_nan() {
                theta[w] = theta[v]
                    + mesh.halfedge_sign(h) * jstar.0[mesh.halfedge_edge(h)]
                    + frame.transport_along(mesh, h);
                queue.push_back(w);
            }
        }
    }
    let values: Vec<Complex64> =
        theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
    TangentVectorField::new(frame.clone(), values)
}

/// Reconstruction rooted at vertex 0; any other root gives the same field
/// up to one global phase.
pub fn reconstruct_field(
    mesh: &SurfaceMesh,
    frame: &Arc<FrameField>,
    cycles: &CycleBasis,
    jstar: &Cochain1,
) -> Result<TangentVectorField> {
    reconstruct_field_rooted(mesh, frame, cycles, jstar, 0)
}

/// Faces on the left of a simple closed halfedge loop, by flood fill that
/// never crosses a loop edge. Errors if the loop repeats an edge or does
/// not separate the surface.
fn enclosed_faces(mesh: &SurfaceMesh, lp: &[usize]) -> Result<Vec<bool>> {
    let mut blocked = vec![false; mesh.n_edges()];
    for &h in lp {
        let e = mesh.halfedge_edge(h);
        if blocked[e] {
            return Err(Error::Precondition("loop repeats an edge".into()));
        }
        blocked[e] = true;
    }
    let mut inside = vec![false; mesh.n_faces()];
    let mut queue = VecDeque::new();
    for &h in lp {
        let f = mesh.halfedge_face(h);
        if !inside[f] {
            inside[f] = true;
            queue.push_back(f);
        }
    }
    while let Some(f) = queue.pop_front() {
        for c in 0..3 {
            let h = 3 * f + c;
            let e = mesh.halfedge_edge(h);
            if blocked[e] {
                continue;
            }
            let g = mesh.halfedge_face(mesh.halfedge_twin(h));
            if !inside[g] {
                inside[g] = true;
                queue.push_back(g);
            }
        }
    }
    for &h in lp {
        if inside[mesh.halfedge_face(mesh.halfedge_twin(h))] {
            return Err(Error::Precondition(
                "loop does not bound: both sides connect around it".into(),
            ));
        }
    }
    Ok(inside)
}

/// Degree of a field around a simple closed loop: current integral along
/// the loop plus the curvature of the enclosed side, in units of 2 pi.
/// The value must round to an integer within 0.05.
pub fn degree(mesh: &SurfaceMesh, u: &TangentVectorField, lp: &[usize]) -> Result<i64> {
    for &h in lp {
        for v in [mesh.halfedge_tail(h), mesh.halfedge_head(h)] {
            if u.values[v].norm() < 0.5 {
                return Err(Error::Precondition(format!(
                    "coefficient modulus {:.3} at vertex {v} is below 1/2 on the loop",
                    u.values[v].norm()
                )));
            }
        }
    }
    let inside = enclosed_faces(mesh, lp)?;
    let j = j_form(mesh, u);
    let k = mesh.gaussian_curvature();
    let circulation: f64 = lp
        .iter()
        .map(|&h| mesh.halfedge_sign(h) * j.0[mesh.halfedge_edge(h)])
        .sum();
    let curvature: f64 =
        (0..mesh.n_faces()).filter(|&f| inside[f]).map(|f| k.0[f]).sum();
    let raw = (circulation + curvature) / TWO_PI;
    let rounded = raw.round();
    if (raw - rounded).abs() > 0.05 {
        return Err(Error::Numerical(format!(
            "degree estimate {raw:.4} is not within 0.05 of an integer"
        )));
    }
    Ok(rounded as i64)
}

/// Vorticity 2-form of a field: the exterior derivative of its current
/// plus curvature. For unit-modulus fields every face value is an exact
/// multiple of 2 pi and the total is 2 pi times the Euler characteristic.
pub fn vorticity(mesh: &SurfaceMesh, u: &TangentVectorField) -> Result<Cochain2> {
    for (v, z) in u.values.iter().enumerate() {
        if z.norm() == 0.0 {
            return Err(Error::Precondition(format!(
                "vanishing coefficient at vertex {v}"
            )));
        }
    }
    let j = j_form(mesh, u);
    let k = mesh.gaussian_curvature();
    let mut omega = vec![0.0; mesh.n_faces()];
    for f in 0..mesh.n_faces() {
        let mut acc = 0.0;
        for c in 0..3 {
            let h = 3 * f + c;
            acc += mesh.halfedge_sign(h) * j.0[mesh.halfedge_edge(h)];
        }
        omega[f] = acc + k.0[f];
    }
    Ok(Cochain2(omega))
}

/// Atomic approximation of a vorticity distribution.
pub struct VorticityMeasure {
    /// Cluster positions with their real masses.
    pub atoms: Vec<(SurfacePoint, f64)>,
    /// Masses in units of 2 pi, rounded to integers.
    pub degrees: Vec<i64>,
    /// Largest deviation of a cluster mass from an integer multiple of
    /// 2 pi, in units of 2 pi.
    pub rounding_residual: f64,
    /// Total absolute mass left outside all clusters.
    pub dropped: f64,
}

impl VorticityMeasure {
    /// Exact atomic measure of a vortex list, with masses 2 pi d_k.
    pub fn from_vortices(vortices: &[(SurfacePoint, i64)]) -> VorticityMeasure {
        VorticityMeasure {
            atoms: vortices
                .iter()
                .map(|(p, d)| (p.clone(), TWO_PI * *d as f64))
                .collect(),
            degrees: vortices.iter().map(|&(_, d)| d).collect(),
            rounding_residual: 0.0,
            dropped: 0.0,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|&(_, m)| m).sum()
    }
}

/// Cluster faces with |vorticity| above `threshold` into connected
/// components and collapse each onto its strongest face. Cluster masses
/// must be near integer multiples of 2 pi (residual at most 0.2).
pub fn localize(mesh: &SurfaceMesh, omega: &Cochain2, threshold: f64) -> Result<VorticityMeasure> {
    let nf = mesh.n_faces();
    let mut cluster = vec![usize::MAX; nf];
    let mut n_clusters = 0;
    for f0 in 0..nf {
        if cluster[f0] != usize::MAX || omega.0[f0].abs() <= threshold {
            continue;
        }
        let id = n_clusters;
        n_clusters += 1;
        cluster[f0] = id;
        let mut queue = VecDeque::from([f0]);
        while let Some(f) = queue.pop_front() {
            for c in 0..3 {
                let g = mesh.halfedge_face(mesh.halfedge_twin(3 * f + c));
                if cluster[g] == usize::MAX && omega.0[g].abs() > threshold {
                    cluster[g] = id;
                    queue.push_back(g);
                }
            }
        }
    }
    let mut mass = vec![0.0f64; n_clusters];
    let mut peak = vec![(0usize, 0.0f64); n_clusters];
    let mut dropped = 0.0;
    for f in 0..nf {
        if cluster[f] == usize::MAX {
            dropped += omega.0[f].abs();
            continue;
        }
        let id = cluster[f];
        mass[id] += omega.0[f];
        if omega.0[f].abs() > peak[id].1 {
            peak[id] = (f, omega.0[f].abs());
        }
    }
    let mut atoms = Vec::with_capacity(n_clusters);
    let mut degrees = Vec::with_capacity(n_clusters);
    let mut residual = 0.0f64;
    for id in 0..n_clusters {
        let d = (mass[id] / TWO_PI).round();
        residual = residual.max((mass[id] / TWO_PI - d).abs());
        atoms.push((SurfacePoint::face_center(peak[id].0), mass[id]));
        degrees.push(d as i64);
    }
    if residual > 0.2 {
        return Err(Error::Numerical(format!(
            "cluster mass is {residual:.3} away from an integer multiple of 2 pi"
        )));
    }
    Ok(VorticityMeasure { atoms, degrees, rounding_residual: residual, dropped })
}

/// Maximum total profit of a fractional transport between supplies and
/// demands, by successive longest augmenting paths. Profits are
/// nonnegative, so the initial residual graph has no positive cycles and
/// the invariant is maintained.
fn max_profit_transport(supply: &[f64], demand: &[f64], profit: &[Vec<f64>]) -> f64 {
    struct Arc {
        to: usize,
        cap: f64,
        profit: f64,
        rev: usize,
    }
    let np = supply.len();
    let nn = demand.len();
    let n_nodes = np + nn + 2;
    let (src, sink) = (np + nn, np + nn + 1);
    let mut adj: Vec<Vec<Arc>> = (0..n_nodes).map(|_| Vec::new()).collect();
    let add = |adj: &mut Vec<Vec<Arc>>, a: usize, b: usize, cap: f64, profit: f64| {
        let ra = adj[b].len();
        let rb = adj[a].len();
        adj[a].push(Arc { to: b, cap, profit, rev: ra });
        adj[b].push(Arc { to: a, cap: 0.0, profit: -profit, rev: rb });
    };
    for (i, &s) in supply.iter().enumerate() {
        add(&mut adj, src, i, s, 0.0);
    }
    for (j, &d) in demand.iter().enumerate() {
        add(&mut adj, np + j, sink, d, 0.0);
    }
    for i in 0..np {
        for j in 0..nn {
            if profit[i][j] > 0.0 {
                add(&mut adj, i, np + j, f64::INFINITY, profit[i][j]);
            }
        }
    }

    let mut total = 0.0;
    let max_rounds = 10 * (np * nn + np + nn) + 20;
    for _round in 0..max_rounds {
        // Bellman-Ford for the most profitable augmenting path
        let mut dist = vec![f64::NEG_INFINITY; n_nodes];
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n_nodes];
        dist[src] = 0.0;
        for _ in 0..n_nodes {
            let mut improved = false;
            for a in 0..n_nodes {
                if dist[a] == f64::NEG_INFINITY {
                    continue;
                }
                for (idx, arc) in adj[a].iter().enumerate() {
                    if arc.cap > 1e-15 && dist[a] + arc.profit > dist[arc.to] + 1e-15 {
                        dist[arc.to] = dist[a] + arc.profit;
                        prev[arc.to] = Some((a, idx));
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        if dist[sink] <= 1e-12 {
            break;
        }
        let mut bottleneck = f64::INFINITY;
        let mut node = sink;
        while let Some((a, idx)) = prev[node] {
            bottleneck = bottleneck.min(adj[a][idx].cap);
            node = a;
        }
        let mut node = sink;
        while let Some((a, idx)) = prev[node] {
            adj[a][idx].cap -= bottleneck;
            let rev = adj[a][idx].rev;
            let to = adj[a][idx].to;
            adj[to][rev].cap += bottleneck;
            node = a;
        }
        total += bottleneck * dist[sink];
    }
    total
}

/// Flat-metric distance between two vorticity measures: the dual norm over
/// test functions bounded by 1 with Lipschitz constant 1, realized as an
/// optimal split between transporting mass (geodesic cost, capped at 2)
/// and absorbing it (cost 1 per unit). Unclustered mass is absorbed.
pub fn vorticity_distance(
    mesh: &SurfaceMesh,
    mu: &VorticityMeasure,
    nu: &VorticityMeasure,
) -> Result<f64> {
    let mut pos: Vec<(SurfacePoint, f64)> = Vec::new();
    let mut neg: Vec<(SurfacePoint, f64)> = Vec::new();
    for (list, sign) in [(&mu.atoms, 1.0), (&nu.atoms, -1.0)] {
        for (p, m) in list.iter() {
            let m = m * sign;
            if m > 0.0 {
                pos.push((p.clone(), m));
            } else if m < 0.0 {
                neg.push((p.clone(), -m));
            }
        }
    }
    if pos.len() * neg.len() > 400 {
        return Err(Error::Precondition(format!(
            "too many atoms for the transport bound: {} x {}",
            pos.len(),
            neg.len()
        )));
    }
    let profit: Vec<Vec<f64>> = pos
        .iter()
        .map(|(p, _)| {
            neg.iter()
                .map(|(q, _)| {
                    let d = mesh.geodesic_distance(p, q);
                    2.0 - d.min(2.0)
                })
                .collect()
        })
        .collect();
    let supply: Vec<f64> = pos.iter().map(|&(_, m)| m).collect();
    let demand: Vec<f64> = neg.iter().map(|&(_, m)| m).collect();
    let transported = max_profit_transport(&supply, &demand, &profit);
    let total: f64 = supply.iter().sum::<f64>() + demand.iter().sum::<f64>();
    Ok(total - transported + mu.dropped + nu.dropped)
}

/// Holonomy offsets along a path of configurations, for continuity sweeps.
pub fn zeta_continuity_probe(
    mesh: &SurfaceMesh,
    frame: &FrameField,
    cycles: &CycleBasis,
    basis: &HarmonicBasis,
    path: &[Vec<(SurfacePoint, i64)>],
) -> Result<Vec<Vec<f64>>> {
    let solver = CurrentSolver::new(mesh)?;
    path.iter()
        .map(|vortices| {
            let xi = solver.coexact_current(basis, vortices)?;
            zeta_of_current(mesh, frame, cycles, &xi, vortices)
        })
        .collect()
}
