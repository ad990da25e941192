//! Renormalized interaction energy of a vortex configuration, computed two
//! independent ways: a closed formula in terms of Green's functions and the
//! curvature potential, and the removed-ball limit of the canonical field's
//! Dirichlet energy. Also minimizes the energy over vortex positions by
//! coordinate descent on mesh vertices.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use crate::canonical::{
    canonical_jstar, flux_lattice, CurrentSolver, VortexConfiguration, FLUX_TOLERANCE_EXACT,
};
use crate::connection::FrameField;
use crate::exterior::{cotan_weights, d0, Cochain0, Cochain1};
use crate::potential::{potential_at, psi0, GreenOperator};
use crate::surface::{SurfaceMesh, SurfacePoint};
use crate::topology::{CycleBasis, HarmonicBasis};
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Both evaluations of the renormalized energy with their diagnostics.
/// Fields of the side that was not computed are `None` or empty.
#[derive(Clone, Debug, serde::Serialize)]
pub struct RenormalizedEnergyReport {
    /// Closed-formula value.
    pub w_formula: Option<f64>,
    /// Pair interaction: 4 pi^2 sum over ordered pairs of d_l d_k G(a_l, a_k).
    pub green_interaction: f64,
    /// Self interaction: 2 pi^2 sum of d_k^2 H(a_k, a_k).
    pub self_interaction: f64,
    /// Curvature coupling: 2 pi sum of d_k psi0(a_k).
    pub curvature_coupling: f64,
    /// Harmonic flux energy: half the squared norm of the flux vector.
    pub flux_energy: f64,
    /// Half the Dirichlet energy of the curvature potential.
    pub curvature_dirichlet: f64,
    /// Removed-ball limit value.
    pub w_limit: Option<f64>,
    /// Ball radii of the limit sweep, decreasing.
    pub radii: Vec<f64>,
    /// Outside-ball energy plus pi log r per radius.
    pub partial_values: Vec<f64>,
    /// Largest deviation of the partial values from the extrapolation fit.
    pub fit_residual: f64,
}

impl RenormalizedEnergyReport {
    fn empty() -> RenormalizedEnergyReport {
        RenormalizedEnergyReport {
            w_formula: None,
            green_interaction: 0.0,
            self_interaction: 0.0,
            curvature_coupling: 0.0,
            flux_energy: 0.0,
            curvature_dirichlet: 0.0,
            w_limit: None,
            radii: Vec::new(),
            partial_values: Vec::new(),
            fit_residual: 0.0,
        }
    }

    /// Merge the formula side of `self` with the limit side of `other`.
    pub fn merged_with(mut self, other: RenormalizedEnergyReport) -> RenormalizedEnergyReport {
        self.w_limit = other.w_limit;
        self.radii = other.radii;
        self.partial_values = other.partial_values;
        self.fit_residual = other.fit_residual;
        self
    }
}

fn vertex_of(mesh: &SurfaceMesh, p: &SurfacePoint) -> Option<usize> {
    (0..3).find(|&c| p.bary[c] == 1.0).map(|c| mesh.face(p.face)[c])
}

fn check_distinct(mesh: &SurfaceMesh, points: &[SurfacePoint]) -> Result<()> {
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if mesh.geodesic_distance(&points[i], &points[j]) <= 1e-12 {
                return Err(Error::Precondition(format!(
                    "vortices {i} and {j} coincide"
                )));
            }
        }
    }
    Ok(())
}

/// Cached potential-theory data for repeated energy evaluations on one mesh.
pub struct WEvaluator<'m> {
    mesh: &'m SurfaceMesh,
    green: GreenOperator<'m>,
    psi0_field: Cochain0,
    curvature_dirichlet: f64,
    h_cache: Mutex<HashMap<usize, f64>>,
}

impl<'m> WEvaluator<'m> {
    pub fn new(mesh: &'m SurfaceMesh) -> Result<Self> {
        let green = GreenOperator::new(mesh)?;
        let cp = psi0(mesh)?;
        let weights = cotan_weights(mesh);
        let grad = d0(mesh).apply(&cp.psi0.0);
        let dirichlet =
            0.5 * (0..mesh.n_edges()).map(|e| weights[e] * grad[e] * grad[e]).sum::<f64>();
        Ok(WEvaluator {
            mesh,
            green,
            psi0_field: cp.psi0,
            curvature_dirichlet: dirichlet,
            h_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn mesh(&self) -> &'m SurfaceMesh {
        self.mesh
    }

    pub fn green(&self) -> &GreenOperator<'m> {
        &self.green
    }

    /// Diagonal regular part of the Green's function, cached per vertex for
    /// points that sit on mesh vertices.
    pub fn h_at(&self, p: &SurfacePoint) -> Result<f64> {
        if let Some(v) = vertex_of(self.mesh, p) {
            if let Some(&h) = self.h_cache.lock().unwrap().get(&v) {
                return Ok(h);
            }
            let h = self.green.diagonal_regular_part(p)?;
            self.h_cache.lock().unwrap().insert(v, h);
            return Ok(h);
        }
        self.green.diagonal_regular_part(p)
    }

    /// Closed-formula report for an admissible configuration. The flux
    /// vector is taken as given; admissibility is the caller's contract
    /// (the canonical-field constructor enforces it).
    pub fn formula_report(
        &self,
        basis: &HarmonicBasis,
        config: &VortexConfiguration,
    ) -> Result<RenormalizedEnergyReport> {
        let points = config.points();
        let degrees = config.degrees();
        check_distinct(self.mesh, &points)?;

        // pair interaction over unordered pairs; the coefficient is fixed
        // by consistency with the removed-ball limit (integration by parts
        // against the vortex potential contributes pi d_k per ball to the
        // regular value, hence 4 pi^2 per pair)
        let mut green_interaction = 0.0;
        for l in 0..points.len() {
            for k in (l + 1)..points.len() {
                let g = self.green.eval(&points[l], &points[k])?;
                green_interaction += 4.0 * PI * PI * (degrees[l] * degrees[k]) as f64 * g;
            }
        }
        let mut self_interaction = 0.0;
        let mut curvature_coupling = 0.0;
        for (p, &d) in points.iter().zip(degrees.iter()) {
            self_interaction += 2.0 * PI * PI * (d * d) as f64 * self.h_at(p)?;
            curvature_coupling +=
                TWO_PI * d as f64 * potential_at(self.mesh, &self.psi0_field, p);
        }
        let mut flux_energy = 0.0;
        for l in 0..config.flux.len() {
            for k in 0..config.flux.len() {
                flux_energy += 0.5 * config.flux[l] * basis.gram[l][k] * config.flux[k];
            }
        }
        let total = green_interaction
            + self_interaction
            + curvature_coupling
            + flux_energy
            + self.curvature_dirichlet;
        Ok(RenormalizedEnergyReport {
            w_formula: Some(total),
            green_interaction,
            self_interaction,
            curvature_coupling,
            flux_energy,
            curvature_dirichlet: self.curvature_dirichlet,
            ..RenormalizedEnergyReport::empty()
        })
    }
}

/// Closed-formula renormalized energy of a configuration.
pub fn w_formula(
    mesh: &SurfaceMesh,
    basis: &HarmonicBasis,
    config: &VortexConfiguration,
) -> Result<RenormalizedEnergyReport> {
    WEvaluator::new(mesh)?.formula_report(basis, config)
}

/// Dirichlet energy contribution of each face: a quarter of the opposite
/// cotangent times the squared coefficient, summed over the face's edges.
/// Face values sum to half the weighted norm of the form.
fn face_energies(mesh: &SurfaceMesh, j: &Cochain1) -> Vec<f64> {
    let mut e = vec![0.0; mesh.n_faces()];
    for f in 0..mesh.n_faces() {
        for c in 0..3 {
            let h = 3 * f + c;
            let ang = mesh.corner_angle(mesh.halfedge_prev(h));
            let val = j.0[mesh.halfedge_edge(h)];
            e[f] += 0.25 * (ang.cos() / ang.sin()) * val * val;
        }
    }
    e
}

fn validate_radii(
    mesh: &SurfaceMesh,
    points: &[SurfacePoint],
    radii: &[f64],
) -> Result<()> {
    if radii.len() < 2 {
        return Err(Error::Precondition(
            "at least two ball radii are needed for extrapolation".into(),
        ));
    }
    for w in radii.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::Precondition("ball radii must be strictly decreasing".into()));
        }
    }
    let h = mesh.mean_edge_length();
    let r_min = *radii.last().unwrap();
    let r_max = radii[0];
    if r_min < 3.0 * h {
        return Err(Error::Precondition(format!(
            "smallest ball radius {r_min:.3e} is below the mesh resolution floor {:.3e}",
            3.0 * h
        )));
    }
    if r_max > mesh.injectivity_radius_estimate() {
        return Err(Error::Precondition(format!(
            "largest ball radius {r_max:.3e} exceeds the injectivity radius"
        )));
    }
    let mut min_sep = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            min_sep = min_sep.min(mesh.geodesic_distance(&points[i], &points[j]));
        }
    }
    if 2.0 * r_max >= min_sep {
        return Err(Error::Precondition(format!(
            "largest ball radius {r_max:.3e} makes the balls overlap (separation {min_sep:.3e})"
        )));
    }
    Ok(())
}

/// A decreasing geometric radius sequence resolved by the mesh and clear of
/// ball overlaps: five radii from the admissible ceiling down to three mean
/// edge lengths.
pub fn default_radii(mesh: &SurfaceMesh, points: &[SurfacePoint]) -> Result<Vec<f64>> {
    let h = mesh.mean_edge_length();
    let mut min_sep = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            min_sep = min_sep.min(mesh.geodesic_distance(&points[i], &points[j]));
        }
    }
    let r_max = (16.0 * h)
        .min(0.45 * min_sep)
        .min(0.9 * mesh.injectivity_radius_estimate());
    let r_min = (5.0 * h).max(r_max / 3.2).max(3.001 * h);
    if r_max <= r_min * 1.05 {
        return Err(Error::Precondition(format!(
            "no admissible ball radii: resolution floor {r_min:.3e}, ceiling {r_max:.3e}"
        )));
    }
    let n = 5usize;
    let ratio = (r_min / r_max).powf(1.0 / (n - 1) as f64);
    Ok((0..n).map(|i| r_max * ratio.powi(i as i32)).collect())
}

/// Least-squares fit of values against {1, r^2, r^4}; returns the constant
/// term and the largest absolute residual. With exactly two samples the
/// quartic column is dropped.
fn extrapolate_to_zero(radii: &[f64], values: &[f64]) -> (f64, f64) {
    let m = radii.len();
    let cols = if m >= 4 { 3 } else { 2 };
    let a = nalgebra::DMatrix::from_fn(m, cols, |i, j| radii[i].powi(2 * j as i32));
    let b = nalgebra::DVector::from_column_slice(values);
    let sol = (a.transpose() * &a)
        .lu()
        .solve(&(a.transpose() * &b))
        .expect("normal equations of a small Vandermonde system");
    let fit = &a * &sol;
    let residual = (0..m).map(|i| (values[i] - fit[i]).abs()).fold(0.0, f64::max);
    (sol[0], residual)
}

/// Removed-ball evaluation for a given current: Dirichlet energy outside
/// geodesic balls of each radius plus pi log r per unit squared degree,
/// extrapolated to zero radius. The log uses the effective radius measured
/// from each ball's perimeter, which cancels the marching bias of the
/// distance field to first order.
pub fn w_limit_of_current(
    mesh: &SurfaceMesh,
    config: &VortexConfiguration,
    jstar: &Cochain1,
    radii: &[f64],
) -> Result<RenormalizedEnergyReport> {
    let points = config.points();
    let degrees = config.degrees();
    let energies = face_energies(mesh, jstar);

    if points.is_empty() {
        let total: f64 = energies.iter().sum();
        let radii = if radii.is_empty() { vec![1.0] } else { radii.to_vec() };
        let partial_values = vec![total; radii.len()];
        return Ok(RenormalizedEnergyReport {
            w_limit: Some(total),
            radii,
            partial_values,
            fit_residual: 0.0,
            ..RenormalizedEnergyReport::empty()
        });
    }
    check_distinct(mesh, &points)?;
    validate_radii(mesh, &points, radii)?;

    let fields: Vec<Vec<f64>> = points.iter().map(|p| mesh.distance_field(p)).collect();
    let mut partial_values = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut covered = vec![0.0f64; mesh.n_faces()];
        for field in &fields {
            for (f, frac) in mesh.sublevel_fractions(field, r).into_iter().enumerate() {
                covered[f] += frac;
            }
        }
        let outside: f64 = (0..mesh.n_faces())
            .map(|f| energies[f] * (1.0 - covered[f].min(1.0)))
            .sum();
        let mut log_term = 0.0;
        for (p, &d) in points.iter().zip(degrees.iter()) {
            let ball = mesh.geodesic_ball_boundary(p, r)?;
            if ball.n_loops != 1 {
                return Err(Error::Precondition(format!(
                    "ball of radius {r:.3e} is not an embedded disk"
                )));
            }
            let r_eff = ball.boundary_length / TWO_PI;
            log_term += PI * (d * d) as f64 * r_eff.ln();
        }
        partial_values.push(outside + log_term);
    }
    let (w, fit_residual) = extrapolate_to_zero(radii, &partial_values);
    Ok(RenormalizedEnergyReport {
        w_limit: Some(w),
        radii: radii.to_vec(),
        partial_values,
        fit_residual,
        ..RenormalizedEnergyReport::empty()
    })
}

/// Removed-ball limit of the canonical field of a configuration.
pub fn w_limit(
    mesh: &SurfaceMesh,
    frame: &FrameField,
    cycles: &CycleBasis,
    basis: &HarmonicBasis,
    config: &VortexConfiguration,
    radii: &[f64],
) -> Result<RenormalizedEnergyReport> {
    let jstar = canonical_jstar(mesh, frame, cycles, basis, config)?;
    w_limit_of_current(mesh, config, &jstar, radii)
}

/// Both evaluations in one report.
pub fn evaluate(
    mesh: &SurfaceMesh,
    frame: &FrameField,
    cycles: &CycleBasis,
    basis: &HarmonicBasis,
    config: &VortexConfiguration,
    radii: &[f64],
) -> Result<RenormalizedEnergyReport> {
    let formula = w_formula(mesh, basis, config)?;
    let limit = w_limit(mesh, frame, cycles, basis, config, radii)?;
    Ok(formula.merged_with(limit))
}

/// Result of coordinate-descent placement optimization.
#[derive(Clone, Debug)]
pub struct OptimizedConfiguration {
    pub vortices: Vec<(SurfacePoint, i64)>,
    /// Vertex hosting each vortex.
    pub vertices: Vec<usize>,
    pub flux: Vec<f64>,
    pub w: f64,
    pub sweeps: usize,
    pub converged: bool,
    /// True when a further descent direction exists but is blocked by the
    /// minimum-separation guard (vortices of opposite sign collapsing).
    pub collapse_detected: bool,
    /// Accepted moves: vortex index, destination vertex, energy after.
    pub move_log: Vec<(usize, usize, f64)>,
}

fn vertex_point(mesh: &SurfaceMesh, v: usize) -> SurfacePoint {
    let h = mesh.ring(v)[0];
    SurfacePoint::at_corner(h / 3, h % 3)
}

/// Sample vertices with pairwise geodesic separation at least `min_sep`.
pub fn random_vortex_vertices(
    mesh: &SurfaceMesh,
    n: usize,
    min_sep: f64,
    seed: u64,
) -> Result<Vec<usize>> {
    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    'outer: for _ in 0..2000 {
        let picks: Vec<usize> = (0..n).map(|_| rng.random_range(0..mesh.n_vertices())).collect();
        for i in 0..n {
            let field = mesh.distance_field(&vertex_point(mesh, picks[i]));
            for j in (i + 1)..n {
                if field[picks[j]] < min_sep {
                    continue 'outer;
                }
            }
        }
        return Ok(picks);
    }
    Err(Error::Precondition(format!(
        "could not place {n} vortices with separation {min_sep:.3e}"
    )))
}

struct DistanceCache<'m> {
    mesh: &'m SurfaceMesh,
    fields: HashMap<usize, Arc<Vec<f64>>>,
}

impl<'m> DistanceCache<'m> {
    fn field(&mut self, v: usize) -> Arc<Vec<f64>> {
        let mesh = self.mesh;
        self.fields
            .entry(v)
            .or_insert_with(|| Arc::new(mesh.distance_field(&vertex_point(mesh, v))))
            .clone()
    }
}

/// Minimize the renormalized energy over vortex positions by greedy
/// coordinate descent on mesh vertices, one vortex at a time. The flux
/// vector starts at the lattice point nearest zero and tracks the nearest
/// lattice point to its previous value after every accepted move, keeping
/// the objective continuous along the path. A minimum-separation guard of
/// five mean edge lengths keeps the configuration inside the regime where
/// the energy is defined; a blocked descent direction is reported as
/// detected collapse.
pub fn minimize_w(
    mesh: &SurfaceMesh,
    frame: &FrameField,
    cycles: &CycleBasis,
    basis: &HarmonicBasis,
    evaluator: &WEvaluator,
    degrees: &[i64],
    start_vertices: &[usize],
) -> Result<OptimizedConfiguration> {
    if degrees.len() != start_vertices.len() {
        return Err(Error::Precondition(
            "one starting vertex is needed per degree".into(),
        ));
    }
    let h = mesh.mean_edge_length();
    let guard = 5.0 * h;
    let mut cache = DistanceCache { mesh, fields: HashMap::new() };
    let mut verts = start_vertices.to_vec();
    let n = verts.len();
    for i in 0..n {
        let field = cache.field(verts[i]);
        for j in (i + 1)..n {
            if field[verts[j]] < guard {
                return Err(Error::Precondition(format!(
                    "starting vortices {i} and {j} are closer than the separation guard {guard:.3e}"
                )));
            }
        }
    }

    let genus = mesh.genus();
    let current_solver = if genus > 0 && n > 0 { Some(CurrentSolver::new(mesh)?) } else { None };
    let points_of =
        |verts: &[usize]| -> Vec<SurfacePoint> { verts.iter().map(|&v| vertex_point(mesh, v)).collect() };
    let config_of = |mesh: &SurfaceMesh, verts: &[usize], flux: Vec<f64>| {
        VortexConfiguration::new(
            mesh,
            points_of(verts)
                .into_iter()
                .zip(degrees.iter())
                .map(|(p, &d)| (p, d))
                .collect(),
            flux,
        )
    };

    // flux for a vertex placement, tracking the branch nearest `previous`
    let flux_for = |verts: &[usize], previous: &[f64]| -> Result<Vec<f64>> {
        match &current_solver {
            None => Ok(vec![0.0; 2 * genus]),
            Some(solver) => {
                let vortices: Vec<(SurfacePoint, i64)> = points_of(verts)
                    .into_iter()
                    .zip(degrees.iter())
                    .map(|(p, &d)| (p, d))
                    .collect();
                let _ = solver;
                let lat = flux_lattice(
                    mesh, frame, cycles, basis, &vortices, FLUX_TOLERANCE_EXACT,
                )?;
                Ok(lat.project(previous)?.0)
            }
        }
    };

    let mut flux = flux_for(&verts, &vec![0.0; 2 * genus])?;
    let energy = |verts: &[usize], flux: Vec<f64>| -> Result<f64> {
        let config = config_of(mesh, verts, flux)?;
        Ok(evaluator
            .formula_report(basis, &config)?
            .w_formula
            .expect("formula report carries a value"))
    };
    let mut w = energy(&verts, flux.clone())?;
    let mut move_log = Vec::new();
    let mut collapse_detected = false;
    let mut converged = false;
    let mut sweeps = 0usize;
    let max_sweeps = 200usize;

    while sweeps < max_sweeps {
        sweeps += 1;
        let mut improved = false;
        let mut blocked_moves: Vec<(usize, usize)> = Vec::new();
        for k in 0..n {
            let neighbors: Vec<usize> = mesh
                .ring(verts[k])
                .iter()
                .map(|&hh| mesh.halfedge_head(hh))
                .collect();
            let mut best = (w, None);
            for &cand in &neighbors {
                let mut ok = true;
                let field = cache.field(cand);
                for (j, &vj) in verts.iter().enumerate() {
                    if j != k && field[vj] < guard {
                        ok = false;
                    }
                }
                if !ok {
                    blocked_moves.push((k, cand));
                    continue;
                }
                let mut trial = verts.clone();
                trial[k] = cand;
                let trial_flux = flux_for(&trial, &flux)?;
                let wt = energy(&trial, trial_flux.clone())?;
                if wt < best.0 - 1e-12 {
                    best = (wt, Some((cand, trial_flux)));
                }
            }
            if let (wt, Some((cand, trial_flux))) = best {
                verts[k] = cand;
                flux = trial_flux;
                w = wt;
                move_log.push((k, cand, w));
                improved = true;
            }
        }
        if !improved {
            // probe guarded moves: a blocked improving direction means the
            // optimum wants the vortices closer than the guard allows
            for (k, cand) in blocked_moves {
                let mut trial = verts.clone();
                trial[k] = cand;
                if check_distinct(mesh, &points_of(&trial)).is_err() {
                    continue;
                }
                let trial_flux = flux_for(&trial, &flux)?;
                if energy(&trial, trial_flux)? < w - 1e-12 {
                    collapse_detected = true;
                    break;
                }
            }
            converged = true;
            break;
        }
    }

    Ok(OptimizedConfiguration {
        vortices: points_of(&verts)
            .into_iter()
            .zip(degrees.iter())
            .map(|(p, &d)| (p, d))
            .collect(),
        vertices: verts,
        flux,
        w,
        sweeps,
        converged,
        collapse_detected,
        move_log,
    })
}
