//! Surface topology: tree-cotree decompositions, homology generators, and
//! the harmonic 1-form basis.

use crate::exterior::{cotan_weights, inner1, Cochain0, Cochain1, VertexPoisson};
use crate::surface::SurfaceMesh;
use crate::{Error, Result};

/// Tree-cotree decomposition: a spanning tree of the vertex graph, a
/// spanning tree of the dual graph avoiding primal tree edges, and the
/// 2 * genus leftover edges.
pub(crate) struct TreeCotree {
    /// Per vertex: halfedge from the parent to this vertex (root: none).
    pub parent_halfedge: Vec<Option<usize>>,
    /// Per face: edge crossed toward the parent face (dual root: none).
    pub dual_parent_edge: Vec<Option<usize>>,
    /// Faces in dual BFS order (root first).
    pub dual_order: Vec<usize>,
    /// Edges in neither tree; there are exactly 2 * genus of them.
    pub leftover: Vec<usize>,
}

/// Build a tree-cotree decomposition rooted at vertex 0 and face 0.
pub(crate) fn tree_cotree(mesh: &SurfaceMesh) -> TreeCotree {
    let nv = mesh.n_vertices();
    let ne = mesh.n_edges();
    let nf = mesh.n_faces();

    // primal BFS
    let mut parent_halfedge = vec![None; nv];
    let mut in_primal = vec![false; ne];
    let mut seen = vec![false; nv];
    let mut queue = std::collections::VecDeque::new();
    seen[0] = true;
    queue.push_back(0usize);
    while let Some(v) = queue.pop_front() {
        for &h in mesh.ring(v) {
            let w = mesh.halfedge_head(h);
            if !seen[w] {
                seen[w] = true;
                parent_halfedge[w] = Some(h);
                in_primal[mesh.halfedge_edge(h)] = true;
                queue.push_back(w);
            }
        }
    }

    // dual BFS crossing only non-tree edges
    let mut dual_parent_edge = vec![None; nf];
    let mut dual_order = Vec::with_capacity(nf);
    let mut in_dual = vec![false; ne];
    let mut seen_f = vec![false; nf];
    let mut queue = std::collections::VecDeque::new();
    seen_f[0] = true;
    queue.push_back(0usize);
    while let Some(f) = queue.pop_front() {
        dual_order.push(f);
        for c in 0..3 {
            let e = mesh.halfedge_edge(3 * f + c);
            if in_primal[e] {
                continue;
            }
            let [fa, fb] = mesh.edge_faces(e);
            let g = if fa == f { fb } else { fa };
            if !seen_f[g] {
                seen_f[g] = true;
                dual_parent_edge[g] = Some(e);
                in_dual[e] = true;
                queue.push_back(g);
            }
        }
    }

    let leftover: Vec<usize> =
        (0..ne).filter(|&e| !in_primal[e] && !in_dual[e]).collect();
    debug_assert_eq!(leftover.len(), 2 * mesh.genus());

    TreeCotree { parent_halfedge, dual_parent_edge, dual_order, leftover }
}

/// Integer-valued closed 1-cochains, one per leftover edge: cochain `l` is
/// 1 on leftover edge `l`, 0 on the other leftovers and on primal tree
/// edges, and extends to dual tree edges so that its sum around every face
/// vanishes. Pairing a closed loop of edges with these cochains reads off
/// its homology class.
pub(crate) fn crossing_cochains(mesh: &SurfaceMesh, tc: &TreeCotree) -> Vec<Vec<i64>> {
    let ne = mesh.n_edges();
    tc.leftover
        .iter()
        .map(|&le| {
            let mut w = vec![0i64; ne];
            w[le] = 1;
            // children before parents: each face then has one undetermined
            // edge, the one toward its dual parent
            for &f in tc.dual_order.iter().rev() {
                let Some(pe) = tc.dual_parent_edge[f] else { continue };
                let mut acc = 0i64;
                let mut psign = 0i64;
                for c in 0..3 {
                    let h = 3 * f + c;
                    let e = mesh.halfedge_edge(h);
                    let s = mesh.halfedge_sign(h) as i64;
                    if e == pe {
                        psign = s;
                    } else {
                        acc += s * w[e];
                    }
                }
                w[pe] = -psign * acc; // psign is +-1
            }
            debug_assert!({
                let root = tc.dual_order[0];
                let sum: i64 = (0..3)
                    .map(|c| {
                        let h = 3 * root + c;
                        mesh.halfedge_sign(h) as i64 * w[mesh.halfedge_edge(h)]
                    })
                    .sum();
                sum == 0
            });
            w
        })
        .collect()
}

/// Particular solution of d xi = rhs supported on dual-spanning-tree edges,
/// built by the same child-first recursion as the crossing cochains. The
/// total of `rhs` must vanish for the root face to close.
pub(crate) fn route_dual_tree(mesh: &SurfaceMesh, tc: &TreeCotree, rhs: &[f64]) -> Vec<f64> {
    let mut xi = vec![0.0f64; mesh.n_edges()];
    for &f in tc.dual_order.iter().rev() {
        let Some(pe) = tc.dual_parent_edge[f] else { continue };
        let mut acc = 0.0;
        let mut psign = 0.0;
        for c in 0..3 {
            let h = 3 * f + c;
            let e = mesh.halfedge_edge(h);
            let s = mesh.halfedge_sign(h);
            if e == pe {
                psign = s;
            } else {
                acc += s * xi[e];
            }
        }
        xi[pe] = psign * (rhs[f] - acc);
    }
    debug_assert!({
        let root = tc.dual_order[0];
        let sum: f64 = (0..3)
            .map(|c| {
                let h = 3 * root + c;
                mesh.halfedge_sign(h) * xi[mesh.halfedge_edge(h)]
            })
            .sum();
        let scale: f64 = rhs.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        (sum - rhs[root]).abs() <= 1e-9 * scale
    });
    xi
}

/// Pairing of every root-to-vertex path of a spanning tree with each of the
/// given cochains. `parent_halfedge[v]` points from the parent to `v`.
pub(crate) fn tree_path_classes(
    mesh: &SurfaceMesh,
    parent_halfedge: &[Option<usize>],
    cochains: &[Vec<i64>],
) -> Vec<Vec<i64>> {
    let nv = mesh.n_vertices();
    let k = cochains.len();
    let mut class = vec![None::<Vec<i64>>; nv];
    for v in 0..nv {
        if class[v].is_some() {
            continue;
        }
        // walk up to a resolved ancestor, then unwind
        let mut chain = Vec::new();
        let mut x = v;
        while class[x].is_none() {
            match parent_halfedge[x] {
                Some(h) => {
                    chain.push((x, h));
                    x = mesh.halfedge_tail(h);
                }
                None => {
                    class[x] = Some(vec![0i64; k]);
                    break;
                }
            }
        }
        for &(y, h) in chain.iter().rev() {
            let p = mesh.halfedge_tail(h);
            let e = mesh.halfedge_edge(h);
            let s = mesh.halfedge_sign(h) as i64;
            let base = class[p].clone().unwrap();
            let mut c = base;
            for (kk, w) in cochains.iter().enumerate() {
                c[kk] += s * w[e];
            }
            class[y] = Some(c);
        }
    }
    class.into_iter().map(Option::unwrap).collect()
}

/// 2 * genus closed oriented loops generating first homology. Each loop is
/// a cyclic list of halfedges, head to tail. Loops are based at the tree
/// root, so they can be concatenated; tree-path backtracking cancels in
/// every cochain pairing.
pub struct CycleBasis {
    pub loops: Vec<Vec<usize>>,
}

impl CycleBasis {
    pub fn len(&self) -> usize {
        self.loops.len()
    }
    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    /// Signed sum of a 1-cochain along loop `l`.
    pub fn integrate(&self, mesh: &SurfaceMesh, l: usize, form: &[f64]) -> f64 {
        self.loops[l]
            .iter()
            .map(|&h| mesh.halfedge_sign(h) * form[mesh.halfedge_edge(h)])
            .sum()
    }

    /// Write as CSV: loop id, step, halfedge, edge, sign.
    pub fn write_csv<W: std::io::Write>(&self, mesh: &SurfaceMesh, mut out: W) -> Result<()> {
        writeln!(out, "loop,step,halfedge,edge,sign")?;
        for (l, lp) in self.loops.iter().enumerate() {
            for (s, &h) in lp.iter().enumerate() {
                writeln!(
                    out,
                    "{l},{s},{h},{},{}",
                    mesh.halfedge_edge(h),
                    mesh.halfedge_sign(h) as i64
                )?;
            }
        }
        Ok(())
    }
}

fn is_closed_path(mesh: &SurfaceMesh, path: &[usize]) -> bool {
    !path.is_empty()
        && path.iter().zip(path.iter().cycle().skip(1)).all(|(&a, &b)| {
            mesh.halfedge_head(a) == mesh.halfedge_tail(b)
        })
}

/// Homology generators from the tree-cotree decomposition: one loop per
/// leftover edge, running root to tail along the tree, across the edge,
/// and back.
pub fn homology_basis(mesh: &SurfaceMesh) -> CycleBasis {
    let tc = tree_cotree(mesh);
    let root_path = |v: usize| -> Vec<usize> {
        // halfedges from the root down to v
        let mut up = Vec::new();
        let mut x = v;
        while let Some(h) = tc.parent_halfedge[x] {
            up.push(h);
            x = mesh.halfedge_tail(h);
        }
        up.reverse();
        up
    };
    let loops = tc
        .leftover
        .iter()
        .map(|&e| {
            let [u, v] = mesh.edge_vertices(e);
            let mut lp = root_path(u);
            lp.push(mesh.edge_halfedges(e)[0]);
            lp.extend(root_path(v).iter().rev().map(|&h| mesh.halfedge_twin(h)));
            debug_assert!(is_closed_path(mesh, &lp));
            lp
        })
        .collect();
    CycleBasis { loops }
}

/// Orthonormal harmonic 1-form basis with its Gram and period matrices.
pub struct HarmonicBasis {
    /// 2 * genus forms, closed exactly and co-closed to solver tolerance,
    /// orthonormal in the cotan inner product.
    pub forms: Vec<Cochain1>,
    /// Measured Gram matrix of the forms (should be the identity).
    pub gram: Vec<Vec<f64>>,
    /// Period matrix: `periods[l][k]` integrates form `k` over loop `l`.
    pub periods: Vec<Vec<f64>>,
}

impl HarmonicBasis {
    /// Write as CSV: edge id, one coefficient column per form.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        let cols: Vec<String> = (0..self.forms.len()).map(|k| format!("eta{k}")).collect();
        writeln!(out, "edge,{}", cols.join(","))?;
        let ne = self.forms.first().map(|f| f.0.len()).unwrap_or(0);
        for e in 0..ne {
            let vals: Vec<String> = self.forms.iter().map(|f| f.0[e].to_string()).collect();
            writeln!(out, "{e},{}", vals.join(","))?;
        }
        Ok(())
    }

    /// Harmonic part of a 1-form: its projection onto the basis span.
    pub fn project(&self, weights: &[f64], form: &Cochain1) -> Cochain1 {
        let mut out = vec![0.0; form.0.len()];
        for eta in &self.forms {
            let c = inner1(weights, form, eta);
            for e in 0..out.len() {
                out[e] += c * eta.0[e];
            }
        }
        Cochain1(out)
    }
}

/// Build the orthonormal harmonic basis. Each leftover-edge crossing
/// cochain is closed exactly; subtracting its exact part makes it
/// co-closed; Gram-Schmidt in the leftover order (run twice for stability)
/// orthonormalizes while preserving both properties.
pub fn harmonic_basis(mesh: &SurfaceMesh, cycles: &CycleBasis) -> Result<HarmonicBasis> {
    let two_g = 2 * mesh.genus();
    if cycles.len() != two_g {
        return Err(Error::Precondition(format!(
            "cycle basis has {} loops on a genus {} surface",
            cycles.len(),
            mesh.genus()
        )));
    }
    if two_g == 0 {
        return Ok(HarmonicBasis { forms: Vec::new(), gram: Vec::new(), periods: Vec::new() });
    }
    let tc = tree_cotree(mesh);
    let w = cotan_weights(mesh);
    let poisson = VertexPoisson::new(mesh)?;
    let mut forms: Vec<Cochain1> = Vec::with_capacity(two_g);
    for cochain in crossing_cochains(mesh, &tc) {
        let rep: Vec<f64> = cochain.iter().map(|&x| x as f64).collect();
        // exact part: L phi = d0^T hodge1 rep
        let mut rhs = vec![0.0; mesh.n_vertices()];
        for e in 0..mesh.n_edges() {
            let [u, v] = mesh.edge_vertices(e);
            rhs[u] -= w[e] * rep[e];
            rhs[v] += w[e] * rep[e];
        }
        let phi = poisson.solve(&Cochain0(rhs))?;
        let eta: Vec<f64> = (0..mesh.n_edges())
            .map(|e| {
                let [u, v] = mesh.edge_vertices(e);
                rep[e] - (phi.0[v] - phi.0[u])
            })
            .collect();
        forms.push(Cochain1(eta));
    }

    for _pass in 0..2 {
        for k in 0..two_g {
            for j in 0..k {
                let c = inner1(&w, &forms[k], &forms[j]);
                let (head, tail) = forms.split_at_mut(k);
                for e in 0..mesh.n_edges() {
                    tail[0].0[e] -= c * head[j].0[e];
                }
            }
            let norm2 = inner1(&w, &forms[k], &forms[k]);
            if !(norm2 > 1e-18) {
                return Err(Error::Numerical(format!(
                    "harmonic form {k} degenerates under orthonormalization (norm^2 = {norm2:.3e})"
                )));
            }
            let inv = 1.0 / norm2.sqrt();
            for e in 0..mesh.n_edges() {
                forms[k].0[e] *= inv;
            }
        }
    }

    let gram: Vec<Vec<f64>> = (0..two_g)
        .map(|k| (0..two_g).map(|j| inner1(&w, &forms[k], &forms[j])).collect())
        .collect();
    let periods: Vec<Vec<f64>> = (0..two_g)
        .map(|l| (0..two_g).map(|k| cycles.integrate(mesh, l, &forms[k].0)).collect())
        .collect();

    let alpha = nalgebra::DMatrix::from_fn(two_g, two_g, |l, k| periods[l][k]);
    if alpha.clone().lu().determinant().abs() < 1e-8 {
        return Err(Error::Numerical("period matrix is singular".into()));
    }
    Ok(HarmonicBasis { forms, gram, periods })
}

/// Integer homology class of a closed halfedge loop, found by integrating
/// the harmonic basis and inverting the period matrix. The distance from
/// the nearest integer vector must stay below 0.05.
pub fn homology_class(
    mesh: &SurfaceMesh,
    lp: &[usize],
    basis: &HarmonicBasis,
) -> Result<Vec<i64>> {
    if !is_closed_path(mesh, lp) {
        return Err(Error::Precondition("homology class of a non-closed path".into()));
    }
    let two_g = basis.forms.len();
    if two_g == 0 {
        return Ok(Vec::new());
    }
    let p = nalgebra::DVector::from_fn(two_g, |k, _| {
        lp.iter()
            .map(|&h| mesh.halfedge_sign(h) * basis.forms[k].0[mesh.halfedge_edge(h)])
            .sum()
    });
    // loop ~ Sum_l c_l gamma_l gives p_k = Sum_l c_l periods[l][k]
    let alpha_t = nalgebra::DMatrix::from_fn(two_g, two_g, |k, l| basis.periods[l][k]);
    let c = alpha_t
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::Numerical("period matrix is singular".into()))?;
    let mut out = Vec::with_capacity(two_g);
    let mut worst = 0.0f64;
    for l in 0..two_g {
        let r = c[l].round();
        worst = worst.max((c[l] - r).abs());
        out.push(r as i64);
    }
    if worst > 0.05 {
        return Err(Error::Numerical(format!(
            "homology coordinates {c:?} are {worst:.3} away from integers"
        )));
    }
    Ok(out)
}

/// Max residual of decomposing random closed 1-forms into exact plus
/// harmonic parts; a completeness witness for the basis.
pub fn completeness_residual(
    mesh: &SurfaceMesh,
    basis: &HarmonicBasis,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let w = cotan_weights(mesh);
    let tc = tree_cotree(mesh);
    let crossings = crossing_cochains(mesh, &tc);
    let poisson = VertexPoisson::new(mesh)?;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        // random closed form: d0 of a random function plus random multiples
        // of the crossing cochains
        let f: Vec<f64> = (0..mesh.n_vertices()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut alpha: Vec<f64> = (0..mesh.n_edges())
            .map(|e| {
                let [u, v] = mesh.edge_vertices(e);
                f[v] - f[u]
            })
            .collect();
        for c in &crossings {
            let scale = rng.random_range(-1.0..1.0);
            for e in 0..mesh.n_edges() {
                alpha[e] += scale * c[e] as f64;
            }
        }
        let norm = inner1(&w, &Cochain1(alpha.clone()), &Cochain1(alpha.clone())).sqrt();

        // remove the harmonic part, then the exact part
        let alpha_c = Cochain1(alpha.clone());
        let harm = basis.project(&w, &alpha_c);
        for e in 0..mesh.n_edges() {
            alpha[e] -= harm.0[e];
        }
        let mut rhs = vec![0.0; mesh.n_vertices()];
        for e in 0..mesh.n_edges() {
            let [u, v] = mesh.edge_vertices(e);
            rhs[u] -= w[e] * alpha[e];
            rhs[v] += w[e] * alpha[e];
        }
        let phi = poisson.solve(&Cochain0(rhs))?;
        for e in 0..mesh.n_edges() {
            let [u, v] = mesh.edge_vertices(e);
            alpha[e] -= phi.0[v] - phi.0[u];
        }
        let res = inner1(&w, &Cochain1(alpha.clone()), &Cochain1(alpha)).sqrt();
        worst = worst.max(res / norm.max(1e-30));
    }
    Ok(worst)
}
