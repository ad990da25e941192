//! Sparse symmetric linear algebra: CSR storage, reverse Cuthill-McKee
//! ordering, and an up-looking sparse Cholesky factorization.
//!
//! The mesh Laplacians assembled by this crate are symmetric positive
//! semidefinite with constant kernel; callers pin one unknown to obtain a
//! definite system. Factorization and solves are deterministic, so repeated
//! runs produce identical results.

use crate::{Error, Result};

const NONE: usize = usize::MAX;

/// Symmetric sparse matrix in CSR form holding both triangles.
/// Duplicate triplets accumulate; explicit zeros are dropped.
#[derive(Clone, Debug)]
pub struct SymmetricSparse {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SymmetricSparse {
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut entries: Vec<(usize, usize, f64)> = triplets
            .iter()
            .copied()
            .filter(|&(i, j, v)| {
                assert!(i < n && j < n, "triplet index out of range");
                v != 0.0
            })
            .collect();
        entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for &(i, j, v) in &entries {
            if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == j && row_ptr[i + 1] > 0 {
                // same (i, j) as previous entry: accumulate
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr[i + 1] = col_idx.len();
        }
        // rows without entries inherit the previous offset
        for i in 1..=n {
            if row_ptr[i] < row_ptr[i - 1] {
                row_ptr[i] = row_ptr[i - 1];
            }
        }
        SymmetricSparse { n, row_ptr, col_idx, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// y = A x.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            y[i] = acc;
        }
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.apply(x, &mut y);
        y
    }

    /// Relative residual ||A x - b|| / max(||b||, tiny).
    pub fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.apply_vec(x);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.n {
            num += (ax[i] - b[i]) * (ax[i] - b[i]);
            den += b[i] * b[i];
        }
        (num / den.max(1e-300)).sqrt()
    }
}

/// Reverse Cuthill-McKee ordering of the adjacency graph of `a`.
/// Returns `perm` with `perm[new] = old`.
fn rcm_order(a: &SymmetricSparse) -> Vec<usize> {
    let n = a.n;
    let degree = |v: usize| a.row_ptr[v + 1] - a.row_ptr[v];
    let mut perm = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut level = vec![0usize; n];

    // BFS returning visit order; neighbors enqueued by ascending degree
    let bfs = |start: usize, visited: &mut [bool], level: &mut [usize], order: &mut Vec<usize>| {
        order.clear();
        let mut queue = std::collections::VecDeque::new();
        visited[start] = true;
        level[start] = 0;
        queue.push_back(start);
        let mut nbrs = Vec::new();
        while let Some(v) = queue.pop_front() {
            order.push(v);
            nbrs.clear();
            for p in a.row_ptr[v]..a.row_ptr[v + 1] {
                let w = a.col_idx[p];
                if w != v && !visited[w] {
                    visited[w] = true;
                    level[w] = level[v] + 1;
                    nbrs.push(w);
                }
            }
            nbrs.sort_unstable_by_key(|&w| degree(w));
            queue.extend(nbrs.iter().copied());
        }
    };

    let mut order = Vec::with_capacity(n);
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start: BFS twice from the component's min-degree node
        let mut comp_seed = seed;
        let mut probe_visited = visited.clone();
        bfs(comp_seed, &mut probe_visited, &mut level, &mut order);
        comp_seed = *order.last().unwrap();
        let mut probe_visited = visited.clone();
        bfs(comp_seed, &mut probe_visited, &mut level, &mut order);
        let start = *order.last().unwrap();

        bfs(start, &mut visited, &mut level, &mut order);
        perm.extend(order.iter().copied());
    }
    perm.reverse();
    perm
}

/// Sparse Cholesky factor A = L L^T of a permuted SPD matrix.
/// L is stored by columns with the diagonal entry first in each column.
pub struct CholeskyFactor {
    n: usize,
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Upper triangle of the permuted matrix in CSC form.
struct UpperCsc {
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

fn permuted_upper(a: &SymmetricSparse, iperm: &[usize]) -> UpperCsc {
    let n = a.n;
    let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(a.values.len() / 2 + n);
    for i in 0..n {
        for p in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.col_idx[p];
            let (ip, jp) = (iperm[i], iperm[j]);
            if ip <= jp {
                entries.push((jp, ip, a.values[p])); // keyed by column
            }
        }
    }
    entries.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    let mut col_ptr = vec![0usize; n + 1];
    let mut row_idx = Vec::with_capacity(entries.len());
    let mut values = Vec::with_capacity(entries.len());
    for &(c, r, v) in &entries {
        row_idx.push(r);
        values.push(v);
        col_ptr[c + 1] = row_idx.len();
    }
    for c in 1..=n {
        if col_ptr[c] < col_ptr[c - 1] {
            col_ptr[c] = col_ptr[c - 1];
        }
    }
    UpperCsc { col_ptr, row_idx, values }
}

/// Elimination tree of the upper-triangular pattern.
fn etree(up: &UpperCsc, n: usize) -> Vec<usize> {
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for p in up.col_ptr[k]..up.col_ptr[k + 1] {
            let mut i = up.row_idx[p];
            while i != NONE && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == NONE {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}

/// Nonzero pattern of row k of L: ascending path union in the elimination
/// tree. Fills `s[top..n]` and returns `top`.
fn ereach(
    up: &UpperCsc,
    k: usize,
    parent: &[usize],
    marks: &mut [usize],
    mark: usize,
    s: &mut [usize],
    tmp: &mut Vec<usize>,
) -> usize {
    let n = parent.len();
    marks[k] = mark;
    let mut top = n;
    for p in up.col_ptr[k]..up.col_ptr[k + 1] {
        let mut i = up.row_idx[p];
        if i >= k {
            continue;
        }
        tmp.clear();
        while marks[i] != mark {
            tmp.push(i);
            marks[i] = mark;
            i = parent[i];
            if i == NONE {
                break;
            }
        }
        for &node in tmp.iter().rev() {
            top -= 1;
            s[top] = node;
        }
    }
    top
}

/// Factor an SPD matrix. Fails with a numerical error on a nonpositive pivot.
pub fn cholesky(a: &SymmetricSparse) -> Result<CholeskyFactor> {
    let n = a.n;
    let perm = rcm_order(a);
    let mut iperm = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        iperm[old] = new;
    }
    let up = permuted_upper(a, &iperm);
    let parent = etree(&up, n);

    // symbolic pass: column counts of L
    let mut counts = vec![1usize; n]; // diagonal
    let mut marks = vec![NONE; n];
    let mut s = vec![0usize; n];
    let mut tmp = Vec::new();
    for k in 0..n {
        let top = ereach(&up, k, &parent, &mut marks, k, &mut s, &mut tmp);
        for &i in &s[top..n] {
            counts[i] += 1;
        }
    }
    let mut col_ptr = vec![0usize; n + 1];
    for i in 0..n {
        col_ptr[i + 1] = col_ptr[i] + counts[i];
    }
    let nnz = col_ptr[n];
    let mut row_idx = vec![0usize; nnz];
    let mut values = vec![0.0f64; nnz];
    let mut next = col_ptr[..n].to_vec();

    // numeric pass
    let mut marks = vec![NONE; n];
    let mut x = vec![0.0f64; n];
    for k in 0..n {
        let top = ereach(&up, k, &parent, &mut marks, k, &mut s, &mut tmp);
        let mut d = 0.0;
        for p in up.col_ptr[k]..up.col_ptr[k + 1] {
            let i = up.row_idx[p];
            if i < k {
                x[i] = up.values[p];
            } else if i == k {
                d = up.values[p];
            }
        }
        for idx in top..n {
            let i = s[idx];
            let lki = x[i] / values[col_ptr[i]];
            x[i] = 0.0;
            for p in (col_ptr[i] + 1)..next[i] {
                x[row_idx[p]] -= values[p] * lki;
            }
            d -= lki * lki;
            row_idx[next[i]] = k;
            values[next[i]] = lki;
            next[i] += 1;
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::Numerical(format!(
                "Cholesky pivot {d:.3e} at column {k}: matrix not positive definite"
            )));
        }
        row_idx[next[k]] = k;
        values[next[k]] = d.sqrt();
        next[k] += 1;
    }

    Ok(CholeskyFactor { n, perm, col_ptr, row_idx, values })
}

impl CholeskyFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        // forward: L z = P b
        let mut z = vec![0.0f64; n];
        for r in 0..n {
            z[r] = b[self.perm[r]];
        }
        for j in 0..n {
            let zj = z[j] / self.values[self.col_ptr[j]];
            z[j] = zj;
            for p in (self.col_ptr[j] + 1)..self.col_ptr[j + 1] {
                z[self.row_idx[p]] -= self.values[p] * zj;
            }
        }
        // backward: L^T w = z
        for j in (0..n).rev() {
            let mut acc = z[j];
            for p in (self.col_ptr[j] + 1)..self.col_ptr[j + 1] {
                acc -= self.values[p] * z[self.row_idx[p]];
            }
            z[j] = acc / self.values[self.col_ptr[j]];
        }
        // unpermute
        let mut out = vec![0.0f64; n];
        for r in 0..n {
            out[self.perm[r]] = z[r];
        }
        out
    }
}

/// SPD solver for a semidefinite matrix with constant kernel, made definite
/// by pinning unknown 0. Solutions are shifted to weighted mean zero and
/// verified against the unpinned matrix.
pub struct PinnedSolver {
    full: SymmetricSparse,
    factor: CholeskyFactor,
    weights: Vec<f64>,
    weight_total: f64,
}

impl PinnedSolver {
    /// `triplets` assemble the full semidefinite matrix; `weights` define the
    /// mean normalization (and must be positive).
    pub fn new(n: usize, triplets: &[(usize, usize, f64)], weights: Vec<f64>) -> Result<Self> {
        assert_eq!(weights.len(), n);
        let full = SymmetricSparse::from_triplets(n, triplets);
        let pinned: Vec<(usize, usize, f64)> = triplets
            .iter()
            .copied()
            .filter(|&(i, j, _)| i != 0 && j != 0)
            .chain(std::iter::once((0, 0, 1.0)))
            .collect();
        let factor = cholesky(&SymmetricSparse::from_triplets(n, &pinned))?;
        let weight_total = weights.iter().sum();
        Ok(PinnedSolver { full, factor, weights, weight_total })
    }

    pub fn n(&self) -> usize {
        self.full.n
    }

    /// Solve A x = b for compatible b (sum zero), returning the solution with
    /// weighted mean zero. `max_residual` is the relative residual contract.
    pub fn solve_mean_zero(&self, b: &[f64], max_residual: f64) -> Result<Vec<f64>> {
        let sum: f64 = b.iter().sum();
        let scale = b.iter().map(|v| v.abs()).sum::<f64>().max(1e-300);
        if sum.abs() > 1e-10 * scale {
            return Err(Error::Precondition(format!(
                "right-hand side not balanced: sum {sum:.3e} vs scale {scale:.3e}"
            )));
        }
        let mut bp = b.to_vec();
        bp[0] = 0.0;
        let mut x = self.factor.solve(&bp);
        let mean: f64 =
            x.iter().zip(&self.weights).map(|(xi, wi)| xi * wi).sum::<f64>() / self.weight_total;
        for xi in x.iter_mut() {
            *xi -= mean;
        }
        let res = self.full.relative_residual(&x, b);
        if res > max_residual {
            return Err(Error::Numerical(format!(
                "linear solve residual {res:.3e} exceeds contract {max_residual:.1e}"
            )));
        }
        Ok(x)
    }
}
