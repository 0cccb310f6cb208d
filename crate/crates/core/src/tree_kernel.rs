//! Reduced Laplacians, their log-determinants (the weighted matrix-tree
//! theorem) and the derivative matrix `M = d log|Q| / d beta`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::KernelError;
use crate::linalg;

/// Number of unordered pairs `{u, v}`, `u != v`, on `dim` nodes.
#[inline]
pub const fn pair_count(dim: usize) -> usize {
    dim * dim.saturating_sub(1) / 2
}

/// Packed index of the unordered pair `{u, v}` (`u != v`).
#[inline]
pub fn pair_index(dim: usize, u: usize, v: usize) -> usize {
    debug_assert!(u != v && u < dim && v < dim);
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    a * (2 * dim - a - 1) / 2 + (b - a - 1)
}

/// Symmetric `dim x dim` matrix with an implicit zero diagonal, stored as
/// its strict upper triangle.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairMatrix {
    dim: usize,
    values: Vec<f64>,
}

impl PairMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, values: vec![0.0; pair_count(dim)] }
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        Self { dim, values: vec![value; pair_count(dim)] }
    }

    /// Wraps packed upper-triangle values; `None` if the length is wrong.
    pub fn from_packed(dim: usize, values: Vec<f64>) -> Option<Self> {
        (values.len() == pair_count(dim)).then_some(Self { dim, values })
    }

    /// Reads the strict upper triangle of a row-major dense matrix. Returns
    /// `None` unless the matrix is square, symmetric and zero on the diagonal.
    pub fn from_dense(dense: &[f64], dim: usize) -> Option<Self> {
        if dense.len() != dim * dim {
            return None;
        }
        let mut out = Self::zeros(dim);
        for u in 0..dim {
            if dense[u * dim + u] != 0.0 {
                return None;
            }
            for v in u + 1..dim {
                let x = dense[u * dim + v];
                if x != dense[v * dim + u] {
                    return None;
                }
                out.set(u, v, x);
            }
        }
        Some(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        if u == v {
            0.0
        } else {
            self.values[pair_index(self.dim, u, v)]
        }
    }

    pub fn set(&mut self, u: usize, v: usize, x: f64) {
        assert!(u != v, "diagonal entries are fixed at zero");
        let i = pair_index(self.dim, u, v);
        self.values[i] = x;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for u in 0..d {
            for v in u + 1..d {
                let x = self.get(u, v);
                out[u * d + v] = x;
                out[v * d + u] = x;
            }
        }
        out
    }

    /// Iterates `(u, v, value)` over `u < v`.
    pub fn iter_pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let d = self.dim;
        (0..d).flat_map(move |u| (u + 1..d).map(move |v| (u, v, self.get(u, v))))
    }
}

/// Structural edge weights: symmetric, nonnegative, zero diagonal.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdgeWeights(PairMatrix);

impl EdgeWeights {
    pub fn zeros(dim: usize) -> Self {
        Self(PairMatrix::zeros(dim))
    }

    pub fn new(matrix: PairMatrix) -> Result<Self, KernelError> {
        if let Some(x) = matrix.values.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(KernelError::InvalidWeight(*x));
        }
        Ok(Self(matrix))
    }

    pub fn from_packed(dim: usize, values: Vec<f64>) -> Result<Self, KernelError> {
        let m = PairMatrix::from_packed(dim, values).ok_or(KernelError::DimensionMismatch)?;
        Self::new(m)
    }

    pub fn from_dense(dense: &[f64], dim: usize) -> Result<Self, KernelError> {
        let m = PairMatrix::from_dense(dense, dim).ok_or(KernelError::NotSymmetric)?;
        Self::new(m)
    }

    /// Builds weights from a closure over `u < v`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self, KernelError> {
        let mut m = PairMatrix::zeros(dim);
        for u in 0..dim {
            for v in u + 1..dim {
                m.set(u, v, f(u, v));
            }
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.0.get(u, v)
    }

    pub fn values(&self) -> &[f64] {
        &self.0.values
    }

    pub fn as_matrix(&self) -> &PairMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> PairMatrix {
        self.0
    }
}

/// Reduced Laplacian of a node block: the Laplacian of the restricted weights
/// with the row and column of `removed` deleted.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    /// Nodes indexing the rows/columns, in order.
    pub kept: Vec<usize>,
    pub removed: Option<usize>,
    /// Row-major `kept.len()^2` entries.
    pub values: Vec<f64>,
}

impl QMatrix {
    pub fn order(&self) -> usize {
        self.kept.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.kept.len() + j]
    }
}

/// Gradient of `log|Q|` with respect to every in-block edge weight.
#[derive(Debug, Clone, PartialEq)]
pub struct MMatrix {
    pub nodes: Vec<usize>,
    pub removed: usize,
    /// Row-major `nodes.len()^2`, zero diagonal.
    pub values: Vec<f64>,
}

impl MMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nodes.len() + j]
    }
}

/// Builds `Q` for `nodes` with node `removed` deleted. A singleton block
/// yields the empty matrix.
pub fn q_matrix(beta: &EdgeWeights, nodes: &[usize], removed: usize) -> QMatrix {
    assert!(nodes.contains(&removed), "removed node must belong to the block");
    let kept: Vec<usize> = nodes.iter().copied().filter(|&x| x != removed).collect();
    let m = kept.len();
    let mut values = vec![0.0; m * m];
    for (i, &u) in kept.iter().enumerate() {
        let mut diag = 0.0;
        for &v in nodes {
            if v != u {
                diag += beta.get(u, v);
            }
        }
        values[i * m + i] = diag;
        for (j, &v) in kept.iter().enumerate() {
            if i != j {
                values[i * m + j] = -beta.get(u, v);
            }
        }
    }
    QMatrix { kept, removed: Some(removed), values }
}

fn sorted_block(nodes: &[usize]) -> Vec<usize> {
    let mut block = nodes.to_vec();
    block.sort_unstable();
    block.dedup();
    block
}

/// `log|Q(beta_nodes)|`, or `None` (SINGULAR) when the support graph
/// restricted to `nodes` is disconnected. Singletons and the empty set give 0.
pub fn log_det_q(beta: &EdgeWeights, nodes: &[usize]) -> Option<f64> {
    let block = sorted_block(nodes);
    let mut kernel = BlockKernel::default();
    kernel.factor(beta.dim(), &block, beta.values(), None)
}

/// The M matrix of a connected block, with the highest-indexed node removed.
pub fn m_matrix(beta: &EdgeWeights, nodes: &[usize]) -> Result<MMatrix, KernelError> {
    let block = sorted_block(nodes);
    let m = block.len();
    let removed = *block.last().ok_or(KernelError::EmptyBlock)?;
    let mut kernel = BlockKernel::default();
    kernel
        .factor(beta.dim(), &block, beta.values(), None)
        .ok_or(KernelError::SingularComponent)?;
    let inv = kernel.inverse(m.saturating_sub(1));
    let mut values = vec![0.0; m * m];
    for a in 0..m {
        for b in a + 1..m {
            let x = m_entry(inv, m - 1, a, b);
            values[a * m + b] = x;
            values[b * m + a] = x;
        }
    }
    Ok(MMatrix { nodes: block, removed, values })
}

/// `M_ab` for block positions `a < b`; position `r = m - 1` is the removed node.
#[inline]
fn m_entry(inv: &[f64], r: usize, a: usize, b: usize) -> f64 {
    if b == r {
        inv[a * r + a]
    } else {
        inv[a * r + a] + inv[b * r + b] - 2.0 * inv[a * r + b]
    }
}

/// Largest block accepted by [`brute_force_tree_sum`].
pub const MAX_ENUMERATION_NODES: usize = 8;

/// Sum over all spanning trees of the block of the product of edge weights,
/// by direct enumeration of `(m-1)`-edge subsets.
pub fn brute_force_tree_sum(beta: &EdgeWeights, nodes: &[usize]) -> Result<f64, KernelError> {
    let block = sorted_block(nodes);
    let m = block.len();
    if m > MAX_ENUMERATION_NODES {
        return Err(KernelError::TooLarge { nodes: m, limit: MAX_ENUMERATION_NODES });
    }
    if m <= 1 {
        return Ok(1.0);
    }
    let mut edges = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            edges.push((a, b, beta.get(block[a], block[b])));
        }
    }
    let mut total = 0.0;
    let mut chosen = Vec::with_capacity(m - 1);
    enumerate_trees(&edges, 0, m, &mut chosen, &mut total);
    Ok(total)
}

fn enumerate_trees(
    edges: &[(usize, usize, f64)],
    start: usize,
    m: usize,
    chosen: &mut Vec<usize>,
    total: &mut f64,
) {
    if chosen.len() == m - 1 {
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            r
        }
        let mut product = 1.0;
        for &e in chosen.iter() {
            let (a, b, w) = edges[e];
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return;
            }
            parent[ra] = rb;
            product *= w;
        }
        *total += product;
        return;
    }
    let needed = m - 1 - chosen.len();
    for e in start..edges.len() {
        if edges.len() - e < needed {
            break;
        }
        chosen.push(e);
        enumerate_trees(edges, e + 1, m, chosen, total);
        chosen.pop();
    }
}

/// Reusable workspace for factorizing reduced Laplacians of node blocks
/// under weights `beta` (optionally multiplied by a per-sample potential).
#[derive(Debug, Default, Clone)]
pub(crate) struct BlockKernel {
    q: Vec<f64>,
    inv: Vec<f64>,
    scratch: Vec<f64>,
}

impl BlockKernel {
    /// Factorizes `Q` for a sorted block (last node removed) and returns
    /// `log|Q|`. The Cholesky factor stays in the workspace.
    pub(crate) fn factor(
        &mut self,
        dim: usize,
        block: &[usize],
        beta: &[f64],
        potential: Option<&[f64]>,
    ) -> Option<f64> {
        let m = block.len();
        if m <= 1 {
            return Some(0.0);
        }
        let r = m - 1;
        self.q.clear();
        self.q.resize(r * r, 0.0);
        let q = &mut self.q;
        for a in 0..m {
            let u = block[a];
            for b in a + 1..m {
                let p = pair_index(dim, u, block[b]);
                let w = match potential {
                    Some(pot) => beta[p] * pot[p],
                    None => beta[p],
                };
                if w == 0.0 {
                    continue;
                }
                q[a * r + a] += w;
                if b < r {
                    q[b * r + b] += w;
                    q[b * r + a] = -w;
                    q[a * r + b] = -w;
                }
            }
        }
        linalg::cholesky_in_place(q, r)?;
        Some(linalg::log_det_from_cholesky(q, r))
    }

    /// `Q^{-1}` of the last successful factorization of order `r`.
    pub(crate) fn inverse(&mut self, r: usize) -> &[f64] {
        self.inv.resize(r * r, 0.0);
        self.scratch.resize(r * r, 0.0);
        linalg::inverse_from_cholesky(&self.q, r, &mut self.scratch, &mut self.inv);
        &self.inv
    }

    /// After `factor`, adds `scale * w_p * M_p` into `out` for every in-block
    /// pair `p`, where `w_p` is the potential (1 when absent).
    pub(crate) fn accumulate_gradient(
        &mut self,
        dim: usize,
        block: &[usize],
        potential: Option<&[f64]>,
        scale: f64,
        out: &mut [f64],
    ) {
        let m = block.len();
        if m <= 1 {
            return;
        }
        let r = m - 1;
        let inv = self.inverse(r);
        for a in 0..m {
            let u = block[a];
            for b in a + 1..m {
                let p = pair_index(dim, u, block[b]);
                let mut g = m_entry(inv, r, a, b);
                if let Some(pot) = potential {
                    g *= pot[p];
                }
                out[p] += scale * g;
            }
        }
    }
}
