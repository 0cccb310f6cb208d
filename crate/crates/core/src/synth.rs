//! Synthetic ground-truth graphs, data generators and recovery metrics.

use alloc::vec;
use alloc::vec::Vec;

use libm::{round, sqrt};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, StandardNormal};

use crate::data::DataMatrix;
use crate::error::SynthError;
use crate::graph::Adjacency;
use crate::linalg;
use crate::special::{norm_quantile, t_tail};
use crate::tree_kernel::EdgeWeights;

/// Magnitude of off-diagonal precision entries in the GMRF generator.
pub const GMRF_EDGE_STRENGTH: f64 = 0.3;
/// Diagonal margin added on top of the absolute row sum.
pub const GMRF_DIAGONAL_MARGIN: f64 = 0.1;
/// Within-clique correlation of the t-copula generator.
pub const CLIQUE_CORRELATION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GraphKind {
    Random { avg_degree: f64, components: usize },
    Cliques { sizes: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroundTruthGraph {
    pub adjacency: Adjacency,
    pub labels: Vec<usize>,
    pub kind: GraphKind,
    pub seed: u64,
}

impl GroundTruthGraph {
    pub fn dim(&self) -> usize {
        self.adjacency.dim()
    }

    pub fn component_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m + 1)
    }

    /// Node lists of the true components.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.component_count()];
        for (u, &l) in self.labels.iter().enumerate() {
            blocks[l].push(u);
        }
        blocks
    }
}

/// Sizes of `parts` consecutive blocks covering `dim` nodes, the larger
/// blocks first.
pub fn even_blocks(dim: usize, parts: usize) -> Vec<usize> {
    (0..parts).map(|i| dim / parts + usize::from(i < dim % parts)).collect()
}

/// Integer shares of `total` proportional to `weights` (largest remainder,
/// earlier entries win ties).
fn largest_remainder(total: usize, weights: &[usize]) -> Vec<usize> {
    let sum: usize = weights.iter().sum();
    let mut shares: Vec<usize> = weights.iter().map(|&w| total * w / sum).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by_key(|&i| (core::cmp::Reverse(total * weights[i] % sum), i));
    let mut left = total - shares.iter().sum::<usize>();
    for i in order {
        if left == 0 {
            break;
        }
        shares[i] += 1;
        left -= 1;
    }
    shares
}

/// Random graph with `round(dim * avg_degree / 2)` edges spread over
/// `components` consecutive node blocks, each block connected.
pub fn gen_graph(dim: usize, avg_degree: f64, components: usize, seed: u64) -> Result<GroundTruthGraph, SynthError> {
    if dim < 2 {
        return Err(SynthError::InvalidParameter("need at least 2 nodes"));
    }
    if components == 0 || components > dim {
        return Err(SynthError::InvalidParameter("component count must lie in 1..=d"));
    }
    if !(avg_degree >= 0.0 && avg_degree.is_finite()) {
        return Err(SynthError::InvalidParameter("average degree must be nonnegative"));
    }
    let total = round(dim as f64 * avg_degree / 2.0) as usize;
    let sizes = even_blocks(dim, components);
    let shares = largest_remainder(total, &sizes);
    for (&m, &e) in sizes.iter().zip(&shares) {
        if e + 1 < m || e > m * (m - 1) / 2 {
            return Err(SynthError::InfeasibleDegree { avg_degree, block: m });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adjacency = Adjacency::empty(dim);
    let mut labels = vec![0; dim];
    let mut start = 0;
    for (b, (&m, &e)) in sizes.iter().zip(&shares).enumerate() {
        let nodes: Vec<usize> = (start..start + m).collect();
        for &u in &nodes {
            labels[u] = b;
        }
        for (u, v) in random_tree(m, &mut rng) {
            adjacency.set(nodes[u], nodes[v], true);
        }
        let mut spare: Vec<(usize, usize)> = Vec::new();
        for a in 0..m {
            for c in a + 1..m {
                if !adjacency.has_edge(nodes[a], nodes[c]) {
                    spare.push((nodes[a], nodes[c]));
                }
            }
        }
        spare.shuffle(&mut rng);
        for &(u, v) in spare.iter().take(e + 1 - m) {
            adjacency.set(u, v, true);
        }
        start += m;
    }
    Ok(GroundTruthGraph { adjacency, labels, kind: GraphKind::Random { avg_degree, components }, seed })
}

/// Uniform random labelled tree on `m` nodes from a Prüfer sequence.
fn random_tree<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<(usize, usize)> {
    if m < 2 {
        return Vec::new();
    }
    if m == 2 {
        return vec![(0, 1)];
    }
    let code: Vec<usize> = (0..m - 2).map(|_| rng.random_range(0..m)).collect();
    let mut degree = vec![1usize; m];
    for &c in &code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(m - 1);
    for &c in &code {
        let leaf = (0..m).find(|&u| degree[u] == 1).expect("a leaf exists");
        edges.push((leaf.min(c), leaf.max(c)));
        degree[leaf] -= 1;
        degree[c] -= 1;
    }
    let rest: Vec<usize> = (0..m).filter(|&u| degree[u] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Draws an ordered composition of `dim` into parts from `allowed`,
/// uniformly among all such compositions.
pub fn sample_clique_sizes(dim: usize, allowed: &[usize], seed: u64) -> Result<Vec<usize>, SynthError> {
    if allowed.is_empty() || allowed.contains(&0) {
        return Err(SynthError::InvalidParameter("clique sizes must be positive"));
    }
    // counts[r] = number of compositions of r.
    let mut counts = vec![0.0f64; dim + 1];
    counts[0] = 1.0;
    for r in 1..=dim {
        counts[r] = allowed.iter().filter(|&&s| s <= r).map(|&s| counts[r - s]).sum();
    }
    if counts[dim] == 0.0 {
        return Err(SynthError::SizeMismatch { expected: dim, got: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sizes = Vec::new();
    let mut left = dim;
    while left > 0 {
        let mut x = rng.random::<f64>() * counts[left];
        let mut pick = None;
        for &s in allowed {
            if s > left || counts[left - s] == 0.0 {
                continue;
            }
            pick = Some(s);
            if x < counts[left - s] {
                break;
            }
            x -= counts[left - s];
        }
        let s = pick.expect("a feasible part exists");
        sizes.push(s);
        left -= s;
    }
    Ok(sizes)
}

/// Disjoint cliques on consecutive node blocks of the given sizes.
pub fn gen_clique_graph(dim: usize, sizes: &[usize], seed: u64) -> Result<GroundTruthGraph, SynthError> {
    let got: usize = sizes.iter().sum();
    if got != dim || sizes.contains(&0) {
        return Err(SynthError::SizeMismatch { expected: dim, got });
    }
    let mut adjacency = Adjacency::empty(dim);
    let mut labels = vec![0; dim];
    let mut start = 0;
    for (b, &m) in sizes.iter().enumerate() {
        for u in start..start + m {
            labels[u] = b;
            for v in u + 1..start + m {
                adjacency.set(u, v, true);
            }
        }
        start += m;
    }
    Ok(GroundTruthGraph { adjacency, labels, kind: GraphKind::Cliques { sizes: sizes.to_vec() }, seed })
}

/// Precision matrix (row-major) with `±0.3` on the edges and a diagonally
/// dominant diagonal.
pub fn gmrf_precision(graph: &GroundTruthGraph, seed: u64) -> Vec<f64> {
    let d = graph.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut k = vec![0.0; d * d];
    for (u, v) in graph.adjacency.edges() {
        let x = if rng.random_bool(0.5) { GMRF_EDGE_STRENGTH } else { -GMRF_EDGE_STRENGTH };
        k[u * d + v] = x;
        k[v * d + u] = x;
    }
    for u in 0..d {
        let row: f64 = (0..d).map(|v| k[u * d + v].abs()).sum();
        k[u * d + u] = row + GMRF_DIAGONAL_MARGIN;
    }
    k
}

/// `n` samples of the zero-mean Gaussian with precision [`gmrf_precision`].
pub fn gen_gmrf_data(graph: &GroundTruthGraph, n: usize, seed: u64) -> DataMatrix {
    let d = graph.dim();
    let mut l = gmrf_precision(graph, seed);
    linalg::cholesky_in_place(&mut l, d).expect("diagonally dominant precision is positive definite");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut values = Vec::with_capacity(n * d);
    let mut z = vec![0.0; d];
    for _ in 0..n {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        // K = L L^T, so x = L^{-T} z has covariance K^{-1}.
        linalg::solve_upper_transposed(&l, d, &mut z);
        values.extend_from_slice(&z);
    }
    DataMatrix::new(n, d, values).expect("shape is consistent")
}

/// Per component, an equicorrelated Student's t-copula sample mapped to
/// standard normal margins.
pub fn gen_tclique_data(graph: &GroundTruthGraph, n: usize, df: f64, seed: u64) -> Result<DataMatrix, SynthError> {
    if !(df > 0.0 && df.is_finite()) {
        return Err(SynthError::InvalidParameter("degrees of freedom must be positive"));
    }
    let d = graph.dim();
    let blocks = graph.components();
    let chi = ChiSquared::new(df).map_err(|_| SynthError::InvalidParameter("degrees of freedom"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; n * d];
    let shared = sqrt(CLIQUE_CORRELATION);
    let own = sqrt(1.0 - CLIQUE_CORRELATION);
    for j in 0..n {
        for block in &blocks {
            let z0: f64 = rng.sample(StandardNormal);
            let s: f64 = rng.sample(chi);
            let scale = 1.0 / sqrt(s / df);
            for &u in block {
                let e: f64 = rng.sample(StandardNormal);
                let z = if block.len() > 1 { shared * z0 + own * e } else { e };
                values[j * d + u] = t_to_normal(z * scale, df);
            }
        }
    }
    Ok(DataMatrix::new(n, d, values).expect("shape is consistent"))
}

/// `Phi^{-1}(T_df(t))` evaluated through the lower tail for accuracy.
fn t_to_normal(t: f64, df: f64) -> f64 {
    let tail = t_tail(t, df).max(f64::MIN_POSITIVE);
    let x = norm_quantile(tail);
    if t > 0.0 {
        -x
    } else {
        x
    }
}

/// Edge recovery scores of one estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoreEntry {
    pub hamming: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub inter_cluster_false_positives: usize,
    pub precision: f64,
    pub recall: f64,
}

pub fn score(estimate: &Adjacency, truth: &GroundTruthGraph) -> Result<ScoreEntry, SynthError> {
    if estimate.dim() != truth.dim() {
        return Err(SynthError::DimensionMismatch);
    }
    let (mut tp, mut fp, mut fn_, mut inter) = (0, 0, 0, 0);
    let d = truth.dim();
    for u in 0..d {
        for v in u + 1..d {
            match (estimate.has_edge(u, v), truth.adjacency.has_edge(u, v)) {
                (true, true) => tp += 1,
                (true, false) => {
                    fp += 1;
                    if truth.labels[u] != truth.labels[v] {
                        inter += 1;
                    }
                }
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    let precision = if tp + fp == 0 { 1.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { 1.0 } else { tp as f64 / (tp + fn_) as f64 };
    Ok(ScoreEntry {
        hamming: fp + fn_,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        inter_cluster_false_positives: inter,
        precision,
        recall,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RocPoint {
    pub threshold: f64,
    pub fdr: f64,
    pub true_positives: usize,
    pub false_positives: usize,
}

/// Sweeps a threshold down the sorted `beta` entries (ties as one block)
/// and records `(FDR, TP)` after each block, stopping before the first
/// block whose FDR exceeds `fdr_cap`.
pub fn roc_curve(beta: &EdgeWeights, truth: &GroundTruthGraph, fdr_cap: f64) -> Result<Vec<RocPoint>, SynthError> {
    if beta.dim() != truth.dim() {
        return Err(SynthError::DimensionMismatch);
    }
    if !(fdr_cap > 0.0 && fdr_cap <= 1.0) {
        return Err(SynthError::InvalidParameter("fdr cap must lie in (0, 1]"));
    }
    let d = beta.dim();
    let mut entries: Vec<(f64, bool)> = Vec::with_capacity(beta.values().len());
    for u in 0..d {
        for v in u + 1..d {
            entries.push((beta.get(u, v), truth.adjacency.has_edge(u, v)));
        }
    }
    entries.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut curve = Vec::new();
    let (mut tp, mut fp) = (0, 0);
    let mut i = 0;
    while i < entries.len() {
        let t = entries[i].0;
        while i < entries.len() && entries[i].0 == t {
            if entries[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let fdr = fp as f64 / (tp + fp) as f64;
        if fdr > fdr_cap {
            break;
        }
        curve.push(RocPoint { threshold: t, fdr, true_positives: tp, false_positives: fp });
    }
    Ok(curve)
}

/// Most true edges recovered on a truncated curve.
pub fn recovered_edges(curve: &[RocPoint]) -> usize {
    curve.iter().map(|p| p.true_positives).max().unwrap_or(0)
}

/// Scores of one repetition of a benchmark scenario.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BenchmarkResult {
    pub repetition: usize,
    pub samples: usize,
    pub score: ScoreEntry,
    pub roc: Vec<RocPoint>,
}
