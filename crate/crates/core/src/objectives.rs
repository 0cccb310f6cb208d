//! Negative log-likelihoods and gradients of the tree and forest ensembles.
//!
//! All objectives take `beta` as packed pair weights and per-sample edge
//! potentials. Gradients are packed the same way, one entry per unordered
//! pair, so `grad[p] = d f / d beta_p` treating each edge as one variable.

use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, log};

use crate::error::{KernelError, ObjectiveError};
use crate::graph::component_labels;
use crate::tree_kernel::{pair_count, pair_index, BlockKernel, EdgeWeights, PairMatrix};

/// Largest node count accepted by [`exact_ef_nll`].
pub const MAX_EXACT_NODES: usize = 8;

/// Edge potentials `w_uv(x_j)` for every sample `j`, packed per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTensor {
    samples: usize,
    dim: usize,
    values: Vec<f64>,
}

impl PotentialTensor {
    /// `values` holds `samples` consecutive packed pair vectors; every entry
    /// must be positive and finite.
    pub fn new(samples: usize, dim: usize, values: Vec<f64>) -> Result<Self, ObjectiveError> {
        if values.len() != samples * pair_count(dim) {
            return Err(ObjectiveError::DimensionMismatch);
        }
        if let Some(&bad) = values.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(KernelError::InvalidWeight(bad).into());
        }
        Ok(Self { samples, dim, values })
    }

    /// The independence potentials `w = 1`.
    pub fn ones(samples: usize, dim: usize) -> Self {
        Self { samples, dim, values: vec![1.0; samples * pair_count(dim)] }
    }

    pub fn from_fn(
        samples: usize,
        dim: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self, ObjectiveError> {
        let mut values = Vec::with_capacity(samples * pair_count(dim));
        for j in 0..samples {
            for u in 0..dim {
                for v in u + 1..dim {
                    values.push(f(j, u, v));
                }
            }
        }
        Self::new(samples, dim, values)
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, sample: usize, u: usize, v: usize) -> f64 {
        self.sample(sample)[pair_index(self.dim, u, v)]
    }

    /// Packed potentials of one sample.
    pub fn sample(&self, sample: usize) -> &[f64] {
        let p = pair_count(self.dim);
        &self.values[sample * p..(sample + 1) * p]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn select_samples(&self, samples: &[usize]) -> Self {
        let mut values = Vec::with_capacity(samples.len() * pair_count(self.dim));
        for &j in samples {
            values.extend_from_slice(self.sample(j));
        }
        Self { samples: samples.len(), dim: self.dim, values }
    }
}

/// Block label per node. Labels are `0..block_count`; empty blocks allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NodePartition {
    labels: Vec<usize>,
    block_count: usize,
}

impl NodePartition {
    pub fn new(labels: Vec<usize>, block_count: usize) -> Option<Self> {
        labels.iter().all(|&l| l < block_count).then_some(Self { labels, block_count })
    }

    pub fn single_block(dim: usize) -> Self {
        Self { labels: vec![0; dim], block_count: usize::from(dim > 0) }
    }

    pub fn singletons(dim: usize) -> Self {
        Self { labels: (0..dim).collect(), block_count: dim }
    }

    /// Blocks given as node lists; every node must appear exactly once.
    pub fn from_blocks(dim: usize, blocks: &[Vec<usize>]) -> Option<Self> {
        let mut labels = vec![usize::MAX; dim];
        for (i, block) in blocks.iter().enumerate() {
            for &u in block {
                if u >= dim || labels[u] != usize::MAX {
                    return None;
                }
                labels[u] = i;
            }
        }
        labels.iter().all(|&l| l != usize::MAX).then_some(Self { labels, block_count: blocks.len() })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    /// Number of non-empty blocks.
    pub fn component_count(&self) -> usize {
        self.blocks().iter().filter(|b| !b.is_empty()).count()
    }

    /// Node lists per block, each sorted ascending.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.block_count];
        for (u, &l) in self.labels.iter().enumerate() {
            blocks[l].push(u);
        }
        blocks
    }

    pub fn same_block(&self, u: usize, v: usize) -> bool {
        self.labels[u] == self.labels[v]
    }
}

/// A bipartition `(A, B)` of the nodes with its crossing weight. Side `A`
/// always holds node 0; the trivial cut has `B` empty.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GraphCut {
    side_a: Vec<usize>,
    side_b: Vec<usize>,
    weight: f64,
}

impl GraphCut {
    pub fn trivial(dim: usize) -> Self {
        Self { side_a: (0..dim).collect(), side_b: Vec::new(), weight: 0.0 }
    }

    /// Cut with `B = {u : in_b[u]}`; sides are swapped if needed so node 0
    /// stays in `A`.
    pub fn from_mask(in_b: &[bool], beta: &EdgeWeights) -> Self {
        let flip = in_b.first().copied().unwrap_or(false);
        let mut side_a = Vec::new();
        let mut side_b = Vec::new();
        for (u, &b) in in_b.iter().enumerate() {
            if b != flip {
                side_b.push(u);
            } else {
                side_a.push(u);
            }
        }
        let weight = crossing_weight(&side_a, &side_b, beta);
        Self { side_a, side_b, weight }
    }

    /// Builds a cut from `B`; `A` is the complement.
    pub fn from_side(dim: usize, side_b: &[usize], beta: &EdgeWeights) -> Self {
        let mut mask = vec![false; dim];
        for &u in side_b {
            mask[u] = true;
        }
        Self::from_mask(&mask, beta)
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[usize] {
        &self.side_b
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.side_a.len() + self.side_b.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.side_b.is_empty()
    }

    /// The smaller side (the lexicographically smaller one on equal sizes).
    pub fn smaller_side(&self) -> &[usize] {
        let (a, b) = (&self.side_a, &self.side_b);
        if b.len() < a.len() || (b.len() == a.len() && b < a) {
            b
        } else {
            a
        }
    }

    /// Membership mask of side `B`.
    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.dim()];
        for &u in &self.side_b {
            mask[u] = true;
        }
        mask
    }
}

fn crossing_weight(a: &[usize], b: &[usize], beta: &EdgeWeights) -> f64 {
    let mut w = 0.0;
    for &u in a {
        for &v in b {
            w += beta.get(u, v);
        }
    }
    w
}

/// Components of the graph with edges `{beta_uv > threshold}`. Blocks are
/// numbered in order of their smallest node.
pub fn connected_components(beta: &EdgeWeights, threshold: f64) -> NodePartition {
    components_of(beta.dim(), beta.values(), threshold)
}

pub(crate) fn components_of(dim: usize, beta: &[f64], threshold: f64) -> NodePartition {
    let edges = (0..dim)
        .flat_map(|u| (u + 1..dim).map(move |v| (u, v)))
        .filter(|&(u, v)| beta[pair_index(dim, u, v)] > threshold);
    let labels = component_labels(dim, edges);
    let block_count = labels.iter().max().map_or(0, |&m| m + 1);
    NodePartition { labels, block_count }
}

/// `log sum_i exp(x_i)` over finite entries; `-inf` when none.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    let s: f64 = xs.iter().map(|&x| exp(x - m)).sum();
    m + log(s)
}

fn check_dims(beta: &EdgeWeights, w: &PotentialTensor) -> Result<(), ObjectiveError> {
    if beta.dim() != w.dim() {
        Err(ObjectiveError::DimensionMismatch)
    } else {
        Ok(())
    }
}

/// `N log|Q(beta_B)| - sum_j log|Q(beta w_j)_B|` for one block, adding its
/// gradient into `grad` when given. `None` when the block is singular.
fn block_nll(
    kernel: &mut BlockKernel,
    block: &[usize],
    beta: &[f64],
    w: &PotentialTensor,
    mut grad: Option<&mut [f64]>,
) -> Option<f64> {
    if block.len() <= 1 {
        return Some(0.0);
    }
    let dim = w.dim();
    let n = w.samples() as f64;
    let mut value = n * kernel.factor(dim, block, beta, None)?;
    if let Some(g) = grad.as_deref_mut() {
        kernel.accumulate_gradient(dim, block, None, n, g);
    }
    for j in 0..w.samples() {
        let wj = w.sample(j);
        value -= kernel.factor(dim, block, beta, Some(wj))?;
        if let Some(g) = grad.as_deref_mut() {
            kernel.accumulate_gradient(dim, block, Some(wj), -1.0, g);
        }
    }
    Some(value)
}

/// Reusable evaluator of the EF-λ objective for a fixed partition. With a
/// single block and `lambda = 0` it is the ET objective.
#[derive(Debug, Clone)]
pub struct EfLambdaProblem<'a> {
    potentials: &'a PotentialTensor,
    blocks: Vec<Vec<usize>>,
    lambda: f64,
    kernel: BlockKernel,
}

impl<'a> EfLambdaProblem<'a> {
    pub fn new(
        potentials: &'a PotentialTensor,
        partition: &NodePartition,
        lambda: f64,
    ) -> Result<Self, ObjectiveError> {
        if partition.dim() != potentials.dim() {
            return Err(ObjectiveError::DimensionMismatch);
        }
        Ok(Self { potentials, blocks: partition.blocks(), lambda, kernel: BlockKernel::default() })
    }

    pub fn dim(&self) -> usize {
        self.potentials.dim()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Penalized objective at packed `beta`; overwrites `grad` when given.
    /// Cross-block gradient entries are exactly 0.
    pub fn evaluate(&mut self, beta: &[f64], mut grad: Option<&mut [f64]>) -> Result<f64, ObjectiveError> {
        if beta.len() != pair_count(self.dim()) {
            return Err(ObjectiveError::DimensionMismatch);
        }
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        let mut value = 0.0;
        for (i, block) in self.blocks.iter().enumerate() {
            value += block_nll(&mut self.kernel, block, beta, self.potentials, grad.as_deref_mut())
                .ok_or(ObjectiveError::BlockDisconnected(i))?;
        }
        if self.lambda != 0.0 {
            value += 2.0 * self.lambda * beta.iter().sum::<f64>();
            if let Some(g) = grad {
                let dim = self.dim();
                for block in &self.blocks {
                    for (a, &u) in block.iter().enumerate() {
                        for &v in &block[a + 1..] {
                            g[pair_index(dim, u, v)] += 2.0 * self.lambda;
                        }
                    }
                }
            }
        }
        Ok(value)
    }
}

/// ET negative log-likelihood `N log|Q(beta)| - sum_j log|Q(beta w_j)|`.
pub fn et_nll(beta: &EdgeWeights, w: &PotentialTensor) -> Result<f64, ObjectiveError> {
    et_eval(beta, w, None)
}

/// Gradient of [`et_nll`].
pub fn et_grad(beta: &EdgeWeights, w: &PotentialTensor) -> Result<PairMatrix, ObjectiveError> {
    let mut g = PairMatrix::zeros(beta.dim());
    et_eval(beta, w, Some(g.values_mut()))?;
    Ok(g)
}

fn et_eval(beta: &EdgeWeights, w: &PotentialTensor, grad: Option<&mut [f64]>) -> Result<f64, ObjectiveError> {
    check_dims(beta, w)?;
    let partition = NodePartition::single_block(beta.dim());
    let mut problem = EfLambdaProblem::new(w, &partition, 0.0)?;
    problem.evaluate(beta.values(), grad).map_err(|e| match e {
        ObjectiveError::BlockDisconnected(_) => ObjectiveError::DisconnectedSupport,
        other => other,
    })
}

/// EF-λ objective: per-block ET terms plus `lambda * sum_{u<v} 2 beta_uv`.
pub fn ef_lambda_objective(
    beta: &EdgeWeights,
    w: &PotentialTensor,
    partition: &NodePartition,
    lambda: f64,
) -> Result<f64, ObjectiveError> {
    check_dims(beta, w)?;
    EfLambdaProblem::new(w, partition, lambda)?.evaluate(beta.values(), None)
}

/// Gradient of [`ef_lambda_objective`]: within-block entries carry the block
/// gradient plus `2 lambda`; cross-block entries are 0.
pub fn ef_lambda_grad(
    beta: &EdgeWeights,
    w: &PotentialTensor,
    partition: &NodePartition,
    lambda: f64,
) -> Result<PairMatrix, ObjectiveError> {
    check_dims(beta, w)?;
    let mut g = PairMatrix::zeros(beta.dim());
    EfLambdaProblem::new(w, partition, lambda)?.evaluate(beta.values(), Some(g.values_mut()))?;
    Ok(g)
}

/// Reusable evaluator of the EF-cuts objective for a fixed cut list.
#[derive(Debug, Clone)]
pub struct EfCutsProblem<'a> {
    potentials: &'a PotentialTensor,
    cuts: Vec<GraphCut>,
    // Two kernels per cut, holding the factors of sides A and B.
    kernels: Vec<BlockKernel>,
    valid: Vec<usize>,
    log_terms: Vec<f64>,
}

impl<'a> EfCutsProblem<'a> {
    pub fn new(potentials: &'a PotentialTensor, cuts: &[GraphCut]) -> Result<Self, ObjectiveError> {
        if cuts.is_empty() {
            return Err(ObjectiveError::NoCuts);
        }
        if cuts.iter().any(|c| c.dim() != potentials.dim()) {
            return Err(ObjectiveError::DimensionMismatch);
        }
        Ok(Self {
            potentials,
            cuts: cuts.to_vec(),
            kernels: vec![BlockKernel::default(); 2 * cuts.len()],
            valid: Vec::with_capacity(cuts.len()),
            log_terms: Vec::with_capacity(cuts.len()),
        })
    }

    pub fn cuts(&self) -> &[GraphCut] {
        &self.cuts
    }

    /// Factors both sides of every listed cut, storing `log|Q_A| + log|Q_B|`
    /// in `log_terms`; cuts with a singular side get `-inf`.
    fn factor_cuts(&mut self, cut_ids: &[usize], beta: &[f64], potential: Option<&[f64]>) {
        let dim = self.potentials.dim();
        self.log_terms.clear();
        for &c in cut_ids {
            let cut = &self.cuts[c];
            let (ka, kb) = self.kernels[2 * c..2 * c + 2].split_at_mut(1);
            let term = match (
                ka[0].factor(dim, &cut.side_a, beta, potential),
                kb[0].factor(dim, &cut.side_b, beta, potential),
            ) {
                (Some(a), Some(b)) => a + b,
                _ => f64::NEG_INFINITY,
            };
            self.log_terms.push(term);
        }
    }

    /// Adds `scale * softmax(log_terms)_c * [w *] M` of both sides of each cut.
    fn accumulate(&mut self, cut_ids: &[usize], log_z: f64, potential: Option<&[f64]>, scale: f64, g: &mut [f64]) {
        let dim = self.potentials.dim();
        for (i, &c) in cut_ids.iter().enumerate() {
            let t = self.log_terms[i];
            if t == f64::NEG_INFINITY {
                continue;
            }
            let weight = scale * exp(t - log_z);
            if weight == 0.0 {
                continue;
            }
            let cut = &self.cuts[c];
            self.kernels[2 * c].accumulate_gradient(dim, &cut.side_a, potential, weight, g);
            self.kernels[2 * c + 1].accumulate_gradient(dim, &cut.side_b, potential, weight, g);
        }
    }

    /// Objective at packed `beta`; overwrites `grad` when given.
    pub fn evaluate(&mut self, beta: &[f64], mut grad: Option<&mut [f64]>) -> Result<f64, ObjectiveError> {
        let w = self.potentials;
        if beta.len() != pair_count(w.dim()) {
            return Err(ObjectiveError::DimensionMismatch);
        }
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        let all: Vec<usize> = (0..self.cuts.len()).collect();
        self.factor_cuts(&all, beta, None);
        let valid: Vec<usize> = all
            .iter()
            .zip(&self.log_terms)
            .filter(|(_, &t)| t > f64::NEG_INFINITY)
            .map(|(&c, _)| c)
            .collect();
        if valid.is_empty() {
            return Err(ObjectiveError::AllCutsSingular);
        }
        self.log_terms.retain(|&t| t > f64::NEG_INFINITY);
        let n = w.samples() as f64;
        let log_z = log_sum_exp(&self.log_terms);
        let mut value = n * log_z;
        if let Some(g) = grad.as_deref_mut() {
            self.accumulate(&valid, log_z, None, n, g);
        }
        for j in 0..w.samples() {
            let wj = w.sample(j);
            self.factor_cuts(&valid, beta, Some(wj));
            let log_zj = log_sum_exp(&self.log_terms);
            if log_zj == f64::NEG_INFINITY {
                return Err(ObjectiveError::AllCutsSingular);
            }
            value -= log_zj;
            if let Some(g) = grad.as_deref_mut() {
                self.accumulate(&valid, log_zj, Some(wj), -1.0, g);
            }
        }
        self.valid = valid;
        Ok(value)
    }

    /// Cuts that contributed at the last evaluation.
    pub fn contributing_cuts(&self) -> &[usize] {
        &self.valid
    }
}

/// EF-cuts objective: log-sum over cuts of the two-block determinant products.
pub fn ef_cuts_objective(beta: &EdgeWeights, w: &PotentialTensor, cuts: &[GraphCut]) -> Result<f64, ObjectiveError> {
    check_dims(beta, w)?;
    EfCutsProblem::new(w, cuts)?.evaluate(beta.values(), None)
}

/// Gradient of [`ef_cuts_objective`]. The data term differentiates each cut
/// at `beta ⊗ w_j`.
pub fn ef_cuts_grad(beta: &EdgeWeights, w: &PotentialTensor, cuts: &[GraphCut]) -> Result<PairMatrix, ObjectiveError> {
    check_dims(beta, w)?;
    let mut g = PairMatrix::zeros(beta.dim());
    EfCutsProblem::new(w, cuts)?.evaluate(beta.values(), Some(g.values_mut()))?;
    Ok(g)
}

/// Calls `visit` with the labels of every set partition of `0..dim` into at
/// most `max_blocks` blocks (restricted growth strings).
pub fn for_each_partition(dim: usize, max_blocks: usize, mut visit: impl FnMut(&[usize], usize)) {
    if dim == 0 {
        visit(&[], 0);
        return;
    }
    if max_blocks == 0 {
        return;
    }
    let mut labels = vec![0usize; dim];
    fn rec(labels: &mut [usize], i: usize, used: usize, max_blocks: usize, visit: &mut dyn FnMut(&[usize], usize)) {
        if i == labels.len() {
            visit(labels, used);
            return;
        }
        for l in 0..(used + 1).min(max_blocks) {
            labels[i] = l;
            rec(labels, i + 1, used.max(l + 1), max_blocks, visit);
        }
    }
    labels[0] = 0;
    rec(&mut labels, 1, 1, max_blocks, &mut visit);
}

/// Exact EF negative log-likelihood, summing over every partition of the
/// nodes into at most `k` blocks.
pub fn exact_ef_nll(beta: &EdgeWeights, w: &PotentialTensor, k: usize) -> Result<f64, ObjectiveError> {
    check_dims(beta, w)?;
    let dim = beta.dim();
    if dim > MAX_EXACT_NODES {
        return Err(KernelError::TooLarge { nodes: dim, limit: MAX_EXACT_NODES }.into());
    }
    let mut partitions: Vec<Vec<Vec<usize>>> = Vec::new();
    for_each_partition(dim, k, |labels, used| {
        let mut blocks = vec![Vec::new(); used];
        for (u, &l) in labels.iter().enumerate() {
            blocks[l].push(u);
        }
        partitions.push(blocks);
    });
    let mut kernel = BlockKernel::default();
    let mut log_z = |potential: Option<&[f64]>, keep: &mut Vec<bool>| {
        let mut terms = Vec::with_capacity(partitions.len());
        for (i, blocks) in partitions.iter().enumerate() {
            if !keep[i] {
                continue;
            }
            let mut t = 0.0;
            for b in blocks {
                match kernel.factor(dim, b, beta.values(), potential) {
                    Some(x) => t += x,
                    None => {
                        t = f64::NEG_INFINITY;
                        break;
                    }
                }
            }
            if t == f64::NEG_INFINITY {
                keep[i] = false;
            } else {
                terms.push(t);
            }
        }
        log_sum_exp(&terms)
    };
    let mut keep = vec![true; partitions.len()];
    let base = log_z(None, &mut keep);
    if base == f64::NEG_INFINITY {
        return Err(ObjectiveError::DisconnectedSupport);
    }
    let mut value = w.samples() as f64 * base;
    for j in 0..w.samples() {
        let mut keep_j = keep.clone();
        value -= log_z(Some(w.sample(j)), &mut keep_j);
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_examples() {
        let full = EdgeWeights::from_fn(4, |_, _| 1.0).unwrap();
        assert_eq!(connected_components(&full, 1e-8).block_count(), 1);
        let empty = EdgeWeights::zeros(4);
        assert_eq!(connected_components(&empty, 0.0), NodePartition::singletons(4));
        let two = EdgeWeights::from_fn(6, |u, v| if (u < 3) == (v < 3) { 1.0 } else { 0.0 }).unwrap();
        let p = connected_components(&two, 1e-8);
        assert_eq!(p.labels(), &[0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn two_node_et_example() {
        let beta = EdgeWeights::from_fn(2, |_, _| 1.0).unwrap();
        let e2 = exp(2.0);
        let w = PotentialTensor::new(1, 2, vec![e2]).unwrap();
        assert!((et_nll(&beta, &w).unwrap() + 2.0).abs() < 1e-14);
        assert!(et_grad(&beta, &w).unwrap().values()[0].abs() < 1e-14);
    }

    #[test]
    fn disconnected_support_is_an_error() {
        let beta = EdgeWeights::zeros(3);
        let w = PotentialTensor::ones(2, 3);
        assert_eq!(et_nll(&beta, &w), Err(ObjectiveError::DisconnectedSupport));
        let p = NodePartition::singletons(3);
        assert_eq!(ef_lambda_objective(&beta, &w, &p, 0.3), Ok(0.0));
    }

    #[test]
    fn partitions_are_counted_by_stirling_numbers() {
        let mut count = 0;
        for_each_partition(5, 2, |_, _| count += 1);
        assert_eq!(count, 1 + 15);
        let mut bell = 0;
        for_each_partition(5, 5, |_, _| bell += 1);
        assert_eq!(bell, 52);
    }

    #[test]
    fn trivial_cut_reduces_to_et() {
        let beta = EdgeWeights::from_fn(4, |u, v| 0.3 + (u + 2 * v) as f64 * 0.1).unwrap();
        let w = PotentialTensor::from_fn(3, 4, |j, u, v| 0.5 + ((j + u * v) % 4) as f64 * 0.4).unwrap();
        let et = et_nll(&beta, &w).unwrap();
        let cuts = [GraphCut::trivial(4)];
        assert!((ef_cuts_objective(&beta, &w, &cuts).unwrap() - et).abs() < 1e-12);
        assert!((exact_ef_nll(&beta, &w, 1).unwrap() - et).abs() < 1e-12);
    }

    #[test]
    fn cut_sides_keep_node_zero_in_a() {
        let beta = EdgeWeights::from_fn(3, |_, _| 1.0).unwrap();
        let c = GraphCut::from_side(3, &[0], &beta);
        assert_eq!(c.side_a(), &[0]);
        assert_eq!(c.side_b(), &[1, 2]);
        let c = GraphCut::from_mask(&[true, false, false], &beta);
        assert_eq!(c.side_a(), &[0]);
        assert_eq!(c.weight(), 2.0);
    }
}
