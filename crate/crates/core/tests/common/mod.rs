//! Reference implementations used as test oracles. They share no code with
//! the library: trees are enumerated through Prüfer sequences, forests by
//! edge subsets, determinants by Gaussian elimination.

#![allow(dead_code)]

use efmrf_core::objectives::PotentialTensor;
use efmrf_core::EdgeWeights;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric weights in `[lo, hi)` on every pair.
pub fn random_weights(rng: &mut ChaCha8Rng, dim: usize, lo: f64, hi: f64) -> EdgeWeights {
    EdgeWeights::from_fn(dim, |_, _| rng.random_range(lo..hi)).unwrap()
}

/// Weights where each pair is zero with probability `p_zero`, kept
/// connected by a positive path `0-1-...-(dim-1)`.
pub fn random_sparse_connected(rng: &mut ChaCha8Rng, dim: usize, p_zero: f64) -> EdgeWeights {
    EdgeWeights::from_fn(dim, |u, v| {
        if v == u + 1 || rng.random::<f64>() >= p_zero {
            rng.random_range(0.2..3.0)
        } else {
            0.0
        }
    })
    .unwrap()
}

/// Potentials `w_j(u, v)` drawn log-uniformly from `[e^-s, e^s]`.
pub fn random_potentials(rng: &mut ChaCha8Rng, samples: usize, dim: usize, s: f64) -> PotentialTensor {
    let p = dim * (dim - 1) / 2;
    let values = (0..samples * p).map(|_| rng.random_range(-s..s).exp()).collect();
    PotentialTensor::new(samples, dim, values).unwrap()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(mut a: Vec<f64>, n: usize) -> f64 {
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i * n + c].abs().total_cmp(&a[j * n + c].abs())).unwrap();
        if a[p * n + c] == 0.0 {
            return 0.0;
        }
        if p != c {
            for k in 0..n {
                a.swap(p * n + k, c * n + k);
            }
            d = -d;
        }
        let piv = a[c * n + c];
        d *= piv;
        for r in c + 1..n {
            let f = a[r * n + c] / piv;
            for k in c..n {
                a[r * n + k] -= f * a[c * n + k];
            }
        }
    }
    d
}

/// Laplacian of `weight` over `nodes` with the node at position `removed`
/// deleted, dense row-major.
pub fn reduced_laplacian(weight: &dyn Fn(usize, usize) -> f64, nodes: &[usize], removed: usize) -> Vec<f64> {
    let kept: Vec<usize> = nodes.iter().enumerate().filter(|&(i, _)| i != removed).map(|(_, &u)| u).collect();
    let m = kept.len();
    let mut q = vec![0.0; m * m];
    for (i, &u) in kept.iter().enumerate() {
        q[i * m + i] = nodes.iter().filter(|&&v| v != u).map(|&v| weight(u, v)).sum();
        for (j, &v) in kept.iter().enumerate() {
            if i != j {
                q[i * m + j] = -weight(u, v);
            }
        }
    }
    q
}

/// Sum over spanning trees of `nodes` of the product of edge weights, by
/// decoding every Prüfer sequence.
pub fn spanning_tree_sum(weight: &dyn Fn(usize, usize) -> f64, nodes: &[usize]) -> f64 {
    let m = nodes.len();
    if m <= 1 {
        return 1.0;
    }
    if m == 2 {
        return weight(nodes[0], nodes[1]);
    }
    let len = m - 2;
    let mut seq = vec![0usize; len];
    let mut total = 0.0;
    loop {
        let mut degree = vec![1usize; m];
        for &s in &seq {
            degree[s] += 1;
        }
        let mut product = 1.0;
        for &s in &seq {
            let leaf = (0..m).find(|&i| degree[i] == 1).unwrap();
            product *= weight(nodes[leaf], nodes[s]);
            degree[leaf] = 0;
            degree[s] -= 1;
        }
        let last: Vec<usize> = (0..m).filter(|&i| degree[i] == 1).collect();
        product *= weight(nodes[last[0]], nodes[last[1]]);
        total += product;
        // Next sequence in lexicographic order.
        let mut i = len;
        loop {
            if i == 0 {
                return total;
            }
            i -= 1;
            seq[i] += 1;
            if seq[i] < m {
                break;
            }
            seq[i] = 0;
        }
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        x = parent[x];
    }
    x
}

/// Sum over forests of the complete graph on `dim` nodes with at most `k`
/// trees of the product of edge weights, by enumerating edge subsets.
pub fn forest_sum(weight: &dyn Fn(usize, usize) -> f64, dim: usize, k: usize) -> f64 {
    let edges: Vec<(usize, usize)> = (0..dim).flat_map(|u| (u + 1..dim).map(move |v| (u, v))).collect();
    assert!(edges.len() <= 20, "oracle limited to small graphs");
    let mut total = 0.0;
    for mask in 0u32..(1 << edges.len()) {
        let count = mask.count_ones() as usize;
        if count + k < dim || count >= dim {
            continue;
        }
        let mut parent: Vec<usize> = (0..dim).collect();
        let mut product = 1.0;
        let mut acyclic = true;
        for (i, &(u, v)) in edges.iter().enumerate() {
            if mask >> i & 1 == 0 {
                continue;
            }
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a == b {
                acyclic = false;
                break;
            }
            parent[a] = b;
            product *= weight(u, v);
        }
        if acyclic {
            total += product;
        }
    }
    total
}

/// Exact EF negative log-likelihood from forest sums.
pub fn exact_ef_oracle(beta: &EdgeWeights, w: &PotentialTensor, k: usize) -> f64 {
    let d = beta.dim();
    let base = forest_sum(&|u, v| beta.get(u, v), d, k).ln();
    let mut value = w.samples() as f64 * base;
    for j in 0..w.samples() {
        value -= forest_sum(&|u, v| beta.get(u, v) * w.get(j, u, v), d, k).ln();
    }
    value
}

/// ET negative log-likelihood from spanning-tree sums.
pub fn et_oracle(beta: &EdgeWeights, w: &PotentialTensor) -> f64 {
    let nodes: Vec<usize> = (0..beta.dim()).collect();
    let mut value = w.samples() as f64 * spanning_tree_sum(&|u, v| beta.get(u, v), &nodes).ln();
    for j in 0..w.samples() {
        value -= spanning_tree_sum(&|u, v| beta.get(u, v) * w.get(j, u, v), &nodes).ln();
    }
    value
}

/// Weights of every nontrivial bipartition, ascending.
pub fn all_cut_weights(beta: &EdgeWeights) -> Vec<f64> {
    let d = beta.dim();
    let mut out = Vec::new();
    for mask in 1u32..(1 << (d - 1)) {
        let in_b = |u: usize| u > 0 && mask >> (u - 1) & 1 == 1;
        let mut w = 0.0;
        for u in 0..d {
            for v in u + 1..d {
                if in_b(u) != in_b(v) {
                    w += beta.get(u, v);
                }
            }
        }
        out.push(w);
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Central differences of `f` at packed `x`.
pub fn central_differences(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], rel_step: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut y = x.to_vec();
    for i in 0..x.len() {
        let h = rel_step * x[i].abs().max(1e-3);
        y[i] = x[i] + h;
        let up = f(&y);
        y[i] = x[i] - h;
        let down = f(&y);
        y[i] = x[i];
        g[i] = (up - down) / (2.0 * h);
    }
    g
}

/// Relative agreement of two gradients, scaled by the larger norm.
pub fn gradient_error(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs())).max(1e-12);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn invert(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i * n + c].abs().total_cmp(&m[j * n + c].abs())).unwrap();
        for k in 0..n {
            m.swap(p * n + k, c * n + k);
            inv.swap(p * n + k, c * n + k);
        }
        let piv = m[c * n + c];
        for k in 0..n {
            m[c * n + k] /= piv;
            inv[c * n + k] /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = m[r * n + c];
                for k in 0..n {
                    m[r * n + k] -= f * m[c * n + k];
                    inv[r * n + k] -= f * inv[c * n + k];
                }
            }
        }
    }
    inv
}

/// Sample covariance (row-major `d x d`) of row-major `n x d` data.
pub fn sample_covariance(values: &[f64], n: usize, d: usize) -> Vec<f64> {
    let mean: Vec<f64> = (0..d).map(|i| (0..n).map(|j| values[j * d + i]).sum::<f64>() / n as f64).collect();
    let mut cov = vec![0.0; d * d];
    for j in 0..n {
        for a in 0..d {
            for b in 0..d {
                cov[a * d + b] += (values[j * d + a] - mean[a]) * (values[j * d + b] - mean[b]);
            }
        }
    }
    cov.iter_mut().for_each(|c| *c /= (n - 1) as f64);
    cov
}
