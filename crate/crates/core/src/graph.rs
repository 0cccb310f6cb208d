//! Undirected simple graphs stored as packed pair flags.

use alloc::vec;
use alloc::vec::Vec;

use crate::tree_kernel::{pair_count, pair_index, EdgeWeights};

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Adjacency {
    dim: usize,
    edges: Vec<bool>,
}

impl Adjacency {
    pub fn empty(dim: usize) -> Self {
        Self { dim, edges: vec![false; pair_count(dim)] }
    }

    pub fn from_packed(dim: usize, edges: Vec<bool>) -> Option<Self> {
        (edges.len() == pair_count(dim)).then_some(Self { dim, edges })
    }

    pub fn from_edges(dim: usize, list: &[(usize, usize)]) -> Self {
        let mut a = Self::empty(dim);
        for &(u, v) in list {
            a.set(u, v, true);
        }
        a
    }

    /// Edges are the pairs with `beta_uv > threshold`.
    pub fn from_beta(beta: &EdgeWeights, threshold: f64) -> Self {
        Self { dim: beta.dim(), edges: beta.values().iter().map(|&b| b > threshold).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.edges[pair_index(self.dim, u, v)]
    }

    pub fn set(&mut self, u: usize, v: usize, present: bool) {
        self.edges[pair_index(self.dim, u, v)] = present;
    }

    pub fn packed(&self) -> &[bool] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count()
    }

    /// Edges `(u, v)` with `u < v`, in packed order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.dim {
            for v in u + 1..self.dim {
                if self.edges[pair_index(self.dim, u, v)] {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn degree(&self, u: usize) -> usize {
        (0..self.dim).filter(|&v| self.has_edge(u, v)).count()
    }

    /// Component label per node, numbered by smallest member.
    pub fn component_labels(&self) -> Vec<usize> {
        component_labels(self.dim, self.edges())
    }

    pub fn component_count(&self) -> usize {
        self.component_labels().iter().max().map_or(0, |&m| m + 1)
    }
}

/// Union-find labelling of `dim` nodes under `edges`; labels are assigned in
/// order of each component's smallest node.
pub fn component_labels(dim: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (u, v) in edges {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru.max(rv)] = ru.min(rv);
        }
    }
    let mut label_of_root = vec![usize::MAX; dim];
    let mut labels = vec![0; dim];
    let mut next = 0;
    for u in 0..dim {
        let r = find(&mut parent, u);
        if label_of_root[r] == usize::MAX {
            label_of_root[r] = next;
            next += 1;
        }
        labels[u] = label_of_root[r];
    }
    labels
}
