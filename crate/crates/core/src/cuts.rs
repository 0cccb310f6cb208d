//! Ranked enumeration of minimum-weight two-way cuts.
//!
//! Cuts are enumerated in order of weight by Lawler's partitioning scheme:
//! each subproblem fixes some nodes to side `A` or `B` and is solved by an
//! `s-t` max-flow on the graph with the fixed sets contracted. Node 0 is
//! always on side `A`, so every bipartition is visited once.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::objectives::GraphCut;
use crate::tree_kernel::EdgeWeights;

/// Largest node count accepted by [`brute_force_cuts`].
pub const MAX_BRUTE_FORCE_NODES: usize = 20;

/// Cuts ascending by weight, the trivial cut first.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CutSet {
    cuts: Vec<GraphCut>,
}

impl CutSet {
    pub fn cuts(&self) -> &[GraphCut] {
        &self.cuts
    }

    pub fn into_cuts(self) -> Vec<GraphCut> {
        self.cuts
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.cuts.iter().map(GraphCut::weight).collect()
    }
}

/// Order of nontrivial cuts: weight, then the sorted smaller side.
pub fn cut_order(a: &GraphCut, b: &GraphCut) -> Ordering {
    a.weight().total_cmp(&b.weight()).then_with(|| a.smaller_side().cmp(b.smaller_side()))
}

/// Every bipartition, sorted by [`cut_order`] after the trivial cut.
pub fn brute_force_cuts(beta: &EdgeWeights) -> Vec<GraphCut> {
    let dim = beta.dim();
    assert!(dim <= MAX_BRUTE_FORCE_NODES, "brute-force cut enumeration limited to {MAX_BRUTE_FORCE_NODES} nodes");
    let mut cuts = Vec::new();
    if dim >= 2 {
        for bits in 1u64..(1u64 << (dim - 1)) {
            let mask: Vec<bool> = (0..dim).map(|u| u > 0 && bits >> (u - 1) & 1 == 1).collect();
            cuts.push(GraphCut::from_mask(&mask, beta));
        }
    }
    cuts.sort_by(cut_order);
    cuts.insert(0, GraphCut::trivial(dim));
    cuts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fix {
    Free,
    A,
    B,
}

struct Candidate {
    weight: f64,
    mask: Vec<bool>,
    fixed: Vec<Fix>,
    seq: u64,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other.weight.total_cmp(&self.weight).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// The trivial cut followed by the `count - 1` lightest nontrivial cuts of
/// the graph weighted by `beta`. Ties at the boundary are resolved by the
/// sorted smaller side, so the result is independent of search order.
pub fn enumerate_min_cuts(beta: &EdgeWeights, count: usize) -> CutSet {
    let dim = beta.dim();
    let mut cuts = vec![GraphCut::trivial(dim)];
    if count <= 1 || dim < 2 {
        return CutSet { cuts };
    }
    let wanted = count - 1;
    let mut flow = FlowSolver::new(beta);
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut push = |heap: &mut BinaryHeap<Candidate>, fixed: Vec<Fix>, flow: &mut FlowSolver| {
        if let Some(mask) = flow.solve(&fixed) {
            let weight = GraphCut::from_mask(&mask, beta).weight();
            heap.push(Candidate { weight, mask, fixed, seq });
            seq += 1;
        }
    };
    let mut root = vec![Fix::Free; dim];
    root[0] = Fix::A;
    push(&mut heap, root, &mut flow);

    let mut found: Vec<GraphCut> = Vec::new();
    // After `wanted` cuts, keep popping exact ties of the boundary weight so
    // the tie rule picks among all of them, up to a bounded overshoot.
    let tie_cap = wanted.saturating_mul(4).max(wanted + 64);
    while let Some(cand) = heap.pop() {
        if found.len() >= wanted {
            let boundary = found.iter().map(GraphCut::weight).fold(f64::NEG_INFINITY, f64::max);
            if cand.weight > boundary || found.len() >= tie_cap {
                break;
            }
        }
        let Candidate { mask, fixed, .. } = cand;
        found.push(GraphCut::from_mask(&mask, beta));
        // Lawler branching over the free nodes in index order.
        let mut prefix = fixed.clone();
        for u in 0..dim {
            if fixed[u] != Fix::Free {
                continue;
            }
            let here = if mask[u] { Fix::B } else { Fix::A };
            let mut child = prefix.clone();
            child[u] = if here == Fix::A { Fix::B } else { Fix::A };
            push(&mut heap, child, &mut flow);
            prefix[u] = here;
        }
    }
    found.sort_by(cut_order);
    found.truncate(wanted);
    cuts.extend(found);
    CutSet { cuts }
}

/// Dense max-flow on contracted graphs (Edmonds–Karp).
struct FlowSolver<'a> {
    beta: &'a EdgeWeights,
    cap: Vec<f64>,
    nodes: Vec<usize>,
    parent: Vec<usize>,
    queue: Vec<usize>,
}

impl<'a> FlowSolver<'a> {
    fn new(beta: &'a EdgeWeights) -> Self {
        Self { beta, cap: Vec::new(), nodes: Vec::new(), parent: Vec::new(), queue: Vec::new() }
    }

    /// Minimum cut consistent with `fixed` having `B` nonempty, as a
    /// `B`-membership mask; `None` if no such cut exists.
    fn solve(&mut self, fixed: &[Fix]) -> Option<Vec<bool>> {
        if fixed.contains(&Fix::B) {
            return Some(self.st_cut(fixed));
        }
        let mut best: Option<(f64, Vec<bool>)> = None;
        for t in 0..fixed.len() {
            if fixed[t] != Fix::Free {
                continue;
            }
            let mut trial = fixed.to_vec();
            trial[t] = Fix::B;
            let mask = self.st_cut(&trial);
            let w = GraphCut::from_mask(&mask, self.beta).weight();
            if best.as_ref().is_none_or(|(bw, _)| w < *bw) {
                best = Some((w, mask));
            }
        }
        best.map(|(_, m)| m)
    }

    fn st_cut(&mut self, fixed: &[Fix]) -> Vec<bool> {
        let dim = fixed.len();
        // Vertex 0 is the contracted A set, 1 the contracted B set.
        self.nodes.clear();
        self.nodes.extend((0..dim).filter(|&u| fixed[u] == Fix::Free));
        let k = self.nodes.len() + 2;
        let slot = |u: usize, nodes: &[usize]| match fixed[u] {
            Fix::A => 0,
            Fix::B => 1,
            Fix::Free => 2 + nodes.binary_search(&u).expect("free node"),
        };
        self.cap.clear();
        self.cap.resize(k * k, 0.0);
        let mut total = 0.0;
        for u in 0..dim {
            let su = slot(u, &self.nodes);
            for v in u + 1..dim {
                let w = self.beta.get(u, v);
                if w == 0.0 {
                    continue;
                }
                let sv = slot(v, &self.nodes);
                if su != sv {
                    self.cap[su * k + sv] += w;
                    self.cap[sv * k + su] += w;
                    total += w;
                }
            }
        }
        let eps = 1e-14 * total;
        // Augment along shortest residual paths.
        loop {
            if !self.bfs(k, eps) {
                break;
            }
            let mut bottleneck = f64::INFINITY;
            let mut v = 1;
            while v != 0 {
                let u = self.parent[v];
                bottleneck = bottleneck.min(self.cap[u * k + v]);
                v = u;
            }
            let mut v = 1;
            while v != 0 {
                let u = self.parent[v];
                self.cap[u * k + v] -= bottleneck;
                self.cap[v * k + u] += bottleneck;
                v = u;
            }
        }
        // Free nodes reachable from the source stay on side A.
        let mut mask: Vec<bool> = fixed.iter().map(|&f| f == Fix::B).collect();
        for (i, &u) in self.nodes.iter().enumerate() {
            mask[u] = self.parent[2 + i] == usize::MAX;
        }
        mask
    }

    /// Breadth-first search from vertex 0 over residual capacity above
    /// `eps`; fills `parent` (`usize::MAX` = unreached) and reports whether
    /// vertex 1 was reached.
    fn bfs(&mut self, k: usize, eps: f64) -> bool {
        self.parent.clear();
        self.parent.resize(k, usize::MAX);
        self.parent[0] = 0;
        self.queue.clear();
        self.queue.push(0);
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            for v in 0..k {
                if self.parent[v] == usize::MAX && self.cap[u * k + v] > eps {
                    self.parent[v] = u;
                    if v == 1 {
                        return true;
                    }
                    self.queue.push(v);
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sides(cs: &CutSet) -> Vec<(Vec<usize>, f64)> {
        cs.cuts().iter().map(|c| (c.side_b().to_vec(), c.weight())).collect()
    }

    #[test]
    fn path_example() {
        let beta = EdgeWeights::from_fn(3, |u, v| match (u, v) {
            (0, 1) => 1.0,
            (1, 2) => 2.0,
            _ => 0.0,
        })
        .unwrap();
        let cs = enumerate_min_cuts(&beta, 4);
        assert_eq!(
            sides(&cs),
            vec![(vec![], 0.0), (vec![1, 2], 1.0), (vec![2], 2.0), (vec![1], 3.0)]
        );
    }

    #[test]
    fn triangle_ties_are_lexicographic() {
        let beta = EdgeWeights::from_fn(3, |_, _| 1.0).unwrap();
        let cs = enumerate_min_cuts(&beta, 4);
        let smaller: Vec<Vec<usize>> = cs.cuts()[1..].iter().map(|c| c.smaller_side().to_vec()).collect();
        assert_eq!(smaller, vec![vec![0], vec![1], vec![2]]);
        assert!(cs.cuts()[1..].iter().all(|c| c.weight() == 2.0));
    }

    #[test]
    fn two_nodes() {
        let beta = EdgeWeights::from_fn(2, |_, _| 0.7).unwrap();
        let cs = enumerate_min_cuts(&beta, 10);
        assert_eq!(sides(&cs), vec![(vec![], 0.0), (vec![1], 0.7)]);
    }

    #[test]
    fn disconnected_nodes_give_zero_weight_cuts() {
        let beta = EdgeWeights::from_fn(4, |u, v| if u < 2 && v < 2 || u >= 2 && v >= 2 { 1.0 } else { 0.0 })
            .unwrap();
        let cs = enumerate_min_cuts(&beta, 3);
        assert_eq!(cs.cuts()[1].weight(), 0.0);
        assert_eq!(cs.cuts()[1].side_b(), &[2, 3]);
    }
}
