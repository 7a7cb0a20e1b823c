//! Reference implementations used only to check the library. None of these
//! call into the code paths they verify.

#![allow(dead_code)]

use std::collections::VecDeque;

use sparseclust::model::{ClusterTree, ItemId, NodeId};
use sparseclust::sampling::SamplingGraph;
use sparseclust::synth::{generate_tree, ShapeKind, TreeShape};

/// Breadth-first connectivity of the subgraph induced on `subset`.
pub fn bfs_connected(graph: &SamplingGraph, subset: &[usize]) -> bool {
    let n = graph.n();
    let mut member = vec![false; n];
    for &i in subset {
        member[i] = true;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([subset[0]]);
    seen[subset[0]] = true;
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if member[v] && !seen[v] && graph.has_edge(u, v) {
                seen[v] = true;
                reached += 1;
                queue.push_back(v);
            }
        }
    }
    reached == subset.len()
}

/// Connectivity of an edge list over `n` vertices, by repeated relaxation.
fn edges_connect(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut label: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for &(a, b) in edges {
            let m = label[a].min(label[b]);
            if label[a] != m || label[b] != m {
                label[a] = m;
                label[b] = m;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    label.iter().all(|&l| l == 0)
}

/// `counts[e]` = number of connected labeled graphs on `n` vertices with `e`
/// edges, by enumerating all `2^(n(n-1)/2)` edge subsets.
pub fn connected_graph_counts(n: usize) -> Vec<u64> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let m = pairs.len();
    let mut counts = vec![0u64; m + 1];
    let mut edges = Vec::with_capacity(m);
    for bits in 0u64..(1u64 << m) {
        edges.clear();
        edges.extend((0..m).filter(|k| bits >> k & 1 == 1).map(|k| pairs[k]));
        if edges_connect(n, &edges) {
            counts[edges.len()] += 1;
        }
    }
    counts
}

/// Exact `P(G(n, p) connected)` from enumerated counts.
pub fn connected_probability_enumerated(counts: &[u64], p: f64) -> f64 {
    let m = counts.len() - 1;
    counts
        .iter()
        .enumerate()
        .map(|(e, &c)| c as f64 * p.powi(e as i32) * (1.0 - p).powi((m - e) as i32))
        .sum()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact `P(G(n, p) connected)` by conditioning on the size `k` of vertex 0's
/// component: `P_n = 1 - sum_{k<n} C(n-1, k-1) P_k q^(k(n-k))`.
pub fn connected_probability_recurrence(n: usize, p: f64) -> f64 {
    let q = 1.0 - p;
    let mut prob = vec![0.0; n + 1];
    prob[1] = 1.0;
    for m in 2..=n {
        let split: f64 = (1..m)
            .map(|k| binomial(m - 1, k - 1) * prob[k] * q.powi((k * (m - k)) as i32))
            .sum();
        prob[m] = 1.0 - split;
    }
    prob[n]
}

/// Deepest node containing both items, by scanning every node's leaf set.
pub fn brute_force_lca(tree: &ClusterTree, i: usize, j: usize) -> NodeId {
    tree.node_ids()
        .filter(|&id| {
            let leaves = tree.leaves(id);
            leaves.contains(&ItemId(i)) && leaves.contains(&ItemId(j))
        })
        .min_by_key(|&id| tree.node(id).size())
        .expect("root contains every pair")
}

/// Random shape with `n` in `[lo, hi]`; balanced trees round `n` down to a
/// power of two.
pub fn random_tree(kind_ix: u64, n: usize, seed: u64) -> ClusterTree {
    let kind = [ShapeKind::Balanced, ShapeKind::RandomUnbalanced, ShapeKind::Caterpillar][(kind_ix % 3) as usize];
    let n = if kind == ShapeKind::Balanced {
        1 << (usize::BITS - 1 - n.leading_zeros())
    } else {
        n
    };
    generate_tree(&TreeShape::new(kind, n, seed)).unwrap()
}
