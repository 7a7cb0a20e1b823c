//! Bernoulli observation masks, the sampling graph they induce, and
//! connectivity queries on it.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{ClusterTree, ItemId, LeafSet, ObservationMask};
use crate::rng::{self, stream};

/// Observes each unordered pair `i < j` independently with probability `p`.
///
/// Pair `(i, j)` is observed iff its keyed uniform `u(seed, i, j)` falls
/// below `p`. The uniforms do not depend on `p`, so masks drawn with one seed
/// at increasing rates are nested.
pub fn sample_mask(n: usize, p: f64, seed: u64) -> Result<ObservationMask> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "observation probability must lie in [0, 1], got {p}"
        )));
    }
    Ok(ObservationMask::from_fn(n, p, |i, j| {
        rng::keyed_unit(seed, stream::MASK, i as u64, j as u64) < p
    }))
}

/// Undirected graph with an edge wherever a similarity was observed.
#[derive(Debug, Clone)]
pub struct SamplingGraph {
    adjacency: Vec<Vec<usize>>,
    edges: usize,
}

impl SamplingGraph {
    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, nbrs)| nbrs.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }
}

pub fn build_graph(mask: &ObservationMask) -> SamplingGraph {
    let mut adjacency = vec![Vec::new(); mask.n()];
    let mut edges = 0;
    for (i, j) in mask.pairs() {
        adjacency[i].push(j);
        adjacency[j].push(i);
        edges += 1;
    }
    for nbrs in &mut adjacency {
        nbrs.sort_unstable();
    }
    SamplingGraph { adjacency, edges }
}

/// Union-find with path compression and union by rank.
#[derive(Debug, Clone)]
pub struct DisjointSetForest {
    parent: Vec<usize>,
    rank: Vec<u8>,
    sets: usize,
}

impl DisjointSetForest {
    pub fn new(n: usize) -> Self {
        DisjointSetForest {
            parent: (0..n).collect(),
            rank: vec![0; n],
            sets: n,
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Returns false when `a` and `b` were already in one set.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        self.sets -= 1;
        true
    }

    pub fn set_count(&self) -> usize {
        self.sets
    }
}

/// Whether the subgraph induced on `subset` is connected.
pub fn is_connected(graph: &SamplingGraph, subset: &[ItemId]) -> Result<bool> {
    if subset.is_empty() {
        return Err(Error::InvalidParameter("connectivity of an empty subset".into()));
    }
    let n = graph.n();
    // Map members to dense local indices.
    let mut local = vec![usize::MAX; n];
    for (k, &ItemId(i)) in subset.iter().enumerate() {
        if i >= n {
            return Err(Error::ItemOutOfRange { item: i, n });
        }
        local[i] = k;
    }
    let mut forest = DisjointSetForest::new(subset.len());
    for &ItemId(i) in subset {
        for &j in graph.neighbors(i) {
            if j > i && local[j] != usize::MAX {
                forest.union(local[i], local[j]);
                if forest.set_count() == 1 {
                    return Ok(true);
                }
            }
        }
    }
    Ok(forest.set_count() == 1)
}

/// Connectivity verdict for every cluster of `tree` with at least `n_min` items.
pub fn connectivity_report(
    tree: &ClusterTree,
    graph: &SamplingGraph,
    n_min: usize,
) -> Result<BTreeMap<LeafSet, bool>> {
    if tree.n_items() != graph.n() {
        return Err(Error::DimensionMismatch {
            expected: tree.n_items(),
            found: graph.n(),
        });
    }
    let mut report = BTreeMap::new();
    for id in tree.node_ids() {
        if tree.node(id).size() < n_min {
            continue;
        }
        let connected = is_connected(graph, tree.leaves(id))?;
        report.insert(tree.leaf_set(id), connected);
    }
    Ok(report)
}
