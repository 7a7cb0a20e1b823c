//! Agglomerative clustering over zero-filled incomplete similarities, and
//! recovery scoring against a ground-truth hierarchy.
//!
//! Unobserved similarities are set to zero. The two current clusters with
//! the largest similarity merge and the surviving row takes the entrywise max
//! of both rows, which is single linkage. Once every remaining inter-cluster
//! similarity is zero nothing observed links the clusters any more, and the
//! run stops with a forest instead of merging on unobserved values.
//!
//! Ties at the maximum go to the lexicographically smallest `(row, row)` pair,
//! where a merged cluster keeps the smaller of its two row indices.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClusterTree, Hierarchy, LeafSet, ObservationMask, SimilarityMatrix};

/// One agglomeration step. Clusters are numbered `0..n` for the items and
/// `n + k` for the cluster created by merge `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub similarity: f64,
    pub size: usize,
}

/// Output of [`incomplete_agglomerative`].
#[derive(Debug, Clone, PartialEq)]
pub struct MergeForest {
    n_items: usize,
    merges: Vec<Merge>,
    forced_halt: bool,
}

#[derive(Serialize, Deserialize)]
struct ForestFile {
    n_items: usize,
    forced_halt: bool,
    merges: Vec<Merge>,
    roots: Vec<Hierarchy>,
}

impl MergeForest {
    pub fn from_merges(n_items: usize, merges: Vec<Merge>, forced_halt: bool) -> Result<Self> {
        let forest = MergeForest {
            n_items,
            merges,
            forced_halt,
        };
        forest.validate()?;
        Ok(forest)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_items;
        let mut used = vec![false; n + self.merges.len()];
        let mut sizes: Vec<usize> = vec![1; n];
        for (k, m) in self.merges.iter().enumerate() {
            let id = n + k;
            for c in [m.left, m.right] {
                if c >= id || used[c] {
                    return Err(Error::Parse(format!(
                        "merge {k} references cluster {c} that is unavailable"
                    )));
                }
                used[c] = true;
            }
            if m.size != sizes[m.left] + sizes[m.right] {
                return Err(Error::Parse(format!("merge {k} has inconsistent size {}", m.size)));
            }
            sizes.push(m.size);
        }
        let roots = used.iter().filter(|u| !**u).count();
        if !self.forced_halt && n > 0 && roots != 1 {
            return Err(Error::Parse(format!(
                "forest has {roots} roots but is not marked as halted"
            )));
        }
        Ok(())
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// True when clustering stopped with more than one root because no
    /// observed similarity connected the remaining clusters.
    pub fn forced_halt(&self) -> bool {
        self.forced_halt
    }

    /// Cluster ids never consumed by a later merge, ascending.
    pub fn roots(&self) -> Vec<usize> {
        let total = self.n_items + self.merges.len();
        let mut used = vec![false; total];
        for m in &self.merges {
            used[m.left] = true;
            used[m.right] = true;
        }
        (0..total).filter(|&c| !used[c]).collect()
    }

    /// Member lists for every cluster id, unsorted.
    fn members(&self) -> Vec<Vec<usize>> {
        let mut members: Vec<Vec<usize>> = (0..self.n_items).map(|i| vec![i]).collect();
        for m in &self.merges {
            let mut joined = members[m.left].clone();
            joined.extend_from_slice(&members[m.right]);
            members.push(joined);
        }
        members
    }

    /// Leaf sets of every node in the forest (items and merged clusters).
    pub fn clusters(&self) -> Vec<LeafSet> {
        self.members().into_iter().map(LeafSet::new).collect()
    }

    pub fn root_hierarchies(&self) -> Vec<Hierarchy> {
        let mut built: Vec<Option<Hierarchy>> = (0..self.n_items).map(|i| Some(Hierarchy::leaf(i))).collect();
        for m in &self.merges {
            let l = built[m.left].take().expect("cluster merged once");
            let r = built[m.right].take().expect("cluster merged once");
            built.push(Some(Hierarchy::branch(l, r)));
        }
        built.into_iter().flatten().collect()
    }

    /// The single tree, when clustering did not halt early.
    pub fn to_tree(&self) -> Option<ClusterTree> {
        let mut roots = self.root_hierarchies();
        if roots.len() != 1 {
            return None;
        }
        ClusterTree::from_hierarchy(&roots.pop().expect("one root")).ok()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ForestFile {
            n_items: self.n_items,
            forced_halt: self.forced_halt,
            merges: self.merges.clone(),
            roots: self.root_hierarchies(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Reads the merge list; the `roots` field is informational and rebuilt.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        de.disable_recursion_limit();
        let file = ForestFile::deserialize(serde_stacker::Deserializer::new(&mut de))?;
        de.end()?;
        Self::from_merges(file.n_items, file.merges, file.forced_halt)
    }
}

fn zero_filled(sim: &SimilarityMatrix, mask: &ObservationMask) -> Result<Vec<f64>> {
    let n = sim.n();
    if mask.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: mask.n(),
        });
    }
    let mut s = vec![0.0; n * n];
    for (i, j) in mask.pairs() {
        let v = sim.get(i, j);
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::NonPositiveSimilarity { i, j, value: v });
        }
        s[i * n + j] = v;
        s[j * n + i] = v;
    }
    Ok(s)
}

/// Shared merge bookkeeping for both search strategies.
struct Agglomeration {
    n: usize,
    s: Vec<f64>,
    active: Vec<bool>,
    cluster_of_row: Vec<usize>,
    size_of_row: Vec<usize>,
    merges: Vec<Merge>,
}

impl Agglomeration {
    fn new(sim: &SimilarityMatrix, mask: &ObservationMask) -> Result<Self> {
        let n = sim.n();
        Ok(Agglomeration {
            n,
            s: zero_filled(sim, mask)?,
            active: vec![true; n],
            cluster_of_row: (0..n).collect(),
            size_of_row: vec![1; n],
            merges: Vec::with_capacity(n.saturating_sub(1)),
        })
    }

    /// Merges row `j` into row `i` (`i < j`). Returns the rows whose
    /// similarity to `i` increased, with the new value.
    fn merge(&mut self, i: usize, j: usize, value: f64, changed: &mut Vec<(usize, f64)>) {
        let n = self.n;
        changed.clear();
        for k in 0..n {
            if k == i || k == j || !self.active[k] {
                continue;
            }
            let from_j = self.s[j * n + k];
            if from_j > self.s[i * n + k] {
                self.s[i * n + k] = from_j;
                self.s[k * n + i] = from_j;
                changed.push((k, from_j));
            }
        }
        for k in 0..n {
            self.s[j * n + k] = 0.0;
            self.s[k * n + j] = 0.0;
        }
        self.active[j] = false;
        let size = self.size_of_row[i] + self.size_of_row[j];
        self.merges.push(Merge {
            left: self.cluster_of_row[i],
            right: self.cluster_of_row[j],
            similarity: value,
            size,
        });
        self.cluster_of_row[i] = n + self.merges.len() - 1;
        self.size_of_row[i] = size;
    }

    fn finish(self) -> MergeForest {
        let remaining = self.active.iter().filter(|a| **a).count();
        MergeForest {
            n_items: self.n,
            merges: self.merges,
            forced_halt: remaining > 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    value: f64,
    i: usize,
    j: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // Max-heap order: larger value first, then smaller (i, j).
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| other.i.cmp(&self.i))
            .then_with(|| other.j.cmp(&self.j))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Zero-filled single-linkage clustering, `O(N^2 log N)`.
///
/// A global max-heap holds `(value, i, j)` candidates. Merged-away rows are
/// only flagged inactive; stale candidates are discarded when popped by
/// checking that both rows are live and the stored value is still current.
pub fn incomplete_agglomerative(sim: &SimilarityMatrix, mask: &ObservationMask) -> Result<MergeForest> {
    let mut state = Agglomeration::new(sim, mask)?;
    let n = state.n;
    let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(mask.count());
    for (i, j) in mask.pairs() {
        heap.push(Candidate {
            value: state.s[i * n + j],
            i,
            j,
        });
    }
    let mut changed = Vec::new();
    let mut live = n;
    while live > 1 {
        let Some(c) = heap.pop() else { break };
        if !(state.active[c.i] && state.active[c.j]) || state.s[c.i * n + c.j] != c.value {
            continue;
        }
        state.merge(c.i, c.j, c.value, &mut changed);
        live -= 1;
        for &(k, value) in &changed {
            let (i, j) = if c.i < k { (c.i, k) } else { (k, c.i) };
            heap.push(Candidate { value, i, j });
        }
    }
    Ok(state.finish())
}

/// Reference implementation scanning the whole matrix each step, `O(N^3)`.
pub fn incomplete_agglomerative_naive(
    sim: &SimilarityMatrix,
    mask: &ObservationMask,
) -> Result<MergeForest> {
    let mut state = Agglomeration::new(sim, mask)?;
    let n = state.n;
    let mut changed = Vec::new();
    for _ in 1..n.max(1) {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            if !state.active[i] {
                continue;
            }
            for j in (i + 1)..n {
                if !state.active[j] {
                    continue;
                }
                let v = state.s[i * n + j];
                if v > 0.0 && best.is_none_or(|(b, _, _)| v > b) {
                    best = Some((v, i, j));
                }
            }
        }
        let Some((value, i, j)) = best else { break };
        state.merge(i, j, value, &mut changed);
    }
    Ok(state.finish())
}

/// Which true clusters of size at least `n_min` appear as exact nodes of the
/// clustering output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveryReport {
    pub n_min: usize,
    pub total_clusters: usize,
    pub recovered: usize,
    pub per_cluster: BTreeMap<LeafSet, bool>,
    pub fully_recovered: bool,
}

#[derive(Serialize)]
struct ClusterVerdict<'a> {
    cluster: &'a LeafSet,
    size: usize,
    recovered: bool,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    n_min: usize,
    total_clusters: usize,
    recovered: usize,
    fully_recovered: bool,
    per_cluster: Vec<ClusterVerdict<'a>>,
}

impl RecoveryReport {
    pub fn to_json(&self) -> Result<String> {
        let file = ReportFile {
            n_min: self.n_min,
            total_clusters: self.total_clusters,
            recovered: self.recovered,
            fully_recovered: self.fully_recovered,
            per_cluster: self
                .per_cluster
                .iter()
                .map(|(cluster, &recovered)| ClusterVerdict {
                    cluster,
                    size: cluster.len(),
                    recovered,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

pub fn evaluate_recovery(truth: &ClusterTree, result: &MergeForest, n_min: usize) -> Result<RecoveryReport> {
    if truth.n_items() != result.n_items() {
        return Err(Error::DimensionMismatch {
            expected: truth.n_items(),
            found: result.n_items(),
        });
    }
    let found: HashSet<LeafSet> = result.clusters().into_iter().filter(|c| c.len() >= n_min).collect();
    let per_cluster: BTreeMap<LeafSet, bool> = truth
        .cluster_set(n_min)
        .into_iter()
        .map(|c| {
            let hit = found.contains(&c);
            (c, hit)
        })
        .collect();
    let recovered = per_cluster.values().filter(|&&r| r).count();
    let total_clusters = per_cluster.len();
    Ok(RecoveryReport {
        n_min,
        total_clusters,
        recovered,
        per_cluster,
        fully_recovered: recovered == total_clusters,
    })
}
