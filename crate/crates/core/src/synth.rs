//! Random ground-truth hierarchies and similarity matrices that satisfy the
//! tight-clustering condition by construction.
//!
//! The generative model here is a design choice, not something the recovery
//! theory prescribes: each internal node gets a level value that strictly
//! increases along every root-to-leaf path, a pair's similarity is the level
//! of its lowest common ancestor, and a small per-pair jitter breaks ties
//! without crossing any level gap.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClusterTree, Hierarchy, NodeKind, SimilarityMatrix};
use crate::rng::{self, stream};

/// Level increments per tree edge are drawn from this range before rescaling.
pub const LEVEL_STEP: (f64, f64) = (0.2, 1.0);
/// Levels are rescaled into `(LEVEL_FLOOR, 1.0]`.
pub const LEVEL_FLOOR: f64 = 0.1;
/// Jitter amplitude as a fraction of the smallest root-path level gap. Must
/// stay below one half.
pub const JITTER_GAP_FRACTION: f64 = 0.49;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Balanced,
    RandomUnbalanced,
    Caterpillar,
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShapeKind::Balanced => "balanced",
            ShapeKind::RandomUnbalanced => "random_unbalanced",
            ShapeKind::Caterpillar => "caterpillar",
        })
    }
}

impl FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "balanced" => Ok(ShapeKind::Balanced),
            "random_unbalanced" | "random-unbalanced" | "unbalanced" => Ok(ShapeKind::RandomUnbalanced),
            "caterpillar" => Ok(ShapeKind::Caterpillar),
            other => Err(Error::InvalidParameter(format!("unknown tree shape {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeShape {
    pub kind: ShapeKind,
    pub n_items: usize,
    pub seed: u64,
}

impl TreeShape {
    pub fn new(kind: ShapeKind, n_items: usize, seed: u64) -> Self {
        TreeShape { kind, n_items, seed }
    }
}

/// Deterministic in `shape`.
///
/// Balanced and caterpillar trees label leaves left to right, so the
/// caterpillar's clusters are `{0,1}, {0,1,2}, ...`. Random unbalanced trees
/// draw each left-subtree size uniformly from `[1, size - 1]` and then shuffle
/// the leaf labels, so cluster membership is not tied to index order.
pub fn generate_tree(shape: &TreeShape) -> Result<ClusterTree> {
    let n = shape.n_items;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 items, got {n}")));
    }
    let h = match shape.kind {
        ShapeKind::Balanced => {
            if !n.is_power_of_two() {
                return Err(Error::InvalidParameter(format!(
                    "balanced trees need a power-of-two item count, got {n}"
                )));
            }
            balanced(0, n)
        }
        ShapeKind::Caterpillar => {
            let mut h = Hierarchy::branch(Hierarchy::leaf(0), Hierarchy::leaf(1));
            for item in 2..n {
                h = Hierarchy::branch(h, Hierarchy::leaf(item));
            }
            h
        }
        ShapeKind::RandomUnbalanced => {
            let mut rng = rng::sequential(shape.seed, stream::TREE);
            let mut labels: Vec<usize> = (0..n).collect();
            labels.shuffle(&mut rng::sequential(shape.seed, stream::LABELS));
            random_split(&labels, &mut rng)
        }
    };
    ClusterTree::from_hierarchy(&h)
}

fn balanced(lo: usize, hi: usize) -> Hierarchy {
    if hi - lo == 1 {
        Hierarchy::leaf(lo)
    } else {
        let mid = lo + (hi - lo) / 2;
        Hierarchy::branch(balanced(lo, mid), balanced(mid, hi))
    }
}

fn random_split<R: Rng>(labels: &[usize], rng: &mut R) -> Hierarchy {
    if labels.len() == 1 {
        return Hierarchy::leaf(labels[0]);
    }
    let left = rng.gen_range(1..labels.len());
    let (l, r) = labels.split_at(left);
    let lh = random_split(l, rng);
    let rh = random_split(r, rng);
    Hierarchy::branch(lh, rh)
}

/// Level value per arena node; leaves carry `NaN`.
pub fn random_levels(tree: &ClusterTree, seed: u64) -> Vec<f64> {
    let mut rng = rng::sequential(seed, stream::LEVELS);
    let mut raw = vec![f64::NAN; tree.len()];
    // Pre-order arena: a parent is always assigned before its children.
    for (id, node) in tree.nodes() {
        if node.is_leaf() {
            continue;
        }
        let base = node.parent.map_or(0.0, |p| raw[p.0]);
        raw[id.0] = base + rng.gen_range(LEVEL_STEP.0..LEVEL_STEP.1);
    }
    let top = raw.iter().copied().filter(|v| !v.is_nan()).fold(0.0, f64::max);
    raw.iter()
        .map(|&r| LEVEL_FLOOR + (1.0 - LEVEL_FLOOR) * r / top)
        .collect()
}

/// Smallest `level(child) - level(parent)` over internal parent/child pairs,
/// or `None` when the root is the only internal node.
pub fn min_level_gap(tree: &ClusterTree, levels: &[f64]) -> Option<f64> {
    tree.nodes()
        .filter(|(_, n)| !n.is_leaf())
        .filter_map(|(id, n)| n.parent.map(|p| levels[id.0] - levels[p.0]))
        .reduce(f64::min)
}

/// Similarities from explicit internal-node levels.
///
/// `s(i, j) = level(lca(i, j)) + jitter * u(i, j) * g` where `u` is keyed on
/// `(seed, min(i,j), max(i,j))` and `g` is [`JITTER_GAP_FRACTION`] of the
/// smallest level gap. Levels must strictly increase away from the root.
pub fn tc_similarities_with_levels(
    tree: &ClusterTree,
    levels: &[f64],
    seed: u64,
    jitter: f64,
) -> Result<SimilarityMatrix> {
    if !(0.0..1.0).contains(&jitter) {
        return Err(Error::InvalidParameter(format!("jitter must lie in [0, 1), got {jitter}")));
    }
    if levels.len() != tree.len() {
        return Err(Error::DimensionMismatch {
            expected: tree.len(),
            found: levels.len(),
        });
    }
    for (id, node) in tree.nodes() {
        if node.is_leaf() {
            continue;
        }
        let level = levels[id.0];
        let above = node.parent.map_or(0.0, |p| levels[p.0]);
        if !(level.is_finite() && level > above) {
            return Err(Error::InvalidParameter(format!(
                "levels must be positive and strictly increase away from the root (node {})",
                id.0
            )));
        }
    }
    let root_level = levels[tree.root().0];
    let gap = min_level_gap(tree, levels).unwrap_or(root_level);
    let amplitude = jitter * JITTER_GAP_FRACTION * gap;

    let n = tree.n_items();
    let mut values = vec![0.0; n * n];
    for (id, node) in tree.nodes() {
        let NodeKind::Internal { left, right } = node.kind else {
            continue;
        };
        let level = levels[id.0];
        for &a in tree.leaves(left) {
            for &b in tree.leaves(right) {
                let (i, j) = if a < b { (a.0, b.0) } else { (b.0, a.0) };
                let u = if amplitude > 0.0 {
                    rng::keyed_unit(seed, stream::JITTER, i as u64, j as u64)
                } else {
                    0.0
                };
                let s = level + amplitude * u;
                values[i * n + j] = s;
                values[j * n + i] = s;
            }
        }
    }
    SimilarityMatrix::new(n, values)
}

/// Level values from [`random_levels`] followed by
/// [`tc_similarities_with_levels`], both keyed on `seed`.
pub fn generate_tc_similarities(tree: &ClusterTree, seed: u64, jitter: f64) -> Result<SimilarityMatrix> {
    let levels = random_levels(tree, seed);
    tc_similarities_with_levels(tree, &levels, seed, jitter)
}
