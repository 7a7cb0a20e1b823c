//! Tight-clustering condition checks.
//!
//! A hierarchy and similarity matrix satisfy the condition when, for every
//! cluster `C` and all `i, j` in `C`, `k` outside `C`,
//! `s(i, j) > max(s(i, k), s(j, k))`.
//!
//! Each triple splits into two per-row statements (`s(i,j) > s(i,k)` for row
//! `i`, `s(j,i) > s(j,k)` for row `j`), so the condition is equivalent to: for
//! every item `i` and every ancestor cluster `C` of `i`, the smallest
//! similarity from `i` into `C` beats the largest similarity from `i` to
//! anything outside `C`. Walking each leaf's root path with prefix minima and
//! suffix maxima checks that in `O(N^2)`.

use crate::error::{Error, Result};
use crate::model::{ClusterTree, ItemId, SimilarityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcCheck {
    Holds,
    /// `i` and `j` share a cluster that excludes `k`, yet `s(i,j)` does not
    /// exceed both `s(i,k)` and `s(j,k)`.
    Violated { i: ItemId, j: ItemId, k: ItemId },
}

impl TcCheck {
    pub fn holds(&self) -> bool {
        matches!(self, TcCheck::Holds)
    }
}

fn check_dims(tree: &ClusterTree, sim: &SimilarityMatrix) -> Result<()> {
    if tree.n_items() != sim.n() {
        return Err(Error::DimensionMismatch {
            expected: tree.n_items(),
            found: sim.n(),
        });
    }
    Ok(())
}

/// Root-path formulation, `O(N^2)` time.
pub fn check_tc(tree: &ClusterTree, sim: &SimilarityMatrix) -> Result<TcCheck> {
    check_dims(tree, sim)?;
    let n = tree.n_items();
    // Per ancestor on the path: (min, argmin, max, argmax) over the sibling side.
    let mut path: Vec<(f64, usize, f64, usize)> = Vec::new();
    for i in 0..n {
        path.clear();
        let mut cur = tree.leaf_of(ItemId(i));
        while let Some(parent) = tree.node(cur).parent {
            let (l, r) = tree.node(parent).children().expect("parent is internal");
            let sibling = if l == cur { r } else { l };
            let mut lo = (f64::INFINITY, usize::MAX);
            let mut hi = (f64::NEG_INFINITY, usize::MAX);
            for &ItemId(j) in tree.leaves(sibling) {
                let s = sim.get(i, j);
                if s < lo.0 || (s == lo.0 && j < lo.1) {
                    lo = (s, j);
                }
                if s > hi.0 || (s == hi.0 && j < hi.1) {
                    hi = (s, j);
                }
            }
            path.push((lo.0, lo.1, hi.0, hi.1));
            cur = parent;
        }
        // suffix[t] = strongest similarity from i to anything outside path[t]'s cluster.
        let depth = path.len();
        let mut suffix = vec![(f64::NEG_INFINITY, usize::MAX); depth + 1];
        for t in (0..depth).rev() {
            let (_, _, hi, arg) = path[t];
            suffix[t] = if hi > suffix[t + 1].0 { (hi, arg) } else { suffix[t + 1] };
        }
        let mut weakest_inside = (f64::INFINITY, usize::MAX);
        for t in 0..depth {
            let (lo, arg, _, _) = path[t];
            if lo < weakest_inside.0 {
                weakest_inside = (lo, arg);
            }
            let strongest_outside = suffix[t + 1];
            if strongest_outside.1 != usize::MAX && weakest_inside.0 <= strongest_outside.0 {
                let j = weakest_inside.1;
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                return Ok(TcCheck::Violated {
                    i: ItemId(a),
                    j: ItemId(b),
                    k: ItemId(strongest_outside.1),
                });
            }
        }
    }
    Ok(TcCheck::Holds)
}

/// Literal triple enumeration over every cluster, `O(N^3)` or worse. Kept as
/// the reference the fast check is tested against.
pub fn check_tc_direct(tree: &ClusterTree, sim: &SimilarityMatrix) -> Result<TcCheck> {
    check_dims(tree, sim)?;
    let n = tree.n_items();
    for id in tree.node_ids() {
        let cluster = tree.leaf_set(id);
        if cluster.len() < 2 || cluster.len() == n {
            continue;
        }
        let inside = cluster.items();
        let outside: Vec<usize> = (0..n).filter(|k| !cluster.contains(*k)).collect();
        for (a, &i) in inside.iter().enumerate() {
            for &j in &inside[a + 1..] {
                let s_ij = sim.get(i, j);
                for &k in &outside {
                    if !(s_ij > sim.get(i, k) && s_ij > sim.get(j, k)) {
                        return Ok(TcCheck::Violated {
                            i: ItemId(i),
                            j: ItemId(j),
                            k: ItemId(k),
                        });
                    }
                }
            }
        }
    }
    Ok(TcCheck::Holds)
}
