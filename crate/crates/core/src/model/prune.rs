use crate::error::{Error, Result};
use crate::model::{ClusterTree, LeafSet, NodeId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrunedNode {
    pub leaf_set: LeafSet,
    /// Indices into [`PrunedTree::nodes`].
    pub children: Option<(usize, usize)>,
}

impl PrunedNode {
    pub fn is_leaf_cluster(&self) -> bool {
        self.children.is_none()
    }
}

/// A hierarchy cut off below a minimum cluster size.
///
/// Internal nodes are the clusters with at least `n_min` items that still
/// split into two parts, at least one of which is also that large. Everything
/// else hanging directly off them becomes a leaf-cluster, including the
/// undersized sibling of a large child, so the leaf-clusters always partition
/// the item set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrunedTree {
    pub n_min: usize,
    /// Pre-order; `nodes[0]` is the root.
    pub nodes: Vec<PrunedNode>,
}

impl PrunedTree {
    pub fn leaf_clusters(&self) -> impl Iterator<Item = &LeafSet> + '_ {
        self.nodes
            .iter()
            .filter(|n| n.is_leaf_cluster())
            .map(|n| &n.leaf_set)
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[PrunedNode], k: usize) -> usize {
            match nodes[k].children {
                None => 1,
                Some((l, r)) => 1 + walk(nodes, l).max(walk(nodes, r)),
            }
        }
        walk(&self.nodes, 0)
    }
}

pub fn prune_to_size(tree: &ClusterTree, n_min: usize) -> Result<PrunedTree> {
    let n = tree.n_items();
    if n_min == 0 || n_min > n {
        return Err(Error::InvalidParameter(format!(
            "n_min must lie in [1, {n}], got {n_min}"
        )));
    }
    let mut nodes = Vec::new();
    let mut stack: Vec<(NodeId, Option<(usize, bool)>)> = vec![(tree.root(), None)];
    while let Some((id, parent_slot)) = stack.pop() {
        let k = nodes.len();
        if let Some((p, is_right)) = parent_slot {
            let entry: &mut PrunedNode = &mut nodes[p];
            let (l, r) = entry.children.get_or_insert((usize::MAX, usize::MAX));
            if is_right {
                *r = k;
            } else {
                *l = k;
            }
        }
        let node = tree.node(id);
        let split = node.size() >= n_min
            && node
                .children()
                .is_some_and(|(l, r)| tree.node(l).size().max(tree.node(r).size()) >= n_min);
        nodes.push(PrunedNode {
            leaf_set: tree.leaf_set(id),
            children: None,
        });
        if split {
            let (l, r) = node.children().expect("split node is internal");
            stack.push((r, Some((k, true))));
            stack.push((l, Some((k, false))));
        }
    }
    Ok(PrunedTree { n_min, nodes })
}
