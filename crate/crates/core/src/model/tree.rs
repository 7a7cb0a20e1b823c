use std::collections::BTreeSet;
use std::fmt;

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Dense zero-based item index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub usize);

impl From<usize> for ItemId {
    fn from(index: usize) -> Self {
        ItemId(index)
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index of a node inside a [`ClusterTree`] arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

/// Canonical cluster identity: the sorted list of member items.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LeafSet(Vec<usize>);

impl LeafSet {
    pub fn new(mut items: Vec<usize>) -> Self {
        items.sort_unstable();
        items.dedup();
        LeafSet(items)
    }

    pub fn from_items(items: &[ItemId]) -> Self {
        Self::new(items.iter().map(|i| i.0).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: usize) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    pub fn items(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for LeafSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, item) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{item}")?;
        }
        write!(f, "}}")
    }
}

/// Nested, serializable form of a binary hierarchy.
///
/// JSON shape: `{"leaf": 3}` or `{"children": [<node>, <node>]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Hierarchy {
    Leaf { leaf: usize },
    Branch { children: Box<[Hierarchy; 2]> },
}

impl Hierarchy {
    pub fn leaf(item: usize) -> Self {
        Hierarchy::Leaf { leaf: item }
    }

    pub fn branch(left: Hierarchy, right: Hierarchy) -> Self {
        Hierarchy::Branch {
            children: Box::new([left, right]),
        }
    }

    /// Items under this node, in left-to-right order.
    pub fn items(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            match node {
                Hierarchy::Leaf { leaf } => out.push(*leaf),
                Hierarchy::Branch { children } => {
                    stack.push(&children[1]);
                    stack.push(&children[0]);
                }
            }
        }
        out
    }

    /// Newick rendering. Convenience export only; JSON is the exchange format.
    pub fn to_newick(&self) -> String {
        fn walk(node: &Hierarchy, out: &mut String) {
            match node {
                Hierarchy::Leaf { leaf } => out.push_str(&leaf.to_string()),
                Hierarchy::Branch { children } => {
                    out.push('(');
                    walk(&children[0], out);
                    out.push(',');
                    walk(&children[1], out);
                    out.push(')');
                }
            }
        }
        let mut out = String::new();
        walk(self, &mut out);
        out.push(';');
        out
    }
}

// Hand-written so nested nodes are read straight off the stream rather than
// buffered the way `#[serde(untagged)]` does.
impl<'de> Deserialize<'de> for Hierarchy {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct NodeVisitor;

        impl<'de> Visitor<'de> for NodeVisitor {
            type Value = Hierarchy;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str(r#"{"leaf": <int>} or {"children": [<node>, <node>]}"#)
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Hierarchy, A::Error> {
                let key: String = map
                    .next_key()?
                    .ok_or_else(|| de::Error::custom("empty tree node"))?;
                let node = match key.as_str() {
                    "leaf" => Hierarchy::Leaf {
                        leaf: map.next_value()?,
                    },
                    "children" => Hierarchy::Branch {
                        children: map.next_value()?,
                    },
                    other => return Err(de::Error::unknown_field(other, &["leaf", "children"])),
                };
                if let Some(extra) = map.next_key::<String>()? {
                    return Err(de::Error::custom(format!("unexpected key {extra:?} in tree node")));
                }
                Ok(node)
            }
        }

        deserializer.deserialize_map(NodeVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Leaf(ItemId),
    Internal { left: NodeId, right: NodeId },
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    pub depth: usize,
    // Leaves of this node occupy `order[start..end]`.
    start: usize,
    end: usize,
}

impl TreeNode {
    pub fn size(&self) -> usize {
        self.end - self.start
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf(_))
    }

    pub fn children(&self) -> Option<(NodeId, NodeId)> {
        match self.kind {
            NodeKind::Internal { left, right } => Some((left, right)),
            NodeKind::Leaf(_) => None,
        }
    }
}

/// Full binary hierarchy over items `0..n`.
///
/// Nodes live in an arena in pre-order, so the root is node 0 and every
/// parent precedes its children. Each node's leaves form a contiguous run
/// of a single leaf ordering, which keeps leaf-set queries allocation-free.
#[derive(Debug, Clone)]
pub struct ClusterTree {
    nodes: Vec<TreeNode>,
    order: Vec<ItemId>,
    leaf_node: Vec<NodeId>,
}

impl ClusterTree {
    /// Builds a tree whose leaves are exactly `0..n` (each once).
    pub fn from_hierarchy(h: &Hierarchy) -> Result<Self> {
        let n = count_leaves(h);
        let mut tree = ClusterTree {
            nodes: Vec::with_capacity(2 * n - 1),
            order: Vec::with_capacity(n),
            leaf_node: vec![NodeId(usize::MAX); n],
        };
        enum Task<'a> {
            Visit(&'a Hierarchy, Option<NodeId>, usize),
            Close(NodeId),
        }
        let mut stack = vec![Task::Visit(h, None, 0)];
        let mut pending_children: Vec<Vec<NodeId>> = Vec::new();
        while let Some(task) = stack.pop() {
            match task {
                Task::Visit(node, parent, depth) => {
                    let id = NodeId(tree.nodes.len());
                    if let Some(p) = parent {
                        pending_children[p.0].push(id);
                    }
                    pending_children.push(Vec::new());
                    let start = tree.order.len();
                    match node {
                        Hierarchy::Leaf { leaf } => {
                            let item = *leaf;
                            if item >= n {
                                return Err(Error::InvalidTree(format!(
                                    "leaf {item} out of range for {n} leaves"
                                )));
                            }
                            if tree.leaf_node[item].0 != usize::MAX {
                                return Err(Error::InvalidTree(format!("leaf {item} appears twice")));
                            }
                            tree.leaf_node[item] = id;
                            tree.order.push(ItemId(item));
                            tree.nodes.push(TreeNode {
                                kind: NodeKind::Leaf(ItemId(item)),
                                parent,
                                depth,
                                start,
                                end: start + 1,
                            });
                        }
                        Hierarchy::Branch { children } => {
                            tree.nodes.push(TreeNode {
                                kind: NodeKind::Internal { left: id, right: id },
                                parent,
                                depth,
                                start,
                                end: start,
                            });
                            stack.push(Task::Close(id));
                            stack.push(Task::Visit(&children[1], Some(id), depth + 1));
                            stack.push(Task::Visit(&children[0], Some(id), depth + 1));
                        }
                    }
                }
                Task::Close(id) => {
                    let kids = &pending_children[id.0];
                    let node = &mut tree.nodes[id.0];
                    node.kind = NodeKind::Internal {
                        left: kids[0],
                        right: kids[1],
                    };
                    node.end = tree.order.len();
                }
            }
        }
        Ok(tree)
    }

    pub fn n_items(&self) -> usize {
        self.order.len()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id.0]
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &TreeNode)> + '_ {
        self.nodes.iter().enumerate().map(|(k, n)| (NodeId(k), n))
    }

    pub fn leaf_of(&self, item: ItemId) -> NodeId {
        self.leaf_node[item.0]
    }

    /// Leaves under `id`, in tree order (not sorted).
    pub fn leaves(&self, id: NodeId) -> &[ItemId] {
        let node = &self.nodes[id.0];
        &self.order[node.start..node.end]
    }

    pub fn leaf_set(&self, id: NodeId) -> LeafSet {
        LeafSet::from_items(self.leaves(id))
    }

    /// Deepest node whose leaf set holds both items.
    pub fn lca(&self, i: ItemId, j: ItemId) -> Result<NodeId> {
        let n = self.n_items();
        for item in [i, j] {
            if item.0 >= n {
                return Err(Error::ItemOutOfRange { item: item.0, n });
            }
        }
        if i == j {
            return Err(Error::SameItem(i.0));
        }
        let mut a = self.leaf_of(i);
        let mut b = self.leaf_of(j);
        while self.nodes[a.0].depth > self.nodes[b.0].depth {
            a = self.nodes[a.0].parent.expect("non-root has parent");
        }
        while self.nodes[b.0].depth > self.nodes[a.0].depth {
            b = self.nodes[b.0].parent.expect("non-root has parent");
        }
        while a != b {
            a = self.nodes[a.0].parent.expect("non-root has parent");
            b = self.nodes[b.0].parent.expect("non-root has parent");
        }
        Ok(a)
    }

    /// Leaf sets of every node with at least `n_min` items.
    pub fn cluster_set(&self, n_min: usize) -> BTreeSet<LeafSet> {
        self.node_ids()
            .filter(|&id| self.node(id).size() >= n_min)
            .map(|id| self.leaf_set(id))
            .collect()
    }

    pub fn to_hierarchy(&self) -> Hierarchy {
        self.subtree_hierarchy(self.root())
    }

    pub fn subtree_hierarchy(&self, id: NodeId) -> Hierarchy {
        // Post-order rebuild without recursion; caterpillars get deep.
        let mut built: Vec<Option<Hierarchy>> = vec![None; self.nodes.len()];
        let mut stack = vec![(id, false)];
        while let Some((cur, expanded)) = stack.pop() {
            match self.nodes[cur.0].kind {
                NodeKind::Leaf(item) => built[cur.0] = Some(Hierarchy::leaf(item.0)),
                NodeKind::Internal { left, right } => {
                    if expanded {
                        let l = built[left.0].take().expect("left built");
                        let r = built[right.0].take().expect("right built");
                        built[cur.0] = Some(Hierarchy::branch(l, r));
                    } else {
                        stack.push((cur, true));
                        stack.push((right, false));
                        stack.push((left, false));
                    }
                }
            }
        }
        built[id.0].take().expect("root built")
    }

    /// Relabels every leaf `i` as `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_items() {
            return Err(Error::DimensionMismatch {
                expected: self.n_items(),
                found: perm.len(),
            });
        }
        let mut h = self.to_hierarchy();
        let mut stack = vec![&mut h];
        while let Some(node) = stack.pop() {
            match node {
                Hierarchy::Leaf { leaf } => *leaf = perm[*leaf],
                Hierarchy::Branch { children } => {
                    let [l, r] = &mut **children;
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        Self::from_hierarchy(&h)
    }
}

fn count_leaves(h: &Hierarchy) -> usize {
    let mut count = 0;
    let mut stack = vec![h];
    while let Some(node) = stack.pop() {
        match node {
            Hierarchy::Leaf { .. } => count += 1,
            Hierarchy::Branch { children } => {
                stack.push(&children[0]);
                stack.push(&children[1]);
            }
        }
    }
    count
}

/// Parses tree JSON. Nesting depth is unbounded since unbalanced trees over
/// many items nest deeply.
pub fn hierarchy_from_json(text: &str) -> Result<Hierarchy> {
    let mut de = serde_json::Deserializer::from_str(text);
    de.disable_recursion_limit();
    let h = Hierarchy::deserialize(serde_stacker::Deserializer::new(&mut de))?;
    de.end()?;
    Ok(h)
}
