//! Items, hierarchies, similarity matrices, observation masks, and the
//! structural queries over them.

mod mask;
mod prune;
mod similarity;
mod tc;
mod tree;

pub use mask::{pair_count, ObservationMask};
pub use prune::{prune_to_size, PrunedNode, PrunedTree};
pub use similarity::{SimilarityMatrix, MIN_SIMILARITY};
pub use tc::{check_tc, check_tc_direct, TcCheck};
pub use tree::{hierarchy_from_json, ClusterTree, Hierarchy, ItemId, LeafSet, NodeId, NodeKind, TreeNode};
