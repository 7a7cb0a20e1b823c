//! Hierarchical clustering from a random subset of pairwise similarities.
//!
//! Items are grouped by single-linkage agglomeration over the observed
//! similarities only, with every unobserved value treated as zero. Under the
//! tight-clustering condition a true cluster comes back intact exactly when
//! the observed pairs inside it connect all of its members, so recovery
//! reduces to connectivity of random subgraphs. [`bounds`] evaluates the
//! sampling rates that make that happen with high probability, and
//! [`harness`] checks them by simulation.

pub mod bounds;
pub mod clustering;
pub mod error;
pub mod harness;
pub mod model;
pub mod rng;
pub mod sampling;
pub mod synth;

pub use error::{Error, Result};
