//! Tree compositions, trees of partitions, and the conjugacy classes and
//! irreducible representations of the automorphism group of a finite rooted
//! tree.

pub mod automorphism;
pub mod composition;
pub mod error;
pub mod oracle;
pub mod partition_tree;
pub mod refinement;
pub mod representation;
pub mod tree_core;
pub mod verify;

pub use error::{Error, Result};
