//! Subset sums in finite abelian groups.
//!
//! Groups are products of cyclic factors with elements stored as
//! mixed-radix indices; subsets are bitsets over those indices. On top of
//! the arithmetic sit the subset-sum kernels, the classifications
//! (completeness, niceness, critical numbers), exhaustive verifiers and
//! the extremal constructions.

pub mod cache;
pub mod constructions;
pub mod dfs;
pub mod error;
pub mod group;
pub mod num;
pub mod par;
pub mod report;
pub mod scan;
pub mod set;
pub mod structure;
pub mod subgroup;
pub mod sumset;
pub mod text;
pub mod theory;

pub use error::{Error, Result};
pub use group::{make_group, GroupElement, GroupSpec};
pub use set::{ElementSet, MultisetSequence};
pub use subgroup::Subgroup;
