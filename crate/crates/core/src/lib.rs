//! Anonymization engine for tabular and graph microdata.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It provides:
//!
//! * [`dataset`] and [`hierarchy`]: the typed record table and per-attribute
//!   generalization trees whose root `*` stands for full suppression.
//! * [`privacy`]: equivalence-class partitioning plus k-anonymity,
//!   ℓ-diversity, t-closeness and LKC checks.
//! * [`utility`]: leaf-count and interval information loss.
//! * [`lattice`] and [`anonymizer`]: the full-domain generalization lattice,
//!   record suppression and the utility-optimal search.
//! * [`mdav`]: MDAV microaggregation.
//! * [`graph`]: k-degree anonymization and the degree-knowledge attack.
//! * [`attacks`]: synthetic data, linkage/homogeneity/membership risk and the
//!   reconstruction attack with its classifier experiments.
//! * [`dp`]: Laplace count queries with a sequential-composition accountant.
//!
//! The `parallel` feature (on by default) evaluates lattice nodes on a rayon
//! pool; results are identical with or without it.
#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod anonymizer;
pub mod attacks;
pub mod dataset;
pub mod dp;
mod error;
pub mod graph;
pub mod hierarchy;
pub mod lattice;
pub mod mdav;
mod math;
pub mod privacy;
pub mod utility;

pub use crate::anonymizer::{
    apply_transformation, search_optimal, AnonymizationResult, Candidate, SearchOutcome,
};
pub use crate::dataset::{AttributeSchema, Dataset, IngestLog, Kind, Role, Value};
pub use crate::error::{Error, Result};
pub use crate::hierarchy::{Hierarchy, HierarchySet, Interval};
pub use crate::lattice::{build_lattice, Lattice, LatticeNode, NodeStatus};
pub use crate::privacy::{EquivalenceClass, PrivacyConstraint, SensitiveDistribution};
pub use crate::utility::UtilityReport;

/// Reserved label for a suppressed or fully generalized cell.
pub const SUPPRESSED: &str = "*";
/// Label that missing input cells are mapped to.
pub const MISSING: &str = "?";
/// Crate version, echoed in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
