use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("schema: {0}")]
    Schema(String),
    #[error("header/schema mismatch: {0}")]
    HeaderMismatch(String),
    #[error("row {row}, column `{column}`: `{token}` is not a number")]
    NotNumeric {
        row: usize,
        column: String,
        token: String,
    },
    #[error("row {row}, column `{column}`: {value} outside declared bounds [{min}, {max}]")]
    OutOfBounds {
        row: usize,
        column: String,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("row {row}, column `{column}`: `*` is reserved for suppression")]
    ReservedValue { row: usize, column: String },
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("table is empty")]
    EmptyTable,
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("hierarchy `{attribute}`: {reason}")]
    Hierarchy { attribute: String, reason: String },
    #[error("hierarchy `{attribute}`: value `{value}` is not a leaf")]
    UnknownLeaf { attribute: String, value: String },
    #[error("hierarchy `{attribute}`: level {level} outside 0..={height}")]
    LevelOutOfRange {
        attribute: String,
        level: usize,
        height: usize,
    },
    #[error("zero-width numeric domain for `{0}`")]
    ZeroWidthDomain(String),
    #[error("level vector has {found} entries, expected {expected}")]
    LevelCount { found: usize, expected: usize },
    #[error("invalid constraint: {0}")]
    Constraint(String),
    #[error("distributions have different supports")]
    SupportMismatch,
    #[error("{count} QID subsets of size {l} exceed the cap of {cap}")]
    TooManySubsets { count: u64, l: usize, cap: u64 },
    #[error("lattice has {nodes} nodes, over the cap of {cap}; reduce QIDs or use LKC mode")]
    LatticeTooLarge { nodes: u128, cap: u64 },
    #[error("k = {k} exceeds {n} items")]
    KTooLarge { k: usize, n: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("degree sequence could not be realized; residual deficits {residual:?}")]
    Unrealizable { residual: Vec<usize> },
    #[error("privacy budget exhausted: requested {requested}, remaining {remaining}")]
    BudgetExhausted { requested: f64, remaining: f64 },
}
