//! Sparse principal components by projection.
//!
//! The sparse component at each step is the least-squares projection of the
//! current principal component onto a small block of the original variables,
//! chosen greedily until a target fraction `alpha` of the component's variance
//! is reproduced. Components stay interpretable as combinations of a few
//! columns while the variance they explain is bounded below by `alpha` times
//! that of the matching principal component.

// `!(x > 0.0)` is used on purpose so that NaN fails positivity checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod bench;
pub mod cli;
pub mod data;
pub mod eigen;
pub mod fit;
mod linalg;
pub mod metrics;
pub mod numfmt;
pub mod select;

#[cfg(test)]
#[path = "../tests/common/oracles.rs"]
mod oracles;

pub use data::{load_csv, preprocess, CsvOptions, DataError, DataMatrix, MissingPolicy, RawTable, Scaling};
pub use eigen::{EigenError, PowerOptions};
pub use fit::{fit, FitConfig, FitError, FitResult, Method, SparseComponent, StopReason, StopRule};
pub use linalg::apply_sign_rule;
pub use select::{forward_select, SelectConfig, SelectError, SelectionResult};
