// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod boundary;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod isometry;
pub mod oracle;
pub mod sampling;
pub mod stats;
pub mod walk;

pub use error::{LabError, Result};
