//! Local and global geometry of surfaces in four-dimensional Euclidean space.

// `!(x < t)` is used on purpose so that NaN fails every check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod align;
pub mod bonnet;
pub mod catalog;
pub mod error;
pub mod figures;
pub mod frame;
pub mod invariants;
pub mod io;
pub mod jet;
pub mod meridian;
pub mod net;
pub mod report;
pub mod surface;
pub mod tolerances;

pub use error::{Error, ErrorCategory, Result};
