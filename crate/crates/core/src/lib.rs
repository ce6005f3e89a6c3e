// NaN must fail range checks, so they are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod fock;
pub mod mc;
pub mod mixture;
pub mod pulse;
pub mod quad;
pub mod specfun;
pub mod thermal;
pub mod units;

pub use error::{Error, Result};
pub use units::PhysicalContext;
