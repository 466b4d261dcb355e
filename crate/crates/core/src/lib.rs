// Negated float comparisons are how NaN gets rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod maps;
pub mod point;
pub mod polygon;
pub mod raster;
pub mod snake;

pub use error::{Error, Result};
pub use point::Point;
