use thiserror::Error;

use crate::point::Point;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {0} lies outside the closed strip")]
    OutsideStrip(Point),

    #[error("point {0} is not in the image of the corridor map")]
    NotInImage(Point),

    #[error("point {0} lies outside the bend rectangle [0, 1] x [0, 2]")]
    OutsideRectangle(Point),

    #[error("point {0} lies outside the bend half-annulus")]
    OutsideAnnulus(Point),

    #[error("height {0} lies below the base of the strip")]
    BelowBase(f64),

    #[error("bend {index} is beyond the table cap of {cap} bends")]
    TableExhausted { index: usize, cap: usize },

    #[error("point {0} is not in the snake")]
    NotInSnake(Point),

    #[error("map cannot be evaluated at {0}")]
    Unevaluable(Point),

    #[error("orbit overflowed to infinity")]
    EscapedToInfinity,

    #[error("inconsistent classifier configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
