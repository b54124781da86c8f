//! Numerical building blocks: quadrature, truncated series, special functions
//! and a double-double scalar.

pub mod dd;
pub mod quad;
pub mod series;
pub mod special;
