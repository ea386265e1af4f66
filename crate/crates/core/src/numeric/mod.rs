//! Special functions, quadrature and compensated summation.

pub mod quad;
pub mod special;
pub mod sum;
