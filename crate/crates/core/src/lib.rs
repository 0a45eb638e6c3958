//! Bottleneck degree of smooth projective and affine varieties from their
//! polar classes, bottleneck polynomial systems, and a multistart Newton
//! finder for real bottlenecks.

pub mod bnd;
pub mod expr;
pub mod poly;
pub mod profiles;
pub mod regression;
pub mod ring;
pub mod schubert;
pub mod solver;
pub mod system;
