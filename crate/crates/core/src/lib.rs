//! Construction and certification of warped-product metrics with nonnegative
//! Ricci curvature.
//!
//! The crate builds explicit piecewise-analytic warp profiles for metrics of
//! the form `dr² + phi² g_{S^m} + psi² g_{S^n} + rho² g_{S²}` (and their
//! N-fiber generalizations), glues them across scales into telescoping
//! families, and certifies the claimed curvature and collapsing behavior
//! numerically: Ricci nonnegativity over the whole ray, apex boundary
//! conditions, and annulus window estimates at prescribed rescaling scales.

pub mod constructions;
pub mod curvature;
pub mod doc;
pub mod num;
pub mod profiles;
pub mod verify;

pub use num::{WInt, Wide};
