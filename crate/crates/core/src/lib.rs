//! Discrete s-energies of finite point sets, discrete Hausdorff dimension
//! estimates for point-set families, synthetic fractal generators, the
//! concentration bounds implied by energy growth, and a small PCA.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// `is_multiple_of` needs a newer toolchain than the declared minimum.
#![allow(clippy::manual_is_multiple_of)]

pub mod bounds;
pub mod dimension;
pub mod energy;
pub mod error;
pub mod generators;
pub mod geometry;
pub mod pca;
pub mod repro;

pub use error::{Error, Result};
pub use geometry::{Point, PointFamily, PointSet, RegionSpec, Shape};
