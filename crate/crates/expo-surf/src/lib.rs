//! Surface area of convex bodies under the exponential measure with density
//! proportional to `exp(-|y|^p / p)` on R^n: exact formulas for spheres and
//! hyperplanes, Monte Carlo estimators for general bodies, the theoretical
//! bounds `C(p) n^(3/4 - 1/p)` and `e^(-9/4) n^(3/4 - 1/p)` on the maximal
//! surface area, and the random-polytope construction realizing the lower
//! bound.

pub mod bodies;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod measure;
pub mod quadrature;
pub mod randpoly;
pub mod rng;
pub mod special;
pub mod surface;
pub mod verify;

pub use bodies::ConvexBody;
pub use error::{Error, Result};
pub use measure::MeasureParams;
pub use surface::{EstimateOpts, Method, SurfaceEstimate, SurfaceEstimator};
