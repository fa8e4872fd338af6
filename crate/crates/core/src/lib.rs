//! Numerical laboratory for anisotropic higher-order mean curvatures and the
//! stability of the Wulff shape.
//!
//! The crate is organised bottom-up:
//!
//! * [`anisotropy`]: the anisotropy function `F`, the operator `A_F`, the
//!   Cahn–Hoffman map and convexity scans.
//! * [`geometry`]: closed hypersurfaces sampled on chart grids, surface
//!   differential operators and normal-graph variations.
//! * [`curvalg`]: pointwise algebra of the F-Weingarten operator
//!   (`σ_r`, `H_r^F`, Newton operators, Maclaurin-type inequalities).
//! * [`functionals`]: anisotropic r-areas, enclosed volume, Minkowski-type
//!   integral identities and first-variation checks.
//! * [`stability`]: the Jacobi operator and the second-variation pipeline
//!   for the weighted (r, s)-area.
//! * [`export`]: CSV tables and OFF meshes.

pub mod anisotropy;
pub mod curvalg;
pub mod error;
pub mod export;
pub mod fd;
pub mod functionals;
pub mod geometry;
pub mod parallel;
pub mod sphere;
pub mod stability;

pub use error::{Error, Result};
