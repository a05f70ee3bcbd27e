//! Hidden-variable recurrent fractal interpolation.
//!
//! Builds recurrent iterated function systems over one-dimensional datasets
//! and rectangular grids in which each region is driven by four
//! function-valued contractivity factors acting on a (visible, hidden) value
//! pair. The crate constructs the map systems, certifies their contraction
//! properties under a weighted metric, solves the associated operator to its
//! interpolating fixed point on a sampled grid, samples the attractor with a
//! Markov chaos game, and verifies the results with reproducible
//! machine-readable checks.
//!
//! Entry points:
//!
//! * [`partition`] — datasets, region/domain partitions, connection matrices.
//! * [`expr`] / [`factor`] — the factor expression language and bound
//!   estimation.
//! * [`univariate`] — curve systems: build, solve, certify, chaos game.
//! * [`bivariate`] — surface systems with transfinite boundary blends.
//! * [`verify`] — residual and contraction checks as reports.

pub mod bivariate;
pub mod error;
pub mod expr;
pub mod factor;
pub mod field;
pub mod partition;
pub mod univariate;
pub mod verify;

pub use error::{Error, Result};
pub use expr::{Dim, Expr};
pub use factor::{BoundsMode, FactorLists, FactorSpec};
pub use field::{Pair, SampledField1D, SampledField2D};
pub use partition::{
    ConnectionMatrix, Domain2D, HiddenDataset1D, HiddenDataset2D, Orientation, Partition1D,
    Partition2D,
};
pub use univariate::{
    AffineMap, ContractionReport, MapSystem1D, Solution1D, TrajectoryCloud1D,
    DEFAULT_HIDDEN_MARGIN,
};
pub use bivariate::{BlendFunctions2D, MapSystem2D, ProductMap, Solution2D, TrajectoryCloud2D};
pub use verify::VerificationReport;
