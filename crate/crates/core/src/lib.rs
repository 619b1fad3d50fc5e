//! Transformations of probability densities and the informational
//! functionals they connect.
//!
//! The crate has three layers:
//!
//! - representation: [`density`] (densities on an interval with analytic
//!   families), [`gtrig`] (generalized trigonometric functions), and the
//!   numerical substrate [`quad`] / [`roots`];
//! - the transformation algebra in [`transforms`]: differential-escort,
//!   one-parameter down/up, their biparametric interpolation, and closed-form
//!   compositions of them;
//! - evaluation and verification: [`functionals`] (moments, entropy powers,
//!   Fisher-type measures, cumulative and tail functionals),
//!   [`complexity`] (scale-invariant ratios and the conjugated transforms
//!   that make them monotone), and [`verify`] (a case registry that checks
//!   every identity, sharp inequality, and monotonicity property numerically
//!   and emits machine-readable reports).

#![forbid(unsafe_code)]

pub mod quad;
pub mod roots;
pub mod density;
pub mod gtrig;
pub mod transforms;
pub mod functionals;
pub mod complexity;
pub mod verify;

pub use density::{Density, DensityFlags, DensitySpec, Support};


