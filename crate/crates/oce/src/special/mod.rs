//! Scalar special functions underpinning every probability computation in
//! the crate: the univariate normal, Owen's T, the bivariate normal
//! distribution function and truncated normals.
//!
//! Everything here is pure and reentrant; sampling takes an explicit RNG
//! borrowed from the caller.

mod normal;
mod owen;
mod truncated;

pub use normal::{normal_mass, std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf};
pub use owen::{bvn_cdf, owen_t};
pub use truncated::{TruncatedNormal, DEGENERATE_MASS};

pub(crate) use normal::std_normal_quantile_unchecked;
pub(crate) use owen::bvn_cdf_raw;
