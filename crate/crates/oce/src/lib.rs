//! Ordinal causal effects in latent Gaussian DAG models.
//!
//! Ordinal variables are modelled as marginal discretisations of latent
//! Gaussian variables whose joint law factorises over a DAG. This crate
//! computes the effect of shifting one ordinal variable between levels on
//! the level probabilities of another:
//!
//! * closed form, via the bivariate normal distribution function and
//!   Owen's T ([`effects::oce_closed_form`]);
//! * numerically, by integrating atomic interventions against a policy
//!   over the level band ([`effects::oce_numeric`]);
//! * empirically, by simulating the mutilated structural equation model
//!   ([`oracle::oracle_oce`]).
//!
//! [`simulate`] generates random models and ordinal datasets, and
//! [`estimate`] fits thresholds, polychoric correlations and DAG-conditional
//! coefficients back from ordinal data.

pub mod effects;
pub mod error;
pub mod estimate;
pub mod graph;
pub mod intervene;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod rng;
pub mod simulate;
pub mod special;

pub use error::{Error, Result};
pub use graph::Dag;
pub use model::{CovarianceBundle, LatentDagModel};
pub use rng::{RngHandle, StreamRng};
