//! Numerical laboratory for non-central limit theorems of long-range dependent isotropic
//! Gaussian random fields.
//!
//! The modules build on each other bottom-up:
//! [`specfun`] and [`quad`] provide numerical kernels, [`covmodels`] the covariance families,
//! [`geometry`] the observation sets, [`hermite`] the functional expansions, [`fieldsim`]
//! the field simulator, [`rosenblatt`] the limit-law sampler, [`ratelab`] the rate bounds and
//! [`expcli`] the experiment drivers behind the command-line tool.

pub mod covmodels;
pub mod expcli;
pub mod error;
pub mod fieldsim;
pub mod geometry;
pub mod hermite;
pub mod quad;
pub mod ratelab;
pub mod rosenblatt;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
