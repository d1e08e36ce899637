//! Maximum-likelihood fitting of over-dispersed count distributions.
//!
//! The crate covers negative binomial, zero-inflated (or zero-deflated)
//! geometric, hurdle geometric, geometric and Poisson models for frequency
//! data. Zero-inflated and hurdle geometric models have closed-form maximum
//! likelihood estimators; the negative binomial shape is found with a
//! bracketed, safeguarded Newton iteration on its score equation.
//!
//! Modules, bottom-up:
//!
//! - [`specfn`]: log-gamma, digamma, trigamma and the χ² survival function.
//! - [`dist`]: the [`CountModel`] family with pmf, pgf and moments.
//! - [`estimate`]: [`FrequencySample`], estimators, log-likelihood and scores.
//! - [`gof`]: expected counts, tail pooling, χ² goodness of fit, AIC ranking.
//! - [`sim`]: seeded sampling, a brute-force grid oracle, recovery experiments.
//!
//! The crate is `no_std` and only needs `alloc`.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` style checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dist;
pub mod estimate;
pub mod gof;
mod math;
pub mod sim;
pub mod specfn;

pub use dist::{BaseModel, CountModel, ModelError, Moments};
pub use estimate::{EstimateError, FitMethod, FitResult, FrequencySample, SampleError};
pub use gof::{ComparisonReport, Family, GofError, GofResult};
pub use specfn::DomainError;
