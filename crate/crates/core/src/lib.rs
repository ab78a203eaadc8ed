//! Goodness-of-fit testing for normality under progressive Type-II censoring.
//!
//! The pipeline is: a [`censoring::CensoringScheme`] and its observed
//! failures form a [`simulate::CensoredSample`]; [`mle::fit_normal`] fits the
//! normal null; [`gof`] turns the fitted sample into any of twelve test
//! statistics; [`experiments`] calibrates them by Monte Carlo.

pub mod censoring;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod gof;
pub mod mle;
pub mod rng;
pub mod simulate;
pub mod special;

pub use censoring::{
    catalog_scheme, catalog_table6, scheme_family, validate_scheme, CensoringScheme, LabeledScheme,
};
pub use distributions::DistributionFamily;
pub use error::{Error, Result};
pub use gof::StatisticKind;
pub use simulate::CensoredSample;
