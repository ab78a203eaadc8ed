//! Command-line front end: normality tests on censored data files, Monte
//! Carlo tables, and regeneration of the published tables.

pub mod app;
pub mod data;
pub mod error;
pub mod output;
pub mod reference;
pub mod report;
pub mod reproduce;
pub mod select;

pub use app::run;
pub use error::{CliError, CliResult};
