use thiserror::Error;

/// Errors produced by scheme validation, estimation, statistics and the
/// Monte Carlo drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("scheme inconsistent: m + sum(r) = {total} but n = {n}")]
    SchemeInconsistent { n: usize, total: usize },

    #[error(
        "scheme infeasible at failure {index}: {remaining} units on test, cannot fail one and withdraw {removals}"
    )]
    SchemeInfeasible {
        index: usize,
        remaining: usize,
        removals: usize,
    },

    #[error("scheme is empty (m = 0)")]
    EmptyScheme,

    #[error("removal vector has {len} entries but m = {m}")]
    LengthMismatch { m: usize, len: usize },

    #[error("scheme family 4 needs m divisible by 5, got m = {m}")]
    IndivisibleM { m: usize },

    #[error("unknown scheme family {0} (expected 1..=5)")]
    UnknownFamily(u32),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("MLE did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("statistic T undefined: all normalized spacings are zero")]
    DegenerateDenominator,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{failures} replicates failed to produce a statistic (cap {cap})")]
    TooManyFailures { failures: usize, cap: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
