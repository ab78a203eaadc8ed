//! Machine-readable record of a `test` run.

use progcens::experiments::TestReport;
use progcens::mle::LocationScaleFit;
use progcens::{CensoringScheme, StatisticKind};
use serde::{Deserialize, Serialize};

/// JSON Schema (draft 2020-12) describing [`ReportDocument`].
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub reps: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticResult {
    pub statistic: StatisticKind,
    pub observed: f64,
    pub critical_value: f64,
    /// Present for two-sided statistics.
    pub lower_critical_value: Option<f64>,
    pub p_value: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    /// Arguments after the program name.
    pub command: Vec<String>,
    pub config: RunConfig,
    pub scheme: CensoringScheme,
    pub fit: LocationScaleFit,
    pub results: Vec<StatisticResult>,
    pub any_rejected: bool,
}

impl ReportDocument {
    pub fn new(command: Vec<String>, config: RunConfig, scheme: CensoringScheme, reports: &[TestReport]) -> Self {
        let results: Vec<StatisticResult> = reports
            .iter()
            .map(|r| StatisticResult {
                statistic: r.statistic,
                observed: r.observed,
                critical_value: r.critical_value,
                lower_critical_value: r.lower_critical_value,
                p_value: r.p_value,
                reject: r.reject,
            })
            .collect();
        ReportDocument {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            config,
            scheme,
            fit: reports[0].fit,
            any_rejected: results.iter().any(|r| r.reject),
            results,
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self).map(|mut s| {
            s.push('\n');
            s
        })
    }
}
