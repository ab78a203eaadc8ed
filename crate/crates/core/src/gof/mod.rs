//! Goodness-of-fit statistics for progressively censored samples.
//!
//! Every statistic except `T` works on `u[i] = Phi((x[i] - mu_hat) / sigma_hat)`
//! compared against the expected uniforms `mu[i]`: the deviation family
//! (`C+`, `C-`, `C`, `K`, `T1`, `T2`), the spacing family (`G`, `Q`, `G^(k)`)
//! and `H`. `T` normalizes the spacings of the raw observations by the
//! spacings of the expected standard normal progressive order statistics,
//! so it needs no fit at all.

mod scores;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::censoring::{CensoringScheme, ExpectedUniforms};
use crate::error::{Error, Result};
use crate::mle::{fit_normal, LocationScaleFit};
use crate::simulate::CensoredSample;
use crate::special::normal_cdf;

pub use scores::expected_normal_scores;

const U_CLAMP: f64 = 1e-15;

/// One of the twelve test statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StatisticKind {
    CPlus,
    CMinus,
    C,
    K,
    T1,
    T2,
    Greenwood,
    QM,
    GreenwoodK(u32),
    BalakrishnanT,
    H,
}

impl StatisticKind {
    /// The twelve statistics in table order, with `G^(2)` and `G^(3)`.
    pub const ALL: [StatisticKind; 12] = [
        StatisticKind::CPlus,
        StatisticKind::CMinus,
        StatisticKind::C,
        StatisticKind::K,
        StatisticKind::T1,
        StatisticKind::T2,
        StatisticKind::Greenwood,
        StatisticKind::QM,
        StatisticKind::GreenwoodK(2),
        StatisticKind::GreenwoodK(3),
        StatisticKind::BalakrishnanT,
        StatisticKind::H,
    ];

    pub fn name(&self) -> String {
        match self {
            StatisticKind::CPlus => "C+".into(),
            StatisticKind::CMinus => "C-".into(),
            StatisticKind::C => "C".into(),
            StatisticKind::K => "K".into(),
            StatisticKind::T1 => "T1".into(),
            StatisticKind::T2 => "T2".into(),
            StatisticKind::Greenwood => "G".into(),
            StatisticKind::QM => "Q".into(),
            StatisticKind::GreenwoodK(k) => format!("G{k}"),
            StatisticKind::BalakrishnanT => "T".into(),
            StatisticKind::H => "H".into(),
        }
    }

    /// Parses a comma-separated list; `all` expands to [`Self::ALL`].
    pub fn parse_list(text: &str) -> Result<Vec<StatisticKind>> {
        let mut out = Vec::new();
        for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if tok.eq_ignore_ascii_case("all") {
                out.extend(Self::ALL);
            } else {
                out.push(tok.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::Parse("empty statistic list".into()));
        }
        Ok(out)
    }

    /// `T` is centred at 1/2 under the null and departures in either
    /// direction count against normality; every other statistic rejects
    /// for large values only.
    pub fn is_two_sided(&self) -> bool {
        matches!(self, StatisticKind::BalakrishnanT)
    }

    fn needs_fit(&self) -> bool {
        !matches!(self, StatisticKind::BalakrishnanT)
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.trim() {
            "C+" => StatisticKind::CPlus,
            "C-" => StatisticKind::CMinus,
            "C" => StatisticKind::C,
            "K" => StatisticKind::K,
            "T1" => StatisticKind::T1,
            "T2" => StatisticKind::T2,
            "G" => StatisticKind::Greenwood,
            "Q" => StatisticKind::QM,
            "T" => StatisticKind::BalakrishnanT,
            "H" => StatisticKind::H,
            other => {
                let k = other
                    .strip_prefix('G')
                    .and_then(|k| k.parse::<u32>().ok())
                    .ok_or_else(|| Error::Parse(format!("unknown statistic {other:?}")))?;
                if k < 2 {
                    return Err(Error::Parse(format!("G^(k) needs k >= 2, got {k}")));
                }
                StatisticKind::GreenwoodK(k)
            }
        };
        Ok(kind)
    }
}

impl Serialize for StatisticKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for StatisticKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Probability-integral transform of a sample under the fitted null.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedSample {
    pub scheme: CensoringScheme,
    pub u: Vec<f64>,
    pub mu: ExpectedUniforms,
    pub v: Vec<f64>,
}

impl TransformedSample {
    /// Builds from already transformed values; `u` must be nondecreasing in `(0,1)`.
    pub fn from_uniforms(scheme: &CensoringScheme, u: Vec<f64>) -> Result<Self> {
        if u.len() != scheme.m() {
            return Err(Error::LengthMismatch {
                m: scheme.m(),
                len: u.len(),
            });
        }
        if u.iter().any(|&x| !(x > 0.0 && x < 1.0)) || u.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("u must be nondecreasing in (0,1)".into()));
        }
        Ok(Self::build(scheme, u, scheme.expected_uniform()))
    }

    fn build(scheme: &CensoringScheme, u: Vec<f64>, mu: ExpectedUniforms) -> Self {
        let v = u.iter().zip(&mu.mu).map(|(a, b)| a - b).collect();
        TransformedSample {
            scheme: scheme.clone(),
            u,
            mu,
            v,
        }
    }
}

/// `u[i] = Phi((x[i] - mu_hat) / sigma_hat)`, clamped to `[1e-15, 1 - 1e-15]`.
pub fn transform(sample: &CensoredSample, fit: &LocationScaleFit) -> TransformedSample {
    transform_with(sample, fit, sample.scheme().expected_uniform())
}

fn transform_with(
    sample: &CensoredSample,
    fit: &LocationScaleFit,
    mu: ExpectedUniforms,
) -> TransformedSample {
    let u = sample
        .values()
        .iter()
        .map(|&x| normal_cdf((x - fit.mu_hat) / fit.sigma_hat).clamp(U_CLAMP, 1.0 - U_CLAMP))
        .collect();
    TransformedSample::build(sample.scheme(), u, mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdfStatistics {
    pub c_plus: f64,
    pub c_minus: f64,
    pub c: f64,
    pub k: f64,
    pub t1: f64,
    pub t2: f64,
}

pub fn edf_statistics(t: &TransformedSample) -> EdfStatistics {
    edf_from_deviations(&t.v)
}

fn edf_from_deviations(v: &[f64]) -> EdfStatistics {
    let m = v.len() as f64;
    let c_plus = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c_minus = v.iter().map(|x| -x).fold(f64::NEG_INFINITY, f64::max);
    EdfStatistics {
        c_plus,
        c_minus,
        c: c_plus.max(c_minus),
        k: c_plus + c_minus,
        t1: v.iter().map(|x| x * x).sum::<f64>() / m,
        t2: v.iter().map(|x| x.abs()).sum::<f64>() / m,
    }
}

/// One-step spacings `S_i = gamma_i (u[i] - u[i-1])` with `u[0] = 0`.
pub fn spacings(t: &TransformedSample) -> Vec<f64> {
    spacings_from(&t.scheme.gamma_coefficients(), &t.u, 1)
}

/// Overlapping `k`-step spacings `gamma_i (u[i+k-1] - u[i-1])`, taking
/// `u[l] = 1` past the last failure. `k = 1` gives [`spacings`].
pub fn spacings_k(t: &TransformedSample, k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::Domain("k-step spacings need k >= 1".into()));
    }
    Ok(spacings_from(&t.scheme.gamma_coefficients(), &t.u, k))
}

fn spacings_from(gamma: &[usize], u: &[f64], k: usize) -> Vec<f64> {
    let m = u.len();
    // 1-based u with u(0) = 0 and u(l) = 1 for l > m
    let at = |l: usize| -> f64 {
        if l == 0 {
            0.0
        } else if l > m {
            1.0
        } else {
            u[l - 1]
        }
    };
    (1..=m)
        .map(|i| gamma[i - 1] as f64 * (at(i + k - 1) - at(i - 1)))
        .collect()
}

pub fn greenwood(s: &[f64]) -> f64 {
    s.iter().map(|x| x * x).sum()
}

pub fn qm(s: &[f64]) -> f64 {
    greenwood(s) + s.windows(2).map(|w| w[0] * w[1]).sum::<f64>()
}

pub fn greenwood_k(sk: &[f64]) -> f64 {
    greenwood(sk)
}

/// `T = sum_{i=2}^{m-1} (m-i) G_i / ((m-2) sum_{i=2}^{m} G_i)` from the
/// normalized spacings `G_2, ..., G_m`.
pub fn t_from_normalized_spacings(g: &[f64]) -> Result<f64> {
    let m = g.len() + 1;
    if m < 3 {
        return Err(Error::Domain(format!("T needs m >= 3, got {m}")));
    }
    let denom: f64 = g.iter().sum();
    if denom == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    // g[j] holds G_{j+2}
    let num: f64 = g[..m - 2]
        .iter()
        .enumerate()
        .map(|(j, gi)| (m - (j + 2)) as f64 * gi)
        .sum();
    Ok(num / ((m - 2) as f64 * denom))
}

/// `T` on the uniform scale, `G_i = (u[i] - u[i-1]) / (mu[i] - mu[i-1])`.
pub fn balakrishnan_t(t: &TransformedSample) -> Result<f64> {
    let g: Vec<f64> = (1..t.u.len())
        .map(|i| (t.u[i] - t.u[i - 1]) / (t.mu.mu[i] - t.mu.mu[i - 1]))
        .collect();
    t_from_normalized_spacings(&g)
}

/// `T` on the normal-score scale, `G_i = (x[i] - x[i-1]) / (E[Z_i] - E[Z_{i-1}])`.
/// This is the form reported for the `T` statistic.
pub fn balakrishnan_t_normal(sample: &CensoredSample, scores: &[f64]) -> Result<f64> {
    let x = sample.values();
    if scores.len() != x.len() {
        return Err(Error::LengthMismatch {
            m: x.len(),
            len: scores.len(),
        });
    }
    let g: Vec<f64> = (1..x.len())
        .map(|i| (x[i] - x[i - 1]) / (scores[i] - scores[i - 1]))
        .collect();
    t_from_normalized_spacings(&g)
}

/// `h(x) = (x - 1)^2 / (x^2 + 1)`.
pub fn h_kernel(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("h is defined on (0, inf), got {x}")));
    }
    Ok(h_unchecked(x))
}

fn h_unchecked(x: f64) -> f64 {
    (x - 1.0) * (x - 1.0) / (x * x + 1.0)
}

/// `H = (1/m) sum h(u[i] / mu[i])`.
pub fn h_statistic(t: &TransformedSample) -> f64 {
    h_statistic_with(t, h_unchecked)
}

/// `H` with a caller-supplied kernel in place of `h`.
pub fn h_statistic_with(t: &TransformedSample, kernel: impl Fn(f64) -> f64) -> f64 {
    let m = t.u.len() as f64;
    t.u.iter().zip(&t.mu.mu).map(|(u, mu)| kernel(u / mu)).sum::<f64>() / m
}

/// Fit plus all requested statistic values for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub fit: LocationScaleFit,
    pub values: Vec<f64>,
}

/// Per-scheme precomputation shared across many samples: expected
/// uniforms, remaining-unit coefficients and (lazily) normal scores.
#[derive(Debug)]
pub struct StatisticEvaluator {
    scheme: CensoringScheme,
    gamma: Vec<usize>,
    mu: ExpectedUniforms,
    scores: OnceLock<Vec<f64>>,
}

impl StatisticEvaluator {
    pub fn new(scheme: &CensoringScheme) -> Self {
        StatisticEvaluator {
            scheme: scheme.clone(),
            gamma: scheme.gamma_coefficients(),
            mu: scheme.expected_uniform(),
            scores: OnceLock::new(),
        }
    }

    pub fn scheme(&self) -> &CensoringScheme {
        &self.scheme
    }

    pub fn normal_scores(&self) -> &[f64] {
        self.scores
            .get_or_init(|| expected_normal_scores(&self.scheme))
    }

    /// Checks kind-specific preconditions that depend only on the scheme.
    pub fn check_kinds(&self, kinds: &[StatisticKind]) -> Result<()> {
        for k in kinds {
            match k {
                StatisticKind::BalakrishnanT if self.scheme.m() < 3 => {
                    return Err(Error::Domain(format!(
                        "T needs m >= 3, scheme has m = {}",
                        self.scheme.m()
                    )))
                }
                StatisticKind::GreenwoodK(0 | 1) => {
                    return Err(Error::Domain("G^(k) needs k >= 2".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Fits the null model once and computes every requested statistic.
    /// A fit that fails to converge is reported as [`Error::NonConvergence`].
    pub fn evaluate(&self, sample: &CensoredSample, kinds: &[StatisticKind]) -> Result<Evaluation> {
        if sample.scheme() != &self.scheme {
            return Err(Error::Domain("sample scheme differs from evaluator scheme".into()));
        }
        self.check_kinds(kinds)?;
        let fit = fit_normal(sample)?;
        if !fit.converged {
            return Err(Error::NonConvergence {
                iterations: fit.iterations,
            });
        }
        let values = self.evaluate_with_fit(sample, &fit, kinds)?;
        Ok(Evaluation { fit, values })
    }

    /// Computes statistics under a caller-provided fit.
    pub fn evaluate_with_fit(
        &self,
        sample: &CensoredSample,
        fit: &LocationScaleFit,
        kinds: &[StatisticKind],
    ) -> Result<Vec<f64>> {
        let t = if kinds.iter().any(StatisticKind::needs_fit) {
            Some(transform_with(sample, fit, self.mu.clone()))
        } else {
            None
        };
        let mut edf: Option<EdfStatistics> = None;
        let mut one_step: Option<Vec<f64>> = None;
        kinds
            .iter()
            .map(|kind| {
                if let StatisticKind::BalakrishnanT = kind {
                    return balakrishnan_t_normal(sample, self.normal_scores());
                }
                let t = t.as_ref().expect("transform computed for fitted statistics");
                let value = match kind {
                    StatisticKind::CPlus
                    | StatisticKind::CMinus
                    | StatisticKind::C
                    | StatisticKind::K
                    | StatisticKind::T1
                    | StatisticKind::T2 => {
                        let e = *edf.get_or_insert_with(|| edf_from_deviations(&t.v));
                        match kind {
                            StatisticKind::CPlus => e.c_plus,
                            StatisticKind::CMinus => e.c_minus,
                            StatisticKind::C => e.c,
                            StatisticKind::K => e.k,
                            StatisticKind::T1 => e.t1,
                            _ => e.t2,
                        }
                    }
                    StatisticKind::Greenwood => {
                        greenwood(one_step.get_or_insert_with(|| spacings_from(&self.gamma, &t.u, 1)))
                    }
                    StatisticKind::QM => {
                        qm(one_step.get_or_insert_with(|| spacings_from(&self.gamma, &t.u, 1)))
                    }
                    StatisticKind::GreenwoodK(k) => {
                        greenwood_k(&spacings_from(&self.gamma, &t.u, *k as usize))
                    }
                    StatisticKind::H => h_statistic(t),
                    StatisticKind::BalakrishnanT => unreachable!(),
                };
                Ok(value)
            })
            .collect()
    }
}

/// Fits the normal null and evaluates one statistic.
pub fn compute_statistic(sample: &CensoredSample, kind: StatisticKind) -> Result<f64> {
    let eval = StatisticEvaluator::new(sample.scheme()).evaluate(sample, &[kind])?;
    Ok(eval.values[0])
}
