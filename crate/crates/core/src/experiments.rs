//! Monte Carlo engine: null distributions, critical values, p-values,
//! power and consistency studies.
//!
//! Replicate `i` of an experiment draws from `rng::stream(seed, tag, i,
//! attempt)`, so results are a pure function of the inputs and the seed
//! whatever the worker count. A replicate whose MLE fails to converge is
//! re-drawn with the next attempt counter; at most 1% of replicates may be
//! re-drawn.

use std::fs;
use std::path::{Path, PathBuf};

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::censoring::{scheme_family, CensoringScheme, LabeledScheme};
use crate::distributions::DistributionFamily;
use crate::error::{Error, Result};
use crate::gof::{StatisticEvaluator, StatisticKind};
use crate::mle::LocationScaleFit;
use crate::rng;
use crate::simulate::{sample_progressive, CensoredSample};

pub const DEFAULT_REPS: usize = 10_000;
pub const DEFAULT_ALPHA: f64 = 0.10;
pub const DEFAULT_SEED: u64 = 20_190_417;
const MAX_ATTEMPTS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub reps: usize,
    pub seed: u64,
    pub alpha: f64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig {
            reps: DEFAULT_REPS,
            seed: DEFAULT_SEED,
            alpha: DEFAULT_ALPHA,
            workers: 0,
        }
    }
}

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps < 100 {
            return Err(Error::InvalidConfig(format!(
                "reps must be at least 100, got {}",
                self.reps
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    /// Runs `f` on a pool with the configured width.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        if self.workers == 0 {
            f()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(self.workers)
                .build()
                .expect("thread pool")
                .install(f)
        }
    }
}

fn retryable(e: &Error) -> bool {
    matches!(
        e,
        Error::NonConvergence { .. } | Error::DegenerateSample(_) | Error::DegenerateDenominator
    )
}

/// Runs `reps` replicates of `f`, returning results in replicate order and
/// the number of re-draws.
fn run_replicates<T, F>(config: &MonteCarloConfig, tag: u64, f: F) -> Result<(Vec<T>, usize)>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    config.validate()?;
    let seed = config.seed;
    let results: Vec<(T, u64)> = config.install(|| {
        (0..config.reps as u64)
            .into_par_iter()
            .map(|i| {
                let mut attempt = 0;
                loop {
                    let mut rng = rng::stream(seed, tag, i, attempt);
                    match f(&mut rng) {
                        Ok(v) => return Ok((v, attempt)),
                        Err(e) if retryable(&e) && attempt + 1 < MAX_ATTEMPTS => attempt += 1,
                        Err(e) => return Err(e),
                    }
                }
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let redraws = results.iter().map(|(_, a)| *a as usize).sum();
    let cap = config.reps / 100;
    if redraws > cap {
        return Err(Error::TooManyFailures {
            failures: redraws,
            cap,
        });
    }
    Ok((results.into_iter().map(|(v, _)| v).collect(), redraws))
}

fn null_tag(scheme: &CensoringScheme) -> u64 {
    rng::tag(&format!("null|{}", scheme.fingerprint()))
}

fn alt_tag(kind: &str, scheme: &CensoringScheme, dist: &DistributionFamily) -> u64 {
    rng::tag(&format!("{kind}|{}|{}", scheme.fingerprint(), dist.name()))
}

/// Critical region estimated from sorted null values.
///
/// One-sided statistics reject above `value`, the order statistic at rank
/// `ceil((1 - alpha) N)`. Two-sided statistics split alpha between the tails:
/// `value` sits at rank `ceil((1 - alpha/2) N)` and `lower` at the mirrored
/// rank `N + 1 - rank`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub value: f64,
    pub lower: Option<f64>,
    pub rank: usize,
    /// The rank landed on the smallest or largest simulated value, so the
    /// quantile is not resolved by the replicate count.
    pub clamped: bool,
}

impl CriticalValue {
    pub fn rejects(&self, x: f64) -> bool {
        x > self.value || self.lower.is_some_and(|lo| x < lo)
    }
}

pub fn upper_quantile(sorted: &[f64], alpha: f64) -> Result<CriticalValue> {
    if sorted.is_empty() {
        return Err(Error::InvalidConfig("empty null sample".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let n = sorted.len();
    // the small offset keeps e.g. 0.9 * 10000 from rounding up to 9001
    let raw = ((1.0 - alpha) * n as f64 - 1e-9).ceil();
    let rank = raw.clamp(1.0, n as f64) as usize;
    let clamped = raw <= 1.0 || raw >= n as f64;
    if clamped {
        log::warn!(
            "alpha = {alpha} with {n} replicates puts the critical value at order statistic {rank} of {n}"
        );
    }
    Ok(CriticalValue {
        value: sorted[rank - 1],
        lower: None,
        rank,
        clamped,
    })
}

/// Equal-tailed critical region: [`upper_quantile`] at `alpha / 2` plus the
/// mirrored lower order statistic.
pub fn two_sided_quantiles(sorted: &[f64], alpha: f64) -> Result<CriticalValue> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let mut cv = upper_quantile(sorted, 0.5 * alpha)?;
    cv.lower = Some(sorted[sorted.len() - cv.rank]);
    Ok(cv)
}

/// `(1 + #{simulated >= observed}) / (N + 1)` over sorted values.
pub fn upper_p_value(sorted: &[f64], observed: f64) -> Result<f64> {
    if observed.is_nan() {
        return Err(Error::Domain("observed statistic is NaN".into()));
    }
    let below = sorted.partition_point(|&v| v < observed);
    let at_or_above = sorted.len() - below;
    Ok((1 + at_or_above) as f64 / (sorted.len() + 1) as f64)
}

/// Twice the smaller of the two one-tailed `+1` p-values, capped at 1.
pub fn two_sided_p_value(sorted: &[f64], observed: f64) -> Result<f64> {
    let upper = upper_p_value(sorted, observed)?;
    let at_or_below = sorted.partition_point(|&v| v <= observed);
    let lower = (1 + at_or_below) as f64 / (sorted.len() + 1) as f64;
    Ok((2.0 * upper.min(lower)).min(1.0))
}

/// Critical region of `kind` at level `alpha`.
pub fn critical_region(sorted: &[f64], kind: StatisticKind, alpha: f64) -> Result<CriticalValue> {
    if kind.is_two_sided() {
        two_sided_quantiles(sorted, alpha)
    } else {
        upper_quantile(sorted, alpha)
    }
}

/// Monte Carlo p-value of `observed` for `kind`.
pub fn monte_carlo_p_value(sorted: &[f64], kind: StatisticKind, observed: f64) -> Result<f64> {
    if kind.is_two_sided() {
        two_sided_p_value(sorted, observed)
    } else {
        upper_p_value(sorted, observed)
    }
}

/// Simulated null values of several statistics for one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    pub scheme: CensoringScheme,
    pub kinds: Vec<StatisticKind>,
    pub reps: usize,
    pub seed: u64,
    pub redraws: usize,
    /// Per kind, in replicate order.
    values: Vec<Vec<f64>>,
    sorted: Vec<Vec<f64>>,
}

impl NullDistribution {
    fn index(&self, kind: StatisticKind) -> Result<usize> {
        self.kinds
            .iter()
            .position(|k| *k == kind)
            .ok_or_else(|| Error::InvalidConfig(format!("statistic {kind} not simulated")))
    }

    /// Values in replicate order.
    pub fn values(&self, kind: StatisticKind) -> Result<&[f64]> {
        Ok(&self.values[self.index(kind)?])
    }

    pub fn sorted(&self, kind: StatisticKind) -> Result<&[f64]> {
        Ok(&self.sorted[self.index(kind)?])
    }

    pub fn critical_value(&self, kind: StatisticKind, alpha: f64) -> Result<CriticalValue> {
        critical_region(self.sorted(kind)?, kind, alpha)
    }

    pub fn p_value(&self, kind: StatisticKind, observed: f64) -> Result<f64> {
        monte_carlo_p_value(self.sorted(kind)?, kind, observed)
    }
}

/// Statistic values of samples drawn from `dist`, one row per replicate.
fn simulate_statistics(
    scheme: &CensoringScheme,
    kinds: &[StatisticKind],
    dist: &DistributionFamily,
    tag: u64,
    config: &MonteCarloConfig,
) -> Result<(Vec<Vec<f64>>, usize)> {
    let evaluator = StatisticEvaluator::new(scheme);
    evaluator.check_kinds(kinds)?;
    if kinds.contains(&StatisticKind::BalakrishnanT) {
        evaluator.normal_scores();
    }
    run_replicates(config, tag, |rng| {
        let sample = sample_progressive(scheme, dist, rng);
        evaluator.evaluate(&sample, kinds).map(|e| e.values)
    })
}

fn by_kind(rows: Vec<Vec<f64>>, kinds: usize) -> Vec<Vec<f64>> {
    let mut cols = vec![Vec::with_capacity(rows.len()); kinds];
    for row in rows {
        for (col, v) in cols.iter_mut().zip(row) {
            col.push(v);
        }
    }
    cols
}

/// Simulates N(0,1) progressive samples, fits and evaluates all `kinds`.
pub fn null_distribution(
    scheme: &CensoringScheme,
    kinds: &[StatisticKind],
    config: &MonteCarloConfig,
) -> Result<NullDistribution> {
    let dist = DistributionFamily::standard_normal();
    let (rows, redraws) = simulate_statistics(scheme, kinds, &dist, null_tag(scheme), config)?;
    let values = by_kind(rows, kinds.len());
    let sorted = values
        .iter()
        .map(|v| {
            let mut s = v.clone();
            s.sort_by(f64::total_cmp);
            s
        })
        .collect();
    Ok(NullDistribution {
        scheme: scheme.clone(),
        kinds: kinds.to_vec(),
        reps: config.reps,
        seed: config.seed,
        redraws,
        values,
        sorted,
    })
}

pub fn null_statistic_sample(
    scheme: &CensoringScheme,
    kind: StatisticKind,
    config: &MonteCarloConfig,
) -> Result<Vec<f64>> {
    let null = null_distribution(scheme, &[kind], config)?;
    Ok(null.values(kind)?.to_vec())
}

pub fn critical_value(
    scheme: &CensoringScheme,
    kind: StatisticKind,
    config: &MonteCarloConfig,
) -> Result<f64> {
    let null = null_distribution(scheme, &[kind], config)?;
    Ok(null.critical_value(kind, config.alpha)?.value)
}

pub fn p_value(
    observed: f64,
    scheme: &CensoringScheme,
    kind: StatisticKind,
    config: &MonteCarloConfig,
) -> Result<f64> {
    let null = null_distribution(scheme, &[kind], config)?;
    null.p_value(kind, observed)
}

/// Estimated rejection probability of one statistic against one alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCell {
    pub scheme_label: String,
    pub alternative: String,
    pub statistic: StatisticKind,
    pub estimate: f64,
    pub std_error: f64,
    pub critical_value: f64,
    /// Lower critical value of a two-sided statistic.
    pub lower_critical_value: Option<f64>,
    pub reps: usize,
}

/// Seed of the null run that calibrates a power study.
pub fn calibration_seed(seed: u64) -> u64 {
    rng::derive_seed(seed, "power-calibration")
}

/// Power of every `kind` against every alternative for one scheme. The
/// critical values come from a null run under [`calibration_seed`].
pub fn power_grid(
    scheme: &LabeledScheme,
    kinds: &[StatisticKind],
    alternatives: &[DistributionFamily],
    config: &MonteCarloConfig,
) -> Result<Vec<PowerCell>> {
    let null_config = config.with_seed(calibration_seed(config.seed));
    let null = null_distribution(&scheme.scheme, kinds, &null_config)?;
    let cvs: Vec<CriticalValue> = kinds
        .iter()
        .map(|k| null.critical_value(*k, config.alpha))
        .collect::<Result<_>>()?;
    let mut cells = Vec::with_capacity(kinds.len() * alternatives.len());
    for alt in alternatives {
        let tag = alt_tag("alt", &scheme.scheme, alt);
        let (rows, _) = simulate_statistics(&scheme.scheme, kinds, alt, tag, config)?;
        let reps = rows.len() as f64;
        for (j, kind) in kinds.iter().enumerate() {
            let rejections = rows.iter().filter(|r| cvs[j].rejects(r[j])).count();
            let p = rejections as f64 / reps;
            cells.push(PowerCell {
                scheme_label: scheme.label.clone(),
                alternative: alt.name(),
                statistic: *kind,
                estimate: p,
                std_error: (p * (1.0 - p) / reps).sqrt(),
                critical_value: cvs[j].value,
                lower_critical_value: cvs[j].lower,
                reps: rows.len(),
            });
        }
    }
    Ok(cells)
}

pub fn power(
    scheme: &LabeledScheme,
    kind: StatisticKind,
    alternative: &DistributionFamily,
    config: &MonteCarloConfig,
) -> Result<PowerCell> {
    let mut cells = power_grid(scheme, &[kind], std::slice::from_ref(alternative), config)?;
    Ok(cells.remove(0))
}

/// Mean of `H` for one (family, m, distribution) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyCell {
    pub family: u32,
    pub n: usize,
    pub m: usize,
    pub alternative: String,
    pub statistic: StatisticKind,
    pub estimate: f64,
    pub std_error: f64,
    pub reps: usize,
}

pub fn consistency_study(
    family: u32,
    ms: &[usize],
    alternatives: &[DistributionFamily],
    config: &MonteCarloConfig,
) -> Result<Vec<ConsistencyCell>> {
    let kinds = [StatisticKind::H];
    let mut cells = Vec::new();
    for &m in ms {
        let scheme = scheme_family(family, m)?;
        for alt in alternatives {
            let tag = alt_tag("consistency", &scheme, alt);
            let (rows, _) = simulate_statistics(&scheme, &kinds, alt, tag, config)?;
            let reps = rows.len() as f64;
            let mean = rows.iter().map(|r| r[0]).sum::<f64>() / reps;
            let var = rows.iter().map(|r| (r[0] - mean).powi(2)).sum::<f64>() / (reps - 1.0);
            cells.push(ConsistencyCell {
                family,
                n: scheme.n(),
                m,
                alternative: alt.name(),
                statistic: StatisticKind::H,
                estimate: mean,
                std_error: (var / reps).sqrt(),
                reps: rows.len(),
            });
        }
    }
    Ok(cells)
}

/// Outcome of one statistic on an observed sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: StatisticKind,
    pub observed: f64,
    pub critical_value: f64,
    /// Lower critical value of a two-sided statistic.
    pub lower_critical_value: Option<f64>,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub reps: usize,
    pub seed: u64,
    pub scheme_label: String,
    pub fit: LocationScaleFit,
}

/// Tests normality of `sample` with every statistic in `kinds`, calibrating
/// each by a null run for the sample's scheme.
pub fn run_test(
    sample: &CensoredSample,
    kinds: &[StatisticKind],
    config: &MonteCarloConfig,
) -> Result<Vec<TestReport>> {
    config.validate()?;
    let null = null_distribution(sample.scheme(), kinds, config)?;
    run_test_with_null(sample, kinds, &null, config.alpha)
}

/// Like [`run_test`] against an existing null distribution.
pub fn run_test_with_null(
    sample: &CensoredSample,
    kinds: &[StatisticKind],
    null: &NullDistribution,
    alpha: f64,
) -> Result<Vec<TestReport>> {
    if sample.scheme() != &null.scheme {
        return Err(Error::InvalidConfig("null distribution is for another scheme".into()));
    }
    let eval = StatisticEvaluator::new(sample.scheme()).evaluate(sample, kinds)?;
    kinds
        .iter()
        .zip(&eval.values)
        .map(|(kind, &observed)| {
            let cv = null.critical_value(*kind, alpha)?;
            Ok(TestReport {
                statistic: *kind,
                observed,
                critical_value: cv.value,
                lower_critical_value: cv.lower,
                p_value: null.p_value(*kind, observed)?,
                reject: cv.rejects(observed),
                alpha,
                reps: null.reps,
                seed: null.seed,
                scheme_label: sample.scheme().fingerprint(),
                fit: eval.fit,
            })
        })
        .collect()
}

/// One row of a critical-value table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValueRow {
    pub label: String,
    pub n: usize,
    pub m: usize,
    pub statistic: StatisticKind,
    pub alpha: f64,
    pub critical_value: f64,
    /// Lower critical value of a two-sided statistic.
    pub lower_critical_value: Option<f64>,
    pub clamped: bool,
    pub reps: usize,
    pub seed: u64,
}

/// On-disk store of critical values keyed by
/// `(scheme, statistic, alpha, reps, seed)`.
#[derive(Debug, Clone)]
pub struct CriticalValueCache {
    dir: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    scheme: String,
    statistic: StatisticKind,
    alpha: f64,
    reps: usize,
    seed: u64,
    value: CriticalValue,
}

impl CriticalValueCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        CriticalValueCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, scheme: &CensoringScheme, kind: StatisticKind, config: &MonteCarloConfig) -> PathBuf {
        let key = format!(
            "v2|{}|{}|{:e}|{}|{}",
            scheme.fingerprint(),
            kind,
            config.alpha,
            config.reps,
            config.seed
        );
        let digest = Sha256::digest(key.as_bytes());
        self.dir.join(format!("cv-{}.json", &hex::encode(digest)[..24]))
    }

    pub fn get(
        &self,
        scheme: &CensoringScheme,
        kind: StatisticKind,
        config: &MonteCarloConfig,
    ) -> Option<CriticalValue> {
        let text = fs::read_to_string(self.path(scheme, kind, config)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        let matches = entry.scheme == scheme.fingerprint()
            && entry.statistic == kind
            && entry.alpha == config.alpha
            && entry.reps == config.reps
            && entry.seed == config.seed;
        matches.then_some(entry.value)
    }

    pub fn put(
        &self,
        scheme: &CensoringScheme,
        kind: StatisticKind,
        config: &MonteCarloConfig,
        value: CriticalValue,
    ) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let entry = CacheEntry {
            scheme: scheme.fingerprint(),
            statistic: kind,
            alpha: config.alpha,
            reps: config.reps,
            seed: config.seed,
            value,
        };
        let text = serde_json::to_string_pretty(&entry).map_err(std::io::Error::other)?;
        fs::write(self.path(scheme, kind, config), text)
    }
}

/// Critical values for every (scheme, statistic) pair, consulting and
/// filling `cache` when given.
pub fn critical_value_table(
    schemes: &[LabeledScheme],
    kinds: &[StatisticKind],
    config: &MonteCarloConfig,
    cache: Option<&CriticalValueCache>,
) -> Result<Vec<CriticalValueRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for ls in schemes {
        let cached: Vec<Option<CriticalValue>> = kinds
            .iter()
            .map(|k| cache.and_then(|c| c.get(&ls.scheme, *k, config)))
            .collect();
        let missing: Vec<StatisticKind> = kinds
            .iter()
            .zip(&cached)
            .filter(|(_, c)| c.is_none())
            .map(|(k, _)| *k)
            .collect();
        let null = if missing.is_empty() {
            None
        } else {
            Some(null_distribution(&ls.scheme, &missing, config)?)
        };
        for (kind, hit) in kinds.iter().zip(cached) {
            let cv = match hit {
                Some(cv) => cv,
                None => {
                    let cv = null
                        .as_ref()
                        .expect("null run for missing kinds")
                        .critical_value(*kind, config.alpha)?;
                    if let Some(c) = cache {
                        if let Err(e) = c.put(&ls.scheme, *kind, config, cv) {
                            log::warn!("could not write cache entry in {}: {e}", c.dir().display());
                        }
                    }
                    cv
                }
            };
            rows.push(CriticalValueRow {
                label: ls.label.clone(),
                n: ls.scheme.n(),
                m: ls.scheme.m(),
                statistic: *kind,
                alpha: config.alpha,
                critical_value: cv.value,
                lower_critical_value: cv.lower,
                clamped: cv.clamped,
                reps: config.reps,
                seed: config.seed,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::censoring::{catalog_scheme, CensoringScheme};

    fn small(seed: u64) -> MonteCarloConfig {
        MonteCarloConfig {
            reps: 200,
            seed,
            alpha: 0.1,
            workers: 0,
        }
    }

    #[test]
    fn config_validation() {
        assert!(MonteCarloConfig::default().validate().is_ok());
        assert!(small(1).with_reps(99).validate().is_err());
        let mut c = small(1);
        c.alpha = 1.0;
        assert!(c.validate().is_err());
        c.alpha = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn quantile_and_p_value_estimators() {
        let sorted: Vec<f64> = (1..=100).map(|v| v as f64).collect();
        let cv = upper_quantile(&sorted, 0.1).unwrap();
        assert_eq!((cv.value, cv.rank, cv.clamped), (90.0, 90, false));
        assert_eq!(upper_quantile(&sorted, 0.5).unwrap().value, 50.0);
        let low = upper_quantile(&sorted, 0.999_999).unwrap();
        assert!(low.clamped && low.rank == 1);
        let high = upper_quantile(&sorted, 1e-6).unwrap();
        assert!(high.clamped && high.value == 100.0);
        assert!(upper_quantile(&sorted, 0.0).is_err());
        assert_eq!(upper_p_value(&sorted, 1e9).unwrap(), 1.0 / 101.0);
        assert_eq!(upper_p_value(&sorted, -1e9).unwrap(), 1.0);
        assert_eq!(upper_p_value(&sorted, 90.0).unwrap(), 12.0 / 101.0);
        assert!(upper_p_value(&sorted, f64::NAN).is_err());
    }

    #[test]
    fn two_sided_region_and_p_value() {
        let sorted: Vec<f64> = (1..=100).map(|v| v as f64).collect();
        let cv = two_sided_quantiles(&sorted, 0.1).unwrap();
        assert_eq!((cv.value, cv.lower, cv.rank), (95.0, Some(6.0), 95));
        assert!(cv.rejects(95.5) && cv.rejects(5.0));
        assert!(!cv.rejects(6.0) && !cv.rejects(95.0) && !cv.rejects(50.0));
        assert_eq!(two_sided_p_value(&sorted, 1e9).unwrap(), 2.0 / 101.0);
        assert_eq!(two_sided_p_value(&sorted, -1e9).unwrap(), 2.0 / 101.0);
        assert_eq!(two_sided_p_value(&sorted, 50.5).unwrap(), 1.0);
        assert_eq!(two_sided_p_value(&sorted, 90.0).unwrap(), 24.0 / 101.0);
        let t = StatisticKind::BalakrishnanT;
        assert_eq!(critical_region(&sorted, t, 0.1).unwrap(), cv);
        assert_eq!(critical_region(&sorted, StatisticKind::H, 0.1).unwrap().lower, None);
    }

    #[test]
    fn null_sample_is_deterministic_across_workers() {
        let scheme = catalog_scheme("[3]").unwrap().scheme;
        let mut one = small(5);
        one.workers = 1;
        let mut eight = small(5);
        eight.workers = 8;
        let a = null_statistic_sample(&scheme, StatisticKind::H, &one).unwrap();
        let b = null_statistic_sample(&scheme, StatisticKind::H, &eight).unwrap();
        let c = null_statistic_sample(&scheme, StatisticKind::H, &one).unwrap();
        assert_eq!(a.len(), 200);
        assert_eq!(a, b);
        assert_eq!(a, c);
        let other = null_statistic_sample(&scheme, StatisticKind::H, &small(6)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn critical_value_monotone_in_alpha() {
        let scheme = catalog_scheme("[1]").unwrap().scheme;
        let null = null_distribution(&scheme, &[StatisticKind::H], &small(2)).unwrap();
        let mut prev = f64::INFINITY;
        for alpha in [0.01, 0.05, 0.1, 0.25, 0.5, 0.9] {
            let cv = null.critical_value(StatisticKind::H, alpha).unwrap().value;
            assert!(cv <= prev);
            prev = cv;
        }
        let sorted = null.sorted(StatisticKind::H).unwrap();
        assert_eq!(null.critical_value(StatisticKind::H, 0.5).unwrap().value, sorted[99]);
    }

    #[test]
    fn same_inputs_same_report() {
        let scheme = CensoringScheme::parse(20, "0,2,1,0,3,0,0,2,0,2").unwrap();
        let sample = CensoredSample::new(
            scheme,
            vec![550., 750., 950., 1150., 1150., 1150., 1350., 1450., 1550., 1850.],
        )
        .unwrap();
        let a = run_test(&sample, &StatisticKind::ALL, &small(9)).unwrap();
        let b = run_test(&sample, &StatisticKind::ALL, &small(9)).unwrap();
        assert_eq!(a, b);
        for r in &a {
            let below = r.lower_critical_value.is_some_and(|lo| r.observed < lo);
            assert_eq!(r.reject, r.observed > r.critical_value || below);
            assert_eq!(r.lower_critical_value.is_some(), r.statistic.is_two_sided());
            assert!(r.p_value > 0.0 && r.p_value <= 1.0);
        }
    }

    #[test]
    fn power_cells_are_probabilities() {
        let ls = catalog_scheme("[2]").unwrap();
        let cells = power_grid(
            &ls,
            &[StatisticKind::H, StatisticKind::C],
            &[DistributionFamily::laplace(0.0, 1.0).unwrap()],
            &small(4),
        )
        .unwrap();
        assert_eq!(cells.len(), 2);
        for c in cells {
            assert!((0.0..=1.0).contains(&c.estimate));
            let se = (c.estimate * (1.0 - c.estimate) / 200.0).sqrt();
            assert!((c.std_error - se).abs() < 1e-15);
        }
    }

    #[test]
    fn consistency_rejects_indivisible_m() {
        let err = consistency_study(4, &[12], &[DistributionFamily::standard_normal()], &small(1));
        assert_eq!(err, Err(Error::IndivisibleM { m: 12 }));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CriticalValueCache::new(dir.path());
        let schemes = vec![catalog_scheme("[7]").unwrap()];
        let cfg = small(3);
        let first = critical_value_table(&schemes, &[StatisticKind::H], &cfg, Some(&cache)).unwrap();
        let hit = cache.get(&schemes[0].scheme, StatisticKind::H, &cfg).unwrap();
        assert_eq!(hit.value, first[0].critical_value);
        assert!(cache.get(&schemes[0].scheme, StatisticKind::H, &small(4)).is_none());
        let second = critical_value_table(&schemes, &[StatisticKind::H], &cfg, Some(&cache)).unwrap();
        assert_eq!(first, second);
    }
}
