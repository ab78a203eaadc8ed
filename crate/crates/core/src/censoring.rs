//! Progressive Type-II censoring schemes.
//!
//! A scheme places `n` units on test, observes `m` failures and withdraws
//! `r[i]` surviving units at the `i`-th failure. This module validates
//! schemes, exposes the remaining-unit coefficients used by spacings, and
//! computes the expected uniform progressive order statistics.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated progressive Type-II censoring scheme.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawScheme", into = "RawScheme")]
pub struct CensoringScheme {
    n: usize,
    removals: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawScheme {
    n: usize,
    m: usize,
    r: Vec<usize>,
}

impl TryFrom<RawScheme> for CensoringScheme {
    type Error = Error;

    fn try_from(raw: RawScheme) -> Result<Self> {
        validate_scheme(raw.n, raw.m, &raw.r)
    }
}

impl From<CensoringScheme> for RawScheme {
    fn from(s: CensoringScheme) -> Self {
        RawScheme {
            n: s.n,
            m: s.m(),
            r: s.removals,
        }
    }
}

/// Validates `(n, m, r)` and builds a scheme.
pub fn validate_scheme(n: usize, m: usize, r: &[usize]) -> Result<CensoringScheme> {
    if m == 0 {
        return Err(Error::EmptyScheme);
    }
    if r.len() != m {
        return Err(Error::LengthMismatch { m, len: r.len() });
    }
    let total = m + r.iter().sum::<usize>();
    if total != n {
        return Err(Error::SchemeInconsistent { n, total });
    }
    let mut remaining = n;
    for (i, &ri) in r.iter().enumerate() {
        if remaining < ri + 1 {
            return Err(Error::SchemeInfeasible {
                index: i + 1,
                remaining,
                removals: ri,
            });
        }
        remaining -= ri + 1;
    }
    Ok(CensoringScheme {
        n,
        removals: r.to_vec(),
    })
}

impl CensoringScheme {
    /// Complete sample of size `m` (no withdrawals).
    pub fn complete(m: usize) -> Result<Self> {
        validate_scheme(m, m, &vec![0; m])
    }

    /// Builds a scheme from removals alone, deriving `n = m + sum(r)`.
    pub fn from_removals(r: &[usize]) -> Result<Self> {
        validate_scheme(r.len() + r.iter().sum::<usize>(), r.len(), r)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.removals.len()
    }

    pub fn removals(&self) -> &[usize] {
        &self.removals
    }

    pub fn is_complete(&self) -> bool {
        self.removals.iter().all(|&r| r == 0)
    }

    /// Number of units on test just before each failure,
    /// `gamma[i] = n - sum_{j<i} r[j] - i` (0-based).
    pub fn gamma_coefficients(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.m());
        let mut remaining = self.n;
        for &r in &self.removals {
            out.push(remaining);
            remaining -= r + 1;
        }
        out
    }

    /// Expected values of the uniform progressive order statistics.
    pub fn expected_uniform(&self) -> ExpectedUniforms {
        expected_uniform(self)
    }

    /// Stable identifier used for cache keys and seeding tags.
    pub fn fingerprint(&self) -> String {
        format!("n={};r={}", self.n, self.removals_string())
    }

    /// Removals in the comma-separated text format, e.g. `0,2,1`.
    pub fn removals_string(&self) -> String {
        self.removals
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses the text format: comma-separated removals plus an explicit `n`.
    pub fn parse(n: usize, removals: &str) -> Result<Self> {
        let r = parse_removals(removals)?;
        validate_scheme(n, r.len(), &r)
    }
}

impl fmt::Display for CensoringScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} m={} r=({})", self.n, self.m(), self.removals_string())
    }
}

/// Parses `"0,2,1,0"` into a removal vector. Whitespace around entries is ignored.
pub fn parse_removals(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|tok| {
            let tok = tok.trim();
            usize::from_str(tok).map_err(|_| Error::Parse(format!("bad removal count {tok:?}")))
        })
        .collect()
}

/// `gamma[i]` for every failure; see [`CensoringScheme::gamma_coefficients`].
pub fn gamma_coefficients(scheme: &CensoringScheme) -> Vec<usize> {
    scheme.gamma_coefficients()
}

/// Expected uniform progressive order statistics `mu[i] = E[U_{i:m:n}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedUniforms {
    pub mu: Vec<f64>,
}

impl ExpectedUniforms {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }
}

/// `mu[i] = 1 - prod_{j=m-i+1}^{m} a_j / (a_j + 1)` with
/// `a_j = j + sum_{k=m-j+1}^{m} r_k`.
///
/// Walking the product index from `j = m` downwards, `a_j` is exactly the
/// number of units on test before the `(m-j+1)`-th failure, so the running
/// product is accumulated in failure order.
pub fn expected_uniform(scheme: &CensoringScheme) -> ExpectedUniforms {
    let m = scheme.m();
    let r = scheme.removals();
    let mut mu = Vec::with_capacity(m);
    let mut prod = 1.0;
    // tail_sum = sum_{k=m-j+1}^{m} r_k for the current j
    let mut tail_sum: usize = r.iter().sum();
    for i in 1..=m {
        let j = m - i + 1;
        let a = (j + tail_sum) as f64;
        prod *= a / (a + 1.0);
        mu.push(1.0 - prod);
        // moving to j-1 drops r_{m-j+1} = r_i from the tail
        tail_sum -= r[i - 1];
    }
    ExpectedUniforms { mu }
}

/// The five scheme families used by the consistency study.
pub fn scheme_family(family: u32, m: usize) -> Result<CensoringScheme> {
    if m == 0 {
        return Err(Error::EmptyScheme);
    }
    let r: Vec<usize> = match family {
        1 => vec![1; m],
        2 => (1..=m).collect(),
        3 => (1..=m).rev().collect(),
        4 => {
            if !m.is_multiple_of(5) {
                return Err(Error::IndivisibleM { m });
            }
            let mut r = vec![0; m];
            r[m - 1] = m / 5;
            r
        }
        5 => vec![0; m],
        other => return Err(Error::UnknownFamily(other)),
    };
    CensoringScheme::from_removals(&r)
}

/// A catalog scheme with its printed label, e.g. `"[15]"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledScheme {
    pub label: String,
    pub scheme: CensoringScheme,
}

fn sparse(n: usize, m: usize, entries: &[(usize, usize)]) -> CensoringScheme {
    let mut r = vec![0; m];
    for &(pos, count) in entries {
        r[pos - 1] = count;
    }
    validate_scheme(n, m, &r).expect("catalog scheme is valid")
}

/// The 27 benchmark schemes used for critical values and power.
pub fn catalog_table6() -> Vec<LabeledScheme> {
    let alternating: Vec<(usize, usize)> = (1..=20).map(|i| (2 * i - 1, 1)).collect();
    let uniform_ones: Vec<(usize, usize)> = (1..=20).map(|i| (i, 1)).collect();
    let schemes = vec![
        sparse(20, 8, &[(1, 12)]),
        sparse(20, 8, &[(8, 12)]),
        sparse(20, 8, &[(1, 6), (8, 6)]),
        sparse(20, 12, &[(1, 8)]),
        sparse(20, 12, &[(12, 8)]),
        sparse(20, 12, &[(3, 2), (5, 2), (7, 2), (9, 2)]),
        sparse(20, 16, &[(1, 4)]),
        sparse(20, 16, &[(16, 4)]),
        sparse(20, 16, &[(5, 4)]),
        sparse(40, 10, &[(1, 30)]),
        sparse(40, 10, &[(10, 30)]),
        sparse(40, 10, &[(1, 10), (5, 10), (10, 10)]),
        sparse(40, 20, &[(1, 20)]),
        sparse(40, 20, &[(20, 20)]),
        sparse(40, 20, &uniform_ones),
        sparse(40, 30, &[(1, 10)]),
        sparse(40, 30, &[(30, 10)]),
        sparse(40, 30, &[(1, 5), (30, 5)]),
        sparse(60, 20, &[(1, 40)]),
        sparse(60, 20, &[(20, 40)]),
        sparse(60, 20, &[(1, 10), (10, 20), (20, 10)]),
        sparse(60, 40, &[(1, 20)]),
        sparse(60, 40, &[(40, 20)]),
        sparse(60, 40, &alternating),
        sparse(60, 50, &[(1, 10)]),
        sparse(60, 50, &[(50, 10)]),
        sparse(60, 50, &[(1, 5), (50, 5)]),
    ];
    schemes
        .into_iter()
        .enumerate()
        .map(|(i, scheme)| LabeledScheme {
            label: format!("[{}]", i + 1),
            scheme,
        })
        .collect()
}

/// Looks up a catalog scheme by label. Accepts `"[7]"` or `"7"`.
pub fn catalog_scheme(label: &str) -> Option<LabeledScheme> {
    let key = label.trim().trim_start_matches('[').trim_end_matches(']');
    catalog_table6()
        .into_iter()
        .find(|s| s.label.trim_start_matches('[').trim_end_matches(']') == key)
}
