//! Generation of progressively Type-II censored samples.
//!
//! With `W_1..W_m` iid uniform and `a_j = j + sum_{k>m-j} r_k`, the values
//! `V_j = W_j^{1/a_j}` are independent `Beta(a_j, 1)` and
//! `U_i = 1 - prod_{j=m-i+1}^{m} V_j` has the joint law of the uniform
//! progressive order statistics. The tail products are kept in log space
//! and mapped through the inverse survival function, so the upper tail is
//! not lost to `1 - u` rounding.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::censoring::CensoringScheme;
use crate::distributions::{open_unit, DistributionFamily};
use crate::error::{Error, Result};

/// Observed failure values of a progressively censored experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensoredSample {
    scheme: CensoringScheme,
    x: Vec<f64>,
}

impl CensoredSample {
    /// `x` must have length `m`, be finite and nondecreasing (ties allowed).
    pub fn new(scheme: CensoringScheme, x: Vec<f64>) -> Result<Self> {
        if x.len() != scheme.m() {
            return Err(Error::LengthMismatch {
                m: scheme.m(),
                len: x.len(),
            });
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite observation {bad}")));
        }
        if let Some(i) = x.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Domain(format!(
                "observations must be nondecreasing: x[{}] = {} > x[{}] = {}",
                i + 1,
                x[i],
                i + 2,
                x[i + 1]
            )));
        }
        Ok(CensoredSample { scheme, x })
    }

    pub fn scheme(&self) -> &CensoringScheme {
        &self.scheme
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    /// `a * x + b` for `a > 0`.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Domain(format!("affine scale must be positive, got {a}")));
        }
        CensoredSample::new(self.scheme.clone(), self.x.iter().map(|v| a * v + b).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformProgressiveSample {
    pub scheme: CensoringScheme,
    pub u: Vec<f64>,
}

/// `ln prod_{j=m-i+1}^{m} V_j` for `i = 1..m`, consuming exactly `m` draws
/// in the order `W_1, ..., W_m`.
fn log_tail_products<R: RngCore + ?Sized>(scheme: &CensoringScheme, rng: &mut R) -> Vec<f64> {
    let m = scheme.m();
    let w: Vec<f64> = (0..m).map(|_| open_unit(rng)).collect();
    // a_{m-i+1} = gamma_i
    let gamma = scheme.gamma_coefficients();
    let mut out = Vec::with_capacity(m);
    let mut acc = 0.0;
    for (i, g) in gamma.iter().enumerate() {
        let j = m - i; // 1-based product index entering at failure i+1
        acc += w[j - 1].ln() / *g as f64;
        out.push(acc);
    }
    out
}

pub fn sample_uniform_progressive<R: RngCore + ?Sized>(
    scheme: &CensoringScheme,
    rng: &mut R,
) -> UniformProgressiveSample {
    let u = log_tail_products(scheme, rng)
        .into_iter()
        .map(|lt| -lt.exp_m1())
        .collect();
    UniformProgressiveSample {
        scheme: scheme.clone(),
        u,
    }
}

/// `x[i] = F^{-1}(u[i])`, consuming the same draws as
/// [`sample_uniform_progressive`].
pub fn sample_progressive<R: RngCore + ?Sized>(
    scheme: &CensoringScheme,
    dist: &DistributionFamily,
    rng: &mut R,
) -> CensoredSample {
    let x = log_tail_products(scheme, rng)
        .into_iter()
        .map(|lt| dist.inverse_survival_unchecked(lt.exp()))
        .collect();
    CensoredSample {
        scheme: scheme.clone(),
        x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::censoring::catalog_scheme;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Fixed(u64);
    impl RngCore for Fixed {
        fn next_u32(&mut self) -> u32 {
            self.0 as u32
        }
        fn next_u64(&mut self) -> u64 {
            self.0
        }
        fn fill_bytes(&mut self, _dst: &mut [u8]) {
            unimplemented!()
        }
    }

    #[test]
    fn single_unit_returns_the_draw() {
        let s = CensoringScheme::complete(1).unwrap();
        let mut rng = Fixed(1u64 << 63);
        let u = sample_uniform_progressive(&s, &mut rng).u;
        let w = open_unit(&mut Fixed(1u64 << 63));
        assert!((u[0] - (1.0 - w)).abs() < 1e-15);
        assert!((u[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_draws_follow_formula() {
        // W_j = w: u_i = 1 - w^{sum_{l<=i} 1/gamma_l}
        let s = CensoringScheme::parse(7, "1,0,2,0").unwrap();
        let w = open_unit(&mut Fixed(0x4000_0000_0000_0000));
        let u = sample_uniform_progressive(&s, &mut Fixed(0x4000_0000_0000_0000)).u;
        let g = s.gamma_coefficients();
        let mut e = 0.0;
        for i in 0..4 {
            e += 1.0 / g[i] as f64;
            assert!((u[i] - (1.0 - w.powf(e))).abs() < 1e-14);
        }
    }

    #[test]
    fn strictly_increasing_and_inside_unit_interval() {
        let s = catalog_scheme("[24]").unwrap().scheme;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20_000 {
            let u = sample_uniform_progressive(&s, &mut rng).u;
            assert!(u[0] > 0.0 && u[u.len() - 1] < 1.0);
            assert!(u.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn complete_scheme_means_are_uniform_order_statistics() {
        let s = CensoringScheme::complete(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let reps = 200_000;
        let mut sums = [0.0; 5];
        let mut sq = [0.0; 5];
        for _ in 0..reps {
            for (i, v) in sample_uniform_progressive(&s, &mut rng).u.iter().enumerate() {
                sums[i] += v;
                sq[i] += v * v;
            }
        }
        for i in 0..5 {
            let mean = sums[i] / reps as f64;
            let var = sq[i] / reps as f64 - mean * mean;
            let se = (var / reps as f64).sqrt();
            assert!((mean - (i + 1) as f64 / 6.0).abs() < 4.0 * se);
        }
    }

    #[test]
    fn transformed_sample_round_trips() {
        let s = catalog_scheme("[6]").unwrap().scheme;
        let d = DistributionFamily::standard_normal();
        let u = sample_uniform_progressive(&s, &mut ChaCha8Rng::seed_from_u64(5)).u;
        let x = sample_progressive(&s, &d, &mut ChaCha8Rng::seed_from_u64(5));
        assert!(x.values().windows(2).all(|w| w[0] <= w[1]));
        for (xi, ui) in x.values().iter().zip(&u) {
            assert!((d.cdf(*xi) - ui).abs() < 1e-8);
        }
    }

    #[test]
    fn single_unit_sample_follows_the_distribution() {
        // With n = m = 1 the lone observation is a plain draw from d.
        let s = CensoringScheme::complete(1).unwrap();
        let d = DistributionFamily::logistic(0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut xs: Vec<f64> = (0..100_000)
            .map(|_| sample_progressive(&s, &d, &mut rng).values()[0])
            .collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = d.cdf(x);
                (c - i as f64 / n).abs().max((c - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "KS distance {ks}");
    }

    #[test]
    fn deterministic_given_seed() {
        let s = catalog_scheme("[21]").unwrap().scheme;
        let d = DistributionFamily::student_t(3.0).unwrap();
        let a = sample_progressive(&s, &d, &mut ChaCha8Rng::seed_from_u64(1));
        let b = sample_progressive(&s, &d, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
    }

    #[test]
    fn sample_validation() {
        let s = CensoringScheme::complete(3).unwrap();
        assert!(CensoredSample::new(s.clone(), vec![1.0, 1.0, 2.0]).is_ok());
        assert!(CensoredSample::new(s.clone(), vec![1.0, 3.0, 2.0]).is_err());
        assert!(CensoredSample::new(s.clone(), vec![1.0, 2.0]).is_err());
        assert!(CensoredSample::new(s, vec![1.0, f64::NAN, 2.0]).is_err());
    }
}
