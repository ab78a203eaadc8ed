//! Expected standard normal progressive order statistics.
//!
//! Given `X_{i-1} = s`, the next failure has density
//! `gamma_i phi(x) S(x)^{gamma_i - 1} / S(s)^{gamma_i}` on `x > s`, where `S`
//! is the normal upper tail. The marginal densities are propagated on a
//! uniform grid in `z` with
//!
//! ```text
//! p_i(z) = gamma_i * lambda(z) * A_i(z),
//! A_i(z) = int_{-inf}^{z} p_{i-1}(s) (S(z)/S(s))^{gamma_i} ds
//! ```
//!
//! where `A_i` is accumulated panel by panel (the ratio never exceeds one,
//! so nothing overflows). Two grid widths are combined by Richardson
//! extrapolation to cancel the `O(h^2)` trapezoid error.

use crate::censoring::CensoringScheme;
use crate::special::{normal_hazard, normal_log_pdf, normal_log_sf};

const HALF_WIDTH: f64 = 12.0;
const COARSE_STEP: f64 = 0.002;

fn scores_on_grid(gamma: &[usize], step: f64) -> Vec<f64> {
    let points = (2.0 * HALF_WIDTH / step).round() as usize + 1;
    let z: Vec<f64> = (0..points).map(|k| -HALF_WIDTH + k as f64 * step).collect();
    let log_sf: Vec<f64> = z.iter().map(|&v| normal_log_sf(v)).collect();
    let hazard: Vec<f64> = z.iter().map(|&v| normal_hazard(v)).collect();

    let trapezoid = |f: &dyn Fn(usize) -> f64| -> f64 {
        let inner: f64 = (1..points - 1).map(f).sum();
        step * (inner + 0.5 * (f(0) + f(points - 1)))
    };

    let g1 = gamma[0] as f64;
    let mut density: Vec<f64> = z
        .iter()
        .zip(&log_sf)
        .map(|(&v, &ls)| g1 * (normal_log_pdf(v) + (g1 - 1.0) * ls).exp())
        .collect();
    let mut out = Vec::with_capacity(gamma.len());
    let mut acc = vec![0.0; points];
    for (i, &g) in gamma.iter().enumerate() {
        if i > 0 {
            let g = g as f64;
            acc[0] = 0.0;
            for k in 0..points - 1 {
                let rho = (g * (log_sf[k + 1] - log_sf[k])).exp();
                acc[k + 1] = rho * acc[k] + 0.5 * step * (density[k] * rho + density[k + 1]);
            }
            for k in 0..points {
                density[k] = g * hazard[k] * acc[k];
            }
        }
        let mass = trapezoid(&|k| density[k]);
        let first = trapezoid(&|k| z[k] * density[k]);
        out.push(first / mass);
    }
    out
}

/// `E[Z_{i:m:n}]` for standard normal parents, accurate to roughly `1e-8`.
pub fn expected_normal_scores(scheme: &CensoringScheme) -> Vec<f64> {
    let gamma = scheme.gamma_coefficients();
    let coarse = scores_on_grid(&gamma, COARSE_STEP);
    let fine = scores_on_grid(&gamma, 0.5 * COARSE_STEP);
    coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::censoring::catalog_scheme;
    use crate::distributions::DistributionFamily;
    use crate::simulate::sample_progressive;
    use crate::special::ln_gamma;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_complete_samples() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let two = expected_normal_scores(&CensoringScheme::complete(2).unwrap());
        assert!((two[1] - 1.0 / sqrt_pi).abs() < 1e-8);
        assert!((two[0] + 1.0 / sqrt_pi).abs() < 1e-8);
        let three = expected_normal_scores(&CensoringScheme::complete(3).unwrap());
        assert!((three[2] - 1.5 / sqrt_pi).abs() < 1e-8);
        assert!(three[1].abs() < 1e-8);
    }

    #[test]
    fn complete_sample_matches_order_statistic_integral() {
        // E[Z_{i:n}] = int z n C(n-1,i-1) Phi^{i-1} S^{n-i} phi dz, Simpson
        let n = 20;
        let got = expected_normal_scores(&CensoringScheme::complete(n).unwrap());
        let d = DistributionFamily::standard_normal();
        let steps = 24_000;
        let h = 24.0 / steps as f64;
        for i in 1..=n {
            let ln_c = ln_gamma(n as f64 + 1.0) - ln_gamma(i as f64) - ln_gamma((n - i) as f64 + 1.0);
            let f = |z: f64| {
                let lo = d.cdf(z).ln();
                let hi = d.sf(z).ln();
                z * (ln_c + (i - 1) as f64 * lo + (n - i) as f64 * hi).exp() * d.pdf(z)
            };
            let mut s = f(-12.0) + f(12.0);
            for k in 1..steps {
                s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(-12.0 + k as f64 * h);
            }
            let want = s * h / 3.0;
            assert!((got[i - 1] - want).abs() < 1e-8, "i={i}: {} vs {want}", got[i - 1]);
        }
    }

    #[test]
    fn progressive_scheme_matches_monte_carlo() {
        let scheme = catalog_scheme("[21]").unwrap().scheme;
        let scores = expected_normal_scores(&scheme);
        let d = DistributionFamily::standard_normal();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let reps = 200_000;
        let m = scheme.m();
        let (mut s1, mut s2) = (vec![0.0; m], vec![0.0; m]);
        for _ in 0..reps {
            for (i, x) in sample_progressive(&scheme, &d, &mut rng).values().iter().enumerate() {
                s1[i] += x;
                s2[i] += x * x;
            }
        }
        for i in 0..m {
            let mean = s1[i] / reps as f64;
            let se = ((s2[i] / reps as f64 - mean * mean) / reps as f64).sqrt();
            assert!((mean - scores[i]).abs() < 4.0 * se, "i={i}");
        }
    }
}
