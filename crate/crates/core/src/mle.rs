//! Maximum likelihood for the normal model under progressive Type-II
//! censoring.
//!
//! The log-likelihood, up to the scheme's combinatorial constant, is
//!
//! ```text
//! l(mu, sigma) = sum_i [ ln phi(z_i) - ln sigma + r_i ln(1 - Phi(z_i)) ],  z_i = (x_i - mu) / sigma
//! ```
//!
//! and is maximized over `(mu, ln sigma)` by Newton ascent with an analytic
//! gradient, a Hessian from central differences of that gradient, and a
//! halving line search. If Newton stalls, a short Nelder-Mead run restarts
//! it from a better point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::CensoredSample;
use crate::special::{normal_hazard, normal_log_pdf, normal_log_sf};

const MAX_NEWTON_ITER: usize = 200;
const MAX_HALVINGS: usize = 30;
const NELDER_MEAD_ITER: usize = 200;
const GRAD_TOL: f64 = 1e-8;
const STEP_TOL: f64 = 1e-10;

/// Fitted normal parameters with convergence diagnostics.
///
/// `grad_norm` is the Euclidean norm of the gradient with respect to
/// `(mu / sigma, ln sigma)`, which is scale free; a converged fit satisfies
/// `grad_norm <= 1e-8 * max(1, |loglik|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocationScaleFit {
    pub mu_hat: f64,
    pub sigma_hat: f64,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: f64,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("sigma must be positive, got {sigma}")))
    }
}

pub fn loglik_normal(sample: &CensoredSample, mu: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(loglik_unchecked(sample, mu, sigma))
}

fn loglik_unchecked(sample: &CensoredSample, mu: f64, sigma: f64) -> f64 {
    let ln_sigma = sigma.ln();
    sample
        .values()
        .iter()
        .zip(sample.scheme().removals())
        .map(|(&x, &r)| {
            let z = (x - mu) / sigma;
            let mut term = normal_log_pdf(z) - ln_sigma;
            if r > 0 {
                term += r as f64 * normal_log_sf(z);
            }
            term
        })
        .sum()
}

/// Partial derivatives `(dl/dmu, dl/dsigma)`.
pub fn loglik_gradient(sample: &CensoredSample, mu: f64, sigma: f64) -> Result<(f64, f64)> {
    check_sigma(sigma)?;
    let (gm, gs) = scaled_gradient(sample, mu, sigma);
    Ok((gm / sigma, gs / sigma))
}

/// `(sigma dl/dmu, sigma dl/dsigma)`; the second entry is `dl/d ln sigma`.
fn scaled_gradient(sample: &CensoredSample, mu: f64, sigma: f64) -> (f64, f64) {
    let mut gm = 0.0;
    let mut gs = 0.0;
    for (&x, &r) in sample.values().iter().zip(sample.scheme().removals()) {
        let z = (x - mu) / sigma;
        gm += z;
        gs += z * z - 1.0;
        if r > 0 {
            let lam = r as f64 * normal_hazard(z);
            gm += lam;
            gs += z * lam;
        }
    }
    (gm, gs)
}

/// Parameterization `theta = (mu, ln sigma)`.
struct Objective<'a> {
    sample: &'a CensoredSample,
}

impl Objective<'_> {
    fn value(&self, t: [f64; 2]) -> f64 {
        let v = loglik_unchecked(self.sample, t[0], t[1].exp());
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }

    fn grad(&self, t: [f64; 2]) -> [f64; 2] {
        let sigma = t[1].exp();
        let (gm, gs) = scaled_gradient(self.sample, t[0], sigma);
        [gm / sigma, gs]
    }

    fn hessian(&self, t: [f64; 2]) -> [[f64; 2]; 2] {
        let sigma = t[1].exp();
        let h = [1e-5 * sigma, 1e-5];
        let mut hess = [[0.0; 2]; 2];
        for k in 0..2 {
            let mut up = t;
            let mut down = t;
            up[k] += h[k];
            down[k] -= h[k];
            let (gu, gd) = (self.grad(up), self.grad(down));
            for j in 0..2 {
                hess[j][k] = (gu[j] - gd[j]) / (2.0 * h[k]);
            }
        }
        let off = 0.5 * (hess[0][1] + hess[1][0]);
        hess[0][1] = off;
        hess[1][0] = off;
        hess
    }

    fn grad_norm(&self, t: [f64; 2]) -> f64 {
        let (gm, gs) = scaled_gradient(self.sample, t[0], t[1].exp());
        gm.hypot(gs)
    }

    fn converged(&self, t: [f64; 2], value: f64) -> bool {
        self.grad_norm(t) <= GRAD_TOL * value.abs().max(1.0)
    }
}

enum NewtonOutcome {
    Converged,
    Stalled,
    Exhausted,
}

fn newton(obj: &Objective, theta: &mut [f64; 2], value: &mut f64, iters: &mut usize) -> NewtonOutcome {
    while *iters < MAX_NEWTON_ITER {
        if obj.converged(*theta, *value) {
            return NewtonOutcome::Converged;
        }
        *iters += 1;
        let g = obj.grad(*theta);
        let h = obj.hessian(*theta);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        // Newton direction when the Hessian is negative definite,
        // scaled steepest ascent otherwise.
        let dir = if h[0][0] < 0.0 && det > 0.0 {
            [
                -(h[1][1] * g[0] - h[0][1] * g[1]) / det,
                -(-h[1][0] * g[0] + h[0][0] * g[1]) / det,
            ]
        } else {
            let sigma = theta[1].exp();
            let m = obj.sample.values().len() as f64;
            [g[0] * sigma * sigma / m, g[1] / m]
        };
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let cand = [theta[0] + step * dir[0], theta[1] + step * dir[1]];
            let v = obj.value(cand);
            // near the optimum the gain drops below rounding of the
            // likelihood, so a shrinking gradient also counts as progress
            let flat = v >= *value - 1e-13 * value.abs().max(1.0)
                && obj.grad_norm(cand) < obj.grad_norm(*theta);
            if v >= *value || flat {
                let moved = (step * dir[0]).abs() / theta[1].exp() + (step * dir[1]).abs();
                *theta = cand;
                *value = v;
                accepted = true;
                if moved <= STEP_TOL {
                    return if obj.converged(*theta, *value) {
                        NewtonOutcome::Converged
                    } else {
                        NewtonOutcome::Stalled
                    };
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return NewtonOutcome::Stalled;
        }
    }
    if obj.converged(*theta, *value) {
        NewtonOutcome::Converged
    } else {
        NewtonOutcome::Exhausted
    }
}

fn nelder_mead(obj: &Objective, start: [f64; 2], iterations: usize) -> ([f64; 2], f64) {
    let scale = [0.1 * start[1].exp(), 0.1];
    let mut simplex = [
        start,
        [start[0] + scale[0], start[1]],
        [start[0], start[1] + scale[1]],
    ];
    // minimize the negative log-likelihood
    let f = |t: [f64; 2]| -obj.value(t);
    let mut vals = simplex.map(f);
    for _ in 0..iterations {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let (best, mid, worst) = (idx[0], idx[1], idx[2]);
        let centroid = [
            0.5 * (simplex[best][0] + simplex[mid][0]),
            0.5 * (simplex[best][1] + simplex[mid][1]),
        ];
        let along = |c: f64| {
            [
                centroid[0] + c * (simplex[worst][0] - centroid[0]),
                centroid[1] + c * (simplex[worst][1] - centroid[1]),
            ]
        };
        let refl = along(-1.0);
        let fr = f(refl);
        if fr < vals[best] {
            let exp = along(-2.0);
            let fe = f(exp);
            if fe < fr {
                simplex[worst] = exp;
                vals[worst] = fe;
            } else {
                simplex[worst] = refl;
                vals[worst] = fr;
            }
        } else if fr < vals[mid] {
            simplex[worst] = refl;
            vals[worst] = fr;
        } else {
            let contr = if fr < vals[worst] { along(-0.5) } else { along(0.5) };
            let fc = f(contr);
            if fc < vals[worst].min(fr) {
                simplex[worst] = contr;
                vals[worst] = fc;
            } else {
                for k in [mid, worst] {
                    simplex[k] = [
                        simplex[best][0] + 0.5 * (simplex[k][0] - simplex[best][0]),
                        simplex[best][1] + 0.5 * (simplex[k][1] - simplex[best][1]),
                    ];
                    vals[k] = f(simplex[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (simplex[best], -vals[best])
}

/// Normal MLE `(mu_hat, sigma_hat)` from a censored sample.
///
/// Starts from the observed mean and standard deviation (divisor `m`). A
/// fit that hits the iteration cap is returned with `converged = false`.
pub fn fit_normal(sample: &CensoredSample) -> Result<LocationScaleFit> {
    let x = sample.values();
    let m = x.len();
    if m < 2 {
        return Err(Error::DegenerateSample(format!("need m >= 2, got {m}")));
    }
    let mean = x.iter().sum::<f64>() / m as f64;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m as f64;
    if !(var > 0.0) || x[0] == x[m - 1] {
        return Err(Error::DegenerateSample("zero sample variance".into()));
    }
    let obj = Objective { sample };
    let mut theta = [mean, 0.5 * var.ln()];
    let mut value = obj.value(theta);
    let mut iterations = 0;
    let mut outcome = newton(&obj, &mut theta, &mut value, &mut iterations);
    if matches!(outcome, NewtonOutcome::Stalled) {
        let (nm_theta, nm_value) = nelder_mead(&obj, theta, NELDER_MEAD_ITER);
        if nm_value > value {
            theta = nm_theta;
            value = nm_value;
        }
        outcome = newton(&obj, &mut theta, &mut value, &mut iterations);
    }
    let converged = matches!(outcome, NewtonOutcome::Converged);
    Ok(LocationScaleFit {
        mu_hat: theta[0],
        sigma_hat: theta[1].exp(),
        loglik: value,
        converged,
        iterations,
        grad_norm: obj.grad_norm(theta),
    })
}

/// Like [`fit_normal`] but a non-converged fit becomes an error.
pub fn fit_normal_strict(sample: &CensoredSample) -> Result<LocationScaleFit> {
    let fit = fit_normal(sample)?;
    if fit.converged {
        Ok(fit)
    } else {
        Err(Error::NonConvergence {
            iterations: fit.iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::censoring::{catalog_table6, CensoringScheme};
    use crate::distributions::DistributionFamily;
    use crate::simulate::sample_progressive;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn complete(x: &[f64]) -> CensoredSample {
        CensoredSample::new(CensoringScheme::complete(x.len()).unwrap(), x.to_vec()).unwrap()
    }

    pub(crate) fn wire() -> CensoredSample {
        CensoredSample::new(
            CensoringScheme::parse(20, "0,2,1,0,3,0,0,2,0,2").unwrap(),
            vec![550., 750., 950., 1150., 1150., 1150., 1350., 1450., 1550., 1850.],
        )
        .unwrap()
    }

    #[test]
    fn complete_loglik_closed_form() {
        let s = complete(&[-1.0, 0.0, 1.0]);
        let want = -3.0 * (2.0 * std::f64::consts::PI).sqrt().ln() - 1.0;
        assert!((loglik_normal(&s, 0.0, 1.0).unwrap() - want).abs() < 1e-14);
        assert!((want + 3.756_815_599_614_018).abs() < 1e-9);
        assert!(loglik_normal(&s, 0.0, 0.0).is_err());
        assert!(loglik_gradient(&s, 0.0, -1.0).is_err());
    }

    #[test]
    fn complete_loglik_is_ordinary_normal_loglik() {
        let x = [0.3, 1.1, 2.7, 2.9, 4.0];
        let s = complete(&x);
        let (mu, sigma) = (1.7, 1.3);
        let want: f64 = x
            .iter()
            .map(|v| {
                let z: f64 = (v - mu) / sigma;
                -0.5 * z * z - (sigma * (2.0 * std::f64::consts::PI).sqrt()).ln()
            })
            .sum();
        assert!((loglik_normal(&s, mu, sigma).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn wire_loglik_matches_independent_evaluation() {
        // independent Phi: composite Simpson from 0 to |z|
        fn phi_quad(z: f64) -> f64 {
            let n = 20_000;
            let h = z.abs() / n as f64;
            let f = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let mut s = f(0.0) + f(z.abs());
            for i in 1..n {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
            }
            let half = s * h / 3.0;
            if z >= 0.0 {
                0.5 + half
            } else {
                0.5 - half
            }
        }
        let s = wire();
        let (mu, sigma) = (1200.0, 350.0);
        let brute: f64 = s
            .values()
            .iter()
            .zip(s.scheme().removals())
            .map(|(&x, &r)| {
                let z = (x - mu) / sigma;
                -0.5 * z * z - (2.0 * std::f64::consts::PI).sqrt().ln() - sigma.ln()
                    + r as f64 * (1.0 - phi_quad(z)).ln()
            })
            .sum();
        assert!((loglik_normal(&s, mu, sigma).unwrap() - brute).abs() < 1e-9);
    }

    #[test]
    fn complete_stationary_at_closed_form() {
        let x = [0.3, 1.1, 2.7, 2.9, 4.0, 4.4];
        let s = complete(&x);
        let mean = x.iter().sum::<f64>() / 6.0;
        let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 6.0).sqrt();
        let (gm, gs) = loglik_gradient(&s, mean, sd).unwrap();
        assert!(gm.abs() < 1e-10 && gs.abs() < 1e-10);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let d = DistributionFamily::normal(5.0, 2.0).unwrap();
        for ls in catalog_table6() {
            let s = sample_progressive(&ls.scheme, &d, &mut rng);
            for &(mu, sigma) in &[(5.0, 2.0), (4.0, 1.0), (6.5, 3.0)] {
                let (gm, gs) = loglik_gradient(&s, mu, sigma).unwrap();
                let h = 1e-6;
                let fm = (loglik_normal(&s, mu + h, sigma).unwrap()
                    - loglik_normal(&s, mu - h, sigma).unwrap())
                    / (2.0 * h);
                let fs = (loglik_normal(&s, mu, sigma + h).unwrap()
                    - loglik_normal(&s, mu, sigma - h).unwrap())
                    / (2.0 * h);
                let scale = gm.abs().max(gs.abs()).max(1.0);
                assert!((gm - fm).abs() <= 1e-5 * scale, "{} mu {gm} {fm}", ls.label);
                assert!((gs - fs).abs() <= 1e-5 * scale, "{} sigma {gs} {fs}", ls.label);
            }
        }
    }

    #[test]
    fn fit_complete_closed_form() {
        let fit = fit_normal(&complete(&[-1.0, 0.0, 1.0])).unwrap();
        assert!(fit.converged);
        assert!(fit.mu_hat.abs() < 1e-10);
        assert!((fit.sigma_hat - (2.0f64 / 3.0).sqrt()).abs() < 1e-10);
        assert!(fit.grad_norm <= 1e-8 * fit.loglik.abs().max(1.0));
    }

    #[test]
    fn fit_wire_matches_grid_search() {
        let s = wire();
        let fit = fit_normal(&s).unwrap();
        assert!(fit.converged);
        // coarse grid, then successively finer grids around the best cell
        let (mut cm, mut cs, mut width) = (1400.0, 450.0, 400.0);
        for _ in 0..8 {
            let mut best = (f64::NEG_INFINITY, cm, cs);
            for i in -40..=40 {
                for j in -40..=40 {
                    let mu = cm + width * i as f64 / 40.0;
                    let sigma = cs + width * j as f64 / 40.0;
                    if sigma <= 0.0 {
                        continue;
                    }
                    let v = loglik_normal(&s, mu, sigma).unwrap();
                    if v > best.0 {
                        best = (v, mu, sigma);
                    }
                }
            }
            cm = best.1;
            cs = best.2;
            width /= 10.0;
        }
        assert!((fit.mu_hat - cm).abs() < 0.01, "{} vs {}", fit.mu_hat, cm);
        assert!((fit.sigma_hat - cs).abs() < 0.01, "{} vs {}", fit.sigma_hat, cs);
    }

    #[test]
    fn fit_is_affine_equivariant() {
        let s = wire();
        let base = fit_normal(&s).unwrap();
        let moved = fit_normal(&s.affine(2.5, 7.0).unwrap()).unwrap();
        assert!((moved.mu_hat - (2.5 * base.mu_hat + 7.0)).abs() < 1e-6 * 2.5 * base.mu_hat);
        assert!((moved.sigma_hat - 2.5 * base.sigma_hat).abs() < 1e-6 * base.sigma_hat);
    }

    #[test]
    fn fit_rejects_degenerate_samples() {
        assert!(matches!(
            fit_normal(&complete(&[1.0])),
            Err(Error::DegenerateSample(_))
        ));
        assert!(matches!(
            fit_normal(&complete(&[2.0, 2.0, 2.0])),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn simulated_fits_converge() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let alts = [
            DistributionFamily::standard_normal(),
            DistributionFamily::student_t(3.0).unwrap(),
            DistributionFamily::laplace(0.0, 1.0).unwrap(),
        ];
        for ls in catalog_table6() {
            for d in &alts {
                for _ in 0..50 {
                    let s = sample_progressive(&ls.scheme, d, &mut rng);
                    let fit = fit_normal(&s).unwrap();
                    assert!(fit.converged, "{} {d}", ls.label);
                    let start_sd = {
                        let x = s.values();
                        let mean = x.iter().sum::<f64>() / x.len() as f64;
                        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64;
                        (mean, var.sqrt())
                    };
                    assert!(fit.loglik >= loglik_normal(&s, start_sd.0, start_sd.1).unwrap());
                }
            }
        }
    }
}
