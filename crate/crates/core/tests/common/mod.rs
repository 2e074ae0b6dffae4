//! Independent oracle for the random-bias predictive density.
//!
//! Marginally, y | sigma^2 ~ N(gamma 1, sigma^2 (I + K + delta^2 I)), so the
//! marginal likelihood is a 1-D integral of that normal against the
//! inverse-gamma prior, and the predictive density is the ratio
//! m(y, g) / m(y). This path shares no code with the closed-form
//! Student-t construction in the library.

#![allow(dead_code)]
use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;
use streampred::gp::{build_ar1, rb_components, RbHyper};

/// Constant pieces of the normal likelihood for a fixed data vector.
pub struct MarginalQuad {
    quad_form: f64,
    log_det: f64,
    n: f64,
}

impl MarginalQuad {
    pub fn new(y: &[f64], rho: f64, gamma: f64, delta2: f64) -> Self {
        let n = y.len();
        let k = build_ar1(n, rho).unwrap();
        let c = k + DMatrix::<f64>::identity(n, n) * (1.0 + delta2);
        let chol = c.cholesky().unwrap();
        let log_det = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
        let centered = DVector::from_row_slice(y) - DVector::from_element(n, gamma);
        let quad_form = centered.dot(&chol.solve(&centered));
        MarginalQuad {
            quad_form,
            log_det,
            n: n as f64,
        }
    }

    /// log N(y; gamma 1, sigma2 C) + log IG(sigma2; alpha, beta) + log sigma2
    /// (the Jacobian of t = ln sigma2).
    fn log_integrand(&self, t: f64, alpha: f64, beta: f64) -> f64 {
        let sigma2 = t.exp();
        let log_normal = -0.5 * self.n * (2.0 * std::f64::consts::PI * sigma2).ln()
            - 0.5 * self.log_det
            - self.quad_form / (2.0 * sigma2);
        let log_ig = alpha * beta.ln() - ln_gamma(alpha) - (alpha + 1.0) * sigma2.ln()
            - beta / sigma2;
        log_normal + log_ig + t
    }

    /// log of the marginal likelihood, by Simpson's rule over t = ln sigma2.
    pub fn log_marginal(&self, alpha: f64, beta: f64) -> f64 {
        let (lo, hi, steps) = (-30.0, 25.0, 100_000usize);
        let h = (hi - lo) / steps as f64;
        let logs: Vec<f64> = (0..=steps)
            .map(|i| self.log_integrand(lo + i as f64 * h, alpha, beta))
            .collect();
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut acc = 0.0;
        for (i, &l) in logs.iter().enumerate() {
            let w = if i == 0 || i == steps {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * (l - max).exp();
        }
        max + (acc * h / 3.0).ln()
    }
}

pub fn oracle_predictive_with_den(g: f64, y: &[f64], rho: f64, hyper: &RbHyper, log_den: f64) -> f64 {
    let mut extended = y.to_vec();
    extended.push(g);
    let num = MarginalQuad::new(&extended, rho, hyper.gamma, hyper.delta2)
        .log_marginal(hyper.alpha, hyper.beta);
    (num - log_den).exp()
}

pub fn oracle_predictive(g: f64, y: &[f64], rho: f64, hyper: &RbHyper) -> f64 {
    let den = MarginalQuad::new(y, rho, hyper.gamma, hyper.delta2)
        .log_marginal(hyper.alpha, hyper.beta);
    oracle_predictive_with_den(g, y, rho, hyper, den)
}

pub fn hyper(gamma: f64, delta2: f64) -> RbHyper {
    RbHyper {
        alpha: 3.0,
        beta: 2.0,
        gamma,
        delta2,
        sigma2: 1.0,
    }
}

/// Eleven evaluation points spanning the predictive's bulk.
pub fn eval_points(y: &[f64], rho: f64, h: &RbHyper) -> Vec<f64> {
    let comps = rb_components(y, rho, h).unwrap();
    let dof = 2.0 * h.alpha + y.len() as f64;
    let scale = (2.0 * comps.beta_dstar / (dof * comps.gamma1)).sqrt();
    (0..11)
        .map(|i| comps.a1 + (i as f64 - 5.0) * 0.8 * scale)
        .collect()
}

/// Max relative error of the closed-form predictive against the
/// quadrature oracle, over the criterion grid: n in {1,2,3}, gamma in
/// {0, 0.3}, delta2 in {0.01, 1}, eleven points each.
pub fn max_oracle_rel_err(rho: f64, seed: u64) -> f64 {
    use rand::Rng;
    use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
    use streampred::gp::rb_predictive_density;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for n in 1..=3usize {
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        for gamma in [0.0, 0.3] {
            for delta2 in [0.01, 1.0] {
                let h = hyper(gamma, delta2);
                let log_den = MarginalQuad::new(&y, rho, h.gamma, h.delta2)
                    .log_marginal(h.alpha, h.beta);
                for g in eval_points(&y, rho, &h) {
                    let closed = rb_predictive_density(g, &y, rho, &h).unwrap();
                    let oracle = oracle_predictive_with_den(g, &y, rho, &h, log_den);
                    worst = worst.max((closed - oracle).abs() / oracle);
                }
            }
        }
    }
    worst
}
