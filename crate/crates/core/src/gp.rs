//! Gaussian-process predictors over an AR(1) kernel: the plain posterior
//! predictive mean/variance, and the random-additive-bias model whose
//! posterior predictive is a Student-t located at `A1`.

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{spd_inv_sqrt, spd_inverse, spd_logdet, spd_solve};

/// AR(1) correlation matrix with entries `rho^|i-j|`.
pub fn build_ar1(n: usize, rho: f64) -> Result<DMatrix<f64>> {
    if !(rho.is_finite() && rho.abs() < 1.0) {
        return Err(Error::InvalidKernel(format!("|rho| must be < 1, got {rho}")));
    }
    if n == 0 {
        return Err(Error::InvalidKernel("kernel size must be >= 1".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        rho.powi((i as i32 - j as i32).abs())
    }))
}

/// Cross-covariance `k_{i,n+1} = rho^{n+1-i}` between the context and the
/// next point.
fn ar1_cross(n: usize, rho: f64) -> DVector<f64> {
    DVector::from_fn(n, |i, _| rho.powi((n - i) as i32))
}

fn identity_plus(k: &DMatrix<f64>) -> DMatrix<f64> {
    k + DMatrix::identity(k.nrows(), k.ncols())
}

/// Predictive mean `K12' (K11 + I)^{-1} y` of the no-bias model.
pub fn gpp_mean(y: &[f64], rho: f64) -> Result<f64> {
    let n = y.len();
    let k11 = build_ar1(n, rho)?;
    let yv = DVector::from_row_slice(y);
    let sol = spd_solve(&identity_plus(&k11), &yv)?;
    Ok(ar1_cross(n, rho).dot(&sol))
}

/// Predictive variance `sigma^2 [(K22 + 1) - K21 (K11 + I)^{-1} K12]`.
///
/// `sigma^2` multiplies both terms; anything else is dimensionally
/// inconsistent.
pub fn gpp_var(rho: f64, n: usize, sigma2: f64) -> Result<f64> {
    if sigma2 <= 0.0 {
        return Err(Error::InvalidInput("sigma2 must be positive".into()));
    }
    let k11 = build_ar1(n, rho)?;
    let k12 = ar1_cross(n, rho);
    let sol = spd_solve(&identity_plus(&k11), &k12)?;
    Ok(sigma2 * (2.0 - k12.dot(&sol)))
}

/// Whitened second and fourth central sample moments.
///
/// `y' = (I+K)^{-1/2} y`; `S_k = (1/(n-1)) sum (y'_i - mean)^k`. `S2`
/// estimates `sigma^2`.
pub fn whiten_moments(y: &[f64], kmat: &DMatrix<f64>) -> Result<(f64, f64)> {
    let n = y.len();
    if n < 2 {
        return Err(Error::InsufficientData(
            "need at least two observations for moment estimates".into(),
        ));
    }
    let w = spd_inv_sqrt(&identity_plus(kmat))?;
    let yp = w * DVector::from_row_slice(y);
    let mean = yp.sum() / n as f64;
    let mut s2 = 0.0;
    let mut s4 = 0.0;
    for v in yp.iter() {
        let d = v - mean;
        s2 += d * d;
        s4 += d * d * d * d;
    }
    let denom = (n - 1) as f64;
    Ok((s2 / denom, s4 / denom))
}

/// Method-of-moments estimates of the inverse-gamma hyperparameters.
///
/// The consistent form is `alpha = S2^2/(S4 - S2^2) + 2`;
/// `paper_literal` switches the numerator to `S2`.
pub fn estimate_alpha_beta(s2: f64, s4: f64, paper_literal: bool) -> Result<(f64, f64)> {
    let spread = s4 - s2 * s2;
    if spread <= 0.0 {
        return Err(Error::DegenerateMoments);
    }
    let numer = if paper_literal { s2 } else { s2 * s2 };
    let alpha = numer / spread + 2.0;
    let beta = s2 * (alpha + 1.0);
    Ok((alpha, beta))
}

/// `V = [(I+K)^{-1} + (1/delta2) I]^{-1}`, symmetric positive definite.
pub fn compute_v(kmat: &DMatrix<f64>, delta2: f64) -> Result<DMatrix<f64>> {
    if delta2 <= 0.0 {
        return Err(Error::InvalidInput("delta2 must be positive".into()));
    }
    let n = kmat.nrows();
    let mut inner = spd_inverse(&identity_plus(kmat))?;
    for i in 0..n {
        inner[(i, i)] += 1.0 / delta2;
    }
    let v = spd_inverse(&inner)?;
    Ok((&v + v.transpose()) * 0.5)
}

/// Closed-form bias estimate
/// `gamma = y'(I+K)^{-1} V 1 / (1'(I - V/delta2) 1)`.
pub fn estimate_gamma(y: &[f64], kmat: &DMatrix<f64>, delta2: f64) -> Result<f64> {
    let n = y.len();
    let v = compute_v(kmat, delta2)?;
    let ones = DVector::from_element(n, 1.0);
    let v1 = &v * &ones;
    let denom = n as f64 - ones.dot(&v1) / delta2;
    if denom.abs() < 1e-300 {
        return Err(Error::DegenerateBias);
    }
    let u = spd_solve(&identity_plus(kmat), &DVector::from_row_slice(y))?;
    Ok(u.dot(&v1) / denom)
}

/// Log of the delta-profile likelihood factor `g(delta2)`:
/// `(1/2) log|(I+K)^{-1} + (delta2 I)^{-1}| - (n/2) log delta2` plus the
/// quadratic-form exponent, all via SPD factorizations.
pub fn log_g_delta(
    y: &[f64],
    kmat: &DMatrix<f64>,
    gamma: f64,
    delta2: f64,
    sigma2: f64,
) -> Result<f64> {
    if delta2 <= 0.0 || sigma2 <= 0.0 {
        return Err(Error::InvalidInput("delta2 and sigma2 must be positive".into()));
    }
    let n = y.len();
    let v = compute_v(kmat, delta2)?;
    // |(I+K)^{-1} + (delta2 I)^{-1}| = 1 / |V|
    let log_det_term = -0.5 * spd_logdet(&v)?;
    let ones = DVector::from_element(n, 1.0);
    let u = spd_solve(&identity_plus(kmat), &DVector::from_row_slice(y))?;
    let v1 = &v * &ones;
    let quad = u.dot(&(&v * &u))
        + 2.0 * gamma / delta2 * u.dot(&v1)
        + gamma * gamma / (delta2 * delta2) * ones.dot(&v1)
        - gamma * gamma / delta2 * n as f64;
    Ok(log_det_term - 0.5 * n as f64 * delta2.ln() + quad / (2.0 * sigma2))
}

/// Grid-search maximizer of [`log_g_delta`] over candidate `delta2` values.
pub fn select_delta(
    y: &[f64],
    kmat: &DMatrix<f64>,
    gamma: f64,
    sigma2: f64,
    grid: &[f64],
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty delta2 grid".into()));
    }
    let mut best: Option<(f64, f64)> = None;
    for &d2 in grid {
        if d2 <= 0.0 {
            return Err(Error::InvalidConfig(format!("delta2 grid value {d2} <= 0")));
        }
        if let Ok(val) = log_g_delta(y, kmat, gamma, d2, sigma2) {
            if val.is_finite() && best.map_or(true, |(bv, _)| val > bv) {
                best = Some((val, d2));
            }
        }
    }
    best.map(|(_, d2)| d2)
        .ok_or_else(|| Error::Numerical("no grid point evaluable".into()))
}

/// Default grid for the `delta2` search.
pub const DEFAULT_DELTA2_GRID: [f64; 5] = [0.01, 0.05, 0.1, 0.5, 1.0];

/// Standalone default when no search is run (`delta = 0.1`, squared).
pub const DEFAULT_DELTA2: f64 = 0.01;

/// Hyperparameters of the random-bias model.
#[derive(Debug, Clone, Copy)]
pub struct RbHyper {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta2: f64,
    pub sigma2: f64,
}

impl RbHyper {
    pub fn validate(&self) -> Result<()> {
        if self.alpha <= 0.0 || self.beta <= 0.0 || self.delta2 <= 0.0 || self.sigma2 <= 0.0 {
            return Err(Error::InvalidConfig(
                "alpha, beta, delta2 and sigma2 must be positive".into(),
            ));
        }
        if !self.gamma.is_finite() {
            return Err(Error::InvalidConfig("gamma must be finite".into()));
        }
        Ok(())
    }
}

/// Every derived quantity of the random-bias posterior at context length `n`.
#[derive(Debug, Clone)]
pub struct RbComponents {
    /// `[(I+K)^{-1} + (delta2 I)^{-1}]^{-1}` at size n.
    pub v: DMatrix<f64>,
    /// Posterior bias mean `V [(I+K)^{-1} y + (gamma/delta2) 1]`.
    pub mu: DVector<f64>,
    /// `n + alpha`.
    pub alpha_star: f64,
    pub beta_star: f64,
    /// `(I+K)^{-1} - (I+K)^{-1} V (I+K)^{-1}` at size n+1.
    pub gamma1_mat: DMatrix<f64>,
    /// `(gamma/delta2) (I+K)^{-1} V 1` at size n+1.
    pub gamma2_vec: DVector<f64>,
    pub delta_term: f64,
    /// First n entries of the last column of `gamma1_mat`.
    pub g1: DVector<f64>,
    /// Bottom-right entry of `gamma1_mat`.
    pub gamma1: f64,
    /// Last entry of `gamma2_vec`.
    pub gamma2: f64,
    /// Student-t location (and mode) of the predictive.
    pub a1: f64,
    pub a2: f64,
    /// `beta + A2`; the predictive's scale numerator.
    pub beta_dstar: f64,
}

/// Assemble the random-bias posterior quantities from the data, the AR(1)
/// correlation, and the hyperparameters.
pub fn rb_components(y: &[f64], rho: f64, hyper: &RbHyper) -> Result<RbComponents> {
    hyper.validate()?;
    let n = y.len();
    if n == 0 {
        return Err(Error::InsufficientData("need at least one observation".into()));
    }
    let yv = DVector::from_row_slice(y);
    let gamma = hyper.gamma;
    let d2 = hyper.delta2;

    // Size-n pieces of the posterior over (a, sigma^2).
    let kn = build_ar1(n, rho)?;
    let an = identity_plus(&kn);
    let an_inv_y = spd_solve(&an, &yv)?;
    let vn = compute_v(&kn, d2)?;
    let ones_n = DVector::from_element(n, 1.0);
    let mu = &vn * (&an_inv_y + &ones_n * (gamma / d2));
    let alpha_star = n as f64 + hyper.alpha;
    let mu_vinv_mu = {
        let sol = spd_solve(&vn, &mu)?;
        mu.dot(&sol)
    };
    let beta_star = hyper.beta
        + 0.5 * yv.dot(&an_inv_y)
        + 0.5 * gamma * gamma * n as f64 / d2
        - 0.5 * mu_vinv_mu;

    // Size-(n+1) pieces of the predictive.
    let m = n + 1;
    let km = build_ar1(m, rho)?;
    let am = identity_plus(&km);
    let am_inv = spd_inverse(&am)?;
    let vm = compute_v(&km, d2)?;
    let g1m = &am_inv - &am_inv * &vm * &am_inv;
    let gamma1_mat = (&g1m + g1m.transpose()) * 0.5;
    let ones_m = DVector::from_element(m, 1.0);
    let gamma2_vec = (&am_inv * (&vm * &ones_m)) * (gamma / d2);
    let delta_term = 0.5 * m as f64 * gamma * gamma / d2
        - 0.5 * gamma * gamma / (d2 * d2) * ones_m.dot(&(&vm * &ones_m));

    let g1 = DVector::from_fn(n, |i, _| gamma1_mat[(i, n)]);
    let gamma1 = gamma1_mat[(n, n)];
    if gamma1 <= 0.0 {
        return Err(Error::Numerical(format!(
            "gamma1 = {gamma1} is not positive"
        )));
    }
    let gamma2 = gamma2_vec[n];
    let resid = gamma2 - yv.dot(&g1);
    let a1 = resid / gamma1;
    let g1_block = gamma1_mat.view((0, 0), (n, n));
    let gamma2_head = gamma2_vec.rows(0, n);
    let a2 = 0.5 * yv.dot(&(g1_block * &yv)) - yv.dot(&gamma2_head) + delta_term
        - resid * resid / (2.0 * gamma1);
    let beta_dstar = hyper.beta + a2;
    if beta_dstar <= 0.0 {
        return Err(Error::InvalidPosterior(format!(
            "beta + A2 = {beta_dstar} is not positive"
        )));
    }

    Ok(RbComponents {
        v: vn,
        mu,
        alpha_star,
        beta_star,
        gamma1_mat,
        gamma2_vec,
        delta_term,
        g1,
        gamma1,
        gamma2,
        a1,
        a2,
        beta_dstar,
    })
}

/// Point prediction of the random-bias model: the Student-t location `A1`.
pub fn rb_predict(y: &[f64], rho: f64, hyper: &RbHyper) -> Result<f64> {
    Ok(rb_components(y, rho, hyper)?.a1)
}

/// Posterior predictive density at `y_next`: Student-t with `2 alpha + n`
/// degrees of freedom, location `A1`, and squared scale
/// `2 beta** / ((2 alpha + n) gamma1)`.
pub fn rb_predictive_density(y_next: f64, y: &[f64], rho: f64, hyper: &RbHyper) -> Result<f64> {
    let comps = rb_components(y, rho, hyper)?;
    let dof = 2.0 * hyper.alpha + y.len() as f64;
    let scale2 = 2.0 * comps.beta_dstar / (dof * comps.gamma1);
    Ok(student_t_pdf(y_next, comps.a1, scale2, dof))
}

/// Location-scale Student-t density; `scale2` is the squared scale.
pub fn student_t_pdf(x: f64, loc: f64, scale2: f64, dof: f64) -> f64 {
    let z2 = (x - loc) * (x - loc) / scale2;
    let log_pdf = ln_gamma((dof + 1.0) / 2.0)
        - ln_gamma(dof / 2.0)
        - 0.5 * (dof * std::f64::consts::PI * scale2).ln()
        - 0.5 * (dof + 1.0) * (z2 / dof).ln_1p();
    log_pdf.exp()
}
