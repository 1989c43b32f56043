//! `y = x` with a Normal input: every quantity has a closed form.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::distributions::{InputModel, MarginalSpec};
use crate::mclr::ForwardMap;
use crate::{Error, Result};

/// The identity forward map on one input.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityMap;

impl ForwardMap for IdentityMap {
    fn input_dim(&self) -> usize {
        1
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        y[0] = x[0];
        Ok(())
    }
}

/// Normal input `x ~ N(μ, σ²)` pushed through [`IdentityMap`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCase {
    pub mu: f64,
    pub sigma: f64,
}

impl IdentityCase {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        MarginalSpec::normal(mu, sigma)?;
        Ok(Self { mu, sigma })
    }

    pub fn model(&self) -> Result<InputModel> {
        Ok(InputModel::single(MarginalSpec::normal(self.mu, self.sigma)?))
    }

    /// Input (and output) FIM trace, `3/σ²`.
    pub fn fim_trace(&self) -> f64 {
        3.0 / (self.sigma * self.sigma)
    }

    pub fn analytic(&self, y: f64) -> Result<IdentityAnalytic> {
        identity_analytic(self.mu, self.sigma, y)
    }
}

/// CDF `P(Y ≤ y)` with its gradient in `(μ, σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityAnalytic {
    pub p_f: f64,
    pub d_mu: f64,
    pub d_sigma: f64,
    pub norm_sq: f64,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("σ must be positive, got {sigma}")))
    }
}

fn pdf(mu: f64, sigma: f64, y: f64) -> f64 {
    let t = (y - mu) / sigma;
    (-0.5 * t * t).exp() / ((2.0 * PI).sqrt() * sigma)
}

/// `P_f = Φ((y−μ)/σ)`, `∂P_f/∂μ = −p(y)`, `∂P_f/∂σ = −((y−μ)/σ)·p(y)`.
pub fn identity_analytic(mu: f64, sigma: f64, y: f64) -> Result<IdentityAnalytic> {
    check_sigma(sigma)?;
    let t = (y - mu) / sigma;
    let p = pdf(mu, sigma, y);
    let d_mu = -p;
    let d_sigma = if p == 0.0 { 0.0 } else { -t * p };
    Ok(IdentityAnalytic { p_f: 0.5 * libm::erfc(-t / SQRT_2), d_mu, d_sigma, norm_sq: d_mu * d_mu + d_sigma * d_sigma })
}

/// First and second `y`-derivatives of `‖∂P_f/∂b‖² = p²(1 + (y−μ)²/σ²)`.
///
/// ```text
/// d/dy   = −2p²(y−μ)³/σ⁴
/// d²/dy² = −(2/σ⁴)[2pp′(y−μ)³ + 3p²(y−μ)²],   p′ = −(y−μ)p/σ²
/// ```
pub fn norm_sq_derivatives(mu: f64, sigma: f64, y: f64) -> Result<(f64, f64)> {
    check_sigma(sigma)?;
    let u = y - mu;
    let s4 = sigma.powi(4);
    let p = pdf(mu, sigma, y);
    let dp = -u / (sigma * sigma) * p;
    let first = -2.0 * p * p * u.powi(3) / s4;
    let second = -2.0 / s4 * (2.0 * p * dp * u.powi(3) + 3.0 * p * p * u * u);
    Ok((first, second))
}

/// Both derivatives of the sensitivity norm at `y = μ`; each is exactly zero.
pub fn identity_stationarity(mu: f64, sigma: f64) -> Result<(f64, f64)> {
    norm_sq_derivatives(mu, sigma, mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn values_at_the_mean() {
        let a = identity_analytic(1.0, 0.2, 1.0).unwrap();
        assert_relative_eq!(a.p_f, 0.5, epsilon = 1e-15);
        assert_relative_eq!(a.d_mu, -1.0 / ((2.0 * PI).sqrt() * 0.2), max_relative = 1e-14);
        assert_eq!(a.d_sigma, 0.0);
        assert_relative_eq!(a.norm_sq, 1.0 / (2.0 * PI * 0.04), max_relative = 1e-14);
        assert_relative_eq!(a.norm_sq, 3.978_873_577_297_384, max_relative = 1e-12);
    }

    #[test]
    fn tails_decay() {
        for y in [-50.0, 50.0, 1e6] {
            assert!(identity_analytic(1.0, 0.2, y).unwrap().norm_sq < 1e-300);
        }
        let lo = identity_analytic(1.0, 0.2, -3.0).unwrap();
        assert!(lo.p_f < 1e-10);
        assert_relative_eq!(identity_analytic(1.0, 0.2, 5.0).unwrap().p_f, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences_of_cdf() {
        let h = 1e-6;
        for y in [0.6, 0.9, 1.3] {
            let a = identity_analytic(1.0, 0.2, y).unwrap();
            let fd_mu = (identity_analytic(1.0 + h, 0.2, y).unwrap().p_f
                - identity_analytic(1.0 - h, 0.2, y).unwrap().p_f)
                / (2.0 * h);
            let fd_s = (identity_analytic(1.0, 0.2 + h, y).unwrap().p_f
                - identity_analytic(1.0, 0.2 - h, y).unwrap().p_f)
                / (2.0 * h);
            assert_relative_eq!(a.d_mu, fd_mu, max_relative = 1e-6);
            assert_relative_eq!(a.d_sigma, fd_s, max_relative = 1e-6);
        }
    }

    #[test]
    fn stationary_at_the_mean() {
        assert_eq!(identity_stationarity(1.0, 0.2).unwrap(), (0.0, 0.0));
        for (mu, s) in [(-3.0, 0.5), (10.0, 2.0), (0.0, 1e-2)] {
            let (d1, d2) = identity_stationarity(mu, s).unwrap();
            assert_eq!(d1, 0.0);
            assert_eq!(d2, 0.0);
        }
        assert!(identity_stationarity(0.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_derivatives_match_finite_differences() {
        let norm = |y: f64| identity_analytic(1.0, 0.2, y).unwrap().norm_sq;
        let peak = norm(1.0);
        let h = 1e-4;
        let slope = (norm(1.0 + h) - norm(1.0 - h)) / (2.0 * h);
        assert!(slope.abs() < 1e-3);
        assert!(slope.abs() < 1e-6 * peak);
        for y in [0.7, 0.95, 1.1, 1.4] {
            let (d1, d2) = norm_sq_derivatives(1.0, 0.2, y).unwrap();
            let fd1 = (norm(y + 1e-5) - norm(y - 1e-5)) / 2e-5;
            let fd2 = (norm(y + h) - 2.0 * norm(y) + norm(y - h)) / (h * h);
            assert_relative_eq!(d1, fd1, max_relative = 1e-6);
            assert_relative_eq!(d2, fd2, max_relative = 1e-4);
        }
    }

    #[test]
    fn case_helpers() {
        let c = IdentityCase::new(1.0, 0.2).unwrap();
        assert_relative_eq!(c.fim_trace(), 75.0, max_relative = 1e-14);
        assert_relative_eq!(c.model().unwrap().analytic_fim().trace(), 75.0, max_relative = 1e-14);
        assert!(IdentityCase::new(1.0, -0.2).is_err());
    }
}
