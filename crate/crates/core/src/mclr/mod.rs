//! Monte-Carlo likelihood-ratio estimators.
//!
//! One batch of scored draws `xᵢ ~ p(x|b)` gives the failure probability and
//! its parameter gradient at every threshold,
//!
//! ```text
//! P_f ≈ (1/N) Σ 1[g(h(xᵢ)) fails z]      ∂P_f/∂bⱼ ≈ (1/N) Σ 1[·] ∂ln p(xᵢ|b)/∂bⱼ
//! ```
//!
//! and, after smoothing the Dirac deltas with a Gaussian kernel, the output
//! density `p(y|b)`, its parameter derivatives, the output FIM `F_y` and grid
//! KL divergences ([`density`]).

pub mod density;
mod estimate;
pub mod finite_difference;

use serde::{Deserialize, Serialize};

use crate::Result;

pub use density::{
    density_on_grid, estimate_kl, estimate_output_density, estimate_output_fim, likelihood_ratio_weights, Axis,
    DensityGrid, GridSpec, OutputFim,
};
pub use estimate::{
    empirical_percentile, estimate_gradient, estimate_pf, evaluate_outputs, performance_values, pf_from_values,
    sensitivity_curve, sensitivity_curve_from_values, sensitivity_from_values, PfEstimate, SensitivityCurve,
};

/// Deterministic forward model `y = h(x)`.
pub trait ForwardMap: Sync {
    fn input_dim(&self) -> usize;

    fn output_dim(&self) -> usize;

    fn eval(&self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

/// Scalar performance function `g(y)`.
pub trait Performance: Sync {
    fn value(&self, y: &[f64]) -> f64;
}

impl<F> Performance for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn value(&self, y: &[f64]) -> f64 {
        self(y)
    }
}

/// `g(y) = y₀`; with [`Direction::AtMost`] the failure probability is the output CDF.
#[derive(Debug, Clone, Copy, Default)]
pub struct FirstComponent;

impl Performance for FirstComponent {
    fn value(&self, y: &[f64]) -> f64 {
        y[0]
    }
}

/// Which side of the threshold counts as failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// `g(y) > z`; ties count as safe.
    #[default]
    Exceed,
    /// `g(y) ≤ z`, the complementary event (CDF convention).
    AtMost,
}

impl Direction {
    #[inline]
    pub fn fails(self, value: f64, z: f64) -> bool {
        match self {
            Direction::Exceed => value > z,
            Direction::AtMost => value <= z,
        }
    }
}

/// Performance function, threshold and failure side.
#[derive(Clone, Copy)]
pub struct FailureSpec<'a> {
    pub g: &'a dyn Performance,
    pub z: f64,
    pub direction: Direction,
}

impl<'a> FailureSpec<'a> {
    pub fn new(g: &'a dyn Performance, z: f64, direction: Direction) -> Self {
        Self { g, z, direction }
    }

    /// Indicator value, exactly 0 or 1.
    pub fn indicator(&self, y: &[f64]) -> f64 {
        if self.direction.fails(self.g.value(y), self.z) {
            1.0
        } else {
            0.0
        }
    }
}

/// Probability and gradient at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    pub z: f64,
    /// Percentile the threshold was taken at, when it came from a sweep.
    pub percentile: Option<f64>,
    pub p_f: f64,
    pub gradient: Vec<f64>,
    pub grad_norm_sq: f64,
    /// Standard error of each gradient component from the per-sample variance of its summand.
    pub grad_std_err: Vec<f64>,
    pub n_samples: usize,
    pub std_err_pf: f64,
}
