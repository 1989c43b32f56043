//! Numerical certification of the sensitivity and perturbation bounds.
//!
//! Every check produces a [`BoundReport`] stating `lhs ≤ rhs` together with the
//! tolerance it was judged at. Inequalities between exactly computed
//! quantities use [`exact_tolerance`]; comparisons involving Monte-Carlo
//! estimates carry their own documented tolerance.

mod discrete;
mod inequalities;

use serde::{Deserialize, Serialize};

pub use discrete::{
    all_failure_sets, discrete_simplex_oracle, Binomial, Categorical, DiscretePmfFamily, FnPmfFamily, SimplexOracle,
};
pub use inequalities::{
    check_perturbation_bound, check_sensitivity_bound, discrete_kl, info_processing_check, kl_quadratic_consistency,
    loglog_slope, pinsker_check, pinsker_failure_chain, titu, PerturbationCheck, TituResult, EIGEN_TOLERANCE,
    VACUOUS_QUADRATIC_FORM,
};

/// `10⁻¹²·max(1, |rhs|)`, the slack allowed for rounding in exact comparisons.
pub fn exact_tolerance(rhs: f64) -> f64 {
    1e-12 * rhs.abs().max(1.0)
}

/// Where a bound was evaluated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundContext {
    pub z: Option<f64>,
    pub params: Vec<f64>,
}

impl BoundContext {
    pub fn new(z: Option<f64>, params: Vec<f64>) -> Self {
        Self { z, params }
    }
}

/// One evaluated inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
    /// `lhs ≤ rhs + tol`; false whenever either side is NaN.
    pub satisfied: bool,
    /// `rhs − lhs`.
    pub margin: f64,
    pub context: BoundContext,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl BoundReport {
    pub fn with_tolerance(label: impl Into<String>, lhs: f64, rhs: f64, tol: f64, context: BoundContext) -> Self {
        Self {
            label: label.into(),
            lhs,
            rhs,
            tol,
            satisfied: lhs <= rhs + tol,
            margin: rhs - lhs,
            context,
            warnings: Vec::new(),
        }
    }

    /// Judged at [`exact_tolerance`].
    pub fn exact(label: impl Into<String>, lhs: f64, rhs: f64, context: BoundContext) -> Self {
        Self::with_tolerance(label, lhs, rhs, exact_tolerance(rhs), context)
    }

    pub fn warn(mut self, message: impl Into<String>) -> Self {
        self.warnings.push(message.into());
        self
    }
}
