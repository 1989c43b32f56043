//! The machine-readable record of one run.

use serde::{Deserialize, Serialize};

use infobound::bounds::SimplexOracle;
use infobound::{BoundReport, FisherMatrix, SensitivityResult};

use crate::config::RunConfig;

/// Inputs sufficient to regenerate every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub code_version: String,
    pub seed: u64,
    pub n_samples: usize,
    /// Kernel bandwidths actually used, after defaults were resolved.
    pub bandwidth: Vec<f64>,
    pub grid_points: Vec<usize>,
    pub config: RunConfig,
}

/// Outcome of one named acceptance check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// `|ΔP_f|²` against both quadratic forms for one `Δb`, over all curve thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSummary {
    pub delta: Vec<f64>,
    pub quad_form_x: f64,
    pub quad_form_y: f64,
    /// `ΔH = ½ΔbᵀF_yΔb`.
    pub delta_h: f64,
    pub thresholds_checked: usize,
    pub violations_x: usize,
    pub violations_y: usize,
    /// Reports at the threshold with the largest `|ΔP_f|²`.
    pub worst_x: BoundReport,
    pub worst_y: BoundReport,
}

/// Grid KL against `½ΔbᵀF_yΔb` over successive halvings of `Δb`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlLevel {
    pub delta: Vec<f64>,
    pub half_quad_form: f64,
    /// `KL[p(y|b) ‖ p(y|b+Δb)]`.
    pub kl_forward: f64,
    /// `KL[p(y|b+Δb) ‖ p(y|b)]`.
    pub kl_reverse: f64,
    pub rel_err_forward: f64,
    pub rel_err_reverse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlSweep {
    pub levels: Vec<KlLevel>,
    pub slope_forward: f64,
    pub slope_reverse: f64,
}

/// LR gradient against central differences of the reweighted probability estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub steps: Vec<f64>,
    /// Components with `|∂P_f/∂bⱼ| > 0.1`.
    pub compared: usize,
    pub max_rel_err: f64,
    /// `(percentile, parameter, LR value, FD value)` where the relative error is 2% or more.
    pub failures: Vec<(f64, String, f64, f64)>,
}

/// Closed-form comparison for the identity case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityComparison {
    /// Thresholds with `P_f ∈ [0.05, 0.95]`.
    pub compared: usize,
    pub max_rel_err_norm_sq: f64,
    pub worst_percentile: f64,
    pub peak_norm_sq: f64,
    pub analytic_peak: f64,
    pub stationarity: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamSummary {
    pub roots: Vec<f64>,
    pub band: (f64, f64),
    pub acceleration_scale: f64,
    pub strain_scale: f64,
}

/// Everything a continuous case run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case: String,
    pub provenance: Provenance,
    pub param_names: Vec<String>,
    pub fim_x: FisherMatrix,
    pub tr_fx: f64,
    /// Monte-Carlo `(1/N)Σ ssᵀ` trace, a sampling diagnostic for `tr_fx`.
    pub tr_fx_monte_carlo: f64,
    pub fim_y: FisherMatrix,
    pub tr_fy: f64,
    pub fy_excluded_mass: f64,
    pub degenerate: bool,
    pub curve: Vec<SensitivityResult>,
    pub sensitivity_bounds: Vec<BoundReport>,
    pub info_processing: Vec<BoundReport>,
    pub perturbations: Vec<PerturbationSummary>,
    pub kl: Option<KlSweep>,
    pub gradient_check: GradientCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity: Option<IdentityComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beam: Option<BeamSummary>,
    pub warnings: Vec<String>,
    pub checks: Vec<CheckOutcome>,
    pub bound_checks: usize,
    pub bound_violations: usize,
}

/// Exhaustive discrete-simplex oracle results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub theta: f64,
    pub failure_set: Vec<usize>,
    pub oracle: SimplexOracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub case: String,
    pub provenance: Provenance,
    pub rows: Vec<OracleRow>,
    pub checks: Vec<CheckOutcome>,
    pub bound_checks: usize,
    pub bound_violations: usize,
}

/// Either kind of report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Report {
    Case(Box<CaseReport>),
    Oracle(Box<OracleReport>),
}

impl Report {
    pub fn checks(&self) -> &[CheckOutcome] {
        match self {
            Report::Case(r) => &r.checks,
            Report::Oracle(r) => &r.checks,
        }
    }

    pub fn bound_violations(&self) -> usize {
        match self {
            Report::Case(r) => r.bound_violations,
            Report::Oracle(r) => r.bound_violations,
        }
    }

    /// All bounds hold.
    pub fn bounds_hold(&self) -> bool {
        self.bound_violations() == 0
    }

    /// All bounds hold and every check passed.
    pub fn all_passed(&self) -> bool {
        self.bounds_hold() && self.checks().iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialise");
        s.push('\n');
        s
    }
}
