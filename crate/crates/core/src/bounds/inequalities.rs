use serde::{Deserialize, Serialize};

use super::{exact_tolerance, BoundContext, BoundReport};
use crate::linalg::FisherMatrix;
use crate::mclr::SensitivityResult;
use crate::{Error, Result};

/// Relative tolerance on `λ_min(F_x − F_y)`, scaled by `tr(F_x)`, absorbing kernel-estimate noise in `F_y`.
pub const EIGEN_TOLERANCE: f64 = 0.05;
/// Above this value of `ΔbᵀFΔb` the perturbation bound says nothing about a probability.
pub const VACUOUS_QUADRATIC_FORM: f64 = 1.0;

fn check_dim(f: &FisherMatrix, n: usize, what: &str) -> Result<()> {
    if f.dim() == n {
        Ok(())
    } else {
        Err(Error::Contract(format!("{what} has dimension {n}, FIM has {}", f.dim())))
    }
}

/// `‖∂P_f/∂b‖² ≤ tr(F_y)` and `tr(F_y) ≤ tr(F_x)`.
pub fn check_sensitivity_bound(
    result: &SensitivityResult,
    f_y: &FisherMatrix,
    f_x: &FisherMatrix,
) -> Result<[BoundReport; 2]> {
    check_dim(f_y, result.gradient.len(), "gradient")?;
    check_dim(f_x, result.gradient.len(), "gradient")?;
    let context = BoundContext::new(Some(result.z), Vec::new());
    Ok([
        BoundReport::exact("grad_norm_sq <= tr(F_y)", result.grad_norm_sq, f_y.trace(), context.clone()),
        BoundReport::exact("tr(F_y) <= tr(F_x)", f_y.trace(), f_x.trace(), context),
    ])
}

/// Perturbation bound with the entropy change it corresponds to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCheck {
    pub report: BoundReport,
    /// `ΔH = ½ΔbᵀFΔb`.
    pub delta_h: f64,
}

/// `|P_f(b+Δb) − P_f(b)|² ≤ ΔbᵀFΔb`.
pub fn check_perturbation_bound(
    p_f_at_b: f64,
    p_f_at_b_plus: f64,
    delta: &[f64],
    f: &FisherMatrix,
) -> Result<PerturbationCheck> {
    let quad = f.quadratic_form(delta)?;
    let diff = p_f_at_b_plus - p_f_at_b;
    let mut report =
        BoundReport::exact("|dP_f|^2 <= db'F db", diff * diff, quad, BoundContext::new(None, delta.to_vec()));
    if quad > VACUOUS_QUADRATIC_FORM {
        report = report.warn(format!("db'F db = {quad} exceeds 1; the bound is vacuous"));
    }
    Ok(PerturbationCheck { report, delta_h: 0.5 * quad })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TituResult {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// `(Σuᵢ)²/Σvᵢ ≤ Σuᵢ²/vᵢ` for `uᵢ ≥ 0`, `vᵢ > 0`.
pub fn titu(u: &[f64], v: &[f64]) -> Result<TituResult> {
    if u.len() != v.len() || u.is_empty() {
        return Err(Error::Contract(format!(
            "Titu's lemma needs equal non-empty lengths, got {} and {}",
            u.len(),
            v.len()
        )));
    }
    if let Some(bad) = v.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Contract(format!("denominator {bad} is not positive")));
    }
    if let Some(bad) = u.iter().find(|u| !(**u >= 0.0)) {
        return Err(Error::Contract(format!("numerator {bad} is negative")));
    }
    let su: f64 = u.iter().sum();
    let sv: f64 = v.iter().sum();
    let lhs = su * su / sv;
    let rhs: f64 = u.iter().zip(v).map(|(u, v)| u * u / v).sum();
    Ok(TituResult { lhs, rhs, satisfied: lhs <= rhs + exact_tolerance(rhs) })
}

fn check_pair(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::Contract(format!("distributions over {} and {} cells", p.len(), q.len())));
    }
    for (i, (a, b)) in p.iter().zip(q).enumerate() {
        if !(*a >= 0.0 && *b >= 0.0) {
            return Err(Error::Contract(format!("cell {i} has a negative probability")));
        }
        if *a > 0.0 && *b <= 0.0 {
            return Err(Error::Contract(format!("cell {i} has P > 0 but Q = 0")));
        }
    }
    Ok(())
}

/// `KL[P‖Q] = Σ pᵢ ln(pᵢ/qᵢ)` with `0 ln 0 = 0`.
pub fn discrete_kl(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pair(p, q)?;
    Ok(p.iter().zip(q).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * (a / b).ln()).sum())
}

/// Pinsker's inequality `‖P − Q‖₁² ≤ 2 KL[P‖Q]`.
pub fn pinsker_check(p: &[f64], q: &[f64]) -> Result<BoundReport> {
    let kl = discrete_kl(p, q)?;
    let l1: f64 = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
    let rhs = 2.0 * kl;
    Ok(BoundReport::exact("||P-Q||_1^2 <= 2 KL[P||Q]", l1 * l1, rhs, BoundContext::default()))
}

/// The chain from a failure-set probability change to the divergence:
///
/// ```text
/// |P(A) − Q(A)|² ≤ (Σ_A |pᵢ − qᵢ|)² ≤ ‖P − Q‖₁² ≤ 2 KL[P‖Q]
/// ```
pub fn pinsker_failure_chain(p: &[f64], q: &[f64], failure_set: &[usize]) -> Result<Vec<BoundReport>> {
    check_pair(p, q)?;
    if let Some(i) = failure_set.iter().find(|i| **i >= p.len()) {
        return Err(Error::Contract(format!("failure-set index {i} outside support of size {}", p.len())));
    }
    let dp: f64 = failure_set.iter().map(|&i| p[i] - q[i]).sum();
    let set_l1: f64 = failure_set.iter().map(|&i| (p[i] - q[i]).abs()).sum();
    let l1: f64 = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
    let kl2 = 2.0 * discrete_kl(p, q)?;
    let ctx = BoundContext::default();
    Ok(vec![
        BoundReport::exact("|dP(A)|^2 <= (sum_A |dp|)^2", dp * dp, set_l1 * set_l1, ctx.clone()),
        BoundReport::exact("(sum_A |dp|)^2 <= ||P-Q||_1^2", set_l1 * set_l1, l1 * l1, ctx.clone()),
        BoundReport::exact("||P-Q||_1^2 <= 2 KL[P||Q]", l1 * l1, kl2, ctx),
    ])
}

/// `tr(F_y) ≤ tr(F_x)` exactly, and `F_x − F_y ⪰ 0` up to [`EIGEN_TOLERANCE`]`·tr(F_x)`.
///
/// The second report has `lhs = −λ_min(F_x − F_y)` and `rhs = 0`.
pub fn info_processing_check(f_y: &FisherMatrix, f_x: &FisherMatrix) -> Result<[BoundReport; 2]> {
    check_dim(f_x, f_y.dim(), "output FIM")?;
    let gap = f_x.difference(f_y)?;
    let ctx = BoundContext::default();
    Ok([
        BoundReport::exact("tr(F_y) <= tr(F_x)", f_y.trace(), f_x.trace(), ctx.clone()),
        BoundReport::with_tolerance(
            "F_y <= F_x (eigen)",
            -gap.min_eigenvalue(),
            0.0,
            EIGEN_TOLERANCE * f_x.trace(),
            ctx,
        ),
    ])
}

/// `|KL − ½ΔbᵀFΔb| / (½ΔbᵀFΔb)`.
pub fn kl_quadratic_consistency(f: &FisherMatrix, delta: &[f64], kl_direct: f64) -> Result<f64> {
    let half = 0.5 * f.quadratic_form(delta)?;
    if !(half > 0.0) {
        return Err(Error::Contract(format!("quadratic form ½ΔbᵀFΔb = {half} is not positive")));
    }
    Ok((kl_direct - half).abs() / half)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Contract("slope needs at least two paired points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Numeric("log-log slope needs positive values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}
