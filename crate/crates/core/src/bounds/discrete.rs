//! Brute-force checks of the perturbation bound on finite supports.
//!
//! On a support of size `d` the square roots `qᵢ = √pᵢ` lie on the unit
//! sphere, a failure set `A` gives `P_f = Σ_{i∈A} qᵢ²`, and every quantity of
//! the perturbation argument can be computed exactly.

use serde::{Deserialize, Serialize};

use super::{BoundContext, BoundReport};
use crate::linalg::FisherMatrix;
use crate::{Error, Result};

/// A parametric probability mass function on `{0, …, d−1}`.
pub trait DiscretePmfFamily {
    fn support_size(&self) -> usize;

    fn param_dim(&self) -> usize;

    fn pmf(&self, b: &[f64]) -> Result<Vec<f64>>;

    /// `∂pᵢ/∂bⱼ` as `d` rows of length `param_dim`, when known in closed form.
    fn pmf_jacobian(&self, _b: &[f64]) -> Option<Result<Vec<Vec<f64>>>> {
        None
    }
}

/// Binomial(n, θ) with the single parameter θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Binomial {
    pub trials: usize,
}

impl Binomial {
    fn theta(b: &[f64]) -> Result<f64> {
        match b {
            [t] if *t > 0.0 && *t < 1.0 => Ok(*t),
            _ => Err(Error::ParameterDomain(format!("binomial needs one θ in (0, 1), got {b:?}"))),
        }
    }

    fn choose(n: usize, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }
}

impl DiscretePmfFamily for Binomial {
    fn support_size(&self) -> usize {
        self.trials + 1
    }

    fn param_dim(&self) -> usize {
        1
    }

    fn pmf(&self, b: &[f64]) -> Result<Vec<f64>> {
        let t = Self::theta(b)?;
        let n = self.trials;
        Ok((0..=n).map(|k| Self::choose(n, k) * t.powi(k as i32) * (1.0 - t).powi((n - k) as i32)).collect())
    }

    fn pmf_jacobian(&self, b: &[f64]) -> Option<Result<Vec<Vec<f64>>>> {
        Some(self.pmf(b).map(|p| {
            let t = b[0];
            let n = self.trials as f64;
            p.iter().enumerate().map(|(k, pk)| vec![pk * (k as f64 / t - (n - k as f64) / (1.0 - t))]).collect()
        }))
    }
}

/// Softmax over `d` logits; every logit is a parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Categorical {
    pub cells: usize,
}

impl DiscretePmfFamily for Categorical {
    fn support_size(&self) -> usize {
        self.cells
    }

    fn param_dim(&self) -> usize {
        self.cells
    }

    fn pmf(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.cells || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::ParameterDomain(format!("categorical needs {} finite logits", self.cells)));
        }
        let max = b.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = b.iter().map(|v| (v - max).exp()).collect();
        let s: f64 = e.iter().sum();
        Ok(e.into_iter().map(|v| v / s).collect())
    }

    fn pmf_jacobian(&self, b: &[f64]) -> Option<Result<Vec<Vec<f64>>>> {
        Some(self.pmf(b).map(|p| {
            (0..self.cells)
                .map(|i| (0..self.cells).map(|j| p[i] * (f64::from(u8::from(i == j)) - p[j])).collect())
                .collect()
        }))
    }
}

/// A family given only by its PMF; derivatives come from fourth-order central differences.
pub struct FnPmfFamily<F> {
    pub support: usize,
    pub params: usize,
    pub pmf: F,
}

impl<F> DiscretePmfFamily for FnPmfFamily<F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    fn support_size(&self) -> usize {
        self.support
    }

    fn param_dim(&self) -> usize {
        self.params
    }

    fn pmf(&self, b: &[f64]) -> Result<Vec<f64>> {
        (self.pmf)(b)
    }
}

fn jacobian(fam: &dyn DiscretePmfFamily, b: &[f64]) -> Result<Vec<Vec<f64>>> {
    if let Some(j) = fam.pmf_jacobian(b) {
        return j;
    }
    let d = fam.support_size();
    let mut jac = vec![vec![0.0; b.len()]; d];
    for j in 0..b.len() {
        let h = 1e-3 * b[j].abs().max(1.0);
        let at = |k: f64| {
            let mut x = b.to_vec();
            x[j] += k * h;
            fam.pmf(&x)
        };
        let (p2, p1, m1, m2) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
        for i in 0..d {
            jac[i][j] = (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h);
        }
    }
    Ok(jac)
}

fn validated_pmf(fam: &dyn DiscretePmfFamily, b: &[f64]) -> Result<Vec<f64>> {
    let p = fam.pmf(b)?;
    if p.len() != fam.support_size() {
        return Err(Error::Contract(format!("pmf has {} cells, family declares {}", p.len(), fam.support_size())));
    }
    let total: f64 = p.iter().sum();
    if p.iter().any(|v| !(*v >= 0.0)) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::Contract(format!("pmf is not a distribution (sum {total})")));
    }
    Ok(p)
}

/// Everything the simplex argument compares for one `(b, Δb, A)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexOracle {
    /// `|Σ_{i∈A} pᵢ(b+Δb) − pᵢ(b)|²`.
    pub delta_pf_sq: f64,
    /// `Σᵢ |qᵢ(b+Δb) − qᵢ(b)|²`, exact.
    pub d1_sq: f64,
    /// `Σᵢ |∂qᵢ/∂b · Δb|²`, the first-order chord length; equals `¼ΔbᵀFΔb`.
    pub d1_sq_first_order: f64,
    /// `ΔbᵀFΔb` with the exact FIM `Σᵢ ∂pᵢ ∂pᵢᵀ / pᵢ`.
    pub quad_form: f64,
    /// `KL[P(b+Δb) ‖ P(b)]`.
    pub kl: f64,
    pub fim: FisherMatrix,
    /// `|ΔP_f|² ≤ ΔbᵀFΔb`, `|ΔP_f|² ≤ D₁² + (ΔbᵀFΔb)^{3/2}` and the Pinsker chain.
    pub reports: Vec<BoundReport>,
    pub warnings: Vec<String>,
}

/// Evaluates the perturbation argument exactly on a finite support.
pub fn discrete_simplex_oracle(
    fam: &dyn DiscretePmfFamily,
    b: &[f64],
    delta: &[f64],
    failure_set: &[usize],
) -> Result<SimplexOracle> {
    if b.len() != fam.param_dim() || delta.len() != b.len() {
        return Err(Error::Contract(format!(
            "family has {} parameters, got b of {} and Δb of {}",
            fam.param_dim(),
            b.len(),
            delta.len()
        )));
    }
    let d = fam.support_size();
    if let Some(i) = failure_set.iter().find(|i| **i >= d) {
        return Err(Error::Contract(format!("failure-set index {i} outside support of size {d}")));
    }
    let p = validated_pmf(fam, b)?;
    let shifted: Vec<f64> = b.iter().zip(delta).map(|(a, d)| a + d).collect();
    let p_plus = validated_pmf(fam, &shifted)?;
    let jac = jacobian(fam, b)?;

    let mut warnings = Vec::new();
    let set: Vec<usize> = failure_set
        .iter()
        .copied()
        .filter(|&i| {
            let keep = p[i] > 0.0;
            if !keep {
                warnings.push(format!("cell {i} has zero probability and is excluded from the failure set"));
            }
            keep
        })
        .collect();

    let n = b.len();
    let fim =
        FisherMatrix::from_upper(n, |j, k| (0..d).filter(|&i| p[i] > 0.0).map(|i| jac[i][j] * jac[i][k] / p[i]).sum());
    let quad_form = fim.quadratic_form(delta)?;
    let dp: f64 = set.iter().map(|&i| p_plus[i] - p[i]).sum();
    let d1_sq: f64 = p.iter().zip(&p_plus).map(|(a, b)| (b.sqrt() - a.sqrt()).powi(2)).sum();
    let d1_sq_first_order = (0..d)
        .filter(|&i| p[i] > 0.0)
        .map(|i| {
            let dq: f64 = jac[i].iter().zip(delta).map(|(g, h)| g * h).sum::<f64>() / (2.0 * p[i].sqrt());
            dq * dq
        })
        .sum();
    let kl = super::discrete_kl(&p_plus, &p)?;

    let ctx = BoundContext::new(None, b.to_vec());
    let mut reports = vec![
        BoundReport::exact("|dP_f|^2 <= db'F db", dp * dp, quad_form, ctx.clone()),
        BoundReport::exact("|dP_f|^2 <= D1^2 + (db'F db)^(3/2)", dp * dp, d1_sq + quad_form.powf(1.5), ctx),
    ];
    reports.extend(super::pinsker_failure_chain(&p_plus, &p, &set)?);
    Ok(SimplexOracle { delta_pf_sq: dp * dp, d1_sq, d1_sq_first_order, quad_form, kl, fim, reports, warnings })
}

/// All `2^d` subsets of `{0, …, d−1}`, the empty set first.
pub fn all_failure_sets(d: usize) -> Vec<Vec<usize>> {
    assert!(d < 24, "exhaustive enumeration is limited to small supports");
    (0u32..1 << d).map(|mask| (0..d).filter(|i| mask >> i & 1 == 1).collect()).collect()
}
