//! Finite-difference oracles for the MC-LR gradient.
//!
//! [`reweighted_gradient`] differentiates the probability estimate itself:
//! `P_f(b ± h·eⱼ)` is evaluated on the same draws through likelihood ratios
//! computed from log-densities, never from the score functions, so it checks
//! the score-weighted estimator to `O(h²)` without adding sampling noise.
//!
//! [`pathwise_gradient`] re-simulates at `b ± h·eⱼ` with the same seed
//! (common random numbers) and counts threshold crossings. It is independent
//! of the likelihood-ratio identity altogether but carries Monte-Carlo noise of
//! order `1/√(N·h)`.

use super::estimate::{evaluate_outputs, performance_values, pf_from_values};
use super::{Direction, ForwardMap, Performance};
use crate::distributions::{sample, InputModel, ScoredSampleBatch};
use crate::reduce::chunked_sum;
use crate::{Error, Result};

/// Central differences of the likelihood-ratio-weighted probability estimate.
///
/// `steps[j]` is the step `h` for parameter `j`; `values` are the performance
/// values of `batch`. Returns one gradient vector per threshold in `thresholds`.
pub fn reweighted_gradient(
    model: &InputModel,
    batch: &ScoredSampleBatch,
    values: &[f64],
    thresholds: &[f64],
    direction: Direction,
    steps: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let p = model.param_dim();
    if steps.len() != p {
        return Err(Error::Contract(format!("{} steps for {p} parameters", steps.len())));
    }
    if values.len() != batch.len() {
        return Err(Error::Contract(format!("{} values for {} draws", values.len(), batch.len())));
    }
    let n = batch.len();
    let base_log: Vec<f64> = (0..n).map(|i| model.log_density(batch.draws.row(i))).collect::<Result<_>>()?;
    let mut out = vec![vec![0.0; p]; thresholds.len()];
    for j in 0..p {
        let mut sides = [Vec::new(), Vec::new()];
        for (side, sign) in sides.iter_mut().zip([1.0, -1.0]) {
            let mut delta = vec![0.0; p];
            delta[j] = sign * steps[j];
            let shifted = model.perturbed(&delta)?;
            *side = (0..n)
                .map(|i| Ok((shifted.log_density(batch.draws.row(i))? - base_log[i]).exp()))
                .collect::<Result<Vec<f64>>>()?;
        }
        for (t, &z) in thresholds.iter().enumerate() {
            let sums = chunked_sum(n, 2, |i, acc| {
                if direction.fails(values[i], z) {
                    acc[0] += sides[0][i];
                    acc[1] += sides[1][i];
                }
            });
            out[t][j] = (sums[0] - sums[1]) / (n as f64 * 2.0 * steps[j]);
        }
    }
    Ok(out)
}

/// Central differences of `P_f` re-simulated at `b ± h·eⱼ` with the same seed.
#[allow(clippy::too_many_arguments)]
pub fn pathwise_gradient(
    h: &dyn ForwardMap,
    g: &dyn Performance,
    model: &InputModel,
    n: usize,
    seed: u64,
    thresholds: &[f64],
    direction: Direction,
    steps: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let p = model.param_dim();
    if steps.len() != p {
        return Err(Error::Contract(format!("{} steps for {p} parameters", steps.len())));
    }
    let mut out = vec![vec![0.0; p]; thresholds.len()];
    for j in 0..p {
        let mut pf = [Vec::new(), Vec::new()];
        for (side, sign) in pf.iter_mut().zip([1.0, -1.0]) {
            let mut delta = vec![0.0; p];
            delta[j] = sign * steps[j];
            let batch = sample(&model.perturbed(&delta)?, n, seed)?;
            let values = performance_values(g, &evaluate_outputs(h, &batch)?);
            *side = thresholds.iter().map(|&z| pf_from_values(&values, z, direction).p_f).collect();
        }
        for t in 0..thresholds.len() {
            out[t][j] = (pf[0][t] - pf[1][t]) / (2.0 * steps[j]);
        }
    }
    Ok(out)
}
