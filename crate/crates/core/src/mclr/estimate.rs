use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Direction, FailureSpec, ForwardMap, Performance, SensitivityResult};
use crate::distributions::ScoredSampleBatch;
use crate::linalg::SampleMatrix;
use crate::reduce::{chunked_sum, CHUNK};
use crate::{Error, Result};

/// Applies `h` to every draw. A failing draw is reported with its index; when
/// several fail, the lowest index wins.
pub fn evaluate_outputs(h: &dyn ForwardMap, batch: &ScoredSampleBatch) -> Result<SampleMatrix> {
    if batch.draws.cols() != h.input_dim() {
        return Err(Error::Contract(format!(
            "forward map takes {} inputs, batch has {}",
            h.input_dim(),
            batch.draws.cols()
        )));
    }
    let k = h.output_dim();
    let n = batch.len();
    let mut out = SampleMatrix::zeros(n, k);
    let status: Vec<Result<()>> = out
        .as_mut_slice()
        .par_chunks_mut(k * CHUNK)
        .enumerate()
        .map(|(c, rows)| {
            for (r, y) in rows.chunks_mut(k).enumerate() {
                let index = c * CHUNK + r;
                h.eval(batch.draws.row(index), y).map_err(|e| match e {
                    Error::ForwardMap { .. } => e,
                    other => Error::ForwardMap { index, message: other.to_string() },
                })?;
            }
            Ok(())
        })
        .collect();
    status.into_iter().collect::<Result<()>>()?;
    Ok(out)
}

pub fn performance_values(g: &dyn Performance, outputs: &SampleMatrix) -> Vec<f64> {
    let mut values = vec![0.0; outputs.rows()];
    values.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        for (r, v) in chunk.iter_mut().enumerate() {
            *v = g.value(outputs.row(c * CHUNK + r));
        }
    });
    values
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfEstimate {
    pub p_f: f64,
    /// `√(p_f(1 − p_f)/N)`.
    pub std_err: f64,
}

pub fn estimate_pf(h: &dyn ForwardMap, spec: &FailureSpec<'_>, batch: &ScoredSampleBatch) -> Result<PfEstimate> {
    if batch.is_empty() {
        return Err(Error::Contract("empty batch".into()));
    }
    let outputs = evaluate_outputs(h, batch)?;
    let values = performance_values(spec.g, &outputs);
    Ok(pf_from_values(&values, spec.z, spec.direction))
}

/// Failure fraction of precomputed performance values.
pub fn pf_from_values(values: &[f64], z: f64, direction: Direction) -> PfEstimate {
    let n = values.len() as f64;
    let count = chunked_sum(values.len(), 1, |i, acc| {
        if direction.fails(values[i], z) {
            acc[0] += 1.0;
        }
    })[0];
    let p_f = count / n;
    PfEstimate { p_f, std_err: (p_f * (1.0 - p_f) / n).sqrt() }
}

pub fn estimate_gradient(
    h: &dyn ForwardMap,
    spec: &FailureSpec<'_>,
    batch: &ScoredSampleBatch,
) -> Result<SensitivityResult> {
    if batch.is_empty() {
        return Err(Error::Contract("empty batch".into()));
    }
    let outputs = evaluate_outputs(h, batch)?;
    let values = performance_values(spec.g, &outputs);
    sensitivity_from_values(&values, &batch.scores, spec.z, spec.direction)
}

/// MC-LR probability and gradient from precomputed performance values.
pub fn sensitivity_from_values(
    values: &[f64],
    scores: &SampleMatrix,
    z: f64,
    direction: Direction,
) -> Result<SensitivityResult> {
    let n = values.len();
    if n == 0 {
        return Err(Error::Contract("empty batch".into()));
    }
    if scores.rows() != n {
        return Err(Error::Contract(format!("{} scores for {n} performance values", scores.rows())));
    }
    let p = scores.cols();
    // [count, Σ 1·s, Σ (1·s)²]
    let sums = chunked_sum(n, 1 + 2 * p, |i, acc| {
        if direction.fails(values[i], z) {
            acc[0] += 1.0;
            for (j, s) in scores.row(i).iter().enumerate() {
                acc[1 + j] += s;
                acc[1 + p + j] += s * s;
            }
        }
    });
    let nf = n as f64;
    let p_f = sums[0] / nf;
    let gradient: Vec<f64> = sums[1..=p].iter().map(|s| s / nf).collect();
    let grad_std_err = (0..p)
        .map(|j| {
            if n < 2 {
                return 0.0;
            }
            let var = (sums[1 + p + j] - nf * gradient[j] * gradient[j]) / (nf - 1.0);
            (var.max(0.0) / nf).sqrt()
        })
        .collect();
    Ok(SensitivityResult {
        z,
        percentile: None,
        p_f,
        grad_norm_sq: gradient.iter().map(|g| g * g).sum(),
        gradient,
        grad_std_err,
        n_samples: n,
        std_err_pf: (p_f * (1.0 - p_f) / nf).sqrt(),
    })
}

/// Linear-interpolation percentile of sorted data (the same rule as NumPy's default).
pub fn empirical_percentile(sorted: &[f64], percentile: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = percentile / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCurve {
    pub results: Vec<SensitivityResult>,
    /// All outputs were equal; every threshold sees a step function.
    pub degenerate: bool,
}

pub fn sensitivity_curve(
    h: &dyn ForwardMap,
    g: &dyn Performance,
    percentiles: &[f64],
    direction: Direction,
    batch: &ScoredSampleBatch,
) -> Result<SensitivityCurve> {
    if batch.is_empty() {
        return Err(Error::Contract("empty batch".into()));
    }
    let outputs = evaluate_outputs(h, batch)?;
    let values = performance_values(g, &outputs);
    sensitivity_curve_from_values(&values, &batch.scores, percentiles, direction)
}

/// Thresholds at empirical percentiles of `values`, one result per percentile.
pub fn sensitivity_curve_from_values(
    values: &[f64],
    scores: &SampleMatrix,
    percentiles: &[f64],
    direction: Direction,
) -> Result<SensitivityCurve> {
    if values.is_empty() {
        return Err(Error::Contract("empty batch".into()));
    }
    if let Some(bad) = percentiles.iter().find(|p| !(**p > 0.0 && **p < 100.0)) {
        return Err(Error::Contract(format!("percentile {bad} is outside (0, 100)")));
    }
    let mut sorted = values.to_vec();
    sorted.par_sort_unstable_by(f64::total_cmp);
    let degenerate = sorted.first() == sorted.last();
    let results = percentiles
        .iter()
        .map(|&pct| {
            let z = empirical_percentile(&sorted, pct);
            let mut r = sensitivity_from_values(values, scores, z, direction)?;
            r.percentile = Some(pct);
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SensitivityCurve { results, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample, InputModel, MarginalSpec};
    use crate::mclr::FirstComponent;
    use crate::models::identity::IdentityMap;

    fn identity_batch(n: usize, seed: u64) -> ScoredSampleBatch {
        sample(&InputModel::single(MarginalSpec::normal(1.0, 0.2).unwrap()), n, seed).unwrap()
    }

    #[test]
    fn threshold_below_all_samples() {
        let batch = identity_batch(20_000, 5);
        let spec = FailureSpec::new(&FirstComponent, -10.0, Direction::Exceed);
        let pf = estimate_pf(&IdentityMap, &spec, &batch).unwrap();
        assert_eq!(pf.p_f, 1.0);
        assert_eq!(pf.std_err, 0.0);
        let r = estimate_gradient(&IdentityMap, &spec, &batch).unwrap();
        for (g, se) in r.gradient.iter().zip(&r.grad_std_err) {
            assert!(g.abs() <= 5.0 * se, "mean score {g} beyond 5 s.e. {se}");
        }
    }

    #[test]
    fn pf_at_mean_is_half() {
        let batch = identity_batch(100_000, 1);
        let spec = FailureSpec::new(&FirstComponent, 1.0, Direction::Exceed);
        let pf = estimate_pf(&IdentityMap, &spec, &batch).unwrap();
        assert!((pf.p_f - 0.5).abs() <= 3.0 * pf.std_err, "{pf:?}");
    }

    #[test]
    fn median_threshold() {
        let batch = identity_batch(10_001, 2);
        let curve = sensitivity_curve(&IdentityMap, &FirstComponent, &[50.0], Direction::Exceed, &batch).unwrap();
        let r = &curve.results[0];
        assert!((r.p_f - 0.5).abs() <= 1.0 / 10_001.0);
        assert_eq!(r.percentile, Some(50.0));
        assert!(!curve.degenerate);
    }

    #[test]
    fn cdf_gradient_at_mean() {
        let batch = identity_batch(100_000, 1);
        let spec = FailureSpec::new(&FirstComponent, 1.0, Direction::AtMost);
        let r = estimate_gradient(&IdentityMap, &spec, &batch).unwrap();
        let expected = -1.0 / ((2.0 * std::f64::consts::PI).sqrt() * 0.2);
        assert!((r.gradient[0] - expected).abs() / expected.abs() < 0.02, "{:?}", r.gradient);
        assert!((r.grad_norm_sq - r.gradient.iter().map(|g| g * g).sum::<f64>()).abs() < 1e-15);
    }

    #[test]
    fn monotone_pf_over_sweep() {
        let batch = identity_batch(5_000, 3);
        let pct: Vec<f64> = (1..100).map(f64::from).collect();
        let curve = sensitivity_curve(&IdentityMap, &FirstComponent, &pct, Direction::Exceed, &batch).unwrap();
        for w in curve.results.windows(2) {
            assert!(w[1].p_f <= w[0].p_f);
            assert!(w[1].z >= w[0].z);
        }
    }

    #[test]
    fn degenerate_outputs_are_flagged() {
        let values = vec![3.0; 50];
        let scores = SampleMatrix::zeros(50, 2);
        let curve = sensitivity_curve_from_values(&values, &scores, &[10.0, 90.0], Direction::Exceed).unwrap();
        assert!(curve.degenerate);
        assert!(curve.results.iter().all(|r| r.p_f == 0.0));
    }

    #[test]
    fn rejects_bad_percentiles_and_shapes() {
        let values = vec![1.0, 2.0];
        let scores = SampleMatrix::zeros(2, 2);
        assert!(sensitivity_curve_from_values(&values, &scores, &[0.0], Direction::Exceed).is_err());
        assert!(sensitivity_curve_from_values(&values, &scores, &[100.0], Direction::Exceed).is_err());
        assert!(sensitivity_from_values(&values, &SampleMatrix::zeros(3, 2), 0.0, Direction::Exceed).is_err());
    }

    struct FailsOnNegative;

    impl ForwardMap for FailsOnNegative {
        fn input_dim(&self) -> usize {
            1
        }
        fn output_dim(&self) -> usize {
            1
        }
        fn eval(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
            if x[0] < 0.0 {
                return Err(Error::Numeric("negative input".into()));
            }
            y[0] = x[0];
            Ok(())
        }
    }

    #[test]
    fn forward_failure_reports_first_draw_index() {
        let batch = sample(&InputModel::single(MarginalSpec::normal(0.0, 1.0).unwrap()), 10_000, 4).unwrap();
        let first = batch.draws.column(0).position(|x| x < 0.0).unwrap();
        match evaluate_outputs(&FailsOnNegative, &batch) {
            Err(Error::ForwardMap { index, .. }) => assert_eq!(index, first),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn percentile_interpolation() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(empirical_percentile(&s, 50.0), 2.5);
        assert_eq!(empirical_percentile(&s, 100.0 / 3.0), 2.0);
    }
}
