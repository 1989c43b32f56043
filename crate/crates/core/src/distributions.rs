//! Parametric input distributions.
//!
//! Inputs are independent Normal or Lognormal marginals, each carrying its own
//! `(μ, σ)` pair. Parameter vectors, scores and Fisher matrices always follow
//! the declared marginal order, `μ` before `σ`; for a Lognormal the pair
//! refers to the underlying Normal of `ln x`.

use std::collections::HashSet;
use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{FisherMatrix, SampleMatrix};
use crate::reduce::{chunk_ranges, chunked_sum, CHUNK};
use crate::rng::draw_rng;
use crate::{Error, Result};

/// Parameters per marginal: `(μ, σ)`.
pub const PARAMS_PER_MARGINAL: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Normal,
    Lognormal,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Lognormal => "lognormal",
        }
    }
}

/// One marginal distribution, validated at construction and on deserialisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMarginal")]
pub struct MarginalSpec {
    family: Family,
    mu: f64,
    sigma: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarginal {
    family: Family,
    mu: f64,
    sigma: f64,
}

impl TryFrom<RawMarginal> for MarginalSpec {
    type Error = Error;

    fn try_from(raw: RawMarginal) -> Result<Self> {
        Self::new(raw.family, raw.mu, raw.sigma)
    }
}

impl MarginalSpec {
    pub fn new(family: Family, mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::ParameterDomain(format!("{} location μ = {mu} is not finite", family.name())));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::ParameterDomain(format!("{} scale σ = {sigma} must be positive", family.name())));
        }
        Ok(Self { family, mu, sigma })
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(Family::Normal, mu, sigma)
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(Family::Lognormal, mu, sigma)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mean(&self) -> f64 {
        match self.family {
            Family::Normal => self.mu,
            Family::Lognormal => (self.mu + 0.5 * self.sigma * self.sigma).exp(),
        }
    }

    /// Maps a standard normal deviate onto this marginal.
    pub fn from_standard(&self, z: f64) -> f64 {
        let t = self.mu + self.sigma * z;
        match self.family {
            Family::Normal => t,
            Family::Lognormal => t.exp(),
        }
    }

    /// The Normal-scale coordinate of `x`: `x` itself, or `ln x` for a Lognormal.
    fn normal_coordinate(&self, x: f64) -> Result<f64> {
        match self.family {
            Family::Normal => Ok(x),
            Family::Lognormal if x > 0.0 => Ok(x.ln()),
            Family::Lognormal => Err(Error::Support { family: "lognormal", value: x }),
        }
    }

    pub fn log_density(&self, x: f64) -> Result<f64> {
        let t = self.normal_coordinate(x)?;
        let u = (t - self.mu) / self.sigma;
        let jacobian = match self.family {
            Family::Normal => 0.0,
            Family::Lognormal => -t,
        };
        Ok(jacobian - self.sigma.ln() - 0.5 * (2.0 * PI).ln() - 0.5 * u * u)
    }

    /// Score `(∂ ln p/∂μ, ∂ ln p/∂σ)` at `x`.
    pub fn score(&self, x: f64) -> Result<[f64; 2]> {
        let d = self.normal_coordinate(x)? - self.mu;
        let s2 = self.sigma * self.sigma;
        Ok([d / s2, (d * d - s2) / (s2 * self.sigma)])
    }

    /// `diag(1/σ², 2/σ²)` with respect to `(μ, σ)`.
    pub fn analytic_fim(&self) -> FisherMatrix {
        let s2 = self.sigma * self.sigma;
        FisherMatrix::diagonal(&[1.0 / s2, 2.0 / s2])
    }

    fn with_params(&self, mu: f64, sigma: f64) -> Result<Self> {
        Self::new(self.family, mu, sigma)
    }
}

/// Named distribution parameters `b`; names are unique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    entries: Vec<(String, f64)>,
}

impl ParamVector {
    pub fn new(entries: Vec<(String, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Contract("parameter vector needs at least one entry".into()));
        }
        let mut seen = HashSet::new();
        for (name, _) in &entries {
            if !seen.insert(name.as_str()) {
                return Err(Error::Contract(format!("duplicate parameter name `{name}`")));
            }
        }
        Ok(Self { entries })
    }

    /// Unnamed parameters, labelled `b0`, `b1`, ...
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().enumerate().map(|(i, v)| (format!("b{i}"), *v)).collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, v)| *v).collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedMarginal {
    pub name: String,
    pub spec: MarginalSpec,
}

/// Independent inputs; the joint density is the product of the marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputModel {
    marginals: Vec<NamedMarginal>,
}

impl InputModel {
    pub fn new<S: Into<String>>(marginals: Vec<(S, MarginalSpec)>) -> Result<Self> {
        let marginals: Vec<NamedMarginal> =
            marginals.into_iter().map(|(name, spec)| NamedMarginal { name: name.into(), spec }).collect();
        if marginals.is_empty() {
            return Err(Error::Contract("input model needs at least one marginal".into()));
        }
        let mut seen = HashSet::new();
        for m in &marginals {
            if !seen.insert(m.name.as_str()) {
                return Err(Error::Contract(format!("duplicate input name `{}`", m.name)));
            }
        }
        Ok(Self { marginals })
    }

    pub fn single(spec: MarginalSpec) -> Self {
        Self { marginals: vec![NamedMarginal { name: "x".into(), spec }] }
    }

    pub fn marginals(&self) -> &[NamedMarginal] {
        &self.marginals
    }

    pub fn input_dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn param_dim(&self) -> usize {
        PARAMS_PER_MARGINAL * self.marginals.len()
    }

    pub fn param_names(&self) -> Vec<String> {
        self.marginals.iter().flat_map(|m| [format!("{}.mu", m.name), format!("{}.sigma", m.name)]).collect()
    }

    pub fn params(&self) -> ParamVector {
        let values = self.marginals.iter().flat_map(|m| [m.spec.mu, m.spec.sigma]);
        ParamVector { entries: self.param_names().into_iter().zip(values).collect() }
    }

    /// σ of the marginal owning each parameter; the natural step scale for `Δb`.
    pub fn param_scales(&self) -> Vec<f64> {
        self.marginals.iter().flat_map(|m| [m.spec.sigma, m.spec.sigma]).collect()
    }

    /// The same families at parameters `b`.
    pub fn with_params(&self, b: &[f64]) -> Result<Self> {
        self.expect_param_len(b.len())?;
        let marginals = self
            .marginals
            .iter()
            .enumerate()
            .map(|(i, m)| Ok(NamedMarginal { name: m.name.clone(), spec: m.spec.with_params(b[2 * i], b[2 * i + 1])? }))
            .collect::<Result<_>>()?;
        Ok(Self { marginals })
    }

    /// The model at `b + Δb`.
    pub fn perturbed(&self, delta: &[f64]) -> Result<Self> {
        self.expect_param_len(delta.len())?;
        let b: Vec<f64> = self.params().values().iter().zip(delta).map(|(b, d)| b + d).collect();
        self.with_params(&b)
    }

    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        self.expect_input_len(x.len())?;
        self.marginals.iter().zip(x).map(|(m, &xi)| m.spec.log_density(xi)).sum()
    }

    /// Joint score: concatenation of the marginal scores.
    pub fn score_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.expect_input_len(x.len())?;
        self.expect_param_len(out.len())?;
        for (i, (m, &xi)) in self.marginals.iter().zip(x).enumerate() {
            let [a, b] = m.spec.score(xi)?;
            out[2 * i] = a;
            out[2 * i + 1] = b;
        }
        Ok(())
    }

    /// Block-diagonal input FIM `F_x`.
    pub fn analytic_fim(&self) -> FisherMatrix {
        let blocks: Vec<FisherMatrix> = self.marginals.iter().map(|m| m.spec.analytic_fim()).collect();
        FisherMatrix::block_diagonal(&blocks)
    }

    fn expect_input_len(&self, n: usize) -> Result<()> {
        if n == self.input_dim() {
            Ok(())
        } else {
            Err(Error::Contract(format!("expected {} inputs, got {n}", self.input_dim())))
        }
    }

    fn expect_param_len(&self, n: usize) -> Result<()> {
        if n == self.param_dim() {
            Ok(())
        } else {
            Err(Error::Contract(format!("expected {} parameters, got {n}", self.param_dim())))
        }
    }
}

/// Input draws with their joint scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSampleBatch {
    pub draws: SampleMatrix,
    pub scores: SampleMatrix,
    pub seed: u64,
}

impl ScoredSampleBatch {
    pub fn len(&self) -> usize {
        self.draws.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.rows() == 0
    }
}

/// Draws `n` input realizations with their scores.
///
/// Draw `i` is a function of `(model, seed, i)` only; see [`crate::rng`].
pub fn sample(model: &InputModel, n: usize, seed: u64) -> Result<ScoredSampleBatch> {
    if n == 0 {
        return Err(Error::Contract("sample size must be at least 1".into()));
    }
    let d = model.input_dim();
    let p = model.param_dim();
    let chunks: Vec<Result<(Vec<f64>, Vec<f64>)>> = chunk_ranges(n, CHUNK)
        .map(|range| {
            let mut draws = vec![0.0; range.len() * d];
            let mut scores = vec![0.0; range.len() * p];
            for (row, i) in range.enumerate() {
                let mut rng = draw_rng(seed, i as u64);
                let x = &mut draws[row * d..(row + 1) * d];
                for (xj, m) in x.iter_mut().zip(model.marginals()) {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *xj = m.spec.from_standard(z);
                }
                model.score_into(x, &mut scores[row * p..(row + 1) * p])?;
            }
            Ok((draws, scores))
        })
        .collect();
    let mut draws = Vec::with_capacity(n * d);
    let mut scores = Vec::with_capacity(n * p);
    for chunk in chunks {
        let (dr, sc) = chunk?;
        draws.extend_from_slice(&dr);
        scores.extend_from_slice(&sc);
    }
    Ok(ScoredSampleBatch {
        draws: SampleMatrix::from_vec(n, d, draws)?,
        scores: SampleMatrix::from_vec(n, p, scores)?,
        seed,
    })
}

/// Joint scores recomputed from the draws, with analytic and Monte-Carlo `F_x`.
#[derive(Debug, Clone)]
pub struct JointFisher {
    pub scores: SampleMatrix,
    pub analytic: FisherMatrix,
    /// `(1/N) Σ sᵢ sᵢᵀ`.
    pub monte_carlo: FisherMatrix,
}

pub fn joint_score_and_fim(model: &InputModel, batch: &ScoredSampleBatch) -> Result<JointFisher> {
    if batch.draws.cols() != model.input_dim() {
        return Err(Error::Contract(format!(
            "batch has {} inputs per draw, model has {}",
            batch.draws.cols(),
            model.input_dim()
        )));
    }
    if batch.is_empty() {
        return Err(Error::Contract("empty batch".into()));
    }
    let n = batch.len();
    let p = model.param_dim();
    let mut scores = SampleMatrix::zeros(n, p);
    scores.as_mut_slice().par_chunks_mut(p * CHUNK).enumerate().try_for_each(|(c, out)| -> Result<()> {
        for (row, s) in out.chunks_mut(p).enumerate() {
            model.score_into(batch.draws.row(c * CHUNK + row), s)?;
        }
        Ok(())
    })?;
    let sums = chunked_sum(n, p * p, |i, acc| {
        let s = scores.row(i);
        for j in 0..p {
            for k in 0..p {
                acc[j * p + k] += s[j] * s[k];
            }
        }
    });
    let monte_carlo = FisherMatrix::from_upper(p, |j, k| sums[j * p + k] / n as f64);
    Ok(JointFisher { scores, analytic: model.analytic_fim(), monte_carlo })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn normal(mu: f64, sigma: f64) -> MarginalSpec {
        MarginalSpec::normal(mu, sigma).unwrap()
    }

    #[test]
    fn rejects_nonpositive_scale() {
        assert!(matches!(MarginalSpec::normal(0.0, 0.0), Err(Error::ParameterDomain(_))));
        assert!(matches!(MarginalSpec::lognormal(0.0, -1.0), Err(Error::ParameterDomain(_))));
        assert!(MarginalSpec::normal(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn score_examples() {
        assert_eq!(normal(0.0, 1.0).score(1.0).unwrap(), [1.0, 0.0]);
        assert_eq!(normal(0.0, 1.0).score(0.0).unwrap(), [0.0, -1.0]);
        let ln = MarginalSpec::lognormal(0.0, 1.0).unwrap();
        let [a, b] = ln.score(std::f64::consts::E).unwrap();
        assert_relative_eq!(a, 1.0, epsilon = 1e-15);
        assert!(b.abs() < 1e-15);
        assert!(matches!(ln.score(0.0), Err(Error::Support { .. })));
        assert!(ln.score(-2.0).is_err());
    }

    #[test]
    fn analytic_fim_examples() {
        let f = normal(1.0, 0.2).analytic_fim();
        assert_relative_eq!(f.get(0, 0), 25.0, max_relative = 1e-12);
        assert_relative_eq!(f.get(1, 1), 50.0, max_relative = 1e-12);
        assert_relative_eq!(f.trace(), 75.0, max_relative = 1e-12);
        assert_eq!(normal(0.0, 1.0).analytic_fim().to_rows(), vec![vec![1.0, 0.0], vec![0.0, 2.0]]);
        let ln = MarginalSpec::lognormal(7.88, 0.2).unwrap().analytic_fim();
        assert_relative_eq!(ln.trace(), 75.0, max_relative = 1e-12);
    }

    #[test]
    fn score_matches_finite_differences_of_log_density() {
        for spec in [normal(1.0, 0.2), normal(-3.0, 2.5), MarginalSpec::lognormal(24.85, 0.47).unwrap()] {
            for z in [-1.7, -0.3, 0.0, 0.8, 2.2] {
                let x = spec.from_standard(z);
                let s = spec.score(x).unwrap();
                let hm = 1e-6 * spec.mu().abs().max(1.0);
                let hs = 1e-6 * spec.sigma().max(1.0);
                let lp = |mu: f64, sigma: f64| spec.with_params(mu, sigma).unwrap().log_density(x).unwrap();
                let dmu = (lp(spec.mu() + hm, spec.sigma()) - lp(spec.mu() - hm, spec.sigma())) / (2.0 * hm);
                let dsig = (lp(spec.mu(), spec.sigma() + hs) - lp(spec.mu(), spec.sigma() - hs)) / (2.0 * hs);
                for (fd, an) in [(dmu, s[0]), (dsig, s[1])] {
                    let err = (fd - an).abs() / an.abs().max(1.0);
                    assert!(err < 1e-6, "score {an} vs fd {fd} at z={z}");
                }
            }
        }
    }

    #[test]
    fn lognormal_score_is_normal_score_of_log() {
        let ln = MarginalSpec::lognormal(0.3, 0.7).unwrap();
        let n = normal(0.3, 0.7);
        for x in [0.1, 1.0, 2.5, 40.0] {
            assert_eq!(ln.score(x).unwrap(), n.score(x.ln()).unwrap());
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let model = InputModel::single(normal(0.0, 1.0));
        let a = sample(&model, 4, 7).unwrap();
        let b = sample(&model, 4, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.draws, sample(&model, 4, 8).unwrap().draws);
        assert!(sample(&model, 0, 7).is_err());
    }

    #[test]
    fn sample_mean_within_five_standard_errors() {
        let model = InputModel::single(normal(1.0, 0.2));
        let batch = sample(&model, 100_000, 1).unwrap();
        let mean = batch.draws.column(0).sum::<f64>() / 1e5;
        assert!((mean - 1.0).abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn lognormal_draws_positive() {
        let model = InputModel::single(MarginalSpec::lognormal(24.85, 0.47).unwrap());
        let batch = sample(&model, 100_000, 3).unwrap();
        assert!(batch.draws.column(0).all(|x| x > 0.0));
    }

    #[test]
    fn scores_have_zero_mean() {
        let model =
            InputModel::new(vec![("a", normal(1.0, 0.1)), ("b", MarginalSpec::lognormal(7.88, 0.2).unwrap())]).unwrap();
        let batch = sample(&model, 50_000, 11).unwrap();
        let n = batch.len() as f64;
        for j in 0..model.param_dim() {
            let col: Vec<f64> = batch.scores.column(j).collect();
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
            assert!(mean.abs() <= 5.0 * (var / n).sqrt(), "score {j} mean {mean}");
        }
    }

    #[test]
    fn joint_fim_of_oscillator_inputs() {
        let model = InputModel::new(vec![("beta", normal(1.0, 0.1)), ("zeta", normal(0.1, 0.01))]).unwrap();
        let f = model.analytic_fim();
        assert_relative_eq!(f.trace(), 30_300.0, max_relative = 1e-12);
        let single = InputModel::single(normal(2.0, 0.5));
        assert_eq!(single.analytic_fim(), normal(2.0, 0.5).analytic_fim());
    }

    #[test]
    fn joint_fim_dimension_mismatch() {
        let one = InputModel::single(normal(0.0, 1.0));
        let two = InputModel::new(vec![("a", normal(0.0, 1.0)), ("b", normal(0.0, 1.0))]).unwrap();
        let batch = sample(&one, 10, 1).unwrap();
        assert!(matches!(joint_score_and_fim(&two, &batch), Err(Error::Contract(_))));
    }

    #[test]
    fn perturbation_and_param_names() {
        let model = InputModel::new(vec![("e", MarginalSpec::lognormal(24.85, 0.47).unwrap())]).unwrap();
        assert_eq!(model.param_names(), vec!["e.mu", "e.sigma"]);
        let p = model.perturbed(&[0.1, 0.03]).unwrap();
        assert_relative_eq!(p.params().values()[0], 24.95, max_relative = 1e-14);
        assert!(model.perturbed(&[0.0, -1.0]).is_err());
        assert!(model.perturbed(&[0.0]).is_err());
        assert!(InputModel::new(vec![("a", normal(0.0, 1.0)), ("a", normal(0.0, 1.0))]).is_err());
        assert!(ParamVector::new(vec![("a".into(), 1.0), ("a".into(), 2.0)]).is_err());
    }
}
