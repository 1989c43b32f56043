//! Run configuration: TOML on disk, with complete per-case defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use infobound::distributions::{Family, InputModel, MarginalSpec};
use infobound::mclr::GridSpec;
use infobound::models::BeamConfig;
use infobound::Direction;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseKind {
    Identity,
    Sho,
    Beam,
    DiscreteOracle,
}

impl CaseKind {
    pub const ALL: [CaseKind; 4] = [CaseKind::Identity, CaseKind::Sho, CaseKind::Beam, CaseKind::DiscreteOracle];

    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Identity => "identity",
            CaseKind::Sho => "sho",
            CaseKind::Beam => "beam",
            CaseKind::DiscreteOracle => "discrete-oracle",
        }
    }

    pub fn parse(name: &str) -> Result<Self, CliError> {
        Self::ALL.into_iter().find(|c| c.name() == name).ok_or_else(|| {
            CliError::Usage(format!("unknown case `{name}`; expected identity, sho, beam or discrete-oracle"))
        })
    }

    fn input_count(self) -> usize {
        match self {
            CaseKind::Identity => 1,
            CaseKind::Sho | CaseKind::Beam => 2,
            CaseKind::DiscreteOracle => 0,
        }
    }
}

/// One named input marginal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub name: String,
    pub family: Family,
    pub mu: f64,
    pub sigma: f64,
}

impl InputSpec {
    pub fn marginal(&self) -> Result<MarginalSpec, CliError> {
        MarginalSpec::new(self.family, self.mu, self.sigma)
            .map_err(|e| CliError::Config(format!("input `{}`: {e}", self.name)))
    }
}

/// Exhaustive binomial failure-set enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscreteConfig {
    pub trials: usize,
    pub thetas: Vec<f64>,
    pub delta: f64,
}

impl Default for DiscreteConfig {
    fn default() -> Self {
        Self { trials: 5, thetas: vec![0.2, 0.5, 0.8], delta: 1e-3 }
    }
}

/// Everything a run depends on. Serialised in full into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: CaseKind,
    pub n_samples: usize,
    pub seed: u64,
    /// Threshold percentiles in (0, 100).
    pub percentiles: Vec<f64>,
    /// Which side of the threshold fails.
    pub direction: Direction,
    pub inputs: Vec<InputSpec>,
    /// Explicit `Δb` vectors; empty selects the standard set scaled by `perturbation_scale`.
    pub perturbations: Vec<Vec<f64>>,
    /// `|Δbⱼ| = perturbation_scale · σⱼ` for the standard perturbation set.
    pub perturbation_scale: f64,
    /// Halvings of the perturbation in the KL consistency sweep.
    pub kl_halvings: usize,
    /// Finite-difference step as a fraction of each parameter's σ.
    pub fd_step: f64,
    pub kde: GridSpec,
    pub beam: BeamConfig,
    pub discrete: DiscreteConfig,
    pub out: PathBuf,
}

/// On-disk form: every field optional except `case`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    case: CaseKind,
    n_samples: Option<usize>,
    seed: Option<u64>,
    percentiles: Option<Vec<f64>>,
    direction: Option<Direction>,
    inputs: Option<Vec<InputSpec>>,
    perturbations: Option<Vec<Vec<f64>>>,
    perturbation_scale: Option<f64>,
    kl_halvings: Option<usize>,
    fd_step: Option<f64>,
    kde: Option<GridSpec>,
    beam: Option<BeamConfig>,
    discrete: Option<DiscreteConfig>,
    out: Option<PathBuf>,
}

fn input(name: &str, family: Family, mu: f64, sigma: f64) -> InputSpec {
    InputSpec { name: name.into(), family, mu, sigma }
}

impl RunConfig {
    /// Shipped defaults for `case`.
    pub fn defaults(case: CaseKind) -> Self {
        let (n_samples, direction, inputs) = match case {
            CaseKind::Identity => (100_000, Direction::AtMost, vec![input("x", Family::Normal, 1.0, 0.2)]),
            CaseKind::Sho => (
                100_000,
                Direction::AtMost,
                vec![input("beta", Family::Normal, 1.0, 0.1), input("zeta", Family::Normal, 0.1, 0.01)],
            ),
            CaseKind::Beam => (
                20_000,
                Direction::Exceed,
                vec![input("E", Family::Lognormal, 24.85, 0.47), input("rho", Family::Lognormal, 7.88, 0.2)],
            ),
            CaseKind::DiscreteOracle => (0, Direction::Exceed, Vec::new()),
        };
        Self {
            case,
            n_samples,
            seed: 1,
            percentiles: if case == CaseKind::DiscreteOracle { Vec::new() } else { (1..=99).map(f64::from).collect() },
            direction,
            inputs,
            perturbations: Vec::new(),
            perturbation_scale: 1e-2,
            kl_halvings: 4,
            fd_step: 1e-3,
            kde: GridSpec::default(),
            beam: BeamConfig::default(),
            discrete: DiscreteConfig::default(),
            out: PathBuf::from("out").join(case.name()),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let d = Self::defaults(raw.case);
        let cfg = Self {
            case: raw.case,
            n_samples: raw.n_samples.unwrap_or(d.n_samples),
            seed: raw.seed.unwrap_or(d.seed),
            percentiles: raw.percentiles.unwrap_or(d.percentiles),
            direction: raw.direction.unwrap_or(d.direction),
            inputs: raw.inputs.unwrap_or(d.inputs),
            perturbations: raw.perturbations.unwrap_or(d.perturbations),
            perturbation_scale: raw.perturbation_scale.unwrap_or(d.perturbation_scale),
            kl_halvings: raw.kl_halvings.unwrap_or(d.kl_halvings),
            fd_step: raw.fd_step.unwrap_or(d.fd_step),
            kde: raw.kde.unwrap_or(d.kde),
            beam: raw.beam.unwrap_or(d.beam),
            discrete: raw.discrete.unwrap_or(d.discrete),
            out: raw.out.unwrap_or(d.out),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable as TOML")
    }

    pub fn input_model(&self) -> Result<InputModel, CliError> {
        let marginals =
            self.inputs.iter().map(|i| Ok((i.name.clone(), i.marginal()?))).collect::<Result<Vec<_>, CliError>>()?;
        InputModel::new(marginals).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Checks everything that can be checked without running the case.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.case == CaseKind::DiscreteOracle {
            let d = &self.discrete;
            if d.trials == 0 || d.trials > 16 {
                return bad(format!("discrete.trials must be in 1..=16, got {}", d.trials));
            }
            if d.thetas.is_empty() || d.thetas.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
                return bad("discrete.thetas must be non-empty and inside (0, 1)".into());
            }
            if d.thetas.iter().any(|t| !(t + d.delta > 0.0 && t + d.delta < 1.0))
                || d.delta == 0.0
                || !d.delta.is_finite()
            {
                return bad(format!("discrete.delta = {} must be non-zero and keep θ + Δθ inside (0, 1)", d.delta));
            }
            return Ok(());
        }
        if self.n_samples < 1000 {
            return bad(format!("n_samples must be at least 1000, got {}", self.n_samples));
        }
        if self.percentiles.is_empty() || self.percentiles.iter().any(|p| !(*p > 0.0 && *p < 100.0)) {
            return bad("percentiles must be non-empty and inside (0, 100)".into());
        }
        if self.inputs.len() != self.case.input_count() {
            return bad(format!(
                "case {} takes {} inputs, got {}",
                self.case.name(),
                self.case.input_count(),
                self.inputs.len()
            ));
        }
        let model = self.input_model()?;
        if self.case == CaseKind::Beam && self.inputs.iter().any(|i| i.family != Family::Lognormal) {
            return bad("beam inputs must be lognormal so that E and ρ stay positive".into());
        }
        if let Some(d) =
            self.perturbations.iter().find(|d| d.len() != model.param_dim() || d.iter().any(|v| !v.is_finite()))
        {
            return bad(format!("perturbation {d:?} must have {} finite entries", model.param_dim()));
        }
        if !(self.perturbation_scale > 0.0 && self.perturbation_scale.is_finite()) {
            return bad(format!("perturbation_scale must be positive, got {}", self.perturbation_scale));
        }
        if !(self.fd_step > 0.0 && self.fd_step < 1.0) {
            return bad(format!("fd_step must be in (0, 1), got {}", self.fd_step));
        }
        if self.kl_halvings > 10 {
            return bad(format!("kl_halvings must be at most 10, got {}", self.kl_halvings));
        }
        let k = if self.case == CaseKind::Beam { 2 } else { 1 };
        if let Some(h) = &self.kde.bandwidth {
            if h.len() != k || h.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return bad(format!("kde.bandwidth needs {k} positive entries, got {h:?}"));
            }
        }
        if let Some(p) = self.kde.points {
            if !(16..=4096).contains(&p) {
                return bad(format!("kde.points must be in 16..=4096, got {p}"));
            }
        }
        if self.case == CaseKind::Beam {
            self.beam.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }
}
