//! Thin cantilever beam under band-limited white-noise point excitation.
//!
//! Responses come from a modal summation over the first few bending modes.
//! For white noise the mean-square response at position `ξ` is a quadratic
//! form in the modal coefficients,
//!
//! ```text
//! rms²(ξ) = Σᵣₛ cᵣ(ξ) cₛ(ξ) Mᵣₛ,   Mᵣₛ = Σ_ω w_ω 2S₀ Re(Dᵣ conj Dₛ) (·ω⁴ for acceleration)
//! Dᵣ(ω)   = 1/(ωᵣ² − ω² + 2iζωᵣω)
//! ```
//!
//! with `cᵣ = φᵣ(ξ)φᵣ(ξ_ex)` for acceleration and `φᵣ''(ξ)φᵣ(ξ_ex)` for strain,
//! so one pass over the frequency grid serves every response position.

use serde::{Deserialize, Serialize};

use crate::distributions::MarginalSpec;
use crate::linalg::SampleMatrix;
use crate::mclr::{ForwardMap, Performance};
use crate::{Error, Result};

pub const MAX_ROOTS: usize = 10;
const NEWTON_ITERATIONS: usize = 100;
const ROOT_TOLERANCE: f64 = 1e-12;

/// Geometry, damping, loading and quadrature settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamConfig {
    /// Length `L` (m).
    pub length: f64,
    /// Rectangular section width `b` (m).
    pub section_width: f64,
    /// Rectangular section thickness `h` (m).
    pub section_thickness: f64,
    /// Modal damping ratio, the same for all modes.
    pub damping: f64,
    /// Excitation position as a fraction of `L`.
    pub excitation: f64,
    /// Force spectral density `S₀`.
    pub force_psd: f64,
    pub n_modes: usize,
    /// Number of uniformly spaced response positions on `[0, L]`.
    pub positions: usize,
    /// Number of uniformly spaced frequency points.
    pub frequencies: usize,
    /// Explicit frequency band `[ω_lo, ω_hi]` (rad/s); derived from the inputs when absent.
    pub band: Option<[f64; 2]>,
    /// Input quantile, in standard deviations, whose highest mode must stay in band.
    pub band_sigmas: f64,
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self {
            length: 1.0,
            section_width: 0.02,
            section_thickness: 0.002,
            damping: 0.1,
            excitation: 0.5,
            force_psd: 1.0,
            n_modes: 3,
            positions: 101,
            frequencies: 4000,
            band: None,
            band_sigmas: 4.0,
        }
    }
}

impl BeamConfig {
    /// `I = bh³/12`.
    pub fn second_moment(&self) -> f64 {
        self.section_width * self.section_thickness.powi(3) / 12.0
    }

    /// `A = bh`.
    pub fn area(&self) -> f64 {
        self.section_width * self.section_thickness
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("length", self.length),
            ("section_width", self.section_width),
            ("section_thickness", self.section_thickness),
            ("damping", self.damping),
            ("force_psd", self.force_psd),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("beam {name} must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.excitation) {
            return Err(Error::Config(format!("beam excitation {} is not a fraction of the length", self.excitation)));
        }
        if !(1..=3).contains(&self.n_modes) {
            return Err(Error::Config(format!("beam model supports 1 to 3 modes, got {}", self.n_modes)));
        }
        if self.positions < 2 || self.frequencies < 2 {
            return Err(Error::Config("beam position and frequency grids need at least 2 points".into()));
        }
        if let Some([lo, hi]) = self.band {
            if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
                return Err(Error::Config(format!("invalid frequency band [{lo}, {hi}]")));
            }
        }
        if !(self.band_sigmas >= 0.0 && self.band_sigmas.is_finite()) {
            return Err(Error::Config(format!("band_sigmas must be non-negative, got {}", self.band_sigmas)));
        }
        Ok(())
    }
}

/// First `n` roots `βᵣL` of `cos(βL)cosh(βL) = −1`.
///
/// Newton iterations from `(r − ½)π` run on the equivalent `cos x + sech x = 0`;
/// the raw form has a slope of order `cosh x` and cannot resolve the higher
/// roots to a small absolute residual in double precision. The reported
/// residual is `|cos x cosh x + 1| / cosh x`.
pub fn beam_roots(n: usize) -> Result<Vec<f64>> {
    if n > MAX_ROOTS {
        return Err(Error::Contract(format!("at most {MAX_ROOTS} roots, asked for {n}")));
    }
    (1..=n)
        .map(|r| {
            let mut x = (r as f64 - 0.5) * std::f64::consts::PI;
            for _ in 0..NEWTON_ITERATIONS {
                let sech = 1.0 / x.cosh();
                let f = x.cos() + sech;
                let df = -x.sin() - sech * x.tanh();
                let step = f / df;
                x -= step;
                if step.abs() <= 4.0 * f64::EPSILON * x && root_residual(x) < ROOT_TOLERANCE {
                    return Ok(x);
                }
            }
            if root_residual(x) < ROOT_TOLERANCE {
                Ok(x)
            } else {
                Err(Error::Numeric(format!("Newton iteration for root {r} did not converge")))
            }
        })
        .collect()
}

/// `|cos x cosh x + 1| / cosh x`.
pub fn root_residual(x: f64) -> f64 {
    (x.cos() + 1.0 / x.cosh()).abs()
}

/// Mode shape and its derivatives with respect to the normalised coordinate `s = ξ/L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeValue {
    pub phi: f64,
    pub slope: f64,
    pub curvature: f64,
}

/// Clamped-free mode shape with unit normalisation constant at `s = ξ/L ∈ [0, 1]`.
pub fn mode_shape(beta_l: f64, s: f64) -> Result<ModeValue> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Contract(format!("mode position {s} is outside [0, 1]")));
    }
    let ratio = (beta_l.cos() + beta_l.cosh()) / (beta_l.sin() - beta_l.sinh());
    let t = beta_l * s;
    let (sn, cs, sh, ch) = (t.sin(), t.cos(), t.sinh(), t.cosh());
    Ok(ModeValue {
        phi: (sn - sh) + ratio * (cs - ch),
        slope: beta_l * ((cs - ch) - ratio * (sn + sh)),
        curvature: -beta_l * beta_l * ((sn + sh) + ratio * (cs + ch)),
    })
}

/// Response quantity of the beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Response {
    Displacement,
    Acceleration,
    Strain,
}

/// Root-mean-square responses at every position on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RmsProfile {
    pub acceleration: Vec<f64>,
    pub strain: Vec<f64>,
}

impl RmsProfile {
    pub fn peaks(&self) -> (f64, f64) {
        let max = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(*x));
        (max(&self.acceleration), max(&self.strain))
    }
}

/// Modal model on fixed position and frequency grids.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamModel {
    cfg: BeamConfig,
    roots: Vec<f64>,
    omega: Vec<f64>,
    /// Trapezoid weight times `2S₀`.
    weights: Vec<f64>,
    positions: Vec<f64>,
    excitation_phi: Vec<f64>,
    /// `φᵣ(ξ)` per position and mode.
    phi: Vec<Vec<f64>>,
    /// `φᵣ''(ξ)` in physical units per position and mode.
    curvature: Vec<Vec<f64>>,
}

impl BeamModel {
    /// Builds the grids. Without an explicit band, it runs from `0.01·ω₁` at
    /// the input means up to `1.2·ωₙ` with `E` and `ρ` at the quantiles
    /// `±band_sigmas` that maximise it.
    pub fn new(cfg: BeamConfig, e: &MarginalSpec, rho: &MarginalSpec) -> Result<Self> {
        cfg.validate()?;
        let roots = beam_roots(cfg.n_modes)?;
        let band = match cfg.band {
            Some(b) => b,
            None => {
                let k = cfg.band_sigmas;
                let (e_hi, rho_lo) = (e.from_standard(k), rho.from_standard(-k));
                if !(e.mean() > 0.0 && rho.mean() > 0.0 && e_hi > 0.0 && rho_lo > 0.0) {
                    return Err(Error::Config("beam material properties must stay positive".into()));
                }
                let lo = 0.01 * natural_frequency(&cfg, roots[0], e.mean(), rho.mean());
                let hi = 1.2 * natural_frequency(&cfg, roots[cfg.n_modes - 1], e_hi, rho_lo);
                [lo, hi]
            }
        };
        Self::with_band(cfg, roots, band)
    }

    fn with_band(cfg: BeamConfig, roots: Vec<f64>, [lo, hi]: [f64; 2]) -> Result<Self> {
        let nw = cfg.frequencies;
        let dw = (hi - lo) / (nw - 1) as f64;
        let omega: Vec<f64> = (0..nw).map(|i| lo + dw * i as f64).collect();
        let weights = (0..nw)
            .map(|i| {
                let w = if i == 0 || i + 1 == nw { 0.5 * dw } else { dw };
                2.0 * cfg.force_psd * w
            })
            .collect();
        let np = cfg.positions;
        let positions: Vec<f64> = (0..np).map(|i| i as f64 / (np - 1) as f64).collect();
        let excitation_phi =
            roots.iter().map(|&b| mode_shape(b, cfg.excitation).map(|m| m.phi)).collect::<Result<_>>()?;
        let l2 = cfg.length * cfg.length;
        let mut phi = Vec::with_capacity(np);
        let mut curvature = Vec::with_capacity(np);
        for &s in &positions {
            let modes = roots.iter().map(|&b| mode_shape(b, s)).collect::<Result<Vec<_>>>()?;
            phi.push(modes.iter().map(|m| m.phi).collect());
            curvature.push(modes.iter().map(|m| m.curvature / l2).collect());
        }
        Ok(Self { cfg, roots, omega, weights, positions, excitation_phi, phi, curvature })
    }

    pub fn config(&self) -> &BeamConfig {
        &self.cfg
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn band(&self) -> (f64, f64) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }

    /// Response positions as fractions of `L`.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// `ωᵣ = (βᵣL)²√(EI/(mL⁴))`, `m = ρA`.
    pub fn natural_frequencies(&self, e: f64, rho: f64) -> Result<Vec<f64>> {
        check_material(e, rho)?;
        Ok(self.roots.iter().map(|&b| natural_frequency(&self.cfg, b, e, rho)).collect())
    }

    /// RMS acceleration and strain along the beam.
    pub fn rms_profiles(&self, e: f64, rho: f64) -> Result<RmsProfile> {
        let wr = self.natural_frequencies(e, rho)?;
        let n = wr.len();
        let zeta = self.cfg.damping;
        let mut m_disp = vec![0.0; n * n];
        let mut m_acc = vec![0.0; n * n];
        let mut re = [0.0; 3];
        let mut im = [0.0; 3];
        for (&w, &weight) in self.omega.iter().zip(&self.weights) {
            for r in 0..n {
                let a = wr[r] * wr[r] - w * w;
                let b = 2.0 * zeta * wr[r] * w;
                let inv = 1.0 / (a * a + b * b);
                re[r] = a * inv;
                im[r] = -b * inv;
            }
            let w4 = w * w * w * w;
            for r in 0..n {
                for s in r..n {
                    let v = weight * (re[r] * re[s] + im[r] * im[s]);
                    m_disp[r * n + s] += v;
                    m_acc[r * n + s] += v * w4;
                }
            }
        }
        let quad = |m: &[f64], c: &[f64]| -> f64 {
            let mut q = 0.0;
            for r in 0..n {
                q += c[r] * c[r] * m[r * n + r];
                for s in r + 1..n {
                    q += 2.0 * c[r] * c[s] * m[r * n + s];
                }
            }
            q.max(0.0).sqrt()
        };
        let mut c = [0.0; 3];
        let mut acceleration = Vec::with_capacity(self.positions.len());
        let mut strain = Vec::with_capacity(self.positions.len());
        for (phi, curv) in self.phi.iter().zip(&self.curvature) {
            for r in 0..n {
                c[r] = phi[r] * self.excitation_phi[r];
            }
            acceleration.push(quad(&m_acc, &c[..n]));
            for r in 0..n {
                c[r] = curv[r] * self.excitation_phi[r];
            }
            strain.push(quad(&m_disp, &c[..n]));
        }
        Ok(RmsProfile { acceleration, strain })
    }

    /// Peak RMS acceleration and peak RMS strain along the beam.
    pub fn rms(&self, e: f64, rho: f64) -> Result<(f64, f64)> {
        Ok(self.rms_profiles(e, rho)?.peaks())
    }

    /// Mean-square response at `s = ξ/L` by summing the modal frequency
    /// response at every frequency and integrating its squared magnitude.
    pub fn mean_square(&self, response: Response, e: f64, rho: f64, s: f64) -> Result<f64> {
        let wr = self.natural_frequencies(e, rho)?;
        let zeta = self.cfg.damping;
        let coef: Vec<f64> = self
            .roots
            .iter()
            .zip(&self.excitation_phi)
            .map(|(&b, &ex)| {
                let m = mode_shape(b, s)?;
                let local = match response {
                    Response::Strain => m.curvature / (self.cfg.length * self.cfg.length),
                    _ => m.phi,
                };
                Ok(local * ex)
            })
            .collect::<Result<_>>()?;
        let mut total = 0.0;
        for (&w, &weight) in self.omega.iter().zip(&self.weights) {
            let (mut h_re, mut h_im) = (0.0, 0.0);
            for (r, c) in coef.iter().enumerate() {
                let a = wr[r] * wr[r] - w * w;
                let b = 2.0 * zeta * wr[r] * w;
                let inv = 1.0 / (a * a + b * b);
                h_re += c * a * inv;
                h_im -= c * b * inv;
            }
            let mut mag2 = h_re * h_re + h_im * h_im;
            if response == Response::Acceleration {
                mag2 *= w * w * w * w;
            }
            total += weight * mag2;
        }
        Ok(total)
    }

    /// [`BeamModel::rms_profiles`] computed position by position through [`BeamModel::mean_square`].
    pub fn rms_by_direct_summation(&self, e: f64, rho: f64) -> Result<RmsProfile> {
        let mut acceleration = Vec::with_capacity(self.positions.len());
        let mut strain = Vec::with_capacity(self.positions.len());
        for &s in &self.positions {
            acceleration.push(self.mean_square(Response::Acceleration, e, rho, s)?.sqrt());
            strain.push(self.mean_square(Response::Strain, e, rho, s)?.sqrt());
        }
        Ok(RmsProfile { acceleration, strain })
    }
}

fn natural_frequency(cfg: &BeamConfig, beta_l: f64, e: f64, rho: f64) -> f64 {
    let m = rho * cfg.area();
    beta_l * beta_l * (e * cfg.second_moment() / (m * cfg.length.powi(4))).sqrt()
}

fn check_material(e: f64, rho: f64) -> Result<()> {
    if e > 0.0 && rho > 0.0 && e.is_finite() && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("E = {e} and ρ = {rho} must be positive")))
    }
}

/// Inputs `(E, ρ)`, outputs (peak RMS acceleration, peak RMS strain).
#[derive(Debug, Clone)]
pub struct BeamMap {
    model: BeamModel,
}

impl BeamMap {
    pub fn new(model: BeamModel) -> Self {
        Self { model }
    }

    pub fn model(&self) -> &BeamModel {
        &self.model
    }
}

impl ForwardMap for BeamMap {
    fn input_dim(&self) -> usize {
        2
    }

    fn output_dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let (acc, strain) = self.model.rms(x[0], x[1])?;
        y[0] = acc;
        y[1] = strain;
        Ok(())
    }
}

/// `g(y) = (y_acc/ŷ_acc)² + (y_str/ŷ_str)²` with fixed normalisers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamPerformance {
    pub acceleration_scale: f64,
    pub strain_scale: f64,
}

impl BeamPerformance {
    pub fn new(acceleration_scale: f64, strain_scale: f64) -> Result<Self> {
        if !(acceleration_scale > 0.0 && strain_scale > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "normalisers must be positive, got {acceleration_scale} and {strain_scale}"
            )));
        }
        Ok(Self { acceleration_scale, strain_scale })
    }

    /// Normalisers set to the ensemble maxima of a two-column output matrix.
    pub fn from_ensemble(outputs: &SampleMatrix) -> Result<Self> {
        if outputs.cols() != 2 {
            return Err(Error::Contract(format!("beam outputs have 2 columns, got {}", outputs.cols())));
        }
        let max = |j| outputs.column(j).fold(0.0_f64, f64::max);
        Self::new(max(0), max(1))
    }
}

impl Performance for BeamPerformance {
    fn value(&self, y: &[f64]) -> f64 {
        beam_performance(y[0], y[1], self)
    }
}

pub fn beam_performance(acceleration: f64, strain: f64, norm: &BeamPerformance) -> f64 {
    let a = acceleration / norm.acceleration_scale;
    let s = strain / norm.strain_scale;
    a * a + s * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample, InputModel};
    use crate::mclr::{evaluate_outputs, performance_values};
    use approx::assert_relative_eq;

    fn inputs() -> (MarginalSpec, MarginalSpec) {
        (MarginalSpec::lognormal(24.85, 0.47).unwrap(), MarginalSpec::lognormal(7.88, 0.2).unwrap())
    }

    fn default_model() -> BeamModel {
        let (e, rho) = inputs();
        BeamModel::new(BeamConfig::default(), &e, &rho).unwrap()
    }

    #[test]
    fn characteristic_roots() {
        let roots = beam_roots(4).unwrap();
        for (r, expected) in roots.iter().zip([1.875, 4.694, 7.855, 10.996]) {
            assert!((r - expected).abs() < 1e-3, "{r} vs {expected}");
            assert!(root_residual(*r) < 1e-12);
        }
        assert_relative_eq!(roots[0], 1.875_104_068_711_961, max_relative = 1e-12);
        let ten = beam_roots(10).unwrap();
        assert!(ten.windows(2).all(|w| w[1] > w[0]));
        assert!(beam_roots(11).is_err());
    }

    #[test]
    fn clamped_free_boundary_conditions() {
        for &b in &beam_roots(3).unwrap() {
            let root = mode_shape(b, 0.0).unwrap();
            assert!(root.phi.abs() < 1e-12);
            assert!(root.slope.abs() < 1e-12);
            let max_curv =
                (0..=1000).map(|i| mode_shape(b, i as f64 / 1000.0).unwrap().curvature.abs()).fold(0.0, f64::max);
            assert!(mode_shape(b, 1.0).unwrap().curvature.abs() < 1e-6 * max_curv);
        }
        assert!(mode_shape(1.875, 1.5).is_err());
    }

    #[test]
    fn curvature_matches_second_difference() {
        let h = 1e-4;
        for &b in &beam_roots(3).unwrap() {
            for s in [0.1, 0.33, 0.5, 0.8] {
                let f = |s: f64| mode_shape(b, s).unwrap().phi;
                let fd = (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h);
                let exact = mode_shape(b, s).unwrap().curvature;
                assert!((fd - exact).abs() / exact.abs() < 1e-4, "β={b} s={s}: {fd} vs {exact}");
                let fd1 = (f(s + h) - f(s - h)) / (2.0 * h);
                assert_relative_eq!(fd1, mode_shape(b, s).unwrap().slope, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn frequencies_scale_with_root_stiffness() {
        let model = default_model();
        let w = model.natural_frequencies(69e9, 2700.0).unwrap();
        let w4 = model.natural_frequencies(4.0 * 69e9, 2700.0).unwrap();
        for (a, b) in w.iter().zip(&w4) {
            assert_relative_eq!(*b, 2.0 * a, max_relative = 1e-14);
        }
        assert!(model.natural_frequencies(-1.0, 2700.0).is_err());
    }

    #[test]
    fn band_covers_extreme_draws() {
        let (e, rho) = inputs();
        let model = default_model();
        let (lo, hi) = model.band();
        let w_mean = model.natural_frequencies(e.mean(), rho.mean()).unwrap();
        assert_relative_eq!(lo, 0.01 * w_mean[0], max_relative = 1e-12);
        let w_extreme = model.natural_frequencies(e.from_standard(4.0), rho.from_standard(-4.0)).unwrap();
        assert!(w_extreme[2] * 1.2 <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn quadratic_form_matches_direct_summation() {
        let model = default_model();
        for (e, rho) in [(69e9, 2700.0), (3e10, 3500.0), (1.5e11, 2000.0)] {
            let fast = model.rms_profiles(e, rho).unwrap();
            let slow = model.rms_by_direct_summation(e, rho).unwrap();
            for (a, b) in fast.acceleration.iter().zip(&slow.acceleration).chain(fast.strain.iter().zip(&slow.strain)) {
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-300), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn single_mode_matches_one_dof_white_noise_integral() {
        let (e, rho) = (69e9, 2700.0);
        let base = BeamConfig { n_modes: 1, excitation: 1.0, frequencies: 2000, ..BeamConfig::default() };
        let w1 = natural_frequency(&base, beam_roots(1).unwrap()[0], e, rho);
        let cfg = BeamConfig { band: Some([0.0, 5.0 * w1]), ..base };
        let model = BeamModel::new(cfg.clone(), &inputs().0, &inputs().1).unwrap();
        let phi_l = mode_shape(model.roots()[0], 1.0).unwrap().phi;
        let ms = model.mean_square(Response::Displacement, e, rho, 1.0).unwrap();
        let oracle = 2.0 * cfg.force_psd * phi_l.powi(4) * std::f64::consts::PI / (4.0 * cfg.damping * w1.powi(3));
        assert!((ms - oracle).abs() / oracle < 0.05, "{ms} vs {oracle}");
    }

    #[test]
    fn evaluation_is_deterministic() {
        let model = default_model();
        let a = model.rms_profiles(7e10, 2650.0).unwrap();
        let b = model.rms_profiles(7e10, 2650.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn performance_function() {
        let norm = BeamPerformance::new(3.0, 0.5).unwrap();
        assert_eq!(beam_performance(3.0, 0.5, &norm), 2.0);
        assert_eq!(beam_performance(0.0, 0.0, &norm), 0.0);
        assert!(BeamPerformance::new(0.0, 1.0).is_err());

        let (e, rho) = inputs();
        let model = InputModel::new(vec![("E", e), ("rho", rho)]).unwrap();
        let batch = sample(&model, 20_000, 5).unwrap();
        let outputs = evaluate_outputs(&BeamMap::new(default_model()), &batch).unwrap();
        let norm = BeamPerformance::from_ensemble(&outputs).unwrap();
        let g = performance_values(&norm, &outputs);
        assert!(g.iter().all(|v| *v > 0.0 && *v <= 2.0));
    }

    #[test]
    fn config_validation() {
        let (e, rho) = inputs();
        for cfg in [
            BeamConfig { positions: 1, ..BeamConfig::default() },
            BeamConfig { frequencies: 0, ..BeamConfig::default() },
            BeamConfig { n_modes: 4, ..BeamConfig::default() },
            BeamConfig { damping: 0.0, ..BeamConfig::default() },
            BeamConfig { band: Some([5.0, 1.0]), ..BeamConfig::default() },
        ] {
            assert!(matches!(BeamModel::new(cfg, &e, &rho), Err(Error::Config(_))));
        }
    }
}
