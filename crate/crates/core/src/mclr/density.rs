//! Gridded output densities and the quantities integrated over them.
//!
//! The Dirac deltas of the MC-LR density estimator are replaced by a product
//! Gaussian kernel, so on a uniform grid
//!
//! ```text
//! p(y|b)     ≈ (1/N) Σ K(y − yᵢ)
//! ∂p(y|b)/∂bⱼ ≈ (1/N) Σ K(y − yᵢ) (sᵢⱼ − s̄ⱼ),   sᵢⱼ = ∂ln p(xᵢ|b)/∂bⱼ
//! ```
//!
//! where `s̄ⱼ` is the sample mean of the score, whose exact expectation is zero.
//!
//! All integrals use the trapezoidal rule. Cells where the density falls below
//! [`DENSITY_FLOOR`] times its maximum are left out of the `1/p` integrands.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::InputModel;
use crate::linalg::{FisherMatrix, SampleMatrix};
use crate::reduce::{chunk_ranges, chunked_sum};
use crate::{Error, Result};

/// Relative density floor for the FIM and KL quadratures.
pub const DENSITY_FLOOR: f64 = 1e-6;
/// The grid extends this many bandwidths beyond the extreme samples.
pub const GRID_PAD_BANDWIDTHS: f64 = 3.0;
/// The kernel is evaluated out to this many bandwidths.
pub const KERNEL_RADIUS: f64 = 8.0;
/// Excluded mass above this fraction raises a warning on the FIM.
pub const EXCLUDED_MASS_WARNING: f64 = 0.05;
pub const DEFAULT_POINTS_1D: usize = 512;
pub const DEFAULT_POINTS_2D: usize = 256;

const SAMPLES_PER_PARTIAL: usize = 16_384;

/// Uniform grid axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    /// `len` points from `lo` to `hi` inclusive.
    pub fn spanning(lo: f64, hi: f64, len: usize) -> Result<Self> {
        if len < 2 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Contract(format!("cannot build a {len}-point axis on [{lo}, {hi}]")));
        }
        Ok(Self { start: lo, step: (hi - lo) / (len - 1) as f64, len })
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn end(&self) -> f64 {
        self.point(self.len - 1)
    }

    fn trapezoid_weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.len {
            0.5 * self.step
        } else {
            self.step
        }
    }

    /// Indices of grid points within `radius` of `y`.
    fn window(&self, y: f64, radius: f64) -> std::ops::Range<usize> {
        let lo = ((y - radius - self.start) / self.step).ceil().max(0.0);
        let hi = ((y + radius - self.start) / self.step).floor();
        if hi < 0.0 || lo > (self.len - 1) as f64 {
            return 0..0;
        }
        lo as usize..(hi as usize).min(self.len - 1) + 1
    }
}

/// Grid and bandwidth choices; `None` selects the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub points: Option<usize>,
    pub bandwidth: Option<Vec<f64>>,
}

/// A function of the output point, tabulated by [`DensityGrid::from_fn`].
pub type GridFn = dyn Fn(&[f64]) -> f64;

/// Output density on a uniform grid, with one derivative grid per parameter.
///
/// For two axes the cell index is `i₀·len₁ + i₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    axes: Vec<Axis>,
    density: Vec<f64>,
    density_grad: Vec<Vec<f64>>,
    bandwidth: Vec<f64>,
}

impl DensityGrid {
    pub fn from_parts(
        axes: Vec<Axis>,
        density: Vec<f64>,
        density_grad: Vec<Vec<f64>>,
        bandwidth: Vec<f64>,
    ) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::Contract(format!("density grids have 1 or 2 axes, got {}", axes.len())));
        }
        let cells: usize = axes.iter().map(|a| a.len).product();
        if density.len() != cells || density_grad.iter().any(|g| g.len() != cells) {
            return Err(Error::Contract(format!("density grid needs {cells} cells per channel")));
        }
        if density.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::Contract("density must be non-negative".into()));
        }
        Ok(Self { axes, density, density_grad, bandwidth })
    }

    /// Tabulates a density function (and optionally its parameter derivatives) on `axes`.
    pub fn from_fn(axes: Vec<Axis>, density: impl Fn(&[f64]) -> f64, derivatives: &[&GridFn]) -> Result<Self> {
        let cells: usize = axes.iter().map(|a| a.len).product();
        let mut p = Vec::with_capacity(cells);
        let mut dp = vec![Vec::with_capacity(cells); derivatives.len()];
        let mut y = vec![0.0; axes.len()];
        for cell in 0..cells {
            fill_point(&axes, cell, &mut y);
            p.push(density(&y));
            for (d, f) in dp.iter_mut().zip(derivatives) {
                d.push(f(&y));
            }
        }
        Self::from_parts(axes, p, dp, Vec::new())
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn density_grad(&self, j: usize) -> &[f64] {
        &self.density_grad[j]
    }

    pub fn param_dim(&self) -> usize {
        self.density_grad.len()
    }

    pub fn bandwidth(&self) -> &[f64] {
        &self.bandwidth
    }

    pub fn cells(&self) -> usize {
        self.density.len()
    }

    /// Coordinates of one cell.
    pub fn point(&self, cell: usize) -> Vec<f64> {
        let mut y = vec![0.0; self.axes.len()];
        fill_point(&self.axes, cell, &mut y);
        y
    }

    /// Trapezoidal quadrature weight of every cell.
    pub fn weights(&self) -> Vec<f64> {
        match self.axes.as_slice() {
            [a] => (0..a.len).map(|i| a.trapezoid_weight(i)).collect(),
            [a, b] => (0..a.len)
                .flat_map(|i| (0..b.len).map(move |j| a.trapezoid_weight(i) * b.trapezoid_weight(j)))
                .collect(),
            _ => unreachable!("validated at construction"),
        }
    }

    /// Trapezoidal integral of the density.
    pub fn mass(&self) -> f64 {
        self.weights().iter().zip(&self.density).map(|(w, p)| w * p).sum()
    }

    /// Trapezoidal integral of `∂p/∂bⱼ`.
    pub fn grad_mass(&self, j: usize) -> f64 {
        self.weights().iter().zip(&self.density_grad[j]).map(|(w, p)| w * p).sum()
    }

    fn same_grid(&self, other: &DensityGrid) -> bool {
        self.axes == other.axes
    }
}

fn fill_point(axes: &[Axis], cell: usize, y: &mut [f64]) {
    match axes {
        [a] => y[0] = a.point(cell),
        [a, b] => {
            y[0] = a.point(cell / b.len);
            y[1] = b.point(cell % b.len);
        }
        _ => {}
    }
}

/// Rule-of-thumb bandwidths: `1.06·s·N^(−1/5)` for one output, `s·N^(−1/6)` per axis for two.
pub fn default_bandwidth(outputs: &SampleMatrix) -> Result<Vec<f64>> {
    let n = outputs.rows() as f64;
    let exponent = match outputs.cols() {
        1 => -0.2,
        2 => -1.0 / 6.0,
        k => return Err(Error::Contract(format!("density estimation supports 1 or 2 outputs, got {k}"))),
    };
    let factor = if outputs.cols() == 1 { 1.06 } else { 1.0 };
    (0..outputs.cols())
        .map(|j| {
            let mean = outputs.column(j).sum::<f64>() / n;
            let var = outputs.column(j).map(|y| (y - mean) * (y - mean)).sum::<f64>() / (n - 1.0);
            let h = factor * var.sqrt() * n.powf(exponent);
            if h > 0.0 && h.is_finite() {
                Ok(h)
            } else {
                Err(Error::ParameterDomain(format!("output {j} has zero spread; bandwidth would be {h}")))
            }
        })
        .collect()
}

/// Density and derivative grids from outputs `yᵢ = h(xᵢ)` and their input scores.
pub fn estimate_output_density(outputs: &SampleMatrix, spec: &GridSpec, scores: &SampleMatrix) -> Result<DensityGrid> {
    let n = outputs.rows();
    let k = outputs.cols();
    if !(1..=2).contains(&k) {
        return Err(Error::Contract(format!("density estimation supports 1 or 2 outputs, got {k}")));
    }
    if n < 1000 {
        return Err(Error::Contract(format!("density estimation needs at least 1000 samples, got {n}")));
    }
    if scores.rows() != n {
        return Err(Error::Contract(format!("{} score rows for {n} outputs", scores.rows())));
    }
    let bandwidth = match &spec.bandwidth {
        Some(h) => h.clone(),
        None => default_bandwidth(outputs)?,
    };
    if bandwidth.len() != k {
        return Err(Error::Contract(format!("{} bandwidths for {k} outputs", bandwidth.len())));
    }
    if let Some(h) = bandwidth.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
        return Err(Error::ParameterDomain(format!("kernel bandwidth {h} must be positive")));
    }
    let points = spec.points.unwrap_or(if k == 1 { DEFAULT_POINTS_1D } else { DEFAULT_POINTS_2D });
    let axes = (0..k)
        .map(|j| {
            let (lo, hi) =
                outputs.column(j).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| (lo.min(y), hi.max(y)));
            let pad = GRID_PAD_BANDWIDTHS * bandwidth[j];
            Axis::spanning(lo - pad, hi + pad, points)
        })
        .collect::<Result<Vec<_>>>()?;

    // The score has zero mean under p(x|b); subtracting its sample mean
    // removes the noise that would otherwise give ∂p/∂bⱼ a non-zero integral.
    let p = scores.cols();
    let inv_n = 1.0 / n as f64;
    let score_mean: Vec<f64> = chunked_sum(n, p, |i, acc| acc.iter_mut().zip(scores.row(i)).for_each(|(a, s)| *a += s))
        .into_iter()
        .map(|s| s * inv_n)
        .collect();
    let channels = 1 + p;
    let mut grids = accumulate(outputs, &axes, &bandwidth, channels, |i, ch| {
        ch[0] = 1.0;
        for ((c, s), m) in ch[1..].iter_mut().zip(scores.row(i)).zip(&score_mean) {
            *c = s - m;
        }
    });
    for g in &mut grids {
        g.iter_mut().for_each(|v| *v *= inv_n);
    }
    let density = grids.remove(0);
    DensityGrid::from_parts(axes, density, grids, bandwidth)
}

/// `p(xᵢ|b + Δb) / p(xᵢ|b)` for every draw.
pub fn likelihood_ratio_weights(base: &InputModel, perturbed: &InputModel, draws: &SampleMatrix) -> Result<Vec<f64>> {
    (0..draws.rows())
        .into_par_iter()
        .map(|i| {
            let x = draws.row(i);
            Ok((perturbed.log_density(x)? - base.log_density(x)?).exp())
        })
        .collect()
}

/// Kernel density of the weighted outputs on `base`'s grid and bandwidth.
///
/// Weights are self-normalised, so the result integrates like `base` does.
/// With likelihood-ratio weights this is the output density at perturbed
/// parameters, evaluated on the very same draws.
pub fn density_on_grid(base: &DensityGrid, outputs: &SampleMatrix, weights: &[f64]) -> Result<DensityGrid> {
    if outputs.cols() != base.axes.len() {
        return Err(Error::Contract(format!("{} outputs for a {}-axis grid", outputs.cols(), base.axes.len())));
    }
    if weights.len() != outputs.rows() {
        return Err(Error::Contract(format!("{} weights for {} outputs", weights.len(), outputs.rows())));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::Contract("weights must be finite and non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Contract("weights sum to zero".into()));
    }
    let mut grids = accumulate(outputs, &base.axes, &base.bandwidth, 1, |i, ch| ch[0] = weights[i]);
    let density: Vec<f64> = grids.remove(0).into_iter().map(|v| v / total).collect();
    DensityGrid::from_parts(base.axes.clone(), density, Vec::new(), base.bandwidth.clone())
}

/// Sums `channel · K(y − yᵢ)` over samples into one grid per channel.
fn accumulate<F>(outputs: &SampleMatrix, axes: &[Axis], bandwidth: &[f64], channels: usize, fill: F) -> Vec<Vec<f64>>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let cells: usize = axes.iter().map(|a| a.len).product();
    let norm: Vec<f64> = bandwidth.iter().map(|h| 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * h)).collect();
    let kernel_row = |axis: &Axis, j: usize, y: f64, buf: &mut Vec<f64>| -> std::ops::Range<usize> {
        let h = bandwidth[j];
        let range = axis.window(y, KERNEL_RADIUS * h);
        buf.clear();
        buf.extend(range.clone().map(|i| {
            let u = (axis.point(i) - y) / h;
            norm[j] * (-0.5 * u * u).exp()
        }));
        range
    };

    // Partial grids are interleaved by channel: cell * channels + c.
    let partials: Vec<Vec<f64>> = chunk_ranges(outputs.rows(), SAMPLES_PER_PARTIAL)
        .map(|range| {
            let mut grid = vec![0.0; cells * channels];
            let mut ch = vec![0.0; channels];
            let mut ka = Vec::new();
            let mut kb = Vec::new();
            for i in range {
                fill(i, &mut ch);
                let y = outputs.row(i);
                match axes {
                    [a] => {
                        let ra = kernel_row(a, 0, y[0], &mut ka);
                        for (ia, kv) in ra.zip(&ka) {
                            let cell = &mut grid[ia * channels..(ia + 1) * channels];
                            for (g, c) in cell.iter_mut().zip(&ch) {
                                *g += kv * c;
                            }
                        }
                    }
                    [a, b] => {
                        let ra = kernel_row(a, 0, y[0], &mut ka);
                        let rb = kernel_row(b, 1, y[1], &mut kb);
                        for (ia, kva) in ra.zip(&ka) {
                            for (ib, kvb) in rb.clone().zip(&kb) {
                                let kv = kva * kvb;
                                let cell_index = ia * b.len + ib;
                                let cell = &mut grid[cell_index * channels..(cell_index + 1) * channels];
                                for (g, c) in cell.iter_mut().zip(&ch) {
                                    *g += kv * c;
                                }
                            }
                        }
                    }
                    _ => unreachable!("axes validated by callers"),
                }
            }
            grid
        })
        .collect();

    let mut out = vec![vec![0.0; cells]; channels];
    for partial in &partials {
        for (cell, values) in partial.chunks(channels).enumerate() {
            for (c, v) in values.iter().enumerate() {
                out[c][cell] += v;
            }
        }
    }
    out
}

/// Output FIM estimated on a density grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFim {
    pub matrix: FisherMatrix,
    /// Fraction of grid mass in cells below the density floor.
    pub excluded_mass_fraction: f64,
    pub warnings: Vec<String>,
}

/// `Fⱼₖ = ∫ (∂p/∂bⱼ)(∂p/∂bₖ)/p dy` on the grid.
///
/// Each derivative grid is first projected onto zero total mass over the
/// retained cells (`∂ⱼp − p·mⱼ`, `mⱼ = ∫∂ⱼp / ∫p`), as the exact derivative
/// of a unit-mass density integrates to zero. This removes what the density
/// floor and the grid edge cut off.
pub fn estimate_output_fim(dg: &DensityGrid) -> Result<OutputFim> {
    let p = dg.param_dim();
    if p == 0 {
        return Err(Error::Contract("density grid carries no parameter derivatives".into()));
    }
    let w = dg.weights();
    let density = dg.density();
    let floor = DENSITY_FLOOR * density.iter().fold(0.0_f64, |m, v| m.max(*v));
    let keep: Vec<usize> = (0..dg.cells()).filter(|&c| density[c] >= floor && density[c] > 0.0).collect();
    let total_mass: f64 = w.iter().zip(density).map(|(w, p)| w * p).sum();
    let kept_mass: f64 = keep.iter().map(|&c| w[c] * density[c]).sum();
    if !(kept_mass > 0.0) {
        return Err(Error::Numeric("density grid has no mass".into()));
    }
    let means: Vec<f64> =
        (0..p).map(|j| keep.iter().map(|&c| w[c] * dg.density_grad[j][c]).sum::<f64>() / kept_mass).collect();
    let mut acc = vec![0.0; p * p];
    let mut centred = vec![0.0; p];
    for &c in &keep {
        for j in 0..p {
            centred[j] = dg.density_grad[j][c] - density[c] * means[j];
        }
        let scale = w[c] / density[c];
        for j in 0..p {
            for k in j..p {
                acc[j * p + k] += scale * centred[j] * centred[k];
            }
        }
    }
    let excluded_mass_fraction = (1.0 - kept_mass / total_mass).max(0.0);
    let mut warnings = Vec::new();
    if excluded_mass_fraction > EXCLUDED_MASS_WARNING {
        warnings.push(format!("{:.1}% of the grid mass lies below the density floor", 100.0 * excluded_mass_fraction));
    }
    Ok(OutputFim { matrix: FisherMatrix::from_upper(p, |j, k| acc[j * p + k]), excluded_mass_fraction, warnings })
}

/// `KL[p‖q] = ∫ p ln(p/q) dy` between two densities on the same grid.
///
/// Both densities are restricted to the cells above their floors and
/// renormalised there, so truncation of kernel mass at the grid edge does not
/// masquerade as a divergence.
pub fn estimate_kl(p: &DensityGrid, q: &DensityGrid) -> Result<f64> {
    if !p.same_grid(q) {
        return Err(Error::Contract("KL divergence needs densities on identical grids".into()));
    }
    let w = p.weights();
    let floor_of = |d: &[f64]| DENSITY_FLOOR * d.iter().fold(0.0_f64, |m, v| m.max(*v));
    let (fp, fq) = (floor_of(p.density()), floor_of(q.density()));
    let keep: Vec<usize> = (0..p.cells())
        .filter(|&c| p.density[c] >= fp && q.density[c] >= fq && p.density[c] > 0.0 && q.density[c] > 0.0)
        .collect();
    let mp: f64 = keep.iter().map(|&c| w[c] * p.density[c]).sum();
    let mq: f64 = keep.iter().map(|&c| w[c] * q.density[c]).sum();
    if !(mp > 0.0 && mq > 0.0) {
        return Err(Error::Numeric("no common support above the density floor".into()));
    }
    Ok(keep
        .iter()
        .map(|&c| {
            let pc = p.density[c] / mp;
            let qc = q.density[c] / mq;
            w[c] * pc * (-((qc - pc) / pc).ln_1p())
        })
        .sum())
}
