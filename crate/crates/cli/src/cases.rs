//! End-to-end case pipelines.

use infobound::bounds::{
    all_failure_sets, check_perturbation_bound, check_sensitivity_bound, discrete_simplex_oracle,
    info_processing_check, kl_quadratic_consistency, loglog_slope, Binomial,
};
use infobound::distributions::{joint_score_and_fim, sample, InputModel, ScoredSampleBatch};
use infobound::mclr::finite_difference::reweighted_gradient;
use infobound::mclr::{
    density_on_grid, estimate_kl, estimate_output_density, estimate_output_fim, evaluate_outputs,
    likelihood_ratio_weights, performance_values, pf_from_values, sensitivity_curve_from_values, DensityGrid,
    FirstComponent,
};
use infobound::models::{
    identity_analytic, identity_stationarity, BeamMap, BeamModel, BeamPerformance, IdentityMap, ShoMap,
};
use infobound::{BoundReport, FisherMatrix, ForwardMap, Performance, SampleMatrix};

use crate::config::{CaseKind, RunConfig};
use crate::output;
use crate::report::{
    BeamSummary, CaseReport, CheckOutcome, GradientCheck, IdentityComparison, KlLevel, KlSweep, OracleReport,
    OracleRow, PerturbationSummary, Provenance, Report,
};
use crate::CliError;

/// Gradient components smaller than this are not compared against finite differences.
pub const GRADIENT_FLOOR: f64 = 0.1;
/// Relative LR/finite-difference agreement required above [`GRADIENT_FLOOR`].
pub const GRADIENT_REL_TOL: f64 = 0.02;
/// Largest relative error allowed between grid KL and `½ΔbᵀFΔb` at the largest perturbation.
pub const KL_REL_TOL: f64 = 0.05;
/// Smallest admissible log-log slope of the KL error against `|Δb|`.
pub const KL_MIN_SLOPE: f64 = 0.8;
/// Relative tolerance of the identity-case comparison against its closed form.
pub const IDENTITY_REL_TOL: f64 = 0.05;

/// Switches that alter a run for testing purposes.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Negate every score after sampling; the gradient check must then fail.
    pub corrupt_score_sign: bool,
}

/// A finished run: the report and the text of every output file.
#[derive(Debug, Clone)]
pub struct CaseOutput {
    pub report: Report,
    pub files: Vec<(&'static str, String)>,
}

pub fn run_case(cfg: &RunConfig, opts: &RunOptions) -> Result<CaseOutput, CliError> {
    cfg.validate()?;
    match cfg.case {
        CaseKind::DiscreteOracle => run_discrete(cfg),
        _ => run_continuous(cfg, opts),
    }
}

struct Forward {
    map: Box<dyn ForwardMap>,
    beam: Option<BeamModel>,
}

fn forward_for(cfg: &RunConfig, model: &InputModel) -> Result<Forward, CliError> {
    Ok(match cfg.case {
        CaseKind::Identity => Forward { map: Box::new(IdentityMap), beam: None },
        CaseKind::Sho => Forward { map: Box::new(ShoMap), beam: None },
        CaseKind::Beam => {
            let m = model.marginals();
            let beam = BeamModel::new(cfg.beam.clone(), &m[0].spec, &m[1].spec)?;
            Forward { map: Box::new(BeamMap::new(beam.clone())), beam: Some(beam) }
        }
        CaseKind::DiscreteOracle => unreachable!("handled by run_discrete"),
    })
}

fn scored_batch(model: &InputModel, cfg: &RunConfig, opts: &RunOptions) -> Result<ScoredSampleBatch, CliError> {
    let mut batch = sample(model, cfg.n_samples, cfg.seed)?;
    if opts.corrupt_score_sign {
        batch.scores.as_mut_slice().iter_mut().for_each(|s| *s = -*s);
    }
    Ok(batch)
}

/// Standard `Δb` set: `±scale·σⱼ` on each parameter alone, then all-plus,
/// all-minus and both alternating sign patterns.
pub fn standard_perturbations(model: &InputModel, scale: f64) -> Vec<Vec<f64>> {
    let sigma = model.param_scales();
    let n = sigma.len();
    let mut out = Vec::new();
    for j in 0..n {
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[j] = sign * scale * sigma[j];
            out.push(d);
        }
    }
    let patterns: [fn(usize) -> f64; 4] =
        [|_| 1.0, |_| -1.0, |j| if j % 2 == 0 { 1.0 } else { -1.0 }, |j| if j % 2 == 0 { -1.0 } else { 1.0 }];
    for pattern in patterns {
        out.push((0..n).map(|j| pattern(j) * scale * sigma[j]).collect());
    }
    out
}

fn run_continuous(cfg: &RunConfig, opts: &RunOptions) -> Result<CaseOutput, CliError> {
    let model = cfg.input_model()?;
    let forward = forward_for(cfg, &model)?;
    let batch = scored_batch(&model, cfg, opts)?;
    let outputs = evaluate_outputs(forward.map.as_ref(), &batch)?;

    // Beam outputs are normalised by their ensemble maxima, both inside g and for the density.
    let (performance, kde_outputs, beam_norm): (Box<dyn Performance>, SampleMatrix, Option<BeamPerformance>) =
        match cfg.case {
            CaseKind::Beam => {
                let norm = BeamPerformance::from_ensemble(&outputs)?;
                let mut scaled = outputs.clone();
                scaled.scale_column(0, 1.0 / norm.acceleration_scale);
                scaled.scale_column(1, 1.0 / norm.strain_scale);
                (Box::new(norm), scaled, Some(norm))
            }
            _ => (Box::new(FirstComponent), outputs.clone(), None),
        };
    let values = performance_values(performance.as_ref(), &outputs);
    let curve = sensitivity_curve_from_values(&values, &batch.scores, &cfg.percentiles, cfg.direction)?;
    let thresholds: Vec<f64> = curve.results.iter().map(|r| r.z).collect();

    let density = estimate_output_density(&kde_outputs, &cfg.kde, &batch.scores)?;
    let output_fim = estimate_output_fim(&density)?;
    let fim_y = output_fim.matrix.clone();
    let fim_x = model.analytic_fim();
    let tr_fx_monte_carlo = joint_score_and_fim(&model, &batch)?.monte_carlo.trace();
    let mut warnings = output_fim.warnings.clone();
    if curve.degenerate {
        warnings.push("all performance values are equal".into());
    }

    let mut sensitivity_bounds = Vec::with_capacity(2 * curve.results.len());
    for r in &curve.results {
        let [a, b] = check_sensitivity_bound(r, &fim_y, &fim_x)?;
        sensitivity_bounds.push(a);
        sensitivity_bounds.push(b);
    }
    let info_processing = info_processing_check(&fim_y, &fim_x)?.to_vec();

    let deltas = if cfg.perturbations.is_empty() {
        standard_perturbations(&model, cfg.perturbation_scale)
    } else {
        cfg.perturbations.clone()
    };
    let base_pf: Vec<f64> = thresholds.iter().map(|&z| pf_from_values(&values, z, cfg.direction).p_f).collect();
    let mut perturbations = Vec::with_capacity(deltas.len());
    for delta in &deltas {
        perturbations.push(perturbation_summary(
            cfg,
            &model,
            forward.map.as_ref(),
            performance.as_ref(),
            delta,
            &thresholds,
            &base_pf,
            &fim_x,
            &fim_y,
        )?);
    }

    let kl = kl_sweep(cfg, &model, &batch, &kde_outputs, &density, &fim_y)?;
    let gradient_check = gradient_check(cfg, &model, &batch, &values, &curve.results)?;

    let identity = match cfg.case {
        CaseKind::Identity => Some(identity_comparison(cfg, &curve.results)?),
        _ => None,
    };
    let beam = match (&forward.beam, beam_norm) {
        (Some(b), Some(n)) => Some(BeamSummary {
            roots: b.roots().to_vec(),
            band: b.band(),
            acceleration_scale: n.acceleration_scale,
            strain_scale: n.strain_scale,
        }),
        _ => None,
    };

    let bound_reports = sensitivity_bounds.iter().chain(&info_processing);
    let mut bound_checks = bound_reports.clone().count();
    let mut bound_violations = bound_reports.filter(|r| !r.satisfied).count();
    for p in &perturbations {
        bound_checks += 2 * p.thresholds_checked;
        bound_violations += p.violations_x + p.violations_y;
    }

    let mut checks = vec![
        CheckOutcome::new(
            "bounds",
            bound_violations == 0,
            format!("{bound_violations} violations in {bound_checks} bound evaluations"),
        ),
        CheckOutcome::new(
            "gradient-fd",
            gradient_check.failures.is_empty() && gradient_check.compared > 0,
            format!(
                "{} components compared, max relative error {:.3e}, {} failures",
                gradient_check.compared,
                gradient_check.max_rel_err,
                gradient_check.failures.len()
            ),
        ),
    ];
    checks.push(match &kl {
        Some(k) => {
            let first = &k.levels[0];
            let ok = first.rel_err_forward < KL_REL_TOL
                && first.rel_err_reverse < KL_REL_TOL
                && k.slope_forward >= KL_MIN_SLOPE
                && k.slope_reverse >= KL_MIN_SLOPE;
            CheckOutcome::new(
                "kl-consistency",
                ok,
                format!(
                    "relative error {:.3e}/{:.3e} (forward/reverse), log-log slopes {:.3}/{:.3}",
                    first.rel_err_forward, first.rel_err_reverse, k.slope_forward, k.slope_reverse
                ),
            )
        }
        None => CheckOutcome::new("kl-consistency", false, "quadratic form vanished; no sweep"),
    });
    if let Some(id) = &identity {
        let peak_err = (id.peak_norm_sq - id.analytic_peak).abs() / id.analytic_peak;
        checks.push(CheckOutcome::new(
            "closed-form",
            id.max_rel_err_norm_sq < IDENTITY_REL_TOL && peak_err < IDENTITY_REL_TOL && id.compared > 0,
            format!(
                "max relative error {:.3e} over {} thresholds (worst at percentile {}), peak error {:.3e}",
                id.max_rel_err_norm_sq, id.compared, id.worst_percentile, peak_err
            ),
        ));
        let norm = |y: f64| identity_analytic(cfg.inputs[0].mu, cfg.inputs[0].sigma, y).map(|a| a.norm_sq);
        let mu = cfg.inputs[0].mu;
        let slope = (norm(mu + 1e-4)? - norm(mu - 1e-4)?) / 2e-4;
        checks.push(CheckOutcome::new(
            "stationarity",
            id.stationarity == (0.0, 0.0) && slope.abs() < 1e-3,
            format!("derivatives at the mean {:?}, finite-difference slope {slope:.3e}", id.stationarity),
        ));
    }

    let provenance = Provenance {
        code_version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        n_samples: cfg.n_samples,
        bandwidth: density.bandwidth().to_vec(),
        grid_points: density.axes().iter().map(|a| a.len).collect(),
        config: recorded_config(cfg),
    };
    let param_names = model.param_names();
    let curve_csv = output::curve_csv(&param_names, &curve.results, fim_y.trace(), fim_x.trace());
    let density_csv = output::density_csv(&param_names, &density);
    let report = CaseReport {
        case: cfg.case.name().into(),
        provenance,
        param_names,
        tr_fx: fim_x.trace(),
        fim_x,
        tr_fx_monte_carlo,
        tr_fy: fim_y.trace(),
        fim_y,
        fy_excluded_mass: output_fim.excluded_mass_fraction,
        degenerate: curve.degenerate,
        curve: curve.results,
        sensitivity_bounds,
        info_processing,
        perturbations,
        kl,
        gradient_check,
        identity,
        beam,
        warnings,
        checks,
        bound_checks,
        bound_violations,
    };
    let report = Report::Case(Box::new(report));
    Ok(CaseOutput {
        files: vec![("curve.csv", curve_csv), ("density.csv", density_csv), ("report.json", report.to_json())],
        report,
    })
}

#[allow(clippy::too_many_arguments)]
fn perturbation_summary(
    cfg: &RunConfig,
    model: &InputModel,
    forward: &dyn ForwardMap,
    performance: &dyn Performance,
    delta: &[f64],
    thresholds: &[f64],
    base_pf: &[f64],
    fim_x: &FisherMatrix,
    fim_y: &FisherMatrix,
) -> Result<PerturbationSummary, CliError> {
    // Same seed at b + Δb: common random numbers.
    let batch = sample(&model.perturbed(delta)?, cfg.n_samples, cfg.seed)?;
    let values = performance_values(performance, &evaluate_outputs(forward, &batch)?);
    let mut worst: Option<(f64, BoundReport, BoundReport)> = None;
    let (mut violations_x, mut violations_y) = (0, 0);
    let mut delta_h = 0.0;
    for (&z, &p0) in thresholds.iter().zip(base_pf) {
        let p1 = pf_from_values(&values, z, cfg.direction).p_f;
        let mut rx = check_perturbation_bound(p0, p1, delta, fim_x)?.report;
        let cy = check_perturbation_bound(p0, p1, delta, fim_y)?;
        let mut ry = cy.report;
        delta_h = cy.delta_h;
        rx.context.z = Some(z);
        ry.context.z = Some(z);
        violations_x += usize::from(!rx.satisfied);
        violations_y += usize::from(!ry.satisfied);
        if worst.as_ref().is_none_or(|(lhs, _, _)| rx.lhs > *lhs) {
            worst = Some((rx.lhs, rx, ry));
        }
    }
    let (_, worst_x, worst_y) = worst.ok_or_else(|| CliError::Config("no thresholds to check".into()))?;
    Ok(PerturbationSummary {
        delta: delta.to_vec(),
        quad_form_x: fim_x.quadratic_form(delta)?,
        quad_form_y: fim_y.quadratic_form(delta)?,
        delta_h,
        thresholds_checked: thresholds.len(),
        violations_x,
        violations_y,
        worst_x,
        worst_y,
    })
}

/// Grid KL in both orderings against `½ΔbᵀF_yΔb`, with `Δb = scale·σ` halved repeatedly.
fn kl_sweep(
    cfg: &RunConfig,
    model: &InputModel,
    batch: &ScoredSampleBatch,
    kde_outputs: &SampleMatrix,
    density: &DensityGrid,
    fim_y: &FisherMatrix,
) -> Result<Option<KlSweep>, CliError> {
    let base: Vec<f64> = model.param_scales().iter().map(|s| cfg.perturbation_scale * s).collect();
    let mut levels = Vec::with_capacity(cfg.kl_halvings + 1);
    for level in 0..=cfg.kl_halvings {
        let factor = 0.5_f64.powi(level as i32);
        let delta: Vec<f64> = base.iter().map(|d| d * factor).collect();
        let half_quad_form = 0.5 * fim_y.quadratic_form(&delta)?;
        if !(half_quad_form > 0.0) {
            return Ok(None);
        }
        let weights = likelihood_ratio_weights(model, &model.perturbed(&delta)?, &batch.draws)?;
        let shifted = density_on_grid(density, kde_outputs, &weights)?;
        let kl_forward = estimate_kl(density, &shifted)?;
        let kl_reverse = estimate_kl(&shifted, density)?;
        levels.push(KlLevel {
            rel_err_forward: kl_quadratic_consistency(fim_y, &delta, kl_forward)?,
            rel_err_reverse: kl_quadratic_consistency(fim_y, &delta, kl_reverse)?,
            delta,
            half_quad_form,
            kl_forward,
            kl_reverse,
        });
    }
    let sizes: Vec<f64> = (0..levels.len()).map(|l| 0.5_f64.powi(l as i32)).collect();
    let slope = |errs: Vec<f64>| loglog_slope(&sizes, &errs).unwrap_or(f64::NAN);
    Ok(Some(KlSweep {
        slope_forward: slope(levels.iter().map(|l| l.rel_err_forward).collect()),
        slope_reverse: slope(levels.iter().map(|l| l.rel_err_reverse).collect()),
        levels,
    }))
}

fn gradient_check(
    cfg: &RunConfig,
    model: &InputModel,
    batch: &ScoredSampleBatch,
    values: &[f64],
    curve: &[infobound::SensitivityResult],
) -> Result<GradientCheck, CliError> {
    let steps: Vec<f64> = model.param_scales().iter().map(|s| cfg.fd_step * s).collect();
    let thresholds: Vec<f64> = curve.iter().map(|r| r.z).collect();
    let fd = reweighted_gradient(model, batch, values, &thresholds, cfg.direction, &steps)?;
    let names = model.param_names();
    let mut compared = 0;
    let mut max_rel_err: f64 = 0.0;
    let mut failures = Vec::new();
    for (r, fd) in curve.iter().zip(&fd) {
        for (j, (&lr, &fd)) in r.gradient.iter().zip(fd).enumerate() {
            if lr.abs() <= GRADIENT_FLOOR {
                continue;
            }
            compared += 1;
            let err = (lr - fd).abs() / lr.abs();
            max_rel_err = max_rel_err.max(err);
            if !(err < GRADIENT_REL_TOL) {
                failures.push((r.percentile.unwrap_or(f64::NAN), names[j].clone(), lr, fd));
            }
        }
    }
    Ok(GradientCheck { steps, compared, max_rel_err, failures })
}

fn identity_comparison(
    cfg: &RunConfig,
    curve: &[infobound::SensitivityResult],
) -> Result<IdentityComparison, CliError> {
    let (mu, sigma) = (cfg.inputs[0].mu, cfg.inputs[0].sigma);
    let mut compared = 0;
    let mut max_rel_err_norm_sq: f64 = 0.0;
    let mut worst_percentile = f64::NAN;
    for r in curve.iter().filter(|r| (0.05..=0.95).contains(&r.p_f)) {
        let exact = identity_analytic(mu, sigma, r.z)?.norm_sq;
        let err = (r.grad_norm_sq - exact).abs() / exact;
        compared += 1;
        if err > max_rel_err_norm_sq || worst_percentile.is_nan() {
            max_rel_err_norm_sq = err;
            worst_percentile = r.percentile.unwrap_or(f64::NAN);
        }
    }
    Ok(IdentityComparison {
        compared,
        max_rel_err_norm_sq,
        worst_percentile,
        peak_norm_sq: curve.iter().map(|r| r.grad_norm_sq).fold(0.0, f64::max),
        analytic_peak: 1.0 / (2.0 * std::f64::consts::PI * sigma * sigma),
        stationarity: identity_stationarity(mu, sigma)?,
    })
}

/// The configuration as recorded in reports: the output directory is dropped so that
/// reports do not depend on where they were written.
fn recorded_config(cfg: &RunConfig) -> RunConfig {
    RunConfig { out: std::path::PathBuf::new(), ..cfg.clone() }
}

fn run_discrete(cfg: &RunConfig) -> Result<CaseOutput, CliError> {
    let d = &cfg.discrete;
    let family = Binomial { trials: d.trials };
    let sets = all_failure_sets(d.trials + 1);
    let mut rows = Vec::with_capacity(d.thetas.len() * sets.len());
    for &theta in &d.thetas {
        for set in &sets {
            let oracle = discrete_simplex_oracle(&family, &[theta], &[d.delta], set)?;
            rows.push(OracleRow { theta, failure_set: set.clone(), oracle });
        }
    }
    let bound_checks: usize = rows.iter().map(|r| r.oracle.reports.len()).sum();
    let bound_violations = rows.iter().flat_map(|r| &r.oracle.reports).filter(|r| !r.satisfied).count();
    let checks = vec![CheckOutcome::new(
        "discrete-oracle",
        bound_violations == 0,
        format!(
            "{} failure sets x {} parameter points, {bound_violations} violations in {bound_checks} bound evaluations",
            sets.len(),
            d.thetas.len()
        ),
    )];
    let oracle_csv = output::oracle_csv(&rows);
    let report = Report::Oracle(Box::new(OracleReport {
        case: cfg.case.name().into(),
        provenance: Provenance {
            code_version: env!("CARGO_PKG_VERSION").into(),
            seed: cfg.seed,
            n_samples: 0,
            bandwidth: Vec::new(),
            grid_points: Vec::new(),
            config: recorded_config(cfg),
        },
        rows,
        checks,
        bound_checks,
        bound_violations,
    }));
    Ok(CaseOutput { files: vec![("oracle.csv", oracle_csv), ("report.json", report.to_json())], report })
}
