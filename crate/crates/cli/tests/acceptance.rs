//! Acceptance criteria 1–9, one pass/fail line each. Runs without the libtest harness
//! so the lines are always printed.

use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use infobound::bounds::{pinsker_failure_chain, titu};
use infobound::models::{beam_roots, identity_analytic, identity_stationarity};
use infobound_cli::cases::{run_case, CaseOutput, RunOptions, GRADIENT_REL_TOL, KL_MIN_SLOPE, KL_REL_TOL};
use infobound_cli::config::{CaseKind, RunConfig};
use infobound_cli::report::{CaseReport, Report};

const IDENTITY_REL_TOL: f64 = 0.05;
const IDENTITY_PEAK: f64 = 3.9789;
const IDENTITY_TRACE: f64 = 75.0;
const TRACE_REL_TOL: f64 = 1e-12;
const STATIONARITY_SLOPE: f64 = 1e-3;
const SHO_TRACE: f64 = 30300.0;
const SHO_THRESHOLDS: usize = 99;
const BEAM_TRACE: f64 = 88.58;
const BEAM_TRACE_TOL: f64 = 5e-3;
const BEAM_ROOTS: [f64; 3] = [1.875, 4.694, 7.855];
const BEAM_ROOT_TOL: f64 = 1e-3;
const BEAM_MIN_SAMPLES: usize = 20_000;
const PERTURBATION_SCALE: f64 = 1e-2;
const KL_HALVINGS: usize = 4;
const RANDOM_INSTANCES: u32 = 1000;
const REPRO_SAMPLES: usize = 5_000;

fn cached(case: CaseKind) -> &'static CaseOutput {
    static RUNS: [OnceLock<CaseOutput>; 4] = [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let i = CaseKind::ALL.iter().position(|c| *c == case).unwrap();
    RUNS[i].get_or_init(|| run_case(&RunConfig::defaults(case), &RunOptions::default()).unwrap())
}

fn case_report(case: CaseKind) -> &'static CaseReport {
    match &cached(case).report {
        Report::Case(r) => r,
        Report::Oracle(_) => panic!("{} is not a continuous case", case.name()),
    }
}

type Criterion = fn() -> Result<String, String>;

const CONTINUOUS: [CaseKind; 3] = [CaseKind::Identity, CaseKind::Sho, CaseKind::Beam];

/// Sensitivity chain and info-processing bound at every threshold.
fn chain_holds(r: &CaseReport) -> Result<(), String> {
    if r.sensitivity_bounds.len() != 2 * r.curve.len() {
        return Err(format!("{} chain reports for {} thresholds", r.sensitivity_bounds.len(), r.curve.len()));
    }
    let bad = r.sensitivity_bounds.iter().chain(&r.info_processing).filter(|b| !b.satisfied).count();
    if bad > 0 {
        return Err(format!("{bad} chain violations"));
    }
    if !(r.tr_fy <= r.tr_fx) {
        return Err(format!("tr F_y = {} exceeds tr F_x = {}", r.tr_fy, r.tr_fx));
    }
    Ok(())
}

fn criterion_1() -> Result<String, String> {
    let r = case_report(CaseKind::Identity);
    let cfg = &r.provenance.config;
    if cfg.n_samples != 100_000 || cfg.inputs[0].mu != 1.0 || cfg.inputs[0].sigma != 0.2 {
        return Err("identity defaults changed".into());
    }
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for row in r.curve.iter().filter(|row| (0.05..=0.95).contains(&row.p_f)) {
        let exact = identity_analytic(1.0, 0.2, row.z).unwrap().norm_sq;
        worst = worst.max((row.grad_norm_sq - exact).abs() / exact);
        compared += 1;
    }
    if compared == 0 || !(worst < IDENTITY_REL_TOL) {
        return Err(format!("max relative error {worst:.3e} over {compared} thresholds"));
    }
    let peak = r.curve.iter().map(|row| row.grad_norm_sq).fold(0.0, f64::max);
    let exact_peak = 1.0 / (2.0 * std::f64::consts::PI * 0.04);
    if (exact_peak - IDENTITY_PEAK).abs() > 1e-4 || !((peak - exact_peak).abs() / exact_peak < IDENTITY_REL_TOL) {
        return Err(format!("peak {peak} against {exact_peak}"));
    }
    // Every row carries the same trace, equal to 3/σ² up to rounding.
    if !((r.tr_fx - IDENTITY_TRACE).abs() <= TRACE_REL_TOL * IDENTITY_TRACE)
        || !csv_column_constant(CaseKind::Identity, "tr_Fx", r.tr_fx)
    {
        return Err(format!("tr F = {}", r.tr_fx));
    }
    if r.bound_violations != 0 {
        return Err(format!("{} bound violations", r.bound_violations));
    }
    Ok(format!("max relative error {worst:.3e} over {compared} thresholds, peak {peak:.4}, tr F = 75"))
}

fn csv_column_constant(case: CaseKind, column: &str, value: f64) -> bool {
    let csv = &cached(case).files.iter().find(|(n, _)| *n == "curve.csv").unwrap().1;
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == column).unwrap();
    lines.all(|l| l.split(',').nth(idx).unwrap().parse::<f64>().unwrap() == value)
}

fn criterion_2() -> Result<String, String> {
    let (mu, sigma) = (1.0, 0.2);
    let d = identity_stationarity(mu, sigma).unwrap();
    if d.0 != 0.0 || d.1 != 0.0 {
        return Err(format!("derivatives at the mean are {d:?}"));
    }
    let norm = |y: f64| identity_analytic(mu, sigma, y).unwrap().norm_sq;
    let h = 1e-4;
    let slope = (norm(mu + h) - norm(mu - h)) / (2.0 * h);
    if !(slope.abs() < STATIONARITY_SLOPE) {
        return Err(format!("finite-difference slope {slope:.3e}"));
    }
    Ok(format!("exact zeros, finite-difference slope {slope:.3e}"))
}

fn criterion_3() -> Result<String, String> {
    let r = case_report(CaseKind::Sho);
    let cfg = &r.provenance.config;
    let expected = [(1.0, 0.1), (0.1, 0.01)];
    if cfg.n_samples != 100_000 || cfg.inputs.iter().zip(expected).any(|(i, (m, s))| i.mu != m || i.sigma != s) {
        return Err("oscillator defaults changed".into());
    }
    if r.curve.len() != SHO_THRESHOLDS {
        return Err(format!("{} thresholds", r.curve.len()));
    }
    if !((r.tr_fx - SHO_TRACE).abs() <= TRACE_REL_TOL * SHO_TRACE) {
        return Err(format!("tr F_x = {}", r.tr_fx));
    }
    chain_holds(r)?;
    Ok(format!("chain holds at {} thresholds, tr F_y = {:.1} <= tr F_x = {}", r.curve.len(), r.tr_fy, r.tr_fx))
}

fn criterion_4() -> Result<String, String> {
    let r = case_report(CaseKind::Beam);
    let cfg = &r.provenance.config;
    let expected = [(24.85, 0.47), (7.88, 0.2)];
    if cfg.n_samples < BEAM_MIN_SAMPLES || cfg.inputs.iter().zip(expected).any(|(i, (m, s))| i.mu != m || i.sigma != s)
    {
        return Err("beam defaults changed".into());
    }
    chain_holds(r)?;
    if !((r.tr_fx - BEAM_TRACE).abs() < BEAM_TRACE_TOL) {
        return Err(format!("tr F_x = {}", r.tr_fx));
    }
    let roots = beam_roots(3).unwrap();
    if roots.iter().zip(BEAM_ROOTS).any(|(a, b)| !((a - b).abs() < BEAM_ROOT_TOL)) {
        return Err(format!("roots {roots:?}"));
    }
    Ok(format!(
        "chain holds at {} thresholds, tr F_y = {:.3} <= tr F_x = {:.3}, roots {:.4?}",
        r.curve.len(),
        r.tr_fy,
        r.tr_fx,
        roots
    ))
}

fn criterion_5() -> Result<String, String> {
    let mut summary = Vec::new();
    for case in CONTINUOUS {
        let r = case_report(case);
        let p = r.param_names.len();
        // ±σⱼ on each parameter alone plus four mixed sign patterns.
        if r.provenance.config.perturbation_scale != PERTURBATION_SCALE || r.perturbations.len() != 2 * p + 4 {
            return Err(format!("{}: {} perturbations", case.name(), r.perturbations.len()));
        }
        for s in &r.perturbations {
            if s.thresholds_checked != r.curve.len() || s.violations_x + s.violations_y > 0 {
                return Err(format!(
                    "{} at {:?}: {} / {} violations",
                    case.name(),
                    s.delta,
                    s.violations_x,
                    s.violations_y
                ));
            }
        }
        summary.push(format!("{} {}x{}", case.name(), r.perturbations.len(), r.curve.len()));
    }
    Ok(format!("no violations against F_x or F_y ({})", summary.join(", ")))
}

fn criterion_6() -> Result<String, String> {
    let mut summary = Vec::new();
    for case in CONTINUOUS {
        let r = case_report(case);
        let kl = r.kl.as_ref().ok_or_else(|| format!("{}: no KL sweep", case.name()))?;
        if kl.levels.len() != KL_HALVINGS + 1 || r.provenance.config.perturbation_scale != PERTURBATION_SCALE {
            return Err(format!("{}: {} KL levels", case.name(), kl.levels.len()));
        }
        let first = &kl.levels[0];
        if !(first.rel_err_forward < KL_REL_TOL && first.rel_err_reverse < KL_REL_TOL) {
            return Err(format!(
                "{}: relative errors {:.3e}/{:.3e}",
                case.name(),
                first.rel_err_forward,
                first.rel_err_reverse
            ));
        }
        if !(kl.slope_forward >= KL_MIN_SLOPE && kl.slope_reverse >= KL_MIN_SLOPE) {
            return Err(format!("{}: slopes {:.3}/{:.3}", case.name(), kl.slope_forward, kl.slope_reverse));
        }
        summary.push(format!(
            "{} {:.2e}/{:.2e} slope {:.2}/{:.2}",
            case.name(),
            first.rel_err_forward,
            first.rel_err_reverse,
            kl.slope_forward,
            kl.slope_reverse
        ));
    }
    Ok(summary.join(", "))
}

fn criterion_7() -> Result<String, String> {
    let cfg = Config { cases: RANDOM_INSTANCES, failure_persistence: None, ..Config::default() };
    let mut runner =
        TestRunner::new_with_rng(cfg.clone(), proptest::test_runner::TestRng::deterministic_rng(cfg.rng_algorithm));
    runner
        .run(&prop::collection::vec((0.0..100.0f64, 1e-3..100.0f64), 1..20), |pairs| {
            let (u, v): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            prop_assert!(titu(&u, &v).unwrap().satisfied);
            Ok(())
        })
        .map_err(|e| format!("Titu: {e}"))?;

    let mut runner =
        TestRunner::new_with_rng(cfg.clone(), proptest::test_runner::TestRng::deterministic_rng(cfg.rng_algorithm));
    let pmf_pair = (2..12usize).prop_flat_map(|d| {
        (
            prop::collection::vec(1e-6..1.0f64, d),
            prop::collection::vec(1e-6..1.0f64, d),
            prop::collection::vec(any::<bool>(), d),
        )
    });
    runner
        .run(&pmf_pair, |(p, q, mask)| {
            let normalise = |v: Vec<f64>| {
                let s: f64 = v.iter().sum();
                v.into_iter().map(|x| x / s).collect::<Vec<_>>()
            };
            let (p, q) = (normalise(p), normalise(q));
            let set: Vec<usize> = mask.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i).collect();
            for r in pinsker_failure_chain(&p, &q, &set).unwrap() {
                prop_assert!(r.satisfied, "{}: {} > {}", r.label, r.lhs, r.rhs);
            }
            Ok(())
        })
        .map_err(|e| format!("Pinsker: {e}"))?;

    let oracle = &cached(CaseKind::DiscreteOracle).report;
    let Report::Oracle(o) = oracle else { return Err("discrete oracle produced a case report".into()) };
    if o.rows.len() != 64 * 3 || o.bound_violations != 0 || !oracle.all_passed() {
        return Err(format!("{} oracle rows, {} violations", o.rows.len(), o.bound_violations));
    }
    Ok(format!(
        "Titu and Pinsker on {RANDOM_INSTANCES} instances each, binomial(5) oracle {} rows with no violations",
        o.rows.len()
    ))
}

fn criterion_8() -> Result<String, String> {
    let mut summary = Vec::new();
    for case in CONTINUOUS {
        let g = &case_report(case).gradient_check;
        if g.compared == 0 || !g.failures.is_empty() || !(g.max_rel_err < GRADIENT_REL_TOL) {
            return Err(format!("{}: {} of {} components fail", case.name(), g.failures.len(), g.compared));
        }
        summary.push(format!("{} {} components max {:.1e}", case.name(), g.compared, g.max_rel_err));
    }
    Ok(summary.join(", "))
}

fn repro_files(case: CaseKind, threads: usize) -> Vec<(&'static str, String)> {
    let mut cfg = RunConfig::defaults(case);
    if case != CaseKind::DiscreteOracle {
        cfg.n_samples = REPRO_SAMPLES;
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| run_case(&cfg, &RunOptions::default())).unwrap().files
}

fn criterion_9() -> Result<String, String> {
    for case in CaseKind::ALL {
        let reference = repro_files(case, 1);
        for threads in [1, 4] {
            let again = repro_files(case, threads);
            for ((name, a), (_, b)) in reference.iter().zip(&again) {
                if a != b {
                    return Err(format!("{} {name} differs with {threads} threads", case.name()));
                }
            }
        }
        let names: Vec<_> = reference.iter().map(|(n, _)| *n).collect();
        if case != CaseKind::DiscreteOracle && !(names.contains(&"curve.csv") && names.contains(&"report.json")) {
            return Err(format!("{} wrote {names:?}", case.name()));
        }
    }
    Ok(format!("all cases byte-identical across reruns and 1/4 threads at N = {REPRO_SAMPLES}"))
}

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("identity closed form", criterion_1),
        ("stationarity at the mean", criterion_2),
        ("oscillator bound chain", criterion_3),
        ("beam bound chain", criterion_4),
        ("perturbation bound", criterion_5),
        ("KL consistency", criterion_6),
        ("Titu, Pinsker and discrete oracle", criterion_7),
        ("LR gradient against finite differences", criterion_8),
        ("reproducibility", criterion_9),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
