use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use infobound_cli::output::write_files;
use infobound_cli::verify::{verify, verify_config};
use infobound_cli::{run_case, CaseKind, CliError, RunConfig, RunOptions};

/// Likelihood-ratio failure-probability sensitivities and their information bounds.
#[derive(Parser)]
#[command(name = "infobound", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case and write curve.csv, density.csv (or oracle.csv) and report.json.
    Run(RunArgs),
    /// Run the invariant suite at reduced sample counts.
    Verify(VerifyArgs),
    /// Print the full default configuration of a case as TOML.
    PrintConfig {
        /// identity, sho, beam or discrete-oracle.
        #[arg(long, default_value = "identity")]
        case: String,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// identity, sho, beam or discrete-oracle.
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo sample count.
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Negate every score; the gradient check must then fail.
    #[arg(long, hide = true)]
    corrupt_score_sign: bool,
}

impl Common {
    fn case(&self) -> Result<Option<CaseKind>, CliError> {
        self.case.as_deref().map(CaseKind::parse).transpose()
    }

    /// Configuration from `--config` or `base(case)`, with flag overrides applied.
    fn resolve(&self, case: Option<CaseKind>, base: fn(CaseKind) -> RunConfig) -> Result<RunConfig, CliError> {
        let mut cfg = match (&self.config, case) {
            (Some(path), case) => {
                let cfg = RunConfig::load(path)?;
                if let Some(case) = case.filter(|c| *c != cfg.case) {
                    return Err(CliError::Usage(format!(
                        "--case {} conflicts with case {} in {}",
                        case.name(),
                        cfg.case.name(),
                        path.display()
                    )));
                }
                cfg
            }
            (None, Some(case)) => base(case),
            (None, None) => return Err(CliError::Usage("one of --config or --case is required".into())),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(n) = self.samples {
            cfg.n_samples = n;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn init_threads(&self) -> Result<(), CliError> {
        if let Some(n) = self.threads {
            if n == 0 {
                return Err(CliError::Usage("--threads must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
        }
        Ok(())
    }
}

fn run(args: &RunArgs) -> Result<bool, CliError> {
    args.common.init_threads()?;
    let cfg = args.common.resolve(args.common.case()?, RunConfig::defaults)?;
    let output = run_case(&cfg, &RunOptions::default())?;
    write_files(&cfg.out, &output.files)?;
    let report = &output.report;
    for c in report.checks() {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("wrote {}", cfg.out.display());
    if !report.bounds_hold() {
        eprintln!("{} bound violations", report.bound_violations());
    }
    Ok(report.bounds_hold())
}

fn run_verify(args: &VerifyArgs) -> Result<bool, CliError> {
    let common = &args.common;
    common.init_threads()?;
    let configs = match (&common.config, common.case()?) {
        (None, None) => CaseKind::ALL
            .iter()
            .map(|&case| {
                let source = Common { case: Some(case.name().into()), out: None, ..common.clone() };
                let mut cfg = source.resolve(Some(case), verify_config)?;
                if let Some(out) = &common.out {
                    cfg.out = out.join(case.name());
                }
                Ok(cfg)
            })
            .collect::<Result<Vec<_>, CliError>>()?,
        (_, case) => vec![common.resolve(case, verify_config)?],
    };
    let verdicts = verify(&configs, &RunOptions { corrupt_score_sign: args.corrupt_score_sign })?;
    let mut failures = Vec::new();
    for (v, cfg) in verdicts.iter().zip(&configs) {
        for line in v.lines() {
            println!("{line}");
            if line.starts_with("FAIL") {
                failures.push(line);
            }
        }
        if common.out.is_some() {
            write_files(&cfg.out, &v.output.files)?;
        }
    }
    if failures.is_empty() {
        println!("verify: all checks passed");
    } else {
        eprintln!("verify: {} failed checks", failures.len());
        for f in &failures {
            eprintln!("  {f}");
        }
    }
    Ok(failures.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Verify(args) => run_verify(args),
        Command::PrintConfig { case } => CaseKind::parse(case).map(|c| {
            print!("{}", RunConfig::defaults(c).to_toml());
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
