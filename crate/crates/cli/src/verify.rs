//! The invariant suite run by `infobound verify`.

use crate::cases::{run_case, CaseOutput, RunOptions};
use crate::config::{CaseKind, RunConfig};
use crate::CliError;

/// Beam sample count used by `verify`; the other cases run at their defaults.
pub const VERIFY_BEAM_SAMPLES: usize = 5_000;

/// Shipped configuration for `case` with sample counts reduced for CI.
pub fn verify_config(case: CaseKind) -> RunConfig {
    let mut cfg = RunConfig::defaults(case);
    if case == CaseKind::Beam {
        cfg.n_samples = VERIFY_BEAM_SAMPLES;
    }
    cfg
}

/// One case's check results.
#[derive(Debug, Clone)]
pub struct CaseVerdict {
    pub case: CaseKind,
    pub output: CaseOutput,
}

impl CaseVerdict {
    pub fn passed(&self) -> bool {
        self.output.report.all_passed()
    }

    /// `PASS`/`FAIL` line per check.
    pub fn lines(&self) -> Vec<String> {
        self.output
            .report
            .checks()
            .iter()
            .map(|c| {
                format!("{} {} {}: {}", if c.passed { "PASS" } else { "FAIL" }, self.case.name(), c.name, c.detail)
            })
            .collect()
    }
}

/// Runs every configuration in `configs`.
pub fn verify(configs: &[RunConfig], opts: &RunOptions) -> Result<Vec<CaseVerdict>, CliError> {
    configs.iter().map(|cfg| Ok(CaseVerdict { case: cfg.case, output: run_case(cfg, opts)? })).collect()
}
