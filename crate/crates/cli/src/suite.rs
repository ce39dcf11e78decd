//! Runs the verification checks in parallel and writes one report per line.

use std::io::Write;

use rayon::prelude::*;
use volsamp_core::verify::{check, matching_checks, Faults, McReport};

use crate::error::Result;

pub struct SuiteOutcome {
    pub reports: Vec<McReport>,
}

impl SuiteOutcome {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(McReport::passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }
}

/// Checks whose name contains `pattern` (all when `None`). An empty
/// selection is not an error.
pub fn run_verify<W: Write>(
    pattern: Option<&str>,
    budget_scale: f64,
    seed: u64,
    faults: &Faults,
    mut out: W,
) -> Result<SuiteOutcome> {
    let names = matching_checks(pattern);
    if names.is_empty() {
        log::warn!(
            "no verification check matches `{}`",
            pattern.unwrap_or_default()
        );
    }
    let reports = names
        .par_iter()
        .map(|name| {
            let r = check(name, budget_scale, seed, faults)?;
            log::info!("{name}: {}", r.verdict);
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    for r in &reports {
        writeln!(out, "{r}")?;
    }
    out.flush()?;
    Ok(SuiteOutcome { reports })
}
