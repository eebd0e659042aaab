//! Overlay of the bound curves of several runs over a shared rank range.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::config::ExperimentConfig;
use crate::experiment::{run_pipeline, RunError, RunReport};

/// Largest accepted relative spread of the fitted rates.
pub const RATE_SPREAD_TOL: f64 = 0.3;

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("nothing to compare")]
    NoConfigs,
    #[error("run {index} uses ranks {got:?}, run 1 uses {expected:?}")]
    MismatchedRanks {
        index: usize,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("run {index}: {source}")]
    Run { index: usize, source: RunError },
    #[error("run {index} has no fitted rate")]
    NoRate { index: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CompareError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CompareError::NoConfigs | CompareError::MismatchedRanks { .. } => 2,
            CompareError::Run { source, .. } => source.exit_code(),
            CompareError::NoRate { .. } | CompareError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub runs: Vec<RunReport>,
    pub rates: Vec<f64>,
}

impl Comparison {
    /// `(max − min) / max |rate|`
    pub fn rate_spread(&self) -> f64 {
        let max = self.rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.rates.iter().copied().fold(f64::INFINITY, f64::min);
        let scale = self.rates.iter().map(|r| r.abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            0.0
        } else {
            (max - min) / scale
        }
    }

    pub fn rates_agree(&self) -> bool {
        self.rate_spread() <= RATE_SPREAD_TOL
    }

    /// `r,bound_1,…,bound_k`, one bound column per run.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r");
        for i in 1..=self.runs.len() {
            s.push_str(&format!(",bound_{i}"));
        }
        s.push('\n');
        for (row, entry) in self.runs[0].entries.iter().enumerate() {
            s.push_str(&entry.r.to_string());
            for run in &self.runs {
                s.push_str(&format!(",{:.17e}", run.entries[row].bound));
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_csv())
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>4} {:>8} {:>10} {:>8}", "run", "N", "rate", "R²")?;
        for (i, (run, rate)) in self.runs.iter().zip(&self.rates).enumerate() {
            let r2 = run.fit.map_or(f64::NAN, |fit| fit.r_squared);
            writeln!(f, "{:>4} {:>8} {:>10.4} {:>8.4}", i + 1, run.n, rate, r2)?;
        }
        write!(
            f,
            "rate spread {:.1}% (limit {:.0}%)",
            100.0 * self.rate_spread(),
            100.0 * RATE_SPREAD_TOL
        )
    }
}

/// Runs every config and collects their bound decay rates. The configs are
/// expected to differ in problem size; they must share the rank range.
pub fn compare_three_sizes(configs: &[ExperimentConfig]) -> Result<Comparison, CompareError> {
    let first = configs.first().ok_or(CompareError::NoConfigs)?;
    let expected = (first.r_min, first.r_max);
    for (i, c) in configs.iter().enumerate() {
        if (c.r_min, c.r_max) != expected {
            return Err(CompareError::MismatchedRanks {
                index: i + 1,
                expected,
                got: (c.r_min, c.r_max),
            });
        }
    }
    let mut runs = Vec::with_capacity(configs.len());
    let mut rates = Vec::with_capacity(configs.len());
    for (i, c) in configs.iter().enumerate() {
        let run = run_pipeline(c).map_err(|source| CompareError::Run {
            index: i + 1,
            source,
        })?;
        rates.push(run.fit.ok_or(CompareError::NoRate { index: i + 1 })?.rate);
        runs.push(run);
    }
    Ok(Comparison { runs, rates })
}
