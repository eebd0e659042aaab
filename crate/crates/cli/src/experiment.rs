//! The end-to-end pipeline: mesh, assembly, dense inverse, clustering,
//! block partition, rank sweep and decay fit.

use std::fmt;
use std::fs;
use std::time::{Duration, Instant};

use hgraded_core::fem::{assemble_stiffness, solve_dense_inverse};
use hgraded_core::hmatrix::{
    build_block_partition, build_cluster_tree, dof_boxes, error_sweep, fit_decay, fit_decay_series,
    BlockKind, DecayFit, ErrorEntry, ErrorReport, HMatrixError,
};
use hgraded_core::mesh::{make_graded_mesh, mesh_widths};
use log::info;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};

const COERCIVITY_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Mesh,
    Assemble,
    Invert,
    Cluster,
    Partition,
    Compress,
    Fit,
    Output,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::Mesh => "mesh",
            Phase::Assemble => "assemble",
            Phase::Invert => "invert",
            Phase::Cluster => "cluster",
            Phase::Partition => "partition",
            Phase::Compress => "compress",
            Phase::Fit => "fit",
            Phase::Output => "output",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("system has {n} unknowns, above the limit {limit} (raise it with --large)")]
    TooLarge { n: usize, limit: usize },
    #[error("{phase} phase failed: {source}")]
    Phase {
        phase: Phase,
        source: Box<dyn std::error::Error + Send + Sync>,
    },
}

impl RunError {
    /// 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::TooLarge { .. } => 2,
            RunError::Phase { .. } => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub n: usize,
    pub h_min: f64,
    pub h_max: f64,
    pub depth: usize,
    pub sparsity: usize,
    pub blocks: usize,
    pub admissible_blocks: usize,
    pub c_small: usize,
    pub c_adm: f64,
    pub entries: Vec<ErrorEntry>,
    /// Fit of the computable bound; `None` when the rank range is too short
    /// or every sample sits at round-off.
    pub fit: Option<DecayFit>,
    /// Fit of the measured spectral error, when it was computed and enough
    /// samples sit above round-off.
    pub spectral_fit: Option<DecayFit>,
    pub phase_seconds: Vec<(Phase, f64)>,
    pub total_seconds: f64,
}

impl RunReport {
    pub fn error_report(&self) -> ErrorReport {
        ErrorReport {
            entries: self.entries.clone(),
            depth: self.depth,
        }
    }

    /// `r,bound,spectral_error,memory_units`
    pub fn csv(&self) -> String {
        self.error_report().to_csv()
    }

    pub fn phase_sum(&self) -> f64 {
        self.phase_seconds.iter().map(|p| p.1).sum()
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "N               {}", self.n)?;
        writeln!(f, "h_min           {:.6e}", self.h_min)?;
        writeln!(f, "h_max           {:.6e}", self.h_max)?;
        writeln!(f, "tree depth      {}", self.depth)?;
        writeln!(f, "sparsity        {}", self.sparsity)?;
        writeln!(
            f,
            "blocks          {} ({} admissible)",
            self.blocks, self.admissible_blocks
        )?;
        writeln!(f, "C_small         {}", self.c_small)?;
        writeln!(f, "C_adm           {}", self.c_adm)?;
        writeln!(f)?;
        writeln!(
            f,
            "{:>4} {:>14} {:>14} {:>14} {:>12}",
            "r", "bound", "block max", "spectral", "memory"
        )?;
        for e in &self.entries {
            let s = e
                .spectral_error
                .map_or_else(|| "-".to_owned(), |v| format!("{v:.6e}"));
            writeln!(
                f,
                "{:>4} {:>14.6e} {:>14.6e} {:>14} {:>12}",
                e.r, e.bound, e.max_block_error, s, e.memory_units
            )?;
        }
        writeln!(f)?;
        for (name, fit) in [("bound", &self.fit), ("spectral", &self.spectral_fit)] {
            match fit {
                Some(s) => writeln!(
                    f,
                    "{name:<9} decay  ln(err) ≈ {:.4} + {:.4} r   (R² {:.4}, {} samples)",
                    s.intercept, s.rate, s.r_squared, s.samples_used
                )?,
                None => writeln!(f, "{name:<9} decay  not fitted")?,
            }
        }
        writeln!(f)?;
        for (phase, secs) in &self.phase_seconds {
            writeln!(f, "{:<10} {:>10.3} s", phase.to_string(), secs)?;
        }
        writeln!(f, "{:<10} {:>10.3} s", "total", self.total_seconds)
    }
}

struct Timer {
    phases: Vec<(Phase, f64)>,
}

impl Timer {
    fn run<T, E>(&mut self, phase: Phase, f: impl FnOnce() -> Result<T, E>) -> Result<T, RunError>
    where
        E: std::error::Error + Send + Sync + 'static,
    {
        let t = Instant::now();
        let out = f().map_err(|e| RunError::Phase {
            phase,
            source: Box::new(e),
        });
        let secs = t.elapsed().as_secs_f64();
        info!("{phase}: {secs:.3} s");
        self.phases.push((phase, secs));
        out
    }
}

/// Runs the pipeline and writes `errors.csv` and `report.txt` into the
/// configured output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let mut report = run_pipeline(cfg)?;
    let start = Instant::now();
    let dir = &cfg.output_dir;
    let out = (|| -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("errors.csv"), report.csv())?;
        Ok(())
    })();
    let secs = start.elapsed().as_secs_f64();
    report.phase_seconds.push((Phase::Output, secs));
    report.total_seconds += secs;
    out.map_err(|e| RunError::Phase {
        phase: Phase::Output,
        source: Box::new(e),
    })?;
    fs::write(dir.join("report.txt"), report.to_string()).map_err(|e| RunError::Phase {
        phase: Phase::Output,
        source: Box::new(e),
    })?;
    Ok(report)
}

/// The pipeline without any file output.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut timer = Timer { phases: Vec::new() };

    let mesh = timer.run(Phase::Mesh, || make_graded_mesh(&cfg.grading))?;
    let (h_min, h_max) = mesh_widths(&mesh);

    let coeffs = cfg.coefficients.coefficients();
    let (a, dofmap) = timer.run(Phase::Assemble, || {
        coeffs.check_coercivity(COERCIVITY_SAMPLES, 0)?;
        assemble_stiffness(&mesh, &coeffs, cfg.p)
    })?;
    let n = dofmap.len();
    if n > cfg.dof_limit() {
        return Err(RunError::TooLarge {
            n,
            limit: cfg.dof_limit(),
        });
    }
    info!("N = {n}, h_min = {h_min:.3e}");

    let a_inv = timer.run(Phase::Invert, || solve_dense_inverse(&a))?;
    let tree = timer.run(Phase::Cluster, || {
        build_cluster_tree(&dof_boxes(&dofmap), cfg.c_small)
    })?;
    let partition = timer.run(Phase::Partition, || build_block_partition(&tree, cfg.c_adm))?;
    let sweep = timer.run(Phase::Compress, || {
        error_sweep(&a_inv, &partition, &cfg.ranks(), cfg.spectral)
    })?;
    let (fit, spectral_fit) = timer.run(Phase::Fit, || {
        let fit = fit_or_none(fit_decay(&sweep))?;
        let spectral: Option<Vec<f64>> = sweep.entries.iter().map(|e| e.spectral_error).collect();
        let spectral_fit = match spectral {
            Some(s) => fit_or_none(fit_decay_series(&sweep.ranks(), &s))?,
            None => None,
        };
        Ok::<_, HMatrixError>((fit, spectral_fit))
    })?;

    Ok(RunReport {
        n,
        h_min,
        h_max,
        depth: partition.depth(),
        sparsity: partition.sparsity_constant(),
        blocks: partition.blocks().len(),
        admissible_blocks: partition.count(BlockKind::Admissible),
        c_small: cfg.c_small,
        c_adm: cfg.c_adm,
        entries: sweep.entries,
        fit,
        spectral_fit,
        phase_seconds: timer.phases,
        total_seconds: secs(start.elapsed()),
    })
}

/// Short rank ranges and fully converged sweeps are legitimate runs without
/// a rate; anything else is a numerical failure.
fn fit_or_none(fit: Result<DecayFit, HMatrixError>) -> Result<Option<DecayFit>, HMatrixError> {
    match fit {
        Ok(f) => Ok(Some(f)),
        Err(HMatrixError::TooFewSamples(_) | HMatrixError::AllAtFloor) => Ok(None),
        Err(e) => Err(e),
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use hgraded_core::mesh::{GradingSpec, TargetEdge};

    fn small(layers: usize) -> ExperimentConfig {
        ExperimentConfig {
            grading: GradingSpec::exponential(0.25, TargetEdge::Left, layers),
            r_max: 6,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn small_run_is_complete() {
        let r = run_pipeline(&small(10)).unwrap();
        assert!(r.n > 0 && r.depth > 0 && r.sparsity > 0);
        assert_eq!(r.entries.len(), 6);
        let fit = r.fit.unwrap();
        assert!(fit.rate.is_finite() && fit.rate < 0.0);
        for e in &r.entries {
            assert!(e.bound >= e.max_block_error);
            assert!(e.spectral_error.unwrap() <= e.bound * (1.0 + 1e-9));
        }
        let sum = r.phase_sum();
        assert!(
            (sum - r.total_seconds).abs() <= 0.05 * r.total_seconds.max(1e-3),
            "{sum} vs {}",
            r.total_seconds
        );
    }

    #[test]
    fn full_rank_is_exact() {
        let mut cfg = small(3);
        let n = run_pipeline(&cfg).unwrap().n;
        cfg.r_min = n;
        cfg.r_max = n;
        let r = run_pipeline(&cfg).unwrap();
        assert!(r.entries[0].spectral_error.unwrap() <= 1e-10);
        assert_eq!(r.entries[0].bound, 0.0);
        assert!(r.fit.is_none());
    }

    #[test]
    fn size_guard() {
        let cfg = ExperimentConfig {
            r_max: 4,
            ..ExperimentConfig::default()
        };
        let big = ExperimentConfig {
            grading: GradingSpec::exponential(0.25, TargetEdge::Left, 40),
            ..cfg
        };
        assert!(matches!(run_pipeline(&big), Err(RunError::TooLarge { .. })));
        assert_eq!(run_pipeline(&big).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn error_labels_and_codes() {
        let err = RunError::Phase {
            phase: Phase::Assemble,
            source: "x".into(),
        };
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().starts_with("assemble"));
        let bad = run_pipeline(&ExperimentConfig {
            c_adm: -1.0,
            ..small(3)
        })
        .unwrap_err();
        assert_eq!(bad.exit_code(), 2);
    }

    #[test]
    fn convection_diffusion_preset_runs() {
        let cfg = ExperimentConfig {
            coefficients: crate::config::CoefficientPreset::ConvectionDiffusion {
                a2: [0.5, 0.5],
                a3: 1.0,
            },
            ..small(10)
        };
        let r = run_pipeline(&cfg).unwrap();
        assert!(r.fit.unwrap().rate < 0.0);
    }
}
