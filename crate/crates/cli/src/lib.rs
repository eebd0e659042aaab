//! Experiment driver: a config-driven pipeline from graded mesh to H-matrix
//! error sweep, the polynomial identity suite and multi-size comparisons.

pub mod compare;
pub mod config;
pub mod experiment;
pub mod identities;

pub use compare::{compare_three_sizes, CompareError, Comparison, RATE_SPREAD_TOL};
pub use config::{CoefficientPreset, ConfigError, ExperimentConfig, DESK_MAX_DOFS};
pub use experiment::{run_experiment, run_pipeline, Phase, RunError, RunReport};
pub use identities::{run_identity_suite, Check, CheckResult, Outcome, SuiteOptions, SuiteReport};

/// Exit status for a passing run.
pub const EXIT_OK: i32 = 0;
/// A suite or comparison check failed.
pub const EXIT_SUITE_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
