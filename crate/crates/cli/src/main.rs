use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hgraded::{
    compare_three_sizes, run_experiment, run_identity_suite, ExperimentConfig, SuiteOptions,
    EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, EXIT_SUITE_FAILURE,
};
use hgraded_core::mesh::{
    export_mesh, make_graded_mesh, mesh_widths, Alpha, GradingSpec, TargetEdge, Termination,
};

#[derive(Parser)]
#[command(
    name = "hgraded",
    version,
    about = "H-matrix approximability of inverse FEM matrices on graded meshes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Override a config key, e.g. `--set layers=17`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Allow systems above the desk-scale size limit.
    #[arg(long)]
    large: bool,
}

impl Overrides {
    fn all(&self) -> Vec<String> {
        let mut v = self.set.clone();
        if self.large {
            v.push("large=true".into());
        }
        v
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the rank sweep for one configuration.
    Run {
        /// Config file; omitted keys take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the polynomial identity suite.
    Verify {
        /// Dimensions to check (default 1 2 3).
        #[arg(long = "d", num_args = 1..)]
        dims: Vec<usize>,
        /// Degrees to check (default 1..=6).
        #[arg(long = "p", num_args = 1..)]
        degrees: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Flip the sign of c_k in the telescoping check (mutation test).
        #[arg(long, value_name = "K")]
        flip_coefficient: Option<usize>,
    },
    /// Mesh utilities.
    Mesh {
        #[command(subcommand)]
        command: MeshCommand,
    },
    /// Run several configs and overlay their bound curves.
    Compare {
        #[arg(required = true, num_args = 1..)]
        configs: Vec<PathBuf>,
        /// Overlay CSV path.
        #[arg(long, default_value = "compare.csv")]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Subcommand)]
enum MeshCommand {
    /// Generate a graded mesh of the unit square and write it in text form.
    Gen {
        /// Grading exponent, a number ≥ 1 or `inf`.
        #[arg(long, default_value = "inf")]
        alpha: Alpha,
        #[arg(long, default_value_t = 0.25)]
        h: f64,
        #[arg(long, default_value = "left")]
        edge: TargetEdge,
        #[arg(long)]
        layers: Option<usize>,
        #[arg(long, conflicts_with = "layers")]
        h_floor: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match Cli::parse().command {
        Command::Run { config, overrides } => run(config, &overrides),
        Command::Verify {
            dims,
            degrees,
            samples,
            seed,
            flip_coefficient,
        } => {
            let d = SuiteOptions::default();
            let opts = SuiteOptions {
                dims: if dims.is_empty() { d.dims } else { dims },
                degrees: if degrees.is_empty() {
                    d.degrees
                } else {
                    degrees
                },
                samples,
                seed,
                flip_coefficient,
            };
            let report = run_identity_suite(&opts);
            println!("{report}");
            if report.passed() {
                EXIT_OK
            } else {
                EXIT_SUITE_FAILURE
            }
        }
        Command::Mesh {
            command:
                MeshCommand::Gen {
                    alpha,
                    h,
                    edge,
                    layers,
                    h_floor,
                    out,
                },
        } => {
            let termination = layers
                .map(Termination::Layers)
                .or(h_floor.map(Termination::HFloor));
            mesh_gen(
                GradingSpec {
                    alpha,
                    h,
                    target_edge: edge,
                    termination,
                },
                &out,
            )
        }
        Command::Compare {
            configs,
            out,
            overrides,
        } => compare(&configs, &out, &overrides),
    };
    ExitCode::from(code as u8)
}

fn run(config: Option<PathBuf>, overrides: &Overrides) -> i32 {
    let cfg = match &config {
        Some(path) => ExperimentConfig::load(path, &overrides.all()),
        None => ExperimentConfig::parse("", &overrides.all()),
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match run_experiment(&cfg) {
        Ok(report) => {
            println!("{report}");
            println!("wrote {}", cfg.output_dir.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn mesh_gen(spec: GradingSpec, out: &std::path::Path) -> i32 {
    let mesh = match make_graded_mesh(&spec) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = export_mesh(&mesh, out) {
        eprintln!("error: {e}");
        return EXIT_NUMERIC;
    }
    let (h_min, h_max) = mesh_widths(&mesh);
    println!(
        "{} vertices, {} elements, h_min {h_min:.3e}, h_max {h_max:.3e}, max shape ratio {:.3}",
        mesh.num_vertices(),
        mesh.num_elements(),
        mesh.max_shape_ratio()
    );
    EXIT_OK
}

fn compare(paths: &[PathBuf], out: &std::path::Path, overrides: &Overrides) -> i32 {
    let configs: Result<Vec<_>, _> = paths
        .iter()
        .map(|p| ExperimentConfig::load(p, &overrides.all()))
        .collect();
    let configs = match configs {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let cmp = match compare_three_sizes(&configs) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    println!("{cmp}");
    if let Err(e) = cmp.write_csv(out) {
        eprintln!("error: {e}");
        return EXIT_NUMERIC;
    }
    println!("wrote {}", out.display());
    if cmp.rates_agree() {
        EXIT_OK
    } else {
        EXIT_SUITE_FAILURE
    }
}
