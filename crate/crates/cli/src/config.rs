//! Flat `key = value` experiment configuration.
//!
//! ```text
//! alpha = "inf"          # or a number ≥ 1
//! h = 0.25
//! edge = "left"
//! layers = 21
//! p = 1
//! coefficients = "laplace"   # or "convection-diffusion" with a2, a3
//! c_adm = 2.0
//! r_min = 1
//! r_max = 10
//! output_dir = "out"
//! ```

use std::path::{Path, PathBuf};

use hgraded_core::fem::{Coefficients, MAX_FEM_DEGREE};
use hgraded_core::hmatrix::{default_c_small, DEFAULT_C_ADM};
use hgraded_core::mesh::{Alpha, GradingSpec, TargetEdge, Termination};
use serde::Deserialize;
use thiserror::Error;

/// Largest system dimension accepted without `large`.
pub const DESK_MAX_DOFS: usize = 8_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("bad override {0:?}, expected key=value")]
    BadOverride(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientPreset {
    /// `a1 = I`, `a2 = 0`, `a3 = 0`
    Laplace,
    /// `a1 = I` with constant convection `a2` and reaction `a3 ≥ 0`.
    ConvectionDiffusion { a2: [f64; 2], a3: f64 },
}

impl CoefficientPreset {
    pub const DEFAULT_CONVECTION: [f64; 2] = [0.5, 0.5];
    pub const DEFAULT_REACTION: f64 = 1.0;

    pub fn coefficients(&self) -> Coefficients {
        let id = [[1.0, 0.0], [0.0, 1.0]];
        match *self {
            Self::Laplace => Coefficients::laplace(),
            Self::ConvectionDiffusion { a2, a3 } => Coefficients::constant(id, a2, a3),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Laplace => "laplace",
            Self::ConvectionDiffusion { .. } => "convection-diffusion",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub grading: GradingSpec,
    pub p: usize,
    pub coefficients: CoefficientPreset,
    pub c_small: usize,
    pub c_adm: f64,
    pub r_min: usize,
    pub r_max: usize,
    pub output_dir: PathBuf,
    /// Also measure `‖A⁻¹ − H_r‖₂` for every `r`.
    pub spectral: bool,
    /// Lift the desk-scale size guard.
    pub large: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grading: GradingSpec::exponential(0.25, TargetEdge::Left, 21),
            p: 1,
            coefficients: CoefficientPreset::Laplace,
            c_small: default_c_small(1),
            c_adm: DEFAULT_C_ADM,
            r_min: 1,
            r_max: 10,
            output_dir: PathBuf::from("out"),
            spectral: true,
            large: false,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    alpha: Option<toml::Value>,
    h: Option<f64>,
    edge: Option<String>,
    layers: Option<usize>,
    h_floor: Option<f64>,
    p: Option<usize>,
    coefficients: Option<String>,
    a2: Option<[f64; 2]>,
    a3: Option<f64>,
    c_small: Option<usize>,
    c_adm: Option<f64>,
    r_min: Option<usize>,
    r_max: Option<usize>,
    output_dir: Option<PathBuf>,
    spectral: Option<bool>,
    large: Option<bool>,
}

impl ExperimentConfig {
    /// Parses config text, applies `key=value` overrides on top, validates.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table: toml::Table = text.parse()?;
        for o in overrides {
            let (key, value) = parse_override(o)?;
            table.insert(key, value);
        }
        let raw: RawConfig = toml::Value::Table(table).try_into()?;
        let cfg = Self::from_raw(raw)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text, overrides)
    }

    fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let d = Self::default();
        let alpha = match raw.alpha {
            None => d.grading.alpha,
            Some(toml::Value::String(s)) => s.parse().map_err(ConfigError::Invalid)?,
            Some(toml::Value::Float(a)) if a == f64::INFINITY => Alpha::Infinite,
            Some(toml::Value::Float(a)) => Alpha::Finite(a),
            Some(toml::Value::Integer(a)) => Alpha::Finite(a as f64),
            Some(v) => {
                return Err(ConfigError::Invalid(format!(
                    "alpha must be a number or \"inf\", got {v}"
                )))
            }
        };
        let edge = match raw.edge {
            None => d.grading.target_edge,
            Some(s) => s.parse().map_err(ConfigError::Invalid)?,
        };
        let termination = match (raw.layers, raw.h_floor) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::Invalid(
                    "give either layers or h_floor, not both".into(),
                ))
            }
            (Some(l), None) => Some(Termination::Layers(l)),
            (None, Some(h)) => Some(Termination::HFloor(h)),
            (None, None) if alpha == Alpha::Infinite => d.grading.termination,
            (None, None) => None,
        };
        let grading = GradingSpec {
            alpha,
            h: raw.h.unwrap_or(d.grading.h),
            target_edge: edge,
            termination,
        };
        let coefficients = match raw.coefficients.as_deref() {
            None | Some("laplace") => {
                if raw.a2.is_some() || raw.a3.is_some() {
                    return Err(ConfigError::Invalid(
                        "a2/a3 need coefficients = \"convection-diffusion\"".into(),
                    ));
                }
                CoefficientPreset::Laplace
            }
            Some("convection-diffusion") => CoefficientPreset::ConvectionDiffusion {
                a2: raw.a2.unwrap_or(CoefficientPreset::DEFAULT_CONVECTION),
                a3: raw.a3.unwrap_or(CoefficientPreset::DEFAULT_REACTION),
            },
            Some(other) => {
                return Err(ConfigError::Invalid(format!(
                    "unknown coefficient preset {other:?}"
                )))
            }
        };
        let p = raw.p.unwrap_or(d.p);
        Ok(Self {
            grading,
            p,
            coefficients,
            c_small: raw.c_small.unwrap_or_else(|| default_c_small(p)),
            c_adm: raw.c_adm.unwrap_or(d.c_adm),
            r_min: raw.r_min.unwrap_or(d.r_min),
            r_max: raw.r_max.unwrap_or(d.r_max),
            output_dir: raw.output_dir.unwrap_or(d.output_dir),
            spectral: raw.spectral.unwrap_or(d.spectral),
            large: raw.large.unwrap_or(d.large),
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.p == 0 || self.p > MAX_FEM_DEGREE {
            return bad(format!("p = {} must lie in 1..={MAX_FEM_DEGREE}", self.p));
        }
        if self.r_min == 0 || self.r_min > self.r_max {
            return bad(format!(
                "rank range {}..={} is empty or starts at 0",
                self.r_min, self.r_max
            ));
        }
        if self.c_small == 0 {
            return bad("c_small must be positive".into());
        }
        if !(self.c_adm > 0.0 && self.c_adm.is_finite()) {
            return bad(format!("c_adm = {} must be positive", self.c_adm));
        }
        if let CoefficientPreset::ConvectionDiffusion { a2, a3 } = self.coefficients {
            // constant a2 drops out of a(u, u) for u vanishing on the boundary
            if !(a2.iter().all(|v| v.is_finite()) && a3 >= 0.0 && a3.is_finite()) {
                return bad(format!(
                    "convection-diffusion needs finite a2 and a3 ≥ 0, got {a2:?}, {a3}"
                ));
            }
        }
        self.grading
            .layer_abscissae()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn ranks(&self) -> Vec<usize> {
        (self.r_min..=self.r_max).collect()
    }

    pub fn dof_limit(&self) -> usize {
        if self.large {
            hgraded_core::linalg::MAX_DENSE_INVERSE_DIM
        } else {
            DESK_MAX_DOFS
        }
    }
}

/// `key=value`; the value is read as a TOML literal and falls back to a bare
/// string, so `edge=left` and `edge="left"` are the same.
fn parse_override(s: &str) -> Result<(String, toml::Value), ConfigError> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| ConfigError::BadOverride(s.to_owned()))?;
    let (key, value) = (key.trim(), value.trim());
    if key.is_empty() {
        return Err(ConfigError::BadOverride(s.to_owned()));
    }
    let literal = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_owned()));
    Ok((key.to_owned(), literal))
}
