//! JSON experiment configuration.
//!
//! Unknown keys are rejected. Every value is checked against the same
//! validators the library types use, and all problems are reported
//! together with the path of the offending field.
//!
//! ```json
//! {
//!   "grid": [64, 64],
//!   "support": { "half_bandwidth": [4, 4] },
//!   "regions": [ { "corner": [4, 4], "extent": [12, 12] } ],
//!   "weights": { "kind": "uniform" },
//!   "mode": { "kind": "regularized", "mu": 0.005, "tau": 1.97 },
//!   "synthesis": { "seed": 1, "rms": 1.0,
//!                  "noise": { "snr_db": 6.9, "mode": "gaussian_bumps",
//!                             "bumps": 8, "min_width": 0.5, "max_width": 2.0 } },
//!   "run": { "max_iters": 1000, "residual_tol": 0.0, "record_every": 1 },
//!   "eigen": { "truncation": 4, "count": 10, "tol": 1e-10 },
//!   "output": { "directory": "out", "pgm": false }
//! }
//! ```
//!
//! Weights are `{"kind": "uniform"}`, `{"kind": "explicit", "values": [...]}`
//! or `{"kind": "suggested", "truncation": N}` (proportional to each region's
//! `λ_N`). The noise generator is seeded with `seed + 1` (wrapping).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Mode, RunConfig};
use crate::error::{Error, Result};
use crate::grid::{GridShape, MeasuredSignal, Region, Signal, SpectralSupport, WeightedRegionSet};
use crate::operators::RegularizationParams;
use crate::spectral::{region_spectra, suggest_weights, EigenOptions};
use crate::synthesis::{
    add_out_of_band_noise_with, random_bandlimited, NoiseMode, NoiseSpec, SynthesisSpec,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: Vec<usize>,
    pub support: SupportConfig,
    pub regions: Vec<RectConfig>,
    #[serde(default)]
    pub weights: WeightsConfig,
    #[serde(default)]
    pub mode: ModeConfig,
    pub synthesis: SynthesisConfig,
    #[serde(default)]
    pub run: RunControls,
    #[serde(default)]
    pub eigen: EigenConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportConfig {
    pub half_bandwidth: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectConfig {
    pub corner: Vec<usize>,
    pub extent: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightsConfig {
    #[default]
    Uniform,
    Explicit {
        values: Vec<f64>,
    },
    Suggested {
        truncation: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeConfig {
    #[default]
    Unregularized,
    Regularized {
        mu: f64,
        tau: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisConfig {
    pub seed: u64,
    #[serde(default = "default_rms")]
    pub rms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
}

fn default_rms() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModeConfig {
    #[default]
    GaussianBumps,
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub snr_db: f64,
    #[serde(default)]
    pub mode: NoiseModeConfig,
    #[serde(default = "default_bumps")]
    pub bumps: usize,
    #[serde(default = "default_min_width")]
    pub min_width: f64,
    #[serde(default = "default_max_width")]
    pub max_width: f64,
}

fn default_bumps() -> usize {
    NoiseSpec::default().bumps
}
fn default_min_width() -> f64 {
    NoiseSpec::default().min_width
}
fn default_max_width() -> f64 {
    NoiseSpec::default().max_width
}

impl NoiseConfig {
    pub fn spec(&self) -> NoiseSpec {
        NoiseSpec {
            mode: match self.mode {
                NoiseModeConfig::GaussianBumps => NoiseMode::GaussianBumps,
                NoiseModeConfig::Spectral => NoiseMode::Spectral,
            },
            bumps: self.bumps,
            min_width: self.min_width,
            max_width: self.max_width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunControls {
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub residual_tol: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_max_iters() -> usize {
    1000
}
fn default_record_every() -> usize {
    1
}

impl Default for RunControls {
    fn default() -> Self {
        RunControls {
            max_iters: default_max_iters(),
            residual_tol: 0.0,
            record_every: default_record_every(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenConfig {
    /// Truncation index `N` used for Lipschitz constants.
    #[serde(default)]
    pub truncation: usize,
    /// Eigenpairs per region; defaults to `truncation + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default = "default_eigen_tol")]
    pub tol: f64,
}

fn default_eigen_tol() -> f64 {
    1e-10
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            truncation: 0,
            count: None,
            tol: default_eigen_tol(),
        }
    }
}

impl EigenConfig {
    pub fn count(&self) -> usize {
        self.count.unwrap_or(self.truncation + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: String,
    #[serde(default)]
    pub pgm: bool,
}

fn default_directory() -> String {
    "out".to_string()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: default_directory(),
            pgm: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration")?;
        for issue in &self.issues {
            write!(f, "\n  {issue}")?;
        }
        Ok(())
    }
}

struct Issues(Vec<ConfigIssue>);

impl Issues {
    fn push(&mut self, path: impl Into<String>, message: impl fmt::Display) {
        self.0.push(ConfigIssue {
            path: path.into(),
            message: message.to_string(),
        });
    }

    fn check<T>(&mut self, path: impl Into<String>, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.push(path, e);
                None
            }
        }
    }
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> std::result::Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError {
            issues: vec![ConfigIssue {
                path: if path.is_empty() { ".".into() } else { path },
                message: e.inner().to_string(),
            }],
        }
    })?;
    validate_config(&cfg)?;
    Ok(cfg)
}

pub fn to_json(cfg: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}

/// Validated library objects assembled from a configuration, minus the
/// synthesized signals.
struct Parts {
    shape: GridShape,
    support: SpectralSupport,
    regions: Vec<Region>,
    weights: Option<WeightedRegionSet>,
    run: RunConfig,
}

fn assemble(cfg: &ExperimentConfig) -> std::result::Result<Parts, ConfigError> {
    let mut issues = Issues(Vec::new());
    let shape = issues.check("grid", GridShape::new(cfg.grid.clone()));
    let support = shape.as_ref().and_then(|sh| {
        issues.check(
            "support.half_bandwidth",
            SpectralSupport::lowpass(sh, &cfg.support.half_bandwidth),
        )
    });
    if cfg.regions.is_empty() {
        issues.push("regions", "at least one region is required");
    }
    let regions: Vec<Option<Region>> = cfg
        .regions
        .iter()
        .enumerate()
        .map(|(i, r)| {
            shape.as_ref().and_then(|sh| {
                issues.check(
                    format!("regions[{i}]"),
                    Region::from_rect(sh, &r.corner, &r.extent),
                )
            })
        })
        .collect();
    let regions: Option<Vec<Region>> = regions.into_iter().collect();

    let dim = support.as_ref().map(|s| s.count());
    let weights = match (&cfg.weights, &regions) {
        (WeightsConfig::Uniform, Some(rs)) if !rs.is_empty() => {
            issues.check("weights", WeightedRegionSet::uniform(rs.clone()))
        }
        (WeightsConfig::Explicit { values }, Some(rs)) if !rs.is_empty() => {
            match WeightedRegionSet::new(rs.clone(), values.clone()) {
                Ok(set) => Some(set),
                Err(Error::Validation {
                    index: Some(i),
                    message,
                }) if i < values.len() => {
                    issues.push(format!("weights.values[{i}]"), message);
                    None
                }
                Err(e) => {
                    issues.push("weights.values", e);
                    None
                }
            }
        }
        (WeightsConfig::Suggested { truncation }, _) => {
            if let Some(d) = dim {
                if *truncation >= d {
                    issues.push(
                        "weights.truncation",
                        format!("must be below the bandlimited subspace dimension {d}"),
                    );
                }
            }
            None
        }
        _ => None,
    };

    let mode = match cfg.mode {
        ModeConfig::Unregularized => Some(Mode::Unregularized),
        ModeConfig::Regularized { mu, tau } => {
            if mu.is_nan() || mu <= 0.0 {
                issues.push(
                    "mode.mu",
                    format!("mu = {mu} must be positive in regularized mode"),
                );
                None
            } else {
                issues
                    .check("mode.tau", RegularizationParams::new(mu, tau))
                    .map(Mode::Regularized)
            }
        }
    };

    if !(cfg.synthesis.rms.is_finite() && cfg.synthesis.rms > 0.0) {
        issues.push(
            "synthesis.rms",
            format!("rms = {} must be positive", cfg.synthesis.rms),
        );
    }
    if let Some(noise) = &cfg.synthesis.noise {
        if !noise.snr_db.is_finite() {
            issues.push("synthesis.noise.snr_db", "must be finite");
        }
        issues.check("synthesis.noise", noise.spec().validate());
    }

    let run = mode.and_then(|m| {
        issues.check(
            "run",
            RunConfig::new(
                m,
                cfg.run.max_iters,
                cfg.run.residual_tol,
                cfg.run.record_every,
            ),
        )
    });

    if let Some(d) = dim {
        let count = cfg.eigen.count();
        if count == 0 || count > d {
            issues.push("eigen.count", format!("must lie in 1..={d}"));
        }
        if cfg.eigen.truncation >= count {
            issues.push(
                "eigen.truncation",
                format!("must be below eigen.count = {count}"),
            );
        }
    }
    if cfg.eigen.tol.is_nan() || cfg.eigen.tol <= 0.0 {
        issues.push("eigen.tol", "must be positive");
    }
    if cfg.output.directory.is_empty() {
        issues.push("output.directory", "must not be empty");
    }

    match (issues.0.is_empty(), shape, support, regions, run) {
        (true, Some(shape), Some(support), Some(regions), Some(run)) => Ok(Parts {
            shape,
            support,
            regions,
            weights,
            run,
        }),
        _ => Err(ConfigError { issues: issues.0 }),
    }
}

pub fn validate_config(cfg: &ExperimentConfig) -> std::result::Result<(), ConfigError> {
    assemble(cfg).map(|_| ())
}

/// A configuration turned into concrete signals and operators.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub shape: GridShape,
    pub support: SpectralSupport,
    /// Exactly bandlimited synthesized signal.
    pub clean: Signal,
    /// The field being measured and extrapolated: `clean` plus out-of-band
    /// perturbation when noise is configured.
    pub field: Signal,
    pub measured: MeasuredSignal,
    pub run: RunConfig,
}

impl Experiment {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let parts = assemble(cfg)?;
        let weighted = match parts.weights {
            Some(w) => w,
            None => {
                let WeightsConfig::Suggested { truncation } = cfg.weights else {
                    unreachable!("uniform and explicit weights are built during validation")
                };
                let spectra = region_spectra(
                    &parts.regions,
                    &parts.support,
                    truncation + 1,
                    cfg.eigen.tol,
                    &EigenOptions::default(),
                )?;
                WeightedRegionSet::new(
                    parts.regions.clone(),
                    suggest_weights(&spectra, truncation)?,
                )?
            }
        };
        let spec = SynthesisSpec::new(
            parts.shape.clone(),
            parts.support.clone(),
            cfg.synthesis.seed,
            cfg.synthesis.rms,
        )?;
        let clean = random_bandlimited(&spec)?;
        let field = match &cfg.synthesis.noise {
            Some(noise) => add_out_of_band_noise_with(
                &clean,
                &parts.support,
                noise.snr_db,
                cfg.synthesis.seed.wrapping_add(1),
                &noise.spec(),
            )?,
            None => clean.clone(),
        };
        let measured = MeasuredSignal::observe(weighted, &field)?;
        Ok(Experiment {
            config: cfg.clone(),
            shape: parts.shape,
            support: parts.support,
            clean,
            field,
            measured,
            run: parts.run,
        })
    }
}
