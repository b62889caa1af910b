//! Extrapolation of bandlimited signals on periodic N-D grids from weighted
//! region-truncated measurements.
//!
//! The crate provides the spectral projection and region truncation
//! operators, the weighted Papoulis step and its Tikhonov-regularized
//! variant, a matrix-free eigen-solver for `P chi_D P`, reproducible signal
//! synthesis, the iteration engine with direct oracle solvers, and the file
//! formats and CLI that drive experiments.

pub mod cli;
pub mod config;
pub mod engine;
mod error;
pub mod fourier;
pub mod grid;
pub mod io;
pub mod operators;
pub mod spectral;
pub mod synthesis;

pub use config::{parse_config, ConfigError, ConfigIssue, Experiment, ExperimentConfig};
pub use engine::{
    least_squares_oracle, run_extrapolation, tikhonov_oracle, IterationRecord, IterationReport,
    Mode, OracleSolution, RunConfig, StopReason,
};
pub use error::{Error, Result};
pub use grid::{GridShape, MeasuredSignal, Region, Signal, SpectralSupport, WeightedRegionSet};
pub use operators::{
    bandlimit_project, composite_apply, initial_estimate, landweber_step, papoulis_step,
    region_truncate, regularized_step, RegularizationParams,
};
pub use spectral::{eigen_spectrum, EigenOptions, EigenSpectrum};
pub use synthesis::{add_out_of_band_noise, nmse, random_bandlimited, snr_in_out, SynthesisSpec};
