//! Online change-point detection for linear dynamical systems with unknown,
//! piecewise-constant dynamics.
//!
//! - [`lds_sim`] simulates switched linear systems driven by Gaussian inputs
//!   and noise.
//! - [`window_stats`] keeps sliding-window Gram and cross-covariance sums.
//! - [`detector`] compares ridge fits on a reference and a test window
//!   against a data-dependent threshold with a false-alarm guarantee.
//! - [`theory_bounds`] evaluates the finite-sample bound quantities.
//! - [`harness`] runs seeded Monte Carlo experiments and emits tables and
//!   plot data; [`config`] reads the TOML experiment files.

pub mod config;
pub mod detector;
pub mod error;
pub mod harness;
pub mod lds_sim;
pub mod linalg;
pub mod theory_bounds;
pub mod window_stats;

pub use detector::{
    rls_estimate, run_detector, spectral_norm_diff, threshold, DetectionReport, Detector, DetectorConfig,
    StepOutcome, StepRecord, ThresholdMode, ThresholdParams,
};
pub use error::{Error, Result};
pub use harness::{run_experiment, ExperimentConfig, ExperimentReport};
pub use lds_sim::{simulate, uav_schedule, DynamicsSchedule, NoiseSpec, Segment, Trajectory};
pub use theory_bounds::{
    compute_bounds, recommended_delta, sufficiently_separated, TheoryBounds, TheoryInputs,
};
pub use window_stats::{Pair, WindowState};
