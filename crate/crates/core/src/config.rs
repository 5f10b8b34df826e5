//! TOML configuration shared by the CLI subcommands.
//!
//! ```toml
//! [system]
//! builtin = "uav"          # or n, p and [[system.segments]] with start, A, B
//! sigma_u = 1.0
//! sigma_w = 1.0
//! seed = 7
//!
//! [simulation]
//! horizon = 9000
//!
//! [detector]
//! window = 250
//! lambda = 1.0
//! delta_a = 1000.0         # delta = a / exp(sqrt(N)); or delta = 1e-4
//!                          # b_theta / b_sigma_w for explicit bounds, tight otherwise
//!                          # override_gamma = 3.0 replaces the guaranteed threshold
//!
//! [experiment]
//! windows = [50, 150, 250, 350, 450]
//! runs = 10
//! horizon = 9000
//! base_seed = 2023
//! delta_a = 1000.0
//! ```

use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::detector::{DetectorConfig, ThresholdParams};
use crate::error::{Error, Result};
use crate::harness::{BoundsMode, DeltaRule, ExperimentConfig, DEFAULT_PILOT_WINDOW};
use crate::lds_sim::{uav_schedule, DynamicsSchedule, NoiseSpec, SegmentSpec, SystemSpec};
use crate::window_stats::DEFAULT_REBUILD_EVERY;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub system: SystemSection,
    pub simulation: Option<SimulationSection>,
    pub detector: Option<DetectorSection>,
    pub experiment: Option<ExperimentSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub builtin: Option<String>,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub segments: Option<Vec<SegmentSpec>>,
    pub sigma_u: f64,
    pub sigma_w: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub horizon: usize,
    /// Defaults to the zero state.
    pub x0: Option<Vec<f64>>,
}

/// Threshold selection keys accepted by both `[detector]` and `[experiment]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ThresholdKeys {
    pub delta: Option<f64>,
    pub delta_a: Option<f64>,
    pub b_theta: Option<f64>,
    pub b_sigma_w: Option<f64>,
    pub override_gamma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdChoice {
    Guaranteed { delta: DeltaRule, bounds: BoundsMode },
    Override(f64),
}

impl ThresholdKeys {
    pub fn resolve(&self) -> std::result::Result<ThresholdChoice, String> {
        if let Some(g) = self.override_gamma {
            if self.delta.is_some()
                || self.delta_a.is_some()
                || self.b_theta.is_some()
                || self.b_sigma_w.is_some()
            {
                return Err(
                    "override_gamma cannot be combined with delta, delta_a, b_theta or b_sigma_w".into(),
                );
            }
            return Ok(ThresholdChoice::Override(g));
        }
        let delta = match (self.delta, self.delta_a) {
            (Some(d), None) => DeltaRule::Fixed(d),
            (None, Some(a)) => DeltaRule::Exponential { a },
            (Some(_), Some(_)) => return Err("give either delta or delta_a, not both".into()),
            (None, None) => return Err("one of delta, delta_a or override_gamma is required".into()),
        };
        let bounds = match (self.b_theta, self.b_sigma_w) {
            (None, None) => BoundsMode::Tight,
            (Some(b_theta), Some(b_sigma_w)) => BoundsMode::Explicit { b_theta, b_sigma_w },
            _ => return Err("b_theta and b_sigma_w must be given together".into()),
        };
        Ok(ThresholdChoice::Guaranteed { delta, bounds })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub window: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    pub rebuild_every: Option<usize>,
    pub delta: Option<f64>,
    pub delta_a: Option<f64>,
    pub b_theta: Option<f64>,
    pub b_sigma_w: Option<f64>,
    pub override_gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub windows: Vec<usize>,
    pub runs: usize,
    pub horizon: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    pub pilot_window: Option<usize>,
    pub rebuild_every: Option<usize>,
    pub delta: Option<f64>,
    pub delta_a: Option<f64>,
    pub b_theta: Option<f64>,
    pub b_sigma_w: Option<f64>,
    pub override_gamma: Option<f64>,
}

fn default_lambda() -> f64 {
    1.0
}

impl DetectorSection {
    fn keys(&self) -> ThresholdKeys {
        ThresholdKeys {
            delta: self.delta,
            delta_a: self.delta_a,
            b_theta: self.b_theta,
            b_sigma_w: self.b_sigma_w,
            override_gamma: self.override_gamma,
        }
    }
}

impl ExperimentSection {
    fn keys(&self) -> ThresholdKeys {
        ThresholdKeys {
            delta: self.delta,
            delta_a: self.delta_a,
            b_theta: self.b_theta,
            b_sigma_w: self.b_sigma_w,
            override_gamma: self.override_gamma,
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text).map_err(|message| Error::Config {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn schedule_and_noise(&self) -> Result<(DynamicsSchedule, NoiseSpec)> {
        let s = &self.system;
        match (&s.builtin, &s.segments) {
            (Some(name), None) if name == "uav" => {
                if s.n.is_some() || s.p.is_some() {
                    return Err(Error::InvalidSchedule("builtin schedules take no n or p".into()));
                }
                Ok((uav_schedule(), NoiseSpec::new(s.sigma_u, s.sigma_w, s.seed)?))
            }
            (Some(name), None) => Err(Error::InvalidSchedule(format!(
                "unknown builtin schedule {name:?}"
            ))),
            (None, Some(segments)) => {
                let (Some(n), Some(p)) = (s.n, s.p) else {
                    return Err(Error::InvalidSchedule("segments require n and p".into()));
                };
                SystemSpec {
                    n,
                    p,
                    segments: segments.clone(),
                    sigma_u: s.sigma_u,
                    sigma_w: s.sigma_w,
                    seed: s.seed,
                }
                .build()
            }
            (Some(_), Some(_)) => Err(Error::InvalidSchedule(
                "give either builtin or segments, not both".into(),
            )),
            (None, None) => Err(Error::InvalidSchedule(
                "[system] needs builtin or segments".into(),
            )),
        }
    }

    /// Horizon and initial state for `simulate`.
    pub fn simulation(&self, n: usize) -> Result<(usize, DVector<f64>)> {
        let sim = self
            .simulation
            .as_ref()
            .ok_or_else(|| Error::InvalidExperiment("missing [simulation] section".into()))?;
        let x0 = match &sim.x0 {
            Some(v) if v.len() != n => {
                return Err(Error::Dimension {
                    what: "simulation.x0",
                    expected: n,
                    actual: v.len(),
                })
            }
            Some(v) => DVector::from_vec(v.clone()),
            None => DVector::zeros(n),
        };
        Ok((sim.horizon, x0))
    }

    pub fn detector_config(&self) -> Result<DetectorConfig> {
        let (schedule, noise) = self.schedule_and_noise()?;
        let det = self
            .detector
            .as_ref()
            .ok_or_else(|| Error::InvalidDetector("missing [detector] section".into()))?;
        let (n, p) = (schedule.state_dim(), schedule.input_dim());
        let mut cfg = match det.keys().resolve().map_err(Error::InvalidDetector)? {
            ThresholdChoice::Override(g) => DetectorConfig::with_override(det.window, det.lambda, n, p, g),
            ThresholdChoice::Guaranteed { delta, bounds } => {
                let delta = delta.delta_for(det.window);
                let params = match bounds {
                    BoundsMode::Tight => ThresholdParams::tight(&schedule, &noise, delta),
                    BoundsMode::Explicit { b_theta, b_sigma_w } => ThresholdParams {
                        delta,
                        b_sigma_w,
                        b_theta,
                    },
                };
                DetectorConfig::guaranteed(det.window, det.lambda, n, p, params)
            }
        };
        cfg.rebuild_every = det.rebuild_every.unwrap_or(DEFAULT_REBUILD_EVERY);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn experiment_config(&self) -> Result<ExperimentConfig> {
        let (schedule, noise) = self.schedule_and_noise()?;
        let exp = self
            .experiment
            .as_ref()
            .ok_or_else(|| Error::InvalidExperiment("missing [experiment] section".into()))?;
        let (delta_rule, bounds, override_gamma) =
            match exp.keys().resolve().map_err(Error::InvalidExperiment)? {
                ThresholdChoice::Override(g) => (DeltaRule::Fixed(0.5), BoundsMode::Tight, Some(g)),
                ThresholdChoice::Guaranteed { delta, bounds } => (delta, bounds, None),
            };
        let cfg = ExperimentConfig {
            schedule,
            noise,
            windows: exp.windows.clone(),
            runs: exp.runs,
            horizon: exp.horizon,
            base_seed: exp.base_seed,
            lambda: exp.lambda,
            delta_rule,
            bounds,
            override_gamma,
            pilot_window: exp.pilot_window.unwrap_or(DEFAULT_PILOT_WINDOW),
            rebuild_every: exp.rebuild_every.unwrap_or(DEFAULT_REBUILD_EVERY),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
