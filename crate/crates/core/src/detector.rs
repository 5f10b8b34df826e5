//! Online change-point detector.
//!
//! At step `k` the detector fits a ridge model on a reference window of pairs
//! `t in [k-2N+2, k-N]` and a test window `t in [k-N+2, k]` (pair `t` being
//! `(z_t, x_{t+1})`), compares the two fits in spectral norm against a
//! data-dependent threshold, and flags `k` when the statistic reaches the
//! threshold and more than `2N-2` steps have passed since the last flag.
//! Pair `k-N+1` sits between the windows and belongs to neither.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lds_sim::{format_f64, DynamicsSchedule, NoiseSpec, Trajectory};
use crate::linalg::{spectral_norm, SpdFactor};
use crate::window_stats::{Pair, WindowState, DEFAULT_REBUILD_EVERY};

/// Parameters of the guaranteed threshold: the false-alarm level and the
/// known bounds `sigma_w <= b_sigma_w`, `||Theta_k|| <= b_theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub delta: f64,
    pub b_sigma_w: f64,
    pub b_theta: f64,
}

impl ThresholdParams {
    /// Bounds taken as tight: `b_theta = max_k ||Theta_k||`, `b_sigma_w = sigma_w`.
    pub fn tight(schedule: &DynamicsSchedule, noise: &NoiseSpec, delta: f64) -> Self {
        Self {
            delta,
            b_sigma_w: noise.sigma_w,
            b_theta: schedule.max_theta_norm(),
        }
    }

    /// `log(2 * 9^n / delta)`, expanded to avoid overflow in `9^n`.
    pub fn log_confidence(&self, n: usize) -> f64 {
        std::f64::consts::LN_2 + n as f64 * 9f64.ln() - self.delta.ln()
    }
}

/// How the per-step threshold is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThresholdMode {
    /// The finite-sample threshold with false-alarm probability at most `delta`.
    Guaranteed(ThresholdParams),
    /// A user-fixed threshold. No guarantees apply.
    Override { gamma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Window parameter `N`; each window holds `N - 1` pairs.
    pub window: usize,
    pub lambda: f64,
    pub n: usize,
    pub p: usize,
    pub mode: ThresholdMode,
    pub rebuild_every: usize,
}

impl DetectorConfig {
    pub fn guaranteed(window: usize, lambda: f64, n: usize, p: usize, params: ThresholdParams) -> Self {
        Self {
            window,
            lambda,
            n,
            p,
            mode: ThresholdMode::Guaranteed(params),
            rebuild_every: DEFAULT_REBUILD_EVERY,
        }
    }

    pub fn with_override(window: usize, lambda: f64, n: usize, p: usize, gamma: f64) -> Self {
        Self {
            window,
            lambda,
            n,
            p,
            mode: ThresholdMode::Override { gamma },
            rebuild_every: DEFAULT_REBUILD_EVERY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDetector(msg));
        if self.window < 2 {
            return bad(format!("window N must be at least 2, got {}", self.window));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if self.n == 0 {
            return bad("state dimension must be positive".into());
        }
        if self.rebuild_every == 0 {
            return bad("rebuild interval must be positive".into());
        }
        match self.mode {
            ThresholdMode::Guaranteed(t) => {
                if !(t.delta > 0.0 && t.delta < 1.0) {
                    return bad(format!("delta must lie in (0, 1), got {}", t.delta));
                }
                if !(t.b_sigma_w.is_finite() && t.b_sigma_w > 0.0) {
                    return bad(format!("b_sigma_w must be positive, got {}", t.b_sigma_w));
                }
                if !(t.b_theta.is_finite() && t.b_theta > 0.0) {
                    return bad(format!("b_theta must be positive, got {}", t.b_theta));
                }
            }
            ThresholdMode::Override { gamma } => {
                if gamma.is_nan() || gamma < 0.0 {
                    return bad(format!("override gamma must be non-negative, got {gamma}"));
                }
            }
        }
        Ok(())
    }

    /// `2N - 2`: the minimum gap a new flag must strictly exceed.
    pub fn refractory(&self) -> usize {
        2 * self.window - 2
    }

    /// Index of the first step that produces a record.
    pub fn first_step(&self) -> usize {
        2 * self.window - 1
    }

    pub fn params(&self) -> Option<ThresholdParams> {
        match self.mode {
            ThresholdMode::Guaranteed(t) => Some(t),
            ThresholdMode::Override { .. } => None,
        }
    }
}

/// `X Z' (Z Z' + lambda I)^{-1}` for the window, via a Cholesky solve.
pub fn rls_estimate(w: &WindowState, lambda: f64) -> DMatrix<f64> {
    w.factor(lambda).right_solve(w.cross())
}

/// Spectral norm of `a - b`.
pub fn spectral_norm_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Shape {
            expected: a.shape(),
            actual: b.shape(),
        });
    }
    Ok(spectral_norm(&(a - b)))
}

/// One window's contribution to the threshold:
/// `b_sigma_w sqrt(32/9 (log(2 9^n / delta) + logdet/2)) / sqrt(l_min) + lambda b_theta / l_min`.
pub fn window_threshold_term(
    logdet_vbar: f64,
    min_eig: f64,
    lambda: f64,
    n: usize,
    t: &ThresholdParams,
) -> f64 {
    let noise =
        t.b_sigma_w * (32.0 / 9.0 * (t.log_confidence(n) + 0.5 * logdet_vbar)).sqrt() / min_eig.sqrt();
    let bias = lambda * t.b_theta / min_eig;
    noise + bias
}

/// Threshold `gamma_k` for a pair of windows.
pub fn threshold(reference: &WindowState, test: &WindowState, cfg: &DetectorConfig) -> f64 {
    match cfg.mode {
        ThresholdMode::Override { gamma } => gamma,
        ThresholdMode::Guaranteed(t) => [reference, test]
            .iter()
            .map(|w| {
                window_threshold_term(
                    w.logdet_vbar(cfg.lambda),
                    w.regularized_min_eig(cfg.lambda),
                    cfg.lambda,
                    cfg.n,
                    &t,
                )
            })
            .sum(),
    }
}

struct WindowFit {
    estimate: DMatrix<f64>,
    logdet: f64,
    min_eig: f64,
}

impl WindowFit {
    fn compute(w: &WindowState, lambda: f64) -> Self {
        let factor: SpdFactor = w.factor(lambda);
        Self {
            estimate: factor.right_solve(w.cross()),
            logdet: w.logdet_vbar_with(&factor, lambda),
            min_eig: w.regularized_min_eig(lambda),
        }
    }

    fn threshold_term(&self, cfg: &DetectorConfig) -> f64 {
        match cfg.mode {
            ThresholdMode::Override { .. } => 0.0,
            ThresholdMode::Guaranteed(t) => {
                window_threshold_term(self.logdet, self.min_eig, cfg.lambda, cfg.n, &t)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    pub statistic: f64,
    pub gamma: f64,
    pub flagged: bool,
    /// `S_{k-1}`.
    pub last_change_before: usize,
    /// `S_k`.
    pub last_change_after: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    /// Still collecting the initial dataset; carries the step index.
    Warming(usize),
    Record(StepRecord),
}

#[derive(Debug, Clone)]
struct Windows {
    reference: WindowState,
    gap: Pair,
    test: WindowState,
}

/// Streaming detector state.
#[derive(Debug, Clone)]
pub struct Detector {
    cfg: DetectorConfig,
    /// `x_k` for the next incoming sample.
    current: DVector<f64>,
    /// Index of the next pair to arrive.
    k: usize,
    warmup: Vec<Pair>,
    windows: Option<Windows>,
    last_change: usize,
}

impl Detector {
    pub fn new(cfg: DetectorConfig, x0: DVector<f64>) -> Result<Self> {
        cfg.validate()?;
        if x0.len() != cfg.n {
            return Err(Error::Dimension {
                what: "initial state",
                expected: cfg.n,
                actual: x0.len(),
            });
        }
        Ok(Self {
            warmup: Vec::with_capacity(2 * cfg.window),
            cfg,
            current: x0,
            k: 0,
            windows: None,
            last_change: 0,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.cfg
    }

    /// Index the next call to [`Detector::step`] will process.
    pub fn next_step(&self) -> usize {
        self.k
    }

    /// `S` after the most recent step.
    pub fn last_change(&self) -> usize {
        self.last_change
    }

    pub fn is_warm(&self) -> bool {
        self.windows.is_some()
    }

    pub fn reference_window(&self) -> Option<&WindowState> {
        self.windows.as_ref().map(|w| &w.reference)
    }

    pub fn test_window(&self) -> Option<&WindowState> {
        self.windows.as_ref().map(|w| &w.test)
    }

    /// Consumes the sample `(u_k, x_{k+1})`.
    pub fn step(&mut self, u: &DVector<f64>, x_next: &DVector<f64>) -> Result<StepOutcome> {
        if u.len() != self.cfg.p {
            return Err(Error::Dimension {
                what: "input",
                expected: self.cfg.p,
                actual: u.len(),
            });
        }
        if x_next.len() != self.cfg.n {
            return Err(Error::Dimension {
                what: "state",
                expected: self.cfg.n,
                actual: x_next.len(),
            });
        }
        let z = DVector::from_iterator(
            self.cfg.n + self.cfg.p,
            self.current.iter().chain(u.iter()).copied(),
        );
        let pair = Pair::new(z, x_next.clone());
        self.current = x_next.clone();
        let k = self.k;
        self.k += 1;

        let n_win = self.cfg.window;
        match self.windows.as_mut() {
            Some(w) => {
                let leaving_test = w.test.slide(pair)?;
                let old_gap = std::mem::replace(&mut w.gap, leaving_test);
                w.reference.slide(old_gap)?;
            }
            None => {
                self.warmup.push(pair);
                if k < self.cfg.first_step() {
                    return Ok(StepOutcome::Warming(k));
                }
                // Pairs 0..=2N-1 are in hand; pair 0 precedes the reference window.
                let mut pairs = std::mem::take(&mut self.warmup);
                let test = pairs.split_off(n_win + 1);
                let gap = pairs.pop().expect("gap pair");
                let reference = pairs.split_off(1);
                self.windows = Some(Windows {
                    reference: WindowState::build_with_rebuild(reference, self.cfg.rebuild_every)?,
                    gap,
                    test: WindowState::build_with_rebuild(test, self.cfg.rebuild_every)?,
                });
            }
        }

        let w = self.windows.as_ref().expect("windows are warm");
        let ref_fit = WindowFit::compute(&w.reference, self.cfg.lambda);
        let test_fit = WindowFit::compute(&w.test, self.cfg.lambda);
        let statistic = spectral_norm(&(&ref_fit.estimate - &test_fit.estimate));
        let gamma = match self.cfg.mode {
            ThresholdMode::Override { gamma } => gamma,
            ThresholdMode::Guaranteed(_) => {
                ref_fit.threshold_term(&self.cfg) + test_fit.threshold_term(&self.cfg)
            }
        };
        let before = self.last_change;
        let flagged = flag_rule(statistic, gamma, k, before, self.cfg.refractory());
        if flagged {
            self.last_change = k;
        }
        Ok(StepOutcome::Record(StepRecord {
            k,
            statistic,
            gamma,
            flagged,
            last_change_before: before,
            last_change_after: self.last_change,
        }))
    }
}

/// `statistic >= gamma` and `k - s_prev > refractory`.
pub fn flag_rule(statistic: f64, gamma: f64, k: usize, s_prev: usize, refractory: usize) -> bool {
    statistic >= gamma && k - s_prev > refractory
}

/// Per-step output of a full trajectory run.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub window: usize,
    pub records: Vec<StepRecord>,
}

impl DetectionReport {
    /// Steps `k` with `S_k = k`.
    pub fn flagged(&self) -> Vec<usize> {
        self.records.iter().filter(|r| r.flagged).map(|r| r.k).collect()
    }

    /// Writes columns `k, statistic, gamma, flagged, S_k`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "statistic", "gamma", "flagged", "S_k"])?;
        for r in &self.records {
            w.write_record([
                r.k.to_string(),
                format_f64(r.statistic),
                format_f64(r.gamma),
                u8::from(r.flagged).to_string(),
                r.last_change_after.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the detector over every sample of `traj`.
pub fn run_detector(traj: &Trajectory, cfg: &DetectorConfig) -> Result<DetectionReport> {
    cfg.validate()?;
    let required = 2 * cfg.window;
    if traj.horizon() < required {
        return Err(Error::TrajectoryTooShort {
            steps: traj.horizon(),
            required,
        });
    }
    if traj.state_dim() != cfg.n || traj.input_dim() != cfg.p {
        return Err(Error::Dimension {
            what: "trajectory n + p",
            expected: cfg.n + cfg.p,
            actual: traj.state_dim() + traj.input_dim(),
        });
    }
    let mut det = Detector::new(cfg.clone(), traj.states[0].clone())?;
    let mut records = Vec::with_capacity(traj.horizon() + 1 - required);
    for k in 0..traj.horizon() {
        if let StepOutcome::Record(r) = det.step(&traj.inputs[k], &traj.states[k + 1])? {
            records.push(r);
        }
    }
    Ok(DetectionReport {
        window: cfg.window,
        records,
    })
}
