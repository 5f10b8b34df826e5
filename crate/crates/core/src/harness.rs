//! Seeded Monte Carlo experiments over many windows and runs.
//!
//! Run `r` uses seed `base_seed + r` for every window, so all windows see the
//! same trajectories. Cells are evaluated in parallel and collected in
//! `(window, run)` order, which makes the output independent of scheduling.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{run_detector, DetectionReport, DetectorConfig, ThresholdParams};
use crate::error::{Error, Result};
use crate::lds_sim::{
    format_f64, max_windowed_second_moment, simulate, uav_schedule, DynamicsSchedule, NoiseSpec, Trajectory,
};
use crate::theory_bounds::{compute_bounds, recommended_delta, separation_of, TheoryBounds, TheoryInputs};
use crate::window_stats::DEFAULT_REBUILD_EVERY;

pub const DEFAULT_PILOT_WINDOW: usize = 100;
pub const BETA_SAFETY_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaRule {
    Fixed(f64),
    /// `delta = a / exp(sqrt(N))`.
    Exponential {
        a: f64,
    },
}

impl DeltaRule {
    pub fn delta_for(&self, window: usize) -> f64 {
        match *self {
            DeltaRule::Fixed(d) => d,
            DeltaRule::Exponential { a } => recommended_delta(window, a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsMode {
    /// `b_theta = max_k ||Theta_k||`, `b_sigma_w = sigma_w`.
    Tight,
    Explicit {
        b_theta: f64,
        b_sigma_w: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub schedule: DynamicsSchedule,
    /// Noise levels; the seed field is ignored in favour of `base_seed`.
    pub noise: NoiseSpec,
    pub windows: Vec<usize>,
    pub runs: usize,
    pub horizon: usize,
    pub base_seed: u64,
    pub lambda: f64,
    pub delta_rule: DeltaRule,
    pub bounds: BoundsMode,
    /// Replaces the guaranteed threshold with a constant when set.
    pub override_gamma: Option<f64>,
    /// Averaging window of the beta pilot estimate.
    pub pilot_window: usize,
    pub rebuild_every: usize,
}

impl ExperimentConfig {
    /// UAV experiment defaults: five windows, ten runs of 9000 steps,
    /// `lambda = sigma_u = sigma_w = 1`, tight bounds, `delta = 1000 / exp(sqrt(N))`.
    pub fn uav_defaults(base_seed: u64) -> Self {
        Self {
            schedule: uav_schedule(),
            noise: NoiseSpec {
                sigma_u: 1.0,
                sigma_w: 1.0,
                seed: base_seed,
            },
            windows: vec![50, 150, 250, 350, 450],
            runs: 10,
            horizon: 9000,
            base_seed,
            lambda: 1.0,
            delta_rule: DeltaRule::Exponential { a: 1000.0 },
            bounds: BoundsMode::Tight,
            override_gamma: None,
            pilot_window: DEFAULT_PILOT_WINDOW,
            rebuild_every: DEFAULT_REBUILD_EVERY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidExperiment(m));
        self.noise.validate()?;
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.pilot_window == 0 {
            return bad("pilot_window must be at least 1".into());
        }
        for &w in &self.windows {
            if w < 2 {
                return bad(format!("window N must be at least 2, got {w}"));
            }
            if self.horizon < 2 * w {
                return bad(format!(
                    "horizon {} is shorter than 2N = {} for N = {w}",
                    self.horizon,
                    2 * w
                ));
            }
            self.detector_config(w).validate()?;
        }
        if let DeltaRule::Exponential { a } = self.delta_rule {
            if a.is_nan() || a <= 0.0 {
                return bad(format!("delta rule constant must be positive, got {a}"));
            }
        }
        Ok(())
    }

    pub fn seed_for(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }

    /// Seed of the beta pilot runs; distinct from every run seed when
    /// `runs < 2^64 - 1`.
    pub fn pilot_seed(&self) -> u64 {
        self.base_seed.wrapping_sub(1)
    }

    pub fn threshold_params(&self, window: usize) -> ThresholdParams {
        let delta = self.delta_rule.delta_for(window);
        match self.bounds {
            BoundsMode::Tight => ThresholdParams::tight(&self.schedule, &self.noise, delta),
            BoundsMode::Explicit { b_theta, b_sigma_w } => ThresholdParams {
                delta,
                b_sigma_w,
                b_theta,
            },
        }
    }

    pub fn detector_config(&self, window: usize) -> DetectorConfig {
        let (n, p) = (self.schedule.state_dim(), self.schedule.input_dim());
        let mut cfg = match self.override_gamma {
            Some(g) => DetectorConfig::with_override(window, self.lambda, n, p, g),
            None => DetectorConfig::guaranteed(window, self.lambda, n, p, self.threshold_params(window)),
        };
        cfg.rebuild_every = self.rebuild_every;
        cfg
    }

    /// Half-open spans `[k_i, k_{i+1})` between change points; the last span
    /// ends at the horizon.
    pub fn spans(&self) -> Vec<(usize, usize)> {
        let cps = self.schedule.change_points();
        cps.iter()
            .enumerate()
            .map(|(i, &start)| (start, cps.get(i + 1).copied().unwrap_or(self.horizon).max(start)))
            .collect()
    }

    fn trajectory(&self, run: usize) -> Result<Trajectory> {
        let noise = self.noise.with_seed(self.seed_for(run));
        simulate(
            &self.schedule,
            &noise,
            self.horizon,
            &DVector::zeros(self.schedule.state_dim()),
        )
    }
}

/// Empirical stand-in for the state second-moment bound: the largest windowed
/// mean of `||x_k||^2` over no-change pilot runs of every segment, scaled by
/// [`BETA_SAFETY_FACTOR`].
pub fn estimate_beta(cfg: &ExperimentConfig) -> Result<f64> {
    let noise = cfg.noise.with_seed(cfg.pilot_seed());
    let x0 = DVector::zeros(cfg.schedule.state_dim());
    let mut best: f64 = 0.0;
    for seg in cfg.schedule.segments() {
        let single = DynamicsSchedule::constant(seg.a.clone(), seg.b.clone())?;
        let traj = simulate(&single, &noise, cfg.horizon, &x0)?;
        best = best.max(max_windowed_second_moment(&traj, cfg.pilot_window));
    }
    Ok(BETA_SAFETY_FACTOR * best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunCell {
    pub window: usize,
    pub run: usize,
    pub seed: u64,
    pub report: DetectionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub window: usize,
    /// `None` in override-threshold mode.
    pub delta: Option<f64>,
    pub runs: usize,
    /// Mean first-flag index per span over runs that flagged in it.
    pub average_detection: Vec<Option<f64>>,
    /// Runs with no flag per span.
    pub missed_detection: Vec<usize>,
    /// Flags before the first change point, summed over runs.
    pub false_alarms: usize,
    pub spacing_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRecord {
    pub window: usize,
    pub change_point: usize,
    pub change_magnitude: f64,
    pub sufficiently_separated: bool,
    pub bounds: Option<TheoryBounds>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub spans: Vec<(usize, usize)>,
    pub beta: f64,
    pub summaries: Vec<WindowSummary>,
    pub theory: Vec<BoundsRecord>,
    pub cells: Vec<RunCell>,
}

impl ExperimentReport {
    pub fn cells_for(&self, window: usize) -> impl Iterator<Item = &RunCell> {
        self.cells.iter().filter(move |c| c.window == window)
    }
}

/// `true` when consecutive flags are more than `2N - 2` apart.
pub fn respects_spacing(flags: &[usize], window: usize) -> bool {
    flags.windows(2).all(|w| w[1] - w[0] > 2 * window - 2)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let trajectories: Vec<Trajectory> = (0..cfg.runs)
        .into_par_iter()
        .map(|r| cfg.trajectory(r))
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = cfg
        .windows
        .iter()
        .flat_map(|&w| (0..cfg.runs).map(move |r| (w, r)))
        .collect();
    let cells: Vec<RunCell> = jobs
        .par_iter()
        .map(|&(window, run)| {
            let report = run_detector(&trajectories[run], &cfg.detector_config(window))?;
            Ok(RunCell {
                window,
                run,
                seed: cfg.seed_for(run),
                report,
            })
        })
        .collect::<Result<_>>()?;

    let spans = cfg.spans();
    let first_change = cfg
        .schedule
        .change_points()
        .first()
        .copied()
        .unwrap_or(usize::MAX);
    let summaries = cfg
        .windows
        .iter()
        .map(|&window| {
            let flags: Vec<Vec<usize>> = cells
                .iter()
                .filter(|c| c.window == window)
                .map(|c| c.report.flagged())
                .collect();
            summarize(window, cfg, &spans, first_change, &flags)
        })
        .collect();

    let beta = estimate_beta(cfg)?;
    let theory = theory_records(cfg, beta)?;

    Ok(ExperimentReport {
        spans,
        beta,
        summaries,
        theory,
        cells,
    })
}

fn summarize(
    window: usize,
    cfg: &ExperimentConfig,
    spans: &[(usize, usize)],
    first_change: usize,
    flags: &[Vec<usize>],
) -> WindowSummary {
    let mut average_detection = Vec::with_capacity(spans.len());
    let mut missed_detection = Vec::with_capacity(spans.len());
    for &(lo, hi) in spans {
        let firsts: Vec<usize> = flags
            .iter()
            .filter_map(|f| f.iter().copied().find(|&k| k >= lo && k < hi))
            .collect();
        missed_detection.push(flags.len() - firsts.len());
        average_detection.push(if firsts.is_empty() {
            None
        } else {
            Some(firsts.iter().sum::<usize>() as f64 / firsts.len() as f64)
        });
    }
    WindowSummary {
        window,
        delta: cfg
            .override_gamma
            .is_none()
            .then(|| cfg.delta_rule.delta_for(window)),
        runs: flags.len(),
        average_detection,
        missed_detection,
        false_alarms: flags
            .iter()
            .map(|f| f.iter().filter(|&&k| k < first_change).count())
            .sum(),
        spacing_ok: flags.iter().all(|f| respects_spacing(f, window)),
    }
}

fn theory_records(cfg: &ExperimentConfig, beta: f64) -> Result<Vec<BoundsRecord>> {
    let cps = cfg.schedule.change_points();
    let mut out = Vec::new();
    for &window in &cfg.windows {
        let det = cfg.detector_config(window);
        for (cp, separated) in separation_of(&cps, window) {
            let magnitude = cfg.schedule.change_magnitude(cp)?;
            let bounds =
                TheoryInputs::from_config(&det, beta, cfg.noise.sigma_u, cfg.noise.sigma_min(), magnitude)
                    .map(|inp| compute_bounds(&inp));
            out.push(BoundsRecord {
                window,
                change_point: cp,
                change_magnitude: magnitude,
                sufficiently_separated: separated,
                bounds,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalseAlarmSummary {
    pub window: usize,
    pub delta: Option<f64>,
    pub runs: usize,
    pub monitored_steps: usize,
    pub flagged_steps: usize,
    pub runs_with_flag: usize,
    /// Flags per monitored step over all runs.
    pub per_step_rate: f64,
    /// Fraction of runs with at least one flag.
    pub run_rate: f64,
    pub spacing_ok: bool,
}

/// Empirical false-alarm rates on a schedule without change points.
pub fn false_alarm_trial(cfg: &ExperimentConfig) -> Result<Vec<FalseAlarmSummary>> {
    if !cfg.schedule.change_points().is_empty() {
        return Err(Error::InvalidExperiment(
            "false-alarm trials need a schedule with a single segment".into(),
        ));
    }
    let report = run_experiment(cfg)?;
    Ok(cfg
        .windows
        .iter()
        .map(|&window| {
            let mut monitored = 0;
            let mut flagged = 0;
            let mut runs_with_flag = 0;
            let mut spacing_ok = true;
            for cell in report.cells_for(window) {
                let flags = cell.report.flagged();
                monitored += cell.report.records.len();
                flagged += flags.len();
                runs_with_flag += usize::from(!flags.is_empty());
                spacing_ok &= respects_spacing(&flags, window);
            }
            FalseAlarmSummary {
                window,
                delta: cfg
                    .override_gamma
                    .is_none()
                    .then(|| cfg.delta_rule.delta_for(window)),
                runs: cfg.runs,
                monitored_steps: monitored,
                flagged_steps: flagged,
                runs_with_flag,
                per_step_rate: flagged as f64 / monitored as f64,
                run_rate: runs_with_flag as f64 / cfg.runs as f64,
                spacing_ok,
            }
        })
        .collect())
}

/// Table layout: `N, delta, AD1, MD1, AD2, MD2, ...`, one span pair per
/// change point.
pub struct Table {
    pub csv: String,
    pub text: String,
}

pub fn emit_table(report: &ExperimentReport) -> Table {
    let mut header = vec!["N".to_string(), "delta".to_string()];
    for i in 1..=report.spans.len() {
        header.push(format!("AD{i}"));
        header.push(format!("MD{i}"));
    }
    let rows: Vec<(Vec<String>, Vec<String>)> = report
        .summaries
        .iter()
        .map(|s| {
            let mut full = vec![s.window.to_string(), s.delta.map_or("N/A".into(), format_f64)];
            let mut short = vec![
                s.window.to_string(),
                s.delta.map_or("N/A".into(), |d| format!("{d:.2e}")),
            ];
            for (ad, md) in s.average_detection.iter().zip(&s.missed_detection) {
                full.push(ad.map_or("N/A".into(), format_f64));
                short.push(ad.map_or("N/A".into(), |v| format!("{v:.1}")));
                full.push(md.to_string());
                short.push(md.to_string());
            }
            (full, short)
        })
        .collect();

    let mut csv = header.join(",");
    csv.push('\n');
    for (full, _) in &rows {
        csv.push_str(&full.join(","));
        csv.push('\n');
    }

    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|(_, s)| s[c].len())
                .chain([header[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut text = String::new();
    let line = |cells: &[String], text: &mut String| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        let _ = writeln!(text, "{}", padded.join("  ").trim_end());
    };
    line(&header, &mut text);
    for (_, short) in &rows {
        line(short, &mut text);
    }
    Table { csv, text }
}

/// Per-step means of the statistic and threshold across reports, as CSV
/// with columns `k, mean_statistic, mean_gamma`.
pub fn emit_figure_data(reports: &[&DetectionReport]) -> Result<String> {
    let mut out = String::from("k,mean_statistic,mean_gamma\n");
    let Some(first) = reports.first() else {
        return Ok(out);
    };
    let aligned = reports.iter().all(|r| {
        r.window == first.window
            && r.records.len() == first.records.len()
            && r.records.iter().zip(&first.records).all(|(a, b)| a.k == b.k)
    });
    if !aligned {
        return Err(Error::MismatchedReports);
    }
    let count = reports.len() as f64;
    for (i, rec) in first.records.iter().enumerate() {
        let stat = reports.iter().map(|r| r.records[i].statistic).sum::<f64>() / count;
        let gamma = reports.iter().map(|r| r.records[i].gamma).sum::<f64>() / count;
        let _ = writeln!(out, "{},{},{}", rec.k, format_f64(stat), format_f64(gamma));
    }
    Ok(out)
}

#[derive(Serialize)]
struct BoundsFile<'a> {
    beta: f64,
    beta_safety_factor: f64,
    pilot_window: usize,
    base_seed: u64,
    runs: usize,
    horizon: usize,
    summaries: &'a [WindowSummary],
    theory: &'a [BoundsRecord],
}

/// Writes `table.csv`, `table.txt`, `figure_N<N>.csv` per window and
/// `bounds.json` into `dir`.
pub fn write_outputs(cfg: &ExperimentConfig, report: &ExperimentReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let table = emit_table(report);
    fs::write(dir.join("table.csv"), &table.csv)?;
    fs::write(dir.join("table.txt"), &table.text)?;
    for &window in &cfg.windows {
        let reports: Vec<&DetectionReport> = report.cells_for(window).map(|c| &c.report).collect();
        fs::write(
            dir.join(format!("figure_N{window}.csv")),
            emit_figure_data(&reports)?,
        )?;
    }
    let bounds = BoundsFile {
        beta: report.beta,
        beta_safety_factor: BETA_SAFETY_FACTOR,
        pilot_window: cfg.pilot_window,
        base_seed: cfg.base_seed,
        runs: cfg.runs,
        horizon: cfg.horizon,
        summaries: &report.summaries,
        theory: &report.theory,
    };
    fs::write(
        dir.join("bounds.json"),
        serde_json::to_string_pretty(&bounds)? + "\n",
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::StepRecord;
    use nalgebra::DMatrix;

    fn record(k: usize, statistic: f64, gamma: f64) -> StepRecord {
        StepRecord {
            k,
            statistic,
            gamma,
            flagged: false,
            last_change_before: 0,
            last_change_after: 0,
        }
    }

    fn stable_config() -> ExperimentConfig {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.3]);
        let b = DMatrix::from_row_slice(2, 1, &[1.0, 0.5]);
        ExperimentConfig {
            schedule: DynamicsSchedule::constant(a, b).unwrap(),
            windows: vec![10, 20],
            runs: 3,
            horizon: 300,
            ..ExperimentConfig::uav_defaults(11)
        }
    }

    #[test]
    fn uav_spans() {
        let cfg = ExperimentConfig::uav_defaults(0);
        assert_eq!(cfg.spans(), vec![(2500, 5000), (5000, 9000)]);
        assert_eq!(cfg.seed_for(3), 3);
    }

    #[test]
    fn summary_metrics() {
        let cfg = ExperimentConfig::uav_defaults(0);
        let spans = cfg.spans();
        let flags = vec![vec![100, 2600, 5300], vec![2700, 4000], vec![]];
        let s = summarize(250, &cfg, &spans, 2500, &flags);
        assert_eq!(s.average_detection, vec![Some(2650.0), Some(5300.0)]);
        assert_eq!(s.missed_detection, vec![1, 2]);
        assert_eq!(s.false_alarms, 1);
        assert!(s.spacing_ok);
    }

    #[test]
    fn table_layout() {
        let report = ExperimentReport {
            spans: vec![(2500, 5000), (5000, 9000)],
            beta: 1.0,
            summaries: vec![WindowSummary {
                window: 50,
                delta: Some(0.85),
                runs: 10,
                average_detection: vec![Some(2550.0), None],
                missed_detection: vec![9, 10],
                false_alarms: 0,
                spacing_ok: true,
            }],
            theory: vec![],
            cells: vec![],
        };
        let t = emit_table(&report);
        assert_eq!(t.csv, "N,delta,AD1,MD1,AD2,MD2\n50,0.85,2550.0,9,N/A,10\n");
        assert!(t.text.lines().nth(1).unwrap().contains("N/A"));
        let empty = ExperimentReport {
            summaries: vec![],
            ..report
        };
        assert_eq!(emit_table(&empty).csv, "N,delta,AD1,MD1,AD2,MD2\n");
    }

    #[test]
    fn figure_data_averages() {
        let a = DetectionReport {
            window: 2,
            records: vec![record(3, 1.0, 4.0), record(4, 2.0, 6.0)],
        };
        let b = DetectionReport {
            window: 2,
            records: vec![record(3, 3.0, 2.0), record(4, 0.0, 0.0)],
        };
        assert_eq!(
            emit_figure_data(&[&a]).unwrap(),
            "k,mean_statistic,mean_gamma\n3,1.0,4.0\n4,2.0,6.0\n"
        );
        assert_eq!(
            emit_figure_data(&[&a, &a]).unwrap(),
            emit_figure_data(&[&a]).unwrap()
        );
        assert_eq!(
            emit_figure_data(&[&a, &b]).unwrap(),
            "k,mean_statistic,mean_gamma\n3,2.0,3.0\n4,1.0,3.0\n"
        );
        let short = DetectionReport {
            window: 2,
            records: vec![record(3, 1.0, 1.0)],
        };
        assert!(matches!(
            emit_figure_data(&[&a, &short]),
            Err(Error::MismatchedReports)
        ));
    }

    #[test]
    fn validation_messages() {
        let mut cfg = stable_config();
        cfg.runs = 0;
        assert!(cfg.validate().unwrap_err().to_string().contains("runs"));
        let mut cfg = stable_config();
        cfg.horizon = 30;
        assert!(cfg
            .validate()
            .unwrap_err()
            .to_string()
            .contains("shorter than 2N"));
        let mut cfg = stable_config();
        cfg.windows = vec![1];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn experiment_is_deterministic() {
        let cfg = stable_config();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cells.len(), 6);
        assert!(a.spans.is_empty());
        assert_eq!(emit_table(&a).csv, emit_table(&b).csv);
    }

    #[test]
    fn shortest_horizon_yields_one_record() {
        let cfg = ExperimentConfig {
            windows: vec![250],
            runs: 1,
            horizon: 500,
            ..ExperimentConfig::uav_defaults(5)
        };
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.cells[0].report.records.len(), 1);
        assert!(report.cells[0].report.flagged().is_empty());
    }

    #[test]
    fn override_extremes() {
        let mut cfg = stable_config();
        cfg.override_gamma = Some(1e9);
        let never = false_alarm_trial(&cfg).unwrap();
        assert!(never
            .iter()
            .all(|s| s.flagged_steps == 0 && s.per_step_rate == 0.0));
        assert!(never.iter().all(|s| s.delta.is_none()));

        cfg.override_gamma = Some(0.0);
        let always = false_alarm_trial(&cfg).unwrap();
        for s in &always {
            // Every eligible step flags: the first monitored step, then every 2N-1.
            let per_run = (s.monitored_steps / s.runs).div_ceil(2 * s.window - 1);
            assert_eq!(s.flagged_steps, per_run * s.runs);
            assert!(s.spacing_ok);
            assert_eq!(s.run_rate, 1.0);
        }
    }

    #[test]
    fn false_alarm_trial_rejects_changes() {
        let cfg = ExperimentConfig::uav_defaults(0);
        assert!(matches!(
            false_alarm_trial(&cfg),
            Err(Error::InvalidExperiment(_))
        ));
    }

    #[test]
    fn outputs_are_written() {
        let cfg = stable_config();
        let report = run_experiment(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_outputs(&cfg, &report, dir.path()).unwrap();
        for f in [
            "table.csv",
            "table.txt",
            "figure_N10.csv",
            "figure_N20.csv",
            "bounds.json",
        ] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("bounds.json")).unwrap()).unwrap();
        assert!(json["beta"].as_f64().unwrap() > 0.0);
    }
}
