//! Finite-sample bound quantities for comparing empirical alarm rates with
//! theory. Everything here is a pure function of its inputs.

use serde::{Deserialize, Serialize};

use crate::detector::{DetectorConfig, ThresholdParams};
use crate::lds_sim::DynamicsSchedule;

/// Inputs to [`compute_bounds`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryInputs {
    pub window: usize,
    pub n: usize,
    pub p: usize,
    pub lambda: f64,
    pub params: ThresholdParams,
    /// Bound on `tr E[x_k x_k']` for all `k`.
    pub beta: f64,
    pub sigma_u: f64,
    /// `min(sigma_w, sigma_u)` of the true system.
    pub sigma_min: f64,
    /// `||Theta_{k*-1} - Theta_{k*}||` at the change point under study.
    pub delta_change: f64,
}

impl TheoryInputs {
    /// `None` for override-threshold configs, which carry no guarantees.
    pub fn from_config(
        cfg: &DetectorConfig,
        beta: f64,
        sigma_u: f64,
        sigma_min: f64,
        delta_change: f64,
    ) -> Option<Self> {
        cfg.params().map(|params| Self {
            window: cfg.window,
            n: cfg.n,
            p: cfg.p,
            lambda: cfg.lambda,
            params,
            beta,
            sigma_u,
            sigma_min,
            delta_change,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryBounds {
    /// `(N-1)(beta + sigma_u^2 p)`.
    pub c1: f64,
    pub delta_e: f64,
    pub n1: f64,
    /// `336 lambda b_theta / (||Delta|| sigma_min^2) - 42 lambda / sigma_min^2`.
    pub n_change: f64,
    /// `max(42, n1, n_change)`.
    pub n_required: f64,
    /// `1 - (2N+1) delta - delta_e`; may be negative.
    pub true_alarm_lower: f64,
    /// `4 C1 / (e delta_e)`.
    pub lambda_cap: f64,
    pub conditions_met: bool,
}

pub fn compute_bounds(inp: &TheoryInputs) -> TheoryBounds {
    let n_win = inp.window as f64;
    let d = (inp.n + inp.p) as f64;
    let lambda = inp.lambda;
    let b_sw = inp.params.b_sigma_w;
    let b_theta = inp.params.b_theta;
    let delta = inp.params.delta;
    let s2 = inp.sigma_min * inp.sigma_min;
    let excitation = n_win * s2 + 42.0 * lambda;
    let log_conf = inp.params.log_confidence(inp.n);

    let c1 = (n_win - 1.0) * (inp.beta + inp.sigma_u * inp.sigma_u * inp.p as f64);

    let exponent =
        inp.delta_change * (excitation / (10_000.0 * b_sw * b_sw * d)).sqrt() - (log_conf / d).sqrt();
    let delta_e = 8.0 * c1 / lambda * (-exponent).exp();

    let n1 = 200.0
        * d
        * ((7.0 * lambda / c1).ln() + inp.delta_change * (excitation / (2500.0 * b_sw * b_sw * d)).sqrt()
            - 168.0 * lambda * b_theta / (2500.0 * b_sw * b_sw * d * excitation).sqrt());
    let n_change = 336.0 * lambda * b_theta / (inp.delta_change * s2) - 42.0 * lambda / s2;
    let n_required = 42f64.max(n1).max(n_change);

    let lambda_cap = 4.0 * c1 / (std::f64::consts::E * delta_e);
    let true_alarm_lower = 1.0 - (2.0 * n_win + 1.0) * delta - delta_e;

    TheoryBounds {
        c1,
        delta_e,
        n1,
        n_change,
        n_required,
        true_alarm_lower,
        lambda_cap,
        conditions_met: n_win >= n_required && lambda <= lambda_cap,
    }
}

/// Whether each change point of `schedule` is at least `4N - 1` steps from
/// its neighbours (and from time 0). The last change point only needs the gap
/// to its predecessor.
pub fn sufficiently_separated(schedule: &DynamicsSchedule, window: usize) -> Vec<(usize, bool)> {
    separation_of(&schedule.change_points(), window)
}

pub fn separation_of(change_points: &[usize], window: usize) -> Vec<(usize, bool)> {
    let gap = 4 * window - 1;
    let q = change_points.len();
    (0..q)
        .map(|i| {
            let prev = if i == 0 { 0 } else { change_points[i - 1] };
            let before = change_points[i] - prev >= gap;
            let after = i + 1 == q || change_points[i + 1] - change_points[i] >= gap;
            (change_points[i], before && after)
        })
        .collect()
}

/// `min(a / exp(sqrt(N)), 1 - 1e-12)`.
pub fn recommended_delta(window: usize, a: f64) -> f64 {
    (a / (window as f64).sqrt().exp()).min(1.0 - 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lds_sim::uav_schedule;

    fn inputs(window: usize, delta_change: f64) -> TheoryInputs {
        TheoryInputs {
            window,
            n: 5,
            p: 1,
            lambda: 1.0,
            params: ThresholdParams {
                delta: recommended_delta(window, 1000.0),
                b_sigma_w: 1.0,
                b_theta: 5.0,
            },
            beta: 40.0,
            sigma_u: 1.0,
            sigma_min: 1.0,
            delta_change,
        }
    }

    #[test]
    fn c1_is_exact() {
        let b = compute_bounds(&inputs(250, 2.0));
        assert_eq!(b.c1, 249.0 * (40.0 + 1.0));
    }

    #[test]
    fn hand_evaluated_bounds() {
        let inp = TheoryInputs {
            window: 100,
            n: 1,
            p: 1,
            lambda: 1.0,
            params: ThresholdParams {
                delta: 0.01,
                b_sigma_w: 1.0,
                b_theta: 1.0,
            },
            beta: 1.0,
            sigma_u: 1.0,
            sigma_min: 1.0,
            delta_change: 10.0,
        };
        let b = compute_bounds(&inp);
        let c1 = 99.0 * 2.0;
        let exc: f64 = 142.0;
        let expo = 10.0 * (exc / 20_000.0).sqrt() - ((1800f64).ln() / 2.0).sqrt();
        let de = 8.0 * c1 / expo.exp();
        assert!((b.delta_e - de).abs() < 1e-12 * de);
        let n1 = 400.0 * ((7.0 / c1).ln() + 10.0 * (exc / 5000.0).sqrt() - 168.0 / (5000.0 * exc).sqrt());
        assert!((b.n1 - n1).abs() < 1e-9 * n1.abs());
        assert!((b.n_change - (33.6 - 42.0)).abs() < 1e-12);
        assert!((b.true_alarm_lower - (1.0 - 201.0 * 0.01 - de)).abs() < 1e-12);
        assert!((b.lambda_cap - 4.0 * c1 / (std::f64::consts::E * de)).abs() < 1e-9);
    }

    #[test]
    fn delta_e_decreases_in_change_size() {
        let a = compute_bounds(&inputs(250, 2.0));
        let b = compute_bounds(&inputs(250, 4.0));
        assert!(b.delta_e < a.delta_e);
    }

    #[test]
    fn vacuous_bound_is_reported() {
        let mut inp = inputs(3, 0.1);
        inp.params.delta = 0.9;
        let b = compute_bounds(&inp);
        assert!(b.true_alarm_lower < 0.0);
        assert!(!b.conditions_met);
    }

    #[test]
    fn uav_separation() {
        let s = uav_schedule();
        assert_eq!(sufficiently_separated(&s, 250), vec![(2500, true), (5000, true)]);
        assert_eq!(
            sufficiently_separated(&s, 700),
            vec![(2500, false), (5000, false)]
        );
    }

    #[test]
    fn separation_boundaries() {
        assert_eq!(separation_of(&[39], 10), vec![(39, true)]);
        assert_eq!(separation_of(&[38], 10), vec![(38, false)]);
        // Middle point fails on its right gap only.
        assert_eq!(
            separation_of(&[40, 80, 100], 10),
            vec![(40, true), (80, false), (100, false)]
        );
        assert!(separation_of(&[], 10).is_empty());
    }

    #[test]
    fn recommended_delta_values() {
        let close = |a: f64, b: f64| ((a - b) / b).abs() < 0.05;
        assert!(close(recommended_delta(50, 1000.0), 0.85));
        assert!(close(recommended_delta(250, 1000.0), 1.3e-4));
        assert!(close(recommended_delta(450, 1000.0), 6.1e-7));
        assert_eq!(recommended_delta(2, 1000.0), 1.0 - 1e-12);
    }
}
