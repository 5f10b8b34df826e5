//! Switched linear system simulation.
//!
//! The system evolves as `x[k+1] = A_k x[k] + B_k u[k] + w[k]` where the pair
//! `(A_k, B_k)` is piecewise constant in `k`. A segment starting at index `s`
//! governs every transition `x[k] -> x[k+1]` with `k >= s` up to the next
//! segment start.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::spectral_norm;

const INPUT_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

/// One constant-dynamics piece of a [`DynamicsSchedule`].
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl Segment {
    /// The stacked parameter `[A B]`.
    pub fn theta(&self) -> DMatrix<f64> {
        let n = self.a.nrows();
        let p = self.b.ncols();
        let mut theta = DMatrix::zeros(n, n + p);
        theta.view_mut((0, 0), (n, n)).copy_from(&self.a);
        theta.view_mut((0, n), (n, p)).copy_from(&self.b);
        theta
    }
}

/// Piecewise-constant system matrices with validated change points.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsSchedule {
    n: usize,
    p: usize,
    segments: Vec<Segment>,
}

impl DynamicsSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let first = segments
            .first()
            .ok_or_else(|| Error::InvalidSchedule("at least one segment is required".into()))?;
        if first.start != 0 {
            return Err(Error::InvalidSchedule(format!(
                "first segment must start at 0, starts at {}",
                first.start
            )));
        }
        let n = first.a.nrows();
        let p = first.b.ncols();
        if n == 0 {
            return Err(Error::InvalidSchedule("state dimension must be positive".into()));
        }
        for (i, seg) in segments.iter().enumerate() {
            if seg.a.shape() != (n, n) || seg.b.shape() != (n, p) {
                return Err(Error::InvalidSchedule(format!(
                    "segment {i}: A is {:?} and B is {:?}, expected ({n}, {n}) and ({n}, {p})",
                    seg.a.shape(),
                    seg.b.shape()
                )));
            }
            if seg.a.iter().chain(seg.b.iter()).any(|v| !v.is_finite()) {
                return Err(Error::InvalidSchedule(format!("segment {i}: non-finite entry")));
            }
        }
        for (i, pair) in segments.windows(2).enumerate() {
            if pair[1].start <= pair[0].start {
                return Err(Error::InvalidSchedule(format!(
                    "segment starts must strictly increase ({} then {})",
                    pair[0].start, pair[1].start
                )));
            }
            if spectral_norm(&(pair[0].theta() - pair[1].theta())) <= 0.0 {
                return Err(Error::InvalidSchedule(format!(
                    "segments {i} and {} have identical dynamics; a zero jump is not a change point",
                    i + 1
                )));
            }
        }
        Ok(Self { n, p, segments })
    }

    /// A schedule with a single segment, i.e. no change points.
    pub fn constant(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        Self::new(vec![Segment { start: 0, a, b }])
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn input_dim(&self) -> usize {
        self.p
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment_at(&self, k: usize) -> &Segment {
        // First segment starts at 0, so the partition point is at least 1.
        let idx = self.segments.partition_point(|s| s.start <= k);
        &self.segments[idx - 1]
    }

    /// `[A_k B_k]` for the segment governing step `k`.
    pub fn theta_at(&self, k: usize) -> DMatrix<f64> {
        self.segment_at(k).theta()
    }

    /// Spectral norm of `Theta_{k-1} - Theta_k`.
    pub fn change_magnitude(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::ChangeAtOrigin);
        }
        let prev = self.segment_at(k - 1);
        let cur = self.segment_at(k);
        if std::ptr::eq(prev, cur) {
            return Ok(0.0);
        }
        Ok(spectral_norm(&(prev.theta() - cur.theta())))
    }

    pub fn change_points(&self) -> Vec<usize> {
        self.segments.iter().skip(1).map(|s| s.start).collect()
    }

    /// `max_k ||Theta_k||` over all segments.
    pub fn max_theta_norm(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| spectral_norm(&s.theta()))
            .fold(0.0, f64::max)
    }

    pub fn to_spec(&self, noise: &NoiseSpec) -> SystemSpec {
        SystemSpec {
            n: self.n,
            p: self.p,
            segments: self
                .segments
                .iter()
                .map(|s| SegmentSpec {
                    start: s.start,
                    a: row_major(&s.a),
                    b: row_major(&s.b),
                })
                .collect(),
            sigma_u: noise.sigma_u,
            sigma_w: noise.sigma_w,
            seed: noise.seed,
        }
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// Gaussian input and process-noise levels plus the seed of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma_u: f64,
    pub sigma_w: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma_u: f64, sigma_w: f64, seed: u64) -> Result<Self> {
        let spec = Self {
            sigma_u,
            sigma_w,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Zero input and noise. Only meaningful for exercising the simulator.
    pub fn noiseless(seed: u64) -> Self {
        Self {
            sigma_u: 0.0,
            sigma_w: 0.0,
            seed,
        }
    }

    /// Checks `sigma_u > 0` and `sigma_w > 0`.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma_u", self.sigma_u), ("sigma_w", self.sigma_w)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidNoise(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_u.min(self.sigma_w)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Observed states and inputs of one simulated (or loaded) run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `x_0 ..= x_T`.
    pub states: Vec<DVector<f64>>,
    /// `u_0 .. u_{T-1}`.
    pub inputs: Vec<DVector<f64>>,
    /// `w_0 .. w_{T-1}` when the trajectory was simulated; absent when loaded
    /// from CSV.
    pub process_noise: Option<Vec<DVector<f64>>>,
}

impl Trajectory {
    /// Horizon `T`, the number of transitions.
    pub fn horizon(&self) -> usize {
        self.inputs.len()
    }

    pub fn state_dim(&self) -> usize {
        self.states.first().map_or(0, |x| x.len())
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.first().map_or(0, |u| u.len())
    }

    /// `z_k = [x_k; u_k]` for `k < T`.
    pub fn regressor(&self, k: usize) -> DVector<f64> {
        let x = &self.states[k];
        let u = &self.inputs[k];
        DVector::from_iterator(x.len() + u.len(), x.iter().chain(u.iter()).copied())
    }

    /// Writes columns `k, x_1..x_n, u_1..u_p`. The final row (`k = T`) has no
    /// input, so its `u` cells are empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.state_dim();
        let p = self.input_dim();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["k".to_string()];
        header.extend((1..=n).map(|i| format!("x_{i}")));
        header.extend((1..=p).map(|i| format!("u_{i}")));
        w.write_record(&header)?;
        for (k, x) in self.states.iter().enumerate() {
            let mut row = vec![k.to_string()];
            row.extend(x.iter().map(|v| format_f64(*v)));
            match self.inputs.get(k) {
                Some(u) => row.extend(u.iter().map(|v| format_f64(*v))),
                None => row.extend(std::iter::repeat_n(String::new(), p)),
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        let n = header.iter().filter(|h| h.starts_with("x_")).count();
        let p = header.iter().filter(|h| h.starts_with("u_")).count();
        if header.get(0) != Some("k") || header.len() != 1 + n + p || n == 0 {
            return Err(Error::TrajectoryCsv(format!(
                "expected header k,x_1..x_n,u_1..u_p, got {:?}",
                header.iter().collect::<Vec<_>>()
            )));
        }
        let parse = |s: &str, line: usize| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::TrajectoryCsv(format!("row {line}: {e} in {s:?}")))
        };
        let mut states = Vec::new();
        let mut inputs = Vec::new();
        let mut saw_final = false;
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            if saw_final {
                return Err(Error::TrajectoryCsv(format!(
                    "row {line}: only the last row may omit inputs"
                )));
            }
            let k: usize = rec[0]
                .trim()
                .parse()
                .map_err(|e| Error::TrajectoryCsv(format!("row {line}: bad k: {e}")))?;
            if k != line {
                return Err(Error::TrajectoryCsv(format!(
                    "row {line}: expected k = {line}, got {k}"
                )));
            }
            let x = (1..=n)
                .map(|i| parse(&rec[i], line))
                .collect::<Result<Vec<_>>>()?;
            states.push(DVector::from_vec(x));
            let u_cells: Vec<&str> = (n + 1..=n + p).map(|i| &rec[i]).collect();
            if p > 0 && u_cells.iter().all(|c| c.trim().is_empty()) {
                saw_final = true;
            } else if p == 0 {
                inputs.push(DVector::zeros(0));
            } else {
                let u = u_cells
                    .iter()
                    .map(|c| parse(c, line))
                    .collect::<Result<Vec<_>>>()?;
                inputs.push(DVector::from_vec(u));
            }
        }
        if p == 0 {
            // Without input columns the final state is implied by row count.
            inputs.pop();
            saw_final = !states.is_empty();
        }
        if !saw_final || states.len() != inputs.len() + 1 {
            return Err(Error::TrajectoryCsv(
                "the last row (k = T) must carry x only and every other row both x and u".into(),
            ));
        }
        Ok(Self {
            states,
            inputs,
            process_noise: None,
        })
    }
}

/// Shortest string that round-trips to the same `f64`.
pub(crate) fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Simulates `horizon` transitions from `x0`.
///
/// Inputs and process noise come from two independent ChaCha8 streams of the
/// same seed, drawn one time step at a time, so extending the horizon never
/// changes earlier samples.
pub fn simulate(
    schedule: &DynamicsSchedule,
    noise: &NoiseSpec,
    horizon: usize,
    x0: &DVector<f64>,
) -> Result<Trajectory> {
    if x0.len() != schedule.n {
        return Err(Error::Dimension {
            what: "initial state",
            expected: schedule.n,
            actual: x0.len(),
        });
    }
    if horizon == 0 {
        return Err(Error::InvalidSchedule("horizon must be at least 1".into()));
    }
    if !(noise.sigma_u >= 0.0 && noise.sigma_w >= 0.0) {
        return Err(Error::InvalidNoise(
            "standard deviations must be non-negative".into(),
        ));
    }
    let (n, p) = (schedule.n, schedule.p);
    let mut input_rng = ChaCha8Rng::seed_from_u64(noise.seed);
    input_rng.set_stream(INPUT_STREAM);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(noise.seed);
    noise_rng.set_stream(NOISE_STREAM);

    let mut states = Vec::with_capacity(horizon + 1);
    let mut inputs = Vec::with_capacity(horizon);
    let mut noises = Vec::with_capacity(horizon);
    states.push(x0.clone());
    for k in 0..horizon {
        let seg = schedule.segment_at(k);
        let u = DVector::from_fn(p, |_, _| {
            noise.sigma_u * input_rng.sample::<f64, _>(StandardNormal)
        });
        let w = DVector::from_fn(n, |_, _| {
            noise.sigma_w * noise_rng.sample::<f64, _>(StandardNormal)
        });
        let next = &seg.a * &states[k] + &seg.b * &u + &w;
        states.push(next);
        inputs.push(u);
        noises.push(w);
    }
    Ok(Trajectory {
        states,
        inputs,
        process_noise: Some(noises),
    })
}

/// Largest mean of `||x_k||^2 = tr(x_k x_k')` over any run of `window`
/// consecutive states. Used as an empirical stand-in for the second-moment
/// bound of the state.
pub fn max_windowed_second_moment(traj: &Trajectory, window: usize) -> f64 {
    let sq: Vec<f64> = traj.states.iter().map(|x| x.norm_squared()).collect();
    let window = window.clamp(1, sq.len().max(1));
    if sq.is_empty() {
        return 0.0;
    }
    let mut sum: f64 = sq[..window].iter().sum();
    let mut best = sum;
    for i in window..sq.len() {
        sum += sq[i] - sq[i - window];
        best = best.max(sum);
    }
    best / window as f64
}

/// Discretized longitudinal UAV dynamics with perturbations on `A[0][0]` and
/// `B[0]`: `(0, 0)` before 2500, `(-1, 2)` on `[2500, 4999]`, `(-1, 0)` after.
pub fn uav_schedule() -> DynamicsSchedule {
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(5, 5, &[
         0.9371,  0.068,  -0.9507, -0.0367, 0.0,
        -0.0085,  0.2761, -0.0207,  0.411,  0.0,
         0.0035, -0.0164,  0.9991,  0.043,  0.0,
         0.0548, -0.1914, -0.0253,  0.0593, 0.0,
        -0.0086,  0.0726, -1.6984, -0.0146, 1.0,
    ]);
    let b = DMatrix::from_column_slice(5, 1, &[0.361, -4.8436, -0.3888, -5.6967, 0.0492]);
    let perturbed = |eps_a: f64, eps_b: f64| {
        let mut a = a.clone();
        let mut b = b.clone();
        a[(0, 0)] += eps_a;
        b[(0, 0)] += eps_b;
        (a, b)
    };
    let (a1, b1) = perturbed(-1.0, 2.0);
    let (a2, b2) = perturbed(-1.0, 0.0);
    DynamicsSchedule::new(vec![
        Segment { start: 0, a, b },
        Segment {
            start: 2500,
            a: a1,
            b: b1,
        },
        Segment {
            start: 5000,
            a: a2,
            b: b2,
        },
    ])
    .expect("built-in UAV schedule is valid")
}

/// Serializable form of a schedule and its noise levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub n: usize,
    pub p: usize,
    pub segments: Vec<SegmentSpec>,
    pub sigma_u: f64,
    pub sigma_w: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub start: usize,
    /// Row-major `n x n`.
    #[serde(rename = "A", alias = "a")]
    pub a: Vec<f64>,
    /// Row-major `n x p`.
    #[serde(rename = "B", alias = "b")]
    pub b: Vec<f64>,
}

impl SystemSpec {
    pub fn build(&self) -> Result<(DynamicsSchedule, NoiseSpec)> {
        let (n, p) = (self.n, self.p);
        let segments = self
            .segments
            .iter()
            .map(|s| {
                if s.a.len() != n * n {
                    return Err(Error::Dimension {
                        what: "segment A entries",
                        expected: n * n,
                        actual: s.a.len(),
                    });
                }
                if s.b.len() != n * p {
                    return Err(Error::Dimension {
                        what: "segment B entries",
                        expected: n * p,
                        actual: s.b.len(),
                    });
                }
                Ok(Segment {
                    start: s.start,
                    a: DMatrix::from_row_slice(n, n, &s.a),
                    b: DMatrix::from_row_slice(n, p, &s.b),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let schedule = DynamicsSchedule::new(segments)?;
        let noise = NoiseSpec::new(self.sigma_u, self.sigma_w, self.seed)?;
        Ok((schedule, noise))
    }
}
