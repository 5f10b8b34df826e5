//! Sliding-window regressor/label summaries.
//!
//! A window holds `width` pairs `(z_t, x_{t+1})` and keeps `Z Z'` and `X Z'`
//! up to date with rank-one add/subtract updates. Rounding error from the
//! subtractions is bounded by rebuilding both sums from the ring every
//! `rebuild_every` slides.

use std::collections::VecDeque;
use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lds_sim::format_f64;
use crate::linalg::{symmetric_min_eigenvalue, SpdFactor};

pub const DEFAULT_REBUILD_EVERY: usize = 512;

/// A regressor and the state it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub z: DVector<f64>,
    pub x_next: DVector<f64>,
}

impl Pair {
    pub fn new(z: DVector<f64>, x_next: DVector<f64>) -> Self {
        Self { z, x_next }
    }
}

#[derive(Debug, Clone)]
pub struct WindowState {
    width: usize,
    gram: DMatrix<f64>,
    cross: DMatrix<f64>,
    ring: VecDeque<Pair>,
    steps_since_rebuild: usize,
    rebuild_every: usize,
}

impl WindowState {
    /// Builds a window from scratch; its width is `pairs.len()`.
    pub fn build(pairs: Vec<Pair>) -> Result<Self> {
        Self::build_with_rebuild(pairs, DEFAULT_REBUILD_EVERY)
    }

    pub fn build_with_rebuild(pairs: Vec<Pair>, rebuild_every: usize) -> Result<Self> {
        let first = pairs
            .first()
            .ok_or_else(|| Error::InvalidWindow("a window needs at least one pair".into()))?;
        if rebuild_every == 0 {
            return Err(Error::InvalidWindow("rebuild interval must be positive".into()));
        }
        let (d, n) = (first.z.len(), first.x_next.len());
        for pair in &pairs {
            if pair.z.len() != d {
                return Err(Error::Dimension {
                    what: "window regressor",
                    expected: d,
                    actual: pair.z.len(),
                });
            }
            if pair.x_next.len() != n {
                return Err(Error::Dimension {
                    what: "window label",
                    expected: n,
                    actual: pair.x_next.len(),
                });
            }
        }
        let mut w = Self {
            width: pairs.len(),
            gram: DMatrix::zeros(d, d),
            cross: DMatrix::zeros(n, d),
            ring: pairs.into(),
            steps_since_rebuild: 0,
            rebuild_every,
        };
        w.rebuild();
        Ok(w)
    }

    fn rebuild(&mut self) {
        self.gram.fill(0.0);
        self.cross.fill(0.0);
        for pair in &self.ring {
            self.gram.ger(1.0, &pair.z, &pair.z, 1.0);
            self.cross.ger(1.0, &pair.x_next, &pair.z, 1.0);
        }
        self.steps_since_rebuild = 0;
    }

    /// Pushes `incoming`, evicts and returns the oldest pair.
    pub fn slide(&mut self, incoming: Pair) -> Result<Pair> {
        if incoming.z.len() != self.regressor_dim() {
            return Err(Error::Dimension {
                what: "window regressor",
                expected: self.regressor_dim(),
                actual: incoming.z.len(),
            });
        }
        if incoming.x_next.len() != self.label_dim() {
            return Err(Error::Dimension {
                what: "window label",
                expected: self.label_dim(),
                actual: incoming.x_next.len(),
            });
        }
        let old = self.ring.pop_front().expect("window is never empty");
        self.steps_since_rebuild += 1;
        if self.steps_since_rebuild >= self.rebuild_every {
            self.ring.push_back(incoming);
            self.rebuild();
        } else {
            self.gram.ger(1.0, &incoming.z, &incoming.z, 1.0);
            self.gram.ger(-1.0, &old.z, &old.z, 1.0);
            self.cross.ger(1.0, &incoming.x_next, &incoming.z, 1.0);
            self.cross.ger(-1.0, &old.x_next, &old.z, 1.0);
            self.ring.push_back(incoming);
        }
        Ok(old)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn regressor_dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn label_dim(&self) -> usize {
        self.cross.nrows()
    }

    /// `Z Z'`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// `X Z'`.
    pub fn cross(&self) -> &DMatrix<f64> {
        &self.cross
    }

    pub fn pairs(&self) -> impl ExactSizeIterator<Item = &Pair> {
        self.ring.iter()
    }

    pub fn steps_since_rebuild(&self) -> usize {
        self.steps_since_rebuild
    }

    pub fn factor(&self, lambda: f64) -> SpdFactor {
        SpdFactor::regularized(&self.gram, lambda)
            .expect("gram + lambda I is positive definite for lambda > 0")
    }

    /// `lambda_min(Z Z' + lambda I)`.
    pub fn regularized_min_eig(&self, lambda: f64) -> f64 {
        let mut m = self.gram.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += lambda;
        }
        symmetric_min_eigenvalue(&m)
    }

    /// `log det((Z Z' + lambda I) / lambda)`, clamped at zero against rounding.
    pub fn logdet_vbar(&self, lambda: f64) -> f64 {
        self.logdet_vbar_with(&self.factor(lambda), lambda)
    }

    pub(crate) fn logdet_vbar_with(&self, factor: &SpdFactor, lambda: f64) -> f64 {
        (factor.ln_det() - self.regressor_dim() as f64 * lambda.ln()).max(0.0)
    }

    /// Dumps `gram` then `cross` as CSV rows tagged with the matrix name.
    pub fn write_debug_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        for (name, m) in [("gram", &self.gram), ("cross", &self.cross)] {
            for i in 0..m.nrows() {
                let mut row = vec![name.to_string(), i.to_string()];
                row.extend(m.row(i).iter().map(|v| format_f64(*v)));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e1(d: usize) -> DVector<f64> {
        let mut v = DVector::zeros(d);
        v[0] = 1.0;
        v
    }

    fn random_pair(rng: &mut ChaCha8Rng, d: usize, n: usize) -> Pair {
        Pair::new(
            DVector::from_fn(d, |_, _| rng.random_range(-2.0..2.0)),
            DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0)),
        )
    }

    /// Stacks the ring into explicit Z, X and multiplies.
    fn stacked(w: &WindowState) -> (DMatrix<f64>, DMatrix<f64>) {
        let cols: Vec<_> = w.pairs().map(|p| p.z.clone()).collect();
        let labels: Vec<_> = w.pairs().map(|p| p.x_next.clone()).collect();
        let z = DMatrix::from_columns(&cols);
        let x = DMatrix::from_columns(&labels);
        (&z * z.transpose(), &x * z.transpose())
    }

    #[test]
    fn single_pair_rank_one() {
        let w = WindowState::build(vec![Pair::new(e1(3), e1(2))]).unwrap();
        let mut g = DMatrix::zeros(3, 3);
        g[(0, 0)] = 1.0;
        let mut c = DMatrix::zeros(2, 3);
        c[(0, 0)] = 1.0;
        assert_eq!(w.gram(), &g);
        assert_eq!(w.cross(), &c);
    }

    #[test]
    fn build_matches_stacking() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pairs: Vec<_> = (0..3).map(|_| random_pair(&mut rng, 4, 3)).collect();
        let w = WindowState::build(pairs).unwrap();
        let (g, c) = stacked(&w);
        assert!((w.gram() - g).norm() < 1e-13);
        assert!((w.cross() - c).norm() < 1e-13);
    }

    #[test]
    fn zero_pairs_give_zero_sums() {
        let w = WindowState::build(vec![Pair::new(DVector::zeros(2), DVector::zeros(1)); 4]).unwrap();
        assert_eq!(w.gram().norm(), 0.0);
        assert_eq!(w.cross().norm(), 0.0);
    }

    #[test]
    fn build_errors() {
        assert!(WindowState::build(vec![]).is_err());
        let bad = vec![
            Pair::new(DVector::zeros(2), DVector::zeros(1)),
            Pair::new(DVector::zeros(3), DVector::zeros(1)),
        ];
        assert!(matches!(WindowState::build(bad), Err(Error::Dimension { .. })));
    }

    #[test]
    fn swapping_in_the_evicted_pair_is_a_no_op() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pairs: Vec<_> = (0..1).map(|_| random_pair(&mut rng, 3, 2)).collect();
        let mut w = WindowState::build(pairs.clone()).unwrap();
        let g0 = w.gram().clone();
        let c0 = w.cross().clone();
        let out = w.slide(pairs[0].clone()).unwrap();
        assert_eq!(out, pairs[0]);
        assert!((w.gram() - g0).norm() < 1e-13);
        assert!((w.cross() - c0).norm() < 1e-13);
    }

    #[test]
    fn width_one_slide_replaces_term() {
        let mut w = WindowState::build(vec![Pair::new(e1(2), e1(1))]).unwrap();
        let incoming = Pair::new(DVector::from_vec(vec![0.0, 2.0]), DVector::from_vec(vec![3.0]));
        w.slide(incoming).unwrap();
        assert_eq!(w.gram()[(1, 1)], 4.0);
        assert_eq!(w.gram()[(0, 0)], 0.0);
        assert_eq!(w.cross()[(0, 1)], 6.0);
        assert_eq!(w.cross()[(0, 0)], 0.0);
    }

    #[test]
    fn thousand_slides_match_rebuild() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pairs: Vec<_> = (0..20).map(|_| random_pair(&mut rng, 6, 5)).collect();
        // Interval larger than the run so drift is never reset.
        let mut w = WindowState::build_with_rebuild(pairs, 10_000).unwrap();
        for _ in 0..1000 {
            w.slide(random_pair(&mut rng, 6, 5)).unwrap();
        }
        assert_eq!(w.steps_since_rebuild(), 1000);
        let (g, c) = stacked(&w);
        assert!((w.gram() - &g).norm() / g.norm() < 1e-8);
        assert!((w.cross() - &c).norm() / c.norm() < 1e-8);
    }

    #[test]
    fn rebuild_resets_counter() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pairs: Vec<_> = (0..5).map(|_| random_pair(&mut rng, 2, 1)).collect();
        let mut w = WindowState::build_with_rebuild(pairs, 4).unwrap();
        for i in 1..=9 {
            w.slide(random_pair(&mut rng, 2, 1)).unwrap();
            assert_eq!(w.steps_since_rebuild(), i % 4);
        }
        let (g, _) = stacked(&w);
        assert!((w.gram() - g).norm() < 1e-12);
    }

    #[test]
    fn min_eig_closed_forms() {
        let w = WindowState::build(vec![Pair::new(DVector::zeros(3), DVector::zeros(1))]).unwrap();
        assert!((w.regularized_min_eig(1.0) - 1.0).abs() < 1e-15);
        let w = WindowState::build(vec![Pair::new(
            DVector::from_vec(vec![3f64.sqrt(), 0.0]),
            DVector::zeros(1),
        )])
        .unwrap();
        assert!((w.regularized_min_eig(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn min_eig_matches_characteristic_polynomial_for_2x2() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let pairs: Vec<_> = (0..3).map(|_| random_pair(&mut rng, 2, 1)).collect();
            let w = WindowState::build(pairs).unwrap();
            let lambda = 0.7;
            let g = w.gram();
            let (a, b, d) = (g[(0, 0)] + lambda, g[(0, 1)], g[(1, 1)] + lambda);
            // Roots of t^2 - (a+d) t + (ad - b^2).
            let mean = 0.5 * (a + d);
            let disc = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            let oracle = mean - disc;
            assert!((w.regularized_min_eig(lambda) - oracle).abs() < 1e-10 * (1.0 + oracle));
        }
    }

    #[test]
    fn logdet_closed_forms() {
        let w = WindowState::build(vec![Pair::new(DVector::zeros(2), DVector::zeros(1))]).unwrap();
        assert_eq!(w.logdet_vbar(1.0), 0.0);
        let lambda: f64 = 0.3;
        let s = lambda.sqrt();
        let w = WindowState::build(vec![
            Pair::new(DVector::from_vec(vec![s, 0.0]), DVector::zeros(1)),
            Pair::new(DVector::from_vec(vec![0.0, s]), DVector::zeros(1)),
        ])
        .unwrap();
        assert!((w.logdet_vbar(lambda) - 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn logdet_matches_eigenvalue_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pairs: Vec<_> = (0..8).map(|_| random_pair(&mut rng, 4, 2)).collect();
        let w = WindowState::build(pairs).unwrap();
        let lambda = 0.9;
        let eig = w.gram().clone().symmetric_eigenvalues();
        let oracle: f64 = eig.iter().map(|e| ((e + lambda) / lambda).ln()).sum();
        assert!((w.logdet_vbar(lambda) - oracle).abs() < 1e-10);
    }

    #[test]
    fn logdet_vanishes_for_huge_lambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pairs: Vec<_> = (0..8).map(|_| random_pair(&mut rng, 4, 2)).collect();
        let w = WindowState::build(pairs).unwrap();
        let lambda = 1e12 * w.gram().norm();
        assert!(w.logdet_vbar(lambda) <= 1e-6);
    }

    #[test]
    fn debug_dump_lists_both_matrices() {
        let w = WindowState::build(vec![Pair::new(e1(2), e1(1))]).unwrap();
        let mut buf = Vec::new();
        w.write_debug_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "gram,0,1.0,0.0\ngram,1,0.0,0.0\ncross,0,1.0,0.0\n");
    }
}
