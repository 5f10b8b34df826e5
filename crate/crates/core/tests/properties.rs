use lds_cpd::detector::window_threshold_term;
use lds_cpd::{
    run_detector, simulate, spectral_norm_diff, DetectorConfig, DynamicsSchedule, NoiseSpec, Pair,
    ThresholdParams, Trajectory, WindowState,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-10.0f64..10.0, rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn window(d: usize, n: usize, width: usize) -> impl Strategy<Value = WindowState> {
    prop::collection::vec(
        (
            prop::collection::vec(-3.0f64..3.0, d),
            prop::collection::vec(-3.0f64..3.0, n),
        ),
        width,
    )
    .prop_map(|pairs| {
        WindowState::build(
            pairs
                .into_iter()
                .map(|(z, x)| Pair::new(DVector::from_vec(z), DVector::from_vec(x)))
                .collect(),
        )
        .unwrap()
    })
}

proptest! {
    #[test]
    fn min_eig_increases_with_lambda(w in window(3, 2, 6), l in 0.01f64..5.0, extra in 0.01f64..5.0) {
        let lo = w.regularized_min_eig(l);
        let hi = w.regularized_min_eig(l + extra);
        prop_assert!(hi >= lo);
        prop_assert!(((hi - lo) - extra).abs() <= 1e-9 * (1.0 + hi.abs()));
    }

    #[test]
    fn logdet_nonnegative(w in window(4, 1, 5), l in 0.01f64..5.0) {
        prop_assert!(w.logdet_vbar(l) >= 0.0);
    }

    #[test]
    fn norm_diff_symmetric((a, b) in (1usize..5, 1usize..5).prop_flat_map(|(r, c)| (matrix(r, c), matrix(r, c)))) {
        let ab = spectral_norm_diff(&a, &b).unwrap();
        prop_assert_eq!(ab, spectral_norm_diff(&b, &a).unwrap());
        prop_assert_eq!(spectral_norm_diff(&a, &a).unwrap(), 0.0);
        prop_assert!(ab <= (&a - &b).norm() + 1e-12);
    }

    #[test]
    fn gamma_term_non_increasing_in_min_eig(
        logdet in 0.0f64..50.0,
        m in 0.1f64..100.0,
        extra in 0.0f64..100.0,
        delta in 1e-9f64..0.9,
    ) {
        let t = ThresholdParams { delta, b_sigma_w: 1.3, b_theta: 2.0 };
        let lo = window_threshold_term(logdet, m, 1.0, 3, &t);
        let hi = window_threshold_term(logdet, m + extra, 1.0, 3, &t);
        prop_assert!(lo > 0.0 && hi > 0.0);
        prop_assert!(hi <= lo);
    }

    #[test]
    fn slide_matches_rebuild(w in window(2, 2, 8), incoming in window(2, 2, 30), every in 1usize..10) {
        let mut w = WindowState::build_with_rebuild(w.pairs().cloned().collect(), every).unwrap();
        for p in incoming.pairs() {
            w.slide(p.clone()).unwrap();
        }
        let direct = WindowState::build(w.pairs().cloned().collect()).unwrap();
        prop_assert!((w.gram() - direct.gram()).norm() <= 1e-9 * (1.0 + direct.gram().norm()));
        prop_assert!((w.cross() - direct.cross()).norm() <= 1e-9 * (1.0 + direct.cross().norm()));
    }

    #[test]
    fn trajectory_csv_round_trip(
        seed in any::<u64>(),
        horizon in 1usize..40,
        a in -0.9f64..0.9,
        b in -2.0f64..2.0,
    ) {
        let s = DynamicsSchedule::constant(
            DMatrix::from_row_slice(2, 2, &[a, 0.1, 0.0, a / 2.0]),
            DMatrix::from_row_slice(2, 1, &[b, 1.0]),
        ).unwrap();
        let traj = simulate(&s, &NoiseSpec::new(1.0, 0.5, seed).unwrap(), horizon, &DVector::zeros(2)).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let back = Trajectory::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(&back.states, &traj.states);
        prop_assert_eq!(&back.inputs, &traj.inputs);
    }

    #[test]
    fn flags_respect_refractory_gap(seed in any::<u64>(), n_win in 2usize..10, gamma in 0.0f64..0.5) {
        let s = DynamicsSchedule::constant(DMatrix::from_element(1, 1, 0.5), DMatrix::from_element(1, 1, 1.0))
            .unwrap();
        let traj = simulate(&s, &NoiseSpec::new(1.0, 1.0, seed).unwrap(), 200, &DVector::zeros(1)).unwrap();
        let cfg = DetectorConfig::with_override(n_win, 1.0, 1, 1, gamma);
        let flags = run_detector(&traj, &cfg).unwrap().flagged();
        prop_assert!(flags.windows(2).all(|f| f[1] - f[0] > 2 * n_win - 2));
    }
}
