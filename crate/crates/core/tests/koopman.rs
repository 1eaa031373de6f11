use nmpk::koopman::{
    apply_operator, build_dictionary, chebyshev_radius, collect_output_matrix, identify_k, monte_carlo_collect, residual, sample_times,
    KoopmanOperator, OutputMatrix,
};
use nmpk::lti::StateSpace;
use nmpk::numkit::Matrix;
use nmpk::signals::{noise_rng, Disturbances, SignalSpec};
use nmpk::sim::{steady_state_error, SimGrid, Simulator};
use proptest::prelude::*;
use rand::Rng;

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix<f64> {
    let mut rng = noise_rng(seed, 0);
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn synthetic_recovery(seed in any::<u64>(), k_true in prop::collection::vec(-2.0f64..2.0, 42)) {
        let o = random_matrix(42, 100, seed);
        let desired = o.transpose().mul_vec(&k_true);
        let om = OutputMatrix::new(o, desired, sample_times(50.5, 100, 0.5)).unwrap();
        let id = identify_k(&om).unwrap();
        for (a, b) in id.k.iter().zip(&k_true) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
        prop_assert!(id.residual <= 1e-8);
    }

    #[test]
    fn solution_is_linear_in_desired_row(seed in any::<u64>(), c in -5.0f64..5.0) {
        let o = random_matrix(12, 30, seed);
        let d: Vec<f64> = random_matrix(1, 30, seed ^ 1).as_slice().to_vec();
        let times = sample_times(0.0, 30, 1.0);
        let base = identify_k(&OutputMatrix::new(o.clone(), d.clone(), times.clone()).unwrap()).unwrap();
        let scaled = identify_k(&OutputMatrix::new(o, d.iter().map(|v| c * v).collect(), times).unwrap()).unwrap();
        let scale = base.k.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in scaled.k.iter().zip(&base.k) {
            prop_assert!((a - c * b).abs() <= 1e-12 * scale * c.abs().max(1.0));
        }
    }

    #[test]
    fn operator_is_linear_in_coefficients(k1 in prop::collection::vec(-2.0f64..2.0, 7), k2 in prop::collection::vec(-2.0f64..2.0, 7), t in -20.0f64..20.0) {
        let dict = build_dictionary(SignalSpec::sinusoid(1.0, 0.3, 0.2), 3, 0.5, 1).unwrap();
        let sum: Vec<f64> = k1.iter().zip(&k2).map(|(a, b)| a + b).collect();
        let a = apply_operator(&KoopmanOperator::new(dict.clone(), k1).unwrap(), t);
        let b = apply_operator(&KoopmanOperator::new(dict.clone(), k2).unwrap(), t);
        let c = apply_operator(&KoopmanOperator::new(dict, sum).unwrap(), t);
        prop_assert!((c - a - b).abs() <= 1e-12);
    }
}

/// Benchmark protocol: N = 20, Δt = 0.5, two derivatives, 100 samples from t = 50.5.
fn protocol_operator(half_width: usize, dt: f64, dist: &Disturbances<f64>, seed: u64) -> (KoopmanOperator<f64>, OutputMatrix<f64>) {
    let ss = StateSpace::benchmark_plant();
    let dict = build_dictionary(SignalSpec::sinusoid(1.0, 0.1, 0.0), half_width, dt, 2).unwrap();
    let times = sample_times(50.5, 100, 0.5);
    let grid = SimGrid::covering(0.01, 100.0).unwrap();
    let om = collect_output_matrix(&ss, &dict, &times, dist, grid, seed).unwrap();
    let id = identify_k(&om).unwrap();
    (KoopmanOperator::new(dict, id.k).unwrap(), om)
}

#[test]
fn protocol_layout_and_self_consistency() {
    let (op, om) = protocol_operator(20, 0.5, &Disturbances::multiplicative(0.05), 11);
    assert_eq!(om.rows.shape(), (42, 100));
    assert_eq!(om.sample_times[99], 100.0);
    let id = identify_k(&om).unwrap();
    let fit = om.rows.transpose().mul_vec(op.coefficients());
    let manual = om.desired.iter().zip(&fit).map(|(d, f)| (d - f).powi(2)).sum::<f64>().sqrt();
    assert!((manual - id.residual).abs() <= 1e-10);
    assert!((residual(&om, op.coefficients()) - id.residual).abs() <= 1e-10);
}

#[test]
fn undisturbed_pipeline_tracks() {
    let ss = StateSpace::benchmark_plant();
    let sim = Simulator::new(&ss, SimGrid::new(0.01, 150.0).unwrap()).unwrap();
    let yd = SignalSpec::sinusoid(1.0, 0.1, 0.0);
    let error = |n: usize| {
        let (op, _) = protocol_operator(n, 0.5, &Disturbances::none(), 0);
        let traj = sim.run(|t| op.apply(t), &Disturbances::none(), &[0.0; 4], &mut noise_rng(0, 0)).unwrap();
        steady_state_error(&traj, |t| yd.eval(t, 0).unwrap(), 60.0, 150.0).unwrap().max
    };
    let (e10, e20) = (error(10), error(20));
    assert!(e10 < 1e-6 && e20 <= 1.1 * e10, "{e10} {e20}");
}

#[test]
fn averaged_deviation_shrinks_as_inverse_square_root() {
    let ss = StateSpace::benchmark_plant();
    let dict = build_dictionary(SignalSpec::sinusoid(1.0, 0.1, 0.0), 2, 0.5, 2).unwrap();
    let times = sample_times(20.0, 10, 0.5);
    let grid = SimGrid::covering(0.05, 30.0).unwrap();
    let dist = Disturbances::multiplicative(0.2);
    let repetitions = 12;
    let counts = [1usize, 4, 16, 64];
    let spread: Vec<f64> = counts
        .iter()
        .map(|&n| {
            let means: Vec<Matrix<f64>> = (0..repetitions)
                .map(|rep| monte_carlo_collect(&ss, &dict, &times, &dist, grid, n, 1000 + rep as u64).unwrap().mean.rows)
                .collect();
            let (m, j) = means[0].shape();
            let mut total = 0.0;
            for a in 0..m {
                for b in 0..j {
                    let mu = means.iter().map(|o| o[(a, b)]).sum::<f64>() / repetitions as f64;
                    let var = means.iter().map(|o| (o[(a, b)] - mu).powi(2)).sum::<f64>() / (repetitions - 1) as f64;
                    total += var.sqrt();
                }
            }
            total / (m * j) as f64
        })
        .collect();
    let xs: Vec<f64> = counts.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = spread.iter().map(|s| s.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 4.0, ys.iter().sum::<f64>() / 4.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((-0.7..=-0.3).contains(&slope), "slope {slope}, spread {spread:?}");
}

#[test]
fn undisturbed_average_is_trial_independent() {
    let ss = StateSpace::benchmark_plant();
    let dict = build_dictionary(SignalSpec::sinusoid(1.0, 0.1, 0.0), 2, 0.5, 2).unwrap();
    let times = sample_times(20.0, 10, 0.5);
    let grid = SimGrid::covering(0.05, 30.0).unwrap();
    let one = monte_carlo_collect(&ss, &dict, &times, &Disturbances::none(), grid, 1, 3).unwrap();
    let many = monte_carlo_collect(&ss, &dict, &times, &Disturbances::none(), grid, 5, 3).unwrap();
    assert!((&one.mean.rows - &many.mean.rows).max_abs() <= 1e-12);
    assert!(many.max_deviation() <= 1e-12);
    assert!(chebyshev_radius(0.1, 4, 16, 0.1) > chebyshev_radius(0.1, 4, 64, 0.1));
}
