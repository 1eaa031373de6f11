use nmpk::lti::StateSpace;
use nmpk::signals::{noise_rng, Disturbances, SignalSpec};
use nmpk::sim::{sample_outputs, steady_state_error, SimGrid, Simulator};
use proptest::prelude::*;

fn lag() -> StateSpace<f64> {
    StateSpace::from_slices(&[0.0, 1.0, -2.0, -3.0], &[0.0, 1.0], &[1.0, 0.5], &[0.0, 1.0]).unwrap()
}

fn outputs(sim: &Simulator<f64>, input: impl Fn(f64) -> f64, x0: &[f64]) -> Vec<f64> {
    sim.run(input, &Disturbances::none(), x0, &mut noise_rng(0, 0)).unwrap().y
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn superposition(a1 in -2.0f64..2.0, w1 in 0.1f64..3.0, a2 in -2.0f64..2.0, w2 in 0.1f64..3.0, c1 in -3.0f64..3.0, c2 in -3.0f64..3.0) {
        let sim = Simulator::new(&StateSpace::benchmark_plant(), SimGrid::new(0.01, 20.0).unwrap()).unwrap();
        let x0 = [0.0; 4];
        let u1 = move |t: f64| a1 * (w1 * t).sin();
        let u2 = move |t: f64| a2 * (w2 * t).cos();
        let y1 = outputs(&sim, u1, &x0);
        let y2 = outputs(&sim, u2, &x0);
        let y12 = outputs(&sim, |t| c1 * u1(t) + c2 * u2(t), &x0);
        let scale = y12.iter().chain(&y1).chain(&y2).fold(1.0f64, |m, v| m.max(v.abs()));
        for k in 0..y12.len() {
            prop_assert!((y12[k] - c1 * y1[k] - c2 * y2[k]).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn shift_consistency(amp in -3.0f64..3.0, w in 0.01f64..2.0, phase in -3.0f64..3.0, t in -50.0f64..50.0, tau in -10.0f64..10.0, order in 0usize..5) {
        let s = SignalSpec::sinusoid(amp, w, phase);
        let shifted = s.clone().shifted(tau);
        prop_assert!((shifted.eval(t, order).unwrap() - s.eval(t + tau, order).unwrap()).abs() <= 1e-12 * (1.0 + amp.abs()));
    }

    #[test]
    fn derivatives_match_finite_differences(amp in -2.0f64..2.0, w in 0.01f64..1.5, phase in -3.0f64..3.0, coeffs in prop::collection::vec(-1.0f64..1.0, 0..4), t in -5.0f64..5.0, order in 0usize..4) {
        let s = SignalSpec::Sum { terms: vec![SignalSpec::sinusoid(amp, w, phase), SignalSpec::Polynomial { coefficients: coeffs }] };
        let h = 1e-4;
        let fd = (s.eval(t + h, order).unwrap() - s.eval(t - h, order).unwrap()) / (2.0 * h);
        prop_assert!((fd - s.eval(t, order + 1).unwrap()).abs() <= 1e-6);
    }
}

#[test]
fn step_halving_converges_at_first_order() {
    let ss = lag();
    let input = |t: f64| t.sin();
    let end = |h: f64| {
        let y = outputs(&Simulator::new(&ss, SimGrid::new(h, 2.0).unwrap()).unwrap(), input, &[0.0, 0.0]);
        *y.last().unwrap()
    };
    let reference = end(1e-4);
    let e1 = (end(0.02) - reference).abs();
    let e2 = (end(0.01) - reference).abs();
    let ratio = e1 / e2;
    assert!((1.5..=3.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn free_response_matches_closed_form() {
    // poles −1, −2; y = x₁ + 0.5x₂ from x(0) = (1, 0): x₁ = 2e^{−t} − e^{−2t}
    let sim = Simulator::new(&lag(), SimGrid::new(0.05, 3.0).unwrap()).unwrap();
    let traj = sim.run(|_| 0.0, &Disturbances::none(), &[1.0, 0.0], &mut noise_rng(0, 0)).unwrap();
    for (k, &t) in traj.times.iter().enumerate() {
        let x1 = 2.0 * (-t).exp() - (-2.0 * t).exp();
        let x2 = -2.0 * (-t).exp() + 2.0 * (-2.0 * t).exp();
        assert!((traj.y[k] - (x1 + 0.5 * x2)).abs() < 1e-12);
    }
}

#[test]
fn disturbances_are_bounded_and_reproducible() {
    let sim = Simulator::new(&StateSpace::benchmark_plant(), SimGrid::new(0.01, 30.0).unwrap()).unwrap();
    let dist = Disturbances::multiplicative(0.05);
    let input = |t: f64| (0.5 * t).sin();
    let a = sim.run(input, &dist, &[0.0; 4], &mut noise_rng(9, 3)).unwrap();
    let b = sim.run(input, &dist, &[0.0; 4], &mut noise_rng(9, 3)).unwrap();
    let c = sim.run(input, &dist, &[0.0; 4], &mut noise_rng(9, 4)).unwrap();
    assert_eq!(a.y, b.y);
    assert_ne!(a.y, c.y);
    for k in 0..a.len() {
        assert!((a.y[k] - a.y_clean[k]).abs() <= 0.05 * a.y_clean[k].abs() + 1e-15);
    }
    // without disturbances the seed is irrelevant
    let none = Disturbances::none();
    assert_eq!(sim.run(input, &none, &[0.0; 4], &mut noise_rng(1, 0)).unwrap().y, sim.run(input, &none, &[0.0; 4], &mut noise_rng(2, 5)).unwrap().y);
}

#[test]
fn sampling_and_metrics() {
    let sim = Simulator::new(&lag(), SimGrid::new(0.1, 5.0).unwrap()).unwrap();
    let traj = sim.run(|t| t, &Disturbances::none(), &[0.0, 0.0], &mut noise_rng(0, 0)).unwrap();
    let mid = sample_outputs(&traj, &[1.05]).unwrap()[0];
    assert!((mid - 0.5 * (traj.y[10] + traj.y[11])).abs() < 1e-12);
    assert!(sample_outputs(&traj, &[5.5]).is_err());
    let m = steady_state_error(&traj, |_| 0.0, 4.0, 5.0).unwrap();
    assert_eq!(m.samples, 11);
    assert!(m.max >= m.rms);
    assert!(steady_state_error(&traj, |_| 0.0, 6.0, 7.0).is_err());
}

#[test]
fn divergence_is_reported() {
    let ss = StateSpace::from_slices(&[5.0], &[1.0], &[1.0], &[1.0]).unwrap();
    let sim = Simulator::new(&ss, SimGrid::new(1.0, 400.0).unwrap()).unwrap();
    let err = sim.run(|_| 1.0, &Disturbances::none(), &[1.0], &mut noise_rng(0, 0)).unwrap_err();
    assert!(matches!(err, nmpk::Error::Divergence { .. }), "{err}");
}
