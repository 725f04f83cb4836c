use proptest::prelude::*;
use smdo_core::sim::{self, Plant, ReferenceProfile, TransferFunction};
use smdo_core::{CiConfig, PiController, PiGains, SaturationLimits};

fn first_order(p: f64) -> TransferFunction {
    TransferFunction::new(vec![0.0, 1.0 - p], vec![1.0, -p], 1.0).unwrap()
}

#[test]
fn first_order_step_matches_closed_form() {
    for p in [0.5, 0.9, 0.99, -0.3] {
        let y = first_order(p).response(&vec![1.0; 2000]).unwrap();
        let worst = y
            .iter()
            .enumerate()
            .map(|(k, y)| (y - (1.0 - p.powi(k as i32))).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-12, "p = {p}: deviation {worst:e}");
    }
}

#[test]
fn closed_loop_is_deterministic() {
    let s = smdo_core::scenario::builtin_surrogate_refrigeration();
    let gains = [
        PiGains::new(3.0, 0.2).unwrap(),
        PiGains::new(2.0, 0.5).unwrap(),
    ];
    let a = s.simulate(&gains).unwrap();
    let b = s.simulate(&gains).unwrap();
    let bits = |run: &sim::ClosedLoopRun| -> Vec<u64> {
        run.trace
            .loops
            .iter()
            .flat_map(|l| l.output.iter().chain(&l.control).map(|v| v.to_bits()))
            .collect()
    };
    assert_eq!(bits(&a), bits(&b));
    a.trace.validate_complete(s.steps()).unwrap();
}

#[test]
fn pi_removes_steady_state_error_on_first_order_plant() {
    // Dominant closed-loop pole ≈ 0.954 (τ ≈ 21 samples); 500 samples ≈ 23τ.
    let plant = Plant::siso(TransferFunction::first_order(0.9, 1.0, 1.0).unwrap());
    let mut ctrl = [PiController::new(
        PiGains::new(0.5, 0.05).unwrap(),
        SaturationLimits::new(-100.0, 100.0).unwrap(),
        CiConfig::band(10.0).unwrap(),
        1.0,
    )];
    let run =
        sim::simulate_closed_loop(&plant, &mut ctrl, &[ReferenceProfile::constant(1.0)], 500.0)
            .unwrap();
    assert!(!run.trace.loops[0].saturated.iter().any(|&s| s));
    assert!(run.trace.loops[0].error.last().unwrap().abs() < 1e-6);
}

proptest! {
    #[test]
    fn open_loop_response_is_linear(
        num in prop::collection::vec(-2.0..2.0f64, 1..4),
        tail in prop::collection::vec(-0.4..0.4f64, 0..3),
        u1 in prop::collection::vec(-5.0..5.0f64, 1..64),
        seed_u2 in prop::collection::vec(-5.0..5.0f64, 64),
        alpha in -3.0..3.0f64,
        beta in -3.0..3.0f64,
    ) {
        let mut den = vec![1.0];
        den.extend(tail);
        let tf = TransferFunction::new(num, den, 0.5).unwrap();
        let u2 = &seed_u2[..u1.len()];
        let mixed: Vec<f64> = u1.iter().zip(u2).map(|(a, b)| alpha * a + beta * b).collect();
        let y1 = tf.response(&u1).unwrap();
        let y2 = tf.response(u2).unwrap();
        let y = tf.response(&mixed).unwrap();
        prop_assert_eq!(y.len(), u1.len());
        for k in 0..y.len() {
            let expect = alpha * y1[k] + beta * y2[k];
            prop_assert!((y[k] - expect).abs() <= 1e-12 * (1.0 + expect.abs()),
                "k={} got {} expected {}", k, y[k], expect);
        }
    }

    #[test]
    fn closed_loop_traces_satisfy_invariants(
        kp in 0.0..3.0f64,
        ki in 0.0..1.0f64,
        level in -5.0..5.0f64,
        steps in 1usize..300,
    ) {
        let plant = Plant::siso(TransferFunction::second_order(0.8, 0.6, 1.0, 0.1).unwrap());
        let mut ctrl = [PiController::new(
            PiGains::new(kp, ki).unwrap(),
            SaturationLimits::new(-2.0, 2.0).unwrap(),
            CiConfig::disabled(),
            0.1,
        )];
        let horizon = steps as f64 * 0.1;
        let run = sim::simulate_closed_loop(&plant, &mut ctrl, &[ReferenceProfile::constant(level)], horizon).unwrap();
        prop_assert!(!run.diverged());
        prop_assert!(run.trace.validate_complete(steps).is_ok());
        prop_assert!(run.trace.loops[0].control.iter().all(|u| (-2.0..=2.0).contains(u)));
    }
}
