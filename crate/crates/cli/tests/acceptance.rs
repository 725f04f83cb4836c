//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

// Negated comparisons count NaN costs as violations.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smdo_cli::report;
use smdo_cli::ControllerSpec;
use smdo_core::objective::{metric, WeightMode};
use smdo_core::scenario;
use smdo_core::sim::{self, Plant, ReferenceProfile, TransferFunction};
use smdo_core::smdo::{self, Objective, OptimizationResult, OptimizerConfig, ParameterVector};
use smdo_core::tune::{self, ScenarioObjective};
use smdo_core::{CiConfig, MetricKind, PiController, PiGains, SaturationLimits, Scenario};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.3} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

fn quadratic(p: &[f64]) -> f64 {
    (p[0] - 1.0).powi(2) + (p[1] + 2.0).powi(2)
}

fn quadratic_run(seed: u64) -> OptimizationResult {
    let start = ParameterVector::new(
        vec![0.0, 0.0],
        vec![1.0, 1.0],
        vec![-10.0; 2],
        vec![10.0; 2],
    )
    .unwrap();
    let config = OptimizerConfig {
        max_iterations: 500,
        step_decay: 0.95,
        seed,
        target_cost: None,
    };
    smdo::optimize(&config, WeightMode::Fixed, vec![1.0], start, &quadratic).unwrap()
}

fn surrogate_run(s: &Scenario, seed: u64) -> OptimizationResult {
    let config = OptimizerConfig {
        seed,
        ..s.optimizer().clone()
    };
    tune::tune(s, &config).unwrap().result
}

fn simulation_oracle() -> Check {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for p in [0.5, 0.9, 0.99] {
        let tf = TransferFunction::new(vec![0.0, 1.0 - p], vec![1.0, -p], 1.0).unwrap();
        let y = sim::open_loop_response(&tf, &[1.0; 2000]).unwrap();
        ensure(y.len() == 2000, || format!("response length {}", y.len()))?;
        for (k, y) in y.iter().enumerate() {
            worst = worst.max((y - (1.0 - p.powi(k as i32))).abs());
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    within(elapsed, 1.0)?;
    Ok(format!(
        "max deviation {worst:.1e} over 3×2000 steps in {:.3} s",
        elapsed.as_secs_f64()
    ))
}

fn optimizer_convergence() -> Check {
    let start = Instant::now();
    let mut worst_cost = 0.0f64;
    let mut worst_dist = 0.0f64;
    for seed in 0..20 {
        let r = quadratic_run(seed);
        let dist = ((r.best[0] - 1.0).powi(2) + (r.best[1] + 2.0).powi(2)).sqrt();
        worst_cost = worst_cost.max(r.best_cost);
        worst_dist = worst_dist.max(dist);
        ensure(r.iterations() == 500, || {
            format!("seed {seed}: {} iterations", r.iterations())
        })?;
        ensure(r.best_cost < 1e-2 && dist <= 0.1, || {
            format!("seed {seed}: cost {:e} at {:?}", r.best_cost, r.best)
        })?;
    }
    let elapsed = start.elapsed();
    within(elapsed, 5.0)?;
    Ok(format!(
        "20 seeds, worst cost {worst_cost:.1e}, worst distance {worst_dist:.1e}, {:.3} s",
        elapsed.as_secs_f64()
    ))
}

/// Violations of a non-increasing accepted-cost sequence, recomputed from
/// the records alone.
fn replay_violations(r: &OptimizationResult) -> usize {
    let mut violations = 0;
    let mut prev = r.initial_cost;
    for rec in &r.history {
        if rec.start_cost != prev {
            violations += 1;
        }
        for comp in &rec.components {
            for t in comp.trials.iter().filter(|t| t.accepted) {
                if !(t.cost <= prev) {
                    violations += 1;
                }
                prev = t.cost;
            }
        }
        if rec.cost != prev {
            violations += 1;
        }
    }
    violations
}

/// Re-evaluates both sides of every accepted move.
fn unsound_moves<O: Objective>(r: &OptimizationResult, objective: &O) -> (usize, usize) {
    let mut checked = 0;
    let mut violations = 0;
    for rec in &r.history {
        for comp in &rec.components {
            for t in comp.trials.iter().filter(|t| t.accepted) {
                checked += 1;
                let cand = objective.cost(&t.candidate, &rec.weights);
                let inc = objective.cost(&comp.incumbent, &rec.weights);
                if !(cand < inc) || cand != t.cost || inc != comp.incumbent_cost {
                    violations += 1;
                }
            }
        }
    }
    (checked, violations)
}

struct Recorded {
    quadratic: Vec<OptimizationResult>,
    surrogate: Vec<OptimizationResult>,
}

fn record_runs() -> Recorded {
    let s = scenario::builtin_surrogate_refrigeration();
    assert_eq!(s.cost().weight_mode, WeightMode::Fixed);
    Recorded {
        quadratic: (0..100).map(quadratic_run).collect(),
        surrogate: (0..20).map(|seed| surrogate_run(&s, seed)).collect(),
    }
}

fn greedy_monotonicity(rec: &Recorded) -> Check {
    let mut violations = 0;
    let mut iterations = 0;
    for r in rec.quadratic.iter().chain(&rec.surrogate) {
        violations += replay_violations(r);
        iterations += r.history.len();
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok(format!(
        "100 quadratic + 20 surrogate runs, {iterations} iterations replayed, 0 violations"
    ))
}

fn acceptance_soundness(rec: &Recorded) -> Check {
    let s = scenario::builtin_surrogate_refrigeration();
    let objective = ScenarioObjective::new(&s);
    let mut checked = 0;
    let mut violations = 0;
    for r in &rec.quadratic {
        let (c, v) = unsound_moves(r, &quadratic);
        checked += c;
        violations += v;
    }
    for r in &rec.surrogate {
        let (c, v) = unsound_moves(r, &objective);
        checked += c;
        violations += v;
    }
    ensure(checked > 0, || "no accepted moves to check".into())?;
    ensure(violations == 0, || {
        format!("{violations} of {checked} accepted moves fail")
    })?;
    Ok(format!(
        "{checked} accepted moves re-evaluated, 0 violations"
    ))
}

fn ci_steady_state() -> Check {
    let start = Instant::now();
    let s = scenario::builtin_surrogate_refrigeration();
    let config = OptimizerConfig {
        max_iterations: 100,
        ..s.optimizer().clone()
    };
    let with_ci = tune::tune(&s.clone().with_ci_enabled(true), &config).unwrap();
    let without = tune::tune(&s.clone().with_ci_enabled(false), &config).unwrap();
    let e1 = |o: &tune::TuneOutcome| o.evaluation.run.trace.loops[0].error.last().unwrap().abs();
    let (e_ci, e_noci) = (e1(&with_ci), e1(&without));
    ensure(
        with_ci.result.iterations() == 100 && without.result.iterations() == 100,
        || "budget not used".into(),
    )?;
    ensure(e_ci < e_noci, || {
        format!("terminal |e1| CI {e_ci:e} vs no CI {e_noci:e}")
    })?;

    let spec = |label: &str, gains: &[PiGains], ci| ControllerSpec {
        label: Some(label.into()),
        gains: gains.to_vec(),
        ci: Some(ci),
    };
    let baseline = spec("baseline", &scenario::surrogate_baseline_gains(), false);
    let candidates = [
        spec("ci", &with_ci.gains, true),
        spec("noci", &without.gains, false),
    ];
    let cmp = report::compare("surrogate", &s, &baseline, &candidates).unwrap();
    let (j_ci, j_noci) = (cmp.rows[1].j.unwrap(), cmp.rows[2].j.unwrap());
    ensure(cmp.rows[0].j == Some(1.0), || "baseline J is not 1".into())?;
    ensure(j_ci < j_noci, || format!("J CI {j_ci} vs no CI {j_noci}"))?;
    let elapsed = start.elapsed();
    within(elapsed, 30.0)?;
    Ok(format!(
        "seed {}: |e1| {e_ci:.3e} < {e_noci:.3e}, J {j_ci:.4} < {j_noci:.4}, {:.2} s",
        config.seed,
        elapsed.as_secs_f64()
    ))
}

fn zero_steady_state_error() -> Check {
    let s = scenario::builtin("oracle-first-order").unwrap();
    let plant: Plant = s.plant().clone();
    let (kp, ki, dt) = (0.5, 0.05, s.dt_s());

    // Closed loop of b·z⁻¹/(1 − a·z⁻¹) under u = kp·e + ki·Σe·dt:
    // z² + (b·kp + b·ki·dt − 1 − a)·z + (a − b·kp) = 0.
    let tf = plant.channel(0, 0);
    let (a, b) = (-tf.denominator()[1], tf.numerator()[1]);
    let c1 = b * kp + b * ki * dt - 1.0 - a;
    let c0 = a - b * kp;
    let disc = c1 * c1 - 4.0 * c0;
    let rho = if disc >= 0.0 {
        ((-c1).abs() + disc.sqrt()) / 2.0
    } else {
        c0.sqrt()
    };
    ensure(rho < 1.0, || format!("closed loop unstable, |z| = {rho}"))?;
    let tau = -dt / rho.ln();
    let horizon = (20.0 * tau / dt).ceil() * dt;

    let mut ctrl = [PiController::new(
        PiGains::new(kp, ki).unwrap(),
        SaturationLimits::new(-100.0, 100.0).unwrap(),
        CiConfig::band(10.0).unwrap(),
        dt,
    )];
    let reference = ReferenceProfile::constant(1.0);
    let run = sim::simulate_closed_loop(&plant, &mut ctrl, &[reference], horizon).unwrap();
    let lt = &run.trace.loops[0];
    ensure(!lt.saturated.iter().any(|&x| x), || {
        "saturation engaged".into()
    })?;
    ensure(lt.error.iter().all(|e| e.abs() <= 10.0), || {
        "error left the CI band".into()
    })?;
    let e = lt.error.last().unwrap().abs();
    ensure(e < 1e-6, || format!("|e| = {e:e} at t = {horizon}"))?;
    Ok(format!("τ = {tau:.2} s, |e({horizon} s)| = {e:.2e}"))
}

fn metric_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=10_000);
        let dt = rng.random_range(0.01..2.0);
        let errors: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        for kind in MetricKind::ALL {
            let mut naive = 0.0;
            for (k, e) in errors.iter().enumerate() {
                naive += match kind {
                    MetricKind::Ise => e * e * dt,
                    MetricKind::Iae => e.abs() * dt,
                    MetricKind::Itae => times[k] * e.abs() * dt,
                    MetricKind::Mse => e * e / n as f64,
                };
            }
            let got = metric(kind, &errors, &times, dt).unwrap();
            let rel = (got - naive).abs() / naive.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
        }
    }
    ensure(worst <= 1e-12, || format!("relative deviation {worst:e}"))?;
    Ok(format!(
        "100 traces × 4 metrics, worst relative deviation {worst:.1e}"
    ))
}

fn run_cli(out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_smdo-tune"))
        .args([
            "run",
            "--scenario",
            "builtin:surrogate-refrigeration",
            "--seed",
            "42",
            "--iters",
            "30",
        ])
        .args(["--baseline", "1,0.02,0.8,0.05@noci", "--out"])
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), || {
        String::from_utf8_lossy(&status.stderr).into_owned()
    })
}

fn without_wall_clock(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"wall_clock_s\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_cli(&a)?;
    run_cli(&b)?;
    let conv_a = std::fs::read(a.join("convergence.csv")).unwrap();
    let conv_b = std::fs::read(b.join("convergence.csv")).unwrap();
    ensure(conv_a == conv_b, || "convergence.csv differs".into())?;
    let sum_a = without_wall_clock(&a.join("summary.json"));
    ensure(sum_a.contains("\"seed\": 42"), || {
        "summary lacks seed".into()
    })?;
    ensure(sum_a == without_wall_clock(&b.join("summary.json")), || {
        "summary.json differs".into()
    })?;
    Ok(format!(
        "convergence.csv ({} bytes) and summary.json identical",
        conv_a.len()
    ))
}

fn budget_realism() -> Check {
    let s = scenario::builtin_surrogate_refrigeration();
    let start = Instant::now();
    let r = surrogate_run(&s, 0);
    let elapsed = start.elapsed();
    ensure(r.iterations() == 100, || {
        format!("{} iterations", r.iterations())
    })?;
    ensure(s.steps() == 1200 && s.dt_s() == 1.0, || {
        "unexpected horizon".into()
    })?;
    within(elapsed, 10.0)?;
    Ok(format!(
        "100 iterations × 1200 steps in {:.3} s",
        elapsed.as_secs_f64()
    ))
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}

fn main() {
    let mut failed = Vec::new();
    let mut check = |n: usize, name: &str, f: &mut dyn FnMut() -> Check| {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(p))));
        match &outcome {
            Ok(detail) => println!("criterion {n} [PASS] {name}: {detail}"),
            Err(detail) => {
                println!("criterion {n} [FAIL] {name}: {detail}");
                failed.push(n);
            }
        }
    };

    check(1, "simulation oracle", &mut simulation_oracle);
    check(2, "optimizer convergence", &mut optimizer_convergence);
    // Criteria 3 and 4 inspect the same optimizer records.
    let recorded =
        panic::catch_unwind(record_runs).map_err(|p| format!("panicked: {}", panic_message(p)));
    check(3, "greedy monotonicity", &mut || {
        greedy_monotonicity(recorded.as_ref().map_err(Clone::clone)?)
    });
    check(4, "acceptance soundness", &mut || {
        acceptance_soundness(recorded.as_ref().map_err(Clone::clone)?)
    });
    check(5, "CI steady-state claim", &mut ci_steady_state);
    check(6, "zero steady-state error", &mut zero_steady_state_error);
    check(7, "metric oracle equivalence", &mut metric_oracle);
    check(8, "determinism", &mut determinism);
    check(9, "budget realism", &mut budget_realism);

    println!(
        "acceptance: {} passed, {} failed",
        9 - failed.len(),
        failed.len()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
