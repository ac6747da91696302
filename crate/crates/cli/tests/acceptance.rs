//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use pagani::classify::rel_err_classify;
use pagani::cubature::build_rule;
use pagani::driver::{integrate_with, Config, IntegrationResult, Status};
use pagani::errorest::InflatingRefiner;
use pagani::geometry::Bounds;
use pagani::integrands::{lookup, suite, IntegrandId, IntegrandSpec};
use pagani::reduce;
use pagani::reference::{integrate_sequential, DEFAULT_MAX_EVALS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tolerances of the accuracy sweep: 1e-3·5^-k for k = 0..=3.
const ACCURACY_TAUS: [f64; 4] = [1e-3, 2e-4, 4e-5, 8e-6];
const ONE_SIGNED: [(IntegrandId, usize); 5] =
    [(IntegrandId::F3, 3), (IntegrandId::F4, 5), (IntegrandId::F5, 8), (IntegrandId::F6, 6), (IntegrandId::F7, 8)];

type Outcome = Result<String, String>;

/// Conservation checks and threshold events gathered by the observer.
#[derive(Default)]
struct RunLog {
    iterations: usize,
    violations: Vec<String>,
    threshold_calls: usize,
    threshold_successes: usize,
    threshold_violations: Vec<String>,
}

/// Every run made by the suite, with its invariant log, for criterion 8.
#[derive(Default)]
struct Ledger {
    runs: usize,
    iterations: usize,
    violations: Vec<String>,
}

fn observed_run(spec: &IntegrandSpec, config: &Config, ledger: &mut Ledger) -> (IntegrationResult, RunLog) {
    let mut log = RunLog::default();
    let mut last_e_f = 0.0f64;
    let f = |x: &[f64]| spec.eval(x);
    let result = integrate_with(&f, &Bounds::unit(spec.dim).unwrap(), config, &InflatingRefiner, &mut |rep, batch, _| {
        log.iterations += 1;
        let it = rep.iteration;
        let scale = reduce::sum_by(batch.len(), &|j| batch.estimates[j].abs()) + rep.v_f_after.abs();
        let drift = (rep.live_estimate + rep.v_f_after - rep.acc.estimate()).abs();
        if drift > 1e-10 * scale {
            log.violations.push(format!("{} it {it}: estimate drift {drift:e}", spec.label()));
        }
        if rep.e_f_after < rep.acc.e_f || rep.acc.e_f < last_e_f {
            log.violations.push(format!("{} it {it}: finished error decreased", spec.label()));
        }
        last_e_f = rep.e_f_after;
        let vol = rep.live_volume + rep.finished_volume;
        if (vol - 1.0).abs() > 1e-9 {
            log.violations.push(format!("{} it {it}: volume {vol}", spec.label()));
        }
        if let Some(t) = &rep.threshold {
            log.threshold_calls += 1;
            if t.success {
                log.threshold_successes += 1;
                let kept = rep.active_after as f64 / t.regions as f64;
                if kept >= 0.5 {
                    log.threshold_violations.push(format!("it {it}: kept fraction {kept:.3}"));
                }
                if t.finished_error > t.p_max * t.error_budget {
                    log.threshold_violations
                        .push(format!("it {it}: discarded {:e} > {} x {:e}", t.finished_error, t.p_max, t.error_budget));
                }
            }
        }
    })
    .expect("valid configuration");
    ledger.runs += 1;
    ledger.iterations += log.iterations;
    ledger.violations.extend(log.violations.iter().cloned());
    (result, log)
}

fn true_rel_err(r: &IntegrationResult, spec: &IntegrandSpec) -> f64 {
    (r.estimate - spec.reference_value).abs() / spec.reference_value.abs()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_null = 0.0f64;
    let mut monomials = 0usize;
    for dim in 1..=8 {
        let rule = build_rule(dim).map_err(|e| e.to_string())?;
        let w = rule.weights(0);
        let mut alpha = vec![0u32; dim];
        loop {
            if alpha.iter().sum::<u32>() <= 7 {
                let exact: f64 = alpha.iter().map(|&a| 1.0 / (a as f64 + 1.0)).product();
                let approx: f64 = (0..rule.point_count())
                    .map(|k| w[k] * rule.point(k).iter().zip(&alpha).map(|(x, &a)| x.powi(a as i32)).product::<f64>())
                    .sum();
                worst = worst.max((approx - exact).abs() / exact);
                monomials += 1;
            }
            // Next multi-index with entries in 0..=7.
            let mut i = 0;
            while i < dim && alpha[i] == 7 {
                alpha[i] = 0;
                i += 1;
            }
            if i == dim {
                break;
            }
            alpha[i] += 1;
        }
        for r in 1..5 {
            worst_null = worst_null.max(rule.weights(r).iter().sum::<f64>().abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!("{monomials} monomials, worst rel err {worst:.2e}, worst null sum {worst_null:.2e}, {secs:.2}s");
    if worst <= 1e-12 && worst_null <= 1e-14 && secs < 10.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut counterexamples = 0;
    let mut applicable = 0;
    for _ in 0..10_000 {
        let m = rng.gen_range(1..=10_000usize);
        let tau = 10f64.powf(rng.gen_range(-10.0..-1.0));
        let magnitude = 10f64.powf(rng.gen_range(-6.0..6.0));
        let v: Vec<f64> = (0..m).map(|_| magnitude * rng.gen_range(1e-3..1.0)).collect();
        let e: Vec<f64> = v.iter().map(|&vi| vi * tau * rng.gen_range(0.0..=1.0)).collect();
        let flags = rel_err_classify(&v, &e, tau, true);
        if flags.active_count() > 0 {
            continue;
        }
        applicable += 1;
        let (sv, se) = (reduce::sum(&v), reduce::sum(&e));
        // Real-arithmetic statement; allow the summation roundoff bound.
        if se > tau * sv.abs() * (1.0 + 4.0 * m as f64 * f64::EPSILON) {
            counterexamples += 1;
        }
    }
    let detail = format!("{applicable} instances with every ratio within tolerance, {counterexamples} counterexamples");
    if counterexamples == 0 && applicable == 10_000 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

struct AccuracyRun {
    spec: IntegrandSpec,
    tau: f64,
    result: IntegrationResult,
    log: RunLog,
    wall: Duration,
}

fn accuracy_runs(ledger: &mut Ledger) -> Vec<AccuracyRun> {
    let mut runs = vec![];
    for (id, dim) in ONE_SIGNED {
        let spec = lookup(id, dim).unwrap();
        for tau in ACCURACY_TAUS {
            let start = Instant::now();
            let (result, log) = observed_run(&spec, &Config::with_tau_rel(tau), ledger);
            runs.push(AccuracyRun { spec, tau, result, log, wall: start.elapsed() });
        }
    }
    runs
}

fn criterion_3(runs: &[AccuracyRun]) -> Outcome {
    let total: Duration = runs.iter().map(|r| r.wall).sum();
    let mut failures = vec![];
    let mut exhausted = 0;
    for r in runs {
        let err = true_rel_err(&r.result, &r.spec);
        match r.result.status {
            Status::Converged if err <= r.tau => {}
            Status::MemoryExhausted => exhausted += 1,
            s => failures.push(format!("{} tau {:e}: {:?}, true rel err {err:.2e}", r.spec.label(), r.tau, s)),
        }
        eprintln!(
            "    {:<6} tau {:<7e} {:<15} true {:.2e} claimed {:.2e} it {:>3} regions {:>10} {:>8.1}s",
            r.spec.label(),
            r.tau,
            r.result.status.as_str(),
            err,
            r.result.errorest / r.result.estimate.abs(),
            r.result.iterations,
            r.result.regions_generated,
            r.wall.as_secs_f64()
        );
    }
    if total > Duration::from_secs(600) {
        failures.push(format!("runtime {:.0}s exceeds 600s", total.as_secs_f64()));
    }
    let detail = format!("{} runs, {} MemoryExhausted, total {:.1}s", runs.len(), exhausted, total.as_secs_f64());
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", failures.join("; ")))
    }
}

fn criterion_4(runs: &[AccuracyRun]) -> Outcome {
    let run = runs.iter().find(|r| r.spec.id == IntegrandId::F4 && r.spec.dim == 5 && r.tau <= 1e-5).ok_or("no f4:5 run at tau <= 1e-5")?;
    let log = &run.log;
    let detail = format!(
        "f4:5 tau {:e}: {:?}, {} threshold calls, {} successful",
        run.tau, run.result.status, log.threshold_calls, log.threshold_successes
    );
    if run.result.status == Status::Converged
        && log.threshold_calls >= 1
        && log.threshold_successes >= 1
        && log.threshold_violations.is_empty()
    {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", log.threshold_violations.join("; ")))
    }
}

fn criterion_5(ledger: &mut Ledger) -> Outcome {
    let mut compared = 0;
    let mut skipped = vec![];
    let mut disagreements = vec![];
    for spec in suite() {
        let config = Config { rel_filtering_enabled: spec.rel_filtering(), ..Config::with_tau_rel(1e-3) };
        let (p, _) = observed_run(&spec, &config, ledger);
        let f = |x: &[f64]| spec.eval(x);
        let r = integrate_sequential(&f, &Bounds::unit(spec.dim).unwrap(), 1e-3, config.tau_abs, DEFAULT_MAX_EVALS).unwrap();
        if p.status != Status::Converged || r.status != Status::Converged {
            skipped.push(format!("{} ({}/{})", spec.label(), p.status.as_str(), r.status.as_str()));
            continue;
        }
        compared += 1;
        let gap = (p.estimate - r.estimate).abs();
        if gap > p.errorest + r.errorest {
            disagreements.push(format!("{}: |diff| {gap:e} > {:e}", spec.label(), p.errorest + r.errorest));
        }
    }
    let detail = format!("{compared} configurations compared, not both converged: [{}]", skipped.join(", "));
    if disagreements.is_empty() && compared > 0 {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", disagreements.join("; ")))
    }
}

fn criterion_6(ledger: &mut Ledger) -> Outcome {
    let spec = lookup(IntegrandId::F1, 8).unwrap();
    let config = Config { rel_filtering_enabled: false, ..Config::with_tau_rel(1e-3) };
    let (r, _) = observed_run(&spec, &config, ledger);
    let err = true_rel_err(&r, &spec);
    let detail = format!("f1:8 without relative filtering: {:?}, true rel err {err:.2e}, {} iterations", r.status, r.iterations);
    if r.status != Status::Converged || err <= 1e-3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bench_csv(threads: usize) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pagani"))
        .args(["bench", "--subset", "f3:3,f4:5,f6:6,f1:3", "--k-max", "1", "--threads", &threads.to_string()])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("bench exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
    }
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    // Drop the trailing wall_ms column.
    Ok(text.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head)).collect::<Vec<_>>().join("\n"))
}

fn criterion_7() -> Outcome {
    let one = bench_csv(1)?;
    let four = bench_csv(4)?;
    let rows = one.lines().count() - 1;
    if one == four && rows == 8 {
        Ok(format!("{rows} rows identical with 1 and 4 worker threads"))
    } else {
        Err(format!("CSV differs between 1 and 4 threads ({rows} rows)\n{one}\n--\n{four}"))
    }
}

fn criterion_8(ledger: &Ledger) -> Outcome {
    let detail = format!(
        "{} runs, {} iterations checked (debug assertions {})",
        ledger.runs,
        ledger.iterations,
        if cfg!(debug_assertions) { "on" } else { "off" }
    );
    if ledger.violations.is_empty() && cfg!(debug_assertions) {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", ledger.violations.iter().take(5).cloned().collect::<Vec<_>>().join("; ")))
    }
}

fn report(n: usize, name: &str, outcome: &Outcome) -> bool {
    match outcome {
        Ok(detail) => println!("criterion {n} PASS  {name}: {detail}"),
        Err(detail) => println!("criterion {n} FAIL  {name}: {detail}"),
    }
    outcome.is_ok()
}

fn main() -> ExitCode {
    let mut ledger = Ledger::default();
    let c1 = criterion_1();
    let c2 = criterion_2();
    let runs = accuracy_runs(&mut ledger);
    let c3 = criterion_3(&runs);
    let c4 = criterion_4(&runs);
    let c5 = criterion_5(&mut ledger);
    let c6 = criterion_6(&mut ledger);
    let c7 = criterion_7();
    let c8 = criterion_8(&ledger);

    let results = [
        report(1, "rule exactness", &c1),
        report(2, "relative-error filtering property", &c2),
        report(3, "accuracy on one-signed integrands", &c3),
        report(4, "threshold trigger on f4:5", &c4),
        report(5, "agreement with the sequential driver", &c5),
        report(6, "oscillatory safeguard", &c6),
        report(7, "determinism across thread counts", &c7),
        report(8, "conservation invariants", &c8),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
