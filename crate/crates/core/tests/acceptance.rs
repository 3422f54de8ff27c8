//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every criterion returns a fingerprint of the numbers it computed; the suite
//! runs twice and criterion 10 compares the fingerprints bit for bit. The
//! target has no libtest harness, so the lines print on every run.

use std::time::{Duration, Instant};

use smp_lab::codes::LinearCode;
use smp_lab::oracle::{det_complexity_function, det_complexity_function_exhaustive, run_chain};
use smp_lab::protocols::fixtures::{random_qc_fixture, toy_qc_equality, toy_qc_equality_public, QcFixture};
use smp_lab::protocols::{
    default_classical_subset, equality_code, equality_public, matching_classical, matching_qc, matching_value,
    random_promise_instance, HiddenMatching, MatchingQcParams,
};
use smp_lab::qcore::acceptance_probability;
use smp_lab::qcore::random::{random_density, random_measurement};
use smp_lab::rng::stream_rng;
use smp_lab::smp::{exact_acceptance, sampled_success, worst_case_error, FunctionTable, SmpError};
use smp_lab::transforms::{
    bad_count_bound, compile_qc_to_cc, default_copies, derandomize_alice, learn_state_message, reconstruct_estimates,
    DerandomizeConfig, LearnConfig, LearnOutcome,
};

const DELTA: f64 = 0.1;
const EXACT: f64 = 1e-12;
const MARKOV_SLACK: f64 = 1e-6;
const AMPLITUDE: f64 = 1e-9;
const SEED: u64 = 20240611;

type Res<T> = Result<T, Box<dyn std::error::Error>>;

struct Outcome {
    passed: bool,
    detail: String,
    fingerprint: Vec<u64>,
}

fn bits(values: &[f64]) -> Vec<u64> {
    values.iter().map(|v| v.to_bits()).collect()
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

struct LearnInstance {
    q: u32,
    r: usize,
    max_err: f64,
    outcome: LearnOutcome,
}

fn learn_instances() -> Res<(Vec<LearnInstance>, Duration)> {
    let budget = LearnConfig::default().qubit_budget;
    let start = Instant::now();
    let mut out = Vec::new();
    for i in 0..50u64 {
        let mut rng = stream_rng(SEED, i);
        let q = 1 + (i % 2) as u32;
        let c = 2 + ((i / 2) % 2) as usize;
        let r = default_copies(q, DELTA, budget);
        let rho = random_density(q, &mut rng);
        let family: Vec<_> = (0..1usize << c).map(|_| random_measurement(q, &mut rng)).collect();
        let outcome = learn_state_message(&rho, &family, DELTA, r)?;
        let est = reconstruct_estimates(&outcome.record, &family, q)?;
        let mut max_err: f64 = 0.0;
        for (e, p_prime) in family.iter().zip(&est) {
            max_err = max_err.max((acceptance_probability(e, &rho)? - p_prime).abs());
        }
        out.push(LearnInstance { q, r, max_err, outcome });
    }
    Ok((out, start.elapsed()))
}

fn criterion_1(instances: &[LearnInstance], elapsed: Duration) -> Outcome {
    let worst = instances.iter().map(|i| i.max_err).fold(0.0, f64::max);
    let violations = instances.iter().filter(|i| i.max_err > DELTA).count();
    Outcome {
        passed: violations == 0 && within(elapsed, 30),
        detail: format!("worst |p'-p| = {worst:.4e} over 50 instances, {violations} above {DELTA}, {elapsed:.2?}"),
        fingerprint: bits(&instances.iter().map(|i| i.max_err).collect::<Vec<_>>()),
    }
}

fn criterion_2(instances: &[LearnInstance]) -> Outcome {
    let eta = 1.0 - DELTA / 4.0;
    let mut violations = 0;
    let mut worst_weight: f64 = 0.0;
    let mut fingerprint = Vec::new();
    for inst in instances {
        let t = inst.outcome.bad_count() as u64;
        if t > bad_count_bound(inst.q * inst.r as u32, DELTA) {
            violations += 1;
        }
        fingerprint.push(t);
        for step in &inst.outcome.steps {
            if let Some(w) = step.band_weight {
                worst_weight = worst_weight.max(w);
                fingerprint.push(w.to_bits());
                if w > eta + MARKOV_SLACK {
                    violations += 1;
                }
            }
        }
    }
    Outcome {
        passed: violations == 0,
        detail: format!("max Tr(M rho) = {worst_weight:.6} against eta = {eta}, {violations} violations"),
        fingerprint,
    }
}

fn compile_increase(fx: &QcFixture) -> Res<Vec<f64>> {
    let compiled = compile_qc_to_cc(&fx.protocol, &fx.xs, DELTA, None)?;
    let mut increases = Vec::new();
    for (i, x) in fx.xs.iter().enumerate() {
        for (j, y) in fx.ys.iter().enumerate() {
            let v = fx.function.value(i, j)? as f64;
            let before = (v - exact_acceptance(&fx.protocol, x, y)?).abs();
            let after = (v - exact_acceptance(&compiled, x, y)?).abs();
            increases.push(after - before);
        }
    }
    Ok(increases)
}

fn criterion_3() -> Res<Outcome> {
    let start = Instant::now();
    let mut increases = Vec::new();
    for fx in [toy_qc_equality()?, toy_qc_equality_public()?, random_qc_fixture(SEED, 2, 2, 2)?] {
        assert!(fx.protocol.qubits() <= 2 && fx.protocol.bob_bits() <= 2);
        increases.extend(compile_increase(&fx)?);
    }
    let elapsed = start.elapsed();
    let worst = increases.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome {
        passed: worst <= DELTA && within(elapsed, 60),
        detail: format!("worst increase {worst:.4e} over {} pairs, {elapsed:.2?}", increases.len()),
        fingerprint: bits(&increases),
    })
}

fn criterion_4() -> Res<Outcome> {
    let start = Instant::now();
    let inputs: Vec<u64> = (0..4).collect();
    let original = equality_code(2, LinearCode::hadamard(2), 1)?;
    let d = derandomize_alice(
        equality_code(2, LinearCode::hadamard(2), 1)?,
        12,
        &inputs,
        &DerandomizeConfig { seed: SEED, ..Default::default() },
    )?;
    let worst_dev = d.table().deviations.iter().copied().fold(0.0, f64::max);
    let mut increases = Vec::new();
    for x in &inputs {
        for y in &inputs {
            let v = (x == y) as u8 as f64;
            increases.push((v - exact_acceptance(&d, x, y)?).abs() - (v - exact_acceptance(&original, x, y)?).abs());
        }
    }
    let elapsed = start.elapsed();
    let worst_inc = increases.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut fingerprint = bits(&d.table().deviations);
    fingerprint.extend(bits(&increases));
    Ok(Outcome {
        passed: d.table().deviations.len() == 4 && worst_dev <= 0.1 && worst_inc <= 0.1 && within(elapsed, 10),
        detail: format!(
            "max deviation {worst_dev:.4}, worst increase {worst_inc:.4} over {} pairs, {elapsed:.2?}",
            increases.len()
        ),
        fingerprint,
    })
}

fn criterion_5() -> Res<Outcome> {
    let mut worst_gap: f64 = 0.0;
    let mut fingerprint = Vec::new();
    for n in 1..=4usize {
        for k in 1..=3usize {
            let p = equality_public(n, k)?;
            for x in 0..1u64 << n {
                for y in 0..1u64 << n {
                    let a = exact_acceptance(&p, &x, &y)?;
                    let want = if x == y { 1.0 } else { 0.5f64.powi(k as i32) };
                    worst_gap = worst_gap.max((a - want).abs());
                    fingerprint.push(a.to_bits());
                }
            }
        }
    }
    let f = FunctionTable::equality(4);
    let inputs: Vec<u64> = (0..16).collect();
    let refs: Vec<&u64> = inputs.iter().collect();
    let code_error = worst_case_error(&equality_code(4, LinearCode::hadamard(4), 6)?, &f, &refs, &refs)?;
    fingerprint.push(code_error.to_bits());
    Ok(Outcome {
        passed: worst_gap <= EXACT && code_error <= 1.0 / 3.0 + EXACT,
        detail: format!("public max gap {worst_gap:.1e}, eq-code(4, H, 6) worst error {code_error:.6}"),
        fingerprint,
    })
}

fn criterion_6() -> Res<Outcome> {
    let start = Instant::now();
    let hm = HiddenMatching::new(4)?;
    let mut worst: f64 = 1.0;
    let mut fingerprint = Vec::new();
    for x in 0..16u64 {
        for k in 1..4 {
            let ok =
                hm.distribution(x, k)?.iter().filter(|(z, _)| hm.is_valid(x, k, z)).fold(0.0, |acc, (_, p)| acc + p);
            worst = worst.min(ok);
            fingerprint.push(ok.to_bits());
        }
    }
    let elapsed = start.elapsed();
    Ok(Outcome {
        passed: fingerprint.len() == 48 && (1.0 - worst) <= AMPLITUDE && within(elapsed, 5),
        detail: format!("minimum valid-output mass {worst} over 48 (x, matching) pairs, {elapsed:.2?}"),
        fingerprint,
    })
}

fn criterion_7() -> Res<Outcome> {
    let start = Instant::now();
    let n = 64;
    let mut rng = stream_rng(SEED, 0);
    let instances = (0..20).map(|i| random_promise_instance(n, i % 2 == 0, &mut rng)).collect::<Result<Vec<_>, _>>()?;
    let cases = instances
        .iter()
        .map(|inst| Ok((&inst.x, &inst.bob, matching_value(inst)?)))
        .collect::<Result<Vec<_>, SmpError>>()?;
    let qc = sampled_success(&matching_qc(n, MatchingQcParams::defaults(n))?, &cases, 2000, SEED)?;
    let cl = sampled_success(&matching_classical(n, default_classical_subset(n))?, &cases, 2000, SEED)?;
    let elapsed = start.elapsed();
    let ok = |e: &smp_lab::smp::SampledEstimate| e.trials == 2000 && e.estimate >= 2.0 / 3.0 && e.lower > 0.6;
    Ok(Outcome {
        passed: ok(&qc) && ok(&cl) && within(elapsed, 300),
        detail: format!(
            "qc {:.4} [{:.4}, {:.4}], classical {:.4} [{:.4}, {:.4}], {elapsed:.2?}",
            qc.estimate, qc.lower, qc.upper, cl.estimate, cl.lower, cl.upper
        ),
        fingerprint: bits(&[qc.estimate, qc.lower, qc.upper, cl.estimate, cl.lower, cl.upper]),
    })
}

fn criterion_8() -> Res<Outcome> {
    let start = Instant::now();
    let mut passed = true;
    let mut detail = Vec::new();
    let mut fingerprint = Vec::new();
    for n in 1..=3u32 {
        let eq = FunctionTable::equality(n);
        let (ca, cb) = det_complexity_function(&eq)?;
        passed &= ca + cb == 2 * n;
        fingerprint.extend([ca as u64, cb as u64]);
        let mut line = format!("n={n}: {}", ca + cb);
        if n <= 2 {
            let total = det_complexity_function_exhaustive(&eq)?;
            passed &= total == 2 * n;
            fingerprint.push(total as u64);
            line.push_str(&format!(" (exhaustive {total})"));
        }
        detail.push(line);
    }
    let elapsed = start.elapsed();
    Ok(Outcome {
        passed: passed && within(elapsed, 60),
        detail: format!("{}, {elapsed:.2?}", detail.join(", ")),
        fingerprint,
    })
}

fn criterion_9() -> Res<Outcome> {
    let mut failures = Vec::new();
    let mut fingerprint = Vec::new();
    for seed in 0..100u64 {
        let r = run_chain(SEED + seed)?;
        if !(r.all_hold() && r.union.holds() && r.decoded_exactly && r.decodes_after_flips) {
            failures.push(seed);
        }
        fingerprint.extend(bits(&[
            r.extraction_error,
            r.union.solve_error,
            r.union.compute_error,
            r.union.validity_error,
        ]));
    }
    Ok(Outcome {
        passed: failures.is_empty(),
        detail: format!("{} of 100 toy relations failed {failures:?}", failures.len()),
        fingerprint,
    })
}

fn run_suite() -> Res<Vec<Outcome>> {
    let (instances, elapsed) = learn_instances()?;
    Ok(vec![
        criterion_1(&instances, elapsed),
        criterion_2(&instances),
        criterion_3()?,
        criterion_4()?,
        criterion_5()?,
        criterion_6()?,
        criterion_7()?,
        criterion_8()?,
        criterion_9()?,
    ])
}

fn main() -> Res<()> {
    let first = run_suite()?;
    let second = run_suite()?;
    let mut all = true;
    for (i, o) in first.iter().enumerate() {
        println!("criterion {}: {} {}", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        all &= o.passed;
    }
    let differing: Vec<usize> = first
        .iter()
        .zip(&second)
        .enumerate()
        .filter(|(_, (a, b))| a.fingerprint != b.fingerprint)
        .map(|(i, _)| i + 1)
        .collect();
    let deterministic = differing.is_empty();
    println!(
        "criterion 10: {} rerun of criteria 1-9 bit-identical{}",
        if deterministic { "PASS" } else { "FAIL" },
        if deterministic { String::new() } else { format!(", differs in {differing:?}") }
    );
    if !(all && deterministic) {
        return Err("acceptance criteria failed".into());
    }
    Ok(())
}
