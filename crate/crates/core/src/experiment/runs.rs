//! One function per experiment. Each fills its defaults into `Params`,
//! computes, and returns rows, summary values and hard assertions.

use rayon::prelude::*;

use super::{Assertion, ExperimentError, Params, Report, Result, RunTolerances};
use crate::codes::LinearCode;
use crate::oracle::{alice_map_census, det_complexity_function, det_complexity_function_exhaustive, run_chain};
use crate::protocols::fixtures::{
    hidden_matching_verification, random_qc_fixture, toy_qc_equality, toy_qc_equality_public, QcFixture,
};
use crate::protocols::{
    default_classical_subset, equality_code, equality_public, matching_classical, matching_qc, matching_value,
    random_promise_instance, HiddenMatching, MatchingQcParams,
};
use crate::qcore::random::{random_density, random_measurement};
use crate::qcore::{acceptance_probability, CMatrix, DensityMatrix, MeasurementOperator};
use crate::qcore::{read_matrix_binary, read_matrix_text};
use crate::rng::{derive_seed, stream_rng};
use crate::smp::{exact_acceptance, sampled_success_values, FunctionTable, MessageCost, SampledEstimate, SmpProtocol};
use crate::transforms::{
    bad_count_bound, compile_qc_to_cc_with, default_copies, derandomize_alice, learn_state_message_with,
    reconstruct_estimates_with, DerandomizeConfig, LearnConfig, LearnOutcome, CLOSENESS,
};

/// Product of the table size and the per-cell enumeration work allowed in
/// exhaustive experiments.
const EXACT_WORK_CAP: u64 = 1 << 24;
const TRIAL_CAP: u64 = 10_000_000;
const INSTANCE_CAP: usize = 10_000;

pub(super) fn dispatch(name: &str, p: &mut Params, seed: Option<u64>, tol: &RunTolerances) -> Result<Report> {
    match name {
        "eq-public" => eq_public(p, tol),
        "eq-code" => eq_code(p, tol),
        "matching-qc" => matching(p, seed, true),
        "matching-classical" => matching(p, seed, false),
        "hidden-matching" => hidden_matching(p, tol),
        "compile" => compile(p, seed, tol),
        "learn-state" => learn_state(p, seed, tol),
        "derandomize" => derandomize(p, seed, tol),
        "oracle-suite" => oracle_suite(p, seed),
        other => Err(ExperimentError::Config(format!("unknown experiment {other:?}"))),
    }
}

fn need_seed(seed: Option<u64>, experiment: &str) -> Result<u64> {
    seed.ok_or_else(|| ExperimentError::Config(format!("{experiment} samples randomness and needs --seed")))
}

fn cap(what: &str, found: u64, limit: u64) -> Result<()> {
    if found > limit {
        return Err(ExperimentError::Cap(format!("{what} = {found} exceeds {limit}")));
    }
    Ok(())
}

fn config_check(ok: bool, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(ExperimentError::Config(message()))
    }
}

fn set_cost(report: &mut Report, cost: crate::smp::Cost) {
    let (kind, amount) = match cost.alice {
        MessageCost::Bits(n) => ("bits", n),
        MessageCost::Qubits(n) => ("qubits", n),
    };
    report.set("alice_cost", amount);
    report.set("alice_cost_unit", kind);
    report.set("bob_bits", cost.bob_bits);
}

/// `(x index, y index, f, Pr[accept])` for every domain cell.
fn exact_cells<P>(p: &P, f: &FunctionTable, xs: &[u64], ys: &[u64]) -> Result<Vec<(usize, usize, u32, f64)>>
where
    P: SmpProtocol<AliceInput = u64, BobInput = u64>,
{
    let cells: Vec<(usize, usize)> = f.domain().collect();
    cells.par_iter().map(|&(i, j)| Ok((i, j, f.value(i, j)?, exact_acceptance(p, &xs[i], &ys[j])?))).collect()
}

fn eq_public(p: &mut Params, tol: &RunTolerances) -> Result<Report> {
    let n = *p.n.get_or_insert(4);
    let k = *p.k.get_or_insert(2);
    config_check((1..=10).contains(&n) && (1..=20).contains(&k), || {
        format!("need 1 <= n <= 10 and 1 <= k <= 20, got n={n}, k={k}")
    })?;
    cap("cells x coins", 1u64 << (2 * n + n * k).min(63), EXACT_WORK_CAP)?;
    let proto = equality_public(n, k)?;
    let f = FunctionTable::equality(n as u32);
    let inputs: Vec<u64> = (0..1u64 << n).collect();
    let cells = exact_cells(&proto, &f, &inputs, &inputs)?;

    let mut report = Report::new(&["x", "y", "f", "acceptance", "error"]);
    let target = 0.5f64.powi(k as i32);
    let (mut worst, mut eq_dev, mut ne_dev) = (0.0f64, 0.0f64, 0.0f64);
    for &(i, j, v, acc) in &cells {
        let err = (v as f64 - acc).abs();
        worst = worst.max(err);
        if v == 1 {
            eq_dev = eq_dev.max((acc - 1.0).abs());
        } else {
            ne_dev = ne_dev.max((acc - target).abs());
        }
        report.row(vec![i.to_string(), j.to_string(), v.to_string(), acc.to_string(), err.to_string()]);
    }
    report.set("n", n);
    report.set("k", k);
    set_cost(&mut report, proto.cost());
    report.set("worst_case_error", worst);
    report.set("unequal_acceptance_expected", target);
    report.check(Assertion::at_most("equal_pairs_accept", eq_dev, tol.exact));
    report.check(Assertion::at_most("unequal_pairs_accept_2^-k", ne_dev, tol.exact));
    Ok(report)
}

fn load_code(spec: &str, n: usize) -> Result<LinearCode> {
    if spec == "hadamard" {
        return Ok(LinearCode::hadamard(n));
    }
    let text = std::fs::read_to_string(spec).map_err(|e| ExperimentError::Config(format!("code file {spec}: {e}")))?;
    Ok(LinearCode::from_text(&text)?)
}

fn eq_code(p: &mut Params, tol: &RunTolerances) -> Result<Report> {
    let n = *p.n.get_or_insert(4);
    let reps = *p.reps.get_or_insert(6);
    let code_spec = p.code.get_or_insert_with(|| "hadamard".into()).clone();
    config_check((1..=10).contains(&n) && (1..=64).contains(&reps), || {
        format!("need 1 <= n <= 10 and 1 <= reps <= 64, got n={n}, reps={reps}")
    })?;
    let code = load_code(&code_spec, n)?;
    cap("cells x codeword bits", (1u64 << (2 * n)) * code.m() as u64, EXACT_WORK_CAP)?;
    let d = code.min_distance_bruteforce()?;
    let m = code.m();
    let proto = equality_code(n, code, reps)?;
    let f = FunctionTable::equality(n as u32);
    let inputs: Vec<u64> = (0..1u64 << n).collect();
    let cells = exact_cells(&proto, &f, &inputs, &inputs)?;

    let mut report = Report::new(&["x", "y", "f", "acceptance", "error"]);
    let (mut worst, mut eq_dev) = (0.0f64, 0.0f64);
    for &(i, j, v, acc) in &cells {
        let err = (v as f64 - acc).abs();
        worst = worst.max(err);
        if v == 1 {
            eq_dev = eq_dev.max(err);
        }
        report.row(vec![i.to_string(), j.to_string(), v.to_string(), acc.to_string(), err.to_string()]);
    }
    let closed_form = (1.0 - d as f64 / m as f64).powi(reps as i32);
    report.set("n", n);
    report.set("reps", reps);
    report.set("code_length", m);
    report.set("code_distance", d);
    set_cost(&mut report, proto.cost());
    report.set("worst_case_error", worst);
    report.set("error_bound", closed_form);
    report.set("bounded_error", worst <= 1.0 / 3.0);
    report.check(Assertion::at_most("equal_pairs_accept", eq_dev, tol.exact));
    report.check(Assertion::at_most("worst_case_error_bound", worst, closed_form + tol.exact));
    Ok(report)
}

fn matching(p: &mut Params, seed: Option<u64>, quantum: bool) -> Result<Report> {
    let name = if quantum { "matching-qc" } else { "matching-classical" };
    let seed = need_seed(seed, name)?;
    let n = *p.n.get_or_insert(64);
    let trials = *p.trials.get_or_insert(2000);
    let instances = *p.instances.get_or_insert(20);
    cap("trials", trials, TRIAL_CAP)?;
    cap("instances", instances as u64, INSTANCE_CAP as u64)?;
    config_check(instances >= 1 && trials >= 1, || "need at least one instance and one trial".into())?;
    config_check((2..=1 << 16).contains(&n), || format!("n = {n} outside 2..=65536"))?;

    let mut rng = stream_rng(seed, 0);
    let insts = (0..instances)
        .map(|i| random_promise_instance(n, i % 2 == 0, &mut rng))
        .collect::<crate::smp::Result<Vec<_>>>()?;
    let cases = insts
        .iter()
        .map(|inst| Ok((&inst.x, &inst.bob, matching_value(inst)?)))
        .collect::<crate::smp::Result<Vec<_>>>()?;
    let trial_seed = derive_seed(seed, 1);

    let mut report = Report::new(&["trial", "instance", "value", "success"]);
    report.set("n", n);
    let values = if quantum {
        let d = MatchingQcParams::defaults(n);
        let params = MatchingQcParams {
            subset_size: *p.subset_size.get_or_insert(d.subset_size),
            copies: *p.copies.get_or_insert(d.copies),
            edges_sent: *p.edges_sent.get_or_insert(d.edges_sent),
        };
        let proto = matching_qc(n, params)?;
        report.set("subset_size", params.subset_size);
        report.set("copies", params.copies);
        report.set("edges_sent", params.edges_sent);
        set_cost(&mut report, proto.cost());
        sampled_success_values(&proto, &cases, trials, trial_seed)?
    } else {
        let subset = *p.subset_size.get_or_insert(default_classical_subset(n));
        let proto = matching_classical(n, subset)?;
        report.set("subset_size", subset);
        set_cost(&mut report, proto.cost());
        sampled_success_values(&proto, &cases, trials, trial_seed)?
    };
    for (t, v) in values.iter().enumerate() {
        let i = t % cases.len();
        report.row(vec![t.to_string(), i.to_string(), (cases[i].2 as u8).to_string(), v.to_string()]);
    }
    let est = SampledEstimate::from_values(&values);
    report.set("trials", trials);
    report.set("instances", instances);
    report.set("success", est.estimate);
    report.set("ci_lower", est.lower);
    report.set("ci_upper", est.upper);
    report.check(Assertion::at_least("success_two_thirds", est.estimate, 2.0 / 3.0));
    report.check(Assertion::at_least("ci_lower_above_0.6", est.lower, 0.6));
    Ok(report)
}

fn hidden_matching(p: &mut Params, tol: &RunTolerances) -> Result<Report> {
    let n = *p.n.get_or_insert(4);
    config_check(n >= 4 && n.is_power_of_two(), || format!("n = {n} must be a power of 2, at least 4"))?;
    cap("n", n as u64, 16)?;
    let hm = HiddenMatching::new(n)?;
    let cells: Vec<(u64, usize)> = (0..1u64 << n).flat_map(|x| (1..n).map(move |k| (x, k))).collect();
    let results = cells
        .par_iter()
        .map(|&(x, k)| {
            let dist = hm.distribution(x, k)?;
            let success: f64 = dist.iter().filter(|(z, _)| hm.is_valid(x, k, z)).map(|(_, w)| w).sum();
            Ok((x, k, success, dist.len()))
        })
        .collect::<crate::smp::Result<Vec<_>>>()?;

    let mut report = Report::new(&["x", "k", "success", "outputs"]);
    let mut min_success = 1.0f64;
    for &(x, k, success, outputs) in &results {
        min_success = min_success.min(success);
        report.row(vec![x.to_string(), k.to_string(), success.to_string(), outputs.to_string()]);
    }
    report.set("n", n);
    set_cost(&mut report, hm.cost());
    report.set("min_success", min_success);
    report.check(Assertion::at_least("relation_always_satisfied", min_success, 1.0 - tol.amplitude));
    if n <= 8 {
        let err = hidden_matching_verification(n)?.worst_case_error()?;
        report.set("verification_worst_case_error", err);
        report.check(Assertion::at_most("verification_exact", err, tol.amplitude));
    }
    Ok(report)
}

fn compile(p: &mut Params, seed: Option<u64>, tol: &RunTolerances) -> Result<Report> {
    let fixture_name = p.fixture.get_or_insert_with(|| "toy".into()).clone();
    let delta = *p.delta.get_or_insert(0.1);
    let fixture: QcFixture = match fixture_name.as_str() {
        "toy" => toy_qc_equality()?,
        "toy-public" => toy_qc_equality_public()?,
        "random" => {
            let seed = need_seed(seed, "compile on the random fixture")?;
            let q = *p.q.get_or_insert(2);
            let c = *p.c.get_or_insert(2);
            cap("q", q as u64, 3)?;
            cap("c", c as u64, 4)?;
            random_qc_fixture(seed, q, c, 2)?
        }
        other => {
            return Err(ExperimentError::Config(format!("unknown compile fixture {other:?} (toy, toy-public, random)")))
        }
    };
    let cfg = LearnConfig { tolerances: tol.numeric, ..LearnConfig::default() };
    let q = fixture.protocol.qubits();
    let r = *p.r.get_or_insert(default_copies(q, delta, cfg.qubit_budget));
    let compiled = compile_qc_to_cc_with(&fixture.protocol, &fixture.xs, delta, Some(r), &cfg)?;
    let original = exact_cells(&fixture.protocol, &fixture.function, &fixture.xs, &fixture.ys)?;
    let after = exact_cells(&compiled, &fixture.function, &fixture.xs, &fixture.ys)?;

    let mut report =
        Report::new(&["x", "y", "f", "original", "compiled", "original_error", "compiled_error", "increase"]);
    let (mut worst_o, mut worst_c, mut max_increase) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    for (&(i, j, v, a), &(_, _, _, b)) in original.iter().zip(&after) {
        let (eo, ec) = ((v as f64 - a).abs(), (v as f64 - b).abs());
        worst_o = worst_o.max(eo);
        worst_c = worst_c.max(ec);
        max_increase = max_increase.max(ec - eo);
        report.row(vec![
            fixture.xs[i].to_string(),
            fixture.ys[j].to_string(),
            v.to_string(),
            a.to_string(),
            b.to_string(),
            eo.to_string(),
            ec.to_string(),
            (ec - eo).to_string(),
        ]);
    }
    let diags = compiled.diagnostics();
    let max_bad = diags.iter().map(|d| d.bad_count).max().unwrap_or(0);
    let bound = bad_count_bound(q * r as u32, delta);
    report.set("fixture", &fixture_name);
    report.set("delta", delta);
    report.set("r", r);
    report.set("qubits", q);
    report.set("bob_bits", fixture.protocol.bob_bits());
    report.set("compiled_alice_bits", compiled.cost().alice.amount());
    report.set("original_worst_case_error", worst_o);
    report.set("compiled_worst_case_error", worst_c);
    report.set("error_increase", max_increase);
    report.set("max_bad_count", max_bad);
    report.set("bad_count_bound", bound);
    report.check(Assertion::at_most("error_increase_within_delta", max_increase, delta + tol.exact));
    report.check(Assertion::at_most("bad_count_within_bound", max_bad as f64, bound as f64));
    Ok(report)
}

fn read_matrix_file(path: &str) -> Result<CMatrix> {
    let bytes = std::fs::read(path).map_err(|e| ExperimentError::Config(format!("matrix file {path}: {e}")))?;
    if bytes.starts_with(b"SMPM") {
        Ok(read_matrix_binary(bytes.as_slice())?)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| ExperimentError::Config(format!("{path} is not text")))?;
        Ok(read_matrix_text(&text)?)
    }
}

struct LearnInstance {
    q: u32,
    rho: DensityMatrix,
    family: Vec<MeasurementOperator>,
}

fn learn_instances(p: &mut Params, seed: Option<u64>, tol: &RunTolerances) -> Result<Vec<LearnInstance>> {
    let fixture = p.fixture.get_or_insert_with(|| "random".into()).clone();
    match fixture.as_str() {
        "basis" => {
            let family = vec![MeasurementOperator::diagonal(&[1.0, 0.0])?, MeasurementOperator::diagonal(&[0.0, 1.0])?];
            p.r.get_or_insert(2);
            Ok(vec![LearnInstance { q: 1, rho: DensityMatrix::basis_state(1, 0)?, family }])
        }
        "random" => {
            let seed = need_seed(seed, "learn-state on the random fixture")?;
            let q = *p.q.get_or_insert(1);
            let c = *p.c.get_or_insert(2);
            let instances = *p.instances.get_or_insert(1);
            cap("q", q as u64, 4)?;
            cap("c", c as u64, 6)?;
            cap("instances", instances as u64, 1000)?;
            config_check(q >= 1 && c >= 1 && instances >= 1, || "q, c and instances must be positive".into())?;
            Ok((0..instances as u64)
                .map(|i| {
                    let mut rng = stream_rng(seed, i);
                    let rho = random_density(q, &mut rng);
                    let family = (0..1usize << c).map(|_| random_measurement(q, &mut rng)).collect();
                    LearnInstance { q, rho, family }
                })
                .collect())
        }
        "files" => {
            let state =
                p.state.clone().ok_or_else(|| ExperimentError::Config("files fixture needs state=PATH".into()))?;
            let family = p
                .family
                .clone()
                .ok_or_else(|| ExperimentError::Config("files fixture needs family=P1,P2,..".into()))?;
            let rho = DensityMatrix::new_with(read_matrix_file(&state)?, &tol.numeric)?;
            let family = family
                .split(',')
                .map(|path| Ok(MeasurementOperator::new(read_matrix_file(path.trim())?)?))
                .collect::<Result<Vec<_>>>()?;
            Ok(vec![LearnInstance { q: rho.qubits(), rho, family }])
        }
        other => Err(ExperimentError::Config(format!("unknown learn-state fixture {other:?} (basis, random, files)"))),
    }
}

fn learn_state(p: &mut Params, seed: Option<u64>, tol: &RunTolerances) -> Result<Report> {
    let delta = *p.delta.get_or_insert(0.1);
    let instances = learn_instances(p, seed, tol)?;
    let cfg = LearnConfig { tolerances: tol.numeric, ..LearnConfig::default() };
    let eta = 1.0 - delta / 4.0;
    let fixed_r = p.r;
    let results = instances
        .par_iter()
        .map(|inst| {
            let r = fixed_r.unwrap_or_else(|| default_copies(inst.q, delta, cfg.qubit_budget));
            let out: LearnOutcome = learn_state_message_with(&inst.rho, &inst.family, delta, r, &cfg)?;
            let est = reconstruct_estimates_with(&out.record, &inst.family, inst.q, &cfg)?;
            let exact = inst
                .family
                .iter()
                .map(|e| acceptance_probability(e, &inst.rho))
                .collect::<crate::qcore::Result<Vec<_>>>()?;
            Ok((r, out, est, exact))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = Report::new(&["instance", "q", "c", "r", "b", "p", "p_prime", "abs_error", "status"]);
    let (mut max_err, mut max_weight, mut total_t, mut max_t, mut excess) = (0.0f64, 0.0f64, 0usize, 0usize, i64::MIN);
    let (mut skipped, mut near_edge) = (0usize, 0usize);
    for (i, ((r, out, est, exact), inst)) in results.iter().zip(&instances).enumerate() {
        let c = inst.family.len().trailing_zeros();
        for (b, step) in out.steps.iter().enumerate() {
            let err = (est[b] - exact[b]).abs();
            max_err = max_err.max(err);
            report.row(vec![
                i.to_string(),
                inst.q.to_string(),
                c.to_string(),
                r.to_string(),
                b.to_string(),
                exact[b].to_string(),
                est[b].to_string(),
                err.to_string(),
                if step.bad { "bad" } else { "good" }.to_string(),
            ]);
            skipped += step.update_skipped as usize;
            near_edge += step.near_band_edge as usize;
        }
        let t = out.bad_count();
        total_t += t;
        max_t = max_t.max(t);
        excess = excess.max(t as i64 - bad_count_bound(inst.q * *r as u32, delta) as i64);
        max_weight = max_weight.max(out.max_band_weight().unwrap_or(0.0));
    }
    report.set("fixture", p.fixture.as_deref().unwrap_or("random"));
    report.set("instances", instances.len());
    report.set("delta", delta);
    if let [(r, out, ..)] = results.as_slice() {
        report.set("r", r);
        report.set("T", out.bad_count());
        report.set("bound", bad_count_bound(instances[0].q * *r as u32, delta));
        report.set("record_bits", out.record.payload_bits());
    } else {
        report.set("T_total", total_t);
        report.set("T_max", max_t);
    }
    report.set("max_abs_error", max_err);
    report.set("max_band_weight", max_weight);
    report.set("eta", eta);
    report.set("skipped_updates", skipped);
    report.set("near_band_edge", near_edge);
    report.check(Assertion::at_most("estimates_within_delta", max_err, delta));
    report.check(Assertion::at_most("bad_count_within_bound", excess as f64, 0.0));
    report.check(Assertion::at_most("band_weight_at_most_eta", max_weight, eta + tol.markov));
    Ok(report)
}

fn derandomize(p: &mut Params, seed: Option<u64>, tol: &RunTolerances) -> Result<Report> {
    let seed = need_seed(seed, "derandomize")?;
    let n = *p.n.get_or_insert(2);
    let reps = *p.reps.get_or_insert(1);
    let s = *p.s.get_or_insert(12);
    let attempts = *p.attempts.get_or_insert(DerandomizeConfig::default().attempts);
    let code_spec = p.code.get_or_insert_with(|| "hadamard".into()).clone();
    config_check((1..=4).contains(&n) && (1..=3).contains(&reps) && s >= 1, || {
        format!("need 1 <= n <= 4, 1 <= reps <= 3, s >= 1; got n={n}, reps={reps}, s={s}")
    })?;
    cap("s", s as u64, 10_000)?;
    let proto = equality_code(n, load_code(&code_spec, n)?, reps)?;
    let original_cost = proto.cost();
    let inputs: Vec<u64> = (0..1u64 << n).collect();
    let f = FunctionTable::equality(n as u32);
    let original = exact_cells(&proto, &f, &inputs, &inputs)?;
    let derand = derandomize_alice(proto, s, &inputs, &DerandomizeConfig { seed, attempts })?;
    let after = exact_cells(&derand, &f, &inputs, &inputs)?;

    let table = derand.table();
    let mut report = Report::new(&["x", "y", "f", "original", "derandomized", "increase", "deviation"]);
    let mut max_increase = f64::NEG_INFINITY;
    for (&(i, j, v, a), &(_, _, _, b)) in original.iter().zip(&after) {
        let inc = (v as f64 - b).abs() - (v as f64 - a).abs();
        max_increase = max_increase.max(inc);
        report.row(vec![
            i.to_string(),
            j.to_string(),
            v.to_string(),
            a.to_string(),
            b.to_string(),
            inc.to_string(),
            table.deviations[i].to_string(),
        ]);
    }
    let max_dev = table.deviations.iter().copied().fold(0.0, f64::max);
    report.set("n", n);
    report.set("reps", reps);
    report.set("s", s);
    report.set("original_alice_bits", original_cost.alice.amount());
    report.set("derandomized_alice_bits", derand.cost().alice.amount());
    report.set("bob_bits", original_cost.bob_bits);
    report.set("max_deviation", max_dev);
    report.set("max_attempt", table.attempts.iter().max().copied().unwrap_or(0));
    report.set("error_increase", max_increase);
    report.check(Assertion::at_most("multiset_deviation", max_dev, CLOSENESS));
    report.check(Assertion::at_most("error_increase_within_tenth", max_increase, CLOSENESS + tol.exact));
    Ok(report)
}

fn oracle_suite(p: &mut Params, seed: Option<u64>) -> Result<Report> {
    let seed = need_seed(seed, "oracle-suite")?;
    let instances = *p.instances.get_or_insert(100);
    cap("instances", instances as u64, INSTANCE_CAP as u64)?;
    let mut report = Report::new(&[
        "instance",
        "seed",
        "extraction_error",
        "model_b_cost",
        "f_complexity",
        "solve_error",
        "compute_error",
        "validity_error",
        "union_holds",
        "decoded",
        "decoded_after_flips",
    ]);

    let (mut eq_violations, mut exhaustive_violations, mut census_violations) = (0, 0, 0);
    for n in 1..=3u32 {
        let eq = FunctionTable::equality(n);
        let (ca, cb) = det_complexity_function(&eq)?;
        report.set(&format!("equality_n{n}_cost"), format!("{ca}+{cb}"));
        eq_violations += (ca + cb != 2 * n) as usize;
        if n <= 2 {
            let exhaustive = det_complexity_function_exhaustive(&eq)?;
            report.set(&format!("equality_n{n}_exhaustive"), exhaustive);
            exhaustive_violations += (exhaustive != ca + cb) as usize;
        }
        let census = alice_map_census(&eq, 1 << n)?;
        report.set(&format!("equality_n{n}_zero_error_maps"), census.zero_error);
        census_violations += (!census.zero_error_implies_injective() || census.zero_error == 0) as usize;
    }

    let reports = (0..instances as u64)
        .into_par_iter()
        .map(|i| run_chain(derive_seed(seed, i)))
        .collect::<crate::oracle::Result<Vec<_>>>()?;
    let mut chain_violations = 0;
    for (i, r) in reports.iter().enumerate() {
        chain_violations += !r.all_hold() as usize;
        report.row(vec![
            i.to_string(),
            r.seed.to_string(),
            r.extraction_error.to_string(),
            r.model_b_cost.to_string(),
            r.f_complexity.to_string(),
            r.union.solve_error.to_string(),
            r.union.compute_error.to_string(),
            r.union.validity_error.to_string(),
            r.union.holds().to_string(),
            r.decoded_exactly.to_string(),
            r.decodes_after_flips.to_string(),
        ]);
    }
    report.set("instances", instances);
    report.set("chain_violations", chain_violations);
    report.check(Assertion::count_zero("equality_cost_2n", eq_violations));
    report.check(Assertion::count_zero("exhaustive_search_agrees", exhaustive_violations));
    report.check(Assertion::count_zero("zero_error_maps_injective", census_violations));
    report.check(Assertion::count_zero("chain_holds", chain_violations));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::super::{run_experiment, ExperimentConfig};

    fn run(name: &str, seed: Option<u64>, params: &[&str]) -> super::Report {
        let mut cfg = ExperimentConfig::new(name);
        cfg.seed = seed;
        for a in params {
            cfg.set_param(a).unwrap();
        }
        let out = run_experiment(&cfg).unwrap();
        assert!(out.report.passed(), "{name}: {:?}", out.report.assertions);
        out.report
    }

    #[test]
    fn eq_public_worst_case_is_a_quarter() {
        let r = run("eq-public", None, &["n=4", "k=2"]);
        assert_eq!(r.summary_value("worst_case_error"), Some("0.25"));
        assert_eq!(r.rows.len(), 256);
    }

    #[test]
    fn eq_code_small() {
        let r = run("eq-code", None, &["n=2", "reps=2"]);
        assert_eq!(r.summary_value("worst_case_error"), Some("0.25"));
    }

    #[test]
    fn learn_state_basis_fixture() {
        let r = run("learn-state", None, &["fixture=basis"]);
        assert_eq!(r.summary_value("T"), Some("1"));
        assert_eq!(r.rows.len(), 2);
    }

    #[test]
    fn compile_toy_within_delta() {
        let r = run("compile", None, &["fixture=toy", "r=2"]);
        let inc: f64 = r.summary_value("error_increase").unwrap().parse().unwrap();
        assert!(inc <= 0.1);
    }

    #[test]
    fn hidden_matching_is_exact() {
        let r = run("hidden-matching", None, &["n=4"]);
        assert_eq!(r.rows.len(), 48);
    }

    #[test]
    fn sampled_experiments_need_a_seed() {
        for name in ["matching-qc", "derandomize", "oracle-suite"] {
            let err = run_experiment(&ExperimentConfig::new(name)).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{name}");
        }
    }

    #[test]
    fn caps_exit_with_four() {
        let mut cfg = ExperimentConfig::new("eq-public");
        cfg.set_param("n=8").unwrap();
        cfg.set_param("k=4").unwrap();
        assert_eq!(run_experiment(&cfg).unwrap_err().exit_code(), 4);
        let mut cfg = ExperimentConfig::new("learn-state");
        cfg.seed = Some(1);
        cfg.set_param("q=2").unwrap();
        cfg.set_param("r=7").unwrap();
        assert_eq!(run_experiment(&cfg).unwrap_err().exit_code(), 4);
    }
}
