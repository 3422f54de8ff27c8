//! From a relational protocol to a function and back: extract the function
//! a deterministic protocol computes, bound a second protocol's error on the
//! relation, and split multi-bit outputs into Boolean functions through a
//! code.

use rand::seq::index;
use rand::Rng;

use super::{det_complexity_relation, DeterministicSmpProtocol, OracleError, Result};
use crate::bits::ceil_log2;
use crate::codes::LinearCode;
use crate::rng::stream_rng;
use crate::smp::{FunctionTable, RelationTable};

/// Relative distance a Booleanizing code must have.
pub const BOOLEANIZE_MIN_DISTANCE: f64 = 0.25;

const COMPARISON_SLACK: f64 = 1e-12;

/// The function a total protocol computes and `Pr_mu[f(x, y) not valid]`.
pub fn extract_function(p: &DeterministicSmpProtocol, rel: &RelationTable) -> Result<(FunctionTable, f64)> {
    let bits = (ceil_log2(rel.outputs() as u64) as u32).max(1);
    let error = p.distributional_error(rel)?;
    let f = FunctionTable::from_fn(rel.rows(), rel.cols(), bits, |x, y| Some(p.output(x, y)))?;
    Ok((f, error))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnionBound {
    /// `Pr_mu[p_a(x, y) not valid]`.
    pub solve_error: f64,
    /// `Pr_mu[p_a(x, y) != f(x, y)]`.
    pub compute_error: f64,
    /// `Pr_mu[f(x, y) not valid]`.
    pub validity_error: f64,
    pub eps: f64,
}

impl UnionBound {
    pub fn holds(&self) -> bool {
        self.solve_error <= self.compute_error + self.validity_error + COMPARISON_SLACK
    }

    /// Both errors on the right are at most `eps`.
    pub fn premise(&self) -> bool {
        self.compute_error <= self.eps && self.validity_error <= self.eps
    }

    /// The conclusion `solve_error <= 2 eps` whenever the premise holds.
    pub fn within_two_eps(&self) -> bool {
        !self.premise() || self.solve_error <= 2.0 * self.eps + COMPARISON_SLACK
    }
}

pub fn union_bound_check(
    p_a: &DeterministicSmpProtocol,
    f: &FunctionTable,
    rel: &RelationTable,
    eps: f64,
) -> Result<UnionBound> {
    if f.rows() != rel.rows() || f.cols() != rel.cols() {
        return Err(OracleError::InvalidProtocol("function and relation shapes differ".into()));
    }
    p_a.check_shape(rel.rows(), rel.cols())?;
    let mut bound = UnionBound { solve_error: 0.0, compute_error: 0.0, validity_error: 0.0, eps };
    for (x, y) in rel.support() {
        let w = rel.mu(x, y);
        let fv = f.value(x, y)?;
        let out = p_a.output(x, y);
        if !rel.is_valid(x, y, out) {
            bound.solve_error += w;
        }
        if out != fv {
            bound.compute_error += w;
        }
        if !rel.is_valid(x, y, fv) {
            bound.validity_error += w;
        }
    }
    Ok(bound)
}

/// `f_j(x, y)` = bit `j` of `g(f(x, y))`, one table per codeword position.
pub fn booleanize(f: &FunctionTable, g: &LinearCode) -> Result<Vec<FunctionTable>> {
    let k = f.output_bits() as usize;
    if g.n() != k {
        return Err(OracleError::InvalidProtocol(format!("code takes {} bits, outputs have {k}", g.n())));
    }
    let found = g.relative_distance()?;
    if found < BOOLEANIZE_MIN_DISTANCE {
        return Err(OracleError::DistanceTooSmall { found, required: BOOLEANIZE_MIN_DISTANCE });
    }
    let words: Vec<Option<Vec<bool>>> = (0..f.rows())
        .flat_map(|x| (0..f.cols()).map(move |y| (x, y)))
        .map(|(x, y)| f.get(x, y).map(|v| g.encode_u64(v as u64)))
        .collect();
    (0..g.m())
        .map(|j| {
            FunctionTable::from_fn(f.rows(), f.cols(), 1, |x, y| words[x * f.cols() + y].as_ref().map(|w| w[j] as u32))
                .map_err(OracleError::from)
        })
        .collect()
}

/// Nearest-codeword decoding of the Boolean tables, cell by cell.
pub fn unbooleanize(tables: &[FunctionTable], g: &LinearCode) -> Result<FunctionTable> {
    if tables.len() != g.m() {
        return Err(OracleError::InvalidProtocol(format!("{} tables for a code of length {}", tables.len(), g.m())));
    }
    let (rows, cols) = (tables[0].rows(), tables[0].cols());
    let mut decoded = Vec::with_capacity(rows * cols);
    for x in 0..rows {
        for y in 0..cols {
            let word: Option<Vec<bool>> = tables.iter().map(|t| t.get(x, y).map(|b| b == 1)).collect();
            decoded.push(match word {
                Some(w) => Some(g.decode_nearest(&w)? as u32),
                None => None,
            });
        }
    }
    Ok(FunctionTable::from_fn(rows, cols, g.n() as u32, |x, y| decoded[x * cols + y])?)
}

/// Random relation with dyadic `mu` (so every error sum is exact), a random
/// protocol `model_b`, and `model_a`, a copy of it with some referee
/// entries redrawn.
#[derive(Debug, Clone)]
pub struct ToyInstance {
    pub relation: RelationTable,
    pub model_b: DeterministicSmpProtocol,
    pub model_a: DeterministicSmpProtocol,
}

const TOY_MU_UNITS: usize = 64;

pub fn random_toy_instance(seed: u64) -> ToyInstance {
    let mut rng = stream_rng(seed, 0);
    let rows = rng.random_range(2..=4);
    let cols = rng.random_range(2..=4);
    let outputs = rng.random_range(2..=4u32);
    let cells = rows * cols;
    let valid = (0..cells).map(|_| rng.random_range(1..1u64 << outputs)).collect();
    let mut units = vec![0usize; cells];
    for _ in 0..TOY_MU_UNITS {
        units[rng.random_range(0..cells)] += 1;
    }
    let mu = units.iter().map(|&u| u as f64 / TOY_MU_UNITS as f64).collect();
    let relation = RelationTable::new(rows, cols, outputs, valid, mu).expect("valid sets are nonempty");

    let ca = rng.random_range(0..=2u32);
    let cb = rng.random_range(0..=2u32);
    let alice = (0..rows).map(|_| rng.random_range(0..1u32 << ca)).collect();
    let bob = (0..cols).map(|_| rng.random_range(0..1u32 << cb)).collect();
    let referee: Vec<u32> = (0..1 << (ca + cb)).map(|_| rng.random_range(0..outputs)).collect();
    let model_b = DeterministicSmpProtocol::new(ca, cb, alice, bob, referee.clone()).expect("well formed");
    let redrawn =
        referee.iter().map(|&z| if rng.random_bool(0.25) { rng.random_range(0..outputs) } else { z }).collect();
    let model_a = DeterministicSmpProtocol { referee_map: redrawn, ..model_b.clone() };
    ToyInstance { relation, model_b, model_a }
}

/// Everything the chain checks on one toy instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    pub seed: u64,
    /// Distributional error of `model_b`, which is also `Pr_mu[f not valid]`.
    pub extraction_error: f64,
    pub model_b_cost: u32,
    /// Cheapest zero-error protocol for the extracted `f` on `supp(mu)`.
    pub f_complexity: u32,
    pub union: UnionBound,
    pub code_length: usize,
    pub code_distance: usize,
    pub decoded_exactly: bool,
    /// Decoding survives `(d - 1) / 2` flipped bits on every cell.
    pub decodes_after_flips: bool,
}

impl ChainReport {
    pub fn all_hold(&self) -> bool {
        self.f_complexity <= self.model_b_cost
            && self.union.holds()
            && self.union.within_two_eps()
            && self.decoded_exactly
            && self.decodes_after_flips
    }
}

pub fn run_chain(seed: u64) -> Result<ChainReport> {
    let toy = random_toy_instance(seed);
    let rel = &toy.relation;
    let (f, extraction_error) = extract_function(&toy.model_b, rel)?;

    let f_relation = RelationTable::from_function(
        &f,
        Some((0..rel.rows()).flat_map(|x| (0..rel.cols()).map(move |y| rel.mu(x, y))).collect()),
    )?;
    let f_complexity = det_complexity_relation(&f_relation, toy.model_b.total_cost())?
        .expect("model_b itself computes f")
        .total_cost();

    let a_error = union_bound_check(&toy.model_a, &f, rel, 0.0)?.compute_error;
    let union = union_bound_check(&toy.model_a, &f, rel, extraction_error.max(a_error))?;

    let g = LinearCode::booleanizer(f.output_bits() as usize, seed)?;
    let tables = booleanize(&f, &g)?;
    let decoded_exactly = unbooleanize(&tables, &g)? == f;
    let d = g.min_distance_bruteforce()?;
    let mut rng = stream_rng(seed, 1);
    let mut decodes_after_flips = true;
    for x in 0..f.rows() {
        for y in 0..f.cols() {
            let mut word: Vec<bool> = tables.iter().map(|t| t.get(x, y) == Some(1)).collect();
            for j in index::sample(&mut rng, g.m(), (d - 1) / 2) {
                word[j] = !word[j];
            }
            decodes_after_flips &= g.decode_nearest(&word)? as u32 == f.value(x, y)?;
        }
    }
    Ok(ChainReport {
        seed,
        extraction_error,
        model_b_cost: toy.model_b.total_cost(),
        f_complexity,
        union,
        code_length: g.m(),
        code_distance: d,
        decoded_exactly,
        decodes_after_flips,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(rows: usize, cols: usize, outputs: u32, valid: Vec<u64>) -> RelationTable {
        RelationTable::new(rows, cols, outputs, valid, vec![1.0 / (rows * cols) as f64; rows * cols]).unwrap()
    }

    #[test]
    fn valid_protocol_extracts_with_zero_error() {
        let rel = uniform(2, 2, 2, vec![1, 2, 2, 1]);
        let p = DeterministicSmpProtocol::new(1, 1, vec![0, 1], vec![0, 1], vec![0, 1, 1, 0]).unwrap();
        let (f, err) = extract_function(&p, &rel).unwrap();
        assert_eq!(err, 0.0);
        assert_eq!(f.value(1, 0).unwrap(), 1);
    }

    #[test]
    fn constant_output_misses_one_cell_in_four() {
        let rel = uniform(2, 2, 2, vec![1, 3, 3, 2]);
        let p = DeterministicSmpProtocol::constant(2, 2, 0);
        assert_eq!(extract_function(&p, &rel).unwrap().1, 0.25);
    }

    #[test]
    fn extracted_function_is_no_harder_than_its_protocol() {
        let rel = uniform(3, 2, 3, vec![1, 2, 4, 3, 6, 5]);
        let p = DeterministicSmpProtocol::new(1, 1, vec![0, 1, 1], vec![1, 0], vec![2, 0, 1, 1]).unwrap();
        let (f, _) = extract_function(&p, &rel).unwrap();
        let frel = RelationTable::from_function(&f, None).unwrap();
        let best = det_complexity_relation(&frel, 6).unwrap().unwrap();
        assert!(best.total_cost() <= p.total_cost());
    }

    #[test]
    fn exact_protocol_and_valid_function_give_zero() {
        let rel = uniform(2, 2, 2, vec![1, 2, 2, 1]);
        let p = DeterministicSmpProtocol::new(1, 1, vec![0, 1], vec![0, 1], vec![0, 1, 1, 0]).unwrap();
        let (f, _) = extract_function(&p, &rel).unwrap();
        let b = union_bound_check(&p, &f, &rel, 0.0).unwrap();
        assert_eq!((b.solve_error, b.compute_error, b.validity_error), (0.0, 0.0, 0.0));
        assert!(b.holds() && b.within_two_eps());
    }

    #[test]
    fn tenth_plus_tenth_bounds_the_relational_error() {
        // Ten cells in a row, uniform mu. f is wrong on cell 0, p_a differs
        // from f on cell 1 and is wrong there.
        let rel = uniform(1, 10, 2, vec![2, 1, 1, 1, 1, 1, 1, 1, 1, 1]);
        let f = FunctionTable::from_fn(1, 10, 1, |_, _| Some(0)).unwrap();
        let bob = (0..10).collect();
        let mut referee = vec![0; 16];
        referee[1] = 1;
        let p_a = DeterministicSmpProtocol::new(0, 4, vec![0], bob, referee).unwrap();
        let b = union_bound_check(&p_a, &f, &rel, 0.1).unwrap();
        assert!((b.compute_error - 0.1).abs() < 1e-15 && (b.validity_error - 0.1).abs() < 1e-15);
        assert!((b.solve_error - 0.2).abs() < 1e-15);
        assert!(b.holds() && b.premise() && b.within_two_eps());
    }

    #[test]
    fn one_bit_outputs_booleanize_into_ten_copies() {
        let f = FunctionTable::equality(2);
        let g = LinearCode::booleanizer(1, 0).unwrap();
        let tables = booleanize(&f, &g).unwrap();
        assert_eq!(tables.len(), 10);
        assert!(tables.iter().all(|t| *t == f));
        assert_eq!(unbooleanize(&tables, &g).unwrap(), f);
    }

    #[test]
    fn two_bit_outputs_decode_on_every_cell() {
        let f = FunctionTable::from_fn(3, 4, 2, |x, y| Some(((x + 2 * y) % 4) as u32)).unwrap();
        let g = LinearCode::booleanizer(2, 0).unwrap();
        let tables = booleanize(&f, &g).unwrap();
        assert_eq!(unbooleanize(&tables, &g).unwrap(), f);
    }

    #[test]
    fn weak_codes_are_refused() {
        let f = FunctionTable::from_fn(2, 2, 2, |x, y| Some((x + y) as u32)).unwrap();
        assert!(matches!(booleanize(&f, &LinearCode::hadamard(3)), Err(OracleError::InvalidProtocol(_))));
        let mut rows = vec![vec![true, false]];
        rows.extend(vec![vec![true, true]; 19]);
        let lopsided = LinearCode::new(2, rows).unwrap();
        assert!(matches!(booleanize(&f, &lopsided), Err(OracleError::DistanceTooSmall { .. })));
    }

    #[test]
    fn chain_holds_on_seeded_toys() {
        for seed in 0..20 {
            let report = run_chain(seed).unwrap();
            assert!(report.all_hold(), "{report:?}");
        }
    }

    #[test]
    fn toy_instances_are_reproducible() {
        let a = random_toy_instance(5);
        let b = random_toy_instance(5);
        assert_eq!(a.relation, b.relation);
        assert_eq!(a.model_a, b.model_a);
        assert_eq!(run_chain(5).unwrap(), run_chain(5).unwrap());
    }
}
