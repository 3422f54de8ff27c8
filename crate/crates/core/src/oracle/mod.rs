//! Brute-force ground truth for tiny problems: exact deterministic SMP
//! complexity, the census of zero-error Alice maps, and the chain that turns
//! a relational protocol into a function and then into Boolean functions.
//!
//! Searches have explicit caps and fail loudly when a cap is hit.

mod chain;

use std::collections::HashMap;

use thiserror::Error;

use crate::bits::ceil_log2;
use crate::codes::CodeError;
use crate::smp::{FunctionTable, RelationTable, SmpError};

pub use chain::{
    booleanize, extract_function, random_toy_instance, run_chain, unbooleanize, union_bound_check, ChainReport,
    ToyInstance, UnionBound, BOOLEANIZE_MIN_DISTANCE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Smp(#[from] SmpError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("function is partial; use det_complexity_relation on its domain")]
    Partial,
    #[error("{what}: {found} exceeds the cap of {cap}")]
    CapExceeded { what: &'static str, found: u64, cap: u64 },
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error("code relative distance {found} is below the required {required}")]
    DistanceTooSmall { found: f64, required: f64 },
}

pub type Result<T, E = OracleError> = std::result::Result<T, E>;

/// Largest `|X|` or `|Y|` for the distinct rows/columns computation.
pub const FUNCTION_SIDE_CAP: usize = 1 << 10;
/// Largest `|X|` or `|Y|` for the exhaustive function cross-check.
pub const EXHAUSTIVE_SIDE_CAP: usize = 8;
pub const RELATION_CELL_CAP: usize = 36;
pub const RELATION_BITS_CAP: u32 = 6;
/// Search nodes visited before an exhaustive search gives up.
pub const NODE_CAP: u64 = 100_000_000;
/// Alice maps enumerated by [`alice_map_census`].
pub const CENSUS_CAP: u64 = 1 << 26;

/// Deterministic SMP protocol on index sets `0..|X|` and `0..|Y|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicSmpProtocol {
    alice_bits: u32,
    bob_bits: u32,
    alice_map: Vec<u32>,
    bob_map: Vec<u32>,
    /// Output for messages `(a, b)` at `a << bob_bits | b`.
    referee_map: Vec<u32>,
}

impl DeterministicSmpProtocol {
    pub fn new(
        alice_bits: u32,
        bob_bits: u32,
        alice_map: Vec<u32>,
        bob_map: Vec<u32>,
        referee_map: Vec<u32>,
    ) -> Result<Self> {
        if alice_bits + bob_bits > 20 {
            return Err(OracleError::InvalidProtocol(format!("{} message bits", alice_bits + bob_bits)));
        }
        if alice_map.is_empty() || bob_map.is_empty() {
            return Err(OracleError::InvalidProtocol("empty input set".into()));
        }
        if alice_map.iter().any(|&a| a >> alice_bits != 0) || bob_map.iter().any(|&b| b >> bob_bits != 0) {
            return Err(OracleError::InvalidProtocol("message longer than declared".into()));
        }
        if referee_map.len() != 1 << (alice_bits + bob_bits) {
            return Err(OracleError::InvalidProtocol(format!(
                "referee table has {} entries, expected {}",
                referee_map.len(),
                1u64 << (alice_bits + bob_bits)
            )));
        }
        Ok(Self { alice_bits, bob_bits, alice_map, bob_map, referee_map })
    }

    pub fn constant(rows: usize, cols: usize, z: u32) -> Self {
        Self::new(0, 0, vec![0; rows], vec![0; cols], vec![z]).expect("well formed")
    }

    pub fn rows(&self) -> usize {
        self.alice_map.len()
    }

    pub fn cols(&self) -> usize {
        self.bob_map.len()
    }

    /// `(c_A, c_B)`.
    pub fn cost(&self) -> (u32, u32) {
        (self.alice_bits, self.bob_bits)
    }

    pub fn total_cost(&self) -> u32 {
        self.alice_bits + self.bob_bits
    }

    pub fn alice_message(&self, x: usize) -> u32 {
        self.alice_map[x]
    }

    pub fn bob_message(&self, y: usize) -> u32 {
        self.bob_map[y]
    }

    pub fn output(&self, x: usize, y: usize) -> u32 {
        self.referee_map[((self.alice_map[x] << self.bob_bits) | self.bob_map[y]) as usize]
    }

    /// `Pr_mu[output not valid]`, summed over cells in row-major order.
    pub fn distributional_error(&self, rel: &RelationTable) -> Result<f64> {
        self.check_shape(rel.rows(), rel.cols())?;
        Ok(rel
            .support()
            .filter(|&(x, y)| !rel.is_valid(x, y, self.output(x, y)))
            .fold(0.0, |acc, (x, y)| acc + rel.mu(x, y)))
    }

    /// Whether the protocol agrees with `f` on its whole domain.
    pub fn computes(&self, f: &FunctionTable) -> Result<bool> {
        self.check_shape(f.rows(), f.cols())?;
        Ok(f.domain().all(|(x, y)| f.get(x, y) == Some(self.output(x, y))))
    }

    fn check_shape(&self, rows: usize, cols: usize) -> Result<()> {
        if rows != self.rows() || cols != self.cols() {
            return Err(OracleError::InvalidProtocol(format!(
                "protocol is {}×{}, table is {rows}×{cols}",
                self.rows(),
                self.cols()
            )));
        }
        Ok(())
    }
}

fn class_ids<K: std::hash::Hash + Eq>(keys: impl Iterator<Item = K>) -> (Vec<u32>, usize) {
    let mut seen = HashMap::new();
    let ids = keys
        .map(|k| {
            let next = seen.len() as u32;
            *seen.entry(k).or_insert(next)
        })
        .collect();
    (ids, seen.len())
}

fn check_total_function(f: &FunctionTable) -> Result<()> {
    if !f.is_total() {
        return Err(OracleError::Partial);
    }
    for side in [f.rows(), f.cols()] {
        if side > FUNCTION_SIDE_CAP {
            return Err(OracleError::CapExceeded {
                what: "input set size",
                found: side as u64,
                cap: FUNCTION_SIDE_CAP as u64,
            });
        }
    }
    Ok(())
}

/// Zero-error protocol in which Alice names her row class and Bob his column
/// class; optimal on both sides for total functions.
pub fn distinct_class_protocol(f: &FunctionTable) -> Result<DeterministicSmpProtocol> {
    check_total_function(f)?;
    let (row_ids, row_classes) =
        class_ids((0..f.rows()).map(|x| (0..f.cols()).map(|y| f.get(x, y)).collect::<Vec<_>>()));
    let (col_ids, col_classes) =
        class_ids((0..f.cols()).map(|y| (0..f.rows()).map(|x| f.get(x, y)).collect::<Vec<_>>()));
    let ca = ceil_log2(row_classes as u64) as u32;
    let cb = ceil_log2(col_classes as u64) as u32;
    let mut referee = vec![0u32; 1 << (ca + cb)];
    for x in 0..f.rows() {
        for y in 0..f.cols() {
            referee[((row_ids[x] << cb) | col_ids[y]) as usize] = f.get(x, y).expect("total");
        }
    }
    DeterministicSmpProtocol::new(ca, cb, row_ids, col_ids, referee)
}

/// Minimal `(c_A, c_B)` of a zero-error deterministic protocol for a total
/// function: the bit lengths needed to name distinct rows and columns.
pub fn det_complexity_function(f: &FunctionTable) -> Result<(u32, u32)> {
    Ok(distinct_class_protocol(f)?.cost())
}

/// Minimal total cost over zero-error protocols for a total function, by
/// exhaustive search over message partitions.
pub fn det_complexity_function_exhaustive(f: &FunctionTable) -> Result<u32> {
    check_total_function(f)?;
    for side in [f.rows(), f.cols()] {
        if side > EXHAUSTIVE_SIDE_CAP {
            return Err(OracleError::CapExceeded {
                what: "exhaustive input set size",
                found: side as u64,
                cap: EXHAUSTIVE_SIDE_CAP as u64,
            });
        }
    }
    let rel = RelationTable::from_function(f, None)?;
    let bits = ceil_log2(f.rows() as u64) as u32 + ceil_log2(f.cols() as u64) as u32;
    let witness = search_relation(&rel, bits)?.expect("sending full inputs always works");
    Ok(witness.total_cost())
}

/// Cheapest deterministic protocol, by total cost and then by smaller
/// `c_A`, that is valid on every cell of `supp(mu)`; `None` if every such
/// protocol needs more than `max_bits`.
pub fn det_complexity_relation(rel: &RelationTable, max_bits: u32) -> Result<Option<DeterministicSmpProtocol>> {
    let cells = rel.rows() * rel.cols();
    if cells > RELATION_CELL_CAP {
        return Err(OracleError::CapExceeded { what: "|X|·|Y|", found: cells as u64, cap: RELATION_CELL_CAP as u64 });
    }
    if max_bits > RELATION_BITS_CAP {
        return Err(OracleError::CapExceeded {
            what: "max_bits",
            found: max_bits as u64,
            cap: RELATION_BITS_CAP as u64,
        });
    }
    search_relation(rel, max_bits)
}

fn search_relation(rel: &RelationTable, max_bits: u32) -> Result<Option<DeterministicSmpProtocol>> {
    let mut nodes = 0u64;
    for total in 0..=max_bits {
        for ca in 0..=total {
            let cb = total - ca;
            let mut search = PartitionSearch::new(rel, 1 << ca, 1 << cb, &mut nodes);
            if search.alice_phase(0, 0)? {
                return Ok(Some(search.witness(ca, cb)?));
            }
        }
    }
    Ok(None)
}

/// Message maps up to relabelling are set partitions of `X` and `Y`; a
/// referee exists iff every block pair has a common valid output on its
/// supported cells.
struct PartitionSearch<'a> {
    rel: &'a RelationTable,
    ka: usize,
    kb: usize,
    alice: Vec<usize>,
    bob: Vec<usize>,
    /// Common valid outputs of block pair `(a, b)` at `a * kb + b`.
    common: Vec<u64>,
    undo: Vec<(usize, u64)>,
    nodes: &'a mut u64,
}

impl<'a> PartitionSearch<'a> {
    fn new(rel: &'a RelationTable, ka: usize, kb: usize, nodes: &'a mut u64) -> Self {
        let ka = ka.min(rel.rows());
        let kb = kb.min(rel.cols());
        Self {
            rel,
            ka,
            kb,
            alice: vec![0; rel.rows()],
            bob: vec![0; rel.cols()],
            common: vec![u64::MAX; ka * kb],
            undo: Vec::new(),
            nodes,
        }
    }

    fn tick(&mut self) -> Result<()> {
        *self.nodes += 1;
        if *self.nodes > NODE_CAP {
            return Err(OracleError::CapExceeded { what: "search nodes", found: *self.nodes, cap: NODE_CAP });
        }
        Ok(())
    }

    fn alice_phase(&mut self, x: usize, used: usize) -> Result<bool> {
        if x == self.rel.rows() {
            return self.bob_phase(0, 0);
        }
        for a in 0..(used + 1).min(self.ka) {
            self.tick()?;
            self.alice[x] = a;
            if self.alice_phase(x + 1, used.max(a + 1))? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn bob_phase(&mut self, y: usize, used: usize) -> Result<bool> {
        if y == self.rel.cols() {
            return Ok(true);
        }
        for b in 0..(used + 1).min(self.kb) {
            self.tick()?;
            let mark = self.undo.len();
            let mut feasible = true;
            for x in 0..self.rel.rows() {
                if self.rel.mu(x, y) <= 0.0 {
                    continue;
                }
                let idx = self.alice[x] * self.kb + b;
                let old = self.common[idx];
                let new = old & self.rel.valid_mask(x, y);
                if new != old {
                    self.undo.push((idx, old));
                    self.common[idx] = new;
                }
                if new == 0 {
                    feasible = false;
                    break;
                }
            }
            if feasible {
                self.bob[y] = b;
                if self.bob_phase(y + 1, used.max(b + 1))? {
                    return Ok(true);
                }
            }
            while self.undo.len() > mark {
                let (idx, old) = self.undo.pop().expect("nonempty");
                self.common[idx] = old;
            }
        }
        Ok(false)
    }

    fn witness(&self, ca: u32, cb: u32) -> Result<DeterministicSmpProtocol> {
        let mut referee = vec![0u32; 1 << (ca + cb)];
        for a in 0..self.ka {
            for b in 0..self.kb {
                let common = self.common[a * self.kb + b];
                referee[(a << cb) | b] = if common == u64::MAX { 0 } else { common.trailing_zeros() };
            }
        }
        DeterministicSmpProtocol::new(
            ca,
            cb,
            self.alice.iter().map(|&a| a as u32).collect(),
            self.bob.iter().map(|&b| b as u32).collect(),
            referee,
        )
    }
}

/// Counts over all Alice maps `X -> 0..messages`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AliceMapCensus {
    pub messages: usize,
    pub maps: u64,
    /// Maps that admit a zero-error protocol when Bob sends `y` in full.
    pub zero_error: u64,
    pub injective: u64,
    pub zero_error_injective: u64,
}

impl AliceMapCensus {
    /// Every zero-error Alice map is injective.
    pub fn zero_error_implies_injective(&self) -> bool {
        self.zero_error == self.zero_error_injective
    }
}

/// Enumerates every Alice map; Bob sending `y` in full is the most
/// informative Bob, so a map that fails there fails for every protocol.
pub fn alice_map_census(f: &FunctionTable, messages: usize) -> Result<AliceMapCensus> {
    check_total_function(f)?;
    let rows = f.rows();
    let maps = (messages as u64)
        .checked_pow(rows as u32)
        .filter(|&m| m <= CENSUS_CAP)
        .ok_or(OracleError::CapExceeded { what: "Alice maps", found: u64::MAX, cap: CENSUS_CAP })?;
    let (row_ids, _) = class_ids((0..rows).map(|x| (0..f.cols()).map(|y| f.get(x, y)).collect::<Vec<_>>()));
    let mut census = AliceMapCensus { messages, maps, zero_error: 0, injective: 0, zero_error_injective: 0 };
    let mut map = vec![0usize; rows];
    let mut class_of = vec![u32::MAX; messages];
    let mut hits = vec![0u32; messages];
    for _ in 0..maps {
        class_of.iter_mut().for_each(|c| *c = u32::MAX);
        hits.iter_mut().for_each(|h| *h = 0);
        let mut zero_error = true;
        for x in 0..rows {
            let m = map[x];
            hits[m] += 1;
            if class_of[m] == u32::MAX {
                class_of[m] = row_ids[x];
            } else if class_of[m] != row_ids[x] {
                zero_error = false;
            }
        }
        let injective = hits.iter().all(|&h| h <= 1);
        census.zero_error += zero_error as u64;
        census.injective += injective as u64;
        census.zero_error_injective += (zero_error && injective) as u64;
        for digit in map.iter_mut() {
            *digit += 1;
            if *digit < messages {
                break;
            }
            *digit = 0;
        }
    }
    Ok(census)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::hidden_matching_relation;

    /// Exhaustive over every Alice map, Bob map and referee map.
    fn naive_min_cost(rel: &RelationTable, max_bits: u32) -> Option<u32> {
        let (rows, cols) = (rel.rows(), rel.cols());
        for total in 0..=max_bits {
            for ca in 0..=total {
                let (ma, mb) = (1usize << ca, 1usize << (total - ca));
                let alice_maps = ma.pow(rows as u32);
                let bob_maps = mb.pow(cols as u32);
                for am in 0..alice_maps {
                    let alice: Vec<usize> = (0..rows).map(|x| am / ma.pow(x as u32) % ma).collect();
                    for bm in 0..bob_maps {
                        let bob: Vec<usize> = (0..cols).map(|y| bm / mb.pow(y as u32) % mb).collect();
                        let mut ok = true;
                        'pairs: for a in 0..ma {
                            for b in 0..mb {
                                let found = (0..rel.outputs()).any(|z| {
                                    rel.support().all(|(x, y)| alice[x] != a || bob[y] != b || rel.is_valid(x, y, z))
                                });
                                if !found {
                                    ok = false;
                                    break 'pairs;
                                }
                            }
                        }
                        if ok {
                            return Some(total);
                        }
                    }
                }
            }
        }
        None
    }

    #[test]
    fn equality_on_two_bits_costs_two_each() {
        let eq = FunctionTable::equality(2);
        assert_eq!(det_complexity_function(&eq).unwrap(), (2, 2));
        assert_eq!(det_complexity_function_exhaustive(&eq).unwrap(), 4);
    }

    #[test]
    fn constant_and_first_bit_functions() {
        let c = FunctionTable::from_fn(4, 3, 1, |_, _| Some(1)).unwrap();
        assert_eq!(det_complexity_function(&c).unwrap(), (0, 0));
        assert_eq!(det_complexity_function_exhaustive(&c).unwrap(), 0);
        let first = FunctionTable::from_fn(4, 2, 1, |x, _| Some((x & 1) as u32)).unwrap();
        assert_eq!(det_complexity_function(&first).unwrap(), (1, 0));
        assert_eq!(det_complexity_function_exhaustive(&first).unwrap(), 1);
    }

    #[test]
    fn class_protocol_computes_the_function() {
        let f = FunctionTable::from_fn(6, 5, 2, |x, y| Some(((x * y + x) % 3) as u32)).unwrap();
        let p = distinct_class_protocol(&f).unwrap();
        assert!(p.computes(&f).unwrap());
        assert_eq!(p.total_cost(), det_complexity_function_exhaustive(&f).unwrap());
    }

    #[test]
    fn partial_and_oversized_inputs_are_rejected() {
        let partial = FunctionTable::from_fn(2, 2, 1, |x, y| (x == y).then_some(1)).unwrap();
        assert_eq!(det_complexity_function(&partial), Err(OracleError::Partial));
        let wide = FunctionTable::from_fn(9, 1, 1, |_, _| Some(0)).unwrap();
        assert!(matches!(det_complexity_function_exhaustive(&wide), Err(OracleError::CapExceeded { .. })));
        let rel = RelationTable::from_function(&FunctionTable::equality(3), None).unwrap();
        assert!(matches!(det_complexity_relation(&rel, 6), Err(OracleError::CapExceeded { .. })));
        let small = RelationTable::from_function(&FunctionTable::equality(1), None).unwrap();
        assert!(matches!(det_complexity_relation(&small, 7), Err(OracleError::CapExceeded { .. })));
    }

    #[test]
    fn trivial_and_one_bit_equality_relations() {
        let all = RelationTable::new(3, 2, 2, vec![3; 6], vec![1.0 / 6.0; 6]).unwrap();
        assert_eq!(det_complexity_relation(&all, 6).unwrap().unwrap().total_cost(), 0);
        let eq = RelationTable::from_function(&FunctionTable::equality(1), None).unwrap();
        let p = det_complexity_relation(&eq, 6).unwrap().unwrap();
        assert_eq!(p.total_cost(), 2);
        assert_eq!(p.distributional_error(&eq).unwrap(), 0.0);
        assert!(det_complexity_relation(&eq, 1).unwrap().is_none());
    }

    #[test]
    fn truncated_hidden_matching_costs_three() {
        // x in {0000, 1111, 0011, 1100}: every string has x0 = x1 and x2 = x3,
        // so matching {01,23} needs nothing from Alice and the other two need
        // the single bit x0 ^ x2. Bob must tell the three matchings apart.
        let (hm, rel) = hidden_matching_relation(4).unwrap();
        let xs = [0b0000, 0b1111, 0b0011, 0b1100];
        let sub = rel.restrict(&xs, &[0, 1, 2]).unwrap();
        let hand = {
            use crate::protocols::HiddenMatchingOutput as Z;
            let out = |i, j, parity| hm.output_index(&Z { i, j, parity });
            let alice = xs.iter().map(|&x| ((x ^ (x >> 2)) & 1) as u32).collect();
            let mut referee = vec![0; 8];
            for a in 0..2u32 {
                referee[(a << 2) as usize] = out(0, 1, false);
                referee[((a << 2) | 1) as usize] = out(0, 2, a == 1);
                referee[((a << 2) | 2) as usize] = out(0, 3, a == 1);
            }
            DeterministicSmpProtocol::new(1, 2, alice, vec![0, 1, 2], referee).unwrap()
        };
        assert_eq!(hand.distributional_error(&sub).unwrap(), 0.0);
        let best = det_complexity_relation(&sub, 6).unwrap().unwrap();
        assert_eq!(best.total_cost(), hand.total_cost());
        assert_eq!(best.distributional_error(&sub).unwrap(), 0.0);
    }

    #[test]
    fn partition_search_matches_naive_map_enumeration() {
        use rand::Rng;
        for seed in 0..40 {
            let mut rng = crate::rng::stream_rng(seed, 0);
            let rows = rng.random_range(1..=3);
            let cols = rng.random_range(1..=3);
            let outputs = rng.random_range(2..=3u32);
            let valid = (0..rows * cols).map(|_| rng.random_range(1..1u64 << outputs)).collect();
            let rel =
                RelationTable::new(rows, cols, outputs, valid, vec![1.0 / (rows * cols) as f64; rows * cols]).unwrap();
            let fast = det_complexity_relation(&rel, 3).unwrap().map(|p| p.total_cost());
            assert_eq!(fast, naive_min_cost(&rel, 3), "seed {seed}");
        }
    }

    #[test]
    fn zero_error_equality_maps_are_injective() {
        for n in 1..=2 {
            let eq = FunctionTable::equality(n);
            let size = 1usize << n;
            let census = alice_map_census(&eq, size).unwrap();
            assert!(census.zero_error_implies_injective());
            let falling: u64 = (1..=size as u64).product();
            assert_eq!(census.zero_error, falling);
            assert_eq!(alice_map_census(&eq, size - 1).unwrap().zero_error, 0);
        }
    }

    #[test]
    fn protocol_validation() {
        assert!(DeterministicSmpProtocol::new(1, 0, vec![0, 2], vec![0], vec![0, 0]).is_err());
        assert!(DeterministicSmpProtocol::new(1, 1, vec![0], vec![0], vec![0; 3]).is_err());
        let p = DeterministicSmpProtocol::constant(2, 3, 1);
        assert_eq!((p.rows(), p.cols(), p.output(1, 2)), (2, 3, 1));
    }
}
