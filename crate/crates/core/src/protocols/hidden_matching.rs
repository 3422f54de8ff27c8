use rand::Rng;

use crate::bits::{ceil_log2, BitString};
use crate::qcore::C64;
use crate::smp::{Cost, MessageCost, RelationTable, Result, SmpError};

/// A referee output `(i, j, x_i ⊕ x_j)` with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HiddenMatchingOutput {
    pub i: usize,
    pub j: usize,
    pub parity: bool,
}

/// `M_k = {(i, i⊕k) : i < i⊕k}` for `k` in `1..n`, sorted by `i`.
pub fn xor_matching(n: usize, k: usize) -> Vec<(usize, usize)> {
    (0..n).filter(|&i| i < i ^ k).map(|i| (i, i ^ k)).collect()
}

/// Relational hidden-matching protocol: Alice sends `(1/√n) Σ (-1)^{x_i}|i>`,
/// Bob sends `k`, and the referee measures with the projectors of `M_k`
/// followed by `{(|i> ± |j>)/√2}`. `x` is a `u64` with `x_i = (x >> i) & 1`.
#[derive(Debug, Clone)]
pub struct HiddenMatching {
    n: usize,
}

impl HiddenMatching {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() || n > 64 {
            return Err(SmpError::InvalidParameter(format!("n = {n} must be a power of 2 in 4..=64")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn index_bits(&self) -> usize {
        ceil_log2(self.n as u64)
    }

    pub fn cost(&self) -> Cost {
        Cost { alice: MessageCost::Qubits(self.index_bits()), bob_bits: self.index_bits() }
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k >= self.n {
            return Err(SmpError::InvalidParameter(format!("matching index {k} outside 1..{}", self.n)));
        }
        Ok(())
    }

    pub fn alice_state(&self, x: u64) -> Vec<C64> {
        let a = 1.0 / (self.n as f64).sqrt();
        (0..self.n).map(|i| C64::from(if (x >> i) & 1 == 1 { -a } else { a })).collect()
    }

    pub fn bob_message(&self, k: usize) -> Result<BitString> {
        self.check_k(k)?;
        Ok(BitString::from_u64(k as u64, self.index_bits()))
    }

    /// Normalised restriction of the state to `span{|i>, |j>}`.
    pub fn post_projection_state(&self, amplitudes: &[C64], i: usize, j: usize) -> Result<[C64; 2]> {
        let norm = (amplitudes[i].norm_sqr() + amplitudes[j].norm_sqr()).sqrt();
        if norm <= 0.0 {
            return Err(SmpError::Protocol(format!("state has no weight on ({i}, {j})")));
        }
        Ok([amplitudes[i] / norm, amplitudes[j] / norm])
    }

    /// Exact referee output distribution; outcomes of probability zero are
    /// omitted.
    pub fn output_distribution(
        &self,
        amplitudes: &[C64],
        message: &BitString,
    ) -> Result<Vec<(HiddenMatchingOutput, f64)>> {
        if amplitudes.len() != self.n || message.len() != self.index_bits() {
            return Err(SmpError::InvalidMessage("hidden matching message has the wrong size".into()));
        }
        let k = message.to_u64() as usize;
        self.check_k(k)?;
        let mut out = Vec::with_capacity(self.n);
        for (i, j) in xor_matching(self.n, k) {
            let plus = (amplitudes[i] + amplitudes[j]).norm_sqr() / 2.0;
            let minus = (amplitudes[i] - amplitudes[j]).norm_sqr() / 2.0;
            for (parity, p) in [(false, plus), (true, minus)] {
                if p > 0.0 {
                    out.push((HiddenMatchingOutput { i, j, parity }, p));
                }
            }
        }
        Ok(out)
    }

    pub fn distribution(&self, x: u64, k: usize) -> Result<Vec<(HiddenMatchingOutput, f64)>> {
        self.output_distribution(&self.alice_state(x), &self.bob_message(k)?)
    }

    pub fn sample<R: Rng + ?Sized>(&self, x: u64, k: usize, rng: &mut R) -> Result<HiddenMatchingOutput> {
        let dist = self.distribution(x, k)?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (z, p) in &dist {
            acc += p;
            if u < acc {
                return Ok(*z);
            }
        }
        Ok(dist.last().expect("nonempty distribution").0)
    }

    pub fn is_valid(&self, x: u64, k: usize, z: &HiddenMatchingOutput) -> bool {
        z.i < z.j && z.i ^ z.j == k && z.parity == (((x >> z.i) ^ (x >> z.j)) & 1 == 1)
    }

    /// Index of an output in the relation table: lexicographic pair index
    /// times two plus the parity bit.
    pub fn output_index(&self, z: &HiddenMatchingOutput) -> u32 {
        let n = self.n;
        let before: usize = (0..z.i).map(|a| n - 1 - a).sum();
        (2 * (before + z.j - z.i - 1) + z.parity as usize) as u32
    }

    /// Rows are all `x`, column `k - 1` is matching `M_k`, uniform `μ`.
    /// Limited to `n <= 8` so outputs fit a 64-bit mask.
    pub fn relation_table(&self) -> Result<RelationTable> {
        let n = self.n;
        if n > 8 {
            return Err(SmpError::Table(format!("relation table needs n <= 8, got {n}")));
        }
        let outputs = (n * (n - 1)) as u32;
        let rows = 1usize << n;
        let cols = n - 1;
        let mut valid = Vec::with_capacity(rows * cols);
        for x in 0..rows as u64 {
            for k in 1..n {
                let mask = xor_matching(n, k).into_iter().fold(0u64, |m, (i, j)| {
                    let z = HiddenMatchingOutput { i, j, parity: ((x >> i) ^ (x >> j)) & 1 == 1 };
                    m | 1 << self.output_index(&z)
                });
                valid.push(mask);
            }
        }
        let mu = vec![1.0 / (rows * cols) as f64; rows * cols];
        RelationTable::new(rows, cols, outputs, valid, mu)
    }
}

pub fn hidden_matching_relation(n: usize) -> Result<(HiddenMatching, RelationTable)> {
    let hm = HiddenMatching::new(n)?;
    let table = hm.relation_table()?;
    Ok((hm, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn xor_family_is_perfect_matchings() {
        for n in [4usize, 8, 16] {
            for k in 1..n {
                let m = xor_matching(n, k);
                assert_eq!(m.len(), n / 2);
                let mut seen = vec![false; n];
                for (i, j) in m {
                    assert!(!seen[i] && !seen[j]);
                    seen[i] = true;
                    seen[j] = true;
                }
            }
        }
    }

    #[test]
    fn exhaustive_success_at_n4() {
        let hm = HiddenMatching::new(4).unwrap();
        for x in 0..16u64 {
            for k in 1..4 {
                let dist = hm.distribution(x, k).unwrap();
                let total: f64 = dist.iter().map(|(_, p)| p).sum();
                assert!((total - 1.0).abs() <= 1e-12);
                let valid: f64 = dist.iter().filter(|(z, _)| hm.is_valid(x, k, z)).map(|(_, p)| p).sum();
                assert!((valid - 1.0).abs() <= 1e-12);
                for (i, j) in xor_matching(4, k) {
                    let edge: f64 = dist.iter().filter(|(z, _)| (z.i, z.j) == (i, j)).map(|(_, p)| p).sum();
                    assert!((edge - 0.5).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn post_projection_state_has_phases() {
        let hm = HiddenMatching::new(8).unwrap();
        let x = 0b1011_0010u64;
        let amps = hm.alice_state(x);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for (i, j) in xor_matching(8, 3) {
            let v = hm.post_projection_state(&amps, i, j).unwrap();
            let si = if (x >> i) & 1 == 1 { -s } else { s };
            let sj = if (x >> j) & 1 == 1 { -s } else { s };
            assert!((v[0] - C64::from(si)).norm() <= 1e-12);
            assert!((v[1] - C64::from(sj)).norm() <= 1e-12);
        }
    }

    #[test]
    fn samples_at_n8_are_valid() {
        let hm = HiddenMatching::new(8).unwrap();
        let mut rng = stream_rng(11, 0);
        for t in 0..10_000u64 {
            let x = t.wrapping_mul(0x9e37_79b9) & 0xff;
            let k = 1 + (t as usize % 7);
            let z = hm.sample(x, k, &mut rng).unwrap();
            assert!(hm.is_valid(x, k, &z));
        }
    }

    #[test]
    fn relation_table_matches_validity() {
        let (hm, table) = hidden_matching_relation(4).unwrap();
        assert_eq!((table.rows(), table.cols(), table.outputs()), (16, 3, 12));
        for x in 0..16u64 {
            for k in 1..4 {
                for (z, _) in hm.distribution(x, k).unwrap() {
                    assert!(table.is_valid(x as usize, k - 1, hm.output_index(&z)));
                }
                assert_eq!(table.valid_mask(x as usize, k - 1).count_ones(), 2);
            }
        }
        assert!(hidden_matching_relation(16).is_err());
        assert_eq!(hm.cost(), Cost { alice: MessageCost::Qubits(2), bob_bits: 2 });
    }
}
