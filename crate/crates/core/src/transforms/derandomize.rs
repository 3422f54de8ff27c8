use std::collections::HashMap;
use std::hash::Hash;

use rand::Rng;
use rayon::prelude::*;

use super::{Result, TransformError};
use crate::bits::BitString;
use crate::rng::{derive_seed, stream_rng};
use crate::smp::{AliceMessage, CoinMode, Cost, Dist, MessageCost, Received, SmpError, SmpProtocol};

/// Required closeness of every empirical mean to `p_b`.
pub const CLOSENESS: f64 = 0.1;
/// Largest `c_B` whose messages are enumerated during verification.
pub const MAX_BOB_BITS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerandomizeConfig {
    pub seed: u64,
    /// Candidate multisets tried per input before giving up.
    pub attempts: u64,
}

impl Default for DerandomizeConfig {
    fn default() -> Self {
        Self { seed: 0, attempts: 10_000 }
    }
}

/// For each input, `s · c_B` messages whose averaged referee value is within
/// `1/10` of `p_b` for every possible Bob message `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicMessageTable {
    pub multisets: Vec<Vec<BitString>>,
    /// `max_b |mean - p_b|` per input.
    pub deviations: Vec<f64>,
    /// Attempt at which each multiset was accepted.
    pub attempts: Vec<u64>,
}

/// `derandomize_alice` result: Alice sends the concatenated multiset and the
/// referee averages the original referee over its parts.
pub struct Derandomized<P: SmpProtocol>
where
    P::AliceInput: Sized,
{
    inner: P,
    s: usize,
    alice_bits: usize,
    index: HashMap<P::AliceInput, usize>,
    table: DeterministicMessageTable,
}

fn all_bob_messages(bits: usize) -> Vec<BitString> {
    (0..1u64 << bits).map(|b| BitString::from_u64(b, bits)).collect()
}

pub fn derandomize_alice<P>(
    p: P,
    s: usize,
    inputs: &[P::AliceInput],
    cfg: &DerandomizeConfig,
) -> Result<Derandomized<P>>
where
    P: SmpProtocol,
    P::AliceInput: Sized + Clone + Eq + Hash + Send,
{
    if s == 0 {
        return Err(TransformError::InvalidParameter("s must be >= 1".into()));
    }
    if p.coin_mode() != CoinMode::Private {
        return Err(TransformError::InvalidParameter("derandomization needs a private-coin protocol".into()));
    }
    let cost = p.cost();
    let MessageCost::Bits(alice_bits) = cost.alice else {
        return Err(TransformError::InvalidParameter("Alice's message must be classical".into()));
    };
    if cost.bob_bits > MAX_BOB_BITS {
        return Err(TransformError::InvalidParameter(format!("c_B = {} exceeds {MAX_BOB_BITS}", cost.bob_bits)));
    }
    let count = s * cost.bob_bits.max(1);
    let bobs = all_bob_messages(cost.bob_bits);
    let mut index = HashMap::with_capacity(inputs.len());
    for (i, x) in inputs.iter().enumerate() {
        if index.insert(x.clone(), i).is_some() {
            return Err(TransformError::InvalidParameter(format!("input {i} is listed twice")));
        }
    }

    let found = inputs
        .par_iter()
        .enumerate()
        .map(|(xi, x)| {
            let AliceMessage::Classical(dist) = p.alice(x, 0)? else {
                return Err(TransformError::InvalidParameter("Alice's message must be classical".into()));
            };
            if let Some((a, _)) = dist.items().iter().find(|(a, _)| a.len() != alice_bits) {
                return Err(TransformError::InvalidParameter(format!(
                    "message of {} bits, declared {alice_bits}",
                    a.len()
                )));
            }
            // r(a, b) for every support point and every b, then p_b.
            let values: Vec<Vec<f64>> = dist
                .items()
                .iter()
                .map(|(a, _)| bobs.iter().map(|b| p.referee(Received::Bits(a), b, 0)).collect())
                .collect::<crate::smp::Result<_>>()?;
            let target: Vec<f64> =
                (0..bobs.len()).map(|b| dist.items().iter().zip(&values).map(|((_, w), v)| w * v[b]).sum()).collect();
            let cumulative: Vec<f64> = dist
                .items()
                .iter()
                .scan(0.0, |acc, (_, w)| {
                    *acc += w;
                    Some(*acc)
                })
                .collect();
            let mut worst = (0usize, 0.0f64);
            for attempt in 0..cfg.attempts {
                let mut rng = stream_rng(derive_seed(cfg.seed, xi as u64), attempt);
                let picks: Vec<usize> = (0..count)
                    .map(|_| {
                        let u: f64 = rng.random();
                        cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1)
                    })
                    .collect();
                let (b_worst, dev) = (0..bobs.len())
                    .map(|b| {
                        let mean = picks.iter().map(|&i| values[i][b]).sum::<f64>() / count as f64;
                        (b, (mean - target[b]).abs())
                    })
                    .fold((0, 0.0), |m, v| if v.1 > m.1 { v } else { m });
                if dev <= CLOSENESS {
                    let multiset = picks.iter().map(|&i| dist.items()[i].0.clone()).collect();
                    return Ok((multiset, dev, attempt));
                }
                if attempt == 0 || dev < worst.1 {
                    worst = (b_worst, dev);
                }
            }
            Err(TransformError::DerandomizationFailed { x_index: xi, b: worst.0 as u64, deviation: worst.1 })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = DeterministicMessageTable { multisets: Vec::new(), deviations: Vec::new(), attempts: Vec::new() };
    for (m, d, a) in found {
        table.multisets.push(m);
        table.deviations.push(d);
        table.attempts.push(a);
    }
    Ok(Derandomized { inner: p, s, alice_bits, index, table })
}

impl<P: SmpProtocol> Derandomized<P>
where
    P::AliceInput: Sized + Eq + Hash,
{
    pub fn table(&self) -> &DeterministicMessageTable {
        &self.table
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    pub fn s(&self) -> usize {
        self.s
    }

    fn count(&self) -> usize {
        self.s * self.inner.cost().bob_bits.max(1)
    }
}

impl<P: SmpProtocol> SmpProtocol for Derandomized<P>
where
    P::AliceInput: Sized + Eq + Hash + Send,
{
    type AliceInput = P::AliceInput;
    type BobInput = P::BobInput;

    fn name(&self) -> String {
        format!("derandomized({}, s={})", self.inner.name(), self.s)
    }

    fn coin_mode(&self) -> CoinMode {
        CoinMode::Private
    }

    /// `s · c_B · c_A` bits for Alice.
    fn cost(&self) -> Cost {
        Cost { alice: MessageCost::Bits(self.count() * self.alice_bits), bob_bits: self.inner.cost().bob_bits }
    }

    fn alice(&self, x: &P::AliceInput, _coin: u64) -> crate::smp::Result<AliceMessage> {
        let i = *self.index.get(x).ok_or_else(|| SmpError::InvalidParameter("input was not derandomized".into()))?;
        let mut m = BitString::new();
        for a in &self.table.multisets[i] {
            m.extend(a);
        }
        Ok(AliceMessage::Classical(Dist::point(m)))
    }

    fn bob(&self, y: &P::BobInput, coin: u64) -> crate::smp::Result<Dist<BitString>> {
        self.inner.bob(y, coin)
    }

    fn referee(&self, alice: Received<'_>, bob: &BitString, _coin: u64) -> crate::smp::Result<f64> {
        let a = alice.bits()?;
        let count = self.count();
        if a.len() != count * self.alice_bits {
            return Err(SmpError::InvalidMessage("multiset message has the wrong length".into()));
        }
        let mut total = 0.0;
        for i in 0..count {
            let part = a.slice(i * self.alice_bits, self.alice_bits);
            total += self.inner.referee(Received::Bits(&part), bob, 0)?;
        }
        Ok(total / count as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::LinearCode;
    use crate::protocols::{equality_code, equality_public};
    use crate::smp::exact_acceptance;

    #[test]
    fn equality_code_derandomizes() {
        let p = equality_code(2, LinearCode::hadamard(2), 1).unwrap();
        let xs: Vec<u64> = (0..4).collect();
        let d = derandomize_alice(p, 12, &xs, &DerandomizeConfig::default()).unwrap();
        assert!(d.table().deviations.iter().all(|&v| v <= CLOSENESS));
        let (rows, cols) = d.inner().inner().code().grid();
        let c_a = rows + 1;
        let c_b = cols + 1;
        assert_eq!(d.cost().alice, MessageCost::Bits(12 * c_b * c_a));
        for x in &xs {
            for y in &xs {
                let a = exact_acceptance(d.inner(), x, y).unwrap();
                let b = exact_acceptance(&d, x, y).unwrap();
                assert!((a - b).abs() <= CLOSENESS);
            }
        }
    }

    #[test]
    fn deterministic_alice_is_repeated() {
        // A public coin is rejected; a repeated deterministic message is kept.
        assert!(derandomize_alice(equality_public(2, 1).unwrap(), 3, &[0, 1], &DerandomizeConfig::default()).is_err());
        let code = LinearCode::repetition(1);
        let p = equality_code(1, code, 1).unwrap();
        let d = derandomize_alice(p, 5, &[0, 1], &DerandomizeConfig::default()).unwrap();
        for m in &d.table().multisets {
            assert!(m.iter().all(|a| a == &m[0]));
        }
        assert_eq!(d.table().deviations, vec![0.0, 0.0]);
    }

    #[test]
    fn tiny_budget_reports_the_failure() {
        let p = equality_code(2, LinearCode::hadamard(2), 1).unwrap();
        let cfg = DerandomizeConfig { seed: 1, attempts: 1 };
        match derandomize_alice(p, 1, &[0, 1, 2, 3], &cfg) {
            Err(TransformError::DerandomizationFailed { deviation, .. }) => assert!(deviation > CLOSENESS),
            Err(e) => panic!("unexpected error {e}"),
            Ok(_) => panic!("one sample per b cannot be 1/10-close"),
        }
    }
}
