use super::{AliceMessage, CoinMode, Cost, Dist, EvalConfig, MessageCost, Received, Result, SmpError, SmpProtocol};
use crate::bits::BitString;

/// `reps` independent runs of a private-coin protocol with fixed-length
/// classical messages; the referee accepts iff every run accepts.
pub struct Repeated<P> {
    inner: P,
    reps: usize,
    alice_len: usize,
    bob_len: usize,
}

impl<P: SmpProtocol> Repeated<P> {
    pub fn new(inner: P, reps: usize) -> Result<Self> {
        if reps == 0 {
            return Err(SmpError::InvalidParameter("repetitions must be >= 1".into()));
        }
        if inner.coin_mode() != CoinMode::Private {
            return Err(SmpError::InvalidParameter("repetition needs a private-coin protocol".into()));
        }
        let cost = inner.cost();
        let alice_len = match cost.alice {
            MessageCost::Bits(n) => n,
            MessageCost::Qubits(_) => {
                return Err(SmpError::InvalidParameter("repetition needs classical Alice".into()))
            }
        };
        Ok(Self { inner, reps, alice_len, bob_len: cost.bob_bits })
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    pub fn reps(&self) -> usize {
        self.reps
    }
}

fn power(single: &Dist<BitString>, reps: usize) -> Result<Dist<BitString>> {
    let mut acc: Vec<(BitString, f64)> = vec![(BitString::new(), 1.0)];
    for _ in 0..reps {
        let mut next = Vec::with_capacity(acc.len() * single.len());
        for (prefix, p) in &acc {
            for (m, q) in single.items() {
                let mut s = prefix.clone();
                s.extend(m);
                next.push((s, p * q));
            }
        }
        acc = next;
    }
    // Renormalise away rounding drift from repeated products.
    let total: f64 = acc.iter().map(|(_, p)| p).sum();
    Dist::new(acc.into_iter().map(|(s, p)| (s, p / total)).collect())
}

impl<P: SmpProtocol> SmpProtocol for Repeated<P> {
    type AliceInput = P::AliceInput;
    type BobInput = P::BobInput;

    fn name(&self) -> String {
        format!("{}x{}", self.inner.name(), self.reps)
    }

    fn coin_mode(&self) -> CoinMode {
        CoinMode::Private
    }

    fn cost(&self) -> Cost {
        Cost { alice: MessageCost::Bits(self.alice_len * self.reps), bob_bits: self.bob_len * self.reps }
    }

    fn alice(&self, x: &P::AliceInput, coin: u64) -> Result<AliceMessage> {
        match self.inner.alice(x, coin)? {
            AliceMessage::Classical(d) => Ok(AliceMessage::Classical(power(&d, self.reps)?)),
            AliceMessage::Quantum(_) => Err(SmpError::InvalidMessage("repetition needs classical Alice".into())),
        }
    }

    fn bob(&self, y: &P::BobInput, coin: u64) -> Result<Dist<BitString>> {
        power(&self.inner.bob(y, coin)?, self.reps)
    }

    fn referee(&self, alice: Received<'_>, bob: &BitString, coin: u64) -> Result<f64> {
        let a = alice.bits()?;
        if a.len() != self.alice_len * self.reps || bob.len() != self.bob_len * self.reps {
            return Err(SmpError::InvalidMessage("repeated message has the wrong length".into()));
        }
        let mut p = 1.0;
        for t in 0..self.reps {
            let at = a.slice(t * self.alice_len, self.alice_len);
            let bt = bob.slice(t * self.bob_len, self.bob_len);
            p *= self.inner.referee(Received::Bits(&at), &bt, coin)?;
        }
        Ok(p)
    }

    /// Independent runs: the acceptance probability is the single-run value
    /// raised to `reps`.
    fn exact_acceptance_with(&self, x: &P::AliceInput, y: &P::BobInput, cfg: &EvalConfig) -> Result<f64> {
        Ok(self.inner.exact_acceptance_with(x, y, cfg)?.powi(self.reps as i32))
    }
}
