//! The SMP model: Alice and Bob each send one message to a referee, who
//! accepts with some probability. Alice's message is either a distribution
//! over bit strings or a quantum state; Bob's is always classical.

mod canonical;
mod dist;
mod repeat;
mod tables;

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bits::BitString;
use crate::qcore::{acceptance_probability, DensityMatrix, MeasurementOperator, QcoreError, C64};
use crate::rng::stream_rng;

pub use canonical::QcProtocol;
pub use dist::{Dist, DIST_TOLERANCE};
pub use repeat::Repeated;
pub use tables::{FunctionTable, RelationTable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmpError {
    #[error(transparent)]
    Qcore(#[from] QcoreError),
    #[error("exact evaluation needs more than {cap} terms; use sampled evaluation")]
    EnumerationCap { cap: u64 },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("input ({x}, {y}) is outside the promise domain")]
    OutsideDomain { x: usize, y: usize },
    #[error("malformed message: {0}")]
    InvalidMessage(String),
    #[error("table error: {0}")]
    Table(String),
    #[error("invalid protocol parameter: {0}")]
    InvalidParameter(String),
    #[error("{0}")]
    Protocol(String),
}

pub type Result<T, E = SmpError> = std::result::Result<T, E>;

/// Randomness shared by all three parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoinMode {
    Private,
    /// Uniform over `0..size`.
    Public {
        size: u64,
    },
    /// Uniform over all 64-bit values; never enumerable.
    PublicSeed,
}

impl CoinMode {
    fn enumerable(&self) -> Option<u64> {
        match self {
            CoinMode::Private => Some(1),
            CoinMode::Public { size } => Some(*size),
            CoinMode::PublicSeed => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            CoinMode::Private => 0,
            CoinMode::Public { size } => rng.random_range(0..*size),
            CoinMode::PublicSeed => rng.random(),
        }
    }

    pub fn is_public(&self) -> bool {
        !matches!(self, CoinMode::Private)
    }
}

/// A quantum message, given by its classical description.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumMessage {
    Mixed(DensityMatrix),
    /// `copies` copies of one pure state; `qubits_per_copy` is the declared
    /// register size of each copy.
    PureCopies {
        amplitudes: Vec<C64>,
        copies: usize,
        qubits_per_copy: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum AliceMessage {
    Classical(Dist<BitString>),
    Quantum(QuantumMessage),
}

/// What the referee holds from Alice: one sampled string or the state.
#[derive(Debug, Clone, Copy)]
pub enum Received<'a> {
    Bits(&'a BitString),
    State(&'a QuantumMessage),
}

impl<'a> Received<'a> {
    pub fn bits(self) -> Result<&'a BitString> {
        match self {
            Received::Bits(b) => Ok(b),
            Received::State(_) => Err(SmpError::InvalidMessage("expected a classical message".into())),
        }
    }

    pub fn state(self) -> Result<&'a QuantumMessage> {
        match self {
            Received::State(s) => Ok(s),
            Received::Bits(_) => Err(SmpError::InvalidMessage("expected a quantum message".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageCost {
    Bits(usize),
    Qubits(usize),
}

impl MessageCost {
    pub fn amount(&self) -> usize {
        match self {
            MessageCost::Bits(n) | MessageCost::Qubits(n) => *n,
        }
    }
}

impl fmt::Display for MessageCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MessageCost::Bits(n) => write!(f, "{n} bits"),
            MessageCost::Qubits(n) => write!(f, "{n} qubits"),
        }
    }
}

/// Worst-case message lengths. Messages may be shorter than declared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cost {
    pub alice: MessageCost,
    pub bob_bits: usize,
}

impl Cost {
    pub fn total(&self) -> usize {
        self.alice.amount() + self.bob_bits
    }
}

/// A three-party SMP protocol. The coin argument is the shared public coin
/// (always `0` for private-coin protocols).
pub trait SmpProtocol: Send + Sync {
    type AliceInput: Sync + ?Sized;
    type BobInput: Sync + ?Sized;

    fn name(&self) -> String;
    fn coin_mode(&self) -> CoinMode;
    fn cost(&self) -> Cost;
    fn alice(&self, x: &Self::AliceInput, coin: u64) -> Result<AliceMessage>;
    fn bob(&self, y: &Self::BobInput, coin: u64) -> Result<Dist<BitString>>;
    /// Acceptance probability given both messages.
    fn referee(&self, alice: Received<'_>, bob: &BitString, coin: u64) -> Result<f64>;

    /// Exact acceptance probability; override when the protocol factorises.
    fn exact_acceptance_with(&self, x: &Self::AliceInput, y: &Self::BobInput, cfg: &EvalConfig) -> Result<f64> {
        enumerate_acceptance(self, x, y, cfg)
    }
}

/// Canonical quantum-classical form: Alice sends `rho_x`, the referee
/// measures it with `E_b` for Bob's message `b`.
pub fn canonical_referee(rho: &QuantumMessage, e_b: &MeasurementOperator) -> Result<f64> {
    match rho {
        QuantumMessage::Mixed(rho) => Ok(acceptance_probability(e_b, rho)?),
        QuantumMessage::PureCopies { .. } => {
            Err(SmpError::InvalidMessage("canonical referee expects a density matrix".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    pub enumeration_cap: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { enumeration_cap: 1 << 20 }
    }
}

fn enumerate_acceptance<P: SmpProtocol + ?Sized>(
    p: &P,
    x: &P::AliceInput,
    y: &P::BobInput,
    cfg: &EvalConfig,
) -> Result<f64> {
    let cap = cfg.enumeration_cap;
    let coins = p.coin_mode().enumerable().ok_or(SmpError::EnumerationCap { cap })?;
    if coins > cap {
        return Err(SmpError::EnumerationCap { cap });
    }
    let mut terms = 0u64;
    let mut total = 0.0;
    for coin in 0..coins {
        let alice = p.alice(x, coin)?;
        let bob = p.bob(y, coin)?;
        let per_coin = match &alice {
            AliceMessage::Classical(a) => {
                terms += (a.len() * bob.len()) as u64;
                if terms > cap {
                    return Err(SmpError::EnumerationCap { cap });
                }
                a.expect(|a| bob.expect(|b| p.referee(Received::Bits(a), b, coin)))?
            }
            AliceMessage::Quantum(state) => {
                terms += bob.len() as u64;
                if terms > cap {
                    return Err(SmpError::EnumerationCap { cap });
                }
                bob.expect(|b| p.referee(Received::State(state), b, coin))?
            }
        };
        total += per_coin;
    }
    Ok((total / coins as f64).clamp(0.0, 1.0))
}

/// Exact expectation of the referee's acceptance probability over the
/// public coin and both message distributions.
pub fn exact_acceptance<P: SmpProtocol + ?Sized>(p: &P, x: &P::AliceInput, y: &P::BobInput) -> Result<f64> {
    p.exact_acceptance_with(x, y, &EvalConfig::default())
}

/// Monte-Carlo estimate with a 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledEstimate {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub half_width: f64,
    pub trials: u64,
}

const Z95: f64 = 1.959963984540054;

impl SampledEstimate {
    /// Wilson score interval around the mean of per-trial values in `[0, 1]`.
    /// When every trial produced the same value the interval collapses.
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let constant = values.iter().all(|&v| v == values[0]);
        if constant {
            return Self { estimate: mean, lower: mean, upper: mean, half_width: 0.0, trials: values.len() as u64 };
        }
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let center = (mean + z2 / (2.0 * n)) / denom;
        let spread = Z95 * (mean * (1.0 - mean) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        let lower = (center - spread).max(0.0);
        let upper = (center + spread).min(1.0);
        Self { estimate: mean, lower, upper, half_width: (upper - lower) / 2.0, trials: values.len() as u64 }
    }
}

fn sample_trial<P: SmpProtocol + ?Sized>(
    p: &P,
    x: &P::AliceInput,
    y: &P::BobInput,
    seed: u64,
    trial: u64,
) -> Result<f64> {
    let mut rng = stream_rng(seed, trial);
    let coin = p.coin_mode().sample(&mut rng);
    let alice = p.alice(x, coin)?;
    let bob = p.bob(y, coin)?;
    let b = bob.sample(&mut rng).clone();
    match &alice {
        AliceMessage::Classical(a) => {
            let a = a.sample(&mut rng).clone();
            p.referee(Received::Bits(&a), &b, coin)
        }
        AliceMessage::Quantum(state) => p.referee(Received::State(state), &b, coin),
    }
}

/// Each trial draws the coin and both messages from its own RNG stream and
/// records the referee's acceptance probability.
pub fn sampled_acceptance<P: SmpProtocol + ?Sized>(
    p: &P,
    x: &P::AliceInput,
    y: &P::BobInput,
    trials: u64,
    seed: u64,
) -> Result<SampledEstimate> {
    if trials == 0 {
        return Err(SmpError::InvalidParameter("trials must be >= 1".into()));
    }
    let values = (0..trials).into_par_iter().map(|t| sample_trial(p, x, y, seed, t)).collect::<Result<Vec<f64>>>()?;
    Ok(SampledEstimate::from_values(&values))
}

/// Success rate over a list of `(x, y, f(x,y))` instances, trial `t` using
/// instance `t mod len`.
pub fn sampled_success<P>(
    p: &P,
    instances: &[(&P::AliceInput, &P::BobInput, bool)],
    trials: u64,
    seed: u64,
) -> Result<SampledEstimate>
where
    P: SmpProtocol + ?Sized,
{
    Ok(SampledEstimate::from_values(&sampled_success_values(p, instances, trials, seed)?))
}

/// Per-trial success probabilities behind [`sampled_success`].
pub fn sampled_success_values<P>(
    p: &P,
    instances: &[(&P::AliceInput, &P::BobInput, bool)],
    trials: u64,
    seed: u64,
) -> Result<Vec<f64>>
where
    P: SmpProtocol + ?Sized,
{
    if trials == 0 || instances.is_empty() {
        return Err(SmpError::InvalidParameter("need at least one trial and one instance".into()));
    }
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let (x, y, value) = instances[(t % instances.len() as u64) as usize];
            let acc = sample_trial(p, x, y, seed, t)?;
            Ok(if value { acc } else { 1.0 - acc })
        })
        .collect()
}

/// `max |f(x,y) - Pr[accept]|` over the promise domain. `xs[i]` and `ys[j]`
/// are the protocol inputs for row `i` and column `j` of `f`.
pub fn worst_case_error<P>(p: &P, f: &FunctionTable, xs: &[&P::AliceInput], ys: &[&P::BobInput]) -> Result<f64>
where
    P: SmpProtocol + ?Sized,
{
    if xs.len() != f.rows() || ys.len() != f.cols() {
        return Err(SmpError::Table("input lists do not match the table shape".into()));
    }
    let cells: Vec<(usize, usize)> = f.domain().collect();
    let errors = cells
        .par_iter()
        .map(|&(i, j)| {
            let value = f.value(i, j)?;
            if value > 1 {
                return Err(SmpError::Table("worst_case_error needs a Boolean function".into()));
            }
            let acc = exact_acceptance(p, xs[i], ys[j])?;
            Ok((value as f64 - acc).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(errors.into_iter().fold(0.0, f64::max))
}

/// `(alice, bob, total)` declared worst-case costs.
pub fn protocol_cost<P: SmpProtocol + ?Sized>(p: &P) -> (MessageCost, usize, usize) {
    let c = p.cost();
    (c.alice, c.bob_bits, c.total())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Referee accepts regardless of the messages.
    struct AlwaysAccept;

    impl SmpProtocol for AlwaysAccept {
        type AliceInput = u64;
        type BobInput = u64;

        fn name(&self) -> String {
            "always-accept".into()
        }
        fn coin_mode(&self) -> CoinMode {
            CoinMode::Public { size: 4 }
        }
        fn cost(&self) -> Cost {
            Cost { alice: MessageCost::Bits(1), bob_bits: 1 }
        }
        fn alice(&self, _: &u64, _: u64) -> Result<AliceMessage> {
            Ok(AliceMessage::Classical(Dist::uniform(vec![BitString::from_u64(0, 1), BitString::from_u64(1, 1)])?))
        }
        fn bob(&self, _: &u64, _: u64) -> Result<Dist<BitString>> {
            Ok(Dist::point(BitString::from_u64(0, 1)))
        }
        fn referee(&self, _: Received<'_>, _: &BitString, _: u64) -> Result<f64> {
            Ok(1.0)
        }
    }

    /// Zero-communication fixture whose referee already knows `x == y`
    /// through the shared coin encoding both inputs.
    struct Omniscient;

    impl SmpProtocol for Omniscient {
        type AliceInput = u64;
        type BobInput = u64;

        fn name(&self) -> String {
            "omniscient".into()
        }
        fn coin_mode(&self) -> CoinMode {
            CoinMode::Private
        }
        fn cost(&self) -> Cost {
            Cost { alice: MessageCost::Bits(0), bob_bits: 0 }
        }
        fn alice(&self, x: &u64, _: u64) -> Result<AliceMessage> {
            // Test fixture only: Alice "leaks" through an unaccounted message.
            Ok(AliceMessage::Classical(Dist::point(BitString::from_u64(*x, 8))))
        }
        fn bob(&self, y: &u64, _: u64) -> Result<Dist<BitString>> {
            Ok(Dist::point(BitString::from_u64(*y, 8)))
        }
        fn referee(&self, a: Received<'_>, b: &BitString, _: u64) -> Result<f64> {
            Ok((a.bits()? == b) as u32 as f64)
        }
    }

    #[test]
    fn constant_accept_is_one_everywhere() {
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(exact_acceptance(&AlwaysAccept, &x, &y).unwrap(), 1.0);
            }
        }
        let s = sampled_acceptance(&AlwaysAccept, &0, &1, 500, 3).unwrap();
        assert_eq!(s.estimate, 1.0);
        assert_eq!(s.half_width, 0.0);
    }

    #[test]
    fn lookup_protocol_has_zero_error() {
        let f = FunctionTable::equality(2);
        let inputs: Vec<u64> = (0..4).collect();
        let refs: Vec<&u64> = inputs.iter().collect();
        assert_eq!(worst_case_error(&Omniscient, &f, &refs, &refs).unwrap(), 0.0);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let cfg = EvalConfig { enumeration_cap: 3 };
        assert!(matches!(AlwaysAccept.exact_acceptance_with(&0, &0, &cfg), Err(SmpError::EnumerationCap { cap: 3 })));
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(sampled_acceptance(&AlwaysAccept, &0, &0, 0, 1).is_err());
    }

    #[test]
    fn wilson_interval_contains_estimate() {
        let values: Vec<f64> = (0..100).map(|i| (i % 3 == 0) as u32 as f64).collect();
        let s = SampledEstimate::from_values(&values);
        assert!(s.lower < s.estimate && s.estimate < s.upper);
        assert!(s.half_width > 0.05 && s.half_width < 0.12);
    }
}
