use std::collections::HashMap;
use std::hash::Hash;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use super::learn::{
    bad_count_bound, default_copies, learn_state_message_with, reconstruct_estimates_with, LearnConfig, LearnOutcome,
    LearnRecord,
};
use super::{Result, TransformError};
use crate::bits::BitString;
use crate::qcore::MeasurementOperator;
use crate::smp::{AliceMessage, CoinMode, Cost, Dist, MessageCost, QcProtocol, Received, SmpError, SmpProtocol};

type BobFn<Y> = dyn Fn(&Y, u64) -> crate::smp::Result<Dist<u64>> + Send + Sync;

/// Per-input, per-coin summary of a compilation.
#[derive(Debug, Clone, PartialEq)]
pub struct CompileDiagnostics {
    pub x_index: usize,
    pub coin: u64,
    pub bad_count: usize,
    pub bound: u64,
    pub max_band_weight: Option<f64>,
    pub payload_bits: usize,
}

/// Classical protocol obtained from a quantum-classical one: Alice sends the
/// state-learning record of `rho_x` (for the current coin value), Bob is
/// unchanged, and the referee accepts with the replayed estimate `p'_b`.
pub struct CompiledProtocol<X, Y> {
    name: String,
    q: u32,
    c: usize,
    r: usize,
    delta: f64,
    coin: CoinMode,
    cfg: LearnConfig,
    families: Vec<Vec<MeasurementOperator>>,
    bob: Arc<BobFn<Y>>,
    index: HashMap<X, usize>,
    /// `outcomes[x_index][coin]`.
    outcomes: Vec<Vec<LearnOutcome>>,
    messages: Vec<Vec<BitString>>,
    cache: Mutex<HashMap<(u64, BitString), Arc<Vec<f64>>>>,
}

/// Compile with the default copies policy when `r` is `None`.
pub fn compile_qc_to_cc<X, Y>(
    p: &QcProtocol<X, Y>,
    inputs: &[X],
    delta: f64,
    r: Option<usize>,
) -> Result<CompiledProtocol<X, Y>>
where
    X: Clone + Eq + Hash + Send + Sync,
    Y: Sync,
{
    compile_qc_to_cc_with(p, inputs, delta, r, &LearnConfig::default())
}

pub fn compile_qc_to_cc_with<X, Y>(
    p: &QcProtocol<X, Y>,
    inputs: &[X],
    delta: f64,
    r: Option<usize>,
    cfg: &LearnConfig,
) -> Result<CompiledProtocol<X, Y>>
where
    X: Clone + Eq + Hash + Send + Sync,
    Y: Sync,
{
    let q = p.qubits();
    let r = r.unwrap_or_else(|| default_copies(q, delta, cfg.qubit_budget));
    let coins = match p.coin_mode() {
        CoinMode::Private => 1,
        CoinMode::Public { size } => size,
        CoinMode::PublicSeed => return Err(TransformError::InvalidParameter("coin space must be enumerable".into())),
    };
    let families: Vec<Vec<MeasurementOperator>> = (0..coins).map(|coin| p.family(coin).to_vec()).collect();
    let mut index = HashMap::with_capacity(inputs.len());
    for (i, x) in inputs.iter().enumerate() {
        if index.insert(x.clone(), i).is_some() {
            return Err(TransformError::InvalidParameter(format!("input {i} is listed twice")));
        }
    }
    // Fix the coin, compile, and let the compiled referee average over it.
    let outcomes = inputs
        .par_iter()
        .map(|x| {
            (0..coins)
                .map(|coin| {
                    let rho = p.state(x, coin)?;
                    learn_state_message_with(&rho, &families[coin as usize], delta, r, cfg)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let messages =
        outcomes.iter().map(|per_coin| per_coin.iter().map(|o| o.record.encode_payload()).collect()).collect();
    Ok(CompiledProtocol {
        name: format!("compiled({}, delta={delta}, r={r})", p.name()),
        q,
        c: p.bob_bits(),
        r,
        delta,
        coin: p.coin_mode(),
        cfg: *cfg,
        families,
        bob: p.bob_fn(),
        index,
        outcomes,
        messages,
        cache: Mutex::new(HashMap::new()),
    })
}

impl<X: Eq + Hash, Y> CompiledProtocol<X, Y> {
    pub fn copies(&self) -> usize {
        self.r
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn x_index(&self, x: &X) -> crate::smp::Result<usize> {
        self.index.get(x).copied().ok_or_else(|| SmpError::InvalidParameter("input was not compiled".into()))
    }

    pub fn outcome(&self, x: &X, coin: u64) -> Option<&LearnOutcome> {
        self.outcomes.get(*self.index.get(x)?)?.get(coin as usize)
    }

    pub fn record(&self, x: &X, coin: u64) -> Option<&LearnRecord> {
        self.outcome(x, coin).map(|o| &o.record)
    }

    pub fn message(&self, x: &X, coin: u64) -> Option<&BitString> {
        self.messages.get(*self.index.get(x)?)?.get(coin as usize)
    }

    pub fn diagnostics(&self) -> Vec<CompileDiagnostics> {
        let bound = bad_count_bound(self.q * self.r as u32, self.delta);
        let mut out = Vec::new();
        for (x_index, per_coin) in self.outcomes.iter().enumerate() {
            for (coin, o) in per_coin.iter().enumerate() {
                out.push(CompileDiagnostics {
                    x_index,
                    coin: coin as u64,
                    bad_count: o.bad_count(),
                    bound,
                    max_band_weight: o.max_band_weight(),
                    payload_bits: o.record.payload_bits(),
                });
            }
        }
        out
    }

    /// Replayed estimates for a received message, cached per coin.
    pub fn estimates(&self, message: &BitString, coin: u64) -> Result<Arc<Vec<f64>>> {
        let key = (coin, message.clone());
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let family = self
            .families
            .get(coin as usize)
            .ok_or_else(|| TransformError::InvalidParameter(format!("coin {coin} out of range")))?;
        let rec = LearnRecord::decode_payload(message, self.q, self.c, self.r, self.delta)?;
        let est = Arc::new(reconstruct_estimates_with(&rec, family, self.q, &self.cfg)?);
        self.cache.lock().expect("cache lock").insert(key, Arc::clone(&est));
        Ok(est)
    }
}

impl<X, Y> SmpProtocol for CompiledProtocol<X, Y>
where
    X: Eq + Hash + Send + Sync,
    Y: Sync,
{
    type AliceInput = X;
    type BobInput = Y;

    fn name(&self) -> String {
        self.name.clone()
    }

    fn coin_mode(&self) -> CoinMode {
        self.coin
    }

    /// Longest record over all compiled inputs; shorter records are sent as is.
    fn cost(&self) -> Cost {
        let longest = self.messages.iter().flatten().map(BitString::len).max().unwrap_or(0);
        Cost { alice: MessageCost::Bits(longest), bob_bits: self.c }
    }

    fn alice(&self, x: &X, coin: u64) -> crate::smp::Result<AliceMessage> {
        let i = self.x_index(x)?;
        Ok(AliceMessage::Classical(Dist::point(self.messages[i][coin as usize].clone())))
    }

    fn bob(&self, y: &Y, coin: u64) -> crate::smp::Result<Dist<BitString>> {
        let bits = self.c;
        Ok((self.bob)(y, coin)?.map(|b| BitString::from_u64(b, bits)))
    }

    fn referee(&self, alice: Received<'_>, bob: &BitString, coin: u64) -> crate::smp::Result<f64> {
        if bob.len() != self.c {
            return Err(SmpError::InvalidMessage(format!("Bob sent {} bits, expected {}", bob.len(), self.c)));
        }
        let est = self.estimates(alice.bits()?, coin).map_err(|e| SmpError::Protocol(e.to_string()))?;
        Ok(est[bob.to_u64() as usize])
    }
}
