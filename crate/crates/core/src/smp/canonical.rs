use std::sync::Arc;

use super::{
    canonical_referee, AliceMessage, CoinMode, Cost, Dist, MessageCost, QuantumMessage, Received, Result, SmpError,
    SmpProtocol,
};
use crate::bits::BitString;
use crate::qcore::{DensityMatrix, MeasurementOperator};

type StateFn<X> = dyn Fn(&X, u64) -> Result<DensityMatrix> + Send + Sync;
type BobFn<Y> = dyn Fn(&Y, u64) -> Result<Dist<u64>> + Send + Sync;

/// Quantum-classical protocol in canonical form: Alice sends `rho_x` on
/// `q_A` qubits, Bob sends `b ∈ {0,1}^{c_B}`, the referee accepts with
/// probability `Tr(E_b rho_x)`. With a public coin, states and the
/// measurement family may depend on the coin value.
pub struct QcProtocol<X, Y> {
    name: String,
    qubits: u32,
    bob_bits: usize,
    coin: CoinMode,
    /// `families[coin][b]`.
    families: Vec<Vec<MeasurementOperator>>,
    state: Arc<StateFn<X>>,
    bob: Arc<BobFn<Y>>,
}

impl<X, Y> QcProtocol<X, Y> {
    pub fn new(
        name: impl Into<String>,
        qubits: u32,
        bob_bits: usize,
        coin: CoinMode,
        families: Vec<Vec<MeasurementOperator>>,
        state: impl Fn(&X, u64) -> Result<DensityMatrix> + Send + Sync + 'static,
        bob: impl Fn(&Y, u64) -> Result<Dist<u64>> + Send + Sync + 'static,
    ) -> Result<Self> {
        let coins = match coin {
            CoinMode::Private => 1,
            CoinMode::Public { size } => size,
            CoinMode::PublicSeed => {
                return Err(SmpError::InvalidParameter("canonical form needs an enumerable coin".into()))
            }
        };
        if families.len() as u64 != coins {
            return Err(SmpError::InvalidParameter(format!(
                "{} measurement families for {coins} coins",
                families.len()
            )));
        }
        let dim = 1usize << qubits;
        for family in &families {
            if family.len() != 1usize << bob_bits {
                return Err(SmpError::InvalidParameter(format!(
                    "family has {} operators, expected 2^{bob_bits}",
                    family.len()
                )));
            }
            if let Some(e) = family.iter().find(|e| e.dim() != dim) {
                return Err(SmpError::InvalidParameter(format!("operator of dim {} on {qubits} qubits", e.dim())));
            }
        }
        Ok(Self { name: name.into(), qubits, bob_bits, coin, families, state: Arc::new(state), bob: Arc::new(bob) })
    }

    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn bob_bits(&self) -> usize {
        self.bob_bits
    }

    pub fn family(&self, coin: u64) -> &[MeasurementOperator] {
        &self.families[coin as usize]
    }

    pub fn state(&self, x: &X, coin: u64) -> Result<DensityMatrix> {
        let rho = (self.state)(x, coin)?;
        if rho.qubits() != self.qubits {
            return Err(SmpError::InvalidParameter(format!(
                "state on {} qubits, declared {}",
                rho.qubits(),
                self.qubits
            )));
        }
        Ok(rho)
    }

    /// Bob's distribution over `b` as integers.
    pub fn bob_distribution(&self, y: &Y, coin: u64) -> Result<Dist<u64>> {
        (self.bob)(y, coin)
    }

    pub(crate) fn bob_fn(&self) -> Arc<BobFn<Y>> {
        Arc::clone(&self.bob)
    }
}

impl<X: Sync, Y: Sync> SmpProtocol for QcProtocol<X, Y> {
    type AliceInput = X;
    type BobInput = Y;

    fn name(&self) -> String {
        self.name.clone()
    }

    fn coin_mode(&self) -> CoinMode {
        self.coin
    }

    fn cost(&self) -> Cost {
        Cost { alice: MessageCost::Qubits(self.qubits as usize), bob_bits: self.bob_bits }
    }

    fn alice(&self, x: &X, coin: u64) -> Result<AliceMessage> {
        Ok(AliceMessage::Quantum(QuantumMessage::Mixed(self.state(x, coin)?)))
    }

    fn bob(&self, y: &Y, coin: u64) -> Result<Dist<BitString>> {
        let bits = self.bob_bits;
        Ok(self.bob_distribution(y, coin)?.map(|b| BitString::from_u64(b, bits)))
    }

    fn referee(&self, alice: Received<'_>, bob: &BitString, coin: u64) -> Result<f64> {
        if bob.len() != self.bob_bits {
            return Err(SmpError::InvalidMessage(format!("Bob sent {} bits, expected {}", bob.len(), self.bob_bits)));
        }
        let e = &self.families[coin as usize][bob.to_u64() as usize];
        canonical_referee(alice.state()?, e)
    }
}
