use crate::bits::{ceil_log2, BitString};
use crate::codes::LinearCode;
use crate::smp::{AliceMessage, CoinMode, Cost, Dist, MessageCost, Received, Repeated, Result, SmpError, SmpProtocol};

fn inner_product(x: u64, r: u64) -> bool {
    (x & r).count_ones() % 2 == 1
}

/// Public-coin Equality: the coin is `k` shared `n`-bit strings and each
/// player sends `⟨input, r_t⟩ mod 2` for every `t`.
#[derive(Debug, Clone)]
pub struct EqualityPublic {
    n: usize,
    k: usize,
}

pub fn equality_public(n: usize, k: usize) -> Result<EqualityPublic> {
    if n == 0 || k == 0 {
        return Err(SmpError::InvalidParameter("equality_public needs n >= 1 and k >= 1".into()));
    }
    if n > 64 {
        return Err(SmpError::InvalidParameter("inputs are limited to 64 bits".into()));
    }
    Ok(EqualityPublic { n, k })
}

impl EqualityPublic {
    fn mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    /// The `t`-th shared string. A seeded coin is expanded when `n k > 63`.
    fn shared_string(&self, coin: u64, t: usize) -> u64 {
        if self.n * self.k <= 63 {
            (coin >> (t * self.n)) & self.mask()
        } else {
            use rand::Rng;
            crate::rng::stream_rng(coin, t as u64).random::<u64>() & self.mask()
        }
    }

    fn message(&self, input: u64, coin: u64) -> BitString {
        BitString::from_bits((0..self.k).map(|t| inner_product(input, self.shared_string(coin, t))).collect())
    }
}

impl SmpProtocol for EqualityPublic {
    type AliceInput = u64;
    type BobInput = u64;

    fn name(&self) -> String {
        format!("eq-public(n={},k={})", self.n, self.k)
    }

    fn coin_mode(&self) -> CoinMode {
        if self.n * self.k <= 63 {
            CoinMode::Public { size: 1u64 << (self.n * self.k) }
        } else {
            CoinMode::PublicSeed
        }
    }

    fn cost(&self) -> Cost {
        Cost { alice: MessageCost::Bits(self.k), bob_bits: self.k }
    }

    fn alice(&self, x: &u64, coin: u64) -> Result<AliceMessage> {
        Ok(AliceMessage::Classical(Dist::point(self.message(*x, coin))))
    }

    fn bob(&self, y: &u64, coin: u64) -> Result<Dist<BitString>> {
        Ok(Dist::point(self.message(*y, coin)))
    }

    fn referee(&self, alice: Received<'_>, bob: &BitString, _coin: u64) -> Result<f64> {
        Ok(if alice.bits()? == bob { 1.0 } else { 0.0 })
    }
}

/// One round of the code-based private-coin Equality protocol: Alice sends a
/// random column of the grid view of `C(x)` with its index, Bob a random row
/// of `C(y)` with its index; accept iff the shared cell agrees.
#[derive(Debug, Clone)]
pub struct EqualityCodeRound {
    code: LinearCode,
    col_bits: usize,
    row_bits: usize,
}

pub type EqualityCode = Repeated<EqualityCodeRound>;

pub fn equality_code(n: usize, code: LinearCode, reps: usize) -> Result<EqualityCode> {
    if code.n() != n {
        return Err(SmpError::InvalidParameter(format!("code encodes {} bits, expected {n}", code.n())));
    }
    let (rows, cols) = code.grid();
    if rows * cols != code.m() {
        return Err(SmpError::InvalidParameter("grid shape does not match the code length".into()));
    }
    let round = EqualityCodeRound { col_bits: ceil_log2(cols as u64), row_bits: ceil_log2(rows as u64), code };
    Repeated::new(round, reps)
}

impl EqualityCodeRound {
    pub fn code(&self) -> &LinearCode {
        &self.code
    }
}

impl SmpProtocol for EqualityCodeRound {
    type AliceInput = u64;
    type BobInput = u64;

    fn name(&self) -> String {
        let (rows, cols) = self.code.grid();
        format!("eq-code(n={},grid={rows}x{cols})", self.code.n())
    }

    fn coin_mode(&self) -> CoinMode {
        CoinMode::Private
    }

    fn cost(&self) -> Cost {
        let (rows, cols) = self.code.grid();
        Cost { alice: MessageCost::Bits(rows + self.col_bits), bob_bits: cols + self.row_bits }
    }

    fn alice(&self, x: &u64, _coin: u64) -> Result<AliceMessage> {
        let word = self.code.encode_u64(*x);
        let (rows, cols) = self.code.grid();
        let messages = (0..cols)
            .map(|j| {
                let mut m = BitString::from_u64(j as u64, self.col_bits);
                for i in 0..rows {
                    m.push(word[i * cols + j]);
                }
                m
            })
            .collect();
        Ok(AliceMessage::Classical(Dist::uniform(messages)?))
    }

    fn bob(&self, y: &u64, _coin: u64) -> Result<Dist<BitString>> {
        let word = self.code.encode_u64(*y);
        let (rows, cols) = self.code.grid();
        let messages = (0..rows)
            .map(|i| {
                let mut m = BitString::from_u64(i as u64, self.row_bits);
                for j in 0..cols {
                    m.push(word[i * cols + j]);
                }
                m
            })
            .collect();
        Dist::uniform(messages)
    }

    fn referee(&self, alice: Received<'_>, bob: &BitString, _coin: u64) -> Result<f64> {
        let (rows, cols) = self.code.grid();
        let a = alice.bits()?;
        if a.len() != self.col_bits + rows || bob.len() != self.row_bits + cols {
            return Err(SmpError::InvalidMessage("equality message has the wrong length".into()));
        }
        let j = a.slice(0, self.col_bits).to_u64() as usize;
        let i = bob.slice(0, self.row_bits).to_u64() as usize;
        if i >= rows || j >= cols {
            return Err(SmpError::InvalidMessage("grid index out of range".into()));
        }
        let column_bit = a.get(self.col_bits + i);
        let row_bit = bob.get(self.row_bits + j);
        Ok(if column_bit == row_bit { 1.0 } else { 0.0 })
    }
}
