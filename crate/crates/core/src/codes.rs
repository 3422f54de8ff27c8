//! Binary linear codes with a grid view of codewords and brute-force
//! distance checks.
//!
//! Message bit `i` of an integer message `x` is `(x >> i) & 1`. Codeword
//! position `row * c_B + col` is cell `(row, col)` of the `c_A × c_B` grid.

use rand::Rng;
use thiserror::Error;

use crate::rng::stream_rng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("message has {found} bits, code expects {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("grid {rows}×{cols} does not hold {m} bits")]
    GridMismatch { rows: usize, cols: usize, m: usize },
    #[error("grid cell ({row}, {col}) out of range")]
    OutOfRange { row: usize, col: usize },
    #[error("brute force limited to {limit} message bits, got {n}")]
    TooLarge { n: usize, limit: usize },
    #[error("malformed generator matrix: {0}")]
    Format(String),
}

pub const BRUTE_FORCE_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCode {
    n: usize,
    /// `m` rows of `n` bits; codeword bit `r` is `<generator[r], x>` mod 2.
    generator: Vec<Vec<bool>>,
    grid: (usize, usize),
}

/// Most balanced factorisation `(c_A, c_B)` of `m` with `c_A <= c_B`.
pub fn balanced_grid(m: usize) -> (usize, usize) {
    let mut best = 1;
    let mut d = 1;
    while d * d <= m {
        if m.is_multiple_of(d) {
            best = d;
        }
        d += 1;
    }
    (best, m / best)
}

impl LinearCode {
    pub fn new(n: usize, generator: Vec<Vec<bool>>) -> Result<Self, CodeError> {
        if generator.is_empty() {
            return Err(CodeError::Format("generator has no rows".into()));
        }
        if let Some(row) = generator.iter().find(|r| r.len() != n) {
            return Err(CodeError::LengthMismatch { expected: n, found: row.len() });
        }
        let grid = balanced_grid(generator.len());
        Ok(Self { n, generator, grid })
    }

    /// Codeword position `s` carries `<x, s>`; `m = 2^n`.
    pub fn hadamard(n: usize) -> Self {
        let m = 1usize << n;
        let generator = (0..m).map(|s| (0..n).map(|i| (s >> i) & 1 == 1).collect()).collect();
        Self::new(n, generator).expect("well formed")
    }

    /// The single message bit repeated `m` times.
    pub fn repetition(m: usize) -> Self {
        Self::new(1, vec![vec![true]; m]).expect("well formed")
    }

    pub fn random(n: usize, m: usize, seed: u64) -> Self {
        let mut rng = stream_rng(seed, 0);
        let generator = (0..m).map(|_| (0..n).map(|_| rng.random::<bool>()).collect()).collect();
        Self::new(n, generator).expect("well formed")
    }

    /// Code `{0,1}^k -> {0,1}^{10k}` used to Booleanize `k`-bit outputs:
    /// nonzero Hadamard rows cycled to length `10k` while `2^k <= 10k`, otherwise the
    /// best of several seeded random codes by brute-force distance.
    pub fn booleanizer(k: usize, seed: u64) -> Result<Self, CodeError> {
        let m = 10 * k;
        if k == 0 {
            return Err(CodeError::Format("k must be positive".into()));
        }
        if (1usize << k.min(63)) <= m {
            let h = Self::hadamard(k);
            let rows = h.m() - 1;
            let generator = (0..m).map(|r| h.generator[1 + r % rows].clone()).collect();
            return Self::new(k, generator);
        }
        let mut best: Option<(usize, LinearCode)> = None;
        for attempt in 0..64 {
            let code = Self::random(k, m, crate::rng::derive_seed(seed, attempt));
            let d = code.min_distance_bruteforce()?;
            if best.as_ref().is_none_or(|(bd, _)| d > *bd) {
                best = Some((d, code));
            }
        }
        Ok(best.expect("at least one attempt").1)
    }

    pub fn with_grid(mut self, rows: usize, cols: usize) -> Result<Self, CodeError> {
        if rows * cols != self.m() {
            return Err(CodeError::GridMismatch { rows, cols, m: self.m() });
        }
        self.grid = (rows, cols);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.generator.len()
    }

    /// `(c_A, c_B)`: rows and columns of the grid view.
    pub fn grid(&self) -> (usize, usize) {
        self.grid
    }

    pub fn encode(&self, x: &[bool]) -> Result<Vec<bool>, CodeError> {
        if x.len() != self.n {
            return Err(CodeError::LengthMismatch { expected: self.n, found: x.len() });
        }
        Ok(self.generator.iter().map(|row| row.iter().zip(x).fold(false, |acc, (&g, &b)| acc ^ (g & b))).collect())
    }

    pub fn encode_u64(&self, x: u64) -> Vec<bool> {
        let bits: Vec<bool> = (0..self.n).map(|i| (x >> i) & 1 == 1).collect();
        self.encode(&bits).expect("length matches")
    }

    pub fn grid_cell(&self, codeword: &[bool], row: usize, col: usize) -> Result<bool, CodeError> {
        let (rows, cols) = self.grid;
        if row >= rows || col >= cols || codeword.len() != self.m() {
            return Err(CodeError::OutOfRange { row, col });
        }
        Ok(codeword[row * cols + col])
    }

    /// Minimum weight over nonzero messages.
    pub fn min_distance_bruteforce(&self) -> Result<usize, CodeError> {
        if self.n > BRUTE_FORCE_LIMIT {
            return Err(CodeError::TooLarge { n: self.n, limit: BRUTE_FORCE_LIMIT });
        }
        Ok((1u64..1 << self.n).map(|x| self.encode_u64(x).iter().filter(|&&b| b).count()).min().unwrap_or(0))
    }

    pub fn relative_distance(&self) -> Result<f64, CodeError> {
        Ok(self.min_distance_bruteforce()? as f64 / self.m() as f64)
    }

    /// Nearest codeword by exhaustive search; ties go to the smallest message.
    pub fn decode_nearest(&self, word: &[bool]) -> Result<u64, CodeError> {
        if self.n > BRUTE_FORCE_LIMIT {
            return Err(CodeError::TooLarge { n: self.n, limit: BRUTE_FORCE_LIMIT });
        }
        if word.len() != self.m() {
            return Err(CodeError::LengthMismatch { expected: self.m(), found: word.len() });
        }
        Ok((0u64..1 << self.n)
            .min_by_key(|&x| self.encode_u64(x).iter().zip(word).filter(|(a, b)| a != b).count())
            .expect("nonempty"))
    }

    /// One line per generator row of `0`/`1` characters, optionally preceded
    /// by `grid <c_A> <c_B>`. Lines starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<Self, CodeError> {
        let mut grid = None;
        let mut rows = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            if let Some(rest) = line.strip_prefix("grid") {
                let dims: Vec<usize> = rest
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| CodeError::Format(format!("bad grid line {line:?}"))))
                    .collect::<Result<_, _>>()?;
                if dims.len() != 2 {
                    return Err(CodeError::Format(format!("bad grid line {line:?}")));
                }
                grid = Some((dims[0], dims[1]));
                continue;
            }
            let row = line
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(CodeError::Format(format!("invalid character {other:?}"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        let n = rows.first().map_or(0, Vec::len);
        let code = Self::new(n, rows)?;
        match grid {
            Some((a, b)) => code.with_grid(a, b),
            None => Ok(code),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("grid {} {}\n", self.grid.0, self.grid.1);
        for row in &self.generator {
            s.extend(row.iter().map(|&b| if b { '1' } else { '0' }));
            s.push('\n');
        }
        s
    }
}
