//! Explicit finite problems over `X × Y`: functions (possibly partial) and
//! relations with an input distribution.
//!
//! Text format shared by both tables:
//!
//! ```text
//! # comment
//! |X| |Y| k
//! <|X| rows of |Y| entries>
//! mu                      (optional; uniform over the domain if absent)
//! <|X| rows of |Y| rationals a/b or decimals>
//! ```
//!
//! Function entries are output values or `*` outside the promise domain;
//! `k` is the number of output bits. Relation entries are valid-set
//! bitmasks (decimal or `0x` hex) over `k` output symbols.

use super::{Result, SmpError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTable {
    rows: usize,
    cols: usize,
    output_bits: u32,
    values: Vec<Option<u32>>,
}

impl FunctionTable {
    pub fn from_fn(
        rows: usize,
        cols: usize,
        output_bits: u32,
        f: impl Fn(usize, usize) -> Option<u32>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(rows * cols);
        for x in 0..rows {
            for y in 0..cols {
                let v = f(x, y);
                if let Some(v) = v {
                    if output_bits < 32 && v >> output_bits != 0 {
                        return Err(SmpError::Table(format!("value {v} needs more than {output_bits} bits")));
                    }
                }
                values.push(v);
            }
        }
        Ok(Self { rows, cols, output_bits, values })
    }

    /// `[x == y]` on `n`-bit strings.
    pub fn equality(n: u32) -> Self {
        let size = 1usize << n;
        Self::from_fn(size, size, 1, |x, y| Some((x == y) as u32)).expect("Boolean")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn output_bits(&self) -> u32 {
        self.output_bits
    }

    pub fn get(&self, x: usize, y: usize) -> Option<u32> {
        self.values[x * self.cols + y]
    }

    pub fn value(&self, x: usize, y: usize) -> Result<u32> {
        if x >= self.rows || y >= self.cols {
            return Err(SmpError::OutsideDomain { x, y });
        }
        self.get(x, y).ok_or(SmpError::OutsideDomain { x, y })
    }

    pub fn in_domain(&self, x: usize, y: usize) -> bool {
        x < self.rows && y < self.cols && self.get(x, y).is_some()
    }

    pub fn is_total(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn domain(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |x| (0..self.cols).map(move |y| (x, y))).filter(|&(x, y)| self.in_domain(x, y))
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let parsed = parse_table(text)?;
        let values = parsed
            .entries
            .iter()
            .map(|tok| if *tok == "*" { Ok(None) } else { parse_uint(tok).map(|v| Some(v as u32)) })
            .collect::<Result<Vec<_>>>()?;
        let rows = parsed.rows;
        let cols = parsed.cols;
        Self::from_fn(rows, cols, parsed.k, |x, y| values[x * cols + y])
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.rows, self.cols, self.output_bits);
        for x in 0..self.rows {
            let row: Vec<String> =
                (0..self.cols).map(|y| self.get(x, y).map_or("*".to_string(), |v| v.to_string())).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Valid-output sets as bitmasks over at most 64 output symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationTable {
    rows: usize,
    cols: usize,
    outputs: u32,
    valid: Vec<u64>,
    mu: Vec<f64>,
}

impl RelationTable {
    pub fn new(rows: usize, cols: usize, outputs: u32, valid: Vec<u64>, mu: Vec<f64>) -> Result<Self> {
        if outputs == 0 || outputs > 64 {
            return Err(SmpError::Table(format!("{outputs} output symbols (must be 1..=64)")));
        }
        if valid.len() != rows * cols || mu.len() != rows * cols {
            return Err(SmpError::Table("table size does not match |X|·|Y|".into()));
        }
        if mu.iter().any(|&p| !(p >= 0.0)) {
            return Err(SmpError::InvalidDistribution("negative weight in mu".into()));
        }
        let total: f64 = mu.iter().sum();
        if (total - 1.0).abs() > super::dist::DIST_TOLERANCE {
            return Err(SmpError::InvalidDistribution(format!("mu has mass {total}")));
        }
        let mask = if outputs == 64 { u64::MAX } else { (1u64 << outputs) - 1 };
        for (i, &v) in valid.iter().enumerate() {
            if v & !mask != 0 {
                return Err(SmpError::Table(format!("cell {i} names an output beyond {outputs}")));
            }
            if mu[i] > 0.0 && v == 0 {
                return Err(SmpError::Table(format!("empty valid set on supported cell ({}, {})", i / cols, i % cols)));
            }
        }
        Ok(Self { rows, cols, outputs, valid, mu })
    }

    /// Singleton valid sets `{f(x,y)}`; mu uniform over the domain when `None`.
    pub fn from_function(f: &FunctionTable, mu: Option<Vec<f64>>) -> Result<Self> {
        if f.output_bits() > 6 {
            return Err(SmpError::Table("function outputs exceed 64 symbols".into()));
        }
        let n = f.rows() * f.cols();
        let valid: Vec<u64> = (0..n).map(|i| f.values[i].map_or(0, |v| 1u64 << v)).collect();
        let mu = match mu {
            Some(mu) => mu,
            None => {
                let support = f.domain().count() as f64;
                (0..n).map(|i| if f.values[i].is_some() { 1.0 / support } else { 0.0 }).collect()
            }
        };
        Self::new(f.rows(), f.cols(), 1 << f.output_bits(), valid, mu)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn outputs(&self) -> u32 {
        self.outputs
    }

    pub fn valid_mask(&self, x: usize, y: usize) -> u64 {
        self.valid[x * self.cols + y]
    }

    pub fn is_valid(&self, x: usize, y: usize, z: u32) -> bool {
        z < 64 && self.valid_mask(x, y) >> z & 1 == 1
    }

    pub fn mu(&self, x: usize, y: usize) -> f64 {
        self.mu[x * self.cols + y]
    }

    /// Cells with positive weight.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |x| (0..self.cols).map(move |y| (x, y))).filter(|&(x, y)| self.mu(x, y) > 0.0)
    }

    /// Sub-table on the given rows and columns with mu renormalised.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        if rows.iter().any(|&x| x >= self.rows) || cols.iter().any(|&y| y >= self.cols) {
            return Err(SmpError::Table("restriction index out of range".into()));
        }
        let cells = || rows.iter().flat_map(|&x| cols.iter().map(move |&y| (x, y)));
        let valid = cells().map(|(x, y)| self.valid_mask(x, y)).collect();
        let mass: f64 = cells().map(|(x, y)| self.mu(x, y)).sum();
        if mass <= 0.0 {
            return Err(SmpError::InvalidDistribution("restriction has no mu mass".into()));
        }
        let mu = cells().map(|(x, y)| self.mu(x, y) / mass).collect();
        Self::new(rows.len(), cols.len(), self.outputs, valid, mu)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let parsed = parse_table(text)?;
        let valid = parsed.entries.iter().map(|t| parse_uint(t)).collect::<Result<Vec<_>>>()?;
        let n = parsed.rows * parsed.cols;
        let mu = parsed.mu.unwrap_or_else(|| vec![1.0 / n as f64; n]);
        Self::new(parsed.rows, parsed.cols, parsed.k, valid, mu)
    }
}

struct ParsedTable<'a> {
    rows: usize,
    cols: usize,
    k: u32,
    entries: Vec<&'a str>,
    mu: Option<Vec<f64>>,
}

fn parse_uint(tok: &str) -> Result<u64> {
    let r = match tok.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => tok.parse(),
    };
    r.map_err(|_| SmpError::Table(format!("bad entry {tok:?}")))
}

fn parse_rational(tok: &str) -> Result<f64> {
    let bad = || SmpError::Table(format!("bad weight {tok:?}"));
    match tok.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.parse().map_err(|_| bad())?;
            let b: f64 = b.parse().map_err(|_| bad())?;
            if b == 0.0 {
                return Err(bad());
            }
            Ok(a / b)
        }
        None => tok.parse().map_err(|_| bad()),
    }
}

fn parse_table(text: &str) -> Result<ParsedTable<'_>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header: Vec<&str> =
        lines.next().ok_or_else(|| SmpError::Table("missing header".into()))?.split_whitespace().collect();
    if header.len() != 3 {
        return Err(SmpError::Table("header must be `|X| |Y| k`".into()));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| SmpError::Table(format!("bad header field {s:?}")));
    let (rows, cols, k) = (num(header[0])?, num(header[1])?, num(header[2])? as u32);
    let mut entries = Vec::with_capacity(rows * cols);
    for x in 0..rows {
        let line = lines.next().ok_or_else(|| SmpError::Table(format!("missing row {x}")))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != cols {
            return Err(SmpError::Table(format!("row {x} has {} entries, expected {cols}", toks.len())));
        }
        entries.extend(toks);
    }
    let mu = match lines.next() {
        None => None,
        Some("mu") => {
            let mut mu = Vec::with_capacity(rows * cols);
            for x in 0..rows {
                let line = lines.next().ok_or_else(|| SmpError::Table(format!("missing mu row {x}")))?;
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != cols {
                    return Err(SmpError::Table(format!("mu row {x} has {} entries", toks.len())));
                }
                for t in toks {
                    mu.push(parse_rational(t)?);
                }
            }
            Some(mu)
        }
        Some(other) => return Err(SmpError::Table(format!("unexpected line {other:?}"))),
    };
    if lines.next().is_some() {
        return Err(SmpError::Table("trailing content".into()));
    }
    Ok(ParsedTable { rows, cols, k, entries, mu })
}
