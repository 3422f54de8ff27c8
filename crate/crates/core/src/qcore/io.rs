//! Matrix fixtures: a versioned little-endian binary container and a text form.
//!
//! Binary layout: `b"SMPM"`, version `u16`, dim `u32`, then `dim * dim`
//! row-major `(re, im)` pairs of `f64`.

use std::io::{Read, Write};

use super::{CMatrix, QcoreError, Result, C64};

const MAGIC: &[u8; 4] = b"SMPM";
const VERSION: u16 = 1;

fn io_err(e: std::io::Error) -> QcoreError {
    QcoreError::Format(e.to_string())
}

pub fn write_matrix_binary<W: Write>(m: &CMatrix, mut out: W) -> Result<()> {
    let dim = m.nrows();
    if m.ncols() != dim {
        return Err(QcoreError::DimensionMismatch { expected: dim, found: m.ncols() });
    }
    out.write_all(MAGIC).map_err(io_err)?;
    out.write_all(&VERSION.to_le_bytes()).map_err(io_err)?;
    out.write_all(&(dim as u32).to_le_bytes()).map_err(io_err)?;
    for i in 0..dim {
        for j in 0..dim {
            let z = m[(i, j)];
            out.write_all(&z.re.to_le_bytes()).map_err(io_err)?;
            out.write_all(&z.im.to_le_bytes()).map_err(io_err)?;
        }
    }
    Ok(())
}

pub fn read_matrix_binary<R: Read>(mut input: R) -> Result<CMatrix> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(io_err)?;
    if &magic != MAGIC {
        return Err(QcoreError::Format("bad magic".into()));
    }
    let mut v = [0u8; 2];
    input.read_exact(&mut v).map_err(io_err)?;
    let version = u16::from_le_bytes(v);
    if version != VERSION {
        return Err(QcoreError::Format(format!("unsupported version {version}")));
    }
    let mut d = [0u8; 4];
    input.read_exact(&mut d).map_err(io_err)?;
    let dim = u32::from_le_bytes(d) as usize;
    let mut m = CMatrix::zeros(dim, dim);
    let mut buf = [0u8; 8];
    for i in 0..dim {
        for j in 0..dim {
            input.read_exact(&mut buf).map_err(io_err)?;
            let re = f64::from_le_bytes(buf);
            input.read_exact(&mut buf).map_err(io_err)?;
            let im = f64::from_le_bytes(buf);
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

/// `dim N` header line, then one line per row of `re,im` tokens.
pub fn write_matrix_text(m: &CMatrix) -> String {
    let dim = m.nrows();
    let mut s = format!("dim {dim}\n");
    for i in 0..dim {
        let row: Vec<String> = (0..dim).map(|j| format!("{:e},{:e}", m[(i, j)].re, m[(i, j)].im)).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn read_matrix_text(text: &str) -> Result<CMatrix> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| QcoreError::Format("missing header".into()))?;
    let dim: usize = header
        .strip_prefix("dim")
        .and_then(|d| d.trim().parse().ok())
        .ok_or_else(|| QcoreError::Format(format!("bad header {header:?}")))?;
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let line = lines.next().ok_or_else(|| QcoreError::Format(format!("missing row {i}")))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != dim {
            return Err(QcoreError::Format(format!("row {i} has {} entries", tokens.len())));
        }
        for (j, tok) in tokens.iter().enumerate() {
            let (re, im) = tok.split_once(',').ok_or_else(|| QcoreError::Format(format!("bad entry {tok:?}")))?;
            let parse = |s: &str| s.parse::<f64>().map_err(|e| QcoreError::Format(e.to_string()));
            m[(i, j)] = C64::new(parse(re)?, parse(im)?);
        }
    }
    if lines.next().is_some() {
        return Err(QcoreError::Format("trailing rows".into()));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::random_hermitian;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn both_forms_round_trip_exactly(seed in any::<u64>(), dim_log in 0u32..4) {
            let m = random_hermitian(1 << dim_log, &mut ChaCha8Rng::seed_from_u64(seed));
            let mut bytes = Vec::new();
            write_matrix_binary(&m, &mut bytes).unwrap();
            prop_assert_eq!(bytes.len(), 10 + 16 * m.len());
            prop_assert_eq!(&read_matrix_binary(bytes.as_slice()).unwrap(), &m);
            prop_assert_eq!(&read_matrix_text(&write_matrix_text(&m)).unwrap(), &m);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_matrix_binary(&b"XXXX"[..]).is_err());
        assert!(read_matrix_text("dim 2\n1,0 0,0\n").is_err());
        assert!(read_matrix_text("size 2").is_err());
    }
}
