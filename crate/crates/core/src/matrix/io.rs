//! Binary (`MCND`) and CSV matrix files.
//!
//! Binary layout, all little-endian:
//!
//! | bytes | content                         |
//! |-------|---------------------------------|
//! | 4     | magic `MCND`                    |
//! | 2     | format version (`u16`, = 1)     |
//! | 8     | `n_rows` (`u64`)                |
//! | 8     | `n_cols` (`u64`)                |
//! | 8·n   | row-major IEEE-754 `f64` values |

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{DenseMatrix, MatrixError};

pub const MAGIC: &[u8; 4] = b"MCND";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 8 + 8;

pub fn write_matrix(m: &DenseMatrix, path: impl AsRef<Path>) -> Result<(), MatrixError> {
    fs::write(path, encode(m))?;
    Ok(())
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix, MatrixError> {
    decode(&fs::read(path)?)
}

pub(crate) fn encode(m: &DenseMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * m.as_slice().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(m.n_rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.n_cols() as u64).to_le_bytes());
    for v in m.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub(crate) fn decode(bytes: &[u8]) -> Result<DenseMatrix, MatrixError> {
    let format = |msg: String| MatrixError::Format(msg);
    if bytes.len() < HEADER_LEN {
        return Err(format(format!(
            "truncated header: {} bytes, need {HEADER_LEN}",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(format(format!("bad magic {:?}", &bytes[..4])));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(format(format!("unsupported version {version}")));
    }
    let read_u64 = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let (rows, cols) = (read_u64(6), read_u64(14));
    let payload_len = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| format(format!("dimension overflow: {rows}x{cols}")))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() < payload_len {
        return Err(format(format!(
            "truncated payload: {} bytes, expected {payload_len}",
            payload.len()
        )));
    }
    if payload.len() > payload_len {
        return Err(format(format!(
            "{} trailing bytes after payload",
            payload.len() - payload_len
        )));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseMatrix::new(rows as usize, cols as usize, data)
}

/// Reads one row per line of comma-separated decimals, no header.
pub fn read_csv(path: impl AsRef<Path>) -> Result<DenseMatrix, MatrixError> {
    parse_csv(&fs::read_to_string(path)?)
}

pub(crate) fn parse_csv(text: &str) -> Result<DenseMatrix, MatrixError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|field| {
                field.trim().parse::<f64>().map_err(|e| {
                    MatrixError::Format(format!("line {}: '{}': {e}", lineno + 1, field.trim()))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(MatrixError::Format(format!(
                    "line {}: {} fields, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(MatrixError::Format("empty CSV".into()));
    }
    DenseMatrix::from_rows(&rows)
}

/// Writes shortest round-trip decimal representations, so CSV is also lossless.
pub fn write_csv(m: &DenseMatrix, path: impl AsRef<Path>) -> Result<(), MatrixError> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for i in 0..m.n_rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_layout() {
        let m = DenseMatrix::new(1, 1, vec![2.5]).unwrap();
        let bytes = encode(&m);
        assert_eq!(bytes.len(), HEADER_LEN + 8);
        assert_eq!(&bytes[..4], b"MCND");
        assert_eq!(&bytes[4..6], &[1, 0]);
        assert_eq!(&bytes[6..14], &1u64.to_le_bytes());
        assert_eq!(&bytes[14..22], &1u64.to_le_bytes());
        assert_eq!(&bytes[22..], &2.5f64.to_le_bytes());
        assert_eq!(decode(&bytes).unwrap(), m);
    }

    #[test]
    fn format_errors() {
        let m = DenseMatrix::identity(2).unwrap();
        let good = encode(&m);

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(matches!(decode(&bad_magic), Err(MatrixError::Format(e)) if e.contains("magic")));

        let truncated = &good[..good.len() - 3];
        assert!(
            matches!(decode(truncated), Err(MatrixError::Format(e)) if e.contains("truncated"))
        );
        assert!(decode(&good[..10]).is_err());

        let mut overflow = good.clone();
        overflow[6..14].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(matches!(decode(&overflow), Err(MatrixError::Format(e)) if e.contains("overflow")));

        let mut version = good.clone();
        version[4] = 2;
        assert!(decode(&version).is_err());

        let mut nan = good;
        nan[22..30].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(decode(&nan), Err(MatrixError::NonFinite { .. })));
    }

    #[test]
    fn csv_parse() {
        let m = parse_csv("1,2\n3,4").unwrap();
        assert_eq!(
            m,
            DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap()
        );
        assert!(matches!(parse_csv("1,2\n3"), Err(MatrixError::Format(e)) if e.contains("line 2")));
        assert!(parse_csv("1,x").is_err());
        assert!(parse_csv("").is_err());
    }
}
