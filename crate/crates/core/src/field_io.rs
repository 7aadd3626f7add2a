//! Binary field files.
//!
//! Layout, all little endian:
//!
//! | bytes | content |
//! |---|---|
//! | 6 | magic `MSFLD1` |
//! | 4 | `u32` dimension |
//! | 4 | `u32` points per axis `N` |
//! | 8 | `f64` step `h` |
//! | `16·N^dim` | values as interleaved `(re, im)` `f64`, row major, axis 0 slowest |

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{GridSpec, SampledField};

pub const MAGIC: &[u8; 6] = b"MSFLD1";
pub const HEADER_LEN: usize = 6 + 4 + 4 + 8;

/// Total file size for a grid.
pub fn encoded_len(grid: &GridSpec) -> usize {
    HEADER_LEN + 16 * grid.len()
}

pub fn encode(field: &SampledField) -> Vec<u8> {
    let g = field.spec();
    let mut out = Vec::with_capacity(encoded_len(g));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&g.step().to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<SampledField> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..6] != MAGIC {
        return Err(Error::Format("bad magic bytes".into()));
    }
    let dim = u32_at(bytes, 6) as usize;
    let n = u32_at(bytes, 10) as usize;
    let h = f64_at(bytes, 14);
    let grid = GridSpec::new(dim, n, h).map_err(|e| Error::Format(e.to_string()))?;
    let count = (n as u128).checked_pow(dim as u32).filter(|c| *c <= (usize::MAX / 16) as u128);
    let expected = count.map(|c| HEADER_LEN as u128 + 16 * c);
    if expected != Some(bytes.len() as u128) {
        return Err(Error::Format(format!("length {} does not match dim {dim}, N {n}", bytes.len())));
    }
    let values: Vec<Complex64> = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| Complex64::new(f64_at(c, 0), f64_at(c, 8)))
        .collect();
    SampledField::new(grid, values)
}

pub fn read_field(path: &Path) -> Result<SampledField> {
    decode(&fs::read(path)?)
}

pub fn write_field(path: &Path, field: &SampledField) -> Result<()> {
    fs::write(path, encode(field))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_size() {
        let g = GridSpec::self_dual(2, 8).unwrap();
        let f = SampledField::from_fn(g, |x| Complex64::new(x[0], -x[1] * 0.5));
        let bytes = encode(&f);
        assert_eq!(bytes.len(), 22 + 16 * 64);
        let back = decode(&bytes).unwrap();
        assert_eq!(back, f);
        assert!(back.spec().is_self_dual());
        assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn rejects_corruption() {
        let g = GridSpec::new(1, 4, 0.5).unwrap();
        let mut bytes = encode(&SampledField::zeros(g));
        assert!(matches!(decode(&bytes[..bytes.len() - 1]), Err(Error::Format(_))));
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(Error::Format(_))));
        assert!(matches!(decode(b"MSF"), Err(Error::Format(_))));
    }
}
