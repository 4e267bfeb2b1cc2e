//! Binary field files.
//!
//! Layout: `b"BDIV1"`, `u8` dimension, `d` little-endian `u32` sizes, then for
//! each axis the `f64` pair `(lo, hi)`, a `u8` periodic bitmask (bit `i` is
//! axis `i`) and finally the row-major `f64` values.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{Grid, MAX_DIM};

pub const MAGIC: &[u8; 5] = b"BDIV1";

pub fn encode_field(f: &ScalarField) -> Vec<u8> {
    let g = f.grid();
    let d = g.dim();
    let mut out = Vec::with_capacity(6 + d * 20 + 1 + 8 * f.len());
    out.extend_from_slice(MAGIC);
    out.push(d as u8);
    for &n in g.shape() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for a in 0..d {
        out.extend_from_slice(&g.lo()[a].to_le_bytes());
        out.extend_from_slice(&g.hi()[a].to_le_bytes());
    }
    let mask = (0..d).fold(0u8, |m, a| if g.is_periodic(a) { m | (1 << a) } else { m });
    out.push(mask);
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(k).filter(|&e| e <= self.buf.len());
        let Some(end) = end else {
            return Err(Error::Format(format!("truncated while reading {what}")));
        };
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn decode_field(buf: &[u8]) -> Result<ScalarField> {
    let mut c = Cursor { buf, pos: 0 };
    if c.take(5, "magic")? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let d = c.u8("dimension")? as usize;
    if d == 0 || d > MAX_DIM {
        return Err(Error::Format(format!("dimension {d} not in 1..=3")));
    }
    let mut n = Vec::with_capacity(d);
    for _ in 0..d {
        n.push(c.u32("sizes")? as usize);
    }
    let (mut lo, mut hi) = (Vec::with_capacity(d), Vec::with_capacity(d));
    for _ in 0..d {
        lo.push(c.f64("bounds")?);
        hi.push(c.f64("bounds")?);
    }
    let mask = c.u8("periodic mask")?;
    if mask >> d != 0 {
        return Err(Error::Format(format!("periodic mask {mask:#04b} has bits beyond axis {d}")));
    }
    let periodic: Vec<bool> = (0..d).map(|a| mask & (1 << a) != 0).collect();
    let grid = Grid::new(&n, &lo, &hi, &periodic).map_err(|e| Error::Format(e.to_string()))?;
    let count = grid.len();
    let bytes = count
        .checked_mul(8)
        .ok_or_else(|| Error::Format("payload size overflows".into()))?;
    let payload = c.take(bytes, "values")?;
    if c.pos != buf.len() {
        return Err(Error::Format(format!("{} trailing bytes", buf.len() - c.pos)));
    }
    let values = payload
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    ScalarField::new(grid, values)
}

pub fn write_field(f: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_field(f))?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<ScalarField> {
    decode_field(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> Vec<u8> {
        let mut b = b"BDIV1".to_vec();
        b.push(2);
        b.extend_from_slice(&[2, 0, 0, 0, 2, 0, 0, 0]);
        for x in [0.0f64, 1.0, -1.0, 1.0] {
            b.extend_from_slice(&x.to_le_bytes());
        }
        b.push(0b10);
        for x in [1.0f64, -2.5, 0.125, 3.0] {
            b.extend_from_slice(&x.to_le_bytes());
        }
        b
    }

    #[test]
    fn hand_encoded_payload() {
        let f = decode_field(&fixture()).unwrap();
        assert_eq!(f.values(), &[1.0, -2.5, 0.125, 3.0]);
        assert_eq!(f.grid().lo(), &[0.0, -1.0]);
        assert_eq!(f.grid().periodic(), &[false, true]);
        assert_eq!(encode_field(&f), fixture());
    }

    #[test]
    fn rejects_malformed() {
        let good = fixture();
        assert!(decode_field(&good[..good.len() - 1]).is_err());
        let mut extra = good.clone();
        extra.push(0);
        assert!(decode_field(&extra).is_err());
        let mut magic = good.clone();
        magic[0] = b'X';
        assert!(decode_field(&magic).is_err());
        let mut nan = good.clone();
        let k = nan.len() - 8;
        nan[k..].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(decode_field(&nan), Err(Error::NonFinite { index: 3 })));
    }
}
