//! `BELGRID1` files: 8-byte magic, `u32` N, `u32` reserved, then `N×N`
//! `(re, im)` pairs of little-endian `f64`, row-major.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::projective::C64;

pub const MAGIC: &[u8; 8] = b"BELGRID1";

pub fn write_grid<W: Write>(mut out: W, n: usize, values: &[C64]) -> Result<()> {
    if values.len() != n * n {
        return Err(Error::ParameterOutOfRange(format!("{} values for N = {n}", values.len())));
    }
    let n32 = u32::try_from(n).map_err(|_| Error::ParameterOutOfRange(format!("N = {n} too large")))?;
    out.write_all(MAGIC)?;
    out.write_all(&n32.to_le_bytes())?;
    out.write_all(&0u32.to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * values.len());
    for v in values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_grid<R: Read>(mut input: R) -> Result<(usize, Vec<C64>)> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if &header[..8] != MAGIC {
        return Err(Error::Config("not a BELGRID1 file".into()));
    }
    let n = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes")) as usize;
    let mut body = vec![0u8; 16 * n * n];
    input.read_exact(&mut body)?;
    let values = body
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            C64::new(re, im)
        })
        .collect();
    Ok((n, values))
}
