//! Binary matrix fixtures.
//!
//! Layout, all little-endian: the ASCII magic `BNDM`, then `u32` order,
//! `u32` bandwidth and `u32` lead dimension, followed by `lead_dim * N`
//! `f64` values in column-major panel order. Padding slots are written as
//! zero.

use std::io::{Read, Write};
use std::path::Path;

use crate::band::BandedMatrix;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"BNDM";
pub const HEADER_LEN: usize = 16;

pub fn write_fixture<W: Write>(a: &BandedMatrix, mut out: W) -> Result<()> {
    let as_u32 = |v: usize, what: &str| {
        u32::try_from(v).map_err(|_| Error::Fixture(format!("{what} {v} does not fit in u32")))
    };
    let mut header = [0u8; HEADER_LEN];
    header[..4].copy_from_slice(MAGIC);
    header[4..8].copy_from_slice(&as_u32(a.dim(), "order")?.to_le_bytes());
    header[8..12].copy_from_slice(&as_u32(a.bandwidth(), "bandwidth")?.to_le_bytes());
    header[12..16].copy_from_slice(&as_u32(a.lead_dim(), "lead dimension")?.to_le_bytes());
    out.write_all(&header)?;

    let mut body = Vec::with_capacity(a.data().len() * 8);
    for j in 0..a.dim() {
        let used = a.col_end(j) - j;
        let panel = &a.data()[j * a.lead_dim()..(j + 1) * a.lead_dim()];
        for (r, v) in panel.iter().enumerate() {
            let v = if r < used { *v } else { 0.0 };
            body.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.write_all(&body)?;
    Ok(())
}

pub fn read_fixture<R: Read>(mut input: R) -> Result<BandedMatrix> {
    let mut header = [0u8; HEADER_LEN];
    input
        .read_exact(&mut header)
        .map_err(|_| Error::Fixture("truncated header".into()))?;
    if &header[..4] != MAGIC {
        return Err(Error::Fixture("bad magic, expected BNDM".into()));
    }
    let field = |at: usize| u32::from_le_bytes(header[at..at + 4].try_into().unwrap()) as usize;
    let (dim, bandwidth, lead_dim) = (field(4), field(8), field(12));
    let count = dim
        .checked_mul(lead_dim)
        .ok_or_else(|| Error::Fixture("panel size overflows".into()))?;

    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(Error::Fixture(format!(
            "expected {} payload bytes, found {}",
            count * 8,
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    BandedMatrix::from_raw(dim, bandwidth, lead_dim, data)
}

pub fn save(a: &BandedMatrix, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_fixture(a, std::io::BufWriter::new(file))
}

pub fn load(path: impl AsRef<Path>) -> Result<BandedMatrix> {
    let file = std::fs::File::open(path)?;
    read_fixture(std::io::BufReader::new(file))
}
