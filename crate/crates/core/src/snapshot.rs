//! Binary field snapshots: `"BOZK"`, version (u32), nx, ny (u32), Lx, Ly
//! (f64), then the samples row by row with x fastest. Little-endian
//! throughout.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::spectral::{Grid2D, RealField};

pub const MAGIC: &[u8; 4] = b"BOZK";
pub const VERSION: u32 = 1;

pub fn encode(field: &RealField) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(32 + 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.nx() as u32).to_le_bytes());
    out.extend_from_slice(&(g.ny() as u32).to_le_bytes());
    out.extend_from_slice(&g.lx().to_le_bytes());
    out.extend_from_slice(&g.ly().to_le_bytes());
    for v in field.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(format!("snapshot: {}", msg.into()))
}

pub fn decode(bytes: &[u8]) -> Result<RealField> {
    if bytes.len() < 32 {
        return Err(bad("truncated header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(bad("bad magic"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let version = u32_at(4);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let grid = Grid2D::new(u32_at(8) as usize, u32_at(12) as usize, f64_at(16), f64_at(24))?;
    let body = &bytes[32..];
    if body.len() != 8 * grid.len() {
        return Err(bad(format!(
            "expected {} samples, found {} bytes",
            grid.len(),
            body.len()
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    RealField::new(grid, data)
}

pub fn write(field: &RealField, w: &mut impl Write) -> std::io::Result<()> {
    w.write_all(&encode(field))
}

pub fn read(r: &mut impl Read) -> Result<RealField> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf).map_err(|e| bad(e.to_string()))?;
    decode(&buf)
}
