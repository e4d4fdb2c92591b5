//! Binary field snapshots.
//!
//! Layout: a 32-byte header (`b"BSVF"`, then little-endian `u32` version, `d`, `N`, kind
//! with 0 = real and 1 = spectral, then 12 zero bytes) followed by little-endian `f64`
//! values in row-major order; spectral tables interleave real and imaginary parts.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Grid, RealField, SpectralField};

pub const MAGIC: [u8; 4] = *b"BSVF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    Real(RealField),
    Spectral(SpectralField),
}

impl Snapshot {
    pub fn grid(&self) -> Grid {
        match self {
            Snapshot::Real(f) => f.grid(),
            Snapshot::Spectral(f) => f.grid(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let grid = self.grid();
        let (kind, values): (u32, Vec<f64>) = match self {
            Snapshot::Real(f) => (0, f.values().to_vec()),
            Snapshot::Spectral(f) => (1, f.coeffs().iter().flat_map(|c| [c.re, c.im]).collect()),
        };
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * values.len());
        out.extend_from_slice(&MAGIC);
        for word in [VERSION, grid.dim() as u32, grid.n() as u32, kind] {
            out.extend_from_slice(&word.to_le_bytes());
        }
        out.extend_from_slice(&[0u8; 12]);
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN || bytes[..4] != MAGIC {
            return Err(Error::Format("missing BSVF header".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap());
        if word(1) != VERSION {
            return Err(Error::Format(format!("unsupported snapshot version {}", word(1))));
        }
        let grid = Grid::new(word(2) as usize, word(3) as usize)?;
        let kind = word(4);
        let per = match kind {
            0 => 1,
            1 => 2,
            k => return Err(Error::Format(format!("unknown snapshot kind {k}"))),
        };
        let expected = HEADER_LEN + 8 * per * grid.len();
        if bytes.len() != expected {
            return Err(Error::Format(format!(
                "snapshot has {} bytes, expected {expected}",
                bytes.len()
            )));
        }
        let values: Vec<f64> = bytes[HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(if kind == 0 {
            Snapshot::Real(RealField::new(grid, values)?)
        } else {
            let coeffs = values
                .chunks_exact(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect();
            Snapshot::Spectral(SpectralField::new(grid, coeffs)?)
        })
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}
