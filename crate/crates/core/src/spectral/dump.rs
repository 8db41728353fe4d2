//! Binary coefficient dumps.
//!
//! Layout (little-endian): a 32-byte header `b"OSCF"`, version `u32`,
//! dimension `u32`, points per axis `u32`, component count `u32`, flags `u32`
//! (bit 0: real field), period `f64`; then for every component and every
//! coefficient in storage order the pair `(re, im)` as two `f64`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Grid, SpectralField};
use crate::error::{OscError, Result};

pub const MAGIC: &[u8; 4] = b"OSCF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

pub fn encode(field: &SpectralField) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * g.len() * field.components());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&(field.components() as u32).to_le_bytes());
    out.extend_from_slice(&u32::from(field.is_real()).to_le_bytes());
    out.extend_from_slice(&g.length().to_le_bytes());
    for comp in field.all_coeffs() {
        for z in comp {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<SpectralField> {
    if bytes.len() < HEADER_LEN {
        return Err(OscError::Format("shorter than header".into()));
    }
    if &bytes[0..4] != MAGIC {
        return Err(OscError::Format("bad magic".into()));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(OscError::Format(format!("unsupported version {version}")));
    }
    let dim = u32_at(bytes, 8) as usize;
    let n = u32_at(bytes, 12) as usize;
    let m = u32_at(bytes, 16) as usize;
    let flags = u32_at(bytes, 20);
    let length = f64_at(bytes, 24);
    let grid = Grid::new(dim, n, length).map_err(|e| OscError::Format(e.to_string()))?;
    let expected = HEADER_LEN + 16 * grid.len() * m;
    if bytes.len() != expected || m == 0 {
        return Err(OscError::Format(format!(
            "body size {} does not match header (expected {expected})",
            bytes.len()
        )));
    }
    let mut at = HEADER_LEN;
    let mut coeffs = Vec::with_capacity(m);
    for _ in 0..m {
        let mut comp = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            comp.push(Complex64::new(f64_at(bytes, at), f64_at(bytes, at + 8)));
            at += 16;
        }
        coeffs.push(comp);
    }
    SpectralField::from_coefficients(grid, coeffs, flags & 1 == 1)
}

/// Human-readable mirror of a dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DumpSidecar {
    pub version: u32,
    pub grid: Grid,
    pub components: usize,
    pub real: bool,
    /// `[component][coefficient] = [re, im]`.
    pub coefficients: Vec<Vec<[f64; 2]>>,
}

impl DumpSidecar {
    pub fn of(field: &SpectralField) -> Self {
        DumpSidecar {
            version: VERSION,
            grid: *field.grid(),
            components: field.components(),
            real: field.is_real(),
            coefficients: field
                .all_coeffs()
                .iter()
                .map(|c| c.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    pub fn to_field(&self) -> Result<SpectralField> {
        let coeffs = self
            .coefficients
            .iter()
            .map(|c| c.iter().map(|p| Complex64::new(p[0], p[1])).collect())
            .collect();
        SpectralField::from_coefficients(self.grid, coeffs, self.real)
    }
}

/// Writes `<path>` (binary) and `<path>.json` (sidecar).
pub fn write_field(path: &Path, field: &SpectralField) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&encode(field))?;
    let mut side = path.as_os_str().to_owned();
    side.push(".json");
    fs::write(side, serde_json::to_vec(&DumpSidecar::of(field))?)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<SpectralField> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_and_sidecar_round_trip() {
        let g = Grid::new(2, 8, 3.0).unwrap();
        let f = SpectralField::sample(g, 2, |x, c| (x[0] + c as f64).sin() + x[1]);
        let bytes = encode(&f);
        assert_eq!(&bytes[..4], b"OSCF");
        assert_eq!(bytes.len(), HEADER_LEN + 16 * 2 * 64);
        assert_eq!(decode(&bytes).unwrap(), f);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.oscf");
        write_field(&path, &f).unwrap();
        assert_eq!(read_field(&path).unwrap(), f);
        let side: DumpSidecar =
            serde_json::from_slice(&std::fs::read(dir.path().join("f.oscf.json")).unwrap()).unwrap();
        assert_eq!(side.to_field().unwrap(), f);
    }

    #[test]
    fn corrupt_dumps_are_rejected() {
        let g = Grid::new(2, 8, 3.0).unwrap();
        let mut bytes = encode(&SpectralField::zeros(g, 1, true));
        assert!(decode(&bytes[..20]).is_err());
        bytes.pop();
        assert!(decode(&bytes).is_err());
        let mut bad = encode(&SpectralField::zeros(g, 1, true));
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
    }
}
