//! Binary field files.
//!
//! Layout, little-endian: magic `BSPF`, `u32` version, `u32` N, `f64` L,
//! `f64` t, then N^3 `f64` values for a real field or 2 N^3 interleaved
//! (re, im) values for a spectral field. The kind follows from the length.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{RealField, SpectralField, VelocityGrid};

pub const MAGIC: &[u8; 4] = b"BSPF";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8;

#[derive(Debug, Clone)]
pub enum FieldData {
    Real(RealField),
    Spectral(SpectralField),
}

#[derive(Debug, Clone)]
pub struct FieldFile {
    pub t: f64,
    pub data: FieldData,
}

impl FieldFile {
    pub fn grid(&self) -> &VelocityGrid {
        match &self.data {
            FieldData::Real(f) => f.grid(),
            FieldData::Spectral(f) => f.grid(),
        }
    }

    pub fn into_real(self) -> Result<RealField> {
        match self.data {
            FieldData::Real(f) => Ok(f),
            FieldData::Spectral(_) => Err(Error::Format("expected a real field".into())),
        }
    }
}

fn header(grid: &VelocityGrid, t: f64, payload: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * payload);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&grid.half_width().to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    out
}

pub fn encode_real(f: &RealField, t: f64) -> Vec<u8> {
    let mut out = header(f.grid(), t, f.data().len());
    for x in f.data() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn encode_spectral(f: &SpectralField, t: f64) -> Vec<u8> {
    let mut out = header(f.grid(), t, 2 * f.data().len());
    for z in f.data() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<FieldFile> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing BSPF header".into()));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = u32_at(bytes, 8) as usize;
    let grid = VelocityGrid::new(f64_at(bytes, 12), n)?;
    let t = f64_at(bytes, 20);
    let payload = &bytes[HEADER_LEN..];
    if !payload.len().is_multiple_of(8) {
        return Err(Error::Format("payload is not a whole number of f64".into()));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let data = if values.len() == grid.len() {
        FieldData::Real(RealField::from_vec(grid, values)?)
    } else if values.len() == 2 * grid.len() {
        let z = values
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        FieldData::Spectral(SpectralField::from_vec(grid, z)?)
    } else {
        return Err(Error::Format(format!(
            "payload has {} values, expected {} or {}",
            values.len(),
            grid.len(),
            2 * grid.len()
        )));
    };
    Ok(FieldFile { t, data })
}

pub fn write_real(path: &Path, f: &RealField, t: f64) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&encode_real(f, t))?;
    Ok(())
}

pub fn write_spectral(path: &Path, f: &SpectralField, t: f64) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&encode_spectral(f, t))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<FieldFile> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_real_and_spectral() {
        let grid = VelocityGrid::new(3.5, 8).unwrap();
        let f = RealField::from_fn(grid, |v| v[0] - 2.0 * v[2]);
        let back = decode(&encode_real(&f, 1.25)).unwrap();
        assert_eq!(back.t, 1.25);
        assert_eq!(back.grid(), &grid);
        assert_eq!(back.into_real().unwrap().data(), f.data());

        let fh = crate::grid::forward_transform(&f);
        let back = decode(&encode_spectral(&fh, 0.0)).unwrap();
        match back.data {
            FieldData::Spectral(s) => assert_eq!(s.data(), fh.data()),
            FieldData::Real(_) => panic!("wrong kind"),
        }
    }

    #[test]
    fn rejects_corrupt_input() {
        let grid = VelocityGrid::new(1.0, 8).unwrap();
        let mut bytes = encode_real(&RealField::zeros(grid), 0.0);
        assert!(decode(&bytes[..10]).is_err());
        bytes.pop();
        assert!(decode(&bytes).is_err());
        let mut bad = encode_real(&RealField::zeros(grid), 0.0);
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut odd = encode_real(&RealField::zeros(grid), 0.0);
        odd[8] = 7;
        assert!(decode(&odd).is_err());
    }
}
