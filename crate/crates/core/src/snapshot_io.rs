//! "ELWV" binary field snapshots.
//!
//! Layout (little-endian): magic `ELWV`, `u32` format version, `u32` component
//! count, `f64` time, `f64` origin, `f64` spacing, `u64` point count, then
//! `count × components` `f64` values, point-major.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"ELWV";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub time: f64,
    pub origin: f64,
    pub spacing: f64,
    pub components: usize,
    /// Row-major: `data[i * components + c]`.
    pub data: Vec<f64>,
}

impl FieldSnapshot {
    pub fn count(&self) -> usize {
        if self.components == 0 {
            0
        } else {
            self.data.len() / self.components
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(40 + 8 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.components as u32).to_le_bytes());
        out.extend_from_slice(&self.time.to_le_bytes());
        out.extend_from_slice(&self.origin.to_le_bytes());
        out.extend_from_slice(&self.spacing.to_le_bytes());
        out.extend_from_slice(&(self.count() as u64).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        if buf.len() < 44 || &buf[0..4] != MAGIC {
            return Err(Error::Format("missing ELWV header".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(buf[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported ELWV version {version}")));
        }
        let components = u32_at(8) as usize;
        let time = f64_at(12);
        let origin = f64_at(20);
        let spacing = f64_at(28);
        let count = u64::from_le_bytes(buf[36..44].try_into().unwrap()) as usize;
        let need = 44 + 8 * count * components;
        if buf.len() != need {
            return Err(Error::Format(format!("payload size {} != expected {need}", buf.len())));
        }
        let data = buf[44..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(FieldSnapshot {
            time,
            origin,
            spacing,
            components,
            data,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let s = FieldSnapshot {
            time: 1.25,
            origin: -3.0,
            spacing: 0.5,
            components: 3,
            data: (0..30).map(|i| i as f64 * 0.1 - 1.0).collect(),
        };
        let back = FieldSnapshot::from_bytes(&s.to_bytes()).unwrap();
        assert_eq!(s, back);
        assert_eq!(back.count(), 10);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let s = FieldSnapshot {
            time: 0.0,
            origin: 0.0,
            spacing: 1.0,
            components: 1,
            data: vec![1.0; 4],
        };
        let mut b = s.to_bytes();
        b.pop();
        assert!(FieldSnapshot::from_bytes(&b).is_err());
        let mut b = s.to_bytes();
        b[0] = b'X';
        assert!(FieldSnapshot::from_bytes(&b).is_err());
    }
}
