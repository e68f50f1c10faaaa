//! Binary field snapshots.
//!
//! Layout (all integers and floats little-endian):
//!
//! | offset | size      | content                                  |
//! |--------|-----------|------------------------------------------|
//! | 0      | 8         | magic `b"PFSNAP\0\x01"`                  |
//! | 8      | 4         | `u32` dimension `n` (1..=3)              |
//! | 12     | 3 x 8     | `u64` cell counts, unused axes stored 1  |
//! | 36     | 3 x 8     | `f64` extents, unused axes stored `h`    |
//! | 60     | 8         | `f64` time                               |
//! | 68     | 8         | `f64` interface width epsilon            |
//! | 76     | 8 x cells | `f64` samples, x fastest, then y, then z |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};

pub const MAGIC: [u8; 8] = *b"PFSNAP\0\x01";
pub const HEADER_LEN: usize = 76;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub epsilon: f64,
    pub field: ScalarField,
}

impl Snapshot {
    pub fn encode(&self) -> Vec<u8> {
        let grid = self.field.grid();
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * grid.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
        let cells = grid.raw_cells();
        for c in cells {
            out.extend_from_slice(&(c as u64).to_le_bytes());
        }
        for a in 0..3 {
            let l = if a < grid.dim() { grid.extent()[a] } else { grid.spacing() };
            out.extend_from_slice(&l.to_le_bytes());
        }
        out.extend_from_slice(&self.time.to_le_bytes());
        out.extend_from_slice(&self.epsilon.to_le_bytes());
        for v in self.field.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Snapshot(format!("truncated header ({} bytes)", bytes.len())));
        }
        if bytes[..8] != MAGIC {
            return Err(Error::Snapshot("bad magic".into()));
        }
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        if !(1..=3).contains(&dim) {
            return Err(Error::Snapshot(format!("bad dimension {dim}")));
        }
        let cells: Vec<usize> = (0..dim).map(|a| u64_at(12 + 8 * a) as usize).collect();
        let extent: Vec<f64> = (0..dim).map(|a| f64_at(36 + 8 * a)).collect();
        let time = f64_at(60);
        let epsilon = f64_at(68);
        let grid = Grid::new(&extent, &cells)?;
        let expected = HEADER_LEN + 8 * grid.len();
        if bytes.len() != expected {
            return Err(Error::Snapshot(format!(
                "expected {expected} bytes, found {}",
                bytes.len()
            )));
        }
        let data = bytes[HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self { time, epsilon, field: ScalarField::new(grid, data)? })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&self.encode())?;
        w.flush()?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let mut bytes = Vec::new();
        BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
        Self::decode(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn roundtrip(dim in 1usize..=3, n in 4usize..7, t in -1e3f64..1e3, eps in 1e-4f64..1.0, seed in any::<u64>()) {
            let grid = Grid::cube(dim, 0.5 * n as f64, n).unwrap();
            let field = ScalarField::from_fn(grid, |p| ((p[0] + 2.0 * p[1] - p[2]) * seed as f64 * 1e-19).sin());
            let snap = Snapshot { time: t, epsilon: eps, field };
            let back = Snapshot::decode(&snap.encode()).unwrap();
            prop_assert_eq!(back, snap);
        }
    }

    #[test]
    fn rejects_corruption() {
        let grid = Grid::cube(1, 1.0, 4).unwrap();
        let snap = Snapshot { time: 0.0, epsilon: 0.1, field: ScalarField::zeros(grid) };
        let mut bytes = snap.encode();
        assert!(Snapshot::decode(&bytes[..HEADER_LEN - 1]).is_err());
        bytes.pop();
        assert!(Snapshot::decode(&bytes).is_err());
        let mut bad = snap.encode();
        bad[0] = b'X';
        assert!(Snapshot::decode(&bad).is_err());
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.pfs");
        let grid = Grid::cube(2, 1.0, 8).unwrap();
        let snap = Snapshot {
            time: 0.25,
            epsilon: 0.05,
            field: ScalarField::from_fn(grid, |p| p[0] - p[1]),
        };
        snap.write(&path).unwrap();
        assert_eq!(Snapshot::read(&path).unwrap(), snap);
    }
}
