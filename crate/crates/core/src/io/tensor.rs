//! `CTMP` tensor container.
//!
//! Layout: magic `CTMP` | version `u8 = 1` | dtype `u8` (0 = f32, 1 = u8) |
//! ndim `u8` | `ndim` dims as little-endian `u32` | row-major little-endian
//! payload, tightly packed.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{BitMask, LabeledGrid};
use crate::maps::{ScalarMap, ShiftField};

pub const MAGIC: [u8; 4] = *b"CTMP";
pub const VERSION: u8 = 1;
const DTYPE_F32: u8 = 0;
const DTYPE_U8: u8 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Tensor {
    F32 { dims: Vec<usize>, data: Vec<f32> },
    U8 { dims: Vec<usize>, data: Vec<u8> },
}

impl Tensor {
    pub fn f32(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        check_len(&dims, data.len())?;
        Ok(Tensor::F32 { dims, data })
    }

    pub fn u8(dims: Vec<usize>, data: Vec<u8>) -> Result<Self> {
        check_len(&dims, data.len())?;
        Ok(Tensor::U8 { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            Tensor::F32 { dims, .. } | Tensor::U8 { dims, .. } => dims,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let dims = self.dims();
        let (dtype, elem) = match self {
            Tensor::F32 { .. } => (DTYPE_F32, 4),
            Tensor::U8 { .. } => (DTYPE_U8, 1),
        };
        let count: usize = dims.iter().product();
        let mut out = Vec::with_capacity(7 + 4 * dims.len() + count * elem);
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(dtype);
        out.push(dims.len() as u8);
        for &d in dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        match self {
            Tensor::F32 { data, .. } => {
                for v in data {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            Tensor::U8 { data, .. } => out.extend_from_slice(data),
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = |need: usize| -> Result<()> {
            if bytes.len() < need {
                Err(Error::TruncatedPayload {
                    expected: need,
                    found: bytes.len(),
                })
            } else {
                Ok(())
            }
        };
        header(4)?;
        let magic: [u8; 4] = bytes[..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(Error::BadMagic(magic));
        }
        header(7)?;
        if bytes[4] != VERSION {
            return Err(Error::BadVersion(bytes[4]));
        }
        let dtype = bytes[5];
        let elem = match dtype {
            DTYPE_F32 => 4,
            DTYPE_U8 => 1,
            other => return Err(Error::UnsupportedDtype(other)),
        };
        let ndim = bytes[6] as usize;
        let start = 7 + 4 * ndim;
        header(start)?;
        let dims: Vec<usize> = bytes[7..start]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize)
            .collect();
        let expected = dims.iter().product::<usize>() * elem;
        let payload = &bytes[start..];
        if payload.len() < expected {
            return Err(Error::TruncatedPayload {
                expected,
                found: payload.len(),
            });
        }
        if payload.len() > expected {
            return Err(Error::TrailingBytes {
                expected,
                found: payload.len() - expected,
            });
        }
        Ok(match dtype {
            DTYPE_F32 => Tensor::F32 {
                dims,
                data: payload
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            },
            _ => Tensor::U8 {
                dims,
                data: payload.to_vec(),
            },
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    /// Values widened to `f32` regardless of dtype.
    pub fn to_f32_vec(&self) -> Vec<f32> {
        match self {
            Tensor::F32 { data, .. } => data.clone(),
            Tensor::U8 { data, .. } => data.iter().map(|&v| v as f32).collect(),
        }
    }

    fn expect_dims(&self, expected: &[usize]) -> Result<()> {
        if self.dims() != expected {
            return Err(Error::ShapeMismatch {
                expected: expected.to_vec(),
                found: self.dims().to_vec(),
            });
        }
        Ok(())
    }

    fn hw(&self) -> Result<(usize, usize)> {
        match self.dims() {
            &[h, w] if h > 0 && w > 0 => Ok((h, w)),
            other => Err(Error::ShapeMismatch {
                expected: vec![0, 0],
                found: other.to_vec(),
            }),
        }
    }

    pub fn to_scalar_map(&self) -> Result<ScalarMap<f32>> {
        let (h, w) = self.hw()?;
        ScalarMap::from_vec(h, w, self.to_f32_vec())
    }

    pub fn to_shift_field(&self) -> Result<ShiftField<f32>> {
        match self.dims() {
            &[h, w, 2] if h > 0 && w > 0 => {
                if let Tensor::U8 { .. } = self {
                    return Err(Error::UnsupportedDtype(DTYPE_U8));
                }
                ShiftField::from_interleaved(h, w, self.to_f32_vec())
            }
            other => Err(Error::ShapeMismatch {
                expected: vec![0, 0, 2],
                found: other.to_vec(),
            }),
        }
    }

    pub fn to_bitmask(&self) -> Result<BitMask> {
        let (h, w) = self.hw()?;
        BitMask::from_bits(h, w, self.to_f32_vec().iter().map(|&v| v != 0.0).collect())
    }

    pub fn to_labeled_grid(&self, height: usize, width: usize) -> Result<LabeledGrid> {
        self.expect_dims(&[height, width])?;
        let labels = self
            .to_f32_vec()
            .iter()
            .map(|&v| {
                if v >= 0.0 && v.fract() == 0.0 {
                    Ok(v as u32)
                } else {
                    Err(Error::DomainError(format!("invalid label value {v}")))
                }
            })
            .collect::<Result<Vec<u32>>>()?;
        LabeledGrid::from_labels(height, width, labels)
    }
}

fn check_len(dims: &[usize], len: usize) -> Result<()> {
    if dims.len() > u8::MAX as usize || dims.iter().any(|&d| d > u32::MAX as usize) {
        return Err(Error::InvalidArgument(format!("dims {dims:?} not representable")));
    }
    if dims.iter().product::<usize>() != len {
        return Err(Error::ShapeMismatch {
            expected: dims.to_vec(),
            found: vec![len],
        });
    }
    Ok(())
}

impl From<&ScalarMap<f32>> for Tensor {
    fn from(m: &ScalarMap<f32>) -> Self {
        Tensor::F32 {
            dims: vec![m.height(), m.width()],
            data: m.data().to_vec(),
        }
    }
}

impl From<&ShiftField<f32>> for Tensor {
    fn from(s: &ShiftField<f32>) -> Self {
        Tensor::F32 {
            dims: vec![s.height(), s.width(), 2],
            data: s.data().to_vec(),
        }
    }
}

impl From<&BitMask> for Tensor {
    fn from(m: &BitMask) -> Self {
        Tensor::U8 {
            dims: vec![m.height(), m.width()],
            data: m.bits().iter().map(|&b| b as u8).collect(),
        }
    }
}

/// Labels are stored as `f32`, exact up to 2^24.
impl From<&LabeledGrid> for Tensor {
    fn from(g: &LabeledGrid) -> Self {
        Tensor::F32 {
            dims: vec![g.height(), g.width()],
            data: g.labels().iter().map(|&l| l as f32).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_f32() {
        let t = Tensor::f32(vec![2, 3], vec![0.0, -1.5, 2.25, f32::MAX, 1e-30, 7.0]).unwrap();
        let bytes = t.to_bytes();
        assert_eq!(&bytes[..7], b"CTMP\x01\x00\x02");
        let back = Tensor::from_bytes(&bytes).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ctmp");
        let t = Tensor::u8(vec![4, 4], (0..16).collect()).unwrap();
        t.write(&path).unwrap();
        assert_eq!(Tensor::read(&path).unwrap(), t);
    }

    #[test]
    fn bad_magic() {
        let mut bytes = Tensor::u8(vec![1], vec![3]).unwrap().to_bytes();
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(matches!(Tensor::from_bytes(&bytes), Err(Error::BadMagic(m)) if &m == b"XXXX"));
    }

    #[test]
    fn bad_version_and_dtype() {
        let mut bytes = Tensor::u8(vec![1], vec![3]).unwrap().to_bytes();
        bytes[4] = 2;
        assert!(matches!(Tensor::from_bytes(&bytes), Err(Error::BadVersion(2))));
        bytes[4] = 1;
        bytes[5] = 9;
        assert!(matches!(Tensor::from_bytes(&bytes), Err(Error::UnsupportedDtype(9))));
    }

    #[test]
    fn truncated_payload() {
        let mut bytes = Tensor::u8(vec![4, 4], vec![0; 16]).unwrap().to_bytes();
        bytes.pop();
        assert!(matches!(
            Tensor::from_bytes(&bytes),
            Err(Error::TruncatedPayload { expected: 16, found: 15 })
        ));
        assert!(matches!(Tensor::from_bytes(b"CTM"), Err(Error::TruncatedPayload { .. })));
        bytes.extend_from_slice(&[0, 0]);
        assert!(matches!(Tensor::from_bytes(&bytes), Err(Error::TrailingBytes { .. })));
    }

    #[test]
    fn constructor_checks_length() {
        assert!(Tensor::f32(vec![2, 2], vec![0.0; 3]).is_err());
    }
}
