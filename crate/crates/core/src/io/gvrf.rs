//! GVRF patch-feature files.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "GVRF"
//! 4       4     version (u32 LE, = 1)
//! 8       4     grid_h  (u32 LE, > 0)
//! 12      4     grid_w  (u32 LE, > 0)
//! 16      4     dim     (u32 LE, > 0)
//! 20      ...   grid_h * grid_w * dim f32 LE, patch-row, patch-col, component
//! ```

use std::fs;
use std::path::Path;

use super::{check_magic, read_u32};
use crate::error::{Error, Result};
use crate::grid::FeatureField;

pub const MAGIC: [u8; 4] = *b"GVRF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureFileHeader {
    pub version: u32,
    pub grid_h: u32,
    pub grid_w: u32,
    pub dim: u32,
}

impl FeatureFileHeader {
    /// Total file length implied by the header.
    pub fn file_len(&self) -> Option<usize> {
        (self.grid_h as usize)
            .checked_mul(self.grid_w as usize)?
            .checked_mul(self.dim as usize)?
            .checked_mul(4)?
            .checked_add(HEADER_LEN)
    }
}

/// Parse and validate the fixed-size header.
pub fn decode_header(bytes: &[u8]) -> Result<FeatureFileHeader> {
    check_magic(bytes, MAGIC, HEADER_LEN)?;
    let version = read_u32(bytes, 4);
    if version != VERSION {
        return Err(Error::VersionMismatch {
            offset: 4,
            expected: VERSION,
            found: version,
        });
    }
    let header = FeatureFileHeader {
        version,
        grid_h: read_u32(bytes, 8),
        grid_w: read_u32(bytes, 12),
        dim: read_u32(bytes, 16),
    };
    for (field, offset, value) in [
        ("grid_h", 8, header.grid_h),
        ("grid_w", 12, header.grid_w),
        ("dim", 16, header.dim),
    ] {
        if value == 0 {
            return Err(Error::InvalidHeader { field, offset, value });
        }
    }
    if header.file_len().is_none() {
        return Err(Error::InvalidHeader {
            field: "dim",
            offset: 16,
            value: header.dim,
        });
    }
    Ok(header)
}

pub fn decode_features(bytes: &[u8]) -> Result<FeatureField> {
    let header = decode_header(bytes)?;
    let expected = header.file_len().expect("validated by decode_header");
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::TrailingBytes {
            expected,
            actual: bytes.len(),
        });
    }
    let mut data = Vec::with_capacity((expected - HEADER_LEN) / 4);
    for (k, chunk) in bytes[HEADER_LEN..].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
        if !v.is_finite() {
            return Err(Error::NonFinitePayload {
                offset: HEADER_LEN + 4 * k,
            });
        }
        data.push(f64::from(v));
    }
    FeatureField::new(header.grid_h as usize, header.grid_w as usize, header.dim as usize, data)
}

/// Serialize `field`, narrowing every value to `f32`. Values that overflow
/// `f32` are rejected.
pub fn encode_features(field: &FeatureField) -> Result<Vec<u8>> {
    let dims = [field.grid_h(), field.grid_w(), field.dim()].map(u32::try_from);
    let [Ok(grid_h), Ok(grid_w), Ok(dim)] = dims else {
        return Err(Error::InvalidArgument("feature field dimensions exceed u32".into()));
    };
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * field.data().len());
    out.extend_from_slice(&MAGIC);
    for v in [VERSION, grid_h, grid_w, dim] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for (index, &v) in field.data().iter().enumerate() {
        let narrow = v as f32;
        if !narrow.is_finite() {
            return Err(Error::NonFinite {
                what: "feature field narrowed to f32",
                index,
                value: v,
            });
        }
        out.extend_from_slice(&narrow.to_le_bytes());
    }
    Ok(out)
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureField> {
    decode_features(&fs::read(path)?)
}

pub fn write_features(field: &FeatureField, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_features(field)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FeatureField {
        FeatureField::new(2, 3, 2, (0..12).map(|k| k as f64 * 0.25 - 1.0).collect()).unwrap()
    }

    #[test]
    fn layout_is_little_endian() {
        let bytes = encode_features(&sample()).unwrap();
        assert_eq!(&bytes[..4], b"GVRF");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(&bytes[8..12], &[2, 0, 0, 0]);
        assert_eq!(&bytes[12..16], &[3, 0, 0, 0]);
        assert_eq!(&bytes[16..20], &[2, 0, 0, 0]);
        assert_eq!(&bytes[20..24], &(-1.0f32).to_le_bytes());
        assert_eq!(bytes.len(), 20 + 12 * 4);
    }

    #[test]
    fn zero_dimension_names_the_field() {
        let mut bytes = encode_features(&sample()).unwrap();
        bytes[12..16].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(
            decode_features(&bytes),
            Err(Error::InvalidHeader { field: "grid_w", offset: 12, value: 0 })
        ));
    }

    #[test]
    fn short_header_is_truncation() {
        let bytes = encode_features(&sample()).unwrap();
        assert!(matches!(
            decode_features(&bytes[..10]),
            Err(Error::Truncated { expected: 20, actual: 10 })
        ));
        assert!(matches!(
            decode_features(b"GV"),
            Err(Error::Truncated { expected: 20, actual: 2 })
        ));
    }

    #[test]
    fn overflowing_value_is_rejected_on_write() {
        let field = FeatureField::new(1, 1, 1, vec![1e300]).unwrap();
        assert!(matches!(encode_features(&field), Err(Error::NonFinite { .. })));
    }
}
