//! Binary container for trained head parameters.
//!
//! ```text
//! 0   4  magic "SKHP"
//! 4   4  version (u32 LE, = 1)
//! 8   4  input width
//! 12  4  hidden width
//! 16  4  auxiliary taps
//! 20  .. parameters as f64 LE, in SaliencyHead order
//! ```

use std::fs;
use std::path::Path;

use super::{check_magic, read_u32};
use crate::error::{Error, Result};
use crate::trainer::SaliencyHead;

pub const MAGIC: [u8; 4] = *b"SKHP";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 20;

pub fn encode_head(head: &SaliencyHead) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * head.params().len());
    out.extend_from_slice(&MAGIC);
    for v in [VERSION, head.input_width() as u32, head.hidden_width() as u32, head.aux_count() as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for p in head.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn decode_head(bytes: &[u8]) -> Result<SaliencyHead> {
    check_magic(bytes, MAGIC, HEADER_LEN)?;
    let version = read_u32(bytes, 4);
    if version != VERSION {
        return Err(Error::VersionMismatch {
            offset: 4,
            expected: VERSION,
            found: version,
        });
    }
    let (inputs, hidden, aux) = (read_u32(bytes, 8), read_u32(bytes, 12), read_u32(bytes, 16));
    for (field, offset, value) in [("inputs", 8, inputs), ("hidden", 12, hidden)] {
        if value == 0 {
            return Err(Error::InvalidHeader { field, offset, value });
        }
    }
    if aux > 3 {
        return Err(Error::InvalidHeader {
            field: "aux",
            offset: 16,
            value: aux,
        });
    }
    let (inputs, hidden, aux) = (inputs as usize, hidden as usize, aux as usize);
    let count = hidden
        .checked_mul(inputs)
        .and_then(|v| v.checked_add(2 * hidden + 1 + aux * (hidden + 1)))
        .ok_or(Error::InvalidHeader {
            field: "inputs",
            offset: 8,
            value: inputs as u32,
        })?;
    let expected = HEADER_LEN + 8 * count;
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
    let mut params = Vec::with_capacity(count);
    for (k, chunk) in bytes[HEADER_LEN..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        if !v.is_finite() {
            return Err(Error::NonFinitePayload {
                offset: HEADER_LEN + 8 * k,
            });
        }
        params.push(v);
    }
    SaliencyHead::from_params(inputs, hidden, aux, params)
}

pub fn read_head(path: impl AsRef<Path>) -> Result<SaliencyHead> {
    decode_head(&fs::read(path)?)
}

pub fn write_head(head: &SaliencyHead, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_head(head))?;
    Ok(())
}
