//! Binary checkpoint format (all integers and floats little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `LSTM` |
//! | 4     | format version (u32) |
//! | 4+4+4 | input dim d, hidden size h, output size (always 3) as u32 |
//! | 8·n   | parameters as f64, tensors in [`LstmParams::tensors`] order, row-major |
//! | 8     | metadata length L (u64) |
//! | L     | UTF-8 metadata (JSON) |

use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use super::params::{LstmParams, OUTPUT_SIZE};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"LSTM";
pub const CHECKPOINT_VERSION: u32 = 1;
const HEADER_LEN: usize = 20;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("bad magic bytes {0:?}, expected \"LSTM\"")]
    BadMagic([u8; 4]),
    #[error("unsupported checkpoint version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("truncated checkpoint: expected at least {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("metadata is not valid UTF-8")]
    BadMetadata,
}

pub fn write_checkpoint(params: &LstmParams, meta: &str) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * params.num_params() + 8 + meta.len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    for dim in [params.input_dim(), params.hidden(), OUTPUT_SIZE] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for v in params.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(meta.len() as u64).to_le_bytes());
    out.extend_from_slice(meta.as_bytes());
    out
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

pub fn read_checkpoint(bytes: &[u8]) -> Result<(LstmParams, String), CheckpointError> {
    let need = |expected: usize| {
        if bytes.len() < expected {
            Err(CheckpointError::Truncated {
                expected,
                actual: bytes.len(),
            })
        } else {
            Ok(())
        }
    };
    need(4)?;
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if &magic != CHECKPOINT_MAGIC {
        return Err(CheckpointError::BadMagic(magic));
    }
    need(HEADER_LEN)?;
    let version = u32_at(bytes, 4);
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::VersionMismatch {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let (d, h, out) = (u32_at(bytes, 8) as usize, u32_at(bytes, 12) as usize, u32_at(bytes, 16) as usize);
    if out != OUTPUT_SIZE {
        return Err(CheckpointError::ShapeMismatch(format!("output size {out}, expected {OUTPUT_SIZE}")));
    }
    if d == 0 || h == 0 {
        return Err(CheckpointError::ShapeMismatch(format!("degenerate dimensions d={d} h={h}")));
    }
    // Header values are untrusted: reject sizes whose byte count overflows.
    let params_end = d
        .checked_add(h)
        .and_then(|dh| dh.checked_add(1))
        .and_then(|rows| rows.checked_mul(h))
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add((h + 1) * OUTPUT_SIZE))
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .filter(|end| end.checked_add(8).is_some())
        .ok_or_else(|| CheckpointError::ShapeMismatch(format!("dimensions d={d} h={h} are too large")))?;
    need(params_end + 8)?;

    let mut params = LstmParams::zeros(d, h);
    let mut at = HEADER_LEN;
    for tensor in params.tensors_mut() {
        for v in tensor.iter_mut() {
            *v = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
            at += 8;
        }
    }
    let meta_len = u64::from_le_bytes(bytes[params_end..params_end + 8].try_into().unwrap()) as usize;
    let meta_start = params_end + 8;
    let end = meta_start
        .checked_add(meta_len)
        .ok_or_else(|| CheckpointError::ShapeMismatch("metadata length overflows".into()))?;
    need(end)?;
    if bytes.len() > end {
        return Err(CheckpointError::ShapeMismatch(format!(
            "{} trailing bytes after metadata",
            bytes.len() - end
        )));
    }
    let meta = std::str::from_utf8(&bytes[meta_start..end])
        .map_err(|_| CheckpointError::BadMetadata)?
        .to_string();
    Ok((params, meta))
}

/// Writes to a sibling temporary file and renames it into place.
pub fn save_checkpoint(path: impl AsRef<Path>, params: &LstmParams, meta: &str) -> Result<(), CheckpointError> {
    let path = path.as_ref();
    let io = |e| CheckpointError::Io(path.display().to_string(), e);
    let tmp = path.with_extension("tmp-ckpt");
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(&write_checkpoint(params, meta)).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(LstmParams, String), CheckpointError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| CheckpointError::Io(path.display().to_string(), e))?;
    read_checkpoint(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lstm::init_params;

    #[test]
    fn round_trip() {
        let mut p = init_params(5, 7, 3);
        p.head_b = vec![0.1, -0.2, f64::MIN_POSITIVE];
        let bytes = write_checkpoint(&p, "{\"seed\":3}");
        let (q, meta) = read_checkpoint(&bytes).unwrap();
        assert_eq!(meta, "{\"seed\":3}");
        for (a, b) in p.iter().zip(q.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!((q.input_dim(), q.hidden()), (5, 7));
    }

    #[test]
    fn header_layout() {
        let bytes = write_checkpoint(&init_params(2, 3, 1), "");
        assert_eq!(&bytes[..4], b"LSTM");
        assert_eq!(bytes[4..8], 1u32.to_le_bytes());
        assert_eq!(bytes[8..12], 2u32.to_le_bytes());
        assert_eq!(bytes[12..16], 3u32.to_le_bytes());
        assert_eq!(bytes[16..20], 3u32.to_le_bytes());
        assert_eq!(bytes.len(), 20 + 8 * LstmParams::count_for(2, 3) + 8);
    }

    #[test]
    fn error_classes() {
        let good = write_checkpoint(&init_params(2, 3, 1), "m");
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(read_checkpoint(&bad), Err(CheckpointError::BadMagic(_))));

        let mut bad = good.clone();
        bad[4] = 9;
        assert!(matches!(
            read_checkpoint(&bad),
            Err(CheckpointError::VersionMismatch { found: 9, .. })
        ));

        let mut bad = good.clone();
        bad[16] = 4;
        assert!(matches!(read_checkpoint(&bad), Err(CheckpointError::ShapeMismatch(_))));

        let cut = &good[..100];
        match read_checkpoint(cut) {
            Err(CheckpointError::Truncated { expected, actual }) => {
                assert_eq!(actual, 100);
                assert_eq!(expected, 20 + 8 * LstmParams::count_for(2, 3) + 8);
            }
            other => panic!("unexpected {other:?}"),
        }

        let mut long = good.clone();
        long.push(0);
        assert!(matches!(read_checkpoint(&long), Err(CheckpointError::ShapeMismatch(_))));
    }

    #[test]
    fn huge_header_dimensions_fail_cleanly() {
        let mut bad = write_checkpoint(&LstmParams::zeros(2, 3), "");
        bad[8..12].copy_from_slice(&u32::MAX.to_le_bytes());
        bad[12..16].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(read_checkpoint(&bad).is_err());
    }
}
