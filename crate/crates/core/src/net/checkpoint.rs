//! Binary model checkpoints.
//!
//! Layout, little-endian throughout: 8-byte magic `PFNET1\0\0`, u32 layer
//! count, then `(in_dim, out_dim)` as u32 pairs per layer, then every
//! layer's weights (row-major, `out_dim x in_dim`) followed by its bias as
//! f64.

use std::fs;
use std::path::Path;

use super::mlp::{DenseLayer, Mlp};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"PFNET1\0\0";

pub fn encode_checkpoint(model: &Mlp) -> Vec<u8> {
    let layers = model.layers();
    let mut buf = Vec::with_capacity(12 + 8 * layers.len() + 8 * model.num_params());
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&(layers.len() as u32).to_le_bytes());
    for l in layers {
        buf.extend_from_slice(&(l.in_dim as u32).to_le_bytes());
        buf.extend_from_slice(&(l.out_dim as u32).to_le_bytes());
    }
    for l in layers {
        for v in l.weights.iter().chain(&l.bias) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    buf
}

pub fn decode_checkpoint(bytes: &[u8], path: &Path) -> Result<Mlp> {
    let malformed = |message: String| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message,
    };
    if bytes.len() < 12 || &bytes[..8] != CHECKPOINT_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            found: bytes[..bytes.len().min(8)].to_vec(),
            expected: CHECKPOINT_MAGIC,
        });
    }
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as usize;
    let count = u32_at(8);
    let header_len = 12 + 8 * count;
    if bytes.len() < header_len {
        return Err(malformed(format!("header declares {count} layers but file ends early")));
    }
    let dims: Vec<(usize, usize)> = (0..count)
        .map(|i| (u32_at(12 + 8 * i), u32_at(16 + 8 * i)))
        .collect();
    let params: usize = dims.iter().map(|&(i, o)| i * o + o).sum();
    let expected = header_len + 8 * params;
    if bytes.len() != expected {
        return Err(Error::LengthMismatch {
            path: path.to_path_buf(),
            declared: params,
            expected_len: expected,
            actual_len: bytes.len(),
        });
    }
    let mut values = bytes[header_len..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut layers = Vec::with_capacity(count);
    for (in_dim, out_dim) in dims {
        let weights: Vec<f64> = values.by_ref().take(in_dim * out_dim).collect();
        let bias: Vec<f64> = values.by_ref().take(out_dim).collect();
        layers.push(DenseLayer {
            in_dim,
            out_dim,
            weights,
            bias,
        });
    }
    let model = Mlp::from_layers(layers).map_err(|e| malformed(e.to_string()))?;
    if !model.is_finite() {
        return Err(malformed("non-finite parameter".into()));
    }
    Ok(model)
}

pub fn save_checkpoint(model: &Mlp, path: impl AsRef<Path>) -> Result<()> {
    crate::storage::write_atomic(path.as_ref(), &encode_checkpoint(model))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Mlp> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes, path)
}
