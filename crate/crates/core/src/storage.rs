//! On-disk formats exchanged with the feature extractor.
//!
//! Feature file layout (all little-endian):
//!
//! | offset | size    | content                       |
//! |--------|---------|-------------------------------|
//! | 0      | 8       | magic `AVEC0001`              |
//! | 8      | 4       | `dim` as u32                  |
//! | 12     | 4 * dim | payload as IEEE-754 binary32  |
//!
//! Annotation files are JSON objects `{"id": ..., "tokens": [...]}`.
//! Both are written atomically through a temporary file in the target
//! directory followed by a rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::datamodel::TextAnnotation;
use crate::encoder::AppearanceVector;
use crate::error::{Error, Result};

pub const FEATURE_MAGIC: &[u8; 8] = b"AVEC0001";
pub const FEATURE_HEADER_LEN: usize = 12;

/// Byte length of a feature file holding `dim` values.
pub fn feature_file_len(dim: usize) -> usize {
    FEATURE_HEADER_LEN + 4 * dim
}

pub fn encode_feature(v: &AppearanceVector) -> Result<Vec<u8>> {
    if let Some(index) = v.values.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let dim = u32::try_from(v.values.len())
        .map_err(|_| Error::Config(format!("feature dim {} exceeds u32", v.values.len())))?;
    let mut buf = Vec::with_capacity(feature_file_len(v.values.len()));
    buf.extend_from_slice(FEATURE_MAGIC);
    buf.extend_from_slice(&dim.to_le_bytes());
    for x in &v.values {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    Ok(buf)
}

pub fn decode_feature(bytes: &[u8], path: &Path) -> Result<AppearanceVector> {
    if bytes.len() < FEATURE_HEADER_LEN || &bytes[..8] != FEATURE_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            found: bytes[..bytes.len().min(8)].to_vec(),
            expected: FEATURE_MAGIC,
        });
    }
    let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected_len = feature_file_len(dim);
    if bytes.len() != expected_len {
        return Err(Error::LengthMismatch {
            path: path.to_path_buf(),
            declared: dim,
            expected_len,
            actual_len: bytes.len(),
        });
    }
    let values: Vec<f32> = bytes[FEATURE_HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(index) = values.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(AppearanceVector { values })
}

pub fn write_feature(path: impl AsRef<Path>, v: &AppearanceVector) -> Result<()> {
    write_atomic(path.as_ref(), &encode_feature(v)?)
}

pub fn read_feature(path: impl AsRef<Path>) -> Result<AppearanceVector> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_feature(&bytes, path)
}

pub fn write_annotation(path: impl AsRef<Path>, a: &TextAnnotation) -> Result<()> {
    let mut body = serde_json::to_vec(a)?;
    body.push(b'\n');
    write_atomic(path.as_ref(), &body)
}

pub fn read_annotation(path: impl AsRef<Path>) -> Result<TextAnnotation> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Reads an annotation referenced by the manifest record `expected_id`.
/// A differing id is logged, not rejected, since annotations may be
/// regenerated independently of the manifest.
pub fn read_annotation_for(path: impl AsRef<Path>, expected_id: &str) -> Result<TextAnnotation> {
    let path = path.as_ref();
    let a = read_annotation(path)?;
    if a.id != expected_id {
        log::warn!(
            "{}: annotation id `{}` does not match manifest id `{}`",
            path.display(),
            a.id,
            expected_id
        );
    }
    Ok(a)
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = temp_sibling(path);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

fn temp_sibling(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!(".{name}.{}.tmp", std::process::id()))
}
