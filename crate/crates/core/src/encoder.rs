//! Text vectors, appearance vectors and their fusion into one classifier
//! input.
//!
//! The fused layout is the appearance vector followed by the text vector
//! scaled by `k`, so a sample has `appearance_dim + n` inputs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::datamodel::{binary_target, DatasetManifest, TextAnnotation};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::storage;
use crate::vocab::{normalize, Vocabulary};

pub const DEFAULT_APPEARANCE_DIM: usize = 2048;
pub const DEFAULT_K: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AppearanceVector {
    pub values: Vec<f32>,
}

impl AppearanceVector {
    pub fn new(values: Vec<f32>) -> Self {
        AppearanceVector { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Sparse per-image word counts over a vocabulary of size `n`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TextVector {
    n: usize,
    entries: BTreeMap<usize, u32>,
}

impl TextVector {
    pub fn zeros(n: usize) -> Self {
        TextVector {
            n,
            entries: BTreeMap::new(),
        }
    }

    /// Sparse vector from a dense count slice.
    pub fn from_dense(counts: &[u32]) -> Self {
        TextVector {
            n: counts.len(),
            entries: counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(i, &c)| (i, c))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.entries.get(&i).copied().unwrap_or(0)
    }

    /// Nonzero `(index, count)` pairs in ascending index order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.entries.iter().map(|(&i, &c)| (i, c))
    }

    pub fn total(&self) -> u64 {
        self.entries.values().map(|&c| u64::from(c)).sum()
    }

    pub fn to_dense(&self) -> Vec<u32> {
        let mut v = vec![0; self.n];
        for (i, c) in self.nonzero() {
            v[i] = c;
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub k: f64,
    pub appearance_dim: usize,
    pub n: usize,
}

impl FusionConfig {
    pub fn new(k: f64, appearance_dim: usize, n: usize) -> Result<Self> {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::Config(format!("fusion weight k must be finite and >= 0, got {k}")));
        }
        if appearance_dim == 0 || n == 0 {
            return Err(Error::Config("fusion dimensions must be >= 1".into()));
        }
        Ok(FusionConfig {
            k,
            appearance_dim,
            n,
        })
    }

    pub fn fused_dim(&self) -> usize {
        self.appearance_dim + self.n
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FusedVector {
    pub values: Vec<f64>,
}

impl FusedVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Which part of the fused input a classifier sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSource {
    Appearance,
    Text,
    Fused,
}

impl FeatureSource {
    pub fn input_dim(self, appearance_dim: usize, n: usize) -> usize {
        match self {
            FeatureSource::Appearance => appearance_dim,
            FeatureSource::Text => n,
            FeatureSource::Fused => appearance_dim + n,
        }
    }
}

impl std::str::FromStr for FeatureSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "appearance" => Ok(FeatureSource::Appearance),
            "text" => Ok(FeatureSource::Text),
            "fused" => Ok(FeatureSource::Fused),
            other => Err(Error::Config(format!(
                "unknown feature mode `{other}` (expected appearance, text or fused)"
            ))),
        }
    }
}

/// Counts, per vocabulary word, how many normalized tokens equal it.
pub fn encode_text(annotation: &TextAnnotation, vocab: &Vocabulary) -> TextVector {
    let mut v = TextVector::zeros(vocab.len());
    for raw in &annotation.tokens {
        for w in normalize(raw) {
            if let Some(i) = vocab.index_of(&w) {
                *v.entries.entry(i).or_insert(0) += 1;
            }
        }
    }
    v
}

pub fn fuse(appearance: &AppearanceVector, text: &TextVector, cfg: &FusionConfig) -> Result<FusedVector> {
    check_dims(appearance.dim(), text.len(), cfg)?;
    let mut values = Vec::with_capacity(cfg.fused_dim());
    values.extend(appearance.values.iter().map(|&x| f64::from(x)));
    values.resize(cfg.fused_dim(), 0.0);
    let text_segment = &mut values[cfg.appearance_dim..];
    for (i, c) in text.nonzero() {
        text_segment[i] = cfg.k * f64::from(c);
    }
    Ok(FusedVector { values })
}

/// [`fuse`] over a dense count slice.
pub fn fuse_dense(appearance: &AppearanceVector, text: &[u32], cfg: &FusionConfig) -> Result<FusedVector> {
    check_dims(appearance.dim(), text.len(), cfg)?;
    let values = appearance
        .values
        .iter()
        .map(|&x| f64::from(x))
        .chain(text.iter().map(|&c| cfg.k * f64::from(c)))
        .collect();
    Ok(FusedVector { values })
}

fn check_dims(appearance_dim: usize, n: usize, cfg: &FusionConfig) -> Result<()> {
    if appearance_dim != cfg.appearance_dim {
        return Err(Error::DimensionMismatch {
            context: "appearance vector",
            expected: cfg.appearance_dim,
            actual: appearance_dim,
        });
    }
    if n != cfg.n {
        return Err(Error::DimensionMismatch {
            context: "text vector",
            expected: cfg.n,
            actual: n,
        });
    }
    Ok(())
}

/// A manifest loaded into memory: appearance rows, sparse text vectors and
/// binary targets, all in manifest order.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub ids: Vec<String>,
    pub appearance: Matrix,
    pub text: Vec<TextVector>,
    pub targets: Vec<u8>,
    pub fusion: FusionConfig,
}

impl EncodedDataset {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn fused_row(&self, i: usize) -> FusedVector {
        let mut values = Vec::with_capacity(self.fusion.fused_dim());
        self.write_row(i, FeatureSource::Fused, &mut values);
        FusedVector { values }
    }

    /// Classifier inputs for the given feature source. The text segment is
    /// scaled by `k` only when fused; text-only inputs are raw counts.
    pub fn design_matrix(&self, source: FeatureSource) -> Matrix {
        self.design_matrix_rows(source, &(0..self.len()).collect::<Vec<_>>())
    }

    pub fn design_matrix_rows(&self, source: FeatureSource, rows: &[usize]) -> Matrix {
        let cols = source.input_dim(self.fusion.appearance_dim, self.fusion.n);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for &i in rows {
            self.write_row(i, source, &mut data);
        }
        Matrix::from_vec(rows.len(), cols, data)
    }

    fn write_row(&self, i: usize, source: FeatureSource, out: &mut Vec<f64>) {
        if source != FeatureSource::Text {
            out.extend_from_slice(self.appearance.row(i));
        }
        if source == FeatureSource::Appearance {
            return;
        }
        let scale = if source == FeatureSource::Fused { self.fusion.k } else { 1.0 };
        let start = out.len();
        out.resize(start + self.fusion.n, 0.0);
        for (j, c) in self.text[i].nonzero() {
            out[start + j] = scale * f64::from(c);
        }
    }

    pub fn targets_of(&self, rows: &[usize]) -> Vec<u8> {
        rows.iter().map(|&i| self.targets[i]).collect()
    }
}

/// Loads every record's feature and annotation files and encodes them.
/// Errors name the offending sample id.
pub fn encode_dataset(manifest: &DatasetManifest, vocab: &Vocabulary, cfg: &FusionConfig) -> Result<EncodedDataset> {
    if vocab.len() != cfg.n {
        return Err(Error::DimensionMismatch {
            context: "vocabulary size",
            expected: cfg.n,
            actual: vocab.len(),
        });
    }
    let mut appearance = Vec::with_capacity(manifest.len() * cfg.appearance_dim);
    let mut text = Vec::with_capacity(manifest.len());
    for r in &manifest.records {
        let load = || -> Result<(AppearanceVector, TextAnnotation)> {
            let a = storage::read_feature(manifest.resolve(&r.feature_ref))?;
            if a.dim() != cfg.appearance_dim {
                return Err(Error::DimensionMismatch {
                    context: "appearance vector",
                    expected: cfg.appearance_dim,
                    actual: a.dim(),
                });
            }
            let t = storage::read_annotation_for(manifest.resolve(&r.annotation_ref), &r.id)?;
            Ok((a, t))
        };
        let (a, t) = load().map_err(|e| e.for_sample(&r.id))?;
        appearance.extend(a.values.iter().map(|&x| f64::from(x)));
        text.push(encode_text(&t, vocab));
    }
    Ok(EncodedDataset {
        ids: manifest.records.iter().map(|r| r.id.clone()).collect(),
        appearance: Matrix::from_vec(manifest.len(), cfg.appearance_dim, appearance),
        text,
        targets: manifest.records.iter().map(binary_target).collect(),
        fusion: *cfg,
    })
}
