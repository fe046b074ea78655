//! Seeded synthetic pools in the on-disk layout the toolkit consumes.
//!
//! The class signal is split across modalities. Each sample is drawn as
//! either *appearance-informative* or *text-informative* with equal
//! probability:
//!
//! * appearance-informative: the appearance vector is shifted by
//!   `±signal` along a fixed unit direction (sign from the label), and the
//!   tokens are label-independent filler (or empty, mimicking OCR misses);
//! * text-informative: the appearance vector is pure label-independent
//!   noise, and the tokens contain label-specific cue words mixed with
//!   filler.
//!
//! A classifier that sees only one modality is therefore right on its half
//! and guessing on the other, about 75% on a balanced pool, while a
//! classifier on the fused input can be right on both halves.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::datamodel::{CategoryLabel, DatasetManifest, SampleRecord, TextAnnotation};
use crate::encoder::AppearanceVector;
use crate::error::{Error, Result};
use crate::storage;

pub const POSITIVE_CUES: [&str; 10] = [
    "vote", "elect", "campaign", "senator", "candidate", "ballot", "president", "congress", "paid", "rally",
];
pub const NEGATIVE_CUES: [&str; 10] = [
    "concert", "festival", "sale", "tour", "museum", "movie", "tickets", "live", "discount", "exhibit",
];
pub const FILLER: [&str; 30] = [
    "the", "and", "of", "to", "in", "for", "new", "city", "world", "2020", "now", "with", "more", "our", "all",
    "free", "join", "today", "people", "america", "on", "at", "news", "info", "www", "com", "day", "best",
    "one", "future",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub counts: BTreeMap<CategoryLabel, usize>,
    pub appearance_dim: usize,
    /// Shift along the signal direction, in noise standard deviations.
    pub signal: f64,
    /// Number of leading dimensions spanned by the signal direction, capped
    /// at `appearance_dim`.
    pub signal_dims: usize,
    /// Probability that an appearance-informative sample has no tokens.
    pub ocr_miss_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            counts: BTreeMap::new(),
            appearance_dim: crate::encoder::DEFAULT_APPEARANCE_DIM,
            signal: 3.0,
            signal_dims: 8,
            ocr_miss_rate: 0.3,
            seed: 0,
        }
    }
}

/// One generated sample held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSample {
    pub record: SampleRecord,
    pub appearance: AppearanceVector,
    pub annotation: TextAnnotation,
    pub appearance_informative: bool,
}

fn short(c: CategoryLabel) -> &'static str {
    match c {
        CategoryLabel::PoliticalPoster => "pos",
        CategoryLabel::PoliticalOther => "pol",
        CategoryLabel::OffTopic => "off",
        CategoryLabel::Natural => "nat",
        CategoryLabel::NonPoliticalPoster => "npp",
    }
}

fn shout(word: &str, rng: &mut impl Rng) -> String {
    match rng.random_range(0..4) {
        0 => word.to_uppercase(),
        1 => format!("{word}!"),
        _ => word.to_string(),
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<Vec<SynthSample>> {
    if cfg.appearance_dim == 0 || cfg.signal_dims == 0 {
        return Err(Error::Config("appearance_dim and signal_dims must be >= 1".into()));
    }
    let signal_dims = cfg.signal_dims.min(cfg.appearance_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let per_dim = cfg.signal / (signal_dims as f64).sqrt();
    let mut out = Vec::new();
    for (&category, &n) in &cfg.counts {
        let y = category.is_positive();
        for i in 0..n {
            let id = format!("{}-{i:05}", short(category));
            let appearance_informative = rng.random_bool(0.5);
            let mut values: Vec<f32> = (0..cfg.appearance_dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal) as f32)
                .collect();
            if appearance_informative {
                let shift = if y { per_dim } else { -per_dim };
                for v in &mut values[..signal_dims] {
                    *v += shift as f32;
                }
            }

            let mut tokens = Vec::new();
            let miss = appearance_informative && rng.random_bool(cfg.ocr_miss_rate);
            if !miss {
                for _ in 0..rng.random_range(3..=8) {
                    let w = *FILLER.choose(&mut rng).unwrap();
                    tokens.push(shout(w, &mut rng));
                }
                if !appearance_informative {
                    let cues: &[&str] = if y { &POSITIVE_CUES } else { &NEGATIVE_CUES };
                    for _ in 0..rng.random_range(2..=4) {
                        let w = *cues.choose(&mut rng).unwrap();
                        let at = rng.random_range(0..=tokens.len());
                        tokens.insert(at, shout(w, &mut rng));
                    }
                }
            }

            out.push(SynthSample {
                record: SampleRecord {
                    image_path: None,
                    category,
                    annotation_ref: PathBuf::from("annotations").join(format!("{id}.json")),
                    feature_ref: PathBuf::from("features").join(format!("{id}.avec")),
                    id: id.clone(),
                },
                appearance: AppearanceVector::new(values),
                annotation: TextAnnotation { id, tokens },
                appearance_informative,
            });
        }
    }
    Ok(out)
}

/// Generates a pool and writes `manifest.jsonl`, `features/` and
/// `annotations/` under `dir`. Returns the manifest path.
pub fn write_pool(cfg: &SynthConfig, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    for sub in ["features", "annotations"] {
        let p = dir.join(sub);
        fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    let samples = generate(cfg)?;
    for s in &samples {
        storage::write_feature(dir.join(&s.record.feature_ref), &s.appearance)?;
        storage::write_annotation(dir.join(&s.record.annotation_ref), &s.annotation)?;
    }
    let manifest = DatasetManifest::new(samples.into_iter().map(|s| s.record).collect(), dir)?;
    let path = dir.join("manifest.jsonl");
    manifest.save(&path)?;
    Ok(path)
}
