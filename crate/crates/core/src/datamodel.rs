//! Domain types shared across the toolkit: the five-way category taxonomy,
//! sample records and JSON Lines dataset manifests.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Category of a labeled image. Only [`CategoryLabel::PoliticalPoster`] is
/// the positive class; the rest are the negative categories that make up
/// the dataset setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CategoryLabel {
    PoliticalPoster,
    PoliticalOther,
    OffTopic,
    Natural,
    NonPoliticalPoster,
}

impl CategoryLabel {
    pub const ALL: [CategoryLabel; 5] = [
        CategoryLabel::PoliticalOther,
        CategoryLabel::PoliticalPoster,
        CategoryLabel::OffTopic,
        CategoryLabel::Natural,
        CategoryLabel::NonPoliticalPoster,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CategoryLabel::PoliticalPoster => "PoliticalPoster",
            CategoryLabel::PoliticalOther => "PoliticalOther",
            CategoryLabel::OffTopic => "OffTopic",
            CategoryLabel::Natural => "Natural",
            CategoryLabel::NonPoliticalPoster => "NonPoliticalPoster",
        }
    }

    pub fn is_positive(self) -> bool {
        self == CategoryLabel::PoliticalPoster
    }
}

impl fmt::Display for CategoryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CategoryLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CategoryLabel::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownCategory(s.to_string()))
    }
}

/// One labeled image. Paths are stored as written in the manifest; use
/// [`DatasetManifest::resolve`] to turn relative references into paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub image_path: Option<PathBuf>,
    pub category: CategoryLabel,
    pub annotation_ref: PathBuf,
    pub feature_ref: PathBuf,
}

impl SampleRecord {
    pub fn binary_target(&self) -> u8 {
        binary_target(self)
    }
}

/// OCR output for one image.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TextAnnotation {
    pub id: String,
    pub tokens: Vec<String>,
}

impl TextAnnotation {
    pub fn new(id: impl Into<String>, tokens: impl IntoIterator<Item = impl Into<String>>) -> Self {
        TextAnnotation {
            id: id.into(),
            tokens: tokens.into_iter().map(Into::into).collect(),
        }
    }
}

/// 1 for political posters, 0 for every other category.
pub fn binary_target(record: &SampleRecord) -> u8 {
    u8::from(record.category.is_positive())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    pub records: Vec<SampleRecord>,
    /// Directory that relative references are resolved against.
    pub base_dir: PathBuf,
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    #[serde(default)]
    image_path: Option<PathBuf>,
    category: String,
    annotation_ref: PathBuf,
    feature_ref: PathBuf,
}

impl DatasetManifest {
    /// Builds a manifest, rejecting duplicate ids.
    pub fn new(records: Vec<SampleRecord>, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
        }
        Ok(DatasetManifest {
            records,
            base_dir: base_dir.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn counts_by_category(&self) -> BTreeMap<CategoryLabel, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.records {
            *counts.entry(r.category).or_insert(0) += 1;
        }
        counts
    }

    pub fn targets(&self) -> Vec<u8> {
        self.records.iter().map(binary_target).collect()
    }

    pub fn resolve(&self, reference: &Path) -> PathBuf {
        if reference.is_absolute() {
            reference.to_path_buf()
        } else {
            self.base_dir.join(reference)
        }
    }

    /// Writes the manifest as JSON Lines. References are written verbatim.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

/// Parses a JSON Lines manifest. Blank lines are skipped; relative
/// references resolve against the manifest's directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(SampleRecord {
            category: raw.category.parse()?,
            id: raw.id,
            image_path: raw.image_path,
            annotation_ref: raw.annotation_ref,
            feature_ref: raw.feature_ref,
        });
    }
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    DatasetManifest::new(records, base_dir)
}
