use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datamodel::{CategoryLabel, DatasetManifest};
use crate::error::{Error, Result};

/// Requested sample count per category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSetup {
    pub index: String,
    pub counts: BTreeMap<CategoryLabel, usize>,
    pub seed: u64,
}

/// The five reference compositions, as
/// (political, positive, off-topic, natural, non-political poster).
pub const PRESETS: [[usize; 5]; 5] = [
    [8500, 3000, 1500, 0, 0],
    [5500, 3000, 1500, 3000, 0],
    [3500, 3000, 1500, 5000, 0],
    [0, 3000, 0, 8200, 1800],
    [0, 3000, 1500, 0, 1800],
];

/// Category order of the preset columns.
pub const PRESET_COLUMNS: [CategoryLabel; 5] = [
    CategoryLabel::PoliticalOther,
    CategoryLabel::PoliticalPoster,
    CategoryLabel::OffTopic,
    CategoryLabel::Natural,
    CategoryLabel::NonPoliticalPoster,
];

/// Short column names used in rendered tables and `--counts` flags.
pub fn column_name(c: CategoryLabel) -> &'static str {
    match c {
        CategoryLabel::PoliticalOther => "Political",
        CategoryLabel::PoliticalPoster => "Positive",
        CategoryLabel::OffTopic => "Off-Topic",
        CategoryLabel::Natural => "Natural",
        CategoryLabel::NonPoliticalPoster => "Poster",
    }
}

/// Accepts either the variant name or the short column name.
pub fn parse_category(s: &str) -> Result<CategoryLabel> {
    PRESET_COLUMNS
        .into_iter()
        .find(|&c| column_name(c).eq_ignore_ascii_case(s))
        .map_or_else(|| s.parse(), Ok)
}

/// `floor(count * scale)`, kept at 1 or more for categories that are
/// nonzero at full scale.
pub fn scale_count(count: usize, scale: f64) -> usize {
    if count == 0 {
        return 0;
    }
    // epsilon absorbs representation error such as 8500 * 0.02
    let scaled = (count as f64 * scale + 1e-9).floor() as usize;
    scaled.max(1)
}

impl DatasetSetup {
    pub fn new(index: impl Into<String>, counts: impl IntoIterator<Item = (CategoryLabel, usize)>, seed: u64) -> Self {
        DatasetSetup {
            index: index.into(),
            counts: counts.into_iter().collect(),
            seed,
        }
    }

    /// Preset 1 to 5 with every count scaled by `scale`.
    pub fn preset(number: usize, scale: f64, seed: u64) -> Result<Self> {
        if !(1..=PRESETS.len()).contains(&number) {
            return Err(Error::Config(format!("unknown setup {number}; presets are 1-5")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!("scale must be > 0, got {scale}")));
        }
        let counts = PRESET_COLUMNS
            .into_iter()
            .zip(PRESETS[number - 1])
            .map(|(c, n)| (c, scale_count(n, scale)));
        Ok(DatasetSetup::new(number.to_string(), counts, seed))
    }

    /// Parses `Political=170,Positive=60,OffTopic=30` style counts.
    pub fn custom(spec: &str, seed: u64) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, n) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected CATEGORY=COUNT, got `{part}`")))?;
            let n: usize = n
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("bad count in `{part}`: {e}")))?;
            counts.insert(parse_category(name.trim())?, n);
        }
        if counts.values().all(|&n| n == 0) {
            return Err(Error::Config("custom setup requests no samples".into()));
        }
        Ok(DatasetSetup {
            index: "custom".into(),
            counts,
            seed,
        })
    }

    pub fn count(&self, c: CategoryLabel) -> usize {
        self.counts.get(&c).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn positives(&self) -> usize {
        self.count(CategoryLabel::PoliticalPoster)
    }
}

/// Samples `counts[c]` records of each category uniformly without
/// replacement, then shuffles the union. Both steps use `setup.seed`.
pub fn compose_setup(pool: &DatasetManifest, setup: &DatasetSetup) -> Result<DatasetManifest> {
    let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
    let mut chosen = Vec::with_capacity(setup.total());
    for category in CategoryLabel::ALL {
        let requested = setup.count(category);
        if requested == 0 {
            continue;
        }
        let mut candidates: Vec<usize> = pool
            .records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.category == category)
            .map(|(i, _)| i)
            .collect();
        if candidates.len() < requested {
            return Err(Error::InsufficientPool {
                category: category.to_string(),
                requested,
                available: candidates.len(),
            });
        }
        let (picked, _) = candidates.partial_shuffle(&mut rng, requested);
        chosen.extend_from_slice(picked);
    }
    chosen.shuffle(&mut rng);
    DatasetManifest::new(
        chosen.into_iter().map(|i| pool.records[i].clone()).collect(),
        pool.base_dir.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::SampleRecord;

    fn pool(counts: &[(CategoryLabel, usize)]) -> DatasetManifest {
        let mut records = Vec::new();
        for &(c, n) in counts {
            for i in 0..n {
                records.push(SampleRecord {
                    id: format!("{c}-{i}"),
                    image_path: None,
                    category: c,
                    annotation_ref: "a".into(),
                    feature_ref: "f".into(),
                });
            }
        }
        DatasetManifest::new(records, "").unwrap()
    }

    #[test]
    fn samples_requested_category_counts() {
        let p = pool(&[(CategoryLabel::Natural, 10), (CategoryLabel::OffTopic, 4)]);
        let s = DatasetSetup::new("t", [(CategoryLabel::Natural, 5)], 3);
        let m = compose_setup(&p, &s).unwrap();
        assert_eq!(m.len(), 5);
        assert!(m.records.iter().all(|r| r.category == CategoryLabel::Natural));
        let mut ids: Vec<_> = m.records.iter().map(|r| &r.id).collect();
        ids.dedup();
        assert_eq!(ids.len(), 5);
        assert_eq!(compose_setup(&p, &s).unwrap(), m);
        let other_seed = DatasetSetup { seed: 4, ..s };
        assert_ne!(compose_setup(&p, &other_seed).unwrap(), m);
    }

    #[test]
    fn insufficient_pool_names_category() {
        let p = pool(&[(CategoryLabel::Natural, 3)]);
        let s = DatasetSetup::new("t", [(CategoryLabel::Natural, 5)], 0);
        match compose_setup(&p, &s) {
            Err(Error::InsufficientPool { category, requested: 5, available: 3 }) => assert_eq!(category, "Natural"),
            other => panic!("{other:?}"),
        }
        let msg = compose_setup(&p, &s).unwrap_err().to_string();
        assert!(msg.contains("short by 2"), "{msg}");
    }

    #[test]
    fn first_preset_totals_13k() {
        let s = DatasetSetup::preset(1, 1.0, 0).unwrap();
        assert_eq!(s.total(), 13_000);
        assert_eq!(s.positives(), 3000);
        for n in 1..=4 {
            assert_eq!(DatasetSetup::preset(n, 1.0, 0).unwrap().total(), 13_000, "setup {n}");
        }
        assert_eq!(DatasetSetup::preset(5, 1.0, 0).unwrap().total(), 6300);
        let full = pool(&[
            (CategoryLabel::PoliticalOther, 8500),
            (CategoryLabel::PoliticalPoster, 3000),
            (CategoryLabel::OffTopic, 1500),
        ]);
        assert_eq!(compose_setup(&full, &s).unwrap().len(), 13_000);
    }

    #[test]
    fn scaling_rules() {
        let s = DatasetSetup::preset(1, 0.02, 0).unwrap();
        assert_eq!(s.count(CategoryLabel::PoliticalOther), 170);
        assert_eq!(s.count(CategoryLabel::PoliticalPoster), 60);
        assert_eq!(s.count(CategoryLabel::OffTopic), 30);
        assert_eq!(s.count(CategoryLabel::Natural), 0);
        assert_eq!(scale_count(1800, 0.0001), 1);
        assert_eq!(scale_count(0, 5.0), 0);
        assert!(DatasetSetup::preset(6, 1.0, 0).is_err());
        assert!(DatasetSetup::preset(1, 0.0, 0).is_err());
    }

    #[test]
    fn custom_counts_parse() {
        let s = DatasetSetup::custom("Political=170, Positive=60,OffTopic=30", 1).unwrap();
        assert_eq!(s.total(), 260);
        assert_eq!(s.count(CategoryLabel::OffTopic), 30);
        assert!(DatasetSetup::custom("Poster=x", 1).is_err());
        assert!(DatasetSetup::custom("Banner=3", 1).is_err());
        assert!(DatasetSetup::custom("", 1).is_err());
    }
}
