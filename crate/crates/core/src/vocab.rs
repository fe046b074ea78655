//! Corpus word histogram with a bounded dictionary, and the top-n
//! vocabulary cut from it.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::datamodel::TextAnnotation;
use crate::error::{Error, Result};

pub const DEFAULT_CAP: usize = 500_000;
pub const DEFAULT_TOP_N: usize = 3000;

/// Lowercases and splits on every non-alphanumeric character. No stop-word
/// removal, no stemming.
pub fn tokenize(annotation: &TextAnnotation) -> Vec<String> {
    annotation.tokens.iter().flat_map(|t| normalize(t)).collect()
}

/// Normalizes a single raw OCR token, possibly into several tokens.
pub fn normalize(raw: &str) -> impl Iterator<Item = String> + '_ {
    raw.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_lowercase)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordHistogram {
    counts: HashMap<String, u64>,
    cap: usize,
    overflow_dropped: u64,
}

impl WordHistogram {
    pub fn new(cap: usize) -> Self {
        assert!(cap >= 1, "histogram cap must be at least 1");
        WordHistogram {
            counts: HashMap::new(),
            cap,
            overflow_dropped: 0,
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }
    /// Word occurrences rejected because the dictionary was full.
    /// Number of distinct words rejected because the dictionary was full.
    pub fn overflow_dropped(&self) -> u64 {
        self.overflow_dropped
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &HashMap<String, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Adds `n` occurrences of an already normalized word. A word not yet
    /// present is dropped once the dictionary holds `cap` words.
    pub fn add(&mut self, word: &str, n: u64) {
        if n == 0 {
            return;
        }
        if let Some(c) = self.counts.get_mut(word) {
            *c += n;
        } else if self.counts.len() < self.cap {
            self.counts.insert(word.to_string(), n);
        } else {
            self.overflow_dropped += n;
        }
    }

    pub fn add_annotation(&mut self, annotation: &TextAnnotation) {
        for raw in &annotation.tokens {
            for w in normalize(raw) {
                self.add(&w, 1);
            }
        }
    }

    /// Folds another shard into this one. Commutative while the combined
    /// distinct count stays within the cap.
    pub fn merge(&mut self, other: &WordHistogram) {
        let mut words: Vec<_> = other.counts.iter().collect();
        // Sorted so that cap overflow during a merge is deterministic.
        words.sort_unstable_by(|a, b| a.0.cmp(b.0));
        for (w, &n) in words {
            self.add(w, n);
        }
        self.overflow_dropped += other.overflow_dropped;
    }

    /// All (word, count) pairs in vocabulary order: count descending, then
    /// word ascending.
    pub fn ranked(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<(&str, u64)> = self.counts.iter().map(|(w, &c)| (w.as_str(), c)).collect();
        v.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }
}

pub fn build_histogram<'a>(
    annotations: impl IntoIterator<Item = &'a TextAnnotation>,
    cap: usize,
) -> WordHistogram {
    let mut h = WordHistogram::new(cap);
    for a in annotations {
        h.add_annotation(a);
    }
    h
}

/// Ordered word list; position in `words` is the text-vector index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from ordered entries, rejecting duplicates.
    pub fn from_entries(entries: impl IntoIterator<Item = (String, u64)>) -> Result<Self> {
        let mut v = Vocabulary::default();
        for (line, (word, count)) in entries.into_iter().enumerate() {
            if v.index.contains_key(&word) {
                return Err(Error::DuplicateWord {
                    word,
                    line: line + 1,
                });
            }
            v.index.insert(word.clone(), v.words.len());
            v.words.push(word);
            v.counts.push(count);
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Corpus counts at truncation time, aligned with `words`.
    pub fn source_counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, u64)> {
        self.words.iter().map(String::as_str).zip(self.counts.iter().copied())
    }

    /// Histogram built from this vocabulary's own counts.
    pub fn to_histogram(&self) -> WordHistogram {
        let mut h = WordHistogram::new(self.len().max(1));
        for (w, c) in self.entries() {
            h.add(w, c);
        }
        h
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut body = String::new();
        for (w, c) in self.entries() {
            body.push_str(w);
            body.push('\t');
            body.push_str(&c.to_string());
            body.push('\n');
        }
        crate::storage::write_atomic(path.as_ref(), body.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let malformed = |message: &str| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: message.to_string(),
            };
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| malformed("expected `word<TAB>count`"))?;
            if word.is_empty() {
                return Err(malformed("empty word"));
            }
            let count = count
                .parse::<u64>()
                .map_err(|e| malformed(&format!("bad count `{count}`: {e}")))?;
            entries.push((word.to_string(), count));
        }
        Vocabulary::from_entries(entries)
    }
}

/// Keeps the `n` most frequent words (ties broken by ascending word).
pub fn truncate_top_k(hist: &WordHistogram, n: usize) -> Vocabulary {
    assert!(n >= 1, "vocabulary size must be at least 1");
    let entries = hist
        .ranked()
        .into_iter()
        .take(n)
        .map(|(w, c)| (w.to_string(), c));
    Vocabulary::from_entries(entries).expect("histogram words are unique")
}

pub fn save_vocabulary(v: &Vocabulary, path: impl AsRef<Path>) -> Result<()> {
    v.save(path)
}

pub fn load_vocabulary(path: impl AsRef<Path>) -> Result<Vocabulary> {
    Vocabulary::load(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(tokens: &[&str]) -> TextAnnotation {
        TextAnnotation::new("d", tokens.iter().copied())
    }

    fn hist_of(pairs: &[(&str, u64)]) -> WordHistogram {
        let mut h = WordHistogram::new(DEFAULT_CAP);
        for &(w, c) in pairs {
            h.add(w, c);
        }
        h
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize(&doc(&["Vote", "2020!"])), ["vote", "2020"]);
        assert!(tokenize(&doc(&[])).is_empty());
        assert_eq!(tokenize(&doc(&["re-elect"])), ["re", "elect"]);
        assert_eq!(tokenize(&doc(&["--", "ÉLECTION"])), ["élection"]);
    }

    #[test]
    fn histogram_counts_totals() {
        let h = build_histogram(&[doc(&["vote", "vote"]), doc(&["vote", "usa"])], DEFAULT_CAP);
        assert_eq!(h.distinct(), 2);
        assert_eq!(h.count("vote"), 3);
        assert_eq!(h.count("usa"), 1);
    }

    #[test]
    fn cap_drops_new_words_only() {
        let h = build_histogram(&[doc(&["a"]), doc(&["b"]), doc(&["a"])], 1);
        assert_eq!(h.distinct(), 1);
        assert_eq!(h.count("a"), 2);
        assert_eq!(h.overflow_dropped(), 1);
    }

    #[test]
    fn truncation_tie_rule() {
        let h = hist_of(&[("a", 5), ("c", 3), ("b", 3), ("d", 1)]);
        assert_eq!(truncate_top_k(&h, 3).words(), ["a", "b", "c"]);
        assert_eq!(truncate_top_k(&hist_of(&[("a", 5)]), 3000).words(), ["a"]);
    }

    #[test]
    fn vocab_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("vocab.tsv");
        let v = Vocabulary::from_entries([("vote".to_string(), 120), ("2020".to_string(), 80)]).unwrap();
        v.save(&p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "vote\t120\n2020\t80\n");
        assert_eq!(Vocabulary::load(&p).unwrap(), v);
    }

    #[test]
    fn vocab_file_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("vocab.tsv");
        std::fs::write(&p, "vote\t3\nvote\t2\n").unwrap();
        assert!(matches!(Vocabulary::load(&p), Err(Error::DuplicateWord { line: 2, .. })));
        std::fs::write(&p, "vote\t3\nusa 2\n").unwrap();
        assert!(matches!(Vocabulary::load(&p), Err(Error::Parse { line: 2, .. })));
        std::fs::write(&p, "").unwrap();
        assert!(Vocabulary::load(&p).unwrap().is_empty());
    }

    #[test]
    fn hot_query_words_reach_the_top() {
        let filler: Vec<String> = (0..400).map(|i| format!("w{i}")).collect();
        let mut docs = Vec::new();
        for i in 0..300 {
            let mut tokens: Vec<&str> = filler.iter().skip(i).take(20).map(String::as_str).collect();
            if i % 3 == 0 {
                tokens.extend(["Vote", "ELECTION", "senator"]);
            }
            docs.push(doc(&tokens));
        }
        let v = truncate_top_k(&build_histogram(&docs, DEFAULT_CAP), 10);
        for w in ["vote", "election", "senator"] {
            assert!(v.index_of(w).is_some(), "{w} missing from {:?}", v.words());
        }
    }

    fn corpus() -> impl Strategy<Value = Vec<Vec<String>>> {
        proptest::collection::vec(proptest::collection::vec("[a-f]{1,2}", 0..12), 0..25)
    }

    proptest! {
        #[test]
        fn order_insensitive_below_cap(docs in corpus(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let anns: Vec<_> = docs.iter().map(|d| TextAnnotation { id: String::new(), tokens: d.clone() }).collect();
            let mut shuffled = anns.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(build_histogram(&anns, DEFAULT_CAP), build_histogram(&shuffled, DEFAULT_CAP));
        }

        #[test]
        fn sharded_merge_matches_single_pass(docs in corpus(), split in 0usize..25) {
            let anns: Vec<_> = docs.iter().map(|d| TextAnnotation { id: String::new(), tokens: d.clone() }).collect();
            let split = split.min(anns.len());
            let left = build_histogram(&anns[..split], DEFAULT_CAP);
            let right = build_histogram(&anns[split..], DEFAULT_CAP);
            let mut lr = left.clone();
            lr.merge(&right);
            let mut rl = right.clone();
            rl.merge(&left);
            prop_assert_eq!(&lr, &rl);
            prop_assert_eq!(lr, build_histogram(&anns, DEFAULT_CAP));
        }

        #[test]
        fn truncation_invariants(docs in corpus(), n in 1usize..20) {
            let anns: Vec<_> = docs.iter().map(|d| TextAnnotation { id: String::new(), tokens: d.clone() }).collect();
            let h = build_histogram(&anns, DEFAULT_CAP);
            let v = truncate_top_k(&h, n);
            prop_assert_eq!(v.len(), n.min(h.distinct()));
            for (i, w) in v.words().iter().enumerate() {
                prop_assert_eq!(v.index_of(w), Some(i));
            }
            let min_kept = v.source_counts().iter().copied().min().unwrap_or(u64::MAX);
            let max_dropped = h.counts().iter()
                .filter(|(w, _)| v.index_of(w).is_none())
                .map(|(_, &c)| c)
                .max()
                .unwrap_or(0);
            prop_assert!(min_kept >= max_dropped);
            // idempotent in content
            if !v.is_empty() {
                let again = truncate_top_k(&v.to_histogram(), n);
                prop_assert_eq!(again.words(), v.words());
            }
        }

        #[test]
        fn histogram_respects_cap(docs in corpus(), cap in 1usize..8) {
            let anns: Vec<_> = docs.iter().map(|d| TextAnnotation { id: String::new(), tokens: d.clone() }).collect();
            let h = build_histogram(&anns, cap);
            prop_assert!(h.distinct() <= cap);
            prop_assert!(h.counts().values().all(|&c| c >= 1));
        }
    }
}
