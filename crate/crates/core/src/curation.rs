//! Search-query plan for crawling candidate images: every keyword of every
//! category combined with every suffix, each with an image quota.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Keyword categories and their reference keyword counts.
pub const KEYWORD_CATEGORIES: [(&str, usize); 10] = [
    ("Popular Politicians", 39),
    ("International Politicians", 338),
    ("Candidates", 1301),
    ("U.S. Senators", 100),
    ("U.S. House", 433),
    ("Parties Ideologies", 170),
    ("Paid for by", 34),
    ("California Propositions", 17),
    ("General", 34),
    ("Cartoons", 1),
];

/// Images per keyword for each suffix used for party ideologies.
pub const IDEOLOGY_SUFFIX_QUOTAS: [(&str, u32); 4] = [
    ("ad", 5),
    ("poster", 20),
    ("election poster", 40),
    ("political poster", 40),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordCategory {
    pub name: String,
    pub keywords: Vec<String>,
    pub expected_count: Option<usize>,
}

impl KeywordCategory {
    pub fn new(name: impl Into<String>, keywords: impl IntoIterator<Item = impl Into<String>>) -> Self {
        let name = name.into();
        KeywordCategory {
            expected_count: expected_count(&name),
            name,
            keywords: keywords.into_iter().map(Into::into).collect(),
        }
    }
}

fn slug(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// Reference keyword count for a category name, matched loosely
/// (`parties_ideologies` matches `Parties Ideologies`).
pub fn expected_count(name: &str) -> Option<usize> {
    let s = slug(name);
    KEYWORD_CATEGORIES.iter().find(|(n, _)| slug(n) == s).map(|&(_, c)| c)
}

fn canonical_name(stem: &str) -> String {
    let s = slug(stem);
    KEYWORD_CATEGORIES
        .iter()
        .find(|(n, _)| slug(n) == s)
        .map_or_else(|| stem.to_string(), |(n, _)| n.to_string())
}

/// Default suffix quotas plus per-category overrides. An override with
/// quota 0 removes that suffix for the category.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SuffixQuotas {
    pub defaults: Vec<(String, u32)>,
    pub overrides: BTreeMap<String, Vec<(String, u32)>>,
}

impl SuffixQuotas {
    pub fn new(defaults: impl IntoIterator<Item = (impl Into<String>, u32)>) -> Self {
        SuffixQuotas {
            defaults: defaults.into_iter().map(|(s, q)| (s.into(), q)).collect(),
            overrides: BTreeMap::new(),
        }
    }

    pub fn ideology_defaults() -> Self {
        SuffixQuotas::new(IDEOLOGY_SUFFIX_QUOTAS)
    }

    /// Effective `(suffix, quota)` list for a category, in default order
    /// followed by suffixes only the override introduces.
    pub fn for_category(&self, category: &str) -> Vec<(String, u32)> {
        let mut list = self.defaults.clone();
        if let Some(over) = self.overrides.get(category) {
            for (suffix, quota) in over {
                match list.iter_mut().find(|(s, _)| s == suffix) {
                    Some(entry) => entry.1 = *quota,
                    None => list.push((suffix.clone(), *quota)),
                }
            }
        }
        list.retain(|&(_, q)| q > 0);
        list
    }

    /// Reads a CSV with header `suffix,quota` and an optional `category`
    /// column; rows with a category are overrides for it.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            #[serde(default)]
            category: Option<String>,
            suffix: String,
            quota: String,
        }
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let mut quotas = SuffixQuotas::default();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let row = row?;
            let line = i + 2;
            let quota: u32 = row.quota.parse().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("bad quota `{}`: {e}", row.quota),
            })?;
            if row.suffix.is_empty() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: "empty suffix".into(),
                });
            }
            match row.category.filter(|c| !c.is_empty()) {
                Some(c) => quotas.overrides.entry(canonical_name(&c)).or_default().push((row.suffix, quota)),
                None => {
                    if quota == 0 {
                        return Err(Error::Parse {
                            path: path.to_path_buf(),
                            line,
                            message: "default quota must be >= 1".into(),
                        });
                    }
                    quotas.defaults.push((row.suffix, quota))
                }
            }
        }
        Ok(quotas)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryEntry {
    pub category: String,
    pub keyword: String,
    pub suffix: String,
    pub quota: u32,
}

impl QueryEntry {
    /// Search string sent to the engine.
    pub fn query(&self) -> String {
        format!("{} {}", self.keyword, self.suffix)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QueryPlan {
    pub entries: Vec<QueryEntry>,
}

impl QueryPlan {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total image budget.
    pub fn total_quota(&self) -> u64 {
        self.entries.iter().map(|e| u64::from(e.quota)).sum()
    }

    pub fn export(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for e in &self.entries {
            w.serialize(e)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        crate::storage::write_atomic(path.as_ref(), &bytes)
    }

    pub fn import(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path.as_ref())?;
        let entries = r.deserialize().collect::<std::result::Result<_, _>>()?;
        Ok(QueryPlan { entries })
    }
}

/// One entry per (keyword, suffix) in category, keyword, suffix order.
///
/// A keyword repeated within a category is an error. A keyword already
/// planned under an earlier category is skipped with a warning so that
/// (keyword, suffix) pairs stay unique.
pub fn generate_query_plan(categories: &[KeywordCategory], quotas: &SuffixQuotas) -> Result<QueryPlan> {
    if quotas.defaults.is_empty() && !categories.is_empty() {
        return Err(Error::Config("suffix set is empty".into()));
    }
    let mut planned: HashSet<&str> = HashSet::new();
    let mut entries = Vec::new();
    for cat in categories {
        if let Some(expected) = cat.expected_count {
            if expected != cat.keywords.len() {
                log::info!(
                    "category `{}` has {} keywords (reference list: {expected})",
                    cat.name,
                    cat.keywords.len()
                );
            }
        }
        let suffixes = quotas.for_category(&cat.name);
        let mut seen = HashSet::new();
        for kw in &cat.keywords {
            if !seen.insert(kw.as_str()) {
                return Err(Error::DuplicateKeyword {
                    category: cat.name.clone(),
                    keyword: kw.clone(),
                });
            }
            if !planned.insert(kw.as_str()) {
                log::warn!("keyword `{kw}` in `{}` already planned; skipped", cat.name);
                continue;
            }
            for (suffix, quota) in &suffixes {
                entries.push(QueryEntry {
                    category: cat.name.clone(),
                    keyword: kw.clone(),
                    suffix: suffix.clone(),
                    quota: *quota,
                });
            }
        }
    }
    Ok(QueryPlan { entries })
}

pub fn export_plan(plan: &QueryPlan, path: impl AsRef<Path>) -> Result<()> {
    plan.export(path)
}

/// Reads one keyword list per `*.txt` file in `dir` (sorted by file name).
/// The file stem names the category; blank lines and `#` comments are
/// ignored.
pub fn load_keyword_dir(dir: impl AsRef<Path>) -> Result<Vec<KeywordCategory>> {
    let dir = dir.as_ref();
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    files
        .iter()
        .map(|p| {
            let body = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            let stem = p.file_stem().unwrap_or_default().to_string_lossy();
            let keywords = body
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(String::from);
            Ok(KeywordCategory::new(canonical_name(&stem), keywords))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_keyword_four_suffixes() {
        let cats = [KeywordCategory::new("Parties Ideologies", ["liberalism"])];
        let plan = generate_query_plan(&cats, &SuffixQuotas::ideology_defaults()).unwrap();
        let got: Vec<(&str, u32)> = plan.entries.iter().map(|e| (e.suffix.as_str(), e.quota)).collect();
        assert_eq!(
            got,
            [("ad", 5), ("poster", 20), ("election poster", 40), ("political poster", 40)]
        );
        assert_eq!(plan.entries[2].query(), "liberalism election poster");
    }

    #[test]
    fn ideology_list_size_and_budget() {
        let kws: Vec<String> = (0..170).map(|i| format!("ideology {i}")).collect();
        let cats = [KeywordCategory::new("Parties Ideologies", kws)];
        let plan = generate_query_plan(&cats, &SuffixQuotas::ideology_defaults()).unwrap();
        assert_eq!(plan.len(), 680);
        assert_eq!(plan.total_quota(), 170 * (5 + 20 + 40 + 40));
        assert_eq!(cats[0].expected_count, Some(170));
    }

    #[test]
    fn empty_categories_make_empty_plan() {
        assert!(generate_query_plan(&[], &SuffixQuotas::ideology_defaults()).unwrap().is_empty());
        assert!(generate_query_plan(&[], &SuffixQuotas::default()).unwrap().is_empty());
    }

    #[test]
    fn duplicates() {
        let cats = [KeywordCategory::new("General", ["vote", "vote"])];
        assert!(matches!(
            generate_query_plan(&cats, &SuffixQuotas::ideology_defaults()),
            Err(Error::DuplicateKeyword { .. })
        ));
        let cats = [
            KeywordCategory::new("General", ["vote"]),
            KeywordCategory::new("Cartoons", ["vote", "toon"]),
        ];
        let plan = generate_query_plan(&cats, &SuffixQuotas::ideology_defaults()).unwrap();
        assert_eq!(plan.len(), 8);
    }

    #[test]
    fn category_overrides() {
        let mut q = SuffixQuotas::ideology_defaults();
        q.overrides.insert(
            "U.S. Senators".into(),
            vec![("ad".into(), 0), ("poster".into(), 10), ("campaign".into(), 3)],
        );
        let cats = [
            KeywordCategory::new("U.S. Senators", ["a", "b"]),
            KeywordCategory::new("General", ["c"]),
        ];
        let plan = generate_query_plan(&cats, &q).unwrap();
        // size = sum |keywords| x |suffixes| with the override applied
        assert_eq!(plan.len(), 2 * 4 + 4);
        assert_eq!(plan.total_quota(), 2 * (10 + 40 + 40 + 3) + 105);
        assert!(plan.entries.iter().all(|e| e.quota >= 1));
    }

    #[test]
    fn csv_export_round_trip_and_quoting() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("plan.csv");
        let one = QueryPlan {
            entries: vec![QueryEntry {
                category: "General".into(),
                keyword: "vote".into(),
                suffix: "ad".into(),
                quota: 5,
            }],
        };
        export_plan(&one, &p).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "category,keyword,suffix,quota\nGeneral,vote,ad,5\n");
        assert_eq!(QueryPlan::import(&p).unwrap(), one);

        let comma = QueryPlan {
            entries: vec![QueryEntry {
                category: "Candidates".into(),
                keyword: "Smith, John".into(),
                suffix: "poster".into(),
                quota: 20,
            }],
        };
        export_plan(&comma, &p).unwrap();
        assert!(fs::read_to_string(&p).unwrap().contains("\"Smith, John\""));
        assert_eq!(QueryPlan::import(&p).unwrap(), comma);
    }

    #[test]
    fn quota_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("q.csv");
        fs::write(&p, "suffix,quota\nad,5\npolitical poster,40\n").unwrap();
        let q = SuffixQuotas::load(&p).unwrap();
        assert_eq!(q.defaults, [("ad".to_string(), 5), ("political poster".to_string(), 40)]);

        fs::write(&p, "category,suffix,quota\n,ad,5\nu_s_senators,ad,9\n").unwrap();
        let q = SuffixQuotas::load(&p).unwrap();
        assert_eq!(q.for_category("U.S. Senators"), [("ad".to_string(), 9)]);

        fs::write(&p, "suffix,quota\nad,five\n").unwrap();
        assert!(matches!(SuffixQuotas::load(&p), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn keyword_dir_loading() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("parties_ideologies.txt"), "# sample\nliberalism\n\nsocialism\n").unwrap();
        fs::write(dir.path().join("notes.md"), "ignored").unwrap();
        let cats = load_keyword_dir(dir.path()).unwrap();
        assert_eq!(cats.len(), 1);
        assert_eq!(cats[0].name, "Parties Ideologies");
        assert_eq!(cats[0].keywords, ["liberalism", "socialism"]);
        let empty = tempfile::tempdir().unwrap();
        assert!(load_keyword_dir(empty.path()).unwrap().is_empty());
    }
}
