//! Labeled lexical datasets and the meaningful/structural filtering protocol.
//!
//! On disk a dataset is a UTF-8 CSV with the header
//! `label,gloss,language,category,item_class,sequence_index,network_root`.
//! Lines starting with `#` are comments; the two directives `# name: ...` and
//! `# domains: a;b;c` (when present before the header) carry the dataset name
//! and its declared semantic domains. The dataset id is the file stem.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HEADER: [&str; 7] = [
    "label",
    "gloss",
    "language",
    "category",
    "item_class",
    "sequence_index",
    "network_root",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemClass {
    Meaningful,
    Structural,
    Borderline,
    Functional,
    Compositional,
}

impl ItemClass {
    pub const ALL: [ItemClass; 5] = [
        ItemClass::Meaningful,
        ItemClass::Structural,
        ItemClass::Borderline,
        ItemClass::Functional,
        ItemClass::Compositional,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ItemClass::Meaningful => "meaningful",
            ItemClass::Structural => "structural",
            ItemClass::Borderline => "borderline",
            ItemClass::Functional => "functional",
            ItemClass::Compositional => "compositional",
        }
    }
}

impl fmt::Display for ItemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ItemClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ItemClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                format!(
                    "unknown item_class {s:?} (expected one of meaningful, structural, borderline, functional, compositional)"
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexicalItem {
    pub label: String,
    pub gloss: String,
    pub language: String,
    pub category: String,
    pub item_class: ItemClass,
    pub sequence_index: Option<u32>,
    pub network_root: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub id: String,
    pub name: String,
    pub items: Vec<LexicalItem>,
    pub declared_domains: BTreeSet<String>,
}

impl Dataset {
    /// Builds a dataset and checks its invariants.
    pub fn new(
        id: impl Into<String>,
        name: impl Into<String>,
        items: Vec<LexicalItem>,
        declared_domains: BTreeSet<String>,
    ) -> Result<Self> {
        let ds = Dataset {
            id: id.into(),
            name: name.into(),
            items,
            declared_domains,
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Declares exactly the categories used by `items`.
    pub fn from_items(id: impl Into<String>, items: Vec<LexicalItem>) -> Result<Self> {
        let domains = items.iter().map(|i| i.category.clone()).collect();
        let id = id.into();
        Dataset::new(id.clone(), id, items, domains)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.items.iter().map(|i| i.label.as_str()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        let mut seq: HashSet<(&str, Option<&str>, u32)> = HashSet::new();
        for item in &self.items {
            if item.label.is_empty() {
                return Err(Error::Validation("empty label".into()));
            }
            if !seen.insert(item.label.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate label {:?}",
                    item.label
                )));
            }
            if !self.declared_domains.contains(&item.category) {
                return Err(Error::Validation(format!(
                    "item {:?} has undeclared category {:?}",
                    item.label, item.category
                )));
            }
            if let Some(s) = item.sequence_index {
                let key = (item.category.as_str(), item.network_root.as_deref(), s);
                if !seq.insert(key) {
                    return Err(Error::Validation(format!(
                        "sequence_index {s} repeated in category {:?}",
                        item.category
                    )));
                }
            }
        }
        Ok(())
    }

    /// Keeps the items whose label is in `labels`, in the order of `labels`.
    pub fn restrict_to(&self, labels: &[String]) -> Result<Dataset> {
        let index: HashMap<&str, &LexicalItem> =
            self.items.iter().map(|i| (i.label.as_str(), i)).collect();
        let mut missing = Vec::new();
        let mut items = Vec::with_capacity(labels.len());
        for l in labels {
            match index.get(l.as_str()) {
                Some(item) => items.push((*item).clone()),
                None => missing.push(l.clone()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::Validation(format!(
                "labels not in dataset {}: {}",
                self.id,
                missing.join(", ")
            )));
        }
        Dataset::new(
            self.id.clone(),
            self.name.clone(),
            items,
            self.declared_domains.clone(),
        )
    }
}

/// Which items survive [`apply_filter`]. Absent optional sets match everything.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FilterSpec {
    pub include_classes: BTreeSet<ItemClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_categories: Option<BTreeSet<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_languages: Option<BTreeSet<String>>,
}

impl FilterSpec {
    pub fn all() -> Self {
        FilterSpec {
            include_classes: ItemClass::ALL.into_iter().collect(),
            include_categories: None,
            include_languages: None,
        }
    }

    pub fn classes(classes: impl IntoIterator<Item = ItemClass>) -> Self {
        FilterSpec {
            include_classes: classes.into_iter().collect(),
            ..FilterSpec::all()
        }
    }

    pub fn matches(&self, item: &LexicalItem) -> bool {
        self.include_classes.contains(&item.item_class)
            && self
                .include_categories
                .as_ref()
                .is_none_or(|c| c.contains(&item.category))
            && self
                .include_languages
                .as_ref()
                .is_none_or(|l| l.contains(&item.language))
    }
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec::all()
    }
}

pub fn partition_by_class(dataset: &Dataset) -> BTreeMap<ItemClass, Vec<LexicalItem>> {
    let mut buckets: BTreeMap<ItemClass, Vec<LexicalItem>> =
        ItemClass::ALL.into_iter().map(|c| (c, Vec::new())).collect();
    for item in &dataset.items {
        buckets
            .get_mut(&item.item_class)
            .expect("every class has a bucket")
            .push(item.clone());
    }
    buckets
}

pub fn apply_filter(dataset: &Dataset, spec: &FilterSpec) -> Result<Dataset> {
    if spec.include_classes.is_empty() {
        return Err(Error::param("filter must include at least one item class"));
    }
    let items: Vec<LexicalItem> = dataset
        .items
        .iter()
        .filter(|i| spec.matches(i))
        .cloned()
        .collect();
    if items.is_empty() {
        return Err(Error::EmptyResult);
    }
    Ok(Dataset {
        id: dataset.id.clone(),
        name: dataset.name.clone(),
        items,
        declared_domains: dataset.declared_domains.clone(),
    })
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_dataset(&text, &id, path)
}

pub(crate) fn parse_dataset(text: &str, id: &str, path: &Path) -> Result<Dataset> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut name = None;
    let mut domains: Option<BTreeSet<String>> = None;
    for line in text.lines() {
        let Some(comment) = line.strip_prefix('#') else {
            break;
        };
        let comment = comment.trim();
        if let Some(v) = comment.strip_prefix("name:") {
            name = Some(v.trim().to_string());
        } else if let Some(v) = comment.strip_prefix("domains:") {
            domains = Some(
                v.split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect(),
            );
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut items = Vec::new();
    let mut header_seen = false;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if !header_seen {
            let fields: Vec<&str> = record.iter().collect();
            if fields != HEADER {
                return Err(parse_err(
                    line,
                    format!("header must be exactly `{}`", HEADER.join(",")),
                ));
            }
            header_seen = true;
            continue;
        }
        if record.len() != HEADER.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", HEADER.len(), record.len()),
            ));
        }
        let label = record[0].to_string();
        if label.is_empty() {
            return Err(parse_err(line, "empty label".into()));
        }
        let item_class = record[4]
            .parse::<ItemClass>()
            .map_err(|m| parse_err(line, m))?;
        let sequence_index = match &record[5] {
            "" => None,
            s => Some(
                s.parse::<u32>()
                    .map_err(|_| parse_err(line, format!("bad sequence_index {s:?}")))?,
            ),
        };
        let network_root = match &record[6] {
            "" => None,
            s => Some(s.to_string()),
        };
        items.push(LexicalItem {
            label,
            gloss: record[1].to_string(),
            language: record[2].to_string(),
            category: record[3].to_string(),
            item_class,
            sequence_index,
            network_root,
        });
    }
    if !header_seen {
        return Err(parse_err(1, "missing header row".into()));
    }

    let declared_domains =
        domains.unwrap_or_else(|| items.iter().map(|i| i.category.clone()).collect());
    Dataset::new(id, name.unwrap_or_else(|| id.to_string()), items, declared_domains)
}

fn csv_field(field: &str, first: bool) -> String {
    let needs_quotes = field.contains([',', '"', '\n', '\r'])
        || (first && field.starts_with('#'))
        || field.trim() != field;
    if needs_quotes {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Serializes a dataset in the on-disk CSV format.
pub fn dataset_to_csv(dataset: &Dataset) -> String {
    let mut out = String::new();
    out.push_str(&format!("# name: {}\n", dataset.name));
    let domains: Vec<&str> = dataset.declared_domains.iter().map(String::as_str).collect();
    out.push_str(&format!("# domains: {}\n", domains.join(";")));
    out.push_str(&HEADER.join(","));
    out.push('\n');
    for item in &dataset.items {
        let seq = item.sequence_index.map(|s| s.to_string()).unwrap_or_default();
        let fields = [
            item.label.as_str(),
            item.gloss.as_str(),
            item.language.as_str(),
            item.category.as_str(),
            item.item_class.as_str(),
            seq.as_str(),
            item.network_root.as_deref().unwrap_or(""),
        ];
        let row: Vec<String> = fields
            .iter()
            .enumerate()
            .map(|(i, f)| csv_field(f, i == 0))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, dataset_to_csv(dataset))?;
    Ok(())
}
