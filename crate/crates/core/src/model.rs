//! Shared vocabulary: semantic classes, lexemes, roles, link records and
//! build configuration.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown semantic class `{0}`")]
    UnknownClass(String),
    #[error("hierarchy line {line}: {message}")]
    HierarchyFormat { line: usize, message: String },
    #[error("duplicate class `{0}` in hierarchy")]
    DuplicateClass(String),
    #[error("class `{class}` refers to unknown parent `{parent}`")]
    UnknownParent { class: String, parent: String },
    #[error("hierarchy has no root")]
    NoRoot,
    #[error("hierarchy has more than one root: {0:?}")]
    MultipleRoots(Vec<String>),
    #[error("hierarchy contains a cycle through {0:?}")]
    Cycle(Vec<String>),
    #[error("i/o error reading hierarchy: {0}")]
    Io(String),
}

impl ModelError {
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::UnknownClass(_) => "E_UNKNOWN_CLASS",
            ModelError::Io(_) => "E_IO",
            _ => "E_HIERARCHY",
        }
    }
}

/// Normalizes a string to Unicode NFC. Lemmas and sentence text are stored
/// in this form; case is preserved.
pub fn nfc(s: &str) -> String {
    s.nfc().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SemanticClass {
    pub name: String,
    pub parent: Option<String>,
}

/// A single-rooted tree of semantic classes, shared by every language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticHierarchy {
    classes: Vec<SemanticClass>,
    by_name: HashMap<String, usize>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    root: usize,
}

impl SemanticHierarchy {
    /// Builds and validates a hierarchy. Rejects duplicate names, dangling
    /// parents, zero or several roots, and cycles.
    /// Classes are stored sorted by name, so two hierarchies with the same
    /// rows compare equal regardless of input order.
    pub fn new(mut classes: Vec<SemanticClass>) -> Result<Self, ModelError> {
        classes.sort_by(|a, b| a.name.cmp(&b.name));
        let mut by_name = HashMap::with_capacity(classes.len());
        for (i, class) in classes.iter().enumerate() {
            if by_name.insert(class.name.clone(), i).is_some() {
                return Err(ModelError::DuplicateClass(class.name.clone()));
            }
        }

        let mut parent = Vec::with_capacity(classes.len());
        let mut roots = Vec::new();
        for (i, class) in classes.iter().enumerate() {
            match &class.parent {
                None => {
                    roots.push(i);
                    parent.push(None);
                }
                Some(p) => match by_name.get(p) {
                    Some(&pi) => parent.push(Some(pi)),
                    None => {
                        return Err(ModelError::UnknownParent {
                            class: class.name.clone(),
                            parent: p.clone(),
                        })
                    }
                },
            }
        }
        let root = match roots.as_slice() {
            [] => return Err(ModelError::NoRoot),
            [r] => *r,
            many => {
                let mut names: Vec<String> =
                    many.iter().map(|&i| classes[i].name.clone()).collect();
                names.sort();
                return Err(ModelError::MultipleRoots(names));
            }
        };

        // Every node has exactly one parent, so anything not reachable from
        // the root by a breadth-first walk over child edges sits on a cycle
        // (or hangs off one).
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); classes.len()];
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(i);
            }
        }
        let mut depth = vec![usize::MAX; classes.len()];
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(n) = queue.pop_front() {
            for &c in &children[n] {
                depth[c] = depth[n] + 1;
                queue.push_back(c);
            }
        }
        let mut unreached: Vec<String> = depth
            .iter()
            .enumerate()
            .filter(|(_, d)| **d == usize::MAX)
            .map(|(i, _)| classes[i].name.clone())
            .collect();
        if !unreached.is_empty() {
            unreached.sort();
            return Err(ModelError::Cycle(unreached));
        }

        Ok(SemanticHierarchy {
            classes,
            by_name,
            parent,
            depth,
            root,
        })
    }

    /// Reads the two-column TSV form: `class<TAB>parent`, empty parent for
    /// the root, `#` comments and blank lines skipped.
    pub fn from_tsv<R: BufRead>(reader: R) -> Result<Self, ModelError> {
        let mut classes = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| ModelError::Io(e.to_string()))?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 2 {
                return Err(ModelError::HierarchyFormat {
                    line: n + 1,
                    message: format!("expected 2 columns, found {}", cols.len()),
                });
            }
            let name = cols[0].trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(ModelError::HierarchyFormat {
                    line: n + 1,
                    message: format!("invalid class name `{}`", cols[0]),
                });
            }
            let parent = cols[1].trim();
            classes.push(SemanticClass {
                name: name.to_string(),
                parent: (!parent.is_empty()).then(|| parent.to_string()),
            });
        }
        Self::new(classes)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for class in &self.classes {
            out.push_str(&class.name);
            out.push('\t');
            if let Some(p) = &class.parent {
                out.push_str(p);
            }
            out.push('\n');
        }
        out
    }

    pub fn classes(&self) -> &[SemanticClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn root(&self) -> &str {
        &self.classes[self.root].name
    }

    pub fn contains(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    pub fn parent_of(&self, name: &str) -> Result<Option<&str>, ModelError> {
        let i = self.index(name)?;
        Ok(self.parent[i].map(|p| self.classes[p].name.as_str()))
    }

    /// Distance from the root; the root has depth 0.
    pub fn depth_of(&self, name: &str) -> Result<usize, ModelError> {
        Ok(self.depth[self.index(name)?])
    }

    /// The ancestor of `name` at `depth`, or `name` itself when it is
    /// shallower than `depth`.
    pub fn ancestor_at_depth(&self, name: &str, depth: usize) -> Result<&str, ModelError> {
        let mut i = self.index(name)?;
        while self.depth[i] > depth {
            i = self.parent[i].expect("non-root node has a parent");
        }
        Ok(&self.classes[i].name)
    }

    /// True iff `ancestor` equals `class` or lies on its parent chain.
    pub fn is_descendant(&self, class: &str, ancestor: &str) -> Result<bool, ModelError> {
        let mut i = self.index(class)?;
        let target = self.index(ancestor)?;
        if self.depth[target] > self.depth[i] {
            return Ok(false);
        }
        while self.depth[i] > self.depth[target] {
            i = self.parent[i].expect("non-root node has a parent");
        }
        Ok(i == target)
    }

    /// SHA-256 over the canonical (name-sorted) row form. Row order in the
    /// source file does not affect it.
    pub fn checksum(&self) -> String {
        let mut rows: Vec<(&str, &str)> = self
            .classes
            .iter()
            .map(|c| (c.name.as_str(), c.parent.as_deref().unwrap_or("")))
            .collect();
        rows.sort();
        let mut hasher = Sha256::new();
        for (name, parent) in rows {
            hasher.update(name.as_bytes());
            hasher.update(b"\t");
            hasher.update(parent.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }

    fn index(&self, name: &str) -> Result<usize, ModelError> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownClass(name.to_string()))
    }
}

/// Free-function form of [`SemanticHierarchy::is_descendant`].
pub fn is_descendant(
    hierarchy: &SemanticHierarchy,
    class_name: &str,
    ancestor_name: &str,
) -> Result<bool, ModelError> {
    hierarchy.is_descendant(class_name, ancestor_name)
}

/// A word sense: lemma within a semantic class, in one language.
///
/// The lemma is NFC-normalized on construction, so equality is byte-wise
/// equality of the normalized forms. Case is preserved.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Lexeme {
    #[serde(rename = "lang")]
    pub language: String,
    pub lemma: String,
    pub semclass: String,
}

impl Lexeme {
    pub fn new(language: &str, lemma: &str, semclass: &str) -> Self {
        Lexeme {
            language: language.to_string(),
            lemma: nfc(lemma),
            semclass: semclass.to_string(),
        }
    }
}

impl fmt::Display for Lexeme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.language, self.lemma, self.semclass)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse lexeme `{0}`: expected LANG:LEMMA:SEMCLASS")]
pub struct LexemeParseError(pub String);

impl FromStr for Lexeme {
    type Err = LexemeParseError;

    /// Parses `lang:lemma:SEMCLASS`. The lemma may itself contain colons;
    /// the language is the first segment and the class the last.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || LexemeParseError(s.to_string());
        let (lang, rest) = s.split_once(':').ok_or_else(err)?;
        let (lemma, class) = rest.rsplit_once(':').ok_or_else(err)?;
        if lang.is_empty() || lemma.is_empty() || class.is_empty() {
            return Err(err());
        }
        Ok(Lexeme::new(lang, lemma, class))
    }
}

/// A word sense within one language: lemma plus class. Keys both cores and
/// fillers inside the index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SenseKey {
    pub lemma: String,
    pub semclass: String,
}

impl SenseKey {
    pub fn new(lemma: &str, semclass: &str) -> Self {
        SenseKey {
            lemma: nfc(lemma),
            semclass: semclass.to_string(),
        }
    }
}

/// Role names form an open inventory: anything non-empty without whitespace.
pub fn is_valid_role(name: &str) -> bool {
    !name.is_empty() && !name.contains(char::is_whitespace)
}

/// One semantic dependency occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinkRecord {
    pub core: Lexeme,
    pub role: String,
    pub filler: SenseKey,
    pub sent_id: String,
    pub core_token: u32,
    pub filler_token: u32,
}

impl LinkRecord {
    pub fn language(&self) -> &str {
        &self.core.language
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationKind {
    UnknownClass,
    EmptyLemma,
    EmptyRole,
    InvalidRole,
    EmptyLanguage,
    EmptySentId,
}

impl ViolationKind {
    pub fn code(self) -> &'static str {
        match self {
            ViolationKind::UnknownClass => "UNKNOWN_CLASS",
            ViolationKind::EmptyLemma => "EMPTY_LEMMA",
            ViolationKind::EmptyRole => "EMPTY_ROLE",
            ViolationKind::InvalidRole => "INVALID_ROLE",
            ViolationKind::EmptyLanguage => "EMPTY_LANGUAGE",
            ViolationKind::EmptySentId => "EMPTY_SENT_ID",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

/// Checks a record against the hierarchy and field rules, returning every
/// violation found. An empty vector means the record is valid.
pub fn validate_link(record: &LinkRecord, hierarchy: &SemanticHierarchy) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, detail: String| out.push(Violation { kind, detail });

    if record.core.language.is_empty() {
        push(ViolationKind::EmptyLanguage, "language code is empty".into());
    }
    if record.core.lemma.is_empty() {
        push(ViolationKind::EmptyLemma, "core lemma is empty".into());
    }
    if record.filler.lemma.is_empty() {
        push(ViolationKind::EmptyLemma, "filler lemma is empty".into());
    }
    if record.role.is_empty() {
        push(ViolationKind::EmptyRole, "role name is empty".into());
    } else if !is_valid_role(&record.role) {
        push(
            ViolationKind::InvalidRole,
            format!("role `{}` contains whitespace", record.role),
        );
    }
    if record.sent_id.is_empty() {
        push(ViolationKind::EmptySentId, "sentence id is empty".into());
    }
    for class in [&record.core.semclass, &record.filler.semclass] {
        if !hierarchy.contains(class) {
            push(ViolationKind::UnknownClass, format!("unknown class `{class}`"));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Measure {
    #[default]
    Frequency,
    Logdice,
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "freq" | "frequency" => Ok(Measure::Frequency),
            "logdice" => Ok(Measure::Logdice),
            other => Err(format!("unknown measure `{other}` (expected freq or logdice)")),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Frequency => "FREQUENCY",
            Measure::Logdice => "LOGDICE",
        })
    }
}

/// Sketch build settings. `min_links` defaults to 200; larger corpora
/// call for more (see [`RUSSIAN_MIN_LINKS`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub min_links: u64,
    pub top_fillers: usize,
    pub max_roles: Option<usize>,
    pub measure: Measure,
    pub sparse_max_links: u64,
    pub narrow_max_distinct: usize,
    pub narrow_min_links: u64,
}

pub const DEFAULT_MIN_LINKS: u64 = 200;
pub const RUSSIAN_MIN_LINKS: u64 = 2000;

impl Default for Config {
    fn default() -> Self {
        Config {
            min_links: DEFAULT_MIN_LINKS,
            top_fillers: 8,
            max_roles: None,
            measure: Measure::Frequency,
            sparse_max_links: 10,
            narrow_max_distinct: 4,
            narrow_min_links: 50,
        }
    }
}

/// Builds a hierarchy from `(name, parent)` pairs; mostly useful in tests
/// and fixtures.
pub fn hierarchy_from_pairs(pairs: &[(&str, &str)]) -> Result<SemanticHierarchy, ModelError> {
    SemanticHierarchy::new(
        pairs
            .iter()
            .map(|(n, p)| SemanticClass {
                name: n.to_string(),
                parent: (!p.is_empty()).then(|| p.to_string()),
            })
            .collect(),
    )
}

/// Counts of classes per depth; handy for summaries.
pub fn depth_histogram(hierarchy: &SemanticHierarchy) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for d in &hierarchy.depth {
        *out.entry(*d).or_default() += 1;
    }
    out
}
