//! Mergeable frequency index over link records.
//!
//! Counts are kept per language at four levels: the joint
//! `(core, role, filler)` count, the `(core, role)` marginal, the core
//! total, and the filler marginal. Every level is derived by the same
//! increments, so the marginals always equal the sums of the joints below
//! them.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{SentenceEntry, SentenceTable};
use crate::model::{Lexeme, LinkRecord, SemanticClass, SemanticHierarchy, SenseKey};

/// Default number of example references kept per joint key.
pub const DEFAULT_EXAMPLES_CAP: usize = 5;

pub const INDEX_FORMAT: &str = "semsketch-index";
pub const INDEX_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum AggregateError {
    #[error("unsupported index format version {found} (expected {expected})")]
    Version { found: String, expected: u32 },
    #[error("hierarchy checksum mismatch: expected {expected}, found {found}")]
    Checksum { expected: String, found: String },
    #[error("malformed index: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AggregateError {
    pub fn code(&self) -> &'static str {
        match self {
            AggregateError::Version { .. } => "E_VERSION",
            AggregateError::Checksum { .. } => "E_CHECKSUM",
            AggregateError::Format(_) => "E_FORMAT",
            AggregateError::Io(_) => "E_IO",
        }
    }
}

/// Where one occurrence of a joint key was seen.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExampleRef {
    pub sent_id: String,
    pub core_token: u32,
    pub filler_token: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JointEntry {
    pub count: u64,
    pub examples: Vec<ExampleRef>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoleEntry {
    pub total: u64,
    pub fillers: BTreeMap<SenseKey, JointEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoreEntry {
    pub total: u64,
    pub roles: BTreeMap<String, RoleEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LanguageIndex {
    pub cores: BTreeMap<SenseKey, CoreEntry>,
    pub filler_totals: BTreeMap<SenseKey, u64>,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyIndex {
    examples_cap: usize,
    hierarchy_checksum: Option<String>,
    languages: BTreeMap<String, LanguageIndex>,
}

impl Default for FrequencyIndex {
    fn default() -> Self {
        Self::new(DEFAULT_EXAMPLES_CAP)
    }
}

impl FrequencyIndex {
    pub fn new(examples_cap: usize) -> Self {
        FrequencyIndex {
            examples_cap,
            hierarchy_checksum: None,
            languages: BTreeMap::new(),
        }
    }

    pub fn with_hierarchy(mut self, hierarchy: &SemanticHierarchy) -> Self {
        self.hierarchy_checksum = Some(hierarchy.checksum());
        self
    }

    pub fn examples_cap(&self) -> usize {
        self.examples_cap
    }

    pub fn hierarchy_checksum(&self) -> Option<&str> {
        self.hierarchy_checksum.as_deref()
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.languages.keys().map(String::as_str)
    }

    pub fn language(&self, lang: &str) -> Option<&LanguageIndex> {
        self.languages.get(lang)
    }

    /// Total number of accumulated records across all languages.
    pub fn total_links(&self) -> u64 {
        self.languages.values().map(|l| l.total).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.languages.is_empty()
    }

    pub fn core(&self, lexeme: &Lexeme) -> Option<&CoreEntry> {
        self.languages
            .get(&lexeme.language)?
            .cores
            .get(&SenseKey::new(&lexeme.lemma, &lexeme.semclass))
    }

    /// f(core, *, *)
    pub fn core_total(&self, lexeme: &Lexeme) -> u64 {
        self.core(lexeme).map_or(0, |c| c.total)
    }

    /// f(core, role, *)
    pub fn role_total(&self, lexeme: &Lexeme, role: &str) -> u64 {
        self.core(lexeme)
            .and_then(|c| c.roles.get(role))
            .map_or(0, |r| r.total)
    }

    /// f(core, role, filler)
    pub fn joint(&self, lexeme: &Lexeme, role: &str, filler: &SenseKey) -> u64 {
        self.core(lexeme)
            .and_then(|c| c.roles.get(role))
            .and_then(|r| r.fillers.get(filler))
            .map_or(0, |j| j.count)
    }

    /// f(*, *, filler) within one language.
    pub fn filler_total(&self, lang: &str, filler: &SenseKey) -> u64 {
        self.languages
            .get(lang)
            .and_then(|l| l.filler_totals.get(filler))
            .copied()
            .unwrap_or(0)
    }

    /// Adds one occurrence to every count level. The record's sentence
    /// reference is retained while fewer than `examples_cap` are held for
    /// its joint key.
    pub fn accumulate(&mut self, record: &LinkRecord) {
        let cap = self.examples_cap;
        let lang = self
            .languages
            .entry(record.core.language.clone())
            .or_default();
        lang.total += 1;
        *lang.filler_totals.entry(record.filler.clone()).or_default() += 1;

        let core = lang
            .cores
            .entry(SenseKey {
                lemma: record.core.lemma.clone(),
                semclass: record.core.semclass.clone(),
            })
            .or_default();
        core.total += 1;
        let role = core.roles.entry(record.role.clone()).or_default();
        role.total += 1;
        let joint = role.fillers.entry(record.filler.clone()).or_default();
        joint.count += 1;
        if joint.examples.len() < cap {
            joint.examples.push(ExampleRef {
                sent_id: record.sent_id.clone(),
                core_token: record.core_token,
                filler_token: record.filler_token,
            });
        }
    }

    pub fn extend<'a>(&mut self, records: impl IntoIterator<Item = &'a LinkRecord>) {
        records.into_iter().for_each(|r| self.accumulate(r));
    }

    /// Pointwise sum of two indices. Example lists are concatenated with
    /// `self`'s entries first, then cut to `self`'s cap.
    pub fn merge(mut self, other: FrequencyIndex) -> Result<FrequencyIndex, AggregateError> {
        match (&self.hierarchy_checksum, &other.hierarchy_checksum) {
            (Some(a), Some(b)) if a != b => {
                return Err(AggregateError::Checksum {
                    expected: a.clone(),
                    found: b.clone(),
                })
            }
            (None, Some(b)) => self.hierarchy_checksum = Some(b.clone()),
            _ => {}
        }
        let cap = self.examples_cap;
        for (lang, theirs) in other.languages {
            let ours = self.languages.entry(lang).or_default();
            ours.total += theirs.total;
            for (filler, n) in theirs.filler_totals {
                *ours.filler_totals.entry(filler).or_default() += n;
            }
            for (key, their_core) in theirs.cores {
                let our_core = ours.cores.entry(key).or_default();
                our_core.total += their_core.total;
                for (role, their_role) in their_core.roles {
                    let our_role = our_core.roles.entry(role).or_default();
                    our_role.total += their_role.total;
                    for (filler, their_joint) in their_role.fillers {
                        match our_role.fillers.entry(filler) {
                            Entry::Vacant(v) => {
                                let mut j = their_joint;
                                j.examples.truncate(cap);
                                v.insert(j);
                            }
                            Entry::Occupied(mut o) => {
                                let j = o.get_mut();
                                j.count += their_joint.count;
                                let room = cap.saturating_sub(j.examples.len());
                                j.examples
                                    .extend(their_joint.examples.into_iter().take(room));
                            }
                        }
                    }
                }
            }
        }
        Ok(self)
    }

    /// Lexemes with at least `min_links` links, in (language, lemma,
    /// semclass) order.
    pub fn eligible_lexemes(&self, min_links: u64) -> Vec<Lexeme> {
        self.lexemes()
            .filter(|(_, total)| *total >= min_links)
            .map(|(lex, _)| lex)
            .collect()
    }

    /// Every core lexeme with its total, in (language, lemma, semclass)
    /// order.
    pub fn lexemes(&self) -> impl Iterator<Item = (Lexeme, u64)> + '_ {
        self.languages.iter().flat_map(|(lang, l)| {
            l.cores.iter().map(move |(key, core)| {
                (
                    Lexeme {
                        language: lang.clone(),
                        lemma: key.lemma.clone(),
                        semclass: key.semclass.clone(),
                    },
                    core.total,
                )
            })
        })
    }

    /// Checks the marginal identities. Returns a description of the first
    /// inconsistency found.
    pub fn check_consistency(&self) -> Result<(), String> {
        for (lang, l) in &self.languages {
            let mut lang_total = 0;
            let mut fillers: BTreeMap<&SenseKey, u64> = BTreeMap::new();
            for (key, core) in &l.cores {
                let mut core_sum = 0;
                for (role, r) in &core.roles {
                    let mut role_sum = 0;
                    for (filler, j) in &r.fillers {
                        if j.count == 0 {
                            return Err(format!("{lang}: zero joint count for {filler:?}"));
                        }
                        if j.examples.len() > self.examples_cap {
                            return Err(format!("{lang}: too many examples for {filler:?}"));
                        }
                        role_sum += j.count;
                        *fillers.entry(filler).or_default() += j.count;
                    }
                    if role_sum != r.total {
                        return Err(format!("{lang} {key:?} {role}: role total {} != {role_sum}", r.total));
                    }
                    core_sum += r.total;
                }
                if core_sum != core.total {
                    return Err(format!("{lang} {key:?}: core total {} != {core_sum}", core.total));
                }
                lang_total += core.total;
            }
            if lang_total != l.total {
                return Err(format!("{lang}: total {} != {lang_total}", l.total));
            }
            let stored: BTreeMap<&SenseKey, u64> =
                l.filler_totals.iter().map(|(k, v)| (k, *v)).collect();
            if stored != fillers {
                return Err(format!("{lang}: filler marginals disagree with joints"));
            }
        }
        Ok(())
    }

    /// Flattened joint rows `(lang, core, role, filler, entry)` in key order.
    pub fn joints(&self) -> impl Iterator<Item = (&str, &SenseKey, &str, &SenseKey, &JointEntry)> {
        self.languages.iter().flat_map(|(lang, l)| {
            l.cores.iter().flat_map(move |(core_key, core)| {
                core.roles.iter().flat_map(move |(role, r)| {
                    r.fillers.iter().map(move |(filler, j)| {
                        (lang.as_str(), core_key, role.as_str(), filler, j)
                    })
                })
            })
        })
    }

    /// Inserts a joint row with an explicit count, maintaining marginals.
    /// Used when loading persisted indices.
    fn insert_joint(
        &mut self,
        lang: &str,
        core: SenseKey,
        role: String,
        filler: SenseKey,
        entry: JointEntry,
    ) -> Result<(), AggregateError> {
        let n = entry.count;
        if n == 0 {
            return Err(AggregateError::Format("joint count of zero".into()));
        }
        let l = self.languages.entry(lang.to_string()).or_default();
        l.total += n;
        *l.filler_totals.entry(filler.clone()).or_default() += n;
        let c = l.cores.entry(core).or_default();
        c.total += n;
        let r = c.roles.entry(role).or_default();
        r.total += n;
        match r.fillers.entry(filler) {
            Entry::Vacant(v) => {
                v.insert(entry);
                Ok(())
            }
            Entry::Occupied(_) => Err(AggregateError::Format("duplicate joint row".into())),
        }
    }
}

/// The persisted unit: counts plus the hierarchy they were built against
/// and the text of every sentence referenced by a retained example.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexBundle {
    pub index: FrequencyIndex,
    pub hierarchy: SemanticHierarchy,
    pub sentences: SentenceTable,
}

impl IndexBundle {
    pub fn new(index: FrequencyIndex, hierarchy: SemanticHierarchy, sentences: SentenceTable) -> Self {
        IndexBundle {
            index,
            hierarchy,
            sentences,
        }
    }

    /// Drops sentences not referenced by any retained example.
    pub fn prune_sentences(&mut self) {
        let mut used = std::collections::BTreeSet::new();
        for (_, _, _, _, j) in self.index.joints() {
            for e in &j.examples {
                used.insert(e.sent_id.as_str());
            }
        }
        self.sentences.retain(|id, _| used.contains(id.as_str()));
    }
}

/// First line of a persisted index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexHeader {
    pub format: String,
    pub format_version: u32,
    pub hierarchy_checksum: String,
    pub languages: Vec<String>,
    pub record_count: u64,
    pub examples_cap: usize,
    pub class_count: usize,
    pub joint_count: usize,
    pub sentence_count: usize,
}

type JointRow = (String, String, String, String, String, String, String, u64, Vec<(String, u32, u32)>);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BodyRow {
    Class(String, String, Option<String>),
    Sentence(String, String, String, String),
    Joint(JointRow),
}

/// Writes the bundle as JSON lines: a header, then one row per class, one
/// per joint key, and one per sentence, each section in sorted order.
pub fn persist_index<W: Write>(bundle: &IndexBundle, mut out: W) -> Result<(), AggregateError> {
    let index = &bundle.index;
    let checksum = bundle.hierarchy.checksum();
    let header = IndexHeader {
        format: INDEX_FORMAT.into(),
        format_version: INDEX_FORMAT_VERSION,
        hierarchy_checksum: checksum,
        languages: index.languages().map(str::to_string).collect(),
        record_count: index.total_links(),
        examples_cap: index.examples_cap,
        class_count: bundle.hierarchy.len(),
        joint_count: index.joints().count(),
        sentence_count: bundle.sentences.len(),
    };
    line(&mut out, &header)?;

    for c in bundle.hierarchy.classes() {
        line(&mut out, &BodyRow::Class("C".into(), c.name.clone(), c.parent.clone()))?;
    }
    for (lang, core, role, filler, j) in index.joints() {
        let row: JointRow = (
            "J".into(),
            lang.into(),
            core.lemma.clone(),
            core.semclass.clone(),
            role.into(),
            filler.lemma.clone(),
            filler.semclass.clone(),
            j.count,
            j.examples
                .iter()
                .map(|e| (e.sent_id.clone(), e.core_token, e.filler_token))
                .collect(),
        );
        line(&mut out, &BodyRow::Joint(row))?;
    }
    for s in bundle.sentences.values() {
        line(
            &mut out,
            &BodyRow::Sentence("S".into(), s.sent_id.clone(), s.language.clone(), s.text.clone()),
        )?;
    }
    out.flush()?;
    Ok(())
}

fn line<W: Write, T: Serialize>(out: &mut W, value: &T) -> Result<(), AggregateError> {
    serde_json::to_writer(&mut *out, value).map_err(|e| AggregateError::Format(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Reads only the header line.
pub fn read_index_header<R: BufRead>(mut reader: R) -> Result<IndexHeader, AggregateError> {
    let mut first = String::new();
    reader.read_line(&mut first)?;
    parse_header(&first)
}

fn parse_header(line: &str) -> Result<IndexHeader, AggregateError> {
    let value: serde_json::Value = serde_json::from_str(line)
        .map_err(|e| AggregateError::Version {
            found: format!("unreadable header ({e})"),
            expected: INDEX_FORMAT_VERSION,
        })?;
    let version = value.get("format_version").cloned();
    let format_ok = value.get("format").and_then(|f| f.as_str()) == Some(INDEX_FORMAT);
    if !format_ok || version.as_ref().and_then(|v| v.as_u64()) != Some(INDEX_FORMAT_VERSION as u64) {
        return Err(AggregateError::Version {
            found: version.map_or_else(|| "missing".into(), |v| v.to_string()),
            expected: INDEX_FORMAT_VERSION,
        });
    }
    serde_json::from_value(value).map_err(|e| AggregateError::Format(format!("header: {e}")))
}

/// Loads a persisted index. When `expected_checksum` is given, the embedded
/// hierarchy must match it.
pub fn load_index<R: BufRead>(
    reader: R,
    expected_checksum: Option<&str>,
) -> Result<IndexBundle, AggregateError> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(l) => parse_header(&l?)?,
        None => {
            return Err(AggregateError::Version {
                found: "empty file".into(),
                expected: INDEX_FORMAT_VERSION,
            })
        }
    };
    if let Some(expected) = expected_checksum {
        if expected != header.hierarchy_checksum {
            return Err(AggregateError::Checksum {
                expected: expected.into(),
                found: header.hierarchy_checksum,
            });
        }
    }

    let mut classes = Vec::with_capacity(header.class_count);
    let mut index = FrequencyIndex::new(header.examples_cap);
    index.hierarchy_checksum = Some(header.hierarchy_checksum.clone());
    let mut sentences = SentenceTable::new();
    let mut joints = 0;
    for (n, line) in lines.enumerate() {
        let line = line?;
        let row: BodyRow = serde_json::from_str(&line)
            .map_err(|e| AggregateError::Format(format!("row {}: {e}", n + 2)))?;
        match row {
            BodyRow::Class(tag, name, parent) if tag == "C" => {
                classes.push(SemanticClass { name, parent })
            }
            BodyRow::Joint((tag, lang, cl, cc, role, fl, fc, count, ex)) if tag == "J" => {
                if ex.len() > header.examples_cap {
                    return Err(AggregateError::Format(format!("row {}: too many examples", n + 2)));
                }
                let entry = JointEntry {
                    count,
                    examples: ex
                        .into_iter()
                        .map(|(sent_id, core_token, filler_token)| ExampleRef {
                            sent_id,
                            core_token,
                            filler_token,
                        })
                        .collect(),
                };
                let core = SenseKey { lemma: cl, semclass: cc };
                let filler = SenseKey { lemma: fl, semclass: fc };
                index.insert_joint(&lang, core, role, filler, entry)?;
                joints += 1;
            }
            BodyRow::Sentence(tag, sent_id, language, text) if tag == "S" => {
                sentences.insert(
                    sent_id.clone(),
                    SentenceEntry {
                        sent_id,
                        language,
                        text,
                    },
                );
            }
            _ => return Err(AggregateError::Format(format!("row {}: unknown row tag", n + 2))),
        }
    }

    let hierarchy = SemanticHierarchy::new(classes)
        .map_err(|e| AggregateError::Format(format!("embedded hierarchy: {e}")))?;
    let found = hierarchy.checksum();
    if found != header.hierarchy_checksum {
        return Err(AggregateError::Checksum {
            expected: header.hierarchy_checksum,
            found,
        });
    }
    let languages: Vec<String> = index.languages().map(str::to_string).collect();
    if joints != header.joint_count
        || sentences.len() != header.sentence_count
        || index.total_links() != header.record_count
        || languages != header.languages
    {
        return Err(AggregateError::Format("body does not match header counts".into()));
    }
    Ok(IndexBundle {
        index,
        hierarchy,
        sentences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::hierarchy_from_pairs;

    fn rec(lemma: &str, role: &str, filler: &str, sent: &str) -> LinkRecord {
        LinkRecord {
            core: Lexeme::new("en", lemma, "TO_FOCUS"),
            role: role.into(),
            filler: SenseKey::new(filler, "ACTIVITY"),
            sent_id: sent.into(),
            core_token: 1,
            filler_token: 3,
        }
    }

    fn hierarchy() -> SemanticHierarchy {
        hierarchy_from_pairs(&[("ENTITY", ""), ("TO_FOCUS", "ENTITY"), ("ACTIVITY", "ENTITY")])
            .unwrap()
    }

    #[test]
    fn single_record_sets_every_level() {
        let mut idx = FrequencyIndex::default();
        let r = rec("focus", "Object", "effort", "s1");
        idx.accumulate(&r);
        let lex = &r.core;
        assert_eq!(idx.core_total(lex), 1);
        assert_eq!(idx.role_total(lex, "Object"), 1);
        assert_eq!(idx.joint(lex, "Object", &r.filler), 1);
        assert_eq!(idx.filler_total("en", &r.filler), 1);
        assert_eq!(idx.total_links(), 1);
        idx.check_consistency().unwrap();
    }

    #[test]
    fn example_cap_is_first_come() {
        let mut idx = FrequencyIndex::new(1);
        idx.accumulate(&rec("focus", "Object", "effort", "s1"));
        idx.accumulate(&rec("focus", "Object", "effort", "s2"));
        let (_, _, _, _, j) = idx.joints().next().unwrap();
        assert_eq!(j.count, 2);
        assert_eq!(j.examples.len(), 1);
        assert_eq!(j.examples[0].sent_id, "s1");
    }

    #[test]
    fn merge_identity_and_example_order() {
        let mut a = FrequencyIndex::new(3);
        let mut b = FrequencyIndex::new(3);
        for s in ["a1", "a2"] {
            a.accumulate(&rec("focus", "Object", "effort", s));
        }
        for s in ["b1", "b2"] {
            b.accumulate(&rec("focus", "Object", "effort", s));
        }
        let same = a.clone().merge(FrequencyIndex::new(3)).unwrap();
        assert_eq!(same, a);

        let m = a.clone().merge(b.clone()).unwrap();
        let (_, _, _, _, j) = m.joints().next().unwrap();
        assert_eq!(j.count, 4);
        let ids: Vec<_> = j.examples.iter().map(|e| e.sent_id.as_str()).collect();
        assert_eq!(ids, ["a1", "a2", "b1"]);

        let rev = b.merge(a).unwrap();
        let (_, _, _, _, j) = rev.joints().next().unwrap();
        assert_eq!(j.examples[0].sent_id, "b1");
    }

    #[test]
    fn merge_rejects_mismatched_hierarchies() {
        let a = FrequencyIndex::default().with_hierarchy(&hierarchy());
        let other = hierarchy_from_pairs(&[("ROOT", "")]).unwrap();
        let b = FrequencyIndex::default().with_hierarchy(&other);
        assert_eq!(a.merge(b).unwrap_err().code(), "E_CHECKSUM");
    }

    #[test]
    fn threshold_boundary() {
        let mut idx = FrequencyIndex::default();
        for _ in 0..199 {
            idx.accumulate(&rec("a", "Object", "x", "s"));
        }
        for _ in 0..200 {
            idx.accumulate(&rec("b", "Object", "x", "s"));
        }
        let names: Vec<_> = idx
            .eligible_lexemes(200)
            .into_iter()
            .map(|l| l.lemma)
            .collect();
        assert_eq!(names, ["b"]);
        assert_eq!(idx.eligible_lexemes(0).len(), 2);
    }

    #[test]
    fn persist_round_trip() {
        let mut idx = FrequencyIndex::default().with_hierarchy(&hierarchy());
        idx.accumulate(&rec("focus", "Object", "effort", "s1"));
        idx.accumulate(&rec("focus", "Time", "moment", "s2"));
        let mut sentences = SentenceTable::new();
        sentences.insert(
            "s1".into(),
            SentenceEntry {
                sent_id: "s1".into(),
                language: "en".into(),
                text: "We focus our effort.".into(),
            },
        );
        let bundle = IndexBundle::new(idx, hierarchy(), sentences);
        let mut buf = Vec::new();
        persist_index(&bundle, &mut buf).unwrap();
        let loaded = load_index(&buf[..], Some(&hierarchy().checksum())).unwrap();
        assert_eq!(loaded, bundle);
        let mut again = Vec::new();
        persist_index(&loaded, &mut again).unwrap();
        assert_eq!(again, buf);

        let header = read_index_header(&buf[..]).unwrap();
        assert_eq!(header.record_count, 2);
        assert_eq!(header.languages, ["en"]);
    }

    #[test]
    fn empty_index_round_trips() {
        let bundle = IndexBundle::new(
            FrequencyIndex::default().with_hierarchy(&hierarchy()),
            hierarchy(),
            SentenceTable::new(),
        );
        let mut buf = Vec::new();
        persist_index(&bundle, &mut buf).unwrap();
        assert_eq!(load_index(&buf[..], None).unwrap(), bundle);
    }

    #[test]
    fn load_errors() {
        let bundle = IndexBundle::new(FrequencyIndex::default(), hierarchy(), SentenceTable::new());
        let mut buf = Vec::new();
        persist_index(&bundle, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();

        let bumped = text.replacen("\"format_version\":1", "\"format_version\":2", 1);
        assert_eq!(load_index(bumped.as_bytes(), None).unwrap_err().code(), "E_VERSION");
        assert_eq!(load_index("garbage\n".as_bytes(), None).unwrap_err().code(), "E_VERSION");
        assert_eq!(load_index(&b""[..], None).unwrap_err().code(), "E_VERSION");
        assert_eq!(
            load_index(&buf[..], Some("deadbeef")).unwrap_err().code(),
            "E_CHECKSUM"
        );
        let tampered = text.replace("[\"C\",\"TO_FOCUS\",\"ENTITY\"]", "[\"C\",\"TO_FOCUS\",\"ACTIVITY\"]");
        assert_ne!(tampered, text);
        assert_eq!(load_index(tampered.as_bytes(), None).unwrap_err().code(), "E_CHECKSUM");
    }
}
