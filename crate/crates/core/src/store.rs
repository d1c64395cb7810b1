//! On-disk sketch store and the read-only query layer over it.
//!
//! Layout under the store root:
//!
//! ```text
//! manifest.json
//! hierarchy.tsv
//! marginals/<lang>.json            filler totals used for re-scoring
//! sketches/<lang>/<lemma>/<class>.json
//! pairs.json
//! ```
//!
//! Path segments are percent-encoded (everything except ASCII letters,
//! digits, `-` and `_`), so distinct lexemes never share a path and no
//! segment can be `.` or `..`.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::contrastive::{
    self, field_structure_report, AffinityWeights, ClassRollup, ContrastError, FieldReport,
    PairDiff, SketchPair,
};
use crate::model::{Config, Lexeme, Measure, SemanticHierarchy, SenseKey};
use crate::sketch::{flag_suspicious_fillers, Sketch, SketchError};

pub const STORE_FORMAT: &str = "semsketch-store";
pub const STORE_FORMAT_VERSION: u32 = 1;
const MANIFEST: &str = "manifest.json";

const SEGMENT: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'_');

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store version error: {0}")]
    Version(String),
    #[error("store checksum error: {0}")]
    Checksum(String),
    #[error("malformed store content: {0}")]
    Format(String),
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::Version(_) => "E_VERSION",
            StoreError::Checksum(_) => "E_CHECKSUM",
            StoreError::Format(_) => "E_FORMAT",
            StoreError::Io(_) => "E_IO",
        }
    }
}

pub fn encode_segment(s: &str) -> String {
    utf8_percent_encode(s, SEGMENT).to_string()
}

pub fn decode_segment(s: &str) -> Option<String> {
    percent_decode_str(s).decode_utf8().ok().map(|c| c.into_owned())
}

/// Relative path of a sketch file.
pub fn sketch_path(lexeme: &Lexeme) -> PathBuf {
    PathBuf::from("sketches")
        .join(encode_segment(&lexeme.language))
        .join(encode_segment(&lexeme.lemma))
        .join(format!("{}.json", encode_segment(&lexeme.semclass)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub format_version: u32,
    pub hierarchy_checksum: String,
    pub languages: Vec<String>,
    pub sketch_counts: BTreeMap<String, usize>,
    pub pair_count: usize,
    pub build_config: Config,
    pub divergence_threshold: f64,
    pub content_checksum: String,
}

/// Everything a store holds, in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchSet {
    pub hierarchy: SemanticHierarchy,
    pub config: Config,
    pub divergence_threshold: f64,
    /// Sorted by lexeme. Filler lists are complete; `config.top_fillers`
    /// is applied when serving.
    pub sketches: Vec<Sketch>,
    /// language -> filler -> f(*, *, filler)
    pub filler_totals: BTreeMap<String, BTreeMap<SenseKey, u64>>,
    pub pairs: Vec<PairDiff>,
}

impl SketchSet {
    pub fn new(hierarchy: SemanticHierarchy, config: Config) -> Self {
        SketchSet {
            hierarchy,
            config,
            divergence_threshold: contrastive::DEFAULT_DIVERGENCE_THRESHOLD,
            sketches: Vec::new(),
            filler_totals: BTreeMap::new(),
            pairs: Vec::new(),
        }
    }

    pub fn languages(&self) -> Vec<String> {
        let langs: std::collections::BTreeSet<&str> =
            self.sketches.iter().map(|s| s.lexeme.language.as_str()).collect();
        langs.into_iter().map(str::to_string).collect()
    }

    /// Puts sketches, pairs and marginals in canonical order.
    pub fn normalize(&mut self) {
        self.sketches.sort_by(|a, b| a.lexeme.cmp(&b.lexeme));
        self.sketches.dedup_by(|a, b| a.lexeme == b.lexeme);
        self.pairs.sort_by(|a, b| {
            (&a.pair.semclass, &a.pair.left.lemma, &a.pair.right.lemma, &a.pair.left, &a.pair.right)
                .cmp(&(&b.pair.semclass, &b.pair.left.lemma, &b.pair.right.lemma, &b.pair.left, &b.pair.right))
        });
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec(value).expect("store values serialize");
    v.push(b'\n');
    v
}

type MarginalRow = (String, String, u64);

fn content_files(set: &SketchSet) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = vec![(PathBuf::from("hierarchy.tsv"), set.hierarchy.to_tsv().into_bytes())];
    for (lang, totals) in &set.filler_totals {
        let rows: Vec<MarginalRow> = totals
            .iter()
            .map(|(k, n)| (k.lemma.clone(), k.semclass.clone(), *n))
            .collect();
        files.push((
            PathBuf::from("marginals").join(format!("{}.json", encode_segment(lang))),
            to_json(&rows),
        ));
    }
    for s in &set.sketches {
        files.push((sketch_path(&s.lexeme), to_json(s)));
    }
    files.push((PathBuf::from("pairs.json"), to_json(&set.pairs)));
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

fn checksum_files(files: &[(PathBuf, Vec<u8>)]) -> String {
    let mut h = Sha256::new();
    for (path, bytes) in files {
        let p = path.to_string_lossy().replace('\\', "/");
        h.update(p.as_bytes());
        h.update([0]);
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    hex::encode(h.finalize())
}

/// Writes the set under `root`, replacing earlier content. The manifest is
/// written last, to a temporary file renamed into place.
pub fn save_sketch_set(root: &Path, set: &SketchSet) -> Result<Manifest, StoreError> {
    let mut set = set.clone();
    set.normalize();
    fs::create_dir_all(root)?;
    for dir in ["sketches", "marginals"] {
        let p = root.join(dir);
        if p.exists() {
            fs::remove_dir_all(&p)?;
        }
    }
    let files = content_files(&set);
    for (rel, bytes) in &files {
        let path = root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, bytes)?;
    }

    let mut sketch_counts = BTreeMap::new();
    for s in &set.sketches {
        *sketch_counts.entry(s.lexeme.language.clone()).or_default() += 1;
    }
    let manifest = Manifest {
        format: STORE_FORMAT.into(),
        format_version: STORE_FORMAT_VERSION,
        hierarchy_checksum: set.hierarchy.checksum(),
        languages: set.languages(),
        sketch_counts,
        pair_count: set.pairs.len(),
        build_config: set.config.clone(),
        divergence_threshold: set.divergence_threshold,
        content_checksum: checksum_files(&files),
    };
    let tmp = root.join(format!("{MANIFEST}.tmp"));
    fs::write(&tmp, to_json(&manifest))?;
    fs::rename(&tmp, root.join(MANIFEST))?;
    Ok(manifest)
}

pub fn read_manifest(root: &Path) -> Result<Manifest, StoreError> {
    let bytes = fs::read(root.join(MANIFEST))?;
    let value: serde_json::Value = serde_json::from_slice(&bytes)
        .map_err(|e| StoreError::Version(format!("unreadable manifest: {e}")))?;
    let format_ok = value.get("format").and_then(|v| v.as_str()) == Some(STORE_FORMAT);
    let version = value.get("format_version").and_then(|v| v.as_u64());
    if !format_ok || version != Some(STORE_FORMAT_VERSION as u64) {
        return Err(StoreError::Version(format!(
            "expected {STORE_FORMAT} v{STORE_FORMAT_VERSION}, found {:?} v{:?}",
            value.get("format"),
            version
        )));
    }
    serde_json::from_value(value).map_err(|e| StoreError::Version(format!("manifest fields: {e}")))
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> io::Result<()> {
    let full = root.join(dir);
    if !full.exists() {
        return Ok(());
    }
    for entry in fs::read_dir(full)? {
        let entry = entry?;
        let rel = dir.join(entry.file_name());
        if entry.file_type()?.is_dir() {
            collect_files(root, &rel, out)?;
        } else {
            out.push(rel);
        }
    }
    Ok(())
}

/// Loads and verifies a store. Nothing is returned unless the manifest,
/// hierarchy and every content file agree.
pub fn load_sketch_set(root: &Path, expected_hierarchy: Option<&str>) -> Result<SketchSet, StoreError> {
    let manifest = read_manifest(root)?;
    if let Some(expected) = expected_hierarchy {
        if expected != manifest.hierarchy_checksum {
            return Err(StoreError::Checksum(format!(
                "store built against hierarchy {}, expected {expected}",
                manifest.hierarchy_checksum
            )));
        }
    }

    let mut files = vec![PathBuf::from("hierarchy.tsv"), PathBuf::from("pairs.json")];
    collect_files(root, Path::new("marginals"), &mut files)?;
    collect_files(root, Path::new("sketches"), &mut files)?;
    let mut contents = Vec::with_capacity(files.len());
    for rel in files {
        let bytes = fs::read(root.join(&rel))?;
        contents.push((rel, bytes));
    }
    contents.sort_by(|a, b| a.0.cmp(&b.0));
    let found = checksum_files(&contents);
    if found != manifest.content_checksum {
        return Err(StoreError::Checksum(format!(
            "content checksum {found} does not match manifest {}",
            manifest.content_checksum
        )));
    }

    let mut hierarchy = None;
    let mut sketches = Vec::new();
    let mut filler_totals = BTreeMap::new();
    let mut pairs = Vec::new();
    let bad = |p: &Path, e: &dyn std::fmt::Display| StoreError::Format(format!("{}: {e}", p.display()));
    for (rel, bytes) in &contents {
        let first = rel.components().next().map(|c| c.as_os_str().to_string_lossy().into_owned());
        match first.as_deref() {
            Some("hierarchy.tsv") => {
                hierarchy = Some(SemanticHierarchy::from_tsv(&bytes[..]).map_err(|e| bad(rel, &e))?)
            }
            Some("pairs.json") => pairs = serde_json::from_slice(bytes).map_err(|e| bad(rel, &e))?,
            Some("marginals") => {
                let stem = rel.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
                let lang = decode_segment(stem).ok_or_else(|| bad(rel, &"bad file name"))?;
                let rows: Vec<MarginalRow> = serde_json::from_slice(bytes).map_err(|e| bad(rel, &e))?;
                let map: BTreeMap<SenseKey, u64> = rows
                    .into_iter()
                    .map(|(lemma, semclass, n)| (SenseKey { lemma, semclass }, n))
                    .collect();
                filler_totals.insert(lang, map);
            }
            Some("sketches") => {
                let s: Sketch = serde_json::from_slice(bytes).map_err(|e| bad(rel, &e))?;
                if &sketch_path(&s.lexeme) != rel {
                    return Err(bad(rel, &"path does not match the sketch's lexeme"));
                }
                sketches.push(s);
            }
            _ => return Err(bad(rel, &"unexpected file")),
        }
    }
    let hierarchy = hierarchy.ok_or_else(|| StoreError::Format("missing hierarchy.tsv".into()))?;
    if hierarchy.checksum() != manifest.hierarchy_checksum {
        return Err(StoreError::Checksum("hierarchy.tsv does not match manifest".into()));
    }

    let mut set = SketchSet {
        hierarchy,
        config: manifest.build_config.clone(),
        divergence_threshold: manifest.divergence_threshold,
        sketches,
        filler_totals,
        pairs,
    };
    set.normalize();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for s in &set.sketches {
        *counts.entry(s.lexeme.language.clone()).or_default() += 1;
    }
    if counts != manifest.sketch_counts || set.pairs.len() != manifest.pair_count {
        return Err(StoreError::Checksum("manifest counts do not match store content".into()));
    }
    Ok(set)
}

/// Errors from store queries.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Contrast(#[from] ContrastError),
    #[error(transparent)]
    Sketch(#[from] SketchError),
}

impl QueryError {
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::NotFound(_) => "E_NOT_FOUND",
            QueryError::BadRequest(_) => "E_BAD_REQUEST",
            QueryError::Contrast(e) => e.code(),
            QueryError::Sketch(e) => e.code(),
        }
    }
}

/// One page of a slot's ranked filler list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotPage {
    pub role: String,
    pub link_count: u64,
    pub distinct_fillers: usize,
    pub offset: usize,
    pub limit: usize,
    pub total: usize,
    pub fillers: Vec<crate::sketch::FillerEntry>,
}

/// A loaded, immutable store with lookup tables.
#[derive(Debug, Clone)]
pub struct SketchStore {
    set: SketchSet,
    by_lexeme: HashMap<Lexeme, usize>,
}

impl SketchStore {
    pub fn open(root: &Path) -> Result<Self, StoreError> {
        Ok(Self::from_set(load_sketch_set(root, None)?))
    }

    pub fn from_set(mut set: SketchSet) -> Self {
        set.normalize();
        let by_lexeme = set
            .sketches
            .iter()
            .enumerate()
            .map(|(i, s)| (s.lexeme.clone(), i))
            .collect();
        SketchStore { set, by_lexeme }
    }

    pub fn set(&self) -> &SketchSet {
        &self.set
    }

    pub fn languages(&self) -> Vec<String> {
        self.set.languages()
    }

    /// Lexemes of `lang` whose lemma starts with `prefix`, in sorted order.
    pub fn lexemes(&self, lang: Option<&str>, prefix: &str) -> Vec<&Lexeme> {
        let prefix = crate::model::nfc(prefix);
        self.set
            .sketches
            .iter()
            .map(|s| &s.lexeme)
            .filter(|l| lang.is_none_or(|x| l.language == x))
            .filter(|l| l.lemma.starts_with(&prefix))
            .collect()
    }

    /// The complete stored sketch.
    pub fn full_sketch(&self, lexeme: &Lexeme) -> Result<&Sketch, QueryError> {
        self.by_lexeme
            .get(lexeme)
            .map(|&i| &self.set.sketches[i])
            .ok_or_else(|| QueryError::NotFound(lexeme.to_string()))
    }

    /// The complete sketch ranked under `measure` (re-scored if it differs
    /// from the build measure).
    pub fn ranked_sketch(&self, lexeme: &Lexeme, measure: Option<Measure>) -> Result<Sketch, QueryError> {
        let mut sketch = self.full_sketch(lexeme)?.clone();
        if let Some(m) = measure {
            if m != sketch.config.measure {
                let totals = self.set.filler_totals.get(&lexeme.language);
                sketch.rerank(m, |k| totals.and_then(|t| t.get(k)).copied().unwrap_or(0))?;
                flag_suspicious_fillers(&mut sketch, &self.set.hierarchy);
            }
        }
        Ok(sketch)
    }

    /// The sketch as displayed: each slot cut to `top` fillers (default:
    /// the build's `top_fillers`).
    pub fn sketch(&self, lexeme: &Lexeme, top: Option<usize>, measure: Option<Measure>) -> Result<Sketch, QueryError> {
        let top = top.unwrap_or(self.set.config.top_fillers);
        Ok(self.ranked_sketch(lexeme, measure)?.truncated(top))
    }

    /// Fillers `offset .. offset + limit` of one slot's full ranking.
    pub fn slot_page(
        &self,
        lexeme: &Lexeme,
        role: &str,
        offset: usize,
        limit: usize,
        measure: Option<Measure>,
    ) -> Result<SlotPage, QueryError> {
        let sketch = self.ranked_sketch(lexeme, measure)?;
        let slot = sketch
            .slot(role)
            .ok_or_else(|| QueryError::NotFound(format!("{lexeme} has no {role} slot")))?;
        let total = slot.fillers.len();
        let fillers = slot
            .fillers
            .iter()
            .skip(offset)
            .take(limit)
            .cloned()
            .collect();
        Ok(SlotPage {
            role: slot.role.clone(),
            link_count: slot.link_count,
            distinct_fillers: slot.distinct_fillers,
            offset,
            limit,
            total,
            fillers,
        })
    }

    pub fn pairs(&self, semclass: Option<&str>) -> Vec<&PairDiff> {
        self.set
            .pairs
            .iter()
            .filter(|p| semclass.is_none_or(|c| p.pair.semclass == c))
            .collect()
    }

    /// The stored pair and diff if present; otherwise computed on the fly
    /// when both sketches exist and share a class.
    pub fn pair_diff(&self, left: &Lexeme, right: &Lexeme) -> Result<PairDiff, QueryError> {
        if let Some(p) = self
            .set
            .pairs
            .iter()
            .find(|p| &p.pair.left == left && &p.pair.right == right)
        {
            return Ok(p.clone());
        }
        let l = self.full_sketch(left)?;
        let r = self.full_sketch(right)?;
        if l.lexeme.semclass != r.lexeme.semclass || l.lexeme.language == r.lexeme.language {
            return Err(QueryError::BadRequest(format!(
                "{left} and {right} are not a cross-language pair of one class"
            )));
        }
        let pair = SketchPair::new(l, r, AffinityWeights::default());
        Ok(contrastive::pair_with_diff(&pair, self.set.divergence_threshold))
    }

    /// Field report for `semclass` between the first language and all
    /// others present in the store.
    pub fn class_report(&self, semclass: &str, role: &str, depth: Option<usize>) -> Result<FieldReport, QueryError> {
        let langs = self.languages();
        let Some(first) = langs.first() else {
            return Err(QueryError::NotFound(semclass.to_string()));
        };
        let (left, right): (Vec<Sketch>, Vec<Sketch>) = self
            .set
            .sketches
            .iter()
            .filter(|s| s.lexeme.semclass == semclass)
            .cloned()
            .partition(|s| &s.lexeme.language == first);
        if left.is_empty() && right.is_empty() {
            return Err(QueryError::NotFound(semclass.to_string()));
        }
        let rollup = match depth {
            Some(d) => ClassRollup::Depth(&self.set.hierarchy, d),
            None => ClassRollup::Exact,
        };
        Ok(field_structure_report(semclass, &left, &right, role, rollup)?)
    }
}
