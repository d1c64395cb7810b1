//! Cross-language comparison of sketches that share a semantic class.
//!
//! Fillers are compared through their semantic classes only. Lemmas never
//! match across languages, classes do.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Lexeme, SemanticHierarchy};
use crate::sketch::{Sketch, Slot};

pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 0.5;
pub const DEFAULT_FIELD_ROLE: &str = "Object";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContrastError {
    #[error("sketch {0} has no slots")]
    Empty(Lexeme),
    #[error("no {language} sketches in class {semclass}")]
    EmptyClass { semclass: String, language: String },
    #[error("curated pairs line {line}: {message}")]
    Curated { line: usize, message: String },
}

impl ContrastError {
    pub fn code(&self) -> &'static str {
        match self {
            ContrastError::Empty(_) => "E_EMPTY",
            ContrastError::EmptyClass { .. } => "E_EMPTY_CLASS",
            ContrastError::Curated { .. } => "E_FORMAT",
        }
    }
}

/// Relative weight of the role-set and filler-class terms in
/// [`affinity`]. The two are normalized by their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffinityWeights {
    pub roles: f64,
    pub fillers: f64,
}

impl Default for AffinityWeights {
    fn default() -> Self {
        AffinityWeights {
            roles: 0.5,
            fillers: 0.5,
        }
    }
}

/// Two sketches of the same class in different languages.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchPair<'a> {
    pub semclass: String,
    pub left: &'a Sketch,
    pub right: &'a Sketch,
    pub affinity: f64,
}

impl<'a> SketchPair<'a> {
    pub fn new(left: &'a Sketch, right: &'a Sketch, weights: AffinityWeights) -> Self {
        SketchPair {
            semclass: left.lexeme.semclass.clone(),
            left,
            right,
            affinity: affinity(left, right, weights).unwrap_or(0.0),
        }
    }

    pub fn swapped(&self) -> SketchPair<'a> {
        SketchPair {
            semclass: self.semclass.clone(),
            left: self.right,
            right: self.left,
            affinity: self.affinity,
        }
    }

    pub fn record(&self) -> PairRecord {
        PairRecord {
            semclass: self.semclass.clone(),
            left: self.left.lexeme.clone(),
            right: self.right.lexeme.clone(),
            affinity: self.affinity,
        }
    }
}

/// Serializable form of a pair: lexemes instead of full sketches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub semclass: String,
    pub left: Lexeme,
    pub right: Lexeme,
    pub affinity: f64,
}

/// Every left/right combination within each class present on both sides,
/// sorted by (class, left lemma, right lemma). Same-language combinations
/// are skipped.
pub fn pair_by_class<'a>(
    left: &'a [Sketch],
    right: &'a [Sketch],
    weights: AffinityWeights,
) -> Vec<SketchPair<'a>> {
    let mut by_class: BTreeMap<&str, Vec<&Sketch>> = BTreeMap::new();
    for s in right {
        by_class.entry(&s.lexeme.semclass).or_default().push(s);
    }
    let mut out = Vec::new();
    for l in left {
        if let Some(rs) = by_class.get(l.lexeme.semclass.as_str()) {
            for r in rs {
                if l.lexeme.language != r.lexeme.language {
                    out.push(SketchPair::new(l, r, weights));
                }
            }
        }
    }
    out.sort_by(|a, b| {
        (&a.semclass, &a.left.lexeme.lemma, &a.right.lexeme.lemma, &a.left.lexeme, &a.right.lexeme)
            .cmp(&(&b.semclass, &b.left.lexeme.lemma, &b.right.lexeme.lemma, &b.left.lexeme, &b.right.lexeme))
    });
    out
}

/// Reads a curation list: one `LEFT<TAB>RIGHT` pair per line, each side in
/// `lang:lemma:SEMCLASS` form. `#` comments and blank lines are skipped.
pub fn parse_curated<R: BufRead>(reader: R) -> Result<BTreeSet<(Lexeme, Lexeme)>, ContrastError> {
    let mut out = BTreeSet::new();
    for (n, line) in reader.lines().enumerate() {
        let err = |message: String| ContrastError::Curated {
            line: n + 1,
            message,
        };
        let line = line.map_err(|e| err(e.to_string()))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (l, r) = line
            .split_once('\t')
            .ok_or_else(|| err("expected two tab-separated lexemes".into()))?;
        let l: Lexeme = l.trim().parse().map_err(|e| err(format!("{e}")))?;
        let r: Lexeme = r.trim().parse().map_err(|e| err(format!("{e}")))?;
        out.insert((l, r));
    }
    Ok(out)
}

/// Keeps only pairs named in the curation list.
pub fn filter_curated<'a>(
    pairs: Vec<SketchPair<'a>>,
    curated: &BTreeSet<(Lexeme, Lexeme)>,
) -> Vec<SketchPair<'a>> {
    pairs
        .into_iter()
        .filter(|p| curated.contains(&(p.left.lexeme.clone(), p.right.lexeme.clone())))
        .collect()
}

/// Filler-class frequency vector of a slot: class -> summed filler counts.
pub fn class_distribution(slot: &Slot) -> BTreeMap<&str, u64> {
    let mut out = BTreeMap::new();
    for f in &slot.fillers {
        *out.entry(f.semclass.as_str()).or_default() += f.count;
    }
    out
}

fn cosine(a: &BTreeMap<&str, u64>, b: &BTreeMap<&str, u64>) -> f64 {
    let keys: BTreeSet<&str> = a.keys().chain(b.keys()).copied().collect();
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for k in keys {
        let x = a.get(k).copied().unwrap_or(0) as f64;
        let y = b.get(k).copied().unwrap_or(0) as f64;
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    // na and nb swap with the arguments; the product is commutative.
    dot / (na * nb).sqrt()
}

/// Weighted Jaccard of the two class distributions after normalizing each
/// to sum 1: `sum min(p, q) / sum max(p, q)`. Two empty slots overlap
/// fully, one empty slot not at all.
pub fn class_overlap(a: &BTreeMap<&str, u64>, b: &BTreeMap<&str, u64>) -> f64 {
    let ta: u64 = a.values().sum();
    let tb: u64 = b.values().sum();
    match (ta, tb) {
        (0, 0) => return 1.0,
        (0, _) | (_, 0) => return 0.0,
        _ => {}
    }
    let keys: BTreeSet<&str> = a.keys().chain(b.keys()).copied().collect();
    let (mut lo, mut hi) = (0.0, 0.0);
    for k in keys {
        let p = a.get(k).copied().unwrap_or(0) as f64 / ta as f64;
        let q = b.get(k).copied().unwrap_or(0) as f64 / tb as f64;
        lo += p.min(q);
        hi += p.max(q);
    }
    lo / hi
}

/// How closely two sketches correspond: a weighted mean of the Jaccard
/// index of their role sets and the mean cosine similarity of filler-class
/// vectors over shared roles (0 when no role is shared).
pub fn affinity(left: &Sketch, right: &Sketch, weights: AffinityWeights) -> Result<f64, ContrastError> {
    for s in [left, right] {
        if s.slots.is_empty() {
            return Err(ContrastError::Empty(s.lexeme.clone()));
        }
    }
    let lr = left.roles();
    let rr = right.roles();
    let shared: Vec<&str> = lr.intersection(&rr).copied().collect();
    let union = lr.union(&rr).count();
    let jaccard = shared.len() as f64 / union as f64;

    let filler_term = if shared.is_empty() {
        0.0
    } else {
        let total: f64 = shared
            .iter()
            .map(|role| {
                let a = class_distribution(left.slot(role).expect("shared role"));
                let b = class_distribution(right.slot(role).expect("shared role"));
                cosine(&a, &b)
            })
            .sum();
        total / shared.len() as f64
    };
    let wsum = weights.roles + weights.fillers;
    Ok((weights.roles * jaccard + weights.fillers * filler_term) / wsum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleGap {
    pub role: String,
    pub side: Side,
    pub link_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedRole {
    pub role: String,
    pub class_overlap: f64,
    pub left_only_classes: Vec<String>,
    pub right_only_classes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    RoleGap,
    FillerDivergence,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub role_gaps: Vec<RoleGap>,
    pub shared_roles: Vec<SharedRole>,
    pub verdicts: Vec<Verdict>,
}

impl DiffReport {
    pub fn gap(&self, role: &str) -> Option<&RoleGap> {
        self.role_gaps.iter().find(|g| g.role == role)
    }

    pub fn divergent_roles(&self, threshold: f64) -> Vec<&str> {
        self.shared_roles
            .iter()
            .filter(|s| s.class_overlap < threshold)
            .map(|s| s.role.as_str())
            .collect()
    }
}

/// Role gaps (roles on one side only) and per-shared-role filler class
/// overlap. A shared role whose overlap is below `threshold` is a filler
/// divergence.
pub fn diff(pair: &SketchPair<'_>, threshold: f64) -> DiffReport {
    let lr = pair.left.roles();
    let rr = pair.right.roles();

    let mut role_gaps: Vec<RoleGap> = lr
        .difference(&rr)
        .map(|r| (Side::Left, pair.left.slot(r).expect("own role")))
        .chain(
            rr.difference(&lr)
                .map(|r| (Side::Right, pair.right.slot(r).expect("own role"))),
        )
        .map(|(side, slot)| RoleGap {
            role: slot.role.clone(),
            side,
            link_count: slot.link_count,
        })
        .collect();
    role_gaps.sort_by(|a, b| (&a.role, a.side).cmp(&(&b.role, b.side)));

    let shared_roles: Vec<SharedRole> = lr
        .intersection(&rr)
        .map(|role| {
            let a = class_distribution(pair.left.slot(role).expect("shared role"));
            let b = class_distribution(pair.right.slot(role).expect("shared role"));
            let only = |x: &BTreeMap<&str, u64>, y: &BTreeMap<&str, u64>| {
                x.keys()
                    .filter(|k| !y.contains_key(*k))
                    .map(|k| k.to_string())
                    .collect()
            };
            SharedRole {
                role: role.to_string(),
                class_overlap: class_overlap(&a, &b),
                left_only_classes: only(&a, &b),
                right_only_classes: only(&b, &a),
            }
        })
        .collect();

    let mut verdicts = Vec::new();
    if !role_gaps.is_empty() {
        verdicts.push(Verdict::RoleGap);
    }
    if shared_roles.iter().any(|s| s.class_overlap < threshold) {
        verdicts.push(Verdict::FillerDivergence);
    }
    if verdicts.is_empty() {
        verdicts.push(Verdict::None);
    }
    DiffReport {
        role_gaps,
        shared_roles,
        verdicts,
    }
}

/// A pair together with its diff, in the on-disk and API shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDiff {
    pub pair: PairRecord,
    pub diff: DiffReport,
}

pub fn pair_with_diff(pair: &SketchPair<'_>, threshold: f64) -> PairDiff {
    PairDiff {
        pair: pair.record(),
        diff: diff(pair, threshold),
    }
}

/// How filler classes are grouped in a field report.
#[derive(Debug, Clone, Copy)]
pub enum ClassRollup<'a> {
    /// Use filler classes as they are.
    Exact,
    /// Replace each filler class by its ancestor at this depth (root = 0).
    Depth(&'a SemanticHierarchy, usize),
}

impl ClassRollup<'_> {
    fn apply<'s>(&'s self, class: &'s str) -> &'s str {
        match self {
            ClassRollup::Exact => class,
            ClassRollup::Depth(h, d) => h.ancestor_at_depth(class, *d).unwrap_or(class),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberDistribution {
    pub lemma: String,
    pub link_count: u64,
    pub classes: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageField {
    pub lang: String,
    pub members: Vec<MemberDistribution>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCoverage {
    pub filler_class: String,
    /// language -> lemmas whose slot contains this class
    pub covered_by: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldReport {
    pub semclass: String,
    pub role: String,
    pub languages: Vec<LanguageField>,
    pub partition_summary: Vec<ClassCoverage>,
}

impl FieldReport {
    /// Filler classes covered by one member lexeme.
    pub fn coverage_of(&self, lang: &str, lemma: &str) -> BTreeSet<&str> {
        self.languages
            .iter()
            .filter(|l| l.lang == lang)
            .flat_map(|l| &l.members)
            .filter(|m| m.lemma == lemma)
            .flat_map(|m| m.classes.keys().map(String::as_str))
            .collect()
    }
}

fn language_field(
    semclass: &str,
    sketches: &[Sketch],
    role: &str,
    rollup: ClassRollup<'_>,
) -> Vec<LanguageField> {
    let mut by_lang: BTreeMap<&str, Vec<MemberDistribution>> = BTreeMap::new();
    for s in sketches.iter().filter(|s| s.lexeme.semclass == semclass) {
        let mut classes = BTreeMap::new();
        let mut link_count = 0;
        if let Some(slot) = s.slot(role) {
            link_count = slot.link_count;
            for f in &slot.fillers {
                *classes.entry(rollup.apply(&f.semclass).to_string()).or_default() += f.count;
            }
        }
        by_lang.entry(&s.lexeme.language).or_default().push(MemberDistribution {
            lemma: s.lexeme.lemma.clone(),
            link_count,
            classes,
        });
    }
    by_lang
        .into_iter()
        .map(|(lang, mut members)| {
            members.sort_by(|a, b| a.lemma.cmp(&b.lemma));
            LanguageField {
                lang: lang.to_string(),
                members,
            }
        })
        .collect()
}

/// Describes how the lexemes of one class divide the filler classes of
/// `role` between them, per language.
pub fn field_structure_report(
    semclass: &str,
    left: &[Sketch],
    right: &[Sketch],
    role: &str,
    rollup: ClassRollup<'_>,
) -> Result<FieldReport, ContrastError> {
    let mut languages = Vec::new();
    for (side, set) in [("left", left), ("right", right)] {
        let fields = language_field(semclass, set, role, rollup);
        if fields.is_empty() {
            let language = set
                .first()
                .map_or_else(|| side.to_string(), |s| s.lexeme.language.clone());
            return Err(ContrastError::EmptyClass {
                semclass: semclass.to_string(),
                language,
            });
        }
        languages.extend(fields);
    }

    let mut coverage: BTreeMap<String, BTreeMap<String, Vec<String>>> = BTreeMap::new();
    for field in &languages {
        for m in &field.members {
            for class in m.classes.keys() {
                coverage
                    .entry(class.clone())
                    .or_default()
                    .entry(field.lang.clone())
                    .or_default()
                    .push(m.lemma.clone());
            }
        }
    }
    let partition_summary = coverage
        .into_iter()
        .map(|(filler_class, covered_by)| ClassCoverage {
            filler_class,
            covered_by,
        })
        .collect();

    Ok(FieldReport {
        semclass: semclass.to_string(),
        role: role.to_string(),
        languages,
        partition_summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Config;
    use crate::sketch::FillerEntry;

    type SlotSpec<'a> = (&'a str, &'a [(&'a str, &'a str, u64)]);

    fn sketch(lang: &str, lemma: &str, class: &str, slots: &[SlotSpec<'_>]) -> Sketch {
        Sketch {
            lexeme: Lexeme::new(lang, lemma, class),
            total_links: slots
                .iter()
                .flat_map(|(_, f)| f.iter().map(|x| x.2))
                .sum(),
            config: Config::default(),
            slots: slots
                .iter()
                .map(|(role, fillers)| Slot {
                    role: role.to_string(),
                    link_count: fillers.iter().map(|f| f.2).sum(),
                    distinct_fillers: fillers.len(),
                    flags: vec![],
                    fillers: fillers
                        .iter()
                        .map(|(l, c, n)| FillerEntry {
                            lemma: l.to_string(),
                            semclass: c.to_string(),
                            count: *n,
                            score: *n as f64,
                            flags: vec![],
                            examples: vec![],
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn cross_product_counts() {
        let s = |lang: &str, lemma: &str, class: &str| {
            sketch(lang, lemma, class, &[("Agent", &[("x", "PERSON", 1)])])
        };
        let en = vec![
            s("en", "do", "TO_COMMIT"),
            s("en", "play", "TO_COMMIT"),
            s("en", "pour", "TO_POUR"),
            s("en", "explode", "TO_BLOW_UP"),
        ];
        let ru = vec![
            s("ru", "делать", "TO_COMMIT"),
            s("ru", "играть", "TO_COMMIT"),
            s("ru", "лить", "TO_POUR"),
            s("ru", "сыпать", "TO_POUR"),
        ];
        let pairs = pair_by_class(&en, &ru, AffinityWeights::default());
        assert_eq!(pairs.len(), 6);
        assert_eq!(pairs[0].semclass, "TO_COMMIT");
        assert_eq!(pairs[0].left.lexeme.lemma, "do");
        assert_eq!(pairs[0].right.lexeme.lemma, "делать");
        assert!(pair_by_class(&en[3..], &ru, AffinityWeights::default()).is_empty());
    }

    #[test]
    fn affinity_worked_examples() {
        let w = AffinityWeights::default();
        let b: &[(&str, &str, u64)] = &[("water", "LIQUID", 3), ("sand", "FRIABLE", 1)];
        let a = sketch("en", "x", "C", &[("A", &[("p", "PERSON", 2)]), ("B", b)]);
        assert_eq!(affinity(&a, &a, w).unwrap(), 1.0);

        let disjoint = sketch("ru", "y", "C", &[("Z", &[("p", "PERSON", 2)])]);
        assert_eq!(affinity(&a, &disjoint, w).unwrap(), 0.0);

        let c = sketch("ru", "y", "C", &[("B", b), ("C", &[("t", "TIME", 4)])]);
        let v = affinity(&a, &c, w).unwrap();
        assert!((v - (0.5 / 3.0 + 0.5)).abs() < 1e-12, "{v}");
        assert_eq!(v, affinity(&c, &a, w).unwrap());

        let empty = sketch("ru", "z", "C", &[]);
        assert_eq!(affinity(&a, &empty, w).unwrap_err().code(), "E_EMPTY");
    }

    #[test]
    fn overlap_edges() {
        let e = BTreeMap::new();
        let x = BTreeMap::from([("A", 2u64)]);
        assert_eq!(class_overlap(&e, &e), 1.0);
        assert_eq!(class_overlap(&x, &e), 0.0);
        assert_eq!(class_overlap(&x, &BTreeMap::from([("A", 7u64)])), 1.0);
        let half = BTreeMap::from([("A", 1u64), ("B", 1)]);
        assert!((class_overlap(&x, &half) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identical_sketches_have_no_findings() {
        let a = sketch("en", "x", "C", &[("A", &[("p", "PERSON", 2)])]);
        let mut b = a.clone();
        b.lexeme.language = "ru".into();
        let pair = SketchPair::new(&a, &b, AffinityWeights::default());
        let d = diff(&pair, DEFAULT_DIVERGENCE_THRESHOLD);
        assert_eq!(d.verdicts, [Verdict::None]);
        assert!(d.role_gaps.is_empty());
        assert_eq!(pair.affinity, 1.0);
    }

    #[test]
    fn curated_list() {
        let src = "# pairs\nen:find:TO_SEEK_FIND\tru:найти:TO_SEEK_FIND\n\n";
        let set = parse_curated(src.as_bytes()).unwrap();
        assert_eq!(set.len(), 1);
        assert!(parse_curated("en:find:X\n".as_bytes()).is_err());
    }

    #[test]
    fn field_report_needs_both_sides() {
        let a = sketch("en", "pour", "TO_POUR", &[("Object", &[("water", "LIQUID", 2)])]);
        let err = field_structure_report("TO_POUR", &[a], &[], "Object", ClassRollup::Exact).unwrap_err();
        assert_eq!(err.code(), "E_EMPTY_CLASS");
    }
}
