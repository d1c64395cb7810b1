//! Building a sketch for one word sense: role slots ordered by size, each
//! holding ranked fillers with scores, example references and flags.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::FrequencyIndex;
use crate::ingest::SentenceTable;
use crate::model::{Config, Lexeme, Measure, SemanticHierarchy, SenseKey};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SketchError {
    #[error("lexeme {0} not found in index")]
    NotFound(Lexeme),
    #[error("lexeme {lexeme} has {count} links, below the threshold of {min_links}")]
    BelowThreshold {
        lexeme: Lexeme,
        count: u64,
        min_links: u64,
    },
    #[error("score domain error: {0}")]
    Domain(String),
}

impl SketchError {
    pub fn code(&self) -> &'static str {
        match self {
            SketchError::NotFound(_) => "E_NOT_FOUND",
            SketchError::BelowThreshold { .. } => "E_BELOW_THRESHOLD",
            SketchError::Domain(_) => "E_DOMAIN",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FillerFlag {
    Suspicious,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SlotFlag {
    Sparse,
    Narrow,
}

impl fmt::Display for SlotFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlotFlag::Sparse => "SPARSE",
            SlotFlag::Narrow => "NARROW",
        })
    }
}

/// A sentence reference; `text` is filled in by [`attach_examples`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub sent_id: String,
    pub text: Option<String>,
    pub core_token: u32,
    pub filler_token: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillerEntry {
    pub lemma: String,
    pub semclass: String,
    pub count: u64,
    pub score: f64,
    pub flags: Vec<FillerFlag>,
    pub examples: Vec<Example>,
}

impl FillerEntry {
    pub fn key(&self) -> SenseKey {
        SenseKey {
            lemma: self.lemma.clone(),
            semclass: self.semclass.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub role: String,
    pub link_count: u64,
    pub distinct_fillers: usize,
    pub flags: Vec<SlotFlag>,
    pub fillers: Vec<FillerEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sketch {
    pub lexeme: Lexeme,
    pub total_links: u64,
    pub config: Config,
    pub slots: Vec<Slot>,
}

impl Sketch {
    pub fn slot(&self, role: &str) -> Option<&Slot> {
        self.slots.iter().find(|s| s.role == role)
    }

    pub fn roles(&self) -> BTreeSet<&str> {
        self.slots.iter().map(|s| s.role.as_str()).collect()
    }

    /// Copy with every filler list cut to its first `top` entries.
    pub fn truncated(&self, top: usize) -> Sketch {
        let mut out = self.clone();
        for slot in &mut out.slots {
            slot.fillers.truncate(top);
        }
        out.config.top_fillers = top;
        out
    }

    /// Re-scores and re-sorts every slot under `measure`. `filler_total`
    /// supplies f(*, *, filler) for the sketch's language.
    pub fn rerank(
        &mut self,
        measure: Measure,
        filler_total: impl Fn(&SenseKey) -> u64,
    ) -> Result<(), SketchError> {
        for slot in &mut self.slots {
            for f in &mut slot.fillers {
                f.score = score_filler(f.count, slot.link_count, filler_total(&f.key()), measure)?;
            }
            slot.fillers.sort_by(filler_order);
        }
        self.config.measure = measure;
        Ok(())
    }
}

/// Association score of a filler with a (core, role) pair.
///
/// `Frequency` is the joint count itself; `Logdice` is
/// `14 + log2(2 * f_joint / (f_core_role + f_filler))`, bounded above by 14.
pub fn score_filler(
    f_joint: u64,
    f_core_role: u64,
    f_filler: u64,
    measure: Measure,
) -> Result<f64, SketchError> {
    if f_joint < 1 || f_core_role < f_joint || f_filler < f_joint {
        return Err(SketchError::Domain(format!(
            "need 1 <= f_joint <= marginals, got ({f_joint}, {f_core_role}, {f_filler})"
        )));
    }
    Ok(match measure {
        Measure::Frequency => f_joint as f64,
        Measure::Logdice => {
            14.0 + (2.0 * f_joint as f64 / (f_core_role as f64 + f_filler as f64)).log2()
        }
    })
}

/// Score descending, then count descending, lemma ascending, semclass
/// ascending.
pub fn filler_order(a: &FillerEntry, b: &FillerEntry) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| b.count.cmp(&a.count))
        .then_with(|| a.lemma.cmp(&b.lemma))
        .then_with(|| a.semclass.cmp(&b.semclass))
}

fn slot_order(a: &Slot, b: &Slot) -> Ordering {
    b.link_count
        .cmp(&a.link_count)
        .then_with(|| a.role.cmp(&b.role))
}

/// Builds the sketch with every filler of every slot ranked, ignoring
/// `top_fillers`. `max_roles` still applies.
pub fn build_full_sketch(
    index: &FrequencyIndex,
    lexeme: &Lexeme,
    config: &Config,
) -> Result<Sketch, SketchError> {
    let core = index
        .core(lexeme)
        .ok_or_else(|| SketchError::NotFound(lexeme.clone()))?;
    if core.total < config.min_links {
        return Err(SketchError::BelowThreshold {
            lexeme: lexeme.clone(),
            count: core.total,
            min_links: config.min_links,
        });
    }

    let mut slots = Vec::with_capacity(core.roles.len());
    for (role, entry) in &core.roles {
        let mut fillers = Vec::with_capacity(entry.fillers.len());
        for (key, joint) in &entry.fillers {
            let f_filler = index.filler_total(&lexeme.language, key);
            fillers.push(FillerEntry {
                lemma: key.lemma.clone(),
                semclass: key.semclass.clone(),
                count: joint.count,
                score: score_filler(joint.count, entry.total, f_filler, config.measure)?,
                flags: Vec::new(),
                examples: joint
                    .examples
                    .iter()
                    .map(|e| Example {
                        sent_id: e.sent_id.clone(),
                        text: None,
                        core_token: e.core_token,
                        filler_token: e.filler_token,
                    })
                    .collect(),
            });
        }
        fillers.sort_by(filler_order);
        slots.push(Slot {
            role: role.clone(),
            link_count: entry.total,
            distinct_fillers: entry.fillers.len(),
            flags: Vec::new(),
            fillers,
        });
    }
    slots.sort_by(slot_order);
    if let Some(max) = config.max_roles {
        slots.truncate(max);
    }

    Ok(Sketch {
        lexeme: lexeme.clone(),
        total_links: core.total,
        config: config.clone(),
        slots,
    })
}

/// Builds the sketch for one word sense with each slot cut to the top
/// `config.top_fillers` fillers under `config.measure`.
pub fn build_sketch(
    index: &FrequencyIndex,
    lexeme: &Lexeme,
    config: &Config,
) -> Result<Sketch, SketchError> {
    let mut sketch = build_full_sketch(index, lexeme, config)?;
    for slot in &mut sketch.slots {
        slot.fillers.truncate(config.top_fillers);
    }
    Ok(sketch)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagReason {
    pub flag: SlotFlag,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotDiagnosis {
    pub role: String,
    pub flags: Vec<FlagReason>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub slots: Vec<SlotDiagnosis>,
}

impl Diagnostics {
    pub fn flags_for(&self, role: &str) -> Vec<SlotFlag> {
        self.slots
            .iter()
            .find(|s| s.role == role)
            .map(|s| s.flags.iter().map(|f| f.flag).collect())
            .unwrap_or_default()
    }
}

/// Flags slots that look underpopulated.
///
/// `SPARSE`: fewer than `sparse_max_links` links, i.e. too little data.
/// `NARROW`: at least `narrow_min_links` links spread over no more than
/// `narrow_max_distinct` fillers, i.e. a lexicalized, legitimately small
/// slot.
pub fn diagnose(sketch: &Sketch, config: &Config) -> Diagnostics {
    let slots = sketch
        .slots
        .iter()
        .map(|slot| {
            let mut flags = Vec::new();
            if slot.link_count < config.sparse_max_links {
                flags.push(FlagReason {
                    flag: SlotFlag::Sparse,
                    reason: format!(
                        "link_count {} < sparse_max_links {}",
                        slot.link_count, config.sparse_max_links
                    ),
                });
            }
            if slot.link_count >= config.narrow_min_links
                && slot.distinct_fillers <= config.narrow_max_distinct
            {
                flags.push(FlagReason {
                    flag: SlotFlag::Narrow,
                    reason: format!(
                        "link_count {} >= narrow_min_links {} with distinct_fillers {} <= narrow_max_distinct {}",
                        slot.link_count,
                        config.narrow_min_links,
                        slot.distinct_fillers,
                        config.narrow_max_distinct
                    ),
                });
            }
            SlotDiagnosis {
                role: slot.role.clone(),
                flags,
            }
        })
        .collect();
    Diagnostics { slots }
}

/// Copies diagnosed flags onto the sketch's slots, replacing any present.
pub fn apply_diagnostics(sketch: &mut Sketch, diagnostics: &Diagnostics) {
    for slot in &mut sketch.slots {
        slot.flags = diagnostics.flags_for(&slot.role);
    }
}

/// Marks fillers that occur once and whose class is neither equal to nor
/// below the class of any filler ranked above them in the same slot.
/// Ranking is left untouched.
pub fn flag_suspicious_fillers(sketch: &mut Sketch, hierarchy: &SemanticHierarchy) {
    let related = |class: &str, above: &str| {
        class == above || hierarchy.is_descendant(class, above).unwrap_or(false)
    };
    for slot in &mut sketch.slots {
        let mut suspicious = vec![false; slot.fillers.len()];
        for (i, f) in slot.fillers.iter().enumerate() {
            suspicious[i] = f.count == 1
                && !slot.fillers[..i]
                    .iter()
                    .any(|above| related(&f.semclass, &above.semclass));
        }
        for (f, s) in slot.fillers.iter_mut().zip(suspicious) {
            f.flags.retain(|fl| *fl != FillerFlag::Suspicious);
            if s {
                f.flags.push(FillerFlag::Suspicious);
            }
        }
    }
}

/// Diagnoses the sketch and flags suspicious fillers in one step.
pub fn annotate(sketch: &mut Sketch, config: &Config, hierarchy: &SemanticHierarchy) {
    let diagnostics = diagnose(sketch, config);
    apply_diagnostics(sketch, &diagnostics);
    flag_suspicious_fillers(sketch, hierarchy);
}

/// Resolves example sentence ids against `sentences`. Examples whose id is
/// missing are dropped; the number dropped is returned.
pub fn attach_examples(sketch: &mut Sketch, sentences: &SentenceTable) -> usize {
    let mut dropped = 0;
    for slot in &mut sketch.slots {
        for filler in &mut slot.fillers {
            filler.examples.retain_mut(|e| match sentences.get(&e.sent_id) {
                Some(s) => {
                    e.text = Some(s.text.clone());
                    true
                }
                None => {
                    dropped += 1;
                    false
                }
            });
        }
    }
    if dropped > 0 {
        log::warn!("{}: dropped {dropped} unresolvable example(s)", sketch.lexeme);
    }
    dropped
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::SentenceEntry;
    use crate::model::{hierarchy_from_pairs, LinkRecord};

    fn lex() -> Lexeme {
        Lexeme::new("en", "focus", "TO_FOCUS")
    }

    fn add(idx: &mut FrequencyIndex, role: &str, filler: &str, class: &str, n: usize) {
        for i in 0..n {
            idx.accumulate(&LinkRecord {
                core: lex(),
                role: role.into(),
                filler: SenseKey::new(filler, class),
                sent_id: format!("{filler}{i}"),
                core_token: 0,
                filler_token: 2,
            });
        }
    }

    fn cfg(min: u64) -> Config {
        Config {
            min_links: min,
            ..Config::default()
        }
    }

    #[test]
    fn logdice_values() {
        assert_eq!(score_filler(10, 10, 10, Measure::Logdice).unwrap(), 14.0);
        assert_eq!(score_filler(5, 10, 30, Measure::Logdice).unwrap(), 12.0);
        assert_eq!(score_filler(7, 100, 500, Measure::Frequency).unwrap(), 7.0);
        for bad in [(0, 1, 1), (5, 4, 10), (5, 10, 4)] {
            let e = score_filler(bad.0, bad.1, bad.2, Measure::Logdice).unwrap_err();
            assert_eq!(e.code(), "E_DOMAIN");
        }
    }

    #[test]
    fn slots_and_fillers_are_ordered() {
        let mut idx = FrequencyIndex::default();
        add(&mut idx, "Object", "effort", "ACTIVITY", 3);
        add(&mut idx, "Object", "attention", "ACTIVITY", 3);
        add(&mut idx, "Object", "mind", "MIND", 5);
        add(&mut idx, "Locative", "issue", "TOPIC", 4);
        add(&mut idx, "Agent", "team", "GROUP", 11);
        let s = build_sketch(&idx, &lex(), &cfg(0)).unwrap();
        let roles: Vec<_> = s.slots.iter().map(|s| s.role.as_str()).collect();
        // Agent 11, Object 11, Locative 4: tie broken by role name
        assert_eq!(roles, ["Agent", "Object", "Locative"]);
        let obj: Vec<_> = s.slots[1].fillers.iter().map(|f| f.lemma.as_str()).collect();
        assert_eq!(obj, ["mind", "attention", "effort"]);
        assert_eq!(s.total_links, 26);
    }

    #[test]
    fn truncates_to_top_fillers() {
        let mut idx = FrequencyIndex::default();
        for i in 0..12 {
            add(&mut idx, "Object", &format!("f{i:02}"), "ACTIVITY", 12 - i);
        }
        let s = build_sketch(&idx, &lex(), &cfg(0)).unwrap();
        assert_eq!(s.slots[0].fillers.len(), 8);
        assert_eq!(s.slots[0].distinct_fillers, 12);
        let full = build_full_sketch(&idx, &lex(), &cfg(0)).unwrap();
        assert_eq!(full.slots[0].fillers.len(), 12);
        assert_eq!(full.truncated(8).slots, s.slots);
    }

    #[test]
    fn errors() {
        let mut idx = FrequencyIndex::default();
        add(&mut idx, "Object", "effort", "ACTIVITY", 3);
        let missing = Lexeme::new("en", "focus", "OTHER");
        assert_eq!(build_sketch(&idx, &missing, &cfg(0)).unwrap_err().code(), "E_NOT_FOUND");
        match build_sketch(&idx, &lex(), &cfg(200)).unwrap_err() {
            SketchError::BelowThreshold { count, .. } => assert_eq!(count, 3),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn max_roles_limits_slots() {
        let mut idx = FrequencyIndex::default();
        add(&mut idx, "Object", "effort", "ACTIVITY", 3);
        add(&mut idx, "Time", "day", "TIME", 2);
        let c = Config {
            max_roles: Some(1),
            ..cfg(0)
        };
        let s = build_sketch(&idx, &lex(), &c).unwrap();
        assert_eq!(s.slots.len(), 1);
        assert_eq!(s.slots[0].role, "Object");
    }

    #[test]
    fn diagnose_thresholds() {
        let mut idx = FrequencyIndex::default();
        add(&mut idx, "Time", "day", "TIME", 3);
        for (i, f) in ["trick", "joke", "role", "part"].iter().enumerate() {
            add(&mut idx, "Object", f, "ACTIVITY", 30 * (i + 1) / 2 + 3);
        }
        for i in 0..40 {
            add(&mut idx, "Agent", &format!("p{i}"), "PERSON", 5);
        }
        let c = cfg(0);
        let s = build_sketch(&idx, &lex(), &c).unwrap();
        let d = diagnose(&s, &c);
        assert_eq!(d.flags_for("Time"), [SlotFlag::Sparse]);
        assert_eq!(d.flags_for("Object"), [SlotFlag::Narrow]);
        assert!(d.flags_for("Agent").is_empty());
        let reason = &d.slots.iter().find(|s| s.role == "Time").unwrap().flags[0].reason;
        assert!(reason.contains("10"), "{reason}");
    }

    #[test]
    fn suspicious_rule() {
        let h = hierarchy_from_pairs(&[
            ("ENTITY", ""),
            ("ACTIVITY", "ENTITY"),
            ("SPORT", "ACTIVITY"),
            ("DISTANCE", "ENTITY"),
        ])
        .unwrap();
        let mut idx = FrequencyIndex::default();
        add(&mut idx, "Purpose_Goal", "game", "ACTIVITY", 3);
        add(&mut idx, "Purpose_Goal", "match", "SPORT", 1);
        add(&mut idx, "Purpose_Goal", "yard", "DISTANCE", 1);
        let mut s = build_sketch(&idx, &lex(), &cfg(0)).unwrap();
        let before: Vec<_> = s.slots[0].fillers.iter().map(|f| f.lemma.clone()).collect();
        flag_suspicious_fillers(&mut s, &h);
        flag_suspicious_fillers(&mut s, &h);
        let after: Vec<_> = s.slots[0].fillers.iter().map(|f| f.lemma.clone()).collect();
        assert_eq!(before, after);
        let flags: Vec<_> = s.slots[0].fillers.iter().map(|f| f.flags.clone()).collect();
        assert_eq!(flags, [vec![], vec![], vec![FillerFlag::Suspicious]]);
    }

    #[test]
    fn examples_resolve_or_drop() {
        let mut idx = FrequencyIndex::default();
        add(&mut idx, "Object", "effort", "ACTIVITY", 2);
        let mut s = build_sketch(&idx, &lex(), &cfg(0)).unwrap();
        let mut table = SentenceTable::new();
        table.insert(
            "effort0".into(),
            SentenceEntry {
                sent_id: "effort0".into(),
                language: "en".into(),
                text: "Focus your effort.".into(),
            },
        );
        assert_eq!(attach_examples(&mut s, &table), 1);
        let ex = &s.slots[0].fillers[0].examples;
        assert_eq!(ex.len(), 1);
        assert_eq!(ex[0].text.as_deref(), Some("Focus your effort."));
    }

    #[test]
    fn json_key_order() {
        let mut idx = FrequencyIndex::default();
        add(&mut idx, "Object", "effort", "ACTIVITY", 1);
        let s = build_sketch(&idx, &lex(), &cfg(0)).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let expected_prefix = r#"{"lexeme":{"lang":"en","lemma":"focus","semclass":"TO_FOCUS"},"total_links":1,"config":{"#;
        assert!(json.starts_with(expected_prefix), "{json}");
        assert!(json.contains(r#""slots":[{"role":"Object","link_count":1,"distinct_fillers":1,"flags":[],"fillers":[{"lemma":"effort","semclass":"ACTIVITY","count":1,"score":1.0,"flags":[],"examples":[{"sent_id":"effort0","text":null,"core_token":0,"filler_token":2}]}]}]"#), "{json}");
        let back: Sketch = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
