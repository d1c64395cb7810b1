//! End-to-end steps shared by the command line and the tests: records to
//! index, index to sketch set, two sketch sets to a paired set.

use std::collections::{BTreeMap, BTreeSet};

use crate::aggregate::{AggregateError, FrequencyIndex, IndexBundle};
use crate::contrastive::{self, pair_by_class, AffinityWeights};
use crate::ingest::{ParseError, SentenceTable, StatsCollector, CorpusStats};
use crate::model::{validate_link, Config, Lexeme, LinkRecord, SemanticHierarchy};
use crate::sketch::{annotate, attach_examples, build_full_sketch, SketchError};
use crate::store::{SketchSet, StoreError};

/// Outcome of turning a record stream into an index.
#[derive(Debug)]
pub struct IngestReport {
    pub bundle: IndexBundle,
    pub stats: CorpusStats,
    pub parse_errors: Vec<ParseError>,
    /// Records rejected by validation, with their line-independent reasons.
    pub invalid_records: usize,
}

/// Accumulates every valid record; invalid ones and parse errors are
/// counted and skipped.
pub fn ingest_records(
    records: impl IntoIterator<Item = Result<LinkRecord, ParseError>>,
    hierarchy: SemanticHierarchy,
    sentences: SentenceTable,
    examples_cap: usize,
) -> IngestReport {
    let mut index = FrequencyIndex::new(examples_cap).with_hierarchy(&hierarchy);
    let mut stats = StatsCollector::default();
    let mut parse_errors = Vec::new();
    let mut invalid_records = 0;
    for item in records {
        match item {
            Ok(record) => {
                let violations = validate_link(&record, &hierarchy);
                if violations.is_empty() {
                    stats.add(&record);
                    index.accumulate(&record);
                } else {
                    log::debug!("skipping invalid record {:?}: {:?}", record, violations);
                    invalid_records += 1;
                }
            }
            Err(e) => {
                log::debug!("{e}");
                stats.add_error();
                parse_errors.push(e);
            }
        }
    }
    let mut bundle = IndexBundle::new(index, hierarchy, sentences);
    bundle.prune_sentences();
    IngestReport {
        bundle,
        stats: stats.finish(),
        parse_errors,
        invalid_records,
    }
}

/// Builds, annotates and resolves examples for every lexeme that meets
/// `config.min_links`. Returns the set and the number of dropped examples.
pub fn build_sketch_set(bundle: &IndexBundle, config: &Config) -> Result<(SketchSet, usize), SketchError> {
    let index = &bundle.index;
    let mut set = SketchSet::new(bundle.hierarchy.clone(), config.clone());
    let mut dropped = 0;
    let mut used: BTreeMap<String, BTreeSet<crate::model::SenseKey>> = BTreeMap::new();
    for lexeme in index.eligible_lexemes(config.min_links) {
        let mut sketch = build_full_sketch(index, &lexeme, config)?;
        annotate(&mut sketch, config, &bundle.hierarchy);
        dropped += attach_examples(&mut sketch, &bundle.sentences);
        let keys = used.entry(lexeme.language.clone()).or_default();
        for slot in &sketch.slots {
            keys.extend(slot.fillers.iter().map(|f| f.key()));
        }
        set.sketches.push(sketch);
    }
    for (lang, keys) in used {
        let totals = keys
            .into_iter()
            .map(|k| {
                let n = index.filler_total(&lang, &k);
                (k, n)
            })
            .collect();
        set.filler_totals.insert(lang, totals);
    }
    set.normalize();
    Ok((set, dropped))
}

/// Combines two sketch sets and records every cross-language pair within
/// shared classes, optionally restricted to a curated list.
pub fn pair_sets(
    left: &SketchSet,
    right: &SketchSet,
    curated: Option<&BTreeSet<(Lexeme, Lexeme)>>,
    threshold: f64,
    weights: AffinityWeights,
) -> Result<SketchSet, StoreError> {
    if left.hierarchy.checksum() != right.hierarchy.checksum() {
        return Err(StoreError::Checksum(
            "left and right stores use different hierarchies".into(),
        ));
    }
    let mut pairs = pair_by_class(&left.sketches, &right.sketches, weights);
    if let Some(c) = curated {
        pairs = contrastive::filter_curated(pairs, c);
    }
    let mut out = SketchSet::new(left.hierarchy.clone(), left.config.clone());
    out.divergence_threshold = threshold;
    out.pairs = pairs
        .iter()
        .map(|p| contrastive::pair_with_diff(p, threshold))
        .collect();
    out.sketches = left
        .sketches
        .iter()
        .chain(&right.sketches)
        .cloned()
        .collect();
    for src in [left, right] {
        for (lang, totals) in &src.filler_totals {
            let dst = out.filler_totals.entry(lang.clone()).or_default();
            for (k, n) in totals {
                dst.entry(k.clone()).or_insert(*n);
            }
        }
    }
    out.normalize();
    Ok(out)
}

pub fn merge_all(
    shards: impl IntoIterator<Item = FrequencyIndex>,
    examples_cap: usize,
) -> Result<FrequencyIndex, AggregateError> {
    shards
        .into_iter()
        .try_fold(FrequencyIndex::new(examples_cap), |acc, s| acc.merge(s))
}
