mod support;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use semsketch_core::aggregate::{load_index, persist_index, FrequencyIndex, IndexBundle};
use semsketch_core::contrastive::{
    affinity, diff, field_structure_report, AffinityWeights, ClassRollup, SketchPair, Verdict,
    DEFAULT_DIVERGENCE_THRESHOLD,
};
use semsketch_core::ingest::{corpus_stats, parse_link_stream, write_links, SentenceEntry, SentenceTable};
use semsketch_core::model::{nfc, Config, Lexeme, LinkRecord, Measure, SenseKey};
use semsketch_core::pipeline::build_sketch_set;
use semsketch_core::sketch::{build_full_sketch, score_filler, Sketch};
use semsketch_core::store::{load_sketch_set, save_sketch_set};

use support::{hierarchy, ROLES};

const WORD: &str = "[a-zа-яё\u{e9}\u{301}\u{308} _.-]{1,8}";

fn word() -> impl Strategy<Value = String> {
    WORD.prop_map(|s| nfc(&s))
}

fn record() -> impl Strategy<Value = LinkRecord> {
    (
        prop::sample::select(vec!["en", "ru", "de"]),
        word(),
        prop::sample::select(vec!["TO_COMMIT", "TO_POUR", "TO_FOCUS"]),
        prop::sample::select(ROLES.to_vec()),
        word(),
        prop::sample::select(vec!["LIQUID", "FRIABLE", "PERSON", "TIME"]),
        "[a-z0-9:/]{1,10}",
        any::<u32>(),
        any::<u32>(),
    )
        .prop_map(|(l, cl, cc, role, fl, fc, sent, ct, ft)| LinkRecord {
            core: Lexeme::new(l, &cl, cc),
            role: role.into(),
            filler: SenseKey::new(&fl, fc),
            sent_id: sent,
            core_token: ct,
            filler_token: ft,
        })
}

/// Records over a small vocabulary, so counts collide.
fn dense_record() -> impl Strategy<Value = LinkRecord> {
    (0..2usize, 0..3usize, 0..2usize, 0..4usize, 0..4usize, 0..3usize, 0..50u32).prop_map(
        |(l, cl, cc, r, fl, fc, s)| LinkRecord {
            core: Lexeme::new(["en", "ru"][l], ["do", "лить", "café"][cl], ["TO_COMMIT", "TO_POUR"][cc]),
            role: ROLES[r].into(),
            filler: SenseKey::new(["water", "вода", "sand", "man"][fl], ["LIQUID", "FRIABLE", "PERSON"][fc]),
            sent_id: format!("s{s}"),
            core_token: s,
            filler_token: s + 1,
        },
    )
}

fn index_of(records: &[LinkRecord]) -> FrequencyIndex {
    let mut idx = FrequencyIndex::default().with_hierarchy(&hierarchy());
    idx.extend(records);
    idx
}

fn all_sketches(idx: &FrequencyIndex, measure: Measure) -> Vec<Sketch> {
    let config = Config {
        min_links: 1,
        measure,
        ..Config::default()
    };
    idx.eligible_lexemes(1)
        .iter()
        .map(|l| build_full_sketch(idx, l, &config).unwrap())
        .collect()
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn slf_round_trip(records in prop::collection::vec(record(), 0..20)) {
        let mut buf = Vec::new();
        write_links(&mut buf, &records).unwrap();
        let back: Vec<LinkRecord> = parse_link_stream(&buf[..]).map(Result::unwrap).collect();
        prop_assert_eq!(back, records);
    }

    #[test]
    fn logdice_bounded(joint in 1u64..10_000, extra_a in 0u64..10_000, extra_b in 0u64..10_000) {
        let (fcr, ff) = (joint + extra_a, joint + extra_b);
        let s = score_filler(joint, fcr, ff, Measure::Logdice).unwrap();
        // bound with f_core_role = f_filler = joint
        let bound = 14.0 + (2.0 * joint as f64 / (joint + joint) as f64).log2();
        prop_assert!(s <= bound, "{} > {}", s, bound);
        prop_assert!(s.is_finite());
    }
}

proptest! {
    #![proptest_config(cases(200))]

    #[test]
    fn marginals_stay_consistent(
        a in prop::collection::vec(dense_record(), 0..80),
        b in prop::collection::vec(dense_record(), 0..80),
    ) {
        let merged = index_of(&a).merge(index_of(&b)).unwrap();
        merged.check_consistency().unwrap();
        let mut all = a.clone();
        all.extend(b.iter().cloned());
        let single = index_of(&all);
        single.check_consistency().unwrap();
        prop_assert_eq!(merged.total_links(), all.len() as u64);
        for (l, core, role, filler, e) in single.joints() {
            let lex = Lexeme::new(l, &core.lemma, &core.semclass);
            prop_assert_eq!(merged.joint(&lex, role, filler), e.count);
        }
    }

    #[test]
    fn merge_commutes_and_associates(
        a in prop::collection::vec(dense_record(), 0..60),
        b in prop::collection::vec(dense_record(), 0..60),
        c in prop::collection::vec(dense_record(), 0..60),
    ) {
        let counts = |idx: &FrequencyIndex| {
            idx.joints()
                .map(|(l, core, role, filler, e)| ((l.to_string(), core.clone(), role.to_string(), filler.clone()), e.count))
                .collect::<BTreeMap<_, _>>()
        };
        let ab = index_of(&a).merge(index_of(&b)).unwrap();
        let ba = index_of(&b).merge(index_of(&a)).unwrap();
        prop_assert_eq!(counts(&ab), counts(&ba));
        let ab_c = ab.merge(index_of(&c)).unwrap();
        let a_bc = index_of(&a).merge(index_of(&b).merge(index_of(&c)).unwrap()).unwrap();
        // same grouping order keeps examples identical too
        prop_assert_eq!(&ab_c, &a_bc);
    }

    #[test]
    fn stats_ignore_order(records in prop::collection::vec(dense_record(), 0..100), seed in any::<u64>()) {
        let shuffled = support::shuffled(&records, seed);
        prop_assert_eq!(corpus_stats(&records), corpus_stats(&shuffled));
    }

    #[test]
    fn affinity_and_diff_laws(records in prop::collection::vec(dense_record(), 1..150)) {
        let idx = index_of(&records);
        let sketches = all_sketches(&idx, Measure::Frequency);
        let w = AffinityWeights::default();
        for a in &sketches {
            for b in &sketches {
                let ab = affinity(a, b, w).unwrap();
                let ba = affinity(b, a, w).unwrap();
                prop_assert!((ab - ba).abs() <= 1e-12);
                prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));

                let pair = SketchPair::new(a, b, w);
                let d = diff(&pair, DEFAULT_DIVERGENCE_THRESHOLD);
                let ra: BTreeSet<&str> = a.slots.iter().map(|s| s.role.as_str()).collect();
                let rb: BTreeSet<&str> = b.slots.iter().map(|s| s.role.as_str()).collect();
                let gaps: BTreeSet<&str> = d.role_gaps.iter().map(|g| g.role.as_str()).collect();
                let sym: BTreeSet<&str> = ra.symmetric_difference(&rb).copied().collect();
                prop_assert_eq!(gaps, sym);
                if d.verdicts == [Verdict::None] {
                    prop_assert!(pair.affinity >= 0.5, "{}", pair.affinity);
                }
            }
        }
    }

    #[test]
    fn coverage_equals_record_scan(records in prop::collection::vec(dense_record(), 1..150)) {
        let idx = index_of(&records);
        let sketches = all_sketches(&idx, Measure::Frequency);
        let (en, ru): (Vec<Sketch>, Vec<Sketch>) =
            sketches.into_iter().partition(|s| s.lexeme.language == "en");
        for class in ["TO_COMMIT", "TO_POUR"] {
            let Ok(report) = field_structure_report(class, &en, &ru, "Object", ClassRollup::Exact) else {
                continue;
            };
            for r in &records {
                if r.core.semclass != class || r.role != "Object" {
                    continue;
                }
                let cov = report.coverage_of(&r.core.language, &r.core.lemma);
                prop_assert!(cov.contains(r.filler.semclass.as_str()));
            }
            for lang in ["en", "ru"] {
                for lemma in ["do", "лить", "café"] {
                    let scan: BTreeSet<&str> = records
                        .iter()
                        .filter(|r| r.core.language == lang && r.core.lemma == lemma)
                        .filter(|r| r.core.semclass == class && r.role == "Object")
                        .map(|r| r.filler.semclass.as_str())
                        .collect();
                    prop_assert_eq!(report.coverage_of(lang, lemma), scan);
                }
            }
        }
    }
}

fn sentences_for(records: &[LinkRecord]) -> SentenceTable {
    records
        .iter()
        .map(|r| {
            (
                r.sent_id.clone(),
                SentenceEntry {
                    sent_id: r.sent_id.clone(),
                    language: r.core.language.clone(),
                    text: format!("text of {} «{}»", r.sent_id, r.core.lemma),
                },
            )
        })
        .collect()
}

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn index_persist_round_trip(records in prop::collection::vec(record(), 0..12)) {
        let h = hierarchy();
        let mut bundle = IndexBundle::new(index_of(&records), h.clone(), sentences_for(&records));
        bundle.prune_sentences();
        let mut buf = Vec::new();
        persist_index(&bundle, &mut buf).unwrap();
        let back = load_index(&buf[..], Some(&h.checksum())).unwrap();
        prop_assert_eq!(&back, &bundle);
        let mut again = Vec::new();
        persist_index(&back, &mut again).unwrap();
        prop_assert_eq!(again, buf);
    }
}

proptest! {
    // each case touches the file system
    #![proptest_config(cases(1000))]

    #[test]
    fn store_save_load_round_trip(records in prop::collection::vec(record(), 0..8)) {
        let h = hierarchy();
        let bundle = IndexBundle::new(index_of(&records), h.clone(), sentences_for(&records));
        let config = Config { min_links: 1, ..Config::default() };
        let (set, _) = build_sketch_set(&bundle, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_sketch_set(dir.path(), &set).unwrap();
        let back = load_sketch_set(dir.path(), Some(&h.checksum())).unwrap();
        prop_assert_eq!(back, set);
    }
}
