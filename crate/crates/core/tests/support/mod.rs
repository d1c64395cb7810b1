//! Corpus generator and brute-force oracles shared by the integration and
//! acceptance tests. Nothing here calls into the index or sketch code.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use semsketch_core::model::{hierarchy_from_pairs, Lexeme, LinkRecord, SemanticHierarchy, SenseKey};

pub const ROLES: [&str; 10] = [
    "Agent",
    "Object",
    "Time",
    "Locative",
    "Locative_InitialPoint",
    "Purpose_Goal",
    "Modality",
    "Manner",
    "Object_Situation",
    "Metaphoric_Locative",
];

pub const CLASSES: [(&str, &str); 12] = [
    ("ENTITY", ""),
    ("SITUATION", "ENTITY"),
    ("TO_COMMIT", "SITUATION"),
    ("TO_POUR", "SITUATION"),
    ("TO_SEEK_FIND", "SITUATION"),
    ("TO_FOCUS", "SITUATION"),
    ("SUBSTANCE", "ENTITY"),
    ("LIQUID", "SUBSTANCE"),
    ("FRIABLE", "SUBSTANCE"),
    ("BEING", "ENTITY"),
    ("PERSON", "BEING"),
    ("TIME", "ENTITY"),
];

const CORE_CLASSES: [&str; 4] = ["TO_COMMIT", "TO_POUR", "TO_SEEK_FIND", "TO_FOCUS"];
const FILLER_CLASSES: [&str; 5] = ["LIQUID", "FRIABLE", "PERSON", "TIME", "SUBSTANCE"];
const EN_LEMMAS: [&str; 8] = ["do", "play", "pour", "find", "focus", "take", "make", "shake"];
const RU_LEMMAS: [&str; 8] = ["делать", "играть", "лить", "сыпать", "найти", "трясти", "взорвать", "ёжиться"];
const FILLERS: [&str; 12] = [
    "water", "sand", "вода", "песок", "man", "человек", "day", "день", "Café", "naïve", "wine", "соль",
];

pub fn hierarchy() -> SemanticHierarchy {
    hierarchy_from_pairs(&CLASSES).unwrap()
}

/// Random records over two languages. Lemma/class choices are drawn so that
/// some lemmas appear under several classes.
pub fn random_corpus(seed: u64, n: usize) -> Vec<LinkRecord> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let (lang, lemmas) = if rng.gen_bool(0.5) {
                ("en", &EN_LEMMAS)
            } else {
                ("ru", &RU_LEMMAS)
            };
            // skewed choice to get a spread of lexeme sizes
            let li = (rng.gen::<f64>().powi(2) * lemmas.len() as f64) as usize;
            let ci = rng.gen_range(0..2) + li % 3;
            LinkRecord {
                core: Lexeme::new(lang, lemmas[li], CORE_CLASSES[ci % CORE_CLASSES.len()]),
                role: ROLES[(rng.gen::<f64>().powi(2) * ROLES.len() as f64) as usize].into(),
                filler: SenseKey::new(
                    FILLERS[rng.gen_range(0..FILLERS.len())],
                    FILLER_CLASSES[rng.gen_range(0..FILLER_CLASSES.len())],
                ),
                sent_id: format!("s{i}"),
                core_token: rng.gen_range(0..40),
                filler_token: rng.gen_range(0..40),
            }
        })
        .collect()
}

pub fn shuffled<T: Clone>(items: &[T], seed: u64) -> Vec<T> {
    let mut v = items.to_vec();
    v.shuffle(&mut StdRng::seed_from_u64(seed));
    v
}

pub type JointKey = (String, String, String, String, String, String);

/// Flat hash-map tally of every count level, one pass per level.
#[derive(Debug, Default)]
pub struct Tally {
    pub joint: HashMap<JointKey, u64>,
    pub core_role: HashMap<(String, String, String, String), u64>,
    pub core: HashMap<(String, String, String), u64>,
    pub filler: HashMap<(String, String, String), u64>,
}

pub fn tally(records: &[LinkRecord]) -> Tally {
    let mut t = Tally::default();
    for r in records {
        let (l, cl, cc) = (r.core.language.clone(), r.core.lemma.clone(), r.core.semclass.clone());
        *t.joint
            .entry((l.clone(), cl.clone(), cc.clone(), r.role.clone(), r.filler.lemma.clone(), r.filler.semclass.clone()))
            .or_default() += 1;
    }
    for r in records {
        *t.core_role
            .entry((r.core.language.clone(), r.core.lemma.clone(), r.core.semclass.clone(), r.role.clone()))
            .or_default() += 1;
    }
    for r in records {
        *t.core
            .entry((r.core.language.clone(), r.core.lemma.clone(), r.core.semclass.clone()))
            .or_default() += 1;
    }
    for r in records {
        *t.filler
            .entry((r.core.language.clone(), r.filler.lemma.clone(), r.filler.semclass.clone()))
            .or_default() += 1;
    }
    t
}

/// Brute-force FREQUENCY ranking of one (core, role): all fillers sorted by
/// count descending, lemma ascending, class ascending.
pub fn ranked_fillers(t: &Tally, lex: &Lexeme, role: &str) -> Vec<(String, String, u64)> {
    let mut v: Vec<(String, String, u64)> = t
        .joint
        .iter()
        .filter(|((l, cl, cc, r, _, _), _)| {
            l == &lex.language && cl == &lex.lemma && cc == &lex.semclass && r == role
        })
        .map(|((_, _, _, _, fl, fc), n)| (fl.clone(), fc.clone(), *n))
        .collect();
    v.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    v
}

/// Cycle/root check by walking each node's parent chain for at most
/// `n` steps.
pub fn brute_force_is_tree(pairs: &[(String, String)]) -> bool {
    let names: Vec<&str> = pairs.iter().map(|(n, _)| n.as_str()).collect();
    let mut uniq = names.clone();
    uniq.sort();
    uniq.dedup();
    if uniq.len() != names.len() {
        return false;
    }
    let parent: HashMap<&str, &str> = pairs.iter().map(|(n, p)| (n.as_str(), p.as_str())).collect();
    if parent.values().filter(|p| p.is_empty()).count() != 1 {
        return false;
    }
    for (name, _) in pairs {
        let mut cur = name.as_str();
        let mut steps = 0;
        loop {
            match parent.get(cur) {
                Some(&"") => break,
                Some(p) => {
                    cur = p;
                    steps += 1;
                    if steps > pairs.len() {
                        return false;
                    }
                }
                None => return false,
            }
        }
    }
    true
}
