//! A small hand-built English/Russian corpus whose sketches show every
//! verdict and flag the engine produces. Used by tests and for trying the
//! tools without real data.

use crate::ingest::{SentenceEntry, SentenceTable};
use crate::model::{hierarchy_from_pairs, Lexeme, LinkRecord, SemanticHierarchy, SenseKey};

const HIERARCHY: &[(&str, &str)] = &[
    ("ENTITY", ""),
    ("SITUATION", "ENTITY"),
    ("TO_FOCUS", "SITUATION"),
    ("TO_SEEK_FIND", "SITUATION"),
    ("TO_SHAKE", "SITUATION"),
    ("TO_COMMIT", "SITUATION"),
    ("TO_POUR", "SITUATION"),
    ("TO_THROW", "SITUATION"),
    ("TO_BLOW_UP", "SITUATION"),
    ("BEING", "ENTITY"),
    ("PERSON", "BEING"),
    ("GROUP", "BEING"),
    ("SUBSTANCE", "ENTITY"),
    ("LIQUID", "SUBSTANCE"),
    ("WATER", "LIQUID"),
    ("WINE", "LIQUID"),
    ("MILK", "LIQUID"),
    ("FRIABLE", "SUBSTANCE"),
    ("SAND", "FRIABLE"),
    ("SUGAR", "FRIABLE"),
    ("SALT", "FRIABLE"),
    ("SMALL_PIECES", "FRIABLE"),
    ("CRYSTAL", "SMALL_PIECES"),
    ("COIN", "SMALL_PIECES"),
    ("ACTIVITY", "ENTITY"),
    ("EFFORT", "ACTIVITY"),
    ("ATTENTION", "ACTIVITY"),
    ("STEP", "ACTIVITY"),
    ("CHOICE", "ACTIVITY"),
    ("OPERATION", "ACTIVITY"),
    ("JOB", "ACTIVITY"),
    ("TRICK", "ACTIVITY"),
    ("JOKE", "ACTIVITY"),
    ("ROLE", "ACTIVITY"),
    ("GAME", "ACTIVITY"),
    ("SPORT_EVENT", "ACTIVITY"),
    ("TOUCHDOWN", "SPORT_EVENT"),
    ("PASS_IN_GAME", "SPORT_EVENT"),
    ("TIME", "ENTITY"),
    ("MOMENT", "TIME"),
    ("DAY", "TIME"),
    ("PLACE", "ENTITY"),
    ("HEAD", "PLACE"),
    ("POCKET", "PLACE"),
    ("ROOM", "PLACE"),
    ("CONTAINER", "PLACE"),
    ("DISTANCE", "ENTITY"),
    ("YARD", "DISTANCE"),
    ("MODALITY", "ENTITY"),
    ("ABILITY", "MODALITY"),
    ("TOPIC", "ENTITY"),
    ("ISSUE", "TOPIC"),
    ("SOLUTION", "TOPIC"),
    ("THING", "ENTITY"),
    ("KEY", "THING"),
    ("BOX", "THING"),
    ("HAND", "THING"),
    ("BOMB", "THING"),
    ("MANNER", "ENTITY"),
    ("QUICKLY", "MANNER"),
];

pub fn sample_hierarchy() -> SemanticHierarchy {
    hierarchy_from_pairs(HIERARCHY).expect("fixture hierarchy is a tree")
}

/// A record set with sentence texts for every record.
#[derive(Debug, Clone)]
pub struct FixtureCorpus {
    pub hierarchy: SemanticHierarchy,
    pub records: Vec<LinkRecord>,
    pub sentences: SentenceTable,
}

#[derive(Debug, Clone)]
pub struct CorpusBuilder {
    hierarchy: SemanticHierarchy,
    records: Vec<LinkRecord>,
    sentences: SentenceTable,
}

impl CorpusBuilder {
    pub fn new(hierarchy: SemanticHierarchy) -> Self {
        CorpusBuilder {
            hierarchy,
            records: Vec::new(),
            sentences: SentenceTable::new(),
        }
    }

    /// Adds `n` occurrences of one `(core, role, filler)` combination, each
    /// with its own two-token sentence.
    pub fn add(&mut self, core: &Lexeme, role: &str, filler: &str, class: &str, n: usize) -> &mut Self {
        for _ in 0..n {
            let sent_id = format!("{}-{:06}", core.language, self.records.len());
            self.sentences.insert(
                sent_id.clone(),
                SentenceEntry {
                    sent_id: sent_id.clone(),
                    language: core.language.clone(),
                    text: format!("{} {}", core.lemma, filler),
                },
            );
            self.records.push(LinkRecord {
                core: core.clone(),
                role: role.to_string(),
                filler: SenseKey::new(filler, class),
                sent_id,
                core_token: 0,
                filler_token: 1,
            });
        }
        self
    }

    /// Adds one slot given as `(filler, class, count)` rows.
    pub fn slot(&mut self, core: &Lexeme, role: &str, fillers: &[(&str, &str, usize)]) -> &mut Self {
        for (f, c, n) in fillers {
            self.add(core, role, f, c, *n);
        }
        self
    }

    pub fn finish(self) -> FixtureCorpus {
        FixtureCorpus {
            hierarchy: self.hierarchy,
            records: self.records,
            sentences: self.sentences,
        }
    }
}

pub fn focus() -> Lexeme {
    Lexeme::new("en", "focus", "TO_FOCUS")
}

pub fn find() -> Lexeme {
    Lexeme::new("en", "find", "TO_SEEK_FIND")
}

pub fn nayti() -> Lexeme {
    Lexeme::new("ru", "найти", "TO_SEEK_FIND")
}

pub fn shake() -> Lexeme {
    Lexeme::new("en", "shake", "TO_SHAKE")
}

pub fn tryasti() -> Lexeme {
    Lexeme::new("ru", "трясти", "TO_SHAKE")
}

pub fn do_() -> Lexeme {
    Lexeme::new("en", "do", "TO_COMMIT")
}

pub fn play() -> Lexeme {
    Lexeme::new("en", "play", "TO_COMMIT")
}

pub fn delat() -> Lexeme {
    Lexeme::new("ru", "делать", "TO_COMMIT")
}

pub fn igrat() -> Lexeme {
    Lexeme::new("ru", "играть", "TO_COMMIT")
}

pub fn pour() -> Lexeme {
    Lexeme::new("en", "pour", "TO_POUR")
}

pub fn lit() -> Lexeme {
    Lexeme::new("ru", "лить", "TO_POUR")
}

pub fn sypat() -> Lexeme {
    Lexeme::new("ru", "сыпать", "TO_POUR")
}

pub fn throw() -> Lexeme {
    Lexeme::new("en", "throw", "TO_THROW")
}

pub fn explode() -> Lexeme {
    Lexeme::new("en", "explode", "TO_BLOW_UP")
}

pub fn vzorvat() -> Lexeme {
    Lexeme::new("ru", "взорвать", "TO_BLOW_UP")
}

/// Twenty Object fillers for `focus`, counts 40, 38, ..., 2.
pub const FOCUS_OBJECTS: [&str; 20] = [
    "effort", "attention", "energy", "resources", "mind", "thoughts", "eyes", "research",
    "work", "efforts", "camera", "lens", "beam", "light", "gaze", "study", "talent", "money",
    "strategy", "policy",
];

fn add_focus(b: &mut CorpusBuilder) {
    let l = focus();
    for (i, f) in FOCUS_OBJECTS.iter().enumerate() {
        let class = if i % 2 == 0 { "EFFORT" } else { "ATTENTION" };
        b.add(&l, "Object", f, class, 40 - 2 * i);
    }
    b.slot(&l, "Agent", &[("we", "PERSON", 35), ("company", "GROUP", 25)])
        .slot(&l, "Locative", &[("issue", "ISSUE", 20), ("solution", "SOLUTION", 10)])
        .slot(&l, "Time", &[("moment", "MOMENT", 8), ("day", "DAY", 4)])
        .slot(&l, "Manner", &[("quickly", "QUICKLY", 11)])
        .slot(&l, "Purpose_Goal", &[("solution", "SOLUTION", 10)]);
}

fn add_find(b: &mut CorpusBuilder) {
    let (en, ru) = (find(), nayti());
    b.slot(&en, "Object", &[("key", "KEY", 90), ("box", "BOX", 60)])
        .slot(&en, "Agent", &[("I", "PERSON", 70), ("police", "GROUP", 50)])
        .slot(&en, "Locative", &[("room", "ROOM", 35), ("pocket", "POCKET", 25)])
        .slot(&en, "Time", &[("day", "DAY", 25), ("moment", "MOMENT", 15)])
        .slot(&en, "Manner", &[("quickly", "QUICKLY", 25)])
        .slot(&en, "Metaphoric_Locative", &[("head", "HEAD", 15)]);
    b.slot(&ru, "Object", &[("ключ", "KEY", 100), ("коробка", "BOX", 60)])
        .slot(&ru, "Agent", &[("я", "PERSON", 80), ("полиция", "GROUP", 60)])
        .slot(&ru, "Locative", &[("комната", "ROOM", 40), ("карман", "POCKET", 30)])
        .slot(&ru, "Time", &[("день", "DAY", 30), ("момент", "MOMENT", 15)])
        .slot(&ru, "Manner", &[("быстро", "QUICKLY", 30)])
        .slot(&ru, "Modality", &[("мочь", "ABILITY", 18)]);
}

fn add_shake(b: &mut CorpusBuilder) {
    let (en, ru) = (shake(), tryasti());
    b.slot(&en, "Object", &[("head", "HEAD", 50), ("hand", "HAND", 30), ("box", "BOX", 10)])
        .slot(&en, "Agent", &[("he", "PERSON", 80)])
        .slot(&en, "Locative_InitialPoint", &[("head", "HEAD", 20), ("handkerchief", "THING", 10)])
        .slot(&en, "Time", &[("moment", "MOMENT", 20)]);
    b.slot(&ru, "Object", &[("голова", "HEAD", 60), ("рука", "HAND", 40), ("коробка", "BOX", 10)])
        .slot(&ru, "Agent", &[("он", "PERSON", 100)])
        .slot(&ru, "Time", &[("момент", "MOMENT", 25)]);
}

fn add_commit(b: &mut CorpusBuilder) {
    let objects: &[(&str, &str, usize)] = &[
        ("step", "STEP", 30),
        ("choice", "CHOICE", 25),
        ("operation", "OPERATION", 20),
        ("job", "JOB", 15),
        ("work", "JOB", 10),
        ("move", "STEP", 10),
    ];
    let (d, p, de, ig) = (do_(), play(), delat(), igrat());
    b.slot(&d, "Object", objects)
        .slot(&d, "Agent", &[("we", "PERSON", 80)])
        .slot(&d, "Object_Situation", &[("game", "GAME", 40)])
        .slot(&d, "Time", &[("day", "DAY", 20)])
        .slot(&d, "Agent_Metaphoric", &[("system", "THING", 15)])
        .slot(&d, "Ch_Relation_Coincidence", &[("way", "MANNER", 12)]);
    b.slot(
        &de,
        "Object",
        &[
            ("шаг", "STEP", 40),
            ("выбор", "CHOICE", 35),
            ("операция", "OPERATION", 25),
            ("снимок", "JOB", 20),
            ("работа", "JOB", 20),
        ],
    )
    .slot(&de, "Agent", &[("мы", "PERSON", 120)])
    .slot(&de, "Object_Situation", &[("игра", "GAME", 50)])
    .slot(&de, "Time", &[("день", "DAY", 30)])
    .slot(&de, "Modality", &[("мочь", "ABILITY", 20)])
    .slot(&de, "Locative", &[("комната", "ROOM", 15)]);
    b.slot(&p, "Agent", &[("they", "PERSON", 90)])
        .slot(&p, "Object_Situation", &[("game", "GAME", 60)])
        .slot(&p, "Time", &[("day", "DAY", 25)])
        .slot(&p, "Agent_Metaphoric", &[("fate", "THING", 12)])
        .slot(&p, "Addition", &[("also", "MANNER", 11)])
        .slot(&p, "Sphere", &[("sport", "SPORT_EVENT", 10)]);
    b.slot(
        &ig,
        "Object",
        &[
            ("шутка", "JOKE", 50),
            ("роль", "ROLE", 40),
            ("трюк", "TRICK", 20),
            ("партия", "GAME", 10),
        ],
    )
    .slot(&ig, "Agent", &[("он", "PERSON", 100)])
    .slot(&ig, "Object_Situation", &[("игра", "GAME", 50)])
    .slot(&ig, "Time", &[("день", "DAY", 20)])
    .slot(&ig, "Modality", &[("мочь", "ABILITY", 15)])
    .slot(&ig, "Agent_Metaphoric", &[("судьба", "THING", 12)])
    .slot(&ig, "Locative", &[("комната", "ROOM", 11)]);
}

fn add_pour(b: &mut CorpusBuilder) {
    let (p, l, s) = (pour(), lit(), sypat());
    b.slot(
        &p,
        "Object",
        &[
            ("water", "WATER", 50),
            ("wine", "WINE", 30),
            ("sand", "SAND", 35),
            ("sugar", "SUGAR", 30),
            ("crystal", "CRYSTAL", 25),
            ("euro", "COIN", 15),
            ("meat", "SMALL_PIECES", 15),
        ],
    )
    .slot(&p, "Agent", &[("she", "PERSON", 60)])
    .slot(&p, "Locative_FinalPoint", &[("glass", "CONTAINER", 40)]);
    b.slot(&l, "Object", &[("вода", "WATER", 90), ("вино", "WINE", 60), ("молоко", "MILK", 30)])
        .slot(&l, "Agent", &[("она", "PERSON", 70)])
        .slot(&l, "Locative_FinalPoint", &[("стакан", "CONTAINER", 50)]);
    b.slot(
        &s,
        "Object",
        &[
            ("песок", "SAND", 60),
            ("сахар", "SUGAR", 50),
            ("соль", "SALT", 40),
            ("монета", "COIN", 20),
        ],
    )
    .slot(&s, "Agent", &[("она", "PERSON", 60)])
    .slot(&s, "Locative_FinalPoint", &[("стакан", "CONTAINER", 40)]);
}

fn add_throw(b: &mut CorpusBuilder) {
    let t = throw();
    b.slot(&t, "Agent", &[("quarterback", "PERSON", 100)])
        .slot(&t, "Object", &[("ball", "THING", 90)])
        .slot(
            &t,
            "Purpose_Goal",
            &[
                ("touchdown", "TOUCHDOWN", 8),
                ("pass", "PASS_IN_GAME", 5),
                ("score", "TOUCHDOWN", 1),
                ("yard", "YARD", 1),
            ],
        )
        .slot(&t, "Locative_Distance", &[("yard", "YARD", 20)]);
}

fn add_explode(b: &mut CorpusBuilder) {
    let (e, v) = (explode(), vzorvat());
    b.slot(&e, "Agent", &[("terrorist", "PERSON", 100)])
        .slot(&e, "Object", &[("bomb", "BOMB", 100)]);
    b.slot(&v, "Agent", &[("террорист", "PERSON", 110)])
        .slot(&v, "Object", &[("бомба", "BOMB", 120)]);
}

/// All sample lexemes in one corpus. Every lexeme has at least
/// 200 links.
pub fn sample_corpus() -> FixtureCorpus {
    let mut b = CorpusBuilder::new(sample_hierarchy());
    add_focus(&mut b);
    add_find(&mut b);
    add_shake(&mut b);
    add_commit(&mut b);
    add_pour(&mut b);
    add_throw(&mut b);
    add_explode(&mut b);
    b.finish()
}
