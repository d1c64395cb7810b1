//! Streaming reader and writer for the SLF v1 link format, the sentence
//! table, and corpus statistics.
//!
//! An SLF v1 line has nine tab-separated columns:
//!
//! ```text
//! lang  core_lemma  core_class  role  filler_lemma  filler_class  sent_id  core_token  filler_token
//! ```
//!
//! Lines starting with `#` and blank lines are skipped. Fields may not
//! contain tabs or newlines; there is no escaping.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{nfc, SenseKey, Lexeme, LinkRecord};

pub const SLF_COLUMNS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParseErrorKind {
    #[serde(rename = "E_FORMAT")]
    Format,
    #[serde(rename = "E_DUP_SENT")]
    DuplicateSentence,
    #[serde(rename = "E_IO")]
    Io,
}

impl ParseErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ParseErrorKind::Format => "E_FORMAT",
            ParseErrorKind::DuplicateSentence => "E_DUP_SENT",
            ParseErrorKind::Io => "E_IO",
        }
    }
}

/// A per-line problem. Parsing continues after these.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {}: {message}", kind.code())]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl ParseError {
    fn format(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            kind: ParseErrorKind::Format,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("field `{field}` contains a tab or newline")]
    ForbiddenCharacter { field: &'static str },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Opens a file for buffered reading, decompressing when the name ends in
/// `.gz`.
pub fn open_input(path: &Path) -> io::Result<Box<dyn BufRead + Send>> {
    let file = File::open(path)?;
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

/// Reads one raw line at a time, yielding `(line_number, content)` for
/// lines that are neither blank nor comments.
struct DataLines<R> {
    reader: R,
    buf: Vec<u8>,
    line: usize,
    done: bool,
}

impl<R: BufRead> DataLines<R> {
    fn new(reader: R) -> Self {
        DataLines {
            reader,
            buf: Vec::new(),
            line: 0,
            done: false,
        }
    }
}

impl<R: BufRead> Iterator for DataLines<R> {
    type Item = (usize, Result<String, ParseError>);

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            self.buf.clear();
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => self.done = true,
                Ok(_) => {
                    self.line += 1;
                    let mut bytes = self.buf.as_slice();
                    bytes = bytes.strip_suffix(b"\n").unwrap_or(bytes);
                    bytes = bytes.strip_suffix(b"\r").unwrap_or(bytes);
                    if bytes.is_empty() || bytes[0] == b'#' {
                        continue;
                    }
                    if bytes.iter().all(u8::is_ascii_whitespace) {
                        continue;
                    }
                    let item = match std::str::from_utf8(bytes) {
                        Ok(s) => Ok(s.to_string()),
                        Err(e) => Err(ParseError::format(self.line, format!("invalid UTF-8: {e}"))),
                    };
                    return Some((self.line, item));
                }
                Err(e) => {
                    self.done = true;
                    self.line += 1;
                    return Some((
                        self.line,
                        Err(ParseError {
                            line: self.line,
                            kind: ParseErrorKind::Io,
                            message: e.to_string(),
                        }),
                    ));
                }
            }
        }
        None
    }
}

/// Parses a single SLF v1 data line.
pub fn parse_link_line(line: &str, line_no: usize) -> Result<LinkRecord, ParseError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != SLF_COLUMNS {
        return Err(ParseError::format(
            line_no,
            format!("expected {SLF_COLUMNS} columns, found {}", cols.len()),
        ));
    }
    let token = |s: &str, name: &str| {
        s.parse::<u32>()
            .map_err(|_| ParseError::format(line_no, format!("bad {name} index `{s}`")))
    };
    let core_token = token(cols[7], "core token")?;
    let filler_token = token(cols[8], "filler token")?;
    Ok(LinkRecord {
        core: Lexeme::new(cols[0], cols[1], cols[2]),
        role: cols[3].to_string(),
        filler: SenseKey::new(cols[4], cols[5]),
        sent_id: cols[6].to_string(),
        core_token,
        filler_token,
    })
}

/// Lazily parses an SLF v1 stream. Each data line yields exactly one record
/// or one error; memory use is bounded by the longest line.
pub struct LinkStream<R> {
    lines: DataLines<R>,
}

impl<R: BufRead> Iterator for LinkStream<R> {
    type Item = Result<LinkRecord, ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        let (n, line) = self.lines.next()?;
        Some(line.and_then(|l| parse_link_line(&l, n)))
    }
}

pub fn parse_link_stream<R: BufRead>(reader: R) -> LinkStream<R> {
    LinkStream {
        lines: DataLines::new(reader),
    }
}

/// Like [`parse_link_stream`], but pairs each item with its 1-based line
/// number so valid-but-rejected records can be located too.
pub fn parse_numbered_links<R: BufRead>(
    reader: R,
) -> impl Iterator<Item = (usize, Result<LinkRecord, ParseError>)> {
    DataLines::new(reader).map(|(n, line)| (n, line.and_then(|l| parse_link_line(&l, n))))
}

fn check_field(value: &str, field: &'static str) -> Result<(), IngestError> {
    if value.contains(['\t', '\n', '\r']) {
        Err(IngestError::ForbiddenCharacter { field })
    } else {
        Ok(())
    }
}

/// Renders a record as one SLF v1 line, without the trailing newline.
pub fn format_link(record: &LinkRecord) -> Result<String, IngestError> {
    let fields = [
        (record.core.language.as_str(), "lang"),
        (record.core.lemma.as_str(), "core_lemma"),
        (record.core.semclass.as_str(), "core_class"),
        (record.role.as_str(), "role"),
        (record.filler.lemma.as_str(), "filler_lemma"),
        (record.filler.semclass.as_str(), "filler_class"),
        (record.sent_id.as_str(), "sent_id"),
    ];
    let mut out = String::new();
    for (value, name) in fields {
        check_field(value, name)?;
        out.push_str(value);
        out.push('\t');
    }
    out.push_str(&record.core_token.to_string());
    out.push('\t');
    out.push_str(&record.filler_token.to_string());
    Ok(out)
}

pub fn write_links<'a, W: Write>(
    mut out: W,
    records: impl IntoIterator<Item = &'a LinkRecord>,
) -> Result<(), IngestError> {
    for record in records {
        out.write_all(format_link(record)?.as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceEntry {
    pub sent_id: String,
    pub language: String,
    pub text: String,
}

pub type SentenceTable = BTreeMap<String, SentenceEntry>;

/// Result of reading a sentence table: the well-formed rows plus every
/// rejected line.
#[derive(Debug, Default, Clone)]
pub struct SentenceParse {
    pub table: SentenceTable,
    pub errors: Vec<ParseError>,
}

impl SentenceParse {
    /// Fails on the first recorded error.
    pub fn into_result(self) -> Result<SentenceTable, ParseError> {
        match self.errors.into_iter().next() {
            Some(e) => Err(e),
            None => Ok(self.table),
        }
    }
}

/// Reads `sent_id<TAB>lang<TAB>text` rows. A repeated id is reported as
/// `E_DUP_SENT` and the first occurrence is kept.
pub fn parse_sentence_table<R: BufRead>(reader: R) -> SentenceParse {
    let mut out = SentenceParse::default();
    for (n, line) in DataLines::new(reader) {
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                out.errors.push(e);
                continue;
            }
        };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            out.errors.push(ParseError::format(
                n,
                format!("expected 3 columns, found {}", cols.len()),
            ));
            continue;
        }
        if cols[0].is_empty() || cols[1].is_empty() || cols[2].is_empty() {
            out.errors.push(ParseError::format(n, "empty field"));
            continue;
        }
        if out.table.contains_key(cols[0]) {
            out.errors.push(ParseError {
                line: n,
                kind: ParseErrorKind::DuplicateSentence,
                message: format!("duplicate sentence id `{}`", cols[0]),
            });
            continue;
        }
        out.table.insert(
            cols[0].to_string(),
            SentenceEntry {
                sent_id: cols[0].to_string(),
                language: cols[1].to_string(),
                text: nfc(cols[2]),
            },
        );
    }
    out
}

pub fn write_sentence_table<W: Write>(mut out: W, table: &SentenceTable) -> Result<(), IngestError> {
    for entry in table.values() {
        check_field(&entry.sent_id, "sent_id")?;
        check_field(&entry.language, "lang")?;
        check_field(&entry.text, "text")?;
        writeln!(out, "{}\t{}\t{}", entry.sent_id, entry.language, entry.text)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total_links: BTreeMap<String, u64>,
    pub distinct_core_lexemes: BTreeMap<String, u64>,
    /// links per lexeme -> number of lexemes with that many links
    pub links_per_lexeme: BTreeMap<u64, u64>,
    pub parse_errors: u64,
}

impl CorpusStats {
    pub fn total(&self) -> u64 {
        self.total_links.values().sum()
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (lang, total) in &self.total_links {
            let lexemes = self.distinct_core_lexemes.get(lang).copied().unwrap_or(0);
            writeln!(f, "{lang}\tlinks={total}\tlexemes={lexemes}")?;
        }
        write!(f, "parse_errors={}", self.parse_errors)
    }
}

/// Incremental statistics over a record stream.
#[derive(Debug, Default)]
pub struct StatsCollector {
    per_lexeme: HashMap<Lexeme, u64>,
    parse_errors: u64,
}

impl StatsCollector {
    pub fn add(&mut self, record: &LinkRecord) {
        *self.per_lexeme.entry(record.core.clone()).or_default() += 1;
    }

    pub fn add_error(&mut self) {
        self.parse_errors += 1;
    }

    pub fn finish(self) -> CorpusStats {
        let mut stats = CorpusStats {
            parse_errors: self.parse_errors,
            ..CorpusStats::default()
        };
        for (lexeme, n) in self.per_lexeme {
            *stats.total_links.entry(lexeme.language.clone()).or_default() += n;
            *stats.distinct_core_lexemes.entry(lexeme.language).or_default() += 1;
            *stats.links_per_lexeme.entry(n).or_default() += 1;
        }
        stats
    }
}

pub fn corpus_stats<'a>(records: impl IntoIterator<Item = &'a LinkRecord>) -> CorpusStats {
    let mut c = StatsCollector::default();
    records.into_iter().for_each(|r| c.add(r));
    c.finish()
}
