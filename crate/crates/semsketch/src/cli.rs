//! `semsketch` subcommands.
//!
//! Exit codes: 0 ok, 1 usage, 2 data error, 3 I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::net::{SocketAddr, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use semsketch_core::aggregate::{
    load_index, persist_index, read_index_header, AggregateError, IndexHeader, DEFAULT_EXAMPLES_CAP,
};
use semsketch_core::contrastive::{parse_curated, AffinityWeights, DEFAULT_DIVERGENCE_THRESHOLD, DEFAULT_FIELD_ROLE};
use semsketch_core::ingest::{
    open_input, parse_link_stream, parse_numbered_links, parse_sentence_table, CorpusStats,
};
use semsketch_core::model::{validate_link, Config, Lexeme, Measure, ModelError, SemanticHierarchy};
use semsketch_core::pipeline::{build_sketch_set, ingest_records, pair_sets};
use semsketch_core::store::{load_sketch_set, save_sketch_set, QueryError, SketchStore, StoreError};

use crate::api::{self, Service};

#[derive(Debug, Parser)]
#[command(name = "semsketch", version, about = "Build, compare and serve semantic sketches")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse an SLF link file into a persisted frequency index.
    Ingest {
        #[arg(long)]
        links: PathBuf,
        #[arg(long)]
        sentences: Option<PathBuf>,
        #[arg(long)]
        hierarchy: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Example references kept per (core, role, filler).
        #[arg(long, default_value_t = DEFAULT_EXAMPLES_CAP)]
        examples: usize,
    },
    /// Build sketches for every eligible lexeme of an index into a store.
    Build {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = semsketch_core::model::DEFAULT_MIN_LINKS)]
        min_links: u64,
        #[arg(long, default_value_t = 8)]
        top: usize,
        #[arg(long, default_value = "freq")]
        measure: Measure,
        #[arg(long)]
        max_roles: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pair two stores by shared semantic class and diff every pair.
    Pair {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// Restrict output to the `LEX<TAB>LEX` pairs listed in this file.
        #[arg(long)]
        curated: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_DIVERGENCE_THRESHOLD)]
        threshold: f64,
        /// Weight of the role-set Jaccard term in affinity.
        #[arg(long, default_value_t = 0.5)]
        role_weight: f64,
        /// Weight of the filler-class cosine term in affinity.
        #[arg(long, default_value_t = 0.5)]
        filler_weight: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the diff of two lexemes (`lang:lemma:CLASS`) as JSON.
    Diff {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        left: Lexeme,
        #[arg(long)]
        right: Lexeme,
    },
    /// Print the field-structure report for one class as JSON.
    Report {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        class: String,
        #[arg(long, default_value = DEFAULT_FIELD_ROLE)]
        role: String,
        /// Roll filler classes up to their ancestor at this depth.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Print the header of a persisted index.
    Stats {
        #[arg(long)]
        index: PathBuf,
        /// Also load the index and print per-language link statistics.
        #[arg(long)]
        full: bool,
    },
    /// Check every line of a link file against the hierarchy.
    Validate {
        #[arg(long)]
        links: PathBuf,
        #[arg(long)]
        hierarchy: PathBuf,
    },
    /// Serve a store over HTTP until interrupted.
    Serve {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn by_code(code: &str, message: String) -> Self {
        if code == "E_IO" {
            CliError::Io(message)
        } else {
            CliError::Data(format!("{code}: {message}"))
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::by_code(e.code(), e.to_string())
    }
}

impl From<AggregateError> for CliError {
    fn from(e: AggregateError) -> Self {
        CliError::by_code(e.code(), e.to_string())
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        CliError::by_code(e.code(), e.to_string())
    }
}

impl From<QueryError> for CliError {
    fn from(e: QueryError) -> Self {
        CliError::by_code(e.code(), e.to_string())
    }
}

fn open(path: &Path) -> Result<Box<dyn io::BufRead + Send>, CliError> {
    open_input(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_hierarchy(path: &Path) -> Result<SemanticHierarchy, CliError> {
    Ok(SemanticHierarchy::from_tsv(open(path)?)?)
}

/// Writes through a sibling temporary file so a failed run never leaves a
/// truncated output behind.
fn write_atomically(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<fs::File>) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut w = BufWriter::new(fs::File::create(&tmp)?);
    body(&mut w)?;
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))?.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

#[derive(Serialize)]
struct StatsOutput {
    header: IndexHeader,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<CorpusStats>,
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Ingest {
            links,
            sentences,
            hierarchy,
            out: dest,
            examples,
        } => {
            let hierarchy = load_hierarchy(&hierarchy)?;
            let table = match sentences {
                Some(p) => {
                    let parsed = parse_sentence_table(open(&p)?);
                    for e in &parsed.errors {
                        log::warn!("{}: {e}", p.display());
                    }
                    parsed.table
                }
                None => Default::default(),
            };
            let report = ingest_records(parse_link_stream(open(&links)?), hierarchy, table, examples);
            if let Some(e) = report.parse_errors.iter().find(|e| e.kind.code() == "E_IO") {
                return Err(CliError::Io(e.to_string()));
            }
            for e in &report.parse_errors {
                log::warn!("{}: {e}", links.display());
            }
            write_atomically(&dest, |w| Ok(persist_index(&report.bundle, w)?))?;
            writeln!(out, "{}", report.stats)?;
            writeln!(out, "invalid_records={}", report.invalid_records)?;
        }
        Command::Build {
            index,
            min_links,
            top,
            measure,
            max_roles,
            out: dest,
        } => {
            let bundle = load_index(open(&index)?, None)?;
            let config = Config {
                min_links,
                top_fillers: top,
                measure,
                max_roles,
                ..Config::default()
            };
            let (set, dropped) =
                build_sketch_set(&bundle, &config).map_err(|e| CliError::by_code(e.code(), e.to_string()))?;
            let manifest = save_sketch_set(&dest, &set)?;
            for (lang, n) in &manifest.sketch_counts {
                writeln!(out, "{lang}\tsketches={n}")?;
            }
            if dropped > 0 {
                log::warn!("{dropped} example references had no sentence text");
            }
        }
        Command::Pair {
            left,
            right,
            curated,
            threshold,
            role_weight,
            filler_weight,
            out: dest,
        } => {
            if !(0.0..=1.0).contains(&threshold) {
                return Err(CliError::Usage(format!("--threshold must be in [0, 1], got {threshold}")));
            }
            if role_weight < 0.0 || filler_weight < 0.0 || role_weight + filler_weight <= 0.0 {
                return Err(CliError::Usage("affinity weights must be non-negative and not both zero".into()));
            }
            let left = load_sketch_set(&left, None)?;
            let right = load_sketch_set(&right, None)?;
            let curated = match curated {
                Some(p) => Some(parse_curated(open(&p)?).map_err(|e| CliError::by_code(e.code(), e.to_string()))?),
                None => None,
            };
            let weights = AffinityWeights {
                roles: role_weight,
                fillers: filler_weight,
            };
            let set = pair_sets(&left, &right, curated.as_ref(), threshold, weights)?;
            let manifest = save_sketch_set(&dest, &set)?;
            writeln!(out, "pairs={}", manifest.pair_count)?;
        }
        Command::Diff { store, left, right } => {
            let store = SketchStore::open(&store)?;
            print_json(out, &store.pair_diff(&left, &right)?)?;
        }
        Command::Report {
            store,
            class,
            role,
            depth,
        } => {
            let store = SketchStore::open(&store)?;
            print_json(out, &store.class_report(&class, &role, depth)?)?;
        }
        Command::Stats { index, full } => {
            let header = read_index_header(open(&index)?)?;
            let stats = if full {
                let bundle = load_index(open(&index)?, None)?;
                let mut s = CorpusStats::default();
                for (lex, n) in bundle.index.lexemes() {
                    *s.total_links.entry(lex.language.clone()).or_default() += n;
                    *s.distinct_core_lexemes.entry(lex.language).or_default() += 1;
                    *s.links_per_lexeme.entry(n).or_default() += 1;
                }
                Some(s)
            } else {
                None
            };
            print_json(out, &StatsOutput { header, stats })?;
        }
        Command::Validate { links, hierarchy } => {
            let hierarchy = load_hierarchy(&hierarchy)?;
            let (mut records, mut problems) = (0usize, 0usize);
            for (n, item) in parse_numbered_links(open(&links)?) {
                match item {
                    Ok(record) => {
                        records += 1;
                        let violations = validate_link(&record, &hierarchy);
                        if !violations.is_empty() {
                            problems += 1;
                        }
                        for v in violations {
                            writeln!(out, "line {n}: {}: {}", v.kind.code(), v.detail)?;
                        }
                    }
                    Err(e) if e.kind.code() == "E_IO" => return Err(CliError::Io(e.to_string())),
                    Err(e) => {
                        problems += 1;
                        writeln!(out, "{e}")?;
                    }
                }
            }
            writeln!(out, "records={records} problems={problems}")?;
            if problems > 0 {
                return Err(CliError::Data(format!("{problems} line(s) failed validation")));
            }
        }
        Command::Serve { store, bind } => {
            let addr: SocketAddr = bind
                .to_socket_addrs()
                .ok()
                .and_then(|mut a| a.next())
                .ok_or_else(|| CliError::Usage(format!("cannot resolve bind address `{bind}`")))?;
            let service = Arc::new(Service::open(&store)?);
            log::info!(
                "serving {} sketches from {}",
                service.store.set().sketches.len(),
                store.display()
            );
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(api::serve(service, addr))?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "semsketch: {e}");
            e.exit_code()
        }
    }
}
