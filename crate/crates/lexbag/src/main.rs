//! Command-line surface: translate, match, covers, parse, validate,
//! ingest-sato. Exit codes: 0 success, 2 resource/format error, 3
//! translation failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use lexbag::bkb::sato::{ingest_sato, parse_sato};
use lexbag::bkb::{lookup_all, serialize_entries, MatchSemantics};
use lexbag::engine::{
    tokenize, translate, validate_resources, EngineConfig, ResourcePaths, Resources, Severity, TranslateError,
};
use lexbag::grammar::load_grammar;
use lexbag::lexicon::{analyze_tokens, load_lexicon};
use lexbag::parser::{build_agenda_plan, ParserSession, TraceFn};
use lexbag::transfer::{find_covers, RankStrategy};

#[derive(Parser)]
#[command(name = "lexbag", version, about = "Desk-scale lexicalist / example-based machine translation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    /// Entry sides are bags: order and contiguity irrelevant
    Bag,
    /// Entry sides are templates: ordered, gaps allowed
    Seq,
    /// Entry sides are segments: ordered and contiguous
    SeqContig,
}

impl Mode {
    fn semantics(self) -> MatchSemantics {
        match self {
            Mode::Bag => MatchSemantics::BAG,
            Mode::Seq => MatchSemantics::SEQ,
            Mode::SeqContig => MatchSemantics::SEQ_CONTIG,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Strategy {
    /// Longest match first (descending cardinality vectors)
    Longest,
    /// Fewest entries per cover first
    Fewest,
    /// KB declaration order
    None,
}

impl Strategy {
    fn rank(self) -> RankStrategy {
        match self {
            Strategy::Longest => RankStrategy::Longest,
            Strategy::Fewest => RankStrategy::Fewest,
            Strategy::None => RankStrategy::None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct ResourceArgs {
    /// Source-language lexicon file
    #[arg(long, value_name = "FILE")]
    source_lexicon: Option<PathBuf>,
    /// Source-language grammar file
    #[arg(long, value_name = "FILE")]
    source_grammar: Option<PathBuf>,
    /// Target-language lexicon file
    #[arg(long, value_name = "FILE")]
    target_lexicon: Option<PathBuf>,
    /// Target-language grammar file
    #[arg(long, value_name = "FILE")]
    target_grammar: Option<PathBuf>,
    /// Bilingual knowledge base file
    #[arg(long, value_name = "FILE")]
    kb: Option<PathBuf>,
}

impl ResourceArgs {
    fn paths(&self) -> Result<ResourcePaths, String> {
        Ok(ResourcePaths {
            src_lex: self.source_lexicon.clone().ok_or("missing --source-lexicon")?,
            src_gram: self.source_grammar.clone().ok_or("missing --source-grammar")?,
            tgt_lex: self.target_lexicon.clone().ok_or("missing --target-lexicon")?,
            tgt_gram: self.target_grammar.clone().ok_or("missing --target-grammar")?,
            kb: self.kb.clone().ok_or("missing --kb")?,
        })
    }
}

#[derive(Args)]
struct EngineArgs {
    /// Interpretation of entry sides when matching
    #[arg(long, value_enum, default_value_t = Mode::Bag)]
    mode: Mode,
    /// Cover ranking strategy
    #[arg(long, value_enum, default_value_t = Strategy::Longest)]
    strategy: Strategy,
    /// Do not prioritize the parser agenda from bilingual lookup
    #[arg(long)]
    no_prioritize: bool,
    /// Maximum number of translations to emit
    #[arg(long, default_value_t = 1)]
    kbest: usize,
    /// Collapse duplicate surface strings, keeping the best rank
    #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
    dedup: bool,
    /// Write agenda trace events to stderr
    #[arg(long)]
    trace: bool,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Show every valid word order per translation, not only the first
    #[arg(long)]
    all_orders: bool,
}

impl EngineArgs {
    fn config(&self) -> EngineConfig {
        EngineConfig {
            sem: self.mode.semantics(),
            strategy: self.strategy.rank(),
            prioritize: !self.no_prioritize,
            kbest: self.kbest,
            dedup: self.dedup,
        }
    }

    fn trace_sink(&self) -> Option<TraceFn> {
        if self.trace {
            Some(Box::new(|e| eprintln!("{}", e)))
        } else {
            None
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Translate a sentence
    Translate {
        #[command(flatten)]
        resources: ResourceArgs,
        #[command(flatten)]
        engine: EngineArgs,
        sentence: String,
    },
    /// List bilingual-entry matches against the input
    Match {
        #[command(flatten)]
        resources: ResourceArgs,
        #[command(flatten)]
        engine: EngineArgs,
        sentence: String,
    },
    /// List exact covers per parse
    Covers {
        #[command(flatten)]
        resources: ResourceArgs,
        #[command(flatten)]
        engine: EngineArgs,
        sentence: String,
    },
    /// List parses with instantiated index bindings
    Parse {
        #[command(flatten)]
        resources: ResourceArgs,
        #[command(flatten)]
        engine: EngineArgs,
        sentence: String,
    },
    /// Cross-check a resource set and report findings
    Validate {
        #[command(flatten)]
        resources: ResourceArgs,
    },
    /// Convert a word-dependency tree pair into a canonical KB file
    IngestSato {
        #[command(flatten)]
        resources: ResourceArgs,
        /// Tree-pair fixture file
        input: PathBuf,
        /// Output KB file (stdout when absent)
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

const EXIT_RESOURCE: u8 = 2;
const EXIT_TRANSLATION: u8 = 3;

fn resource_failure(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_RESOURCE)
}

fn translation_failure(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_TRANSLATION)
}

fn read_lexicon(path: &PathBuf) -> Result<lexbag::Lexicon, String> {
    fs::read_to_string(path)
        .map_err(|e| format!("{}: {}", path.display(), e))
        .and_then(|t| load_lexicon(&t).map_err(|e| format!("{}: {}", path.display(), e)))
}

fn read_grammar(path: &PathBuf) -> Result<lexbag::Grammar, String> {
    fs::read_to_string(path)
        .map_err(|e| format!("{}: {}", path.display(), e))
        .and_then(|t| load_grammar(&t).map_err(|e| format!("{}: {}", path.display(), e)))
}

fn read_kb(path: &PathBuf) -> Result<lexbag::Bkb, String> {
    fs::read_to_string(path)
        .map_err(|e| format!("{}: {}", path.display(), e))
        .and_then(|t| lexbag::bkb::parse_bkb(&t).map_err(|e| format!("{}: {}", path.display(), e)))
}

#[derive(serde::Serialize)]
struct TranslationRecord<'a> {
    rank: usize,
    parse: usize,
    surface: &'a str,
    surfaces: Vec<&'a str>,
    entries: &'a [String],
    parse_render: String,
    links: Vec<String>,
    bag: Vec<String>,
    orders: Vec<Vec<u32>>,
}

fn cmd_translate(resources: &ResourceArgs, engine: &EngineArgs, sentence: &str) -> ExitCode {
    let paths = match resources.paths() {
        Ok(p) => p,
        Err(e) => return resource_failure(e),
    };
    let loaded = match Resources::load(&paths) {
        Ok(r) => r,
        Err(e) => return resource_failure(e),
    };
    let config = engine.config();
    match translate(sentence, &loaded, &config, engine.trace_sink()) {
        Ok((translations, _stats)) => {
            for t in &translations {
                match engine.format {
                    Format::Text => {
                        let surface = if engine.all_orders {
                            t.surfaces().join(" | ")
                        } else {
                            t.surface().to_string()
                        };
                        println!("{}. {}  [{}]  (parse {})", t.rank, surface, t.entry_ids.join(","), t.parse_index);
                    }
                    Format::Json => {
                        let record = TranslationRecord {
                            rank: t.rank,
                            parse: t.parse_index,
                            surface: t.surface(),
                            surfaces: t.surfaces(),
                            entries: &t.entry_ids,
                            parse_render: t.parse.render(),
                            links: t
                                .parse
                                .links
                                .iter()
                                .map(|l| format!("{} -{}-> {}", l.head, l.label, l.dep))
                                .collect(),
                            bag: t.target_bag.items.iter().map(|i| i.sign.to_string()).collect(),
                            orders: t
                                .results
                                .iter()
                                .map(|r| r.order.iter().map(|n| n.0).collect())
                                .collect(),
                        };
                        println!("{}", serde_json::to_string(&record).expect("record serializes"));
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Err(e @ TranslateError::InvalidConfig(_)) => resource_failure(e),
        Err(e @ TranslateError::Transfer(_)) => resource_failure(e),
        Err(e) => translation_failure(e),
    }
}

fn cmd_match(resources: &ResourceArgs, engine: &EngineArgs, sentence: &str) -> ExitCode {
    let lex_path = match &resources.source_lexicon {
        Some(p) => p,
        None => return resource_failure("missing --source-lexicon"),
    };
    let kb_path = match &resources.kb {
        Some(p) => p,
        None => return resource_failure("missing --kb"),
    };
    let lex = match read_lexicon(lex_path) {
        Ok(l) => l,
        Err(e) => return resource_failure(e),
    };
    let kb = match read_kb(kb_path) {
        Ok(k) => k,
        Err(e) => return resource_failure(e),
    };
    let tokens = analyze_tokens(&lex, &tokenize(sentence));
    for m in &lookup_all(&tokens, &kb, engine.mode.semantics()) {
        match engine.format {
            Format::Text => {
                let positions: Vec<String> = m.assignment.iter().map(|n| n.to_string()).collect();
                println!("match entry={} positions={} binding={}", m.entry_id, positions.join(","), m.binding);
            }
            Format::Json => {
                let record = serde_json::json!({
                    "entry": m.entry_id,
                    "positions": m.assignment.iter().map(|n| n.0).collect::<Vec<_>>(),
                    "binding": m.binding.to_string(),
                });
                println!("{record}");
            }
        }
    }
    ExitCode::SUCCESS
}

/// Shared parse-stream setup for the inspection commands.
fn parse_session<'a>(
    lex: &lexbag::Lexicon,
    gram: &'a lexbag::Grammar,
    kb: Option<&lexbag::Bkb>,
    engine: &EngineArgs,
    sentence: &str,
) -> Result<ParserSession<'a>, lexbag::parser::ParserError> {
    let tokens = analyze_tokens(lex, &tokenize(sentence));
    let plan = match kb {
        Some(kb) if !engine.no_prioritize => {
            let matches = lookup_all(&tokens, kb, engine.mode.semantics());
            Some(build_agenda_plan(&matches, kb, engine.strategy.rank()))
        }
        _ => None,
    };
    ParserSession::new(tokens, gram, plan, engine.trace_sink())
}

fn load_source_side(resources: &ResourceArgs) -> Result<(lexbag::Lexicon, lexbag::Grammar), String> {
    let lex = read_lexicon(resources.source_lexicon.as_ref().ok_or("missing --source-lexicon")?)?;
    let gram = read_grammar(resources.source_grammar.as_ref().ok_or("missing --source-grammar")?)?;
    Ok((lex, gram))
}

fn cmd_parse(resources: &ResourceArgs, engine: &EngineArgs, sentence: &str) -> ExitCode {
    let (lex, gram) = match load_source_side(resources) {
        Ok(v) => v,
        Err(e) => return resource_failure(e),
    };
    let kb = match resources.kb.as_ref().map(read_kb).transpose() {
        Ok(k) => k,
        Err(e) => return resource_failure(e),
    };
    let mut session = match parse_session(&lex, &gram, kb.as_ref(), engine, sentence) {
        Ok(s) => s,
        Err(e) => return translation_failure(e),
    };
    let mut index = 0;
    while let Some(p) = session.next_parse() {
        index += 1;
        match engine.format {
            Format::Text => {
                println!("parse {}: root={}", index, p.root);
                println!("  {}", p.render());
                for l in &p.links {
                    println!("  {} -{}-> {}", l.head, l.label, l.dep);
                }
            }
            Format::Json => {
                let record = serde_json::json!({
                    "parse": index,
                    "root": p.root.0,
                    "signs": p.signs.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                    "links": p.links.iter().map(|l| format!("{} -{}-> {}", l.head, l.label, l.dep)).collect::<Vec<_>>(),
                });
                println!("{record}");
            }
        }
    }
    if index == 0 {
        return translation_failure("no parse");
    }
    ExitCode::SUCCESS
}

fn cmd_covers(resources: &ResourceArgs, engine: &EngineArgs, sentence: &str) -> ExitCode {
    let (lex, gram) = match load_source_side(resources) {
        Ok(v) => v,
        Err(e) => return resource_failure(e),
    };
    let kb = match &resources.kb {
        Some(p) => match read_kb(p) {
            Ok(k) => k,
            Err(e) => return resource_failure(e),
        },
        None => return resource_failure("missing --kb"),
    };
    let mut session = match parse_session(&lex, &gram, Some(&kb), engine, sentence) {
        Ok(s) => s,
        Err(e) => return translation_failure(e),
    };
    let strategy = engine.strategy.rank();
    let mut index = 0;
    let mut any_cover = false;
    while let Some(p) = session.next_parse() {
        index += 1;
        if engine.format == Format::Text {
            println!("parse {}: {}", index, p.render());
        }
        match find_covers(&p.source_bag(), &kb, engine.mode.semantics(), strategy) {
            Ok(covers) => {
                for c in &covers {
                    any_cover = true;
                    match engine.format {
                        Format::Text => {
                            let cards: Vec<String> = c.cardinality_vector().iter().map(|n| n.to_string()).collect();
                            println!(
                                "  cover [{}] cardinality=({}) strategy={}",
                                c.entry_ids().join(","),
                                cards.join(","),
                                strategy.name()
                            );
                        }
                        Format::Json => {
                            let record = serde_json::json!({
                                "parse": index,
                                "entries": c.entry_ids(),
                                "cardinality": c.cardinality_vector(),
                            });
                            println!("{record}");
                        }
                    }
                }
            }
            Err(e) => {
                if engine.format == Format::Text {
                    println!("  {}", e);
                }
            }
        }
    }
    if index == 0 {
        return translation_failure("no parse");
    }
    if !any_cover {
        return translation_failure("no cover for any parse");
    }
    ExitCode::SUCCESS
}

fn cmd_validate(resources: &ResourceArgs) -> ExitCode {
    let paths = match resources.paths() {
        Ok(p) => p,
        Err(e) => return resource_failure(e),
    };
    let loaded = match Resources::load(&paths) {
        Ok(r) => r,
        Err(e) => return resource_failure(e),
    };
    let report = validate_resources(&loaded);
    for f in &report.findings {
        let tag = match f.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        println!("{tag}: [{code}] {message}", code = f.code, message = f.message);
    }
    println!(
        "{} error(s), {} warning(s)",
        report.findings.iter().filter(|f| f.severity == Severity::Error).count(),
        report.findings.iter().filter(|f| f.severity == Severity::Warning).count()
    );
    if report.has_errors() {
        ExitCode::from(EXIT_RESOURCE)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_ingest_sato(resources: &ResourceArgs, input: &PathBuf, out: Option<&PathBuf>) -> ExitCode {
    let src_lex = match resources.source_lexicon.as_ref().ok_or("missing --source-lexicon".to_string()).and_then(|p| read_lexicon(p)) {
        Ok(l) => l,
        Err(e) => return resource_failure(e),
    };
    let tgt_lex = match resources.target_lexicon.as_ref().ok_or("missing --target-lexicon".to_string()).and_then(|p| read_lexicon(p)) {
        Ok(l) => l,
        Err(e) => return resource_failure(e),
    };
    let text = match fs::read_to_string(input) {
        Ok(t) => t,
        Err(e) => return resource_failure(format!("{}: {}", input.display(), e)),
    };
    let effectively_empty = text.lines().all(|l| {
        let t = l.trim();
        t.is_empty() || t.starts_with('#')
    });
    if effectively_empty {
        return write_kb(out, "");
    }
    let pair = match parse_sato(&text) {
        Ok(p) => p,
        Err(e) => return resource_failure(format!("{}: {}", input.display(), e)),
    };
    let entries = match ingest_sato(&pair, &src_lex.cats, &tgt_lex.cats) {
        Ok(es) => es,
        Err(e) => return resource_failure(format!("{}: {}", input.display(), e)),
    };
    write_kb(out, &serialize_entries(&entries))
}

fn write_kb(out: Option<&PathBuf>, text: &str) -> ExitCode {
    match out {
        Some(path) => match fs::write(path, text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => resource_failure(format!("{}: {}", path.display(), e)),
        },
        None => {
            print!("{text}");
            ExitCode::SUCCESS
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Translate { resources, engine, sentence } => cmd_translate(resources, engine, sentence),
        Command::Match { resources, engine, sentence } => cmd_match(resources, engine, sentence),
        Command::Covers { resources, engine, sentence } => cmd_covers(resources, engine, sentence),
        Command::Parse { resources, engine, sentence } => cmd_parse(resources, engine, sentence),
        Command::Validate { resources } => cmd_validate(resources),
        Command::IngestSato { resources, input, out } => cmd_ingest_sato(resources, input, out.as_ref()),
    }
}
