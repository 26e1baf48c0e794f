//! End-to-end orchestration: tokenize, bilingual lookup, agenda plan,
//! parse stream, per-parse cover stream, transfer, generation — a ranked,
//! lazily enumerated translation stream.
//!
//! Emission order is (parse emission order under the agenda plan, then
//! cover rank within each parse). Prioritization and ranking change only
//! that order; the set of (entry-id set, surface) results is
//! configuration-independent apart from deduplication.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bkb::{lookup_all, parse_bkb, Bkb, MatchSemantics};
use crate::generator::{generate, GenerationResult};
use crate::grammar::{load_grammar, Grammar};
use crate::lexicon::{analyze_tokens, load_lexicon, Lexicon};
use crate::parser::{build_agenda_plan, Parse, ParserError, ParserSession, TraceFn};
use crate::sign::features_subsume;
use crate::transfer::{apply_cover, find_covers, Cover, RankStrategy, TargetBag, TransferError};

/// Loaded, validated-on-construction translation resources. Immutable;
/// one set may serve many concurrent sessions.
#[derive(Clone, Debug)]
pub struct Resources {
    pub src_lex: Lexicon,
    pub src_gram: Grammar,
    pub tgt_lex: Lexicon,
    pub tgt_gram: Grammar,
    pub kb: Bkb,
}

/// Paths to the five resource files.
#[derive(Clone, Debug, Default)]
pub struct ResourcePaths {
    pub src_lex: PathBuf,
    pub src_gram: PathBuf,
    pub tgt_lex: PathBuf,
    pub tgt_gram: PathBuf,
    pub kb: PathBuf,
}

#[derive(Debug, Error)]
pub enum ResourceError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

fn read(path: &Path) -> Result<String, ResourceError> {
    fs::read_to_string(path).map_err(|source| ResourceError::Io { path: path.display().to_string(), source })
}

fn format_err(path: &Path, e: impl fmt::Display) -> ResourceError {
    ResourceError::Format { path: path.display().to_string(), message: e.to_string() }
}

impl Resources {
    pub fn load(paths: &ResourcePaths) -> Result<Resources, ResourceError> {
        let src_lex = load_lexicon(&read(&paths.src_lex)?).map_err(|e| format_err(&paths.src_lex, e))?;
        let src_gram = load_grammar(&read(&paths.src_gram)?).map_err(|e| format_err(&paths.src_gram, e))?;
        let tgt_lex = load_lexicon(&read(&paths.tgt_lex)?).map_err(|e| format_err(&paths.tgt_lex, e))?;
        let tgt_gram = load_grammar(&read(&paths.tgt_gram)?).map_err(|e| format_err(&paths.tgt_gram, e))?;
        let kb = parse_bkb(&read(&paths.kb)?).map_err(|e| format_err(&paths.kb, e))?;
        Ok(Resources { src_lex, src_gram, tgt_lex, tgt_gram, kb })
    }
}

/// Per-run configuration: interpretation of the KB, cover ranking,
/// whether bilingual lookup prioritizes parsing, how many translations to
/// emit, and duplicate-surface collapsing.
#[derive(Clone, Copy, Debug)]
pub struct EngineConfig {
    pub sem: MatchSemantics,
    pub strategy: RankStrategy,
    pub prioritize: bool,
    pub kbest: usize,
    pub dedup: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            sem: MatchSemantics::BAG,
            strategy: RankStrategy::Longest,
            prioritize: true,
            kbest: 1,
            dedup: false,
        }
    }
}

/// One ranked translation: the parse it came from, the cover used, the
/// transferred bag, and the generated surface strings (never empty;
/// covers whose bags fail generation are skipped, not emitted).
#[derive(Clone, Debug)]
pub struct Translation {
    /// 1-based emission index.
    pub rank: usize,
    /// 1-based index of the parse in emission order.
    pub parse_index: usize,
    pub parse: Parse,
    pub cover: Cover,
    /// Entry ids in KB declaration order.
    pub entry_ids: Vec<String>,
    pub target_bag: TargetBag,
    pub results: Vec<GenerationResult>,
}

impl Translation {
    pub fn surface(&self) -> &str {
        &self.results[0].surface
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.results.iter().map(|r| r.surface.as_str()).collect()
    }
}

/// Counters exposing how much work a translation session performed;
/// the laziness guarantees are asserted against these.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SessionStats {
    pub parses_emitted: usize,
    pub covers_enumerated: usize,
    pub generations_attempted: usize,
    pub generation_failures: usize,
}

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("unknown token: {0}")]
    UnknownToken(String),
    #[error("no parse")]
    NoParse,
    #[error("no cover for parse {parse_index} ({parse}); residue: [{residue}]", residue = .residue.join(", "))]
    NoCover { parse_index: usize, parse: String, residue: Vec<String> },
    #[error("every cover failed generation")]
    NoGeneration,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("transfer failed: {0}")]
    Transfer(String),
}

/// Whitespace tokenization with terminal punctuation stripped.
pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence
        .split_whitespace()
        .map(|t| t.trim_end_matches(['.', '?', '!', ',', ';', ':']).to_string())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Translates one sentence, returning at most `kbest` translations in
/// emission order plus the work counters. Enumeration is lazy: once
/// `kbest` translations exist, no further parses are pulled and no
/// further covers are generated.
pub fn translate(
    sentence: &str,
    resources: &Resources,
    config: &EngineConfig,
    trace: Option<TraceFn>,
) -> Result<(Vec<Translation>, SessionStats), TranslateError> {
    if config.kbest < 1 {
        return Err(TranslateError::InvalidConfig("kbest must be at least 1".into()));
    }
    let tokens = tokenize(sentence);
    let analyzed = analyze_tokens(&resources.src_lex, &tokens);
    for t in &analyzed {
        if t.analyses.is_empty() {
            return Err(TranslateError::UnknownToken(t.surface.clone()));
        }
    }
    if analyzed.is_empty() {
        return Err(TranslateError::NoParse);
    }

    let plan = if config.prioritize {
        let matches = lookup_all(&analyzed, &resources.kb, config.sem);
        Some(build_agenda_plan(&matches, &resources.kb, config.strategy))
    } else {
        None
    };

    let mut session = ParserSession::new(analyzed, &resources.src_gram, plan, trace).map_err(|e| match e {
        ParserError::UnknownToken(t) => TranslateError::UnknownToken(t),
        other => TranslateError::InvalidConfig(other.to_string()),
    })?;

    let mut stats = SessionStats::default();
    let mut out: Vec<Translation> = Vec::new();
    let mut seen_surfaces: BTreeSet<Vec<String>> = BTreeSet::new();
    let mut first_residue: Option<(usize, String, Vec<String>)> = None;
    let mut parse_index = 0usize;

    'parses: while let Some(parse) = session.next_parse() {
        parse_index += 1;
        stats.parses_emitted += 1;

        let covers = match find_covers(&parse.source_bag(), &resources.kb, config.sem, config.strategy) {
            Ok(cs) => cs,
            Err(TransferError::NoCover { residue }) => {
                if first_residue.is_none() {
                    first_residue = Some((
                        parse_index,
                        parse.render(),
                        residue.iter().map(|s| s.to_string()).collect(),
                    ));
                }
                continue;
            }
            Err(other) => return Err(TranslateError::Transfer(other.to_string())),
        };
        stats.covers_enumerated += covers.len();

        for cover in covers {
            let bag = apply_cover(&cover, &resources.kb, &parse.source_bag(), &resources.tgt_lex.cats)
                .map_err(|e| TranslateError::Transfer(e.to_string()))?;
            stats.generations_attempted += 1;
            let results = match generate(&bag, &resources.tgt_gram, &resources.tgt_lex) {
                Ok(rs) if !rs.is_empty() => rs,
                _ => {
                    stats.generation_failures += 1;
                    continue;
                }
            };
            if config.dedup {
                let key: Vec<String> = results.iter().map(|r| r.surface.clone()).collect();
                if !seen_surfaces.insert(key) {
                    continue;
                }
            }
            let entry_ids = cover.entry_ids();
            out.push(Translation {
                rank: out.len() + 1,
                parse_index,
                parse: parse.clone(),
                cover,
                entry_ids,
                target_bag: bag,
                results,
            });
            if out.len() == config.kbest {
                break 'parses;
            }
        }
    }

    if out.is_empty() {
        if stats.parses_emitted == 0 {
            return Err(TranslateError::NoParse);
        }
        if let Some((parse_index, parse, residue)) = first_residue {
            if stats.covers_enumerated == 0 {
                return Err(TranslateError::NoCover { parse_index, parse, residue });
            }
        }
        if stats.covers_enumerated == 0 {
            return Err(TranslateError::NoCover {
                parse_index: 1,
                parse: String::new(),
                residue: Vec::new(),
            });
        }
        return Err(TranslateError::NoGeneration);
    }
    Ok((out, stats))
}

/// Severity of one validation finding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug)]
pub struct Finding {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
}

/// Structured cross-check report over a resource set.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Error)
    }

    fn error(&mut self, code: &'static str, message: String) {
        self.findings.push(Finding { severity: Severity::Error, code, message });
    }

    fn warning(&mut self, code: &'static str, message: String) {
        self.findings.push(Finding { severity: Severity::Warning, code, message });
    }
}

/// Cross-checks the resource set: every KB lemma/category resolves in the
/// corresponding monolingual lexicon, category signatures agree between
/// lexicon and grammar, `@null` carriers are bound, and agreement
/// surfaces demanded by dropped-word features are realizable.
pub fn validate_resources(resources: &Resources) -> ValidationReport {
    let mut report = ValidationReport::default();

    for (side, lex, gram) in [
        ("source", &resources.src_lex, &resources.src_gram),
        ("target", &resources.tgt_lex, &resources.tgt_gram),
    ] {
        for tag in lex.cats.tags() {
            if let (Some(a), Some(b)) = (lex.cats.signatures(tag), gram.cats.signatures(tag)) {
                if a != b {
                    report.error(
                        "category-mismatch",
                        format!("{side}: category `{tag}` declared differently in lexicon and grammar"),
                    );
                }
            }
        }
    }

    for entry in &resources.kb.entries {
        for (side_name, items, lex) in [
            ("source", &entry.source, &resources.src_lex),
            ("target", &entry.target, &resources.tgt_lex),
        ] {
            for item in items {
                let found = lex
                    .entries_for_lemma(&item.lemma)
                    .any(|e| e.category.tag == item.cat && e.category.arity() == item.arity());
                if !found {
                    report.error(
                        "kb-lemma-unknown",
                        format!(
                            "entry `{}` ({side_name} side): `{}:{}/{}` has no {side_name} lexicon entry",
                            entry.id,
                            item.lemma,
                            item.cat,
                            item.arity()
                        ),
                    );
                }
            }
        }
        let source_vars = entry.source_vars();
        for var in entry.target_features.keys() {
            if !source_vars.contains(var) {
                report.error(
                    "null-carrier-unbound",
                    format!("entry `{}`: @null carrier `{}` does not occur on the source side", entry.id, var),
                );
            }
        }
    }

    // agreement surfaces: features deposited by dropped words must be
    // realizable for every target lemma with a subject slot
    let mut dropped_feature_sets = Vec::new();
    for entry in &resources.kb.entries {
        for feats in entry.target_features.values() {
            if !feats.is_empty() && !dropped_feature_sets.contains(feats) {
                dropped_feature_sets.push(feats.clone());
            }
        }
    }
    let mut checked = BTreeSet::new();
    for entry in &resources.kb.entries {
        for item in &entry.target {
            let Some(lex_entry) = resources
                .tgt_lex
                .entries_for_lemma(&item.lemma)
                .find(|e| e.category.tag == item.cat && e.category.arity() == item.arity())
            else {
                continue;
            };
            if !lex_entry.category.has_role("subj") {
                continue;
            }
            for feats in &dropped_feature_sets {
                if !checked.insert((item.lemma.clone(), format!("{feats:?}"))) {
                    continue;
                }
                let has_rule = resources
                    .tgt_lex
                    .morph_rules()
                    .iter()
                    .any(|r| r.lemma == item.lemma && features_subsume(&r.features, feats));
                if !has_rule {
                    report.warning(
                        "morph-coverage",
                        format!(
                            "target lemma `{}` has no morph rule for {}; the agreement surface is unreachable",
                            item.lemma,
                            crate::sign::features_to_string(feats)
                        ),
                    );
                }
            }
        }
    }

    for w in &resources.kb.warnings {
        report.warning("kb-unshared-target-var", w.to_string());
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
    }

    fn en_es() -> Resources {
        Resources::load(&ResourcePaths {
            src_lex: fixture("en-es/english.lex"),
            src_gram: fixture("en-es/english.gram"),
            tgt_lex: fixture("en-es/spanish.lex"),
            tgt_gram: fixture("en-es/spanish.gram"),
            kb: fixture("en-es/rules.kb"),
        })
        .unwrap()
    }

    #[test]
    fn tokenizer_strips_terminal_punctuation() {
        assert_eq!(tokenize("They cut back on investments."), vec!["They", "cut", "back", "on", "investments"]);
        assert_eq!(tokenize("  a  b?  "), vec!["a", "b"]);
    }

    #[test]
    fn default_config_translates_the_worked_example_first() {
        let r = en_es();
        let (ts, stats) = translate("They cut back on investments", &r, &EngineConfig::default(), None).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].surface(), "reducen las inversiones");
        assert_eq!(ts[0].entry_ids, vec!["e", "g", "they"]);
        // laziness: only the first cover of the first parse was generated
        assert_eq!(stats.generations_attempted, 1);
        assert_eq!(stats.parses_emitted, 1);
    }

    #[test]
    fn full_enumeration_matches_the_solution_table() {
        let r = en_es();
        let config = EngineConfig { kbest: 10, ..Default::default() };
        let (ts, _) = translate("They cut back on investments", &r, &config, None).unwrap();
        let mut pairs: Vec<(String, String)> = ts
            .iter()
            .map(|t| (t.surface().to_string(), t.entry_ids.join(",")))
            .collect();
        pairs.sort();
        assert_eq!(
            pairs,
            vec![
                ("cortan atrás en las inversiones".to_string(), "a,c,g,h,they".to_string()),
                ("cortan espalda en las inversiones".to_string(), "b,f,g,h,they".to_string()),
                ("cortan espalda en las inversiones".to_string(), "b,f,g,h,they".to_string()),
                ("hacen economías en las inversiones".to_string(), "d,g,h,they".to_string()),
                ("reducen las inversiones".to_string(), "e,g,they".to_string()),
            ]
        );
    }

    #[test]
    fn dedup_collapses_duplicate_surfaces() {
        let r = en_es();
        let config = EngineConfig { kbest: 10, dedup: true, ..Default::default() };
        let (ts, _) = translate("They cut back on investments", &r, &config, None).unwrap();
        assert_eq!(ts.len(), 4);
    }

    #[test]
    fn unknown_token_and_no_parse_errors() {
        let r = en_es();
        let cfg = EngineConfig::default();
        assert!(matches!(
            translate("they grok investments", &r, &cfg, None),
            Err(TranslateError::UnknownToken(t)) if t == "grok"
        ));
        assert!(matches!(
            translate("cut cut", &r, &cfg, None),
            Err(TranslateError::NoParse)
        ));
    }

    #[test]
    fn validator_accepts_the_fixture_resources() {
        let r = en_es();
        let report = validate_resources(&r);
        assert!(!report.has_errors(), "unexpected errors: {:?}", report.findings);
        // entry d's target-only variable is reported, not an error
        assert!(report.findings.iter().any(|f| f.code == "kb-unshared-target-var"));
    }

    #[test]
    fn validator_flags_missing_lemma_and_missing_morph() {
        let mut r = en_es();
        let mut kb_text = crate::bkb::serialize_entries(&r.kb.entries);
        kb_text.push_str("zz: ghost:n[A] <-> fantasma:n[A]\n");
        r.kb = parse_bkb(&kb_text).unwrap();
        let report = validate_resources(&r);
        assert!(report.has_errors());
        assert!(report.findings.iter().any(|f| f.code == "kb-lemma-unknown" && f.message.contains("ghost")));

        // removing the `hacen` rule makes the agreement surface unreachable
        let mut r = en_es();
        let lex_text = std::fs::read_to_string(fixture("en-es/spanish.lex")).unwrap();
        let without: String = lex_text.lines().filter(|l| !l.contains("hacen")).collect::<Vec<_>>().join("\n");
        r.tgt_lex = crate::lexicon::load_lexicon(&without).unwrap();
        let report = validate_resources(&r);
        assert!(report
            .findings
            .iter()
            .any(|f| f.code == "morph-coverage" && f.message.contains("hacer")));
    }
}
