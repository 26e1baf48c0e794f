//! Monolingual lexicons: surface forms to sign templates, plus the
//! table-driven morphology used for analysis (source side) and
//! realization (target side).
//!
//! File format (UTF-8, line oriented, `#` comments):
//!
//! ```text
//! cat iv : self subj | self subj prt   # category with two signatures
//! lex cut iv/3                         # entry: lemma, category, arity
//! morph investments = investment {num=pl}
//! ```
//!
//! See `docs/formats.md` for the full grammar of the format.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::sign::{
    features_subsume, features_to_string, Category, CategorySet, Features, Index, IndexVar, Sign, SELF_ROLE,
};

/// One lexicon entry: a lemma with a category signature and entry-local,
/// pairwise-distinct index variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexiconEntry {
    pub lemma: String,
    pub category: Category,
    pub vars: Vec<IndexVar>,
}

impl LexiconEntry {
    /// The uninstantiated sign template for this entry.
    pub fn template(&self) -> Sign {
        Sign::new(
            self.lemma.clone(),
            self.category.clone(),
            self.vars.iter().cloned().map(Index::Var).collect(),
            Features::new(),
        )
    }
}

/// Table-driven morphological correspondence: one surface form analyzed
/// as (lemma, features). The same table drives realization in reverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphRule {
    pub surface: String,
    pub lemma: String,
    pub features: Features,
}

/// An immutable monolingual lexicon.
#[derive(Clone, Debug, Default)]
pub struct Lexicon {
    pub cats: CategorySet,
    entries: Vec<LexiconEntry>,
    morphs: Vec<MorphRule>,
}

/// One lexical analysis of a surface token: a sign template plus the
/// features contributed by morphology.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Analysis {
    pub template: Sign,
    pub features: Features,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: duplicate entry `{lemma} {cat}/{arity}`")]
    DuplicateExactEntry { line: usize, lemma: String, cat: String, arity: usize },
    #[error("line {line}: morph rule for `{surface}` names lemma `{lemma}` which has no lexicon entry")]
    MorphRuleWithoutLemma { line: usize, surface: String, lemma: String },
    #[error("ambiguous realization of `{lemma}`{features}: both `{first}` and `{second}` match")]
    AmbiguousRealization { lemma: String, features: String, first: String, second: String },
    #[error("lemma `{0}` not in lexicon")]
    UnknownLemma(String),
}

fn parse_err(line: usize, reason: impl Into<String>) -> LexiconError {
    LexiconError::Parse { line, reason: reason.into() }
}

/// Strips a trailing comment and surrounding whitespace.
pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim(),
        None => line.trim(),
    }
}

/// Parses `{k=v,k=v}`; the empty string yields an empty map.
pub(crate) fn parse_features_str(text: &str) -> Result<Features, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Features::new());
    }
    let inner = text
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| format!("malformed feature block `{}`", text))?;
    let mut out = Features::new();
    for piece in inner.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        let (k, v) = piece
            .split_once('=')
            .ok_or_else(|| format!("malformed feature `{}` (expected k=v)", piece))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn parse_features(text: &str, line: usize) -> Result<Features, LexiconError> {
    parse_features_str(text).map_err(|reason| parse_err(line, reason))
}

/// Generates entry-local variable names A, B, ..., Z, A1, B1, ...
pub(crate) fn var_names(n: usize) -> Vec<IndexVar> {
    (0..n)
        .map(|i| {
            let letter = (b'A' + (i % 26) as u8) as char;
            let round = i / 26;
            if round == 0 {
                IndexVar::new(letter.to_string())
            } else {
                IndexVar::new(format!("{}{}", letter, round))
            }
        })
        .collect()
}

/// Loads a lexicon from its textual format.
pub fn load_lexicon(text: &str) -> Result<Lexicon, LexiconError> {
    let mut cats = CategorySet::new();
    let mut entries: Vec<LexiconEntry> = Vec::new();
    let mut morphs: Vec<MorphRule> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let body = strip_comment(raw);
        if body.is_empty() {
            continue;
        }
        let (keyword, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        let rest = rest.trim();
        match keyword {
            "cat" => {
                let (tag, sig_text) = rest
                    .split_once(':')
                    .ok_or_else(|| parse_err(line, "expected `cat TAG : role ... | role ...`"))?;
                let tag = tag.trim();
                if tag.is_empty() {
                    return Err(parse_err(line, "empty category tag"));
                }
                let mut sigs = Vec::new();
                for alt in sig_text.split('|') {
                    let roles: Vec<Role> = alt.split_whitespace().map(|r| r.to_string()).collect();
                    if roles.is_empty() {
                        return Err(parse_err(line, "empty role signature"));
                    }
                    sigs.push(roles);
                }
                cats.declare(tag, sigs).map_err(|e| parse_err(line, e.to_string()))?;
            }
            "lex" => {
                let mut parts = rest.split_whitespace();
                let lemma = parts.next().ok_or_else(|| parse_err(line, "expected `lex LEMMA CAT/ARITY`"))?;
                let catspec = parts.next().ok_or_else(|| parse_err(line, "expected `lex LEMMA CAT/ARITY`"))?;
                if parts.next().is_some() {
                    return Err(parse_err(line, "unexpected trailing material after `lex` entry"));
                }
                let (tag, arity_text) = catspec
                    .split_once('/')
                    .ok_or_else(|| parse_err(line, format!("malformed category spec `{}` (expected CAT/ARITY)", catspec)))?;
                let arity: usize = arity_text
                    .parse()
                    .map_err(|_| parse_err(line, format!("bad arity `{}`", arity_text)))?;
                let category = cats.category(tag, arity).map_err(|e| parse_err(line, e.to_string()))?;
                if entries
                    .iter()
                    .any(|e| e.lemma == lemma && e.category == category)
                {
                    return Err(LexiconError::DuplicateExactEntry {
                        line,
                        lemma: lemma.to_string(),
                        cat: tag.to_string(),
                        arity,
                    });
                }
                entries.push(LexiconEntry {
                    lemma: lemma.to_string(),
                    category,
                    vars: var_names(arity),
                });
            }
            "morph" => {
                let (surface, rhs) = rest
                    .split_once('=')
                    .ok_or_else(|| parse_err(line, "expected `morph SURFACE = LEMMA {feats}`"))?;
                let surface = surface.trim();
                let rhs = rhs.trim();
                let (lemma, feat_text) = match rhs.find('{') {
                    Some(i) => (rhs[..i].trim(), rhs[i..].trim()),
                    None => (rhs, ""),
                };
                if surface.is_empty() || lemma.is_empty() {
                    return Err(parse_err(line, "morph rule needs a surface and a lemma"));
                }
                let features = parse_features(feat_text, line)?;
                if !entries.iter().any(|e| e.lemma == lemma) {
                    return Err(LexiconError::MorphRuleWithoutLemma {
                        line,
                        surface: surface.to_string(),
                        lemma: lemma.to_string(),
                    });
                }
                morphs.push(MorphRule {
                    surface: surface.to_string(),
                    lemma: lemma.to_string(),
                    features,
                });
            }
            other => {
                return Err(parse_err(line, format!("unknown directive `{}`", other)));
            }
        }
    }

    Ok(Lexicon { cats, entries, morphs })
}

/// Role type alias re-exported for signature parsing.
type Role = String;

impl Lexicon {
    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn morph_rules(&self) -> &[MorphRule] {
        &self.morphs
    }

    pub fn has_lemma(&self, lemma: &str) -> bool {
        self.entries.iter().any(|e| e.lemma == lemma)
    }

    pub fn entries_for_lemma<'a>(&'a self, lemma: &'a str) -> impl Iterator<Item = &'a LexiconEntry> {
        self.entries.iter().filter(move |e| e.lemma == lemma)
    }

    /// Normalizes a surface token: lowercased, so sentence-initial
    /// capitalized forms hit their lowercase entries.
    pub fn normalize(token: &str) -> String {
        token.to_lowercase()
    }

    /// All lexical analyses of one surface token, in declaration order
    /// (morph rules first, then entry order within each lemma). A surface
    /// with no explicit morph rule that is itself a lemma gets an implicit
    /// identity analysis with no features. Unknown tokens yield an empty
    /// set; severity is the caller's decision.
    pub fn analyze(&self, surface_token: &str) -> Vec<Analysis> {
        let token = Self::normalize(surface_token);
        let mut lemma_hypotheses: Vec<(String, Features)> = Vec::new();
        for rule in &self.morphs {
            if rule.surface == token {
                lemma_hypotheses.push((rule.lemma.clone(), rule.features.clone()));
            }
        }
        if lemma_hypotheses.is_empty() && self.has_lemma(&token) {
            lemma_hypotheses.push((token.clone(), Features::new()));
        }
        let mut out = Vec::new();
        for (lemma, features) in lemma_hypotheses {
            for entry in self.entries_for_lemma(&lemma) {
                out.push(Analysis { template: entry.template(), features: features.clone() });
            }
        }
        out
    }

    /// Surface form for (lemma, features): the unique morph rule whose
    /// feature constraints are subsumed by `features`, the lemma itself
    /// when no rule matches.
    pub fn realize(&self, lemma: &str, category: &Category, features: &Features) -> Result<String, LexiconError> {
        if !self
            .entries
            .iter()
            .any(|e| e.lemma == lemma && e.category.tag == category.tag)
        {
            return Err(LexiconError::UnknownLemma(lemma.to_string()));
        }
        let mut surfaces: Vec<&str> = Vec::new();
        for rule in &self.morphs {
            if rule.lemma == lemma && features_subsume(&rule.features, features) {
                if !surfaces.contains(&rule.surface.as_str()) {
                    surfaces.push(&rule.surface);
                }
            }
        }
        match surfaces.len() {
            0 => Ok(lemma.to_string()),
            1 => Ok(surfaces[0].to_string()),
            _ => Err(LexiconError::AmbiguousRealization {
                lemma: lemma.to_string(),
                features: features_to_string(features),
                first: surfaces[0].to_string(),
                second: surfaces[1].to_string(),
            }),
        }
    }

    /// Template variables instantiated at a token: the `self` role (when
    /// present) is bound to the token's node, everything else stays open.
    pub fn skeleton_at(template: &Sign, node: crate::sign::NodeId) -> Vec<Option<crate::sign::NodeId>> {
        template
            .category
            .roles
            .iter()
            .map(|r| if r == SELF_ROLE { Some(node) } else { None })
            .collect()
    }
}

/// A surface token at a sentence position together with all its lexical
/// analyses.
#[derive(Clone, Debug)]
pub struct AnalyzedToken {
    pub node: crate::sign::NodeId,
    pub surface: String,
    pub analyses: Vec<Analysis>,
}

/// Analyzes a token sequence; positions are 1-based.
pub fn analyze_tokens(lexicon: &Lexicon, tokens: &[String]) -> Vec<AnalyzedToken> {
    tokens
        .iter()
        .enumerate()
        .map(|(i, t)| AnalyzedToken {
            node: crate::sign::NodeId(i as u32 + 1),
            surface: t.clone(),
            analyses: lexicon.analyze(t),
        })
        .collect()
}

/// Deterministic multimap of entries by lemma used in validation output.
pub fn entries_by_lemma(lexicon: &Lexicon) -> BTreeMap<&str, Vec<&LexiconEntry>> {
    let mut out: BTreeMap<&str, Vec<&LexiconEntry>> = BTreeMap::new();
    for e in lexicon.entries() {
        out.entry(e.lemma.as_str()).or_default().push(e);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const ENGLISH: &str = "\
# desk English lexicon
cat iv : self subj | self subj prt
cat tv : self subj obj
cat n : self
cat pron : self
cat adv : anchor
cat p : anchor comp

lex back adv/1
lex back n/1
lex cut iv/2
lex cut iv/3
lex cut tv/3
lex investment n/1
lex on p/2
lex they pron/1

morph investments = investment {num=pl}
";

    #[test]
    fn loads_desk_lexicon() {
        let lex = load_lexicon(ENGLISH).unwrap();
        assert_eq!(lex.entries().len(), 8);
        assert_eq!(lex.morph_rules().len(), 1);
    }

    #[test]
    fn empty_stream_is_empty_lexicon() {
        let lex = load_lexicon("").unwrap();
        assert!(lex.entries().is_empty());
        assert!(lex.analyze("anything").is_empty());
    }

    #[test]
    fn arity_must_match_a_declared_signature() {
        let err = load_lexicon("cat iv : self subj\nlex cut iv/1\n").unwrap_err();
        assert!(matches!(err, LexiconError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn duplicate_exact_entry_rejected() {
        let err = load_lexicon("cat n : self\nlex dog n/1\nlex dog n/1\n").unwrap_err();
        assert!(matches!(err, LexiconError::DuplicateExactEntry { .. }));
    }

    #[test]
    fn morph_rule_needs_lemma() {
        let err = load_lexicon("cat n : self\nmorph dogs = dog {num=pl}\n").unwrap_err();
        assert!(matches!(err, LexiconError::MorphRuleWithoutLemma { .. }));
    }

    #[test]
    fn analyze_cut_yields_three_hypotheses() {
        let lex = load_lexicon(ENGLISH).unwrap();
        let analyses = lex.analyze("cut");
        let shapes: Vec<String> = analyses
            .iter()
            .map(|a| format!("{}:{}/{}", a.template.lemma, a.template.category.tag, a.template.category.arity()))
            .collect();
        assert_eq!(shapes, vec!["cut:iv/2", "cut:iv/3", "cut:tv/3"]);
    }

    #[test]
    fn analyze_inflected_and_unknown() {
        let lex = load_lexicon(ENGLISH).unwrap();
        let analyses = lex.analyze("investments");
        assert_eq!(analyses.len(), 1);
        assert_eq!(analyses[0].template.lemma, "investment");
        assert_eq!(analyses[0].features.get("num").map(String::as_str), Some("pl"));
        assert!(lex.analyze("xyzzy").is_empty());
    }

    #[test]
    fn analyze_is_case_insensitive() {
        let lex = load_lexicon(ENGLISH).unwrap();
        assert_eq!(lex.analyze("They").len(), 1);
    }

    #[test]
    fn realize_with_and_without_rules() {
        let text = "\
cat n : self
cat v : self subj obj
lex inversión n/1
lex cortar v/3
morph inversiones = inversión {num=pl}
morph cortan = cortar {per=3,num=pl}
";
        let lex = load_lexicon(text).unwrap();
        let n = lex.cats.category("n", 1).unwrap();
        let v = lex.cats.category("v", 3).unwrap();
        let mut pl = Features::new();
        pl.insert("num".into(), "pl".into());
        assert_eq!(lex.realize("inversión", &n, &pl).unwrap(), "inversiones");
        let mut sg = Features::new();
        sg.insert("num".into(), "sg".into());
        assert_eq!(lex.realize("inversión", &n, &sg).unwrap(), "inversión");
        let mut third_pl = pl.clone();
        third_pl.insert("per".into(), "3".into());
        assert_eq!(lex.realize("cortar", &v, &third_pl).unwrap(), "cortan");
    }

    #[test]
    fn realize_ambiguity_is_an_error() {
        let text = "\
cat n : self
lex x n/1
morph xs = x {num=pl}
morph xes = x {num=pl}
";
        let lex = load_lexicon(text).unwrap();
        let n = lex.cats.category("n", 1).unwrap();
        let mut pl = Features::new();
        pl.insert("num".into(), "pl".into());
        assert!(matches!(
            lex.realize("x", &n, &pl),
            Err(LexiconError::AmbiguousRealization { .. })
        ));
    }

    #[test]
    fn morph_round_trip() {
        let lex = load_lexicon(ENGLISH).unwrap();
        for rule in lex.morph_rules() {
            for analysis in lex.analyze(&rule.surface) {
                let back = lex
                    .realize(&analysis.template.lemma, &analysis.template.category, &analysis.features)
                    .unwrap();
                assert_eq!(back, rule.surface);
            }
        }
    }
}
