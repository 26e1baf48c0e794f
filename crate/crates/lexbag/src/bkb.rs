//! The unified bilingual knowledge base: entry notation, the four-way
//! interpretation semantics (order × contiguity), the matcher, and
//! ingestion of word-dependency tree pairs.
//!
//! One notation serves every reading: with both constraints off an entry
//! side is a bag (lexical bags, dependency trees); order alone makes it a
//! template; order plus contiguity makes it a phrase-book segment. The
//! interpretation is chosen per run, not per entry, so the same knowledge
//! base can be reused under different readings.
//!
//! KB file format (UTF-8, line oriented, `#` comments):
//!
//! ```text
//! e: cut:iv[A,B,C] & back:adv[C] & on:p[A,D] <-> reducir:tv[A,B,D]
//! they: they:pron[A] <-> @null{per=3,num=pl}[A]
//! ```
//!
//! See `docs/formats.md` for the full grammar of the format.

pub mod sato;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::lexicon::{parse_features_str, strip_comment, AnalyzedToken};
use crate::sign::{features_to_string, Binding, Features, IndexVar, NodeId, Sign};

/// One item of a bilingual entry side: a sign template whose indices are
/// all entry-local variables. Signatures are resolved against a lexicon
/// when the item is matched or instantiated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryItem {
    pub lemma: String,
    pub cat: String,
    pub vars: Vec<IndexVar>,
    pub features: Features,
}

impl EntryItem {
    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    fn render(&self) -> String {
        let vars: Vec<String> = self.vars.iter().map(|v| v.to_string()).collect();
        format!("{}:{}[{}]{}", self.lemma, self.cat, vars.join(","), features_to_string(&self.features))
    }
}

/// A bilingual entry: source side, target side, and feature constraints
/// carried by dropped words (`@null` items).
///
/// Variables shared between the two sides encode the cross-linguistic
/// correspondence; target-only variables become fresh nodes at transfer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilingualEntry {
    pub id: String,
    pub source: Vec<EntryItem>,
    pub target: Vec<EntryItem>,
    /// Features deposited on the node a variable is bound to, for entries
    /// whose target side is empty (e.g. a pro-dropped pronoun carrying its
    /// agreement onto the verb).
    pub target_features: BTreeMap<IndexVar, Features>,
}

impl BilingualEntry {
    pub fn source_vars(&self) -> BTreeSet<IndexVar> {
        self.source.iter().flat_map(|i| i.vars.iter().cloned()).collect()
    }

    pub fn target_vars(&self) -> BTreeSet<IndexVar> {
        self.target
            .iter()
            .flat_map(|i| i.vars.iter().cloned())
            .chain(self.target_features.keys().cloned())
            .collect()
    }

    /// Variables occurring on both sides (counting `@null` carriers).
    pub fn shared_vars(&self) -> BTreeSet<IndexVar> {
        self.source_vars().intersection(&self.target_vars()).cloned().collect()
    }

    /// Cardinality of the source side: the match length prioritization
    /// ranks by.
    pub fn source_cardinality(&self) -> usize {
        self.source.len()
    }
}

/// Interpretation of entry sides when matching input.
///
/// `contiguous` without `ordered` is not one of the four readings and is
/// rejected at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MatchSemantics {
    pub ordered: bool,
    pub contiguous: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("contiguity without order is not a supported interpretation")]
pub struct BadSemantics;

impl MatchSemantics {
    /// Bag reading: order and contiguity irrelevant.
    pub const BAG: MatchSemantics = MatchSemantics { ordered: false, contiguous: false };
    /// Template reading: ordered, gaps allowed.
    pub const SEQ: MatchSemantics = MatchSemantics { ordered: true, contiguous: false };
    /// Sentence/segment reading: ordered and contiguous.
    pub const SEQ_CONTIG: MatchSemantics = MatchSemantics { ordered: true, contiguous: true };

    pub fn new(ordered: bool, contiguous: bool) -> Result<Self, BadSemantics> {
        if contiguous && !ordered {
            return Err(BadSemantics);
        }
        Ok(MatchSemantics { ordered, contiguous })
    }
}

/// Which side of an entry a match instantiated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Source,
    Target,
}

/// An entry instantiated against concrete input: an injective assignment
/// of entry items to token positions plus the variable binding it
/// induces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Match {
    pub entry_id: String,
    pub entry_index: usize,
    pub side: Side,
    /// Token position per entry item, in item order.
    pub assignment: Vec<NodeId>,
    pub binding: Binding,
}

impl Match {
    pub fn leftmost(&self) -> NodeId {
        self.assignment.iter().copied().min().unwrap_or(NodeId(0))
    }

    pub fn positions(&self) -> BTreeSet<NodeId> {
        self.assignment.iter().copied().collect()
    }
}

/// A loaded knowledge base: entries in declaration order plus non-fatal
/// findings from the load.
#[derive(Clone, Debug, Default)]
pub struct Bkb {
    pub entries: Vec<BilingualEntry>,
    pub warnings: Vec<BkbWarning>,
}

impl Bkb {
    pub fn entry(&self, id: &str) -> Option<(usize, &BilingualEntry)> {
        self.entries.iter().enumerate().find(|(_, e)| e.id == id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BkbWarning {
    /// Target-only variables are legal (they become fresh indices) but
    /// worth reporting.
    UnsharedTargetVar { entry: String, vars: Vec<IndexVar> },
}

impl std::fmt::Display for BkbWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BkbWarning::UnsharedTargetVar { entry, vars } => {
                let names: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
                write!(f, "entry `{}`: target-only variable(s) {} become fresh nodes", entry, names.join(","))
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum BkbError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: entry `{entry}` has an empty source side")]
    EmptySourceSide { line: usize, entry: String },
    #[error("line {line}: duplicate entry id `{entry}`")]
    DuplicateId { line: usize, entry: String },
}

fn parse_err(line: usize, reason: impl Into<String>) -> BkbError {
    BkbError::Parse { line, reason: reason.into() }
}

fn valid_var(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_uppercase() => chars.all(|c| c.is_ascii_uppercase() || c.is_ascii_digit()),
        _ => false,
    }
}

fn parse_item(text: &str, line: usize) -> Result<EntryItem, BkbError> {
    let text = text.trim();
    let (lemma, rest) = text
        .split_once(':')
        .ok_or_else(|| parse_err(line, format!("malformed item `{}` (expected lemma:cat[vars])", text)))?;
    let open = rest
        .find('[')
        .ok_or_else(|| parse_err(line, format!("item `{}` has no variable list", text)))?;
    let close = rest
        .find(']')
        .ok_or_else(|| parse_err(line, format!("item `{}` has an unterminated variable list", text)))?;
    let cat = rest[..open].trim();
    if lemma.trim().is_empty() || cat.is_empty() {
        return Err(parse_err(line, format!("item `{}` needs a lemma and a category", text)));
    }
    let mut vars = Vec::new();
    for v in rest[open + 1..close].split(',') {
        let v = v.trim();
        if v.is_empty() {
            continue;
        }
        if !valid_var(v) {
            return Err(parse_err(line, format!("variable `{}` must be uppercase", v)));
        }
        vars.push(IndexVar::new(v));
    }
    if vars.is_empty() {
        return Err(parse_err(line, format!("item `{}` has no variables", text)));
    }
    let features = parse_features_str(rest[close + 1..].trim()).map_err(|r| parse_err(line, r))?;
    Ok(EntryItem { lemma: lemma.trim().to_string(), cat: cat.to_string(), vars, features })
}

/// Parses a `@null{feats}[V]` dropped-word carrier.
fn parse_null_item(text: &str, line: usize) -> Result<(IndexVar, Features), BkbError> {
    let body = text.trim().strip_prefix("@null").expect("caller checked prefix");
    let open = body
        .find('[')
        .ok_or_else(|| parse_err(line, "`@null` needs a carrier variable, e.g. @null{per=3}[A]"))?;
    let close = body
        .find(']')
        .ok_or_else(|| parse_err(line, "`@null` has an unterminated variable"))?;
    let features = parse_features_str(body[..open].trim()).map_err(|r| parse_err(line, r))?;
    let var = body[open + 1..close].trim();
    if !valid_var(var) {
        return Err(parse_err(line, format!("variable `{}` must be uppercase", var)));
    }
    Ok((IndexVar::new(var), features))
}

/// Parses a knowledge base from its textual format. Entries stay in
/// declaration order; variable scope is entry-local.
pub fn parse_bkb(text: &str) -> Result<Bkb, BkbError> {
    let mut kb = Bkb::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let body = strip_comment(raw);
        if body.is_empty() {
            continue;
        }
        let (id, rest) = body
            .split_once(':')
            .ok_or_else(|| parse_err(line, "expected `ID: ITEMS <-> ITEMS`"))?;
        let id = id.trim();
        if id.is_empty() {
            return Err(parse_err(line, "empty entry id"));
        }
        if id.contains('[') {
            return Err(parse_err(
                line,
                "per-entry semantics overrides (`ID[...]:`) are reserved and not implemented",
            ));
        }
        if kb.entries.iter().any(|e| e.id == id) {
            return Err(BkbError::DuplicateId { line, entry: id.to_string() });
        }
        let (src_text, tgt_text) = rest
            .split_once("<->")
            .ok_or_else(|| parse_err(line, "expected `<->` between entry sides"))?;

        let mut source = Vec::new();
        for piece in src_text.split('&') {
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            source.push(parse_item(piece, line)?);
        }
        if source.is_empty() {
            return Err(BkbError::EmptySourceSide { line, entry: id.to_string() });
        }

        let mut target = Vec::new();
        let mut target_features: BTreeMap<IndexVar, Features> = BTreeMap::new();
        for piece in tgt_text.split('&') {
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            if piece.starts_with("@null") {
                let (var, feats) = parse_null_item(piece, line)?;
                target_features.insert(var, feats);
            } else {
                target.push(parse_item(piece, line)?);
            }
        }
        if !target_features.is_empty() && !target.is_empty() {
            return Err(parse_err(line, "`@null` carriers must be the sole target items"));
        }

        let entry = BilingualEntry { id: id.to_string(), source, target, target_features };
        let unshared: Vec<IndexVar> = entry
            .target_vars()
            .difference(&entry.source_vars())
            .cloned()
            .collect();
        if !unshared.is_empty() {
            kb.warnings.push(BkbWarning::UnsharedTargetVar { entry: entry.id.clone(), vars: unshared });
        }
        kb.entries.push(entry);
    }
    Ok(kb)
}

/// Canonical serialization: single spaces, declaration order. Parsing the
/// output reproduces the entry list exactly.
pub fn serialize_entries(entries: &[BilingualEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let src: Vec<String> = e.source.iter().map(EntryItem::render).collect();
        let mut tgt: Vec<String> = e.target.iter().map(EntryItem::render).collect();
        for (var, feats) in &e.target_features {
            tgt.push(format!("@null{}[{}]", features_to_string(feats), var));
        }
        out.push_str(&format!("{}: {} <-> {}\n", e.id, src.join(" & "), tgt.join(" & ")));
    }
    out
}

/// Renames an entry's variables to A, B, C, ... in first-occurrence order
/// (source side first, then target side). Two entries equal modulo
/// variable naming canonicalize identically.
pub fn alpha_rename(entry: &BilingualEntry) -> BilingualEntry {
    let mut mapping: BTreeMap<IndexVar, IndexVar> = BTreeMap::new();
    let mut order: Vec<IndexVar> = Vec::new();
    let note = |v: &IndexVar, order: &mut Vec<IndexVar>| {
        if !order.contains(v) {
            order.push(v.clone());
        }
    };
    for item in entry.source.iter().chain(entry.target.iter()) {
        for v in &item.vars {
            note(v, &mut order);
        }
    }
    for v in entry.target_features.keys() {
        note(v, &mut order);
    }
    for (i, v) in order.iter().enumerate() {
        mapping.insert(v.clone(), crate::lexicon::var_names(i + 1).pop().unwrap());
    }
    let rename_item = |item: &EntryItem| EntryItem {
        lemma: item.lemma.clone(),
        cat: item.cat.clone(),
        vars: item.vars.iter().map(|v| mapping[v].clone()).collect(),
        features: item.features.clone(),
    };
    BilingualEntry {
        id: entry.id.clone(),
        source: entry.source.iter().map(rename_item).collect(),
        target: entry.target.iter().map(rename_item).collect(),
        target_features: entry
            .target_features
            .iter()
            .map(|(v, f)| (mapping[v].clone(), f.clone()))
            .collect(),
    }
}

/// A slot an entry item can be matched against: a token position carrying
/// either analysis templates (pre-parse lookup) or one instantiated sign
/// (cover search).
enum MatchTarget<'a> {
    Token(&'a AnalyzedToken),
    Sign(NodeId, &'a Sign),
}

impl<'a> MatchTarget<'a> {
    fn position(&self) -> NodeId {
        match self {
            MatchTarget::Token(t) => t.node,
            MatchTarget::Sign(n, _) => *n,
        }
    }

    /// Extends `binding` with everything matching `item` here implies, or
    /// fails. Token targets bind only variables sitting in `self` slots
    /// (the canonical skeleton); instantiated signs bind every slot.
    fn unify_item(&self, item: &EntryItem, binding: &Binding) -> Option<Binding> {
        match self {
            MatchTarget::Token(tok) => {
                let analysis = tok.analyses.iter().find(|a| {
                    a.template.lemma == item.lemma
                        && a.template.category.tag == item.cat
                        && a.template.category.arity() == item.arity()
                })?;
                let mut b = binding.clone();
                for (slot, role) in analysis.template.category.roles.iter().enumerate() {
                    if role == crate::sign::SELF_ROLE {
                        b = b.unify(&item.vars[slot], tok.node).ok()?;
                    }
                }
                Some(b)
            }
            MatchTarget::Sign(_, sign) => {
                if sign.lemma != item.lemma
                    || sign.category.tag != item.cat
                    || sign.category.arity() != item.arity()
                {
                    return None;
                }
                let mut b = binding.clone();
                for (slot, index) in sign.indices.iter().enumerate() {
                    match index {
                        crate::sign::Index::Node(n) => b = b.unify(&item.vars[slot], *n).ok()?,
                        crate::sign::Index::Var(_) => return None,
                    }
                }
                Some(b)
            }
        }
    }
}

fn match_items(
    entry: &BilingualEntry,
    entry_index: usize,
    targets: &[MatchTarget<'_>],
    sem: MatchSemantics,
) -> Vec<Match> {
    let mut out: Vec<Match> = Vec::new();
    let mut assignment: Vec<usize> = Vec::new();

    fn recurse(
        items: &[EntryItem],
        targets: &[MatchTarget<'_>],
        sem: MatchSemantics,
        binding: &Binding,
        assignment: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, Binding)>,
    ) {
        let item_idx = assignment.len();
        if item_idx == items.len() {
            out.push((assignment.clone(), binding.clone()));
            return;
        }
        for (t_idx, target) in targets.iter().enumerate() {
            if assignment.contains(&t_idx) {
                continue;
            }
            if sem.ordered {
                if let Some(&prev) = assignment.last() {
                    if sem.contiguous {
                        if t_idx != prev + 1 {
                            continue;
                        }
                    } else if t_idx <= prev {
                        continue;
                    }
                }
            }
            if let Some(extended) = target.unify_item(&items[item_idx], binding) {
                assignment.push(t_idx);
                recurse(items, targets, sem, &extended, assignment, out);
                assignment.pop();
            }
        }
    }

    let mut raw: Vec<(Vec<usize>, Binding)> = Vec::new();
    recurse(&entry.source, targets, sem, &Binding::new(), &mut assignment, &mut raw);

    let mut seen: BTreeSet<Vec<NodeId>> = BTreeSet::new();
    for (indices, binding) in raw {
        let nodes: Vec<NodeId> = indices.iter().map(|&i| targets[i].position()).collect();
        if seen.insert(nodes.clone()) {
            out.push(Match {
                entry_id: entry.id.clone(),
                entry_index,
                side: Side::Source,
                assignment: nodes,
                binding,
            });
        }
    }
    out
}

/// All matches of one entry's source side against an analyzed token
/// sequence, under the given semantics. Every returned assignment is
/// injective; duplicates are never returned.
pub fn match_entry(entry: &BilingualEntry, tokens: &[AnalyzedToken], sem: MatchSemantics) -> Vec<Match> {
    match_entry_indexed(entry, 0, tokens, sem)
}

pub(crate) fn match_entry_indexed(
    entry: &BilingualEntry,
    entry_index: usize,
    tokens: &[AnalyzedToken],
    sem: MatchSemantics,
) -> Vec<Match> {
    let targets: Vec<MatchTarget<'_>> = tokens.iter().map(MatchTarget::Token).collect();
    match_items(entry, entry_index, &targets, sem)
}

/// All matches of one entry's source side against instantiated signs
/// (e.g. a parse's bag). Variable bindings must unify with the signs'
/// actual node indices, which is what keeps covers consistent with the
/// parse's dependency structure.
pub fn match_entry_signs(
    entry: &BilingualEntry,
    entry_index: usize,
    items: &[(NodeId, Sign)],
    sem: MatchSemantics,
) -> Vec<Match> {
    let targets: Vec<MatchTarget<'_>> = items.iter().map(|(n, s)| MatchTarget::Sign(*n, s)).collect();
    match_items(entry, entry_index, &targets, sem)
}

/// Bilingual lookup over the whole KB: concatenation of `match_entry`
/// over all entries, KB order then position order.
pub fn lookup_all(tokens: &[AnalyzedToken], kb: &Bkb, sem: MatchSemantics) -> Vec<Match> {
    let mut out = Vec::new();
    for (i, entry) in kb.entries.iter().enumerate() {
        out.extend(match_entry_indexed(entry, i, tokens, sem));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{analyze_tokens, load_lexicon};

    const ENGLISH: &str = "\
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

    const KB: &str = "\
a: back:adv[A] <-> atrás:adv[A]
b: back:n[A] <-> espalda:n[A]
c: cut:iv[A,B] <-> cortar:iv[A,B]
d: cut:iv[A,B,C] & back:adv[C] <-> hacer:tv[A,B,D] & economía:n[D]{num=pl}
e: cut:iv[A,B,C] & back:adv[C] & on:p[A,D] <-> reducir:tv[A,B,D]
f: cut:tv[A,B,C] <-> cortar:tv[A,B,C]
g: investment:n[A] <-> inversión:n[A]
h: on:p[A,B] <-> en:p[A,B]
they: they:pron[A] <-> @null{per=3,num=pl}[A]
";

    fn tokens() -> Vec<AnalyzedToken> {
        let lex = load_lexicon(ENGLISH).unwrap();
        let toks: Vec<String> = "they cut back on investments".split(' ').map(String::from).collect();
        analyze_tokens(&lex, &toks)
    }

    #[test]
    fn parses_paper_kb() {
        let kb = parse_bkb(KB).unwrap();
        assert_eq!(kb.entries.len(), 9);
        let (_, e) = kb.entry("e").unwrap();
        let shared: Vec<String> = e.shared_vars().iter().map(|v| v.to_string()).collect();
        assert_eq!(shared, vec!["A", "B", "D"]);
        // d's target-only var is reported fresh
        assert!(kb
            .warnings
            .iter()
            .any(|w| matches!(w, BkbWarning::UnsharedTargetVar { entry, .. } if entry == "d")));
        // the pro-drop entry carries its agreement on the shared variable
        let (_, they) = kb.entry("they").unwrap();
        assert!(they.target.is_empty());
        assert_eq!(
            they.target_features.get(&IndexVar::new("A")).and_then(|f| f.get("per")).map(String::as_str),
            Some("3")
        );
    }

    #[test]
    fn empty_source_side_is_an_error() {
        let err = parse_bkb("x: <-> foo:n[A]\n").unwrap_err();
        assert!(matches!(err, BkbError::EmptySourceSide { .. }));
    }

    #[test]
    fn per_entry_override_is_reserved() {
        let err = parse_bkb("x[sem=seq]: a:n[A] <-> b:n[A]\n").unwrap_err();
        assert!(matches!(err, BkbError::Parse { .. }));
    }

    #[test]
    fn round_trip_is_identity() {
        let kb = parse_bkb(KB).unwrap();
        let text = serialize_entries(&kb.entries);
        let again = parse_bkb(&text).unwrap();
        assert_eq!(kb.entries, again.entries);
    }

    #[test]
    fn entry_e_matches_once_under_all_semantics() {
        let kb = parse_bkb(KB).unwrap();
        let (i, e) = kb.entry("e").unwrap();
        let toks = tokens();
        for sem in [MatchSemantics::BAG, MatchSemantics::SEQ, MatchSemantics::SEQ_CONTIG] {
            let ms = match_entry_indexed(e, i, &toks, sem);
            assert_eq!(ms.len(), 1, "sem={:?}", sem);
            assert_eq!(ms[0].assignment, vec![NodeId(2), NodeId(3), NodeId(4)]);
        }
    }

    #[test]
    fn contiguity_distinguishes_gappy_matches() {
        // cut ... back non-adjacent: ordered matches, contiguous does not
        let lex = load_lexicon(ENGLISH).unwrap();
        let toks: Vec<String> = "cut investments back".split(' ').map(String::from).collect();
        let analyzed = analyze_tokens(&lex, &toks);
        let kb = parse_bkb("d: cut:iv[A,B,C] & back:adv[C] <-> hacer:tv[A,B,D] & economía:n[D]\n").unwrap();
        // lemma économia is not in any lexicon here; matching only needs the source side
        let (i, d) = kb.entry("d").unwrap();
        assert_eq!(match_entry_indexed(d, i, &analyzed, MatchSemantics::SEQ).len(), 1);
        assert!(match_entry_indexed(d, i, &analyzed, MatchSemantics::SEQ_CONTIG).is_empty());
        assert_eq!(match_entry_indexed(d, i, &analyzed, MatchSemantics::BAG).len(), 1);
    }

    #[test]
    fn lookup_all_covers_the_full_kb() {
        let kb = parse_bkb(KB).unwrap();
        let matches = lookup_all(&tokens(), &kb, MatchSemantics::BAG);
        let ids: BTreeSet<&str> = matches.iter().map(|m| m.entry_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c", "d", "e", "f", "g", "h", "they"].into_iter().collect());
        // empty KB and no-overlap token lists yield nothing
        assert!(lookup_all(&tokens(), &Bkb::default(), MatchSemantics::BAG).is_empty());
    }

    #[test]
    fn semantics_are_validated() {
        assert!(MatchSemantics::new(false, true).is_err());
        assert!(MatchSemantics::new(true, true).is_ok());
    }

    #[test]
    fn alpha_renaming_is_canonical() {
        let a = parse_bkb("x: eat:v[P,Q,R] <-> taberu:v[P,S,T] & ha:p[S,Q] & wo:p[T,R]\n").unwrap();
        let b = parse_bkb("x: eat:v[A,B,C] <-> taberu:v[A,D,E] & ha:p[D,B] & wo:p[E,C]\n").unwrap();
        assert_eq!(alpha_rename(&a.entries[0]), alpha_rename(&b.entries[0]));
    }
}
