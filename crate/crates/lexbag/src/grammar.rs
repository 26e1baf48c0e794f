//! Per-language grammars: a small set of dependency rule schemata plus
//! linear-precedence constraints. The grammar only licenses links between
//! signs and orders words; everything about *what* combines lives in the
//! lexical items themselves.
//!
//! File format (UTF-8, line oriented, `#` comments):
//!
//! ```text
//! cat iv : self subj | self subj prt
//! root iv | tv
//! option pro-drop
//! schema vmod: iv/2.self = adv.anchor    # arity qualifier optional
//! lp: subj < head
//! lp: obj < pmod                         # between co-dependents
//! decorate: insert las before n role obj|comp node num=pl
//! ```
//!
//! See `docs/formats.md` for the full grammar of the format.

use thiserror::Error;

use crate::lexicon::strip_comment;
use crate::sign::{features_subsume, CategorySet, Features, NodeId, Role, Sign};

/// One side of a schema: category (optionally pinned to one arity) and a
/// role within its signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaSide {
    pub cat: String,
    pub arity: Option<usize>,
    pub role: Role,
}

impl SchemaSide {
    fn matches_cat(&self, cat: &crate::sign::Category) -> bool {
        cat.tag == self.cat
            && self.arity.map_or(true, |a| cat.arity() == a)
            && cat.has_role(&self.role)
    }
}

/// A dependency rule schema. Its name labels every link it licenses and is
/// what LP constraints and decorations refer to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    pub name: String,
    pub head: SchemaSide,
    pub dep: SchemaSide,
}

/// A licensed combination between a concrete head and dependent sign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkType {
    pub label: String,
    pub head_role: Role,
    pub dep_role: Role,
}

/// One established dependency link inside a parse or a generated tree.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DepLink {
    pub head: NodeId,
    pub label: String,
    pub head_role: Role,
    pub dep: NodeId,
    pub dep_role: Role,
}

/// A selector in an LP constraint: either the head of a link or a
/// dependent attached under some link label (optionally category
/// qualified).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpTerm {
    Head,
    Dep { cat: Option<String>, label: String },
}

/// `before < after`, scoped either between a head and its dependent or
/// between co-dependents of the same head.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpConstraint {
    pub before: LpTerm,
    pub after: LpTerm,
}

/// Where a decoration inserts its word relative to the matched sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecorationSlot {
    Before,
    After,
}

/// A language-specific output rule inserting a function word (with no sign
/// of its own) next to matching signs after ordering. The node-feature
/// condition consults the target bag's per-node features, so transferred
/// material and entry-internal fixed forms are distinguishable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoration {
    pub word: String,
    pub slot: DecorationSlot,
    pub cat: String,
    /// Incoming-link labels the sign must be attached under; empty = any.
    pub roles: Vec<String>,
    /// Features the sign's node must carry (from the bag's node map).
    pub node_features: Features,
}

impl Decoration {
    pub fn applies(&self, sign: &Sign, incoming_label: Option<&str>, node_features: &Features) -> bool {
        if sign.category.tag != self.cat {
            return false;
        }
        if !self.roles.is_empty() {
            match incoming_label {
                Some(l) if self.roles.iter().any(|r| r == l) => {}
                _ => return false,
            }
        }
        features_subsume(&self.node_features, node_features)
    }
}

/// An immutable grammar: declared categories, schemata, LP constraints,
/// decorations, permitted root categories and the pro-drop option.
#[derive(Clone, Debug, Default)]
pub struct Grammar {
    pub cats: CategorySet,
    pub schemata: Vec<Schema>,
    pub lp: Vec<LpConstraint>,
    pub decorations: Vec<Decoration>,
    /// Category tags permitted at the root; empty = any declared category.
    pub roots: Vec<String>,
    /// When set, unlinked `subj` slots are tolerated in complete analyses
    /// and generation (the subject is carried by verb agreement only).
    pub pro_drop: bool,
}

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: unknown category or role `{what}`")]
    UnknownCategoryOrRole { line: usize, what: String },
    #[error("grammar declares no schemata")]
    NoSchemata,
}

fn parse_err(line: usize, reason: impl Into<String>) -> GrammarError {
    GrammarError::Parse { line, reason: reason.into() }
}

fn parse_schema_side(text: &str, cats: &CategorySet, line: usize) -> Result<SchemaSide, GrammarError> {
    let (catspec, role) = text
        .split_once('.')
        .ok_or_else(|| parse_err(line, format!("malformed schema side `{}` (expected CAT.role)", text)))?;
    let (cat, arity) = match catspec.split_once('/') {
        Some((c, a)) => {
            let arity: usize = a
                .parse()
                .map_err(|_| parse_err(line, format!("bad arity `{}`", a)))?;
            (c.trim(), Some(arity))
        }
        None => (catspec.trim(), None),
    };
    let role = role.trim();
    if !cats.contains(cat) {
        return Err(GrammarError::UnknownCategoryOrRole { line, what: cat.to_string() });
    }
    let role_ok = match arity {
        Some(a) => cats
            .signatures(cat)
            .unwrap()
            .iter()
            .any(|s| s.len() == a && s.iter().any(|r| r == role)),
        None => cats.has_role(cat, role),
    };
    if !role_ok {
        return Err(GrammarError::UnknownCategoryOrRole { line, what: format!("{}.{}", cat, role) });
    }
    Ok(SchemaSide { cat: cat.to_string(), arity, role: role.to_string() })
}

fn parse_lp_term(text: &str, line: usize) -> Result<LpTerm, GrammarError> {
    let text = text.trim();
    if text == "head" {
        return Ok(LpTerm::Head);
    }
    match text.split_once('.') {
        Some((cat, label)) => Ok(LpTerm::Dep { cat: Some(cat.trim().to_string()), label: label.trim().to_string() }),
        None => {
            if text.is_empty() {
                Err(parse_err(line, "empty LP selector"))
            } else {
                Ok(LpTerm::Dep { cat: None, label: text.to_string() })
            }
        }
    }
}

/// Loads a grammar from its textual format. A grammar without schemata is
/// rejected: it could only ever analyze single-word sentences.
pub fn load_grammar(text: &str) -> Result<Grammar, GrammarError> {
    let mut g = Grammar::default();

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
                let mut sigs = Vec::new();
                for alt in sig_text.split('|') {
                    let roles: Vec<Role> = alt.split_whitespace().map(|r| r.to_string()).collect();
                    if roles.is_empty() {
                        return Err(parse_err(line, "empty role signature"));
                    }
                    sigs.push(roles);
                }
                g.cats.declare(tag, sigs).map_err(|e| parse_err(line, e.to_string()))?;
            }
            "root" => {
                for tag in rest.split(|c: char| c == '|' || c.is_whitespace()) {
                    let tag = tag.trim();
                    if tag.is_empty() {
                        continue;
                    }
                    if !g.cats.contains(tag) {
                        return Err(GrammarError::UnknownCategoryOrRole { line, what: tag.to_string() });
                    }
                    g.roots.push(tag.to_string());
                }
            }
            "option" => match rest {
                "pro-drop" => g.pro_drop = true,
                other => return Err(parse_err(line, format!("unknown option `{}`", other))),
            },
            "schema" => {
                let (name, body) = rest
                    .split_once(':')
                    .ok_or_else(|| parse_err(line, "expected `schema NAME: CAT.role = CAT.role`"))?;
                let name = name.trim();
                if name.is_empty() || name == "head" {
                    return Err(parse_err(line, "schema name must be non-empty and not `head`"));
                }
                let (head, dep) = body
                    .split_once('=')
                    .ok_or_else(|| parse_err(line, "expected `CAT.role = CAT.role`"))?;
                g.schemata.push(Schema {
                    name: name.to_string(),
                    head: parse_schema_side(head.trim(), &g.cats, line)?,
                    dep: parse_schema_side(dep.trim(), &g.cats, line)?,
                });
            }
            "lp" | "lp:" => {
                let body = rest.trim_start_matches(':').trim();
                let (before, after) = body
                    .split_once('<')
                    .ok_or_else(|| parse_err(line, "expected `lp: SELECTOR < SELECTOR`"))?;
                let before = parse_lp_term(before, line)?;
                let after = parse_lp_term(after, line)?;
                if before == LpTerm::Head && after == LpTerm::Head {
                    return Err(parse_err(line, "`head < head` is not a constraint"));
                }
                g.lp.push(LpConstraint { before, after });
            }
            "decorate" | "decorate:" => {
                let body = rest.trim_start_matches(':').trim();
                g.decorations.push(parse_decoration(body, &g.cats, line)?);
            }
            other => return Err(parse_err(line, format!("unknown directive `{}`", other))),
        }
    }

    if g.schemata.is_empty() {
        return Err(GrammarError::NoSchemata);
    }
    Ok(g)
}

fn parse_decoration(body: &str, cats: &CategorySet, line: usize) -> Result<Decoration, GrammarError> {
    let mut words = body.split_whitespace().peekable();
    if words.next() != Some("insert") {
        return Err(parse_err(line, "expected `insert WORD before|after CAT [role L|L] [node k=v ...]`"));
    }
    let word = words
        .next()
        .ok_or_else(|| parse_err(line, "decoration needs a word to insert"))?;
    let slot = match words.next() {
        Some("before") => DecorationSlot::Before,
        Some("after") => DecorationSlot::After,
        _ => return Err(parse_err(line, "expected `before` or `after`")),
    };
    let cat = words
        .next()
        .ok_or_else(|| parse_err(line, "decoration needs a category"))?;
    if !cats.contains(cat) {
        return Err(GrammarError::UnknownCategoryOrRole { line, what: cat.to_string() });
    }
    let mut roles = Vec::new();
    let mut node_features = Features::new();
    while let Some(kw) = words.next() {
        match kw {
            "role" => {
                let spec = words
                    .next()
                    .ok_or_else(|| parse_err(line, "`role` needs labels"))?;
                roles.extend(spec.split('|').map(|s| s.trim().to_string()));
            }
            "node" => {
                for spec in words.by_ref() {
                    let (k, v) = spec
                        .split_once('=')
                        .ok_or_else(|| parse_err(line, format!("malformed node feature `{}`", spec)))?;
                    node_features.insert(k.to_string(), v.to_string());
                }
            }
            other => return Err(parse_err(line, format!("unknown decoration clause `{}`", other))),
        }
    }
    Ok(Decoration { word: word.to_string(), slot, cat: cat.to_string(), roles, node_features })
}

impl Grammar {
    /// Every (head-role, dep-role) pair some schema licenses between these
    /// two concrete signs. Not symmetric: head and dependent positions
    /// matter.
    pub fn licensed_links(&self, head: &Sign, dep: &Sign) -> Vec<LinkType> {
        self.licensed_links_cats(&head.category, &dep.category)
    }

    /// Same licensing check on bare categories; combination only ever
    /// depends on category tags, arities and roles.
    pub fn licensed_links_cats(&self, head: &crate::sign::Category, dep: &crate::sign::Category) -> Vec<LinkType> {
        self.schemata
            .iter()
            .filter(|s| s.head.matches_cat(head) && s.dep.matches_cat(dep))
            .map(|s| LinkType {
                label: s.name.clone(),
                head_role: s.head.role.clone(),
                dep_role: s.dep.role.clone(),
            })
            .collect()
    }

    /// True iff `tag` may head a complete analysis.
    pub fn is_root_category(&self, tag: &str) -> bool {
        self.roots.is_empty() || self.roots.iter().any(|r| r == tag)
    }

    /// Checks every LP constraint against a concrete order. `order` lists
    /// the overt signs left to right (by category); links mentioning nodes
    /// without an overt position are skipped.
    pub fn lp_satisfied(&self, order: &[(NodeId, &crate::sign::Category)], links: &[DepLink]) -> bool {
        let pos = |node: NodeId| order.iter().position(|(n, _)| *n == node);
        let cat_of = |node: NodeId| order.iter().find(|(n, _)| *n == node).map(|(_, c)| *c);
        let term_matches = |term: &LpTerm, link: &DepLink| -> bool {
            match term {
                LpTerm::Head => false,
                LpTerm::Dep { cat, label } => {
                    if label != &link.label {
                        return false;
                    }
                    match cat {
                        None => true,
                        Some(c) => cat_of(link.dep).map_or(false, |k| &k.tag == c),
                    }
                }
            }
        };

        for c in &self.lp {
            match (&c.before, &c.after) {
                (LpTerm::Head, dep_term) => {
                    for link in links.iter().filter(|l| term_matches(dep_term, l)) {
                        if let (Some(h), Some(d)) = (pos(link.head), pos(link.dep)) {
                            if h >= d {
                                return false;
                            }
                        }
                    }
                }
                (dep_term, LpTerm::Head) => {
                    for link in links.iter().filter(|l| term_matches(dep_term, l)) {
                        if let (Some(h), Some(d)) = (pos(link.head), pos(link.dep)) {
                            if d >= h {
                                return false;
                            }
                        }
                    }
                }
                (before, after) => {
                    // co-dependents of the same head
                    for l1 in links.iter().filter(|l| term_matches(before, l)) {
                        for l2 in links.iter().filter(|l| l.head == l1.head && term_matches(after, l)) {
                            if l1 == l2 {
                                continue;
                            }
                            if let (Some(p1), Some(p2)) = (pos(l1.dep), pos(l2.dep)) {
                                if p1 >= p2 {
                                    return false;
                                }
                            }
                        }
                    }
                }
            }
        }
        true
    }
}

/// True iff every subtree's overt yield is contiguous in `order`.
/// Projectivity is a global well-formedness condition on analyses and
/// generated orders alike.
pub fn projective(order: &[NodeId], links: &[DepLink]) -> bool {
    let pos = |node: NodeId| order.iter().position(|n| *n == node);
    for root in order {
        // collect the yield of the subtree rooted here
        let mut stack = vec![*root];
        let mut positions = Vec::new();
        while let Some(n) = stack.pop() {
            if let Some(p) = pos(n) {
                positions.push(p);
            }
            for l in links.iter().filter(|l| l.head == n) {
                stack.push(l.dep);
            }
        }
        if positions.is_empty() {
            continue;
        }
        let min = *positions.iter().min().unwrap();
        let max = *positions.iter().max().unwrap();
        if max - min + 1 != positions.len() {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sign::{Category, Features, Index, NodeId, Sign};

    const DESK: &str = "\
cat iv : self subj | self subj prt
cat tv : self subj obj
cat n : self
cat pron : self
cat adv : anchor
cat p : anchor comp

root iv | tv | n

schema subj: iv.subj = pron.self
schema subj: tv.subj = pron.self
schema obj: tv.obj = n.self
schema prt: iv/3.prt = adv.anchor
schema vmod: iv/2.self = adv.anchor
schema pmod: iv.self = p.anchor
schema pmod: tv.self = p.anchor
schema nmod: n.self = p.anchor
schema comp: p.comp = n.self

lp: subj < head
lp: head < obj
lp: head < prt
lp: head < vmod
lp: head < pmod
lp: head < nmod
lp: head < comp
lp: obj < pmod
";

    fn template(lemma: &str, tag: &str, roles: &[&str]) -> Sign {
        let cat = Category::new(tag, roles.iter().map(|r| r.to_string()).collect());
        let vars = crate::lexicon::var_names(roles.len());
        Sign::new(lemma, cat, vars.into_iter().map(Index::Var).collect(), Features::new())
    }

    #[test]
    fn schema_declaration_parses() {
        let g = load_grammar("cat v : self subj obj\ncat n : self\nschema head-arg: v.obj = n.self\n").unwrap();
        assert_eq!(g.schemata.len(), 1);
        assert_eq!(g.schemata[0].name, "head-arg");
        assert_eq!(g.schemata[0].head.role, "obj");
        assert_eq!(g.schemata[0].dep.role, "self");
    }

    #[test]
    fn empty_stream_has_no_schemata() {
        assert!(matches!(load_grammar(""), Err(GrammarError::NoSchemata)));
    }

    #[test]
    fn unknown_category_or_role_is_rejected() {
        let err = load_grammar("cat n : self\nschema x: n.self = q.self\n").unwrap_err();
        assert!(matches!(err, GrammarError::UnknownCategoryOrRole { .. }));
        let err = load_grammar("cat n : self\nschema x: n.anchor = n.self\n").unwrap_err();
        assert!(matches!(err, GrammarError::UnknownCategoryOrRole { .. }));
    }

    #[test]
    fn licensed_links_particle_only_for_three_slot_verb() {
        let g = load_grammar(DESK).unwrap();
        let cut3 = template("cut", "iv", &["self", "subj", "prt"]);
        let cut2 = template("cut", "iv", &["self", "subj"]);
        let back = template("back", "adv", &["anchor"]);
        let on = template("on", "p", &["anchor", "comp"]);

        let links3: Vec<(String, String)> = g
            .licensed_links(&cut3, &back)
            .into_iter()
            .map(|l| (l.head_role, l.dep_role))
            .collect();
        assert_eq!(links3, vec![("prt".to_string(), "anchor".to_string())]);

        let links2: Vec<(String, String)> = g
            .licensed_links(&cut2, &on)
            .into_iter()
            .map(|l| (l.head_role, l.dep_role))
            .collect();
        assert_eq!(links2, vec![("self".to_string(), "anchor".to_string())]);

        let inv = template("investment", "n", &["self"]);
        assert!(g.licensed_links(&inv, &inv).is_empty());
    }

    #[test]
    fn licensed_links_is_direction_sensitive() {
        let g = load_grammar(DESK).unwrap();
        let cut = template("cut", "tv", &["self", "subj", "obj"]);
        let they = template("they", "pron", &["self"]);
        assert!(!g.licensed_links(&cut, &they).is_empty());
        assert!(g.licensed_links(&they, &cut).is_empty());
    }

    #[test]
    fn lp_head_dep_and_codep() {
        let g = load_grammar(DESK).unwrap();
        let verb = template("cut", "tv", &["self", "subj", "obj"]);
        let noun = template("back", "n", &["self"]);
        let pron = template("they", "pron", &["self"]);
        let order_ok = [
            (NodeId(1), &pron.category),
            (NodeId(2), &verb.category),
            (NodeId(3), &noun.category),
        ];
        let links = vec![
            DepLink { head: NodeId(2), label: "subj".into(), head_role: "subj".into(), dep: NodeId(1), dep_role: "self".into() },
            DepLink { head: NodeId(2), label: "obj".into(), head_role: "obj".into(), dep: NodeId(3), dep_role: "self".into() },
        ];
        assert!(g.lp_satisfied(&order_ok, &links));
        let order_bad = [
            (NodeId(2), &verb.category),
            (NodeId(1), &pron.category),
            (NodeId(3), &noun.category),
        ];
        assert!(!g.lp_satisfied(&order_bad, &links));
    }

    #[test]
    fn projectivity_detects_discontinuous_subtrees() {
        // subtree {3,1} with 2 in between is discontinuous
        let links = vec![
            DepLink { head: NodeId(3), label: "x".into(), head_role: "self".into(), dep: NodeId(1), dep_role: "self".into() },
        ];
        assert!(!projective(&[NodeId(1), NodeId(2), NodeId(3)], &links));
        assert!(projective(&[NodeId(2), NodeId(1), NodeId(3)], &links));
    }

    #[test]
    fn decoration_parsing_and_matching() {
        let text = "cat n : self\ncat v : self subj obj\nschema obj: v.obj = n.self\ndecorate: insert las before n role obj|comp node num=pl\n";
        let g = load_grammar(text).unwrap();
        assert_eq!(g.decorations.len(), 1);
        let d = &g.decorations[0];
        assert_eq!(d.word, "las");
        let noun = template("inversión", "n", &["self"]);
        let mut pl = Features::new();
        pl.insert("num".into(), "pl".into());
        assert!(d.applies(&noun, Some("obj"), &pl));
        assert!(!d.applies(&noun, Some("obj"), &Features::new()));
        assert!(!d.applies(&noun, None, &pl));
        assert!(!d.applies(&noun, Some("subj"), &pl));
    }
}
