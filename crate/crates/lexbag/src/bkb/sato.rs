//! Ingestion of word-dependency tree pairs with correspondence links into
//! bilingual entries.
//!
//! A tree pair carries the same information as a set of entries: words,
//! categories, monolingual dependencies, and cross-linguistic links. Each
//! linked source node becomes one entry; unlinked target nodes (case
//! particles and the like) that sit on the path from a linked node's image
//! down to the images of its linked dependents join that entry's target
//! side, with variables encoding the tree edges.
//!
//! Fixture format (UTF-8, line oriented, `#` comments):
//!
//! ```text
//! tree src: e1 eat v (e2 he pron) (e3 vegetable n)
//! tree tgt: j1 taberu v (j2 ha p (j3 kare pron)) (j4 wo p (j5 yasai n))
//! clink e1 j1
//! clink e2 j3
//! clink e3 j5
//! ```

use std::collections::BTreeMap;

use thiserror::Error;

use crate::lexicon::strip_comment;
use crate::sign::{CategorySet, Features, IndexVar, SELF_ROLE};

use super::{alpha_rename, BilingualEntry, EntryItem};

/// One node of a word-dependency tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub id: String,
    pub lemma: String,
    pub cat: String,
    pub children: Vec<TreeNode>,
}

/// A pair of rooted trees plus node-to-node correspondence links.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordDependencyTreePair {
    pub source: TreeNode,
    pub target: TreeNode,
    pub clinks: Vec<(String, String)>,
}

#[derive(Debug, Error)]
pub enum SatoError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("duplicate node id `{0}`")]
    DuplicateNodeId(String),
    #[error("correspondence link references unknown node `{0}`")]
    UnknownClinkNode(String),
    #[error("node `{0}` appears in more than one correspondence link")]
    NodeLinkedTwice(String),
    #[error("the two roots must be linked to each other")]
    RootsNotLinked,
    #[error("unlinked target node `{0}` attaches to no linked node's path")]
    OrphanTargetNode(String),
    #[error("node `{node}`: category `{cat}` has no signature for {children} child(ren)")]
    NoSignature { node: String, cat: String, children: usize },
    #[error("node `{node}`: unknown category `{cat}`")]
    UnknownCategory { node: String, cat: String },
    #[error("node `{node}`: category `{cat}` cannot attach as a modifier (no anchor role)")]
    BadModifier { node: String, cat: String },
}

fn parse_err(line: usize, reason: impl Into<String>) -> SatoError {
    SatoError::Parse { line, reason: reason.into() }
}

fn tokenize_tree(text: &str) -> Vec<String> {
    text.replace('(', " ( ")
        .replace(')', " ) ")
        .split_whitespace()
        .map(String::from)
        .collect()
}

fn parse_node(tokens: &[String], pos: &mut usize, line: usize) -> Result<TreeNode, SatoError> {
    let take = |pos: &mut usize| -> Option<String> {
        let t = tokens.get(*pos).cloned();
        if t.is_some() {
            *pos += 1;
        }
        t
    };
    let id = take(pos).ok_or_else(|| parse_err(line, "expected node id"))?;
    let lemma = take(pos).ok_or_else(|| parse_err(line, "expected node lemma"))?;
    let cat = take(pos).ok_or_else(|| parse_err(line, "expected node category"))?;
    if id == "(" || id == ")" || lemma == "(" || lemma == ")" || cat == "(" || cat == ")" {
        return Err(parse_err(line, "malformed tree node (expected `ID LEMMA CAT`)"));
    }
    let mut children = Vec::new();
    while tokens.get(*pos).map(String::as_str) == Some("(") {
        *pos += 1;
        children.push(parse_node(tokens, pos, line)?);
        if tokens.get(*pos).map(String::as_str) != Some(")") {
            return Err(parse_err(line, "unbalanced parenthesis in tree"));
        }
        *pos += 1;
    }
    Ok(TreeNode { id, lemma, cat, children })
}

/// Parses the plain-text tree-pair fixture format.
pub fn parse_sato(text: &str) -> Result<WordDependencyTreePair, SatoError> {
    let mut source: Option<TreeNode> = None;
    let mut target: Option<TreeNode> = None;
    let mut clinks: Vec<(String, String)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let body = strip_comment(raw);
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix("tree") {
            let (which, tree_text) = rest
                .trim()
                .split_once(':')
                .ok_or_else(|| parse_err(line, "expected `tree src: ...` or `tree tgt: ...`"))?;
            let tokens = tokenize_tree(tree_text);
            let mut pos = 0;
            let node = parse_node(&tokens, &mut pos, line)?;
            if pos != tokens.len() {
                return Err(parse_err(line, "trailing material after tree"));
            }
            match which.trim() {
                "src" => source = Some(node),
                "tgt" => target = Some(node),
                other => return Err(parse_err(line, format!("unknown tree label `{}`", other))),
            }
        } else if let Some(rest) = body.strip_prefix("clink") {
            let mut parts = rest.split_whitespace();
            let a = parts.next().ok_or_else(|| parse_err(line, "clink needs two node ids"))?;
            let b = parts.next().ok_or_else(|| parse_err(line, "clink needs two node ids"))?;
            if parts.next().is_some() {
                return Err(parse_err(line, "clink takes exactly two node ids"));
            }
            clinks.push((a.to_string(), b.to_string()));
        } else {
            return Err(parse_err(line, format!("unknown directive `{}`", body.split_whitespace().next().unwrap_or(""))));
        }
    }

    let source = source.ok_or_else(|| parse_err(0, "missing `tree src:` line"))?;
    let target = target.ok_or_else(|| parse_err(0, "missing `tree tgt:` line"))?;
    Ok(WordDependencyTreePair { source, target, clinks })
}

fn collect_nodes<'a>(node: &'a TreeNode, out: &mut Vec<&'a TreeNode>) {
    out.push(node);
    for c in &node.children {
        collect_nodes(c, out);
    }
}

fn subtree_contains_linked(node: &TreeNode, linked: &BTreeMap<String, String>) -> bool {
    linked.contains_key(&node.id) || node.children.iter().any(|c| subtree_contains_linked(c, linked))
}

/// Per-node sign construction context: every tree node gets a variable;
/// linked target nodes share their source partner's variable.
struct SignBuilder<'a> {
    cats: &'a CategorySet,
    vars: BTreeMap<String, IndexVar>,
}

impl<'a> SignBuilder<'a> {
    /// Builds the entry item for `node`. `attach_var` is set when the node
    /// attaches to its parent as a modifier rather than by filling a slot.
    fn item(&self, node: &TreeNode, attach_var: Option<&IndexVar>) -> Result<(EntryItem, usize), SatoError> {
        let sigs = self
            .cats
            .signatures(&node.cat)
            .ok_or_else(|| SatoError::UnknownCategory { node: node.id.clone(), cat: node.cat.clone() })?;
        // largest signature whose child slots fit the children present
        let arity = sigs
            .iter()
            .map(|s| s.len())
            .filter(|a| a.saturating_sub(1) <= node.children.len())
            .max()
            .ok_or_else(|| SatoError::NoSignature {
                node: node.id.clone(),
                cat: node.cat.clone(),
                children: node.children.len(),
            })?;
        let signature = sigs.iter().find(|s| s.len() == arity).unwrap();
        let slot_children = arity - 1;

        let own = self.vars[&node.id].clone();
        let mut child_vars = node.children[..slot_children]
            .iter()
            .map(|c| self.vars[&c.id].clone())
            .collect::<Vec<_>>()
            .into_iter();
        let mut vars = Vec::with_capacity(arity);
        for role in signature {
            if role == SELF_ROLE {
                vars.push(own.clone());
            } else if role == "anchor" {
                vars.push(attach_var.cloned().unwrap_or_else(|| own.clone()));
            } else {
                vars.push(child_vars.next().expect("slot arithmetic"));
            }
        }
        Ok((
            EntryItem { lemma: node.lemma.clone(), cat: node.cat.clone(), vars, features: Features::new() },
            slot_children,
        ))
    }

    /// Collects `node`'s item plus the items of all unlinked descendants
    /// reachable without crossing a linked node.
    fn closure(
        &self,
        node: &TreeNode,
        attach_var: Option<&IndexVar>,
        linked: &BTreeMap<String, String>,
        require_linked_below: bool,
        out: &mut Vec<EntryItem>,
    ) -> Result<(), SatoError> {
        let (item, slot_children) = self.item(node, attach_var)?;
        let own = self.vars[&node.id].clone();
        out.push(item);
        for (i, child) in node.children.iter().enumerate() {
            if linked.contains_key(&child.id) {
                continue; // the linked child's own entry picks it up there
            }
            if require_linked_below && !subtree_contains_linked(child, linked) {
                return Err(SatoError::OrphanTargetNode(child.id.clone()));
            }
            let is_modifier = i >= slot_children;
            if is_modifier && !self.cats.has_role(&child.cat, "anchor") {
                return Err(SatoError::BadModifier { node: child.id.clone(), cat: child.cat.clone() });
            }
            let attach = if is_modifier { Some(&own) } else { None };
            self.closure(child, attach, linked, require_linked_below, out)?;
        }
        Ok(())
    }
}

/// Converts a tree pair into bilingual entries, one per linked source
/// node, in source pre-order. Entry ids are the source lemmas (suffixed on
/// repetition); variables are alpha-renamed canonically per entry.
pub fn ingest_sato(
    pair: &WordDependencyTreePair,
    src_cats: &CategorySet,
    tgt_cats: &CategorySet,
) -> Result<Vec<BilingualEntry>, SatoError> {
    let mut src_nodes = Vec::new();
    collect_nodes(&pair.source, &mut src_nodes);
    let mut tgt_nodes = Vec::new();
    collect_nodes(&pair.target, &mut tgt_nodes);

    let mut all_ids: Vec<&str> = Vec::new();
    for n in src_nodes.iter().chain(tgt_nodes.iter()) {
        if all_ids.contains(&n.id.as_str()) {
            return Err(SatoError::DuplicateNodeId(n.id.clone()));
        }
        all_ids.push(&n.id);
    }

    let src_ids: Vec<&str> = src_nodes.iter().map(|n| n.id.as_str()).collect();
    let tgt_ids: Vec<&str> = tgt_nodes.iter().map(|n| n.id.as_str()).collect();
    let mut linked_src: BTreeMap<String, String> = BTreeMap::new();
    let mut linked_tgt: BTreeMap<String, String> = BTreeMap::new();
    for (s, t) in &pair.clinks {
        if !src_ids.contains(&s.as_str()) {
            return Err(SatoError::UnknownClinkNode(s.clone()));
        }
        if !tgt_ids.contains(&t.as_str()) {
            return Err(SatoError::UnknownClinkNode(t.clone()));
        }
        if linked_src.insert(s.clone(), t.clone()).is_some() {
            return Err(SatoError::NodeLinkedTwice(s.clone()));
        }
        if linked_tgt.insert(t.clone(), s.clone()).is_some() {
            return Err(SatoError::NodeLinkedTwice(t.clone()));
        }
    }
    if linked_src.get(&pair.source.id) != Some(&pair.target.id) {
        return Err(SatoError::RootsNotLinked);
    }

    // one variable per source node; linked target nodes share it
    let mut vars: BTreeMap<String, IndexVar> = BTreeMap::new();
    let mut counter = 0usize;
    let fresh = |counter: &mut usize| {
        *counter += 1;
        IndexVar::new(format!("V{}", counter))
    };
    for n in &src_nodes {
        let v = fresh(&mut counter);
        vars.insert(n.id.clone(), v);
    }
    for n in &tgt_nodes {
        let v = match linked_tgt.get(&n.id) {
            Some(src_id) => vars[src_id].clone(),
            None => fresh(&mut counter),
        };
        vars.insert(n.id.clone(), v);
    }

    let src_builder = SignBuilder { cats: src_cats, vars: vars.clone() };
    let tgt_builder = SignBuilder { cats: tgt_cats, vars };

    let tgt_by_id: BTreeMap<&str, &TreeNode> = tgt_nodes.iter().map(|n| (n.id.as_str(), *n)).collect();

    let mut entries = Vec::new();
    let mut used_ids: Vec<String> = Vec::new();
    for s in &src_nodes {
        let Some(t_id) = linked_src.get(&s.id) else { continue };
        let t = tgt_by_id[t_id.as_str()];

        let mut source = Vec::new();
        src_builder.closure(s, None, &linked_src, false, &mut source)?;
        let mut target = Vec::new();
        tgt_builder.closure(t, None, &linked_tgt, true, &mut target)?;

        let mut id = s.lemma.clone();
        let mut k = 1;
        while used_ids.contains(&id) {
            k += 1;
            id = format!("{}_{}", s.lemma, k);
        }
        used_ids.push(id.clone());

        let entry = BilingualEntry { id, source, target, target_features: BTreeMap::new() };
        entries.push(alpha_rename(&entry));
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bkb::{parse_bkb, serialize_entries};

    const EAT: &str = "\
tree src: e1 eat v (e2 he pron) (e3 vegetable n)
tree tgt: j1 taberu v (j2 ha p (j3 kare pron)) (j4 wo p (j5 yasai n))
clink e1 j1
clink e2 j3
clink e3 j5
";

    fn cats_en() -> CategorySet {
        let mut c = CategorySet::new();
        c.declare("v", vec![vec!["self".into(), "subj".into(), "obj".into()]]).unwrap();
        c.declare("pron", vec![vec!["self".into()]]).unwrap();
        c.declare("n", vec![vec!["self".into()]]).unwrap();
        c
    }

    fn cats_ja() -> CategorySet {
        let mut c = cats_en();
        c.declare("p", vec![vec!["anchor".into(), "comp".into()]]).unwrap();
        c
    }

    #[test]
    fn ingests_the_eat_pair() {
        let pair = parse_sato(EAT).unwrap();
        let entries = ingest_sato(&pair, &cats_en(), &cats_ja()).unwrap();
        let text = serialize_entries(&entries);
        assert_eq!(
            text,
            "eat: eat:v[A,B,C] <-> taberu:v[A,D,E] & ha:p[D,B] & wo:p[E,C]\n\
             he: he:pron[A] <-> kare:pron[A]\n\
             vegetable: vegetable:n[A] <-> yasai:n[A]\n"
        );
        // output round-trips through the KB parser
        let kb = parse_bkb(&text).unwrap();
        assert_eq!(kb.entries, entries);
    }

    #[test]
    fn single_node_pair_gives_single_word_entry() {
        let text = "tree src: e1 dog n\ntree tgt: j1 inu n\nclink e1 j1\n";
        let pair = parse_sato(text).unwrap();
        let entries = ingest_sato(&pair, &cats_en(), &cats_ja()).unwrap();
        assert_eq!(serialize_entries(&entries), "dog: dog:n[A] <-> inu:n[A]\n");
    }

    #[test]
    fn fully_linked_isomorphic_trees_give_unit_cardinalities() {
        let text = "\
tree src: e1 see v (e2 he pron) (e3 dog n)
tree tgt: j1 veo v (j2 el pron) (j3 perro n)
clink e1 j1
clink e2 j2
clink e3 j3
";
        let pair = parse_sato(text).unwrap();
        let entries = ingest_sato(&pair, &cats_en(), &cats_en()).unwrap();
        let cards: Vec<(usize, usize)> = entries.iter().map(|e| (e.source.len(), e.target.len())).collect();
        assert_eq!(cards, vec![(1, 1), (1, 1), (1, 1)]);
    }

    #[test]
    fn orphan_target_node_is_detected() {
        // `yo` has no linked descendant: it sits on no path to a linked image
        let text = "\
tree src: e1 eat v (e2 he pron) (e3 vegetable n)
tree tgt: j1 taberu v (j2 ha p (j3 kare pron)) (j4 wo p (j5 yasai n)) (j6 yo p)
clink e1 j1
clink e2 j3
clink e3 j5
";
        let pair = parse_sato(text).unwrap();
        let err = ingest_sato(&pair, &cats_en(), &cats_ja()).unwrap_err();
        assert!(matches!(err, SatoError::OrphanTargetNode(node) if node == "j6"));
    }

    #[test]
    fn clink_invariants_are_checked() {
        let bad_node = "tree src: e1 dog n\ntree tgt: j1 inu n\nclink e1 j9\n";
        let pair = parse_sato(bad_node).unwrap();
        assert!(matches!(
            ingest_sato(&pair, &cats_en(), &cats_en()),
            Err(SatoError::UnknownClinkNode(_))
        ));
        let roots_unlinked = "tree src: e1 see v (e2 he pron) (e3 dog n)\ntree tgt: j1 veo v (j2 el pron) (j3 perro n)\nclink e2 j2\n";
        let pair = parse_sato(roots_unlinked).unwrap();
        assert!(matches!(
            ingest_sato(&pair, &cats_en(), &cats_en()),
            Err(SatoError::RootsNotLinked)
        ));
    }
}
