//! Generation: order the target bag into grammatical surface strings
//! under the target grammar's schemata, LP constraints and decorations,
//! then realize each sign morphologically.
//!
//! The search is exhaustive permutation enumeration with LP filtering,
//! acceptable at desk scale; a hard cap keeps it honest. Dependency
//! structure is re-derived from the instantiated indices: a link holds
//! exactly when a schema's two slots carry the same node.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::grammar::{projective, DecorationSlot, DepLink, Grammar};
use crate::lexicon::{analyze_tokens, Lexicon, LexiconError};
use crate::parser::parse_all;
use crate::sign::{Category, Features, Index, NodeId, Sign};
use crate::transfer::TargetBag;

/// Largest bag the permutation search accepts.
pub const MAX_BAG_ITEMS: usize = 8;

/// One decoration insertion in a generated string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecorationUse {
    pub word: String,
    /// Index into `words` where the decoration sits.
    pub index: usize,
}

/// One grammatical linearization of a target bag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerationResult {
    pub surface: String,
    /// Occurrence ids of the overt signs, left to right.
    pub order: Vec<NodeId>,
    /// Realized words including decorations.
    pub words: Vec<String>,
    /// The dependency tree (over occurrence ids) that licensed this order.
    pub links: Vec<DepLink>,
    pub decorations_used: Vec<DecorationUse>,
}

impl GenerationResult {
    /// The realized words with decorations stripped (for re-parsing).
    pub fn core_words(&self) -> Vec<String> {
        let skip: BTreeSet<usize> = self.decorations_used.iter().map(|d| d.index).collect();
        self.words
            .iter()
            .enumerate()
            .filter(|(i, _)| !skip.contains(i))
            .map(|(_, w)| w.clone())
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("target lemma `{0}` not in the target lexicon")]
    UnknownTargetLemma(String),
    #[error("bag has {count} items, generation is capped at {cap}")]
    TooManyItems { count: usize, cap: usize },
    #[error(transparent)]
    Realization(#[from] LexiconError),
}

fn node_at(sign: &Sign, slot: usize) -> NodeId {
    match &sign.indices[slot] {
        Index::Node(n) => *n,
        Index::Var(_) => unreachable!("target bags are fully instantiated"),
    }
}

/// All dependency links the bag's indices support under the grammar.
fn candidate_links(bag: &TargetBag, grammar: &Grammar) -> Vec<DepLink> {
    let mut out = Vec::new();
    for (i, head) in bag.items.iter().enumerate() {
        for (j, dep) in bag.items.iter().enumerate() {
            if i == j {
                continue;
            }
            for lt in grammar.licensed_links_cats(&head.sign.category, &dep.sign.category) {
                let hs = head.sign.category.role_index(&lt.head_role).unwrap();
                let ds = dep.sign.category.role_index(&lt.dep_role).unwrap();
                if node_at(&head.sign, hs) == node_at(&dep.sign, ds) {
                    out.push(DepLink {
                        head: head.occurrence,
                        label: lt.label,
                        head_role: lt.head_role,
                        dep: dep.occurrence,
                        dep_role: lt.dep_role,
                    });
                }
            }
        }
    }
    out
}

/// Enumerates every dependency tree over the bag's overt signs derivable
/// from the candidate links.
fn enumerate_trees(bag: &TargetBag, grammar: &Grammar) -> Vec<Vec<DepLink>> {
    let candidates = candidate_links(bag, grammar);
    let occs = bag.overt_occurrences();
    let n = occs.len();
    let mut trees = Vec::new();

    for (root_idx, root_item) in bag.items.iter().enumerate() {
        if !grammar.is_root_category(&root_item.sign.category.tag) {
            continue;
        }
        let root = occs[root_idx];
        // one incoming link per non-root occurrence
        let slots: Vec<Vec<&DepLink>> = occs
            .iter()
            .enumerate()
            .map(|(i, occ)| {
                if i == root_idx {
                    Vec::new()
                } else {
                    candidates.iter().filter(|l| l.dep == *occ).collect()
                }
            })
            .collect();
        if slots.iter().enumerate().any(|(i, s)| i != root_idx && s.is_empty()) {
            continue;
        }
        let mut choice: Vec<usize> = vec![0; n];
        let pick = |choice: &Vec<usize>| -> Vec<DepLink> {
            occs.iter()
                .enumerate()
                .filter(|(i, _)| *i != root_idx)
                .map(|(i, _)| slots[i][choice[i]].clone())
                .collect()
        };
        loop {
            let links = pick(&choice);
            // reachability from the root = acyclic and connected
            let mut reached: BTreeSet<NodeId> = BTreeSet::new();
            reached.insert(root);
            let mut grew = true;
            while grew {
                grew = false;
                for l in &links {
                    if reached.contains(&l.head) && reached.insert(l.dep) {
                        grew = true;
                    }
                }
            }
            if reached.len() == n {
                let mut sorted = links;
                sorted.sort();
                if !trees.contains(&sorted) {
                    trees.push(sorted);
                }
            }
            // advance the mixed-radix choice vector
            let mut i = 0;
            loop {
                if i == n {
                    break;
                }
                if i == root_idx || slots[i].is_empty() {
                    i += 1;
                    continue;
                }
                choice[i] += 1;
                if choice[i] < slots[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    trees
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    fn recurse(n: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for i in 0..n {
            if !current.contains(&i) {
                current.push(i);
                recurse(n, current, out);
                current.pop();
            }
        }
    }
    recurse(n, &mut current, &mut out);
    out
}

/// Effective features used to realize one item: the entry item's own
/// features, the features of its node, and for anything with a subject
/// slot the subject node's features (agreement).
fn realization_features(bag: &TargetBag, item: &crate::transfer::TargetItem) -> Features {
    let mut feats = item.sign.features.clone();
    if let Some(n) = item.sign.self_node() {
        feats.extend(bag.node_features(n));
    }
    if let Some(slot) = item.sign.category.role_index("subj") {
        let subj_node = node_at(&item.sign, slot);
        feats.extend(bag.node_features(subj_node));
    }
    feats
}

/// Orders the target bag into all grammatical surface strings: every
/// permutation whose derivable dependency tree satisfies the LP
/// constraints and projectivity, decorated and realized. Result order is
/// the lexicographic order of occurrence sequences.
pub fn generate(bag: &TargetBag, grammar: &Grammar, lexicon: &Lexicon) -> Result<Vec<GenerationResult>, GenerateError> {
    let n = bag.items.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n > MAX_BAG_ITEMS {
        return Err(GenerateError::TooManyItems { count: n, cap: MAX_BAG_ITEMS });
    }
    for item in &bag.items {
        let known = lexicon
            .entries_for_lemma(&item.sign.lemma)
            .any(|e| e.category.tag == item.sign.category.tag);
        if !known {
            return Err(GenerateError::UnknownTargetLemma(item.sign.lemma.clone()));
        }
    }

    let trees = enumerate_trees(bag, grammar);
    let occs = bag.overt_occurrences();
    let mut results: Vec<GenerationResult> = Vec::new();

    for perm in permutations(n) {
        let order: Vec<NodeId> = perm.iter().map(|&i| occs[i]).collect();
        let order_cats: Vec<(NodeId, &Category)> =
            perm.iter().map(|&i| (occs[i], &bag.items[i].sign.category)).collect();
        for tree in &trees {
            if !grammar.lp_satisfied(&order_cats, tree) {
                continue;
            }
            if !projective(&order, tree) {
                continue;
            }

            let mut words: Vec<String> = Vec::new();
            let mut decorations_used: Vec<DecorationUse> = Vec::new();
            for &i in &perm {
                let item = &bag.items[i];
                let incoming = tree.iter().find(|l| l.dep == item.occurrence).map(|l| l.label.as_str());
                let node_feats = match item.sign.self_node() {
                    Some(node) => bag.node_features(node),
                    None => Features::new(),
                };
                for d in &grammar.decorations {
                    if d.slot == DecorationSlot::Before && d.applies(&item.sign, incoming, &node_feats) {
                        decorations_used.push(DecorationUse { word: d.word.clone(), index: words.len() });
                        words.push(d.word.clone());
                    }
                }
                let feats = realization_features(bag, item);
                words.push(lexicon.realize(&item.sign.lemma, &item.sign.category, &feats)?);
                for d in &grammar.decorations {
                    if d.slot == DecorationSlot::After && d.applies(&item.sign, incoming, &node_feats) {
                        decorations_used.push(DecorationUse { word: d.word.clone(), index: words.len() });
                        words.push(d.word.clone());
                    }
                }
            }
            let surface = words.join(" ");
            if results.iter().any(|r| r.order == order && r.words == words) {
                continue;
            }
            results.push(GenerationResult {
                surface,
                order: order.clone(),
                words,
                links: tree.clone(),
                decorations_used,
            });
        }
    }

    results.sort_by(|a, b| a.order.cmp(&b.order).then_with(|| a.words.cmp(&b.words)));
    Ok(results)
}

/// Canonical structural rendering of a dependency tree, invariant under
/// node renaming: children sorted by (label, subtree).
fn canonical_tree(root: NodeId, labels: &[(NodeId, String)], links: &[DepLink]) -> String {
    let label = labels
        .iter()
        .find(|(n, _)| *n == root)
        .map(|(_, l)| l.clone())
        .unwrap_or_default();
    let mut children: Vec<String> = links
        .iter()
        .filter(|l| l.head == root)
        .map(|l| format!("{}={}", l.label, canonical_tree(l.dep, labels, links)))
        .collect();
    children.sort();
    if children.is_empty() {
        label
    } else {
        format!("{}({})", label, children.join(","))
    }
}

fn find_root(nodes: &[NodeId], links: &[DepLink]) -> Option<NodeId> {
    nodes
        .iter()
        .find(|n| !links.iter().any(|l| l.dep == **n))
        .copied()
}

/// Round-trip validator: parses the generated string (decorations
/// stripped) and succeeds iff some parse's lemma/category/link structure
/// is isomorphic to the generating bag's tree under node renaming.
pub fn reparse_check(result: &GenerationResult, bag: &TargetBag, grammar: &Grammar, lexicon: &Lexicon) -> bool {
    let words = result.core_words();
    let analyzed = analyze_tokens(lexicon, &words);
    let Ok(parses) = parse_all(analyzed, grammar, None) else {
        return false;
    };

    let bag_labels: Vec<(NodeId, String)> = bag
        .items
        .iter()
        .map(|i| (i.occurrence, format!("{}:{}", i.sign.lemma, i.sign.category.tag)))
        .collect();
    let bag_nodes: Vec<NodeId> = bag.overt_occurrences();
    let Some(bag_root) = find_root(&bag_nodes, &result.links) else {
        return false;
    };
    let wanted = canonical_tree(bag_root, &bag_labels, &result.links);

    parses.iter().any(|p| {
        let labels: Vec<(NodeId, String)> = p
            .signs
            .iter()
            .enumerate()
            .map(|(i, s)| (NodeId(i as u32 + 1), format!("{}:{}", s.lemma, s.category.tag)))
            .collect();
        canonical_tree(p.root, &labels, &p.links) == wanted
    })
}
