//! Transfer: exact multiset cover of the instantiated source bag by
//! bilingual entries, cover ranking, and construction of the target bag
//! with cross-linguistic index propagation.
//!
//! A cover partitions the source bag: no gaps, no overlaps. A match is
//! admissible only if its entry's source index pattern unifies with the
//! parse's actual bindings, which is what ties covers to the dependency
//! structure the parser found. Longest-first ranking realizes the
//! elsewhere condition: more specific entries override more general ones.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::bkb::{match_entry_signs, Bkb, Match, MatchSemantics};
use crate::sign::{CategorySet, Features, Index, IndexVar, NodeId, Sign};

/// Cover-stream and rank ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankStrategy {
    /// Non-increasing entry-cardinality vectors: longest match first.
    Longest,
    /// Non-decreasing number of entries used.
    Fewest,
    /// KB declaration order.
    None,
}

impl RankStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            RankStrategy::Longest => "longest",
            RankStrategy::Fewest => "fewest",
            RankStrategy::None => "none",
        }
    }
}

/// A set of matches exactly covering the source bag, with the merged
/// binding over all matches (variables qualified per match, since entry
/// variable scope is entry-local).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    pub matches: Vec<Match>,
    pub binding: crate::sign::Binding,
}

impl Cover {
    /// Entry ids in KB declaration order (the display order).
    pub fn entry_ids(&self) -> Vec<String> {
        let mut pairs: Vec<(usize, &str)> = self.matches.iter().map(|m| (m.entry_index, m.entry_id.as_str())).collect();
        pairs.sort();
        pairs.into_iter().map(|(_, id)| id.to_string()).collect()
    }

    /// Source-side cardinalities, descending.
    pub fn cardinality_vector(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.matches.iter().map(|m| m.assignment.len()).collect();
        v.sort_by(|a, b| b.cmp(a));
        v
    }
}

/// Totally ordered rank key; smaller keys rank earlier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RankKey {
    primary: Vec<i64>,
    positions: Vec<u32>,
    ids: Vec<String>,
}

/// The comparison key a strategy assigns to a cover. `Longest` compares
/// descending cardinality vectors lexicographically (a (3,1,1) cover
/// precedes (2,1,1,1)); `Fewest` compares match counts; `None` compares
/// KB declaration-order vectors. Ties fall back to the source-position
/// vector, then entry ids.
pub fn rank_key(cover: &Cover, strategy: RankStrategy) -> RankKey {
    let primary = match strategy {
        RankStrategy::Longest => cover.cardinality_vector().iter().map(|&c| -(c as i64)).collect(),
        RankStrategy::Fewest => vec![cover.matches.len() as i64],
        RankStrategy::None => {
            let mut v: Vec<i64> = cover.matches.iter().map(|m| m.entry_index as i64).collect();
            v.sort();
            v
        }
    };
    let mut positions: Vec<u32> = cover.matches.iter().map(|m| m.leftmost().0).collect();
    positions.sort();
    let mut ids: Vec<String> = cover.matches.iter().map(|m| m.entry_id.clone()).collect();
    ids.sort();
    RankKey { primary, positions, ids }
}

/// The instantiated target bag a cover transfers to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetBag {
    pub items: Vec<TargetItem>,
    /// Per-node features: source-sign features keyed by their own node,
    /// plus features deposited by `@null` carriers. Generation reads
    /// agreement and decoration conditions from here.
    pub features_by_node: BTreeMap<NodeId, Features>,
}

/// One instantiated target sign, with the occurrence id generation orders
/// by (`self` node for categories that have one, a fresh id otherwise) and
/// the entry it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetItem {
    pub sign: Sign,
    pub occurrence: NodeId,
    pub entry_id: String,
}

impl TargetBag {
    pub fn node_features(&self, node: NodeId) -> Features {
        self.features_by_node.get(&node).cloned().unwrap_or_default()
    }

    pub fn overt_occurrences(&self) -> Vec<NodeId> {
        self.items.iter().map(|i| i.occurrence).collect()
    }
}

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("no cover: {residue_len} item(s) uncovered, best residue [{residue}]", residue_len = .residue.len(), residue = .residue.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", "))]
    NoCover { residue: Vec<Sign> },
    #[error("target category `{cat}/{arity}` (entry `{entry}`) unknown in the target language")]
    UnknownTargetCategory { entry: String, cat: String, arity: usize },
}

/// Enumerates every exact cover of the source bag, ordered by the
/// strategy's rank key (ties by discovery order). Search is depth-first
/// backtracking over strategy-sorted matches, always extending from the
/// lowest-numbered uncovered node, so enumeration is deterministic and
/// each cover is found exactly once.
pub fn find_covers(
    bag: &[(NodeId, Sign)],
    kb: &Bkb,
    sem: MatchSemantics,
    strategy: RankStrategy,
) -> Result<Vec<Cover>, TransferError> {
    let mut matches: Vec<Match> = Vec::new();
    for (i, entry) in kb.entries.iter().enumerate() {
        matches.extend(match_entry_signs(entry, i, bag, sem));
    }
    // pre-sort candidate matches by the strategy's preference
    match strategy {
        RankStrategy::Longest | RankStrategy::Fewest => {
            matches.sort_by_key(|m| (std::cmp::Reverse(m.assignment.len()), m.leftmost(), m.entry_index));
        }
        RankStrategy::None => {
            matches.sort_by_key(|m| (m.entry_index, m.leftmost()));
        }
    }

    let all_nodes: BTreeSet<NodeId> = bag.iter().map(|(n, _)| *n).collect();
    let mut covers: Vec<Cover> = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    let mut best_partial: BTreeSet<NodeId> = BTreeSet::new();

    fn dfs(
        matches: &[Match],
        all_nodes: &BTreeSet<NodeId>,
        covered: &mut BTreeSet<NodeId>,
        chosen: &mut Vec<usize>,
        covers: &mut Vec<Vec<usize>>,
        best_partial: &mut BTreeSet<NodeId>,
    ) {
        if covered.len() > best_partial.len() {
            *best_partial = covered.clone();
        }
        let next = match all_nodes.iter().find(|n| !covered.contains(n)) {
            None => {
                covers.push(chosen.clone());
                return;
            }
            Some(n) => *n,
        };
        for (mi, m) in matches.iter().enumerate() {
            let positions = m.positions();
            if !positions.contains(&next) {
                continue;
            }
            if positions.iter().any(|p| covered.contains(p)) {
                continue;
            }
            for p in &positions {
                covered.insert(*p);
            }
            chosen.push(mi);
            dfs(matches, all_nodes, covered, chosen, covers, best_partial);
            chosen.pop();
            for p in &positions {
                covered.remove(p);
            }
        }
    }

    let mut found: Vec<Vec<usize>> = Vec::new();
    let mut covered = BTreeSet::new();
    dfs(&matches, &all_nodes, &mut covered, &mut chosen, &mut found, &mut best_partial);

    if found.is_empty() {
        let residue: Vec<Sign> = bag
            .iter()
            .filter(|(n, _)| !best_partial.contains(n))
            .map(|(_, s)| s.clone())
            .collect();
        return Err(TransferError::NoCover { residue });
    }

    for indices in found {
        let ms: Vec<Match> = indices.iter().map(|&i| matches[i].clone()).collect();
        // merge bindings with match-qualified variable names: entry
        // variable scope is entry-local, so unqualified names may repeat
        let mut binding = crate::sign::Binding::new();
        for (k, m) in ms.iter().enumerate() {
            for (var, node) in m.binding.iter() {
                let qualified = IndexVar::new(format!("{}.{}", k, var));
                binding = binding.unify(&qualified, *node).expect("qualified vars cannot clash");
            }
        }
        covers.push(Cover { matches: ms, binding });
    }

    // stable sort: strategy key first, discovery order as final tie-break
    covers.sort_by_key(|c| rank_key(c, strategy));
    Ok(covers)
}

/// Instantiates a cover's target sides: shared variables take the
/// binding's nodes, target-only variables take fresh nodes (one per
/// variable per match), and `@null` carriers deposit their features onto
/// the nodes their variables bind. Source-sign features land on each
/// sign's own node.
pub fn apply_cover(
    cover: &Cover,
    kb: &Bkb,
    bag: &[(NodeId, Sign)],
    tgt_cats: &CategorySet,
) -> Result<TargetBag, TransferError> {
    let mut features_by_node: BTreeMap<NodeId, Features> = BTreeMap::new();
    for (node, sign) in bag {
        if !sign.features.is_empty() {
            features_by_node.entry(*node).or_default().extend(sign.features.clone());
        }
    }

    let mut max_node = bag.iter().map(|(n, _)| n.0).max().unwrap_or(0);
    for (_, sign) in bag {
        for idx in &sign.indices {
            if let Index::Node(n) = idx {
                max_node = max_node.max(n.0);
            }
        }
    }
    let mut next = max_node;
    let mut fresh = move || {
        next += 1;
        NodeId(next)
    };

    let mut items = Vec::new();
    for m in &cover.matches {
        let entry = &kb.entries[m.entry_index];
        let mut fresh_vars: BTreeMap<IndexVar, NodeId> = BTreeMap::new();
        for item in &entry.target {
            let category = tgt_cats.category(&item.cat, item.arity()).map_err(|_| {
                TransferError::UnknownTargetCategory {
                    entry: entry.id.clone(),
                    cat: item.cat.clone(),
                    arity: item.arity(),
                }
            })?;
            let indices: Vec<Index> = item
                .vars
                .iter()
                .map(|v| {
                    let node = m
                        .binding
                        .get(v)
                        .unwrap_or_else(|| *fresh_vars.entry(v.clone()).or_insert_with(&mut fresh));
                    Index::Node(node)
                })
                .collect();
            let sign = Sign::new(item.lemma.clone(), category, indices, item.features.clone());
            let occurrence = match sign.self_node() {
                Some(n) => n,
                None => fresh(),
            };
            items.push(TargetItem { sign, occurrence, entry_id: entry.id.clone() });
        }
        for (var, feats) in &entry.target_features {
            if let Some(node) = m.binding.get(var) {
                features_by_node.entry(node).or_default().extend(feats.clone());
            }
        }
    }

    Ok(TargetBag { items, features_by_node })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bkb::parse_bkb;
    use crate::grammar::load_grammar;
    use crate::lexicon::{analyze_tokens, load_lexicon};
    use crate::parser::parse_all;

    const ENGLISH_LEX: &str = "\
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

    const ENGLISH_GRAM: &str = "\
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

    const SPANISH_CATS: &str = "\
cat iv : self subj
cat tv : self subj obj
cat n : self
cat adv : anchor
cat p : anchor comp
lex atrás adv/1
lex cortar iv/2
lex cortar tv/3
lex economía n/1
lex en p/2
lex hacer tv/3
lex inversión n/1
lex reducir tv/3
";

    fn parses() -> Vec<crate::parser::Parse> {
        let lex = load_lexicon(ENGLISH_LEX).unwrap();
        let grammar = load_grammar(ENGLISH_GRAM).unwrap();
        let toks: Vec<String> = "they cut back on investments".split(' ').map(String::from).collect();
        parse_all(analyze_tokens(&lex, &toks), &grammar, None).unwrap()
    }

    fn parse_with_pattern(pattern: &str) -> crate::parser::Parse {
        parses()
            .into_iter()
            .find(|p| p.render().contains(pattern))
            .expect("pattern parse exists")
    }

    #[test]
    fn covers_of_the_particle_parse() {
        // the iv[a,b,c] parse admits exactly {e,g,they} and {d,h,g,they}
        let kb = parse_bkb(KB).unwrap();
        let parse = parse_with_pattern("cut:iv[2,1,3]");
        let covers = find_covers(&parse.source_bag(), &kb, MatchSemantics::BAG, RankStrategy::Longest).unwrap();
        let ids: Vec<Vec<String>> = covers.iter().map(|c| c.entry_ids()).collect();
        assert_eq!(
            ids,
            vec![
                vec!["e".to_string(), "g".to_string(), "they".to_string()],
                vec!["d".to_string(), "g".to_string(), "h".to_string(), "they".to_string()],
            ]
        );
    }

    #[test]
    fn entry_sets_across_all_parses_match_the_solution_table() {
        let kb = parse_bkb(KB).unwrap();
        let mut sets: Vec<String> = Vec::new();
        for p in parses() {
            let covers = find_covers(&p.source_bag(), &kb, MatchSemantics::BAG, RankStrategy::Longest).unwrap();
            for c in covers {
                sets.push(c.entry_ids().join(""));
            }
        }
        sets.sort();
        assert_eq!(sets, vec!["acghthey", "bfghthey", "bfghthey", "dghthey", "egthey"]);
    }

    #[test]
    fn without_entry_e_the_first_cover_uses_d() {
        let kb_text: String = KB.lines().filter(|l| !l.starts_with("e:")).collect::<Vec<_>>().join("\n");
        let kb = parse_bkb(&kb_text).unwrap();
        let parse = parse_with_pattern("cut:iv[2,1,3]");
        let covers = find_covers(&parse.source_bag(), &kb, MatchSemantics::BAG, RankStrategy::Longest).unwrap();
        assert_eq!(covers[0].entry_ids(), vec!["d", "g", "h", "they"]);
    }

    #[test]
    fn singleton_and_empty_kb() {
        let kb = parse_bkb("g: investment:n[A] <-> inversión:n[A]\n").unwrap();
        let n = crate::sign::Category::new("n", vec!["self".into()]);
        let bag = vec![(NodeId(1), Sign::new("investment", n, vec![Index::Node(NodeId(1))], Features::new()))];
        let covers = find_covers(&bag, &kb, MatchSemantics::BAG, RankStrategy::Longest).unwrap();
        assert_eq!(covers.len(), 1);
        assert_eq!(covers[0].entry_ids(), vec!["g"]);

        let err = find_covers(&bag, &Bkb::default(), MatchSemantics::BAG, RankStrategy::Longest).unwrap_err();
        match err {
            TransferError::NoCover { residue } => assert_eq!(residue.len(), 1),
            other => panic!("expected NoCover, got {other:?}"),
        }
    }

    #[test]
    fn rank_keys_order_cardinality_vectors() {
        let kb = parse_bkb(KB).unwrap();
        let parse = parse_with_pattern("cut:iv[2,1,3]");
        let covers = find_covers(&parse.source_bag(), &kb, MatchSemantics::BAG, RankStrategy::Longest).unwrap();
        let e_cover = &covers[0];
        let d_cover = &covers[1];
        assert_eq!(e_cover.cardinality_vector(), vec![3, 1, 1]);
        assert_eq!(d_cover.cardinality_vector(), vec![2, 1, 1, 1]);
        assert!(rank_key(e_cover, RankStrategy::Longest) < rank_key(d_cover, RankStrategy::Longest));
        assert!(rank_key(e_cover, RankStrategy::Fewest) < rank_key(d_cover, RankStrategy::Fewest));
    }

    #[test]
    fn strategies_change_order_only() {
        let kb = parse_bkb(KB).unwrap();
        for p in parses() {
            let mut sets: Vec<Vec<Vec<String>>> = Vec::new();
            for strategy in [RankStrategy::Longest, RankStrategy::Fewest, RankStrategy::None] {
                let covers = find_covers(&p.source_bag(), &kb, MatchSemantics::BAG, strategy).unwrap();
                let mut ids: Vec<Vec<String>> = covers.iter().map(|c| c.entry_ids()).collect();
                ids.sort();
                sets.push(ids);
            }
            assert_eq!(sets[0], sets[1]);
            assert_eq!(sets[1], sets[2]);
        }
    }

    #[test]
    fn transfer_instantiates_shared_and_fresh_nodes() {
        let kb = parse_bkb(KB).unwrap();
        let spanish = load_lexicon(SPANISH_CATS).unwrap();
        let parse = parse_with_pattern("cut:iv[2,1,3]");
        let covers = find_covers(&parse.source_bag(), &kb, MatchSemantics::BAG, RankStrategy::Longest).unwrap();

        // {e,g,they}: reducir:tv[2,1,5] & inversión:n[5]; node 1 carries
        // the dropped pronoun's agreement, node 5 the source plural
        let bag = apply_cover(&covers[0], &kb, &parse.source_bag(), &spanish.cats).unwrap();
        let rendered: Vec<String> = bag.items.iter().map(|i| i.sign.to_string()).collect();
        assert_eq!(rendered, vec!["reducir:tv[2,1,5]", "inversión:n[5]"]);
        assert_eq!(bag.node_features(NodeId(1)).get("per").map(String::as_str), Some("3"));
        assert_eq!(bag.node_features(NodeId(1)).get("num").map(String::as_str), Some("pl"));
        assert_eq!(bag.node_features(NodeId(5)).get("num").map(String::as_str), Some("pl"));

        // {d,h,g,they}: hacer:tv[2,1,f] & economía:n[f] with f fresh
        let bag = apply_cover(&covers[1], &kb, &parse.source_bag(), &spanish.cats).unwrap();
        let rendered: Vec<String> = bag.items.iter().map(|i| i.sign.to_string()).collect();
        assert_eq!(rendered, vec!["hacer:tv[2,1,6]", "economía:n[6]{num=pl}", "en:p[2,5]", "inversión:n[5]"]);
        // fresh node 6 is disjoint from all source nodes and carries no
        // node-level features (its plural is entry-internal)
        assert!(bag.node_features(NodeId(6)).is_empty());
    }

    #[test]
    fn freshness_is_per_variable_per_match() {
        let kb = parse_bkb("x: cut:iv[A,B] <-> ir:iv[A,B] & de:p[A,C] & paso:n[C]\n").unwrap();
        let mut cats = CategorySet::new();
        cats.declare("iv", vec![vec!["self".into(), "subj".into()]]).unwrap();
        cats.declare("p", vec![vec!["anchor".into(), "comp".into()]]).unwrap();
        cats.declare("n", vec![vec!["self".into()]]).unwrap();
        let iv = cats.category("iv", 2).unwrap();
        let bag = vec![(
            NodeId(1),
            Sign::new("cut", iv, vec![Index::Node(NodeId(1)), Index::Node(NodeId(2))], Features::new()),
        )];
        let covers = find_covers(&bag, &kb, MatchSemantics::BAG, RankStrategy::Longest).unwrap();
        let out = apply_cover(&covers[0], &kb, &bag, &cats).unwrap();
        // C freshly bound once, shared between de and paso; p gets its own
        // occurrence id distinct from every node
        let rendered: Vec<String> = out.items.iter().map(|i| i.sign.to_string()).collect();
        assert_eq!(rendered, vec!["ir:iv[1,2]", "de:p[1,3]", "paso:n[3]"]);
        let occs: BTreeSet<NodeId> = out.items.iter().map(|i| i.occurrence).collect();
        assert_eq!(occs.len(), 3, "occurrences pairwise distinct");
    }
}
