//! Agenda-driven chart parser over instantiated signs.
//!
//! Edges are contiguous-span dependency subtrees; combining two adjacent
//! edges links their roots under a grammar schema and unifies the linked
//! index slots. A bilingual lookup before parsing yields an [`AgendaPlan`]:
//! each match becomes a group whose member edges share an identifier and a
//! rank (by source-side cardinality), and the agenda pops higher-ranked
//! edges first. Prioritization never prunes: the set of parses is the same
//! with and without a plan, only the emission order changes.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;

use thiserror::Error;

use crate::bkb::{Bkb, EntryItem, Match};
use crate::grammar::{DepLink, Grammar};
use crate::lexicon::AnalyzedToken;
use crate::sign::{Binding, Category, Features, Index, NodeId, Sign, SELF_ROLE};
use crate::transfer::RankStrategy;

/// Identifier shared by all edges licensed by one bilingual-entry match.
pub type GroupId = String;

/// Lexical template identity: lemma, category tag, arity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TemplateKey {
    pub lemma: String,
    pub cat: String,
    pub arity: usize,
}

impl TemplateKey {
    fn of_item(item: &EntryItem) -> TemplateKey {
        TemplateKey { lemma: item.lemma.clone(), cat: item.cat.clone(), arity: item.arity() }
    }

    fn of_partial(sign: &PartialSign) -> TemplateKey {
        TemplateKey {
            lemma: sign.lemma.clone(),
            cat: sign.category.tag.clone(),
            arity: sign.category.arity(),
        }
    }
}

/// One agenda group: a bilingual-entry match whose member lexical choices
/// succeed or fail together.
#[derive(Clone, Debug)]
pub struct PlanGroup {
    pub id: GroupId,
    pub entry_id: String,
    pub entry_index: usize,
    /// The entry's source items, kept for pattern-consistency checks.
    pub source_items: Vec<EntryItem>,
    /// Token claimed by each source item, in item order.
    pub assignment: Vec<NodeId>,
    /// Claimed (token, template) pairs.
    pub members: Vec<(NodeId, TemplateKey)>,
    /// Higher rank = explored earlier. Rank 0 is the unprioritized floor.
    pub rank: u32,
}

/// The parser-facing product of bilingual lookup: per-group member lists
/// and a priority assignment.
#[derive(Clone, Debug, Default)]
pub struct AgendaPlan {
    pub groups: Vec<PlanGroup>,
}

impl AgendaPlan {
    pub fn group(&self, id: &str) -> Option<&PlanGroup> {
        self.groups.iter().find(|g| g.id == id)
    }

    /// Templates the plan prefers for a token (any group's claim).
    pub fn preferred_templates(&self, node: NodeId) -> Vec<&TemplateKey> {
        let mut out = Vec::new();
        for g in &self.groups {
            for (n, t) in &g.members {
                if *n == node && !out.contains(&t) {
                    out.push(t);
                }
            }
        }
        out
    }
}

/// Builds the agenda plan from lookup matches. Each match becomes one
/// group; rank is the cardinality of the matched side (higher cardinality,
/// higher priority), ties broken by earliest leftmost token, then KB
/// declaration order.
///
/// The ranking strategy is accepted for interface symmetry with cover
/// ranking, but both strategies prefer longer matches during parsing, so
/// the rank assignment is the cardinality key either way.
pub fn build_agenda_plan(matches: &[Match], kb: &Bkb, _ranking: RankStrategy) -> AgendaPlan {
    let mut order: Vec<&Match> = matches.iter().collect();
    order.sort_by(|a, b| {
        let ka = (std::cmp::Reverse(a.assignment.len()), a.leftmost(), a.entry_index, a.assignment.clone());
        let kb_ = (std::cmp::Reverse(b.assignment.len()), b.leftmost(), b.entry_index, b.assignment.clone());
        ka.cmp(&kb_)
    });

    let n = order.len() as u32;
    let mut used: BTreeMap<String, usize> = BTreeMap::new();
    let mut groups = Vec::new();
    for (i, m) in order.iter().enumerate() {
        let entry = &kb.entries[m.entry_index];
        let times = used.entry(entry.id.clone()).or_insert(0);
        *times += 1;
        let id = if *times == 1 { entry.id.clone() } else { format!("{}#{}", entry.id, times) };
        let members = entry
            .source
            .iter()
            .zip(&m.assignment)
            .map(|(item, node)| (*node, TemplateKey::of_item(item)))
            .collect();
        groups.push(PlanGroup {
            id,
            entry_id: entry.id.clone(),
            entry_index: m.entry_index,
            source_items: entry.source.clone(),
            assignment: m.assignment.clone(),
            members,
            rank: n - i as u32,
        });
    }
    AgendaPlan { groups }
}

/// A sign being instantiated during parsing: template plus per-slot
/// bindings.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PartialSign {
    pub lemma: String,
    pub category: Category,
    pub slots: Vec<Option<NodeId>>,
    pub features: Features,
}

impl PartialSign {
    fn from_template(template: &Sign, features: &Features, node: NodeId) -> PartialSign {
        let slots = template
            .category
            .roles
            .iter()
            .map(|r| if r == SELF_ROLE { Some(node) } else { None })
            .collect();
        PartialSign {
            lemma: template.lemma.clone(),
            category: template.category.clone(),
            slots,
            features: features.clone(),
        }
    }

    fn render(&self) -> String {
        let slots: Vec<String> = self
            .slots
            .iter()
            .map(|s| s.map(|n| n.to_string()).unwrap_or_else(|| "_".to_string()))
            .collect();
        format!("{}:{}[{}]", self.lemma, self.category.tag, slots.join(","))
    }

    fn to_sign(&self, fresh: &mut impl FnMut() -> NodeId) -> Sign {
        let indices = self
            .slots
            .iter()
            .map(|s| match s {
                Some(n) => Index::Node(*n),
                None => Index::Node(fresh()),
            })
            .collect();
        Sign::new(self.lemma.clone(), self.category.clone(), indices, self.features.clone())
    }
}

/// A chart item: a dependency subtree over a contiguous token span.
#[derive(Clone, Debug)]
pub struct Edge {
    /// 1-based inclusive token span.
    pub span: (u32, u32),
    /// Token position of the subtree root.
    pub head: u32,
    /// Sign under construction per covered token.
    pub signs: BTreeMap<u32, PartialSign>,
    /// Dependency links established so far.
    pub links: Vec<DepLink>,
    /// Indices of plan groups consistent with (and used by) this edge.
    pub groups: Vec<usize>,
    /// Current agenda rank (max supporting group rank).
    pub priority: u32,
    seq: u64,
}

impl Edge {
    pub fn covered(&self) -> impl Iterator<Item = u32> + '_ {
        self.signs.keys().copied()
    }

    fn head_sign(&self) -> &PartialSign {
        &self.signs[&self.head]
    }

    fn key(&self) -> String {
        let mut parts: Vec<String> = self
            .signs
            .iter()
            .map(|(tok, s)| format!("{}={}", tok, s.render()))
            .collect();
        let mut links: Vec<String> = self
            .links
            .iter()
            .map(|l| format!("{}-{}-{}", l.head, l.label, l.dep))
            .collect();
        links.sort();
        parts.extend(links);
        format!("{}..{}@{}:{}", self.span.0, self.span.1, self.head, parts.join(";"))
    }
}

/// One agenda event, printable in the stable trace format.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub kind: TraceKind,
    pub group: Option<GroupId>,
    pub span: (u32, u32),
    pub sign: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceKind {
    Enqueue,
    Combine,
    Retract,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            TraceKind::Enqueue => "ENQUEUE",
            TraceKind::Combine => "COMBINE",
            TraceKind::Retract => "RETRACT",
        };
        write!(
            f,
            "EVENT kind={} group={} span={}..{} sign={}",
            kind,
            self.group.as_deref().unwrap_or("-"),
            self.span.0,
            self.span.1,
            self.sign
        )
    }
}

pub type TraceFn = Box<dyn FnMut(&TraceEvent)>;

/// A completed analysis: one instantiated sign per token plus the
/// dependency tree over them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parse {
    pub root: NodeId,
    pub signs: Vec<Sign>,
    pub links: Vec<DepLink>,
    /// Plan groups whose full pattern this parse realizes.
    pub honored_groups: Vec<GroupId>,
}

impl Parse {
    /// The instantiated source bag with each sign's origin token node.
    pub fn source_bag(&self) -> Vec<(NodeId, Sign)> {
        self.signs
            .iter()
            .enumerate()
            .map(|(i, s)| (NodeId(i as u32 + 1), s.clone()))
            .collect()
    }

    /// Canonical one-line rendering, subscript style.
    pub fn render(&self) -> String {
        let signs: Vec<String> = self.signs.iter().map(|s| s.to_string()).collect();
        signs.join(" ")
    }
}

#[derive(Debug, Error)]
pub enum ParserError {
    #[error("unknown token: {0}")]
    UnknownToken(String),
    #[error("no parse")]
    NoParse,
    #[error("unknown group: {0}")]
    UnknownGroup(String),
}

#[derive(PartialEq, Eq)]
struct AgendaItem {
    priority: u32,
    seq: u64,
    idx: usize,
}

impl Ord for AgendaItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.priority
            .cmp(&other.priority)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for AgendaItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// One chart-parsing session over one sentence. Pull parses with
/// [`ParserSession::next_parse`]; the enumeration is lazy, so callers that
/// stop early never pay for lower-priority exploration.
pub struct ParserSession<'g> {
    grammar: &'g Grammar,
    tokens: Vec<AnalyzedToken>,
    n: u32,
    plan: AgendaPlan,
    ranks: Vec<u32>,
    arena: Vec<Edge>,
    seen: BTreeSet<String>,
    chart: Vec<usize>,
    in_chart: Vec<bool>,
    agenda: BinaryHeap<AgendaItem>,
    seq: u64,
    emitted: usize,
    trace: Option<TraceFn>,
}

impl<'g> ParserSession<'g> {
    pub fn new(
        tokens: Vec<AnalyzedToken>,
        grammar: &'g Grammar,
        plan: Option<AgendaPlan>,
        trace: Option<TraceFn>,
    ) -> Result<Self, ParserError> {
        for t in &tokens {
            if t.analyses.is_empty() {
                return Err(ParserError::UnknownToken(t.surface.clone()));
            }
        }
        let plan = plan.unwrap_or_default();
        let ranks = plan.groups.iter().map(|g| g.rank).collect();
        let n = tokens.len() as u32;
        let mut session = ParserSession {
            grammar,
            tokens,
            n,
            plan,
            ranks,
            arena: Vec::new(),
            seen: BTreeSet::new(),
            chart: Vec::new(),
            in_chart: Vec::new(),
            agenda: BinaryHeap::new(),
            seq: 0,
            emitted: 0,
            trace,
        };
        session.seed();
        Ok(session)
    }

    fn emit_trace(&mut self, kind: TraceKind, group: Option<GroupId>, span: (u32, u32), sign: String) {
        if let Some(sink) = self.trace.as_mut() {
            sink(&TraceEvent { kind, group, span, sign });
        }
    }

    /// Groups supported by an edge: at least one member choice used, no
    /// member contradicted, and the entry's index pattern unifiable with
    /// the edge's bindings so far.
    fn supporting_groups(plan: &AgendaPlan, edge_signs: &BTreeMap<u32, PartialSign>) -> Vec<usize> {
        let mut out = Vec::new();
        'groups: for (gi, g) in plan.groups.iter().enumerate() {
            let mut covered = Vec::new();
            for (i, node) in g.assignment.iter().enumerate() {
                if edge_signs.contains_key(&node.0) {
                    covered.push(i);
                }
            }
            if covered.is_empty() {
                continue;
            }
            let mut binding = Binding::new();
            for i in covered {
                let node = g.assignment[i];
                let sign = &edge_signs[&node.0];
                let item = &g.source_items[i];
                if TemplateKey::of_partial(sign) != TemplateKey::of_item(item) {
                    continue 'groups;
                }
                for (slot, value) in sign.slots.iter().enumerate() {
                    if let Some(n) = value {
                        match binding.unify(&item.vars[slot], *n) {
                            Ok(b) => binding = b,
                            Err(_) => continue 'groups,
                        }
                    }
                }
            }
            out.push(gi);
        }
        out
    }

    fn priority_of(&self, groups: &[usize]) -> u32 {
        groups.iter().map(|&g| self.ranks[g]).max().unwrap_or(0)
    }

    fn top_group_id(&self, groups: &[usize]) -> Option<GroupId> {
        groups
            .iter()
            .max_by_key(|&&g| (self.ranks[g], std::cmp::Reverse(g)))
            .map(|&g| self.plan.groups[g].id.clone())
    }

    fn push_edge(&mut self, mut edge: Edge, kind: TraceKind) -> bool {
        let key = edge.key();
        if !self.seen.insert(key) {
            return false;
        }
        edge.groups = Self::supporting_groups(&self.plan, &edge.signs);
        edge.priority = self.priority_of(&edge.groups);
        edge.seq = self.seq;
        self.seq += 1;
        let idx = self.arena.len();
        let group = self.top_group_id(&edge.groups);
        let span = edge.span;
        let sign = edge.head_sign().render();
        self.agenda.push(AgendaItem { priority: edge.priority, seq: edge.seq, idx });
        self.arena.push(edge);
        self.in_chart.push(false);
        self.emit_trace(kind, group, span, sign);
        true
    }

    fn seed(&mut self) {
        let tokens = self.tokens.clone();
        for tok in &tokens {
            for analysis in &tok.analyses {
                let sign = PartialSign::from_template(&analysis.template, &analysis.features, tok.node);
                let mut signs = BTreeMap::new();
                signs.insert(tok.node.0, sign);
                let edge = Edge {
                    span: (tok.node.0, tok.node.0),
                    head: tok.node.0,
                    signs,
                    links: Vec::new(),
                    groups: Vec::new(),
                    priority: 0,
                    seq: 0,
                };
                self.push_edge(edge, TraceKind::Enqueue);
            }
        }
    }

    /// Attempts to attach the root of `dep` under the root of `head`.
    fn combine(&self, head_idx: usize, dep_idx: usize) -> Vec<Edge> {
        let head = &self.arena[head_idx];
        let dep = &self.arena[dep_idx];
        let adjacent = head.span.1 + 1 == dep.span.0 || dep.span.1 + 1 == head.span.0;
        if !adjacent {
            return Vec::new();
        }
        let head_sign = head.head_sign();
        let dep_sign = dep.head_sign();
        let mut out = Vec::new();
        for link in self.grammar.licensed_links_cats(&head_sign.category, &dep_sign.category) {
            let hs = head_sign.category.role_index(&link.head_role).expect("schema role checked at load");
            let ds = dep_sign.category.role_index(&link.dep_role).expect("schema role checked at load");
            let value = match (head_sign.slots[hs], dep_sign.slots[ds]) {
                (Some(a), Some(b)) if a == b => a,
                (Some(_), Some(_)) => continue,
                (Some(a), None) => a,
                (None, Some(b)) => b,
                // neither side bound: the link denotes the dependent itself
                (None, None) => NodeId(dep.head),
            };

            let mut signs = head.signs.clone();
            for (tok, s) in &dep.signs {
                signs.insert(*tok, s.clone());
            }
            signs.get_mut(&head.head).expect("head covered").slots[hs] = Some(value);
            signs.get_mut(&dep.head).expect("dep covered").slots[ds] = Some(value);

            let mut links = head.links.clone();
            links.extend(dep.links.iter().cloned());
            links.push(DepLink {
                head: NodeId(head.head),
                label: link.label.clone(),
                head_role: link.head_role.clone(),
                dep: NodeId(dep.head),
                dep_role: link.dep_role.clone(),
            });

            // input order is fixed, so LP violations are permanent: check now
            let order: Vec<(NodeId, &Category)> = signs
                .iter()
                .map(|(tok, s)| (NodeId(*tok), &s.category))
                .collect();
            if !self.grammar.lp_satisfied(&order, &links) {
                continue;
            }

            let span = (head.span.0.min(dep.span.0), head.span.1.max(dep.span.1));
            out.push(Edge {
                span,
                head: head.head,
                signs,
                links,
                groups: Vec::new(),
                priority: 0,
                seq: 0,
            });
        }
        out
    }

    /// Whether this edge is a complete analysis of the whole sentence.
    fn completed_parse(&mut self, idx: usize) -> Option<Parse> {
        let edge = &self.arena[idx];
        if edge.span != (1, self.n) {
            return None;
        }
        if !self.grammar.is_root_category(&edge.head_sign().category.tag) {
            return None;
        }
        for sign in edge.signs.values() {
            for (slot, value) in sign.slots.iter().enumerate() {
                if value.is_none() {
                    let role = &sign.category.roles[slot];
                    if !(self.grammar.pro_drop && role == "subj") {
                        return None;
                    }
                }
            }
        }
        // bind pro-dropped slots to fresh covert nodes, deterministically
        let mut next_fresh = self.n;
        let mut fresh = || {
            next_fresh += 1;
            NodeId(next_fresh)
        };
        let signs: Vec<Sign> = edge
            .signs
            .values()
            .map(|s| s.to_sign(&mut fresh))
            .collect();
        let links = {
            let mut ls = edge.links.clone();
            ls.sort();
            ls
        };
        let root = NodeId(edge.head);
        let honored_groups = self.honored_groups(&edge.signs);
        Some(Parse { root, signs, links, honored_groups })
    }

    /// Groups whose whole pattern (all members, unifiable indices) this
    /// completed sign assignment realizes.
    fn honored_groups(&self, signs: &BTreeMap<u32, PartialSign>) -> Vec<GroupId> {
        let mut out = Vec::new();
        'groups: for g in &self.plan.groups {
            let mut binding = Binding::new();
            for (i, node) in g.assignment.iter().enumerate() {
                let Some(sign) = signs.get(&node.0) else { continue 'groups };
                let item = &g.source_items[i];
                if TemplateKey::of_partial(sign) != TemplateKey::of_item(item) {
                    continue 'groups;
                }
                for (slot, value) in sign.slots.iter().enumerate() {
                    if let Some(n) = value {
                        match binding.unify(&item.vars[slot], *n) {
                            Ok(b) => binding = b,
                            Err(_) => continue 'groups,
                        }
                    }
                }
            }
            out.push(g.id.clone());
        }
        out
    }

    /// Pumps the agenda until the next complete parse (or exhaustion).
    pub fn next_parse(&mut self) -> Option<Parse> {
        while let Some(item) = self.agenda.pop() {
            if self.in_chart[item.idx] {
                continue;
            }
            if self.arena[item.idx].priority != item.priority {
                continue; // stale entry from a retraction
            }
            self.in_chart[item.idx] = true;
            self.chart.push(item.idx);

            if let Some(parse) = self.completed_parse(item.idx) {
                self.emitted += 1;
                return Some(parse);
            }

            let neighbors: Vec<usize> = self
                .chart
                .iter()
                .copied()
                .filter(|&j| j != item.idx)
                .collect();
            for j in neighbors {
                for edge in self.combine(item.idx, j) {
                    self.push_edge(edge, TraceKind::Combine);
                }
                for edge in self.combine(j, item.idx) {
                    self.push_edge(edge, TraceKind::Combine);
                }
            }
        }
        None
    }

    /// How many parses have been emitted so far.
    pub fn emitted(&self) -> usize {
        self.emitted
    }

    /// Atomically deprioritizes every edge supported by a group: the whole
    /// hypothesis fails together, and exploration falls back to the
    /// next-ranked group. Edges are never removed, so the parse set is
    /// unchanged.
    pub fn retract_group(&mut self, id: &str) -> Result<(), ParserError> {
        let gi = self
            .plan
            .groups
            .iter()
            .position(|g| g.id == id)
            .ok_or_else(|| ParserError::UnknownGroup(id.to_string()))?;
        self.ranks[gi] = 0;
        let mut retraces = Vec::new();
        for idx in 0..self.arena.len() {
            if !self.arena[idx].groups.contains(&gi) {
                continue;
            }
            let new_priority = self.priority_of(&self.arena[idx].groups.clone());
            let edge = &mut self.arena[idx];
            if edge.priority != new_priority {
                edge.priority = new_priority;
                if !self.in_chart[idx] {
                    self.agenda.push(AgendaItem { priority: new_priority, seq: edge.seq, idx });
                }
            }
            retraces.push((edge.span, edge.head_sign().render()));
        }
        for (span, sign) in retraces {
            self.emit_trace(TraceKind::Retract, Some(id.to_string()), span, sign);
        }
        Ok(())
    }
}

/// Convenience wrapper: enumerates every grammatical parse exactly once.
/// With a plan, parses consistent with higher-priority groups are emitted
/// earlier; the parse set itself is plan-independent.
pub fn parse_all(
    tokens: Vec<AnalyzedToken>,
    grammar: &Grammar,
    plan: Option<AgendaPlan>,
) -> Result<Vec<Parse>, ParserError> {
    let mut session = ParserSession::new(tokens, grammar, plan, None)?;
    let mut out = Vec::new();
    while let Some(p) = session.next_parse() {
        out.push(p);
    }
    if out.is_empty() {
        return Err(ParserError::NoParse);
    }
    Ok(out)
}
