//! Shared domain types: index variables, node identifiers, categories,
//! signs, bags and bindings, plus the multiset arithmetic everything else
//! builds on.
//!
//! A [`Sign`] is a lexical item carrying a lemma, a category (with the
//! role signature selected for it) and one index slot per role. Parsing
//! instantiates index slots with [`NodeId`]s; before that they hold
//! [`IndexVar`]s local to a lexical entry.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Symbolic index variable, local to one lexical or bilingual entry.
///
/// Two variables are the same index iff their names are equal within the
/// same entry; bindings are always built per entry instance, so scoping
/// never leaks across entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexVar(pub String);

impl IndexVar {
    pub fn new(name: impl Into<String>) -> Self {
        IndexVar(name.into())
    }
}

impl fmt::Display for IndexVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier of one token occurrence in one sentence.
///
/// Source-side nodes are the 1-based token position, which keeps traces
/// readable; transfer mints fresh ids above the source range for
/// target-only material.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Flat feature map, e.g. `{num=pl, per=3}`.
pub type Features = BTreeMap<String, String>;

/// Renders features in canonical `{k=v,...}` form; empty maps render as "".
pub fn features_to_string(features: &Features) -> String {
    if features.is_empty() {
        return String::new();
    }
    let inner: Vec<String> = features.iter().map(|(k, v)| format!("{}={}", k, v)).collect();
    format!("{{{}}}", inner.join(","))
}

/// True iff every feature in `required` is present with the same value.
pub fn features_subsume(required: &Features, given: &Features) -> bool {
    required.iter().all(|(k, v)| given.get(k) == Some(v))
}

/// One slot in a sign's index list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Index {
    Var(IndexVar),
    Node(NodeId),
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Var(v) => write!(f, "{}", v),
            Index::Node(n) => write!(f, "{}", n),
        }
    }
}

/// Role name inside a category signature (`self`, `subj`, `obj`, `prt`,
/// `anchor`, `comp`, ...). Kept as plain strings: the inventory is
/// data-defined, not hard-coded.
pub type Role = String;

/// The distinguished role bound to a sign's own node.
pub const SELF_ROLE: &str = "self";

/// A category tag together with the role signature chosen for one sign.
///
/// The same tag may be declared with several signatures (`iv` with and
/// without a particle slot); a concrete sign always knows which one it
/// uses, so its arity is fixed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Category {
    pub tag: String,
    pub roles: Vec<Role>,
}

impl Category {
    pub fn new(tag: impl Into<String>, roles: Vec<Role>) -> Self {
        Category { tag: tag.into(), roles }
    }

    pub fn arity(&self) -> usize {
        self.roles.len()
    }

    pub fn role_index(&self, role: &str) -> Option<usize> {
        self.roles.iter().position(|r| r == role)
    }

    pub fn has_role(&self, role: &str) -> bool {
        self.role_index(role).is_some()
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.tag, self.arity())
    }
}

/// Declared categories of one language: tag → permitted signatures.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CategorySet {
    sigs: BTreeMap<String, Vec<Vec<Role>>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CategoryError {
    #[error("category `{0}` redeclared with a conflicting signature set")]
    Conflict(String),
    #[error("category `{tag}` has no signature of arity {arity}")]
    NoSuchSignature { tag: String, arity: usize },
    #[error("unknown category `{0}`")]
    Unknown(String),
}

impl CategorySet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a category with its alternative signatures. Re-declaring
    /// with an identical signature list is a no-op; anything else is a
    /// conflict.
    pub fn declare(&mut self, tag: impl Into<String>, sigs: Vec<Vec<Role>>) -> Result<(), CategoryError> {
        let tag = tag.into();
        match self.sigs.get(&tag) {
            None => {
                self.sigs.insert(tag, sigs);
                Ok(())
            }
            Some(existing) if *existing == sigs => Ok(()),
            Some(_) => Err(CategoryError::Conflict(tag)),
        }
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.sigs.contains_key(tag)
    }

    pub fn signatures(&self, tag: &str) -> Option<&[Vec<Role>]> {
        self.sigs.get(tag).map(|v| v.as_slice())
    }

    /// Resolves `tag/arity` to a concrete [`Category`].
    pub fn category(&self, tag: &str, arity: usize) -> Result<Category, CategoryError> {
        let sigs = self.sigs.get(tag).ok_or_else(|| CategoryError::Unknown(tag.to_string()))?;
        sigs.iter()
            .find(|s| s.len() == arity)
            .map(|s| Category::new(tag, s.clone()))
            .ok_or_else(|| CategoryError::NoSuchSignature { tag: tag.to_string(), arity })
    }

    /// True iff some signature of `tag` carries `role`.
    pub fn has_role(&self, tag: &str, role: &str) -> bool {
        self.sigs
            .get(tag)
            .map(|sigs| sigs.iter().any(|s| s.iter().any(|r| r == role)))
            .unwrap_or(false)
    }

    pub fn tags(&self) -> impl Iterator<Item = &String> {
        self.sigs.keys()
    }

    /// Merges another set into this one, failing on conflicting tags.
    pub fn merge(&mut self, other: &CategorySet) -> Result<(), CategoryError> {
        for (tag, sigs) in &other.sigs {
            self.declare(tag.clone(), sigs.clone())?;
        }
        Ok(())
    }
}

/// A lexical item: lemma, category, one index per role, features.
///
/// A sign is *instantiated* when every index is a [`NodeId`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sign {
    pub lemma: String,
    pub category: Category,
    pub indices: Vec<Index>,
    pub features: Features,
}

impl Sign {
    /// Builds a sign, checking that the index count matches the signature.
    pub fn new(lemma: impl Into<String>, category: Category, indices: Vec<Index>, features: Features) -> Self {
        assert_eq!(
            indices.len(),
            category.arity(),
            "sign index count must match category arity"
        );
        Sign { lemma: lemma.into(), category, indices, features }
    }

    pub fn is_instantiated(&self) -> bool {
        self.indices.iter().all(|i| matches!(i, Index::Node(_)))
    }

    pub fn index_at_role(&self, role: &str) -> Option<&Index> {
        self.category.role_index(role).map(|i| &self.indices[i])
    }

    pub fn node_at_role(&self, role: &str) -> Option<NodeId> {
        match self.index_at_role(role) {
            Some(Index::Node(n)) => Some(*n),
            _ => None,
        }
    }

    /// The node this sign's `self` slot is bound to, if any.
    pub fn self_node(&self) -> Option<NodeId> {
        self.node_at_role(SELF_ROLE)
    }

    /// Identity used by multiset arithmetic: lemma, category and indices.
    /// Features are deliberately ignored unless a matcher constrains them.
    pub fn multiset_key(&self) -> (&str, &Category, &[Index]) {
        (&self.lemma, &self.category, &self.indices)
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        write!(f, "{}:{}[{}]{}", self.lemma, self.category.tag, idx.join(","), features_to_string(&self.features))
    }
}

/// A multiset of signs: duplicates permitted, order irrelevant.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bag(pub Vec<Sign>);

#[derive(Debug, Error, PartialEq, Eq)]
#[error("not a sub-bag: `{item}` occurs {have} time(s) in the whole but {want} needed")]
pub struct NotSubBag {
    pub item: String,
    pub have: usize,
    pub want: usize,
}

impl Bag {
    pub fn new(items: Vec<Sign>) -> Self {
        Bag(items)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Multiset equality on [`Sign::multiset_key`].
    pub fn same_multiset(&self, other: &Bag) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let mut a: Vec<_> = self.0.iter().map(|s| s.multiset_key()).collect();
        let mut b: Vec<_> = other.0.iter().map(|s| s.multiset_key()).collect();
        a.sort();
        b.sort();
        a == b
    }
}

/// Multiset difference `whole − part`; fails when `part` contains an item
/// absent or over-counted in `whole`. Comparison ignores features.
pub fn bag_subtract(whole: &Bag, part: &Bag) -> Result<Bag, NotSubBag> {
    let mut remaining: Vec<Option<&Sign>> = whole.0.iter().map(Some).collect();
    for wanted in &part.0 {
        let key = wanted.multiset_key();
        let slot = remaining
            .iter()
            .position(|s| s.map(|x| x.multiset_key() == key).unwrap_or(false));
        match slot {
            Some(i) => remaining[i] = None,
            None => {
                let have = whole.0.iter().filter(|s| s.multiset_key() == key).count();
                let want = part.0.iter().filter(|s| s.multiset_key() == key).count();
                return Err(NotSubBag { item: wanted.to_string(), have, want });
            }
        }
    }
    Ok(Bag(remaining.into_iter().flatten().cloned().collect()))
}

/// Partial map from index variables to nodes. Functional: one node per
/// variable. All operations return extended copies; inputs are never
/// mutated, so a failed extension leaves nothing behind.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Binding(BTreeMap<IndexVar, NodeId>);

#[derive(Debug, Error, PartialEq, Eq)]
#[error("index clash: {var} already bound to {old}, cannot rebind to {new}")]
pub struct Clash {
    pub var: IndexVar,
    pub old: NodeId,
    pub new: NodeId,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &IndexVar) -> Option<NodeId> {
        self.0.get(var).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&IndexVar, &NodeId)> {
        self.0.iter()
    }

    /// Returns an extended binding; re-binding to the same node is
    /// idempotent, to a different node a [`Clash`].
    pub fn unify(&self, var: &IndexVar, node: NodeId) -> Result<Binding, Clash> {
        match self.0.get(var) {
            Some(&old) if old != node => Err(Clash { var: var.clone(), old, new: node }),
            Some(_) => Ok(self.clone()),
            None => {
                let mut map = self.0.clone();
                map.insert(var.clone(), node);
                Ok(Binding(map))
            }
        }
    }

    /// Unifies two bindings into a fresh one.
    pub fn merge(&self, other: &Binding) -> Result<Binding, Clash> {
        let mut out = self.clone();
        for (var, node) in other.iter() {
            out = out.unify(var, *node)?;
        }
        Ok(out)
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner: Vec<String> = self.0.iter().map(|(v, n)| format!("{}={}", v, n)).collect();
        write!(f, "{{{}}}", inner.join(","))
    }
}

/// Convenience for test and fixture code: `{A→2}`-style construction.
pub fn binding_of(pairs: &[(&str, u32)]) -> Binding {
    let mut b = Binding::new();
    for (name, node) in pairs {
        b = b.unify(&IndexVar::new(*name), NodeId(*node)).expect("fixture binding must be consistent");
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(tag: &str, roles: &[&str]) -> Category {
        Category::new(tag, roles.iter().map(|r| r.to_string()).collect())
    }

    fn sign(lemma: &str, c: Category, nodes: &[u32]) -> Sign {
        let indices = nodes.iter().map(|n| Index::Node(NodeId(*n))).collect();
        Sign::new(lemma, c, indices, Features::new())
    }

    #[test]
    fn unify_extends_empty_binding() {
        let b = Binding::new();
        let out = b.unify(&IndexVar::new("A"), NodeId(2)).unwrap();
        assert_eq!(out.get(&IndexVar::new("A")), Some(NodeId(2)));
        assert!(b.is_empty(), "input binding must not be mutated");
    }

    #[test]
    fn unify_is_idempotent() {
        let b = binding_of(&[("A", 2)]);
        let out = b.unify(&IndexVar::new("A"), NodeId(2)).unwrap();
        assert_eq!(out, b);
    }

    #[test]
    fn unify_clashes_on_rebinding() {
        let b = binding_of(&[("A", 2)]);
        let err = b.unify(&IndexVar::new("A"), NodeId(3)).unwrap_err();
        assert_eq!(err, Clash { var: IndexVar::new("A"), old: NodeId(2), new: NodeId(3) });
        // failure leaves no partial extension observable
        assert_eq!(b, binding_of(&[("A", 2)]));
    }

    #[test]
    fn bag_subtract_paper_residue() {
        // {cut:iv, back:adv, on:p, investment:n} − {cut:iv, back:adv, on:p} → {investment:n}
        let iv = cat("iv", &["self", "subj", "prt"]);
        let adv = cat("adv", &["anchor"]);
        let p = cat("p", &["anchor", "comp"]);
        let n = cat("n", &["self"]);
        let whole = Bag::new(vec![
            sign("cut", iv.clone(), &[2, 1, 3]),
            sign("back", adv.clone(), &[3]),
            sign("on", p.clone(), &[2, 5]),
            sign("investment", n.clone(), &[5]),
        ]);
        let part = Bag::new(vec![
            sign("cut", iv, &[2, 1, 3]),
            sign("back", adv, &[3]),
            sign("on", p, &[2, 5]),
        ]);
        let rest = bag_subtract(&whole, &part).unwrap();
        assert_eq!(rest.len(), 1);
        assert_eq!(rest.0[0].lemma, "investment");
    }

    #[test]
    fn bag_subtract_identity_and_counting() {
        let n = cat("n", &["self"]);
        let b = Bag::new(vec![sign("x", n.clone(), &[1]), sign("x", n.clone(), &[1])]);
        // B − ∅ = B
        assert_eq!(bag_subtract(&b, &Bag::default()).unwrap(), b);
        // {x,x} − {x} = {x}
        let one = Bag::new(vec![sign("x", n.clone(), &[1])]);
        assert_eq!(bag_subtract(&b, &one).unwrap().len(), 1);
        // B − B = ∅
        assert!(bag_subtract(&b, &b).unwrap().is_empty());
        // over-counting fails
        let three = Bag::new(vec![
            sign("x", n.clone(), &[1]),
            sign("x", n.clone(), &[1]),
            sign("x", n, &[1]),
        ]);
        assert!(bag_subtract(&b, &three).is_err());
    }

    #[test]
    fn bag_subtract_size_arithmetic() {
        let n = cat("n", &["self"]);
        let whole = Bag::new(vec![
            sign("a", n.clone(), &[1]),
            sign("b", n.clone(), &[2]),
            sign("a", n.clone(), &[1]),
        ]);
        let part = Bag::new(vec![sign("a", n, &[1])]);
        let rest = bag_subtract(&whole, &part).unwrap();
        assert_eq!(rest.len() + part.len(), whole.len());
    }

    #[test]
    fn sign_multiset_key_ignores_features() {
        let n = cat("n", &["self"]);
        let mut feats = Features::new();
        feats.insert("num".into(), "pl".into());
        let plain = sign("investment", n.clone(), &[5]);
        let featured = Sign::new("investment", n, vec![Index::Node(NodeId(5))], feats);
        assert_eq!(plain.multiset_key(), featured.multiset_key());
    }

    #[test]
    fn category_set_resolution() {
        let mut cs = CategorySet::new();
        cs.declare(
            "iv",
            vec![
                vec!["self".into(), "subj".into()],
                vec!["self".into(), "subj".into(), "prt".into()],
            ],
        )
        .unwrap();
        assert_eq!(cs.category("iv", 3).unwrap().roles.len(), 3);
        assert!(matches!(cs.category("iv", 4), Err(CategoryError::NoSuchSignature { .. })));
        assert!(matches!(cs.category("np", 1), Err(CategoryError::Unknown(_))));
        // identical redeclaration is fine, conflicting is not
        cs.declare("iv", vec![vec!["self".into(), "subj".into()], vec!["self".into(), "subj".into(), "prt".into()]])
            .unwrap();
        assert!(cs.declare("iv", vec![vec!["self".into()]]).is_err());
    }
}
