//! Concept taxonomy and the semantic match predicate.
//!
//! An output concept `o` matches an input concept `i` when the two are the
//! same concept or `o` is a sub-concept of `i`. The taxonomy precomputes the
//! reflexive-transitive ancestor closure at load time, so every query after
//! that is a lookup.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interned concept handle, valid only for the taxonomy that issued it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptId(pub u32);

impl ConceptId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Sorted, duplicate-free set of concepts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ConceptSet(Vec<ConceptId>);

impl ConceptSet {
    pub fn new() -> Self {
        ConceptSet(Vec::new())
    }

    pub fn contains(&self, c: ConceptId) -> bool {
        self.0.binary_search(&c).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = ConceptId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[ConceptId] {
        &self.0
    }

    pub fn union(&self, other: &ConceptSet) -> ConceptSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn is_subset(&self, other: &ConceptSet) -> bool {
        self.iter().all(|c| other.contains(c))
    }
}

impl FromIterator<ConceptId> for ConceptSet {
    fn from_iter<I: IntoIterator<Item = ConceptId>>(iter: I) -> Self {
        let mut v: Vec<ConceptId> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        ConceptSet(v)
    }
}

impl<'a> IntoIterator for &'a ConceptSet {
    type Item = ConceptId;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, ConceptId>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

/// Serialized concept entry: `{"id": "...", "parent": "..."}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
}

/// Canonical taxonomy document: `{"concepts": [...]}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyDoc {
    pub concepts: Vec<ConceptDoc>,
}

/// Immutable concept forest with precomputed ancestor closure.
#[derive(Clone)]
pub struct Taxonomy {
    names: Vec<String>,
    index: HashMap<String, ConceptId>,
    parents: Vec<Option<ConceptId>>,
    // sorted; always contains the concept itself
    ancestors: Vec<Vec<ConceptId>>,
}

impl fmt::Debug for Taxonomy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Taxonomy")
            .field("concepts", &self.names.len())
            .finish()
    }
}

/// Build a taxonomy from its document form, validating ids and parent edges.
pub fn load_taxonomy(doc: &TaxonomyDoc) -> Result<Taxonomy> {
    let mut index = HashMap::with_capacity(doc.concepts.len());
    let mut names = Vec::with_capacity(doc.concepts.len());
    for c in &doc.concepts {
        if c.id.is_empty() {
            return Err(Error::parse("concept with empty id"));
        }
        let id = ConceptId(names.len() as u32);
        if index.insert(c.id.clone(), id).is_some() {
            return Err(Error::DuplicateConcept(c.id.clone()));
        }
        names.push(c.id.clone());
    }

    let mut parents = Vec::with_capacity(names.len());
    for c in &doc.concepts {
        let parent = match &c.parent {
            None => None,
            Some(p) => Some(
                *index
                    .get(p)
                    .ok_or_else(|| Error::UndefinedParent(c.id.clone(), p.clone()))?,
            ),
        };
        parents.push(parent);
    }

    let ancestors = ancestor_closure(&names, &parents)?;
    Ok(Taxonomy {
        names,
        index,
        parents,
        ancestors,
    })
}

fn ancestor_closure(names: &[String], parents: &[Option<ConceptId>]) -> Result<Vec<Vec<ConceptId>>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Active,
        Done,
    }

    let n = names.len();
    let mut marks = vec![Mark::Fresh; n];
    let mut closure: Vec<Vec<ConceptId>> = vec![Vec::new(); n];
    let mut chain = Vec::new();

    for start in 0..n {
        if marks[start] == Mark::Done {
            continue;
        }
        // climb until a finished concept or a root, then unwind
        chain.clear();
        let mut cur = Some(start);
        while let Some(c) = cur {
            match marks[c] {
                Mark::Done => break,
                Mark::Active => return Err(Error::CyclicTaxonomy(names[c].clone())),
                Mark::Fresh => {
                    marks[c] = Mark::Active;
                    chain.push(c);
                    cur = parents[c].map(ConceptId::index);
                }
            }
        }
        while let Some(c) = chain.pop() {
            let mut anc = match parents[c] {
                Some(p) => closure[p.index()].clone(),
                None => Vec::new(),
            };
            let me = ConceptId(c as u32);
            let pos = anc.binary_search(&me).unwrap_or_else(|p| p);
            anc.insert(pos, me);
            closure[c] = anc;
            marks[c] = Mark::Done;
        }
    }
    Ok(closure)
}

impl Taxonomy {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Result<ConceptId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownConcept(name.to_string()))
    }

    pub fn try_id(&self, name: &str) -> Option<ConceptId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, c: ConceptId) -> &str {
        &self.names[c.index()]
    }

    pub fn parent(&self, c: ConceptId) -> Option<ConceptId> {
        self.parents[c.index()]
    }

    /// Reflexive-transitive ancestors of `c`, sorted.
    pub fn ancestors(&self, c: ConceptId) -> &[ConceptId] {
        &self.ancestors[c.index()]
    }

    pub fn concepts(&self) -> impl ExactSizeIterator<Item = ConceptId> {
        (0..self.names.len() as u32).map(ConceptId)
    }

    /// Resolve a list of names into a concept set.
    pub fn resolve<S: AsRef<str>>(&self, names: &[S]) -> Result<ConceptSet> {
        names.iter().map(|n| self.id(n.as_ref())).collect()
    }

    pub fn names_of<'a>(&'a self, set: impl IntoIterator<Item = ConceptId> + 'a) -> Vec<String> {
        set.into_iter().map(|c| self.name(c).to_string()).collect()
    }

    /// `true` iff `out` is `inp` or a sub-concept of it.
    #[inline]
    pub fn matches(&self, out: ConceptId, inp: ConceptId) -> bool {
        out == inp || self.ancestors[out.index()].binary_search(&inp).is_ok()
    }

    /// Name-level variant of [`Taxonomy::matches`] that reports unknown ids.
    pub fn matches_names(&self, out: &str, inp: &str) -> Result<bool> {
        Ok(self.matches(self.id(out)?, self.id(inp)?))
    }

    /// The members of `ins` matched by at least one concept of `outs`.
    pub fn matched_inputs<O, I>(&self, outs: O, ins: I) -> ConceptSet
    where
        O: IntoIterator<Item = ConceptId> + Clone,
        I: IntoIterator<Item = ConceptId>,
    {
        ins.into_iter()
            .filter(|&i| outs.clone().into_iter().any(|o| self.matches(o, i)))
            .collect()
    }

    /// Back to document form, concepts in id order.
    pub fn to_doc(&self) -> TaxonomyDoc {
        TaxonomyDoc {
            concepts: self
                .concepts()
                .map(|c| ConceptDoc {
                    id: self.name(c).to_string(),
                    parent: self.parent(c).map(|p| self.name(p).to_string()),
                })
                .collect(),
        }
    }
}

/// Upward-closed set of currently available concepts.
///
/// Adding a concept marks all of its ancestors, so checking whether an input
/// is matched by anything added so far is a single bit test.
#[derive(Clone, Debug)]
pub struct Availability {
    bits: fixedbitset::FixedBitSet,
}

impl Availability {
    pub fn new(t: &Taxonomy) -> Self {
        Availability {
            bits: fixedbitset::FixedBitSet::with_capacity(t.len()),
        }
    }

    pub fn add(&mut self, t: &Taxonomy, c: ConceptId) {
        for &a in t.ancestors(c) {
            self.bits.insert(a.index());
        }
    }

    pub fn add_all(&mut self, t: &Taxonomy, cs: impl IntoIterator<Item = ConceptId>) {
        for c in cs {
            self.add(t, c);
        }
    }

    #[inline]
    pub fn is_matched(&self, inp: ConceptId) -> bool {
        self.bits.contains(inp.index())
    }

    pub fn covers(&self, ins: &ConceptSet) -> bool {
        ins.iter().all(|i| self.is_matched(i))
    }
}
