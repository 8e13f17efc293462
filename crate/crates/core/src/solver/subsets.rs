//! Bit-indexed subset table plus the literal volume and cost functions.
//!
//! Index `k` of the table names the subset of the knapsack's input list
//! selected by the binary digits of `k` (bit `i` set ⇒ `base[i]` included).
//! The fast solver path never materializes this table; it works on the bit
//! masks directly. The functions here follow the table-driven definitions and
//! back the reference solver and the tests.

use fixedbitset::FixedBitSet;

use super::CompositionRecord;
use crate::error::{Error, Result};
use crate::graph::{NodeId, Service};
use crate::ontology::{ConceptId, ConceptSet, Taxonomy};

pub const DEFAULT_MAX_INPUT_BITS: u32 = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetTable {
    base: Vec<ConceptId>,
    subsets: Vec<ConceptSet>,
}

/// Enumerate every subset of `base` with a binary counter.
pub fn gen_subsets(service: &str, base: &[ConceptId], limit: u32) -> Result<SubsetTable> {
    check_width(service, base.len(), limit)?;
    let upper_bound = 1usize << base.len();
    let mut subsets = Vec::with_capacity(upper_bound);
    for index in 0..upper_bound {
        let mut subset = Vec::new();
        let mut tmp = index;
        let mut i = 0;
        while tmp > 0 {
            if tmp % 2 > 0 {
                subset.push(base[i]);
            }
            tmp /= 2;
            i += 1;
        }
        subsets.push(subset.into_iter().collect());
    }
    Ok(SubsetTable {
        base: base.to_vec(),
        subsets,
    })
}

pub(crate) fn check_width(service: &str, width: usize, limit: u32) -> Result<()> {
    if width > limit as usize || width >= usize::BITS as usize {
        return Err(Error::InputWidthExceeded {
            service: service.to_string(),
            width,
            limit,
        });
    }
    Ok(())
}

impl SubsetTable {
    pub fn base(&self) -> &[ConceptId] {
        &self.base
    }

    /// `2^|base| - 1`, the index of the full input set.
    pub fn capacity(&self) -> usize {
        self.subsets.len() - 1
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn subset(&self, index: usize) -> &ConceptSet {
        &self.subsets[index]
    }

    /// Inverse of [`SubsetTable::subset`].
    pub fn index_of(&self, subset: &ConceptSet) -> Option<usize> {
        let mut index = 0usize;
        for c in subset {
            let pos = self.base.iter().position(|&b| b == c)?;
            index |= 1 << pos;
        }
        Some(index)
    }
}

/// Volume of `item` inside a temporary knapsack holding `table.subset(v)`:
/// the index of the subset of those inputs that the item's outputs match.
pub fn dv(item: &Service, knapsack_inputs: &[ConceptId], table: &SubsetTable, v: usize, t: &Taxonomy) -> usize {
    let out = t.matched_inputs(&item.outputs, table.subset(v));
    let mut volume = 0usize;
    for c in &out {
        let index = knapsack_inputs
            .iter()
            .position(|&k| k == c)
            .expect("matched concept comes from the knapsack inputs");
        volume += 1 << index;
    }
    volume
}

/// Cost of adding `item` on top of the items in `already`: how many services
/// of the item's composition are not yet invoked by those items.
pub fn dc(item: NodeId, already: &[NodeId], records: &[Option<CompositionRecord>]) -> Result<usize> {
    let record = |s: NodeId| {
        records
            .get(s.index())
            .and_then(Option::as_ref)
            .ok_or_else(|| Error::Internal(format!("no composition record for node {}", s.0)))
    };
    let mut union = FixedBitSet::with_capacity(records.len());
    for &s in already {
        union.union_with(&record(s)?.servs);
    }
    Ok(record(item)?.servs.difference(&union).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{load_taxonomy, ConceptDoc, TaxonomyDoc};

    fn flat(n: usize) -> Taxonomy {
        load_taxonomy(&TaxonomyDoc {
            concepts: (1..=n)
                .map(|i| ConceptDoc {
                    id: format!("c{i}"),
                    parent: None,
                })
                .collect(),
        })
        .unwrap()
    }

    fn names(t: &Taxonomy, s: &ConceptSet) -> Vec<String> {
        t.names_of(s.iter())
    }

    #[test]
    fn two_bit_counter() {
        let t = flat(2);
        let base: Vec<_> = t.concepts().collect();
        let table = gen_subsets("x", &base, 24).unwrap();
        let got: Vec<Vec<String>> = (0..4).map(|k| names(&t, table.subset(k))).collect();
        assert_eq!(got, vec![vec![], vec!["c1".to_string()], vec!["c2".into()], vec!["c1".into(), "c2".into()]]);
        assert_eq!(table.capacity(), 3);
    }

    #[test]
    fn empty_base() {
        let table = gen_subsets("x", &[], 24).unwrap();
        assert_eq!(table.len(), 1);
        assert!(table.subset(0).is_empty());
        assert_eq!(table.capacity(), 0);
    }

    #[test]
    fn width_limit() {
        let t = flat(5);
        let base: Vec<_> = t.concepts().collect();
        match gen_subsets("svc", &base, 4) {
            Err(Error::InputWidthExceeded { service, width, limit }) => {
                assert_eq!((service.as_str(), width, limit), ("svc", 5, 4));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn index_of_inverts_subset() {
        let t = flat(4);
        let base: Vec<_> = t.concepts().collect();
        let table = gen_subsets("x", &base, 24).unwrap();
        for k in 0..table.len() {
            assert_eq!(table.index_of(table.subset(k)), Some(k));
            assert_eq!(table.subset(k).len(), (k as u32).count_ones() as usize);
        }
    }
}
