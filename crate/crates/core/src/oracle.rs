//! Exhaustive and greedy reference algorithms for validating the solver on
//! small instances.

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{LayeredGraph, NodeId, Repository, Request, Service};
use crate::ontology::{Availability, Taxonomy};
use crate::solver::CompositionRecord;

pub const DEFAULT_ORACLE_LIMIT: usize = 14;
pub const PER_STEP_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    /// Concrete services in the smallest feasible composition.
    pub optimal_len: usize,
    pub witness: Vec<String>,
    /// Number of candidate subsets examined.
    pub explored: u64,
}

/// Invoke every member whose inputs are matched until nothing changes, then
/// check that the wanted concepts are matched.
pub fn closure_replay<'a, I>(services: I, req: &Request, t: &Taxonomy) -> bool
where
    I: IntoIterator<Item = &'a Service>,
{
    let mut pending: Vec<&Service> = services.into_iter().collect();
    let mut available = Availability::new(t);
    available.add_all(t, req.provided.iter());
    loop {
        let before = pending.len();
        pending.retain(|s| {
            if available.covers(&s.inputs) {
                available.add_all(t, s.outputs.iter());
                false
            } else {
                true
            }
        });
        if pending.len() == before {
            break;
        }
    }
    available.covers(&req.wanted)
}

/// Smallest feasible subset of `repo`, by increasing cardinality.
pub fn oracle_min(repo: &Repository, req: &Request, t: &Taxonomy, limit: usize) -> Result<OracleResult> {
    let services = repo.services();
    if services.len() > limit {
        return Err(Error::InstanceTooLarge {
            size: services.len(),
            limit,
        });
    }
    let mut explored = 0u64;
    for size in 0..=services.len() {
        for subset in (0..services.len()).combinations(size) {
            explored += 1;
            if closure_replay(subset.iter().map(|&k| &services[k]), req, t) {
                return Ok(OracleResult {
                    optimal_len: size,
                    witness: subset.iter().map(|&k| services[k].id.clone()).collect(),
                    explored,
                });
            }
        }
    }
    Err(Error::Infeasible)
}

/// Minimum over all precursor subsets covering the inputs of `s` of the
/// size of the union of their compositions.
pub fn per_step_oracle(
    g: &LayeredGraph,
    t: &Taxonomy,
    s: NodeId,
    precs: &[NodeId],
    records: &[Option<CompositionRecord>],
) -> Result<usize> {
    if precs.len() > PER_STEP_LIMIT {
        return Err(Error::InstanceTooLarge {
            size: precs.len(),
            limit: PER_STEP_LIMIT,
        });
    }
    let inputs = &g.node(s).inputs;
    let full = (1u64 << inputs.len()) - 1;
    let mut masks = Vec::with_capacity(precs.len());
    let mut closures = Vec::with_capacity(precs.len());
    for &p in precs {
        let matched = t.matched_inputs(&g.node(p).outputs, inputs);
        let mask = inputs
            .iter()
            .enumerate()
            .filter(|&(_, c)| matched.contains(c))
            .fold(0u64, |m, (bit, _)| m | (1 << bit));
        masks.push(mask);
        let record = records[p.index()]
            .as_ref()
            .ok_or_else(|| Error::Internal(format!("precursor `{}` has no record", g.id(p))))?;
        closures.push(&record.servs);
    }

    let mut best: Option<usize> = None;
    for pick in 0u64..(1 << precs.len()) {
        let covered = (0..precs.len())
            .filter(|&k| pick >> k & 1 == 1)
            .fold(0u64, |m, k| m | masks[k]);
        if covered != full {
            continue;
        }
        let mut union = FixedBitSet::with_capacity(g.node_count());
        for k in (0..precs.len()).filter(|&k| pick >> k & 1 == 1) {
            union.union_with(closures[k]);
        }
        let size = union.count_ones(..);
        best = Some(best.map_or(size, |b| b.min(size)));
    }
    best.ok_or_else(|| Error::Internal(format!("no precursor subset covers the inputs of `{}`", g.id(s))))
}

/// Forward greedy cover followed by removal of redundant services.
///
/// At every step the invocable service matching the most still-unmatched
/// wanted concepts is added; ties go to the service producing the most new
/// concepts, then to the smallest id. Returns service ids in id order.
pub fn greedy_baseline(repo: &Repository, req: &Request, t: &Taxonomy) -> Result<Vec<String>> {
    let services = repo.services();
    let mut available = Availability::new(t);
    available.add_all(t, req.provided.iter());
    let mut used: Vec<usize> = Vec::new();
    let mut taken = vec![false; services.len()];

    while !available.covers(&req.wanted) {
        let mut best: Option<((usize, usize), usize)> = None;
        for (k, s) in services.iter().enumerate() {
            if taken[k] || !available.covers(&s.inputs) {
                continue;
            }
            let hits = req
                .wanted
                .iter()
                .filter(|&w| !available.is_matched(w) && s.outputs.iter().any(|o| t.matches(o, w)))
                .count();
            let fresh = s.outputs.iter().filter(|&o| !available.is_matched(o)).count();
            let score = (hits, fresh);
            if best.is_none_or(|(b, _)| score > b) {
                best = Some((score, k));
            }
        }
        match best {
            Some(((0, 0), _)) | None => return Err(Error::Infeasible),
            Some((_, k)) => {
                taken[k] = true;
                used.push(k);
                available.add_all(t, services[k].outputs.iter());
            }
        }
    }

    for pos in (0..used.len()).rev() {
        let without = used
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != pos)
            .map(|(_, &k)| &services[k]);
        if closure_replay(without, req, t) {
            used.remove(pos);
        }
    }
    used.sort_unstable();
    Ok(used.into_iter().map(|k| services[k].id.clone()).collect())
}
