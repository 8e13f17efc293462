//! Two-dimensional form of the knapsack recurrence.
//!
//! Keeps the full `C[i][v]` and `I[i][v]` tables and evaluates volumes and
//! costs through the subset table and the literal [`dv`]/[`dc`] functions.
//! It exists to cross-check the rolling one-dimensional solver.

use super::subsets::{dc, dv, gen_subsets};
use super::{CompositionRecord, CostRule};
use crate::error::Result;
use crate::graph::{LayeredGraph, NodeId};
use crate::ontology::Taxonomy;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceOutcome {
    /// `C[N][V_cap]`, `None` when the full knapsack cannot be filled.
    pub cost: Option<u64>,
    /// `I[N][V_cap]` in node order.
    pub chosen: Vec<NodeId>,
}

/// Solve the knapsack of `s` with items scanned in the given order.
pub fn solve_service_2d(
    g: &LayeredGraph,
    t: &Taxonomy,
    s: NodeId,
    items: &[NodeId],
    records: &[Option<CompositionRecord>],
    rule: CostRule,
    max_input_bits: u32,
) -> Result<ReferenceOutcome> {
    let base = g.node(s).inputs.as_slice();
    let table = gen_subsets(g.id(s), base, max_input_bits)?;
    let vcap = table.capacity();
    let n = items.len();

    let mut cost: Vec<Vec<Option<u64>>> = vec![vec![None; vcap + 1]; n + 1];
    let mut chosen: Vec<Vec<Vec<NodeId>>> = vec![vec![Vec::new(); vcap + 1]; n + 1];
    cost[0][0] = Some(0);

    for i in 1..=n {
        let item = items[i - 1];
        cost[i][0] = Some(0);
        for v in 1..=vcap {
            cost[i][v] = cost[i - 1][v];
            chosen[i][v] = chosen[i - 1][v].clone();

            let volume = dv(g.node(item), base, &table, v, t);
            if volume == 0 {
                continue;
            }
            let Some(below) = cost[i - 1][v - volume] else {
                continue;
            };
            let mut item_cost = dc(item, &chosen[i - 1][v - volume], records)? as u64;
            if rule == CostRule::PlusOne {
                item_cost += 1;
            }
            let better = match cost[i][v] {
                None => true,
                Some(c) => below + item_cost < c,
            };
            if better {
                cost[i][v] = Some(below + item_cost);
                let mut sel = chosen[i - 1][v - volume].clone();
                sel.push(item);
                sel.sort_unstable();
                chosen[i][v] = sel;
            }
        }
    }

    Ok(ReferenceOutcome {
        cost: cost[n][vcap],
        chosen: chosen[n][vcap].clone(),
    })
}
