//! Knapsack-variant composition solver.
//!
//! Every non-source node of the layered graph is treated as a knapsack whose
//! capacity is its input set, encoded as the bit mask `2^|In| - 1`. Its
//! precursors are the items. An item's volume at state `v` is the mask of the
//! inputs in `v` its outputs match, and its cost is the number of services in
//! its own composition that the items already selected at `v - volume` do not
//! invoke yet. Both depend on the DP state, so they are recomputed on every
//! relaxation. Layers are processed in order; a node only reads records of
//! strictly earlier layers, so nodes of one layer can be solved concurrently.

mod reference;
mod subsets;

use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{LayeredGraph, NodeId};
use crate::ontology::{Availability, Taxonomy};

pub use reference::{solve_service_2d, ReferenceOutcome};
pub use subsets::{dc, dv, gen_subsets, SubsetTable, DEFAULT_MAX_INPUT_BITS};

/// Order in which a knapsack's items are scanned.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemOrder {
    /// Shorter precursor compositions first, ties by id.
    #[default]
    Len,
    /// Plain id order.
    Id,
    /// Precursors matching more of the knapsack's inputs first, then `Len`.
    Input,
}

impl std::str::FromStr for ItemOrder {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "len" => Ok(ItemOrder::Len),
            "id" => Ok(ItemOrder::Id),
            "input" => Ok(ItemOrder::Input),
            other => Err(format!("unknown item order `{other}` (expected len, id or input)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CostRule {
    /// Count of not-yet-invoked services in the item's composition.
    #[default]
    NewServices,
    /// The same count plus one per item.
    PlusOne,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub order: ItemOrder,
    pub cost_rule: CostRule,
    pub max_input_bits: u32,
    /// 1 runs sequentially; 0 uses every available core.
    pub threads: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            order: ItemOrder::Len,
            cost_rule: CostRule::NewServices,
            max_input_bits: DEFAULT_MAX_INPUT_BITS,
            threads: 1,
        }
    }
}

/// Best composition found that ends at `service`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositionRecord {
    pub service: NodeId,
    /// Every service of the composition, the node itself included.
    pub servs: FixedBitSet,
    pub len: usize,
    /// Items selected for the full knapsack, in node order.
    pub chosen: Vec<NodeId>,
    /// Final DP value for the full knapsack.
    pub dp_cost: u64,
}

impl CompositionRecord {
    fn source(nodes: usize) -> Self {
        let mut servs = FixedBitSet::with_capacity(nodes);
        servs.insert(NodeId::SOURCE.index());
        CompositionRecord {
            service: NodeId::SOURCE,
            servs,
            len: 1,
            chosen: Vec::new(),
            dp_cost: 0,
        }
    }

    pub fn services(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.servs.ones().map(|k| NodeId(k as u32))
    }
}

/// Per-knapsack counters for the bench report.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StepStats {
    pub service: String,
    pub layer: usize,
    pub items: usize,
    pub vcap: u64,
    pub relaxations: u64,
    pub improvements: u64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub records: Vec<Option<CompositionRecord>>,
    pub sink: NodeId,
    pub stats: Vec<StepStats>,
    pub order: ItemOrder,
    pub cost_rule: CostRule,
}

impl SolveResult {
    pub fn final_record(&self) -> &CompositionRecord {
        self.records[self.sink.index()]
            .as_ref()
            .expect("solve always records the sink")
    }

    pub fn record(&self, s: NodeId) -> Option<&CompositionRecord> {
        self.records.get(s.index()).and_then(Option::as_ref)
    }

    /// Composition length including both dummies.
    pub fn len_with_dummies(&self) -> usize {
        self.final_record().len
    }

    /// Number of concrete services in the final composition.
    pub fn c_services(&self) -> usize {
        self.len_with_dummies() - 2
    }

    /// Concrete services of the final composition, in node order.
    pub fn composition(&self) -> Vec<NodeId> {
        let sink = self.sink;
        self.final_record()
            .services()
            .filter(|&s| s != NodeId::SOURCE && s != sink)
            .collect()
    }
}

/// Items of one knapsack, in the order the DP scans them.
pub fn order_items(
    g: &LayeredGraph,
    t: &Taxonomy,
    s: NodeId,
    precs: &[NodeId],
    records: &[Option<CompositionRecord>],
    order: ItemOrder,
) -> Result<Vec<NodeId>> {
    let len_of = |p: NodeId| -> Result<usize> {
        records
            .get(p.index())
            .and_then(Option::as_ref)
            .map(|r| r.len)
            .ok_or_else(|| Error::Internal(format!("precursor `{}` of `{}` has no record", g.id(p), g.id(s))))
    };
    let mut keyed = Vec::with_capacity(precs.len());
    for &p in precs {
        let key = match order {
            ItemOrder::Len => (0, len_of(p)?),
            ItemOrder::Id => (0, 0),
            ItemOrder::Input => {
                let hits = t.matched_inputs(&g.node(p).outputs, &g.node(s).inputs).len();
                (usize::MAX - hits, len_of(p)?)
            }
        };
        keyed.push((key, p));
    }
    keyed.sort_unstable();
    Ok(keyed.into_iter().map(|(_, p)| p).collect())
}

#[derive(Debug)]
struct Selection {
    items: Vec<NodeId>,
    union: FixedBitSet,
}

struct Knapsack {
    cost: Vec<u64>,
    chosen: Vec<Arc<Selection>>,
    relaxations: u64,
    improvements: u64,
}

const INF: u64 = u64::MAX;

fn input_mask(g: &LayeredGraph, t: &Taxonomy, item: NodeId, s: NodeId) -> usize {
    let base = g.node(s).inputs.as_slice();
    let outs = &g.node(item).outputs;
    base.iter()
        .enumerate()
        .filter(|&(_, &i)| outs.iter().any(|o| t.matches(o, i)))
        .fold(0usize, |m, (bit, _)| m | (1 << bit))
}

fn run_knapsack(
    g: &LayeredGraph,
    t: &Taxonomy,
    s: NodeId,
    items: &[NodeId],
    records: &[Option<CompositionRecord>],
    cfg: &SolverConfig,
) -> Result<Knapsack> {
    let width = g.node(s).inputs.len();
    subsets::check_width(g.id(s), width, cfg.max_input_bits)?;
    let vcap = (1usize << width) - 1;
    let extra = match cfg.cost_rule {
        CostRule::NewServices => 0,
        CostRule::PlusOne => 1,
    };

    let empty = Arc::new(Selection {
        items: Vec::new(),
        union: FixedBitSet::with_capacity(g.node_count()),
    });
    let mut cost = vec![INF; vcap + 1];
    cost[0] = 0;
    let mut prev: Vec<Arc<Selection>> = vec![empty; vcap + 1];
    let mut relaxations = 0;
    let mut improvements = 0;

    for &item in items {
        let item_servs = &records[item.index()]
            .as_ref()
            .ok_or_else(|| Error::Internal(format!("item `{}` has no record", g.id(item))))?
            .servs;
        let mask = input_mask(g, t, item, s);
        let mut cur = prev.clone();
        for v in (1..=vcap).rev() {
            let volume = mask & v;
            if volume == 0 {
                continue;
            }
            debug_assert_eq!(volume & v, volume);
            let rest = v - volume;
            debug_assert_eq!(rest, v & !volume);
            if cost[rest] == INF {
                continue;
            }
            let below = &prev[rest];
            let item_cost = item_servs.difference(&below.union).count() as u64 + extra;
            relaxations += 1;
            if cost[rest] + item_cost < cost[v] {
                cost[v] = cost[rest] + item_cost;
                let mut items = below.items.clone();
                let pos = items.binary_search(&item).unwrap_or_else(|p| p);
                items.insert(pos, item);
                let mut union = below.union.clone();
                union.union_with(item_servs);
                cur[v] = Arc::new(Selection { items, union });
                improvements += 1;
            }
        }
        prev = cur;
    }

    Ok(Knapsack {
        cost,
        chosen: prev,
        relaxations,
        improvements,
    })
}

/// Solve the knapsack of `s` given records for all of its precursors.
pub fn solve_service(
    g: &LayeredGraph,
    t: &Taxonomy,
    s: NodeId,
    precs: &[NodeId],
    records: &[Option<CompositionRecord>],
    cfg: &SolverConfig,
) -> Result<(CompositionRecord, StepStats)> {
    let n = g.node_count();
    let mut stats = StepStats {
        service: g.id(s).to_string(),
        layer: g.layer_of(s),
        ..StepStats::default()
    };

    // no inputs: invocable straight from the source
    if g.node(s).inputs.is_empty() {
        let mut servs = FixedBitSet::with_capacity(n);
        servs.insert(NodeId::SOURCE.index());
        servs.insert(s.index());
        let record = CompositionRecord {
            service: s,
            servs,
            len: 2,
            chosen: vec![NodeId::SOURCE],
            dp_cost: 1,
        };
        return Ok((record, stats));
    }

    let items = order_items(g, t, s, precs, records, cfg.order)?;
    let ks = run_knapsack(g, t, s, &items, records, cfg)?;
    let vcap = ks.cost.len() - 1;
    stats.items = items.len();
    stats.vcap = vcap as u64;
    stats.relaxations = ks.relaxations;
    stats.improvements = ks.improvements;

    if ks.cost[vcap] == INF {
        return Err(Error::UncoverableInputs(g.id(s).to_string()));
    }
    let full = &ks.chosen[vcap];
    let mut servs = full.union.clone();
    servs.insert(s.index());
    let record = CompositionRecord {
        service: s,
        len: servs.count_ones(..),
        servs,
        chosen: full.items.clone(),
        dp_cost: ks.cost[vcap],
    };
    if cfg.cost_rule == CostRule::NewServices && record.len as u64 != record.dp_cost + 1 {
        return Err(Error::Internal(format!(
            "composition of `{}` has {} services but DP cost {}",
            g.id(s),
            record.len,
            record.dp_cost
        )));
    }
    Ok((record, stats))
}

/// Every finite state of one knapsack after the last item, for inspection.
#[derive(Clone, Debug)]
pub struct KnapsackTrace {
    pub items: Vec<NodeId>,
    /// `(v, C[v], I[N][v])` for every state with finite cost.
    pub states: Vec<(usize, u64, Vec<NodeId>)>,
}

pub fn trace_service(
    g: &LayeredGraph,
    t: &Taxonomy,
    s: NodeId,
    records: &[Option<CompositionRecord>],
    cfg: &SolverConfig,
) -> Result<KnapsackTrace> {
    let precs = g.precursors(s);
    let items = order_items(g, t, s, &precs, records, cfg.order)?;
    let ks = run_knapsack(g, t, s, &items, records, cfg)?;
    let states = ks
        .cost
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c != INF)
        .map(|(v, &c)| (v, c, ks.chosen[v].items.clone()))
        .collect();
    Ok(KnapsackTrace { items, states })
}

/// Run the solver over every layer of `g`.
pub fn solve(g: &LayeredGraph, t: &Taxonomy, cfg: &SolverConfig) -> Result<SolveResult> {
    #[cfg(feature = "parallel")]
    if cfg.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
        return pool.install(|| solve_layers(g, t, cfg));
    }
    solve_layers(g, t, cfg)
}

fn solve_layers(g: &LayeredGraph, t: &Taxonomy, cfg: &SolverConfig) -> Result<SolveResult> {
    let mut records: Vec<Option<CompositionRecord>> = vec![None; g.node_count()];
    records[NodeId::SOURCE.index()] = Some(CompositionRecord::source(g.node_count()));
    let mut stats = Vec::new();

    for layer in &g.layers()[1..] {
        let solved = solve_layer(g, t, layer, &records, cfg)?;
        // published only once the whole layer is done
        for (record, step) in solved {
            let k = record.service.index();
            records[k] = Some(record);
            stats.push(step);
        }
    }

    Ok(SolveResult {
        records,
        sink: g.sink(),
        stats,
        order: cfg.order,
        cost_rule: cfg.cost_rule,
    })
}

fn solve_layer(
    g: &LayeredGraph,
    t: &Taxonomy,
    layer: &[NodeId],
    records: &[Option<CompositionRecord>],
    cfg: &SolverConfig,
) -> Result<Vec<(CompositionRecord, StepStats)>> {
    let one = |&s: &NodeId| solve_service(g, t, s, &g.precursors(s), records, cfg);
    #[cfg(feature = "parallel")]
    if cfg.threads != 1 {
        use rayon::prelude::*;
        return layer.par_iter().map(one).collect();
    }
    layer.iter().map(one).collect()
}

/// Invocation stages: services of one stage run in parallel, stages run in
/// sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Plan {
    pub stages: Vec<Vec<NodeId>>,
}

impl Plan {
    pub fn ids(&self, g: &LayeredGraph) -> Vec<Vec<String>> {
        self.stages
            .iter()
            .map(|st| st.iter().map(|&s| g.id(s).to_string()).collect())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.stages.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// Replay the stages from the provided concepts; every service must be
    /// invocable when its stage starts and the wanted concepts must be
    /// matched at the end.
    pub fn replay(&self, g: &LayeredGraph, t: &Taxonomy) -> bool {
        let mut available = Availability::new(t);
        available.add_all(t, g.node(NodeId::SOURCE).outputs.iter());
        for stage in &self.stages {
            if !stage.iter().all(|&s| available.covers(&g.node(s).inputs)) {
                return false;
            }
            for &s in stage {
                available.add_all(t, g.node(s).outputs.iter());
            }
        }
        available.covers(&g.node(g.sink()).inputs)
    }
}

/// Group the final composition's concrete services by graph layer.
pub fn extract_plan(result: &SolveResult, g: &LayeredGraph) -> Plan {
    let mut stages: Vec<Vec<NodeId>> = vec![Vec::new(); g.layers().len()];
    for s in result.composition() {
        stages[g.layer_of(s)].push(s);
    }
    stages.retain(|st| !st.is_empty());
    Plan { stages }
}
