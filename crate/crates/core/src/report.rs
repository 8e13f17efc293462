//! Run records in the vocabulary of the evaluation tables: `#C.Services`,
//! `C.Time`, `G.Size`, `G.Time` and `Tot.Time`.

use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::graph::{build_graph, LayeredGraph};
use crate::io::ProblemBundle;
use crate::solver::{extract_plan, solve, CostRule, ItemOrder, Plan, SolveResult, SolverConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timings {
    pub g_time_ms: f64,
    pub c_time_ms: f64,
    pub tot_time_ms: f64,
}

impl Timings {
    fn new(g_us: u128, c_us: u128) -> Self {
        Timings {
            g_time_ms: g_us as f64 / 1000.0,
            c_time_ms: c_us as f64 / 1000.0,
            tot_time_ms: (g_us + c_us) as f64 / 1000.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverSummary {
    pub order: ItemOrder,
    pub cost_rule: CostRule,
    pub threads: usize,
    pub knapsacks: usize,
    pub max_items: usize,
    pub max_vcap: u64,
    pub relaxations: u64,
    pub improvements: u64,
}

impl SolverSummary {
    fn new(result: &SolveResult, cfg: &SolverConfig) -> Self {
        SolverSummary {
            order: result.order,
            cost_rule: result.cost_rule,
            threads: cfg.threads,
            knapsacks: result.stats.len(),
            max_items: result.stats.iter().map(|s| s.items).max().unwrap_or(0),
            max_vcap: result.stats.iter().map(|s| s.vcap).max().unwrap_or(0),
            relaxations: result.stats.iter().map(|s| s.relaxations).sum(),
            improvements: result.stats.iter().map(|s| s.improvements).sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComposeOutput {
    pub name: String,
    /// `#C.Services`: concrete services in the composition.
    pub c_services: usize,
    /// Composition length counting the source and sink dummies.
    pub len_with_dummies: usize,
    pub services: Vec<String>,
    pub plan: Vec<Vec<String>>,
    /// `G.Size`: concrete services in the pruned graph.
    pub g_size: usize,
    pub g_size_before_pruning: usize,
    pub layers: Vec<Vec<String>>,
    pub solver: SolverSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

/// Everything one composition run produces.
pub struct Run {
    pub graph: LayeredGraph,
    pub result: SolveResult,
    pub plan: Plan,
    pub g_us: u128,
    pub c_us: u128,
}

/// Build the graph, solve it and extract the plan, timing the graph phase
/// and the extraction phase separately.
pub fn run(bundle: &ProblemBundle, cfg: &SolverConfig) -> Result<Run> {
    let t0 = Instant::now();
    let graph = build_graph(&bundle.repository, &bundle.request, &bundle.taxonomy)?;
    let g_us = t0.elapsed().as_micros();
    let t1 = Instant::now();
    let result = solve(&graph, &bundle.taxonomy, cfg)?;
    let plan = extract_plan(&result, &graph);
    let c_us = t1.elapsed().as_micros();
    Ok(Run {
        graph,
        result,
        plan,
        g_us,
        c_us,
    })
}

pub fn compose(bundle: &ProblemBundle, cfg: &SolverConfig, with_timings: bool) -> Result<ComposeOutput> {
    let r = run(bundle, cfg)?;
    let g = &r.graph;
    Ok(ComposeOutput {
        name: bundle.metadata.name.clone(),
        c_services: r.result.c_services(),
        len_with_dummies: r.result.len_with_dummies(),
        services: r.result.composition().iter().map(|&s| g.id(s).to_string()).collect(),
        plan: r.plan.ids(g),
        g_size: g.size(),
        g_size_before_pruning: g.forward_size(),
        layers: g.layer_ids(),
        solver: SolverSummary::new(&r.result, cfg),
        timings: with_timings.then(|| Timings::new(r.g_us, r.c_us)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub name: String,
    pub c_services: usize,
    pub g_size: usize,
    pub c_time_ms: f64,
    pub g_time_ms: f64,
    pub tot_time_ms: f64,
    pub order: ItemOrder,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub protocol: String,
    pub warmups: usize,
    pub runs: usize,
    pub rows: Vec<BenchRow>,
}

fn median(mut xs: Vec<u128>) -> u128 {
    xs.sort_unstable();
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2
    }
}

pub fn bench_bundle(bundle: &ProblemBundle, cfg: &SolverConfig, warmups: usize, runs: usize) -> Result<BenchRow> {
    for _ in 0..warmups {
        run(bundle, cfg)?;
    }
    let runs = runs.max(1);
    let mut g = Vec::with_capacity(runs);
    let mut c = Vec::with_capacity(runs);
    let mut last = None;
    for _ in 0..runs {
        let r = run(bundle, cfg)?;
        g.push(r.g_us);
        c.push(r.c_us);
        last = Some(r);
    }
    let last = last.expect("at least one run");
    let t = Timings::new(median(g), median(c));
    Ok(BenchRow {
        name: bundle.metadata.name.clone(),
        c_services: last.result.c_services(),
        g_size: last.graph.size(),
        c_time_ms: t.c_time_ms,
        g_time_ms: t.g_time_ms,
        tot_time_ms: t.tot_time_ms,
        order: cfg.order,
        seed: bundle.metadata.seed,
    })
}

impl BenchReport {
    pub fn new(warmups: usize, runs: usize, rows: Vec<BenchRow>) -> Self {
        BenchReport {
            protocol: format!("median of {runs} runs after {warmups} warm-ups; wall clock, milliseconds"),
            warmups,
            runs,
            rows,
        }
    }

    /// Datasets as columns, metrics as rows.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let head: Vec<&str> = self.rows.iter().map(|r| r.name.as_str()).collect();
        let width = head.iter().map(|h| h.len()).max().unwrap_or(0).max(9);
        let line = |label: &str, cells: Vec<String>| {
            let mut l = format!("{label:<13}");
            for c in cells {
                l.push_str(&format!(" {c:>width$}"));
            }
            l.push('\n');
            l
        };
        out.push_str(&line("Dataset", head.iter().map(|h| h.to_string()).collect()));
        out.push_str(&line("#C.Services", self.rows.iter().map(|r| r.c_services.to_string()).collect()));
        out.push_str(&line("C.Time (ms)", self.rows.iter().map(|r| format!("{:.3}", r.c_time_ms)).collect()));
        out.push_str(&line("G.Size", self.rows.iter().map(|r| r.g_size.to_string()).collect()));
        out.push_str(&line("G.Time (ms)", self.rows.iter().map(|r| format!("{:.3}", r.g_time_ms)).collect()));
        out.push_str(&line("Tot.Time (ms)", self.rows.iter().map(|r| format!("{:.3}", r.tot_time_ms)).collect()));
        out
    }
}
