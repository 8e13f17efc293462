//! Batch evaluation of the solver against the exhaustive oracle and the
//! greedy baseline over generated instances.

use serde::Serialize;

use crate::error::Result;
use crate::graph::{build_graph_with, GraphOptions, LayeredGraph, NodeId};
use crate::io::{generate, GenParams, ProblemBundle};
use crate::oracle::{closure_replay, greedy_baseline, oracle_min, per_step_oracle, PER_STEP_LIMIT};
use crate::report::run;
use crate::solver::{order_items, solve, solve_service_2d, trace_service, SolveResult, SolverConfig};
use crate::ontology::Taxonomy;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InstanceEval {
    pub name: String,
    pub seed: Option<u64>,
    pub services: usize,
    pub solver: usize,
    pub oracle: usize,
    pub greedy: usize,
    /// The solver's plan replays from the provided concepts to the wanted ones.
    pub feasible: bool,
    /// Solver length on the graph without the backward pruning sweep.
    pub unpruned: usize,
    /// Every knapsack agrees between the rolling and the two-dimensional DP.
    pub dp_agree: bool,
    /// Knapsacks whose DP value exceeds the per-step enumeration optimum.
    pub step_gaps: usize,
}

/// Compare the rolling DP with the two-dimensional reference on every
/// knapsack of a solved graph. Returns the number of disagreements.
pub fn dp_disagreements(g: &LayeredGraph, t: &Taxonomy, result: &SolveResult, cfg: &SolverConfig) -> Result<usize> {
    let mut bad = 0;
    for s in g.nodes().filter(|&s| s != NodeId::SOURCE) {
        let precs = g.precursors(s);
        let items = order_items(g, t, s, &precs, &result.records, cfg.order)?;
        let trace = trace_service(g, t, s, &result.records, cfg)?;
        let vcap = (1usize << g.node(s).inputs.len()) - 1;
        let one_d = trace
            .states
            .iter()
            .find(|(v, _, _)| *v == vcap)
            .map(|(_, c, items)| (Some(*c), items.clone()))
            .unwrap_or((None, Vec::new()));
        let two_d = solve_service_2d(g, t, s, &items, &result.records, cfg.cost_rule, cfg.max_input_bits)?;
        if one_d != (two_d.cost, two_d.chosen) {
            bad += 1;
        }
    }
    Ok(bad)
}

/// Knapsacks whose DP optimum is above the enumeration optimum.
pub fn step_gaps(g: &LayeredGraph, t: &Taxonomy, result: &SolveResult) -> Result<usize> {
    let mut gaps = 0;
    for s in g.nodes().filter(|&s| s != NodeId::SOURCE && !g.node(s).inputs.is_empty()) {
        let precs = g.precursors(s);
        if precs.len() > PER_STEP_LIMIT {
            continue;
        }
        let best = per_step_oracle(g, t, s, &precs, &result.records)?;
        let rec = result.record(s).expect("solved");
        if rec.dp_cost as usize > best {
            gaps += 1;
        }
    }
    Ok(gaps)
}

pub fn evaluate(bundle: &ProblemBundle, cfg: &SolverConfig, limit: usize) -> Result<InstanceEval> {
    let (t, repo, req) = (&bundle.taxonomy, &bundle.repository, &bundle.request);
    let r = run(bundle, cfg)?;
    let services: Vec<_> = r.result.composition().iter().map(|&s| r.graph.node(s).clone()).collect();
    let feasible = r.plan.replay(&r.graph, t) && closure_replay(services.iter(), req, t);

    let unpruned_graph = build_graph_with(repo, req, t, GraphOptions { skip_pruning: true })?;
    let unpruned = solve(&unpruned_graph, t, cfg)?.c_services();

    Ok(InstanceEval {
        name: bundle.metadata.name.clone(),
        seed: bundle.metadata.seed,
        services: repo.len(),
        solver: r.result.c_services(),
        oracle: oracle_min(repo, req, t, limit)?.optimal_len,
        greedy: greedy_baseline(repo, req, t)?.len(),
        feasible,
        unpruned,
        dp_agree: dp_disagreements(&r.graph, t, &r.result, cfg)? == 0,
        step_gaps: step_gaps(&r.graph, t, &r.result)?,
    })
}

/// Generate and evaluate one instance per seed. Instances are independent,
/// so they are spread over the thread pool when `cfg.threads != 1`; the
/// solver itself runs sequentially inside each instance.
pub fn evaluate_seeds(
    seeds: impl IntoIterator<Item = u64>,
    params: &GenParams,
    cfg: &SolverConfig,
    limit: usize,
) -> Result<Vec<InstanceEval>> {
    let seeds: Vec<u64> = seeds.into_iter().collect();
    let inner = SolverConfig {
        threads: 1,
        ..cfg.clone()
    };
    let one = |&seed: &u64| -> Result<InstanceEval> {
        let bundle = generate(seed, params)?.resolve()?;
        evaluate(&bundle, &inner, limit)
    };

    #[cfg(feature = "parallel")]
    if cfg.threads != 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| crate::Error::Internal(format!("thread pool: {e}")))?;
        return pool.install(|| seeds.par_iter().map(one).collect());
    }
    seeds.iter().map(one).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareSummary {
    pub instances: usize,
    pub feasible: usize,
    pub solver_below_oracle: usize,
    pub solver_optimal: usize,
    pub optimal_rate: f64,
    pub mean_gap: f64,
    pub max_gap: usize,
    pub greedy_optimal: usize,
    pub greedy_mean_gap: f64,
    pub pruning_neutral: usize,
    pub dp_agree: usize,
    pub knapsacks_above_enumeration: usize,
}

impl CompareSummary {
    pub fn from_evals(evals: &[InstanceEval]) -> Self {
        let n = evals.len();
        let gap = |e: &InstanceEval| e.solver.saturating_sub(e.oracle);
        let rate = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
        let solver_optimal = evals.iter().filter(|e| e.solver == e.oracle).count();
        CompareSummary {
            instances: n,
            feasible: evals.iter().filter(|e| e.feasible).count(),
            solver_below_oracle: evals.iter().filter(|e| e.solver < e.oracle).count(),
            solver_optimal,
            optimal_rate: rate(solver_optimal),
            mean_gap: rate(evals.iter().map(gap).sum()),
            max_gap: evals.iter().map(gap).max().unwrap_or(0),
            greedy_optimal: evals.iter().filter(|e| e.greedy == e.oracle).count(),
            greedy_mean_gap: rate(evals.iter().map(|e| e.greedy.saturating_sub(e.oracle)).sum()),
            pruning_neutral: evals.iter().filter(|e| e.unpruned == e.solver).count(),
            dp_agree: evals.iter().filter(|e| e.dp_agree).count(),
            knapsacks_above_enumeration: evals.iter().map(|e| e.step_gaps).sum(),
        }
    }
}
