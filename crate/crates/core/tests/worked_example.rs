use std::path::PathBuf;

use svc_knapsack::graph::{build_graph, LayeredGraph, NodeId};
use svc_knapsack::io::{load_bundle, BundleSource, Format, ProblemBundle};
use svc_knapsack::oracle::{greedy_baseline, oracle_min, per_step_oracle};
use svc_knapsack::solver::{
    dc, dv, extract_plan, gen_subsets, solve, solve_service, solve_service_2d, order_items, SolveResult,
    SolverConfig,
};

fn fixture() -> ProblemBundle {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/worked_example.json");
    load_bundle(&BundleSource::Single(path), Format::Json).unwrap()
}

fn solved(b: &ProblemBundle) -> (LayeredGraph, SolveResult) {
    let g = build_graph(&b.repository, &b.request, &b.taxonomy).unwrap();
    let r = solve(&g, &b.taxonomy, &SolverConfig::default()).unwrap();
    (g, r)
}

fn ids(g: &LayeredGraph, nodes: &[NodeId]) -> Vec<String> {
    nodes.iter().map(|&s| g.id(s).to_string()).collect()
}

#[test]
fn bundle_has_eight_services() {
    let b = fixture();
    assert_eq!(b.repository.len(), 8);
    assert_eq!(b.taxonomy.len(), 10);
}

#[test]
fn graph_layers() {
    let b = fixture();
    let (g, _) = solved(&b);
    assert_eq!(
        g.layer_ids(),
        vec![
            vec!["s_o"],
            vec!["A", "B"],
            vec!["C", "D", "E", "F"],
            vec!["G"],
            vec!["s_k"],
        ]
    );
    // H was placed by the forward phase and then pruned
    assert_eq!(g.forward_size(), 8);
    assert_eq!(g.size(), 7);
}

#[test]
fn precursors_of_g() {
    let b = fixture();
    let (g, _) = solved(&b);
    assert_eq!(ids(&g, &g.precursors_of("G").unwrap()), vec!["C", "D", "E", "F"]);
    assert!(g.precursors(NodeId::SOURCE).is_empty());
}

#[test]
fn knapsack_of_g() {
    let b = fixture();
    let (g, r) = solved(&b);
    let gid = g.find("G").unwrap();
    let (rec, stats) = solve_service(&g, &b.taxonomy, gid, &g.precursors(gid), &r.records, &SolverConfig::default()).unwrap();
    assert_eq!(ids(&g, &rec.chosen), vec!["D", "E", "F"]);
    assert_eq!(rec.dp_cost, 6);
    assert_eq!(rec.len, 7);
    assert_eq!(stats.vcap, 15);
    assert_eq!(stats.items, 4);

    let best = per_step_oracle(&g, &b.taxonomy, gid, &g.precursors(gid), &r.records).unwrap();
    assert_eq!(best, 6);
}

#[test]
fn two_dimensional_reference_agrees_on_g() {
    let b = fixture();
    let (g, r) = solved(&b);
    let cfg = SolverConfig::default();
    let gid = g.find("G").unwrap();
    let items = order_items(&g, &b.taxonomy, gid, &g.precursors(gid), &r.records, cfg.order).unwrap();
    let out = solve_service_2d(&g, &b.taxonomy, gid, &items, &r.records, cfg.cost_rule, cfg.max_input_bits).unwrap();
    assert_eq!(out.cost, Some(6));
    assert_eq!(ids(&g, &out.chosen), vec!["D", "E", "F"]);
}

#[test]
fn volumes() {
    let b = fixture();
    let (g, _) = solved(&b);
    let t = &b.taxonomy;
    let gnode = g.node(g.find("G").unwrap());
    let base = gnode.inputs.as_slice();
    let table = gen_subsets("G", base, 24).unwrap();
    let item = |id: &str| g.node(g.find(id).unwrap());

    assert_eq!(dv(item("D"), base, &table, 15, t), 3);
    // c1 already taken out of the residual knapsack
    assert_eq!(dv(item("D"), base, &table, 14, t), 2);
    assert_eq!(dv(item("E"), base, &table, 15, t), 4);
    assert_eq!(dv(item("E"), base, &table, 4, t), 4);
    assert_eq!(dv(item("F"), base, &table, 15, t), 8);
    assert_eq!(dv(item("C"), base, &table, 15, t), 1);
    assert_eq!(dv(item("C"), base, &table, 14, t), 0);
}

#[test]
fn costs() {
    let b = fixture();
    let (g, r) = solved(&b);
    let n = |id: &str| g.find(id).unwrap();
    assert_eq!(dc(n("D"), &[], &r.records).unwrap(), 3);
    assert_eq!(dc(n("E"), &[n("D")], &r.records).unwrap(), 2);
    assert_eq!(dc(n("F"), &[n("D"), n("E")], &r.records).unwrap(), 1);
    assert_eq!(dc(n("D"), &[n("C")], &r.records).unwrap(), 1);
}

#[test]
fn final_composition_and_plan() {
    let b = fixture();
    let (g, r) = solved(&b);
    assert_eq!(r.len_with_dummies(), 8);
    assert_eq!(r.c_services(), 6);
    assert_eq!(ids(&g, &r.composition()), vec!["A", "B", "D", "E", "F", "G"]);
    let plan = extract_plan(&r, &g);
    assert_eq!(plan.ids(&g), vec![vec!["A", "B"], vec!["D", "E", "F"], vec!["G"]]);
    assert!(plan.replay(&g, &b.taxonomy));
}

#[test]
fn oracle_and_greedy() {
    let b = fixture();
    let o = oracle_min(&b.repository, &b.request, &b.taxonomy, 14).unwrap();
    assert_eq!(o.optimal_len, 6);
    assert_eq!(o.witness, vec!["A", "B", "D", "E", "F", "G"]);
    let greedy = greedy_baseline(&b.repository, &b.request, &b.taxonomy).unwrap();
    assert!(greedy.len() >= 6);
}
