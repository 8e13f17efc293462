//! Minimal-cardinality semantic web service composition.
//!
//! Given a concept taxonomy, a service repository and a request, the crate
//! builds a layered service dependency graph and then, layer by layer, solves
//! one dynamic knapsack per service: the service's inputs are the capacity,
//! its precursors are the items, and item volumes and costs are recomputed
//! from the DP state on every relaxation. The sink's knapsack yields the
//! final composition.
//!
//! ```
//! use svc_knapsack::io::BundleDoc;
//! use svc_knapsack::{report, SolverConfig};
//!
//! let doc: BundleDoc = serde_json::from_str(r#"{
//!     "taxonomy": {"concepts": [{"id": "a"}, {"id": "b"}, {"id": "c"}]},
//!     "repository": {"services": [
//!         {"id": "ab", "inputs": ["a"], "outputs": ["b"]},
//!         {"id": "bc", "inputs": ["b"], "outputs": ["c"]}
//!     ]},
//!     "request": {"provided": ["a"], "wanted": ["c"]}
//! }"#).unwrap();
//! let bundle = doc.resolve().unwrap();
//! let out = report::compose(&bundle, &SolverConfig::default(), false).unwrap();
//! assert_eq!(out.c_services, 2);
//! assert_eq!(out.plan, vec![vec!["ab"], vec!["bc"]]);
//! ```

pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod ontology;
pub mod oracle;
pub mod report;
pub mod solver;

pub use error::{Error, Result};
pub use graph::{build_graph, LayeredGraph, NodeId, Repository, Request, Service};
pub use ontology::{load_taxonomy, ConceptId, ConceptSet, Taxonomy};
pub use solver::{extract_plan, solve, CompositionRecord, ItemOrder, SolveResult, SolverConfig};
