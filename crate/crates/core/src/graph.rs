//! Layered service dependency graph.
//!
//! Construction runs a forward fixed point from the request's provided
//! concepts (each layer holds the services whose inputs are all matched by
//! what earlier layers produce) followed by a backward sweep that drops
//! services contributing nothing to the wanted outputs.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::ontology::{Availability, ConceptId, ConceptSet, Taxonomy};

pub const SOURCE_ID: &str = "s_o";
pub const SINK_ID: &str = "s_k";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Service {
    pub id: String,
    pub inputs: ConceptSet,
    pub outputs: ConceptSet,
}

impl Service {
    pub fn new(id: impl Into<String>, inputs: ConceptSet, outputs: ConceptSet) -> Self {
        Service {
            id: id.into(),
            inputs,
            outputs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Request {
    pub provided: ConceptSet,
    pub wanted: ConceptSet,
}

impl Request {
    pub fn new(provided: ConceptSet, wanted: ConceptSet) -> Result<Self> {
        if wanted.is_empty() {
            return Err(Error::InvalidRequest("wanted concept set is empty".into()));
        }
        Ok(Request { provided, wanted })
    }
}

/// Service collection kept in id order.
#[derive(Clone, Debug, Default)]
pub struct Repository {
    services: Vec<Service>,
}

impl Repository {
    pub fn new(mut services: Vec<Service>) -> Result<Self> {
        services.sort_by(|a, b| a.id.cmp(&b.id));
        for w in services.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::InvalidRepository(format!("duplicate service id `{}`", w[0].id)));
            }
        }
        for s in &services {
            if s.id.is_empty() {
                return Err(Error::InvalidRepository("service with empty id".into()));
            }
            if s.id == SOURCE_ID || s.id == SINK_ID {
                return Err(Error::InvalidRepository(format!("service id `{}` is reserved", s.id)));
            }
        }
        Ok(Repository { services })
    }

    pub fn services(&self) -> &[Service] {
        &self.services
    }

    pub fn len(&self) -> usize {
        self.services.len()
    }

    pub fn is_empty(&self) -> bool {
        self.services.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Service> {
        self.services
            .binary_search_by(|s| s.id.as_str().cmp(id))
            .ok()
            .map(|k| &self.services[k])
    }
}

/// Dense handle of a node inside one [`LayeredGraph`].
///
/// Node order follows id order: the source is always 0, the sink is always
/// the last node, concrete services sit between them sorted by id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const SOURCE: NodeId = NodeId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct GraphOptions {
    /// Run the backward pruning sweep (on by default).
    pub skip_pruning: bool,
}

#[derive(Clone, Debug)]
pub struct LayeredGraph {
    nodes: Vec<Service>,
    layers: Vec<Vec<NodeId>>,
    layer_of: Vec<usize>,
    // concept -> nodes having an output that matches it
    providers: HashMap<ConceptId, Vec<NodeId>>,
    forward_services: usize,
}

/// Build the pruned layered graph for `req` over `repo`.
pub fn build_graph(repo: &Repository, req: &Request, t: &Taxonomy) -> Result<LayeredGraph> {
    build_graph_with(repo, req, t, GraphOptions::default())
}

pub fn build_graph_with(
    repo: &Repository,
    req: &Request,
    t: &Taxonomy,
    opts: GraphOptions,
) -> Result<LayeredGraph> {
    let services = repo.services();
    let n = services.len();

    // forward phase; each layer is judged against the outputs of earlier
    // layers only, so no service depends on a peer in its own layer
    let mut available = Availability::new(t);
    available.add_all(t, req.provided.iter());
    let mut placed = vec![false; n];
    let mut layers: Vec<Vec<usize>> = Vec::new();
    while !available.covers(&req.wanted) {
        let layer: Vec<usize> = (0..n)
            .filter(|&k| !placed[k] && available.covers(&services[k].inputs))
            .collect();
        if layer.is_empty() {
            let uncovered = req.wanted.iter().filter(|&c| !available.is_matched(c));
            return Err(Error::UnsatisfiableRequest {
                uncovered: t.names_of(uncovered),
            });
        }
        for &k in &layer {
            placed[k] = true;
            available.add_all(t, services[k].outputs.iter());
        }
        layers.push(layer);
    }
    let forward_services = layers.iter().map(Vec::len).sum();

    // backward phase; the dummies are never dropped
    if !opts.skip_pruning {
        let mut needed = FixedBitSet::with_capacity(t.len());
        for c in &req.wanted {
            needed.insert(c.index());
        }
        for layer in layers.iter_mut().rev() {
            layer.retain(|&k| {
                services[k]
                    .outputs
                    .iter()
                    .any(|o| t.ancestors(o).iter().any(|a| needed.contains(a.index())))
            });
            for &k in layer.iter() {
                for c in &services[k].inputs {
                    needed.insert(c.index());
                }
            }
        }
        layers.retain(|l| !l.is_empty());
    }

    // renumber: source, kept services in id order, sink
    let mut kept: Vec<usize> = layers.iter().flatten().copied().collect();
    kept.sort_unstable();
    let mut local = vec![usize::MAX; n];
    let mut nodes = Vec::with_capacity(kept.len() + 2);
    nodes.push(Service::new(SOURCE_ID, ConceptSet::new(), req.provided.clone()));
    for &k in &kept {
        local[k] = nodes.len();
        nodes.push(services[k].clone());
    }
    let sink = NodeId(nodes.len() as u32);
    nodes.push(Service::new(SINK_ID, req.wanted.clone(), ConceptSet::new()));

    let mut graph_layers = Vec::with_capacity(layers.len() + 2);
    graph_layers.push(vec![NodeId::SOURCE]);
    for layer in &layers {
        graph_layers.push(layer.iter().map(|&k| NodeId(local[k] as u32)).collect());
    }
    graph_layers.push(vec![sink]);

    let mut layer_of = vec![0; nodes.len()];
    for (li, layer) in graph_layers.iter().enumerate() {
        for &s in layer {
            layer_of[s.index()] = li;
        }
    }

    let mut providers: HashMap<ConceptId, Vec<NodeId>> = HashMap::new();
    for (k, node) in nodes.iter().enumerate() {
        let mut reach: Vec<ConceptId> = node
            .outputs
            .iter()
            .flat_map(|o| t.ancestors(o).iter().copied())
            .collect();
        reach.sort_unstable();
        reach.dedup();
        for c in reach {
            providers.entry(c).or_default().push(NodeId(k as u32));
        }
    }

    Ok(LayeredGraph {
        nodes,
        layers: graph_layers,
        layer_of,
        providers,
        forward_services,
    })
}

impl LayeredGraph {
    pub fn layers(&self) -> &[Vec<NodeId>] {
        &self.layers
    }

    pub fn node(&self, s: NodeId) -> &Service {
        &self.nodes[s.index()]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn sink(&self) -> NodeId {
        NodeId(self.nodes.len() as u32 - 1)
    }

    pub fn is_dummy(&self, s: NodeId) -> bool {
        s == NodeId::SOURCE || s == self.sink()
    }

    pub fn layer_of(&self, s: NodeId) -> usize {
        self.layer_of[s.index()]
    }

    pub fn id(&self, s: NodeId) -> &str {
        &self.nodes[s.index()].id
    }

    pub fn find(&self, id: &str) -> Result<NodeId> {
        self.nodes
            .iter()
            .position(|n| n.id == id)
            .map(|k| NodeId(k as u32))
            .ok_or_else(|| Error::NotInGraph(id.to_string()))
    }

    /// Concrete services in the graph, dummies excluded.
    pub fn size(&self) -> usize {
        self.nodes.len() - 2
    }

    /// Concrete services placed by the forward phase, before pruning.
    pub fn forward_size(&self) -> usize {
        self.forward_services
    }

    /// Earlier-layer nodes with at least one output matching an input of `s`,
    /// in node order.
    pub fn precursors(&self, s: NodeId) -> Vec<NodeId> {
        let layer = self.layer_of(s);
        let mut out: Vec<NodeId> = self.nodes[s.index()]
            .inputs
            .iter()
            .filter_map(|c| self.providers.get(&c))
            .flatten()
            .copied()
            .filter(|&p| self.layer_of(p) < layer)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn precursors_of(&self, id: &str) -> Result<Vec<NodeId>> {
        Ok(self.precursors(self.find(id)?))
    }

    pub fn layer_ids(&self) -> Vec<Vec<String>> {
        self.layers
            .iter()
            .map(|l| l.iter().map(|&s| self.id(s).to_string()).collect())
            .collect()
    }
}
