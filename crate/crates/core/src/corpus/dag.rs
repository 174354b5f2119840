use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CorpusError, MetaCorpus, Stage};
use crate::graph::{self, Edges};

/// Name of the sink node standing for the model component.
pub const MODEL_NODE: &str = "MODEL";

const DEFAULT_DAG: &str = include_str!("../../assets/default_dag.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagEdge {
    pub from: String,
    pub to: String,
    pub support: u32,
}

/// Partial order over FE components, with `MODEL` as the single sink.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderDag {
    pub nodes: Vec<String>,
    pub edges: Vec<DagEdge>,
}

impl OrderDag {
    /// The hand-curated ordering shipped with the crate.
    pub fn default_asset() -> OrderDag {
        OrderDag::from_json(DEFAULT_DAG).expect("bundled DAG is valid")
    }

    pub fn from_json(s: &str) -> Result<OrderDag, CorpusError> {
        let dag: OrderDag =
            serde_json::from_str(s).map_err(|e| CorpusError::Asset(e.to_string()))?;
        dag.validate()?;
        Ok(dag)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    pub(crate) fn edge_set(&self) -> Edges {
        self.edges
            .iter()
            .map(|e| {
                (
                    self.index_of(&e.from).unwrap(),
                    self.index_of(&e.to).unwrap(),
                )
            })
            .collect()
    }

    pub fn is_acyclic(&self) -> bool {
        graph::is_acyclic(self.nodes.len(), &self.edge_set())
    }

    /// True when a path leads from `a` to `b`.
    pub fn precedes(&self, a: &str, b: &str) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => graph::reachability(self.nodes.len(), &self.edge_set())[i][j],
            _ => false,
        }
    }

    /// Checks the structural invariants: known endpoints, acyclic, `MODEL` is
    /// a sink reachable from every other node.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |m: String| Err(CorpusError::Asset(m));
        for e in &self.edges {
            if !self.contains(&e.from) || !self.contains(&e.to) {
                return bad(format!(
                    "edge {} -> {} has an unknown endpoint",
                    e.from, e.to
                ));
            }
        }
        let Some(model) = self.index_of(MODEL_NODE) else {
            return bad("DAG has no MODEL node".into());
        };
        if self.edges.iter().any(|e| e.from == MODEL_NODE) {
            return bad("MODEL must be a sink".into());
        }
        let edges = self.edge_set();
        if !graph::is_acyclic(self.nodes.len(), &edges) {
            return bad("DAG contains a cycle".into());
        }
        let reach = graph::reachability(self.nodes.len(), &edges);
        for (i, n) in self.nodes.iter().enumerate() {
            if i != model && !reach[i][model] {
                return bad(format!("{n} has no path to MODEL"));
            }
        }
        Ok(())
    }
}

/// Mines the relative order of FE components from a corpus.
///
/// For every pair of FE components that co-occur, an edge is added in the
/// majority direction when that direction holds in at least `min_support` of
/// the co-occurrences. Edges that would run from a post-detach component to a
/// pre-detach one are dropped. Remaining cycles are broken by removing the
/// lowest-support edge of each cycle (ties broken by name), every component
/// gets an edge to `MODEL`, and the result is transitively reduced.
pub fn mine_order_dag(corpus: &MetaCorpus, min_support: f64) -> OrderDag {
    let tax = &corpus.taxonomy;
    let mut nodes: Vec<String> = tax.fe_names().map(str::to_string).collect();
    nodes.push(MODEL_NODE.to_string());
    let n = nodes.len();
    let model = n - 1;
    let idx = |name: &str| nodes.iter().position(|x| x == name);

    let mut before = vec![vec![0u32; n]; n];
    let mut occurs = vec![0u32; n];
    for r in &corpus.records {
        let pos: Vec<usize> = r.fe_sequence.iter().filter_map(|l| idx(&l.name)).collect();
        for (i, &a) in pos.iter().enumerate() {
            occurs[a] += 1;
            for &b in &pos[i + 1..] {
                before[a][b] += 1;
            }
        }
    }

    let mut support: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for a in 0..model {
        for b in (a + 1)..model {
            let (ab, ba) = (before[a][b], before[b][a]);
            let total = ab + ba;
            if total == 0 || ab == ba {
                continue;
            }
            let (from, to, m) = if ab > ba { (a, b, ab) } else { (b, a, ba) };
            if (m as f64) / (total as f64) < min_support {
                continue;
            }
            let (sf, st) = (tax.stage(&nodes[from]), tax.stage(&nodes[to]));
            if sf == Some(Stage::PostDetach) && st == Some(Stage::PreDetach) {
                continue;
            }
            support.insert((from, to), m);
        }
    }

    loop {
        let edges: Edges = support.keys().copied().collect();
        let Some(cycle) = graph::find_cycle(n, &edges) else {
            break;
        };
        let weakest = cycle
            .into_iter()
            .min_by(|x, y| {
                support[x]
                    .cmp(&support[y])
                    .then_with(|| (&nodes[x.0], &nodes[x.1]).cmp(&(&nodes[y.0], &nodes[y.1])))
            })
            .unwrap();
        support.remove(&weakest);
    }

    for (a, &count) in occurs.iter().enumerate().take(model) {
        support.insert((a, model), count);
    }
    let reduced = graph::transitive_reduction(n, &support.keys().copied().collect());
    let edges = reduced
        .into_iter()
        .map(|(a, b)| DagEdge {
            from: nodes[a].clone(),
            to: nodes[b].clone(),
            support: support[&(a, b)],
        })
        .collect();
    OrderDag { nodes, edges }
}
