//! Ordering of a skeleton's FE components against the mined order DAG.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::InstantiationError;
use crate::corpus::{OrderDag, Stage, Taxonomy, MODEL_NODE};
use crate::graph::{self, Edges};
use crate::predictor::FeComponent;

/// Component DAG of one skeleton. The last node is always `MODEL`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonDag {
    pub nodes: Vec<FeComponent>,
    edges: Edges,
}

impl SkeletonDag {
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.edges.iter().copied().collect()
    }

    pub fn edge_labels(&self) -> Vec<(&str, &str)> {
        self.edges
            .iter()
            .map(|&(a, b)| (self.nodes[a].label.as_str(), self.nodes[b].label.as_str()))
            .collect()
    }

    /// Longest-path depth from the sources.
    pub fn levels(&self) -> Vec<usize> {
        graph::levels(self.nodes.len(), &self.edges)
    }

    pub fn model_index(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn fe_labels(&self) -> Vec<&str> {
        self.nodes[..self.model_index()]
            .iter()
            .map(|n| n.label.as_str())
            .collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.label == label)
    }
}

/// Restricts the order DAG to the predicted components plus `MODEL`: `a`
/// precedes `b` when a path leads from `a` to `b` in `g`. The result is
/// transitively reduced.
pub fn construct_dag(
    components: &[FeComponent],
    g: &OrderDag,
) -> Result<SkeletonDag, InstantiationError> {
    for c in components {
        if !g.contains(&c.label) || c.label == MODEL_NODE {
            return Err(InstantiationError::UnknownComponent(c.label.clone()));
        }
    }
    let mut nodes = components.to_vec();
    nodes.push(FeComponent {
        label: MODEL_NODE.to_string(),
        prob: 1.0,
        columns: Vec::new(),
    });

    let global = g.edge_set();
    let reach = graph::reachability(g.nodes.len(), &global);
    let gi: Vec<usize> = nodes
        .iter()
        .map(|n| g.index_of(&n.label).expect("checked above"))
        .collect();
    let mut edges = Edges::new();
    for (i, &a) in gi.iter().enumerate() {
        for (j, &b) in gi.iter().enumerate() {
            if i != j && reach[a][b] {
                edges.insert((i, j));
            }
        }
    }
    let edges = graph::transitive_reduction(nodes.len(), &edges);
    Ok(SkeletonDag { nodes, edges })
}

fn column_key(c: &FeComponent) -> BTreeSet<&str> {
    c.columns.iter().map(String::as_str).collect()
}

/// Within every DAG level, components targeting exactly the same columns
/// are redundant: only the most probable one is kept (ties: higher corpus
/// frequency, then name). Removed nodes are bridged so their predecessors
/// still precede their successors. Repeats until no level has duplicates,
/// since removals can move nodes to a shallower level.
pub fn discard_redundant(
    dag: SkeletonDag,
    frequency: impl Fn(&str) -> usize,
) -> (SkeletonDag, Vec<String>) {
    let mut dag = dag;
    let mut removed = Vec::new();
    loop {
        let levels = dag.levels();
        let model = dag.model_index();
        let mut groups: BTreeMap<(usize, BTreeSet<&str>), Vec<usize>> = BTreeMap::new();
        for (i, n) in dag.nodes.iter().enumerate().take(model) {
            groups
                .entry((levels[i], column_key(n)))
                .or_default()
                .push(i);
        }
        let mut drop: BTreeSet<usize> = BTreeSet::new();
        for members in groups.values().filter(|m| m.len() > 1) {
            let keep = *members
                .iter()
                .min_by(|&&a, &&b| {
                    let (na, nb) = (&dag.nodes[a], &dag.nodes[b]);
                    nb.prob
                        .total_cmp(&na.prob)
                        .then_with(|| frequency(&nb.label).cmp(&frequency(&na.label)))
                        .then_with(|| na.label.cmp(&nb.label))
                })
                .unwrap();
            drop.extend(members.iter().copied().filter(|&m| m != keep));
        }
        if drop.is_empty() {
            return (dag, removed);
        }
        removed.extend(drop.iter().map(|&i| dag.nodes[i].label.clone()));
        dag = remove_nodes(&dag, &drop);
    }
}

fn remove_nodes(dag: &SkeletonDag, drop: &BTreeSet<usize>) -> SkeletonDag {
    let n = dag.nodes.len();
    // Bridging every removed node is equivalent to keeping reachability
    // among survivors, then reducing.
    let reach = graph::reachability(n, &dag.edges);
    let keep: Vec<usize> = (0..n).filter(|i| !drop.contains(i)).collect();
    let mut edges = Edges::new();
    for (ni, &a) in keep.iter().enumerate() {
        for (nj, &b) in keep.iter().enumerate() {
            if reach[a][b] {
                edges.insert((ni, nj));
            }
        }
    }
    let nodes: Vec<FeComponent> = keep.iter().map(|&i| dag.nodes[i].clone()).collect();
    let edges = graph::transitive_reduction(nodes.len(), &edges);
    SkeletonDag { nodes, edges }
}

/// Sort key among ready nodes: pre-detach before post-detach before the
/// model, then taxonomy priority, then name.
fn ready_key<'a>(n: &'a FeComponent, taxonomy: &Taxonomy) -> (u8, u32, &'a str) {
    if n.label == MODEL_NODE {
        return (2, u32::MAX, &n.label);
    }
    let stage = match taxonomy.stage(&n.label) {
        Some(Stage::PreDetach) => 0,
        _ => 1,
    };
    (stage, taxonomy.priority(&n.label), &n.label)
}

/// Kahn's algorithm with a deterministic choice among ready nodes.
pub fn total_order(
    dag: &SkeletonDag,
    taxonomy: &Taxonomy,
) -> Result<Vec<usize>, InstantiationError> {
    let n = dag.nodes.len();
    let mut indegree = vec![0usize; n];
    for &(_, b) in &dag.edges {
        indegree[b] += 1;
    }
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n)
            .filter(|&i| !done[i] && indegree[i] == 0)
            .min_by(|&a, &b| {
                ready_key(&dag.nodes[a], taxonomy).cmp(&ready_key(&dag.nodes[b], taxonomy))
            });
        let Some(v) = next else {
            return Err(InstantiationError::CycleDetected);
        };
        done[v] = true;
        order.push(v);
        for &(a, b) in &dag.edges {
            if a == v {
                indegree[b] -= 1;
            }
        }
    }
    Ok(order)
}

/// A skeleton after ordering and redundancy removal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderedSkeleton {
    pub fe_ordered: Vec<FeComponent>,
    pub model: String,
    pub model_rank: usize,
    /// Components discarded as redundant.
    pub removed: Vec<String>,
}

impl OrderedSkeleton {
    /// Labels in emission order, ending with the model.
    pub fn sequence(&self) -> Vec<&str> {
        self.fe_ordered
            .iter()
            .map(|c| c.label.as_str())
            .chain(std::iter::once(self.model.as_str()))
            .collect()
    }
}

/// Runs construction, redundancy removal and total ordering.
pub fn order_components(
    components: &[FeComponent],
    model: &str,
    model_rank: usize,
    g: &OrderDag,
    taxonomy: &Taxonomy,
    frequency: impl Fn(&str) -> usize,
) -> Result<OrderedSkeleton, InstantiationError> {
    let dag = construct_dag(components, g)?;
    let (dag, removed) = discard_redundant(dag, frequency);
    let order = total_order(&dag, taxonomy)?;
    let fe_ordered: Vec<FeComponent> = order
        .into_iter()
        .filter(|&i| i != dag.model_index())
        .map(|i| dag.nodes[i].clone())
        .collect();
    let mut seen_post = false;
    for c in &fe_ordered {
        match taxonomy.stage(&c.label) {
            Some(Stage::PostDetach) => seen_post = true,
            Some(Stage::PreDetach) if seen_post => {
                return Err(InstantiationError::StageConflict(c.label.clone()))
            }
            _ => {}
        }
    }
    Ok(OrderedSkeleton {
        fe_ordered,
        model: model.to_string(),
        model_rank,
        removed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(label: &str, prob: f64, cols: &[&str]) -> FeComponent {
        FeComponent {
            label: label.into(),
            prob,
            columns: cols.iter().map(|c| c.to_string()).collect(),
        }
    }

    #[test]
    fn empty_set_is_model_only() {
        let d = construct_dag(&[], &OrderDag::default_asset()).unwrap();
        assert_eq!(d.nodes.len(), 1);
        assert!(d.edges().is_empty());
        assert_eq!(total_order(&d, &Taxonomy::builtin()).unwrap(), vec![0]);
    }

    #[test]
    fn unrelated_nodes_share_level_zero() {
        let d = construct_dag(
            &[
                fe("OrdinalEncoder", 0.7, &["a"]),
                fe("OneHotEncoder", 0.6, &["b"]),
            ],
            &OrderDag::default_asset(),
        )
        .unwrap();
        assert_eq!(d.levels(), vec![0, 0, 1]);
    }

    #[test]
    fn unknown_component_is_rejected() {
        let err =
            construct_dag(&[fe("Nope", 0.9, &["a"])], &OrderDag::default_asset()).unwrap_err();
        assert!(matches!(err, InstantiationError::UnknownComponent(n) if n == "Nope"));
    }

    #[test]
    fn probability_tie_uses_frequency_then_name() {
        let g = OrderDag::default_asset();
        let comps = [
            fe("OrdinalEncoder", 0.7, &["c"]),
            fe("OneHotEncoder", 0.7, &["c"]),
        ];
        let freq = |n: &str| if n == "OneHotEncoder" { 10 } else { 3 };
        let (d, removed) = discard_redundant(construct_dag(&comps, &g).unwrap(), freq);
        assert_eq!(removed, ["OrdinalEncoder"]);
        assert_eq!(d.fe_labels(), ["OneHotEncoder"]);
        let (d, removed) = discard_redundant(construct_dag(&comps, &g).unwrap(), |_| 1);
        assert_eq!(removed, ["OrdinalEncoder"]);
        assert_eq!(d.fe_labels(), ["OneHotEncoder"]);
    }

    #[test]
    fn removal_bridges_edges() {
        // Imputer -> {Ordinal, OneHot} -> LogScaler; dropping OneHot keeps Imputer < LogScaler
        let g = OrderDag::default_asset();
        let comps = [
            fe("Imputer", 0.9, &["a"]),
            fe("OrdinalEncoder", 0.8, &["c"]),
            fe("OneHotEncoder", 0.7, &["c"]),
            fe("LogScaler", 0.6, &["a"]),
        ];
        let (d, removed) = discard_redundant(construct_dag(&comps, &g).unwrap(), |_| 0);
        assert_eq!(removed, ["OneHotEncoder"]);
        assert_eq!(
            d.edge_labels(),
            [
                ("Imputer", "OrdinalEncoder"),
                ("OrdinalEncoder", "LogScaler"),
                ("LogScaler", "MODEL")
            ]
        );
    }

    #[test]
    fn fraud_example_order() {
        let comps = [
            fe("Imputer", 0.81, &["card2", "card3"]),
            fe("OrdinalEncoder", 0.73, &["card4", "card6"]),
            fe("OneHotEncoder", 0.70, &["card4", "card6"]),
            fe("LinearScaler", 0.69, &["card2", "TransactionAmt"]),
            fe("DataBalancer", 0.58, &["card2"]),
        ];
        let os = order_components(
            &comps,
            "CatBoost",
            1,
            &OrderDag::default_asset(),
            &Taxonomy::builtin(),
            |_| 0,
        )
        .unwrap();
        assert_eq!(
            os.sequence(),
            [
                "Imputer",
                "OrdinalEncoder",
                "LinearScaler",
                "DataBalancer",
                "CatBoost"
            ]
        );
        assert_eq!(os.removed, ["OneHotEncoder"]);
    }
}
