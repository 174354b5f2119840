use std::collections::BTreeSet;

use pipeforge::corpus::{DagEdge, OrderDag, Taxonomy, MODEL_NODE};
use pipeforge::instantiate::{
    construct_dag, discard_redundant, order_components, total_order, SkeletonDag,
};
use pipeforge::predictor::FeComponent;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fe(label: &str, prob: f64, cols: &[&str]) -> FeComponent {
    FeComponent {
        label: label.into(),
        prob,
        columns: cols.iter().map(|c| c.to_string()).collect(),
    }
}

fn edge(from: &str, to: &str) -> DagEdge {
    DagEdge {
        from: from.into(),
        to: to.into(),
        support: 1,
    }
}

/// A random order over the taxonomy's FE labels plus random predicted
/// components drawn from it.
fn random_case(seed: u64) -> (OrderDag, Vec<FeComponent>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<String> = Taxonomy::builtin().fe_names().map(String::from).collect();
    labels.shuffle(&mut rng);
    let density = rng.gen_range(0.0..0.8);
    let mut edges = Vec::new();
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            if rng.gen_bool(density) {
                edges.push(edge(&labels[i], &labels[j]));
            }
        }
        edges.push(edge(&labels[i], MODEL_NODE));
    }
    let mut nodes = labels.clone();
    nodes.push(MODEL_NODE.into());
    let g = OrderDag { nodes, edges };
    g.validate().unwrap();

    let pool = ["a", "b", "c"];
    let k = rng.gen_range(0..=labels.len());
    let comps = labels
        .choose_multiple(&mut rng, k)
        .map(|l| {
            let cols: Vec<&str> = pool.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
            // coarse probabilities so ties happen
            fe(l, rng.gen_range(5..10) as f64 / 10.0, &cols)
        })
        .collect();
    (g, comps)
}

fn freq(name: &str) -> usize {
    name.len() % 3
}

fn run(g: &OrderDag, comps: &[FeComponent]) -> (SkeletonDag, Vec<String>, Vec<usize>) {
    let (dag, removed) = discard_redundant(construct_dag(comps, g).unwrap(), freq);
    let order = total_order(&dag, &Taxonomy::builtin()).unwrap();
    (dag, removed, order)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn order_respects_edges_and_levels_are_distinct(seed in any::<u64>()) {
        let (g, comps) = random_case(seed);
        let (dag, removed, order) = run(&g, &comps);

        let mut pos = vec![0; order.len()];
        for (p, &i) in order.iter().enumerate() {
            pos[i] = p;
        }
        prop_assert_eq!(order.len(), dag.nodes.len());
        prop_assert_eq!(*order.last().unwrap(), dag.model_index());
        for (a, b) in dag.edges() {
            prop_assert!(pos[a] < pos[b]);
        }
        // the original order is kept among survivors
        for (i, x) in dag.nodes.iter().enumerate() {
            for (j, y) in dag.nodes.iter().enumerate() {
                if i != j && g.precedes(&x.label, &y.label) {
                    prop_assert!(pos[i] < pos[j], "{} before {}", x.label, y.label);
                }
            }
        }
        // brute force: no two nodes of one level share a column set
        let levels = dag.levels();
        for i in 0..dag.model_index() {
            for j in i + 1..dag.model_index() {
                if levels[i] == levels[j] {
                    let ci: BTreeSet<&String> = dag.nodes[i].columns.iter().collect();
                    let cj: BTreeSet<&String> = dag.nodes[j].columns.iter().collect();
                    prop_assert_ne!(ci, cj);
                }
            }
        }
        let mut all: Vec<&str> = dag.fe_labels();
        all.extend(removed.iter().map(String::as_str));
        all.sort();
        let mut input: Vec<&str> = comps.iter().map(|c| c.label.as_str()).collect();
        input.sort();
        prop_assert_eq!(all, input);
    }

    #[test]
    fn input_order_does_not_matter(seed in any::<u64>(), perm in any::<u64>()) {
        let (g, comps) = random_case(seed);
        let mut shuffled = comps.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(perm));
        let tax = Taxonomy::builtin();
        let a = order_components(&comps, "XGBoost", 1, &g, &tax, freq);
        let b = order_components(&shuffled, "XGBoost", 1, &g, &tax, freq);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.sequence(), b.sequence());
                let (mut ra, mut rb) = (a.removed.clone(), b.removed.clone());
                ra.sort();
                rb.sort();
                prop_assert_eq!(ra, rb);
            }
            (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }
}

fn linearizations(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    fn go(n: usize, edges: &[(usize, usize)], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            let ready = !cur.contains(&v) && edges.iter().all(|&(a, b)| b != v || cur.contains(&a));
            if ready {
                cur.push(v);
                go(n, edges, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, edges, &mut Vec::new(), &mut out);
    out
}

#[test]
fn diamond_gives_a_valid_linearization() {
    let g = OrderDag {
        nodes: [
            "Imputer",
            "OrdinalEncoder",
            "LogScaler",
            "LinearScaler",
            MODEL_NODE,
        ]
        .map(String::from)
        .to_vec(),
        edges: vec![
            edge("Imputer", "OrdinalEncoder"),
            edge("Imputer", "LogScaler"),
            edge("OrdinalEncoder", "LinearScaler"),
            edge("LogScaler", "LinearScaler"),
            edge("LinearScaler", MODEL_NODE),
        ],
    };
    let comps = [
        fe("LinearScaler", 0.6, &["x"]),
        fe("LogScaler", 0.7, &["y"]),
        fe("OrdinalEncoder", 0.8, &["z"]),
        fe("Imputer", 0.9, &["x", "y"]),
    ];
    let (dag, removed, order) = run(&g, &comps);
    assert!(removed.is_empty());
    assert!(linearizations(dag.nodes.len(), &dag.edges()).contains(&order));
    assert_eq!(run(&g, &comps).2, order);
}

#[test]
fn fraud_skeleton_golden() {
    let comps = [
        fe("Imputer", 0.81, &["card2", "card3"]),
        fe("OrdinalEncoder", 0.73, &["card4", "card6"]),
        fe("OneHotEncoder", 0.70, &["card4", "card6"]),
        fe("LinearScaler", 0.69, &["card2", "card3", "TransactionAmt"]),
        fe(
            "DataBalancer",
            0.58,
            &["card2", "card3", "card4", "card6", "TransactionAmt"],
        ),
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
