//! Small index-based digraph helpers. Graphs here have at most a few dozen
//! nodes, so dense reachability matrices are fine.

use std::collections::BTreeSet;

pub(crate) type Edges = BTreeSet<(usize, usize)>;

/// `reach[a][b]` is true when a non-empty path leads from `a` to `b`.
pub(crate) fn reachability(n: usize, edges: &Edges) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for &(a, b) in edges {
        reach[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

pub(crate) fn is_acyclic(n: usize, edges: &Edges) -> bool {
    let reach = reachability(n, edges);
    (0..n).all(|i| !reach[i][i])
}

/// Drops every edge implied by a longer path. Requires an acyclic graph.
pub(crate) fn transitive_reduction(n: usize, edges: &Edges) -> Edges {
    let reach = reachability(n, edges);
    edges
        .iter()
        .copied()
        .filter(|&(a, b)| !(0..n).any(|k| k != a && k != b && reach[a][k] && reach[k][b]))
        .collect()
}

/// Edges of some cycle, found by depth-first search from the lowest node index.
pub(crate) fn find_cycle(n: usize, edges: &Edges) -> Option<Vec<(usize, usize)>> {
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|a| edges.iter().filter(|e| e.0 == a).map(|e| e.1).collect())
        .collect();
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut stack: Vec<usize> = Vec::new();

    fn visit(
        v: usize,
        adj: &[Vec<usize>],
        state: &mut [u8],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<(usize, usize)>> {
        state[v] = 1;
        stack.push(v);
        for &w in &adj[v] {
            if state[w] == 1 {
                let start = stack.iter().position(|&x| x == w).unwrap();
                let mut cyc: Vec<(usize, usize)> =
                    stack[start..].windows(2).map(|p| (p[0], p[1])).collect();
                cyc.push((v, w));
                return Some(cyc);
            }
            if state[w] == 0 {
                if let Some(c) = visit(w, adj, state, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        state[v] = 2;
        None
    }

    for s in 0..n {
        if state[s] == 0 {
            if let Some(c) = visit(s, &adj, &mut state, &mut stack) {
                return Some(c);
            }
        }
    }
    None
}

/// Longest-path depth of every node from the sources.
pub(crate) fn levels(n: usize, edges: &Edges) -> Vec<usize> {
    let mut level = vec![0usize; n];
    // Relaxation terminates after at most n rounds on a DAG.
    for _ in 0..n {
        let mut changed = false;
        for &(a, b) in edges {
            if level[b] < level[a] + 1 {
                level[b] = level[a] + 1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    level
}
