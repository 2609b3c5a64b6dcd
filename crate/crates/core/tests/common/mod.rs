#![allow(dead_code)]

use longpath_core::Digraph;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn g1() -> Digraph {
    Digraph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (2, 3, 1.0)]).unwrap().graph
}

/// Every simple path with at least one edge that starts at `start`, by plain
/// recursion over the out-edges.
pub fn simple_paths_from(g: &Digraph, start: usize) -> Vec<Vec<usize>> {
    fn walk(g: &Digraph, path: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let last = *path.last().unwrap();
        for nb in g.out_neighbors(last) {
            if !on[nb.vertex] {
                on[nb.vertex] = true;
                path.push(nb.vertex);
                out.push(path.clone());
                walk(g, path, on, out);
                path.pop();
                on[nb.vertex] = false;
            }
        }
    }
    let mut on = vec![false; g.n()];
    on[start] = true;
    let mut out = Vec::new();
    walk(g, &mut vec![start], &mut on, &mut out);
    out
}

pub fn path_weight(g: &Digraph, path: &[usize]) -> f64 {
    path.windows(2).map(|e| g.weight(e[0], e[1]).unwrap()).sum()
}

/// Weight of a heaviest simple path, by enumerating all of them.
pub fn heaviest(g: &Digraph) -> f64 {
    (0..g.n())
        .flat_map(|s| simple_paths_from(g, s))
        .map(|p| path_weight(g, &p))
        .fold(0.0, f64::max)
}

/// `r[u][v]`: some directed path (possibly empty) leads from `u` to `v`.
pub fn reachability(g: &Digraph) -> Vec<Vec<bool>> {
    let n = g.n();
    let mut r = vec![vec![false; n]; n];
    for (s, row) in r.iter_mut().enumerate() {
        let mut stack = vec![s];
        row[s] = true;
        while let Some(u) = stack.pop() {
            for nb in g.out_neighbors(u) {
                if !row[nb.vertex] {
                    row[nb.vertex] = true;
                    stack.push(nb.vertex);
                }
            }
        }
    }
    r
}

/// Pairs `(a, b)` with `a` placed before `b` although `b` reaches `a` and
/// not the other way round.
pub fn bad_pairs(g: &Digraph, order: &[usize]) -> usize {
    let r = reachability(g);
    let mut count = 0;
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            let (a, b) = (order[i], order[j]);
            if r[b][a] && !r[a][b] {
                count += 1;
            }
        }
    }
    count
}

/// Random DAG on `n` vertices: edges follow a hidden random order.
pub fn random_dag<R: Rng>(n: usize, density: f64, rng: &mut R) -> Digraph {
    let mut hidden: Vec<usize> = (0..n).collect();
    hidden.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                edges.push((hidden[i], hidden[j], rng.gen_range(0.1..1.0)));
            }
        }
    }
    Digraph::from_edges(n, edges).unwrap().graph
}

/// Total weight over all walks with exactly `len` edges leaving `v`.
pub fn walk_weight_from(g: &Digraph, v: usize, len: usize) -> f64 {
    fn go(g: &Digraph, v: usize, left: usize, acc: f64) -> f64 {
        if left == 0 {
            return acc;
        }
        g.out_neighbors(v).iter().map(|nb| go(g, nb.vertex, left - 1, acc + nb.weight)).sum()
    }
    go(g, v, len, 0.0)
}

/// Graphs with `1..=max_n` vertices and weights in `[0.01, 1]`; self-loops
/// and repeated pairs in the raw list are left for the builder to clean up.
pub fn graphs(max_n: usize) -> impl Strategy<Value = Digraph> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, 1..=100u32), 0..=n * n).prop_map(move |edges| {
            Digraph::from_edges(n, edges.into_iter().map(|(u, v, w)| (u, v, f64::from(w) / 100.0))).unwrap().graph
        })
    })
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}
