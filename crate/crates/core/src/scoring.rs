//! Walk-weight scores and the exploration order of adjacency lists.

use std::cmp::Reverse;

use crate::graph::{Digraph, Neighbor, SccInfo};

/// `out[i][v]` is the total weight of all length-`i` walks leaving `v`;
/// `inc[i][v]` the same for walks entering `v`. Row 0 is all zeros.
#[derive(Debug, Clone)]
pub struct PathSums {
    pub out: Vec<Vec<f64>>,
    pub inc: Vec<Vec<f64>>,
}

impl PathSums {
    pub fn depth(&self) -> usize {
        self.out.len() - 1
    }
}

#[derive(Debug, Clone)]
pub struct ScoreTable {
    pub coeffs: Vec<f64>,
    pub sums: PathSums,
    pub score_out: Vec<f64>,
    pub score_in: Vec<f64>,
}

/// Total walk weights of each length `1..=k`, forward and backward.
///
/// A length-`i` walk from `v` is an edge `v -> u` followed by a length-`(i-1)`
/// walk from `u`, so with `N` the walk counts:
/// `A[i][v] = sum over v->u of (w(v,u) * N[i-1][u] + A[i-1][u])`.
pub fn path_weight_sums(graph: &Digraph, k: usize) -> PathSums {
    assert!(k >= 1, "walk depth must be positive");
    let n = graph.n();
    let out = walk_sums(n, k, |v| graph.out_neighbors(v));
    let inc = walk_sums(n, k, |v| graph.in_neighbors(v));
    PathSums { out, inc }
}

// counts[v] tracks the number of length-(i-1) walks from v.
fn walk_sums<'g>(n: usize, k: usize, adj: impl Fn(usize) -> &'g [Neighbor]) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; n]];
    let mut counts = vec![1.0; n];
    for i in 1..=k {
        let mut next_sum = vec![0.0; n];
        let mut next_count = vec![0.0; n];
        for v in 0..n {
            let (mut s, mut c) = (0.0, 0.0);
            for nb in adj(v) {
                s += nb.weight * counts[nb.vertex] + sums[i - 1][nb.vertex];
                c += counts[nb.vertex];
            }
            next_sum[v] = s;
            next_count[v] = c;
        }
        sums.push(next_sum);
        counts = next_count;
    }
    sums
}

/// `score(v) = sum_i coeffs[i-1] * A[i][v]`, in both directions.
pub fn vertex_scores(sums: PathSums, coeffs: &[f64]) -> ScoreTable {
    assert_eq!(coeffs.len(), sums.depth(), "one coefficient per walk length");
    let n = sums.out[0].len();
    let combine = |rows: &[Vec<f64>]| -> Vec<f64> {
        (0..n).map(|v| coeffs.iter().enumerate().map(|(i, a)| a * rows[i + 1][v]).sum()).collect()
    };
    let score_out = combine(&sums.out);
    let score_in = combine(&sums.inc);
    ScoreTable { coeffs: coeffs.to_vec(), sums, score_out, score_in }
}

/// Sorts adjacency lists into exploration priority.
///
/// Out-neighbors: dead ends (out-degree 0) last; neighbors whose in-degree is
/// at most `low_indegree_threshold` first; then higher out-rank first, then
/// lower out-score first, then smaller id. In-neighbors mirror this with
/// in-degree, out-degree, in-rank and in-score.
pub fn order_neighbors(
    graph: &Digraph,
    scores: &ScoreTable,
    info: &SccInfo,
    low_indegree_threshold: usize,
) -> Digraph {
    let out_key = |u: usize| {
        (
            graph.out_degree(u) == 0,
            graph.in_degree(u) > low_indegree_threshold,
            Reverse(info.out_rank[u]),
        )
    };
    let in_key = |u: usize| {
        (
            graph.in_degree(u) == 0,
            graph.out_degree(u) > low_indegree_threshold,
            Reverse(info.in_rank[u]),
        )
    };
    graph.with_sorted_adjacency(
        |_, a, b| {
            out_key(a.vertex)
                .cmp(&out_key(b.vertex))
                .then_with(|| scores.score_out[a.vertex].total_cmp(&scores.score_out[b.vertex]))
                .then(a.vertex.cmp(&b.vertex))
        },
        |_, a, b| {
            in_key(a.vertex)
                .cmp(&in_key(b.vertex))
                .then_with(|| scores.score_in[a.vertex].total_cmp(&scores.score_in[b.vertex]))
                .then(a.vertex.cmp(&b.vertex))
        },
    )
}
