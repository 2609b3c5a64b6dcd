//! Random instance generators.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Digraph;

/// A random digraph with a hidden Hamiltonian path of unit-weight edges.
#[derive(Debug, Clone)]
pub struct Planted {
    pub graph: Digraph,
    pub planted_path: Vec<usize>,
    /// `n - 1`: every edge weighs 1 and no simple path has more edges.
    pub optimal_weight: f64,
}

/// Plants `v_1 -> v_2 -> ... -> v_n` over a random permutation, then adds
/// `m - (n - 1)` further distinct edges chosen uniformly at random, for
/// exactly `m` edges, all of weight 1.
pub fn generate_planted(n: usize, m: usize, seed: u64) -> Result<Planted> {
    let max_edges = n.saturating_mul(n.saturating_sub(1));
    if n == 0 || m + 1 < n || m > max_edges {
        return Err(Error::InfeasibleInstance { n, m });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);

    let mut chosen: HashSet<(usize, usize)> = perm.windows(2).map(|w| (w[0], w[1])).collect();
    let extra = m - (n - 1);
    if extra > 0 {
        if m * 2 <= max_edges {
            while chosen.len() < m {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u != v {
                    chosen.insert((u, v));
                }
            }
        } else {
            // dense: sample the remaining pairs directly
            let mut rest: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| (0..n).map(move |v| (u, v)))
                .filter(|&(u, v)| u != v && !chosen.contains(&(u, v)))
                .collect();
            rest.shuffle(&mut rng);
            chosen.extend(rest.into_iter().take(extra));
        }
    }

    let mut edges: Vec<(usize, usize)> = chosen.into_iter().collect();
    edges.sort_unstable();
    let graph = Digraph::from_edges(n, edges.into_iter().map(|(u, v)| (u, v, 1.0)))?.graph;
    Ok(Planted { graph, planted_path: perm, optimal_weight: (n - 1) as f64 })
}

/// Each ordered pair becomes an edge with probability `density`, with a
/// weight drawn uniformly from `(0, 1]`.
pub fn random_digraph<R: Rng + ?Sized>(n: usize, density: f64, rng: &mut R) -> Digraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(density.clamp(0.0, 1.0)) {
                edges.push((u, v, 1.0 - rng.gen::<f64>()));
            }
        }
    }
    Digraph::from_edges(n, edges).expect("valid random edges").graph
}

/// One instance of the small-graph suite: vertex counts cycle through
/// 2..=10 and densities through 0.2, 0.5, 0.8.
#[derive(Debug, Clone)]
pub struct SmallCase {
    pub n: usize,
    pub density: f64,
    pub graph: Digraph,
}

/// `count` seeded random digraphs with 2 to 10 vertices and weights in
/// `(0, 1]`, small enough for `brute_force_lsp`.
pub fn small_suite(count: usize, seed: u64) -> Vec<SmallCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = 2 + i % 9;
            let density = [0.2, 0.5, 0.8][i % 3];
            SmallCase { n, density, graph: random_digraph(n, density, &mut rng) }
        })
        .collect()
}
