//! Exhaustive longest simple path, for checking the heuristics on small graphs.

use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::path::Path;

pub const DEFAULT_ORACLE_CAP: usize = 12;

/// Maximum-weight simple path by full enumeration. Ties go to the
/// lexicographically smallest vertex sequence. Refuses graphs with more than
/// `cap` vertices.
pub fn brute_force_lsp(graph: &Digraph, cap: usize) -> Result<Path> {
    let n = graph.n();
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    if n == 0 {
        return Ok(Path::empty());
    }
    let mut best = Path::single(0);
    let mut stack = Vec::with_capacity(n);
    let mut on = vec![false; n];
    for s in 0..n {
        stack.push(s);
        on[s] = true;
        extend(graph, &mut stack, &mut on, 0.0, &mut best);
        on[s] = false;
        stack.pop();
    }
    Ok(best)
}

fn extend(graph: &Digraph, stack: &mut Vec<usize>, on: &mut [bool], weight: f64, best: &mut Path) {
    if weight > best.weight() || (weight == best.weight() && stack.as_slice() < best.vertices()) {
        *best = Path::from_parts(stack.clone(), weight);
    }
    let last = *stack.last().expect("nonempty");
    for nb in graph.out_neighbors(last) {
        if !on[nb.vertex] {
            on[nb.vertex] = true;
            stack.push(nb.vertex);
            extend(graph, stack, on, weight + nb.weight, best);
            stack.pop();
            on[nb.vertex] = false;
        }
    }
}
