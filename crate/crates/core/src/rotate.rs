//! End rotations with greedy extension.
//!
//! If the last vertex `p_k` has an edge back to `p_j` and `p_{j-1}` has an
//! edge to some later `p_t`, then
//! `p_1 .. p_{j-1}, p_t .. p_k, p_j .. p_{t-1}` is again a path, on the same
//! vertex set, ending at `p_{t-1}`. Walking through such rotations moves the
//! endpoint around until it finds an unused neighbor to extend with. Edge
//! openings never reorder the path's own vertices, so this reaches paths
//! they cannot.

use std::time::Instant;

use rand::Rng;

use crate::graph::{Digraph, Neighbor};
use crate::path::Path;

const OFF: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct RotateOutcome {
    pub path: Path,
    pub rotations: u64,
    pub extensions: u64,
}

struct Walk<'g> {
    graph: &'g Digraph,
    verts: Vec<usize>,
    pos: Vec<usize>,
    weight: f64,
    // when set, `verts` runs against edge direction and the in-adjacency
    // plays the role of the out-adjacency
    reversed: bool,
}

impl<'g> Walk<'g> {
    fn new(graph: &'g Digraph, path: &Path) -> Self {
        let mut walk = Walk {
            graph,
            verts: path.vertices().to_vec(),
            pos: vec![OFF; graph.n()],
            weight: path.weight(),
            reversed: false,
        };
        walk.reindex();
        walk
    }

    fn reindex(&mut self) {
        for (i, &v) in self.verts.iter().enumerate() {
            self.pos[v] = i;
        }
    }

    fn forward(&self, v: usize) -> &'g [Neighbor] {
        if self.reversed {
            self.graph.in_neighbors(v)
        } else {
            self.graph.out_neighbors(v)
        }
    }

    fn edge(&self, a: usize, b: usize) -> f64 {
        let w = if self.reversed { self.graph.weight(b, a) } else { self.graph.weight(a, b) };
        w.expect("consecutive path vertices are adjacent")
    }

    fn flip(&mut self) {
        self.verts.reverse();
        self.reversed = !self.reversed;
        self.reindex();
    }

    /// Appends unused neighbors of the last vertex, first in adjacency
    /// order, for as long as there are any.
    fn extend(&mut self) -> u64 {
        let mut added = 0;
        while let Some(&last) = self.verts.last() {
            let Some(nb) = self.forward(last).iter().find(|nb| self.pos[nb.vertex] == OFF) else {
                break;
            };
            self.pos[nb.vertex] = self.verts.len();
            self.verts.push(nb.vertex);
            self.weight += nb.weight;
            added += 1;
        }
        added
    }

    /// One random rotation at the last vertex; refused if it would lower the
    /// weight.
    fn rotate<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let Some(k) = self.verts.len().checked_sub(1) else {
            return false;
        };
        let last = self.verts[k];
        let Some((j, w_back)) = pick(rng, self.forward(last).iter().filter_map(|nb| {
            let j = self.pos[nb.vertex];
            (j != OFF && j < k).then_some((j, nb.weight))
        })) else {
            return false;
        };

        let (t, delta) = if j == 0 {
            // the path closes into a cycle; cut it anywhere
            let t = rng.gen_range(1..=k);
            (t, w_back - self.edge(self.verts[t - 1], self.verts[t]))
        } else {
            let a = self.verts[j - 1];
            let Some((t, w_jump)) = pick(rng, self.forward(a).iter().filter_map(|nb| {
                let t = self.pos[nb.vertex];
                (t != OFF && t > j && t <= k).then_some((t, nb.weight))
            })) else {
                return false;
            };
            let lost = self.edge(a, self.verts[j]) + self.edge(self.verts[t - 1], self.verts[t]);
            (t, w_back + w_jump - lost)
        };
        if delta < -1e-12 * self.weight.abs().max(1.0) {
            return false;
        }

        let mut next = Vec::with_capacity(self.verts.len());
        if j == 0 {
            next.extend_from_slice(&self.verts[t..]);
            next.extend_from_slice(&self.verts[..t]);
        } else {
            next.extend_from_slice(&self.verts[..j]);
            next.extend_from_slice(&self.verts[t..]);
            next.extend_from_slice(&self.verts[j..t]);
        }
        self.verts = next;
        self.weight += delta;
        self.reindex();
        true
    }

    fn to_path(&self) -> Path {
        let mut verts = self.verts.clone();
        if self.reversed {
            verts.reverse();
        }
        Path::from_vertices(self.graph, verts).expect("rotations keep a simple path")
    }
}

// uniform choice from an iterator, by reservoir sampling
fn pick<T, R: Rng + ?Sized>(rng: &mut R, items: impl Iterator<Item = T>) -> Option<T> {
    let mut chosen = None;
    for (seen, item) in items.enumerate() {
        if rng.gen_range(0..=seen) == 0 {
            chosen = Some(item);
        }
    }
    chosen
}

/// Alternates greedy extension at a random end with one rotation at that end,
/// `steps` times or until the deadline. Rotations never lower the weight, so
/// the result is at least as heavy as `path`; the heaviest path seen is
/// returned.
pub fn rotate_extend<R: Rng + ?Sized>(
    graph: &Digraph,
    path: &Path,
    steps: usize,
    deadline: Option<Instant>,
    rng: &mut R,
) -> RotateOutcome {
    let mut out = RotateOutcome { path: path.clone(), rotations: 0, extensions: 0 };
    if path.is_empty() {
        return out;
    }
    let mut walk = Walk::new(graph, path);
    let mut best = path.weight();
    for step in 0..steps {
        if step % 64 == 0 && deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        if rng.gen_bool(0.5) {
            walk.flip();
        }
        let added = walk.extend();
        out.extensions += added;
        if added > 0 && walk.weight > best + 1e-12 * best.abs().max(1.0) {
            best = walk.weight;
            out.path = walk.to_path();
        }
        if walk.rotate(rng) {
            out.rotations += 1;
        }
    }
    out
}
