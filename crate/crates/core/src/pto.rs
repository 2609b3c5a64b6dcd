//! Pseudo-topological orders and the longest-path dynamic program over their
//! subjacent DAG.
//!
//! A strong pseudo-topological order (PTO) is a vertex order whose backward
//! edges each span an interval lying inside a single SCC. Dropping those
//! backward edges leaves a DAG for which the order is topological, so the
//! classic DAG longest-path DP applies. Values `x[v]` are kept between calls
//! and only positions from `first_dirty` onward are recomputed.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Digraph, SccInfo};
use crate::path::Path;

#[derive(Debug, Clone)]
pub struct PseudoTopoOrder {
    order: Vec<usize>,
    inv: Vec<usize>,
    x: Vec<f64>,
    first_dirty: usize,
}

impl PseudoTopoOrder {
    /// Wraps a permutation of `0..n`. All DP values start dirty.
    pub fn from_order(order: Vec<usize>) -> Self {
        let n = order.len();
        let mut inv = vec![usize::MAX; n];
        for (pos, &v) in order.iter().enumerate() {
            assert!(v < n && inv[v] == usize::MAX, "order must be a permutation");
            inv[v] = pos;
        }
        PseudoTopoOrder { order, inv, x: vec![0.0; n], first_dirty: 0 }
    }

    /// Random topological order of the skeleton (Kahn's algorithm with a
    /// random ready component each step), each component expanded into a
    /// uniformly shuffled block of its vertices.
    pub fn random<R: Rng + ?Sized>(info: &SccInfo, rng: &mut R) -> Self {
        let c = info.num_sccs();
        let mut indeg = vec![0usize; c];
        for comp in 0..c {
            for &d in info.successors(comp) {
                indeg[d] += 1;
            }
        }
        let mut ready: Vec<usize> = (0..c).filter(|&s| indeg[s] == 0).collect();
        let mut order = Vec::with_capacity(info.scc_id.len());
        while !ready.is_empty() {
            let comp = ready.swap_remove(rng.gen_range(0..ready.len()));
            let start = order.len();
            order.extend_from_slice(info.members(comp));
            order[start..].shuffle(rng);
            for &d in info.successors(comp) {
                indeg[d] -= 1;
                if indeg[d] == 0 {
                    ready.push(d);
                }
            }
        }
        PseudoTopoOrder::from_order(order)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn position(&self, v: usize) -> usize {
        self.inv[v]
    }

    pub fn vertex_at(&self, pos: usize) -> usize {
        self.order[pos]
    }

    /// DP values per vertex; only meaningful once `first_dirty() == len()`.
    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn first_dirty(&self) -> usize {
        self.first_dirty
    }

    pub fn is_clean(&self) -> bool {
        self.first_dirty == self.order.len()
    }

    pub fn mark_dirty(&mut self, pos: usize) {
        self.first_dirty = self.first_dirty.min(pos);
    }

    /// Places `v` at `pos`, keeping the inverse in sync. Callers must restore
    /// a permutation before the order is used again.
    pub(crate) fn put(&mut self, pos: usize, v: usize) {
        if self.order[pos] != v {
            self.order[pos] = v;
            self.mark_dirty(pos);
        }
        self.inv[v] = pos;
    }

    pub fn swap_positions(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.order.swap(i, j);
        self.inv[self.order[i]] = i;
        self.inv[self.order[j]] = j;
        self.mark_dirty(i.min(j));
    }

    /// Recomputes `x` for positions `pos..n` (or from the dirty watermark if
    /// that is earlier), assuming everything before is current.
    pub fn recompute_from(&mut self, graph: &Digraph, pos: usize) {
        let n = self.order.len();
        for p in pos.min(self.first_dirty)..n {
            let v = self.order[p];
            let mut best = 0.0f64;
            for nb in graph.in_neighbors(v) {
                if self.inv[nb.vertex] < p {
                    let cand = self.x[nb.vertex] + nb.weight;
                    if cand > best {
                        best = cand;
                    }
                }
            }
            self.x[v] = best;
        }
        self.first_dirty = n;
    }

    pub fn update(&mut self, graph: &Digraph) {
        self.recompute_from(graph, self.first_dirty);
    }

    /// Vertex with the largest DP value, smallest id on ties.
    pub fn best_end(&self) -> Option<usize> {
        debug_assert!(self.is_clean());
        let mut best: Option<usize> = None;
        for (v, &xv) in self.x.iter().enumerate() {
            if best.is_none_or(|b| xv > self.x[b]) {
                best = Some(v);
            }
        }
        best
    }

    pub fn best_value(&self) -> f64 {
        self.best_end().map_or(0.0, |v| self.x[v])
    }

    /// Backtracks from the best end through in-neighbors that appear earlier
    /// and realize the DP value, preferring the smallest id.
    pub fn extract_path(&self, graph: &Digraph) -> Path {
        let Some(end) = self.best_end() else {
            return Path::empty();
        };
        let mut verts = vec![end];
        let mut v = end;
        while self.x[v] != 0.0 {
            let pos = self.inv[v];
            let prev = graph
                .in_neighbors(v)
                .iter()
                .filter(|nb| self.inv[nb.vertex] < pos && self.x[nb.vertex] + nb.weight == self.x[v])
                .map(|nb| nb.vertex)
                .min();
            match prev {
                Some(u) => {
                    verts.push(u);
                    v = u;
                }
                None => break,
            }
        }
        verts.reverse();
        Path::from_parts(verts, self.x[end])
    }

    /// Like `extract_path`, but picks uniformly among tied ends and tied
    /// predecessors instead of the smallest id.
    pub fn extract_path_random<R: Rng + ?Sized>(&self, graph: &Digraph, rng: &mut R) -> Path {
        let best = self.best_value();
        let mut end = None;
        let mut seen = 0;
        for (v, &xv) in self.x.iter().enumerate() {
            if xv == best {
                seen += 1;
                if rng.gen_range(0..seen) == 0 {
                    end = Some(v);
                }
            }
        }
        let Some(end) = end else {
            return Path::empty();
        };
        let mut verts = vec![end];
        let mut v = end;
        while self.x[v] != 0.0 {
            let pos = self.inv[v];
            let mut prev = None;
            let mut seen = 0;
            for nb in graph.in_neighbors(v) {
                if self.inv[nb.vertex] < pos && self.x[nb.vertex] + nb.weight == self.x[v] {
                    seen += 1;
                    if rng.gen_range(0..seen) == 0 {
                        prev = Some(nb.vertex);
                    }
                }
            }
            match prev {
                Some(u) => {
                    verts.push(u);
                    v = u;
                }
                None => break,
            }
        }
        verts.reverse();
        Path::from_parts(verts, self.x[end])
    }

    /// `inv` is the exact inverse of `order`.
    pub fn inverse_consistent(&self) -> bool {
        self.order.iter().enumerate().all(|(pos, &v)| self.inv[v] == pos)
    }
}

/// Longest path of the subjacent DAG of `order`. Its edges all go forward in
/// the order and its weight equals the maximum DP value.
pub fn lsp_dag(graph: &Digraph, order: &mut PseudoTopoOrder) -> Path {
    order.update(graph);
    order.extract_path(graph)
}

/// Rewrites the positions held by the path's vertices so the path appears in
/// path order. Every other vertex keeps its position.
pub fn impose(order: &mut PseudoTopoOrder, graph: &Digraph, path: &Path) -> Result<()> {
    let verts = path.vertices();
    for (i, &v) in verts.iter().enumerate() {
        if v >= order.len() {
            return Err(Error::InvalidPath(format!("vertex {v} out of range")));
        }
        if i > 0 && graph.weight(verts[i - 1], v).is_none() {
            return Err(Error::InvalidPath(format!("missing edge {} -> {v}", verts[i - 1])));
        }
    }
    let mut slots: Vec<usize> = verts.iter().map(|&v| order.position(v)).collect();
    slots.sort_unstable();
    if slots.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidPath("repeated vertex".into()));
    }
    for (&pos, &v) in slots.iter().zip(verts) {
        order.put(pos, v);
    }
    debug_assert!(order.inverse_consistent());
    Ok(())
}

/// Checks the strong PTO property: `order` is a permutation and every
/// backward edge `y -> x` has all of `[pos(x), pos(y)]` inside one SCC.
pub fn is_strong_pto(graph: &Digraph, info: &SccInfo, order: &[usize]) -> bool {
    let n = graph.n();
    if order.len() != n {
        return false;
    }
    let mut inv = vec![usize::MAX; n];
    for (pos, &v) in order.iter().enumerate() {
        if v >= n || inv[v] != usize::MAX {
            return false;
        }
        inv[v] = pos;
    }
    // run_start[p]: first position of the maximal same-SCC run containing p
    let mut run_start = vec![0; n];
    for p in 1..n {
        run_start[p] = if info.same_scc(order[p], order[p - 1]) { run_start[p - 1] } else { p };
    }
    (0..n).all(|u| {
        graph.out_neighbors(u).iter().all(|nb| {
            let (pu, pv) = (inv[u], inv[nb.vertex]);
            pv > pu || (info.same_scc(u, nb.vertex) && run_start[pu] <= pv)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list_str;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g1() -> Digraph {
        parse_edge_list_str("0 1 1\n1 2 1\n2 0 1\n2 3 1").unwrap().graph
    }

    #[test]
    fn random_extraction_covers_ties() {
        // two disjoint unit edges: both are optimal
        let g = parse_edge_list_str("0 1 1\n2 3 1").unwrap().graph;
        let mut t = PseudoTopoOrder::from_order(vec![0, 1, 2, 3]);
        t.update(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..50 {
            let p = t.extract_path_random(&g, &mut rng);
            assert_eq!(p.weight(), 1.0);
            seen.insert(p.into_vertices());
        }
        assert_eq!(seen.len(), 2);
        assert_eq!(t.extract_path(&g).vertices(), &[0, 1]);
    }

    #[test]
    fn random_order_on_g1() {
        let g = g1();
        let info = SccInfo::analyze(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let t = PseudoTopoOrder::random(&info, &mut rng);
            assert_eq!(t.vertex_at(3), 3);
            assert!(is_strong_pto(&g, &info, t.order()));
            assert!(t.inverse_consistent());
        }
    }

    #[test]
    fn random_order_of_dag_is_topological() {
        let g = parse_edge_list_str("0 1 1\n0 2 1\n2 1 1\n1 3 1\n4 3 1").unwrap().graph;
        let info = SccInfo::analyze(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let t = PseudoTopoOrder::random(&info, &mut rng);
            for (u, v, _) in g.edges() {
                assert!(t.position(u) < t.position(v));
            }
        }
    }

    #[test]
    fn dag_dp_on_identity_order() {
        let g = g1();
        let mut t = PseudoTopoOrder::from_order(vec![0, 1, 2, 3]);
        let p = lsp_dag(&g, &mut t);
        assert_eq!(p.vertices(), &[0, 1, 2, 3]);
        assert_eq!(p.weight(), 3.0);
        assert!(t.is_clean());
    }

    #[test]
    fn dag_dp_with_backward_edges_erased() {
        // order (2,1,0,3): forward edges are 2->0 and 2->3 only
        let g = g1();
        let mut t = PseudoTopoOrder::from_order(vec![2, 1, 0, 3]);
        let p = lsp_dag(&g, &mut t);
        assert_eq!(p.weight(), 1.0);
        assert_eq!(p.vertices(), &[2, 0]);
        p.validate(&g).unwrap();
    }

    #[test]
    fn edgeless_dp() {
        let g = Digraph::empty(3);
        let mut t = PseudoTopoOrder::from_order(vec![2, 0, 1]);
        let p = lsp_dag(&g, &mut t);
        assert_eq!(p, Path::single(0));
        let mut empty = PseudoTopoOrder::from_order(vec![]);
        assert!(lsp_dag(&Digraph::empty(0), &mut empty).is_empty());
    }

    #[test]
    fn imposition_example() {
        // path 3 -> 1 -> 5 -> 8 over vertices 1..=8 (0 unused, placed last)
        let g = parse_edge_list_str("3 1 1\n1 5 1\n5 8 1").unwrap().graph;
        let mut t = PseudoTopoOrder::from_order(vec![1, 8, 7, 4, 3, 6, 5, 2, 0]);
        let p = Path::from_vertices(&g, vec![3, 1, 5, 8]).unwrap();
        impose(&mut t, &g, &p).unwrap();
        assert_eq!(t.order(), &[3, 1, 7, 4, 5, 6, 8, 2, 0]);
        assert_eq!(t.first_dirty(), 0);
        assert!(t.inverse_consistent());
    }

    #[test]
    fn imposition_fixed_point() {
        let g = g1();
        let mut t = PseudoTopoOrder::from_order(vec![0, 1, 2, 3]);
        t.update(&g);
        let before = t.order().to_vec();
        impose(&mut t, &g, &Path::from_vertices(&g, vec![1, 2, 3]).unwrap()).unwrap();
        assert_eq!(t.order(), &before[..]);
        assert!(t.is_clean());
        impose(&mut t, &g, &Path::single(3)).unwrap();
        assert_eq!(t.order(), &before[..]);
    }

    #[test]
    fn imposition_rejects_non_paths() {
        let g = g1();
        let mut t = PseudoTopoOrder::from_order(vec![0, 1, 2, 3]);
        assert!(impose(&mut t, &g, &Path::from_parts(vec![0, 2], 1.0)).is_err());
        assert!(impose(&mut t, &g, &Path::from_parts(vec![0, 1, 0], 1.0)).is_err());
    }

    #[test]
    fn incremental_recompute_matches_full() {
        let g = g1();
        let mut t = PseudoTopoOrder::from_order(vec![0, 1, 2, 3]);
        t.update(&g);
        t.swap_positions(2, 3);
        t.recompute_from(&g, 2);
        let mut full = PseudoTopoOrder::from_order(t.order().to_vec());
        full.update(&g);
        assert_eq!(t.values(), full.values());
    }

    #[test]
    fn recompute_at_end_is_a_no_op() {
        let g = g1();
        let mut t = PseudoTopoOrder::from_order(vec![0, 1, 2, 3]);
        t.update(&g);
        let before = t.values().to_vec();
        t.recompute_from(&g, 4);
        assert_eq!(t.values(), &before[..]);
    }

    #[test]
    fn strong_checker_rejects_mixed_components() {
        // SCC {0,1} with an interloper 2 between them and a back edge 1 -> 0
        let g = parse_edge_list_str("0 1 1\n1 0 1\n0 2 1").unwrap().graph;
        let info = SccInfo::analyze(&g);
        assert!(is_strong_pto(&g, &info, &[0, 1, 2]));
        assert!(is_strong_pto(&g, &info, &[1, 0, 2]));
        assert!(!is_strong_pto(&g, &info, &[0, 2, 1]));
        assert!(!is_strong_pto(&g, &info, &[2, 0, 1]));
        assert!(!is_strong_pto(&g, &info, &[0, 1]));
    }
}
