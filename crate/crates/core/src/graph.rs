//! Weighted digraph storage, edge-list I/O and connectivity analysis.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// One entry of an adjacency list. In the out-list of `u` the entry names the
/// head of `u -> vertex`; in the in-list of `v` it names the tail of `vertex -> v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub vertex: usize,
    pub weight: f64,
}

/// Immutable weighted digraph with mirrored out/in adjacency in CSR layout.
///
/// Vertices are `0..n`. Weights are finite and nonnegative, there are no
/// self-loops and at most one edge per ordered pair.
#[derive(Debug, Clone)]
pub struct Digraph {
    n: usize,
    out_offsets: Vec<usize>,
    out_nbrs: Vec<Neighbor>,
    in_offsets: Vec<usize>,
    in_nbrs: Vec<Neighbor>,
}

/// Result of normalizing a raw edge list.
#[derive(Debug, Clone)]
pub struct ParsedGraph {
    pub graph: Digraph,
    pub self_loops_dropped: usize,
    pub duplicates_merged: usize,
}

fn build_csr(n: usize, edges: &[(usize, usize, f64)], key: impl Fn(&(usize, usize, f64)) -> (usize, usize, f64)) -> (Vec<usize>, Vec<Neighbor>) {
    let mut offsets = vec![0usize; n + 1];
    for e in edges {
        offsets[key(e).0 + 1] += 1;
    }
    for v in 0..n {
        offsets[v + 1] += offsets[v];
    }
    let mut fill = offsets.clone();
    let mut nbrs = vec![Neighbor { vertex: 0, weight: 0.0 }; edges.len()];
    for e in edges {
        let (src, dst, weight) = key(e);
        nbrs[fill[src]] = Neighbor { vertex: dst, weight };
        fill[src] += 1;
    }
    (offsets, nbrs)
}

impl Digraph {
    /// Builds a graph over `n` vertices. Self-loops are dropped and parallel
    /// edges collapse to the maximum weight.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<ParsedGraph> {
        let mut list = Vec::new();
        let mut self_loops = 0;
        for (u, v, w) in edges {
            if u >= n || v >= n || !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidEdge { from: u, to: v, weight: w });
            }
            if u == v {
                self_loops += 1;
                continue;
            }
            list.push((u, v, w));
        }
        list.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(b.2.total_cmp(&a.2)));
        let before = list.len();
        list.dedup_by(|later, first| later.0 == first.0 && later.1 == first.1);
        let duplicates = before - list.len();

        let (out_offsets, out_nbrs) = build_csr(n, &list, |&(u, v, w)| (u, v, w));
        // Stable fill over (u, v)-sorted input leaves every in-list sorted by tail.
        let (in_offsets, in_nbrs) = build_csr(n, &list, |&(u, v, w)| (v, u, w));
        Ok(ParsedGraph {
            graph: Digraph { n, out_offsets, out_nbrs, in_offsets, in_nbrs },
            self_loops_dropped: self_loops,
            duplicates_merged: duplicates,
        })
    }

    pub fn empty(n: usize) -> Digraph {
        Digraph::from_edges(n, std::iter::empty()).expect("edgeless graph").graph
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.out_nbrs.len()
    }

    #[inline]
    pub fn out_neighbors(&self, v: usize) -> &[Neighbor] {
        &self.out_nbrs[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    #[inline]
    pub fn in_neighbors(&self, v: usize) -> &[Neighbor] {
        &self.in_nbrs[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out_offsets[v + 1] - self.out_offsets[v]
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.in_offsets[v + 1] - self.in_offsets[v]
    }

    pub(crate) fn out_csr(&self) -> (&[usize], &[Neighbor]) {
        (&self.out_offsets, &self.out_nbrs)
    }

    pub(crate) fn in_csr(&self) -> (&[usize], &[Neighbor]) {
        (&self.in_offsets, &self.in_nbrs)
    }

    /// Weight of `u -> v`, if the edge exists.
    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.out_neighbors(u).iter().find(|nb| nb.vertex == v).map(|nb| nb.weight)
    }

    /// All edges as `(tail, head, weight)`, sorted by `(tail, head)`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut edges: Vec<_> = (0..self.n)
            .flat_map(|u| self.out_neighbors(u).iter().map(move |nb| (u, nb.vertex, nb.weight)))
            .collect();
        edges.sort_by_key(|e| (e.0, e.1));
        edges
    }

    /// Returns a copy whose adjacency lists are reordered by the given
    /// comparators. `out_cmp(v, a, b)` orders out-neighbors `a`, `b` of `v`.
    pub fn with_sorted_adjacency<F, G>(&self, mut out_cmp: F, mut in_cmp: G) -> Digraph
    where
        F: FnMut(usize, &Neighbor, &Neighbor) -> std::cmp::Ordering,
        G: FnMut(usize, &Neighbor, &Neighbor) -> std::cmp::Ordering,
    {
        let mut sorted = self.clone();
        for v in 0..self.n {
            let out = &mut sorted.out_nbrs[self.out_offsets[v]..self.out_offsets[v + 1]];
            out.sort_by(|a, b| out_cmp(v, a, b));
            let inc = &mut sorted.in_nbrs[self.in_offsets[v]..self.in_offsets[v + 1]];
            inc.sort_by(|a, b| in_cmp(v, a, b));
        }
        sorted
    }
}

/// Graphs compare by vertex count and edge set; adjacency order is ignored.
impl PartialEq for Digraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges() == other.edges()
    }
}

fn parse_field<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("invalid {what} {tok:?}") })
}

/// Parses the `u v w` edge-list format. Blank lines and lines starting with
/// `#` or `%` are ignored. An optional `n m` header may precede the edges.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<ParsedGraph> {
    let mut header_n = None;
    let mut seen_data = false;
    let mut edges = Vec::new();
    let mut max_vertex = None;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') || text.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = text.split_whitespace().collect();
        match toks.len() {
            2 if !seen_data => {
                header_n = Some(parse_field::<usize>(toks[0], line_no, "vertex count")?);
                parse_field::<usize>(toks[1], line_no, "edge count")?;
            }
            3 => {
                let u: usize = parse_field(toks[0], line_no, "vertex")?;
                let v: usize = parse_field(toks[1], line_no, "vertex")?;
                let w: f64 = parse_field(toks[2], line_no, "weight")?;
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidWeight { line: line_no, weight: w });
                }
                if let Some(n) = header_n {
                    if u >= n || v >= n {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("vertex out of range for header n = {n}"),
                        });
                    }
                }
                max_vertex = max_vertex.max(Some(u.max(v)));
                edges.push((u, v, w));
            }
            k => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected \"u v w\", found {k} fields"),
                })
            }
        }
        seen_data = true;
    }

    let n = header_n.unwrap_or_else(|| max_vertex.map_or(0, |m| m + 1));
    Digraph::from_edges(n, edges)
}

pub fn parse_edge_list_str(text: &str) -> Result<ParsedGraph> {
    parse_edge_list(text.as_bytes())
}

/// Writes the graph with an `n m` header followed by one `u v w` line per edge.
pub fn write_edge_list<W: Write>(graph: &Digraph, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", graph.n(), graph.edge_count())?;
    for (u, v, w) in graph.edges() {
        writeln!(out, "{u} {v} {w}")?;
    }
    Ok(())
}

/// Connectivity summary: SCCs numbered in a topological order of the
/// skeleton, weak components, and per-vertex ranks.
#[derive(Debug, Clone)]
pub struct SccInfo {
    pub scc_id: Vec<usize>,
    pub wcc_id: Vec<usize>,
    pub out_rank: Vec<usize>,
    pub in_rank: Vec<usize>,
    num_sccs: usize,
    num_wccs: usize,
    member_offsets: Vec<usize>,
    members: Vec<usize>,
    skel_offsets: Vec<usize>,
    skel_targets: Vec<usize>,
}

impl SccInfo {
    /// SCCs, skeleton, weak components and ranks in one pass.
    pub fn analyze(graph: &Digraph) -> SccInfo {
        compute_ranks(strongly_connected_components(graph))
    }

    pub fn num_sccs(&self) -> usize {
        self.num_sccs
    }

    pub fn num_wccs(&self) -> usize {
        self.num_wccs
    }

    /// Vertices of component `c`, ascending.
    pub fn members(&self, c: usize) -> &[usize] {
        &self.members[self.member_offsets[c]..self.member_offsets[c + 1]]
    }

    /// Skeleton successors of component `c`, ascending and without duplicates.
    pub fn successors(&self, c: usize) -> &[usize] {
        &self.skel_targets[self.skel_offsets[c]..self.skel_offsets[c + 1]]
    }

    pub fn skeleton_edge_count(&self) -> usize {
        self.skel_targets.len()
    }

    pub fn same_scc(&self, u: usize, v: usize) -> bool {
        self.scc_id[u] == self.scc_id[v]
    }
}

/// Weak component id per vertex, numbered by smallest member.
pub fn weakly_connected_components(graph: &Digraph) -> Vec<usize> {
    let n = graph.n();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for u in 0..n {
        for nb in graph.out_neighbors(u) {
            let (a, b) = (find(&mut parent, u), find(&mut parent, nb.vertex));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut ids = vec![usize::MAX; n];
    let mut next = 0;
    let mut comp = vec![0; n];
    for (v, c) in comp.iter_mut().enumerate() {
        let root = find(&mut parent, v);
        if ids[root] == usize::MAX {
            ids[root] = next;
            next += 1;
        }
        *c = ids[root];
    }
    comp
}

/// Iterative Tarjan. Components are renumbered so that every skeleton edge
/// goes from a smaller id to a larger one. Ranks are left at zero.
pub fn strongly_connected_components(graph: &Digraph) -> SccInfo {
    const UNSEEN: usize = usize::MAX;
    let n = graph.n();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut calls: Vec<(usize, usize)> = Vec::new();
    let mut tarjan_id = vec![UNSEEN; n];
    let mut counter = 0;
    let mut found = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        calls.push((root, 0));

        while let Some(&mut (v, ref mut pos)) = calls.last_mut() {
            let nbrs = graph.out_neighbors(v);
            if *pos < nbrs.len() {
                let w = nbrs[*pos].vertex;
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(parent, _)) = calls.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    tarjan_id[w] = found;
                    if w == v {
                        break;
                    }
                }
                found += 1;
            }
        }
    }

    // Tarjan emits components in reverse topological order.
    let scc_id: Vec<usize> = tarjan_id.iter().map(|&t| found - 1 - t).collect();

    let mut member_offsets = vec![0; found + 1];
    for &c in &scc_id {
        member_offsets[c + 1] += 1;
    }
    for c in 0..found {
        member_offsets[c + 1] += member_offsets[c];
    }
    let mut fill = member_offsets.clone();
    let mut members = vec![0; n];
    for (v, &c) in scc_id.iter().enumerate() {
        members[fill[c]] = v;
        fill[c] += 1;
    }

    let mut skel: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| graph.out_neighbors(u).iter().map(move |nb| (u, nb.vertex)))
        .map(|(u, v)| (scc_id[u], scc_id[v]))
        .filter(|(a, b)| a != b)
        .collect();
    skel.sort_unstable();
    skel.dedup();
    let mut skel_offsets = vec![0; found + 1];
    for &(a, _) in &skel {
        skel_offsets[a + 1] += 1;
    }
    for c in 0..found {
        skel_offsets[c + 1] += skel_offsets[c];
    }
    let skel_targets = skel.iter().map(|&(_, b)| b).collect();

    let wcc_id = weakly_connected_components(graph);
    let num_wccs = wcc_id.iter().max().map_or(0, |m| m + 1);

    SccInfo {
        scc_id,
        wcc_id,
        out_rank: vec![0; n],
        in_rank: vec![0; n],
        num_sccs: found,
        num_wccs,
        member_offsets,
        members,
        skel_offsets,
        skel_targets,
    }
}

/// Fills out/in ranks: longest skeleton path (in edges) starting/ending at
/// each vertex's component.
pub fn compute_ranks(mut info: SccInfo) -> SccInfo {
    let c = info.num_sccs;
    let mut out_rank = vec![0usize; c];
    let mut in_rank = vec![0usize; c];
    for comp in (0..c).rev() {
        out_rank[comp] = info.successors(comp).iter().map(|&d| out_rank[d] + 1).max().unwrap_or(0);
    }
    for comp in 0..c {
        for &d in info.successors(comp) {
            in_rank[d] = in_rank[d].max(in_rank[comp] + 1);
        }
    }
    info.out_rank = info.scc_id.iter().map(|&s| out_rank[s]).collect();
    info.in_rank = info.scc_id.iter().map(|&s| in_rank[s]).collect();
    info
}

#[cfg(test)]
mod tests {
    use super::*;

    const G1: &str = "0 1 1\n1 2 1\n2 0 1\n2 3 1";

    fn g1() -> Digraph {
        parse_edge_list_str(G1).unwrap().graph
    }

    #[test]
    fn parses_g1() {
        let g = g1();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.weight(2, 0), Some(1.0));
        assert_eq!(g.in_neighbors(0)[0].vertex, 2);
    }

    #[test]
    fn duplicate_edges_keep_max_weight() {
        let parsed = parse_edge_list_str("0 1 2.5\n0 1 7.0").unwrap();
        assert_eq!(parsed.graph.edge_count(), 1);
        assert_eq!(parsed.graph.weight(0, 1), Some(7.0));
        assert_eq!(parsed.duplicates_merged, 1);
    }

    #[test]
    fn self_loops_are_dropped_and_counted() {
        let parsed = parse_edge_list_str("0 0 1\n0 1 1").unwrap();
        assert_eq!(parsed.graph.edge_count(), 1);
        assert_eq!(parsed.self_loops_dropped, 1);
    }

    #[test]
    fn header_and_comments() {
        let parsed = parse_edge_list_str("# comment\n6 1\n\n% other\n0 1 0.5\n").unwrap();
        assert_eq!(parsed.graph.n(), 6);
        assert_eq!(parsed.graph.edge_count(), 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match parse_edge_list_str("0 1 1\n1 x 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse_edge_list_str("0 1 1\n1 2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_edge_list_str("3 1\n0 5 1"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn negative_weight_rejected() {
        assert!(matches!(
            parse_edge_list_str("0 1 1\n1 2 -0.5"),
            Err(Error::InvalidWeight { line: 2, .. })
        ));
        assert!(matches!(parse_edge_list_str("0 1 NaN"), Err(Error::InvalidWeight { line: 1, .. })));
    }

    #[test]
    fn zero_weight_edges_accepted() {
        let g = parse_edge_list_str("0 1 0").unwrap().graph;
        assert_eq!(g.weight(0, 1), Some(0.0));
    }

    #[test]
    fn writer_output_reparses() {
        let g = g1();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("4 4\n0 1 1\n"));
        assert_eq!(parse_edge_list_str(&text).unwrap().graph, g);
    }

    #[test]
    fn weak_components() {
        assert!(weakly_connected_components(&g1()).iter().all(|&c| c == 0));
        assert_eq!(weakly_connected_components(&Digraph::empty(3)), vec![0, 1, 2]);
        let g = parse_edge_list_str(&format!("5 4\n{G1}")).unwrap().graph;
        assert_eq!(weakly_connected_components(&g), vec![0, 0, 0, 0, 1]);
    }

    #[test]
    fn g1_components_and_ranks() {
        let info = SccInfo::analyze(&g1());
        assert_eq!(info.num_sccs(), 2);
        assert!(info.same_scc(0, 1) && info.same_scc(1, 2));
        assert!(info.scc_id[0] < info.scc_id[3]);
        assert_eq!(info.skeleton_edge_count(), 1);
        assert_eq!(info.out_rank, vec![1, 1, 1, 0]);
        assert_eq!(info.in_rank, vec![0, 0, 0, 1]);
    }

    #[test]
    fn dag_is_its_own_skeleton() {
        let g = parse_edge_list_str("0 1 1\n0 2 1\n1 2 1\n2 3 1").unwrap().graph;
        let info = SccInfo::analyze(&g);
        assert_eq!(info.num_sccs(), 4);
        assert_eq!(info.skeleton_edge_count(), 4);
        for (u, v, _) in g.edges() {
            assert!(info.successors(info.scc_id[u]).contains(&info.scc_id[v]));
        }
    }

    #[test]
    fn parallel_cross_edges_collapse_in_skeleton() {
        let g = parse_edge_list_str("0 1 1\n1 0 1\n0 2 1\n1 2 1").unwrap().graph;
        let info = SccInfo::analyze(&g);
        assert_eq!(info.num_sccs(), 2);
        assert_eq!(info.skeleton_edge_count(), 1);
    }

    #[test]
    fn disjoint_two_cycles() {
        let g = parse_edge_list_str("0 1 1\n1 0 1\n2 3 1\n3 2 1").unwrap().graph;
        let info = SccInfo::analyze(&g);
        assert_eq!(info.num_sccs(), 2);
        assert_eq!(info.skeleton_edge_count(), 0);
        assert_eq!(info.num_wccs(), 2);
    }

    #[test]
    fn path_skeleton_ranks() {
        // components {0,1} -> {2} -> {3,4} -> {5}
        let g = parse_edge_list_str("0 1 1\n1 0 1\n1 2 1\n2 3 1\n3 4 1\n4 3 1\n4 5 1").unwrap().graph;
        let info = SccInfo::analyze(&g);
        assert_eq!(info.out_rank, vec![3, 3, 2, 1, 1, 0]);
        assert_eq!(info.in_rank, vec![0, 0, 1, 2, 2, 3]);
    }

    #[test]
    fn edgeless_ranks_are_zero() {
        let info = SccInfo::analyze(&Digraph::empty(4));
        assert_eq!(info.out_rank, vec![0; 4]);
        assert_eq!(info.in_rank, vec![0; 4]);
    }

    #[test]
    fn long_chain_does_not_overflow_stack() {
        let n = 200_000;
        let g = Digraph::from_edges(n, (0..n - 1).map(|v| (v, v + 1, 1.0))).unwrap().graph;
        let info = SccInfo::analyze(&g);
        assert_eq!(info.num_sccs(), n);
        assert_eq!(info.out_rank[0], n - 1);
    }
}
