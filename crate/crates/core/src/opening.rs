//! Path improvement by opening edges inside pseudo-topological orders.
//!
//! With a path `P` imposed on a strong PTO, opening edge `p_i -> p_{i+1}`
//! moves every vertex that could sit on a path from `p_i` to `p_{i+1}` into a
//! block `B` between the two endpoints. The DAG dynamic program then finds
//! any improvement that inserts vertices of `B` there in the order they
//! happen to have. Reversing `B` and the swap heuristic give it more orders
//! to try.
//!
//! Every order handled here keeps each SCC in one contiguous block; all
//! operations preserve that.

use std::collections::HashMap;
use std::ops::Range;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Digraph, SccInfo};
use crate::path::Path;
use crate::pto::{impose, PseudoTopoOrder};

/// Which block orders `improve_path` tries for each opened edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// One random order of the block.
    Basic,
    /// The random order and its reverse.
    Reverse,
    /// The random order, then the swap heuristic.
    Heuristic,
    /// Random, reversed, then the swap heuristic.
    All,
}

impl Strategy {
    fn reverses(self) -> bool {
        matches!(self, Strategy::Reverse | Strategy::All)
    }

    fn refines(self) -> bool {
        matches!(self, Strategy::Heuristic | Strategy::All)
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(Strategy::Basic),
            "reverse" => Ok(Strategy::Reverse),
            "heuristic" => Ok(Strategy::Heuristic),
            "all" => Ok(Strategy::All),
            other => Err(Error::Config(format!("unknown strategy {other:?}"))),
        }
    }
}

/// What was opened: a path edge, or the space before the first or after the
/// last path vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Opening {
    Head,
    Edge(usize),
    Tail,
}

/// Result of an opening: the positions of the freshly shuffled block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenedOrder {
    pub opening: Opening,
    pub block: Range<usize>,
}

/// Reusable scratch space for repeated openings against the same path.
#[derive(Debug, Clone)]
pub struct EdgeOpener {
    on_path: Vec<bool>,
    path_verts: Vec<usize>,
    reach: Vec<bool>,
    coreach: Vec<bool>,
    touched: Vec<usize>,
}

impl EdgeOpener {
    pub fn new(graph: &Digraph, info: &SccInfo) -> Self {
        EdgeOpener {
            on_path: vec![false; graph.n()],
            path_verts: Vec::new(),
            reach: vec![false; info.num_sccs()],
            coreach: vec![false; info.num_sccs()],
            touched: Vec::new(),
        }
    }

    pub fn set_path(&mut self, path: &Path) {
        for &v in &self.path_verts {
            self.on_path[v] = false;
        }
        self.path_verts.clear();
        self.path_verts.extend_from_slice(path.vertices());
        for &v in &self.path_verts {
            self.on_path[v] = true;
        }
    }

    /// Opens edge `i` of the path last given to `set_path`, which must be
    /// imposed on `order`.
    pub fn open<R: Rng + ?Sized>(
        &mut self,
        order: &mut PseudoTopoOrder,
        info: &SccInfo,
        i: usize,
        rng: &mut R,
    ) -> Result<OpenedOrder> {
        let edges = self.path_verts.len().saturating_sub(1);
        if i >= edges {
            return Err(Error::InvalidEdgeIndex { index: i, edges });
        }
        let (a, b) = (self.path_verts[i], self.path_verts[i + 1]);
        let (sa, sb) = (info.scc_id[a], info.scc_id[b]);
        let (pa, pb) = (order.position(a), order.position(b));
        if pa >= pb {
            return Err(Error::InvalidPath("path is not imposed on the order".into()));
        }

        let mut lo = pa;
        while lo > 0 && info.scc_id[order.vertex_at(lo - 1)] == sa {
            lo -= 1;
        }
        let mut hi = pb + 1;
        while hi < order.len() && info.scc_id[order.vertex_at(hi)] == sb {
            hi += 1;
        }
        let window: Vec<usize> = order.order()[lo..hi].to_vec();

        let mut before = Vec::new();
        let mut left = Vec::new();
        let mut block = Vec::new();
        let mut right = Vec::new();
        let mut after = Vec::new();

        if sa == sb {
            for &v in &window {
                if !self.on_path[v] {
                    block.push(v);
                } else if order.position(v) <= pa {
                    left.push(v);
                } else {
                    right.push(v);
                }
            }
            block.shuffle(rng);
        } else {
            let runs = scc_runs(&window, info);
            let (first, last) = (runs[0].clone(), runs[runs.len() - 1].clone());
            debug_assert_eq!(info.scc_id[window[first.start]], sa);
            debug_assert_eq!(info.scc_id[window[last.start]], sb);
            let middle = &runs[1..runs.len() - 1];

            // Components of the window reachable from sa, and those reaching sb.
            self.mark_reach(info, sa);
            for r in middle {
                let c = info.scc_id[window[r.start]];
                if self.reach[c] {
                    self.mark_reach(info, c);
                }
            }
            self.coreach[sb] = true;
            self.touched.push(sb);
            for r in middle.iter().rev() {
                let c = info.scc_id[window[r.start]];
                if info.successors(c).iter().any(|&d| self.coreach[d]) {
                    self.coreach[c] = true;
                    self.touched.push(c);
                }
            }

            let mut between: Vec<(usize, Range<usize>)> = Vec::new();
            for r in middle {
                let c = info.scc_id[window[r.start]];
                match (self.reach[c], self.coreach[c]) {
                    (false, _) => before.extend_from_slice(&window[r.clone()]),
                    (true, true) => between.push((c, r.clone())),
                    (true, false) => after.extend_from_slice(&window[r.clone()]),
                }
            }
            for &c in &self.touched {
                self.reach[c] = false;
                self.coreach[c] = false;
            }
            self.touched.clear();

            for &v in &window[first] {
                if self.on_path[v] {
                    left.push(v);
                } else {
                    block.push(v);
                }
            }
            block.shuffle(rng);
            between.sort_by_key(|(c, _)| *c);
            for (_, r) in between {
                let start = block.len();
                block.extend_from_slice(&window[r]);
                debug_assert!(block[start..].iter().all(|&v| !self.on_path[v]));
                block[start..].shuffle(rng);
            }
            let start = block.len();
            for &v in &window[last] {
                if self.on_path[v] {
                    right.push(v);
                } else {
                    block.push(v);
                }
            }
            block[start..].shuffle(rng);
        }

        let block_start = lo + before.len() + left.len();
        let block_range = block_start..block_start + block.len();
        let arranged = before.iter().chain(&left).chain(&block).chain(&right).chain(&after);
        for (pos, &v) in (lo..).zip(arranged) {
            order.put(pos, v);
        }
        debug_assert!(order.inverse_consistent());
        Ok(OpenedOrder { opening: Opening::Edge(i), block: block_range })
    }

    /// Packs the non-path vertices of `scc(p_1)` right before `p_1` (head) or
    /// those of `scc(p_k)` right after `p_k` (tail), in random order, so the
    /// path can grow at that end.
    pub fn open_end<R: Rng + ?Sized>(
        &mut self,
        order: &mut PseudoTopoOrder,
        info: &SccInfo,
        tail: bool,
        rng: &mut R,
    ) -> Result<OpenedOrder> {
        let end = if tail { self.path_verts.last() } else { self.path_verts.first() };
        let Some(&a) = end else {
            return Err(Error::InvalidPath("cannot open the end of an empty path".into()));
        };
        let sa = info.scc_id[a];
        let pa = order.position(a);
        let mut lo = pa;
        while lo > 0 && info.scc_id[order.vertex_at(lo - 1)] == sa {
            lo -= 1;
        }
        let mut hi = pa + 1;
        while hi < order.len() && info.scc_id[order.vertex_at(hi)] == sa {
            hi += 1;
        }
        let mut kept = Vec::new();
        let mut block = Vec::new();
        for &v in &order.order()[lo..hi] {
            if self.on_path[v] {
                kept.push(v);
            } else {
                block.push(v);
            }
        }
        block.shuffle(rng);
        let (arranged, block_start, opening) = if tail {
            (kept.iter().chain(&block), lo + kept.len(), Opening::Tail)
        } else {
            (block.iter().chain(&kept), lo, Opening::Head)
        };
        for (pos, &v) in (lo..).zip(arranged) {
            order.put(pos, v);
        }
        debug_assert!(order.inverse_consistent());
        Ok(OpenedOrder { opening, block: block_start..block_start + block.len() })
    }

    fn mark_reach(&mut self, info: &SccInfo, c: usize) {
        for &d in info.successors(c) {
            if !self.reach[d] {
                self.reach[d] = true;
                self.touched.push(d);
            }
        }
    }
}

/// Maximal runs of consecutive entries of `seq` that share an SCC.
fn scc_runs(seq: &[usize], info: &SccInfo) -> Vec<Range<usize>> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=seq.len() {
        if i == seq.len() || !info.same_scc(seq[i], seq[start]) {
            if i > start {
                runs.push(start..i);
            }
            start = i;
        }
    }
    runs
}

/// Opens edge `i` of `path` (already imposed on `order`): the non-path
/// vertices of every SCC on a skeleton path from `scc(p_i)` to
/// `scc(p_{i+1})` are packed between the two endpoints, ordered by SCC and
/// shuffled within each SCC. Components in the way that do not belong there
/// move before or after, keeping their relative order.
pub fn open_edge<R: Rng + ?Sized>(
    order: &mut PseudoTopoOrder,
    graph: &Digraph,
    info: &SccInfo,
    path: &Path,
    i: usize,
    rng: &mut R,
) -> Result<OpenedOrder> {
    let mut opener = EdgeOpener::new(graph, info);
    opener.set_path(path);
    opener.open(order, info, i, rng)
}

/// Reverses the block in place, one SCC run at a time.
pub fn reverse_block(order: &mut PseudoTopoOrder, info: &SccInfo, opened: &OpenedOrder) {
    let seq = &order.order()[opened.block.clone()];
    let runs = scc_runs(seq, info);
    for r in runs {
        let (mut i, mut j) = (opened.block.start + r.start, opened.block.start + r.end);
        while i + 1 < j {
            j -= 1;
            order.swap_positions(i, j);
            i += 1;
        }
    }
}

/// `steps` attempts of the swap move: pick a random block vertex `u`; if some
/// out-neighbor `v` of `u` sits earlier in the block, swap a random such `v`
/// with `u`. Returns the number of swaps made.
pub fn heuristic_refine<R: Rng + ?Sized>(
    order: &mut PseudoTopoOrder,
    graph: &Digraph,
    opened: &OpenedOrder,
    steps: usize,
    rng: &mut R,
) -> usize {
    let block = opened.block.clone();
    if block.len() < 2 {
        return 0;
    }
    let mut swaps = 0;
    for _ in 0..steps {
        let pu = rng.gen_range(block.clone());
        let u = order.vertex_at(pu);
        let mut seen = 0;
        let mut chosen = None;
        for nb in graph.out_neighbors(u) {
            let pv = order.position(nb.vertex);
            if pv >= block.start && pv < pu {
                seen += 1;
                if rng.gen_range(0..seen) == 0 {
                    chosen = Some(pv);
                }
            }
        }
        if let Some(pv) = chosen {
            order.swap_positions(pu, pv);
            swaps += 1;
        }
    }
    swaps
}

#[derive(Debug, Clone)]
pub struct ImproveParams {
    pub strategy: Strategy,
    /// Swap attempts per opened edge, as a multiple of the block size.
    pub refine_steps_factor: f64,
    pub deadline: Option<Instant>,
    /// Stop as soon as the path reaches this weight.
    pub target: Option<f64>,
    /// Also accept a different path of equal weight, up to `k + 2` times in a
    /// row for a path with `k` edges.
    pub plateau: bool,
    /// Give up, unconverged, after this many openings in a row without a
    /// strict gain.
    pub patience: Option<u64>,
    /// Try `chord_rotation` at the start of every round; with `plateau`, also
    /// take equal-weight rearrangements of that kind before giving up.
    pub chord_moves: bool,
}

impl Default for ImproveParams {
    fn default() -> Self {
        ImproveParams { strategy: Strategy::All, refine_steps_factor: 4.0, deadline: None, target: None, plateau: false, patience: None, chord_moves: true }
    }
}

#[derive(Debug, Clone)]
pub struct ImproveOutcome {
    pub path: Path,
    pub rounds: u64,
    pub openings: u64,
    pub improvements: u64,
    /// A full sweep over the path's edges found nothing; false when the
    /// deadline or target ended the run.
    pub converged: bool,
}

fn improves(candidate: f64, current: f64) -> bool {
    candidate > current + 1e-12 * current.abs().max(1.0)
}

// uniform sample among the equal-weight alternatives met during a sweep
#[derive(Default)]
struct Sideways {
    seen: usize,
    path: Option<Path>,
}

impl Sideways {
    fn offer<R: Rng + ?Sized>(&mut self, rng: &mut R, make: impl FnOnce(&mut R) -> Option<Path>) {
        if let Some(path) = make(rng) {
            self.seen += 1;
            if rng.gen_range(0..self.seen) == 0 {
                self.path = Some(path);
            }
        }
    }
}

/// Local search with edge openings. Each round imposes the current path on a
/// fresh random PTO, then opens its edges in random order; any strictly
/// better DAG path replaces the current one and starts a new round. Stops
/// when a whole sweep brings no improvement, at the deadline, or on reaching
/// the target weight.
pub fn improve_path<R: Rng + ?Sized>(
    graph: &Digraph,
    info: &SccInfo,
    path: &Path,
    params: &ImproveParams,
    rng: &mut R,
) -> ImproveOutcome {
    let mut out = ImproveOutcome { path: path.clone(), rounds: 0, openings: 0, improvements: 0, converged: false };
    if path.is_empty() {
        out.converged = true;
        return out;
    }
    let expired = || params.deadline.is_some_and(|d| Instant::now() >= d);
    let reached = |p: &Path| params.target.is_some_and(|t| p.weight() >= t - 1e-9 * t.abs().max(1.0));
    let mut opener = EdgeOpener::new(graph, info);
    // sideways moves since the last strict improvement; past k + 2 of them
    // only strict gains count, so a run always ends with a full sweep that
    // found nothing
    let mut drifted = 0usize;
    let mut fruitless = 0u64;

    'round: loop {
        if reached(&out.path) || expired() {
            return out;
        }
        out.rounds += 1;
        if params.chord_moves {
            if let Some(better) = chord_rotation(graph, &out.path) {
                out.path = better;
                out.improvements += 1;
                drifted = 0;
                fruitless = 0;
                continue 'round;
            }
        }
        let k = out.path.edge_count();
        let mut side = (params.plateau && drifted < k + 2).then(Sideways::default);
        let mut order = PseudoTopoOrder::random(info, rng);
        impose(&mut order, graph, &out.path).expect("current path is valid");
        if try_order(&mut order, graph, &mut out, side.as_mut(), rng) {
            drifted = 0;
            fruitless = 0;
            continue 'round;
        }

        opener.set_path(&out.path);
        let mut openings: Vec<Opening> = (0..k).map(Opening::Edge).collect();
        openings.push(Opening::Head);
        openings.push(Opening::Tail);
        openings.shuffle(rng);
        for what in openings {
            if expired() || params.patience.is_some_and(|p| fruitless >= p) {
                return out;
            }
            let opened = match what {
                Opening::Edge(i) => opener.open(&mut order, info, i, rng),
                Opening::Head => opener.open_end(&mut order, info, false, rng),
                Opening::Tail => opener.open_end(&mut order, info, true, rng),
            }
            .expect("opening within the path");
            out.openings += 1;
            fruitless += 1;
            let mut gained = try_order(&mut order, graph, &mut out, side.as_mut(), rng);
            if !gained && opened.block.len() >= 2 && params.strategy.reverses() {
                reverse_block(&mut order, info, &opened);
                gained = try_order(&mut order, graph, &mut out, side.as_mut(), rng);
            }
            if !gained && opened.block.len() >= 2 && params.strategy.refines() {
                let steps = (params.refine_steps_factor * opened.block.len() as f64).ceil() as usize;
                heuristic_refine(&mut order, graph, &opened, steps, rng);
                gained = try_order(&mut order, graph, &mut out, side.as_mut(), rng);
            }
            if gained {
                drifted = 0;
                fruitless = 0;
                continue 'round;
            }
        }
        if let Some(mut side) = side {
            if params.chord_moves {
                side.offer(rng, |rng| chord_sideways(graph, &out.path, rng));
            }
            if let Some(next) = side.path {
                out.path = next;
                drifted += 1;
                continue 'round;
            }
        }
        out.converged = true;
        return out;
    }
}

/// The heaviest path made of two pieces of `path` glued by one edge that
/// points backward along it: `p_j .. p_b, p_a .. p_{j-1}` for an edge
/// `p_b -> p_a` with `a < j <= b`. Openings keep the path's own vertices in
/// order, so they never see these. Returns `None` unless it is strictly
/// heavier than `path`.
pub fn chord_rotation(graph: &Digraph, path: &Path) -> Option<Path> {
    let current = path.weight();
    let best = chord_candidates(graph, path)
        .into_iter()
        .filter(|c| improves(c.0, current))
        .max_by(|x, y| x.0.total_cmp(&y.0))?;
    Some(glue(graph, path, best))
}

// a random rearrangement of the same kind that loses no weight; the cut
// is random too, among the path edges light enough
fn chord_sideways<R: Rng + ?Sized>(graph: &Digraph, path: &Path, rng: &mut R) -> Option<Path> {
    let current = path.weight();
    let ties: Vec<_> = chord_candidates(graph, path).into_iter().filter(|c| !improves(current, c.0)).collect();
    let &(weight, a, j, b) = ties.choose(rng)?;
    let verts = path.vertices();
    let slack = weight - current;
    let lightest = graph.weight(verts[j - 1], verts[j]).expect("path edge");
    let cuts: Vec<usize> = (a..b)
        .filter(|&c| graph.weight(verts[c], verts[c + 1]).expect("path edge") <= lightest + slack)
        .collect();
    let cut = *cuts.choose(rng).expect("the lightest cut qualifies");
    Some(glue(graph, path, (weight, a, cut + 1, b)))
}

// (weight, a, j, b) for every backward edge p_b -> p_a, cutting the
// lightest path edge between them
fn chord_candidates(graph: &Digraph, path: &Path) -> Vec<(f64, usize, usize, usize)> {
    let verts = path.vertices();
    let k = verts.len();
    if k < 2 {
        return Vec::new();
    }
    let pos: HashMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let step: Vec<f64> = verts
        .windows(2)
        .map(|e| graph.weight(e[0], e[1]).expect("consecutive path vertices are adjacent"))
        .collect();
    let mut prefix = vec![0.0; k];
    for i in 1..k {
        prefix[i] = prefix[i - 1] + step[i - 1];
    }
    let lightest = SparseMin::new(&step);

    let mut found = Vec::new();
    for (b, &u) in verts.iter().enumerate().skip(1) {
        for nb in graph.out_neighbors(u) {
            match pos.get(&nb.vertex) {
                Some(&a) if a < b => {
                    let (cut, cut_w) = lightest.query(a, b);
                    found.push((prefix[b] - prefix[a] - cut_w + nb.weight, a, cut + 1, b));
                }
                _ => {}
            }
        }
    }
    found
}

fn glue(graph: &Digraph, path: &Path, (_, a, j, b): (f64, usize, usize, usize)) -> Path {
    let verts = path.vertices();
    let mut next = Vec::with_capacity(b - a + 1);
    next.extend_from_slice(&verts[j..=b]);
    next.extend_from_slice(&verts[a..j]);
    Path::from_vertices(graph, next).expect("glued pieces form a simple path")
}

// range minimum over a fixed slice, returning the index and value
struct SparseMin<'a> {
    values: &'a [f64],
    levels: Vec<Vec<usize>>,
}

impl<'a> SparseMin<'a> {
    fn new(values: &'a [f64]) -> Self {
        let mut levels = vec![(0..values.len()).collect::<Vec<_>>()];
        let mut width = 1;
        while 2 * width <= values.len() {
            let prev = levels.last().unwrap();
            let next = (0..=values.len() - 2 * width)
                .map(|i| {
                    let (x, y) = (prev[i], prev[i + width]);
                    if values[y] < values[x] { y } else { x }
                })
                .collect();
            levels.push(next);
            width *= 2;
        }
        SparseMin { values, levels }
    }

    // minimum over values[lo..hi], hi > lo
    fn query(&self, lo: usize, hi: usize) -> (usize, f64) {
        let level = (usize::BITS - 1 - (hi - lo).leading_zeros()) as usize;
        let (x, y) = (self.levels[level][lo], self.levels[level][hi - (1 << level)]);
        let i = if self.values[y] < self.values[x] { y } else { x };
        (i, self.values[i])
    }
}

// runs the DP on `order`; takes a strictly better path, or offers an equal
// one to `side`
fn try_order<R: Rng + ?Sized>(
    order: &mut PseudoTopoOrder,
    graph: &Digraph,
    out: &mut ImproveOutcome,
    side: Option<&mut Sideways>,
    rng: &mut R,
) -> bool {
    order.update(graph);
    let value = order.best_value();
    if improves(value, out.path.weight()) {
        out.path = order.extract_path(graph);
        out.improvements += 1;
        return true;
    }
    if let Some(side) = side {
        if !improves(out.path.weight(), value) {
            side.offer(rng, |rng| {
                let candidate = order.extract_path_random(graph, rng);
                (candidate.vertices() != out.path.vertices()).then_some(candidate)
            });
        }
    }
    false
}
