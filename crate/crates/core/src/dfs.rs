//! Depth-first enumeration of simple paths by mutating a single path.

use std::time::{Duration, Instant};

use crate::graph::{Digraph, Neighbor, SccInfo};
use crate::path::Path;
use crate::scoring::ScoreTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Grow at the back, following out-edges.
    Forward,
    /// Grow at the front, following in-edges.
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Done,
    NotDone,
}

/// A path explored in place. Vertices are stored in growth order, so for a
/// backward search `verts` is the real path reversed.
///
/// `cursor[i]` is the position, in the flat adjacency array, of the edge
/// from `verts[i]` to `verts[i + 1]`; resuming from it gives the next sibling
/// in O(1). Entries inside a fixed root are placeholders.
#[derive(Debug, Clone)]
pub struct SearchPath<'g> {
    dir: Direction,
    offsets: &'g [usize],
    nbrs: &'g [Neighbor],
    verts: Vec<usize>,
    in_path: Vec<bool>,
    // weights of the edges inside the fixed root, in growth order
    root_w: Vec<f64>,
    prefix: Vec<f64>,
    cursor: Vec<usize>,
    root_len: usize,
    // pruning: with `caps` nonempty, `gain` holds, per non-root depth, what
    // the vertices still off the path could add at most
    caps: &'g [f64],
    gain: Vec<f64>,
    floor: f64,
}

/// Per-vertex caps on what one more vertex can add to a path: its heaviest
/// entering edge when paths grow forward, its heaviest leaving edge when
/// they grow backward.
#[derive(Debug, Clone)]
pub struct EdgeCaps {
    pub entering: Vec<f64>,
    pub leaving: Vec<f64>,
}

impl EdgeCaps {
    pub fn new(graph: &Digraph) -> Self {
        let heaviest = |nbrs: &[Neighbor]| nbrs.iter().map(|nb| nb.weight).fold(0.0, f64::max);
        EdgeCaps {
            entering: (0..graph.n()).map(|v| heaviest(graph.in_neighbors(v))).collect(),
            leaving: (0..graph.n()).map(|v| heaviest(graph.out_neighbors(v))).collect(),
        }
    }

    fn for_direction(&self, dir: Direction) -> &[f64] {
        match dir {
            Direction::Forward => &self.entering,
            Direction::Backward => &self.leaving,
        }
    }
}

impl<'g> SearchPath<'g> {
    /// Forward search rooted at `start`.
    pub fn new(graph: &'g Digraph, start: usize) -> Self {
        let n = graph.n();
        let mut in_path = vec![false; n];
        in_path[start] = true;
        let (offsets, nbrs) = graph.out_csr();
        let mut sp = SearchPath {
            dir: Direction::Forward,
            offsets,
            nbrs,
            verts: Vec::with_capacity(n),
            in_path,
            root_w: Vec::new(),
            prefix: Vec::with_capacity(n),
            cursor: Vec::with_capacity(n),
            root_len: 1,
            caps: &[],
            gain: Vec::new(),
            floor: f64::NEG_INFINITY,
        };
        sp.verts.push(start);
        sp.prefix.push(0.0);
        sp
    }

    /// Backward search that keeps `fixed` (a path of the graph, in real order)
    /// and extends it at the front.
    pub fn backward_from(graph: &'g Digraph, fixed: &Path) -> Self {
        assert!(!fixed.is_empty());
        let verts: Vec<usize> = fixed.vertices().iter().rev().copied().collect();
        let mut in_path = vec![false; graph.n()];
        let mut root_w = Vec::new();
        let mut prefix = vec![0.0];
        in_path[verts[0]] = true;
        for i in 1..verts.len() {
            in_path[verts[i]] = true;
            let w = graph.weight(verts[i], verts[i - 1]).expect("fixed part is a path");
            root_w.push(w);
            prefix.push(prefix[i - 1] + w);
        }
        let root_len = verts.len();
        let (offsets, nbrs) = graph.in_csr();
        SearchPath {
            dir: Direction::Backward,
            offsets,
            nbrs,
            cursor: vec![0; root_len - 1],
            verts,
            in_path,
            root_w,
            prefix,
            root_len,
            caps: &[],
            gain: Vec::new(),
            floor: f64::NEG_INFINITY,
        }
    }

    /// Skips every extension that cannot end up strictly heavier than
    /// `floor`, judging by `caps`. Call before the first step; `next_path`
    /// then visits only part of the paths, but never misses one heavier
    /// than the floor.
    pub fn prune_with(&mut self, caps: &'g EdgeCaps, floor: f64) {
        let caps = caps.for_direction(self.dir);
        let on_path: f64 = self.verts.iter().map(|&v| caps[v]).sum();
        let total: f64 = caps.iter().sum();
        self.caps = caps;
        self.gain = vec![total - on_path];
        self.floor = floor;
    }

    pub fn raise_floor(&mut self, floor: f64) {
        self.floor = self.floor.max(floor);
    }

    // nothing below the current path can beat the floor
    #[inline]
    fn hopeless(&self) -> bool {
        match self.gain.last() {
            Some(&g) => self.weight() + g <= self.floor,
            None => false,
        }
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    /// Vertices in growth order.
    pub fn vertices(&self) -> &[usize] {
        &self.verts
    }

    pub fn contains(&self, v: usize) -> bool {
        self.in_path[v]
    }

    pub fn weight(&self) -> f64 {
        *self.prefix.last().expect("nonempty path")
    }

    /// First edge out of the growing end, at or after adjacency index
    /// `after + 1` (from the start when `after` is `None`), whose other
    /// endpoint is not on the path. Returns the adjacency index and the entry.
    pub fn next_unexplored_edge(&self, after: Option<usize>) -> Option<(usize, Neighbor)> {
        let last = *self.verts.last()?;
        let base = self.offsets[last];
        let from = base + after.map_or(0, |i| i + 1);
        self.scan(last, from).map(|at| (at - base, self.nbrs[at]))
    }

    // flat position of the first unused neighbor of `v` at or after `from`
    #[inline]
    fn scan(&self, v: usize, from: usize) -> Option<usize> {
        let end = self.offsets[v + 1];
        if from >= end {
            return None;
        }
        self.nbrs[from..end].iter().position(|nb| !self.in_path[nb.vertex]).map(|i| from + i)
    }

    fn push(&mut self, at: usize) {
        let nb = self.nbrs[at];
        debug_assert!(!self.in_path[nb.vertex]);
        self.in_path[nb.vertex] = true;
        self.verts.push(nb.vertex);
        self.cursor.push(at);
        let total = self.weight() + nb.weight;
        self.prefix.push(total);
        if let Some(&g) = self.gain.last() {
            self.gain.push(g - self.caps[nb.vertex]);
        }
    }

    fn pop(&mut self) -> usize {
        debug_assert!(self.verts.len() > self.root_len);
        let v = self.verts.pop().expect("nonempty path");
        debug_assert!(self.in_path[v]);
        self.in_path[v] = false;
        self.prefix.pop();
        if !self.caps.is_empty() {
            self.gain.pop();
        }
        self.cursor.pop().expect("cursor per edge")
    }

    /// Advances to the next path in DFS order: extend if possible, otherwise
    /// backtrack to the deepest vertex with an unexplored sibling edge.
    pub fn next_path(&mut self) -> Step {
        let Some(&last) = self.verts.last() else {
            return Step::Done;
        };
        let mut next = if self.hopeless() { None } else { self.scan(last, self.offsets[last]) };
        while next.is_none() && self.verts.len() > self.root_len {
            let taken = self.pop();
            // siblings are bounded by the same estimate
            if self.hopeless() {
                continue;
            }
            let last = self.verts[self.verts.len() - 1];
            next = self.scan(last, taken + 1);
        }
        match next {
            None => Step::Done,
            Some(at) => {
                self.push(at);
                Step::NotDone
            }
        }
    }

    /// Snapshot in real orientation, weight summed front to back.
    pub fn to_path(&self) -> Path {
        match self.dir {
            Direction::Forward => Path::from_parts(self.verts.clone(), self.weight()),
            Direction::Backward => {
                let verts: Vec<usize> = self.verts.iter().rev().copied().collect();
                let fixed = self.root_w.len();
                let weight = (0..self.verts.len() - 1)
                    .rev()
                    .map(|i| if i < fixed { self.root_w[i] } else { self.nbrs[self.cursor[i]].weight })
                    .fold(0.0, |acc, w| acc + w);
                Path::from_parts(verts, weight)
            }
        }
    }
}

/// Limits for one `dfs_search` call. A zero time budget or a zero stagnation
/// cap returns the single-vertex path.
#[derive(Debug, Clone)]
pub struct SearchBudget {
    pub time: Option<Duration>,
    /// Stop a phase after this many consecutive paths without improvement.
    pub stagnation_iters: Option<u64>,
    /// Edges dropped from the front of the best path before searching backward.
    pub back_erase: usize,
    /// Share of `time` given to the forward phase.
    pub forward_fraction: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            time: Some(Duration::from_millis(100)),
            stagnation_iters: Some(1_000_000),
            back_erase: 3,
            forward_fraction: 0.7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best: Path,
    pub iterations: u64,
    pub improvements: u64,
    /// The forward phase enumerated every simple path from the start, so no
    /// path starting there beats `best` (or, with pruning against a shared
    /// floor, that floor).
    pub exhausted: bool,
}

struct PhaseResult {
    iterations: u64,
    improvements: u64,
    finished: bool,
}

// `idle` counts paths since the phase last improved `best` and carries over
// between calls
fn run_phase(
    sp: &mut SearchPath<'_>,
    deadline: Option<Instant>,
    stagnation: Option<u64>,
    idle: &mut u64,
    best: &mut Path,
) -> PhaseResult {
    let mut res = PhaseResult { iterations: 0, improvements: 0, finished: false };
    loop {
        if stagnation.is_some_and(|cap| *idle >= cap) {
            return res;
        }
        if res.iterations.is_multiple_of(256) && deadline.is_some_and(|d| Instant::now() >= d) {
            return res;
        }
        if sp.next_path() == Step::Done {
            res.finished = true;
            return res;
        }
        res.iterations += 1;
        *idle += 1;
        if sp.weight() > best.weight() {
            *best = sp.to_path();
            sp.raise_floor(best.weight());
            res.improvements += 1;
            *idle = 0;
        }
    }
}

struct Phase<'g> {
    search: SearchPath<'g>,
    idle: u64,
    finished: bool,
}

impl Phase<'_> {
    fn active(&self, stagnation: Option<u64>) -> bool {
        !self.finished && !stagnation.is_some_and(|cap| self.idle >= cap)
    }
}

/// A `dfs_search` that can be run in slices. Each slice gives the forward
/// phase its share of the time and the backward phase the rest; a phase that
/// runs out of paths or stagnates hands its time to the other.
pub struct DfsRun<'g> {
    graph: &'g Digraph,
    forward: Phase<'g>,
    backward: Option<Phase<'g>>,
    // the forward phase found a new best since the backward phase was seeded
    reseed: bool,
    best: Path,
    iterations: u64,
    improvements: u64,
    stagnation: Option<u64>,
    back_erase: usize,
    forward_fraction: f64,
    caps: Option<&'g EdgeCaps>,
    floor: f64,
}

impl<'g> DfsRun<'g> {
    pub fn new(graph: &'g Digraph, start: usize, budget: &SearchBudget) -> Self {
        DfsRun {
            graph,
            forward: Phase { search: SearchPath::new(graph, start), idle: 0, finished: false },
            backward: None,
            reseed: true,
            best: Path::single(start),
            iterations: 0,
            improvements: 0,
            stagnation: budget.stagnation_iters,
            back_erase: budget.back_erase,
            forward_fraction: budget.forward_fraction.clamp(0.0, 1.0),
            caps: None,
            floor: f64::NEG_INFINITY,
        }
    }

    /// Prunes both phases with `caps`; see `SearchPath::prune_with`.
    /// Without a floor from elsewhere, the run's own best serves.
    pub fn with_pruning(mut self, caps: &'g EdgeCaps) -> Self {
        self.forward.search.prune_with(caps, self.floor);
        self.caps = Some(caps);
        self
    }

    /// Lets the run skip anything not heavier than `floor`, typically the
    /// best path some other run found. Only matters with pruning on.
    pub fn raise_floor(&mut self, floor: f64) {
        self.floor = self.floor.max(floor);
        self.forward.search.raise_floor(floor);
        if let Some(back) = self.backward.as_mut() {
            back.search.raise_floor(floor);
        }
    }

    /// Nothing left to do: both phases ran out of paths or stagnated.
    pub fn is_finished(&self) -> bool {
        if self.stagnation == Some(0) {
            return true;
        }
        let backward_active = self.reseed || self.backward.as_ref().is_some_and(|b| b.active(self.stagnation));
        !self.forward.active(self.stagnation) && !backward_active
    }

    /// Searches for up to `time` (without limit when `None`).
    pub fn run_for(&mut self, time: Option<Duration>) {
        if time == Some(Duration::ZERO) || self.is_finished() {
            return;
        }
        let began = Instant::now();
        let end = time.map(|t| began + t);
        let forward_end = time.map(|t| began + t.mul_f64(self.forward_fraction));

        self.step_forward(forward_end);
        if self.reseed {
            let erase = self.back_erase.min(self.best.edge_count());
            let fixed = Path::from_parts(self.best.vertices()[erase..].to_vec(), 0.0);
            let mut search = SearchPath::backward_from(self.graph, &fixed);
            if let Some(caps) = self.caps {
                search.prune_with(caps, self.floor.max(self.best.weight()));
            }
            self.backward = Some(Phase { search, idle: 0, finished: false });
            self.reseed = false;
        }
        if let Some(back) = self.backward.as_mut().filter(|b| b.active(self.stagnation)) {
            let res = run_phase(&mut back.search, end, self.stagnation, &mut back.idle, &mut self.best);
            back.finished = res.finished;
            self.iterations += res.iterations;
            self.improvements += res.improvements;
        }
        if end.is_none_or(|e| Instant::now() < e) {
            self.step_forward(end);
        }
    }

    fn step_forward(&mut self, deadline: Option<Instant>) {
        if !self.forward.active(self.stagnation) {
            return;
        }
        let f = &mut self.forward;
        let res = run_phase(&mut f.search, deadline, self.stagnation, &mut f.idle, &mut self.best);
        f.finished = res.finished;
        self.iterations += res.iterations;
        self.improvements += res.improvements;
        self.reseed |= res.improvements > 0;
    }

    pub fn best(&self) -> &Path {
        &self.best
    }

    pub fn outcome(&self) -> SearchOutcome {
        SearchOutcome {
            best: self.best.clone(),
            iterations: self.iterations,
            improvements: self.improvements,
            exhausted: self.forward.finished,
        }
    }
}

/// Heuristic DFS from `start`. The forward phase enumerates paths from
/// `start` until its share of the budget runs out or everything has been
/// seen; then the best path loses its first `back_erase` edges and is
/// extended backward with the remaining budget. If the backward search
/// exhausts its paths early, the forward enumeration resumes where it
/// stopped. The best path is a copy and is never disturbed by later
/// mutation.
pub fn dfs_search(graph: &Digraph, start: usize, budget: &SearchBudget) -> SearchOutcome {
    let mut run = DfsRun::new(graph, start, budget);
    run.run_for(budget.time);
    run.outcome()
}

/// Up to `count` vertices of `candidates` with maximal out-rank, ties broken
/// by higher out-score and then smaller id.
pub fn choose_starts_among(
    info: &SccInfo,
    scores: &ScoreTable,
    candidates: impl IntoIterator<Item = usize>,
    count: usize,
) -> Vec<usize> {
    let mut vs: Vec<usize> = candidates.into_iter().collect();
    vs.sort_by(|&a, &b| {
        info.out_rank[b]
            .cmp(&info.out_rank[a])
            .then(scores.score_out[b].total_cmp(&scores.score_out[a]))
            .then(a.cmp(&b))
    });
    vs.truncate(count);
    vs
}

pub fn choose_starts(info: &SccInfo, scores: &ScoreTable, count: usize) -> Vec<usize> {
    choose_starts_among(info, scores, 0..info.scc_id.len(), count)
}
