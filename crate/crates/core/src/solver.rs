//! End-to-end solve: preprocessing, heuristic DFS per weak component, then
//! edge-opening improvement of the best candidates.

use std::collections::HashSet;
use std::thread;
use std::time::{Duration, Instant};

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dfs::{choose_starts_among, DfsRun, EdgeCaps, SearchBudget, SearchOutcome};
use crate::error::{Error, Result};
use crate::graph::{Digraph, SccInfo};
use crate::opening::{improve_path, ImproveParams, Strategy};
use crate::path::Path;
use crate::rotate::rotate_extend;
use crate::scoring::{order_neighbors, path_weight_sums, vertex_scores, ScoreTable};

/// Every tunable of the solver. Deserializes from TOML/JSON with missing keys
/// taking their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub score_depth_k: usize,
    pub score_coeffs: Vec<f64>,
    pub low_indegree_threshold: usize,
    /// Total wall-clock budget for `solve`.
    pub budget_ms: u64,
    /// Per DFS phase: stop after this many paths without improvement.
    pub stagnation_iters: Option<u64>,
    pub back_erase: usize,
    /// DFS roots tried per weak component.
    pub starts_count: usize,
    /// Share of each DFS run spent searching forward before going backward.
    pub forward_fraction: f64,
    /// Share of `budget_ms` given to the DFS stage.
    pub dfs_fraction: f64,
    /// Let DFS skip branches that provably cannot beat the best path found.
    pub dfs_pruning: bool,
    /// Optional cap on the improvement stage.
    pub improve_budget_ms: Option<u64>,
    pub refine_steps_factor: f64,
    pub strategy: Strategy,
    /// Let the improvement stage move to different paths of equal weight.
    pub plateau_moves: bool,
    /// End rotations tried after each improvement run, at least twice the
    /// path's vertex count; 0 disables them.
    pub rotation_steps: usize,
    /// DFS results carried into the improvement stage.
    pub candidates: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            score_depth_k: 3,
            score_coeffs: vec![1.0, 1.0, 1.0],
            low_indegree_threshold: 1,
            budget_ms: 1000,
            stagnation_iters: Some(1_000_000),
            back_erase: 3,
            starts_count: 16,
            forward_fraction: 0.7,
            dfs_fraction: 0.9,
            dfs_pruning: true,
            improve_budget_ms: None,
            refine_steps_factor: 4.0,
            strategy: Strategy::All,
            plateau_moves: true,
            rotation_steps: 2000,
            candidates: 3,
            seed: 0,
            workers: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.score_depth_k == 0 {
            return fail("score_depth_k must be at least 1".into());
        }
        if self.score_coeffs.len() != self.score_depth_k {
            return fail(format!(
                "score_coeffs has {} entries, score_depth_k is {}",
                self.score_coeffs.len(),
                self.score_depth_k
            ));
        }
        if self.score_coeffs.iter().any(|a| !a.is_finite() || *a <= 0.0) {
            return fail("score_coeffs must be positive".into());
        }
        if !(self.dfs_fraction > 0.0 && self.dfs_fraction < 1.0) {
            return fail("dfs_fraction must lie in (0, 1)".into());
        }
        if !(self.forward_fraction > 0.0 && self.forward_fraction <= 1.0) {
            return fail("forward_fraction must lie in (0, 1]".into());
        }
        if !(self.refine_steps_factor.is_finite() && self.refine_steps_factor >= 0.0) {
            return fail("refine_steps_factor must be nonnegative".into());
        }
        if self.starts_count == 0 || self.workers == 0 || self.candidates == 0 {
            return fail("starts_count, workers and candidates must be positive".into());
        }
        Ok(())
    }
}

/// A graph with its components, scores and exploration-sorted adjacency.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: Digraph,
    pub info: SccInfo,
    pub scores: ScoreTable,
    pub caps: EdgeCaps,
}

impl Instance {
    pub fn preprocess(graph: &Digraph, config: &SolverConfig) -> Result<Instance> {
        config.validate()?;
        let info = SccInfo::analyze(graph);
        let scores = vertex_scores(path_weight_sums(graph, config.score_depth_k), &config.score_coeffs);
        let sorted = order_neighbors(graph, &scores, &info, config.low_indegree_threshold);
        let caps = EdgeCaps::new(&sorted);
        Ok(Instance { graph: sorted, info, scores, caps })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub dfs: f64,
    pub improve: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementEvent {
    pub phase: String,
    pub elapsed_ms: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub path: Vec<usize>,
    pub weight: f64,
    pub phase_timings_ms: PhaseTimings,
    pub seed: u64,
    pub workers: usize,
    pub iterations: u64,
    pub improvement_events: Vec<ImprovementEvent>,
    /// Every vertex of the winning component was a DFS root and each search
    /// ran to completion, or the path met a weight upper bound.
    pub proven_optimal: bool,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

struct Component {
    vertices: Vec<usize>,
    edges: usize,
    bound: f64,
}

/// Weight bound for any simple path inside `vertices`: each vertex but the
/// first is entered by one edge, each but the last leaves by one.
fn weight_bound(graph: &Digraph, vertices: &[usize]) -> f64 {
    let top = |mut ws: Vec<f64>| -> f64 {
        ws.sort_by(|a, b| b.total_cmp(a));
        ws.iter().take(vertices.len().saturating_sub(1)).sum()
    };
    let max_w = |nbrs: &[crate::graph::Neighbor]| nbrs.iter().map(|nb| nb.weight).fold(0.0, f64::max);
    let inb = top(vertices.iter().map(|&v| max_w(graph.in_neighbors(v))).collect());
    let outb = top(vertices.iter().map(|&v| max_w(graph.out_neighbors(v))).collect());
    inb.min(outb)
}

fn reaches(weight: f64, bound: f64) -> bool {
    weight >= bound - 1e-9 * bound.abs().max(1.0)
}

fn worker_rngs(seed: u64, workers: usize) -> Vec<ChaCha8Rng> {
    (0..workers)
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(w as u64);
            rng
        })
        .collect()
}

// Each worker owns every `workers`-th start. Passes over the searches that
// still have work split the remaining time evenly, so time left by searches
// that finish early goes to the others.
fn dfs_stage(inst: &Instance, cfg: &SolverConfig, starts: &[usize], deadline: Instant) -> Vec<SearchOutcome> {
    let workers = cfg.workers.min(starts.len()).max(1);
    let budget = SearchBudget {
        time: None,
        stagnation_iters: cfg.stagnation_iters,
        back_erase: cfg.back_erase,
        forward_fraction: cfg.forward_fraction,
    };
    let mut results: Vec<Option<SearchOutcome>> = vec![None; starts.len()];
    thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let budget = &budget;
                s.spawn(move || {
                    let mut runs: Vec<(usize, DfsRun)> = (w..starts.len())
                        .step_by(workers)
                        .map(|idx| {
                            let run = DfsRun::new(&inst.graph, starts[idx], budget);
                            (idx, if cfg.dfs_pruning { run.with_pruning(&inst.caps) } else { run })
                        })
                        .collect();
                    let mut floor = f64::NEG_INFINITY;
                    loop {
                        let mut pending: Vec<&mut DfsRun> =
                            runs.iter_mut().map(|(_, r)| r).filter(|r| !r.is_finished()).collect();
                        if pending.is_empty() || Instant::now() >= deadline {
                            break;
                        }
                        let count = pending.len();
                        for (k, run) in pending.iter_mut().enumerate() {
                            let left = deadline.saturating_duration_since(Instant::now());
                            if left.is_zero() {
                                break;
                            }
                            run.raise_floor(floor);
                            run.run_for(Some(left / (count - k) as u32));
                            floor = floor.max(run.best().weight());
                        }
                    }
                    runs.into_iter().map(|(idx, r)| (idx, r.outcome())).collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (idx, outcome) in h.join().expect("dfs worker panicked") {
                results[idx] = Some(outcome);
            }
        }
    });
    results.into_iter().map(|r| r.expect("every start searched")).collect()
}

struct WorkerResult {
    best: Path,
    openings: u64,
    events: Vec<(Instant, f64)>,
}

/// A contiguous piece of `path` keeping between half and all but one of its
/// vertices.
fn random_subpath<R: Rng + ?Sized>(graph: &Digraph, path: &Path, rng: &mut R) -> Path {
    let len = path.len();
    let keep = rng.gen_range(len.div_ceil(2)..len);
    let from = rng.gen_range(0..=len - keep);
    Path::from_vertices(graph, path.vertices()[from..from + keep].to_vec()).expect("piece of a path")
}

fn improve_stage(
    inst: &Instance,
    cfg: &SolverConfig,
    comp: &Component,
    candidates: &[Path],
    bound: f64,
    deadline: Instant,
    rngs: &mut [ChaCha8Rng],
) -> Vec<WorkerResult> {
    thread::scope(|s| {
        let handles: Vec<_> = rngs
            .iter_mut()
            .enumerate()
            .map(|(w, rng)| {
                s.spawn(move || {
                    let mut params = ImproveParams {
                        strategy: cfg.strategy,
                        refine_steps_factor: cfg.refine_steps_factor,
                        deadline: Some(deadline),
                        target: Some(bound),
                        plateau: cfg.plateau_moves,
                        patience: None,
                        chord_moves: true,
                    };
                    let mut pool = candidates.to_vec();
                    let mut res = WorkerResult { best: pool[0].clone(), openings: 0, events: Vec::new() };
                    let mut holder = 0;
                    let mut round = 0usize;
                    while Instant::now() < deadline && !reaches(res.best.weight(), bound) {
                        let idx = (w + round) % pool.len();
                        round += 1;
                        // about one sweep without progress, then hand over to rotations
                        let rotate = |path: Path, rng: &mut ChaCha8Rng| {
                            if cfg.rotation_steps == 0 {
                                return path;
                            }
                            let steps = cfg.rotation_steps.max(2 * path.len());
                            rotate_extend(&inst.graph, &path, steps, Some(deadline), rng).path
                        };
                        let start = rotate(pool[idx].clone(), rng);
                        params.patience = Some(start.edge_count() as u64 + 2);
                        let out = improve_path(&inst.graph, &inst.info, &start, &params, rng);
                        res.openings += out.openings;
                        let path = rotate(out.path, rng);
                        if path.weight() > res.best.weight() {
                            res.best = path.clone();
                            res.events.push((Instant::now(), res.best.weight()));
                            holder = idx;
                        }
                        if path.weight() > pool[idx].weight() || idx == holder {
                            pool[idx] = path;
                        } else if rng.gen_bool(0.5) && res.best.len() > 2 {
                            // stuck and not the best: regrow a random piece of the best
                            pool[idx] = random_subpath(&inst.graph, &res.best, rng);
                        } else {
                            let v = comp.vertices[rng.gen_range(0..comp.vertices.len())];
                            pool[idx] = Path::single(v);
                        }
                    }
                    res
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("improve worker panicked")).collect()
    })
}

/// Runs the full pipeline on a preprocessed instance.
pub fn solve(inst: &Instance, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let began = Instant::now();
    let budget = Duration::from_millis(cfg.budget_ms);
    let deadline = began + budget;
    let graph = &inst.graph;
    let n = graph.n();

    let mut report = SolveReport {
        path: Vec::new(),
        weight: 0.0,
        phase_timings_ms: PhaseTimings::default(),
        seed: cfg.seed,
        workers: cfg.workers,
        iterations: 0,
        improvement_events: Vec::new(),
        proven_optimal: true,
    };
    if n == 0 {
        return Ok(report);
    }

    let mut by_wcc: Vec<Vec<usize>> = vec![Vec::new(); inst.info.num_wccs()];
    for v in 0..n {
        by_wcc[inst.info.wcc_id[v]].push(v);
    }
    let mut comps: Vec<Component> = by_wcc
        .into_iter()
        .filter(|vs| vs.len() > 1)
        .map(|vertices| {
            let edges = vertices.iter().map(|&v| graph.out_degree(v)).sum();
            let bound = weight_bound(graph, &vertices);
            Component { vertices, edges, bound }
        })
        .collect();
    comps.sort_by(|a, b| b.bound.total_cmp(&a.bound));
    let total_edges: usize = comps.iter().map(|c| c.edges).sum::<usize>().max(1);

    let mut best = Path::single(0);
    let mut best_proven = comps.is_empty();
    let mut events: Vec<(Instant, &'static str, f64)> = Vec::new();

    // DFS stage
    let dfs_budget = budget.mul_f64(cfg.dfs_fraction);
    let mut pools: Vec<(usize, Vec<Path>, bool)> = Vec::new();
    for (ci, comp) in comps.iter().enumerate() {
        if comp.bound <= best.weight() {
            continue;
        }
        let share = dfs_budget.mul_f64(comp.edges as f64 / total_edges as f64);
        let starts = choose_starts_among(&inst.info, &inst.scores, comp.vertices.iter().copied(), cfg.starts_count);
        let outcomes = dfs_stage(inst, cfg, &starts, Instant::now() + share);
        report.iterations += outcomes.iter().map(|o| o.iterations).sum::<u64>();
        let exact = starts.len() == comp.vertices.len() && outcomes.iter().all(|o| o.exhausted);

        let mut seen = HashSet::new();
        let mut cands: Vec<Path> =
            outcomes.into_iter().map(|o| o.best).filter(|p| seen.insert(p.vertices().to_vec())).collect();
        cands.sort_by(|a, b| b.weight().total_cmp(&a.weight()));
        cands.truncate(cfg.candidates);
        let proven = exact || reaches(cands[0].weight(), comp.bound);
        if cands[0].weight() > best.weight() {
            best = cands[0].clone();
            best_proven = proven;
            events.push((Instant::now(), "dfs", best.weight()));
        }
        debug!("component {ci}: {} vertices, dfs best {}, proven {proven}", comp.vertices.len(), cands[0].weight());
        pools.push((ci, cands, proven));
    }
    let dfs_done = Instant::now();
    report.phase_timings_ms.dfs = ms(dfs_done - began);

    // improvement stage
    let mut improve_deadline = deadline;
    if let Some(cap) = cfg.improve_budget_ms {
        improve_deadline = improve_deadline.min(dfs_done + Duration::from_millis(cap));
    }
    let mut rngs = worker_rngs(cfg.seed, cfg.workers);
    let pending: Vec<_> = pools.into_iter().filter(|(_, _, proven)| !proven).collect();
    for (k, (ci, cands, _)) in pending.iter().enumerate() {
        let comp = &comps[*ci];
        if comp.bound <= best.weight() {
            continue;
        }
        let left = improve_deadline.saturating_duration_since(Instant::now());
        if left.is_zero() {
            break;
        }
        let rest_edges: usize = pending[k..].iter().map(|(cj, _, _)| comps[*cj].edges).sum();
        let comp_deadline = Instant::now() + left.mul_f64(comp.edges as f64 / rest_edges.max(1) as f64);
        let results = improve_stage(inst, cfg, comp, cands, comp.bound, comp_deadline, &mut rngs);
        for res in results {
            report.iterations += res.openings;
            for (at, w) in res.events {
                events.push((at, "improve", w));
            }
            if res.best.weight() > best.weight() {
                best_proven = reaches(res.best.weight(), comp.bound);
                best = res.best;
            }
        }
    }
    let finished = Instant::now();
    report.phase_timings_ms.improve = ms(finished - dfs_done);
    report.phase_timings_ms.total = ms(finished - began);

    events.sort_by_key(|e| e.0);
    let mut running = f64::NEG_INFINITY;
    for (at, phase, w) in events {
        if w > running {
            running = w;
            report.improvement_events.push(ImprovementEvent {
                phase: phase.to_string(),
                elapsed_ms: ms(at - began),
                weight: w,
            });
        }
    }

    debug_assert!(best.validate(graph).is_ok());
    report.weight = best.weight();
    report.path = best.into_vertices();
    report.proven_optimal = best_proven;
    Ok(report)
}
