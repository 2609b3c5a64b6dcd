//! Heuristic search for long simple paths in weighted digraphs.
//!
//! The solver has two stages. A heuristic depth-first search builds candidate
//! paths by mutating a single path in place, exploring neighbors in an order
//! derived from SCC ranks and walk-weight scores. Candidates are then improved
//! with pseudo-topological orders: the path is imposed on a random order that
//! respects the SCC condensation, one of its edges is "opened" so that every
//! eligible vertex sits between its endpoints, and the longest path of the
//! resulting DAG is recomputed incrementally.

pub mod dfs;
pub mod error;
pub mod generate;
pub mod graph;
pub mod opening;
pub mod oracle;
pub mod path;
pub mod pto;
pub mod rotate;
pub mod scoring;
pub mod solver;

pub use dfs::{choose_starts, choose_starts_among, dfs_search, DfsRun, EdgeCaps, Direction, SearchBudget, SearchOutcome, SearchPath, Step};
pub use error::{Error, Result};
pub use generate::{generate_planted, random_digraph, small_suite, Planted, SmallCase};
pub use graph::{
    compute_ranks, parse_edge_list, parse_edge_list_str, strongly_connected_components, weakly_connected_components,
    write_edge_list, Digraph, Neighbor, ParsedGraph, SccInfo,
};
pub use opening::{
    chord_rotation,
    heuristic_refine, improve_path, open_edge, reverse_block, EdgeOpener, ImproveOutcome,
    ImproveParams, OpenedOrder, Opening, Strategy,
};
pub use oracle::{brute_force_lsp, DEFAULT_ORACLE_CAP};
pub use path::Path;
pub use pto::{impose, is_strong_pto, lsp_dag, PseudoTopoOrder};
pub use rotate::{rotate_extend, RotateOutcome};
pub use scoring::{order_neighbors, path_weight_sums, vertex_scores, PathSums, ScoreTable};
pub use solver::{solve, ImprovementEvent, Instance, PhaseTimings, SolveReport, SolverConfig};
