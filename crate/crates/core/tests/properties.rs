mod common;

use std::collections::BTreeSet;

use common::*;
use longpath_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_path(g: &Digraph, rng: &mut ChaCha8Rng) -> Path {
    let mut verts = vec![rng.gen_range(0..g.n())];
    loop {
        let last = *verts.last().unwrap();
        let free: Vec<usize> =
            g.out_neighbors(last).iter().map(|nb| nb.vertex).filter(|v| !verts.contains(v)).collect();
        if free.is_empty() || rng.gen_bool(0.2) {
            break;
        }
        verts.push(free[rng.gen_range(0..free.len())]);
    }
    Path::from_vertices(g, verts).unwrap()
}

// longest skeleton path from each component, by memoized recursion
fn skeleton_depths(info: &SccInfo) -> Vec<usize> {
    fn depth(info: &SccInfo, c: usize, memo: &mut [Option<usize>]) -> usize {
        if let Some(d) = memo[c] {
            return d;
        }
        let d = info.successors(c).iter().map(|&s| 1 + depth(info, s, memo)).max().unwrap_or(0);
        memo[c] = Some(d);
        d
    }
    let mut memo = vec![None; info.num_sccs()];
    (0..info.num_sccs()).map(|c| depth(info, c, &mut memo)).collect()
}

fn reversed(g: &Digraph) -> Digraph {
    Digraph::from_edges(g.n(), g.edges().into_iter().map(|(u, v, w)| (v, u, w))).unwrap().graph
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn components_match_reachability(g in graphs(10)) {
        let info = SccInfo::analyze(&g);
        let r = reachability(&g);
        for (u, row) in r.iter().enumerate() {
            for (v, &fwd) in row.iter().enumerate() {
                prop_assert_eq!(info.same_scc(u, v), fwd && r[v][u]);
            }
        }
        let undirected = Digraph::from_edges(
            g.n(),
            g.edges().into_iter().flat_map(|(u, v, w)| [(u, v, w), (v, u, w)]),
        ).unwrap().graph;
        let ru = reachability(&undirected);
        for (u, row) in ru.iter().enumerate() {
            for (v, &linked) in row.iter().enumerate() {
                prop_assert_eq!(info.wcc_id[u] == info.wcc_id[v], linked);
            }
        }
    }

    #[test]
    fn skeleton_is_numbered_topologically(g in graphs(10)) {
        let info = SccInfo::analyze(&g);
        let mut expected = BTreeSet::new();
        for (u, v, _) in g.edges() {
            prop_assert!(info.scc_id[u] <= info.scc_id[v]);
            if info.scc_id[u] != info.scc_id[v] {
                expected.insert((info.scc_id[u], info.scc_id[v]));
            }
        }
        let mut actual = BTreeSet::new();
        for c in 0..info.num_sccs() {
            for &d in info.successors(c) {
                prop_assert!(c < d);
                prop_assert!(actual.insert((c, d)), "duplicate skeleton edge");
            }
        }
        prop_assert_eq!(actual, expected);
    }

    #[test]
    fn ranks_are_longest_skeleton_paths(g in graphs(10)) {
        let info = SccInfo::analyze(&g);
        let down = skeleton_depths(&info);
        let rev = SccInfo::analyze(&reversed(&g));
        let up = skeleton_depths(&rev);
        for v in 0..g.n() {
            prop_assert_eq!(info.out_rank[v], down[info.scc_id[v]]);
            prop_assert_eq!(info.in_rank[v], up[rev.scc_id[v]]);
            prop_assert_eq!(info.out_rank[v] == 0, info.successors(info.scc_id[v]).is_empty());
        }
    }

    #[test]
    fn edge_lists_round_trip(g in graphs(10)) {
        let mut text = Vec::new();
        write_edge_list(&g, &mut text).unwrap();
        let back = parse_edge_list(text.as_slice()).unwrap();
        prop_assert_eq!(back.self_loops_dropped, 0);
        prop_assert_eq!(back.duplicates_merged, 0);
        prop_assert_eq!(back.graph.n(), g.n());
        prop_assert_eq!(back.graph.edges(), g.edges());
    }

    #[test]
    fn walk_sums_match_enumeration(g in graphs(8)) {
        let sums = path_weight_sums(&g, 3);
        let rev = reversed(&g);
        for i in 1..=3 {
            for v in 0..g.n() {
                prop_assert!(close(sums.out[i][v], walk_weight_from(&g, v, i)));
                prop_assert!(close(sums.inc[i][v], walk_weight_from(&rev, v, i)));
                prop_assert!(sums.out[i][v] >= 0.0);
            }
        }
    }

    #[test]
    fn neighbor_order_is_a_deterministic_permutation(g in graphs(10)) {
        let info = SccInfo::analyze(&g);
        let scores = vertex_scores(path_weight_sums(&g, 3), &[1.0, 1.0, 1.0]);
        let sorted = order_neighbors(&g, &scores, &info, 1);
        let again = order_neighbors(&g, &scores, &info, 1);
        for v in 0..g.n() {
            let key = |nbrs: &[Neighbor]| {
                let mut pairs: Vec<(usize, u64)> = nbrs.iter().map(|nb| (nb.vertex, nb.weight.to_bits())).collect();
                pairs.sort_unstable();
                pairs
            };
            prop_assert_eq!(key(sorted.out_neighbors(v)), key(g.out_neighbors(v)));
            prop_assert_eq!(key(sorted.in_neighbors(v)), key(g.in_neighbors(v)));
            prop_assert_eq!(sorted.out_neighbors(v), again.out_neighbors(v));
            prop_assert_eq!(sorted.in_neighbors(v), again.in_neighbors(v));
        }
    }

    #[test]
    fn imposition_keeps_strong_orders(g in graphs(10), seed in any::<u64>()) {
        let info = SccInfo::analyze(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = PseudoTopoOrder::random(&info, &mut rng);
        prop_assert!(is_strong_pto(&g, &info, t.order()));
        let before = t.order().to_vec();
        let p = random_path(&g, &mut rng);
        impose(&mut t, &g, &p).unwrap();
        let after = t.order().to_vec();
        prop_assert!(is_strong_pto(&g, &info, &after));
        prop_assert!(t.inverse_consistent());
        for pos in 0..g.n() {
            prop_assert_eq!(info.scc_id[before[pos]], info.scc_id[after[pos]]);
            if !p.vertices().contains(&before[pos]) {
                prop_assert_eq!(before[pos], after[pos]);
            }
        }
        let positions: Vec<usize> = p.vertices().iter().map(|&v| t.position(v)).collect();
        prop_assert!(positions.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(lsp_dag(&g, &mut t).weight() >= p.weight() - 1e-12);
    }

    #[test]
    fn dag_program_returns_forward_heaviest_path(g in graphs(10), seed in any::<u64>()) {
        let info = SccInfo::analyze(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = PseudoTopoOrder::random(&info, &mut rng);
        let p = lsp_dag(&g, &mut t);
        p.validate(&g).unwrap();
        let best = t.values().iter().copied().fold(0.0, f64::max);
        prop_assert!(close(p.weight(), best));
        let positions: Vec<usize> = p.vertices().iter().map(|&v| t.position(v)).collect();
        prop_assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn incremental_program_matches_full(g in graphs(10), seed in any::<u64>()) {
        let info = SccInfo::analyze(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = PseudoTopoOrder::random(&info, &mut rng);
        t.update(&g);
        let n = g.n();
        let mut lowest = n;
        for _ in 0..3 {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if info.same_scc(t.vertex_at(i), t.vertex_at(j)) {
                t.swap_positions(i, j);
                lowest = lowest.min(i.min(j));
            }
        }
        t.recompute_from(&g, lowest);
        let mut full = PseudoTopoOrder::from_order(t.order().to_vec());
        full.recompute_from(&g, 0);
        for v in 0..n {
            prop_assert!(close(t.values()[v], full.values()[v]));
        }
    }

    #[test]
    fn openings_and_refinement_keep_invariants(g in graphs(9), seed in any::<u64>()) {
        let info = SccInfo::analyze(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_path(&g, &mut rng);
        prop_assume!(p.edge_count() > 0);
        let mut t = PseudoTopoOrder::random(&info, &mut rng);
        impose(&mut t, &g, &p).unwrap();
        let i = rng.gen_range(0..p.edge_count());
        let opened = open_edge(&mut t, &g, &info, &p, i, &mut rng).unwrap();
        let check = |t: &PseudoTopoOrder| {
            let positions: Vec<usize> = p.vertices().iter().map(|&v| t.position(v)).collect();
            is_strong_pto(&g, &info, t.order()) && positions.windows(2).all(|w| w[0] < w[1]) && t.inverse_consistent()
        };
        prop_assert!(check(&t));
        prop_assert_eq!(opened.block.start, t.position(p.vertices()[i]) + 1);
        prop_assert_eq!(opened.block.end, t.position(p.vertices()[i + 1]));
        reverse_block(&mut t, &info, &opened);
        prop_assert!(check(&t));
        heuristic_refine(&mut t, &g, &opened, 20, &mut rng);
        prop_assert!(check(&t));
        prop_assert!(lsp_dag(&g, &mut t).weight() >= p.weight() - 1e-12);
    }

    #[test]
    fn improvement_is_monotone(g in graphs(9), seed in any::<u64>()) {
        let info = SccInfo::analyze(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_path(&g, &mut rng);
        let out = improve_path(&g, &info, &p, &ImproveParams::default(), &mut rng);
        out.path.validate(&g).unwrap();
        prop_assert!(out.path.weight() >= p.weight());
        prop_assert!(out.converged);
    }

    #[test]
    fn enumeration_visits_each_simple_path_once(g in graphs(7)) {
        for start in 0..g.n() {
            let mut sp = SearchPath::new(&g, start);
            let mut seen = Vec::new();
            while sp.next_path() == Step::NotDone {
                seen.push(sp.vertices().to_vec());
            }
            let mut expected = simple_paths_from(&g, start);
            prop_assert_eq!(seen.len(), expected.len());
            seen.sort();
            expected.sort();
            prop_assert_eq!(seen, expected);
        }
    }

    #[test]
    fn solver_matches_exhaustive_search(g in graphs(8), seed in any::<u64>()) {
        let cfg = SolverConfig { budget_ms: 200, seed, ..SolverConfig::default() };
        let inst = Instance::preprocess(&g, &cfg).unwrap();
        let report = solve(&inst, &cfg).unwrap();
        prop_assert!(close(report.weight, heaviest(&g)));
        if !report.path.is_empty() {
            let p = Path::from_vertices(&g, report.path.clone()).unwrap();
            prop_assert!(close(p.weight(), report.weight));
        }
        let again = solve(&inst, &cfg).unwrap();
        prop_assert_eq!(&again.path, &report.path);
        prop_assert_eq!(again.iterations, report.iterations);
    }
}
