use std::collections::{HashMap, HashSet};

use cyclesparse::cycles::{
    auxiliary_graph, extend_partial, extract_bounded_degree, move_edges, move_edges_expander,
    naive_cycle_decomposition, short_cycle_decomposition, CycleDecomposition,
    PartialCycleDecomposition, ShortCycleConfig, ShortCycleStats, ThroughPath,
};
use cyclesparse::generators;
use cyclesparse::graph::WeightedMultigraph;
use cyclesparse::rng::stream;
use cyclesparse::validate::check_cycle_decomposition;
use proptest::prelude::*;
use rand::Rng;

/// Edge-disjointness and shape of a partial decomposition onto S.
fn check_partial(g: &WeightedMultigraph, p: &PartialCycleDecomposition) {
    let ends: HashMap<usize, (usize, usize)> = g.edges.iter().map(|e| (e.id, (e.u, e.v))).collect();
    let s: HashSet<usize> = p.s.iter().copied().collect();
    let mut used = HashSet::new();
    for c in &p.closed {
        for id in c {
            assert!(used.insert(*id), "edge {id} reused");
        }
        let one = WeightedMultigraph {
            n: g.n,
            edges: c
                .iter()
                .map(|id| g.edges.iter().find(|e| e.id == *id).copied().unwrap())
                .collect(),
        };
        let d = CycleDecomposition {
            cycles: vec![c.clone()],
            extras: vec![],
            length_bound: c.len(),
            extras_bound: 0,
        };
        check_cycle_decomposition(&one, &d).unwrap();
    }
    for t in &p.through {
        assert!(s.contains(&t.s1) && s.contains(&t.s2));
        let mut at = t.s1;
        for (i, id) in t.path.iter().enumerate() {
            assert!(used.insert(*id), "edge {id} reused");
            let (u, v) = ends[id];
            at = if u == at {
                v
            } else if v == at {
                u
            } else {
                panic!("path breaks")
            };
            if i + 1 < t.path.len() {
                assert!(!s.contains(&at), "interior vertex in S");
            }
        }
        assert_eq!(at, t.s2);
        assert!(t.path.len() <= p.length_bound);
    }
}

#[test]
fn naive_examples() {
    let e = naive_cycle_decomposition(&WeightedMultigraph::empty(5));
    assert!(e.cycles.is_empty() && e.extras.is_empty());
    let tri = generators::cycle(3);
    let d = naive_cycle_decomposition(&tri);
    assert_eq!(d.cycles.len(), 0);
    assert_eq!(d.extras.len(), 3);
    let k5 = generators::complete(5);
    let d = naive_cycle_decomposition(&k5);
    let c = check_cycle_decomposition(&k5, &d).unwrap();
    assert!(c.max_len <= 4);
    assert!(c.extras <= 10);
    assert_eq!(d.cycle_edge_count() + d.extras.len(), 10);
}

#[test]
fn naive_pairs_parallel_edges() {
    let g =
        WeightedMultigraph::from_triples(2, &[(0, 1, 1), (0, 1, 1), (1, 0, 1), (0, 1, 1)]).unwrap();
    let d = naive_cycle_decomposition(&g);
    check_cycle_decomposition(&g, &d).unwrap();
    assert!(d.cycles.iter().all(|c| c.len() == 2));
}

#[test]
fn json_shape() {
    let k5 = generators::complete(5);
    let d = naive_cycle_decomposition(&k5);
    let j: serde_json::Value = serde_json::from_str(&d.to_json()).unwrap();
    for key in ["cycles", "extras", "L", "mhat"] {
        assert!(j.get(key).is_some(), "{key}");
    }
    assert_eq!(CycleDecomposition::from_json(&d.to_json()).unwrap(), d);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn naive_is_valid_on_random_multigraphs(seed in 0u64..10_000, n in 2usize..80, density in 1usize..8) {
        let mut r = stream(seed, "test", "naive", 0);
        let g = generators::random_multigraph(n, n * density, &mut r);
        let d = naive_cycle_decomposition(&g);
        let c = check_cycle_decomposition(&g, &d).map_err(TestCaseError::fail)?;
        prop_assert!(c.extras <= 2 * n);
        // Deterministic.
        prop_assert_eq!(naive_cycle_decomposition(&g), d);
    }
}

#[test]
fn bounded_degree_examples() {
    let mut r = stream(1, "test", "bdg", 0);
    let reg = generators::random_regular_multigraph(30, 6, &mut r);
    let b = extract_bounded_degree(&reg, 6).unwrap();
    assert_eq!(b.h, reg);
    assert_eq!(b.vertex_map, (0..30).collect::<Vec<_>>());
    // Star whose leaves carry three parallel edges each: centre degree 9.
    let star: Vec<(usize, usize, u128)> = (1..=3)
        .flat_map(|l| std::iter::repeat_n((0, l, 1), 3))
        .collect();
    let g = WeightedMultigraph::from_triples(4, &star).unwrap();
    let b = extract_bounded_degree(&g, 3).unwrap();
    assert_eq!(b.vertex_map.iter().filter(|&&v| v == 0).count(), 3);
    let deg = b.h.edge_degrees();
    for (x, &v) in b.vertex_map.iter().enumerate() {
        if v == 0 {
            assert_eq!(deg[x], 3);
        }
    }
    assert!(extract_bounded_degree(&generators::path(3), 2).is_err());
}

#[test]
fn bounded_degree_ranges_on_random_graphs() {
    let mut r = stream(2, "test", "bdg", 1);
    for _ in 0..20 {
        let n = r.gen_range(10..60);
        let g = generators::random_multigraph(n, n * r.gen_range(4..20), &mut r);
        let delta = g.edge_degrees().into_iter().min().unwrap();
        if delta == 0 {
            continue;
        }
        let b = extract_bounded_degree(&g, delta).unwrap();
        assert!(b.h.n <= 2 * g.n);
        for d in b.h.edge_degrees() {
            assert!(d >= delta && d <= 2 * delta, "{d} vs {delta}");
        }
        // Copies keep the endpoints of the original edges.
        let orig: HashMap<usize, (usize, usize)> =
            g.edges.iter().map(|e| (e.id, (e.u, e.v))).collect();
        for e in &b.h.edges {
            let (u, v) = orig[&e.id];
            let (a, c) = (b.vertex_map[e.u], b.vertex_map[e.v]);
            assert!((a, c) == (u, v) || (a, c) == (v, u));
        }
    }
}

#[test]
fn move_edges_expander_pairs_parallel_edges_first() {
    let mut r = stream(3, "test", "mee", 0);
    let mut g = generators::random_regular_multigraph(64, 12, &mut r);
    let p = 5;
    for i in 0..p {
        let (u, v) = (2 * i, 2 * i + 1);
        let id = 1000 + 2 * i;
        g.edges.push(cyclesparse::Edge::new(id, u, v, 1));
        g.edges.push(cyclesparse::Edge::new(id + 1, u, v, 1));
    }
    let simple_pairs: usize = {
        let mut c: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &g.edges {
            *c.entry((e.u.min(e.v), e.u.max(e.v))).or_default() += 1;
        }
        c.values().map(|x| x / 2).sum()
    };
    let mut st = ShortCycleStats::default();
    let part = move_edges_expander(&g, 0.3, 8, 11, &ShortCycleConfig::default(), &mut st).unwrap();
    assert!(part.closed.len() >= p);
    assert_eq!(part.closed.len(), simple_pairs);
    assert!(part.closed.iter().all(|c| c.len() == 2));
    check_partial(&g, &part);
}

#[test]
fn move_edges_expander_on_regular_graph() {
    let mut r = stream(4, "test", "mee", 1);
    let g = generators::random_regular_multigraph(512, 32, &mut r);
    let mut st = ShortCycleStats::default();
    let all: Vec<usize> = (0..512).collect();
    let phi = cyclesparse::linalg::lambda2_normalized(&g, &all) / 2.0;
    let part = move_edges_expander(&g, phi, 16, 5, &ShortCycleConfig::default(), &mut st).unwrap();
    check_partial(&g, &part);
    assert_eq!(part.s.len(), 32);
    assert!(!part.through.is_empty());
    assert!(
        st.max_congestion <= st.congestion_bound,
        "{} > {}",
        st.max_congestion,
        st.congestion_bound
    );
    assert!(
        !st.warnings.is_empty(),
        "desk-scale parameters violate the stated preconditions"
    );
}

#[test]
fn move_edges_examples() {
    let cfg = ShortCycleConfig::default();
    let mut r = stream(5, "test", "me", 0);
    // One expander component: all work goes to the walk routine.
    let g = generators::random_regular_multigraph(80, 16, &mut r);
    let mut st = ShortCycleStats::default();
    let p = move_edges(&g, 8, 1, &cfg, &mut st).unwrap();
    check_partial(&g, &p);
    assert_eq!(p.s.len(), 10);
    // Forest: nothing is dense, nothing becomes a cycle.
    let t = generators::path(30);
    let p = move_edges(&t, 8, 1, &cfg, &mut st).unwrap();
    assert_eq!(p.count(), 0);
    // Dumbbell: the bridge never appears in a cycle.
    let db = generators::dumbbell(20);
    let bridge = db.edges.last().unwrap().id;
    let p = move_edges(&db, 8, 2, &cfg, &mut st).unwrap();
    check_partial(&db, &p);
    assert!(p
        .closed
        .iter()
        .flatten()
        .chain(p.through.iter().flat_map(|t| t.path.iter()))
        .all(|&id| id != bridge));
    assert!(p.count() > 0);
}

#[test]
fn extend_examples() {
    let g = generators::cycle(6);
    let closed = PartialCycleDecomposition {
        s: vec![0],
        closed: vec![vec![0, 1, 2, 3, 4, 5]],
        through: vec![],
        length_bound: 6,
    };
    assert_eq!(
        extend_partial(&g, &closed, &[]).unwrap(),
        vec![vec![0, 1, 2, 3, 4, 5]]
    );
    let empty = PartialCycleDecomposition::default();
    assert!(extend_partial(&g, &empty, &[]).unwrap().is_empty());
    // Two through paths between S = {0, 3} on the 6-cycle form one
    // auxiliary 2-cycle that extends to the whole cycle.
    let part = PartialCycleDecomposition {
        s: vec![0, 3],
        closed: vec![],
        through: vec![
            ThroughPath {
                s1: 0,
                s2: 3,
                path: vec![0, 1, 2],
            },
            ThroughPath {
                s1: 3,
                s2: 0,
                path: vec![3, 4, 5],
            },
        ],
        length_bound: 3,
    };
    let aux = auxiliary_graph(&part);
    assert_eq!(aux.m(), 2);
    // The naive routine peels degree-2 vertices, so the auxiliary 2-cycle
    // is supplied directly.
    let aux_cycles = vec![vec![0, 1]];
    let ext = extend_partial(&g, &part, &aux_cycles).unwrap();
    assert_eq!(ext.len(), 1);
    let mut e = ext[0].clone();
    e.sort();
    assert_eq!(e, vec![0, 1, 2, 3, 4, 5]);
    assert!(ext[0].len() <= 2 * part.length_bound);
    // Missing path is reported.
    assert!(extend_partial(&g, &part, &[vec![0, 7]]).is_err());
}

#[test]
fn short_cycle_base_cases_match_naive() {
    let mut r = stream(6, "test", "short", 0);
    let g = generators::random_multigraph(40, 200, &mut r);
    let cfg = ShortCycleConfig::default();
    assert_eq!(
        short_cycle_decomposition(&g, 0, 16, 1, &cfg).unwrap().0,
        naive_cycle_decomposition(&g)
    );
    assert_eq!(
        short_cycle_decomposition(&g, 2, 64, 1, &cfg).unwrap().0,
        naive_cycle_decomposition(&g)
    );
}

#[test]
fn short_cycle_on_regular_graph() {
    let mut r = stream(7, "test", "short", 1);
    let g = generators::random_regular_multigraph(1024, 64, &mut r);
    let cfg = ShortCycleConfig::default();
    let t = std::time::Instant::now();
    let (d, st) = short_cycle_decomposition(&g, 1, 16, 3, &cfg).unwrap();
    let c = check_cycle_decomposition(&g, &d).unwrap();
    eprintln!(
        "{:?} {:?} iterations={} fallback={} in {:?}",
        c,
        st.warnings.len(),
        st.iterations,
        st.fallback_to_naive,
        t.elapsed()
    );
    assert_eq!(short_cycle_decomposition(&g, 1, 16, 3, &cfg).unwrap().0, d);
}
