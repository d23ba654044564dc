use approx::assert_relative_eq;
use cyclesparse::expander::{
    conductance, expander_decompose, lazy_random_walk, ns_style_decompose,
};
use cyclesparse::generators;
use cyclesparse::graph::WeightedMultigraph;
use cyclesparse::rng::stream;
use nalgebra::DMatrix;
use rand::Rng;

/// Independent λ₂ oracle for the normalized induced Laplacian with
/// full-graph degrees.
fn lambda2_oracle(g: &WeightedMultigraph, s: &[usize]) -> f64 {
    let k = s.len();
    let deg = g.degrees();
    let mut m = DMatrix::<f64>::zeros(k, k);
    for e in &g.edges {
        let (Some(a), Some(b)) = (
            s.iter().position(|&x| x == e.u),
            s.iter().position(|&x| x == e.v),
        ) else {
            continue;
        };
        let w = e.w as f64;
        m[(a, a)] += w;
        m[(b, b)] += w;
        m[(a, b)] -= w;
        m[(b, a)] -= w;
    }
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] /= ((deg[s[i]] * deg[s[j]]) as f64).sqrt();
        }
    }
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    ev[1]
}

fn two_cliques(k: usize, bridge: bool) -> WeightedMultigraph {
    if bridge {
        return generators::dumbbell(k);
    }
    let mut g = generators::dumbbell(k);
    g.edges.pop();
    g
}

#[test]
fn conductance_examples() {
    let p = generators::path(3);
    let c = conductance(&p, &[0, 1]);
    assert!(c.exact);
    assert_relative_eq!(c.value, 1.0);
    let k4 = generators::complete(4);
    assert_relative_eq!(
        conductance(&k4, &[0, 1, 2, 3]).value,
        2.0 / 3.0,
        epsilon = 1e-12
    );
    let two = WeightedMultigraph::from_triples(4, &[(0, 1, 1), (2, 3, 1)]).unwrap();
    assert_eq!(conductance(&two, &[0, 1, 2, 3]).value, 0.0);
}

#[test]
fn decompose_disjoint_cliques() {
    let g = two_cliques(8, false);
    let p = expander_decompose(&g, 0.25);
    assert_eq!(
        p.pieces,
        vec![(0..8).collect::<Vec<_>>(), (8..16).collect()]
    );
    assert!(p.boundary_edges.is_empty());
    for c in &p.certificates {
        assert_relative_eq!(*c, 8.0 / 7.0, epsilon = 1e-9);
    }
}

#[test]
fn decompose_single_edge() {
    let g = generators::path(2);
    let p = expander_decompose(&g, 0.1);
    assert_eq!(p.pieces.len(), 1);
    assert_relative_eq!(p.certificates[0], 2.0, epsilon = 1e-12);
}

#[test]
fn decompose_dumbbell_cuts_bridge() {
    let g = two_cliques(8, true);
    let p = expander_decompose(&g, 0.25);
    assert_eq!(
        p.pieces,
        vec![(0..8).collect::<Vec<_>>(), (8..16).collect()]
    );
    assert_eq!(p.boundary_edges, vec![g.edges.last().unwrap().id]);
}

#[test]
fn certificates_recheck_and_projected_cheeger() {
    let mut r = stream(5, "test", "expander", 0);
    for trial in 0..6 {
        let g = if trial % 2 == 0 {
            generators::connected_erdos_renyi(60, 0.08, &mut r)
        } else {
            generators::random_multigraph(50, 120, &mut r)
        };
        let phi = 0.1;
        let p = expander_decompose(&g, phi);
        // Exact edge accounting.
        let piece = p.piece_of(g.n);
        assert!(piece.iter().all(|&x| x != usize::MAX));
        let inside = g.edges.iter().filter(|e| piece[e.u] == piece[e.v]).count();
        assert_eq!(inside + p.boundary_edges.len(), g.m());
        let deg = g.degrees();
        for (i, s) in p.pieces.iter().enumerate() {
            if p.trivial[i] || s.len() < 2 {
                continue;
            }
            let l2 = lambda2_oracle(&g, s);
            assert!((l2 - p.certificates[i]).abs() < 1e-8);
            assert!(l2 >= 2.0 * phi);
            for _ in 0..100 {
                let x: Vec<f64> = (0..g.n).map(|_| r.gen_range(-1.0..1.0)).collect();
                let vol: f64 = s.iter().map(|&v| deg[v] as f64).sum();
                let xhat: f64 = s.iter().map(|&v| deg[v] as f64 * x[v]).sum::<f64>() / vol;
                let lhs: f64 = g
                    .edges
                    .iter()
                    .filter(|e| piece[e.u] == i && piece[e.v] == i)
                    .map(|e| e.w as f64 * (x[e.u] - x[e.v]).powi(2))
                    .sum();
                let rhs: f64 = 0.5
                    * phi
                    * phi
                    * s.iter()
                        .map(|&v| deg[v] as f64 * (x[v] - xhat).powi(2))
                        .sum::<f64>();
                assert!(lhs >= rhs - 1e-12);
            }
        }
    }
}

#[test]
fn ns_style_examples() {
    let k16 = generators::complete(16);
    let s = ns_style_decompose(&k16, 1.0);
    assert!(s.sparse_edges.is_empty());
    assert_eq!(s.dense_components.len(), 1);
    let tree = generators::path(20);
    let s = ns_style_decompose(&tree, 2.0);
    assert_eq!(s.sparse_edges.len(), tree.m());
    assert!(s.dense_components.is_empty());
    let db = generators::dumbbell(16);
    let s = ns_style_decompose(&db, 2.0);
    assert_eq!(s.sparse_edges, vec![db.edges.last().unwrap().id]);
    assert_eq!(s.dense_components.len(), 2);
    for b in &s.expansion_bounds {
        assert!(*b >= 2.0);
    }
}

#[test]
fn lazy_walk_basics() {
    let mut r = stream(9, "test", "walk", 0);
    let k2 = generators::path(2);
    assert_eq!(lazy_random_walk(&k2, 0, 0, &mut r).unwrap(), 0);
    let n = 10_000;
    let stay = (0..n)
        .filter(|_| lazy_random_walk(&k2, 0, 1, &mut r).unwrap() == 0)
        .count() as f64;
    let chi2 = (stay - 5000.0).powi(2) / 5000.0 + (n as f64 - stay - 5000.0).powi(2) / 5000.0;
    assert!(chi2 < 10.83, "chi2 = {chi2}");
    let iso = WeightedMultigraph::from_triples(3, &[(0, 1, 1)]).unwrap();
    assert!(lazy_random_walk(&iso, 2, 3, &mut r).is_err());
}

#[test]
fn lazy_walk_mixing_hits_heavy_set() {
    let mut r = stream(10, "test", "walk", 1);
    let g = generators::random_regular_multigraph(64, 8, &mut r);
    let all: Vec<usize> = (0..64).collect();
    let phi = cyclesparse::linalg::lambda2_normalized(&g, &all) / 2.0;
    let steps = (10.0 / (phi * phi) * 64f64.ln()).ceil() as usize;
    let s: Vec<bool> = (0..64).map(|v| v < 8).collect();
    let trials = 100_000;
    let inc = g.incidence();
    let hits = (0..trials)
        .filter(|_| {
            let (v, _) = cyclesparse::expander::lazy_walk_trace(&g, &inc, 40, steps, &mut r);
            s[*v.last().unwrap()]
        })
        .count() as f64;
    let p = hits / trials as f64;
    let bound = (8.0 * 8.0) / (3.0 * g.m() as f64);
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    assert!(p + 3.0 * sigma >= bound, "p = {p}, bound = {bound}");
}
