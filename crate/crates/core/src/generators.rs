//! Random and structured graph families used by tests and the acceptance
//! suite.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{DirectedGraph, Edge, Weight, WeightedMultigraph};

fn build(n: usize, pairs: Vec<(usize, usize, Weight)>) -> WeightedMultigraph {
    WeightedMultigraph {
        n,
        edges: pairs
            .into_iter()
            .enumerate()
            .map(|(i, (u, v, w))| Edge::new(i, u, v, w))
            .collect(),
    }
}

pub fn path(n: usize) -> WeightedMultigraph {
    build(n, (1..n).map(|i| (i - 1, i, 1)).collect())
}

pub fn cycle(n: usize) -> WeightedMultigraph {
    build(n, (0..n).map(|i| (i, (i + 1) % n, 1)).collect())
}

pub fn complete(n: usize) -> WeightedMultigraph {
    let mut p = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            p.push((u, v, 1));
        }
    }
    build(n, p)
}

pub fn star(leaves: usize) -> WeightedMultigraph {
    build(leaves + 1, (1..=leaves).map(|i| (0, i, 1)).collect())
}

/// Erdős–Rényi G(n, p) with unit weights.
pub fn erdos_renyi<R: Rng>(n: usize, p: f64, rng: &mut R) -> WeightedMultigraph {
    let mut e = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                e.push((u, v, 1));
            }
        }
    }
    build(n, e)
}

/// G(n, p) conditioned on connectivity by adding a random spanning path
/// through any components left disconnected.
pub fn connected_erdos_renyi<R: Rng>(n: usize, p: f64, rng: &mut R) -> WeightedMultigraph {
    let mut g = erdos_renyi(n, p, rng);
    let (c, label) = g.components();
    if c > 1 {
        let mut reps = vec![usize::MAX; c];
        for v in 0..n {
            if reps[label[v]] == usize::MAX {
                reps[label[v]] = v;
            }
        }
        for w in reps.windows(2) {
            let id = g.edges.len();
            g.edges.push(Edge::new(id, w[0], w[1], 1));
        }
    }
    g
}

/// Random multigraph with `m` edges between uniformly chosen distinct
/// endpoints.
pub fn random_multigraph<R: Rng>(n: usize, m: usize, rng: &mut R) -> WeightedMultigraph {
    let mut e = Vec::with_capacity(m);
    if n >= 2 {
        while e.len() < m {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v {
                e.push((u, v, 1));
            }
        }
    }
    build(n, e)
}

/// d-regular multigraph from the configuration model; self-loops are
/// repaired by swapping endpoints with another random pair.
pub fn random_regular_multigraph<R: Rng>(n: usize, d: usize, rng: &mut R) -> WeightedMultigraph {
    assert!((n * d).is_multiple_of(2) && n >= 3);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    stubs.shuffle(rng);
    let mut pairs: Vec<(usize, usize)> = stubs.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    for i in 0..pairs.len() {
        while pairs[i].0 == pairs[i].1 {
            let a = pairs[i].0;
            let j = rng.gen_range(0..pairs.len());
            let (c, e) = pairs[j];
            if j != i && c != a && e != a {
                pairs[i] = (a, c);
                pairs[j] = (a, e);
            }
        }
    }
    build(n, pairs.into_iter().map(|(u, v)| (u, v, 1)).collect())
}

/// Two cliques of size `half` joined by one bridge edge.
pub fn dumbbell(half: usize) -> WeightedMultigraph {
    let mut p = Vec::new();
    for off in [0, half] {
        for u in 0..half {
            for v in u + 1..half {
                p.push((off + u, off + v, 1));
            }
        }
    }
    p.push((half - 1, half, 1));
    build(2 * half, p)
}

/// Assign random weights in `1..=wmax` to every edge.
pub fn with_random_weights<R: Rng>(
    g: &WeightedMultigraph,
    wmax: Weight,
    rng: &mut R,
) -> WeightedMultigraph {
    let mut h = g.clone();
    for e in &mut h.edges {
        e.w = rng.gen_range(1..=wmax);
    }
    h
}

/// Random Eulerian digraph: a sum of `count` random directed cycles with
/// lengths in [3, max_len] and random weights in 1..=wmax, plus a
/// Hamiltonian cycle to make it strongly connected.
pub fn random_circulation<R: Rng>(
    n: usize,
    count: usize,
    max_len: usize,
    wmax: Weight,
    rng: &mut R,
) -> DirectedGraph {
    let mut edges = Vec::new();
    let push = |edges: &mut Vec<Edge>, u: usize, v: usize, w: Weight| {
        let id = edges.len();
        edges.push(Edge::new(id, u, v, w));
    };
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let w = rng.gen_range(1..=wmax);
    for i in 0..n {
        push(&mut edges, perm[i], perm[(i + 1) % n], w);
    }
    let mut verts: Vec<usize> = (0..n).collect();
    for _ in 0..count {
        let len = rng.gen_range(3..=max_len.max(3).min(n));
        verts.shuffle(rng);
        let w = rng.gen_range(1..=wmax);
        for i in 0..len {
            push(&mut edges, verts[i], verts[(i + 1) % len], w);
        }
    }
    DirectedGraph { n, edges }
}
