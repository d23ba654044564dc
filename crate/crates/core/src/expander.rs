//! Conductance, lazy random walks and certified expander decompositions by
//! recursive spectral bisection.

use rand::Rng;

use crate::graph::WeightedMultigraph;
use crate::linalg::{fiedler, DENSE_LIMIT};

/// Conductance of a vertex subset, measured with full-graph degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conductance {
    pub value: f64,
    /// False when the value is a sweep-cut upper bound rather than the
    /// exact minimum.
    pub exact: bool,
}

pub const EXACT_CONDUCTANCE_LIMIT: usize = 20;

pub fn conductance(g: &WeightedMultigraph, s: &[usize]) -> Conductance {
    let deg = g.degrees();
    let k = s.len();
    if k < 2 {
        return Conductance {
            value: f64::INFINITY,
            exact: true,
        };
    }
    if k <= EXACT_CONDUCTANCE_LIMIT {
        let mut local = vec![usize::MAX; g.n];
        for (i, &v) in s.iter().enumerate() {
            local[v] = i;
        }
        let mut w = vec![vec![0.0f64; k]; k];
        for e in &g.edges {
            let (a, b) = (local[e.u], local[e.v]);
            if a != usize::MAX && b != usize::MAX {
                w[a][b] += e.w as f64;
                w[b][a] += e.w as f64;
            }
        }
        let vol: Vec<f64> = s.iter().map(|&v| deg[v] as f64).collect();
        let total: f64 = vol.iter().sum();
        // Gray-code walk over subsets containing vertex k-1 on the
        // complement side (each cut counted once).
        let mut inside = vec![false; k];
        let (mut cut, mut vin) = (0.0f64, 0.0f64);
        let mut best = f64::INFINITY;
        let steps: u64 = 1u64 << (k - 1);
        for i in 1..steps {
            let bit = i.trailing_zeros() as usize;
            let adding = !inside[bit];
            let mut to_in = 0.0;
            let mut to_out = 0.0;
            for j in 0..k {
                if j == bit {
                    continue;
                }
                if inside[j] {
                    to_in += w[bit][j];
                } else {
                    to_out += w[bit][j];
                }
            }
            if adding {
                cut += to_out - to_in;
                vin += vol[bit];
            } else {
                cut += to_in - to_out;
                vin -= vol[bit];
            }
            inside[bit] = adding;
            let denom = vin.min(total - vin);
            if denom > 0.0 {
                best = best.min(cut.max(0.0) / denom);
            } else if cut <= 0.0 {
                best = best.min(0.0);
            }
        }
        return Conductance {
            value: best,
            exact: true,
        };
    }
    let (_, vec) = fiedler(g, s, DENSE_LIMIT);
    let (_, val) = sweep_cut(g, s, &vec, &deg);
    Conductance {
        value: val,
        exact: false,
    }
}

/// Best prefix of `s` ordered by `score`, by conductance within `s`.
/// Returns the prefix length and its conductance.
fn sweep_cut(g: &WeightedMultigraph, s: &[usize], score: &[f64], deg: &[u128]) -> (usize, f64) {
    let k = s.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| score[a].total_cmp(&score[b]).then(s[a].cmp(&s[b])));
    let mut local = vec![usize::MAX; g.n];
    for (i, &v) in s.iter().enumerate() {
        local[v] = i;
    }
    let mut rank = vec![0usize; k];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    // delta[r]: change of cut weight when the vertex at rank r joins the prefix.
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); k];
    for e in &g.edges {
        let (a, b) = (local[e.u], local[e.v]);
        if a != usize::MAX && b != usize::MAX {
            adj[a].push((b, e.w as f64));
            adj[b].push((a, e.w as f64));
        }
    }
    let total: f64 = s.iter().map(|&v| deg[v] as f64).sum();
    let (mut cut, mut vol) = (0.0, 0.0);
    let mut best = (1, f64::INFINITY);
    for (r, &i) in order.iter().enumerate().take(k - 1) {
        for &(j, w) in &adj[i] {
            if rank[j] < r {
                cut -= w;
            } else {
                cut += w;
            }
        }
        vol += deg[s[i]] as f64;
        let denom = vol.min(total - vol);
        let phi = if denom > 0.0 {
            cut.max(0.0) / denom
        } else {
            f64::INFINITY
        };
        if phi < best.1 {
            best = (r + 1, phi);
        }
    }
    best
}

fn sorted_prefix(s: &[usize], score: &[f64], len: usize) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| score[a].total_cmp(&score[b]).then(s[a].cmp(&s[b])));
    let mut left: Vec<usize> = order[..len].iter().map(|&i| s[i]).collect();
    let mut right: Vec<usize> = order[len..].iter().map(|&i| s[i]).collect();
    left.sort_unstable();
    right.sort_unstable();
    (left, right)
}

/// Split a vertex set into the connected components of its induced subgraph
/// (restricted to edges whose positions are `alive`).
fn induced_components(
    g: &WeightedMultigraph,
    s: &[usize],
    alive: Option<&[bool]>,
) -> Vec<Vec<usize>> {
    let mut local = vec![usize::MAX; g.n];
    for (i, &v) in s.iter().enumerate() {
        local[v] = i;
    }
    let mut uf = crate::graph::UnionFind::new(s.len());
    for (p, e) in g.edges.iter().enumerate() {
        if alive.is_none_or(|a| a[p]) && local[e.u] != usize::MAX && local[e.v] != usize::MAX {
            uf.union(local[e.u], local[e.v]);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, &v) in s.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort_by_key(|c| c[0]);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpanderPartition {
    pub pieces: Vec<Vec<usize>>,
    /// Ids of edges whose endpoints lie in different pieces.
    pub boundary_edges: Vec<usize>,
    pub phi_target: f64,
    /// λ₂ of each piece (full-graph degrees); +∞ for singletons.
    pub certificates: Vec<f64>,
    /// Pieces of at most two vertices are accepted without the λ₂ test.
    pub trivial: Vec<bool>,
}

impl ExpanderPartition {
    /// Boundary edges divided by total edges.
    pub fn boundary_ratio(&self, m: usize) -> f64 {
        if m == 0 {
            0.0
        } else {
            self.boundary_edges.len() as f64 / m as f64
        }
    }

    pub fn piece_of(&self, n: usize) -> Vec<usize> {
        let mut p = vec![usize::MAX; n];
        for (i, s) in self.pieces.iter().enumerate() {
            for &v in s {
                p[v] = i;
            }
        }
        p
    }
}

/// Recursive spectral bisection: certify a piece when λ₂ of its
/// degree-normalized induced Laplacian (full-graph degrees) is at least
/// 2φ, otherwise split it at the best sweep cut of the Fiedler vector.
pub fn expander_decompose(g: &WeightedMultigraph, phi: f64) -> ExpanderPartition {
    expander_decompose_with(g, phi, DENSE_LIMIT)
}

pub fn expander_decompose_with(
    g: &WeightedMultigraph,
    phi: f64,
    dense_limit: usize,
) -> ExpanderPartition {
    let deg = g.degrees();
    let all: Vec<usize> = (0..g.n).collect();
    let mut stack = induced_components(g, &all, None);
    stack.reverse();
    let mut done: Vec<(Vec<usize>, f64, bool)> = Vec::new();
    while let Some(s) = stack.pop() {
        if s.len() <= 2 {
            let l2 = fiedler(g, &s, dense_limit).0;
            done.push((s, l2, true));
            continue;
        }
        let (l2, vec) = fiedler(g, &s, dense_limit);
        if l2 >= 2.0 * phi {
            done.push((s, l2, false));
            continue;
        }
        let (len, _) = sweep_cut(g, &s, &vec, &deg);
        let (left, right) = sorted_prefix(&s, &vec, len);
        let mut parts = induced_components(g, &left, None);
        parts.extend(induced_components(g, &right, None));
        for p in parts.into_iter().rev() {
            stack.push(p);
        }
    }
    done.sort_by_key(|(s, _, _)| s[0]);
    let mut piece = vec![usize::MAX; g.n];
    for (i, (s, _, _)) in done.iter().enumerate() {
        for &v in s {
            piece[v] = i;
        }
    }
    let boundary_edges = g
        .edges
        .iter()
        .filter(|e| piece[e.u] != piece[e.v])
        .map(|e| e.id)
        .collect();
    ExpanderPartition {
        certificates: done.iter().map(|d| d.1).collect(),
        trivial: done.iter().map(|d| d.2).collect(),
        pieces: done.into_iter().map(|d| d.0).collect(),
        boundary_edges,
        phi_target: phi,
    }
}

/// Edges split into a sparse part and dense components with certified edge
/// expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeExpanderSplit {
    pub sparse_edges: Vec<usize>,
    pub dense_components: Vec<Vec<usize>>,
    /// Certified lower bound on the edge expansion of each dense component:
    /// (λ₂/2)·d_min of the component's own normalized Laplacian.
    pub expansion_bounds: Vec<f64>,
}

impl EdgeExpanderSplit {
    pub fn sparse_ratio(&self, m: usize) -> f64 {
        if m == 0 {
            0.0
        } else {
            self.sparse_edges.len() as f64 / m as f64
        }
    }
}

/// Repeatedly cut components whose certified edge expansion is below
/// `alpha`. Cheeger on the component's own degrees gives conductance
/// ≥ λ₂/2, and edge expansion ≥ conductance·d_min.
pub fn ns_style_decompose(g: &WeightedMultigraph, alpha: f64) -> EdgeExpanderSplit {
    ns_style_decompose_with(g, alpha, DENSE_LIMIT)
}

pub fn ns_style_decompose_with(
    g: &WeightedMultigraph,
    alpha: f64,
    dense_limit: usize,
) -> EdgeExpanderSplit {
    let mut alive = vec![true; g.m()];
    let all: Vec<usize> = (0..g.n).collect();
    let mut stack = induced_components(g, &all, None);
    stack.reverse();
    let mut dense = Vec::new();
    let mut bounds = Vec::new();
    let mut local = vec![usize::MAX; g.n];
    while let Some(s) = stack.pop() {
        if s.len() < 2 {
            continue;
        }
        for (i, &v) in s.iter().enumerate() {
            local[v] = i;
        }
        let inner: Vec<usize> = (0..g.m())
            .filter(|&p| {
                alive[p] && local[g.edges[p].u] != usize::MAX && local[g.edges[p].v] != usize::MAX
            })
            .collect();
        let sub = WeightedMultigraph {
            n: s.len(),
            edges: inner
                .iter()
                .map(|&p| {
                    let e = g.edges[p];
                    crate::graph::Edge::new(p, local[e.u], local[e.v], e.w)
                })
                .collect(),
        };
        for &v in &s {
            local[v] = usize::MAX;
        }
        let ids: Vec<usize> = (0..s.len()).collect();
        let (l2, vec) = fiedler(&sub, &ids, dense_limit);
        let sdeg = sub.degrees();
        let dmin = sdeg.iter().copied().min().unwrap_or(0) as f64;
        let bound = l2 / 2.0 * dmin;
        if bound >= alpha {
            dense.push(s);
            bounds.push(bound);
            continue;
        }
        let (len, _) = sweep_cut(&sub, &ids, &vec, &sdeg);
        let (left, _) = sorted_prefix(&ids, &vec, len);
        let mut in_left = vec![false; s.len()];
        for &i in &left {
            in_left[i] = true;
        }
        for e in &sub.edges {
            if in_left[e.u] != in_left[e.v] {
                alive[e.id] = false;
            }
        }
        let lv: Vec<usize> = (0..s.len()).filter(|&i| in_left[i]).map(|i| s[i]).collect();
        let rv: Vec<usize> = (0..s.len())
            .filter(|&i| !in_left[i])
            .map(|i| s[i])
            .collect();
        let mut parts = induced_components(g, &lv, Some(&alive));
        parts.extend(induced_components(g, &rv, Some(&alive)));
        for p in parts.into_iter().rev() {
            stack.push(p);
        }
    }
    let mut comp = vec![usize::MAX; g.n];
    for (i, c) in dense.iter().enumerate() {
        for &v in c {
            comp[v] = i;
        }
    }
    let sparse_edges = g
        .edges
        .iter()
        .filter(|e| comp[e.u] == usize::MAX || comp[e.u] != comp[e.v])
        .map(|e| e.id)
        .collect();
    let mut order: Vec<usize> = (0..dense.len()).collect();
    order.sort_by_key(|&i| dense[i][0]);
    EdgeExpanderSplit {
        sparse_edges,
        dense_components: order.iter().map(|&i| dense[i].clone()).collect(),
        expansion_bounds: order.iter().map(|&i| bounds[i]).collect(),
    }
}

/// Lazy random walk over incidence lists (positions into `g.edges`).
/// Returns the visited vertices and the traversed edge positions; lazy steps
/// add nothing to the trace.
pub fn lazy_walk_trace<R: Rng>(
    g: &WeightedMultigraph,
    inc: &[Vec<usize>],
    start: usize,
    steps: usize,
    rng: &mut R,
) -> (Vec<usize>, Vec<usize>) {
    let mut verts = vec![start];
    let mut used = Vec::new();
    let mut cur = start;
    for _ in 0..steps {
        if rng.gen_bool(0.5) {
            continue;
        }
        let list = &inc[cur];
        if list.is_empty() {
            break;
        }
        let p = list[rng.gen_range(0..list.len())];
        cur = g.edges[p].other(cur);
        verts.push(cur);
        used.push(p);
    }
    (verts, used)
}

/// Endpoint of a lazy walk of `steps` steps. Errors on an isolated start.
pub fn lazy_random_walk<R: Rng>(
    g: &WeightedMultigraph,
    start: usize,
    steps: usize,
    rng: &mut R,
) -> crate::Result<usize> {
    let inc = g.incidence();
    if inc[start].is_empty() && steps > 0 {
        return Err(crate::Error::Precondition(format!(
            "vertex {start} is isolated"
        )));
    }
    let (v, _) = lazy_walk_trace(g, &inc, start, steps, rng);
    Ok(*v.last().unwrap())
}
