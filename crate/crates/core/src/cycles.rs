//! Short cycle decompositions: the peel-then-BFS routine and the recursive
//! construction that ports edges onto a few high-degree vertices with
//! random walks.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expander::{lazy_walk_trace, ns_style_decompose};
use crate::graph::{Edge, WeightedMultigraph};
use crate::rng;

/// Edge-disjoint cycles (edge-id sequences forming closed walks) plus the
/// edges left over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleDecomposition {
    pub cycles: Vec<Vec<usize>>,
    pub extras: Vec<usize>,
    #[serde(rename = "L")]
    pub length_bound: usize,
    #[serde(rename = "mhat")]
    pub extras_bound: usize,
}

impl CycleDecomposition {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })
    }

    pub fn max_cycle_len(&self) -> usize {
        self.cycles.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn cycle_edge_count(&self) -> usize {
        self.cycles.iter().map(Vec::len).sum()
    }
}

pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Cycle length guaranteed by the peel-then-BFS routine.
pub fn naive_length_bound(n: usize) -> usize {
    2 * ceil_log2(n).max(1)
}

/// Multigraph with O(1) edge deletion: adjacency lists with swap-remove and
/// a stored slot per (edge, side).
struct DynGraph {
    ends: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    slot: Vec<[usize; 2]>,
    alive: Vec<bool>,
}

impl DynGraph {
    fn new(n: usize, ends: Vec<(usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        let mut slot = vec![[0; 2]; ends.len()];
        for (p, &(u, v)) in ends.iter().enumerate() {
            slot[p][0] = adj[u].len();
            adj[u].push(p);
            slot[p][1] = adj[v].len();
            adj[v].push(p);
        }
        let alive = vec![true; ends.len()];
        DynGraph {
            ends,
            adj,
            slot,
            alive,
        }
    }

    fn other(&self, p: usize, x: usize) -> usize {
        let (u, v) = self.ends[p];
        if u == x {
            v
        } else {
            u
        }
    }

    fn remove(&mut self, p: usize) {
        debug_assert!(self.alive[p]);
        self.alive[p] = false;
        let (u, v) = self.ends[p];
        for (side, x) in [(0, u), (1, v)] {
            let i = self.slot[p][side];
            self.adj[x].swap_remove(i);
            if i < self.adj[x].len() {
                let q = self.adj[x][i];
                let qs = if self.ends[q].0 == x { 0 } else { 1 };
                self.slot[q][qs] = i;
            }
        }
    }

    fn deg(&self, x: usize) -> usize {
        self.adj[x].len()
    }
}

/// Peel vertices of degree ≤ 2 into extras; BFS from the smallest remaining
/// vertex until the first non-tree edge and remove the cycle it closes.
/// Works on edge positions.
fn naive_positions(n: usize, ends: Vec<(usize, usize)>) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut g = DynGraph::new(n, ends);
    let mut cycles = Vec::new();
    let mut extras = Vec::new();
    let mut queue: Vec<usize> = (0..n).filter(|&v| (1..=2).contains(&g.deg(v))).collect();
    queue.reverse();
    let mut stamp = vec![0u32; n];
    let mut cur_stamp = 0u32;
    let mut par_edge = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    let mut bfs = Vec::new();
    let mut ptr = 0;
    loop {
        while let Some(v) = queue.pop() {
            let d = g.deg(v);
            if d == 0 || d > 2 {
                continue;
            }
            while let Some(&p) = g.adj[v].last() {
                let w = g.other(p, v);
                g.remove(p);
                extras.push(p);
                if (1..=2).contains(&g.deg(w)) {
                    queue.push(w);
                }
            }
        }
        while ptr < n && g.deg(ptr) == 0 {
            ptr += 1;
        }
        if ptr == n {
            break;
        }
        cur_stamp += 1;
        let r = ptr;
        stamp[r] = cur_stamp;
        par_edge[r] = usize::MAX;
        parent[r] = usize::MAX;
        depth[r] = 0;
        bfs.clear();
        bfs.push(r);
        let mut head = 0;
        let mut found = None;
        'outer: while head < bfs.len() {
            let x = bfs[head];
            head += 1;
            for &p in &g.adj[x] {
                if p == par_edge[x] {
                    continue;
                }
                let y = g.other(p, x);
                if stamp[y] != cur_stamp {
                    stamp[y] = cur_stamp;
                    par_edge[y] = p;
                    parent[y] = x;
                    depth[y] = depth[x] + 1;
                    bfs.push(y);
                } else {
                    found = Some((x, y, p));
                    break 'outer;
                }
            }
        }
        let (x, y, p) = found.expect("minimum degree 3 forces a non-tree edge");
        let (mut a, mut b) = (x, y);
        let (mut up_a, mut up_b) = (Vec::new(), Vec::new());
        while depth[a] > depth[b] {
            up_a.push(par_edge[a]);
            a = parent[a];
        }
        while depth[b] > depth[a] {
            up_b.push(par_edge[b]);
            b = parent[b];
        }
        while a != b {
            up_a.push(par_edge[a]);
            a = parent[a];
            up_b.push(par_edge[b]);
            b = parent[b];
        }
        let mut cyc = Vec::with_capacity(1 + up_a.len() + up_b.len());
        cyc.push(p);
        cyc.extend(up_b);
        cyc.extend(up_a.into_iter().rev());
        for &q in &cyc {
            let (u, v) = g.ends[q];
            g.remove(q);
            for w in [u, v] {
                if (1..=2).contains(&g.deg(w)) {
                    queue.push(w);
                }
            }
        }
        cycles.push(cyc);
    }
    debug_assert!(g.alive.iter().all(|a| !a));
    (cycles, extras)
}

/// Peel-then-BFS decomposition: cycles of length ≤ 2⌈log₂ n⌉ and at most
/// 2n extras. Parallel edges show up as length-2 cycles.
pub fn naive_cycle_decomposition(g: &WeightedMultigraph) -> CycleDecomposition {
    let ends = g.edges.iter().map(|e| (e.u, e.v)).collect();
    let (cycles, extras) = naive_positions(g.n, ends);
    CycleDecomposition {
        cycles: cycles
            .into_iter()
            .map(|c| c.into_iter().map(|p| g.edges[p].id).collect())
            .collect(),
        extras: extras.into_iter().map(|p| g.edges[p].id).collect(),
        length_bound: naive_length_bound(g.n),
        extras_bound: 2 * g.n,
    }
}

/// Vertex sequence of a closed walk given as edge ids (first vertex
/// repeated at the end), or None if the edges do not chain into one.
pub fn closed_walk_vertices(
    ends: &HashMap<usize, (usize, usize)>,
    cycle: &[usize],
) -> Option<Vec<usize>> {
    let &(a, b) = ends.get(cycle.first()?)?;
    'start: for start in [a, b] {
        let mut seq = vec![start];
        let mut cur = start;
        for id in cycle {
            let &(u, v) = ends.get(id)?;
            cur = if u == cur {
                v
            } else if v == cur {
                u
            } else {
                continue 'start;
            };
            seq.push(cur);
        }
        if cur == start {
            return Some(seq);
        }
    }
    None
}

/// Split a closed walk with distinct edges into simple cycles.
pub fn split_circuit(
    ends: &HashMap<usize, (usize, usize)>,
    circuit: &[usize],
) -> Result<Vec<Vec<usize>>> {
    let seq = closed_walk_vertices(ends, circuit)
        .ok_or_else(|| Error::Invariant("edge sequence is not a closed walk".into()))?;
    let mut out = Vec::new();
    let mut vstack = vec![seq[0]];
    let mut estack: Vec<usize> = Vec::new();
    let mut at: HashMap<usize, usize> = HashMap::new();
    at.insert(seq[0], 0);
    for (i, &id) in circuit.iter().enumerate() {
        let next = seq[i + 1];
        estack.push(id);
        if let Some(&p) = at.get(&next) {
            out.push(estack.split_off(p));
            for v in vstack.drain(p + 1..) {
                at.remove(&v);
            }
        } else {
            at.insert(next, vstack.len());
            vstack.push(next);
        }
    }
    debug_assert!(estack.is_empty());
    Ok(out)
}

/// Result of degree reduction: `h` keeps the edge ids of `g`;
/// `vertex_map[x]` is the vertex of `g` that copy `x` stands for.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedDegreeGraph {
    pub h: WeightedMultigraph,
    pub vertex_map: Vec<usize>,
}

/// Keep the first min(Δ, deg) edges at every vertex, then split vertices of
/// degree above 2Δ into ⌊deg/Δ⌋ copies with degrees within one of each
/// other.
pub fn extract_bounded_degree(g: &WeightedMultigraph, delta: usize) -> Result<BoundedDegreeGraph> {
    if delta == 0 {
        return Err(Error::Precondition("delta must be positive".into()));
    }
    let inc = g.incidence();
    if let Some(v) = (0..g.n).find(|&v| inc[v].len() < delta) {
        return Err(Error::Precondition(format!(
            "vertex {v} has degree {} < {delta}",
            inc[v].len()
        )));
    }
    let mut chosen = vec![false; g.m()];
    for list in &inc {
        for &p in list.iter().take(delta) {
            chosen[p] = true;
        }
    }
    let mut copy_base = vec![0usize; g.n];
    let mut copies = vec![1usize; g.n];
    let mut vertex_map = Vec::new();
    let mut hdeg = vec![0usize; g.n];
    for (p, e) in g.edges.iter().enumerate() {
        if chosen[p] {
            hdeg[e.u] += 1;
            hdeg[e.v] += 1;
        }
    }
    for v in 0..g.n {
        copy_base[v] = vertex_map.len();
        if hdeg[v] > 2 * delta {
            copies[v] = hdeg[v] / delta;
        }
        vertex_map.extend(std::iter::repeat_n(v, copies[v]));
    }
    let mut next = vec![0usize; g.n];
    let mut place = |v: usize| {
        let c = copy_base[v] + next[v] % copies[v];
        next[v] += 1;
        c
    };
    let mut edges = Vec::new();
    for (p, e) in g.edges.iter().enumerate() {
        if chosen[p] {
            let (a, b) = (place(e.u), place(e.v));
            edges.push(Edge::new(e.id, a, b, e.w));
        }
    }
    Ok(BoundedDegreeGraph {
        h: WeightedMultigraph {
            n: vertex_map.len(),
            edges,
        },
        vertex_map,
    })
}

/// A cycle of G/S through the contracted vertex: an edge-id path in G from
/// `s1` to `s2` (both in S) whose interior avoids S.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThroughPath {
    pub s1: usize,
    pub s2: usize,
    pub path: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PartialCycleDecomposition {
    pub s: Vec<usize>,
    /// Cycles that avoid S entirely (parallel pairs, naive cycles).
    pub closed: Vec<Vec<usize>>,
    pub through: Vec<ThroughPath>,
    /// Longest cycle in G/S.
    pub length_bound: usize,
}

impl PartialCycleDecomposition {
    pub fn count(&self) -> usize {
        self.closed.len() + self.through.len()
    }

    pub fn merge(&mut self, other: PartialCycleDecomposition) {
        self.s.extend(other.s);
        self.closed.extend(other.closed);
        self.through.extend(other.through);
        self.length_bound = self.length_bound.max(other.length_bound);
    }
}

/// The auxiliary graph G_S: one edge s1–s2 per through path with s1 ≠ s2.
/// Vertices are positions in `partial.s`; edge ids index `partial.through`.
pub fn auxiliary_graph(partial: &PartialCycleDecomposition) -> WeightedMultigraph {
    let pos: HashMap<usize, usize> = partial.s.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let edges = partial
        .through
        .iter()
        .enumerate()
        .filter(|(_, t)| t.s1 != t.s2)
        .map(|(i, t)| Edge::new(i, pos[&t.s1], pos[&t.s2], 1))
        .collect();
    WeightedMultigraph {
        n: partial.s.len(),
        edges,
    }
}

/// Turn cycles of the auxiliary graph back into cycles of `g`: every
/// auxiliary edge is replaced by its path, and the resulting circuits are
/// split into simple cycles. Closed cycles of the partial decomposition are
/// returned unchanged, and through paths with s1 = s2 are split directly.
pub fn extend_partial(
    g: &WeightedMultigraph,
    partial: &PartialCycleDecomposition,
    aux_cycles: &[Vec<usize>],
) -> Result<Vec<Vec<usize>>> {
    let ends: HashMap<usize, (usize, usize)> = g.edges.iter().map(|e| (e.id, (e.u, e.v))).collect();
    let mut out: Vec<Vec<usize>> = partial.closed.clone();
    for t in partial.through.iter().filter(|t| t.s1 == t.s2) {
        out.extend(split_circuit(&ends, &t.path)?);
    }
    let aux = auxiliary_graph(partial);
    let aux_ends: HashMap<usize, (usize, usize)> =
        aux.edges.iter().map(|e| (e.id, (e.u, e.v))).collect();
    for cyc in aux_cycles {
        let seq = closed_walk_vertices(&aux_ends, cyc).ok_or_else(|| {
            Error::Invariant(format!("auxiliary cycle {cyc:?} is not a closed walk"))
        })?;
        let mut circuit = Vec::new();
        for (i, &a) in cyc.iter().enumerate() {
            let t = partial.through.get(a).ok_or_else(|| {
                Error::Invariant(format!("auxiliary edge {a} has no recorded path"))
            })?;
            if partial.s[seq[i]] == t.s1 && partial.s[seq[i + 1]] == t.s2 {
                circuit.extend(t.path.iter().copied());
            } else {
                circuit.extend(t.path.iter().rev().copied());
            }
        }
        out.extend(split_circuit(&ends, &circuit)?);
    }
    Ok(out)
}

/// Where the conductance lower bound handed to the walk routine comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiSource {
    /// α / d_max from the edge-expansion guarantee.
    EdgeExpansion,
    /// The larger of α / d_max and the spectral certificate λ₂/2.
    Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortCycleConfig {
    /// Degree threshold; defaults to ⌈delta_base^l · k⌉.
    pub delta: Option<usize>,
    pub delta_base: f64,
    /// Stand-in for the expander-decomposition overhead when choosing α.
    pub gamma_ns: f64,
    /// Walk length is walk_const · φ⁻² · ln n.
    pub walk_const: f64,
    /// Walks tried per endpoint are walks_factor · k.
    pub walks_factor: usize,
    pub retry_budget: usize,
    pub halve_after: usize,
    pub phi_source: PhiSource,
    /// Turn precondition warnings into errors.
    pub strict: bool,
}

impl Default for ShortCycleConfig {
    fn default() -> Self {
        ShortCycleConfig {
            delta: None,
            delta_base: 2.0,
            gamma_ns: 1.0,
            walk_const: 10.0,
            walks_factor: 4,
            retry_budget: 20,
            halve_after: 10,
            phi_source: PhiSource::Certificate,
            strict: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ShortCycleStats {
    pub iterations: usize,
    pub fallback_to_naive: usize,
    pub warnings: Vec<String>,
    /// |E^s| / (α n) per call of the edge-expander split.
    pub measured_gamma: Vec<f64>,
    pub max_congestion: usize,
    pub congestion_bound: usize,
    pub retries: usize,
}

impl ShortCycleStats {
    fn warn(&mut self, strict: bool, msg: String) -> Result<()> {
        if strict {
            return Err(Error::Precondition(msg));
        }
        if !self.warnings.contains(&msg) {
            self.warnings.push(msg);
        }
        Ok(())
    }
}

fn ln(n: usize) -> f64 {
    (n.max(2) as f64).ln()
}

fn loop_erase(verts: &[usize], edges: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut vs = vec![verts[0]];
    let mut es = Vec::new();
    let mut at: HashMap<usize, usize> = HashMap::new();
    at.insert(verts[0], 0);
    for (i, &e) in edges.iter().enumerate() {
        let v = verts[i + 1];
        if let Some(&p) = at.get(&v) {
            for x in vs.drain(p + 1..) {
                at.remove(&x);
            }
            es.truncate(p);
        } else {
            at.insert(v, vs.len());
            vs.push(v);
            es.push(e);
        }
    }
    (vs, es)
}

/// One endpoint's walk: the first of up to `tries` lazy walks that avoids
/// edge `avoid` and ends in S, truncated at its first S vertex and
/// loop-erased. Returns (S vertex reached, path from start to it, edges
/// traversed by all walks).
fn walk_to_s<R: Rng>(
    g: &WeightedMultigraph,
    inc: &[Vec<usize>],
    in_s: &[bool],
    start: usize,
    avoid: usize,
    len: usize,
    tries: usize,
    rng: &mut R,
) -> (Option<(usize, Vec<usize>)>, Vec<usize>) {
    let mut usage = Vec::new();
    if in_s[start] {
        return (Some((start, Vec::new())), usage);
    }
    for _ in 0..tries {
        let (verts, used) = lazy_walk_trace(g, inc, start, len, rng);
        usage.extend_from_slice(&used);
        if used.contains(&avoid) || !in_s[*verts.last().unwrap()] {
            continue;
        }
        let first = verts.iter().position(|&v| in_s[v]).unwrap();
        let (vs, es) = loop_erase(&verts[..=first], &used[..first]);
        let path: Vec<usize> = es.into_iter().map(|p| g.edges[p].id).collect();
        return (Some((*vs.last().unwrap(), path)), usage);
    }
    (None, usage)
}

/// Port edges of an expander onto its ⌈n/k⌉ highest-degree vertices with
/// paired lazy random walks. Parallel edges are first paired into length-2
/// cycles.
pub fn move_edges_expander(
    g: &WeightedMultigraph,
    phi: f64,
    k: usize,
    seed: u64,
    cfg: &ShortCycleConfig,
    stats: &mut ShortCycleStats,
) -> Result<PartialCycleDecomposition> {
    let n = g.n;
    let lnn = ln(n);
    if (k as f64) < 10.0 * lnn {
        stats.warn(
            cfg.strict,
            format!("k = {k} below 10 ln n = {:.1}", 10.0 * lnn),
        )?;
    }
    let dmin = g.edge_degrees().into_iter().min().unwrap_or(0);
    if (k as f64) > phi * phi * dmin as f64 / (100.0 * lnn) {
        stats.warn(
            cfg.strict,
            format!("k = {k} above φ² d_min / (100 ln n) with φ = {phi:.3}, d_min = {dmin}"),
        )?;
    }
    let mut partial = PartialCycleDecomposition::default();

    // Pair parallel edges.
    let mut by_pair: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (p, e) in g.edges.iter().enumerate() {
        by_pair
            .entry((e.u.min(e.v), e.u.max(e.v)))
            .or_default()
            .push(p);
    }
    let mut paired = vec![false; g.m()];
    for list in by_pair.values() {
        for ch in list.chunks_exact(2) {
            partial
                .closed
                .push(vec![g.edges[ch[0]].id, g.edges[ch[1]].id]);
            paired[ch[0]] = true;
            paired[ch[1]] = true;
        }
    }
    if !partial.closed.is_empty() {
        partial.length_bound = 2;
    }
    let rest = WeightedMultigraph {
        n,
        edges: g
            .edges
            .iter()
            .enumerate()
            .filter(|(p, _)| !paired[*p])
            .map(|(_, e)| *e)
            .collect(),
    };
    let inc = rest.incidence();
    let deg: Vec<usize> = inc.iter().map(Vec::len).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| deg[b].cmp(&deg[a]).then(a.cmp(&b)));
    let s_size = n.div_ceil(k.max(1));
    let mut in_s = vec![false; n];
    for &v in order.iter().take(s_size) {
        in_s[v] = true;
    }
    partial.s = order[..s_size].to_vec();
    partial.s.sort_unstable();

    let len = (cfg.walk_const * lnn / (phi * phi)).ceil() as usize;
    let tries = cfg.walks_factor * k;
    let congestion_bound = 4 * k * len;
    stats.congestion_bound = stats.congestion_bound.max(congestion_bound);
    let threshold = phi.powi(4) * g.m() as f64 / (2e3 * k as f64 * lnn * lnn);
    let mut required = threshold.floor() as usize;
    let id_pos: HashMap<usize, usize> = rest
        .edges
        .iter()
        .enumerate()
        .map(|(p, e)| (e.id, p))
        .collect();

    for round in 0..cfg.retry_budget.max(1) {
        if round > 0 && round % cfg.halve_after.max(1) == 0 {
            required /= 2;
            stats.warn(false, format!("cycle count threshold halved to {required}"))?;
        }
        let results: Vec<(Option<ThroughPath>, Vec<usize>)> = (0..rest.m())
            .into_par_iter()
            .map(|p| {
                let e = rest.edges[p];
                let path_idx = (e.id as u64) ^ ((round as u64) << 48);
                let mut r = rng::stream(seed, "cycle-decomp", "move_edges_expander", path_idx);
                let (a, mut usage) = walk_to_s(&rest, &inc, &in_s, e.u, p, len, tries, &mut r);
                let Some((s1, pu)) = a else {
                    return (None, usage);
                };
                let (b, usage_b) = walk_to_s(&rest, &inc, &in_s, e.v, p, len, tries, &mut r);
                usage.extend(usage_b);
                let Some((s2, pv)) = b else {
                    return (None, usage);
                };
                if pu.iter().any(|x| pv.contains(x)) {
                    return (None, usage);
                }
                let mut path: Vec<usize> = pu.into_iter().rev().collect();
                path.push(e.id);
                path.extend(pv);
                (Some(ThroughPath { s1, s2, path }), usage)
            })
            .collect();
        let mut congestion = vec![0usize; rest.m()];
        for (_, usage) in &results {
            for &p in usage {
                congestion[p] += 1;
            }
        }
        stats.max_congestion = stats
            .max_congestion
            .max(congestion.into_iter().max().unwrap_or(0));
        let mut cands: Vec<ThroughPath> = results.into_iter().filter_map(|r| r.0).collect();
        cands.sort_by(|a, b| {
            a.path
                .len()
                .cmp(&b.path.len())
                .then(a.path[0].cmp(&b.path[0]))
        });
        let mut used = vec![false; rest.m()];
        let mut chosen = Vec::new();
        for c in cands {
            if c.path.iter().any(|id| used[id_pos[id]]) {
                continue;
            }
            for id in &c.path {
                used[id_pos[id]] = true;
            }
            chosen.push(c);
        }
        if chosen.len() >= required {
            for c in &chosen {
                partial.length_bound = partial.length_bound.max(c.path.len());
            }
            partial.through = chosen;
            return Ok(partial);
        }
        stats.retries += 1;
    }
    Err(Error::RetryBudget(format!(
        "fewer than {required} cycles after {} rounds (n = {n}, m = {}, φ = {phi:.3})",
        cfg.retry_budget,
        g.m()
    )))
}

/// Edge-expander split with α = d_min / (4γ); small dense components are
/// decomposed naively, large ones through [`move_edges_expander`].
pub fn move_edges(
    g: &WeightedMultigraph,
    k: usize,
    seed: u64,
    cfg: &ShortCycleConfig,
    stats: &mut ShortCycleStats,
) -> Result<PartialCycleDecomposition> {
    let deg = g.edge_degrees();
    let dmin = deg.iter().copied().min().unwrap_or(0);
    let dmax = deg.iter().copied().max().unwrap_or(0);
    let mut out = PartialCycleDecomposition::default();
    if g.m() == 0 {
        return Ok(out);
    }
    let lnn = ln(g.n);
    let ratio = dmax as f64 / dmin.max(1) as f64;
    let need = 8000.0 * ratio * ratio * cfg.gamma_ns.powi(3) * k as f64 * lnn;
    if (dmin as f64) < need {
        stats.warn(
            cfg.strict,
            format!("d_min = {dmin} below the degree threshold {need:.0}"),
        )?;
    }
    let alpha = dmin as f64 / (4.0 * cfg.gamma_ns);
    let split = ns_style_decompose(g, alpha);
    stats
        .measured_gamma
        .push(split.sparse_edges.len() as f64 / (alpha * g.n as f64).max(1e-300));
    let mut comp = vec![usize::MAX; g.n];
    for (i, c) in split.dense_components.iter().enumerate() {
        for &v in c {
            comp[v] = i;
        }
    }
    for (i, c) in split.dense_components.iter().enumerate() {
        let mut local = HashMap::new();
        for (j, &v) in c.iter().enumerate() {
            local.insert(v, j);
        }
        let sub = WeightedMultigraph {
            n: c.len(),
            edges: g
                .edges
                .iter()
                .filter(|e| comp[e.u] == i && comp[e.v] == i)
                .map(|e| Edge::new(e.id, local[&e.u], local[&e.v], e.w))
                .collect(),
        };
        if c.len() <= k {
            let d = naive_cycle_decomposition(&sub);
            out.length_bound = out.length_bound.max(d.max_cycle_len());
            out.closed.extend(d.cycles);
            continue;
        }
        let sdeg = sub.edge_degrees();
        let sub_dmax = sdeg.iter().copied().max().unwrap_or(1).max(1);
        let mut phi = alpha / sub_dmax as f64;
        if cfg.phi_source == PhiSource::Certificate {
            let cert =
                split.expansion_bounds[i] / sdeg.iter().copied().min().unwrap_or(1).max(1) as f64;
            phi = phi.max(cert);
        }
        let phi = phi.min(0.5);
        let sub_seed = seed ^ ((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut part = move_edges_expander(&sub, phi, k, sub_seed, cfg, stats)?;
        part.s = part.s.iter().map(|&v| c[v]).collect();
        for t in &mut part.through {
            t.s1 = c[t.s1];
            t.s2 = c[t.s2];
        }
        out.merge(part);
    }
    Ok(out)
}

/// Default degree threshold ⌈delta_base^l · k⌉.
pub fn default_delta(cfg: &ShortCycleConfig, l: usize, k: usize) -> usize {
    cfg.delta
        .unwrap_or_else(|| (cfg.delta_base.powi(l as i32) * k as f64).ceil() as usize)
        .max(3)
}

/// Recursive short cycle decomposition with `l` levels and reduction
/// factor `k`.
pub fn short_cycle_decomposition(
    g: &WeightedMultigraph,
    l: usize,
    k: usize,
    seed: u64,
    cfg: &ShortCycleConfig,
) -> Result<(CycleDecomposition, ShortCycleStats)> {
    let mut stats = ShortCycleStats::default();
    let d = short_rec(g, l, k, seed, cfg, &mut stats, 0)?;
    Ok((d, stats))
}

fn short_rec(
    g: &WeightedMultigraph,
    l: usize,
    k: usize,
    seed: u64,
    cfg: &ShortCycleConfig,
    stats: &mut ShortCycleStats,
    path: u64,
) -> Result<CycleDecomposition> {
    if l == 0 || g.n < k {
        return Ok(naive_cycle_decomposition(g));
    }
    if (k as f64) < 10.0 * ln(g.n) {
        stats.warn(
            cfg.strict,
            format!("k = {k} below 10 ln n = {:.1}", 10.0 * ln(g.n)),
        )?;
    }
    let delta = default_delta(cfg, l, k);
    let ends: HashMap<usize, (usize, usize)> = g.edges.iter().map(|e| (e.id, (e.u, e.v))).collect();
    let pos: HashMap<usize, usize> = g.edges.iter().enumerate().map(|(p, e)| (e.id, p)).collect();
    let mut dg = DynGraph::new(g.n, g.edges.iter().map(|e| (e.u, e.v)).collect());
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let mut extras: Vec<usize> = Vec::new();
    let mut iter = 0u64;
    loop {
        // Peel low-degree vertices.
        let mut queue: Vec<usize> = (0..g.n)
            .filter(|&v| dg.deg(v) > 0 && dg.deg(v) < delta)
            .collect();
        while let Some(v) = queue.pop() {
            if dg.deg(v) == 0 || dg.deg(v) >= delta {
                continue;
            }
            while let Some(&p) = dg.adj[v].last() {
                let w = dg.other(p, v);
                dg.remove(p);
                extras.push(g.edges[p].id);
                if dg.deg(w) > 0 && dg.deg(w) < delta {
                    queue.push(w);
                }
            }
        }
        let alive: Vec<usize> = (0..g.m()).filter(|&p| dg.alive[p]).collect();
        if alive.is_empty() {
            break;
        }
        stats.iterations += 1;
        // Compact to non-isolated vertices.
        let mut local = vec![usize::MAX; g.n];
        let mut back = Vec::new();
        for &p in &alive {
            for x in [g.edges[p].u, g.edges[p].v] {
                if local[x] == usize::MAX {
                    local[x] = back.len();
                    back.push(x);
                }
            }
        }
        let cur = WeightedMultigraph {
            n: back.len(),
            edges: alive
                .iter()
                .map(|&p| {
                    let e = g.edges[p];
                    Edge::new(e.id, local[e.u], local[e.v], 1)
                })
                .collect(),
        };
        let bd = extract_bounded_degree(&cur, delta)?;
        let iter_seed = rng::stream(
            seed,
            "cycle-decomp",
            "short_cycle",
            path.wrapping_mul(1 << 20) ^ iter,
        )
        .gen();
        let partial = move_edges(&bd.h, k, iter_seed, cfg, stats)?;
        let aux = auxiliary_graph(&partial);
        let sub = short_rec(&aux, l - 1, k, iter_seed, cfg, stats, path * 31 + iter + 1)?;
        let found = extend_partial(&bd.h, &partial, &sub.cycles)?;
        let mut removed = 0;
        for c in found {
            // Cycles of H are circuits of G: split again in G.
            for simple in split_circuit(&ends, &c)? {
                for id in &simple {
                    dg.remove(pos[id]);
                    removed += 1;
                }
                cycles.push(simple);
            }
        }
        iter += 1;
        if removed == 0 {
            stats.fallback_to_naive += 1;
            let rest: Vec<usize> = (0..g.m()).filter(|&p| dg.alive[p]).collect();
            let d = naive_cycle_decomposition(&g.with_edge_positions(&rest));
            cycles.extend(d.cycles);
            extras.extend(d.extras);
            break;
        }
    }
    let length_bound = cycles.iter().map(Vec::len).max().unwrap_or(0);
    Ok(CycleDecomposition {
        extras_bound: extras.len(),
        cycles,
        extras,
        length_bound,
    })
}

/// Which decomposition routine a sparsifier uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CycleAlgo {
    Naive,
    Short {
        l: usize,
        k: usize,
        cfg: ShortCycleConfig,
    },
}

impl CycleAlgo {
    pub fn decompose(&self, g: &WeightedMultigraph, seed: u64) -> Result<CycleDecomposition> {
        match self {
            CycleAlgo::Naive => Ok(naive_cycle_decomposition(g)),
            CycleAlgo::Short { l, k, cfg } => {
                Ok(short_cycle_decomposition(g, *l, *k, seed, cfg)?.0)
            }
        }
    }
}
