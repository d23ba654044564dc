//! Weighted multigraphs (undirected and directed), degree bookkeeping and
//! exact weight manipulations.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};

/// Edge weights. Exact integers; `u128` leaves ample headroom above the
/// default ingestion cap of 2^62 for doubling and merging.
pub type Weight = u128;

pub const DEFAULT_WEIGHT_CAP: Weight = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: usize,
    pub u: usize,
    pub v: usize,
    pub w: Weight,
}

impl Edge {
    pub fn new(id: usize, u: usize, v: usize, w: Weight) -> Self {
        Edge { id, u, v, w }
    }

    /// The endpoint opposite to `x`.
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

fn validate(n: usize, edges: &[Edge]) -> Result<()> {
    let mut seen = HashSet::with_capacity(edges.len());
    for e in edges {
        if e.u >= n || e.v >= n {
            return Err(Error::InvalidGraph(format!(
                "edge {} endpoint out of range (n = {n})",
                e.id
            )));
        }
        if e.u == e.v {
            return Err(Error::InvalidGraph(format!("edge {} is a self-loop", e.id)));
        }
        if e.w == 0 {
            return Err(Error::InvalidGraph(format!(
                "edge {} has zero weight",
                e.id
            )));
        }
        if !seen.insert(e.id) {
            return Err(Error::InvalidGraph(format!("duplicate edge id {}", e.id)));
        }
    }
    Ok(())
}

/// Undirected multigraph with positive integer weights. Edge ids are unique
/// but need not be dense in derived graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedMultigraph {
    pub n: usize,
    pub edges: Vec<Edge>,
}

impl WeightedMultigraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        validate(n, &edges)?;
        Ok(WeightedMultigraph { n, edges })
    }

    /// Edges get ids `0..triples.len()` in order.
    pub fn from_triples(n: usize, triples: &[(usize, usize, Weight)]) -> Result<Self> {
        let edges = triples
            .iter()
            .enumerate()
            .map(|(i, &(u, v, w))| Edge::new(i, u, v, w))
            .collect();
        Self::new(n, edges)
    }

    pub fn empty(n: usize) -> Self {
        WeightedMultigraph {
            n,
            edges: Vec::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<Weight> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.u] += e.w;
            d[e.v] += e.w;
        }
        d
    }

    /// Number of incident edges per vertex (multiplicity counted).
    pub fn edge_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.u] += 1;
            d[e.v] += 1;
        }
        d
    }

    pub fn total_weight(&self) -> Weight {
        self.edges.iter().map(|e| e.w).sum()
    }

    pub fn max_weight(&self) -> Weight {
        self.edges.iter().map(|e| e.w).max().unwrap_or(0)
    }

    pub fn is_unit_class(&self) -> bool {
        self.edges.windows(2).all(|p| p[0].w == p[1].w)
    }

    /// Incident edge indices (positions in `edges`) per vertex.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.u].push(i);
            adj[e.v].push(i);
        }
        adj
    }

    pub fn index_of_ids(&self) -> HashMap<usize, usize> {
        self.edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id, i))
            .collect()
    }

    /// Component label per vertex and the number of components.
    pub fn components(&self) -> (usize, Vec<usize>) {
        components_of(self.n, self.edges.iter().map(|e| (e.u, e.v)))
    }

    /// x⊤Lx evaluated directly from the edge list.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|e| {
                let d = x[e.u] - x[e.v];
                e.w as f64 * d * d
            })
            .sum()
    }

    /// Subgraph keeping the edges whose positions are listed (ids preserved).
    pub fn with_edge_positions(&self, pos: &[usize]) -> Self {
        WeightedMultigraph {
            n: self.n,
            edges: pos.iter().map(|&i| self.edges[i]).collect(),
        }
    }

    /// Reassign ids densely in edge order.
    pub fn renumbered(&self) -> Self {
        WeightedMultigraph {
            n: self.n,
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(i, e)| Edge::new(i, e.u, e.v, e.w))
                .collect(),
        }
    }

    /// Every edge's weight multiplied by `c`.
    pub fn scaled(&self, c: Weight) -> Result<Self> {
        let mut edges = self.edges.clone();
        for e in &mut edges {
            e.w = e.w.checked_mul(c).ok_or(Error::Overflow)?;
        }
        Ok(WeightedMultigraph { n: self.n, edges })
    }

    pub fn check_cap(&self, cap: Weight) -> Result<()> {
        match self.edges.iter().find(|e| e.w > cap) {
            Some(e) => Err(Error::InvalidGraph(format!(
                "edge {} weight {} exceeds cap {cap}",
                e.id, e.w
            ))),
            None => Ok(()),
        }
    }

    /// Concatenate edge sets, renumbering ids densely.
    pub fn union(parts: &[&WeightedMultigraph]) -> Self {
        let n = parts.iter().map(|g| g.n).max().unwrap_or(0);
        let mut edges = Vec::new();
        for g in parts {
            for e in &g.edges {
                edges.push(Edge::new(edges.len(), e.u, e.v, e.w));
            }
        }
        WeightedMultigraph { n, edges }
    }
}

pub(crate) fn components_of(
    n: usize,
    pairs: impl Iterator<Item = (usize, usize)>,
) -> (usize, Vec<usize>) {
    let mut uf = UnionFind::new(n);
    for (u, v) in pairs {
        uf.union(u, v);
    }
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    let mut out = vec![0; n];
    for x in 0..n {
        let r = uf.find(x);
        if label[r] == usize::MAX {
            label[r] = count;
            count += 1;
        }
        out[x] = label[r];
    }
    (count, out)
}

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Directed multigraph; `Edge::u` is the tail and `Edge::v` the head.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    pub n: usize,
    pub edges: Vec<Edge>,
}

impl DirectedGraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        validate(n, &edges)?;
        Ok(DirectedGraph { n, edges })
    }

    pub fn from_triples(n: usize, triples: &[(usize, usize, Weight)]) -> Result<Self> {
        let edges = triples
            .iter()
            .enumerate()
            .map(|(i, &(u, v, w))| Edge::new(i, u, v, w))
            .collect();
        Self::new(n, edges)
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn out_degrees(&self) -> Vec<Weight> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.u] += e.w;
        }
        d
    }

    pub fn in_degrees(&self) -> Vec<Weight> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.v] += e.w;
        }
        d
    }

    pub fn is_eulerian(&self) -> bool {
        self.out_degrees() == self.in_degrees()
    }

    /// Undirected support with the full weights. Its Laplacian is twice the
    /// Laplacian of the undirectification.
    pub fn support(&self) -> WeightedMultigraph {
        WeightedMultigraph {
            n: self.n,
            edges: self.edges.clone(),
        }
    }

    pub fn components(&self) -> (usize, Vec<usize>) {
        components_of(self.n, self.edges.iter().map(|e| (e.u, e.v)))
    }
}

/// One binary weight class: every edge of `graph` has weight `2^exp`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightClass {
    pub exp: u32,
    pub graph: WeightedMultigraph,
}

fn split_edges(n: usize, edges: &[Edge]) -> Vec<WeightClass> {
    let mut classes: BTreeMap<u32, Vec<Edge>> = BTreeMap::new();
    for e in edges {
        let mut w = e.w;
        while w != 0 {
            let b = w.trailing_zeros();
            classes
                .entry(b)
                .or_default()
                .push(Edge::new(e.id, e.u, e.v, 1 << b));
            w &= w - 1;
        }
    }
    classes
        .into_iter()
        .map(|(exp, edges)| WeightClass {
            exp,
            graph: WeightedMultigraph { n, edges },
        })
        .collect()
}

/// Split every edge by the binary representation of its weight. Class graphs
/// keep the originating edge id, so ids are unique within a class.
pub fn binary_split(g: &WeightedMultigraph) -> Vec<WeightClass> {
    split_edges(g.n, &g.edges)
}

/// Directed analogue of [`binary_split`]; class graphs are returned as
/// directed graphs.
pub fn binary_split_directed(g: &DirectedGraph) -> Vec<(u32, DirectedGraph)> {
    split_edges(g.n, &g.edges)
        .into_iter()
        .map(|c| {
            (
                c.exp,
                DirectedGraph {
                    n: g.n,
                    edges: c.graph.edges,
                },
            )
        })
        .collect()
}

/// Merge equal weights per key until all weights per key are distinct.
/// Ids of merged edges are drawn from the ids of their group.
fn combine_by_key(edges: &[Edge], key: impl Fn(&Edge) -> (usize, usize)) -> Vec<Edge> {
    let mut groups: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    let mut order = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        let k = key(e);
        groups
            .entry(k)
            .or_insert_with(|| {
                order.push(k);
                Vec::new()
            })
            .push(i);
    }
    let mut out: Vec<(usize, Edge)> = Vec::with_capacity(edges.len());
    for k in order {
        let idx = &groups[&k];
        let distinct: HashSet<Weight> = idx.iter().map(|&i| edges[i].w).collect();
        if distinct.len() == idx.len() {
            out.extend(idx.iter().map(|&i| (i, edges[i])));
            continue;
        }
        let mut counts: BTreeMap<Weight, u64> = BTreeMap::new();
        for &i in idx {
            *counts.entry(edges[i].w).or_default() += 1;
        }
        let mut merged = Vec::new();
        while let Some((w, c)) = counts.pop_first() {
            if c % 2 == 1 {
                merged.push(w);
            }
            if c >= 2 {
                *counts.entry(2 * w).or_default() += c / 2;
            }
        }
        let first = edges[idx[0]];
        for (j, w) in merged.into_iter().enumerate() {
            let src = idx[j];
            out.push((src, Edge::new(edges[src].id, first.u, first.v, w)));
        }
    }
    out.sort_by_key(|&(i, _)| i);
    out.into_iter().map(|(_, e)| e).collect()
}

/// Combine parallel edges of equal weight (iteratively) so that every vertex
/// pair carries at most one edge per weight value. Degrees and the Laplacian
/// are unchanged.
pub fn combine_parallel_edges(g: &WeightedMultigraph) -> WeightedMultigraph {
    WeightedMultigraph {
        n: g.n,
        edges: combine_by_key(&g.edges, |e| (e.u.min(e.v), e.u.max(e.v))),
    }
}

/// Directed analogue: edges are parallel when tail and head agree.
pub fn combine_parallel_directed(g: &DirectedGraph) -> DirectedGraph {
    DirectedGraph {
        n: g.n,
        edges: combine_by_key(&g.edges, |e| (e.u, e.v)),
    }
}

/// Split every weight into powers of two, give the pieces fresh dense ids and
/// merge equal weights per pair, so each weight class is a simple graph.
pub fn power_of_two_form(g: &WeightedMultigraph) -> WeightedMultigraph {
    let mut edges: Vec<Edge> = binary_split(g)
        .into_iter()
        .flat_map(|c| c.graph.edges)
        .collect();
    edges.sort_by_key(|e| (e.id, e.w));
    for (i, e) in edges.iter_mut().enumerate() {
        e.id = i;
    }
    combine_parallel_edges(&WeightedMultigraph { n: g.n, edges })
}

/// Directed analogue of [`power_of_two_form`].
pub fn directed_power_of_two_form(g: &DirectedGraph) -> DirectedGraph {
    let mut edges: Vec<Edge> = binary_split_directed(g)
        .into_iter()
        .flat_map(|(_, c)| c.edges)
        .collect();
    edges.sort_by_key(|e| (e.id, e.w));
    for (i, e) in edges.iter_mut().enumerate() {
        e.id = i;
    }
    combine_parallel_directed(&DirectedGraph { n: g.n, edges })
}

/// Dense-index map from vertex pair to summed weight, used by exact
/// comparisons in tests and invariant checks.
pub fn pair_weights(g: &WeightedMultigraph) -> BTreeMap<(usize, usize), Weight> {
    let mut m = BTreeMap::new();
    for e in &g.edges {
        *m.entry((e.u.min(e.v), e.u.max(e.v))).or_insert(0) += e.w;
    }
    m
}

pub fn pair_weights_directed(g: &DirectedGraph) -> BTreeMap<(usize, usize), Weight> {
    let mut m = BTreeMap::new();
    for e in &g.edges {
        *m.entry((e.u, e.v)).or_insert(0) += e.w;
    }
    m
}
