//! Implicit sums of bicliques: balancing, matching sampling with exact
//! rational weights, degree-bucketed sampling, partition splits, the
//! recursive implicit sketch, and the clique families of one Schur-complement
//! squaring step.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num::rational::Ratio;
use num::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expander::expander_decompose;
use crate::graph::{Edge, WeightedMultigraph};
use crate::linalg::laplacian_from_triples;
use crate::rng;

pub type Rational = Ratio<u128>;

/// Unit-weight biclique between disjoint vertex lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Biclique {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl Biclique {
    pub fn new(a: Vec<usize>, b: Vec<usize>) -> Self {
        Biclique { a, b }
    }

    pub fn edge_count(&self) -> usize {
        self.a.len() * self.b.len()
    }

    pub fn is_balanced(&self) -> bool {
        self.a.len() == self.b.len()
    }
}

/// n(K): total vertex count over the collection.
pub fn vertex_total(k: &[Biclique]) -> usize {
    k.iter().map(|b| b.a.len() + b.b.len()).sum()
}

/// m(K): total edge count with multiplicity.
pub fn edge_total(k: &[Biclique]) -> usize {
    k.iter().map(Biclique::edge_count).sum()
}

/// Degrees in G(K).
pub fn collection_degrees(n: usize, k: &[Biclique]) -> Vec<usize> {
    let mut d = vec![0; n];
    for b in k {
        for &u in &b.a {
            d[u] += b.b.len();
        }
        for &v in &b.b {
            d[v] += b.a.len();
        }
    }
    d
}

/// G(K) as an explicit unit-weight multigraph.
pub fn materialize(n: usize, k: &[Biclique]) -> WeightedMultigraph {
    let mut edges = Vec::with_capacity(edge_total(k));
    for b in k {
        for &u in &b.a {
            for &v in &b.b {
                let id = edges.len();
                edges.push(Edge::new(id, u, v, 1));
            }
        }
    }
    WeightedMultigraph { n, edges }
}

/// Graph with exact rational edge weights.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RationalGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize, Rational)>,
}

impl RationalGraph {
    pub fn new(n: usize) -> Self {
        RationalGraph {
            n,
            edges: Vec::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<Rational> {
        let mut d = vec![Rational::zero(); self.n];
        for (u, v, w) in &self.edges {
            d[*u] += *w;
            d[*v] += *w;
        }
        d
    }

    pub fn extend(&mut self, other: RationalGraph) {
        self.edges.extend(other.edges);
    }

    pub fn float_edges(&self) -> Vec<(usize, usize, f64)> {
        self.edges
            .iter()
            .map(|(u, v, w)| (*u, *v, ratio_f64(w)))
            .collect()
    }

    pub fn laplacian(&self) -> DMatrix<f64> {
        laplacian_from_triples(self.n, &self.float_edges())
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|(u, v, w)| ratio_f64(w) * (x[*u] - x[*v]).powi(2))
            .sum()
    }

    fn add_unit(&mut self, b: &Biclique) {
        for &u in &b.a {
            for &v in &b.b {
                self.edges.push((u, v, Rational::from_integer(1)));
            }
        }
    }
}

pub fn ratio_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::INFINITY) / r.denom().to_f64().unwrap_or(f64::INFINITY)
}

/// Degrees of G(K) as rationals, for exact comparisons with sampled graphs.
pub fn rational_degrees(n: usize, k: &[Biclique]) -> Vec<Rational> {
    collection_degrees(n, k)
        .into_iter()
        .map(|d| Rational::from_integer(d as u128))
        .collect()
}

/// Split `xs` into consecutive chunks whose sizes are the binary digits of
/// `xs.len()`, largest first.
fn power_chunks(xs: &[usize]) -> Vec<&[usize]> {
    let mut out = Vec::new();
    let mut rest = xs;
    let len = xs.len();
    for bit in (0..usize::BITS).rev() {
        let size = 1usize << bit;
        if len & size != 0 {
            let (head, tail) = rest.split_at(size);
            out.push(head);
            rest = tail;
        }
    }
    out
}

/// Exact edge partition of a biclique into balanced bicliques with a power
/// of two vertices per side.
pub fn make_balanced(k: &Biclique) -> Vec<Biclique> {
    let mut out = Vec::new();
    for ca in power_chunks(&k.a) {
        for cb in power_chunks(&k.b) {
            let (small, large, small_is_a) = if ca.len() <= cb.len() {
                (ca, cb, true)
            } else {
                (cb, ca, false)
            };
            for piece in large.chunks(small.len()) {
                if small_is_a {
                    out.push(Biclique::new(small.to_vec(), piece.to_vec()));
                } else {
                    out.push(Biclique::new(piece.to_vec(), small.to_vec()));
                }
            }
        }
    }
    out
}

/// [`make_balanced`] over a collection, bucketed by side size.
pub fn balance_collection(k: &[Biclique]) -> BTreeMap<usize, Vec<Biclique>> {
    let mut out: BTreeMap<usize, Vec<Biclique>> = BTreeMap::new();
    for b in k {
        for piece in make_balanced(b) {
            out.entry(piece.a.len()).or_default().push(piece);
        }
    }
    out
}

/// One uniformly random perfect matching of a balanced biclique.
pub fn random_matching<R: Rng>(k: &Biclique, rng: &mut R) -> Vec<(usize, usize)> {
    let mut perm = k.b.clone();
    perm.shuffle(rng);
    k.a.iter().copied().zip(perm).collect()
}

/// s random perfect matchings per biclique, each edge weighted r/s.
pub fn sample_matchings<R: Rng>(kr: &[Biclique], s: usize, rng: &mut R) -> Result<RationalGraph> {
    let n = kr
        .iter()
        .flat_map(|b| b.a.iter().chain(&b.b))
        .max()
        .map_or(0, |&v| v + 1);
    sample_matchings_on(n, kr, s, rng)
}

/// [`sample_matchings`] on an explicit vertex count.
pub fn sample_matchings_on<R: Rng>(
    n: usize,
    kr: &[Biclique],
    s: usize,
    rng: &mut R,
) -> Result<RationalGraph> {
    if s == 0 {
        return Err(Error::Precondition("s must be at least 1".into()));
    }
    let Some(first) = kr.first() else {
        return Ok(RationalGraph::new(n));
    };
    let r = first.a.len();
    if kr.iter().any(|b| b.a.len() != r || b.b.len() != r) {
        return Err(Error::Precondition(
            "bicliques must all be balanced with the same size".into(),
        ));
    }
    let w = Rational::new(r as u128, s as u128);
    let mut g = RationalGraph::new(n);
    for k in kr {
        for _ in 0..s {
            for (u, v) in random_matching(k, rng) {
                g.edges.push((u, v, w));
            }
        }
    }
    Ok(g)
}

/// (4r/s) Σ_{a∈A, b∈B} (x_a − x̂)² (x_b − x̂)²: the stated variance bound for
/// x⊤L_H x when H is s averaged matchings of the balanced biclique `k`.
/// The exact variance can exceed it by up to a factor r/(r − 1).
pub fn stated_variance_bound(k: &Biclique, x: &[f64], xhat: f64, s: usize) -> f64 {
    let r = k.a.len() as f64;
    let sa: f64 = k.a.iter().map(|&a| (x[a] - xhat).powi(2)).sum();
    let sb: f64 = k.b.iter().map(|&b| (x[b] - xhat).powi(2)).sum();
    4.0 * r / s as f64 * sa * sb
}

/// Bookkeeping from [`sample_bicliques`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BicliqueSampleStats {
    pub low_degree_vertices: usize,
    pub explicit_edges: usize,
    pub sampled_edges: usize,
    /// (bucket j, side size r, matchings per biclique s) for every sampled
    /// bucket.
    pub buckets: Vec<(u32, usize, usize)>,
    /// Each sampled matching with its weight, for operator-bound checks.
    pub matchings: Vec<(Rational, Vec<(usize, usize)>)>,
}

/// Degree-bucketed sampling of a unit biclique collection. Edges at
/// vertices of degree at most ε^{-3/2} are kept explicitly; the rest are
/// bucketed by the smaller endpoint degree 2^{j-1} ≤ d < 2^j, balanced, and
/// sampled with s = max{ε^{-1/2}, 4 r ε^{-1} 2^{-j}} matchings per biclique.
/// Buckets with r ≤ ε^{-1/2}, or with s ≥ r, are written out explicitly.
pub fn sample_bicliques<R: Rng>(
    n: usize,
    kb: &[Biclique],
    eps: f64,
    rng: &mut R,
) -> Result<(RationalGraph, BicliqueSampleStats)> {
    sample_bicliques_with(n, kb, eps, MatchingRule::Stated, rng)
}

/// Number of matchings drawn per balanced biclique of side r in degree
/// bucket j.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchingRule {
    /// s = max{ε^{-1/2}, 4 r ε⁻¹ 2^{-j}}.
    Stated,
    /// s = max{ε^{-1/2}, r ε^{-3/2} 2^{-j}}.
    Tight,
}

impl MatchingRule {
    pub fn count(self, r: usize, j: u32, eps: f64) -> usize {
        let scale = match self {
            MatchingRule::Stated => 4.0 / eps,
            MatchingRule::Tight => eps.powf(-1.5),
        };
        eps.powf(-0.5)
            .max(scale * r as f64 / 2f64.powi(j as i32))
            .ceil() as usize
    }
}

/// [`sample_bicliques`] with an explicit choice of matching count.
pub fn sample_bicliques_with<R: Rng>(
    n: usize,
    kb: &[Biclique],
    eps: f64,
    rule: MatchingRule,
    rng: &mut R,
) -> Result<(RationalGraph, BicliqueSampleStats)> {
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let d = collection_degrees(n, kb);
    let low_cut = eps.powf(-1.5);
    let low: Vec<bool> = d.iter().map(|&x| (x as f64) <= low_cut).collect();
    let mut stats = BicliqueSampleStats {
        low_degree_vertices: (0..n).filter(|&v| low[v] && d[v] > 0).count(),
        ..Default::default()
    };
    let mut h = RationalGraph::new(n);
    let mut rest = Vec::new();
    for k in kb {
        for &u in &k.a {
            for &v in &k.b {
                if low[u] || low[v] {
                    h.edges.push((u, v, Rational::from_integer(1)));
                }
            }
        }
        let a: Vec<usize> = k.a.iter().copied().filter(|&u| !low[u]).collect();
        let b: Vec<usize> = k.b.iter().copied().filter(|&v| !low[v]).collect();
        if !a.is_empty() && !b.is_empty() {
            rest.push(Biclique::new(a, b));
        }
    }
    stats.explicit_edges = h.m();
    let bucket = |v: usize| -> u32 { usize::BITS - d[v].leading_zeros() };
    let mut by_bucket: BTreeMap<u32, Vec<Biclique>> = BTreeMap::new();
    for k in &rest {
        let mut js: Vec<u32> = k.a.iter().chain(&k.b).map(|&v| bucket(v)).collect();
        js.sort_unstable();
        js.dedup();
        for j in js {
            let sa: Vec<usize> = k.a.iter().copied().filter(|&u| bucket(u) == j).collect();
            let sb: Vec<usize> = k.b.iter().copied().filter(|&v| bucket(v) == j).collect();
            let tb: Vec<usize> = k.b.iter().copied().filter(|&v| bucket(v) >= j).collect();
            let ta_minus_sa: Vec<usize> = k.a.iter().copied().filter(|&u| bucket(u) > j).collect();
            if !sa.is_empty() && !tb.is_empty() {
                by_bucket.entry(j).or_default().push(Biclique::new(sa, tb));
            }
            if !sb.is_empty() && !ta_minus_sa.is_empty() {
                by_bucket
                    .entry(j)
                    .or_default()
                    .push(Biclique::new(ta_minus_sa, sb));
            }
        }
    }
    let small = eps.powf(-0.5);
    for (j, ks) in by_bucket {
        for (r, kr) in balance_collection(&ks) {
            let s = rule.count(r, j, eps);
            if r as f64 <= small || s >= r {
                for k in &kr {
                    h.add_unit(k);
                    stats.explicit_edges += k.edge_count();
                }
                continue;
            }
            stats.buckets.push((j, r, s));
            let w = Rational::new(r as u128, s as u128);
            for k in &kr {
                for _ in 0..s {
                    let m = random_matching(k, rng);
                    h.edges.extend(m.iter().map(|&(u, v)| (u, v, w)));
                    stats.sampled_edges += m.len();
                    stats.matchings.push((w, m));
                }
            }
        }
    }
    Ok((h, stats))
}

/// Split a collection by a vertex partition (`label[v]` = piece of v). The
/// inside part restricts every biclique to each piece; the boundary part
/// covers every crossing edge exactly once through divide and conquer on the
/// pieces, so each recursion level shrinks the vertex set by a constant
/// factor.
pub fn biclique_split_by_partition(
    k: &[Biclique],
    label: &[usize],
) -> (Vec<Biclique>, Vec<Biclique>) {
    let mut inside = Vec::new();
    let mut boundary = Vec::new();
    for b in k {
        let mut pieces: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for &u in &b.a {
            pieces.entry(label[u]).or_default().0.push(u);
        }
        for &v in &b.b {
            pieces.entry(label[v]).or_default().1.push(v);
        }
        for (pa, pb) in pieces.values() {
            if !pa.is_empty() && !pb.is_empty() {
                inside.push(Biclique::new(pa.clone(), pb.clone()));
            }
        }
        let parts: Vec<(Vec<usize>, Vec<usize>)> = pieces.into_values().collect();
        split_boundary(parts, &mut boundary);
    }
    (inside, boundary)
}

fn push_cross(ga: &[usize], gb: &[usize], out: &mut Vec<Biclique>) {
    if !ga.is_empty() && !gb.is_empty() {
        out.push(Biclique::new(ga.to_vec(), gb.to_vec()));
    }
}

fn split_boundary(mut parts: Vec<(Vec<usize>, Vec<usize>)>, out: &mut Vec<Biclique>) {
    if parts.len() < 2 {
        return;
    }
    let total: usize = parts.iter().map(|(a, b)| a.len() + b.len()).sum();
    parts.sort_by_key(|(a, b)| std::cmp::Reverse(a.len() + b.len()));
    let big = parts[0].0.len() + parts[0].1.len();
    let cut = if 3 * big > total {
        1
    } else {
        let mut acc = 0;
        let mut i = 0;
        while 3 * acc < total {
            acc += parts[i].0.len() + parts[i].1.len();
            i += 1;
        }
        i
    };
    let right = parts.split_off(cut);
    let flat = |ps: &[(Vec<usize>, Vec<usize>)]| -> (Vec<usize>, Vec<usize>) {
        let a = ps.iter().flat_map(|p| p.0.iter().copied()).collect();
        let b = ps.iter().flat_map(|p| p.1.iter().copied()).collect();
        (a, b)
    };
    let (la, lb) = flat(&parts);
    let (ra, rb) = flat(&right);
    push_cross(&la, &rb, out);
    push_cross(&ra, &lb, out);
    split_boundary(parts, out);
    split_boundary(right, out);
}

/// Default sampling constant for the crude sparsifier.
pub const CRUDE_SAMPLING_CONSTANT: f64 = 48.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSample {
    pub label: Vec<usize>,
    pub pieces: usize,
    pub graph: RationalGraph,
    /// Edges of the collection that cross pieces.
    pub boundary_edges: usize,
    /// γ measured as boundary / (φ m(K)).
    pub gamma: f64,
    /// The crude sparsifier used for the partition.
    pub crude: RationalGraph,
}

/// Crude sparsifier with C_S ln n matchings per biclique (or the biclique
/// itself when that is no larger), expander decomposition of it, and
/// [`sample_bicliques`] inside every piece.
pub fn implicit_partition_and_sample<R: Rng>(
    n: usize,
    kr: &[Biclique],
    eps: f64,
    phi: f64,
    cs: f64,
    rng: &mut R,
) -> Result<PartitionSample> {
    let r = kr.first().map_or(0, |b| b.a.len());
    if kr.iter().any(|b| b.a.len() != r || b.b.len() != r) {
        return Err(Error::Precondition(
            "bicliques must all be balanced with the same size".into(),
        ));
    }
    let s = (cs * (n.max(2) as f64).ln()).ceil() as usize;
    let crude = if s >= r {
        let mut g = RationalGraph::new(n);
        for k in kr {
            g.add_unit(k);
        }
        g
    } else {
        sample_matchings_on(n, kr, s, rng)?
    };
    let unit = WeightedMultigraph {
        n,
        edges: crude
            .edges
            .iter()
            .enumerate()
            .map(|(i, &(u, v, _))| Edge::new(i, u, v, 1))
            .collect(),
    };
    let part = expander_decompose(&unit, phi);
    let label = part.piece_of(n);
    let (inside, _) = biclique_split_by_partition(kr, &label);
    let mut per_piece: BTreeMap<usize, Vec<Biclique>> = BTreeMap::new();
    for b in inside {
        per_piece.entry(label[b.a[0]]).or_default().push(b);
    }
    let mut graph = RationalGraph::new(n);
    let mut inside_edges = 0;
    for (_, ks) in per_piece {
        inside_edges += edge_total(&ks);
        let (h, _) = sample_bicliques(n, &ks, eps, rng)?;
        graph.extend(h);
    }
    let m = edge_total(kr);
    let boundary_edges = m - inside_edges;
    let gamma = if m == 0 {
        0.0
    } else {
        boundary_edges as f64 / (phi * m as f64)
    };
    Ok(PartitionSample {
        label,
        pieces: part.pieces.len(),
        graph,
        boundary_edges,
        gamma,
        crude,
    })
}

/// Per-level record of [`implicit_sketch_bicliques`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImplicitLevel {
    pub level: usize,
    pub edges_in: usize,
    pub boundary_edges: usize,
}

/// q-level recursion: balance, partition and sample, then recurse on the
/// boundary bicliques. Level 0 writes the collection out explicitly.
pub fn implicit_sketch_bicliques<R: Rng>(
    n: usize,
    kb: &[Biclique],
    eps: f64,
    phi: f64,
    q: usize,
    rng: &mut R,
) -> Result<(RationalGraph, Vec<ImplicitLevel>)> {
    let mut levels = Vec::new();
    let g = implicit_rec(n, kb, eps, phi, q, q, rng, &mut levels)?;
    Ok((g, levels))
}

#[allow(clippy::too_many_arguments)]
fn implicit_rec<R: Rng>(
    n: usize,
    kb: &[Biclique],
    eps: f64,
    phi: f64,
    q: usize,
    top: usize,
    rng: &mut R,
    levels: &mut Vec<ImplicitLevel>,
) -> Result<RationalGraph> {
    let mut h = RationalGraph::new(n);
    if q == 0 {
        for k in kb {
            h.add_unit(k);
        }
        return Ok(h);
    }
    let mut rec = ImplicitLevel {
        level: top - q,
        edges_in: edge_total(kb),
        boundary_edges: 0,
    };
    let mut next = Vec::new();
    for (_, kr) in balance_collection(kb) {
        let ps = implicit_partition_and_sample(n, &kr, eps, phi, CRUDE_SAMPLING_CONSTANT, rng)?;
        h.extend(ps.graph);
        rec.boundary_edges += ps.boundary_edges;
        next.extend(biclique_split_by_partition(&kr, &ps.label).1);
    }
    levels.push(rec);
    h.extend(implicit_rec(n, &next, eps, phi, q - 1, top, rng, levels)?);
    Ok(h)
}

// ---------------------------------------------------------------------------
// Weighted (bi)cliques and the Schur-complement squaring step.

/// Clique with vertex weights; the edge between u and v weighs w_u w_v.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedClique {
    pub vertices: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Biclique with vertex weights on both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedBiclique {
    pub a: Vec<(usize, f64)>,
    pub b: Vec<(usize, f64)>,
}

impl WeightedClique {
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.vertices.len() {
            for j in i + 1..self.vertices.len() {
                out.push((
                    self.vertices[i],
                    self.vertices[j],
                    self.weights[i] * self.weights[j],
                ));
            }
        }
        out
    }
}

impl WeightedBiclique {
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for &(u, wu) in &self.a {
            for &(v, wv) in &self.b {
                out.push((u, v, wu * wv));
            }
        }
        out
    }
}

/// A unit biclique scaled by 2^exp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledBiclique {
    pub biclique: Biclique,
    pub exp: i32,
}

impl ScaledBiclique {
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let w = 2f64.powi(self.exp);
        let mut out = Vec::new();
        for &u in &self.biclique.a {
            for &v in &self.biclique.b {
                out.push((u, v, w));
            }
        }
        out
    }
}

/// Exact edge partition of a weighted clique into weighted bicliques by
/// halving: one biclique between the halves, then recurse on each half.
pub fn clique_to_bicliques(c: &WeightedClique) -> Vec<WeightedBiclique> {
    let items: Vec<(usize, f64)> = c
        .vertices
        .iter()
        .copied()
        .zip(c.weights.iter().copied())
        .collect();
    let mut out = Vec::new();
    halve(&items, &mut out);
    out
}

fn halve(items: &[(usize, f64)], out: &mut Vec<WeightedBiclique>) {
    if items.len() < 2 {
        return;
    }
    let (l, r) = items.split_at(items.len() / 2);
    out.push(WeightedBiclique {
        a: l.to_vec(),
        b: r.to_vec(),
    });
    halve(l, out);
    halve(r, out);
}

/// Binary digits of `w` at positions `lo..=hi`, truncating lower bits.
fn bits_of(w: f64, lo: i32, hi: i32) -> Vec<i32> {
    let mut rest = w;
    let mut out = Vec::new();
    for i in (lo..=hi).rev() {
        let p = 2f64.powi(i);
        if rest >= p {
            out.push(i);
            rest -= p;
        }
    }
    out
}

/// Approximate a weighted biclique by uniform power-of-two bicliques: each
/// side's weights are truncated to `bits` binary digits below that side's
/// largest weight, and every pair of digit positions gives one biclique.
pub fn biclique_to_unit(b: &WeightedBiclique, bits: u32) -> Result<Vec<ScaledBiclique>> {
    if b.a
        .iter()
        .chain(&b.b)
        .any(|&(_, w)| !(w > 0.0 && w.is_finite()))
    {
        return Err(Error::Precondition(
            "vertex weights must be positive and finite".into(),
        ));
    }
    if b.a.is_empty() || b.b.is_empty() || bits == 0 {
        return Ok(Vec::new());
    }
    let side = |xs: &[(usize, f64)]| -> BTreeMap<i32, Vec<usize>> {
        let top = xs
            .iter()
            .map(|&(_, w)| w)
            .fold(0.0, f64::max)
            .log2()
            .floor() as i32;
        let lo = top - bits as i32 + 1;
        let mut m: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for &(v, w) in xs {
            for i in bits_of(w, lo, top) {
                m.entry(i).or_default().push(v);
            }
        }
        m
    };
    let (sa, sb) = (side(&b.a), side(&b.b));
    let mut out = Vec::new();
    for (i, va) in &sa {
        for (j, vb) in &sb {
            out.push(ScaledBiclique {
                biclique: Biclique::new(va.clone(), vb.clone()),
                exp: i + j,
            });
        }
    }
    Ok(out)
}

/// Weighted clique families of the squared matrix together with the edges it
/// keeps explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurStep {
    pub f: Vec<usize>,
    pub c: Vec<usize>,
    /// A_FF D⁻¹ A_FF: one clique on F per f ∈ F.
    pub f_cliques: Vec<WeightedClique>,
    /// L_CF D⁻¹ L_FC: one clique on C per f ∈ F.
    pub c_cliques: Vec<WeightedClique>,
    /// −A_FF D⁻¹ L_FC: one biclique between F and C per f ∈ F.
    pub bicliques: Vec<WeightedBiclique>,
    /// Original F–C edges at their weight and C–C edges at twice their
    /// weight.
    pub explicit: Vec<(usize, usize, f64)>,
}

impl SchurStep {
    /// All edges of the squared graph.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = self.explicit.clone();
        for c in self.f_cliques.iter().chain(&self.c_cliques) {
            out.extend(c.edges());
        }
        for b in &self.bicliques {
            out.extend(b.edges());
        }
        out
    }

    pub fn laplacian(&self, n: usize) -> DMatrix<f64> {
        laplacian_from_triples(n, &self.edges())
    }
}

/// Clique decomposition of
/// [[D_FF − A D⁻¹A, L_FC + A D⁻¹L_FC], [L_CF + L_CF D⁻¹A, 2L_CC − L_CF D⁻¹L_FC]]
/// where L_FF = D_FF − A and D_FF holds the full weighted degrees of F.
pub fn schur_step_cliques(g: &WeightedMultigraph, f: &[usize]) -> Result<SchurStep> {
    let mut in_f = vec![false; g.n];
    for &v in f {
        if v >= g.n {
            return Err(Error::Precondition(format!("vertex {v} out of range")));
        }
        in_f[v] = true;
    }
    let c: Vec<usize> = (0..g.n).filter(|&v| !in_f[v]).collect();
    let deg = g.degrees();
    if let Some(&v) = f.iter().find(|&&v| deg[v] == 0) {
        return Err(Error::Precondition(format!("vertex {v} of F is isolated")));
    }
    let mut f_nbrs: HashMap<usize, BTreeMap<usize, f64>> = HashMap::new();
    let mut c_nbrs: HashMap<usize, BTreeMap<usize, f64>> = HashMap::new();
    let mut explicit = Vec::new();
    for e in &g.edges {
        let w = e.w as f64;
        match (in_f[e.u], in_f[e.v]) {
            (true, true) => {
                *f_nbrs.entry(e.u).or_default().entry(e.v).or_insert(0.0) += w;
                *f_nbrs.entry(e.v).or_default().entry(e.u).or_insert(0.0) += w;
            }
            (true, false) => {
                *c_nbrs.entry(e.u).or_default().entry(e.v).or_insert(0.0) += w;
                explicit.push((e.u, e.v, w));
            }
            (false, true) => {
                *c_nbrs.entry(e.v).or_default().entry(e.u).or_insert(0.0) += w;
                explicit.push((e.u, e.v, w));
            }
            (false, false) => explicit.push((e.u, e.v, 2.0 * w)),
        }
    }
    let mut step = SchurStep {
        f: f.to_vec(),
        c,
        f_cliques: Vec::new(),
        c_cliques: Vec::new(),
        bicliques: Vec::new(),
        explicit,
    };
    let empty = BTreeMap::new();
    for &x in f {
        let s = 1.0 / (deg[x] as f64).sqrt();
        let fw: Vec<(usize, f64)> = f_nbrs
            .get(&x)
            .unwrap_or(&empty)
            .iter()
            .map(|(&v, &w)| (v, w * s))
            .collect();
        let cw: Vec<(usize, f64)> = c_nbrs
            .get(&x)
            .unwrap_or(&empty)
            .iter()
            .map(|(&v, &w)| (v, w * s))
            .collect();
        if fw.len() >= 2 {
            step.f_cliques.push(WeightedClique {
                vertices: fw.iter().map(|p| p.0).collect(),
                weights: fw.iter().map(|p| p.1).collect(),
            });
        }
        if cw.len() >= 2 {
            step.c_cliques.push(WeightedClique {
                vertices: cw.iter().map(|p| p.0).collect(),
                weights: cw.iter().map(|p| p.1).collect(),
            });
        }
        if !fw.is_empty() && !cw.is_empty() {
            step.bicliques.push(WeightedBiclique { a: fw, b: cw });
        }
    }
    Ok(step)
}

/// Dense Schur complement L_CC − L_CF L_FF⁺ L_FC, indexed by `c` in order.
pub fn schur_complement(l: &DMatrix<f64>, f: &[usize], c: &[usize]) -> DMatrix<f64> {
    let pick = |rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| l[(rows[i], cols[j])])
    };
    let lff = pick(f, f);
    let lfc = pick(f, c);
    let lcf = pick(c, f);
    let lcc = pick(c, c);
    if f.is_empty() {
        return lcc;
    }
    let pinv = lff
        .pseudo_inverse(1e-12)
        .unwrap_or_else(|_| DMatrix::zeros(f.len(), f.len()));
    lcc - lcf * pinv * lfc
}

/// Greedy α-diagonally-dominant subset: vertices are visited in random order
/// and added to F when every member of F keeps degree ≥ α times its weight
/// into F.
pub fn dd_subset<R: Rng>(g: &WeightedMultigraph, alpha: f64, rng: &mut R) -> Vec<usize> {
    let deg: Vec<f64> = g.degrees().iter().map(|&d| d as f64).collect();
    let mut nbrs: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); g.n];
    for e in &g.edges {
        *nbrs[e.u].entry(e.v).or_insert(0.0) += e.w as f64;
        *nbrs[e.v].entry(e.u).or_insert(0.0) += e.w as f64;
    }
    let mut order: Vec<usize> = (0..g.n).filter(|&v| deg[v] > 0.0).collect();
    order.shuffle(rng);
    let mut in_f = vec![false; g.n];
    let mut into_f = vec![0.0; g.n];
    for v in order {
        let own = into_f[v];
        if deg[v] < alpha * own {
            continue;
        }
        let ok = nbrs[v]
            .iter()
            .filter(|(u, _)| in_f[**u])
            .all(|(&u, &w)| deg[u] >= alpha * (into_f[u] + w));
        if ok {
            in_f[v] = true;
            for (&u, &w) in &nbrs[v] {
                into_f[u] += w;
            }
        }
    }
    (0..g.n).filter(|&v| in_f[v]).collect()
}

// ---------------------------------------------------------------------------
// JSON

/// One serialized biclique: either a unit biclique scaled by 2^k or a
/// vertex-weighted one.
#[derive(Debug, Clone, PartialEq)]
pub enum BicliqueRecord {
    Scaled(ScaledBiclique),
    Weighted(WeightedBiclique),
}

pub fn bicliques_to_json(records: &[BicliqueRecord]) -> String {
    let items: Vec<Value> = records
        .iter()
        .map(|r| match r {
            BicliqueRecord::Scaled(s) => {
                json!({"A": s.biclique.a, "B": s.biclique.b, "w": format!("2^{}", s.exp)})
            }
            BicliqueRecord::Weighted(w) => {
                let mut vw = serde_json::Map::new();
                for &(v, x) in w.a.iter().chain(&w.b) {
                    vw.insert(v.to_string(), json!(x));
                }
                json!({
                    "A": w.a.iter().map(|p| p.0).collect::<Vec<_>>(),
                    "B": w.b.iter().map(|p| p.0).collect::<Vec<_>>(),
                    "w": {"vertex_weights": vw},
                })
            }
        })
        .collect();
    Value::Array(items).to_string()
}

fn bad(msg: &str) -> Error {
    Error::Parse {
        line: 0,
        msg: msg.to_string(),
    }
}

fn id_list(v: &Value, key: &str) -> Result<Vec<usize>> {
    v.get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| bad(&format!("missing list {key}")))?
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| bad("vertex ids must be non-negative integers"))
        })
        .collect()
}

pub fn bicliques_from_json(s: &str) -> Result<Vec<BicliqueRecord>> {
    let v: Value = serde_json::from_str(s).map_err(|e| bad(&e.to_string()))?;
    let arr = v.as_array().ok_or_else(|| bad("expected a JSON array"))?;
    arr.iter()
        .map(|item| {
            let a = id_list(item, "A")?;
            let b = id_list(item, "B")?;
            match item.get("w") {
                Some(Value::String(w)) => {
                    let exp = w
                        .strip_prefix("2^")
                        .and_then(|k| k.parse::<i32>().ok())
                        .ok_or_else(|| bad("weight string must look like 2^k"))?;
                    Ok(BicliqueRecord::Scaled(ScaledBiclique {
                        biclique: Biclique::new(a, b),
                        exp,
                    }))
                }
                Some(Value::Object(o)) => {
                    let vw = o
                        .get("vertex_weights")
                        .and_then(Value::as_object)
                        .ok_or_else(|| bad("missing vertex_weights"))?;
                    let weight = |v: usize| -> Result<f64> {
                        vw.get(&v.to_string())
                            .and_then(Value::as_f64)
                            .ok_or_else(|| bad("missing vertex weight"))
                    };
                    Ok(BicliqueRecord::Weighted(WeightedBiclique {
                        a: a.iter()
                            .map(|&v| Ok((v, weight(v)?)))
                            .collect::<Result<_>>()?,
                        b: b.iter()
                            .map(|&v| Ok((v, weight(v)?)))
                            .collect::<Result<_>>()?,
                    }))
                }
                _ => Err(bad("missing weight")),
            }
        })
        .collect()
}

/// Derive an RNG for one biclique operation from a seed.
pub fn op_rng(seed: u64, op: &str) -> rng::Rng {
    rng::stream(seed, "biclique", op, 0)
}
