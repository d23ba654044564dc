//! Degree-preserving sparsification of undirected graphs and Eulerian
//! sparsification of directed graphs, both driven by sampling half of every
//! short cycle at doubled weight.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cycles::{closed_walk_vertices, naive_length_bound, CycleAlgo};
use crate::error::{Error, Result};
use crate::graph::{
    combine_parallel_directed, combine_parallel_edges, directed_power_of_two_form,
    power_of_two_form, DirectedGraph, Edge, WeightedMultigraph,
};
use crate::linalg::{
    asym_error_norm, certify_spectral_approx, directed_laplacian, LaplacianView, DENSE_LIMIT,
};
use crate::resistance::approx_effective_resistances;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsifyConfig {
    pub eps: f64,
    /// Constant in front of the loop guard.
    pub stop_constant: f64,
    pub cycle_algo: CycleAlgo,
    pub seed: u64,
    /// Accuracy of the resistance estimates, as a log factor.
    pub theta: f64,
    /// Estimates are recomputed once the summed per-round certificates
    /// exceed this drift.
    pub refresh_drift: f64,
    /// Hard cap on rounds.
    pub max_rounds: usize,
    /// Rounds run regardless of the loop guard (diagnostics only; 0 by
    /// default).
    pub min_rounds: usize,
}

impl SparsifyConfig {
    pub fn new(eps: f64, seed: u64) -> Self {
        SparsifyConfig {
            eps,
            stop_constant: 8.0,
            cycle_algo: CycleAlgo::Naive,
            seed,
            theta: 1.5f64.ln(),
            refresh_drift: (4.0f64 / 3.0).ln(),
            max_rounds: 200,
            min_rounds: 0,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::Precondition(format!(
                "eps must lie in (0, 1], got {}",
                self.eps
            )));
        }
        if !(self.stop_constant >= 1.0) {
            return Err(Error::Precondition(format!(
                "stop constant must be at least 1, got {}",
                self.stop_constant
            )));
        }
        Ok(())
    }
}

/// Declared (m̂, L) of the decomposition routine on n vertices. The naive
/// bounds are used for both routines since the recursive one reports only
/// measured values.
pub fn decomposition_bounds(n: usize) -> (f64, f64) {
    (2.0 * n as f64, naive_length_bound(n) as f64)
}

/// C_stop (m̂ ln n + n L ε⁻² ln n).
pub fn undirected_stop_threshold(n: usize, cfg: &SparsifyConfig) -> f64 {
    let (mhat, l) = decomposition_bounds(n);
    let ln = (n.max(2) as f64).ln();
    cfg.stop_constant * (mhat * ln + n as f64 * l * ln / (cfg.eps * cfg.eps))
}

/// C_stop (8 m̂ ln n + n L³ ε⁻² ln n).
pub fn directed_stop_threshold(n: usize, cfg: &SparsifyConfig) -> f64 {
    let (mhat, l) = decomposition_bounds(n);
    let ln = (n.max(2) as f64).ln();
    cfg.stop_constant * (8.0 * mhat * ln + n as f64 * l.powi(3) * ln / (cfg.eps * cfg.eps))
}

/// Side assignment with at least half the edges crossing. Starts from the
/// parity split and flips any vertex with more same-side than cross-side
/// incident edges until none remains; each flip strictly grows the cut.
pub fn greedy_bipartition(g: &WeightedMultigraph) -> Vec<bool> {
    let mut side: Vec<bool> = (0..g.n).map(|v| v % 2 == 1).collect();
    let inc = g.incidence();
    let gain = |side: &[bool], v: usize| -> i64 {
        inc[v]
            .iter()
            .map(|&p| {
                let e = &g.edges[p];
                if side[e.other(v)] == side[v] {
                    1
                } else {
                    -1
                }
            })
            .sum()
    };
    let mut queue: VecDeque<usize> = (0..g.n).collect();
    let mut queued = vec![true; g.n];
    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        if gain(&side, v) > 0 {
            side[v] = !side[v];
            for &p in &inc[v] {
                let x = g.edges[p].other(v);
                if !queued[x] {
                    queued[x] = true;
                    queue.push_back(x);
                }
            }
        }
    }
    side
}

/// Number of edges crossing a side assignment.
pub fn cut_size(g: &WeightedMultigraph, side: &[bool]) -> usize {
    g.edges.iter().filter(|e| side[e.u] != side[e.v]).count()
}

/// Keep the odd or the even positions of an even cycle (given in traversal
/// order), each at twice its weight.
pub fn sample_even_cycle<R: Rng>(cycle: &[Edge], rng: &mut R) -> Result<Vec<Edge>> {
    if cycle.len() % 2 == 1 {
        return Err(Error::Precondition(format!(
            "cycle of odd length {}",
            cycle.len()
        )));
    }
    if cycle.iter().any(|e| e.w != cycle[0].w) {
        return Err(Error::Precondition("cycle weights are not uniform".into()));
    }
    let parity = rng.gen_range(0..2usize);
    Ok(cycle
        .iter()
        .enumerate()
        .filter(|(i, _)| i % 2 == parity)
        .map(|(_, e)| Edge::new(e.id, e.u, e.v, 2 * e.w))
        .collect())
}

/// Split a directed cycle (edges in the traversal order of the underlying
/// undirected cycle) into the edges agreeing with that order and the rest.
pub fn cycle_orientation(cycle: &[Edge]) -> Result<(Vec<Edge>, Vec<Edge>)> {
    let ends: HashMap<usize, (usize, usize)> = cycle.iter().map(|e| (e.id, (e.u, e.v))).collect();
    let ids: Vec<usize> = cycle.iter().map(|e| e.id).collect();
    let seq = closed_walk_vertices(&ends, &ids)
        .ok_or_else(|| Error::Precondition("edges do not form a closed walk".into()))?;
    let mut cw = Vec::new();
    let mut ccw = Vec::new();
    for (i, e) in cycle.iter().enumerate() {
        if e.u == seq[i] {
            cw.push(*e);
        } else {
            ccw.push(*e);
        }
    }
    Ok((cw, ccw))
}

/// Keep the clockwise or the counterclockwise edges, each at twice its
/// weight. Odd lengths are allowed.
pub fn sample_directed_cycle<R: Rng>(cycle: &[Edge], rng: &mut R) -> Result<Vec<Edge>> {
    if cycle.iter().any(|e| e.w != cycle[0].w) {
        return Err(Error::Precondition("cycle weights are not uniform".into()));
    }
    let (cw, ccw) = cycle_orientation(cycle)?;
    let pick = if rng.gen::<bool>() { cw } else { ccw };
    Ok(pick
        .into_iter()
        .map(|e| Edge::new(e.id, e.u, e.v, 2 * e.w))
        .collect())
}

/// Per-round bookkeeping.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundStats {
    pub edges_in: usize,
    pub edges_out: usize,
    pub high_leverage: usize,
    pub bipartite_edges: usize,
    pub cycles: usize,
    pub extras: usize,
    pub max_cycle_len: usize,
    /// Certificate of this round's output against its input, when dense
    /// verification is affordable.
    pub certificate: Option<f64>,
    pub refreshed_estimates: bool,
}

fn ensure_unique_ids(edges: &[Edge]) -> Result<()> {
    let mut ids: Vec<usize> = edges.iter().map(|e| e.id).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Precondition("edge ids are not unique".into()));
    }
    Ok(())
}

fn ensure_powers_of_two(edges: &[Edge]) -> Result<()> {
    match edges.iter().find(|e| !e.w.is_power_of_two()) {
        Some(e) => Err(Error::Precondition(format!(
            "edge {} has weight {} (not a power of 2)",
            e.id, e.w
        ))),
        None => Ok(()),
    }
}

fn group_by_weight(edges: &[Edge]) -> BTreeMap<u128, Vec<Edge>> {
    let mut m: BTreeMap<u128, Vec<Edge>> = BTreeMap::new();
    for e in edges {
        m.entry(e.w).or_default().push(*e);
    }
    m
}

/// One round: keep high-leverage edges and everything off a greedy
/// bipartition, decompose each weight class of the bipartite part into
/// cycles, and keep alternate edges of each cycle at doubled weight.
pub fn sparsify_once<R: Rng>(
    g: &WeightedMultigraph,
    estimates: &[f64],
    algo: &CycleAlgo,
    rng: &mut R,
) -> Result<(WeightedMultigraph, RoundStats)> {
    if estimates.len() != g.m() {
        return Err(Error::Precondition(format!(
            "{} estimates for {} edges",
            estimates.len(),
            g.m()
        )));
    }
    ensure_unique_ids(&g.edges)?;
    ensure_powers_of_two(&g.edges)?;
    let n = g.n;
    let m = g.m();
    let mut stats = RoundStats {
        edges_in: m,
        ..Default::default()
    };
    let cutoff = 4.0 * n as f64 / m.max(1) as f64;
    let mut out: Vec<Edge> = Vec::with_capacity(m);
    let mut rest: Vec<Edge> = Vec::new();
    for (e, r) in g.edges.iter().zip(estimates) {
        if e.w as f64 * r >= cutoff {
            out.push(*e);
        } else {
            rest.push(*e);
        }
    }
    stats.high_leverage = out.len();
    let rest_g = WeightedMultigraph { n, edges: rest };
    let side = greedy_bipartition(&rest_g);
    let mut bip = Vec::new();
    for e in rest_g.edges {
        if side[e.u] != side[e.v] {
            bip.push(e);
        } else {
            out.push(e);
        }
    }
    stats.bipartite_edges = bip.len();
    let seed = rng::child_seed(rng);
    for (w, class) in group_by_weight(&bip) {
        let cg = WeightedMultigraph {
            n,
            edges: class.iter().map(|e| Edge::new(e.id, e.u, e.v, 1)).collect(),
        };
        let by_id: HashMap<usize, Edge> = class.iter().map(|e| (e.id, *e)).collect();
        let d = algo.decompose(&cg, rng::child_seed(rng))?;
        stats.cycles += d.cycles.len();
        stats.extras += d.extras.len();
        stats.max_cycle_len = stats.max_cycle_len.max(d.max_cycle_len());
        out.extend(d.extras.iter().map(|id| by_id[id]));
        for (j, cyc) in d.cycles.iter().enumerate() {
            let edges: Vec<Edge> = cyc.iter().map(|id| by_id[id]).collect();
            let mut r = rng::stream(
                seed,
                "sparsify",
                "cycle",
                ((w.trailing_zeros() as u64) << 40) | j as u64,
            );
            out.extend(sample_even_cycle(&edges, &mut r)?);
        }
    }
    let mut h = combine_parallel_edges(&WeightedMultigraph { n, edges: out });
    h.edges.sort_by_key(|e| e.id);
    if h.degrees() != g.degrees() {
        return Err(Error::Invariant(
            "weighted degrees changed during sparsification".into(),
        ));
    }
    stats.edges_out = h.m();
    Ok((h, stats))
}

/// Output of a full sparsification run.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsifyOutcome<G> {
    pub graph: G,
    pub rounds: Vec<RoundStats>,
    /// Loop guard the run compared against.
    pub stop_threshold: f64,
    /// End-to-end certificate (log spectral ratio, or asymmetric error norm
    /// for directed inputs) when n ≤ [`DENSE_LIMIT`].
    pub certificate: Option<f64>,
}

type PairEstimates = HashMap<(usize, usize), f64>;

fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

fn pair_estimates<R: Rng>(
    g: &WeightedMultigraph,
    theta: f64,
    rng: &mut R,
) -> Result<PairEstimates> {
    let est = approx_effective_resistances(g, theta, rng)?;
    Ok(g.edges
        .iter()
        .zip(est.values)
        .map(|(e, r)| (key(e.u, e.v), r))
        .collect())
}

fn lookup(est: &PairEstimates, edges: &[Edge]) -> Vec<f64> {
    edges.iter().map(|e| est[&key(e.u, e.v)]).collect()
}

/// Repeated [`sparsify_once`] until the edge count falls below the loop
/// guard. Weighted degrees are checked for exact equality after every round.
pub fn degree_preserving_sparsify(
    g: &WeightedMultigraph,
    cfg: &SparsifyConfig,
) -> Result<SparsifyOutcome<WeightedMultigraph>> {
    cfg.check()?;
    let degrees = g.degrees();
    let threshold = undirected_stop_threshold(g.n, cfg);
    let mut cur = power_of_two_form(g);
    let mut rng = rng::stream(cfg.seed, "sparsify", "degree_preserving", 0);
    let mut est = pair_estimates(&cur, cfg.theta, &mut rng)?;
    let mut drift = 0.0;
    let mut rounds = Vec::new();
    let dense = g.n <= DENSE_LIMIT;
    while rounds.len() < cfg.max_rounds
        && (rounds.len() < cfg.min_rounds || cur.m() as f64 >= threshold)
    {
        let mut refreshed = false;
        if !dense || drift > cfg.refresh_drift {
            est = pair_estimates(&cur, cfg.theta, &mut rng)?;
            drift = 0.0;
            refreshed = true;
        }
        let (h, mut stats) =
            sparsify_once(&cur, &lookup(&est, &cur.edges), &cfg.cycle_algo, &mut rng)?;
        if h.degrees() != degrees {
            return Err(Error::Invariant(format!(
                "degrees drifted in round {}",
                rounds.len()
            )));
        }
        stats.refreshed_estimates = refreshed;
        if dense {
            let c = certify_spectral_approx(&cur, &h)?.epsilon();
            stats.certificate = Some(c);
            drift += c;
        }
        let stalled = h.m() >= cur.m();
        rounds.push(stats);
        cur = h;
        if stalled && rounds.len() >= cfg.min_rounds {
            break;
        }
    }
    let certificate = if dense {
        Some(certify_spectral_approx(g, &cur)?.epsilon())
    } else {
        None
    };
    Ok(SparsifyOutcome {
        graph: cur,
        rounds,
        stop_threshold: threshold,
        certificate,
    })
}

/// Out-degree minus in-degree at every vertex.
pub fn imbalance(g: &DirectedGraph) -> Vec<i128> {
    g.out_degrees()
        .iter()
        .zip(g.in_degrees())
        .map(|(&o, i)| o as i128 - i as i128)
        .collect()
}

/// One Eulerian round: keep high-leverage edges, decompose each weight class
/// of the undirected support into cycles, and keep the clockwise or the
/// counterclockwise half of each cycle at doubled weight.
pub fn directed_sparsify_once<R: Rng>(
    g: &DirectedGraph,
    estimates: &[f64],
    algo: &CycleAlgo,
    rng: &mut R,
) -> Result<(DirectedGraph, RoundStats)> {
    if !g.is_eulerian() {
        return Err(Error::Precondition("input is not Eulerian".into()));
    }
    if estimates.len() != g.m() {
        return Err(Error::Precondition(format!(
            "{} estimates for {} edges",
            estimates.len(),
            g.m()
        )));
    }
    ensure_unique_ids(&g.edges)?;
    ensure_powers_of_two(&g.edges)?;
    let n = g.n;
    let m = g.m();
    let mut stats = RoundStats {
        edges_in: m,
        ..Default::default()
    };
    let cutoff = 4.0 * n as f64 / m.max(1) as f64;
    let mut out = Vec::with_capacity(m);
    let mut rest = Vec::new();
    for (e, r) in g.edges.iter().zip(estimates) {
        if e.w as f64 * r >= cutoff {
            out.push(*e);
        } else {
            rest.push(*e);
        }
    }
    stats.high_leverage = out.len();
    let seed = rng::child_seed(rng);
    for (w, class) in group_by_weight(&rest) {
        let cg = WeightedMultigraph {
            n,
            edges: class.iter().map(|e| Edge::new(e.id, e.u, e.v, 1)).collect(),
        };
        let by_id: HashMap<usize, Edge> = class.iter().map(|e| (e.id, *e)).collect();
        let d = algo.decompose(&cg, rng::child_seed(rng))?;
        stats.cycles += d.cycles.len();
        stats.extras += d.extras.len();
        stats.max_cycle_len = stats.max_cycle_len.max(d.max_cycle_len());
        out.extend(d.extras.iter().map(|id| by_id[id]));
        for (j, cyc) in d.cycles.iter().enumerate() {
            let edges: Vec<Edge> = cyc.iter().map(|id| by_id[id]).collect();
            let mut r = rng::stream(
                seed,
                "sparsify",
                "directed_cycle",
                ((w.trailing_zeros() as u64) << 40) | j as u64,
            );
            out.extend(sample_directed_cycle(&edges, &mut r)?);
        }
    }
    let mut h = combine_parallel_directed(&DirectedGraph { n, edges: out });
    h.edges.sort_by_key(|e| e.id);
    if imbalance(&h) != imbalance(g) {
        return Err(Error::Invariant(
            "out-degree minus in-degree changed during sparsification".into(),
        ));
    }
    stats.edges_out = h.m();
    Ok((h, stats))
}

/// ‖L_U^{+/2}(L_G − L_H)L_U^{+/2}‖ where U is the undirectification of G.
pub fn directed_error(g: &DirectedGraph, h: &DirectedGraph) -> f64 {
    asym_error_norm(
        &LaplacianView::Undirectified(g).to_dense(),
        &directed_laplacian(g),
        &directed_laplacian(h),
    )
}

/// Repeated [`directed_sparsify_once`] until the edge count falls below the
/// loop guard. Resistances are taken on the undirected support. Orientation
/// sampling keeps out-degree minus in-degree fixed (hence the Eulerian
/// property) while individual in- and out-degrees may change.
pub fn eulerian_sparsify(
    g: &DirectedGraph,
    cfg: &SparsifyConfig,
) -> Result<SparsifyOutcome<DirectedGraph>> {
    cfg.check()?;
    if !g.is_eulerian() {
        return Err(Error::Precondition("input is not Eulerian".into()));
    }
    let base = imbalance(g);
    let threshold = directed_stop_threshold(g.n, cfg);
    let mut cur = directed_power_of_two_form(g);
    let mut rng = rng::stream(cfg.seed, "sparsify", "eulerian", 0);
    let mut est = pair_estimates(&cur.support(), cfg.theta, &mut rng)?;
    let mut drift = 0.0;
    let mut rounds = Vec::new();
    let dense = g.n <= DENSE_LIMIT;
    while rounds.len() < cfg.max_rounds
        && (rounds.len() < cfg.min_rounds || cur.m() as f64 >= threshold)
    {
        let mut refreshed = false;
        if !dense || drift > cfg.refresh_drift {
            est = pair_estimates(&cur.support(), cfg.theta, &mut rng)?;
            drift = 0.0;
            refreshed = true;
        }
        let (h, mut stats) =
            directed_sparsify_once(&cur, &lookup(&est, &cur.edges), &cfg.cycle_algo, &mut rng)?;
        if !h.is_eulerian() || imbalance(&h) != base {
            return Err(Error::Invariant(format!(
                "Eulerian property lost in round {}",
                rounds.len()
            )));
        }
        stats.refreshed_estimates = refreshed;
        if dense {
            let c = directed_error(&cur, &h);
            stats.certificate = Some(c);
            drift += c;
        }
        let stalled = h.m() >= cur.m();
        rounds.push(stats);
        cur = h;
        if stalled && rounds.len() >= cfg.min_rounds {
            break;
        }
    }
    let certificate = dense.then(|| directed_error(g, &cur));
    Ok(SparsifyOutcome {
        graph: cur,
        rounds,
        stop_threshold: threshold,
        certificate,
    })
}
