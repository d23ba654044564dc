//! Graphical spectral sketches: expander-partitioned, degree-preserving cycle
//! sampling whose error scales with ε rather than ε², plus the inverse-form
//! transfer check used for resistance sparsifiers.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cycles::{naive_length_bound, CycleAlgo};
use crate::error::{Error, Result};
use crate::expander::{expander_decompose, ExpanderPartition};
use crate::graph::{combine_parallel_edges, power_of_two_form, Edge, WeightedMultigraph};
use crate::linalg::{certify_spectral_approx, LaplacianSolver};
use crate::rng;
use crate::sparsify::{greedy_bipartition, sample_even_cycle};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecomposeStats {
    pub big_vertices: usize,
    pub bipartite_edges: usize,
    pub cycles: usize,
    pub extras: usize,
    pub max_cycle_len: usize,
}

/// Sample the high-degree part of a simple unit-weight graph: vertices of
/// degree at least α form V_big, a greedy bipartition of G[V_big] is
/// decomposed into cycles, and each cycle keeps its odd or its even edges at
/// weight 2. All other edges are kept at weight 1.
pub fn decompose_and_sample<R: Rng>(
    g: &WeightedMultigraph,
    alpha: f64,
    algo: &CycleAlgo,
    rng: &mut R,
) -> Result<(WeightedMultigraph, DecomposeStats)> {
    let mut pairs = HashSet::with_capacity(g.m());
    for e in &g.edges {
        if e.w != 1 {
            return Err(Error::Precondition(format!(
                "edge {} has weight {}, expected 1",
                e.id, e.w
            )));
        }
        if !pairs.insert((e.u.min(e.v), e.u.max(e.v))) {
            return Err(Error::Precondition(format!(
                "parallel edge between {} and {}",
                e.u, e.v
            )));
        }
    }
    let deg = g.edge_degrees();
    let big: Vec<bool> = deg.iter().map(|&d| d as f64 >= alpha).collect();
    let mut stats = DecomposeStats {
        big_vertices: big.iter().filter(|&&b| b).count(),
        ..Default::default()
    };
    let inner = WeightedMultigraph {
        n: g.n,
        edges: g
            .edges
            .iter()
            .filter(|e| big[e.u] && big[e.v])
            .copied()
            .collect(),
    };
    let side = greedy_bipartition(&inner);
    let bip = WeightedMultigraph {
        n: g.n,
        edges: inner
            .edges
            .iter()
            .filter(|e| side[e.u] != side[e.v])
            .copied()
            .collect(),
    };
    stats.bipartite_edges = bip.m();
    let d = algo.decompose(&bip, rng::child_seed(rng))?;
    stats.cycles = d.cycles.len();
    stats.extras = d.extras.len();
    stats.max_cycle_len = d.max_cycle_len();
    let by_id: HashMap<usize, Edge> = g.edges.iter().map(|e| (e.id, *e)).collect();
    let in_cycle: HashSet<usize> = d.cycles.iter().flatten().copied().collect();
    let mut out: Vec<Edge> = g
        .edges
        .iter()
        .filter(|e| !in_cycle.contains(&e.id))
        .copied()
        .collect();
    let seed = rng::child_seed(rng);
    for (j, cyc) in d.cycles.iter().enumerate() {
        let edges: Vec<Edge> = cyc.iter().map(|id| by_id[id]).collect();
        let mut r = rng::stream(seed, "sketch", "cycle", j as u64);
        out.extend(sample_even_cycle(&edges, &mut r)?);
    }
    out.sort_by_key(|e| e.id);
    let h = WeightedMultigraph { n: g.n, edges: out };
    if h.degrees() != g.degrees() {
        return Err(Error::Invariant(
            "degrees changed in decompose_and_sample".into(),
        ));
    }
    Ok((h, stats))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchConfig {
    pub eps: f64,
    /// α = c_alpha / ε.
    pub c_alpha: f64,
    pub cycle_algo: CycleAlgo,
    pub seed: u64,
    /// Defaults to ⌈4 log₂ n⌉.
    pub max_rounds: Option<usize>,
    /// Fixed conductance target; when unset φ = 1/(2γ) with γ measured.
    pub phi: Option<f64>,
}

impl SketchConfig {
    pub fn new(eps: f64, seed: u64) -> Self {
        SketchConfig {
            eps,
            c_alpha: 4.0,
            cycle_algo: CycleAlgo::Naive,
            seed,
            max_rounds: None,
            phi: None,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.c_alpha / self.eps
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SketchRound {
    pub edges_in: usize,
    pub edges_out: usize,
    pub boundary_edges: usize,
    pub pieces: usize,
    /// Largest measured γ over the weight classes of this round.
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SketchOutcome {
    pub graph: WeightedMultigraph,
    pub alpha: f64,
    pub rounds: Vec<SketchRound>,
    /// |E(H)| / (m̂ + n L ε⁻¹) with the naive (m̂, L) bounds.
    pub size_constant: f64,
}

/// Expander decomposition with φ = 1/(2γ), where γ = boundary/(φ m) is
/// measured and fed back until it stops growing (at most four passes).
pub fn calibrated_decompose(g: &WeightedMultigraph) -> (ExpanderPartition, f64) {
    let m = g.m().max(1) as f64;
    let mut gamma = 1.0f64;
    let mut part = expander_decompose(g, 0.5);
    for _ in 0..4 {
        let phi = 1.0 / (2.0 * gamma);
        let measured = (part.boundary_edges.len() as f64 / (phi * m)).max(1.0);
        if measured <= gamma * (1.0 + 1e-9) {
            break;
        }
        gamma = measured;
        part = expander_decompose(g, 1.0 / (2.0 * gamma));
    }
    (part, gamma)
}

/// Repeated rounds of: split by weight class, expander-decompose each class,
/// keep boundary edges, and run [`decompose_and_sample`] inside every piece.
/// Stops when a round removes less than 1/16 of the edges or after the round
/// cap. Weighted degrees are checked for exact equality after every round.
pub fn spectral_sketch(g: &WeightedMultigraph, cfg: &SketchConfig) -> Result<SketchOutcome> {
    if !(cfg.eps > 0.0 && cfg.eps <= 1.0) {
        return Err(Error::Precondition(format!(
            "eps must lie in (0, 1], got {}",
            cfg.eps
        )));
    }
    let n = g.n;
    let degrees = g.degrees();
    let alpha = cfg.alpha();
    let cap = cfg
        .max_rounds
        .unwrap_or(4 * crate::cycles::ceil_log2(n.max(2)));
    let mut rng = rng::stream(cfg.seed, "sketch", "spectral_sketch", 0);
    let mut cur = power_of_two_form(g);
    let mut rounds = Vec::new();
    for _ in 0..cap {
        let mut stats = SketchRound {
            edges_in: cur.m(),
            ..Default::default()
        };
        let mut classes: BTreeMap<u128, Vec<Edge>> = BTreeMap::new();
        for e in &cur.edges {
            classes.entry(e.w).or_default().push(*e);
        }
        let mut out = Vec::with_capacity(cur.m());
        for (w, class) in classes {
            let cg = WeightedMultigraph {
                n,
                edges: class.iter().map(|e| Edge::new(e.id, e.u, e.v, 1)).collect(),
            };
            let (part, gamma) = match cfg.phi {
                Some(phi) => (expander_decompose(&cg, phi), 1.0 / (2.0 * phi)),
                None => calibrated_decompose(&cg),
            };
            stats.gamma = stats.gamma.max(gamma);
            stats.pieces += part.pieces.len();
            stats.boundary_edges += part.boundary_edges.len();
            let piece = part.piece_of(n);
            let mut inside: BTreeMap<usize, Vec<Edge>> = BTreeMap::new();
            for e in &cg.edges {
                if piece[e.u] == piece[e.v] {
                    inside.entry(piece[e.u]).or_default().push(*e);
                } else {
                    out.push(Edge::new(e.id, e.u, e.v, w));
                }
            }
            for (_, edges) in inside {
                let sub = WeightedMultigraph { n, edges };
                let (h, _) = decompose_and_sample(&sub, alpha, &cfg.cycle_algo, &mut rng)?;
                out.extend(
                    h.edges
                        .into_iter()
                        .map(|e| Edge::new(e.id, e.u, e.v, e.w * w)),
                );
            }
        }
        let mut h = combine_parallel_edges(&WeightedMultigraph { n, edges: out });
        h.edges.sort_by_key(|e| e.id);
        if h.degrees() != degrees {
            return Err(Error::Invariant(format!(
                "degrees drifted in sketch round {}",
                rounds.len()
            )));
        }
        stats.edges_out = h.m();
        let before = cur.m();
        cur = h;
        rounds.push(stats);
        if 16 * (before - cur.m().min(before)) < before {
            break;
        }
    }
    let l = naive_length_bound(n) as f64;
    let size_constant = cur.m() as f64 / (2.0 * n as f64 + n as f64 * l / cfg.eps);
    Ok(SketchOutcome {
        graph: cur,
        alpha,
        rounds,
        size_constant,
    })
}

/// Outcome of the inverse-form transfer check. Hypothesis failures are
/// reported separately from the conclusion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseCheck {
    /// Certificate of P against Q (log spectral ratio).
    pub spectral: f64,
    /// |ln((P⁺x)⊤Q(P⁺x) / x⊤P⁺x)|.
    pub forward: f64,
    /// x⊤Q⁺x / x⊤P⁺x.
    pub ratio: f64,
    pub hypotheses_hold: bool,
    pub conclusion_holds: bool,
}

/// Checks x⊤Q⁺x ≈_{7ε} x⊤P⁺x given P ≈_{√ε} Q and agreement of the forward
/// quadratic forms at P⁺x within e^{±ε}.
pub fn inverse_form_check(
    p: &WeightedMultigraph,
    q: &WeightedMultigraph,
    x: &[f64],
    eps: f64,
) -> Result<InverseCheck> {
    let spectral = certify_spectral_approx(p, q)?.epsilon();
    let sp = LaplacianSolver::new(p);
    let sq = LaplacianSolver::new(q);
    let (xp, _) = sp.pseudo_quadratic(x)?;
    let (xq, _) = sq.pseudo_quadratic(x)?;
    let y = sp.solve(x, crate::linalg::DEFAULT_TOL)?;
    let yq = q.quadratic_form(&y);
    let forward = if xp > 0.0 && yq > 0.0 {
        (yq / xp).ln().abs()
    } else if xp == yq {
        0.0
    } else {
        f64::INFINITY
    };
    let ratio = if xp > 0.0 {
        xq / xp
    } else if xq == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    let hypotheses_hold = spectral <= eps.sqrt() && forward <= eps;
    let conclusion_holds = ratio.ln().abs() <= 7.0 * eps;
    Ok(InverseCheck {
        spectral,
        forward,
        ratio,
        hypotheses_hold,
        conclusion_holds,
    })
}
