//! Effective resistances: exact values from the pseudoinverse or a solver,
//! random-projection estimates, and Foster-sum diagnostics.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedMultigraph;
use crate::linalg::{laplacian, pinv_sym, LaplacianSolver, DEFAULT_TOL, DENSE_LIMIT};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResistanceMethod {
    Exact,
    Projected,
}

/// Per-edge resistance values, aligned with `g.edges`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistanceEstimates {
    pub values: Vec<f64>,
    pub method: ResistanceMethod,
    /// Claimed multiplicative accuracy: values lie in [e^-θ, e^θ] times exact.
    pub theta: f64,
}

impl ResistanceEstimates {
    /// Leverage scores w_e r_e.
    pub fn leverage(&self, g: &WeightedMultigraph) -> Vec<f64> {
        g.edges
            .iter()
            .zip(&self.values)
            .map(|(e, r)| e.w as f64 * r)
            .collect()
    }
}

fn check_pairs(labels: &[usize], pairs: &[(usize, usize)]) -> Result<()> {
    for &(u, v) in pairs {
        if u >= labels.len() || v >= labels.len() {
            return Err(Error::Precondition(format!("pair ({u}, {v}) out of range")));
        }
        if labels[u] != labels[v] {
            return Err(Error::Precondition(format!(
                "vertices {u} and {v} lie in different components"
            )));
        }
    }
    Ok(())
}

/// χ_uv⊤ L⁺ χ_uv for every pair. Uses the dense pseudoinverse up to
/// [`DENSE_LIMIT`] vertices and one solve per pair otherwise.
pub fn exact_effective_resistances(
    g: &WeightedMultigraph,
    pairs: &[(usize, usize)],
) -> Result<Vec<f64>> {
    let (_, labels) = g.components();
    check_pairs(&labels, pairs)?;
    if g.n <= DENSE_LIMIT {
        let p = pinv_sym(&laplacian(g));
        return Ok(pairs
            .iter()
            .map(|&(u, v)| pair_from_pinv(&p, u, v))
            .collect());
    }
    let solver = LaplacianSolver::new(g);
    pairs
        .par_iter()
        .map(|&(u, v)| {
            if u == v {
                return Ok(0.0);
            }
            let mut b = vec![0.0; g.n];
            b[u] = 1.0;
            b[v] = -1.0;
            let x = solver.solve(&b, DEFAULT_TOL)?;
            Ok((x[u] - x[v]).max(0.0))
        })
        .collect()
}

fn pair_from_pinv(p: &DMatrix<f64>, u: usize, v: usize) -> f64 {
    (p[(u, u)] + p[(v, v)] - 2.0 * p[(u, v)]).max(0.0)
}

/// Exact resistances of every edge of `g`.
pub fn exact_edge_resistances(g: &WeightedMultigraph) -> Result<ResistanceEstimates> {
    let pairs: Vec<(usize, usize)> = g.edges.iter().map(|e| (e.u, e.v)).collect();
    Ok(ResistanceEstimates {
        values: exact_effective_resistances(g, &pairs)?,
        method: ResistanceMethod::Exact,
        theta: 0.0,
    })
}

/// Dense matrix of all pairwise resistances; cross-component entries are
/// reported as an error rather than a sentinel.
pub fn all_pairs_resistances(g: &WeightedMultigraph) -> Result<DMatrix<f64>> {
    let (c, _) = g.components();
    if c > 1 {
        return Err(Error::Precondition(format!("graph has {c} components")));
    }
    let p = pinv_sym(&laplacian(g));
    Ok(DMatrix::from_fn(g.n, g.n, |u, v| pair_from_pinv(&p, u, v)))
}

/// Number of ±1 projections used by [`approx_effective_resistances`].
pub fn projection_count(n: usize, theta: f64) -> usize {
    let ln = (n.max(2) as f64).ln();
    (24.0 * ln / (theta * theta)).ceil() as usize
}

/// Random-projection estimates of every edge resistance: with Q a k×m
/// random ±1/√k matrix, r_e ≈ ‖Q W^{1/2} B L⁺ χ_e‖². Each projection costs
/// one Laplacian solve; projections run in parallel on their own streams and
/// are summed in index order.
pub fn approx_effective_resistances<R: Rng>(
    g: &WeightedMultigraph,
    theta: f64,
    rng: &mut R,
) -> Result<ResistanceEstimates> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Precondition(format!(
            "theta must lie in (0, 1), got {theta}"
        )));
    }
    let k = projection_count(g.n, theta);
    let seed = rng::child_seed(rng);
    let solver = LaplacianSolver::new(g);
    let columns: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|j| {
            let mut r = rng::stream(seed, "resistance", "projection", j as u64);
            let mut y = vec![0.0; g.n];
            for e in &g.edges {
                let s = if r.gen::<bool>() { 1.0 } else { -1.0 };
                let c = s * (e.w as f64).sqrt();
                y[e.u] += c;
                y[e.v] -= c;
            }
            solver.solve(&y, DEFAULT_TOL)
        })
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; g.m()];
    for z in &columns {
        for (i, e) in g.edges.iter().enumerate() {
            let d = z[e.u] - z[e.v];
            values[i] += d * d;
        }
    }
    for v in &mut values {
        *v /= k as f64;
    }
    Ok(ResistanceEstimates {
        values,
        method: ResistanceMethod::Projected,
        theta,
    })
}

/// Σ w_e r_e − (n − c), where c is the number of connected components.
pub fn foster_residual(g: &WeightedMultigraph, est: &ResistanceEstimates) -> f64 {
    let (c, _) = g.components();
    let s: f64 = est.leverage(g).iter().sum();
    s - (g.n - c) as f64
}
