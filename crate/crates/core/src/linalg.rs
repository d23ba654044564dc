//! Laplacian matrices, solves, pseudoinverse quadratic forms and spectral
//! comparisons. The dense path is exact up to floating point and is used for
//! n ≤ [`DENSE_LIMIT`]; larger inputs fall back to preconditioned CG.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, WeightedMultigraph};

pub const DENSE_LIMIT: usize = 500;
pub const DEFAULT_TOL: f64 = 1e-10;

/// Which matrix of a graph to materialize.
#[derive(Debug, Clone, Copy)]
pub enum LaplacianView<'a> {
    Undirected(&'a WeightedMultigraph),
    /// L[u][u] = out-degree of u, L[u][v] = -w(v→u).
    Directed(&'a DirectedGraph),
    /// Laplacian of the undirectification (every edge at half weight).
    Undirectified(&'a DirectedGraph),
    Adjacency(&'a WeightedMultigraph),
    Degree(&'a WeightedMultigraph),
}

impl LaplacianView<'_> {
    pub fn n(&self) -> usize {
        match self {
            LaplacianView::Undirected(g)
            | LaplacianView::Adjacency(g)
            | LaplacianView::Degree(g) => g.n,
            LaplacianView::Directed(g) | LaplacianView::Undirectified(g) => g.n,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match *self {
            LaplacianView::Undirected(g) => laplacian(g),
            LaplacianView::Directed(g) => directed_laplacian(g),
            LaplacianView::Undirectified(g) => laplacian(&g.support()) * 0.5,
            LaplacianView::Adjacency(g) => {
                let mut a = DMatrix::zeros(g.n, g.n);
                for e in &g.edges {
                    a[(e.u, e.v)] += e.w as f64;
                    a[(e.v, e.u)] += e.w as f64;
                }
                a
            }
            LaplacianView::Degree(g) => DMatrix::from_diagonal(&DVector::from_iterator(
                g.n,
                g.degrees().iter().map(|&d| d as f64),
            )),
        }
    }
}

pub fn laplacian(g: &WeightedMultigraph) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(g.n, g.n);
    for e in &g.edges {
        let w = e.w as f64;
        l[(e.u, e.u)] += w;
        l[(e.v, e.v)] += w;
        l[(e.u, e.v)] -= w;
        l[(e.v, e.u)] -= w;
    }
    l
}

/// Laplacian of a graph given as real-weighted edge triples.
pub fn laplacian_from_triples(n: usize, edges: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    for &(u, v, w) in edges {
        l[(u, u)] += w;
        l[(v, v)] += w;
        l[(u, v)] -= w;
        l[(v, u)] -= w;
    }
    l
}

pub fn directed_laplacian(g: &DirectedGraph) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(g.n, g.n);
    for e in &g.edges {
        let w = e.w as f64;
        l[(e.u, e.u)] += w;
        l[(e.v, e.u)] -= w;
    }
    l
}

/// Orthonormal eigenbasis of the range of a PSD matrix, with eigenvalues.
struct RangeBasis {
    q: DMatrix<f64>,
    vals: Vec<f64>,
}

fn range_basis(l: &DMatrix<f64>) -> RangeBasis {
    let eig = SymmetricEigen::new(l.clone());
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let cut = 1e-9 * top.max(1e-300);
    let keep: Vec<usize> = (0..l.nrows())
        .filter(|&i| eig.eigenvalues[i] > cut)
        .collect();
    let mut q = DMatrix::zeros(l.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        q.set_column(j, &eig.eigenvectors.column(i));
    }
    RangeBasis {
        q,
        vals: keep.iter().map(|&i| eig.eigenvalues[i]).collect(),
    }
}

impl RangeBasis {
    /// Λ^{-1/2} Q⊤ M Q Λ^{-1/2}
    fn whiten(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut w = self.q.transpose() * m * &self.q;
        let s: Vec<f64> = self.vals.iter().map(|v| 1.0 / v.sqrt()).collect();
        for i in 0..w.nrows() {
            for j in 0..w.ncols() {
                w[(i, j)] *= s[i] * s[j];
            }
        }
        w
    }
}

/// Dense Moore-Penrose pseudoinverse of a symmetric PSD matrix.
pub fn pinv_sym(l: &DMatrix<f64>) -> DMatrix<f64> {
    let b = range_basis(l);
    let mut scaled = b.q.clone();
    for (j, v) in b.vals.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / v);
    }
    scaled * b.q.transpose()
}

/// Natural logs of the extreme generalized eigenvalues of (L_H, L_G) on the
/// range of L_G.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCertificate {
    pub log_ratio_min: f64,
    pub log_ratio_max: f64,
    pub tolerance: f64,
}

impl SpectralCertificate {
    pub fn epsilon(&self) -> f64 {
        self.log_ratio_min.abs().max(self.log_ratio_max.abs())
    }

    pub fn within(&self, eps: f64) -> bool {
        self.epsilon() <= eps
    }
}

fn same_components(a: &[usize], b: &[usize]) -> bool {
    // Labels are assigned in first-seen vertex order, so equal partitions
    // give equal label vectors.
    a == b
}

pub fn certify_spectral_approx(
    g: &WeightedMultigraph,
    h: &WeightedMultigraph,
) -> Result<SpectralCertificate> {
    if g.n != h.n {
        return Err(Error::InvalidGraph("vertex counts differ".into()));
    }
    if !same_components(&g.components().1, &h.components().1) {
        return Err(Error::ComponentMismatch);
    }
    certify_dense(&laplacian(g), &laplacian(h))
}

/// Certificate for two PSD matrices with the same range.
pub fn certify_dense(lg: &DMatrix<f64>, lh: &DMatrix<f64>) -> Result<SpectralCertificate> {
    let b = range_basis(lg);
    if b.vals.is_empty() {
        return Ok(SpectralCertificate {
            log_ratio_min: 0.0,
            log_ratio_max: 0.0,
            tolerance: 1e-9,
        });
    }
    let w = b.whiten(lh);
    let ev = SymmetricEigen::new(w).eigenvalues;
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo <= 0.0 {
        return Err(Error::ComponentMismatch);
    }
    Ok(SpectralCertificate {
        log_ratio_min: lo.ln(),
        log_ratio_max: hi.ln(),
        tolerance: 1e-9,
    })
}

/// ‖L_G^{+/2}(A − B)L_G^{+/2}‖₂ for arbitrary (possibly asymmetric) A, B.
pub fn asym_error_norm(lg_sym: &DMatrix<f64>, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let basis = range_basis(lg_sym);
    if basis.vals.is_empty() {
        return 0.0;
    }
    let d = basis.whiten(&(a - b));
    d.singular_values().iter().cloned().fold(0.0, f64::max)
}

fn project_components(x: &mut [f64], labels: &[usize], count: usize) {
    let mut sum = vec![0.0; count];
    let mut cnt = vec![0usize; count];
    for (i, &c) in labels.iter().enumerate() {
        sum[c] += x[i];
        cnt[c] += 1;
    }
    for (i, &c) in labels.iter().enumerate() {
        x[i] -= sum[c] / cnt[c] as f64;
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Reusable Laplacian solver: dense pseudoinverse for small graphs,
/// Jacobi-preconditioned CG otherwise.
pub struct LaplacianSolver {
    g: WeightedMultigraph,
    labels: Vec<usize>,
    ncomp: usize,
    pinv: Option<DMatrix<f64>>,
    diag: Vec<f64>,
    pub max_iters: usize,
}

impl LaplacianSolver {
    pub fn new(g: &WeightedMultigraph) -> Self {
        Self::with_dense_limit(g, DENSE_LIMIT)
    }

    pub fn with_dense_limit(g: &WeightedMultigraph, dense_limit: usize) -> Self {
        let (ncomp, labels) = g.components();
        let pinv = (g.n <= dense_limit).then(|| pinv_sym(&laplacian(g)));
        LaplacianSolver {
            g: g.clone(),
            labels,
            ncomp,
            pinv,
            diag: g.degrees().iter().map(|&d| d as f64).collect(),
            max_iters: 10 * g.n.max(1),
        }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for e in &self.g.edges {
            let w = e.w as f64;
            let d = w * (x[e.u] - x[e.v]);
            out[e.u] += d;
            out[e.v] -= d;
        }
    }

    pub fn solve(&self, b: &[f64], tol: f64) -> Result<Vec<f64>> {
        let mut rhs = b.to_vec();
        project_components(&mut rhs, &self.labels, self.ncomp);
        let bn = norm(&rhs);
        if bn == 0.0 {
            return Ok(vec![0.0; b.len()]);
        }
        let mut x = match &self.pinv {
            Some(p) => (p * DVector::from_column_slice(&rhs)).as_slice().to_vec(),
            None => self.cg(&rhs, tol, bn)?,
        };
        project_components(&mut x, &self.labels, self.ncomp);
        Ok(x)
    }

    fn cg(&self, b: &[f64], tol: f64, bn: f64) -> Result<Vec<f64>> {
        let n = b.len();
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let pre = |r: &[f64]| -> Vec<f64> {
            r.iter()
                .zip(&self.diag)
                .map(|(v, d)| if *d > 0.0 { v / d } else { 0.0 })
                .collect()
        };
        let mut z = pre(&r);
        project_components(&mut z, &self.labels, self.ncomp);
        let mut p = z.clone();
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let mut ap = vec![0.0; n];
        for it in 0..self.max_iters {
            if norm(&r) <= tol * bn {
                return Ok(x);
            }
            self.apply(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if pap <= 0.0 {
                return Err(Error::NonConvergence {
                    iters: it,
                    residual: norm(&r) / bn,
                });
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            z = pre(&r);
            project_components(&mut z, &self.labels, self.ncomp);
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let res = norm(&r) / bn;
        if res <= tol {
            Ok(x)
        } else {
            Err(Error::NonConvergence {
                iters: self.max_iters,
                residual: res,
            })
        }
    }

    /// x⊤L⁺x, with a flag telling whether x had to be projected onto the range.
    pub fn pseudo_quadratic(&self, x: &[f64]) -> Result<(f64, bool)> {
        let mut p = x.to_vec();
        project_components(&mut p, &self.labels, self.ncomp);
        let scale = norm(x).max(1.0);
        let flagged = p.iter().zip(x).any(|(a, b)| (a - b).abs() > 1e-12 * scale);
        let y = self.solve(&p, DEFAULT_TOL)?;
        let v: f64 = p.iter().zip(&y).map(|(a, b)| a * b).sum();
        Ok((v.max(0.0), flagged))
    }
}

pub fn solve_laplacian(g: &WeightedMultigraph, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    LaplacianSolver::new(g).solve(b, tol)
}

pub fn pseudo_quadratic(g: &WeightedMultigraph, x: &[f64]) -> Result<f64> {
    Ok(LaplacianSolver::new(g).pseudo_quadratic(x)?.0)
}

/// Induced subgraph data for normalized-Laplacian computations on a subset.
struct Induced {
    edges: Vec<(usize, usize, f64)>,
    deg: Vec<f64>,
}

fn induce(g: &WeightedMultigraph, subset: &[usize]) -> Induced {
    let mut local = vec![usize::MAX; g.n];
    for (i, &v) in subset.iter().enumerate() {
        local[v] = i;
    }
    let full = g.degrees();
    let edges = g
        .edges
        .iter()
        .filter(|e| local[e.u] != usize::MAX && local[e.v] != usize::MAX)
        .map(|e| (local[e.u], local[e.v], e.w as f64))
        .collect();
    Induced {
        edges,
        deg: subset.iter().map(|&v| full[v] as f64).collect(),
    }
}

/// λ₂ of D_S^{-1/2} L_{G[S]} D_S^{-1/2} with full-graph degrees, plus the
/// corresponding vector mapped back through D_S^{-1/2} (indexed like
/// `subset`). Sets with fewer than two vertices return +∞.
pub fn fiedler(g: &WeightedMultigraph, subset: &[usize], dense_limit: usize) -> (f64, Vec<f64>) {
    let s = subset.len();
    if s < 2 {
        return (f64::INFINITY, vec![0.0; s]);
    }
    let ind = induce(g, subset);
    if ind.deg.contains(&0.0) {
        // An isolated vertex inside S: the induced graph is disconnected.
        let v: Vec<f64> = ind
            .deg
            .iter()
            .map(|&d| if d == 0.0 { 1.0 } else { 0.0 })
            .collect();
        return (0.0, v);
    }
    let isq: Vec<f64> = ind.deg.iter().map(|d| 1.0 / d.sqrt()).collect();
    if s <= dense_limit {
        let mut m = DMatrix::zeros(s, s);
        for &(a, b, w) in &ind.edges {
            m[(a, a)] += w;
            m[(b, b)] += w;
            m[(a, b)] -= w;
            m[(b, a)] -= w;
        }
        for i in 0..s {
            for j in 0..s {
                m[(i, j)] *= isq[i] * isq[j];
            }
        }
        let eig: SymmetricEigen<f64, nalgebra::Dyn> = SymmetricEigen::new(m);
        let mut idx: Vec<usize> = (0..s).collect();
        let ev: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        idx.sort_by(|&a, &b| ev[a].total_cmp(&ev[b]));
        let k = idx[1];
        let v: Vec<f64> = (0..s).map(|i| eig.eigenvectors[(i, k)] * isq[i]).collect();
        (ev[k].max(0.0), v)
    } else {
        power_fiedler(&ind, &isq)
    }
}

/// Power iteration on 2I − N deflated against D^{1/2}1.
fn power_fiedler(ind: &Induced, isq: &[f64]) -> (f64, Vec<f64>) {
    let s = isq.len();
    let iters = (200.0 * (s as f64).ln()).ceil() as usize;
    let top: Vec<f64> = ind.deg.iter().map(|d| d.sqrt()).collect();
    let tn = norm(&top);
    let top: Vec<f64> = top.iter().map(|v| v / tn).collect();
    let deflate = |x: &mut [f64]| {
        let c: f64 = x.iter().zip(&top).map(|(a, b)| a * b).sum();
        x.iter_mut().zip(&top).for_each(|(a, b)| *a -= c * b);
    };
    let apply_n = |x: &[f64]| -> Vec<f64> {
        let y: Vec<f64> = x.iter().zip(isq).map(|(a, b)| a * b).collect();
        let mut out = vec![0.0; s];
        for &(a, b, w) in &ind.edges {
            let d = w * (y[a] - y[b]);
            out[a] += d;
            out[b] -= d;
        }
        out.iter_mut().zip(isq).for_each(|(a, b)| *a *= b);
        out
    };
    // Deterministic start vector.
    let mut x: Vec<f64> = (0..s)
        .map(|i| ((i as f64 + 1.0) * 0.618_033_988_75).fract() - 0.5)
        .collect();
    deflate(&mut x);
    for _ in 0..iters {
        let nx = apply_n(&x);
        let mut y: Vec<f64> = x.iter().zip(&nx).map(|(a, b)| 2.0 * a - b).collect();
        deflate(&mut y);
        let yn = norm(&y);
        if yn == 0.0 {
            break;
        }
        x = y.iter().map(|v| v / yn).collect();
    }
    let nx = apply_n(&x);
    let rq: f64 =
        x.iter().zip(&nx).map(|(a, b)| a * b).sum::<f64>() / x.iter().map(|a| a * a).sum::<f64>();
    let v = x.iter().zip(isq).map(|(a, b)| a * b).collect();
    (rq.max(0.0), v)
}

pub fn lambda2_normalized(g: &WeightedMultigraph, subset: &[usize]) -> f64 {
    fiedler(g, subset, DENSE_LIMIT).0
}
