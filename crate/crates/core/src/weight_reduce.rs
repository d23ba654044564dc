//! Reduction of arbitrary-weight directed graphs to sums of power-of-two
//! weight classes on few vertices, keeping every in- and out-degree exact.
//! Weight that cannot stay in a class is rerouted onto maximum-weight
//! spanning forests as signed, tree-supported corrections.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{pair_weights, DirectedGraph, Edge, UnionFind, Weight, WeightedMultigraph};
use crate::linalg::{asym_error_norm, LaplacianView};
use crate::sparsify::greedy_bipartition;

fn bits_for(n: usize, per_log: usize) -> u32 {
    (per_log * crate::cycles::ceil_log2(n.max(2))) as u32
}

/// Leading bits kept by [`reduce_powers_of_two`]: ⌈10 log₂ n⌉.
pub fn default_keep_bits(n: usize) -> u32 {
    bits_for(n, 10)
}

/// Bucket spacing ξ = ⌈4 log₂ n⌉, so classes sharing a bucket differ in
/// weight by at least n⁴.
pub fn default_xi(n: usize) -> u32 {
    bits_for(n, 4)
}

/// Weight ratio n⁴ required by [`local_move`].
pub fn default_threshold(n: usize) -> Weight {
    (n.max(2) as Weight).pow(4)
}

fn pad_graph(n: usize, edges: Vec<Edge>) -> DirectedGraph {
    DirectedGraph { n, edges }
}

fn renumber(edges: &mut [Edge]) {
    for (i, e) in edges.iter_mut().enumerate() {
        e.id = i;
    }
}

/// Split into edge-disjoint directed graphs whose undirected supports are
/// bipartite: the crossing edges of a greedy bipartition form one part, and
/// the edges inside each side are decomposed recursively.
pub fn decompose_bipartite_dir(g: &DirectedGraph) -> Vec<DirectedGraph> {
    let mut out = Vec::new();
    split_rec(g.n, g.edges.clone(), &mut out);
    out
}

fn split_rec(n: usize, edges: Vec<Edge>, out: &mut Vec<DirectedGraph>) {
    if edges.is_empty() {
        return;
    }
    let side = greedy_bipartition(&WeightedMultigraph {
        n,
        edges: edges.clone(),
    });
    let (mut cross, mut left, mut right) = (Vec::new(), Vec::new(), Vec::new());
    for e in edges {
        match (side[e.u], side[e.v]) {
            (a, b) if a != b => cross.push(e),
            (true, _) => left.push(e),
            _ => right.push(e),
        }
    }
    out.push(pad_graph(n, cross));
    split_rec(n, left, out);
    split_rec(n, right, out);
}

/// Vertices with at least one incident edge.
pub fn active_vertices(g: &DirectedGraph) -> usize {
    let mut seen = vec![false; g.n];
    for e in &g.edges {
        seen[e.u] = true;
        seen[e.v] = true;
    }
    seen.iter().filter(|&&b| b).count()
}

/// Two-colouring of the undirected support, or `None` if it has an odd
/// cycle. Isolated vertices get side `false`.
pub fn support_sides(g: &DirectedGraph) -> Option<Vec<bool>> {
    let mut adj = vec![Vec::new(); g.n];
    for e in &g.edges {
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    let mut side: Vec<Option<bool>> = vec![None; g.n];
    for s in 0..g.n {
        if side[s].is_some() {
            continue;
        }
        side[s] = Some(false);
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            let sx = side[x].unwrap();
            for &y in &adj[x] {
                match side[y] {
                    None => {
                        side[y] = Some(!sx);
                        stack.push(y);
                    }
                    Some(sy) if sy == sx => return None,
                    _ => {}
                }
            }
        }
    }
    Some(side.into_iter().map(|s| s.unwrap_or(false)).collect())
}

/// Orientation of [`local_move`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveDirection {
    /// Edge u → x₁: remove u→x₁ and x₂→x₃, add u→x₃ and x₂→x₁.
    Forward,
    /// Edge x₁ → u: remove x₁→u and x₃→x₂, add x₃→u and x₁→x₂.
    Reverse,
}

/// The four signed arc changes of a move of weight t.
pub fn local_move_arcs(
    u: usize,
    x1: usize,
    x2: usize,
    x3: usize,
    dir: MoveDirection,
) -> [(usize, usize, i128); 4] {
    match dir {
        MoveDirection::Forward => [(u, x1, -1), (x2, x3, -1), (u, x3, 1), (x2, x1, 1)],
        MoveDirection::Reverse => [(x1, u, -1), (x3, x2, -1), (x3, u, 1), (x1, x2, 1)],
    }
}

/// Move one endpoint of the unit arc between u and x₁ two steps along the
/// heavy path x₁ x₂ x₃. Both directions of x₁x₂ and x₂x₃ must weigh at least
/// `threshold`. In- and out-degrees are unchanged.
pub fn local_move(
    g: &DirectedGraph,
    u: usize,
    x1: usize,
    x2: usize,
    x3: usize,
    dir: MoveDirection,
    threshold: Weight,
) -> Result<DirectedGraph> {
    let mut w: BTreeMap<(usize, usize), Weight> = BTreeMap::new();
    for e in &g.edges {
        *w.entry((e.u, e.v)).or_insert(0) += e.w;
    }
    let get = |a: usize, b: usize| w.get(&(a, b)).copied().unwrap_or(0);
    for (a, b) in [(x1, x2), (x2, x1), (x2, x3), (x3, x2)] {
        if get(a, b) < threshold {
            return Err(Error::Precondition(format!(
                "arc {a}->{b} weighs {} < {threshold}",
                get(a, b)
            )));
        }
    }
    let light = match dir {
        MoveDirection::Forward => (u, x1),
        MoveDirection::Reverse => (x1, u),
    };
    if get(light.0, light.1) < 1 {
        return Err(Error::Precondition(format!(
            "no arc {}->{}",
            light.0, light.1
        )));
    }
    for (a, b, s) in local_move_arcs(u, x1, x2, x3, dir) {
        let e = w.entry((a, b)).or_insert(0);
        *e = if s < 0 { *e - 1 } else { *e + 1 };
    }
    let mut edges: Vec<Edge> = w
        .into_iter()
        .filter(|&(_, x)| x > 0)
        .map(|((a, b), x)| Edge::new(0, a, b, x))
        .collect();
    renumber(&mut edges);
    Ok(pad_graph(g.n, edges))
}

/// Signed arc weights supported on a forest, plus the scaled copy of the
/// forest that keeps them dominated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TreePart {
    /// Undirected forest edges (u, v, w) scaled down; present in both
    /// directions.
    pub base: Vec<(usize, usize, f64)>,
    /// Exact signed corrections on forest arcs.
    pub corrections: Vec<(usize, usize, i128)>,
}

impl TreePart {
    fn extend(&mut self, other: TreePart) {
        self.base.extend(other.base);
        self.corrections.extend(other.corrections);
    }
}

/// Directed Laplacian (column convention L[u][u] += w, L[v][u] −= w) of real
/// arcs.
pub fn directed_laplacian_from_arcs(
    n: usize,
    arcs: impl IntoIterator<Item = (usize, usize, f64)>,
) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    for (u, v, w) in arcs {
        l[(u, u)] += w;
        l[(v, u)] -= w;
    }
    l
}

/// Signed forest arcs realizing the given out/in deficits: leaves are peeled
/// toward a root, the arc leaf→parent carries the leaf's out-deficit and
/// parent→leaf its in-deficit. Fails if a root keeps a nonzero residue, which
/// happens exactly when the deficits are not realizable on the forest.
pub fn tree_corrections(
    n: usize,
    forest: &[(usize, usize)],
    mut out_def: Vec<i128>,
    mut in_def: Vec<i128>,
) -> Result<Vec<(usize, usize, i128)>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in forest {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut roots = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        roots.push(s);
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            order.push(x);
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    stack.push(y);
                }
            }
        }
    }
    let mut out = Vec::new();
    for &v in order.iter().rev() {
        let p = parent[v];
        if p == usize::MAX {
            continue;
        }
        let (o, i) = (out_def[v], in_def[v]);
        if o != 0 {
            out.push((v, p, o));
        }
        if i != 0 {
            out.push((p, v, i));
        }
        in_def[p] -= o;
        out_def[p] -= i;
        out_def[v] = 0;
        in_def[v] = 0;
    }
    for r in roots {
        if out_def[r] != 0 || in_def[r] != 0 {
            return Err(Error::Invariant(format!(
                "deficits ({}, {}) left at root {r}; the forest cannot carry them",
                out_def[r], in_def[r]
            )));
        }
    }
    Ok(out)
}

/// Maximum-weight spanning forest of the undirected support (pairs weighted
/// by the sum of both directions), as vertex pairs.
pub fn max_spanning_forest(g: &DirectedGraph) -> Vec<(usize, usize)> {
    let support = WeightedMultigraph {
        n: g.n,
        edges: g.edges.clone(),
    };
    let mut pairs: Vec<((usize, usize), Weight)> = pair_weights(&support).into_iter().collect();
    pairs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut uf = UnionFind::new(g.n);
    pairs
        .into_iter()
        .filter(|&((a, b), _)| uf.union(a, b))
        .map(|(p, _)| p)
        .collect()
}

/// Output of [`reduce_powers_of_two`].
#[derive(Debug, Clone, PartialEq)]
pub struct PowersOfTwo {
    pub tree: TreePart,
    /// The maximum-weight spanning tree carrying `tree`.
    pub forest: Vec<(usize, usize)>,
    /// Exponent i → arcs of weight exactly 2^i.
    pub classes: BTreeMap<u32, DirectedGraph>,
    pub trailing_edges: usize,
    pub keep_bits: u32,
}

/// Split every weight into its leading `keep_bits` binary digits, one class
/// per digit, and reroute the remaining low-order part along the
/// maximum-weight spanning tree. The support must be connected on its
/// non-isolated vertices and bipartite.
pub fn reduce_powers_of_two(g: &DirectedGraph, keep_bits: u32) -> Result<PowersOfTwo> {
    let n = g.n;
    if support_sides(g).is_none() {
        return Err(Error::Precondition(
            "undirected support is not bipartite".into(),
        ));
    }
    let forest = max_spanning_forest(g);
    let active = active_vertices(g);
    if active > 0 && forest.len() + 1 != active {
        return Err(Error::Precondition(
            "undirected support is disconnected".into(),
        ));
    }
    let mut classes: BTreeMap<u32, Vec<Edge>> = BTreeMap::new();
    let mut out_def = vec![0i128; n];
    let mut in_def = vec![0i128; n];
    let mut trailing_edges = 0;
    for e in &g.edges {
        let bits = Weight::BITS - e.w.leading_zeros();
        let cut = bits.saturating_sub(keep_bits);
        let trailing = e.w & ((1 << cut) - 1);
        let lead = e.w - trailing;
        if trailing > 0 {
            trailing_edges += 1;
            out_def[e.u] += trailing as i128;
            in_def[e.v] += trailing as i128;
        }
        for i in cut..bits {
            if lead >> i & 1 == 1 {
                classes
                    .entry(i)
                    .or_default()
                    .push(Edge::new(0, e.u, e.v, 1 << i));
            }
        }
    }
    let corrections = tree_corrections(n, &forest, out_def, in_def)?;
    let support = WeightedMultigraph {
        n,
        edges: g.edges.clone(),
    };
    let forest_pairs = forest.clone();
    let pw = pair_weights(&support);
    let scale = default_threshold(n) as f64;
    let base = forest
        .iter()
        .map(|&(a, b)| (a, b, pw[&(a.min(b), a.max(b))] as f64 / scale))
        .collect();
    let classes = classes
        .into_iter()
        .map(|(i, mut edges)| {
            renumber(&mut edges);
            (i, pad_graph(n, edges))
        })
        .collect();
    Ok(PowersOfTwo {
        tree: TreePart { base, corrections },
        forest: forest_pairs,
        classes,
        trailing_edges,
        keep_bits,
    })
}

/// One power-of-two class after shrinking.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitClass {
    pub exp: u32,
    pub graph: DirectedGraph,
}

impl UnitClass {
    pub fn vertex_count(&self) -> usize {
        active_vertices(&self.graph)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReductionStats {
    pub parts: usize,
    pub trailing_edges: usize,
    /// Arcs rerouted entirely onto a forest because both endpoints already
    /// shared a heavier component.
    pub absorbed_arcs: usize,
    /// Σ_i t(i) per (part, component, bucket): components of heavier
    /// classes touched by the moved arcs of class i.
    pub touched: Vec<usize>,
    /// Active vertices of the corresponding (part, component).
    pub touched_limit: Vec<usize>,
    pub vertex_total: usize,
    pub edge_total: usize,
}

/// Output of [`reduce_to_unit`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitReduction {
    pub n: usize,
    pub sparse: TreePart,
    pub classes: Vec<UnitClass>,
    pub xi: u32,
    pub stats: ReductionStats,
}

impl UnitReduction {
    /// Exact out- and in-degrees of the corrections plus all classes; the
    /// scaled base forest is symmetric and excluded.
    pub fn degrees(&self) -> (Vec<i128>, Vec<i128>) {
        let mut out = vec![0i128; self.n];
        let mut inn = vec![0i128; self.n];
        for &(u, v, w) in &self.sparse.corrections {
            out[u] += w;
            inn[v] += w;
        }
        for c in &self.classes {
            for e in &c.graph.edges {
                out[e.u] += e.w as i128;
                inn[e.v] += e.w as i128;
            }
        }
        (out, inn)
    }

    /// Directed Laplacian of base + corrections + classes.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let base = self
            .sparse
            .base
            .iter()
            .flat_map(|&(u, v, w)| [(u, v, w), (v, u, w)]);
        let corr = self
            .sparse
            .corrections
            .iter()
            .map(|&(u, v, w)| (u, v, w as f64));
        let classes = self
            .classes
            .iter()
            .flat_map(|c| c.graph.edges.iter().map(|e| (e.u, e.v, e.w as f64)));
        directed_laplacian_from_arcs(self.n, base.chain(corr).chain(classes))
    }

    /// ‖L_G^{+/2}(L_G⃗ − L_out)L_G^{+/2}‖ against the original graph.
    pub fn error_against(&self, g: &DirectedGraph) -> f64 {
        let lg = LaplacianView::Undirectified(g).to_dense();
        asym_error_norm(
            &lg,
            &crate::linalg::directed_laplacian(g),
            &self.laplacian(),
        )
    }
}

fn degree_vectors(g: &DirectedGraph) -> (Vec<i128>, Vec<i128>) {
    let mut out = vec![0i128; g.n];
    let mut inn = vec![0i128; g.n];
    for e in &g.edges {
        out[e.u] += e.w as i128;
        inn[e.v] += e.w as i128;
    }
    (out, inn)
}

fn component_graphs(g: &DirectedGraph) -> Vec<DirectedGraph> {
    let (_, label) = g.components();
    let mut by: BTreeMap<usize, Vec<Edge>> = BTreeMap::new();
    for e in &g.edges {
        by.entry(label[e.u]).or_default().push(*e);
    }
    by.into_values()
        .map(|edges| pad_graph(g.n, edges))
        .collect()
}

/// Shrink the classes of one bucket: classes are visited from heaviest to
/// lightest; each arc of a class has both endpoints moved, inside the
/// components of strictly heavier classes, to that component's
/// representative on the same side. Arcs whose endpoints share a component
/// are dropped from the class entirely. Returns the moved classes and the
/// out/in deficits that the moves leave, to be carried by a spanning tree.
fn shrink_bucket(
    n: usize,
    sides: &[bool],
    classes: &[(u32, &DirectedGraph)],
    out_def: &mut [i128],
    in_def: &mut [i128],
    stats: &mut ReductionStats,
) -> Vec<UnitClass> {
    let mut uf = UnionFind::new(n);
    let mut moved = Vec::new();
    let mut touched_total = 0;
    for &(exp, h) in classes {
        let mut reps: HashMap<(usize, bool), usize> = HashMap::new();
        let mut rep_of = |uf: &mut UnionFind, x: usize| -> (usize, usize) {
            let c = uf.find(x);
            (c, *reps.entry((c, sides[x])).or_insert(x))
        };
        let mut arcs: BTreeMap<(usize, usize), Weight> = BTreeMap::new();
        let mut touched: Vec<usize> = Vec::new();
        for e in &h.edges {
            out_def[e.u] += e.w as i128;
            in_def[e.v] += e.w as i128;
            let (ca, ra) = rep_of(&mut uf, e.u);
            let (cb, rb) = rep_of(&mut uf, e.v);
            if ca == cb {
                stats.absorbed_arcs += 1;
                continue;
            }
            touched.push(ca);
            touched.push(cb);
            *arcs.entry((ra, rb)).or_insert(0) += e.w;
        }
        touched.sort_unstable();
        touched.dedup();
        touched_total += touched.len();
        for e in &h.edges {
            uf.union(e.u, e.v);
        }
        let mut edges = Vec::new();
        for ((a, b), w) in arcs {
            out_def[a] -= w as i128;
            in_def[b] -= w as i128;
            // Arcs landing on the same representative pair stay separate
            // copies of weight 2^exp.
            for _ in 0..(w >> exp) {
                edges.push(Edge::new(0, a, b, 1 << exp));
            }
        }
        renumber(&mut edges);
        if !edges.is_empty() {
            moved.push(UnitClass {
                exp,
                graph: pad_graph(n, edges),
            });
        }
    }
    stats.touched.push(touched_total);
    moved
}

/// Full reduction of an Eulerian digraph: bipartite decomposition, then per
/// connected component of each part the powers-of-two split, then per
/// bucket of exponents congruent mod ξ the component shrinking, with all
/// degree corrections routed onto the component's maximum-weight spanning
/// tree. In- and out-degrees of the corrections plus all classes equal those
/// of `g`.
pub fn reduce_to_unit(g: &DirectedGraph, xi: u32, keep_bits: u32) -> Result<UnitReduction> {
    if !g.is_eulerian() {
        return Err(Error::Precondition("input is not Eulerian".into()));
    }
    if xi == 0 {
        return Err(Error::Precondition("xi must be positive".into()));
    }
    let n = g.n;
    let mut sparse = TreePart::default();
    let mut classes = Vec::new();
    let mut stats = ReductionStats::default();
    let parts = decompose_bipartite_dir(g);
    stats.parts = parts.len();
    for part in &parts {
        let sides =
            support_sides(part).ok_or_else(|| Error::Invariant("part is not bipartite".into()))?;
        for comp in component_graphs(part) {
            let p2 = reduce_powers_of_two(&comp, keep_bits)?;
            stats.trailing_edges += p2.trailing_edges;
            sparse.extend(p2.tree.clone());
            let mut buckets: BTreeMap<u32, Vec<(u32, &DirectedGraph)>> = BTreeMap::new();
            for (&exp, h) in p2.classes.iter().rev() {
                buckets.entry(exp % xi).or_default().push((exp, h));
            }
            let mut out_def = vec![0i128; n];
            let mut in_def = vec![0i128; n];
            let active = active_vertices(&comp);
            for (_, bucket) in buckets {
                classes.extend(shrink_bucket(
                    n,
                    &sides,
                    &bucket,
                    &mut out_def,
                    &mut in_def,
                    &mut stats,
                ));
                stats.touched_limit.push(active);
            }
            // Every move stays inside a component of heavier classes, and
            // the maximum-weight spanning tree path between two vertices of
            // such a component is at least as heavy, so the tree carries
            // the deficits.
            sparse
                .corrections
                .extend(tree_corrections(n, &p2.forest, out_def, in_def)?);
        }
    }
    stats.vertex_total = classes.iter().map(UnitClass::vertex_count).sum();
    stats.edge_total = classes.iter().map(|c| c.graph.m()).sum();
    let out = UnitReduction {
        n,
        sparse,
        classes,
        xi,
        stats,
    };
    if out.degrees() != degree_vectors(g) {
        return Err(Error::Invariant(
            "in/out degrees changed in reduce_to_unit".into(),
        ));
    }
    Ok(out)
}
