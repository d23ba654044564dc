//! Acceptance criteria, one PASS/FAIL line each. Tolerances and sample
//! counts are pinned below. The process fails only when a criterion outside
//! `EXPECTED_FAIL` fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use cyclesparse::biclique::{
    dd_subset, rational_degrees, sample_matchings, schur_complement, schur_step_cliques,
    stated_variance_bound, Biclique,
};
use cyclesparse::cycles::naive_cycle_decomposition;
use cyclesparse::generators;
use cyclesparse::graph::{Edge, WeightedMultigraph};
use cyclesparse::io::{save_directed, save_undirected};
use cyclesparse::linalg::{certify_spectral_approx, laplacian, pinv_sym};
use cyclesparse::resistance::{
    approx_effective_resistances, exact_edge_resistances, foster_residual,
};
use cyclesparse::rng::{stream, Rng as StreamRng};
use cyclesparse::sketch::{spectral_sketch, SketchConfig};
use cyclesparse::sparsify::{degree_preserving_sparsify, eulerian_sparsify, SparsifyConfig};
use cyclesparse::validate::check_cycle_decomposition;
use cyclesparse::weight_reduce::{default_keep_bits, default_xi, reduce_to_unit};
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

/// Criteria that fail for reasons recorded in the decision log.
const EXPECTED_FAIL: &[u32] = &[9];

const C1_GRAPHS: usize = 200;
const C1_MAX_N: usize = 2048;
const C1_LIMIT: Duration = Duration::from_secs(60);

const C2_SEEDS: u64 = 10;

const C3_RUNS: usize = 20;
const C3_NEEDED: usize = 18;
const C3_EPS: f64 = 0.5;
const C3_LIMIT: Duration = Duration::from_secs(120);

const C4_SEEDS: usize = 50;
const C4_NEEDED: usize = 45;
const C4_EPS: f64 = 0.75;
const C4_N: usize = 40;
const C4_LIMIT: Duration = Duration::from_secs(180);

const C5_HALF: usize = 64;
const C5_VECTORS: usize = 20;
const C5_SKETCHES: usize = 200;
const C5_EPS: f64 = 0.3;
const C5_RATE: f64 = 0.95;
const C5_FIT_EPS: [f64; 4] = [0.1, 0.2, 0.4, 0.8];
const C5_FIT_SKETCHES: usize = 5;
const C5_MAX_EXPONENT: f64 = 1.3;
const C5_LIMIT: Duration = Duration::from_secs(600);

const C6_SEEDS: usize = 20;
const C6_EPS: f64 = 0.1;
const C6_RATE: f64 = 0.95;

const C7_GRAPHS: usize = 50;
const C7_FOSTER_TOL: f64 = 1e-6;
const C7_FACTOR: f64 = 1.5;
const C7_RATE: f64 = 0.99;

const C8_INSTANCES: usize = 50;
const C8_TOL: f64 = 1e-8;
const C8_STAR_TOL: f64 = 1e-12;
const C8_ALPHA: f64 = 1.1;

const C9_SIDES: [usize; 3] = [4, 8, 16];
const C9_SAMPLES: usize = 10_000;
const C9_VECTORS: usize = 20;

type Criterion = fn() -> (bool, String);

struct Outcome {
    id: u32,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn rng(op: &str, path: u64) -> StreamRng {
    stream(2024, "acceptance", op, path)
}

fn ceil_log2(n: usize) -> usize {
    (n as f64).log2().ceil() as usize
}

fn criterion_1() -> (bool, String) {
    let start = Instant::now();
    let mut r = rng("c1", 0);
    let mut failures = Vec::new();
    let mut multigraphs = 0;
    for i in 0..C1_GRAPHS {
        let n = (2f64.powf(r.gen_range(3.0..=(C1_MAX_N as f64).log2()))) as usize;
        let g = if i % 2 == 0 {
            multigraphs += 1;
            let m = n * r.gen_range(1..8);
            generators::random_multigraph(n, m, &mut r)
        } else {
            generators::erdos_renyi(n, (6.0 / n as f64).min(1.0), &mut r)
        };
        let d = naive_cycle_decomposition(&g);
        let len_bound = 2 * ceil_log2(n.max(2));
        let problem = match check_cycle_decomposition(&g, &d) {
            Err(e) => Some(e),
            Ok(c) if c.max_len > len_bound => Some(format!("length {} > {len_bound}", c.max_len)),
            Ok(c) if c.extras > 2 * n => Some(format!("{} extras > 2n", c.extras)),
            Ok(_) => None,
        };
        if let Some(p) = problem {
            failures.push(format!("graph {i} (n={n}): {p}"));
        }
    }
    let t = start.elapsed();
    let passed = failures.is_empty() && t < C1_LIMIT;
    let mut detail = format!(
        "{}/{C1_GRAPHS} valid ({multigraphs} multigraphs), {:.1}s < {}s",
        C1_GRAPHS - failures.len(),
        t.as_secs_f64(),
        C1_LIMIT.as_secs()
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first failure: {f}"));
    }
    (passed, detail)
}

fn criterion_2() -> (bool, String) {
    let mut checked = 0;
    let mut bad = Vec::new();
    for seed in 0..C2_SEEDS {
        let mut r = rng("c2", seed);
        let g = generators::connected_erdos_renyi(64, 0.5, &mut r);
        for min_rounds in [0, 2] {
            let mut cfg = SparsifyConfig::new(0.5, seed);
            cfg.min_rounds = min_rounds;
            checked += 1;
            match degree_preserving_sparsify(&g, &cfg) {
                Ok(out) if out.graph.degrees() == g.degrees() => {}
                Ok(_) => bad.push(format!("sparsify seed {seed}")),
                Err(e) => bad.push(format!("sparsify seed {seed}: {e}")),
            }
        }

        let h = generators::connected_erdos_renyi(100, 0.5, &mut r);
        checked += 1;
        match spectral_sketch(&h, &SketchConfig::new(0.3, seed)) {
            Ok(out) if out.graph.degrees() == h.degrees() => {}
            Ok(_) => bad.push(format!("sketch seed {seed}")),
            Err(e) => bad.push(format!("sketch seed {seed}: {e}")),
        }

        let side = [4, 8, 16][seed as usize % 3];
        let n = 3 * side;
        let k: Vec<Biclique> = (0..3)
            .map(|_| {
                let mut vs: Vec<usize> = (0..n).collect();
                rand::seq::SliceRandom::shuffle(&mut vs[..], &mut r);
                Biclique::new(vs[..side].to_vec(), vs[side..2 * side].to_vec())
            })
            .collect();
        checked += 1;
        let s = r.gen_range(1..6);
        match cyclesparse::biclique::sample_matchings_on(n, &k, s, &mut r) {
            Ok(hm) if hm.degrees() == rational_degrees(n, &k) => {}
            Ok(_) => bad.push(format!("sample_matchings seed {seed}")),
            Err(e) => bad.push(format!("sample_matchings seed {seed}: {e}")),
        }

        let c = generators::random_circulation(24, 30, 6, 1 << 60, &mut r);
        checked += 1;
        match reduce_to_unit(&c, default_xi(24), default_keep_bits(24)) {
            Ok(red) => {
                let want = (
                    c.out_degrees()
                        .iter()
                        .map(|&d| d as i128)
                        .collect::<Vec<_>>(),
                    c.in_degrees()
                        .iter()
                        .map(|&d| d as i128)
                        .collect::<Vec<_>>(),
                );
                if red.degrees() != want {
                    bad.push(format!("reduce_to_unit seed {seed}"));
                }
            }
            Err(e) => bad.push(format!("reduce_to_unit seed {seed}: {e}")),
        }
    }
    let detail = format!(
        "{}/{checked} runs exact (sparsify, sketch, matchings, reduce_to_unit){}",
        checked - bad.len(),
        bad.first()
            .map(|b| format!("; first mismatch: {b}"))
            .unwrap_or_default()
    );
    (bad.is_empty(), detail)
}

fn criterion_3() -> (bool, String) {
    let start = Instant::now();
    let results: Vec<(f64, usize)> = (0..C3_RUNS)
        .into_par_iter()
        .map(|i| {
            let mut r = rng("c3", i as u64);
            let g = generators::erdos_renyi(64, 0.5, &mut r);
            let out =
                degree_preserving_sparsify(&g, &SparsifyConfig::new(C3_EPS, i as u64)).unwrap();
            let cert = certify_spectral_approx(&g, &out.graph)
                .map(|c| c.epsilon())
                .unwrap_or(f64::INFINITY);
            (cert, out.rounds.len())
        })
        .collect();
    let t = start.elapsed();
    // Diagnostic only: the loop guard exceeds the edge count at this size, so
    // also report what one forced round does on the same graphs.
    let forced: Vec<f64> = (0..C3_RUNS)
        .into_par_iter()
        .map(|i| {
            let mut r = rng("c3", i as u64);
            let g = generators::erdos_renyi(64, 0.5, &mut r);
            let mut cfg = SparsifyConfig::new(C3_EPS, i as u64);
            cfg.min_rounds = 1;
            let out = degree_preserving_sparsify(&g, &cfg).unwrap();
            certify_spectral_approx(&g, &out.graph)
                .map(|c| c.epsilon())
                .unwrap_or(f64::INFINITY)
        })
        .collect();
    let forced_ok = forced.iter().filter(|&&c| c <= C3_EPS).count();
    let forced_worst = forced.iter().cloned().fold(0.0, f64::max);
    let ok = results.iter().filter(|(c, _)| *c <= C3_EPS).count();
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let rounds: usize = results.iter().map(|r| r.1).sum();
    let passed = ok >= C3_NEEDED && t < C3_LIMIT;
    let detail = format!(
        "{ok}/{C3_RUNS} within ε={C3_EPS} (need {C3_NEEDED}), worst {worst:.4}, total rounds {rounds}, {:.1}s < {}s; one forced round: {forced_ok}/{C3_RUNS}, worst {forced_worst:.4}",
        t.as_secs_f64(),
        C3_LIMIT.as_secs()
    );
    (passed, detail)
}

fn criterion_4() -> (bool, String) {
    let start = Instant::now();
    let results: Vec<Result<(f64, usize), String>> = (0..C4_SEEDS)
        .into_par_iter()
        .map(|i| {
            let mut r = rng("c4", i as u64);
            let g = generators::random_circulation(C4_N, 3 * C4_N, 8, 16, &mut r);
            let out = eulerian_sparsify(&g, &SparsifyConfig::new(C4_EPS, i as u64))
                .map_err(|e| e.to_string())?;
            if !out.graph.is_eulerian() {
                return Err(format!("seed {i} lost the Eulerian property"));
            }
            let cert = cyclesparse::sparsify::directed_error(&g, &out.graph);
            Ok((cert, out.rounds.len()))
        })
        .collect();
    let t = start.elapsed();
    let forced: Vec<f64> = (0..C4_SEEDS)
        .into_par_iter()
        .map(|i| {
            let mut r = rng("c4", i as u64);
            let g = generators::random_circulation(C4_N, 3 * C4_N, 8, 16, &mut r);
            let mut cfg = SparsifyConfig::new(C4_EPS, i as u64);
            cfg.min_rounds = 1;
            eulerian_sparsify(&g, &cfg)
                .map(|o| cyclesparse::sparsify::directed_error(&g, &o.graph))
                .unwrap_or(f64::INFINITY)
        })
        .collect();
    let forced_ok = forced.iter().filter(|&&c| c <= C4_EPS).count();
    let forced_worst = forced.iter().cloned().fold(0.0, f64::max);
    let errors: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    let good: Vec<(f64, usize)> = results
        .iter()
        .filter_map(|r| r.as_ref().ok().copied())
        .collect();
    let ok = good.iter().filter(|(c, _)| *c <= C4_EPS).count();
    let worst = good.iter().map(|r| r.0).fold(0.0, f64::max);
    let rounds: usize = good.iter().map(|r| r.1).sum();
    let passed = errors.is_empty() && ok >= C4_NEEDED && t < C4_LIMIT;
    let detail = format!(
        "{ok}/{C4_SEEDS} within ε={C4_EPS} (need {C4_NEEDED}), worst {worst:.4}, total rounds {rounds}, Eulerian every round: {}, {:.1}s < {}s; one forced round: {forced_ok}/{C4_SEEDS}, worst {forced_worst:.4}",
        errors.is_empty(),
        t.as_secs_f64(),
        C4_LIMIT.as_secs()
    );
    (passed, detail)
}

fn pm1(n: usize, r: &mut StreamRng) -> Vec<f64> {
    (0..n)
        .map(|_| if r.gen::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

fn criterion_5() -> (bool, String) {
    let start = Instant::now();
    let g = generators::dumbbell(C5_HALF);
    let per_vector: Vec<usize> = (0..C5_VECTORS)
        .into_par_iter()
        .map(|v| {
            let mut r = rng("c5", v as u64);
            let x = pm1(g.n, &mut r);
            let exact = g.quadratic_form(&x);
            (0..C5_SKETCHES)
                .filter(|_| {
                    let h = spectral_sketch(&g, &SketchConfig::new(C5_EPS, r.gen()))
                        .unwrap()
                        .graph;
                    (h.quadratic_form(&x) - exact).abs() <= C5_EPS * exact
                })
                .count()
        })
        .collect();
    let total: usize = per_vector.iter().sum();
    let trials = C5_VECTORS * C5_SKETCHES;
    let rate = total as f64 / trials as f64;
    let worst_vector = *per_vector.iter().min().unwrap() as f64 / C5_SKETCHES as f64;

    // Least-squares slope of ln(size) against ln(1/ε).
    let points: Vec<(f64, f64)> = C5_FIT_EPS
        .iter()
        .enumerate()
        .map(|(i, &eps)| {
            let mut r = rng("c5-fit", i as u64);
            let sizes: f64 = (0..C5_FIT_SKETCHES)
                .map(|_| {
                    spectral_sketch(&g, &SketchConfig::new(eps, r.gen()))
                        .unwrap()
                        .graph
                        .m() as f64
                })
                .sum();
            ((1.0 / eps).ln(), (sizes / C5_FIT_SKETCHES as f64).ln())
        })
        .collect();
    let mx = points.iter().map(|p| p.0).sum::<f64>() / points.len() as f64;
    let my = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let t = start.elapsed();
    let passed = rate >= C5_RATE && slope <= C5_MAX_EXPONENT && t < C5_LIMIT;
    let detail = format!(
        "{total}/{trials} trials within ε={C5_EPS} ({:.1}% ≥ {:.0}%, worst vector {:.1}%), size exponent {slope:.3} ≤ {C5_MAX_EXPONENT}, {:.1}s < {}s",
        100.0 * rate,
        100.0 * C5_RATE,
        100.0 * worst_vector,
        t.as_secs_f64(),
        C5_LIMIT.as_secs()
    );
    (passed, detail)
}

fn pair_resistance(p: &DMatrix<f64>, u: usize, v: usize) -> f64 {
    p[(u, u)] + p[(v, v)] - 2.0 * p[(u, v)]
}

fn criterion_6() -> (bool, String) {
    let worst: Vec<f64> = (0..C6_SEEDS)
        .into_par_iter()
        .map(|i| {
            let mut r = rng("c6", i as u64);
            let n = if i % 2 == 0 { 60 } else { 100 };
            let g = generators::connected_erdos_renyi(n, 0.5, &mut r);
            let h = spectral_sketch(&g, &SketchConfig::new(C6_EPS, r.gen()))
                .unwrap()
                .graph;
            let (pg, ph) = (pinv_sym(&laplacian(&g)), pinv_sym(&laplacian(&h)));
            let mut w: f64 = 0.0;
            for u in 0..n {
                for v in u + 1..n {
                    w = w.max(
                        (pair_resistance(&ph, u, v) / pair_resistance(&pg, u, v))
                            .ln()
                            .abs(),
                    );
                }
            }
            w
        })
        .collect();
    let ok = worst.iter().filter(|&&w| w <= 7.0 * C6_EPS).count();
    let max = worst.iter().cloned().fold(0.0, f64::max);
    let passed = ok as f64 >= C6_RATE * C6_SEEDS as f64;
    (passed, format!("{ok}/{C6_SEEDS} seeds within e^±{:.1} (worst |ln ratio| {max:.4}), n ∈ {{60, 100}}, ε={C6_EPS}", 7.0 * C6_EPS))
}

fn c7_graph(i: usize, r: &mut StreamRng) -> WeightedMultigraph {
    let n = r.gen_range(20..=120);
    let g = generators::with_random_weights(&generators::connected_erdos_renyi(n, 0.15, r), 8, r);
    if !i.is_multiple_of(5) {
        return g;
    }
    // Every fifth graph gets a second component.
    let extra = generators::connected_erdos_renyi(10, 0.5, r);
    let mut edges = g.edges.clone();
    for e in &extra.edges {
        edges.push(Edge::new(edges.len(), e.u + n, e.v + n, e.w));
    }
    WeightedMultigraph { n: n + 10, edges }
}

fn criterion_7() -> (bool, String) {
    let rows: Vec<(bool, f64, usize, usize)> = (0..C7_GRAPHS)
        .into_par_iter()
        .map(|i| {
            let mut r = rng("c7", i as u64);
            let g = c7_graph(i, &mut r);
            let exact = exact_edge_resistances(&g).unwrap();
            let residual = foster_residual(&g, &exact).abs();
            let approx = approx_effective_resistances(&g, C7_FACTOR.ln(), &mut r).unwrap();
            let within = exact
                .values
                .iter()
                .zip(&approx.values)
                .filter(|(e, a)| *a / *e <= C7_FACTOR && *e / *a <= C7_FACTOR)
                .count();
            (
                residual <= C7_FOSTER_TOL * g.n as f64,
                residual / g.n as f64,
                within,
                g.m(),
            )
        })
        .collect();
    let foster_ok = rows.iter().filter(|r| r.0).count();
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let within: usize = rows.iter().map(|r| r.2).sum();
    let edges: usize = rows.iter().map(|r| r.3).sum();
    let rate = within as f64 / edges as f64;
    let passed = foster_ok == C7_GRAPHS && rate >= C7_RATE;
    let detail = format!(
        "Foster {foster_ok}/{C7_GRAPHS} (worst residual/n {worst:.2e} ≤ {C7_FOSTER_TOL:e}); projections within ×{C7_FACTOR} on {within}/{edges} edges ({:.2}% ≥ {:.0}%)",
        100.0 * rate,
        100.0 * C7_RATE
    );
    (passed, detail)
}

fn criterion_8() -> (bool, String) {
    let mut worst: f64 = 0.0;
    let mut ok = 0;
    let mut r = rng("c8", 0);
    let mut instances = 0;
    while instances < C8_INSTANCES {
        let n = r.gen_range(10..=40);
        let g = generators::with_random_weights(
            &generators::connected_erdos_renyi(n, 0.3, &mut r),
            10,
            &mut r,
        );
        let f = dd_subset(&g, C8_ALPHA, &mut r);
        if f.is_empty() {
            continue;
        }
        instances += 1;
        let c: Vec<usize> = (0..n).filter(|v| !f.contains(v)).collect();
        let step = schur_step_cliques(&g, &f).unwrap();
        let lhs = schur_complement(&laplacian(&g), &f, &c);
        let rhs = schur_complement(&step.laplacian(n), &f, &c) * 0.5;
        let err = (&lhs - rhs).amax() / lhs.amax().max(1.0);
        worst = worst.max(err);
        if err <= C8_TOL {
            ok += 1;
        }
    }
    let star = generators::star(3);
    let step = schur_step_cliques(&star, &[0]).unwrap();
    let half = schur_complement(&step.laplacian(4), &[0], &[1, 2, 3]) * 0.5;
    let k3 = DMatrix::from_fn(3, 3, |i, j| if i == j { 2.0 / 3.0 } else { -1.0 / 3.0 });
    let star_err = (half - k3).amax();
    let passed = ok == C8_INSTANCES && star_err <= C8_STAR_TOL;
    (
        passed,
        format!("{ok}/{C8_INSTANCES} instances within {C8_TOL:e} (worst {worst:.2e}); star K₃/3 error {star_err:.1e} ≤ {C8_STAR_TOL:e}"),
    )
}

fn criterion_9() -> (bool, String) {
    let rows: Vec<(usize, usize, f64)> = C9_SIDES
        .par_iter()
        .map(|&side| {
            let k = Biclique::new((0..side).collect(), (side..2 * side).collect());
            let mut ok = 0;
            let mut worst: f64 = 0.0;
            for v in 0..C9_VECTORS {
                let mut r = rng("c9", (side * 1000 + v) as u64);
                let x: Vec<f64> = (0..2 * side).map(|_| r.gen_range(-1.0..1.0)).collect();
                let xhat = x.iter().sum::<f64>() / x.len() as f64;
                let samples: Vec<f64> = (0..C9_SAMPLES)
                    .map(|_| {
                        sample_matchings(std::slice::from_ref(&k), 1, &mut r)
                            .unwrap()
                            .quadratic_form(&x)
                    })
                    .collect();
                let mean = samples.iter().sum::<f64>() / C9_SAMPLES as f64;
                let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>()
                    / (C9_SAMPLES - 1) as f64;
                let bound = stated_variance_bound(&k, &x, xhat, 1);
                worst = worst.max(var / bound);
                if var <= bound {
                    ok += 1;
                }
            }
            (side, ok, worst)
        })
        .collect();
    let total: usize = rows.iter().map(|r| r.1).sum();
    let parts: Vec<String> = rows
        .iter()
        .map(|(s, ok, w)| format!("r={s}: {ok}/{C9_VECTORS} (max var/bound {w:.3})"))
        .collect();
    let passed = total == C9_SIDES.len() * C9_VECTORS;
    (
        passed,
        format!(
            "{total}/{} vectors under the stated bound, x̂ = mean(x); {}",
            C9_SIDES.len() * C9_VECTORS,
            parts.join(", ")
        ),
    )
}

fn criterion_10() -> (bool, String) {
    let dir: PathBuf =
        std::env::temp_dir().join(format!("cyclesparse-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut r = rng("c10", 0);
    let und = dir.join("und.txt");
    let g = generators::with_random_weights(
        &generators::connected_erdos_renyi(40, 0.3, &mut r),
        4,
        &mut r,
    );
    std::fs::write(&und, save_undirected(&g)).unwrap();
    let dir_path = dir.join("dir.txt");
    std::fs::write(
        &dir_path,
        save_directed(&generators::random_circulation(16, 20, 5, 1 << 40, &mut r)),
    )
    .unwrap();
    let (u, d) = (
        und.to_str().unwrap().to_string(),
        dir_path.to_str().unwrap().to_string(),
    );
    let pipelines: Vec<Vec<String>> = [
        vec!["decompose", &u],
        vec![
            "decompose",
            &u,
            "--cycle-algo",
            "short",
            "--k",
            "8",
            "--levels",
            "1",
        ],
        vec![
            "sparsify",
            &u,
            "--eps",
            "0.9",
            "--min-rounds",
            "2",
            "--seed",
            "11",
        ],
        vec![
            "sparsify-eulerian",
            &d,
            "--eps",
            "0.75",
            "--min-rounds",
            "1",
            "--seed",
            "12",
        ],
        vec!["sketch", &u, "--eps", "0.4", "--seed", "13"],
        vec![
            "sketch", &u, "--eps", "0.4", "--seed", "13", "--phi", "0.2", "--format", "json",
        ],
        vec!["resistances", &u, "--seed", "14"],
        vec!["resistances", &u, "--exact", "--pair", "0,5"],
        vec!["schur-step", &u, "--seed", "15"],
        vec!["reduce-weights", &d],
    ]
    .iter()
    .map(|v| v.iter().map(|s| s.to_string()).collect())
    .collect();
    let mut identical = 0;
    let mut notes = Vec::new();
    for args in &pipelines {
        let a = cyclesparse_cli::execute(args);
        let b = cyclesparse_cli::execute(args);
        let ra = a.report.as_ref().map(|x| x.to_json());
        let rb = b.report.as_ref().map(|x| x.to_json());
        if ra.is_some() && ra == rb && a.output == b.output && a.code == b.code {
            identical += 1;
        } else {
            notes.push(format!("{} differs or failed ({:?})", args[0], a.message));
        }
    }
    // Round trip through a stored certificate.
    let rep = dir.join("cert.json");
    let mut args = pipelines[2].clone();
    args.extend([
        "--report".to_string(),
        rep.to_str().unwrap().to_string(),
        "-o".into(),
        dir.join("out.txt").to_str().unwrap().to_string(),
    ]);
    let stored = cyclesparse_cli::run(&args);
    let replayed = dir.join("replayed.json").to_str().unwrap().to_string();
    let verify: Vec<String> = [
        "verify",
        "--certificate",
        rep.to_str().unwrap(),
        "-o",
        &replayed,
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let verified = cyclesparse_cli::run(&verify);
    let _ = std::fs::remove_dir_all(&dir);
    let passed = identical == pipelines.len() && stored == 0 && verified == 0;
    let mut detail = format!(
        "{identical}/{} pipelines replay byte-identically; verify --certificate exit {verified}",
        pipelines.len()
    );
    if let Some(n) = notes.first() {
        detail.push_str(&format!("; {n}"));
    }
    (passed, detail)
}

fn main() {
    let criteria: [(u32, Criterion); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut outcomes = Vec::new();
    for (id, f) in criteria {
        let start = Instant::now();
        let (passed, detail) = f();
        let o = Outcome {
            id,
            passed,
            detail,
            elapsed: start.elapsed(),
        };
        println!(
            "{} criterion {:>2}: {} [{:.1}s]",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.detail,
            o.elapsed.as_secs_f64()
        );
        outcomes.push(o);
    }
    let unexpected: Vec<u32> = outcomes
        .iter()
        .filter(|o| !o.passed && !EXPECTED_FAIL.contains(&o.id))
        .map(|o| o.id)
        .collect();
    let recovered: Vec<u32> = outcomes
        .iter()
        .filter(|o| o.passed && EXPECTED_FAIL.contains(&o.id))
        .map(|o| o.id)
        .collect();
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!(
        "acceptance: {passed}/{} criteria pass; expected failures {:?}",
        outcomes.len(),
        EXPECTED_FAIL
    );
    if !recovered.is_empty() {
        println!("note: criteria {recovered:?} were expected to fail but passed");
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
