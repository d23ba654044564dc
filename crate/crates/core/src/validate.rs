//! Independent certificate checks. Nothing here calls into the constructors
//! it checks.

use std::collections::HashMap;

use crate::cycles::CycleDecomposition;
use crate::graph::WeightedMultigraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DecompositionCheck {
    pub cycles: usize,
    pub extras: usize,
    pub max_len: usize,
}

/// Each edge id appears exactly once across cycles and extras, every cycle is
/// a closed walk with distinct edges, and the declared bounds hold.
pub fn check_cycle_decomposition(
    g: &WeightedMultigraph,
    d: &CycleDecomposition,
) -> Result<DecompositionCheck, String> {
    let mut ends: HashMap<usize, (usize, usize)> = HashMap::new();
    for e in &g.edges {
        ends.insert(e.id, (e.u, e.v));
    }
    let mut seen: HashMap<usize, u32> = HashMap::new();
    for id in d.cycles.iter().flatten().chain(d.extras.iter()) {
        if !ends.contains_key(id) {
            return Err(format!("unknown edge id {id}"));
        }
        *seen.entry(*id).or_default() += 1;
    }
    if let Some((id, c)) = seen.iter().find(|(_, &c)| c != 1) {
        return Err(format!("edge {id} used {c} times"));
    }
    if seen.len() != g.edges.len() {
        return Err(format!(
            "{} of {} edges accounted for",
            seen.len(),
            g.edges.len()
        ));
    }
    let mut max_len = 0;
    for (ci, cyc) in d.cycles.iter().enumerate() {
        if cyc.len() < 2 {
            return Err(format!("cycle {ci} has {} edges", cyc.len()));
        }
        max_len = max_len.max(cyc.len());
        if cyc.len() > d.length_bound {
            return Err(format!(
                "cycle {ci} has length {} > {}",
                cyc.len(),
                d.length_bound
            ));
        }
        // Degree parity: every vertex of a closed walk has even degree in it,
        // and consecutive edges must share the walk vertex.
        let (a0, b0) = ends[&cyc[0]];
        let mut ok = false;
        for start in [a0, b0] {
            let mut at = start;
            let mut good = true;
            for id in cyc {
                let (u, v) = ends[id];
                if u == at {
                    at = v;
                } else if v == at {
                    at = u;
                } else {
                    good = false;
                    break;
                }
            }
            if good && at == start {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(format!("cycle {ci} is not a closed walk"));
        }
    }
    if d.extras.len() > d.extras_bound {
        return Err(format!(
            "{} extras exceed bound {}",
            d.extras.len(),
            d.extras_bound
        ));
    }
    Ok(DecompositionCheck {
        cycles: d.cycles.len(),
        extras: d.extras.len(),
        max_len,
    })
}
