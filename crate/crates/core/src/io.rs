//! Edge-list text format.
//!
//! ```text
//! # n=4 directed=0
//! 0 1 3
//! 1 2 1
//! ```
//!
//! The header is optional. Other lines starting with `#` and blank lines are
//! ignored.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Edge, Weight, WeightedMultigraph, DEFAULT_WEIGHT_CAP};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadedGraph {
    Undirected(WeightedMultigraph),
    Directed(DirectedGraph),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeList {
    pub header_n: Option<usize>,
    pub header_directed: Option<bool>,
    pub triples: Vec<(usize, usize, Weight)>,
}

fn parse_header(line: &str, lineno: usize) -> Result<(Option<usize>, Option<bool>)> {
    let mut n = None;
    let mut directed = None;
    for tok in line.trim_start_matches('#').split_whitespace() {
        if let Some(v) = tok.strip_prefix("n=") {
            n = Some(v.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad vertex count {v:?}"),
            })?);
        } else if let Some(v) = tok.strip_prefix("directed=") {
            directed = Some(match v {
                "0" => false,
                "1" => true,
                _ => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("bad directed flag {v:?}"),
                    })
                }
            });
        }
    }
    Ok((n, directed))
}

pub fn parse_edge_list(text: &str, cap: Weight) -> Result<EdgeList> {
    let mut out = EdgeList {
        header_n: None,
        header_directed: None,
        triples: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if out.triples.is_empty() && (line.contains("n=") || line.contains("directed=")) {
                let (n, d) = parse_header(line, lineno)?;
                out.header_n = n.or(out.header_n);
                out.header_directed = d.or(out.header_directed);
            }
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected \"u v w\", found {} fields", toks.len()),
            });
        }
        let num = |s: &str, what: &str| -> Result<u128> {
            s.parse::<u128>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad {what} {s:?}"),
            })
        };
        let u = num(toks[0], "vertex")? as usize;
        let v = num(toks[1], "vertex")? as usize;
        let w = num(toks[2], "weight")?;
        if w == 0 {
            return Err(Error::Parse {
                line: lineno,
                msg: "weight must be positive".into(),
            });
        }
        if w > cap {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("weight {w} exceeds cap {cap}"),
            });
        }
        if u == v {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("self-loop at vertex {u}"),
            });
        }
        out.triples.push((u, v, w));
    }
    Ok(out)
}

/// Parse an edge list. A header `directed=` flag overrides `directed`.
pub fn load_graph(text: &str, directed: bool) -> Result<LoadedGraph> {
    load_graph_with_cap(text, directed, DEFAULT_WEIGHT_CAP)
}

pub fn load_graph_with_cap(text: &str, directed: bool, cap: Weight) -> Result<LoadedGraph> {
    let list = parse_edge_list(text, cap)?;
    let max_id = list
        .triples
        .iter()
        .map(|&(u, v, _)| u.max(v) + 1)
        .max()
        .unwrap_or(0);
    let n = match list.header_n {
        Some(n) if n < max_id => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header n={n} but vertex {} appears", max_id - 1),
            })
        }
        Some(n) => n,
        None => max_id,
    };
    let edges: Vec<Edge> = list
        .triples
        .iter()
        .enumerate()
        .map(|(i, &(u, v, w))| Edge::new(i, u, v, w))
        .collect();
    if list.header_directed.unwrap_or(directed) {
        Ok(LoadedGraph::Directed(DirectedGraph::new(n, edges)?))
    } else {
        Ok(LoadedGraph::Undirected(WeightedMultigraph::new(n, edges)?))
    }
}

pub fn load_undirected(text: &str) -> Result<WeightedMultigraph> {
    match load_graph(text, false)? {
        LoadedGraph::Undirected(g) => Ok(g),
        LoadedGraph::Directed(_) => Err(Error::Parse {
            line: 1,
            msg: "expected an undirected graph".into(),
        }),
    }
}

pub fn load_directed(text: &str) -> Result<DirectedGraph> {
    match load_graph(text, true)? {
        LoadedGraph::Directed(g) => Ok(g),
        LoadedGraph::Undirected(_) => Err(Error::Parse {
            line: 1,
            msg: "expected a directed graph".into(),
        }),
    }
}

fn write_edges(n: usize, directed: bool, edges: &[Edge]) -> String {
    let mut s = String::with_capacity(16 * edges.len() + 32);
    let _ = writeln!(s, "# n={n} directed={}", directed as u8);
    for e in edges {
        let _ = writeln!(s, "{} {} {}", e.u, e.v, e.w);
    }
    s
}

pub fn save_undirected(g: &WeightedMultigraph) -> String {
    write_edges(g.n, false, &g.edges)
}

pub fn save_directed(g: &DirectedGraph) -> String {
    write_edges(g.n, true, &g.edges)
}

pub fn save_graph(g: &LoadedGraph) -> String {
    match g {
        LoadedGraph::Undirected(g) => save_undirected(g),
        LoadedGraph::Directed(g) => save_directed(g),
    }
}

pub fn save_graph_to(g: &LoadedGraph, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, save_graph(g)).map_err(|e| Error::Io(e.to_string()))
}
