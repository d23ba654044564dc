//! Graph sparsification built on short cycle decompositions.
//!
//! Modules follow the pipeline: graph types and linear algebra, expander
//! decomposition, cycle decompositions, resistance estimation, the
//! degree-preserving and Eulerian sparsifiers, spectral sketches, biclique
//! sketching with a Schur-complement squaring step, and weight reduction for
//! Eulerian graphs.

pub mod biclique;
pub mod cycles;
pub mod error;
pub mod expander;
pub mod generators;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod report;
pub mod resistance;
pub mod rng;
pub mod sketch;
pub mod sparsify;
pub mod validate;
pub mod weight_reduce;

pub use error::{Error, Result};
pub use graph::{DirectedGraph, Edge, Weight, WeightedMultigraph};
