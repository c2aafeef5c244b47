//! Combinatorial machinery for embedding low-bandwidth guest graphs into dense
//! hosts: arrangeability and bandwidth certificates, balanced interval
//! colourings, backbone grid graphs, guest/host partitioning against a reduced
//! graph, regularity checks, a randomized blow-up embedder, and end-to-end
//! pipelines (including a two-colour Ramsey variant).
//!
//! Vertices are `0..n-1` everywhere, including file formats and JSON reports;
//! grid cells and cycle positions are 1-based where a field says so. All
//! randomness flows from caller-supplied seeds.

pub mod error;
pub mod graph;
pub mod structure;
pub mod colouring;
pub mod backbone;
pub mod partition_h;
pub mod regularity;
pub mod embedder;
pub mod pipeline;

pub use error::{Error, Result};
pub use graph::Graph;
