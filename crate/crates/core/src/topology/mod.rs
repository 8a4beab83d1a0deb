//! Clique construction, inter-clique wiring, baseline graphs and graph
//! analysis.

mod baseline;
mod cliques;
mod graph;
mod inter;

pub use baseline::{full as baseline_full, grid as baseline_grid, random_regular as baseline_random_regular};
pub use baseline::{ring as baseline_ring, MAX_REGENERATIONS};
pub use cliques::{
    greedy_single_class, greedy_swap, greedy_swap_traced, skew, total_skew, CliqueAssignment, GreedySwapRun,
    SkewValue, MAX_SKEW, SWAP_IMPROVEMENT_EPSILON,
};
pub use graph::{EdgeTag, GraphStats, Topology};
pub use inter::{
    dcliques, inter_fractal, inter_fully, inter_ring, inter_smallworld, intra_edges, remove_intra_edges,
    InterScheme,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("node {node} is outside 0..{nodes}")]
    NodeOutOfRange { node: usize, nodes: usize },
    #[error("clique is empty")]
    EmptyClique,
    #[error("invalid clique assignment: {0}")]
    InvalidAssignment(String),
    #[error("classes are not equally represented across nodes: {0:?}")]
    UnequalClassRepresentation(Vec<usize>),
    #[error("clique {clique} has {available} intra-clique edges, cannot remove {requested}")]
    NotEnoughIntraEdges { clique: usize, available: usize, requested: usize },
    #[error("no simple {degree}-regular graph on {n} nodes")]
    InfeasibleDegree { n: usize, degree: usize },
    #[error("graph generation failed: {0}")]
    GenerationFailed(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed topology file: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, TopologyError>;
