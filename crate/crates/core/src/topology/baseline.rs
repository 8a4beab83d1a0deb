//! Reference topologies without cliques.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::{EdgeTag, Result, Topology, TopologyError};
use crate::seed::{derive_seed, rng_from_seed};

/// Regenerations allowed before giving up on a connected random regular graph.
pub const MAX_REGENERATIONS: u64 = 1000;

pub fn ring(n: usize) -> Result<Topology> {
    if n < 3 {
        return Err(TopologyError::InvalidArgument(format!("ring needs at least 3 nodes, got {n}")));
    }
    Topology::from_edges(n, (0..n).map(|i| (i, (i + 1) % n, EdgeTag::Baseline)))
}

/// `r x c` grid with `r = floor(sqrt(n))`, `c = ceil(n / r)`, filled row by
/// row (last row possibly partial), 4-neighborhood without wraparound.
pub fn grid(n: usize) -> Result<Topology> {
    if n == 0 {
        return Err(TopologyError::InvalidArgument("grid needs at least 1 node".into()));
    }
    let rows = n.isqrt();
    let cols = n.div_ceil(rows);
    let mut edges = Vec::new();
    for v in 0..n {
        if (v % cols) + 1 < cols && v + 1 < n {
            edges.push((v, v + 1, EdgeTag::Baseline));
        }
        if v + cols < n {
            edges.push((v, v + cols, EdgeTag::Baseline));
        }
    }
    Topology::from_edges(n, edges)
}

pub fn full(n: usize) -> Result<Topology> {
    if n < 2 {
        return Err(TopologyError::InvalidArgument(format!("fully-connected graph needs at least 2 nodes, got {n}")));
    }
    Topology::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, EdgeTag::Baseline))))
}

/// Connected `degree`-regular graph on `n` nodes from the pairing model.
///
/// Stubs are paired at random; pairs that would form a self-loop or a
/// multi-edge are rejected and their stubs re-paired, restarting the whole
/// pairing when no valid pair remains. A disconnected result is discarded and
/// regenerated from a fresh seed derived from `seed`.
pub fn random_regular(n: usize, degree: usize, seed: u64) -> Result<Topology> {
    if degree >= n || (n * degree) % 2 != 0 {
        return Err(TopologyError::InfeasibleDegree { n, degree });
    }
    for attempt in 0..MAX_REGENERATIONS {
        let mut rng = rng_from_seed(derive_seed(seed, "random-regular", attempt));
        let edges = loop {
            if let Some(edges) = try_pairing(n, degree, &mut rng) {
                break edges;
            }
        };
        let topology = Topology::from_edges(n, edges.into_iter().map(|(i, j)| (i, j, EdgeTag::Baseline)))?;
        if topology.is_connected() {
            return Ok(topology);
        }
    }
    Err(TopologyError::GenerationFailed(format!(
        "no connected {degree}-regular graph on {n} nodes after {MAX_REGENERATIONS} attempts"
    )))
}

fn try_pairing(n: usize, degree: usize, rng: &mut ChaCha8Rng) -> Option<BTreeSet<(usize, usize)>> {
    let mut edges = BTreeSet::new();
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
    while !stubs.is_empty() {
        stubs.shuffle(rng);
        let mut rejected: BTreeMap<usize, usize> = BTreeMap::new();
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a != b && edges.insert((a, b)) {
                continue;
            }
            *rejected.entry(a).or_default() += 1;
            *rejected.entry(b).or_default() += 1;
        }
        if !pairable(&edges, &rejected) {
            return None;
        }
        stubs = rejected.into_iter().flat_map(|(v, count)| std::iter::repeat_n(v, count)).collect();
    }
    Some(edges)
}

/// Whether some pair of leftover stubs could still form a new simple edge.
fn pairable(edges: &BTreeSet<(usize, usize)>, rejected: &BTreeMap<usize, usize>) -> bool {
    if rejected.is_empty() {
        return true;
    }
    let nodes: Vec<usize> = rejected.keys().copied().collect();
    nodes
        .iter()
        .enumerate()
        .any(|(k, &a)| nodes[k + 1..].iter().any(|&b| !edges.contains(&(a, b))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_baselines() {
        assert_eq!(ring(4).unwrap().edge_count(), 4);
        assert!(ring(2).is_err());
        let f = full(100).unwrap();
        assert_eq!(f.edge_count(), 4950);
        assert!(f.degrees().iter().all(|&d| d == 99));
        assert_eq!(ring(10).unwrap().stats().diameter, Some(5));
    }

    #[test]
    fn grid_shapes() {
        let g = grid(9).unwrap();
        assert_eq!(g.edge_count(), 12);
        assert_eq!(g.stats().diameter, Some(4));
        // 10 nodes: 3 rows of 4 columns, last row holds 2 nodes.
        let g = grid(10).unwrap();
        assert_eq!(g.edge_count(), 3 + 3 + 1 + 4 + 2);
        assert!(g.is_connected());
        assert_eq!(grid(1).unwrap().edge_count(), 0);
    }

    #[test]
    fn random_regular_degrees() {
        let g = random_regular(100, 10, 5).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 10));
        assert!(g.is_connected());
        assert_eq!(g, random_regular(100, 10, 5).unwrap());
        assert_eq!(random_regular(7, 3, 0).unwrap_err(), TopologyError::InfeasibleDegree { n: 7, degree: 3 });
        assert!(random_regular(5, 5, 0).is_err());
    }
}
