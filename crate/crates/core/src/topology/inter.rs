use std::collections::BTreeSet;
use std::fmt;

use rand::seq::index;

use super::{CliqueAssignment, EdgeTag, Result, Topology, TopologyError};
use crate::seed::rng_from_seed;

/// Inter-clique wiring scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterScheme {
    Ring,
    Fractal,
    /// Small-world fingers with `ns` edges per set of cliques.
    SmallWorld { ns: usize },
    Fully,
}

impl InterScheme {
    pub const DEFAULT_NEIGHBORHOOD: usize = 2;

    pub fn name(self) -> &'static str {
        match self {
            InterScheme::Ring => "ring",
            InterScheme::Fractal => "fractal",
            InterScheme::SmallWorld { .. } => "smallworld",
            InterScheme::Fully => "fully",
        }
    }

    /// Inter-clique edges for `assignment` under this scheme.
    pub fn edges(self, assignment: &CliqueAssignment) -> Vec<(usize, usize)> {
        match self {
            InterScheme::Ring => inter_ring(assignment),
            InterScheme::Fractal => inter_fractal(assignment),
            InterScheme::SmallWorld { ns } => inter_smallworld(assignment, ns),
            InterScheme::Fully => inter_fully(assignment),
        }
    }
}

impl fmt::Display for InterScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterScheme::SmallWorld { ns } => write!(f, "smallworld({ns})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Inter-clique edge set under construction. Endpoints are picked by the
/// least-edges rule: the member with the fewest edges in this set, lowest
/// node id on ties.
struct InterEdges {
    degree: Vec<usize>,
    edges: BTreeSet<(usize, usize)>,
}

impl InterEdges {
    fn new(n: usize) -> Self {
        Self { degree: vec![0; n], edges: BTreeSet::new() }
    }

    fn least_edges<'a, I>(&self, nodes: I) -> usize
    where
        I: IntoIterator<Item = &'a usize>,
    {
        nodes
            .into_iter()
            .copied()
            .min_by_key(|&v| (self.degree[v], v))
            .expect("cliques are never empty")
    }

    /// Connects the least-edges nodes of `a` and `b`. Returns false if the
    /// edge was already present.
    fn connect(&mut self, a: &[usize], b: &[usize]) -> bool {
        let u = self.least_edges(a);
        let v = self.least_edges(b);
        let key = (u.min(v), u.max(v));
        if self.edges.insert(key) {
            self.degree[u] += 1;
            self.degree[v] += 1;
            true
        } else {
            false
        }
    }

    fn into_edges(self) -> Vec<(usize, usize)> {
        self.edges.into_iter().collect()
    }
}

/// Complete graph over every clique.
pub fn intra_edges(assignment: &CliqueAssignment) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for members in assignment.cliques() {
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[k + 1..] {
                edges.push((i, j));
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// Cliques on a ring in list order, one edge between consecutive cliques.
pub fn inter_ring(assignment: &CliqueAssignment) -> Vec<(usize, usize)> {
    let k = assignment.num_cliques();
    let mut inter = InterEdges::new(assignment.num_nodes());
    match k {
        0 | 1 => {}
        2 => {
            inter.connect(assignment.clique(0), assignment.clique(1));
        }
        _ => {
            for c in 0..k {
                inter.connect(assignment.clique(c), assignment.clique((c + 1) % k));
            }
        }
    }
    inter.into_edges()
}

/// Hierarchical grouping: consecutive groups of `M` cliques are connected with
/// one edge per clique pair; groups of `M` groups are then connected with one
/// edge per group pair, and so on until a single group remains. A trailing
/// partial group is wired like a full one.
pub fn inter_fractal(assignment: &CliqueAssignment) -> Vec<(usize, usize)> {
    let fan_out = assignment.max_size().max(2);
    let mut inter = InterEdges::new(assignment.num_nodes());
    let mut units: Vec<Vec<usize>> = assignment.cliques().to_vec();
    while units.len() > 1 {
        let mut next = Vec::with_capacity(units.len().div_ceil(fan_out));
        for group in units.chunks(fan_out) {
            for a in 0..group.len() {
                for b in a + 1..group.len() {
                    inter.connect(&group[a], &group[b]);
                }
            }
            next.push(group.concat());
        }
        units = next;
    }
    inter.into_edges()
}

/// Small-world fingers on a ring of cliques: for every clique `i`, offset
/// `2^x` with `x` in `0..ceil(log2(#cliques))` and `k` in `0..ns`, connect
/// `i` to the cliques at `i + offset + k` and `i - offset - k` (mod
/// #cliques). Offset 1 with `k = 0` yields the ring itself; duplicate edges
/// collapse and a finger that wraps back onto `i` is skipped.
///
/// The exponent range is half-open. Two cliques still get offset 1.
pub fn inter_smallworld(assignment: &CliqueAssignment, ns: usize) -> Vec<(usize, usize)> {
    let k = assignment.num_cliques();
    let mut inter = InterEdges::new(assignment.num_nodes());
    if k < 2 {
        return inter.into_edges();
    }
    let exponents = ceil_log2(k);
    for i in 0..k {
        for x in 0..exponents {
            let offset = 1usize << x;
            for extra in 0..ns {
                let step = (offset + extra) % k;
                for target in [(i + step) % k, (i + k - step) % k] {
                    if target != i {
                        inter.connect(assignment.clique(i), assignment.clique(target));
                    }
                }
            }
        }
    }
    inter.into_edges()
}

fn ceil_log2(k: usize) -> u32 {
    if k <= 1 {
        0
    } else {
        usize::BITS - (k - 1).leading_zeros()
    }
}

/// One edge per unordered clique pair, spread over clique members.
pub fn inter_fully(assignment: &CliqueAssignment) -> Vec<(usize, usize)> {
    let k = assignment.num_cliques();
    let mut inter = InterEdges::new(assignment.num_nodes());
    for a in 0..k {
        for b in a + 1..k {
            inter.connect(assignment.clique(a), assignment.clique(b));
        }
    }
    inter.into_edges()
}

/// Intra-clique edges plus `scheme`'s inter-clique edges.
pub fn dcliques(assignment: &CliqueAssignment, scheme: InterScheme) -> Topology {
    let mut topology = Topology::new(assignment.num_nodes());
    topology
        .merge(&intra_edges(assignment), EdgeTag::Intra)
        .and_then(|_| topology.merge(&scheme.edges(assignment), EdgeTag::Inter))
        .expect("clique edges are simple and in range");
    topology
}

/// Removes `per_clique` intra-clique edges chosen uniformly at random within
/// every clique. Inter-clique edges are untouched.
pub fn remove_intra_edges(
    topology: &Topology,
    assignment: &CliqueAssignment,
    per_clique: usize,
    seed: u64,
) -> Result<Topology> {
    let mut out = topology.clone();
    if per_clique == 0 {
        return Ok(out);
    }
    let mut rng = rng_from_seed(seed);
    for (c, members) in assignment.cliques().iter().enumerate() {
        let mut present = Vec::new();
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[k + 1..] {
                if topology.edge_tag(i, j) == Some(EdgeTag::Intra) {
                    present.push((i, j));
                }
            }
        }
        if per_clique > present.len() {
            return Err(TopologyError::NotEnoughIntraEdges { clique: c, available: present.len(), requested: per_clique });
        }
        let mut picked: Vec<usize> = index::sample(&mut rng, present.len(), per_clique).into_vec();
        picked.sort_unstable();
        for p in picked {
            let (i, j) = present[p];
            out.remove_edge(i, j);
        }
    }
    Ok(out)
}
