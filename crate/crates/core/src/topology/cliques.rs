use std::fmt;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::{Result, TopologyError};
use crate::data::LabelDistribution;
use crate::seed::rng_from_seed;

/// Largest possible skew: the L1 distance between two probability vectors.
pub const MAX_SKEW: f64 = 2.0;

/// A swap must lower the pair's skew by more than this to count as a strict
/// improvement; smaller differences are floating-point noise from swapping
/// nodes with identical distributions.
pub const SWAP_IMPROVEMENT_EPSILON: f64 = 1e-12;

/// L1 distance between a clique's mean label distribution and the global one.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SkewValue(f64);

impl SkewValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for SkewValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.0)
    }
}

/// Disjoint cover of `0..n` by cliques of at most `max_size` nodes. Members
/// of each clique are kept in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueAssignment {
    cliques: Vec<Vec<usize>>,
    clique_of: Vec<usize>,
    max_size: usize,
}

impl CliqueAssignment {
    pub fn new(mut cliques: Vec<Vec<usize>>, n: usize, max_size: usize) -> Result<Self> {
        if max_size == 0 {
            return Err(TopologyError::InvalidArgument("maximum clique size must be positive".into()));
        }
        let mut clique_of = vec![usize::MAX; n];
        for (c, members) in cliques.iter_mut().enumerate() {
            if members.is_empty() {
                return Err(TopologyError::InvalidAssignment(format!("clique {c} is empty")));
            }
            if members.len() > max_size {
                return Err(TopologyError::InvalidAssignment(format!(
                    "clique {c} has {} members, more than {max_size}",
                    members.len()
                )));
            }
            members.sort_unstable();
            for &v in members.iter() {
                if v >= n {
                    return Err(TopologyError::NodeOutOfRange { node: v, nodes: n });
                }
                if clique_of[v] != usize::MAX {
                    return Err(TopologyError::InvalidAssignment(format!("node {v} is in two cliques")));
                }
                clique_of[v] = c;
            }
        }
        if let Some(v) = clique_of.iter().position(|&c| c == usize::MAX) {
            return Err(TopologyError::InvalidAssignment(format!("node {v} is in no clique")));
        }
        Ok(Self { cliques, clique_of, max_size })
    }

    /// Every node alone in its own clique.
    pub fn singletons(n: usize) -> Self {
        Self { cliques: (0..n).map(|v| vec![v]).collect(), clique_of: (0..n).collect(), max_size: 1 }
    }

    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn clique(&self, c: usize) -> &[usize] {
        &self.cliques[c]
    }

    pub fn num_cliques(&self) -> usize {
        self.cliques.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.clique_of.len()
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    /// Index of the clique holding `node`.
    pub fn clique_of(&self, node: usize) -> usize {
        self.clique_of[node]
    }

    /// One line per clique, space-separated node ids.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for members in &self.cliques {
            let line: Vec<String> = members.iter().map(usize::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses [`CliqueAssignment::to_text`] output; `n` is the total member count.
    pub fn from_text(text: &str, max_size: usize) -> Result<Self> {
        let cliques = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                line.split_whitespace()
                    .map(|tok| tok.parse::<usize>().map_err(|_| TopologyError::Parse(format!("bad node id {tok:?}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let n = cliques.iter().map(Vec::len).sum();
        Self::new(cliques, n, max_size)
    }

    fn replace(&mut self, c: usize, out: usize, incoming: usize) {
        let members = &mut self.cliques[c];
        let pos = members.iter().position(|&v| v == out).expect("swapped node belongs to its clique");
        members[pos] = incoming;
        members.sort_unstable();
        self.clique_of[incoming] = c;
    }
}

fn skew_of_members<'a, I>(members: I, size: usize, node_dists: &[LabelDistribution], global: &LabelDistribution) -> f64
where
    I: IntoIterator<Item = &'a usize>,
{
    let mut sum = vec![0.0; global.num_classes()];
    for &v in members {
        for (s, p) in sum.iter_mut().zip(node_dists[v].probs()) {
            *s += p;
        }
    }
    let size = size as f64;
    sum.iter().zip(global.probs()).map(|(s, g)| (s / size - g).abs()).sum()
}

/// Skew of a clique: `sum_l |p_C(l) - p(l)|` with `p_C` the unweighted mean of
/// the members' distributions.
pub fn skew(clique: &[usize], node_dists: &[LabelDistribution], global: &LabelDistribution) -> Result<SkewValue> {
    if clique.is_empty() {
        return Err(TopologyError::EmptyClique);
    }
    let classes = global.num_classes();
    for &v in clique {
        let dist = node_dists.get(v).ok_or(TopologyError::NodeOutOfRange { node: v, nodes: node_dists.len() })?;
        if dist.num_classes() != classes {
            return Err(TopologyError::InvalidArgument(format!(
                "node {v} has {} classes, global distribution has {classes}",
                dist.num_classes()
            )));
        }
    }
    let mut sorted = clique.to_vec();
    sorted.sort_unstable();
    Ok(SkewValue(skew_of_members(&sorted, sorted.len(), node_dists, global)))
}

/// Total skew over all cliques of an assignment.
pub fn total_skew(assignment: &CliqueAssignment, node_dists: &[LabelDistribution], global: &LabelDistribution) -> f64 {
    assignment
        .cliques()
        .iter()
        .map(|c| skew_of_members(c, c.len(), node_dists, global))
        .sum()
}

/// Outcome of [`greedy_swap_traced`].
#[derive(Debug, Clone)]
pub struct GreedySwapRun {
    pub assignment: CliqueAssignment,
    /// Total skew after initialization and after each of the `K` steps.
    pub total_skew: Vec<f64>,
    pub swaps_applied: usize,
}

/// Builds cliques of at most `max_size` nodes: random initial cliques, then
/// `steps` randomized greedy swaps between two random cliques.
///
/// With `steps = 0` this returns the random initialization.
pub fn greedy_swap(node_dists: &[LabelDistribution], max_size: usize, steps: usize, seed: u64) -> Result<CliqueAssignment> {
    greedy_swap_traced(node_dists, max_size, steps, seed).map(|run| run.assignment)
}

/// [`greedy_swap`] that also records the total skew after every step.
pub fn greedy_swap_traced(
    node_dists: &[LabelDistribution],
    max_size: usize,
    steps: usize,
    seed: u64,
) -> Result<GreedySwapRun> {
    if node_dists.is_empty() {
        return Err(TopologyError::InvalidArgument("no nodes to group".into()));
    }
    if max_size == 0 {
        return Err(TopologyError::InvalidArgument("maximum clique size must be positive".into()));
    }
    let global = LabelDistribution::mean(node_dists).map_err(|e| TopologyError::InvalidArgument(e.to_string()))?;
    let n = node_dists.len();
    let mut rng = rng_from_seed(seed);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let initial: Vec<Vec<usize>> = order.chunks(max_size).map(<[usize]>::to_vec).collect();
    let mut assignment = CliqueAssignment::new(initial, n, max_size)?;

    let mut skews: Vec<f64> = assignment
        .cliques()
        .iter()
        .map(|c| skew_of_members(c, c.len(), node_dists, &global))
        .collect();
    let mut total_skew = Vec::with_capacity(steps + 1);
    total_skew.push(skews.iter().sum());
    let mut swaps_applied = 0;

    let mut candidate = Vec::with_capacity(max_size);
    let mut improving: Vec<(usize, usize, f64, f64)> = Vec::new();
    for _ in 0..steps {
        if assignment.num_cliques() >= 2 {
            let picked = index::sample(&mut rng, assignment.num_cliques(), 2);
            let (c1, c2) = (picked.index(0), picked.index(1));
            let current = skews[c1] + skews[c2];
            improving.clear();
            for &i in assignment.clique(c1) {
                for &j in assignment.clique(c2) {
                    let s1 = swapped_skew(assignment.clique(c1), i, j, &mut candidate, node_dists, &global);
                    let s2 = swapped_skew(assignment.clique(c2), j, i, &mut candidate, node_dists, &global);
                    if s1 + s2 < current - SWAP_IMPROVEMENT_EPSILON {
                        improving.push((i, j, s1, s2));
                    }
                }
            }
            if !improving.is_empty() {
                let (i, j, s1, s2) = improving[rng.random_range(0..improving.len())];
                assignment.replace(c1, i, j);
                assignment.replace(c2, j, i);
                skews[c1] = s1;
                skews[c2] = s2;
                swaps_applied += 1;
            }
        }
        total_skew.push(skews.iter().sum());
    }
    Ok(GreedySwapRun { assignment, total_skew, swaps_applied })
}

fn swapped_skew(
    members: &[usize],
    out: usize,
    incoming: usize,
    buf: &mut Vec<usize>,
    node_dists: &[LabelDistribution],
    global: &LabelDistribution,
) -> f64 {
    buf.clear();
    buf.extend(members.iter().map(|&v| if v == out { incoming } else { v }));
    buf.sort_unstable();
    skew_of_members(buf.iter(), buf.len(), node_dists, global)
}

/// Sequential construction for single-class nodes: fill a clique with nodes
/// whose class is not yet present until every class is covered.
///
/// Requires every class to be held by the same number of nodes.
pub fn greedy_single_class(node_classes: &[usize], num_classes: usize, seed: u64) -> Result<CliqueAssignment> {
    let n = node_classes.len();
    if num_classes == 0 || n == 0 {
        return Err(TopologyError::InvalidArgument("need at least one node and one class".into()));
    }
    let mut per_class = vec![0usize; num_classes];
    for (v, &class) in node_classes.iter().enumerate() {
        if class >= num_classes {
            return Err(TopologyError::InvalidArgument(format!("node {v} has class {class} outside 0..{num_classes}")));
        }
        per_class[class] += 1;
    }
    if per_class.iter().any(|&c| c != per_class[0]) || per_class[0] == 0 {
        return Err(TopologyError::UnequalClassRepresentation(per_class));
    }

    let mut remaining: Vec<usize> = (0..n).collect();
    remaining.shuffle(&mut rng_from_seed(seed));
    let mut cliques = Vec::with_capacity(n / num_classes);
    let mut current = Vec::with_capacity(num_classes);
    let mut present = vec![false; num_classes];
    while !remaining.is_empty() {
        let pos = remaining
            .iter()
            .position(|&v| !present[node_classes[v]])
            .expect("balanced classes always leave a missing class among remaining nodes");
        let v = remaining.remove(pos);
        present[node_classes[v]] = true;
        current.push(v);
        if current.len() == num_classes {
            cliques.push(std::mem::take(&mut current));
            present.iter_mut().for_each(|p| *p = false);
        }
    }
    CliqueAssignment::new(cliques, n, num_classes)
}
