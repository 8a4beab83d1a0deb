use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::fmt::Write as _;

use super::{Result, TopologyError};

/// Provenance of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeTag {
    Intra,
    Inter,
    Baseline,
}

impl EdgeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeTag::Intra => "intra",
            EdgeTag::Inter => "inter",
            EdgeTag::Baseline => "baseline",
        }
    }
}

impl fmt::Display for EdgeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EdgeTag {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intra" => Ok(EdgeTag::Intra),
            "inter" => Ok(EdgeTag::Inter),
            "baseline" => Ok(EdgeTag::Baseline),
            other => Err(TopologyError::Parse(format!("unknown edge tag {other:?}"))),
        }
    }
}

/// Undirected simple graph over nodes `0..n`. Edges are stored as `(i, j)`
/// with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    n: usize,
    edges: BTreeMap<(usize, usize), EdgeTag>,
    degrees: Vec<usize>,
}

/// Connectivity summary from [`Topology::stats`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphStats {
    pub nodes: usize,
    pub edge_count: usize,
    pub average_degree: f64,
    pub connected: bool,
    /// `None` when the graph is disconnected.
    pub diameter: Option<usize>,
}

fn normalize(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

impl Topology {
    pub fn new(n: usize) -> Self {
        Self { n, edges: BTreeMap::new(), degrees: vec![0; n] }
    }

    /// Builds a topology, rejecting self-loops, duplicates and unknown nodes.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, EdgeTag)>,
    {
        let mut t = Self::new(n);
        for (i, j, tag) in edges {
            if !t.add_edge(i, j, tag)? {
                return Err(TopologyError::DuplicateEdge(i.min(j), i.max(j)));
            }
        }
        Ok(t)
    }

    /// Adds `{i, j}`. Returns `false` (and keeps the existing tag) if the
    /// edge is already present.
    pub fn add_edge(&mut self, i: usize, j: usize, tag: EdgeTag) -> Result<bool> {
        if i == j {
            return Err(TopologyError::SelfLoop(i));
        }
        let bound = i.max(j);
        if bound >= self.n {
            return Err(TopologyError::NodeOutOfRange { node: bound, nodes: self.n });
        }
        let key = normalize(i, j);
        if self.edges.contains_key(&key) {
            return Ok(false);
        }
        self.edges.insert(key, tag);
        self.degrees[i] += 1;
        self.degrees[j] += 1;
        Ok(true)
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) -> Option<EdgeTag> {
        let tag = self.edges.remove(&normalize(i, j))?;
        self.degrees[i] -= 1;
        self.degrees[j] -= 1;
        Some(tag)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains_key(&normalize(i, j))
    }

    pub fn edge_tag(&self, i: usize, j: usize) -> Option<EdgeTag> {
        self.edges.get(&normalize(i, j)).copied()
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_count_by_tag(&self, tag: EdgeTag) -> usize {
        self.edges.values().filter(|&&t| t == tag).count()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.degrees[node]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    /// Edges in ascending `(i, j)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, EdgeTag)> + '_ {
        self.edges.iter().map(|(&(i, j), &tag)| (i, j, tag))
    }

    /// `2 |E| / n`; zero for an empty node set.
    pub fn average_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (2 * self.edges.len()) as f64 / self.n as f64
        }
    }

    /// Sorted neighbor lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = self.degrees.iter().map(|&d| Vec::with_capacity(d)).collect();
        for &(i, j) in self.edges.keys() {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Adds `edges` with `tag`, skipping those already present.
    pub fn merge(&mut self, edges: &[(usize, usize)], tag: EdgeTag) -> Result<()> {
        for &(i, j) in edges {
            self.add_edge(i, j, tag)?;
        }
        Ok(())
    }

    /// BFS distances from `source`; `usize::MAX` marks unreachable nodes.
    pub fn bfs_distances(&self, adjacency: &[Vec<usize>], source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let adj = self.adjacency();
        self.bfs_distances(&adj, 0).iter().all(|&d| d != usize::MAX)
    }

    /// Exact statistics; the diameter runs one BFS per node.
    pub fn stats(&self) -> GraphStats {
        let adj = self.adjacency();
        let mut connected = true;
        let mut diameter = 0;
        for source in 0..self.n {
            let dist = self.bfs_distances(&adj, source);
            match dist.iter().copied().max() {
                Some(usize::MAX) => {
                    connected = false;
                    break;
                }
                Some(d) => diameter = diameter.max(d),
                None => {}
            }
        }
        GraphStats {
            nodes: self.n,
            edge_count: self.edges.len(),
            average_degree: self.average_degree(),
            connected,
            diameter: connected.then_some(diameter),
        }
    }

    /// Edge-list text: header `n=<n>`, then `<i> <j> <tag>` per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for (i, j, tag) in self.edges() {
            let _ = writeln!(out, "{i} {j} {tag}");
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| TopologyError::Parse("missing header".into()))?;
        let n = header
            .trim()
            .strip_prefix("n=")
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| TopologyError::Parse(format!("bad header {header:?}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [i, j, tag] = fields[..] else {
                return Err(TopologyError::Parse(format!("bad edge line {line:?}")));
            };
            let parse = |s: &str| s.parse::<usize>().map_err(|_| TopologyError::Parse(format!("bad node id {s:?}")));
            edges.push((parse(i)?, parse(j)?, tag.parse()?));
        }
        Self::from_edges(n, edges)
    }

    /// Graphviz rendering; inter-clique edges are drawn in red.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph topology {\n  node [shape=circle];\n");
        for v in 0..self.n {
            let _ = writeln!(out, "  {v};");
        }
        for (i, j, tag) in self.edges() {
            match tag {
                EdgeTag::Inter => {
                    let _ = writeln!(out, "  {i} -- {j} [color=red];");
                }
                _ => {
                    let _ = writeln!(out, "  {i} -- {j};");
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops_and_out_of_range() {
        let mut t = Topology::new(3);
        assert_eq!(t.add_edge(1, 1, EdgeTag::Baseline), Err(TopologyError::SelfLoop(1)));
        assert!(matches!(t.add_edge(0, 3, EdgeTag::Baseline), Err(TopologyError::NodeOutOfRange { .. })));
        assert!(t.add_edge(2, 0, EdgeTag::Baseline).unwrap());
        assert!(!t.add_edge(0, 2, EdgeTag::Intra).unwrap());
        assert_eq!(t.edge_tag(0, 2), Some(EdgeTag::Baseline));
        assert_eq!(t.degrees(), &[1, 0, 1]);
        assert!(Topology::from_edges(3, [(0, 1, EdgeTag::Intra), (1, 0, EdgeTag::Intra)]).is_err());
    }

    #[test]
    fn empty_graph_stats() {
        let s = Topology::new(2).stats();
        assert!(!s.connected);
        assert_eq!(s.diameter, None);
        assert_eq!(s.edge_count, 0);
        let s = Topology::new(1).stats();
        assert!(s.connected);
        assert_eq!(s.diameter, Some(0));
    }

    #[test]
    fn edge_list_round_trip() {
        let t = Topology::from_edges(4, [(0, 1, EdgeTag::Intra), (3, 1, EdgeTag::Inter), (2, 3, EdgeTag::Baseline)])
            .unwrap();
        let text = t.to_edge_list();
        assert_eq!(text, "n=4\n0 1 intra\n1 3 inter\n2 3 baseline\n");
        assert_eq!(Topology::from_edge_list(&text).unwrap(), t);
        assert!(Topology::from_edge_list("n=2\n0 0 intra\n").is_err());
        assert!(Topology::from_edge_list("n=2\n0 1 other\n").is_err());
        assert!(Topology::from_edge_list("nodes=2\n").is_err());
    }

    #[test]
    fn dot_marks_inter_edges() {
        let t = Topology::from_edges(2, [(0, 1, EdgeTag::Inter)]).unwrap();
        let dot = t.to_dot();
        assert!(dot.starts_with("graph topology {"));
        assert!(dot.contains("0 -- 1 [color=red];"));
    }
}
