//! Doubly-stochastic mixing matrices.

use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::topology::Topology;

/// Row and column sums must be within this distance of 1.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-9;

/// Largest node count stored densely.
pub const DENSE_LIMIT: usize = 1024;

#[derive(Debug, Error, PartialEq)]
pub enum MixingError {
    #[error("matrix has {matrix} nodes but topology has {topology}")]
    DimensionMismatch { matrix: usize, topology: usize },
    #[error("dense buffer of length {len} is not {n}x{n}")]
    BadShape { n: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    /// Per-row nonzeros in ascending column order.
    Sparse(Vec<Vec<(usize, f64)>>),
}

/// `n x n` mixing weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    n: usize,
    storage: Storage,
}

/// A failed mixing-matrix condition.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Asymmetric { i: usize, j: usize, wij: f64, wji: f64 },
    RowSum { row: usize, sum: f64 },
    ColumnSum { column: usize, sum: f64 },
    /// Nonzero weight between two distinct nodes that share no edge.
    OffGraph { i: usize, j: usize, weight: f64 },
    Negative { i: usize, j: usize, weight: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Asymmetric { i, j, wij, wji } => write!(f, "W[{i}][{j}]={wij} differs from W[{j}][{i}]={wji}"),
            Violation::RowSum { row, sum } => write!(f, "row {row} sums to {sum}"),
            Violation::ColumnSum { column, sum } => write!(f, "column {column} sums to {sum}"),
            Violation::OffGraph { i, j, weight } => write!(f, "W[{i}][{j}]={weight} but {{{i}, {j}}} is not an edge"),
            Violation::Negative { i, j, weight } => write!(f, "W[{i}][{j}]={weight} is negative"),
        }
    }
}

impl MixingMatrix {
    /// Metropolis-Hastings weights: `1 / (max(deg i, deg j) + 1)` on edges,
    /// the remainder of each row on the diagonal.
    pub fn metropolis_hastings(topology: &Topology) -> Self {
        Self::metropolis_hastings_with(topology, topology.num_nodes() <= DENSE_LIMIT)
    }

    /// [`MixingMatrix::metropolis_hastings`] with an explicit storage choice.
    pub fn metropolis_hastings_with(topology: &Topology, dense: bool) -> Self {
        let n = topology.num_nodes();
        let degrees = topology.degrees();
        let mut rows: Vec<Vec<(usize, f64)>> = degrees.iter().map(|&d| Vec::with_capacity(d + 1)).collect();
        for (i, j, _) in topology.edges() {
            let w = 1.0 / (degrees[i].max(degrees[j]) + 1) as f64;
            rows[i].push((j, w));
            rows[j].push((i, w));
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_unstable_by_key(|&(j, _)| j);
            let neighbors = mh_denominators(row, degrees, i);
            let pos = row.partition_point(|&(j, _)| j < i);
            row.insert(pos, (i, self_weight(neighbors)));
        }
        let storage = if dense {
            let mut data = vec![0.0; n * n];
            for (i, row) in rows.iter().enumerate() {
                for &(j, w) in row {
                    data[i * n + j] = w;
                }
            }
            Storage::Dense(data)
        } else {
            Storage::Sparse(rows)
        };
        Self { n, storage }
    }

    /// Wraps a row-major `n x n` buffer without checking any invariant; use
    /// [`validate`] to inspect it.
    pub fn from_dense(n: usize, weights: Vec<f64>) -> Result<Self, MixingError> {
        if weights.len() != n * n {
            return Err(MixingError::BadShape { n, len: weights.len() });
        }
        Ok(Self { n, storage: Storage::Dense(weights) })
    }

    pub fn identity(n: usize) -> Self {
        Self { n, storage: Storage::Sparse((0..n).map(|i| vec![(i, 1.0)]).collect()) }
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(data) => data[i * self.n + j],
            Storage::Sparse(rows) => rows[i]
                .binary_search_by_key(&j, |&(c, _)| c)
                .map_or(0.0, |pos| rows[i][pos].1),
        }
    }

    /// Nonzero entries of row `i` in ascending column order.
    pub fn row(&self, i: usize) -> Vec<(usize, f64)> {
        match &self.storage {
            Storage::Dense(data) => data[i * self.n..(i + 1) * self.n]
                .iter()
                .enumerate()
                .filter(|(_, &w)| w != 0.0)
                .map(|(j, &w)| (j, w))
                .collect(),
            Storage::Sparse(rows) => rows[i].iter().copied().filter(|&(_, w)| w != 0.0).collect(),
        }
    }

    /// Number of nonzero entries.
    pub fn nonzeros(&self) -> usize {
        (0..self.n).map(|i| self.row(i).len()).sum()
    }

    /// `out_i = sum_j W[j][i] x_j` for every node, summing in ascending `j`.
    pub fn mix(&self, inputs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let columns = self.columns();
        columns.iter().map(|col| combine(col, inputs)).collect()
    }

    /// Nonzero entries of every column in ascending row order.
    pub fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut columns = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for (j, w) in self.row(i) {
                columns[j].push((i, w));
            }
        }
        columns
    }

    /// Coordinate-list text: one `i j w` line per nonzero entry.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            for (j, w) in self.row(i) {
                let _ = writeln!(out, "{i} {j} {w:e}");
            }
        }
        out
    }
}

fn mh_denominators<'a>(
    row: &'a [(usize, f64)],
    degrees: &'a [usize],
    i: usize,
) -> impl Iterator<Item = usize> + 'a {
    row.iter().map(move |&(j, _)| degrees[i].max(degrees[j]) + 1)
}

/// `1 - sum_k 1/d_k`, rounded once. The sum is carried in double-double
/// arithmetic, with each reciprocal's rounding error recovered by a fused
/// multiply-add, so e.g. a node of degree 9 next to one of degree 10 gets
/// exactly the double nearest to 12/110.
fn self_weight(denominators: impl Iterator<Item = usize>) -> f64 {
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for d in denominators {
        let d = d as f64;
        let w = 1.0 / d;
        let residual = (-d).mul_add(w, 1.0) / d;
        let (s, e) = two_sum(hi, w);
        hi = s;
        lo += e + residual;
    }
    let (s, e) = two_sum(1.0, -hi);
    s + (e - lo)
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `sum_k w_k x_{j_k}` accumulated in the given order.
pub(crate) fn combine(weights: &[(usize, f64)], inputs: &[Vec<f64>]) -> Vec<f64> {
    let dim = inputs.first().map_or(0, Vec::len);
    let mut out = vec![0.0; dim];
    for &(j, w) in weights {
        for (o, x) in out.iter_mut().zip(&inputs[j]) {
            *o += w * x;
        }
    }
    out
}

/// Checks every mixing-matrix invariant against `topology`. An empty list
/// means the matrix is symmetric, doubly stochastic, nonnegative and
/// supported on the topology's edges.
pub fn validate(matrix: &MixingMatrix, topology: &Topology) -> Result<Vec<Violation>, MixingError> {
    let n = matrix.num_nodes();
    if n != topology.num_nodes() {
        return Err(MixingError::DimensionMismatch { matrix: n, topology: topology.num_nodes() });
    }
    let mut violations = Vec::new();
    let mut column_sums = vec![0.0; n];
    for i in 0..n {
        let row = matrix.row(i);
        let mut sum = 0.0;
        for &(j, w) in &row {
            sum += w;
            column_sums[j] += w;
            if w < 0.0 {
                violations.push(Violation::Negative { i, j, weight: w });
            }
            if i < j {
                let wji = matrix.get(j, i);
                if w != wji {
                    violations.push(Violation::Asymmetric { i, j, wij: w, wji });
                }
                if !topology.has_edge(i, j) {
                    violations.push(Violation::OffGraph { i, j, weight: w });
                }
            } else if i > j {
                // Pairs with a zero upper entry are only visible from below.
                let wji = matrix.get(j, i);
                if wji == 0.0 {
                    violations.push(Violation::Asymmetric { i: j, j: i, wij: wji, wji: w });
                    if !topology.has_edge(i, j) {
                        violations.push(Violation::OffGraph { i, j, weight: w });
                    }
                }
            }
        }
        if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
            violations.push(Violation::RowSum { row: i, sum });
        }
    }
    for (column, &sum) in column_sums.iter().enumerate() {
        if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
            violations.push(Violation::ColumnSum { column, sum });
        }
    }
    Ok(violations)
}
