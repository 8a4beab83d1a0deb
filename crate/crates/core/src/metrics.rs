//! Accuracy, skew statistics and communication cost.

use std::fmt::Write as _;

use thiserror::Error;

use crate::data::{Dataset, LabelDistribution};
use crate::topology::{self, CliqueAssignment, Topology, MAX_SKEW};
use crate::training::Model;

/// Bins of the skew histogram over `[0, 2]`.
pub const SKEW_HISTOGRAM_BINS: usize = 40;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("cannot evaluate on an empty dataset")]
    EmptyDataset,
    #[error("model expects {expected} parameters, got {found}")]
    ParamMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Topology(#[from] topology::TopologyError),
}

/// Fraction of examples whose predicted class matches the label.
pub fn evaluate<M: Model + ?Sized>(model: &M, params: &[f64], data: &Dataset) -> Result<f64, MetricsError> {
    if data.is_empty() {
        return Err(MetricsError::EmptyDataset);
    }
    if params.len() != model.num_params() {
        return Err(MetricsError::ParamMismatch { expected: model.num_params(), found: params.len() });
    }
    let correct = (0..data.len()).filter(|&i| model.predict(params, data.row(i)) == data.label(i)).count();
    Ok(correct as f64 / data.len() as f64)
}

/// Per-node accuracies at one evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub epoch: f64,
    pub accuracies: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl TraceRow {
    pub fn new(epoch: f64, accuracies: Vec<f64>) -> Self {
        let min = accuracies.iter().copied().fold(f64::INFINITY, f64::min);
        let max = accuracies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
        Self { epoch, accuracies, min, max, mean }
    }

    /// Population variance of the node accuracies.
    pub fn variance(&self) -> f64 {
        let n = self.accuracies.len() as f64;
        self.accuracies.iter().map(|a| (a - self.mean).powi(2)).sum::<f64>() / n
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn new(rows: Vec<TraceRow>) -> Self {
        Self { rows }
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Row evaluated at exactly `epoch`, if any.
    pub fn at_epoch(&self, epoch: f64) -> Option<&TraceRow> {
        self.rows.iter().find(|r| r.epoch == epoch)
    }

    /// `epoch,node,accuracy` with one line per node and evaluation.
    pub fn nodes_csv(&self) -> String {
        let mut out = String::from("epoch,node,accuracy\n");
        for row in &self.rows {
            for (node, acc) in row.accuracies.iter().enumerate() {
                let _ = writeln!(out, "{},{node},{acc}", row.epoch);
            }
        }
        out
    }

    /// `epoch,min,max,mean` with one line per evaluation.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("epoch,min,max,mean\n");
        for row in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", row.epoch, row.min, row.max, row.mean);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkewStats {
    pub per_clique: Vec<f64>,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl SkewStats {
    /// `clique,skew` lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("clique,skew\n");
        for (c, s) in self.per_clique.iter().enumerate() {
            let _ = writeln!(out, "{c},{s}");
        }
        out
    }
}

pub fn skew_stats(
    assignment: &CliqueAssignment,
    node_dists: &[LabelDistribution],
    global: &LabelDistribution,
) -> Result<SkewStats, MetricsError> {
    let per_clique = assignment
        .cliques()
        .iter()
        .map(|c| topology::skew(c, node_dists, global).map(|s| s.value()))
        .collect::<Result<Vec<_>, _>>()?;
    let min = per_clique.iter().copied().fold(f64::INFINITY, f64::min);
    let max = per_clique.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = per_clique.iter().sum::<f64>() / per_clique.len() as f64;
    Ok(SkewStats { per_clique, mean, min, max })
}

/// Histogram bucket `[lo, hi)`; the last bucket also holds `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Skew histogram with [`SKEW_HISTOGRAM_BINS`] equal bins over `[0, 2]`.
pub fn skew_histogram(values: &[f64]) -> Vec<HistogramBin> {
    let width = MAX_SKEW / SKEW_HISTOGRAM_BINS as f64;
    let mut bins: Vec<HistogramBin> = (0..SKEW_HISTOGRAM_BINS)
        .map(|b| HistogramBin { lo: b as f64 * width, hi: (b + 1) as f64 * width, count: 0 })
        .collect();
    for &v in values {
        let b = ((v / width).floor().max(0.0) as usize).min(SKEW_HISTOGRAM_BINS - 1);
        bins[b].count += 1;
    }
    bins
}

pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from("bin_lo,bin_hi,count\n");
    for b in bins {
        let _ = writeln!(out, "{},{},{}", b.lo, b.hi, b.count);
    }
    out
}

/// Edge and message counts of a topology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostReport {
    pub nodes: usize,
    pub edges: usize,
    pub average_degree: f64,
    /// Directed sends per node per round: one model per neighbor, plus one
    /// gradient per neighbor under Clique Averaging.
    pub messages_per_node: f64,
}

impl CostReport {
    pub fn to_csv(&self) -> String {
        format!(
            "nodes,edges,average_degree,messages_per_node\n{},{},{},{}\n",
            self.nodes, self.edges, self.average_degree, self.messages_per_node
        )
    }
}

pub fn cost_report(topology: &Topology, clique_averaging: bool) -> CostReport {
    let average_degree = topology.average_degree();
    let factor = if clique_averaging { 2.0 } else { 1.0 };
    CostReport {
        nodes: topology.num_nodes(),
        edges: topology.edge_count(),
        average_degree,
        messages_per_node: average_degree * factor,
    }
}
