//! Synchronous simulation of D-SGD rounds over a topology.
//!
//! A round has three barrier-separated phases:
//!
//! 1. every node draws its next mini-batch and computes a gradient at its
//!    pre-round parameters;
//! 2. every node forms its step direction (its own gradient, or the mean of
//!    its clique's gradients under Clique Averaging, optionally fed through a
//!    momentum buffer) and takes a half step;
//! 3. every node replaces its parameters with `sum_j W[j][i] * half_j`.
//!
//! All reductions run in ascending node order, so traces do not depend on the
//! number of worker threads.

use std::fmt::Write as _;

use log::warn;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::data::{Dataset, Partition};
use crate::metrics::{self, Trace, TraceRow};
use crate::mixing::{combine, MixingMatrix};
use crate::seed::{derive_rng, purpose};
use crate::topology::{CliqueAssignment, Topology};

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("empty mini-batch")]
    EmptyBatch,
    #[error("node {0} holds no training examples")]
    EmptyNode(usize),
    #[error("node {node} is in no clique")]
    NodeWithoutClique { node: usize },
    #[error("non-finite parameters on node {node} at round {round}")]
    Divergence { round: usize, node: usize },
    #[error("inconsistent dimensions: {0}")]
    Dimension(String),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
}

pub type Result<T> = std::result::Result<T, TrainError>;

/// A differentiable classifier over flat parameter vectors.
pub trait Model: Sync {
    fn num_params(&self) -> usize;

    fn init_params(&self) -> Vec<f64> {
        vec![0.0; self.num_params()]
    }

    /// Mean loss over `batch`.
    fn loss(&self, params: &[f64], data: &Dataset, batch: &[usize]) -> f64;

    /// Writes the mean gradient over `batch` into `grad`.
    fn gradient(&self, params: &[f64], data: &Dataset, batch: &[usize], grad: &mut [f64]);

    /// Predicted class for one feature row.
    fn predict(&self, params: &[f64], features: &[f32]) -> usize;
}

/// Multinomial logistic regression. Parameters are the `L x d` weight matrix
/// (row-major) followed by the `L` biases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SoftmaxRegression {
    dim: usize,
    num_classes: usize,
}

impl SoftmaxRegression {
    pub fn new(dim: usize, num_classes: usize) -> Self {
        Self { dim, num_classes }
    }

    pub fn for_dataset(data: &Dataset) -> Self {
        Self::new(data.dim(), data.num_classes())
    }

    fn logits(&self, params: &[f64], x: &[f32], out: &mut [f64]) {
        let bias = &params[self.num_classes * self.dim..];
        for (k, logit) in out.iter_mut().enumerate() {
            let w = &params[k * self.dim..(k + 1) * self.dim];
            *logit = bias[k] + w.iter().zip(x).map(|(w, &x)| w * f64::from(x)).sum::<f64>();
        }
    }

    /// In-place softmax; returns the log of the normalizer.
    fn softmax(z: &mut [f64]) -> f64 {
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in z.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in z.iter_mut() {
            *v /= sum;
        }
        max + sum.ln()
    }
}

impl Model for SoftmaxRegression {
    fn num_params(&self) -> usize {
        self.num_classes * (self.dim + 1)
    }

    fn loss(&self, params: &[f64], data: &Dataset, batch: &[usize]) -> f64 {
        let mut z = vec![0.0; self.num_classes];
        let mut total = 0.0;
        for &i in batch {
            self.logits(params, data.row(i), &mut z);
            let y = data.label(i);
            let zy = z[y];
            total += Self::softmax(&mut z) - zy;
        }
        total / batch.len() as f64
    }

    fn gradient(&self, params: &[f64], data: &Dataset, batch: &[usize], grad: &mut [f64]) {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut p = vec![0.0; self.num_classes];
        let bias_offset = self.num_classes * self.dim;
        for &i in batch {
            let x = data.row(i);
            self.logits(params, x, &mut p);
            Self::softmax(&mut p);
            p[data.label(i)] -= 1.0;
            for (k, &err) in p.iter().enumerate() {
                let row = &mut grad[k * self.dim..(k + 1) * self.dim];
                for (g, &x) in row.iter_mut().zip(x) {
                    *g += err * f64::from(x);
                }
                grad[bias_offset + k] += err;
            }
        }
        let scale = batch.len() as f64;
        grad.iter_mut().for_each(|g| *g /= scale);
    }

    /// Highest logit, lowest class id on ties.
    fn predict(&self, params: &[f64], features: &[f32]) -> usize {
        let mut z = vec![0.0; self.num_classes];
        self.logits(params, features, &mut z);
        let mut best = 0;
        for k in 1..z.len() {
            if z[k] > z[best] {
                best = k;
            }
        }
        best
    }
}

/// Mean gradient of `model` over `batch`.
pub fn local_gradient<M: Model + ?Sized>(model: &M, params: &[f64], data: &Dataset, batch: &[usize]) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    if params.len() != model.num_params() {
        return Err(TrainError::Dimension(format!(
            "{} parameters for a model of {}",
            params.len(),
            model.num_params()
        )));
    }
    let mut grad = vec![0.0; params.len()];
    model.gradient(params, data, batch, &mut grad);
    Ok(grad)
}

/// `round(base_batch * base_nodes / nodes)`, at least 1: keeps the number of
/// updates per epoch constant as the network grows.
pub fn scaled_batch_size(base_batch: usize, base_nodes: usize, nodes: usize) -> usize {
    ((base_batch as f64 * base_nodes as f64 / nodes as f64).round() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Momentum coefficient in `[0, 1)`; zero disables the buffer.
    pub momentum: f64,
    pub clique_averaging: bool,
    /// Training budget in epochs.
    pub epochs: usize,
    /// Evaluate every this many epochs.
    pub eval_every: usize,
    /// Evaluate on at most this many evenly spaced test examples (`None` for
    /// all).
    pub eval_examples: Option<usize>,
    /// Worker threads; 0 lets rayon decide, 1 runs on the calling thread.
    pub threads: usize,
    /// Measure mean preservation of the averaging step every round.
    pub check_invariants: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            batch_size: 128,
            momentum: 0.0,
            clique_averaging: false,
            epochs: 100,
            eval_every: 1,
            eval_examples: None,
            threads: 1,
            check_invariants: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(TrainError::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(TrainError::Config("batch size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(TrainError::Config(format!("momentum must be in [0, 1), got {}", self.momentum)));
        }
        if self.eval_every == 0 {
            return Err(TrainError::Config("evaluation cadence must be positive".into()));
        }
        if self.momentum > 0.0 && !self.clique_averaging {
            warn!("momentum without Clique Averaging is known to hurt convergence under label skew");
        }
        Ok(())
    }
}

/// Per-node simulation state.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub params: Vec<f64>,
    pub momentum: Vec<f64>,
    rng: ChaCha8Rng,
    order: Vec<usize>,
    cursor: usize,
}

impl NodeState {
    pub fn new(params: Vec<f64>, local_examples: &[usize], rng: ChaCha8Rng) -> Self {
        let momentum = vec![0.0; params.len()];
        Self { params, momentum, rng, order: local_examples.to_vec(), cursor: local_examples.len() }
    }

    /// Next mini-batch from a per-epoch shuffle of the local examples. The
    /// last batch of a local epoch may be short.
    pub fn next_batch(&mut self, size: usize) -> Vec<usize> {
        if self.cursor >= self.order.len() {
            self.order.shuffle(&mut self.rng);
            self.cursor = 0;
        }
        let end = (self.cursor + size).min(self.order.len());
        let batch = self.order[self.cursor..end].to_vec();
        self.cursor = end;
        batch
    }
}

/// Gradient-sharing sets for Clique Averaging: node `i` averages over the
/// members of its clique that are still its graph neighbors, plus itself.
pub fn gradient_groups(assignment: &CliqueAssignment, topology: &Topology) -> Result<Vec<Vec<usize>>> {
    let n = topology.num_nodes();
    if assignment.num_nodes() != n {
        return Err(TrainError::Dimension(format!(
            "assignment covers {} nodes, topology has {n}",
            assignment.num_nodes()
        )));
    }
    Ok((0..n)
        .map(|i| {
            assignment
                .clique(assignment.clique_of(i))
                .iter()
                .copied()
                .filter(|&j| j == i || topology.has_edge(i, j))
                .collect()
        })
        .collect())
}

/// Summary of one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundReport {
    pub round: usize,
    /// Examples consumed by all nodes in this round.
    pub examples: usize,
    /// Directed messages sent by all nodes in this round.
    pub messages: usize,
    /// Relative mean-preservation error of the averaging step, when
    /// invariant checking is enabled.
    pub mean_error: Option<f64>,
}

/// In-memory network of nodes running D-SGD.
pub struct Simulation<'a, M: Model> {
    model: &'a M,
    train: &'a Dataset,
    columns: Vec<Vec<(usize, f64)>>,
    degrees: Vec<usize>,
    groups: Option<Vec<Vec<usize>>>,
    config: TrainConfig,
    states: Vec<NodeState>,
    round: usize,
    examples_seen: usize,
    train_total: usize,
    pool: Option<rayon::ThreadPool>,
}

impl<'a, M: Model> Simulation<'a, M> {
    /// All nodes start from `model.init_params()`; node `i` samples with the
    /// stream `derive_rng(seed, "batch", i)`.
    pub fn new(
        model: &'a M,
        train: &'a Dataset,
        partition: &Partition,
        topology: &Topology,
        mixing: &MixingMatrix,
        config: TrainConfig,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        let n = partition.num_nodes();
        if mixing.num_nodes() != n || topology.num_nodes() != n {
            return Err(TrainError::Dimension(format!(
                "partition has {n} nodes, topology {}, mixing matrix {}",
                topology.num_nodes(),
                mixing.num_nodes()
            )));
        }
        if let Some(node) = (0..n).find(|&i| partition.node(i).is_empty()) {
            return Err(TrainError::EmptyNode(node));
        }
        if let Some(&bad) = partition.nodes().iter().flatten().find(|&&i| i >= train.len()) {
            return Err(TrainError::Dimension(format!("example {bad} is outside the training set")));
        }
        let init = model.init_params();
        let states = (0..n)
            .map(|i| NodeState::new(init.clone(), partition.node(i), derive_rng(seed, purpose::BATCH, i as u64)))
            .collect();
        let pool = match config.threads {
            1 => None,
            threads => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| TrainError::Config(format!("cannot start worker threads: {e}")))?,
            ),
        };
        Ok(Self {
            model,
            train,
            columns: mixing.columns(),
            degrees: topology.degrees().to_vec(),
            groups: None,
            config,
            states,
            round: 0,
            examples_seen: 0,
            train_total: partition.total_examples(),
            pool,
        })
    }

    /// Enables Clique Averaging groups from `assignment` restricted to the
    /// edges of `topology`.
    pub fn with_cliques(mut self, assignment: &CliqueAssignment, topology: &Topology) -> Result<Self> {
        self.groups = Some(gradient_groups(assignment, topology)?);
        Ok(self)
    }

    pub fn states(&self) -> &[NodeState] {
        &self.states
    }

    pub fn states_mut(&mut self) -> &mut [NodeState] {
        &mut self.states
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn rounds(&self) -> usize {
        self.round
    }

    /// Epochs elapsed: examples consumed over the training-set size.
    pub fn epochs(&self) -> f64 {
        self.examples_seen as f64 / self.train_total as f64
    }

    /// One round of the configured algorithm.
    pub fn step(&mut self) -> Result<RoundReport> {
        if self.config.clique_averaging {
            self.clique_avg_round()
        } else {
            self.dsgd_round()
        }
    }

    /// Plain D-SGD round: each node steps along its own gradient.
    pub fn dsgd_round(&mut self) -> Result<RoundReport> {
        self.round_with(false)
    }

    /// D-SGD with Clique Averaging: each node steps along the mean gradient of
    /// its clique, while models are still averaged with all neighbors.
    pub fn clique_avg_round(&mut self) -> Result<RoundReport> {
        if self.groups.is_none() {
            return Err(TrainError::Config("Clique Averaging requires a clique assignment".into()));
        }
        self.round_with(true)
    }

    fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.pool {
            Some(pool) => pool.install(f),
            None => f(),
        }
    }

    fn round_with(&mut self, clique_averaging: bool) -> Result<RoundReport> {
        let round = self.round + 1;
        let model = self.model;
        let train = self.train;
        let batch_size = self.config.batch_size;
        let lr = self.config.learning_rate;
        let momentum = self.config.momentum;
        let parallel = self.pool.is_some();

        let mut states = std::mem::take(&mut self.states);
        let gradients: Vec<(Vec<f64>, usize)> = self.install(|| {
            let compute = |s: &mut NodeState| {
                let batch = s.next_batch(batch_size);
                let mut grad = vec![0.0; s.params.len()];
                model.gradient(&s.params, train, &batch, &mut grad);
                (grad, batch.len())
            };
            if parallel {
                states.par_iter_mut().map(compute).collect()
            } else {
                states.iter_mut().map(compute).collect()
            }
        });
        let examples: usize = gradients.iter().map(|(_, b)| b).sum();

        let groups = if clique_averaging { self.groups.as_deref() } else { None };
        let halves: Vec<Vec<f64>> = self.install(|| {
            let half_step = |(i, s): (usize, &mut NodeState)| {
                let direction = match groups {
                    Some(groups) => clique_mean(&groups[i], &gradients),
                    None => gradients[i].0.clone(),
                };
                let step = if momentum != 0.0 {
                    for (v, g) in s.momentum.iter_mut().zip(&direction) {
                        *v = momentum * *v + g;
                    }
                    &s.momentum
                } else {
                    &direction
                };
                s.params.iter().zip(step).map(|(p, d)| p - lr * d).collect::<Vec<f64>>()
            };
            if parallel {
                states.par_iter_mut().enumerate().map(half_step).collect()
            } else {
                states.iter_mut().enumerate().map(half_step).collect()
            }
        });
        self.states = states;

        if let Some(node) = halves.iter().position(|h| h.iter().any(|v| !v.is_finite())) {
            return Err(TrainError::Divergence { round, node });
        }

        let columns = &self.columns;
        let averaged: Vec<Vec<f64>> = self.install(|| {
            if parallel {
                columns.par_iter().map(|col| combine(col, &halves)).collect()
            } else {
                columns.iter().map(|col| combine(col, &halves)).collect()
            }
        });
        let mean_error = self.config.check_invariants.then(|| mean_preservation_error(&halves, &averaged));
        for (state, params) in self.states.iter_mut().zip(averaged) {
            state.params = params;
        }

        self.round = round;
        self.examples_seen += examples;
        let per_edge = if clique_averaging { 2 } else { 1 };
        let messages = self.degrees.iter().sum::<usize>() * per_edge;
        Ok(RoundReport { round, examples, messages, mean_error })
    }

    /// Test accuracy of every node.
    pub fn evaluate(&self, test: &Dataset) -> Result<Vec<f64>> {
        let model = self.model;
        let eval = |s: &NodeState| metrics::evaluate(model, &s.params, test);
        let results: Vec<_> = self.install(|| {
            if self.pool.is_some() {
                self.states.par_iter().map(eval).collect()
            } else {
                self.states.iter().map(eval).collect()
            }
        });
        results.into_iter().map(|r| r.map_err(TrainError::from)).collect()
    }

    /// Trains until the epoch budget is spent, evaluating at epoch 0, every
    /// `eval_every` epochs and at the end.
    pub fn run(&mut self, test: &Dataset) -> Result<Trace> {
        let test = match self.config.eval_examples {
            Some(limit) if limit < test.len() => {
                let indices: Vec<usize> = (0..limit).map(|k| k * test.len() / limit).collect();
                std::borrow::Cow::Owned(test.subset(&indices, test.split()))
            }
            _ => std::borrow::Cow::Borrowed(test),
        };
        let budget = self.config.epochs;
        let cadence = self.config.eval_every;
        let mut rows = vec![TraceRow::new(0.0, self.evaluate(&test)?)];
        let mut last_mark = 0;
        while self.epochs() < budget as f64 {
            self.step()?;
            let reached = (self.epochs().floor() as usize).min(budget);
            let mark = reached - reached % cadence;
            if mark > last_mark {
                rows.push(TraceRow::new(mark as f64, self.evaluate(&test)?));
                last_mark = mark;
            }
        }
        if last_mark < budget {
            rows.push(TraceRow::new(budget as f64, self.evaluate(&test)?));
        }
        Ok(Trace::new(rows))
    }
}

fn clique_mean(group: &[usize], gradients: &[(Vec<f64>, usize)]) -> Vec<f64> {
    let (first, rest) = group.split_first().expect("a node always belongs to its own group");
    let mut sum = gradients[*first].0.clone();
    if rest.is_empty() {
        return sum;
    }
    for &j in rest {
        for (s, g) in sum.iter_mut().zip(&gradients[j].0) {
            *s += g;
        }
    }
    let count = group.len() as f64;
    sum.iter_mut().for_each(|s| *s /= count);
    sum
}

/// `||mean(after) - mean(before)||_inf / max_i ||before_i||_inf`.
pub fn mean_preservation_error(before: &[Vec<f64>], after: &[Vec<f64>]) -> f64 {
    let n = before.len() as f64;
    let dim = before.first().map_or(0, Vec::len);
    let mut scale: f64 = 0.0;
    for v in before {
        for x in v {
            scale = scale.max(x.abs());
        }
    }
    if scale == 0.0 {
        scale = 1.0;
    }
    let mut worst: f64 = 0.0;
    for k in 0..dim {
        let mb: f64 = before.iter().map(|v| v[k]).sum::<f64>() / n;
        let ma: f64 = after.iter().map(|v| v[k]).sum::<f64>() / n;
        worst = worst.max((ma - mb).abs());
    }
    worst / scale
}

/// Everything an experiment needs besides the configuration.
pub struct ExperimentSetup<'a, M: Model> {
    pub model: &'a M,
    pub train: &'a Dataset,
    pub test: &'a Dataset,
    pub partition: &'a Partition,
    pub topology: &'a Topology,
    pub mixing: &'a MixingMatrix,
    pub cliques: Option<&'a CliqueAssignment>,
}

/// Builds a simulation from `setup` and runs it to the epoch budget.
pub fn run_experiment<M: Model>(setup: &ExperimentSetup<'_, M>, config: &TrainConfig, seed: u64) -> Result<Trace> {
    let mut sim = Simulation::new(
        setup.model,
        setup.train,
        setup.partition,
        setup.topology,
        setup.mixing,
        config.clone(),
        seed,
    )?;
    if let Some(cliques) = setup.cliques {
        sim = sim.with_cliques(cliques, setup.topology)?;
    } else if config.clique_averaging {
        return Err(TrainError::Config("Clique Averaging requires a clique assignment".into()));
    }
    sim.run(setup.test)
}

/// Plain-text checkpoint: one line of space-separated parameters per node.
pub fn checkpoint_text(states: &[NodeState]) -> String {
    let mut out = String::new();
    for s in states {
        let mut first = true;
        for p in &s.params {
            if !first {
                out.push(' ');
            }
            let _ = write!(out, "{p:e}");
            first = false;
        }
        out.push('\n');
    }
    out
}

pub fn parse_checkpoint(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .map(|line| {
            line.split_whitespace()
                .map(|tok| tok.parse::<f64>().map_err(|e| TrainError::Dimension(format!("bad parameter {tok:?}: {e}"))))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Split;
    use crate::seed::rng_from_seed;

    fn two_class() -> Dataset {
        // Symmetric features: class 0 at (+1, 0), class 1 at (-1, 0).
        Dataset::new(vec![1.0, 0.0, -1.0, 0.0], vec![0, 1], 2, 2, Split::Train).unwrap()
    }

    #[test]
    fn symmetric_bias_gradient() {
        let data = two_class();
        let model = SoftmaxRegression::for_dataset(&data);
        let g = local_gradient(&model, &model.init_params(), &data, &[0, 1]).unwrap();
        let (b0, b1) = (g[4], g[5]);
        assert_eq!(b0, -b1);
        assert_eq!(b0, 0.0);
        let g = local_gradient(&model, &model.init_params(), &data, &[0]).unwrap();
        assert!((g[4] + 0.5).abs() < 1e-15 && (g[5] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn saturated_gradient_vanishes() {
        let data = two_class();
        let model = SoftmaxRegression::for_dataset(&data);
        let mut params = model.init_params();
        params[4] = 40.0;
        let g = local_gradient(&model, &params, &data, &[0]).unwrap();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm < 1e-6);
    }

    #[test]
    fn empty_batch_is_an_error() {
        let data = two_class();
        let model = SoftmaxRegression::for_dataset(&data);
        assert_eq!(local_gradient(&model, &model.init_params(), &data, &[]), Err(TrainError::EmptyBatch));
    }

    #[test]
    fn prediction_ties_go_to_lowest_class() {
        let model = SoftmaxRegression::new(3, 4);
        assert_eq!(model.predict(&model.init_params(), &[1.0, 2.0, 3.0]), 0);
    }

    #[test]
    fn batches_cover_each_local_epoch() {
        let local: Vec<usize> = (10..20).collect();
        let mut s = NodeState::new(vec![0.0], &local, rng_from_seed(1));
        let mut seen: Vec<usize> = Vec::new();
        let sizes: Vec<usize> = (0..3)
            .map(|_| {
                let b = s.next_batch(4);
                seen.extend(&b);
                b.len()
            })
            .collect();
        assert_eq!(sizes, vec![4, 4, 2]);
        seen.sort_unstable();
        assert_eq!(seen, local);
        assert_eq!(s.next_batch(4).len(), 4);
    }

    #[test]
    fn batch_scaling() {
        assert_eq!(scaled_batch_size(128, 100, 100), 128);
        assert_eq!(scaled_batch_size(128, 100, 1000), 13);
        assert_eq!(scaled_batch_size(1, 100, 1000), 1);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig { momentum: 1.0, ..TrainConfig::default() };
        assert!(bad.validate().is_err());
        let bad = TrainConfig { learning_rate: 0.0, ..TrainConfig::default() };
        assert!(bad.validate().is_err());
        let ok = TrainConfig { momentum: 0.9, clique_averaging: false, ..TrainConfig::default() };
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn checkpoint_round_trip() {
        let s = NodeState::new(vec![0.5, -1.25e-7, 3.0], &[0], rng_from_seed(0));
        let text = checkpoint_text(&[s.clone(), s]);
        let parsed = parse_checkpoint(&text).unwrap();
        assert_eq!(parsed, vec![vec![0.5, -1.25e-7, 3.0]; 2]);
    }
}
