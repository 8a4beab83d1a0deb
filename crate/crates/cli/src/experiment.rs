//! Building datasets, partitions and topologies from a configuration, and
//! writing experiment artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use dcliques::data::{
    global_distribution, load_idx, node_distributions, partition_shards, partition_single_class, stratified_split,
    synthetic_dataset,
};
use dcliques::metrics::{cost_report, histogram_csv, skew_histogram, skew_stats};
use dcliques::mixing::{validate, MixingMatrix};
use dcliques::seed::{derive_seed, purpose};
use dcliques::topology::{
    baseline_full, baseline_grid, baseline_random_regular, baseline_ring, dcliques, greedy_single_class, greedy_swap,
    remove_intra_edges, GraphStats,
};
use dcliques::training::{checkpoint_text, scaled_batch_size, Simulation};
use dcliques::{CliqueAssignment, Dataset, Partition, SoftmaxRegression, Split, Topology};
use log::info;
use thiserror::Error;

use crate::config::{Construction, DatasetSpec, ExperimentConfig, PartitionSpec, TopologySpec};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("data: {0}")]
    Data(#[from] dcliques::data::DataError),
    #[error("topology: {0}")]
    Topology(#[from] dcliques::topology::TopologyError),
    #[error("mixing: {0}")]
    Mixing(#[from] dcliques::mixing::MixingError),
    #[error("metrics: {0}")]
    Metrics(#[from] dcliques::metrics::MetricsError),
    #[error("training: {0}")]
    Training(#[from] dcliques::training::TrainError),
    #[error("io: {path}: {message}")]
    Io { path: String, message: String },
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, RunError>;

pub struct RunOptions {
    pub dry_run: bool,
    pub deterministic: bool,
    pub threads: Option<usize>,
    /// Overrides the configured output directory.
    pub output: Option<PathBuf>,
}

pub fn load_data(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    match &cfg.dataset {
        DatasetSpec::Synthetic { classes, per_class, test_per_class, dim, separation } => {
            let train =
                synthetic_dataset(*classes, *per_class, *dim, *separation, derive_seed(cfg.seed, purpose::DATASET_TRAIN, 0))?;
            let test = synthetic_dataset(
                *classes,
                *test_per_class,
                *dim,
                *separation,
                derive_seed(cfg.seed, purpose::DATASET_TEST, 0),
            )?;
            let all: Vec<usize> = (0..test.len()).collect();
            Ok((train, test.subset(&all, Split::Test)))
        }
        DatasetSpec::Idx { train_images, train_labels, test_images, test_labels, validation } => {
            let train = load_idx(train_images, train_labels, Split::Train)?;
            let test = load_idx(test_images, test_labels, Split::Test)?;
            if *validation == 0 {
                return Ok((train, test));
            }
            // The validation examples are held out and never trained on.
            let (train, _) =
                stratified_split(&train, &train.class_counts(), *validation, derive_seed(cfg.seed, purpose::VALIDATION, 0))?;
            Ok((train, test))
        }
    }
}

pub fn build_partition(cfg: &ExperimentConfig, nodes: usize, train: &Dataset) -> Result<Partition> {
    let seed = derive_seed(cfg.seed, purpose::PARTITION, 0);
    Ok(match cfg.partition {
        PartitionSpec::Shards { per_node } => partition_shards(train.labels(), nodes, per_node, seed)?,
        PartitionSpec::SingleClass => partition_single_class(train.labels(), train.num_classes(), nodes, seed)?,
    })
}

pub fn build_topology(
    cfg: &ExperimentConfig,
    spec: TopologySpec,
    train: &Dataset,
    partition: &Partition,
) -> Result<(Topology, Option<CliqueAssignment>)> {
    let n = partition.num_nodes();
    let seed = cfg.seed;
    Ok(match spec {
        TopologySpec::DCliques { max_size, construction, inter, removed_intra } => {
            let assignment = match construction {
                Construction::GreedySwap { steps } => {
                    let dists = node_distributions(partition, train)?;
                    greedy_swap(&dists, max_size, steps, derive_seed(seed, purpose::SWAP, 0))?
                }
                Construction::SingleClass => {
                    let mut classes = Vec::with_capacity(n);
                    for i in 0..n {
                        match partition.node_classes(train.labels(), i).as_slice() {
                            [c] => classes.push(*c),
                            _ => {
                                return Err(RunError::Config(format!(
                                    "single-class construction needs one class per node, node {i} has several"
                                )))
                            }
                        }
                    }
                    greedy_single_class(&classes, train.num_classes(), derive_seed(seed, purpose::CLIQUE_INIT, 0))?
                }
            };
            let mut t = dcliques(&assignment, inter);
            if removed_intra > 0 {
                t = remove_intra_edges(&t, &assignment, removed_intra, derive_seed(seed, purpose::EDGE_REMOVAL, 0))?;
            }
            (t, Some(assignment))
        }
        TopologySpec::Ring => (baseline_ring(n)?, None),
        TopologySpec::Grid => (baseline_grid(n)?, None),
        TopologySpec::Full => (baseline_full(n)?, None),
        TopologySpec::Random { degree } => {
            (baseline_random_regular(n, degree, derive_seed(seed, purpose::TOPOLOGY, 0))?, None)
        }
    })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| RunError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn stats_line(stats: &GraphStats) -> String {
    format!(
        "nodes={} edges={} average_degree={:.3} connected={} diameter={}",
        stats.nodes,
        stats.edge_count,
        stats.average_degree,
        stats.connected,
        stats.diameter.map_or_else(|| "inf".to_string(), |d| d.to_string())
    )
}

/// Builds everything, validates the mixing matrix, trains unless `dry_run`
/// and writes the artifacts. Returns the output directory.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<PathBuf> {
    let dir = opts.output.clone().unwrap_or_else(|| cfg.output.clone());
    fs::create_dir_all(&dir).map_err(|e| RunError::Io { path: dir.display().to_string(), message: e.to_string() })?;

    let (train, test) = load_data(cfg)?;
    info!("loaded {} training and {} test examples", train.len(), test.len());
    let partition = build_partition(cfg, cfg.nodes, &train)?;
    let (topology, cliques) = build_topology(cfg, cfg.topology, &train, &partition)?;
    let mixing = MixingMatrix::metropolis_hastings(&topology);
    let violations = validate(&mixing, &topology)?;
    if let Some(v) = violations.first() {
        return Err(RunError::Config(format!("mixing matrix has {} violations, first: {v:?}", violations.len())));
    }
    let stats = topology.stats();
    info!("{}", stats_line(&stats));

    let mut training = cfg.training.clone();
    if let Some(base) = cfg.batch_base_nodes {
        training.batch_size = scaled_batch_size(training.batch_size, base, cfg.nodes);
    }
    if let Some(threads) = opts.threads {
        training.threads = threads;
    }
    let cost = cost_report(&topology, training.clique_averaging);

    write(&dir, "topology.txt", &topology.to_edge_list())?;
    write(&dir, "topology.dot", &topology.to_dot())?;
    write(&dir, "cost.csv", &cost.to_csv())?;
    write(&dir, "mixing.txt", &mixing.to_coordinate_text())?;
    write(&dir, "partition.txt", &partition.to_text())?;

    let mut summary = String::new();
    if !opts.deterministic {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let _ = writeln!(summary, "timestamp={now}");
    }
    let _ = writeln!(summary, "seed={}", cfg.seed);
    let _ = writeln!(summary, "topology={}", cfg.topology.describe());
    let _ = writeln!(summary, "{}", stats_line(&stats));
    let _ = writeln!(summary, "messages_per_node={}", cost.messages_per_node);

    if let Some(assignment) = &cliques {
        write(&dir, "cliques.txt", &assignment.to_text())?;
        let dists = node_distributions(&partition, &train)?;
        let global = global_distribution(&partition, &train)?;
        let skew = skew_stats(assignment, &dists, &global)?;
        write(&dir, "skew.csv", &skew.to_csv())?;
        write(&dir, "skew_hist.csv", &histogram_csv(&skew_histogram(&skew.per_clique)))?;
        let _ = writeln!(summary, "cliques={} skew_mean={} skew_max={}", assignment.num_cliques(), skew.mean, skew.max);
    }

    if !opts.dry_run {
        let model = SoftmaxRegression::for_dataset(&train);
        let mut sim = Simulation::new(&model, &train, &partition, &topology, &mixing, training.clone(), cfg.seed)?;
        if let Some(assignment) = &cliques {
            sim = sim.with_cliques(assignment, &topology)?;
        } else if training.clique_averaging {
            return Err(RunError::Config("clique averaging requires a clique topology".into()));
        }
        let trace = sim.run(&test)?;
        write(&dir, "trace_nodes.csv", &trace.nodes_csv())?;
        write(&dir, "trace_summary.csv", &trace.summary_csv())?;
        write(&dir, "checkpoint.txt", &checkpoint_text(sim.states()))?;
        if let Some(last) = trace.last() {
            let _ = writeln!(
                summary,
                "final_epoch={} accuracy_min={} accuracy_mean={} accuracy_max={}",
                last.epoch, last.min, last.mean, last.max
            );
        }
    }
    write(&dir, "summary.txt", &summary)?;
    Ok(dir)
}

/// One row of a topology sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub nodes: usize,
    pub topology: String,
    pub stats: GraphStats,
    pub inter_edges: usize,
}

/// Builds the topology for every `(nodes, inter)` combination of the sweep
/// (the configured values when a sweep key is absent).
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let (train, _) = load_data(cfg)?;
    let nodes = if cfg.sweep_nodes.is_empty() { vec![cfg.nodes] } else { cfg.sweep_nodes.clone() };
    let specs: Vec<TopologySpec> = if cfg.sweep_inter.is_empty() {
        vec![cfg.topology]
    } else {
        cfg.sweep_inter.iter().map(|&s| cfg.topology.with_inter(s)).collect()
    };
    let mut rows = Vec::new();
    for &n in &nodes {
        let partition = build_partition(cfg, n, &train)?;
        for &spec in &specs {
            let (t, _) = build_topology(cfg, spec, &train, &partition)?;
            info!("n={n} {}: {}", spec.describe(), stats_line(&t.stats()));
            rows.push(SweepRow {
                nodes: n,
                topology: spec.describe(),
                stats: t.stats(),
                inter_edges: t.edge_count_by_tag(dcliques::EdgeTag::Inter),
            });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("nodes,topology,edges,inter_edges,average_degree,connected,diameter\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.nodes,
            r.topology,
            r.stats.edge_count,
            r.inter_edges,
            r.stats.average_degree,
            r.stats.connected,
            r.stats.diameter.map_or_else(String::new, |d| d.to_string())
        );
    }
    out
}

/// Runs the sweep and writes `topo_sweep.csv` into the output directory.
pub fn topo(cfg: &ExperimentConfig, output: Option<PathBuf>) -> Result<(PathBuf, Vec<SweepRow>)> {
    let dir = output.unwrap_or_else(|| cfg.output.clone());
    fs::create_dir_all(&dir).map_err(|e| RunError::Io { path: dir.display().to_string(), message: e.to_string() })?;
    let rows = sweep(cfg)?;
    write(&dir, "topo_sweep.csv", &sweep_csv(&rows))?;
    Ok((dir, rows))
}
