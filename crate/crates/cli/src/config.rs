//! Flat `key=value` experiment configuration with dotted section prefixes.
//!
//! ```text
//! # comment
//! seed=1
//! nodes=100
//! topology.kind=dcliques
//! topology.M=10
//! training.clique_averaging=true
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use dcliques::topology::InterScheme;
use dcliques::TrainConfig;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key {key:?} is set twice")]
    Duplicate { line: usize, key: String },
    #[error("missing required key {0:?}")]
    Missing(&'static str),
    #[error("key {key:?}: {message}")]
    Invalid { key: &'static str, message: String },
}

const KEYS: &[&str] = &[
    "seed",
    "output",
    "nodes",
    "dataset.kind",
    "dataset.classes",
    "dataset.per_class",
    "dataset.test_per_class",
    "dataset.dim",
    "dataset.separation",
    "dataset.train_images",
    "dataset.train_labels",
    "dataset.test_images",
    "dataset.test_labels",
    "dataset.validation",
    "partition.kind",
    "partition.shards_per_node",
    "topology.kind",
    "topology.M",
    "topology.K",
    "topology.construction",
    "topology.inter",
    "topology.ns",
    "topology.removed_intra",
    "topology.degree",
    "training.learning_rate",
    "training.batch_size",
    "training.batch_base_nodes",
    "training.momentum",
    "training.clique_averaging",
    "training.epochs",
    "training.eval_every",
    "training.eval_examples",
    "training.threads",
    "training.check_invariants",
    "sweep.nodes",
    "sweep.inter",
];

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    Synthetic { classes: usize, per_class: usize, test_per_class: usize, dim: usize, separation: f64 },
    Idx { train_images: PathBuf, train_labels: PathBuf, test_images: PathBuf, test_labels: PathBuf, validation: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionSpec {
    Shards { per_node: usize },
    SingleClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    GreedySwap { steps: usize },
    SingleClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologySpec {
    DCliques { max_size: usize, construction: Construction, inter: InterScheme, removed_intra: usize },
    Ring,
    Grid,
    Full,
    Random { degree: usize },
}

impl TopologySpec {
    pub fn with_inter(self, scheme: InterScheme) -> Self {
        match self {
            TopologySpec::DCliques { max_size, construction, removed_intra, .. } => {
                TopologySpec::DCliques { max_size, construction, inter: scheme, removed_intra }
            }
            other => other,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            TopologySpec::DCliques { max_size, inter, removed_intra, .. } => {
                format!("dcliques M={max_size} inter={inter} removed_intra={removed_intra}")
            }
            TopologySpec::Ring => "ring".into(),
            TopologySpec::Grid => "grid".into(),
            TopologySpec::Full => "full".into(),
            TopologySpec::Random { degree } => format!("random({degree})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output: PathBuf,
    pub nodes: usize,
    pub dataset: DatasetSpec,
    pub partition: PartitionSpec,
    pub topology: TopologySpec,
    pub training: TrainConfig,
    /// Scale the batch size as `batch * base / nodes` when set.
    pub batch_base_nodes: Option<usize>,
    pub sweep_nodes: Vec<usize>,
    pub sweep_inter: Vec<InterScheme>,
}

struct Entries(BTreeMap<&'static str, String>);

impl Entries {
    fn parse<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.0
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| ConfigError::Invalid { key, message: format!("{v:?}: {e}") }))
            .transpose()
    }

    fn or<T: FromStr>(&self, key: &'static str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    fn required<T: FromStr>(&self, key: &'static str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?.ok_or(ConfigError::Missing(key))
    }

    fn text(&self, key: &'static str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn path(&self, key: &'static str) -> Result<PathBuf, ConfigError> {
        self.text(key).map(PathBuf::from).ok_or(ConfigError::Missing(key))
    }

    fn positive(&self, key: &'static str, default: usize) -> Result<usize, ConfigError> {
        let v = self.or(key, default)?;
        if v == 0 {
            return Err(ConfigError::Invalid { key, message: "must be positive".into() });
        }
        Ok(v)
    }
}

fn parse_scheme(key: &'static str, value: &str, ns: usize) -> Result<InterScheme, ConfigError> {
    match value {
        "ring" => Ok(InterScheme::Ring),
        "fractal" => Ok(InterScheme::Fractal),
        "smallworld" => Ok(InterScheme::SmallWorld { ns }),
        "fully" => Ok(InterScheme::Fully),
        other => Err(ConfigError::Invalid {
            key,
            message: format!("{other:?} is not one of ring, fractal, smallworld, fully"),
        }),
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) =
                content.split_once('=').ok_or_else(|| ConfigError::Syntax { line, text: content.to_string() })?;
            let key = key.trim();
            let known = KEYS
                .iter()
                .copied()
                .find(|&k| k == key)
                .ok_or_else(|| ConfigError::UnknownKey { line, key: key.to_string() })?;
            if map.insert(known, value.trim().to_string()).is_some() {
                return Err(ConfigError::Duplicate { line, key: known.to_string() });
            }
        }
        Self::from_entries(&Entries(map))
    }

    fn from_entries(e: &Entries) -> Result<Self, ConfigError> {
        let nodes: usize = e.required("nodes")?;
        if nodes == 0 {
            return Err(ConfigError::Invalid { key: "nodes", message: "must be positive".into() });
        }

        let dataset = match e.text("dataset.kind").unwrap_or("synthetic") {
            "synthetic" => DatasetSpec::Synthetic {
                classes: e.positive("dataset.classes", 10)?,
                per_class: e.positive("dataset.per_class", 500)?,
                test_per_class: e.positive("dataset.test_per_class", 100)?,
                dim: e.positive("dataset.dim", 32)?,
                separation: e.or("dataset.separation", 4.5)?,
            },
            "idx" => DatasetSpec::Idx {
                train_images: e.path("dataset.train_images")?,
                train_labels: e.path("dataset.train_labels")?,
                test_images: e.path("dataset.test_images")?,
                test_labels: e.path("dataset.test_labels")?,
                validation: e.or("dataset.validation", 0)?,
            },
            other => {
                return Err(ConfigError::Invalid {
                    key: "dataset.kind",
                    message: format!("{other:?} is not one of synthetic, idx"),
                })
            }
        };

        let partition = match e.text("partition.kind").unwrap_or("shards") {
            "shards" => PartitionSpec::Shards { per_node: e.positive("partition.shards_per_node", 2)? },
            "single-class" => PartitionSpec::SingleClass,
            other => {
                return Err(ConfigError::Invalid {
                    key: "partition.kind",
                    message: format!("{other:?} is not one of shards, single-class"),
                })
            }
        };

        let ns = e.positive("topology.ns", InterScheme::DEFAULT_NEIGHBORHOOD)?;
        let topology = match e.text("topology.kind").unwrap_or("dcliques") {
            "dcliques" => {
                let construction = match e.text("topology.construction").unwrap_or("greedy-swap") {
                    "greedy-swap" => Construction::GreedySwap { steps: e.or("topology.K", 1000)? },
                    "single-class" => Construction::SingleClass,
                    other => {
                        return Err(ConfigError::Invalid {
                            key: "topology.construction",
                            message: format!("{other:?} is not one of greedy-swap, single-class"),
                        })
                    }
                };
                TopologySpec::DCliques {
                    max_size: e.positive("topology.M", 10)?,
                    construction,
                    inter: parse_scheme("topology.inter", e.text("topology.inter").unwrap_or("fully"), ns)?,
                    removed_intra: e.or("topology.removed_intra", 0)?,
                }
            }
            "ring" => TopologySpec::Ring,
            "grid" => TopologySpec::Grid,
            "full" => TopologySpec::Full,
            "random" => TopologySpec::Random { degree: e.positive("topology.degree", 10)? },
            other => {
                return Err(ConfigError::Invalid {
                    key: "topology.kind",
                    message: format!("{other:?} is not one of dcliques, ring, grid, full, random"),
                })
            }
        };

        let defaults = TrainConfig::default();
        let training = TrainConfig {
            learning_rate: e.or("training.learning_rate", defaults.learning_rate)?,
            batch_size: e.positive("training.batch_size", defaults.batch_size)?,
            momentum: e.or("training.momentum", defaults.momentum)?,
            clique_averaging: e.or("training.clique_averaging", defaults.clique_averaging)?,
            epochs: e.or("training.epochs", defaults.epochs)?,
            eval_every: e.positive("training.eval_every", defaults.eval_every)?,
            eval_examples: e.parse("training.eval_examples")?,
            threads: e.or("training.threads", defaults.threads)?,
            check_invariants: e.or("training.check_invariants", defaults.check_invariants)?,
        };
        if training.clique_averaging && !matches!(topology, TopologySpec::DCliques { .. }) {
            return Err(ConfigError::Invalid {
                key: "training.clique_averaging",
                message: "requires topology.kind=dcliques".into(),
            });
        }
        if let Err(err) = training.validate() {
            return Err(ConfigError::Invalid { key: "training", message: err.to_string() });
        }

        let sweep_nodes = match e.text("sweep.nodes") {
            Some(v) => list(v)
                .map(|s| {
                    s.parse::<usize>()
                        .ok()
                        .filter(|&n| n > 0)
                        .ok_or_else(|| ConfigError::Invalid { key: "sweep.nodes", message: format!("bad node count {s:?}") })
                })
                .collect::<Result<_, _>>()?,
            None => Vec::new(),
        };
        let sweep_inter = match e.text("sweep.inter") {
            Some(v) => {
                if !matches!(topology, TopologySpec::DCliques { .. }) {
                    return Err(ConfigError::Invalid {
                        key: "sweep.inter",
                        message: "requires topology.kind=dcliques".into(),
                    });
                }
                list(v).map(|s| parse_scheme("sweep.inter", s, ns)).collect::<Result<_, _>>()?
            }
            None => Vec::new(),
        };

        Ok(Self {
            seed: e.or("seed", 0)?,
            output: e.text("output").map_or_else(|| PathBuf::from("out"), PathBuf::from),
            nodes,
            dataset,
            partition,
            topology,
            training,
            batch_base_nodes: e.parse("training.batch_base_nodes")?,
            sweep_nodes,
            sweep_inter,
        })
    }
}
