//! Labeled datasets, per-node partitions and label distributions.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::seed::rng_from_seed;

/// Number of classes in the MNIST distribution files.
pub const MNIST_CLASSES: usize = 10;

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Tolerance on the sum of a [`LabelDistribution`].
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("feature rows ({rows}) do not match label count ({labels})")]
    RowMismatch { rows: usize, labels: usize },
    #[error("label {label} at example {index} is outside 0..{classes}")]
    LabelOutOfRange { index: usize, label: usize, classes: usize },
    #[error("more shards than examples ({shards} shards, {examples} examples)")]
    MoreShardsThanExamples { shards: usize, examples: usize },
    #[error("node count {nodes} is not divisible by class count {classes}")]
    NodesNotDivisible { nodes: usize, classes: usize },
    #[error("class {0} has no examples")]
    EmptyClass(usize),
    #[error("class {class} has {available} examples, fewer than the {needed} nodes it must cover")]
    TooFewExamples { class: usize, available: usize, needed: usize },
    #[error("node {0} holds no examples")]
    EmptyNode(usize),
    #[error("node {node} is outside 0..{nodes}")]
    NodeOutOfRange { node: usize, nodes: usize },
    #[error("example index {index} is outside 0..{examples}")]
    IndexOutOfRange { index: usize, examples: usize },
    #[error("example {0} is assigned to more than one node")]
    DuplicateIndex(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("distribution lengths differ ({0} vs {1})")]
    ClassCountMismatch(usize, usize),
    #[error("bad IDX magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic { found: u32, expected: u32 },
    #[error("truncated IDX data: needed {needed} bytes, found {found}")]
    Truncated { needed: usize, found: usize },
    #[error("image count {images} does not match label count {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("malformed partition file: {0}")]
    Parse(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, DataError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Validation,
    Test,
}

/// Row-major feature matrix with one class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f32>,
    labels: Vec<usize>,
    dim: usize,
    num_classes: usize,
    split: Split,
}

impl Dataset {
    pub fn new(
        features: Vec<f32>,
        labels: Vec<usize>,
        dim: usize,
        num_classes: usize,
        split: Split,
    ) -> Result<Self> {
        if dim == 0 || features.len() % dim != 0 {
            return Err(DataError::InvalidArgument(format!(
                "feature buffer of length {} is not a multiple of dimension {dim}",
                features.len()
            )));
        }
        let rows = features.len() / dim;
        if rows != labels.len() {
            return Err(DataError::RowMismatch { rows, labels: labels.len() });
        }
        if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(DataError::LabelOutOfRange { index, label, classes: num_classes });
        }
        Ok(Self { features, labels, dim, num_classes, split })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> usize {
        self.labels[index]
    }

    pub fn row(&self, index: usize) -> &[f32] {
        &self.features[index * self.dim..(index + 1) * self.dim]
    }

    pub fn class_counts(&self) -> Vec<usize> {
        class_counts(&self.labels, self.num_classes)
    }

    /// Copy of the selected rows, in the given order.
    pub fn subset(&self, indices: &[usize], split: Split) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self { features, labels, dim: self.dim, num_classes: self.num_classes, split }
    }
}

fn class_counts(labels: &[usize], num_classes: usize) -> Vec<usize> {
    let mut counts = vec![0; num_classes];
    for &l in labels {
        counts[l] += 1;
    }
    counts
}

/// Assignment of example indices to nodes. Lists are pairwise disjoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    node_examples: Vec<Vec<usize>>,
}

impl Partition {
    /// Checks disjointness and that every index is below `num_examples`.
    pub fn new(node_examples: Vec<Vec<usize>>, num_examples: usize) -> Result<Self> {
        let mut seen = vec![false; num_examples];
        for &index in node_examples.iter().flatten() {
            if index >= num_examples {
                return Err(DataError::IndexOutOfRange { index, examples: num_examples });
            }
            if std::mem::replace(&mut seen[index], true) {
                return Err(DataError::DuplicateIndex(index));
            }
        }
        Ok(Self { node_examples })
    }

    pub fn num_nodes(&self) -> usize {
        self.node_examples.len()
    }

    pub fn node(&self, node: usize) -> &[usize] {
        &self.node_examples[node]
    }

    pub fn nodes(&self) -> &[Vec<usize>] {
        &self.node_examples
    }

    /// Number of assigned examples over all nodes.
    pub fn total_examples(&self) -> usize {
        self.node_examples.iter().map(Vec::len).sum()
    }

    /// Distinct labels held by `node`, ascending.
    pub fn node_classes(&self, labels: &[usize], node: usize) -> Vec<usize> {
        let mut classes: Vec<usize> = self.node_examples[node].iter().map(|&i| labels[i]).collect();
        classes.sort_unstable();
        classes.dedup();
        classes
    }

    /// Text form: header `nodes=<n> examples=<total>`, then one line of
    /// space-separated example indices per node.
    pub fn to_text(&self) -> String {
        let mut out = format!("nodes={} examples={}\n", self.num_nodes(), self.total_examples());
        for examples in &self.node_examples {
            let line: Vec<String> = examples.iter().map(usize::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, num_examples: usize) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| DataError::Parse("missing header".into()))?;
        let (nodes, total) = parse_partition_header(header)?;
        let mut node_examples = Vec::with_capacity(nodes);
        for line in lines.take(nodes) {
            let examples = line
                .split_whitespace()
                .map(|tok| tok.parse::<usize>().map_err(|e| DataError::Parse(format!("{tok:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            node_examples.push(examples);
        }
        if node_examples.len() != nodes {
            return Err(DataError::Parse(format!(
                "header announces {nodes} nodes, found {}",
                node_examples.len()
            )));
        }
        let partition = Self::new(node_examples, num_examples)?;
        if partition.total_examples() != total {
            return Err(DataError::Parse(format!(
                "header announces {total} examples, found {}",
                partition.total_examples()
            )));
        }
        Ok(partition)
    }
}

fn parse_partition_header(header: &str) -> Result<(usize, usize)> {
    let mut nodes = None;
    let mut examples = None;
    for field in header.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| DataError::Parse(format!("bad header field {field:?}")))?;
        let value: usize = value.parse().map_err(|_| DataError::Parse(format!("bad header value {field:?}")))?;
        match key {
            "nodes" => nodes = Some(value),
            "examples" => examples = Some(value),
            _ => return Err(DataError::Parse(format!("unknown header field {key:?}"))),
        }
    }
    match (nodes, examples) {
        (Some(n), Some(e)) => Ok((n, e)),
        _ => Err(DataError::Parse(format!("incomplete header {header:?}"))),
    }
}

/// Probability vector over the classes.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelDistribution {
    probs: Vec<f64>,
}

impl LabelDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(DataError::InvalidArgument("probabilities must be finite and nonnegative".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(DataError::NotNormalized(sum));
        }
        Ok(Self { probs })
    }

    pub fn uniform(num_classes: usize) -> Self {
        Self { probs: vec![1.0 / num_classes as f64; num_classes] }
    }

    /// Unit mass on `class`.
    pub fn one_hot(class: usize, num_classes: usize) -> Self {
        let mut probs = vec![0.0; num_classes];
        probs[class] = 1.0;
        Self { probs }
    }

    /// Unweighted mean of several distributions.
    pub fn mean<'a, I>(dists: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a LabelDistribution>,
    {
        let mut iter = dists.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| DataError::InvalidArgument("mean of no distributions".into()))?;
        let mut sum = first.probs.clone();
        let mut count = 1usize;
        for d in iter {
            if d.probs.len() != sum.len() {
                return Err(DataError::ClassCountMismatch(sum.len(), d.probs.len()));
            }
            for (s, p) in sum.iter_mut().zip(&d.probs) {
                *s += p;
            }
            count += 1;
        }
        let inv = count as f64;
        Ok(Self { probs: sum.into_iter().map(|s| s / inv).collect() })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_classes(&self) -> usize {
        self.probs.len()
    }

    /// L1 distance to `other`.
    pub fn l1_distance(&self, other: &LabelDistribution) -> f64 {
        self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum()
    }
}

impl fmt::Display for LabelDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.probs.iter().map(|p| format!("{p:.4}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Sorts examples by class, cuts them into `n * shards_per_node` contiguous
/// shards and deals the shards to nodes uniformly at random.
///
/// When the example count is not a multiple of the shard count, the last
/// `count % shards` shards hold one extra example.
pub fn partition_shards(labels: &[usize], n: usize, shards_per_node: usize, seed: u64) -> Result<Partition> {
    if labels.is_empty() {
        return Err(DataError::InvalidArgument("no labels to partition".into()));
    }
    if n == 0 || shards_per_node == 0 {
        return Err(DataError::InvalidArgument("node count and shards per node must be positive".into()));
    }
    let shards = n * shards_per_node;
    if shards > labels.len() {
        return Err(DataError::MoreShardsThanExamples { shards, examples: labels.len() });
    }

    let mut sorted: Vec<usize> = (0..labels.len()).collect();
    sorted.sort_by_key(|&i| (labels[i], i));

    let base = labels.len() / shards;
    let remainder = labels.len() % shards;
    let mut bounds = Vec::with_capacity(shards + 1);
    bounds.push(0);
    for s in 0..shards {
        let size = if s >= shards - remainder { base + 1 } else { base };
        bounds.push(bounds[s] + size);
    }

    let mut order: Vec<usize> = (0..shards).collect();
    order.shuffle(&mut rng_from_seed(seed));

    let node_examples = order
        .chunks(shards_per_node)
        .map(|assigned| {
            assigned
                .iter()
                .flat_map(|&s| sorted[bounds[s]..bounds[s + 1]].iter().copied())
                .collect()
        })
        .collect();
    Ok(Partition { node_examples })
}

/// Gives every node examples of exactly one class, `n / num_classes` nodes per
/// class, all nodes holding the same number of examples.
///
/// Classes are truncated to the smallest class count, and each class to a
/// multiple of its node count; the dropped examples are not assigned.
pub fn partition_single_class(labels: &[usize], num_classes: usize, n: usize, seed: u64) -> Result<Partition> {
    if num_classes == 0 || n == 0 {
        return Err(DataError::InvalidArgument("node and class counts must be positive".into()));
    }
    if n % num_classes != 0 {
        return Err(DataError::NodesNotDivisible { nodes: n, classes: num_classes });
    }
    if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
        return Err(DataError::LabelOutOfRange { index, label, classes: num_classes });
    }
    let mut by_class = vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    if let Some(class) = by_class.iter().position(Vec::is_empty) {
        return Err(DataError::EmptyClass(class));
    }
    let nodes_per_class = n / num_classes;
    let min_count = by_class.iter().map(Vec::len).min().unwrap_or(0);
    if min_count < nodes_per_class {
        let class = by_class.iter().position(|c| c.len() == min_count).unwrap_or(0);
        return Err(DataError::TooFewExamples { class, available: min_count, needed: nodes_per_class });
    }
    let per_node = min_count / nodes_per_class;

    let mut rng = rng_from_seed(seed);
    let mut slots: Vec<usize> = (0..n).collect();
    slots.shuffle(&mut rng);

    let mut node_examples = vec![Vec::new(); n];
    for (class, examples) in by_class.iter_mut().enumerate() {
        examples.shuffle(&mut rng);
        for k in 0..nodes_per_class {
            let node = slots[class * nodes_per_class + k];
            node_examples[node] = examples[k * per_node..(k + 1) * per_node].to_vec();
        }
    }
    Ok(Partition { node_examples })
}

/// Empirical label frequencies of `node`'s local examples.
pub fn node_distribution(partition: &Partition, dataset: &Dataset, node: usize) -> Result<LabelDistribution> {
    if node >= partition.num_nodes() {
        return Err(DataError::NodeOutOfRange { node, nodes: partition.num_nodes() });
    }
    let examples = partition.node(node);
    if examples.is_empty() {
        return Err(DataError::EmptyNode(node));
    }
    let mut counts = vec![0usize; dataset.num_classes()];
    for &i in examples {
        counts[dataset.label(i)] += 1;
    }
    let total = examples.len() as f64;
    Ok(LabelDistribution { probs: counts.into_iter().map(|c| c as f64 / total).collect() })
}

pub fn node_distributions(partition: &Partition, dataset: &Dataset) -> Result<Vec<LabelDistribution>> {
    (0..partition.num_nodes()).map(|i| node_distribution(partition, dataset, i)).collect()
}

/// Unweighted mean of the node distributions.
pub fn global_distribution(partition: &Partition, dataset: &Dataset) -> Result<LabelDistribution> {
    let dists = node_distributions(partition, dataset)?;
    LabelDistribution::mean(&dists)
}

/// Gaussian blobs: class `l` has mean `separation / sqrt(2) * e_l` and identity
/// covariance, so any two class means are `separation` apart.
pub fn synthetic_dataset(
    num_classes: usize,
    per_class: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset> {
    if per_class == 0 {
        return Err(DataError::InvalidArgument("per_class must be positive".into()));
    }
    synthetic_dataset_with_counts(&vec![per_class; num_classes], dim, separation, seed)
}

/// Same generator as [`synthetic_dataset`] with an explicit count per class.
/// Examples are emitted class by class.
pub fn synthetic_dataset_with_counts(
    class_counts: &[usize],
    dim: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset> {
    let num_classes = class_counts.len();
    if num_classes < 2 {
        return Err(DataError::InvalidArgument("need at least 2 classes".into()));
    }
    if dim < num_classes {
        return Err(DataError::InvalidArgument(format!(
            "dimension {dim} is smaller than class count {num_classes}"
        )));
    }
    if !separation.is_finite() || separation < 0.0 {
        return Err(DataError::InvalidArgument("separation must be finite and nonnegative".into()));
    }
    if let Some(class) = class_counts.iter().position(|&c| c == 0) {
        return Err(DataError::EmptyClass(class));
    }
    let offset = separation / std::f64::consts::SQRT_2;
    let total: usize = class_counts.iter().sum();
    let mut rng = rng_from_seed(seed);
    let mut features = Vec::with_capacity(total * dim);
    let mut labels = Vec::with_capacity(total);
    for (class, &count) in class_counts.iter().enumerate() {
        for _ in 0..count {
            for k in 0..dim {
                let noise: f64 = StandardNormal.sample(&mut rng);
                let mean = if k == class { offset } else { 0.0 };
                features.push((mean + noise) as f32);
            }
            labels.push(class);
        }
    }
    Dataset::new(features, labels, dim, num_classes, Split::Train)
}

/// Splits off a validation set of `size` examples whose class proportions
/// follow `reference_counts` (largest-remainder rounding). Returns
/// `(train, validation)`.
pub fn stratified_split(
    dataset: &Dataset,
    reference_counts: &[usize],
    size: usize,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if reference_counts.len() != dataset.num_classes() {
        return Err(DataError::ClassCountMismatch(dataset.num_classes(), reference_counts.len()));
    }
    if size > dataset.len() {
        return Err(DataError::InvalidArgument(format!(
            "validation size {size} exceeds dataset size {}",
            dataset.len()
        )));
    }
    let ref_total: usize = reference_counts.iter().sum();
    if ref_total == 0 {
        return Err(DataError::InvalidArgument("reference class counts are all zero".into()));
    }
    let exact: Vec<f64> = reference_counts.iter().map(|&c| c as f64 * size as f64 / ref_total as f64).collect();
    let mut quota: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
    let mut by_remainder: Vec<usize> = (0..quota.len()).collect();
    by_remainder.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let missing = size - quota.iter().sum::<usize>();
    for &class in by_remainder.iter().take(missing) {
        quota[class] += 1;
    }

    let mut by_class = vec![Vec::new(); dataset.num_classes()];
    for (i, &l) in dataset.labels().iter().enumerate() {
        by_class[l].push(i);
    }
    let mut rng = rng_from_seed(seed);
    let mut validation = Vec::with_capacity(size);
    let mut train = Vec::with_capacity(dataset.len() - size);
    for (class, examples) in by_class.iter_mut().enumerate() {
        if quota[class] > examples.len() {
            return Err(DataError::TooFewExamples { class, available: examples.len(), needed: quota[class] });
        }
        examples.shuffle(&mut rng);
        validation.extend_from_slice(&examples[..quota[class]]);
        train.extend_from_slice(&examples[quota[class]..]);
    }
    validation.sort_unstable();
    train.sort_unstable();
    Ok((dataset.subset(&train, Split::Train), dataset.subset(&validation, Split::Validation)))
}

fn read_u32_be(bytes: &[u8], offset: usize) -> Result<u32> {
    let end = offset + 4;
    let chunk = bytes.get(offset..end).ok_or(DataError::Truncated { needed: end, found: bytes.len() })?;
    Ok(u32::from_be_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]))
}

/// Parses an IDX3 image file: returns `(count, rows, cols, pixels)`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, usize, &[u8])> {
    let magic = read_u32_be(bytes, 0)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(DataError::BadMagic { found: magic, expected: IDX_IMAGES_MAGIC });
    }
    let count = read_u32_be(bytes, 4)? as usize;
    let rows = read_u32_be(bytes, 8)? as usize;
    let cols = read_u32_be(bytes, 12)? as usize;
    let needed = 16 + count * rows * cols;
    if bytes.len() < needed {
        return Err(DataError::Truncated { needed, found: bytes.len() });
    }
    Ok((count, rows, cols, &bytes[16..needed]))
}

/// Parses an IDX1 label file.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<&[u8]> {
    let magic = read_u32_be(bytes, 0)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(DataError::BadMagic { found: magic, expected: IDX_LABELS_MAGIC });
    }
    let count = read_u32_be(bytes, 4)? as usize;
    let needed = 8 + count;
    if bytes.len() < needed {
        return Err(DataError::Truncated { needed, found: bytes.len() });
    }
    Ok(&bytes[8..needed])
}

pub fn encode_idx_images(rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    let count = pixels.len() / (rows * cols);
    let mut out = Vec::with_capacity(16 + pixels.len());
    for word in [IDX_IMAGES_MAGIC, count as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&word.to_be_bytes());
    }
    out.extend_from_slice(pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Builds a dataset from IDX image and label bytes, scaling pixels to [0, 1].
pub fn dataset_from_idx(images: &[u8], labels: &[u8], num_classes: usize, split: Split) -> Result<Dataset> {
    let (count, rows, cols, pixels) = parse_idx_images(images)?;
    let raw_labels = parse_idx_labels(labels)?;
    if count != raw_labels.len() {
        return Err(DataError::CountMismatch { images: count, labels: raw_labels.len() });
    }
    let features = pixels.iter().map(|&p| f32::from(p) / 255.0).collect();
    let labels = raw_labels.iter().map(|&l| usize::from(l)).collect();
    Dataset::new(features, labels, rows * cols, num_classes, split)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| DataError::Io { path: path.display().to_string(), message: e.to_string() })
}

/// Loads an MNIST-format image/label file pair.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>, split: Split) -> Result<Dataset> {
    let images = read_file(images_path.as_ref())?;
    let labels = read_file(labels_path.as_ref())?;
    dataset_from_idx(&images, &labels, MNIST_CLASSES, split)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(labels: Vec<usize>, classes: usize) -> Dataset {
        let n = labels.len();
        Dataset::new(vec![0.0; n], labels, 1, classes, Split::Train).unwrap()
    }

    #[test]
    fn dataset_rejects_out_of_range_labels() {
        let err = Dataset::new(vec![0.0; 3], vec![0, 2, 1], 1, 2, Split::Train).unwrap_err();
        assert_eq!(err, DataError::LabelOutOfRange { index: 1, label: 2, classes: 2 });
        let err = Dataset::new(vec![0.0; 4], vec![0, 1, 1], 1, 2, Split::Train).unwrap_err();
        assert_eq!(err, DataError::RowMismatch { rows: 4, labels: 3 });
    }

    #[test]
    fn shards_of_equal_size() {
        let labels: Vec<usize> = (0..50_000).map(|i| i % 10).collect();
        let p = partition_shards(&labels, 100, 2, 1).unwrap();
        assert_eq!(p.num_nodes(), 100);
        assert!(p.nodes().iter().all(|e| e.len() == 500));
        assert_eq!(p.total_examples(), 50_000);
    }

    #[test]
    fn single_node_single_shard_is_class_sorted() {
        let labels = vec![2, 0, 1, 0, 2];
        let p = partition_shards(&labels, 1, 1, 9).unwrap();
        assert_eq!(p.node(0), &[1, 3, 2, 0, 4]);
    }

    #[test]
    fn shard_remainder_goes_to_last_shards() {
        // 7 examples, 3 shards: sizes 2, 2, 3 in class-sorted order.
        let labels: Vec<usize> = (0..7).collect();
        let p = partition_shards(&labels, 3, 1, 0).unwrap();
        let mut sizes: Vec<(usize, usize)> = p.nodes().iter().map(|e| (e[0], e.len())).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![(0, 2), (2, 2), (4, 3)]);
    }

    #[test]
    fn too_many_shards() {
        let err = partition_shards(&[0, 1, 0], 2, 2, 0).unwrap_err();
        assert_eq!(err, DataError::MoreShardsThanExamples { shards: 4, examples: 3 });
    }

    #[test]
    fn single_class_counts() {
        let labels: Vec<usize> = (0..10_000).map(|i| i % 10).collect();
        let p = partition_single_class(&labels, 10, 100, 3).unwrap();
        for node in 0..100 {
            assert_eq!(p.node(node).len(), 1000 * 10 / 100);
            assert_eq!(p.node_classes(&labels, node).len(), 1);
        }
        let mut per_class = [0usize; 10];
        for node in 0..100 {
            per_class[p.node_classes(&labels, node)[0]] += 1;
        }
        assert_eq!(per_class, [10; 10]);
    }

    #[test]
    fn single_class_truncates_to_smallest_class() {
        let mut labels: Vec<usize> = (0..100).map(|i| i % 10).collect();
        labels.extend([3, 3, 3]);
        let p = partition_single_class(&labels, 10, 10, 0).unwrap();
        assert!(p.nodes().iter().all(|e| e.len() == 10));
    }

    #[test]
    fn single_class_errors() {
        let labels: Vec<usize> = (0..100).map(|i| i % 10).collect();
        assert_eq!(
            partition_single_class(&labels, 10, 15, 0).unwrap_err(),
            DataError::NodesNotDivisible { nodes: 15, classes: 10 }
        );
        let labels: Vec<usize> = (0..100).map(|i| i % 9).collect();
        assert_eq!(partition_single_class(&labels, 10, 10, 0).unwrap_err(), DataError::EmptyClass(9));
    }

    #[test]
    fn node_distribution_frequencies() {
        let ds = tiny(vec![0, 0, 1, 1, 1], 2);
        let p = Partition::new(vec![vec![0, 1, 2, 3], vec![4], vec![]], 5).unwrap();
        assert_eq!(node_distribution(&p, &ds, 0).unwrap().probs(), &[0.5, 0.5]);
        assert_eq!(node_distribution(&p, &ds, 1).unwrap().probs(), &[0.0, 1.0]);
        assert_eq!(node_distribution(&p, &ds, 2).unwrap_err(), DataError::EmptyNode(2));
        assert!(global_distribution(&p, &ds).is_err());
    }

    #[test]
    fn global_distribution_is_unweighted_mean() {
        let ds = tiny(vec![0, 1, 1, 1], 2);
        let p = Partition::new(vec![vec![0], vec![1, 2, 3]], 4).unwrap();
        assert_eq!(global_distribution(&p, &ds).unwrap().probs(), &[0.5, 0.5]);
    }

    #[test]
    fn partition_rejects_overlap() {
        assert_eq!(Partition::new(vec![vec![0, 1], vec![1]], 2).unwrap_err(), DataError::DuplicateIndex(1));
        assert!(matches!(Partition::new(vec![vec![5]], 2), Err(DataError::IndexOutOfRange { .. })));
    }

    #[test]
    fn partition_text_format() {
        let p = Partition::new(vec![vec![3, 1], vec![], vec![0]], 4).unwrap();
        let text = p.to_text();
        assert_eq!(text, "nodes=3 examples=3\n3 1\n\n0\n");
        assert_eq!(Partition::from_text(&text, 4).unwrap(), p);
        assert!(Partition::from_text("nodes=2 examples=1\n0\n", 4).is_err());
        assert!(Partition::from_text("nodes=1 examples=2\n0\n", 4).is_err());
    }

    #[test]
    fn synthetic_is_deterministic() {
        let a = synthetic_dataset(3, 5, 4, 2.0, 11).unwrap();
        let b = synthetic_dataset(3, 5, 4, 2.0, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, synthetic_dataset(3, 5, 4, 2.0, 12).unwrap());
        assert_eq!(a.class_counts(), vec![5, 5, 5]);
    }

    #[test]
    fn synthetic_rejects_bad_arguments() {
        assert!(synthetic_dataset(1, 5, 4, 1.0, 0).is_err());
        assert!(synthetic_dataset(3, 0, 4, 1.0, 0).is_err());
        assert!(synthetic_dataset(3, 5, 2, 1.0, 0).is_err());
        assert!(synthetic_dataset(3, 5, 4, -1.0, 0).is_err());
        assert!(synthetic_dataset(3, 5, 4, f64::NAN, 0).is_err());
    }

    #[test]
    fn stratified_split_follows_reference_ratio() {
        let ds = tiny((0..1000).map(|i| if i < 700 { 0 } else { 1 }).collect(), 2);
        let (train, val) = stratified_split(&ds, &[1, 3], 100, 5).unwrap();
        assert_eq!(val.class_counts(), vec![25, 75]);
        assert_eq!(train.len(), 900);
        assert_eq!(val.split(), Split::Validation);
    }

    #[test]
    fn idx_round_trip_and_errors() {
        let pixels: Vec<u8> = vec![0, 255, 51, 102, 0, 0, 0, 255];
        let images = encode_idx_images(2, 2, &pixels);
        let labels = encode_idx_labels(&[3, 9]);
        let ds = dataset_from_idx(&images, &labels, MNIST_CLASSES, Split::Test).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 4);
        assert_eq!(ds.labels(), &[3, 9]);
        assert_eq!(ds.row(0), &[0.0, 1.0, 0.2, 0.4]);

        assert!(matches!(parse_idx_images(&[]), Err(DataError::Truncated { .. })));
        assert!(matches!(dataset_from_idx(&images[..20], &labels, 10, Split::Test), Err(DataError::Truncated { .. })));
        assert!(matches!(dataset_from_idx(&labels, &labels, 10, Split::Test), Err(DataError::BadMagic { .. })));
        let short = encode_idx_labels(&[1]);
        assert_eq!(
            dataset_from_idx(&images, &short, 10, Split::Test).unwrap_err(),
            DataError::CountMismatch { images: 2, labels: 1 }
        );
        let bad = encode_idx_labels(&[1, 10]);
        assert!(matches!(dataset_from_idx(&images, &bad, 10, Split::Test), Err(DataError::LabelOutOfRange { label: 10, .. })));
    }
}
