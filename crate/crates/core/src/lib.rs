//! Topology construction and in-process simulation of decentralized SGD under
//! label distribution skew.
//!
//! * [`data`]: datasets, heterogeneous partitions and label distributions
//! * [`topology`]: clique construction, inter-clique wiring, baseline graphs
//! * [`mixing`]: Metropolis-Hastings mixing matrices and their validation
//! * [`training`]: synchronous D-SGD rounds, Clique Averaging and momentum
//! * [`metrics`]: accuracy, skew statistics and message accounting
//!
//! Node ids and class ids are zero-based everywhere.

pub mod data;
pub mod metrics;
pub mod mixing;
pub mod seed;
pub mod topology;
pub mod training;

pub use data::{Dataset, LabelDistribution, Partition, Split};
pub use metrics::{CostReport, SkewStats, Trace, TraceRow};
pub use mixing::MixingMatrix;
pub use topology::{CliqueAssignment, EdgeTag, InterScheme, SkewValue, Topology};
pub use training::{Model, NodeState, SoftmaxRegression, TrainConfig};
