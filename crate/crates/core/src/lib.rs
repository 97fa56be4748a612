//! Density-based clustering of 2D point sets that can only be reached
//! through a kNN query interface with a hard query budget.
//!
//! The pipeline maps the plane to a line with an adaptive space-filling
//! curve, discovers dense cell ranges on the line with few queries, merges
//! the resulting fragments into clusters, and freezes everything into a
//! [`ClusterModel`] that labels arbitrary points without further queries.
//!
//! ```
//! use std::sync::Arc;
//! use lbs_cluster::{hdbscan, synth, Budget, DbscanParams, HdbscanConfig, SimulatedLbs};
//!
//! let data = Arc::new(synth::blobs(2, 200, 2.0, 60.0, 7));
//! let mut lbs = SimulatedLbs::new(data.clone(), 8, Budget::new(300)).unwrap();
//! let params = DbscanParams::new(4.0, 8).unwrap();
//! let run = hdbscan(&mut lbs, &params, &HdbscanConfig::default()).unwrap();
//! let labels = lbs_cluster::ClusterModel::from(run.model).label_dataset(&data);
//! assert_eq!(labels.len(), data.len());
//! ```

pub mod cluster1d;
pub mod cluster2d;
pub mod dbscan;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod labels;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod sfc;
pub mod synth;

pub use crate::cluster1d::{
    find_dense_segments, CellDomain, DenseSegment, LineDomain, SegmentFinder,
};
pub use crate::cluster2d::{hdbscan, HdbscanConfig, HdbscanRun};
pub use crate::dbscan::{baseline_cluster, dbscan, dbscan_points, DbscanParams};
pub use crate::error::{BudgetExhausted, Error, Result};
pub use crate::geometry::{Point2D, Rect};
pub use crate::labels::{Label, Labeling};
pub use crate::metrics::Scores;
pub use crate::model::{AdaptiveModel, ClusterModel, SampleModel};
pub use crate::oracle::{Budget, Dataset, KnnAnswer, KnnService, SimulatedLbs};
pub use crate::sfc::{AdaptiveSfc, Curve};
