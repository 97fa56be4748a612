//! Simulated location-based service: a kNN query endpoint over a point
//! database with a hard query budget.

mod dataset;
mod kdtree;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use self::dataset::{Dataset, Format};
pub use self::kdtree::KdTree;
use crate::error::{BudgetExhausted, Error, Result};
use crate::geometry::{Point2D, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: usize,
    pub point: Point2D,
    pub distance: f64,
}

/// Result of one kNN query, nearest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnAnswer {
    pub query: Point2D,
    pub neighbors: Vec<Neighbor>,
    pub k_requested: usize,
}

impl KnnAnswer {
    /// Distance of the `rank`-th neighbor (1-based), if returned.
    pub fn rank_distance(&self, rank: usize) -> Option<f64> {
        rank.checked_sub(1)
            .and_then(|i| self.neighbors.get(i))
            .map(|n| n.distance)
    }

    /// True when fewer than `k_requested` points came back, i.e. the whole
    /// database was returned.
    pub fn is_exhaustive(&self) -> bool {
        self.neighbors.len() < self.k_requested
    }

    /// Every database point strictly closer than this radius is in the
    /// answer.
    pub fn coverage_radius(&self) -> f64 {
        if self.is_exhaustive() {
            f64::INFINITY
        } else {
            self.neighbors.last().map_or(f64::INFINITY, |n| n.distance)
        }
    }
}

/// Query counter with an optional hard cap. `limit: None` never runs out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub limit: Option<usize>,
    pub used: usize,
}

impl Budget {
    pub fn new(limit: usize) -> Self {
        Self {
            limit: Some(limit),
            used: 0,
        }
    }

    pub fn unlimited() -> Self {
        Self {
            limit: None,
            used: 0,
        }
    }

    pub fn remaining(&self) -> Option<usize> {
        self.limit.map(|l| l - self.used)
    }

    pub fn is_exhausted(&self) -> bool {
        self.limit.is_some_and(|l| self.used >= l)
    }

    fn spend(&mut self) -> Result<(), BudgetExhausted> {
        if self.is_exhausted() {
            return Err(BudgetExhausted);
        }
        self.used += 1;
        Ok(())
    }
}

/// Anything that answers location queries with the k nearest points.
///
/// Implementations keep the log of every point they have returned so the
/// clustering stages can reuse it.
pub trait KnnService {
    /// Interface-defined maximum `k`.
    fn k(&self) -> usize;

    /// Region the service covers.
    fn region(&self) -> Rect;

    fn budget(&self) -> Budget;

    /// Issue one query; consumes one unit of budget. `k` may be at most
    /// [`KnnService::k`].
    fn query(&mut self, q: Point2D, k: usize) -> Result<KnnAnswer, BudgetExhausted>;

    /// Every point returned so far, deduplicated, by id.
    fn observed(&self) -> &BTreeMap<usize, Point2D>;

    fn observed_points(&self) -> Vec<(usize, Point2D)> {
        self.observed().iter().map(|(&id, &p)| (id, p)).collect()
    }
}

/// In-memory kNN service backed by a static kd-tree.
#[derive(Debug, Clone)]
pub struct SimulatedLbs {
    dataset: Arc<Dataset>,
    index: Arc<KdTree>,
    region: Rect,
    k: usize,
    budget: Budget,
    observed: BTreeMap<usize, Point2D>,
}

impl SimulatedLbs {
    pub fn new(dataset: Arc<Dataset>, k: usize, budget: Budget) -> Result<Self> {
        let index = Arc::new(KdTree::build(dataset.points()));
        Self::with_index(dataset, index, k, budget)
    }

    /// Reuse a prebuilt index (it must have been built from `dataset`).
    pub fn with_index(
        dataset: Arc<Dataset>,
        index: Arc<KdTree>,
        k: usize,
        budget: Budget,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        let region = dataset.bounding_box();
        Ok(Self {
            dataset,
            index,
            region,
            k,
            budget,
            observed: BTreeMap::new(),
        })
    }

    /// Override the advertised region (defaults to the data bounding box).
    pub fn set_region(&mut self, region: Rect) {
        self.region = region;
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.dataset
    }

    pub fn stats(&self) -> OracleStats {
        OracleStats {
            k: self.k,
            budget_limit: self.budget.limit,
            budget_used: self.budget.used,
            observed: self.observed.len(),
        }
    }
}

impl KnnService for SimulatedLbs {
    fn k(&self) -> usize {
        self.k
    }

    fn region(&self) -> Rect {
        self.region
    }

    fn budget(&self) -> Budget {
        self.budget
    }

    fn query(&mut self, q: Point2D, k: usize) -> Result<KnnAnswer, BudgetExhausted> {
        assert!(
            (1..=self.k).contains(&k),
            "k = {k} outside 1..={} for this service",
            self.k
        );
        self.budget.spend()?;
        let neighbors: Vec<Neighbor> = self
            .index
            .nearest(&q, k)
            .into_iter()
            .map(|(id, point, d2)| Neighbor {
                id,
                point,
                distance: d2.sqrt(),
            })
            .collect();
        for n in &neighbors {
            self.observed.insert(n.id, n.point);
        }
        Ok(KnnAnswer {
            query: q,
            neighbors,
            k_requested: k,
        })
    }

    fn observed(&self) -> &BTreeMap<usize, Point2D> {
        &self.observed
    }
}

/// Oracle counters as exported in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleStats {
    pub k: usize,
    pub budget_limit: Option<usize>,
    pub budget_used: usize,
    pub observed: usize,
}
