//! Full-access DBSCAN, used as ground truth, and the sample-then-cluster
//! baseline that only sees what a kNN service returns.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2D;
use crate::labels::{Label, Labeling};
use crate::model::{ClusterModel, SampleModel};
use crate::oracle::{Dataset, KnnService};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbscanParams {
    pub eps: f64,
    /// Neighborhood size (the point itself included) that makes a point core.
    pub min_pts: usize,
}

impl DbscanParams {
    pub fn new(eps: f64, min_pts: usize) -> Result<Self> {
        let p = Self { eps, min_pts };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if self.min_pts == 0 {
            return Err(Error::InvalidParameter("min_pts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Uniform grid with `eps`-sized buckets for fixed-radius neighbor lookups.
struct RadiusIndex<'a> {
    points: &'a [Point2D],
    eps: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl<'a> RadiusIndex<'a> {
    fn new(points: &'a [Point2D], eps: f64) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(p, eps)).or_default().push(i);
        }
        Self {
            points,
            eps,
            buckets,
        }
    }

    fn key(p: &Point2D, eps: f64) -> (i64, i64) {
        ((p.x / eps).floor() as i64, (p.y / eps).floor() as i64)
    }

    /// Ids within `eps` of point `i` (including `i`), ascending.
    fn neighbors(&self, i: usize) -> Vec<usize> {
        let p = self.points[i];
        let (cx, cy) = Self::key(&p, self.eps);
        let eps2 = self.eps * self.eps;
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = self.buckets.get(&(cx + dx, cy + dy)) {
                    out.extend(
                        bucket
                            .iter()
                            .copied()
                            .filter(|&j| self.points[j].dist2(&p) <= eps2),
                    );
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Whether point `id` has at least `min_pts` points (itself included)
/// within `eps`.
pub fn is_core(dataset: &Dataset, id: usize, params: &DbscanParams) -> bool {
    let p = dataset.point(id);
    let eps2 = params.eps * params.eps;
    dataset
        .points()
        .iter()
        .filter(|q| q.dist2(&p) <= eps2)
        .take(params.min_pts)
        .count()
        >= params.min_pts
}

pub fn dbscan(dataset: &Dataset, params: &DbscanParams) -> Labeling {
    dbscan_points(dataset.points(), params)
}

/// DBSCAN over a bare point slice.
///
/// Clusters are numbered by their lowest-id core point. A border point near
/// cores of several clusters joins the cluster of the lowest-id such core.
pub fn dbscan_points(points: &[Point2D], params: &DbscanParams) -> Labeling {
    let n = points.len();
    let index = RadiusIndex::new(points, params.eps);
    let neighbors: Vec<Vec<usize>> = (0..n).map(|i| index.neighbors(i)).collect();
    let core: Vec<bool> = neighbors
        .iter()
        .map(|nb| nb.len() >= params.min_pts)
        .collect();

    let mut labels = vec![Label::Noise; n];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for seed in 0..n {
        if !core[seed] || !labels[seed].is_noise() {
            continue;
        }
        let id = Label::Cluster(next);
        next += 1;
        labels[seed] = id;
        stack.push(seed);
        while let Some(i) = stack.pop() {
            for &j in &neighbors[i] {
                if core[j] && labels[j].is_noise() {
                    labels[j] = id;
                    stack.push(j);
                }
            }
        }
    }

    for i in 0..n {
        if core[i] {
            continue;
        }
        if let Some(&c) = neighbors[i].iter().find(|&&j| core[j]) {
            labels[i] = labels[c];
        }
    }
    Labeling::new(labels)
}

/// Sample-then-cluster baseline.
///
/// Issues queries at uniformly random locations of the service region until
/// the budget runs out, clusters the retrieved points with DBSCAN, and
/// returns a model that labels a new point with the cluster of its nearest
/// clustered sample when that sample is within `assign_threshold`. The
/// service must have a finite budget.
pub fn baseline_cluster<S: KnnService + ?Sized>(
    service: &mut S,
    params: &DbscanParams,
    assign_threshold: f64,
    seed: u64,
) -> Result<ClusterModel> {
    params.validate()?;
    if service.budget().limit.is_none() {
        return Err(Error::InvalidParameter(
            "the sampling baseline needs a finite budget".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let region = service.region();
    let k = service.k();
    loop {
        let q = Point2D::new(
            rng.random_range(region.min.x..=region.max.x),
            rng.random_range(region.min.y..=region.max.y),
        );
        if service.query(q, k).is_err() {
            break;
        }
    }

    let observed = service.observed_points();
    let points: Vec<Point2D> = observed.iter().map(|(_, p)| *p).collect();
    let labels = dbscan_points(&points, params);
    let clustered: Vec<(Point2D, u32)> = points
        .iter()
        .zip(labels.iter())
        .filter_map(|(p, l)| l.cluster().map(|c| (*p, c)))
        .collect();
    Ok(ClusterModel::Sample(SampleModel::new(
        clustered,
        assign_threshold,
    )))
}
