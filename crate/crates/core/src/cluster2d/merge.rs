use serde::{Deserialize, Serialize};

use crate::cluster1d::DenseSegment;
use crate::error::{Error, Result};
use crate::geometry::{Point2D, Rect};

/// A dense 1D segment together with the observed points that fall in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiniCluster {
    pub segment: DenseSegment,
    pub members: Vec<(usize, Point2D)>,
}

impl MiniCluster {
    pub fn new(segment: DenseSegment, members: Vec<(usize, Point2D)>) -> Self {
        Self { segment, members }
    }

    pub fn bounding_box(&self) -> Option<Rect> {
        Rect::bounding(self.members.iter().map(|(_, p)| p))
    }
}

/// Mean of the `l` smallest distances between a point of `a` and a point
/// of `b` (all pairs when there are fewer than `l`).
pub fn l_distance(a: &[Point2D], b: &[Point2D], l: usize) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCluster);
    }
    if l == 0 {
        return Err(Error::InvalidParameter("l must be at least 1".into()));
    }
    let mut d: Vec<f64> = a
        .iter()
        .flat_map(|p| b.iter().map(move |q| p.dist(q)))
        .collect();
    let take = l.min(d.len());
    if take < d.len() {
        d.select_nth_unstable_by(take - 1, f64::total_cmp);
    }
    let head = &mut d[..take];
    head.sort_unstable_by(f64::total_cmp);
    Ok(head.iter().sum::<f64>() / take as f64)
}

/// Union-find over `0..n` with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    /// Component label per element, numbered by first appearance.
    pub fn labels(&mut self) -> Vec<u32> {
        let n = self.parent.len();
        let mut ids = vec![u32::MAX; n];
        let mut out = Vec::with_capacity(n);
        let mut next = 0;
        for x in 0..n {
            let r = self.find(x);
            if ids[r] == u32::MAX {
                ids[r] = next;
                next += 1;
            }
            out.push(ids[r]);
        }
        out
    }
}

/// Final cluster id per mini-cluster: connected components of the graph
/// joining minis whose l-distance is below `threshold`. Ids are ordered by
/// each component's lowest mini index. Minis without members stay alone.
pub fn merge_mini_clusters(minis: &[MiniCluster], l: usize, threshold: f64) -> Result<Vec<u32>> {
    if l == 0 {
        return Err(Error::InvalidParameter("l must be at least 1".into()));
    }
    if !(threshold > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "merge threshold must be positive, got {threshold}"
        )));
    }
    let points: Vec<Vec<Point2D>> = minis
        .iter()
        .map(|m| m.members.iter().map(|(_, p)| *p).collect())
        .collect();
    let boxes: Vec<Option<Rect>> = minis.iter().map(MiniCluster::bounding_box).collect();
    let mut sets = DisjointSets::new(minis.len());
    for i in 0..minis.len() {
        let Some(bi) = boxes[i] else { continue };
        for j in i + 1..minis.len() {
            let Some(bj) = boxes[j] else { continue };
            if box_gap(&bi, &bj) >= threshold || sets.find(i) == sets.find(j) {
                continue;
            }
            if l_distance(&points[i], &points[j], l)? < threshold {
                sets.union(i, j);
            }
        }
    }
    Ok(sets.labels())
}

fn box_gap(a: &Rect, b: &Rect) -> f64 {
    let dx = (a.min.x - b.max.x).max(b.min.x - a.max.x).max(0.0);
    let dy = (a.min.y - b.max.y).max(b.min.y - a.max.y).max(0.0);
    dx.hypot(dy)
}
