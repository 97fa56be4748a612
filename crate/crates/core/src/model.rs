//! Query-free cluster assignment functions and their JSON persistence.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cluster1d::DenseSegment;
use crate::error::{Error, Result};
use crate::geometry::Point2D;
use crate::labels::{Label, Labeling};
use crate::oracle::{Dataset, KdTree};
use crate::sfc::{AdaptiveSfc, LeafStatus};

/// Labels points through the adaptive curve: a point belongs to the final
/// cluster of the dense segment its leaf falls in, or is noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveModel {
    sfc: AdaptiveSfc,
    segments: Vec<DenseSegment>,
    final_ids: Vec<u32>,
    l: usize,
    merge_threshold: f64,
}

impl AdaptiveModel {
    pub fn new(
        sfc: AdaptiveSfc,
        segments: Vec<DenseSegment>,
        final_ids: Vec<u32>,
        l: usize,
        merge_threshold: f64,
    ) -> Result<Self> {
        if segments.len() != final_ids.len() {
            return Err(Error::LengthMismatch(segments.len(), final_ids.len()));
        }
        for w in segments.windows(2) {
            if w[0].hi >= w[1].lo {
                return Err(Error::InvalidParameter(
                    "segments must be sorted and disjoint".into(),
                ));
            }
        }
        if segments.last().is_some_and(|s| s.hi >= sfc.len()) {
            return Err(Error::OutOfRange("segment beyond the last leaf".into()));
        }
        Ok(Self {
            sfc,
            segments,
            final_ids,
            l,
            merge_threshold,
        })
    }

    pub fn sfc(&self) -> &AdaptiveSfc {
        &self.sfc
    }

    pub fn segments(&self) -> &[DenseSegment] {
        &self.segments
    }

    /// Final cluster id of each segment.
    pub fn final_ids(&self) -> &[u32] {
        &self.final_ids
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn merge_threshold(&self) -> f64 {
        self.merge_threshold
    }

    pub fn num_clusters(&self) -> usize {
        self.final_ids.iter().max().map_or(0, |&m| m as usize + 1)
    }

    pub fn assign(&self, p: Point2D) -> Label {
        let Ok(leaf) = self.sfc.to_1d(p) else {
            return Label::Noise;
        };
        if self.sfc.status(leaf).ok() == Some(LeafStatus::Sparse) {
            return Label::Noise;
        }
        let pos = self.segments.partition_point(|s| s.hi < leaf);
        match self.segments.get(pos) {
            Some(s) if s.contains(leaf) => Label::Cluster(self.final_ids[pos]),
            _ => Label::Noise,
        }
    }
}

/// Labels a point with the cluster of its nearest clustered sample, if
/// that sample lies within `threshold`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "SampleRepr", into = "SampleRepr")]
pub struct SampleModel {
    points: Vec<Point2D>,
    labels: Vec<u32>,
    threshold: f64,
    index: KdTree,
}

#[derive(Serialize, Deserialize)]
struct SampleRepr {
    points: Vec<Point2D>,
    labels: Vec<u32>,
    threshold: f64,
}

impl From<SampleRepr> for SampleModel {
    fn from(r: SampleRepr) -> Self {
        Self::new(r.points.into_iter().zip(r.labels).collect(), r.threshold)
    }
}

impl From<SampleModel> for SampleRepr {
    fn from(m: SampleModel) -> Self {
        SampleRepr {
            points: m.points,
            labels: m.labels,
            threshold: m.threshold,
        }
    }
}

impl PartialEq for SampleModel {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
            && self.labels == other.labels
            && self.threshold == other.threshold
    }
}

impl SampleModel {
    pub fn new(clustered: Vec<(Point2D, u32)>, threshold: f64) -> Self {
        let (points, labels): (Vec<Point2D>, Vec<u32>) = clustered.into_iter().unzip();
        let index = KdTree::build(&points);
        Self {
            points,
            labels,
            threshold,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn num_clusters(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m as usize + 1)
    }

    pub fn assign(&self, p: Point2D) -> Label {
        match self.index.nearest(&p, 1).first() {
            Some(&(id, _, d2)) if d2.sqrt() <= self.threshold => Label::Cluster(self.labels[id]),
            _ => Label::Noise,
        }
    }
}

/// A frozen cluster-assignment function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClusterModel {
    Adaptive(AdaptiveModel),
    Sample(SampleModel),
}

impl ClusterModel {
    /// Cluster of `p`, or noise. Never touches a query service.
    pub fn assign(&self, p: Point2D) -> Label {
        match self {
            ClusterModel::Adaptive(m) => m.assign(p),
            ClusterModel::Sample(m) => m.assign(p),
        }
    }

    pub fn assign_all<'a>(&self, points: impl IntoIterator<Item = &'a Point2D>) -> Labeling {
        points.into_iter().map(|p| self.assign(*p)).collect()
    }

    pub fn label_dataset(&self, dataset: &Dataset) -> Labeling {
        self.assign_all(dataset.points())
    }

    pub fn num_clusters(&self) -> usize {
        match self {
            ClusterModel::Adaptive(m) => m.num_clusters(),
            ClusterModel::Sample(m) => m.num_clusters(),
        }
    }

    pub fn to_writer<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer(w, self)?;
        Ok(())
    }

    pub fn from_reader<R: Read>(r: R) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.to_writer(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(f))
    }
}

impl From<AdaptiveModel> for ClusterModel {
    fn from(m: AdaptiveModel) -> Self {
        ClusterModel::Adaptive(m)
    }
}

impl From<SampleModel> for ClusterModel {
    fn from(m: SampleModel) -> Self {
        ClusterModel::Sample(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::sfc::Curve;

    fn model() -> AdaptiveModel {
        let region = Rect::from_bounds(0.0, 0.0, 8.0, 8.0);
        let mut sfc = AdaptiveSfc::new(region, Curve::Hilbert, 4, 1.0).unwrap();
        sfc.refine(0).unwrap();
        let mut st = vec![LeafStatus::Unknown; sfc.len()];
        st[0] = LeafStatus::Dense;
        st[1] = LeafStatus::Dense;
        st[2] = LeafStatus::Sparse;
        st[5] = LeafStatus::Dense;
        sfc.set_statuses(&st).unwrap();
        let segs = vec![
            DenseSegment {
                lo: 0,
                hi: 1,
                provisional: false,
            },
            DenseSegment {
                lo: 5,
                hi: 5,
                provisional: true,
            },
        ];
        AdaptiveModel::new(sfc, segs, vec![0, 1], 1, 2.0).unwrap()
    }

    #[test]
    fn adaptive_assignment() {
        let m = model();
        let s = m.sfc().clone();
        for leaf in 0..s.len() {
            let c = s.leaf_center(leaf).unwrap();
            let want = match leaf {
                0 | 1 => Label::Cluster(0),
                5 => Label::Cluster(1),
                _ => Label::Noise,
            };
            assert_eq!(m.assign(c), want, "leaf {leaf}");
        }
        assert_eq!(m.assign(Point2D::new(-1.0, 0.0)), Label::Noise);
        assert_eq!(m.num_clusters(), 2);
    }

    #[test]
    fn rejects_overlapping_segments() {
        let m = model();
        let segs = vec![
            DenseSegment {
                lo: 0,
                hi: 2,
                provisional: false,
            },
            DenseSegment {
                lo: 2,
                hi: 3,
                provisional: false,
            },
        ];
        assert!(AdaptiveModel::new(m.sfc().clone(), segs, vec![0, 1], 1, 1.0).is_err());
    }

    #[test]
    fn sample_model_threshold() {
        let m = SampleModel::new(
            vec![(Point2D::new(0.0, 0.0), 0), (Point2D::new(10.0, 0.0), 1)],
            2.0,
        );
        assert_eq!(m.assign(Point2D::new(1.0, 0.0)), Label::Cluster(0));
        assert_eq!(m.assign(Point2D::new(9.0, 1.0)), Label::Cluster(1));
        assert_eq!(m.assign(Point2D::new(5.0, 0.0)), Label::Noise);
        assert!(SampleModel::new(Vec::new(), 1.0)
            .assign(Point2D::new(0.0, 0.0))
            .is_noise());
    }

    #[test]
    fn json_round_trip() {
        let models = [
            ClusterModel::from(model()),
            ClusterModel::from(SampleModel::new(vec![(Point2D::new(1.0, 1.0), 0)], 3.0)),
        ];
        for m in models {
            let mut buf = Vec::new();
            m.to_writer(&mut buf).unwrap();
            let back = ClusterModel::from_reader(buf.as_slice()).unwrap();
            assert_eq!(back, m);
            for i in 0..50 {
                let p = Point2D::new(i as f64 * 0.17, 8.0 - i as f64 * 0.13);
                assert_eq!(back.assign(p), m.assign(p));
            }
        }
    }
}
