//! Two-dimensional clustering: the line search runs over the leaves of an
//! adaptive space-filling curve, and the dense ranges it finds are merged
//! back into 2D clusters by l-distance.

mod merge;

use serde::{Deserialize, Serialize};

pub use self::merge::{l_distance, merge_mini_clusters, DisjointSets, MiniCluster};
use crate::cluster1d::{
    find_dense_segments, CellDomain, Density, Mark, Occupancy, Outcome, ProbeReport, SegmentRun,
};
use crate::dbscan::DbscanParams;
use crate::error::{Error, Result};
use crate::geometry::{Point2D, Rect};
use crate::model::AdaptiveModel;
use crate::oracle::{KnnAnswer, KnnService};
use crate::sfc::{AdaptiveSfc, Curve, LeafStatus};
use std::collections::HashSet;

/// What past answers prove: every returned point, and for each query the
/// ball inside which it returned every point.
#[derive(Debug, Clone, Default)]
pub struct Knowledge {
    ids: HashSet<usize>,
    points: Vec<Point2D>,
    balls: Vec<(Point2D, f64)>,
}

impl Knowledge {
    /// Points the service has already returned, with no coverage.
    pub fn from_service<S: KnnService + ?Sized>(service: &S) -> Self {
        let mut k = Self::default();
        for (&id, &p) in service.observed() {
            k.add_point(id, p);
        }
        k
    }

    fn add_point(&mut self, id: usize, p: Point2D) {
        if self.ids.insert(id) {
            self.points.push(p);
        }
    }

    pub fn add(&mut self, answer: &KnnAnswer) {
        for n in &answer.neighbors {
            self.add_point(n.id, n.point);
        }
        let r = answer.coverage_radius();
        if r > 0.0 {
            self.balls.push((answer.query, r));
        }
    }

    pub fn points(&self) -> &[Point2D] {
        &self.points
    }

    /// Whether some ball holds all of `rect`, so its points are all known.
    pub fn covers(&self, rect: &Rect) -> bool {
        self.balls
            .iter()
            .any(|(c, r)| r.is_infinite() || rect.max_dist2(c) < r * r)
    }

    /// Whether `min_pts` known points lie within `radius` of `center`.
    fn has_within(&self, center: Point2D, radius: f64, min_pts: usize) -> bool {
        let r2 = radius * radius;
        self.points
            .iter()
            .filter(|p| p.dist2(&center) <= r2)
            .nth(min_pts.saturating_sub(1))
            .is_some()
    }
}

/// Leaves of an adaptive curve as a probe-able 1D domain.
///
/// A probe queries the leaf center. When the answer shows the leaf holds
/// `min_pts` points within its circumscribed circle and the leaf is above
/// the resolution floor, the leaf is split instead of decided, so every
/// verdict is rendered on a leaf that needs no further split.
///
/// Past answers are kept as [`Knowledge`]. When it already settles the
/// split test or the verdict for a leaf, the probe issues no query.
pub struct AdaptiveDomain<'s, S: KnnService + ?Sized> {
    service: &'s mut S,
    sfc: AdaptiveSfc,
    min_pts: usize,
    known: Knowledge,
}

impl<'s, S: KnnService + ?Sized> AdaptiveDomain<'s, S> {
    pub fn new(service: &'s mut S, sfc: AdaptiveSfc, min_pts: usize) -> Result<Self> {
        let known = Knowledge::from_service(service);
        Self::with_knowledge(service, sfc, min_pts, known)
    }

    pub fn with_knowledge(
        service: &'s mut S,
        sfc: AdaptiveSfc,
        min_pts: usize,
        known: Knowledge,
    ) -> Result<Self> {
        if min_pts == 0 || min_pts > service.k() {
            return Err(Error::InvalidParameter(format!(
                "min_pts = {min_pts} must be in 1..={} (the service k)",
                service.k()
            )));
        }
        Ok(Self {
            service,
            sfc,
            min_pts,
            known,
        })
    }

    pub fn sfc(&self) -> &AdaptiveSfc {
        &self.sfc
    }

    pub fn knowledge(&self) -> &Knowledge {
        &self.known
    }

    pub fn into_parts(self) -> (AdaptiveSfc, Knowledge) {
        (self.sfc, self.known)
    }

    /// Known points inside `leaf`.
    fn count_in(&self, leaf: usize, rect: &Rect) -> usize {
        self.known
            .points
            .iter()
            .filter(|p| rect.min_dist2(p) == 0.0 && self.sfc.to_1d(**p).ok() == Some(leaf))
            .count()
    }

    /// Density and occupancy of `leaf` as far as knowledge proves them.
    fn mark(&self, leaf: usize) -> Result<Option<Mark>> {
        let rect = self.sfc.leaf_rect(leaf)?;
        let count = self.count_in(leaf, &rect);
        let covered = self.known.covers(&rect);
        let density = if covered && count < self.min_pts {
            Some(Density::Sparse)
        } else if count >= self.min_pts && self.sfc.is_terminal(leaf)? {
            Some(Density::Dense)
        } else {
            None
        };
        let occupancy = if count > 0 {
            Some(Occupancy::Occupied)
        } else if covered {
            Some(Occupancy::Empty)
        } else {
            None
        };
        Ok((density.is_some() || occupancy.is_some()).then_some(Mark {
            cell: leaf,
            density,
            occupancy,
        }))
    }

    fn marks(&self, leaves: impl IntoIterator<Item = usize>) -> Result<Vec<Mark>> {
        let mut out = Vec::new();
        for leaf in leaves {
            out.extend(self.mark(leaf)?);
        }
        Ok(out)
    }

    /// Leaves the answer can say something about.
    fn touched(&self, answer: &KnnAnswer) -> Vec<usize> {
        let r = answer.coverage_radius();
        if r.is_finite() {
            self.sfc
                .leaves_near(answer.query, r)
                .into_iter()
                .map(|(i, _)| i)
                .collect()
        } else {
            (0..self.sfc.len()).collect()
        }
    }

    fn split(&mut self, cell: usize, report: &mut ProbeReport) -> Result<Outcome> {
        let r = self.sfc.refine(cell)?;
        report.refinements.push(r);
        report.marks.extend(self.marks(r.cell..r.cell + r.fanout)?);
        Ok(Outcome::Refined {
            first: r.cell,
            fanout: r.fanout,
        })
    }

    fn probe_inner(&mut self, cell: usize, report: &mut ProbeReport) -> Result<Outcome> {
        let rect = self.sfc.leaf_rect(cell)?;
        let terminal = self.sfc.is_terminal(cell)?;
        if !terminal
            && self
                .known
                .has_within(rect.center(), rect.half_diagonal(), self.min_pts)
        {
            return self.split(cell, report);
        }
        if let Some(
            m @ Mark {
                density: Some(d), ..
            },
        ) = self.mark(cell)?
        {
            report.marks.push(m);
            return Ok(Outcome::Decided(cell, d));
        }
        let answer = self.service.query(rect.center(), self.service.k())?;
        self.known.add(&answer);
        if self.sfc.needs_split(cell, &answer, self.min_pts)? {
            report.marks = self.marks(self.touched(&answer))?;
            return self.split(cell, report);
        }
        report.marks = self.marks(self.touched(&answer))?;
        let density = if self.count_in(cell, &rect) >= self.min_pts {
            Density::Dense
        } else {
            Density::Sparse
        };
        Ok(Outcome::Decided(cell, density))
    }
}

impl<S: KnnService + ?Sized> CellDomain for AdaptiveDomain<'_, S> {
    fn len(&self) -> usize {
        self.sfc.len()
    }

    fn probe(&mut self, cell: usize) -> ProbeReport {
        let mut report = ProbeReport {
            refinements: Vec::new(),
            marks: Vec::new(),
            outcome: Err(crate::error::BudgetExhausted),
        };
        report.outcome = match self.probe_inner(cell, &mut report) {
            Ok(v) => Ok(v),
            Err(Error::BudgetExhausted(e)) => Err(e),
            Err(e) => panic!("probe of leaf {cell} failed: {e}"),
        };
        report
    }
}

/// Tuning knobs for [`hdbscan`]. `None` fields resolve from the DBSCAN
/// parameters: cell floor `eps`, `l = max(1, min_pts / 2)`, merge
/// threshold `2·eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HdbscanConfig {
    pub curve: Curve,
    pub fanout: usize,
    pub min_cell_size: Option<f64>,
    pub c: usize,
    pub l: Option<usize>,
    pub merge_threshold: Option<f64>,
    /// Coarser searches run before the main one, each at twice the floor
    /// of the next. A finer search that runs out of budget leaves the
    /// last complete one in place.
    pub coarse_passes: u32,
    pub seed: u64,
}

impl Default for HdbscanConfig {
    fn default() -> Self {
        Self {
            curve: Curve::Hilbert,
            fanout: 4,
            min_cell_size: None,
            c: 4,
            l: None,
            merge_threshold: None,
            coarse_passes: 1,
            seed: 0,
        }
    }
}

impl HdbscanConfig {
    pub fn resolved_min_cell_size(&self, params: &DbscanParams) -> f64 {
        self.min_cell_size.unwrap_or(params.eps)
    }

    pub fn resolved_l(&self, params: &DbscanParams) -> usize {
        self.l.unwrap_or((params.min_pts / 2).max(1))
    }

    pub fn resolved_merge_threshold(&self, params: &DbscanParams) -> f64 {
        self.merge_threshold.unwrap_or(2.0 * params.eps)
    }
}

/// What a clustering run produced besides the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HdbscanRun {
    pub model: AdaptiveModel,
    /// Mini-clusters before merging.
    pub mini_clusters: usize,
    /// Final clusters after merging.
    pub clusters: usize,
    pub probes: usize,
    pub exhausted: bool,
}

/// Cluster the service's data within its query budget.
pub fn hdbscan<S: KnnService + ?Sized>(
    service: &mut S,
    params: &DbscanParams,
    config: &HdbscanConfig,
) -> Result<HdbscanRun> {
    params.validate()?;
    if params.min_pts > service.k() {
        return Err(Error::InvalidParameter(format!(
            "min_pts = {} exceeds the service k = {}",
            params.min_pts,
            service.k()
        )));
    }
    let min_cell = config.resolved_min_cell_size(params);
    let l = config.resolved_l(params);
    let threshold = config.resolved_merge_threshold(params);
    if l == 0 || !(threshold > 0.0) {
        return Err(Error::InvalidParameter(
            "l and merge threshold must be positive".into(),
        ));
    }
    let mut known = Knowledge::from_service(service);
    let mut kept: Option<(AdaptiveSfc, SegmentRun)> = None;
    let mut probes = 0;
    for pass in (0..=config.coarse_passes).rev() {
        let floor = min_cell * f64::from(1u32 << pass.min(16));
        let region = AdaptiveSfc::covering_square(service.region(), config.curve, floor);
        let sfc = AdaptiveSfc::new(region, config.curve, config.fanout, floor)?;
        let mut domain = AdaptiveDomain::with_knowledge(service, sfc, params.min_pts, known)?;
        let run = find_dense_segments(&mut domain, config.c, config.seed.wrapping_add(pass as u64));
        let (sfc, k) = domain.into_parts();
        known = k;
        probes += run.probes;
        let exhausted = run.exhausted;
        // a finer pass cut short replaces only a run that was cut short too
        if kept.as_ref().is_none_or(|(_, r)| r.exhausted || !exhausted) {
            kept = Some((sfc, run));
        }
        if exhausted {
            break;
        }
    }
    let (mut sfc, run) = kept.expect("at least one pass runs");
    let statuses: Vec<LeafStatus> = run.statuses.iter().map(|&s| s.into()).collect();
    sfc.set_statuses(&statuses)?;

    let mut members: Vec<Vec<(usize, Point2D)>> = vec![Vec::new(); run.segments.len()];
    for (id, p) in service.observed_points() {
        let Ok(leaf) = sfc.to_1d(p) else { continue };
        let pos = run.segments.partition_point(|s| s.hi < leaf);
        if run.segments.get(pos).is_some_and(|s| s.contains(leaf)) {
            members[pos].push((id, p));
        }
    }
    let minis: Vec<MiniCluster> = run
        .segments
        .iter()
        .zip(members)
        .map(|(s, m)| MiniCluster::new(*s, m))
        .collect();
    let final_ids = merge_mini_clusters(&minis, l, threshold)?;
    let model = AdaptiveModel::new(sfc, run.segments.clone(), final_ids, l, threshold)?;
    Ok(HdbscanRun {
        mini_clusters: minis.len(),
        clusters: model.num_clusters(),
        model,
        probes,
        exhausted: service.budget().is_exhausted(),
    })
}

#[cfg(test)]
mod tests;
