use std::collections::BTreeMap;

use super::{CellDomain, Density, Mark, Occupancy, Outcome, ProbeReport};
use crate::error::{Error, Result};
use crate::geometry::Point2D;
use crate::oracle::{KnnAnswer, KnnService};

/// Native 1D domain: the data lies on the x axis and is cut into cells of
/// fixed width starting at `origin`. Cell `i` covers
/// `[origin + i·width, origin + (i+1)·width)`.
pub struct LineDomain<'s, S: KnnService + ?Sized> {
    service: &'s mut S,
    origin: f64,
    width: f64,
    cells: usize,
    min_pts: usize,
}

impl<'s, S: KnnService + ?Sized> LineDomain<'s, S> {
    pub fn new(
        service: &'s mut S,
        origin: f64,
        width: f64,
        cells: usize,
        min_pts: usize,
    ) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cell width must be positive, got {width}"
            )));
        }
        if cells == 0 {
            return Err(Error::InvalidParameter(
                "domain needs at least one cell".into(),
            ));
        }
        if min_pts == 0 || min_pts > service.k() {
            return Err(Error::InvalidParameter(format!(
                "min_pts = {min_pts} must be in 1..={}",
                service.k()
            )));
        }
        Ok(Self {
            service,
            origin,
            width,
            cells,
            min_pts,
        })
    }

    /// Cells of `width` covering the service region's x extent.
    pub fn covering(service: &'s mut S, width: f64, min_pts: usize) -> Result<Self> {
        let region = service.region();
        let span = region.width();
        let cells = if width > 0.0 {
            (span / width).floor() as usize + 1
        } else {
            0
        };
        Self::new(service, region.min.x, width, cells, min_pts)
    }

    pub fn cell_of(&self, x: f64) -> Option<usize> {
        let i = ((x - self.origin) / self.width).floor();
        (i >= 0.0 && (i as usize) < self.cells).then_some(i as usize)
    }

    pub fn cell_bounds(&self, cell: usize) -> (f64, f64) {
        let lo = self.origin + cell as f64 * self.width;
        (lo, lo + self.width)
    }

    pub fn service(&self) -> &S {
        self.service
    }

    fn marks(&self, answer: &KnnAnswer) -> Vec<Mark> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for n in &answer.neighbors {
            if let Some(c) = self.cell_of(n.point.x) {
                *counts.entry(c).or_default() += 1;
            }
        }
        let r = answer.coverage_radius();
        let cx = answer.query.x;
        let first = self.cell_of((cx - r).max(self.origin)).unwrap_or(0);
        let last = self
            .cell_of((cx + r).min(self.origin + self.cells as f64 * self.width))
            .unwrap_or(self.cells - 1);
        let mut marks = Vec::new();
        for cell in first..=last {
            let (lo, hi) = self.cell_bounds(cell);
            let count = counts.get(&cell).copied().unwrap_or(0);
            let covered = lo > cx - r && hi <= cx + r;
            let density = if count >= self.min_pts {
                Some(Density::Dense)
            } else if covered {
                Some(Density::Sparse)
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
            if density.is_some() || occupancy.is_some() {
                marks.push(Mark {
                    cell,
                    density,
                    occupancy,
                });
            }
        }
        marks
    }
}

impl<S: KnnService + ?Sized> CellDomain for LineDomain<'_, S> {
    fn len(&self) -> usize {
        self.cells
    }

    fn probe(&mut self, cell: usize) -> ProbeReport {
        let (lo, hi) = self.cell_bounds(cell);
        let center = Point2D::new((lo + hi) / 2.0, 0.0);
        let k = self.service.k();
        match self.service.query(center, k) {
            Ok(answer) => {
                let inside = answer
                    .neighbors
                    .iter()
                    .filter(|n| self.cell_of(n.point.x) == Some(cell))
                    .count();
                let density = if inside >= self.min_pts {
                    Density::Dense
                } else {
                    Density::Sparse
                };
                ProbeReport {
                    refinements: Vec::new(),
                    marks: self.marks(&answer),
                    outcome: Ok(Outcome::Decided(cell, density)),
                }
            }
            Err(e) => ProbeReport {
                refinements: Vec::new(),
                marks: Vec::new(),
                outcome: Err(e),
            },
        }
    }
}
