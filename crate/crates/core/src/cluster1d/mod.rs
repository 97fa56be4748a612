//! Discovery of maximal dense cell ranges in a 1D cell domain through
//! density probes.
//!
//! The search seeds on a random undecided cell. When a seed is dense, the
//! cluster around it is bounded on each side: an exponential search skips
//! empty space towards the seed from the nearest known sparse cell, a
//! binary search pins the boundary when the first occupied cell found is
//! itself sparse, and a `c`-sample test checks the range between boundary
//! and seed. A sparse sample restarts the side from that cell.
//!
//! Domains may grow while the search runs (an adaptive curve splits a leaf
//! into several cells); every in-flight index is translated through the
//! refinement records a probe reports.

mod line;
mod store;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use self::line::LineDomain;
pub use self::store::{CellKnowledge, CellStatus, CellStore, Density, Mark, Occupancy};
use crate::error::BudgetExhausted;
use crate::sfc::Refinement;

/// What a probe concluded about the probed cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// The cell, at its index after any split, has this density.
    Decided(usize, Density),
    /// The cell was too coarse for a verdict and became `fanout` cells
    /// starting at `first`.
    Refined { first: usize, fanout: usize },
}

/// Everything a single probe taught us.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    /// Splits performed during the probe, in order.
    pub refinements: Vec<Refinement>,
    /// Facts about cells, indexed after all refinements.
    pub marks: Vec<Mark>,
    pub outcome: Result<Outcome, BudgetExhausted>,
}

/// A 1D domain of cells whose density can be probed.
pub trait CellDomain {
    /// Current number of cells.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Query `cell`: either decide its density or split it.
    fn probe(&mut self, cell: usize) -> ProbeReport;
}

/// Inclusive range of cells found (or, if `provisional`, partly found)
/// to be dense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseSegment {
    pub lo: usize,
    pub hi: usize,
    /// Budget ran out before both boundaries were verified.
    pub provisional: bool,
}

impl DenseSegment {
    pub fn contains(&self, cell: usize) -> bool {
        (self.lo..=self.hi).contains(&cell)
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(usize),
    EmptyRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleOutcome {
    AllDense,
    FoundSparse(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// Result of a full segment search.
#[derive(Debug, Clone)]
pub struct SegmentRun {
    /// Disjoint segments ordered by position.
    pub segments: Vec<DenseSegment>,
    /// Final knowledge per cell.
    pub statuses: Vec<CellStatus>,
    /// Successful probes issued.
    pub probes: usize,
    /// Whether the run stopped because the budget ran out.
    pub exhausted: bool,
}

type Slot = usize;

/// Dense-segment search over a [`CellDomain`].
pub struct SegmentFinder<'d, D: CellDomain> {
    domain: &'d mut D,
    store: CellStore,
    segments: Vec<DenseSegment>,
    slots: Vec<usize>,
    rng: ChaCha8Rng,
    c: usize,
    probes: usize,
}

impl<'d, D: CellDomain> SegmentFinder<'d, D> {
    pub fn new(domain: &'d mut D, c: usize, seed: u64) -> Self {
        let store = CellStore::new(domain.len());
        Self {
            domain,
            store,
            segments: Vec::new(),
            slots: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            c: c.max(1),
            probes: 0,
        }
    }

    pub fn store(&self) -> &CellStore {
        &self.store
    }

    pub fn segments(&self) -> &[DenseSegment] {
        &self.segments
    }

    pub fn probes(&self) -> usize {
        self.probes
    }

    fn slot(&mut self, v: usize) -> Slot {
        self.slots.push(v);
        self.slots.len() - 1
    }

    fn at(&self, s: Slot) -> usize {
        self.slots[s]
    }

    fn set(&mut self, s: Slot, v: usize) {
        self.slots[s] = v;
    }

    fn status(&self, cell: usize) -> CellStatus {
        self.store.status(cell)
    }

    /// Probe `cell` once and fold the report into the store, the segment
    /// list and every live slot.
    pub fn probe(&mut self, cell: usize) -> Result<Outcome, BudgetExhausted> {
        let report = self.domain.probe(cell);
        for r in &report.refinements {
            self.store.split(r);
            for s in &mut self.slots {
                *s = r.translate(*s);
            }
            for seg in &mut self.segments {
                seg.lo = r.translate(seg.lo);
                if seg.hi >= r.cell {
                    seg.hi += r.fanout - 1;
                }
            }
        }
        debug_assert_eq!(self.store.len(), self.domain.len());
        for m in &report.marks {
            self.store.apply(m);
        }
        let outcome = report.outcome?;
        if let Outcome::Decided(c, d) = outcome {
            self.store.set_density(c, d);
        }
        self.probes += 1;
        Ok(outcome)
    }

    /// Probe `cell`, descending through splits into a random undecided
    /// child until a verdict comes back. A child already known to have
    /// density `want` ends the descent at once; when looking for dense
    /// cells, children known to hold points are preferred. `None` when
    /// every child of a split is already decided otherwise.
    pub fn descend(
        &mut self,
        cell: usize,
        want: Density,
    ) -> Result<Option<(usize, Density)>, BudgetExhausted> {
        let mut idx = cell;
        loop {
            let (first, fanout) = match self.probe(idx)? {
                Outcome::Decided(c, d) => return Ok(Some((c, d))),
                Outcome::Refined { first, fanout } => (first, fanout),
            };
            let kids = first..first + fanout;
            if let Some(k) = kids.clone().find(|&k| self.status(k) == want.into()) {
                return Ok(Some((k, want)));
            }
            let unknown: Vec<usize> = kids
                .filter(|&k| self.status(k) == CellStatus::Unknown)
                .collect();
            if unknown.is_empty() {
                return Ok(None);
            }
            let occupied: Vec<usize> = unknown
                .iter()
                .copied()
                .filter(|&k| self.store.get(k).occupancy == Occupancy::Occupied)
                .collect();
            let pool = if want == Density::Dense && !occupied.is_empty() {
                &occupied
            } else {
                &unknown
            };
            idx = pool[self.rng.random_range(0..pool.len())];
        }
    }

    fn covered(&self) -> Vec<bool> {
        let mut cov = vec![false; self.store.len()];
        for s in &self.segments {
            cov[s.lo..=s.hi].iter_mut().for_each(|c| *c = true);
        }
        cov
    }

    /// Nearest cell strictly left of `q` that bounds a new segment: a known
    /// sparse cell or the end of an existing segment.
    fn barrier_left(&self, q: usize) -> Option<usize> {
        let sparse = (0..q).rev().find(|&x| self.status(x) == CellStatus::Sparse);
        let seg = self
            .segments
            .iter()
            .filter(|s| s.hi < q)
            .map(|s| s.hi)
            .max();
        sparse.max(seg)
    }

    fn barrier_right(&self, q: usize) -> Option<usize> {
        let sparse = (q + 1..self.store.len()).find(|&x| self.status(x) == CellStatus::Sparse);
        let seg = self
            .segments
            .iter()
            .filter(|s| s.lo > q)
            .map(|s| s.lo)
            .min();
        match (sparse, seg) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Walk from just past `barrier` towards `limit` (inclusive) to the
    /// first cell not proven empty, probing it if undecided. Each probe over
    /// empty space proves a span around the query empty, so the probed
    /// positions move away from the barrier exponentially.
    fn seek_occupied(
        &mut self,
        barrier: Option<Slot>,
        limit: Slot,
        walk: Side,
    ) -> Result<SearchOutcome, BudgetExhausted> {
        loop {
            let end = self.at(limit);
            let found = match walk {
                Side::Right => {
                    let start = barrier.map_or(0, |b| self.at(b) + 1);
                    (start..=end).find(|&x| !self.store.is_empty_cell(x))
                }
                Side::Left => {
                    let start = barrier.map_or(self.store.len(), |b| self.at(b));
                    (end..start).rev().find(|&x| !self.store.is_empty_cell(x))
                }
            };
            let Some(x) = found else {
                return Ok(SearchOutcome::EmptyRegion);
            };
            if self.status(x) != CellStatus::Unknown {
                return Ok(SearchOutcome::Found(x));
            }
            self.probe(x)?;
        }
    }

    /// First cell in `(a, b]` that is not proven empty, probing as needed.
    /// `a = None` starts at the domain edge.
    pub fn exponential_search(
        &mut self,
        a: Option<usize>,
        b: usize,
    ) -> Result<SearchOutcome, BudgetExhausted> {
        let base = self.slots.len();
        let barrier = a.map(|a| self.slot(a));
        let limit = self.slot(b);
        let out = self.seek_occupied(barrier, limit, Side::Right);
        self.slots.truncate(base);
        out
    }

    /// Binary search between a sparse `outer` cell and a dense `inner` cell
    /// for a dense cell whose neighbor on the outer side is sparse.
    fn bisect(&mut self, outer: Slot, inner: Slot, side: Side) -> Result<usize, BudgetExhausted> {
        // sparse end and dense end of the bracket
        let sp = self.slot(self.at(outer));
        let de = self.slot(self.at(inner));
        loop {
            let (s, d) = (self.at(sp), self.at(de));
            // tighten with what is already known
            let (s, d) = match side {
                Side::Left => {
                    let s = (s + 1..d)
                        .rev()
                        .find(|&x| self.status(x) == CellStatus::Sparse)
                        .unwrap_or(s);
                    let d = (s + 1..=d)
                        .find(|&x| self.status(x) == CellStatus::Dense)
                        .unwrap_or(d);
                    (s, d)
                }
                Side::Right => {
                    let s = (d + 1..s)
                        .find(|&x| self.status(x) == CellStatus::Sparse)
                        .unwrap_or(s);
                    let d = (d..s)
                        .rev()
                        .find(|&x| self.status(x) == CellStatus::Dense)
                        .unwrap_or(d);
                    (s, d)
                }
            };
            self.set(sp, s);
            self.set(de, d);
            if s.abs_diff(d) == 1 {
                return Ok(d);
            }
            let mid = s.min(d) + s.abs_diff(d) / 2;
            match self.probe(mid)? {
                Outcome::Decided(m, Density::Dense) => self.set(de, m),
                Outcome::Decided(m, Density::Sparse) => self.set(sp, m),
                // the children are undecided; the next round picks a new
                // midpoint among them
                Outcome::Refined { .. } => {}
            }
        }
    }

    /// Left boundary search: `a` sparse, `q` dense, `a < q`. Returns a
    /// dense cell in `(a, q]` whose left neighbor is sparse.
    pub fn boundary_search(&mut self, a: usize, q: usize) -> Result<usize, BudgetExhausted> {
        let outer = self.slot(a);
        let inner = self.slot(q);
        let out = self.bisect(outer, inner, Side::Left);
        self.slots.truncate(outer);
        out
    }

    /// Mirror of [`Self::boundary_search`]: `q` dense, `b` sparse, `q < b`.
    pub fn boundary_search_right(&mut self, q: usize, b: usize) -> Result<usize, BudgetExhausted> {
        let outer = self.slot(b);
        let inner = self.slot(q);
        let out = self.bisect(outer, inner, Side::Right);
        self.slots.truncate(outer);
        out
    }

    fn sample(&mut self, lo: Slot, hi: Slot) -> Result<SampleOutcome, BudgetExhausted> {
        for i in 0..self.c {
            let (l, h) = (self.at(lo), self.at(hi));
            if let Some(s) = (l..=h).find(|&x| self.status(x) == CellStatus::Sparse) {
                return Ok(SampleOutcome::FoundSparse(s));
            }
            let unknown: Vec<usize> = (l..=h)
                .filter(|&x| self.status(x) == CellStatus::Unknown)
                .collect();
            if unknown.is_empty() {
                return Ok(SampleOutcome::AllDense);
            }
            // draw i comes from the i-th of c equal strata when it has an
            // undecided cell, so long sparse stretches cannot be missed
            let span = h - l + 1;
            let (s0, s1) = (l + i * span / self.c, l + (i + 1) * span / self.c);
            let stratum: Vec<usize> = unknown
                .iter()
                .copied()
                .filter(|x| (s0..s1).contains(x))
                .collect();
            let pool = if stratum.is_empty() {
                &unknown
            } else {
                &stratum
            };
            let pick = pool[self.rng.random_range(0..pool.len())];
            if let Some((m, Density::Sparse)) = self.descend(pick, Density::Sparse)? {
                return Ok(SampleOutcome::FoundSparse(m));
            }
        }
        let (l, h) = (self.at(lo), self.at(hi));
        Ok(
            match (l..=h).find(|&x| self.status(x) == CellStatus::Sparse) {
                Some(s) => SampleOutcome::FoundSparse(s),
                None => SampleOutcome::AllDense,
            },
        )
    }

    /// Probe up to `c` random undecided cells of `[lo, hi]`, one per
    /// stratum; stop at the first sparse one.
    pub fn sample_test(&mut self, lo: usize, hi: usize) -> Result<SampleOutcome, BudgetExhausted> {
        let l = self.slot(lo);
        let h = self.slot(hi);
        let out = self.sample(l, h);
        self.slots.truncate(l);
        out
    }

    /// Find the boundary on one side of the dense cell in slot `q`, storing
    /// the current candidate in slot `edge` as it improves.
    fn bound_side(&mut self, q: Slot, edge: Slot, side: Side) -> Result<(), BudgetExhausted> {
        let base = self.slots.len();
        let walk = match side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
        loop {
            let qv = self.at(q);
            let barrier = match side {
                Side::Left => self.barrier_left(qv),
                Side::Right => self.barrier_right(qv),
            };
            let barrier = barrier.map(|b| self.slot(b));
            let found = match self.seek_occupied(barrier, q, walk)? {
                SearchOutcome::Found(x) => x,
                // the seed is dense, so this only happens if it is the edge
                SearchOutcome::EmptyRegion => self.at(q),
            };
            let boundary = if self.status(found) == CellStatus::Dense {
                found
            } else {
                let outer = self.slot(found);
                self.bisect(outer, q, side)?
            };
            self.set(edge, boundary);
            let outcome = match side {
                Side::Left => self.sample(edge, q)?,
                Side::Right => self.sample(q, edge)?,
            };
            self.slots.truncate(base);
            if outcome == SampleOutcome::AllDense {
                return Ok(());
            }
        }
    }

    /// Grow a segment around the dense cell `q` and record it.
    pub fn grow_segment(&mut self, q: usize) -> Result<DenseSegment, BudgetExhausted> {
        self.slots.clear();
        let qs = self.slot(q);
        let lo = self.slot(q);
        let hi = self.slot(q);
        let result = self
            .bound_side(qs, lo, Side::Left)
            .and_then(|_| self.bound_side(qs, hi, Side::Right));
        let seg = DenseSegment {
            lo: self.at(lo),
            hi: self.at(hi),
            provisional: result.is_err(),
        };
        self.slots.clear();
        let pos = self.segments.partition_point(|s| s.lo < seg.lo);
        self.segments.insert(pos, seg);
        result.map(|_| seg)
    }

    /// Next dense seed: a known dense cell outside every segment, or the
    /// first dense result of probing random undecided cells.
    fn next_seed(&mut self) -> Result<Option<usize>, BudgetExhausted> {
        loop {
            let covered = self.covered();
            if let Some(d) =
                (0..self.store.len()).find(|&x| !covered[x] && self.status(x) == CellStatus::Dense)
            {
                return Ok(Some(d));
            }
            let unknown: Vec<usize> = (0..self.store.len())
                .filter(|&x| !covered[x] && self.status(x) == CellStatus::Unknown)
                .collect();
            if unknown.is_empty() {
                return Ok(None);
            }
            let occupied: Vec<usize> = unknown
                .iter()
                .copied()
                .filter(|&x| self.store.get(x).occupancy == Occupancy::Occupied)
                .collect();
            let pool = if occupied.is_empty() {
                &unknown
            } else {
                &occupied
            };
            let pick = pool[self.rng.random_range(0..pool.len())];
            if let Some((m, Density::Dense)) = self.descend(pick, Density::Dense)? {
                return Ok(Some(m));
            }
        }
    }

    /// Search until the budget runs out or every cell is decided or
    /// covered.
    pub fn run(mut self) -> SegmentRun {
        let mut exhausted = false;
        loop {
            let seed = match self.next_seed() {
                Ok(Some(q)) => q,
                Ok(None) => break,
                Err(BudgetExhausted) => {
                    exhausted = true;
                    break;
                }
            };
            if self.grow_segment(seed).is_err() {
                exhausted = true;
                break;
            }
        }
        SegmentRun {
            segments: self.segments,
            statuses: self.store.statuses().collect(),
            probes: self.probes,
            exhausted,
        }
    }
}

/// Convenience wrapper: run a full search over `domain`.
pub fn find_dense_segments<D: CellDomain>(domain: &mut D, c: usize, seed: u64) -> SegmentRun {
    SegmentFinder::new(domain, c, seed).run()
}
