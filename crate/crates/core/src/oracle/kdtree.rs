//! Static 2-d tree for exact k-nearest-neighbor search.
//!
//! Entries are stored in an implicit layout: the median of each slice is the
//! splitting node, left and right halves are its subtrees. Results are
//! ordered by squared distance, then by id.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geometry::Point2D;

#[derive(Debug, Clone, Copy)]
struct Entry {
    point: Point2D,
    id: usize,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist2: f64,
    id: usize,
    point: Point2D,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct KdTree {
    entries: Vec<Entry>,
}

impl KdTree {
    /// Index `points`, using positions as ids.
    pub fn build(points: &[Point2D]) -> Self {
        Self::build_with_ids(points.iter().copied().enumerate())
    }

    pub fn build_with_ids(items: impl IntoIterator<Item = (usize, Point2D)>) -> Self {
        let mut entries: Vec<Entry> = items
            .into_iter()
            .map(|(id, point)| Entry { point, id })
            .collect();
        build_rec(&mut entries, 0);
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The `k` nearest entries to `q` as `(id, point, squared distance)`.
    pub fn nearest(&self, q: &Point2D, k: usize) -> Vec<(usize, Point2D, f64)> {
        if k == 0 || self.entries.is_empty() {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(0, self.entries.len(), 0, q, k, &mut heap);
        let mut found = heap.into_vec();
        found.sort_unstable();
        found
            .into_iter()
            .map(|c| (c.id, c.point, c.dist2))
            .collect()
    }

    fn search(
        &self,
        lo: usize,
        hi: usize,
        depth: usize,
        q: &Point2D,
        k: usize,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let e = self.entries[mid];
        let cand = Candidate {
            dist2: e.point.dist2(q),
            id: e.id,
            point: e.point,
        };
        if heap.len() < k {
            heap.push(cand);
        } else if cand < *heap.peek().expect("heap is full") {
            heap.pop();
            heap.push(cand);
        }

        let axis = depth % 2;
        let diff = q.coord(axis) - e.point.coord(axis);
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(near.0, near.1, depth + 1, q, k, heap);
        if heap.len() < k || diff * diff <= heap.peek().expect("heap is full").dist2 {
            self.search(far.0, far.1, depth + 1, q, k, heap);
        }
    }
}

fn build_rec(entries: &mut [Entry], depth: usize) {
    if entries.len() <= 1 {
        return;
    }
    let axis = depth % 2;
    let mid = entries.len() / 2;
    entries.select_nth_unstable_by(mid, |a, b| {
        a.point
            .coord(axis)
            .total_cmp(&b.point.coord(axis))
            .then(a.id.cmp(&b.id))
    });
    let (left, rest) = entries.split_at_mut(mid);
    build_rec(left, depth + 1);
    build_rec(&mut rest[1..], depth + 1);
}
