//! Quadtree-backed space-filling curve whose leaves are refined on demand.
//!
//! Leaves are numbered in curve order; that numbering is the 1D cell
//! domain seen by the line clustering stage. Refining a leaf replaces its
//! single 1D cell with `fanout` consecutive cells and shifts every later
//! index by `fanout - 1`.

use serde::{Deserialize, Serialize};

use super::curve::{curve_index, CellCoord, Curve};
use crate::error::{Error, Result};
use crate::geometry::{Point2D, Rect};
use crate::oracle::KnnAnswer;

/// What is known about a leaf's density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum LeafStatus {
    #[default]
    Unknown,
    Sparse,
    Dense,
}

impl LeafStatus {
    fn code(self) -> char {
        match self {
            LeafStatus::Unknown => 'U',
            LeafStatus::Sparse => 'S',
            LeafStatus::Dense => 'D',
        }
    }
}

/// Record of one leaf split: 1D cell `cell` became `fanout` cells starting
/// at `cell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refinement {
    pub cell: usize,
    pub fanout: usize,
}

impl Refinement {
    /// New index of a cell that was at `index` before the split. The split
    /// cell itself maps to its first child.
    pub fn translate(&self, index: usize) -> usize {
        if index > self.cell {
            index + self.fanout - 1
        } else {
            index
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Node {
    level: u32,
    col: u64,
    row: u64,
    parent: Option<usize>,
    children: Vec<usize>,
    leaves: usize,
    status: LeafStatus,
}

impl Node {
    fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SfcRepr", into = "SfcRepr")]
pub struct AdaptiveSfc {
    region: Rect,
    curve: Curve,
    levels_per_split: u32,
    min_cell_size: f64,
    nodes: Vec<Node>,
}

/// Allowed fanouts: 4, 16, 64 for the binary curves and 9 for Peano.
pub fn levels_for_fanout(curve: Curve, fanout: usize) -> Result<u32> {
    let levels = match (curve, fanout) {
        (Curve::Peano, 9) => 1,
        (Curve::Hilbert | Curve::Z, 4) => 1,
        (Curve::Hilbert | Curve::Z, 16) => 2,
        (Curve::Hilbert | Curve::Z, 64) => 3,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "fanout {fanout} is not supported for the {curve} curve"
            )))
        }
    };
    Ok(levels)
}

const SIZE_TOLERANCE: f64 = 1e-9;

impl AdaptiveSfc {
    /// Tree over `region` with its root already split into `fanout` leaves.
    pub fn new(region: Rect, curve: Curve, fanout: usize, min_cell_size: f64) -> Result<Self> {
        if region.is_degenerate() {
            return Err(Error::InvalidParameter(
                "region must have positive area".into(),
            ));
        }
        if !(min_cell_size > 0.0) {
            return Err(Error::InvalidParameter(
                "min_cell_size must be positive".into(),
            ));
        }
        let levels_per_split = levels_for_fanout(curve, fanout)?;
        let mut sfc = Self {
            region,
            curve,
            levels_per_split,
            min_cell_size,
            nodes: vec![Node {
                level: 0,
                col: 0,
                row: 0,
                parent: None,
                children: Vec::new(),
                leaves: 1,
                status: LeafStatus::Unknown,
            }],
        };
        sfc.split_node(0)?;
        Ok(sfc)
    }

    /// Root square of side `min_cell_size · side^d` centered on `bbox`, for
    /// the smallest `d` that covers it, so the finest leaves are exactly
    /// `min_cell_size` wide.
    pub fn covering_square(bbox: Rect, curve: Curve, min_cell_size: f64) -> Rect {
        let extent = bbox.width().max(bbox.height()).max(min_cell_size);
        let mut side = min_cell_size;
        while side < extent * (1.0 + 1e-12) {
            side *= curve.side() as f64;
        }
        bbox.square_around(side)
    }

    pub fn region(&self) -> Rect {
        self.region
    }

    pub fn curve(&self) -> Curve {
        self.curve
    }

    pub fn fanout(&self) -> usize {
        (self.curve.side().pow(2 * self.levels_per_split)) as usize
    }

    pub fn min_cell_size(&self) -> f64 {
        self.min_cell_size
    }

    /// Number of leaves, i.e. the size of the 1D domain.
    pub fn len(&self) -> usize {
        self.nodes[0].leaves
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn node_rect(&self, node: &Node) -> Rect {
        let n = self.curve.cells_per_axis(node.level);
        let w = self.region.width() / n as f64;
        let h = self.region.height() / n as f64;
        let x0 = self.region.min.x + node.col as f64 * w;
        let y0 = self.region.min.y + node.row as f64 * h;
        let x1 = if node.col + 1 == n {
            self.region.max.x
        } else {
            self.region.min.x + (node.col + 1) as f64 * w
        };
        let y1 = if node.row + 1 == n {
            self.region.max.y
        } else {
            self.region.min.y + (node.row + 1) as f64 * h
        };
        Rect::from_bounds(x0, y0, x1, y1)
    }

    fn node_side(&self, node: &Node) -> f64 {
        let n = self.curve.cells_per_axis(node.level) as f64;
        (self.region.width() / n).max(self.region.height() / n)
    }

    fn can_split(&self, node: &Node) -> bool {
        node.level + self.levels_per_split <= self.curve.max_order()
            && self.node_side(node) > self.min_cell_size * (1.0 + SIZE_TOLERANCE)
    }

    fn split_node(&mut self, id: usize) -> Result<()> {
        let (level, col, row) = {
            let n = &self.nodes[id];
            (n.level, n.col, n.row)
        };
        let child_level = level + self.levels_per_split;
        if child_level > self.curve.max_order() {
            return Err(Error::AtResolutionFloor(id));
        }
        let span = self.curve.side().pow(self.levels_per_split);
        let mut kids: Vec<(u64, u64, u64)> = Vec::with_capacity((span * span) as usize);
        for i in 0..span {
            for j in 0..span {
                let cell = CellCoord::new(col * span + i, row * span + j, child_level);
                kids.push((curve_index(self.curve, cell)?.0, cell.col, cell.row));
            }
        }
        kids.sort_unstable();
        let fanout = kids.len();
        let mut ids = Vec::with_capacity(fanout);
        for (_, c, r) in kids {
            ids.push(self.nodes.len());
            self.nodes.push(Node {
                level: child_level,
                col: c,
                row: r,
                parent: Some(id),
                children: Vec::new(),
                leaves: 1,
                status: LeafStatus::Unknown,
            });
        }
        self.nodes[id].children = ids;
        self.nodes[id].status = LeafStatus::Unknown;
        // ancestors gain fanout - 1 leaves (the root gains fanout on creation)
        let gained = fanout - 1;
        self.nodes[id].leaves = fanout;
        let mut up = self.nodes[id].parent;
        while let Some(p) = up {
            self.nodes[p].leaves += gained;
            up = self.nodes[p].parent;
        }
        Ok(())
    }

    fn leaf_node(&self, index: usize) -> Result<usize> {
        if index >= self.len() {
            return Err(Error::OutOfRange(format!("leaf {index} of {}", self.len())));
        }
        let mut id = 0;
        let mut rest = index;
        while !self.nodes[id].is_leaf() {
            let mut next = None;
            for &c in &self.nodes[id].children {
                let l = self.nodes[c].leaves;
                if rest < l {
                    next = Some(c);
                    break;
                }
                rest -= l;
            }
            id = next.expect("leaf counts are consistent");
        }
        Ok(id)
    }

    /// 1D index of the leaf containing `p`.
    pub fn to_1d(&self, p: Point2D) -> Result<usize> {
        if !self.region.contains(&p) {
            return Err(Error::OutsideRegion { x: p.x, y: p.y });
        }
        let mut id = 0;
        let mut index = 0;
        while !self.nodes[id].is_leaf() {
            let child_level = self.nodes[id].level + self.levels_per_split;
            let n = self.curve.cells_per_axis(child_level);
            let fx = (p.x - self.region.min.x) / self.region.width();
            let fy = (p.y - self.region.min.y) / self.region.height();
            let col = ((fx * n as f64).floor() as u64).min(n - 1);
            let row = ((fy * n as f64).floor() as u64).min(n - 1);
            let mut next = None;
            for &c in &self.nodes[id].children {
                let child = &self.nodes[c];
                if child.col == col && child.row == row {
                    next = Some(c);
                    break;
                }
                index += child.leaves;
            }
            id = next.expect("point lies in one child");
        }
        Ok(index)
    }

    pub fn leaf_rect(&self, index: usize) -> Result<Rect> {
        Ok(self.node_rect(&self.nodes[self.leaf_node(index)?]))
    }

    /// Where a query for leaf `index` is issued.
    pub fn leaf_center(&self, index: usize) -> Result<Point2D> {
        Ok(self.leaf_rect(index)?.center())
    }

    /// Longer edge of the leaf.
    pub fn leaf_side(&self, index: usize) -> Result<f64> {
        Ok(self.node_side(&self.nodes[self.leaf_node(index)?]))
    }

    pub fn leaf_cell(&self, index: usize) -> Result<CellCoord> {
        let n = &self.nodes[self.leaf_node(index)?];
        Ok(CellCoord::new(n.col, n.row, n.level))
    }

    /// Whether the leaf is at the resolution floor and can no longer split.
    pub fn is_terminal(&self, index: usize) -> Result<bool> {
        Ok(!self.can_split(&self.nodes[self.leaf_node(index)?]))
    }

    pub fn status(&self, index: usize) -> Result<LeafStatus> {
        Ok(self.nodes[self.leaf_node(index)?].status)
    }

    pub fn set_status(&mut self, index: usize, status: LeafStatus) -> Result<()> {
        let id = self.leaf_node(index)?;
        self.nodes[id].status = status;
        Ok(())
    }

    /// Statuses of all leaves in 1D order.
    pub fn statuses(&self) -> Vec<LeafStatus> {
        let mut out = Vec::with_capacity(self.len());
        self.visit_leaves(0, &mut |_, n| out.push(n.status));
        out
    }

    /// Overwrite all leaf statuses, in 1D order.
    pub fn set_statuses(&mut self, statuses: &[LeafStatus]) -> Result<()> {
        if statuses.len() != self.len() {
            return Err(Error::LengthMismatch(statuses.len(), self.len()));
        }
        let mut ids = Vec::with_capacity(self.len());
        self.visit_leaves(0, &mut |id, _| ids.push(id));
        for (id, s) in ids.into_iter().zip(statuses) {
            self.nodes[id].status = *s;
        }
        Ok(())
    }

    fn visit_leaves(&self, id: usize, f: &mut impl FnMut(usize, &Node)) {
        let node = &self.nodes[id];
        if node.is_leaf() {
            f(id, node);
        } else {
            for &c in &node.children {
                self.visit_leaves(c, f);
            }
        }
    }

    /// Split leaf `index` into `fanout` children.
    pub fn refine(&mut self, index: usize) -> Result<Refinement> {
        let id = self.leaf_node(index)?;
        if !self.can_split(&self.nodes[id]) {
            return Err(Error::AtResolutionFloor(index));
        }
        self.split_node(id)?;
        Ok(Refinement {
            cell: index,
            fanout: self.fanout(),
        })
    }

    /// Leaves whose rectangle comes within `radius` of `center`, as
    /// `(index, rect)` in 1D order.
    pub fn leaves_near(&self, center: Point2D, radius: f64) -> Vec<(usize, Rect)> {
        let mut out = Vec::new();
        let r2 = radius * radius;
        self.collect_near(0, 0, &center, r2, &mut out);
        out
    }

    fn collect_near(
        &self,
        id: usize,
        offset: usize,
        c: &Point2D,
        r2: f64,
        out: &mut Vec<(usize, Rect)>,
    ) {
        let node = &self.nodes[id];
        let rect = self.node_rect(node);
        if rect.min_dist2(c) > r2 {
            return;
        }
        if node.is_leaf() {
            out.push((offset, rect));
            return;
        }
        let mut off = offset;
        for &ch in &node.children {
            self.collect_near(ch, off, c, r2, out);
            off += self.nodes[ch].leaves;
        }
    }

    /// Whether a query answer issued at the center of leaf `index` shows the
    /// leaf must be split: the `min_pts`-th neighbor lies within the
    /// circumscribed circle and the leaf is above the resolution floor.
    pub fn needs_split(&self, index: usize, answer: &KnnAnswer, min_pts: usize) -> Result<bool> {
        let node = &self.nodes[self.leaf_node(index)?];
        let rect = self.node_rect(node);
        let c = rect.center();
        if answer.query.dist(&c) > SIZE_TOLERANCE * (1.0 + self.node_side(node)) {
            return Err(Error::AnswerMismatch(index));
        }
        if answer.k_requested < min_pts {
            return Err(Error::InvalidParameter(format!(
                "answer has k = {} < min_pts = {min_pts}",
                answer.k_requested
            )));
        }
        let within = answer
            .rank_distance(min_pts)
            .is_some_and(|d| d <= rect.half_diagonal());
        Ok(within && self.can_split(node))
    }

    fn preorder(&self) -> String {
        let mut s = String::with_capacity(self.nodes.len());
        self.preorder_rec(0, &mut s);
        s
    }

    fn preorder_rec(&self, id: usize, s: &mut String) {
        let node = &self.nodes[id];
        if node.is_leaf() {
            s.push(node.status.code());
        } else {
            s.push('N');
            for &c in &node.children {
                self.preorder_rec(c, s);
            }
        }
    }
}

/// JSON layout: the tree as a preorder string where `N` is an internal
/// node and `U`/`S`/`D` are leaves with their status.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SfcRepr {
    region: Rect,
    curve: Curve,
    fanout: usize,
    min_cell_size: f64,
    preorder: String,
}

impl From<AdaptiveSfc> for SfcRepr {
    fn from(s: AdaptiveSfc) -> Self {
        SfcRepr {
            region: s.region,
            curve: s.curve,
            fanout: s.fanout(),
            min_cell_size: s.min_cell_size,
            preorder: s.preorder(),
        }
    }
}

impl TryFrom<SfcRepr> for AdaptiveSfc {
    type Error = Error;

    fn try_from(r: SfcRepr) -> Result<Self> {
        let levels_per_split = levels_for_fanout(r.curve, r.fanout)?;
        let mut sfc = AdaptiveSfc {
            region: r.region,
            curve: r.curve,
            levels_per_split,
            min_cell_size: r.min_cell_size,
            nodes: vec![Node {
                level: 0,
                col: 0,
                row: 0,
                parent: None,
                children: Vec::new(),
                leaves: 1,
                status: LeafStatus::Unknown,
            }],
        };
        let codes: Vec<char> = r.preorder.chars().collect();
        let mut pos = 0;
        sfc.rebuild(0, &codes, &mut pos)?;
        if pos != codes.len() {
            return Err(Error::InvalidParameter(
                "trailing data in preorder string".into(),
            ));
        }
        Ok(sfc)
    }
}

impl AdaptiveSfc {
    fn rebuild(&mut self, id: usize, codes: &[char], pos: &mut usize) -> Result<()> {
        let code = *codes
            .get(*pos)
            .ok_or_else(|| Error::InvalidParameter("truncated preorder string".into()))?;
        *pos += 1;
        let status = match code {
            'N' => {
                self.split_node(id)?;
                let kids = self.nodes[id].children.clone();
                for c in kids {
                    self.rebuild(c, codes, pos)?;
                }
                return Ok(());
            }
            'U' => LeafStatus::Unknown,
            'S' => LeafStatus::Sparse,
            'D' => LeafStatus::Dense,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "bad preorder code `{other}`"
                )))
            }
        };
        self.nodes[id].status = status;
        Ok(())
    }
}
