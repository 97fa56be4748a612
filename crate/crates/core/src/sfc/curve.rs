//! Static space-filling curves over a `side^order × side^order` grid.
//!
//! All three curves are nested: the index of a cell at order `L + 1`,
//! divided by `side²`, is the index of its parent cell at order `L`. The
//! adaptive curve relies on this to order children consistently.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Curve {
    #[default]
    Hilbert,
    Z,
    Peano,
}

impl Curve {
    /// Cells per axis per level.
    pub fn side(self) -> u64 {
        match self {
            Curve::Hilbert | Curve::Z => 2,
            Curve::Peano => 3,
        }
    }

    pub fn max_order(self) -> u32 {
        match self {
            Curve::Hilbert | Curve::Z => 31,
            Curve::Peano => 20,
        }
    }

    /// Cells per axis at `order`.
    pub fn cells_per_axis(self, order: u32) -> u64 {
        self.side().pow(order)
    }
}

impl std::str::FromStr for Curve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hilbert" => Ok(Curve::Hilbert),
            "z" | "zorder" | "z-order" | "morton" => Ok(Curve::Z),
            "peano" => Ok(Curve::Peano),
            other => Err(Error::InvalidParameter(format!("unknown curve `{other}`"))),
        }
    }
}

impl std::fmt::Display for Curve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Curve::Hilbert => "hilbert",
            Curve::Z => "z",
            Curve::Peano => "peano",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellCoord {
    pub col: u64,
    pub row: u64,
    pub order: u32,
}

impl CellCoord {
    pub const fn new(col: u64, row: u64, order: u32) -> Self {
        Self { col, row, order }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SfcIndex(pub u64);

fn check_order(curve: Curve, order: u32) -> Result<()> {
    if order > curve.max_order() {
        return Err(Error::OutOfRange(format!(
            "order {order} (max {} for {curve})",
            curve.max_order()
        )));
    }
    Ok(())
}

/// Position of `cell` along `curve`.
pub fn curve_index(curve: Curve, cell: CellCoord) -> Result<SfcIndex> {
    check_order(curve, cell.order)?;
    let n = curve.cells_per_axis(cell.order);
    if cell.col >= n || cell.row >= n {
        return Err(Error::OutOfRange(format!(
            "cell ({}, {}) at order {}",
            cell.col, cell.row, cell.order
        )));
    }
    Ok(SfcIndex(match curve {
        Curve::Hilbert => hilbert_index(n, cell.col, cell.row),
        Curve::Z => z_index(cell.col, cell.row, cell.order),
        Curve::Peano => peano_index(cell.col, cell.row, cell.order),
    }))
}

/// Inverse of [`curve_index`].
pub fn curve_cell(curve: Curve, index: SfcIndex, order: u32) -> Result<CellCoord> {
    check_order(curve, order)?;
    let n = curve.cells_per_axis(order);
    if index.0 >= n.saturating_mul(n) {
        return Err(Error::OutOfRange(format!(
            "index {} at order {order}",
            index.0
        )));
    }
    let (col, row) = match curve {
        Curve::Hilbert => hilbert_cell(n, index.0),
        Curve::Z => z_cell(index.0, order),
        Curve::Peano => peano_cell(index.0, order),
    };
    Ok(CellCoord { col, row, order })
}

fn hilbert_rotate(n: u64, x: &mut u64, y: &mut u64, rx: u64, ry: u64) {
    if ry == 0 {
        if rx == 1 {
            *x = n - 1 - *x;
            *y = n - 1 - *y;
        }
        std::mem::swap(x, y);
    }
}

fn hilbert_index(n: u64, mut x: u64, mut y: u64) -> u64 {
    let mut d = 0;
    let mut s = n / 2;
    while s > 0 {
        let rx = u64::from(x & s > 0);
        let ry = u64::from(y & s > 0);
        d += s * s * ((3 * rx) ^ ry);
        hilbert_rotate(n, &mut x, &mut y, rx, ry);
        s /= 2;
    }
    d
}

fn hilbert_cell(n: u64, d: u64) -> (u64, u64) {
    let (mut x, mut y) = (0, 0);
    let mut t = d;
    let mut s = 1;
    while s < n {
        let rx = 1 & (t / 2);
        let ry = 1 & (t ^ rx);
        hilbert_rotate(s, &mut x, &mut y, rx, ry);
        x += s * rx;
        y += s * ry;
        t /= 4;
        s *= 2;
    }
    (x, y)
}

// Column bit at even positions, row bit at odd positions.
fn z_index(x: u64, y: u64, order: u32) -> u64 {
    (0..order).fold(0, |d, i| {
        d | (((x >> i) & 1) << (2 * i)) | (((y >> i) & 1) << (2 * i + 1))
    })
}

fn z_cell(d: u64, order: u32) -> (u64, u64) {
    (0..order).fold((0, 0), |(x, y), i| {
        (
            x | (((d >> (2 * i)) & 1) << i),
            y | (((d >> (2 * i + 1)) & 1) << i),
        )
    })
}

/// Base-3 digits, most significant first.
fn digits3(mut v: u64, order: u32) -> Vec<u64> {
    let mut out = vec![0; order as usize];
    for slot in out.iter_mut().rev() {
        *slot = v % 3;
        v /= 3;
    }
    out
}

#[inline]
fn peano_flip(d: u64, parity: u64) -> u64 {
    if parity % 2 == 1 {
        2 - d
    } else {
        d
    }
}

// Index digits come in pairs (a, b): a selects the column band and b the
// row within it. A column digit is mirrored when the row digits before it
// sum to an odd number; a row digit when the column digits up to and
// including its own pair do.
fn peano_index(x: u64, y: u64, order: u32) -> u64 {
    let xs = digits3(x, order);
    let ys = digits3(y, order);
    let (mut sum_a, mut sum_b) = (0, 0);
    let mut d = 0;
    for j in 0..order as usize {
        let a = peano_flip(xs[j], sum_b);
        sum_a += a;
        let b = peano_flip(ys[j], sum_a);
        sum_b += b;
        d = d * 9 + a * 3 + b;
    }
    d
}

fn peano_cell(d: u64, order: u32) -> (u64, u64) {
    let ds = digits3(d, 2 * order);
    let (mut sum_a, mut sum_b) = (0, 0);
    let (mut x, mut y) = (0, 0);
    for j in 0..order as usize {
        let (a, b) = (ds[2 * j], ds[2 * j + 1]);
        x = x * 3 + peano_flip(a, sum_b);
        sum_a += a;
        y = y * 3 + peano_flip(b, sum_a);
        sum_b += b;
    }
    (x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CURVES: [Curve; 3] = [Curve::Hilbert, Curve::Z, Curve::Peano];

    #[test]
    fn z_order_one() {
        assert_eq!(
            curve_index(Curve::Z, CellCoord::new(1, 1, 1)).unwrap(),
            SfcIndex(3)
        );
        assert_eq!(
            curve_index(Curve::Z, CellCoord::new(1, 0, 1)).unwrap(),
            SfcIndex(1)
        );
        assert_eq!(
            curve_index(Curve::Z, CellCoord::new(0, 1, 1)).unwrap(),
            SfcIndex(2)
        );
    }

    #[test]
    fn hilbert_order_two_is_a_walk() {
        let cells: Vec<CellCoord> = (0..16)
            .map(|d| curve_cell(Curve::Hilbert, SfcIndex(d), 2).unwrap())
            .collect();
        let mut seen: Vec<(u64, u64)> = cells.iter().map(|c| (c.col, c.row)).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 16);
        for w in cells.windows(2) {
            let dist = w[0].col.abs_diff(w[1].col) + w[0].row.abs_diff(w[1].row);
            assert_eq!(dist, 1, "{:?} -> {:?}", w[0], w[1]);
        }
    }

    #[test]
    fn peano_order_one_serpentine() {
        let cells: Vec<(u64, u64)> = (0..9)
            .map(|d| {
                let c = curve_cell(Curve::Peano, SfcIndex(d), 1).unwrap();
                (c.col, c.row)
            })
            .collect();
        assert_eq!(
            cells,
            [
                (0, 0),
                (0, 1),
                (0, 2),
                (1, 2),
                (1, 1),
                (1, 0),
                (2, 0),
                (2, 1),
                (2, 2)
            ]
        );
    }

    #[test]
    fn round_trip_small_orders() {
        for curve in CURVES {
            for order in 0..=4 {
                let n = curve.cells_per_axis(order);
                for col in 0..n {
                    for row in 0..n {
                        let cell = CellCoord::new(col, row, order);
                        let idx = curve_index(curve, cell).unwrap();
                        assert!(idx.0 < n * n);
                        assert_eq!(curve_cell(curve, idx, order).unwrap(), cell);
                    }
                }
            }
        }
    }

    #[test]
    fn curves_are_nested() {
        for curve in CURVES {
            let side = curve.side();
            for order in 1..=3 {
                let n = curve.cells_per_axis(order);
                for col in 0..n {
                    for row in 0..n {
                        let child = curve_index(curve, CellCoord::new(col, row, order)).unwrap();
                        let parent =
                            curve_index(curve, CellCoord::new(col / side, row / side, order - 1))
                                .unwrap();
                        assert_eq!(
                            child.0 / (side * side),
                            parent.0,
                            "{curve} ({col},{row}) order {order}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn peano_is_continuous() {
        for order in 1..=3 {
            let n = Curve::Peano.cells_per_axis(order);
            let mut prev = curve_cell(Curve::Peano, SfcIndex(0), order).unwrap();
            for d in 1..n * n {
                let c = curve_cell(Curve::Peano, SfcIndex(d), order).unwrap();
                assert_eq!(prev.col.abs_diff(c.col) + prev.row.abs_diff(c.row), 1);
                prev = c;
            }
        }
    }

    #[test]
    fn out_of_range() {
        assert!(curve_index(Curve::Hilbert, CellCoord::new(4, 0, 2)).is_err());
        assert!(curve_cell(Curve::Z, SfcIndex(16), 2).is_err());
        assert!(curve_index(Curve::Peano, CellCoord::new(0, 0, 21)).is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!("Hilbert".parse::<Curve>().unwrap(), Curve::Hilbert);
        assert_eq!("morton".parse::<Curve>().unwrap(), Curve::Z);
        assert!("gray".parse::<Curve>().is_err());
    }
}
