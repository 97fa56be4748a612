//! Static Hilbert, Z and Peano orders, and an adaptive curve refined
//! only where it is asked to.

use lbs_cluster::sfc::{curve_cell, curve_index, AdaptiveSfc, CellCoord, SfcIndex};
use lbs_cluster::{Curve, Point2D, Rect};

fn main() -> lbs_cluster::Result<()> {
    for curve in [Curve::Hilbert, Curve::Z, Curve::Peano] {
        let order = 1;
        let n = curve.cells_per_axis(order);
        let path: Vec<(u64, u64)> = (0..n * n)
            .map(|i| curve_cell(curve, SfcIndex(i), order).map(|c| (c.col, c.row)))
            .collect::<Result<_, _>>()?;
        println!("{curve} order {order}: {path:?}");
    }
    let idx = curve_index(Curve::Hilbert, CellCoord::new(5, 9, 4))?;
    println!("hilbert order 4: cell (5, 9) is at {}", idx.0);

    let region = Rect::from_bounds(0.0, 0.0, 64.0, 64.0);
    let mut sfc = AdaptiveSfc::new(region, Curve::Hilbert, 4, 8.0)?;
    let hot = Point2D::new(10.0, 50.0);
    while let Ok(leaf) = sfc.to_1d(hot) {
        if sfc.is_terminal(leaf)? {
            break;
        }
        let r = sfc.refine(leaf)?;
        println!(
            "split leaf {} into {} (now {} leaves)",
            r.cell,
            r.fanout,
            sfc.len()
        );
    }
    for i in 0..sfc.len() {
        let rect = sfc.leaf_rect(i)?;
        println!(
            "leaf {i:>2}: side {:>4} at ({}, {})",
            rect.width(),
            rect.min.x,
            rect.min.y
        );
    }
    Ok(())
}
