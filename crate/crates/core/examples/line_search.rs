//! Dense-range discovery on a line of cells: exponential search over
//! empty space, binary search for boundaries, and a c-sample check that a
//! range is dense throughout.

use std::sync::Arc;

use lbs_cluster::{find_dense_segments, Budget, Dataset, LineDomain, Point2D, SimulatedLbs};

fn main() -> lbs_cluster::Result<()> {
    // three runs of points along y = 0 with a sprinkling in between
    let mut points = Vec::new();
    for (start, end, step) in [
        (100.0, 180.0, 0.4),
        (400.0, 420.0, 0.25),
        (700.0, 900.0, 0.5),
    ] {
        let mut x = start;
        while x < end {
            points.push(Point2D::new(x, 0.0));
            x += step;
        }
    }
    points.extend((0..40).map(|i| Point2D::new(5.0 + 25.0 * i as f64, 0.0)));
    let data = Arc::new(Dataset::new(points)?);

    let mut lbs = SimulatedLbs::new(data.clone(), 10, Budget::unlimited())?;
    let mut domain = LineDomain::new(&mut lbs, 0.0, 10.0, 100, 10)?;
    let run = find_dense_segments(&mut domain, 3, 42);
    for s in &run.segments {
        let (lo, _) = domain.cell_bounds(s.lo);
        let (_, hi) = domain.cell_bounds(s.hi);
        println!("dense cells {}..={}  x in [{lo}, {hi})", s.lo, s.hi);
    }
    println!("{} probes for {} cells", run.probes, run.statuses.len());
    Ok(())
}
