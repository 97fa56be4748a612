//! Dense ranges of a space-filling curve cut 2D clusters into fragments.
//! Fragments whose closest observed pairs are near each other are joined.

use lbs_cluster::cluster2d::{l_distance, merge_mini_clusters, MiniCluster};
use lbs_cluster::{DenseSegment, Point2D};

fn fragment(lo: usize, pts: &[(f64, f64)]) -> MiniCluster {
    let seg = DenseSegment {
        lo,
        hi: lo,
        provisional: false,
    };
    let members = pts
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| (lo * 100 + i, Point2D::new(x, y)))
        .collect();
    MiniCluster::new(seg, members)
}

fn main() -> lbs_cluster::Result<()> {
    let minis = vec![
        fragment(0, &[(0.0, 0.0), (1.0, 0.5), (2.0, 0.0)]),
        fragment(2, &[(3.0, 0.2), (4.0, 0.0)]),
        fragment(5, &[(5.5, 0.0), (6.0, 1.0)]),
        fragment(9, &[(30.0, 30.0), (31.0, 30.5)]),
    ];
    for (i, a) in minis.iter().enumerate() {
        for b in &minis[i + 1..] {
            let pa: Vec<Point2D> = a.members.iter().map(|m| m.1).collect();
            let pb: Vec<Point2D> = b.members.iter().map(|m| m.1).collect();
            println!(
                "l-distance {}-{}: {:.2}",
                a.segment.lo,
                b.segment.lo,
                l_distance(&pa, &pb, 2)?
            );
        }
    }
    let ids = merge_mini_clusters(&minis, 2, 2.0)?;
    println!("final ids: {ids:?}");
    Ok(())
}
