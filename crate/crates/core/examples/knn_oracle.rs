//! A simulated location service: exact kNN answers, a hard query budget,
//! and a log of every point it has handed out.

use std::sync::Arc;

use lbs_cluster::{synth, Budget, KnnService, Point2D, SimulatedLbs};

fn main() -> lbs_cluster::Result<()> {
    let data = Arc::new(synth::blobs(3, 500, 4.0, 60.0, 11));
    let mut lbs = SimulatedLbs::new(data.clone(), 10, Budget::new(3))?;

    let region = lbs.region();
    println!("{} points, region {:?}", data.len(), region);

    for q in [
        region.center(),
        region.min,
        Point2D::new(region.max.x, region.min.y),
    ] {
        match lbs.query(q, 10) {
            Ok(answer) => {
                let nearest = &answer.neighbors[0];
                println!(
                    "query ({:.1}, {:.1}): nearest id {} at {:.2}, all points within {:.2} returned",
                    q.x,
                    q.y,
                    nearest.id,
                    nearest.distance,
                    answer.coverage_radius()
                );
            }
            Err(e) => println!("query failed: {e}"),
        }
    }
    // the fourth query is over budget
    let refused = lbs.query(region.center(), 10);
    println!("fourth query: {:?}", refused.map(|a| a.neighbors.len()));
    println!(
        "budget {:?}, {} distinct points seen",
        lbs.budget(),
        lbs.observed().len()
    );
    Ok(())
}
