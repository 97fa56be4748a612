//! Exact DBSCAN over a full dataset, the ground truth the query-limited
//! algorithms are scored against.

use lbs_cluster::{dbscan, synth, DbscanParams};

fn main() -> lbs_cluster::Result<()> {
    let params = DbscanParams::new(20.0, 14)?;
    let data = synth::noisy(10_000, 1);
    let labels = dbscan(&data, &params);
    println!(
        "noisy: {} points, {} clusters, {} noise",
        data.len(),
        labels.num_clusters(),
        labels.noise_count()
    );

    let moons = synth::moons(1_000, 0.05, 100.0, 3);
    let labels = dbscan(&moons, &DbscanParams::new(8.0, 5)?);
    let mut sizes = vec![0usize; labels.num_clusters()];
    for l in labels.iter() {
        if let Some(c) = l.cluster() {
            sizes[c as usize] += 1;
        }
    }
    println!(
        "moons: cluster sizes {sizes:?}, {} noise",
        labels.noise_count()
    );
    Ok(())
}
