//! A cluster model is a frozen, query-free labeler. Save it as JSON, load
//! it elsewhere and label new points.

use std::sync::Arc;

use lbs_cluster::{
    hdbscan, synth, Budget, ClusterModel, DbscanParams, HdbscanConfig, KnnService, Point2D,
    SimulatedLbs,
};

fn main() -> lbs_cluster::Result<()> {
    let data = Arc::new(synth::blobs(2, 300, 3.0, 80.0, 5));
    let params = DbscanParams::new(6.0, 8)?;
    let mut lbs = SimulatedLbs::new(data.clone(), 8, Budget::new(150))?;
    let run = hdbscan(&mut lbs, &params, &HdbscanConfig::default())?;
    let model = ClusterModel::from(run.model);

    let dir = std::env::temp_dir().join("lbs-cluster-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("model.json");
    model.save(&path)?;
    let loaded = ClusterModel::load(&path)?;
    println!(
        "saved {} ({} bytes)",
        path.display(),
        std::fs::metadata(&path)?.len()
    );

    let used = lbs.budget().used;
    let probes = [data.point(0), data.point(450), Point2D::new(1e4, 1e4)];
    for p in probes {
        println!("({:>8.1}, {:>8.1}) -> {}", p.x, p.y, loaded.assign(p));
    }
    assert_eq!(loaded.label_dataset(&data), model.label_dataset(&data));
    assert_eq!(lbs.budget().used, used);
    println!(
        "{} clusters, labels identical after reload",
        loaded.num_clusters()
    );
    Ok(())
}
