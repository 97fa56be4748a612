//! Cluster a dataset reachable only through kNN queries, then score the
//! result against DBSCAN over the full data.

use std::sync::Arc;

use lbs_cluster::{
    dbscan, hdbscan, synth, Budget, ClusterModel, DbscanParams, HdbscanConfig, KnnService, Scores,
    SimulatedLbs,
};

fn main() -> lbs_cluster::Result<()> {
    let data = Arc::new(synth::noisy(10_000, 1));
    let params = DbscanParams::new(20.0, 14)?;
    let reference = dbscan(&data, &params);
    println!("reference: {} clusters", reference.num_clusters());

    for budget in [200, 400, 600] {
        let mut rands = Vec::new();
        for seed in 0..5 {
            let mut lbs = SimulatedLbs::new(data.clone(), 14, Budget::new(budget))?;
            let config = HdbscanConfig {
                seed,
                ..Default::default()
            };
            let run = hdbscan(&mut lbs, &params, &config)?;
            let (minis, clusters) = (run.mini_clusters, run.clusters);
            let labels = ClusterModel::from(run.model).label_dataset(&data);
            let s = Scores::compare(&labels, &reference)?;
            println!(
                "budget {budget} seed {seed}: {} queries, {minis} segments -> {clusters} clusters, rand {:.3}",
                lbs.budget().used,
                s.rand
            );
            rands.push(s.rand);
        }
        rands.sort_by(f64::total_cmp);
        println!("budget {budget}: median rand {:.3}", rands[2]);
    }
    Ok(())
}
