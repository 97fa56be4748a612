//! HDBSCAN against the sample-then-DBSCAN baseline over a range of query
//! budgets, ten seeds each, written as CSV.

use lbs_cluster::experiment::{sweep, write_sweep_csv, Axis, ExperimentConfig};

fn main() -> lbs_cluster::Result<()> {
    let base = ExperimentConfig::default();
    let values: Vec<String> = ["200", "400", "600"].map(String::from).to_vec();
    let rows = sweep(&base, Axis::Budget, &values)?;
    write_sweep_csv(&rows, std::io::stdout().lock())?;
    Ok(())
}
