//! Pair-counting agreement between two labelings. Noise counts as one
//! more cluster.

use lbs_cluster::metrics::pair_counts_of;
use lbs_cluster::{Label, Labeling, Scores};

fn main() -> lbs_cluster::Result<()> {
    let truth: Labeling = [0, 0, 0, 1, 1, 1, -1, -1]
        .into_iter()
        .map(Label::from)
        .collect();
    let guesses = [
        ("identical", vec![0, 0, 0, 1, 1, 1, -1, -1]),
        ("renamed", vec![5, 5, 5, 2, 2, 2, -1, -1]),
        ("merged", vec![0, 0, 0, 0, 0, 0, -1, -1]),
        ("all noise", vec![-1; 8]),
    ];
    for (name, raw) in guesses {
        let guess: Labeling = raw.into_iter().map(Label::from).collect();
        let pc = pair_counts_of(&guess, &truth)?;
        let s = Scores::compare(&guess, &truth)?;
        println!(
            "{name:>10}: {pc:?}  rand {:.3}  jaccard {:.3}  fm {:.3}",
            s.rand, s.jaccard, s.fowlkes_mallows
        );
    }
    Ok(())
}
