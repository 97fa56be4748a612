use std::sync::Arc;

use super::*;
use crate::cluster1d::CellStatus;
use crate::geometry::Point2D;
use crate::labels::Label;
use crate::model::ClusterModel;
use crate::oracle::{Budget, Dataset, SimulatedLbs};
use crate::synth;

fn two_blobs() -> Arc<Dataset> {
    // eps = 2, centers 40 apart
    Arc::new(synth::blobs(2, 150, 1.5, 40.0, 3))
}

fn params() -> DbscanParams {
    DbscanParams::new(2.0, 6).unwrap()
}

#[test]
fn two_blobs_give_two_clusters() {
    let data = two_blobs();
    for seed in 0..5 {
        let mut lbs = SimulatedLbs::new(data.clone(), 6, Budget::unlimited()).unwrap();
        let config = HdbscanConfig {
            seed,
            ..Default::default()
        };
        let run = hdbscan(&mut lbs, &params(), &config).unwrap();
        assert_eq!(run.clusters, 2, "seed {seed}");
        assert!(run.clusters <= run.mini_clusters);
        assert!(!run.exhausted);
    }
}

#[test]
fn min_pts_above_k_is_rejected() {
    let mut lbs = SimulatedLbs::new(two_blobs(), 4, Budget::unlimited()).unwrap();
    assert!(hdbscan(&mut lbs, &params(), &HdbscanConfig::default()).is_err());
}

#[test]
fn exhaustion_still_yields_a_model() {
    let data = two_blobs();
    for budget in [1, 2, 5, 17] {
        let mut lbs = SimulatedLbs::new(data.clone(), 6, Budget::new(budget)).unwrap();
        let run = hdbscan(&mut lbs, &params(), &HdbscanConfig::default()).unwrap();
        assert!(run.exhausted);
        assert_eq!(lbs.budget().used, budget);
        let _ = ClusterModel::from(run.model).label_dataset(&data);
    }
}

#[test]
fn assignment_is_query_free_and_respects_sparse_leaves() {
    let data = two_blobs();
    let mut lbs = SimulatedLbs::new(data.clone(), 6, Budget::new(150)).unwrap();
    let run = hdbscan(&mut lbs, &params(), &HdbscanConfig::default()).unwrap();
    let used = lbs.budget().used;
    let model = &run.model;
    for (_, p) in lbs.observed_points() {
        let leaf = model.sfc().to_1d(p).unwrap();
        let label = model.assign(p);
        match model.segments().iter().position(|s| s.contains(leaf)) {
            Some(i) if model.sfc().status(leaf).unwrap() != LeafStatus::Sparse => {
                assert_eq!(label, Label::Cluster(model.final_ids()[i]));
            }
            _ => assert_eq!(label, Label::Noise),
        }
    }
    for leaf in 0..model.sfc().len() {
        if model.sfc().status(leaf).unwrap() == LeafStatus::Sparse {
            assert!(model
                .assign(model.sfc().leaf_center(leaf).unwrap())
                .is_noise());
        }
    }
    assert!(model.assign(Point2D::new(1e6, 1e6)).is_noise());
    assert_eq!(lbs.budget().used, used);
}

#[test]
fn tiny_threshold_keeps_every_mini_cluster() {
    let data = two_blobs();
    let mut lbs = SimulatedLbs::new(data, 6, Budget::unlimited()).unwrap();
    let config = HdbscanConfig {
        merge_threshold: Some(1e-9),
        ..Default::default()
    };
    let run = hdbscan(&mut lbs, &params(), &config).unwrap();
    assert_eq!(run.clusters, run.mini_clusters);
}

#[test]
fn probes_render_verdicts_on_unsplittable_leaves() {
    let data = two_blobs();
    let mut lbs = SimulatedLbs::new(data.clone(), 6, Budget::unlimited()).unwrap();
    let region = AdaptiveSfc::covering_square(lbs.region(), Curve::Hilbert, 2.0);
    let sfc = AdaptiveSfc::new(region, Curve::Hilbert, 4, 2.0).unwrap();
    let mut d = AdaptiveDomain::new(&mut lbs, sfc, 6).unwrap();
    let mut store = crate::cluster1d::CellStore::new(d.len());
    let mut cell = 0;
    while cell < d.len() {
        if store.status(cell) != CellStatus::Unknown {
            cell += 1;
            continue;
        }
        let report = d.probe(cell);
        for r in &report.refinements {
            store.split(r);
        }
        assert_eq!(store.len(), d.len());
        for m in &report.marks {
            store.apply(m);
        }
        let (leaf, density) = match report.outcome.unwrap() {
            Outcome::Decided(leaf, density) => (leaf, density),
            Outcome::Refined { .. } => continue,
        };
        store.set_density(leaf, density);
        let rect = d.sfc().leaf_rect(leaf).unwrap();
        let inside = data
            .points()
            .iter()
            .filter(|p| d.sfc().to_1d(**p).ok() == Some(leaf))
            .count();
        if density == Density::Dense {
            assert!(d.sfc().is_terminal(leaf).unwrap());
            assert!(inside >= 6, "dense leaf {leaf} {rect:?} holds {inside}");
        } else {
            assert!(inside < 6 || d.sfc().is_terminal(leaf).unwrap());
        }
    }
    // every sparse mark on a splittable leaf is exact
    for leaf in 0..d.len() {
        if store.status(leaf) == CellStatus::Sparse && !d.sfc().is_terminal(leaf).unwrap() {
            let inside = data
                .points()
                .iter()
                .filter(|p| d.sfc().to_1d(**p).ok() == Some(leaf))
                .count();
            assert!(inside < 6);
        }
    }
}

/// Probe leaves left to right until every one is decided.
fn decide_all<S: KnnService + ?Sized>(
    d: &mut AdaptiveDomain<'_, S>,
) -> crate::cluster1d::CellStore {
    let mut store = crate::cluster1d::CellStore::new(d.len());
    let mut cell = 0;
    while cell < d.len() {
        if store.status(cell) != CellStatus::Unknown {
            cell += 1;
            continue;
        }
        let report = d.probe(cell);
        for r in &report.refinements {
            store.split(r);
        }
        for m in &report.marks {
            store.apply(m);
        }
        if let Outcome::Decided(leaf, density) = report.outcome.unwrap() {
            store.set_density(leaf, density);
        }
    }
    store
}

#[test]
fn replay_with_knowledge_reproduces_verdicts_cheaply() {
    let data = two_blobs();
    let mut lbs = SimulatedLbs::new(data, 6, Budget::unlimited()).unwrap();
    let region = AdaptiveSfc::covering_square(lbs.region(), Curve::Hilbert, 2.0);
    let fresh = || AdaptiveSfc::new(region, Curve::Hilbert, 4, 2.0).unwrap();

    let mut first = AdaptiveDomain::new(&mut lbs, fresh(), 6).unwrap();
    let before = decide_all(&mut first);
    let (sfc_a, known) = first.into_parts();
    let used = lbs.budget().used;
    assert!(used > 0);
    // only a floor leaf judged sparse outside every ball needs asking again
    let unproven = (0..sfc_a.len())
        .filter(|&i| {
            before.status(i) == CellStatus::Sparse
                && sfc_a.is_terminal(i).unwrap()
                && !known.covers(&sfc_a.leaf_rect(i).unwrap())
        })
        .count();

    let mut again = AdaptiveDomain::with_knowledge(&mut lbs, fresh(), 6, known).unwrap();
    let after = decide_all(&mut again);
    let (sfc_b, _) = again.into_parts();
    assert!(lbs.budget().used - used <= unproven);
    assert!(unproven < used);
    assert_eq!(sfc_a, sfc_b);
    assert_eq!(
        before.statuses().collect::<Vec<_>>(),
        after.statuses().collect::<Vec<_>>()
    );
}

#[test]
fn known_points_settle_dense_floor_leaves() {
    let data = two_blobs();
    let mut lbs = SimulatedLbs::new(data.clone(), 6, Budget::unlimited()).unwrap();
    let center = data.points()[0];
    lbs.query(center, 6).unwrap();
    let used = lbs.budget().used;
    let region = AdaptiveSfc::covering_square(lbs.region(), Curve::Hilbert, 200.0);
    // the floor is the whole region, so the root leaf is terminal
    let sfc = AdaptiveSfc::new(region, Curve::Hilbert, 4, 200.0).unwrap();
    assert!(sfc.is_terminal(0).unwrap());
    let mut d = AdaptiveDomain::new(&mut lbs, sfc, 6).unwrap();
    let report = d.probe(0);
    assert!(matches!(
        report.outcome,
        Ok(Outcome::Decided(0, Density::Dense))
    ));
    assert_eq!(lbs.budget().used, used);
}

#[test]
fn unfinished_fine_pass_keeps_the_coarse_result() {
    let data = two_blobs();
    let coarse_only = HdbscanConfig {
        min_cell_size: Some(4.0),
        coarse_passes: 0,
        ..Default::default()
    };
    let mut lbs = SimulatedLbs::new(data.clone(), 6, Budget::unlimited()).unwrap();
    let coarse = hdbscan(&mut lbs, &params(), &coarse_only).unwrap();
    let cost = lbs.budget().used;

    let two_pass = HdbscanConfig {
        min_cell_size: Some(2.0),
        coarse_passes: 1,
        ..Default::default()
    };
    let mut lbs = SimulatedLbs::new(data.clone(), 6, Budget::new(cost + 1)).unwrap();
    let run = hdbscan(&mut lbs, &params(), &two_pass).unwrap();
    assert!(run.exhausted);
    assert_eq!(run.model.sfc().min_cell_size(), 4.0);
    let labels = |m: AdaptiveModel| ClusterModel::from(m).label_dataset(&data).canonical();
    assert_eq!(labels(run.model), labels(coarse.model));
    assert_eq!(run.clusters, 2);
}
