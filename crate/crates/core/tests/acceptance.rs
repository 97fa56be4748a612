//! End-to-end acceptance checks, one line per criterion.
//!
//! Every expected value here comes from a brute-force computation in this
//! file, never from the library code under test.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use lbs_cluster::cluster1d::find_dense_segments;
use lbs_cluster::experiment::{self, Axis, ExperimentConfig, Report};
use lbs_cluster::metrics::{pair_counts, PairCounts};
use lbs_cluster::sfc::{curve_cell, curve_index, AdaptiveSfc, CellCoord, SfcIndex};
use lbs_cluster::{
    dbscan_points, hdbscan, synth, Budget, ClusterModel, Curve, Dataset, DbscanParams,
    HdbscanConfig, KnnService, Label, Labeling, LineDomain, Point2D, Rect, Scores, SimulatedLbs,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within(limit: Duration, started: Instant) -> (bool, String) {
    let t = started.elapsed();
    (
        t <= limit,
        format!("{:.2}s of {}s", t.as_secs_f64(), limit.as_secs()),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

// ---- 1: pair-counting metrics -------------------------------------------

fn brute_pairs(p: &[Label], c: &[Label]) -> PairCounts {
    let mut pc = PairCounts::default();
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            match (p[i] == p[j], c[i] == c[j]) {
                (true, true) => pc.a += 1,
                (false, false) => pc.b += 1,
                (true, false) => pc.c += 1,
                (false, true) => pc.d += 1,
            }
        }
    }
    pc
}

fn metric_oracle() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut mismatches = 0;
    for _ in 0..200 {
        let n = rng.random_range(0..=50);
        let kinds = rng.random_range(1..6);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<Label> {
            (0..n)
                .map(|_| Label::from(rng.random_range(-1..kinds as i64)))
                .collect()
        };
        let (p, c) = (draw(&mut rng), draw(&mut rng));
        let expected = brute_pairs(&p, &c);
        let got = pair_counts(&p, &c).unwrap();
        if got != expected {
            mismatches += 1;
        }
        let (a, b, cc, d) = (
            expected.a as f64,
            expected.b as f64,
            expected.c as f64,
            expected.d as f64,
        );
        let total = a + b + cc + d;
        let rand = if total == 0.0 { 1.0 } else { (a + b) / total };
        let jac = if a == 0.0 { 0.0 } else { a / (a + cc + d) };
        let fm = if a == 0.0 {
            0.0
        } else {
            a / ((a + cc) * (a + d)).sqrt()
        };
        let s = Scores::compare(&Labeling::new(p), &Labeling::new(c)).unwrap();
        worst = worst
            .max((s.rand - rand).abs())
            .max((s.jaccard - jac).abs())
            .max((s.fowlkes_mallows - fm).abs());
    }
    let (fast, t) = within(Duration::from_secs(5), started);
    verdict(
        mismatches == 0 && worst <= 1e-12 && fast,
        format!("{mismatches} count mismatches, max index error {worst:.1e}, {t}"),
    )
}

// ---- 2: kNN oracle --------------------------------------------------------

fn knn_oracle() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pts: Vec<Point2D> = (0..1000)
        .map(|_| Point2D::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)))
        .collect();
    let data = Arc::new(Dataset::new(pts.clone()).unwrap());
    let k_max = 25;
    let mut lbs = SimulatedLbs::new(data, k_max, Budget::unlimited()).unwrap();
    let mut bad = 0;
    for _ in 0..1000 {
        let q = Point2D::new(
            rng.random_range(-10.0..110.0),
            rng.random_range(-10.0..110.0),
        );
        let k = rng.random_range(1..=k_max);
        let mut all: Vec<(f64, usize)> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| (p.dist2(&q), i))
            .collect();
        all.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let answer = lbs.query(q, k).unwrap();
        let same = answer.neighbors.len() == k
            && answer
                .neighbors
                .iter()
                .zip(&all)
                .all(|(n, &(d2, id))| n.id == id && n.distance == d2.sqrt());
        if !same {
            bad += 1;
        }
    }
    let (fast, t) = within(Duration::from_secs(5), started);
    verdict(
        bad == 0 && fast,
        format!("{bad} of 1000 answers differ, {t}"),
    )
}

// ---- 3: reference DBSCAN --------------------------------------------------

/// DBSCAN by definition: core graph components, borders to the lowest-id
/// core in reach.
fn closure_dbscan(pts: &[Point2D], eps: f64, min_pts: usize) -> Vec<Label> {
    let n = pts.len();
    let near = |i: usize, j: usize| pts[i].dist2(&pts[j]) <= eps * eps;
    let core: Vec<bool> = (0..n)
        .map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts)
        .collect();
    let mut comp = vec![usize::MAX; n];
    for s in 0..n {
        if !core[s] || comp[s] != usize::MAX {
            continue;
        }
        comp[s] = s;
        let mut frontier = vec![s];
        while let Some(i) = frontier.pop() {
            for j in 0..n {
                if core[j] && comp[j] == usize::MAX && near(i, j) {
                    comp[j] = s;
                    frontier.push(j);
                }
            }
        }
    }
    (0..n)
        .map(|i| {
            let root = if core[i] {
                Some(comp[i])
            } else {
                (0..n).find(|&j| core[j] && near(i, j)).map(|j| comp[j])
            };
            root.map_or(Label::Noise, |r| Label::Cluster(r as u32))
        })
        .collect()
}

fn reference_dbscan() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 1.0f64;
    let mut unequal = 0;
    for _ in 0..50 {
        let n = rng.random_range(1..=500);
        let centers: Vec<(f64, f64)> = (0..rng.random_range(1..5))
            .map(|_| (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)))
            .collect();
        let pts: Vec<Point2D> = (0..n)
            .map(|_| {
                if rng.random_bool(0.2) {
                    Point2D::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0))
                } else {
                    let (cx, cy) = centers[rng.random_range(0..centers.len())];
                    Point2D::new(
                        cx + rng.random_range(-8.0..8.0),
                        cy + rng.random_range(-8.0..8.0),
                    )
                }
            })
            .collect();
        let eps = rng.random_range(1.0..6.0);
        let min_pts = rng.random_range(1..10);
        let expected = Labeling::new(closure_dbscan(&pts, eps, min_pts));
        let got = dbscan_points(&pts, &DbscanParams::new(eps, min_pts).unwrap());
        if got.canonical() != expected.canonical() {
            unequal += 1;
        }
        worst = worst.min(Scores::compare(&got, &expected).unwrap().rand);
    }
    let (fast, t) = within(Duration::from_secs(30), started);
    verdict(
        unequal == 0 && worst == 1.0 && fast,
        format!("{unequal} of 50 instances differ, min rand {worst}, {t}"),
    )
}

// ---- 4: space-filling curves -----------------------------------------------

fn sfc_properties() -> Verdict {
    let started = Instant::now();
    let mut failures = Vec::new();
    for curve in [Curve::Hilbert, Curve::Z, Curve::Peano] {
        for order in 0..=5u32 {
            let side = curve.cells_per_axis(order);
            let mut seen = vec![false; (side * side) as usize];
            for col in 0..side {
                for row in 0..side {
                    let cell = CellCoord::new(col, row, order);
                    let idx = curve_index(curve, cell).unwrap();
                    let back = curve_cell(curve, idx, order).unwrap();
                    if back != cell
                        || idx.0 >= side * side
                        || std::mem::replace(&mut seen[idx.0 as usize], true)
                    {
                        failures.push(format!("{curve} order {order} cell ({col},{row})"));
                    }
                }
            }
        }
    }
    for order in 1..=6u32 {
        let side = Curve::Hilbert.cells_per_axis(order);
        for i in 1..side * side {
            let a = curve_cell(Curve::Hilbert, SfcIndex(i - 1), order).unwrap();
            let b = curve_cell(Curve::Hilbert, SfcIndex(i), order).unwrap();
            if a.col.abs_diff(b.col) + a.row.abs_diff(b.row) != 1 {
                failures.push(format!("hilbert order {order} step {i}"));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..100 {
        let curve = [Curve::Hilbert, Curve::Z, Curve::Peano][trial % 3];
        let fanout = if curve == Curve::Peano {
            9
        } else {
            [4, 16][rng.random_range(0..2)]
        };
        let x0 = rng.random_range(-50.0..50.0);
        let y0 = rng.random_range(-50.0..50.0);
        let side = rng.random_range(10.0..200.0);
        let region = Rect::from_bounds(x0, y0, x0 + side, y0 + side);
        let mut sfc = AdaptiveSfc::new(region, curve, fanout, side / 200.0).unwrap();
        let probes: Vec<Point2D> = (0..200)
            .map(|_| {
                Point2D::new(
                    x0 + rng.random_range(0.0..side),
                    y0 + rng.random_range(0.0..side),
                )
            })
            .collect();
        for _ in 0..rng.random_range(1..15) {
            let splittable: Vec<usize> = (0..sfc.len())
                .filter(|&i| !sfc.is_terminal(i).unwrap())
                .collect();
            if splittable.is_empty() {
                break;
            }
            let before: Vec<usize> = probes.iter().map(|p| sfc.to_1d(*p).unwrap()).collect();
            let r = sfc
                .refine(splittable[rng.random_range(0..splittable.len())])
                .unwrap();
            for (p, &old) in probes.iter().zip(&before) {
                let new = sfc.to_1d(*p).unwrap();
                let ok = if old == r.cell {
                    (r.cell..r.cell + r.fanout).contains(&new)
                } else {
                    new == r.translate(old)
                };
                if !ok {
                    failures.push(format!("trial {trial}: order broken at {p:?}"));
                }
            }
        }
        // tiling: areas add up, leaves are disjoint, every probe lands in
        // the rectangle of its leaf
        let rects: Vec<Rect> = (0..sfc.len()).map(|i| sfc.leaf_rect(i).unwrap()).collect();
        let area: f64 = rects.iter().map(Rect::area).sum();
        if (area - region.area()).abs() > 1e-9 * region.area() {
            failures.push(format!(
                "trial {trial}: leaf area {area} vs {}",
                region.area()
            ));
        }
        for (i, a) in rects.iter().enumerate() {
            for b in &rects[i + 1..] {
                let w = a.max.x.min(b.max.x) - a.min.x.max(b.min.x);
                let h = a.max.y.min(b.max.y) - a.min.y.max(b.min.y);
                if w > 1e-9 && h > 1e-9 {
                    failures.push(format!("trial {trial}: leaves overlap"));
                }
            }
        }
        for p in &probes {
            let leaf = sfc.to_1d(*p).unwrap();
            if rects[leaf].min_dist2(p) > 0.0 {
                failures.push(format!("trial {trial}: {p:?} outside leaf {leaf}"));
            }
        }
    }
    let (fast, t) = within(Duration::from_secs(10), started);
    let first = failures
        .first()
        .map(|f| format!(" (first: {f})"))
        .unwrap_or_default();
    verdict(
        failures.is_empty() && fast,
        format!("{} failures{first}, {t}", failures.len()),
    )
}

// ---- 5: exact 1D recovery within the cost bound ----------------------------

const COST_C: f64 = 8.0;

struct LineCase {
    counts: Vec<usize>,
    h: usize,
}

fn line_case(rng: &mut ChaCha8Rng, min_pts: usize, noisy: bool) -> LineCase {
    let cells = rng.random_range(100..=1000);
    let h = rng.random_range(1..=5);
    let mut counts = vec![0usize; cells];
    // h runs in h equal slots, each run away from the slot edges
    let slot = cells / h;
    for r in 0..h {
        let len = rng.random_range(1..=(slot / 3).max(1));
        let lo = r * slot + rng.random_range(1..=slot - len - 1);
        for c in &mut counts[lo..lo + len] {
            *c = rng.random_range(min_pts..=min_pts + 6);
        }
    }
    if noisy {
        for _ in 0..cells / 10 {
            let i = rng.random_range(0..cells);
            if counts[i] == 0 {
                counts[i] = rng.random_range(1..min_pts);
            }
        }
    }
    LineCase { counts, h }
}

fn brute_dense_runs(counts: &[usize], min_pts: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        if c < min_pts {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.1 + 1 == i => last.1 = i,
            _ => out.push((i, i)),
        }
    }
    out
}

fn line_points(counts: &[usize], width: f64) -> Arc<Dataset> {
    let mut pts = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        for j in 0..c {
            pts.push(Point2D::new(
                width * (i as f64 + (j as f64 + 0.5) / c as f64),
                0.0,
            ));
        }
    }
    Arc::new(Dataset::new(pts).unwrap())
}

fn line_recovery() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (min_pts, width) = (5, 10.0);
    let c = HdbscanConfig::default().c;
    let mut wrong = 0;
    let mut over = 0;
    let mut worst_ratio = 0.0f64;
    for i in 0..100 {
        let case = line_case(&mut rng, min_pts, i % 2 == 1);
        let n = case.counts.len();
        let mut lbs = SimulatedLbs::new(
            line_points(&case.counts, width),
            min_pts,
            Budget::unlimited(),
        )
        .unwrap();
        let mut domain = LineDomain::new(&mut lbs, 0.0, width, n, min_pts).unwrap();
        let run = find_dense_segments(&mut domain, c, i as u64);
        let got: Vec<(usize, usize)> = run.segments.iter().map(|s| (s.lo, s.hi)).collect();
        if got != brute_dense_runs(&case.counts, min_pts) || run.exhausted {
            wrong += 1;
        }
        let bound = COST_C * case.h as f64 * (c as f64 + (n as f64).log2());
        let used = lbs.budget().used as f64;
        worst_ratio = worst_ratio.max(used / bound);
        if used > bound {
            over += 1;
        }
    }
    let (fast, t) = within(Duration::from_secs(60), started);
    verdict(
        wrong == 0 && over == 0 && fast,
        format!(
            "{wrong} of 100 domains differ, {over} over the bound (max cost/bound {worst_ratio:.2}), {t}"
        ),
    )
}

// ---- 6-8: quality, trends and the baseline ---------------------------------

fn quality_config(budget: Option<usize>) -> ExperimentConfig {
    ExperimentConfig {
        budget,
        baseline: budget.is_some(),
        ..ExperimentConfig::default()
    }
}

fn run_reports() -> Vec<(usize, Report)> {
    [200, 400, 600]
        .into_iter()
        .map(|b| (b, experiment::run(&quality_config(Some(b))).unwrap()))
        .collect()
}

fn end_to_end(reports: &[(usize, Report)], started: Instant) -> Verdict {
    let rand_at = |b: usize| {
        reports
            .iter()
            .find(|r| r.0 == b)
            .unwrap()
            .1
            .hdbscan
            .summary
            .rand
            .median
    };
    let (r200, r600) = (rand_at(200), rand_at(600));
    let (fast, t) = within(Duration::from_secs(600), started);
    verdict(
        r200 >= 0.85 && r600 >= 0.90 && fast,
        format!("median rand {r200:.3} at 200 (>= 0.85), {r600:.3} at 600 (>= 0.90), {t}"),
    )
}

fn median_queries(config: &ExperimentConfig) -> f64 {
    let report = experiment::run(config).unwrap();
    median(
        report
            .hdbscan
            .repetitions
            .iter()
            .map(|r| r.queries as f64)
            .collect(),
    )
}

fn trends(reports: &[(usize, Report)]) -> Verdict {
    let rands: Vec<f64> = reports
        .iter()
        .map(|r| r.1.hdbscan.summary.rand.median)
        .collect();
    let budget_ok = rands.windows(2).all(|w| w[1] >= w[0]);

    let unlimited = quality_config(None);
    let by_k: Vec<f64> = [14, 28, 56]
        .into_iter()
        .map(|k| {
            median_queries(&ExperimentConfig {
                k: Some(k),
                ..unlimited.clone()
            })
        })
        .collect();
    let k_ok = by_k.windows(2).all(|w| w[1] <= w[0]);

    let by_noise: Vec<f64> = [0.0, 10.0, 20.0]
        .into_iter()
        .map(|noise_pct| {
            median_queries(&ExperimentConfig {
                noise_pct,
                ..unlimited.clone()
            })
        })
        .collect();
    let noise_ok = by_noise.windows(2).all(|w| w[1] >= w[0]);
    verdict(
        budget_ok && k_ok && noise_ok,
        format!("rand by budget {rands:.3?}, queries by k {by_k:?}, queries by noise {by_noise:?}"),
    )
}

fn baseline_dominance(reports: &[(usize, Report)]) -> Verdict {
    let rows: Vec<(usize, f64, f64)> = reports
        .iter()
        .map(|(b, r)| {
            (
                *b,
                r.hdbscan.summary.rand.median,
                r.baseline.as_ref().unwrap().summary.rand.median,
            )
        })
        .collect();
    let ok = rows.iter().all(|&(_, ours, base)| ours >= base);
    let detail: Vec<String> = rows
        .iter()
        .map(|(b, ours, base)| format!("{b}: {ours:.3} vs {base:.3}"))
        .collect();
    verdict(ok, detail.join(", "))
}

// ---- 9: assignment contract --------------------------------------------------

fn assignment_contract() -> Verdict {
    let data = Arc::new(synth::noisy(10_000, 1));
    let params = DbscanParams::new(20.0, 14).unwrap();
    let mut lbs = SimulatedLbs::new(data.clone(), 14, Budget::new(400)).unwrap();
    let run = hdbscan(&mut lbs, &params, &HdbscanConfig::default()).unwrap();
    let model = ClusterModel::from(run.model);
    let used = lbs.budget().used;
    let observed = lbs.observed().len();

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let bbox = data.bounding_box();
    let sweep: Vec<Point2D> = (0..10_000)
        .map(|_| {
            Point2D::new(
                rng.random_range(bbox.min.x - 50.0..bbox.max.x + 50.0),
                rng.random_range(bbox.min.y - 50.0..bbox.max.y + 50.0),
            )
        })
        .collect();
    let before = model.assign_all(&sweep);

    let mut json = Vec::new();
    model.to_writer(&mut json).unwrap();
    let loaded = ClusterModel::from_reader(json.as_slice()).unwrap();
    let after = loaded.assign_all(&sweep);
    let differing = before
        .iter()
        .zip(after.iter())
        .filter(|(a, b)| a != b)
        .count();
    let queries = lbs.budget().used - used;
    let clustered = before.iter().filter(|l| !l.is_noise()).count();
    verdict(
        queries == 0 && lbs.observed().len() == observed && differing == 0,
        format!("{queries} queries during assignment, {differing} of 10000 labels differ after reload ({clustered} clustered)"),
    )
}

/// Sensitivity to the sample size and the curve, reported but not judged.
fn side_sweeps() -> Vec<String> {
    let base = ExperimentConfig {
        baseline: false,
        ..quality_config(Some(400))
    };
    let mut lines = Vec::new();
    for (axis, values) in [
        (Axis::C, &["2", "3", "4", "6"][..]),
        (Axis::Curve, &["hilbert", "peano", "z"][..]),
    ] {
        let values: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        let rows = experiment::sweep(&base, axis, &values).unwrap();
        let cells: Vec<String> = rows
            .iter()
            .map(|(value, report)| {
                let q = median(
                    report
                        .hdbscan
                        .repetitions
                        .iter()
                        .map(|x| x.queries as f64)
                        .collect(),
                );
                format!(
                    "{value}: rand {:.3} queries {q}",
                    report.hdbscan.summary.rand.median
                )
            })
            .collect();
        lines.push(format!("{axis} sweep at budget 400: {}", cells.join(", ")));
    }
    lines
}

#[test]
fn acceptance() {
    let mut results: Vec<(u8, &str, Verdict)> = vec![
        (1, "metric oracle equivalence", metric_oracle()),
        (2, "kNN oracle exactness", knn_oracle()),
        (3, "reference DBSCAN correctness", reference_dbscan()),
        (4, "space-filling curve properties", sfc_properties()),
        (5, "exact 1D recovery within cost bound", line_recovery()),
    ];
    let started = Instant::now();
    let reports = run_reports();
    results.push((6, "end-to-end quality", end_to_end(&reports, started)));
    results.push((7, "monotone budget, k and noise trends", trends(&reports)));
    results.push((8, "baseline dominance", baseline_dominance(&reports)));
    results.push((9, "assignment contract", assignment_contract()));

    let mut out = std::io::stdout().lock();
    for (id, name, v) in &results {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        writeln!(out, "criterion {id} {tag}: {name}: {}", v.detail).unwrap();
    }
    for line in side_sweeps() {
        writeln!(out, "info: {line}").unwrap();
    }
    out.flush().unwrap();
    let failed: Vec<u8> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
