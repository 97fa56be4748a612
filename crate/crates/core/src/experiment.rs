//! Experiment harness: run the clustering pipeline and the sampling
//! baseline against a simulated service, score both against reference
//! DBSCAN, and sweep one parameter at a time.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster2d::{hdbscan, HdbscanConfig};
use crate::dbscan::{baseline_cluster, dbscan, DbscanParams};
use crate::error::{Error, Result};
use crate::labels::Labeling;
use crate::metrics::Scores;
use crate::model::ClusterModel;
use crate::oracle::{Budget, Dataset, KdTree, KnnService, SimulatedLbs};
use crate::sfc::Curve;
use crate::synth::{inject_noise, Generator};

/// Everything that determines a run. `None` fields resolve to defaults
/// derived from the others; reports carry the resolved values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Points file; when absent the generator is used.
    pub dataset: Option<PathBuf>,
    pub generator: Generator,
    /// Generator size.
    pub n: usize,
    pub data_seed: u64,
    pub eps: f64,
    pub min_pts: usize,
    /// Service k; defaults to `min_pts`.
    pub k: Option<usize>,
    /// Query budget; `None` runs until every cell is decided.
    pub budget: Option<usize>,
    pub curve: Curve,
    /// Defaults to 4, or 9 for the Peano curve.
    pub fanout: Option<usize>,
    pub min_cell_size: Option<f64>,
    pub c: usize,
    pub l: Option<usize>,
    pub merge_threshold: Option<f64>,
    /// Coarser searches run before the main one.
    pub coarse_passes: u32,
    pub seed: u64,
    pub repetitions: usize,
    /// Uniform noise added on top of the dataset, in percent of its size.
    pub noise_pct: f64,
    /// Also run the sampling baseline (needs a finite budget).
    pub baseline: bool,
    /// Record wall time per repetition. Off by default so reports are
    /// byte-identical across runs.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            generator: Generator::Noisy,
            n: 10_000,
            data_seed: 1,
            eps: 20.0,
            min_pts: 14,
            k: None,
            budget: Some(200),
            curve: Curve::Hilbert,
            fanout: None,
            min_cell_size: None,
            c: 4,
            l: None,
            merge_threshold: None,
            coarse_passes: 1,
            seed: 0,
            repetitions: 10,
            noise_pct: 0.0,
            baseline: true,
            record_timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn params(&self) -> Result<DbscanParams> {
        DbscanParams::new(self.eps, self.min_pts)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        let bad = |m: String| Err(Error::InvalidParameter(m));
        let k = self.k.unwrap_or(self.min_pts);
        if k < self.min_pts {
            return bad(format!(
                "k = {k} must be at least min_pts = {}",
                self.min_pts
            ));
        }
        if self.budget == Some(0) {
            return bad("budget must be positive".into());
        }
        if self.c == 0 || self.l == Some(0) || self.repetitions == 0 || self.n == 0 {
            return bad("c, l, n and repetitions must be positive".into());
        }
        if self.min_cell_size.is_some_and(|m| !(m > 0.0))
            || self.merge_threshold.is_some_and(|t| !(t > 0.0))
        {
            return bad("min_cell_size and merge_threshold must be positive".into());
        }
        if !(0.0..=1000.0).contains(&self.noise_pct) {
            return bad(format!("noise_pct = {} out of range", self.noise_pct));
        }
        crate::sfc::levels_for_fanout(self.curve, self.resolved_fanout())?;
        Ok(())
    }

    fn resolved_fanout(&self) -> usize {
        self.fanout.unwrap_or(match self.curve {
            Curve::Peano => 9,
            _ => 4,
        })
    }

    /// Copy with every defaulted field filled in.
    pub fn resolved(&self) -> Self {
        let params = DbscanParams {
            eps: self.eps,
            min_pts: self.min_pts,
        };
        let h = self.hdbscan_config(self.seed);
        Self {
            k: Some(self.k.unwrap_or(self.min_pts)),
            fanout: Some(self.resolved_fanout()),
            min_cell_size: Some(h.resolved_min_cell_size(&params)),
            l: Some(h.resolved_l(&params)),
            merge_threshold: Some(h.resolved_merge_threshold(&params)),
            ..self.clone()
        }
    }

    pub fn hdbscan_config(&self, seed: u64) -> HdbscanConfig {
        HdbscanConfig {
            curve: self.curve,
            fanout: self.resolved_fanout(),
            min_cell_size: self.min_cell_size,
            c: self.c,
            l: self.l,
            merge_threshold: self.merge_threshold,
            coarse_passes: self.coarse_passes,
            seed,
        }
    }

    /// Load or generate the points, then add the configured noise.
    pub fn load_dataset(&self) -> Result<Dataset> {
        let base = match &self.dataset {
            Some(p) => Dataset::load(p)?,
            None => self.generator.generate(self.n, self.data_seed),
        };
        if self.noise_pct > 0.0 {
            inject_noise(
                &base,
                self.noise_pct / 100.0,
                self.data_seed.wrapping_add(1),
            )
        } else {
            Ok(base)
        }
    }
}

/// One repetition of one algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepResult {
    pub seed: u64,
    pub rand: f64,
    pub jaccard: f64,
    pub fowlkes_mallows: f64,
    pub queries: usize,
    pub observed: usize,
    /// Dense segments found before merging (HDBSCAN only).
    pub mini_clusters: Option<usize>,
    pub clusters: usize,
    pub exhausted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub median: f64,
    pub sd: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                median: f64::NAN,
                sd: f64::NAN,
            };
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        let median = if v.len() % 2 == 1 {
            v[m]
        } else {
            (v[m - 1] + v[m]) / 2.0
        };
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
        Self {
            median: round6(median),
            sd: round6(var.sqrt()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rand: Spread,
    pub jaccard: Spread,
    pub fowlkes_mallows: Spread,
    pub queries: Spread,
}

impl Summary {
    pub fn of(reps: &[RepResult]) -> Self {
        let col = |f: fn(&RepResult) -> f64| Spread::of(&reps.iter().map(f).collect::<Vec<_>>());
        Self {
            rand: col(|r| r.rand),
            jaccard: col(|r| r.jaccard),
            fowlkes_mallows: col(|r| r.fowlkes_mallows),
            queries: col(|r| r.queries as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmReport {
    pub summary: Summary,
    pub repetitions: Vec<RepResult>,
}

impl AlgorithmReport {
    fn new(repetitions: Vec<RepResult>) -> Self {
        Self {
            summary: Summary::of(&repetitions),
            repetitions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub points: usize,
    pub reference_clusters: usize,
    pub reference_noise: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub dataset: DatasetInfo,
    pub hdbscan: AlgorithmReport,
    pub baseline: Option<AlgorithmReport>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn score(
    model: &ClusterModel,
    data: &Dataset,
    reference: &Labeling,
    service: &SimulatedLbs,
    seed: u64,
    started: Option<Instant>,
) -> Result<RepResult> {
    let labels = model.label_dataset(data);
    let s = Scores::compare(&labels, reference)?;
    let stats = service.stats();
    Ok(RepResult {
        seed,
        rand: round6(s.rand),
        jaccard: round6(s.jaccard),
        fowlkes_mallows: round6(s.fowlkes_mallows),
        queries: stats.budget_used,
        observed: stats.observed,
        mini_clusters: None,
        clusters: model.num_clusters(),
        exhausted: service.budget().is_exhausted(),
        wall_ms: started.map(|t| round6(t.elapsed().as_secs_f64() * 1e3)),
    })
}

/// Run every repetition of the configured experiment.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let config = config.resolved();
    let params = config.params()?;
    let data = Arc::new(config.load_dataset()?);
    let index = Arc::new(KdTree::build(data.points()));
    let reference = dbscan(&data, &params);
    let k = config.k.unwrap_or(config.min_pts);
    let budget = config.budget.map_or_else(Budget::unlimited, Budget::new);
    let service = || SimulatedLbs::with_index(data.clone(), index.clone(), k, budget);
    let seeds: Vec<u64> = (0..config.repetitions as u64)
        .map(|i| config.seed.wrapping_add(i))
        .collect();

    let ours = seeds
        .par_iter()
        .map(|&seed| {
            let started = config.record_timing.then(Instant::now);
            let mut lbs = service()?;
            let run = hdbscan(&mut lbs, &params, &config.hdbscan_config(seed))?;
            let mini = run.mini_clusters;
            let exhausted = run.exhausted;
            let model = ClusterModel::from(run.model);
            let mut r = score(&model, &data, &reference, &lbs, seed, started)?;
            r.mini_clusters = Some(mini);
            r.exhausted = exhausted;
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;

    let baseline = if config.baseline && config.budget.is_some() {
        let reps = seeds
            .par_iter()
            .map(|&seed| {
                let started = config.record_timing.then(Instant::now);
                let mut lbs = service()?;
                let model = baseline_cluster(&mut lbs, &params, params.eps, seed)?;
                score(&model, &data, &reference, &lbs, seed, started)
            })
            .collect::<Result<Vec<_>>>()?;
        Some(AlgorithmReport::new(reps))
    } else {
        None
    };

    Ok(Report {
        dataset: DatasetInfo {
            points: data.len(),
            reference_clusters: reference.num_clusters(),
            reference_noise: reference.noise_count(),
        },
        config,
        hdbscan: AlgorithmReport::new(ours),
        baseline,
    })
}

/// Parameter varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Budget,
    K,
    MinCellSize,
    Fanout,
    NoisePct,
    Curve,
    CoarsePasses,
    /// Stratified sample size per line search.
    C,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "budget" => Axis::Budget,
            "k" => Axis::K,
            "min_cell_size" => Axis::MinCellSize,
            "fanout" => Axis::Fanout,
            "noise_pct" | "noise" => Axis::NoisePct,
            "curve" => Axis::Curve,
            "coarse_passes" => Axis::CoarsePasses,
            "c" => Axis::C,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown sweep axis `{other}`"
                )))
            }
        })
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::Budget => "budget",
            Axis::K => "k",
            Axis::MinCellSize => "min_cell_size",
            Axis::Fanout => "fanout",
            Axis::NoisePct => "noise_pct",
            Axis::Curve => "curve",
            Axis::CoarsePasses => "coarse_passes",
            Axis::C => "c",
        })
    }
}

impl Axis {
    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &ExperimentConfig, value: &str) -> Result<ExperimentConfig> {
        let bad = || Error::InvalidParameter(format!("bad value `{value}` for axis {self}"));
        let mut c = base.clone();
        match self {
            Axis::Budget => {
                c.budget = match value {
                    "none" | "unlimited" => None,
                    v => Some(v.parse().map_err(|_| bad())?),
                }
            }
            Axis::K => c.k = Some(value.parse().map_err(|_| bad())?),
            Axis::MinCellSize => c.min_cell_size = Some(value.parse().map_err(|_| bad())?),
            Axis::Fanout => c.fanout = Some(value.parse().map_err(|_| bad())?),
            Axis::NoisePct => c.noise_pct = value.parse().map_err(|_| bad())?,
            Axis::CoarsePasses => c.coarse_passes = value.parse().map_err(|_| bad())?,
            Axis::C => c.c = value.parse().map_err(|_| bad())?,
            Axis::Curve => {
                c.curve = value.parse()?;
                if base.fanout.is_none() || c.curve == Curve::Peano {
                    c.fanout = None;
                }
            }
        }
        c.validate()?;
        Ok(c)
    }
}

/// One report per value, in order.
pub fn sweep(
    base: &ExperimentConfig,
    axis: Axis,
    values: &[String],
) -> Result<Vec<(String, Report)>> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(
            "sweep needs at least one value".into(),
        ));
    }
    let configs = values
        .iter()
        .map(|v| axis.apply(base, v).map(|c| (v.clone(), c)))
        .collect::<Result<Vec<_>>>()?;
    configs
        .into_iter()
        .map(|(v, c)| Ok((v, run(&c)?)))
        .collect()
}

pub const SWEEP_CSV_HEADER: &str = "value,algorithm,median_rand,sd_rand,median_jaccard,sd_jaccard,median_fm,sd_fm,median_queries,sd_queries";

/// Sweep summaries as CSV, one row per value and algorithm.
pub fn write_sweep_csv<W: Write>(rows: &[(String, Report)], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for (value, report) in rows {
        let algos = std::iter::once(("hdbscan", &report.hdbscan))
            .chain(report.baseline.as_ref().map(|b| ("baseline", b)));
        for (name, a) in algos {
            let s = &a.summary;
            writeln!(
                w,
                "{value},{name},{},{},{},{},{},{},{},{}",
                s.rand.median,
                s.rand.sd,
                s.jaccard.median,
                s.jaccard.sd,
                s.fowlkes_mallows.median,
                s.fowlkes_mallows.sd,
                s.queries.median,
                s.queries.sd
            )?;
        }
    }
    Ok(())
}
