use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use lbs_cluster::experiment::{self, Axis, ExperimentConfig};
use lbs_cluster::oracle::Format;
use lbs_cluster::synth::{inject_noise, Generator};
use lbs_cluster::{hdbscan, Budget, ClusterModel, Curve, Dataset, SimulatedLbs};

const CHAMELEON_URL: &str =
    "http://glaros.dtc.umn.edu/gkhome/fetch/sw/cluster/chameleon-data.tar.gz";

#[derive(Parser)]
#[command(
    name = "lbs-cluster",
    version,
    about = "Cluster a point set seen only through a budget-limited kNN interface"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run HDBSCAN (and the sampling baseline) and print a JSON report.
    Run {
        #[command(flatten)]
        exp: ExpArgs,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also save the model built with the configured seed.
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Repeat `run` over values of one parameter and print CSV summaries.
    Sweep {
        #[command(flatten)]
        exp: ExpArgs,
        /// budget, k, min_cell_size, fanout, noise_pct, curve, coarse_passes or c.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic dataset as `x,y,label` CSV.
    Generate {
        /// blobs, moons, rings or noisy.
        #[arg(long, default_value = "noisy")]
        generator: String,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Extra uniform noise, in percent of n.
        #[arg(long, default_value_t = 0.0)]
        noise_pct: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Download and unpack the Chameleon benchmark files.
    Fetch {
        #[arg(long, default_value = CHAMELEON_URL)]
        url: String,
        #[arg(long, default_value = "data")]
        dir: PathBuf,
    },
    /// Label points with a saved model; writes `id,label` CSV.
    Assign {
        #[arg(long)]
        model: PathBuf,
        /// Points file, CSV or whitespace separated.
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Experiment settings: an optional JSON file, then flag overrides.
#[derive(Args)]
struct ExpArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    generator: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    data_seed: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    min_pts: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Query budget, or `none` to run until every cell is decided.
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    curve: Option<String>,
    #[arg(long)]
    fanout: Option<usize>,
    #[arg(long)]
    min_cell_size: Option<f64>,
    #[arg(long)]
    c: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    merge_threshold: Option<f64>,
    #[arg(long)]
    coarse_passes: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    noise_pct: Option<f64>,
    #[arg(long)]
    no_baseline: bool,
    #[arg(long)]
    timing: bool,
}

enum Failure {
    Config(String),
    Runtime(String),
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

impl ExpArgs {
    fn build(&self) -> Result<ExperimentConfig, Failure> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_json_file(p)
                .map_err(|e| config_err(format!("{}: {e}", p.display())))?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = &self.dataset {
            c.dataset = Some(v.clone());
        }
        if let Some(v) = &self.generator {
            c.generator = v.parse().map_err(config_err)?;
        }
        if let Some(v) = &self.curve {
            c.curve = v.parse::<Curve>().map_err(config_err)?;
        }
        if let Some(v) = &self.budget {
            c = Axis::Budget.apply(&c, v).map_err(config_err)?;
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        macro_rules! set_opt {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = Some(v); })* };
        }
        set!(
            n,
            data_seed,
            eps,
            min_pts,
            c,
            coarse_passes,
            seed,
            repetitions,
            noise_pct
        );
        set_opt!(k, fanout, min_cell_size, l, merge_threshold);
        if self.no_baseline {
            c.baseline = false;
        }
        if self.timing {
            c.record_timing = true;
        }
        c.validate().map_err(config_err)?;
        Ok(c)
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| runtime_err(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_dataset(c: &ExperimentConfig) -> Result<Dataset, Failure> {
    c.load_dataset().map_err(|e| match &c.dataset {
        Some(p) => config_err(format!("{}: {e}", p.display())),
        None => config_err(e),
    })
}

fn run(exp: &ExpArgs, out: Option<&Path>, model_out: Option<&Path>) -> Result<(), Failure> {
    let config = exp.build()?;
    load_dataset(&config)?;
    if let Some(path) = model_out {
        let data = Arc::new(load_dataset(&config)?);
        let k = config.k.unwrap_or(config.min_pts);
        let budget = config.budget.map_or_else(Budget::unlimited, Budget::new);
        let mut lbs = SimulatedLbs::new(data, k, budget).map_err(config_err)?;
        let params = config.params().map_err(config_err)?;
        let built =
            hdbscan(&mut lbs, &params, &config.hdbscan_config(config.seed)).map_err(runtime_err)?;
        ClusterModel::from(built.model)
            .save(path)
            .map_err(runtime_err)?;
    }
    let report = experiment::run(&config).map_err(runtime_err)?;
    let mut w = output(out)?;
    writeln!(w, "{}", report.to_json().map_err(runtime_err)?).map_err(runtime_err)?;
    w.flush().map_err(runtime_err)
}

fn sweep(exp: &ExpArgs, axis: &str, values: &[String], out: Option<&Path>) -> Result<(), Failure> {
    let config = exp.build()?;
    let axis: Axis = axis.parse().map_err(config_err)?;
    for v in values {
        axis.apply(&config, v).map_err(config_err)?;
    }
    load_dataset(&config)?;
    let rows = experiment::sweep(&config, axis, values).map_err(runtime_err)?;
    let mut w = output(out)?;
    experiment::write_sweep_csv(&rows, &mut w).map_err(runtime_err)?;
    w.flush().map_err(runtime_err)
}

fn generate(
    generator: &str,
    n: usize,
    seed: u64,
    noise_pct: f64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let g: Generator = generator.parse().map_err(config_err)?;
    if n == 0 || !(0.0..=1000.0).contains(&noise_pct) {
        return Err(config_err(
            "n must be positive and noise_pct within 0..=1000",
        ));
    }
    let mut data = g.generate(n, seed);
    if noise_pct > 0.0 {
        data = inject_noise(&data, noise_pct / 100.0, seed.wrapping_add(1)).map_err(config_err)?;
    }
    let mut w = output(out)?;
    data.write_csv(&mut w).map_err(runtime_err)?;
    w.flush().map_err(runtime_err)
}

fn fetch(url: &str, dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| runtime_err(format!("{}: {e}", dir.display())))?;
    let response = ureq::get(url)
        .call()
        .map_err(|e| runtime_err(format!("{url}: {e}")))?;
    let reader = response.into_body().into_reader();
    let mut archive = tar::Archive::new(flate2::read::GzDecoder::new(reader));
    archive
        .unpack(dir)
        .map_err(|e| runtime_err(format!("unpacking {url}: {e}")))?;
    for entry in walk(dir) {
        eprintln!("{}", entry.display());
    }
    Ok(())
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let Ok(entries) = std::fs::read_dir(dir) else {
        return out;
    };
    for e in entries.flatten() {
        let p = e.path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

fn assign(model: &Path, points: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let m =
        ClusterModel::load(model).map_err(|e| config_err(format!("{}: {e}", model.display())))?;
    let file = File::open(points).map_err(|e| config_err(format!("{}: {e}", points.display())))?;
    let data = Dataset::from_reader(file, Format::from_path(points))
        .map_err(|e| config_err(format!("{}: {e}", points.display())))?;
    let mut w = output(out)?;
    m.label_dataset(&data)
        .write_csv(&mut w)
        .map_err(runtime_err)?;
    w.flush().map_err(runtime_err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            exp,
            out,
            model_out,
        } => run(exp, out.as_deref(), model_out.as_deref()),
        Command::Sweep {
            exp,
            axis,
            values,
            out,
        } => sweep(exp, axis, values, out.as_deref()),
        Command::Generate {
            generator,
            n,
            seed,
            noise_pct,
            out,
        } => generate(generator, *n, *seed, *noise_pct, out.as_deref()),
        Command::Fetch { url, dir } => fetch(url, dir),
        Command::Assign { model, points, out } => assign(model, points, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
