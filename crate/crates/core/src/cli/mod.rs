//! The `uplift` command line: `bench`, `simulate`, `score`, `summarize`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 runtime or numeric error.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dataset::{load_csv, load_features, write_csv, EffectModel, Schema, SyntheticConfig};
use crate::error::{Error, Result};
use crate::evaluation::cross_validate;
use crate::method::MethodSpec;
use crate::persist::{self, SavedModel};
use crate::report::{self, fmt_f64};
use crate::rng;
use config::{load_data, CsvSource, DataSource, MethodEntry, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "uplift", version, about = "Individual treatment effect estimation and targeting benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Repeated split / fit / target / measure over a method list.
    Bench(BenchArgs),
    /// Write a synthetic dataset and its ground truth.
    Simulate(SimulateArgs),
    /// Score rows with a saved model or a freshly trained method.
    Score(ScoreArgs),
    /// Recompute summary, boxplot and table files from a per-iteration CSV.
    Summarize(SummarizeArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; outputs do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SyntheticArgs {
    #[arg(long)]
    pub n_rows: Option<usize>,
    #[arg(long)]
    pub n_features: Option<usize>,
    /// `constant:<effect>`, `linear:<slope>` or `sign-flip:<magnitude>`.
    #[arg(long)]
    pub effect: Option<String>,
    #[arg(long)]
    pub noise_level: Option<f64>,
}

impl SyntheticArgs {
    fn is_set(&self) -> bool {
        self.n_rows.is_some() || self.n_features.is_some() || self.effect.is_some() || self.noise_level.is_some()
    }

    fn apply(&self, cfg: &mut SyntheticConfig) -> Result<()> {
        if let Some(n) = self.n_rows {
            cfg.n_rows = n;
        }
        if let Some(d) = self.n_features {
            cfg.n_features = d;
        }
        if let Some(e) = &self.effect {
            cfg.effect = EffectModel::parse(e)?;
        }
        if let Some(v) = self.noise_level {
            cfg.noise_level = v;
        }
        cfg.validate()
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated method ids.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    #[arg(long)]
    pub n_iter: Option<usize>,
    /// Targeted share of the holdout.
    #[arg(long)]
    pub fraction: Option<f64>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub ci_level: Option<f64>,
    /// Training row cap applied to every method.
    #[arg(long)]
    pub train_cap: Option<usize>,
    /// CSV input (treatment and conversion columns, every other column a feature).
    #[arg(long, conflicts_with_all = ["n_rows", "n_features", "effect", "noise_level"])]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub synthetic: SyntheticArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub synthetic: SyntheticArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub common: Common,
    /// Saved model file.
    #[arg(long, conflicts_with_all = ["method", "train"])]
    pub model: Option<PathBuf>,
    /// Method id to train on `--train`.
    #[arg(long, requires = "train")]
    pub method: Option<String>,
    #[arg(long, requires = "method")]
    pub train: Option<PathBuf>,
    /// Rows to score; treatment and outcome columns are ignored if present.
    #[arg(long)]
    pub data: PathBuf,
    /// Also write the trained model here.
    #[arg(long, requires = "method")]
    pub save_model: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SummarizeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Per-iteration CSV written by `bench`.
    pub iterations: PathBuf,
    #[arg(long)]
    pub ci_level: Option<f64>,
}

/// Parse arguments, run, and map the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let common = match &cli.command {
        Command::Bench(a) => &a.common,
        Command::Simulate(a) => &a.common,
        Command::Score(a) => &a.common,
        Command::Summarize(a) => &a.common,
    };
    match common.threads {
        None => dispatch(&cli.command),
        Some(0) => Err(Error::config("threads", "must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config("threads", e.to_string()))?
            .install(|| dispatch(&cli.command)),
    }
}

fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Bench(a) => bench(a),
        Command::Simulate(a) => simulate(a),
        Command::Score(a) => score(a),
        Command::Summarize(a) => summarize(a),
    }
}

fn base_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out.clone().ok_or_else(|| Error::config("out", "an output directory is required (--out or `out` in the config)"))?;
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Error::io(path, e))
}

fn apply_synthetic(data: &mut DataSource, args: &SyntheticArgs) -> Result<()> {
    if !args.is_set() {
        return Ok(());
    }
    match data {
        DataSource::Synthetic(s) => args.apply(s),
        DataSource::Csv(_) => Err(Error::config("data", "synthetic settings given but the data source is a CSV file")),
    }
}

/// Flags over file over defaults.
pub fn resolve_bench(args: &BenchArgs) -> Result<RunConfig> {
    let mut cfg = base_config(&args.common)?;
    if let Some(ids) = &args.methods {
        let from_file = std::mem::take(&mut cfg.methods);
        cfg.methods = ids
            .iter()
            .map(|id| from_file.iter().find(|m| &m.id == id).cloned().unwrap_or_else(|| MethodEntry::new(id)))
            .collect();
    }
    if let Some(v) = args.n_iter {
        cfg.n_iter = v;
    }
    if let Some(v) = args.fraction {
        cfg.fraction = v;
    }
    if let Some(v) = args.train_fraction {
        cfg.train_fraction = v;
    }
    if let Some(v) = args.ci_level {
        cfg.ci_level = v;
    }
    if let Some(cap) = args.train_cap {
        for m in &mut cfg.methods {
            m.train_cap = Some(cap);
        }
    }
    if let Some(p) = &args.data {
        cfg.data = DataSource::Csv(CsvSource::new(p));
    }
    apply_synthetic(&mut cfg.data, &args.synthetic)?;
    cfg.validate()?;
    Ok(cfg)
}

pub const BENCH_FILES: [&str; 8] = [
    "summary.txt",
    "summary.csv",
    "iterations.csv",
    "boxplot.csv",
    "holdout.csv",
    "failures.csv",
    "config.toml",
    "manifest.json",
];

fn bench(args: &BenchArgs) -> Result<()> {
    let cfg = resolve_bench(args)?;
    let dir = out_dir(&cfg)?;
    let specs = cfg.method_specs()?;
    let (ds, _) = cfg.load_data()?;
    let report = cross_validate(&ds, &specs, &cfg.cv(), cfg.seed)?;
    let rows = report::iteration_rows(&report);
    let summary = report::summarize(&rows, cfg.ci_level)?;
    let table = report::summary_table(&summary);

    // the echo leaves out the output directory so it does not leak into the bytes
    let echo = RunConfig { out: None, ..cfg.clone() };
    let manifest = serde_json::json!({
        "tool": "uplift",
        "version": env!("CARGO_PKG_VERSION"),
        "model_format_version": persist::FORMAT_VERSION,
        "command": "bench",
        "seed": cfg.seed,
        "n_rows": ds.n_rows(),
        "n_features": ds.n_features(),
        "n_failed_cells": report.failures.len(),
        "config": echo,
        "files": BENCH_FILES,
    });

    write(&dir, "summary.txt", &table)?;
    write(&dir, "summary.csv", &report::summary_csv(&summary))?;
    write(&dir, "iterations.csv", &report::iterations_csv(&rows))?;
    write(&dir, "boxplot.csv", &report::boxplot_csv(&summary)?)?;
    write(&dir, "holdout.csv", &report::holdout_csv(&report))?;
    write(&dir, "failures.csv", &report::failures_csv(&report))?;
    write(&dir, "config.toml", &echo.to_toml()?)?;
    write(&dir, "manifest.json", &format!("{}\n", serde_json::to_string_pretty(&manifest).expect("manifest serializes")))?;

    print!("{table}");
    for f in &report.failures {
        eprintln!("warning: {} iteration {}: {}", f.method_id, f.iteration, f.message);
    }
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut cfg = base_config(&args.common)?;
    if matches!(cfg.data, DataSource::Csv(_)) {
        if args.common.config.is_some() && !args.synthetic.is_set() {
            return Err(Error::config("data", "simulate needs synthetic data settings, the config names a CSV file"));
        }
        cfg.data = DataSource::default();
    }
    apply_synthetic(&mut cfg.data, &args.synthetic)?;
    let dir = out_dir(&cfg)?;
    let (ds, truth) = load_data(&cfg.data, cfg.seed)?;
    let truth = truth.expect("synthetic source has truth");
    write_csv(&ds, dir.join("data.csv"))?;
    let mut text = String::from("row,true_ite,p_treated,p_control\n");
    for i in 0..ds.n_rows() {
        writeln!(
            text,
            "{i},{},{},{}",
            fmt_f64(truth.true_ite[i]),
            fmt_f64(truth.p_treated[i]),
            fmt_f64(truth.p_control[i])
        )
        .unwrap();
    }
    write(&dir, "truth.csv", &text)?;
    eprintln!("wrote {} rows to {}", ds.n_rows(), dir.display());
    Ok(())
}

fn score(args: &ScoreArgs) -> Result<()> {
    let cfg = base_config(&args.common)?;
    let model = match (&args.model, &args.method, &args.train) {
        (Some(path), _, _) => persist::load_ite(path)?,
        (None, Some(id), Some(train)) => {
            let spec = match cfg.methods.iter().find(|m| &m.id == id) {
                Some(entry) if args.common.config.is_some() => entry.to_spec()?,
                _ => MethodSpec::from_id(id)?,
            };
            let train = load_csv(train, &Schema::inferred())?;
            let model = spec.fit(&train, rng::derive_str(cfg.seed, "score"))?;
            if let Some(p) = &args.save_model {
                persist::save(p, &SavedModel::Ite(model.clone()))?;
            }
            model
        }
        _ => return Err(Error::config("model", "give either --model, or --method with --train")),
    };
    let x = load_features(&args.data, &Schema::inferred())?;
    let scores = model.predict(&x)?;
    let dir = out_dir(&cfg)?;
    let mut text = String::from("row,ite_score\n");
    for (i, s) in scores.scores.iter().enumerate() {
        writeln!(text, "{i},{}", fmt_f64(*s)).unwrap();
    }
    write(&dir, "scores.csv", &text)?;
    eprintln!("scored {} rows with {}", x.n_rows(), model.method_id);
    Ok(())
}

fn summarize(args: &SummarizeArgs) -> Result<()> {
    let cfg = base_config(&args.common)?;
    let ci_level = args.ci_level.unwrap_or(cfg.ci_level);
    let rows = report::read_iterations(&args.iterations)?;
    let summary = report::summarize(&rows, ci_level)?;
    let table = report::summary_table(&summary);
    let dir = out_dir(&cfg)?;
    write(&dir, "summary.txt", &table)?;
    write(&dir, "summary.csv", &report::summary_csv(&summary))?;
    write(&dir, "boxplot.csv", &report::boxplot_csv(&summary)?)?;
    print!("{table}");
    Ok(())
}
