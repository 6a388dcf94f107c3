//! Command-line front end: point generation, discrepancy evaluation, MPMC
//! training and search, option pricing and the benchmark suites.
//!
//! Every command that writes files also writes a manifest; `mpmc replay`
//! re-runs a manifest and reproduces the same bytes.

pub mod bench;
mod error;
pub mod output;
pub mod tables;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mpmc::discrepancy::{
    hickernell_p2, l2_discrepancy, star_discrepancy_with_budget, star_lower_bound, warnock_l2_squared,
    DiscrepancyReport, Measure, ProjectionSpec, DEFAULT_STAR_BUDGET,
};
use mpmc::discrepancy::{field_to_csv, local_discrepancy_field};
use mpmc::finance::{estimate_option, estimate_option_sobol};
use mpmc::generators::{GeneratorKind, GeneratorSpec};
use mpmc::gnn::Checkpoint;
use mpmc::points::{read_points, read_points_dim, to_csv};
use mpmc::trainer::{random_search, train, Schedule, TrainConfig, TrainResult, OPTIMIZER};
use mpmc::{AsianOption64, PointSet64, ProjectionIndexSet};
use serde_json::{json, Value};

pub use error::{CliError, Result};
use error::{io_err, json_err};
use output::{emit, manifest_path_for, strip_out, to_json_line, to_json_pretty, write_atomic, Manifest};

#[derive(Parser, Debug)]
#[command(name = "mpmc", version, about = "Low-discrepancy point sets and Message-Passing Monte Carlo")]
pub struct Cli {
    /// Root seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Scale::Desk)]
    pub scale: Scale,
    /// Output file, or directory for commands that write several files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Desk,
    Full,
}

impl Scale {
    pub fn schedule(self) -> Schedule {
        match self {
            Scale::Desk => Schedule::Desk,
            Scale::Full => Schedule::Full,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Scale::Desk => "desk",
            Scale::Full => "full",
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a point set as CSV.
    Generate(GenerateArgs),
    /// Evaluate a discrepancy measure of a point file.
    Discrepancy(DiscrepancyArgs),
    /// Train an MPMC model from a JSON config.
    Train(TrainArgs),
    /// Random hyperparameter search around a JSON config.
    Search(SearchArgs),
    /// Price the Asian call option with a point set.
    Price(PriceArgs),
    /// Run a benchmark suite.
    Benchmark(BenchmarkArgs),
    /// Keep a subset of coordinates.
    Project(ProjectArgs),
    /// Signed local discrepancy of a 2-D set on a grid.
    Localfield(LocalfieldArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    F32,
    F64,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Generator spec as JSON, or `@path` to a JSON file.
    #[arg(long, conflicts_with_all = ["kind", "checkpoint"])]
    pub spec: Option<String>,
    #[arg(long, conflicts_with = "checkpoint")]
    pub kind: Option<GeneratorKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub base: Option<Vec<u64>>,
    #[arg(long)]
    pub a: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub z: Option<Vec<u64>>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub start: Option<u64>,
    /// Trained MPMC checkpoint; emits the model's output points.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    pub precision: Precision,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Star,
    StarLowerBound,
    L2,
    L2Squared,
    Hickernell,
}

#[derive(Args, Debug)]
pub struct DiscrepancyArgs {
    pub points: PathBuf,
    #[arg(long, value_enum, default_value_t = MeasureArg::Star)]
    pub measure: MeasureArg,
    /// Projection spec (JSON or `@path`) for `hickernell`; defaults to exhaustive.
    #[arg(long)]
    pub spec: Option<String>,
    /// Largest critical grid the exact star discrepancy may enumerate.
    #[arg(long, default_value_t = DEFAULT_STAR_BUDGET)]
    pub budget: f64,
    /// Random grid corners for `star-lower-bound`.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// JSON config; missing fields take the defaults of the chosen scale.
    pub config: PathBuf,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    pub config: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub trials: usize,
}

#[derive(Args, Debug)]
pub struct PriceArgs {
    /// Point file with one column per monitoring time.
    #[arg(required_unless_present = "sobol")]
    pub points: Option<PathBuf>,
    /// Use the first N Sobol' points instead of a file.
    #[arg(long, conflicts_with = "points")]
    pub sobol: Option<usize>,
    /// Option parameters (JSON or `@path`).
    #[arg(long)]
    pub config: Option<String>,
}

#[derive(Args, Debug)]
pub struct BenchmarkArgs {
    #[arg(value_enum)]
    pub suite: bench::Suite,
    /// Train MPMC rows for this many steps at desk scale.
    #[arg(long)]
    pub train_steps: Option<u64>,
    /// Directory of `mpmc_d<D>_n<N>.json` checkpoints, read and written.
    #[arg(long)]
    pub checkpoint_dir: Option<PathBuf>,
    /// Search trials per MPMC row at full scale.
    #[arg(long, default_value_t = 8)]
    pub trials: usize,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    pub points: PathBuf,
    /// Zero-based coordinates to keep, e.g. `0,2`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
}

#[derive(Args, Debug)]
pub struct LocalfieldArgs {
    pub points: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub resolution: usize,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

/// Parses `args` (program name first) and runs the command.
pub fn run_args<I, S>(args: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&args).map_err(|e| CliError::usage(e.to_string()))?;
    run(cli, args.get(1..).unwrap_or_default())
}

/// Runs a parsed command. `argv` is the raw argument list recorded in manifests.
pub fn run(cli: Cli, argv: &[String]) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| CliError::usage(format!("cannot start thread pool: {e}")))?;
    pool.install(|| dispatch(&cli, argv))
}

struct Ctx<'a> {
    cli: &'a Cli,
    argv: &'a [String],
}

impl Ctx<'_> {
    fn manifest(&self, command: &str, outputs: Vec<String>, details: Value) -> Manifest {
        let mut argv = strip_out(self.argv);
        if self.cli.threads.is_none() {
            argv.push("--threads".into());
            argv.push(rayon::current_num_threads().to_string());
        }
        Manifest {
            tool: "mpmc".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            argv,
            cwd: std::env::current_dir().unwrap_or_default(),
            seed: self.cli.seed,
            threads: rayon::current_num_threads(),
            scale: self.cli.scale.name().into(),
            outputs,
            details,
        }
    }

    /// Writes a single-file result to `--out` plus its manifest, or to stdout.
    fn emit_file(&self, command: &str, contents: &str, details: Value) -> Result<()> {
        emit(self.cli.out.as_deref(), contents)?;
        if let Some(out) = &self.cli.out {
            let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            self.manifest(command, vec![name], details).save(&manifest_path_for(out))?;
        }
        Ok(())
    }

    fn out_dir(&self, default: &str) -> PathBuf {
        self.cli.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }
}

fn dispatch(cli: &Cli, argv: &[String]) -> Result<()> {
    let ctx = Ctx { cli, argv };
    match &cli.command {
        Command::Generate(a) => cmd_generate(&ctx, a),
        Command::Discrepancy(a) => cmd_discrepancy(&ctx, a),
        Command::Train(a) => cmd_train(&ctx, a),
        Command::Search(a) => cmd_search(&ctx, a),
        Command::Price(a) => cmd_price(&ctx, a),
        Command::Benchmark(a) => cmd_benchmark(&ctx, a),
        Command::Project(a) => cmd_project(&ctx, a),
        Command::Localfield(a) => cmd_localfield(&ctx, a),
        Command::Replay(a) => cmd_replay(&ctx, a),
    }
}

/// Reads inline JSON or, with a leading `@`, a JSON file.
fn json_arg(arg: &str, what: &str) -> Result<String> {
    match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(io_err(path)),
        None => Ok(arg.to_string()),
    }
    .map(|s| if s.trim().is_empty() { format!("<empty {what}>") } else { s })
}

fn parse_json_arg<T: serde::de::DeserializeOwned>(arg: &str, what: &str) -> Result<T> {
    serde_json::from_str(&json_arg(arg, what)?).map_err(json_err(what))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(path.display()))
}

fn load_points(path: &Path) -> Result<PointSet64> {
    if !path.is_file() {
        return Err(CliError::usage(format!("{}: no such file", path.display())));
    }
    Ok(read_points(path)?)
}

/// Builds the generator spec from `--spec` or the individual flags.
pub fn generator_spec(a: &GenerateArgs, seed: u64) -> Result<GeneratorSpec> {
    let mut spec: GeneratorSpec = match (&a.spec, a.kind) {
        (Some(s), _) => parse_json_arg(s, "generator spec")?,
        (None, Some(kind)) => {
            let n = a.n.ok_or_else(|| CliError::usage("--kind needs --n"))?;
            GeneratorSpec {
                d: a.d,
                base: a.base.clone(),
                a: a.a,
                z: a.z.clone(),
                b: a.b,
                start: a.start,
                ..GeneratorSpec::new(kind, n)
            }
        }
        (None, None) => return Err(CliError::usage("generate needs --spec, --kind or --checkpoint")),
    };
    if matches!(spec.kind, GeneratorKind::UniformRandom | GeneratorKind::Shifted) && spec.seed.is_none() {
        spec.seed = Some(seed);
    }
    Ok(spec)
}

fn cmd_generate(ctx: &Ctx, a: &GenerateArgs) -> Result<()> {
    if let Some(path) = &a.checkpoint {
        let ck = Checkpoint::load(path)?;
        let points = ck.generate()?;
        let csv = match a.precision {
            Precision::F64 => to_csv(&points),
            Precision::F32 => to_csv(&points.cast::<f32>()),
        };
        return ctx.emit_file("generate", &csv, json!({"checkpoint": path}));
    }
    let spec = generator_spec(a, ctx.cli.seed)?;
    let csv = match a.precision {
        Precision::F64 => to_csv(&spec.generate::<f64>()?),
        Precision::F32 => to_csv(&spec.generate::<f32>()?),
    };
    ctx.emit_file("generate", &csv, json!({"spec": spec}))
}

pub fn discrepancy_report(points: &PointSet64, a: &DiscrepancyArgs, seed: u64) -> Result<DiscrepancyReport> {
    Ok(match a.measure {
        MeasureArg::Star => star_discrepancy_with_budget(points, a.budget)?.report(),
        MeasureArg::StarLowerBound => star_lower_bound(points, a.samples, seed)?,
        MeasureArg::L2 => DiscrepancyReport::scalar(Measure::L2, l2_discrepancy(points)?),
        MeasureArg::L2Squared => DiscrepancyReport::scalar(Measure::L2Squared, warnock_l2_squared(points)?),
        MeasureArg::Hickernell => {
            let spec = match &a.spec {
                Some(s) => parse_json_arg(s, "projection spec")?,
                None => ProjectionSpec::exhaustive(),
            };
            hickernell_p2(points, &spec)?
        }
    })
}

fn cmd_discrepancy(ctx: &Ctx, a: &DiscrepancyArgs) -> Result<()> {
    let points = load_points(&a.points)?;
    let report = discrepancy_report(&points, a, ctx.cli.seed)?;
    ctx.emit_file("discrepancy", &to_json_line(&report)?, json!({"points": a.points}))
}

/// Overlays a partial JSON config on the defaults of `scale`. The object
/// must name `n_points` and `dim`; `seed` defaults to `seed`.
pub fn load_train_config(text: &str, scale: Schedule, seed: u64) -> Result<TrainConfig> {
    let partial: Value = serde_json::from_str(text).map_err(json_err("train config"))?;
    let obj = partial.as_object().ok_or_else(|| CliError::usage("train config must be a JSON object"))?;
    let field = |k: &str| {
        obj.get(k)
            .and_then(Value::as_u64)
            .ok_or_else(|| CliError::usage(format!("train config needs a non-negative integer {k:?}")))
    };
    let mut base = TrainConfig::new(field("n_points")? as usize, field("dim")? as usize, scale);
    base.seed = seed;
    let mut merged = serde_json::to_value(&base).map_err(json_err("train config"))?;
    for (k, v) in obj {
        merged[k] = v.clone();
    }
    let config: TrainConfig = serde_json::from_value(merged).map_err(json_err("train config"))?;
    config.validate()?;
    Ok(config)
}

fn result_json(r: &TrainResult) -> Result<Value> {
    Ok(json!({
        "selection_value": r.selection_value,
        "l2": l2_discrepancy(&r.best_points)?,
        "selected_element": r.selected_element,
        "selection_values": r.selection_values,
        "model_seed": r.model_seed,
        "steps": r.steps,
        "final_learning_rate": r.final_learning_rate,
        "n_params": r.best_model.n_params(),
        "optimizer": OPTIMIZER,
        "config": r.config,
    }))
}

/// Writes checkpoint, points, history and result of a training run into `dir`.
fn write_run(dir: &Path, r: &TrainResult, mut result: Value) -> Result<Vec<String>> {
    let files = [
        ("checkpoint.json", r.checkpoint().to_json()? + "\n"),
        ("points.csv", to_csv(&r.best_points)),
        ("history.csv", r.history_csv()),
        ("result.json", {
            result["points"] = json!("points.csv");
            to_json_pretty(&result)?
        }),
    ];
    for (name, body) in &files {
        write_atomic(&dir.join(name), body.as_bytes())?;
    }
    Ok(files.iter().map(|(n, _)| n.to_string()).collect())
}

fn cmd_train(ctx: &Ctx, a: &TrainArgs) -> Result<()> {
    let config = load_train_config(&read_file(&a.config)?, ctx.cli.scale.schedule(), ctx.cli.seed)?;
    let r = train(&config)?;
    let dir = ctx.out_dir("mpmc-train");
    let result = result_json(&r)?;
    let outputs = write_run(&dir, &r, result.clone())?;
    ctx.manifest("train", outputs, json!({"config": config})).save(&dir.join("manifest.json"))?;
    print!("{}", to_json_line(&json!({"out": dir, "selection_value": r.selection_value, "l2": result["l2"]}))?);
    Ok(())
}

fn cmd_search(ctx: &Ctx, a: &SearchArgs) -> Result<()> {
    let base = load_train_config(&read_file(&a.config)?, ctx.cli.scale.schedule(), ctx.cli.seed)?;
    let s = random_search(&base, a.trials, ctx.cli.seed)?;
    let dir = ctx.out_dir("mpmc-search");
    let mut result = result_json(&s.best)?;
    result["best_trial"] = json!(s.best_trial);
    let mut outputs = write_run(&dir, &s.best, result.clone())?;
    write_atomic(&dir.join("trials.json"), to_json_pretty(&s.trials)?.as_bytes())?;
    outputs.push("trials.json".into());
    ctx.manifest("search", outputs, json!({"base": base, "trials": a.trials})).save(&dir.join("manifest.json"))?;
    print!("{}", to_json_line(&json!({"out": dir, "best_trial": s.best_trial, "l2": result["l2"]}))?);
    Ok(())
}

fn cmd_price(ctx: &Ctx, a: &PriceArgs) -> Result<()> {
    let config: AsianOption64 = match &a.config {
        Some(s) => parse_json_arg(s, "option config")?,
        None => AsianOption64::default(),
    };
    config.validate()?;
    let est = match (a.sobol, &a.points) {
        (Some(n), _) => estimate_option_sobol(n, &config)?,
        (None, Some(p)) => {
            if !p.is_file() {
                return Err(CliError::usage(format!("{}: no such file", p.display())));
            }
            estimate_option(&read_points_dim::<f64>(p, config.n_times)?, &config)?
        }
        (None, None) => return Err(CliError::usage("price needs a point file or --sobol N")),
    };
    ctx.emit_file("price", &to_json_line(&est)?, json!({"config": config, "points": a.points, "sobol": a.sobol}))
}

fn cmd_benchmark(ctx: &Ctx, a: &BenchmarkArgs) -> Result<()> {
    let opts = bench::BenchOptions {
        scale: ctx.cli.scale.schedule(),
        seed: ctx.cli.seed,
        train_steps: a.train_steps,
        checkpoint_dir: a.checkpoint_dir.clone(),
        trials: a.trials,
    };
    let out = bench::run_suite(a.suite, &opts)?;
    let dir = ctx.out_dir("bench");
    let name = a.suite.name();
    write_atomic(&dir.join(format!("{name}.csv")), bench::rows_to_csv(&out.rows)?.as_bytes())?;
    ctx.manifest("benchmark", vec![format!("{name}.csv")], json!({"suite": name, "jobs": out.plan}))
        .save(&dir.join(format!("{name}.manifest.json")))?;
    let count = |s: bench::Status| out.rows.iter().filter(|r| r.status == s).count();
    eprintln!(
        "{name}: {} rows, {} pass, {} fail, {} skipped",
        out.rows.len(),
        count(bench::Status::Pass),
        count(bench::Status::Fail),
        count(bench::Status::Skipped)
    );
    Ok(())
}

fn cmd_project(ctx: &Ctx, a: &ProjectArgs) -> Result<()> {
    let points = load_points(&a.points)?;
    let subset = ProjectionIndexSet::from_unsorted(a.dims.clone())?;
    let projected = points.project(&subset)?;
    ctx.emit_file("project", &to_csv(&projected), json!({"points": a.points, "dims": subset}))
}

fn cmd_localfield(ctx: &Ctx, a: &LocalfieldArgs) -> Result<()> {
    let points = load_points(&a.points)?;
    let field = local_discrepancy_field(&points, a.resolution)?;
    ctx.emit_file("localfield", &field_to_csv(&field), json!({"points": a.points, "resolution": a.resolution}))
}

/// Re-runs a manifest from its recorded working directory. Outputs go to
/// `--out` when given, otherwise to the originally recorded location.
fn cmd_replay(ctx: &Ctx, a: &ReplayArgs) -> Result<()> {
    let m = Manifest::load(&a.manifest)?;
    if m.command == "replay" {
        return Err(CliError::usage("cannot replay a replay manifest"));
    }
    let out = match &ctx.cli.out {
        Some(o) => std::path::absolute(o).map_err(io_err(o.display()))?,
        None => {
            let dir = a.manifest.parent().unwrap_or(Path::new("."));
            match m.command.as_str() {
                "train" | "search" | "benchmark" => dir.to_path_buf(),
                _ => dir.join(m.outputs.first().ok_or_else(|| CliError::usage("manifest lists no outputs"))?),
            }
        }
    };
    let mut args = vec!["mpmc".to_string()];
    args.extend(m.argv.iter().cloned());
    args.push("--out".into());
    args.push(out.to_string_lossy().into_owned());
    let prev = std::env::current_dir().map_err(io_err("current directory"))?;
    std::env::set_current_dir(&m.cwd).map_err(io_err(m.cwd.display()))?;
    let result = run_args(args);
    std::env::set_current_dir(prev).map_err(io_err("current directory"))?;
    result
}
