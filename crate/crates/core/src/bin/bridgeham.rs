//! Command-line front end: parameter inspection, single trials, Monte Carlo
//! batches and SVG figures.
//!
//! JSON goes to stdout, diagnostics to stderr. Exit codes: 0 success,
//! 1 strict-mode construction failure, 2 usage or input error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use bridgeham::cycle::CycleExport;
use bridgeham::experiment::{self, Mode, Preset, TrialConfig, TrialOutcome};
use bridgeham::grid::{Cell, GridSnapshot};
use bridgeham::params::{self, ModelParams, ParamsReport};
use bridgeham::render::render_svg;
use bridgeham::sampling::{self, density_bounds, Density, Point};
use bridgeham::Error;

#[derive(Parser)]
#[command(name = "bridgeham", version, about = "Bridged Hamiltonian cycles on random geometric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print radius, tiling and budget for a parameter set.
    Params(ModelArgs),
    /// Run one seeded trial.
    Run(RunArgs),
    /// Run a seeded batch of trials.
    Montecarlo(BatchArgs),
    /// Run one trial and draw it.
    Render(RunArgs),
}

#[derive(Args, Clone, Default)]
struct ModelArgs {
    /// JSON file with any of the flags below; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named parameter set: theorem or practical.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Number, or `loglog` for log log n.
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    /// Defaults to the density minimum.
    #[arg(long)]
    eps1: Option<f64>,
    /// Defaults to the density maximum.
    #[arg(long)]
    eps2: Option<f64>,
    /// Dense threshold (>= 9).
    #[arg(long = "L", value_name = "L")]
    l: Option<usize>,
    /// Rectangle width in tiles.
    #[arg(long = "M", value_name = "M")]
    m: Option<usize>,
    /// `uniform`, `halves:LEFT,RIGHT`, or a JSON density file.
    #[arg(long)]
    density: Option<String>,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// strict or best-effort.
    #[arg(long)]
    mode: Option<String>,
    /// Use these points (CSV with header x,y) instead of sampling.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long = "cycle-json")]
    cycle_json: Option<PathBuf>,
    #[arg(long = "grid-json")]
    grid_json: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct BatchArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Base seed; trial i uses base + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; 0 or absent uses all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Per-trial rows.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also measure how often tile ROW,COL is sparse.
    #[arg(long = "sparse-cell", value_name = "ROW,COL")]
    sparse_cell: Option<String>,
    /// Constant in the sparse-tile bound.
    #[arg(long = "bound-c", value_name = "C")]
    bound_c: Option<f64>,
}

/// Config file layout; every key is optional.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    preset: Option<String>,
    n: Option<usize>,
    alpha: Option<f64>,
    omega: Option<Value>,
    eps1: Option<f64>,
    eps2: Option<f64>,
    #[serde(rename = "L")]
    l: Option<usize>,
    #[serde(rename = "M")]
    m: Option<usize>,
    density: Option<Value>,
    seed: Option<u64>,
    mode: Option<String>,
    trials: Option<usize>,
    jobs: Option<usize>,
    points: Option<PathBuf>,
    svg: Option<PathBuf>,
    cycle_json: Option<PathBuf>,
    grid_json: Option<PathBuf>,
    csv: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Construction,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_density(spec: &str) -> CliResult<Density> {
    if spec == "uniform" {
        return Ok(Density::Uniform);
    }
    if let Some(rest) = spec.strip_prefix("halves:") {
        let parts: Vec<&str> = rest.split(',').collect();
        let [l, r] = parts.as_slice() else {
            return Err(usage(format!("density `{spec}`: expected halves:LEFT,RIGHT")));
        };
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| usage(format!("density `{spec}`: `{s}` is not a number")));
        return Ok(Density::halves(num(l)?, num(r)?)?);
    }
    let file = File::open(spec).map_err(|e| usage(format!("density `{spec}`: not uniform, halves:A,B, or a readable file ({e})")))?;
    let d: Density = serde_json::from_reader(io::BufReader::new(file))
        .map_err(|e| usage(format!("density file {spec}: {e}")))?;
    d.validate()?;
    Ok(d)
}

fn density_from_value(v: &Value) -> CliResult<Density> {
    match v {
        Value::String(s) => parse_density(s),
        other => {
            let d: Density = serde_json::from_value(other.clone()).map_err(|e| usage(format!("config density: {e}")))?;
            d.validate()?;
            Ok(d)
        }
    }
}

fn parse_omega(s: &str, n: usize) -> CliResult<f64> {
    if s == "loglog" {
        return Ok(params::omega_loglog(n)?);
    }
    s.parse::<f64>().map_err(|_| usage(format!("--omega `{s}`: expected a number or `loglog`")))
}

fn parse_mode(s: Option<&str>) -> CliResult<Mode> {
    Ok(s.unwrap_or("strict").parse()?)
}

fn read_config(path: Option<&Path>) -> CliResult<ConfigFile> {
    let Some(path) = path else { return Ok(ConfigFile::default()) };
    let file = File::open(path).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    serde_json::from_reader(io::BufReader::new(file)).map_err(|e| usage(format!("config {}: {e}", path.display())))
}

/// Preset, then config file, then flags. `n_hint` fills `n` from an
/// injected point set.
fn resolve_model(cmd: &str, a: &ModelArgs, cfg: &ConfigFile, n_hint: Option<usize>) -> CliResult<(ModelParams, Density)> {
    let preset = match a.preset.as_deref().or(cfg.preset.as_deref()) {
        Some(name) => Some(name.parse::<Preset>()?.params()),
        None => None,
    };
    let n = a.n.or(cfg.n).or(n_hint).or(preset.map(|p| p.n)).ok_or_else(|| {
        usage(format!(
            "missing required --n (or supply it through --config, --preset or --points)\n\n\
             Usage: bridgeham {cmd} --n <N> [OPTIONS]\n\nFor more information, try 'bridgeham {cmd} --help'."
        ))
    })?;
    let density = match (&a.density, &cfg.density) {
        (Some(s), _) => parse_density(s)?,
        (None, Some(v)) => density_from_value(v)?,
        (None, None) => Density::Uniform,
    };
    let (lo, hi) = density_bounds(&density);
    let omega = match (&a.omega, &cfg.omega) {
        (Some(s), _) => parse_omega(s, n)?,
        (None, Some(Value::String(s))) => parse_omega(s, n)?,
        (None, Some(Value::Number(x))) => x.as_f64().unwrap_or(f64::NAN),
        (None, Some(other)) => return Err(usage(format!("config omega: expected number or \"loglog\", got {other}"))),
        (None, None) => preset.map_or(0.0, |p| p.omega),
    };
    let p = ModelParams {
        n,
        alpha: a.alpha.or(cfg.alpha).or(preset.map(|p| p.alpha)).unwrap_or(0.0),
        omega,
        eps1: a.eps1.or(cfg.eps1).or(preset.map(|p| p.eps1.min(lo))).unwrap_or(lo),
        eps2: a.eps2.or(cfg.eps2).or(preset.map(|p| p.eps2.max(hi))).unwrap_or(hi),
        l: a.l.or(cfg.l).or(preset.map(|p| p.l)).unwrap_or(params::MIN_DENSE_THRESHOLD),
        m: a.m.or(cfg.m).or(preset.map(|p| p.m)).unwrap_or(1),
    };
    p.validate()?;
    Ok((p, density))
}

fn print_json(v: &impl serde::Serialize) -> CliResult<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(Error::from)?;
    writeln!(out).map_err(Error::from)?;
    Ok(())
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, v).map_err(Error::from)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(Error::from)?;
    Ok(())
}

fn cmd_params(a: &ModelArgs) -> CliResult<()> {
    let cfg = read_config(a.config.as_deref())?;
    let (p, _) = resolve_model("params", a, &cfg, None)?;
    print_json(&ParamsReport::compute(&p)?)
}

fn trial(cmd: &str, a: &RunArgs) -> CliResult<(TrialOutcome, RunArgs)> {
    let cfg = read_config(a.model.config.as_deref())?;
    let points_path = a.points.clone().or(cfg.points.clone());
    let points: Option<Vec<Point>> = match &points_path {
        Some(path) => Some(sampling::load_points(path).map_err(|e| usage(format!("points {}: {e}", path.display())))?),
        None => None,
    };
    let (p, density) = resolve_model(cmd, &a.model, &cfg, points.as_ref().map(Vec::len))?;
    let mode = parse_mode(a.mode.as_deref().or(cfg.mode.as_deref()))?;
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let tc = TrialConfig { params: p, density, mode };
    let outcome = match points {
        Some(pts) => experiment::run_trial_on_points(&tc, pts, seed)?,
        None => experiment::run_trial_detailed(&tc, seed)?,
    };
    let resolved = RunArgs {
        svg: a.svg.clone().or(cfg.svg),
        cycle_json: a.cycle_json.clone().or(cfg.cycle_json),
        grid_json: a.grid_json.clone().or(cfg.grid_json),
        ..a.clone()
    };
    Ok((outcome, resolved))
}

fn write_artifacts(o: &TrialOutcome, a: &RunArgs) -> CliResult<()> {
    let order = o.construction.as_ref().map(|c| c.order.as_slice());
    if let Some(path) = &a.svg {
        let svg = render_svg(&o.instance, &o.grid, o.backbone.as_ref(), order, o.report.r_n);
        write_text(path, &svg)?;
        eprintln!("wrote {}", path.display());
    }
    if let Some(path) = &a.cycle_json {
        match &o.construction {
            Some(c) => write_json(path, &CycleExport::new(&c.order, c.stats, &o.instance.points, o.report.r_n))?,
            None => write_json(path, &Value::Null)?,
        }
    }
    if let Some(path) = &a.grid_json {
        write_json(path, &GridSnapshot::new(&o.grid, o.backbone.as_ref()))?;
    }
    Ok(())
}

fn cmd_run(a: &RunArgs) -> CliResult<()> {
    let (o, a) = trial("run", a)?;
    print_json(&o.report)?;
    write_artifacts(&o, &a)?;
    if !o.report.success {
        if let Some(reason) = &o.report.failure_reason {
            eprintln!("trial failed: {reason}");
        }
        return Err(Failure::Construction);
    }
    if o.report.out_of_guarantee {
        eprintln!("note: cycle stitched outside the guaranteed construction");
    }
    Ok(())
}

fn cmd_render(a: &RunArgs) -> CliResult<()> {
    let (o, a) = trial("render", a)?;
    if a.svg.is_none() {
        return Err(usage("render needs --svg PATH"));
    }
    write_artifacts(&o, &a)?;
    print_json(&o.report)
}

fn parse_cell(s: &str) -> CliResult<Cell> {
    let bad = || usage(format!("--sparse-cell `{s}`: expected ROW,COL"));
    let (r, c) = s.split_once(',').ok_or_else(bad)?;
    Ok(Cell::new(r.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?))
}

fn cmd_montecarlo(a: &BatchArgs) -> CliResult<()> {
    let cfg = read_config(a.model.config.as_deref())?;
    let (p, density) = resolve_model("montecarlo", &a.model, &cfg, None)?;
    let mode = parse_mode(a.mode.as_deref().or(cfg.mode.as_deref()))?;
    let trials = a.trials.or(cfg.trials).unwrap_or(100);
    let base_seed = a.seed.or(cfg.seed).unwrap_or(0);
    let jobs = a.jobs.or(cfg.jobs).unwrap_or(0);
    let tc = TrialConfig { params: p, density, mode };
    let summary = experiment::run_batch(&tc, trials, base_seed, jobs)?;
    if let Some(path) = a.csv.clone().or(cfg.csv) {
        experiment::write_batch_csv(&summary.rows, create(&path)?)?;
        eprintln!("wrote {}", path.display());
    }
    let mut out = serde_json::to_value(&summary).map_err(Error::from)?;
    if let Some(cell) = &a.sparse_cell {
        let cell = parse_cell(cell)?;
        let diag = experiment::sparse_diagnostic(&tc, trials, base_seed, cell, a.bound_c.unwrap_or(1.0), jobs)?;
        out["sparse_diagnostic"] = json!(diag);
    }
    print_json(&out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Params(a) => cmd_params(a),
        Command::Run(a) => cmd_run(a),
        Command::Montecarlo(a) => cmd_montecarlo(a),
        Command::Render(a) => cmd_render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Construction) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
