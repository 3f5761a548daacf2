//! Seeded trials and Monte Carlo batches.
//!
//! A trial is fully determined by its configuration and seed. Batches run
//! trial `i` with seed `base_seed + i` on a worker pool and aggregate the
//! reports in seed order, so the summary does not depend on scheduling or
//! on the number of workers.
//!
//! Success in strict mode means event `H` held and the constructed cycle is
//! a `(2 r_n, min(1, 16/(L-8)))`-bridged Hamiltonian cycle.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycle::{self, BridgeStats, Construction, EdgeAccounting};
use crate::error::{Error, Result};
use crate::grid::{self, Backbone, Cell, EventReport, GridState};
use crate::params::{self, ModelParams, TilingSpec};
use crate::sampling::{self, fmt_real, Density, Instance, Point, HALF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Construct only when `H` holds; anything else is a failure.
    Strict,
    /// Always return a Hamiltonian cycle, stitching with long bridges when
    /// the guaranteed construction does not apply.
    BestEffort,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Mode::Strict),
            "best-effort" | "best_effort" => Ok(Mode::BestEffort),
            other => Err(Error::InvalidParams(format!("unknown mode `{other}` (expected strict or best-effort)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::BestEffort => "best-effort",
        })
    }
}

/// Named parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// `n = 10^4`, `L = 40`, `alpha = 8L - 1 = 319`, `omega = 5`, `M = 4`.
    /// Mean tile occupancy is about 83, far above `L`.
    Theorem,
    /// `n = 20000`, `L = 9`, `alpha = 4`, `omega = 90`, `M = 4`: small
    /// `alpha` with the occupancy carried by `omega` (about 13 nodes per
    /// tile). `H` holds in roughly 99% of trials.
    Practical,
}

impl Preset {
    pub fn params(self) -> ModelParams {
        match self {
            Preset::Theorem => ModelParams { n: 10_000, alpha: 319.0, omega: 5.0, eps1: 1.0, eps2: 1.0, l: 40, m: 4 },
            Preset::Practical => ModelParams { n: 20_000, alpha: 4.0, omega: 90.0, eps1: 1.0, eps2: 1.0, l: 9, m: 4 },
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem" => Ok(Preset::Theorem),
            "practical" => Ok(Preset::Practical),
            other => Err(Error::InvalidParams(format!("unknown preset `{other}` (expected theorem or practical)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub params: ModelParams,
    pub density: Density,
    pub mode: Mode,
}

impl TrialConfig {
    pub fn uniform(params: ModelParams, mode: Mode) -> Self {
        Self { params, density: Density::Uniform, mode }
    }

    /// Tiling and effective rectangle width. A requested `M` above `K` is
    /// clamped to `K` (one rectangle per direction).
    pub fn tiling(&self) -> Result<(TilingSpec, usize)> {
        let spec = params::tile_side(&self.params)?;
        let m_eff = params::rect_width(self.params.m.min(spec.k), spec.k)?;
        Ok((spec, m_eff))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Events {
    #[serde(rename = "F")]
    pub f: bool,
    #[serde(rename = "I")]
    pub i: bool,
    #[serde(rename = "J")]
    pub j: bool,
    #[serde(rename = "H")]
    pub h: bool,
}

impl From<&EventReport> for Events {
    fn from(e: &EventReport) -> Self {
        Self { f: e.f, i: e.i, j: e.j, h: e.h }
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub seed: u64,
    pub mode: Mode,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub alpha: f64,
    pub omega: f64,
    pub eps1: f64,
    #[serde(rename = "M_eff")]
    pub m_eff: usize,
    pub r_n: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub t_n: f64,
    pub gamma_n: f64,
    pub events: Events,
    pub success: bool,
    /// The cycle (if any) is not covered by the construction's guarantee.
    pub out_of_guarantee: bool,
    pub stats: Option<BridgeStats>,
    pub accounting: Option<EdgeAccounting>,
    /// Why `H` or the construction failed. In best-effort mode this may be
    /// set on a successful trial to explain why it left the guarantee.
    pub failure_reason: Option<String>,
    pub runtime_ms: f64,
}

impl TrialReport {
    /// Copy with the timing field zeroed, for reproducibility comparisons.
    pub fn without_runtime(&self) -> Self {
        Self { runtime_ms: 0.0, ..self.clone() }
    }
}

/// A trial report with the intermediate objects, for rendering and export.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub report: TrialReport,
    pub instance: Instance,
    pub grid: GridState,
    pub events: EventReport,
    pub backbone: Option<Backbone>,
    pub construction: Option<Construction>,
}

pub fn run_trial(cfg: &TrialConfig, seed: u64) -> Result<TrialReport> {
    Ok(run_trial_detailed(cfg, seed)?.report)
}

pub fn run_trial_detailed(cfg: &TrialConfig, seed: u64) -> Result<TrialOutcome> {
    let started = Instant::now();
    let instance = sampling::sample_nodes(&cfg.params, &cfg.density, seed)?;
    run_on_instance(cfg, instance, started)
}

/// Runs the pipeline on an externally supplied point set. `cfg.params.n`
/// must match the number of points.
pub fn run_trial_on_points(cfg: &TrialConfig, points: Vec<Point>, seed: u64) -> Result<TrialOutcome> {
    let started = Instant::now();
    let instance = Instance::from_points(&cfg.params, points, seed)?;
    run_on_instance(cfg, instance, started)
}

fn run_on_instance(cfg: &TrialConfig, instance: Instance, started: Instant) -> Result<TrialOutcome> {
    let p = &cfg.params;
    let (spec, m_eff) = cfg.tiling()?;
    let (_, budget) = params::bridge_budget(p.l)?;
    let grid = grid::build_grid(&instance, &spec, p.l);
    let (events, backbone) = grid::evaluate_events(&grid, m_eff)?;
    let n = instance.points.len();
    let target_w = 2.0 * spec.r_n;

    let mut failure_reason = events.failure_reason();
    let mut construction = None;
    let mut success = false;
    let mut out_of_guarantee = false;

    match cfg.mode {
        Mode::Strict => {
            if let (true, Some(b)) = (events.h, backbone.as_ref()) {
                match cycle::construct_hamiltonian(&instance, &grid, b) {
                    Ok(c) => {
                        let verdict = cycle::validate(&c.order, &c.stats, target_w, budget, n);
                        success = verdict.valid;
                        if !verdict.valid {
                            failure_reason = Some(format!("guarantee violated: {}", verdict.reasons.join("; ")));
                        }
                        construction = Some(c);
                    }
                    Err(e) => failure_reason = Some(e.to_string()),
                }
            }
        }
        Mode::BestEffort => match cycle::best_effort_completion(&instance, &grid, m_eff) {
            Ok(c) => {
                let hamiltonian = cycle::validate(&c.order, &c.stats, f64::INFINITY, 1.0, n);
                let guaranteed = cycle::validate(&c.order, &c.stats, target_w, budget, n);
                success = hamiltonian.valid;
                out_of_guarantee = c.out_of_guarantee || !guaranteed.valid;
                if !hamiltonian.valid {
                    failure_reason = Some(hamiltonian.reasons.join("; "));
                }
                construction = Some(c);
            }
            Err(e) => failure_reason = Some(e.to_string()),
        },
    }

    let report = TrialReport {
        seed: instance.seed,
        mode: cfg.mode,
        n,
        l: p.l,
        alpha: p.alpha,
        omega: p.omega,
        eps1: p.eps1,
        m_eff,
        r_n: spec.r_n,
        k: spec.k,
        t_n: spec.t_n,
        gamma_n: spec.gamma_n,
        events: Events::from(&events),
        success,
        out_of_guarantee,
        stats: construction.as_ref().map(|c| c.stats),
        accounting: construction.as_ref().map(|c| c.cycle.accounting()),
        failure_reason,
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    Ok(TrialOutcome { report, instance, grid, events, backbone, construction })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub success: f64,
}

/// Aggregates over trials that produced a cycle; `None` when none did.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub cycles: usize,
    pub mean_gamma_actual: Option<f64>,
    pub max_gamma_actual: Option<f64>,
    /// Largest `max_edge / r_n` seen.
    pub max_edge_ratio: Option<f64>,
    pub mean_t_dense: Option<f64>,
    pub max_t_dense: Option<usize>,
    pub max_removed_per_cell: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub trials: usize,
    pub base_seed: u64,
    pub mode: Mode,
    pub rates: Rates,
    pub aggregates: Aggregates,
    /// Per-trial rows in seed order; exported as CSV, not in the JSON.
    #[serde(skip)]
    pub rows: Vec<TrialReport>,
}

impl BatchSummary {
    /// Folds reports in seed order, whatever order they arrive in.
    pub fn from_reports(mut rows: Vec<TrialReport>, base_seed: u64, mode: Mode) -> Self {
        rows.sort_by_key(|r| r.seed.wrapping_sub(base_seed));
        let trials = rows.len();
        let frac = |f: &dyn Fn(&TrialReport) -> bool| {
            if trials == 0 {
                0.0
            } else {
                rows.iter().filter(|r| f(r)).count() as f64 / trials as f64
            }
        };
        let rates = Rates {
            f: frac(&|r| r.events.f),
            i: frac(&|r| r.events.i),
            j: frac(&|r| r.events.j),
            h: frac(&|r| r.events.h),
            success: frac(&|r| r.success),
        };

        let with_stats: Vec<(&TrialReport, &BridgeStats)> =
            rows.iter().filter_map(|r| r.stats.as_ref().map(|s| (r, s))).collect();
        let cycles = with_stats.len();
        let mean = |f: &dyn Fn(&BridgeStats) -> f64| {
            (cycles > 0).then(|| with_stats.iter().map(|(_, s)| f(s)).sum::<f64>() / cycles as f64)
        };
        let max_f = |f: &dyn Fn(&TrialReport, &BridgeStats) -> f64| {
            with_stats.iter().map(|(r, s)| f(r, s)).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
        };
        let aggregates = Aggregates {
            cycles,
            mean_gamma_actual: mean(&|s| s.gamma_actual),
            max_gamma_actual: max_f(&|_, s| s.gamma_actual),
            max_edge_ratio: max_f(&|r, s| s.max_edge / r.r_n),
            mean_t_dense: mean(&|s| s.t_dense as f64),
            max_t_dense: with_stats.iter().map(|(_, s)| s.t_dense).max(),
            max_removed_per_cell: rows.iter().filter_map(|r| r.accounting.map(|a| a.max_removed_per_cell)).max(),
        };
        Self { trials, base_seed, mode, rates, aggregates, rows }
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if jobs > 0 {
        b = b.num_threads(jobs);
    }
    b.build().map_err(|e| Error::InvalidParams(format!("cannot start worker pool: {e}")))
}

/// Runs `trials` trials with seeds `base_seed + i` on `jobs` workers
/// (0 = available parallelism).
pub fn run_batch(cfg: &TrialConfig, trials: usize, base_seed: u64, jobs: usize) -> Result<BatchSummary> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be >= 1".into()));
    }
    cfg.params.validate()?;
    cfg.tiling()?;
    let rows = pool(jobs)?.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|i| run_trial(cfg, base_seed.wrapping_add(i)))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(BatchSummary::from_reports(rows, base_seed, cfg.mode))
}

/// Batch CSV column order.
pub const CSV_COLUMNS: [&str; 21] = [
    "seed", "n", "L", "alpha", "omega", "eps1", "M_eff", "r_n", "K", "t_n", "gamma_n", "F", "I", "J", "H",
    "success", "t_dense", "n_br", "max_edge", "gamma_actual", "runtime_ms",
];

fn bit(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

/// One CSV row per trial; stats columns are empty when no cycle was built.
pub fn write_batch_csv<W: Write>(rows: &[TrialReport], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CSV_COLUMNS)?;
    for r in rows {
        let (t_dense, n_br, max_edge, gamma_actual) = match &r.stats {
            Some(s) => (s.t_dense.to_string(), s.n_br.to_string(), fmt_real(s.max_edge), fmt_real(s.gamma_actual)),
            None => Default::default(),
        };
        wr.write_record([
            r.seed.to_string(),
            r.n.to_string(),
            r.l.to_string(),
            fmt_real(r.alpha),
            fmt_real(r.omega),
            fmt_real(r.eps1),
            r.m_eff.to_string(),
            fmt_real(r.r_n),
            r.k.to_string(),
            fmt_real(r.t_n),
            fmt_real(r.gamma_n),
            bit(r.events.f),
            bit(r.events.i),
            bit(r.events.j),
            bit(r.events.h),
            bit(r.success),
            t_dense,
            n_br,
            max_edge,
            gamma_actual,
            fmt_real(r.runtime_ms),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Sparse-tile bound `C (log n)^{Lq} exp(-eps1 q n t_n^2)` for `q` tiles,
/// evaluated in log space.
pub fn sparse_probability_bound(q: usize, p: &ModelParams, spec: &TilingSpec, c: f64) -> Result<f64> {
    if q == 0 {
        return Err(Error::InvalidParams("q must be >= 1".into()));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParams(format!("C must be positive and finite, got {c}")));
    }
    let ln_n = (p.n as f64).ln();
    let q = q as f64;
    let exponent = c.ln() + (p.l as f64) * q * ln_n.ln() - p.eps1 * q * p.n as f64 * spec.t_n * spec.t_n;
    Ok(exponent.exp())
}

/// Fraction of grids in which `cell` is sparse.
pub fn empirical_sparse_rate(grids: &[GridState], cell: Cell) -> Result<f64> {
    let mut counter = SparseRateCounter::new(cell);
    for g in grids {
        counter.observe(g)?;
    }
    counter.rate()
}

/// Streaming form of [`empirical_sparse_rate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparseRateCounter {
    cell: Cell,
    k: Option<usize>,
    trials: usize,
    sparse: usize,
}

impl SparseRateCounter {
    pub fn new(cell: Cell) -> Self {
        Self { cell, k: None, trials: 0, sparse: 0 }
    }

    pub fn observe(&mut self, g: &GridState) -> Result<()> {
        if *self.k.get_or_insert(g.k()) != g.k() {
            return Err(Error::InvalidInput("grids of different order in one sparse-rate sample".into()));
        }
        if self.cell.row >= g.k() || self.cell.col >= g.k() {
            return Err(Error::InvalidInput(format!("{:?} lies outside a {}x{} grid", self.cell, g.k(), g.k())));
        }
        self.trials += 1;
        self.sparse += usize::from(!g.is_dense(self.cell));
        Ok(())
    }

    pub fn rate(&self) -> Result<f64> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("no grids observed".into()));
        }
        Ok(self.sparse as f64 / self.trials as f64)
    }
}

/// Probability mass of the density on tile `cell` of a `k x k` grid.
pub fn cell_mass(d: &Density, cell: Cell, k: usize) -> f64 {
    let t = 1.0 / k as f64;
    let (x0, y0) = (-HALF + cell.col as f64 * t, -HALF + cell.row as f64 * t);
    let (x1, y1) = (x0 + t, y0 + t);
    match d {
        Density::Uniform => t * t,
        Density::Step { patches } => patches
            .iter()
            .map(|p| {
                let w = (x1.min(p.x1) - x0.max(p.x0)).max(0.0);
                let h = (y1.min(p.y1) - y0.max(p.y0)).max(0.0);
                p.weight * w * h
            })
            .sum(),
    }
}

/// `P(Bin(n, p) < l)`, summed in log space.
pub fn binomial_tail_below(n: usize, p: f64, l: usize) -> f64 {
    if l == 0 {
        return 0.0;
    }
    if l > n {
        return 1.0;
    }
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut log_pmf = n as f64 * lq;
    let mut terms = Vec::with_capacity(l);
    for k in 0..l {
        terms.push(log_pmf);
        log_pmf += ((n - k) as f64).ln() - ((k + 1) as f64).ln() + lp - lq;
    }
    let peak = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (peak + terms.iter().map(|t| (t - peak).exp()).sum::<f64>().ln()).exp().min(1.0)
}

/// Empirical sparse rate of one tile next to its exact binomial value and the
/// sparse-tile bound with `q = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparseDiagnostic {
    pub cell: Cell,
    pub trials: usize,
    pub empirical_rate: f64,
    pub binomial_tail: f64,
    /// Standard error of the empirical rate under the binomial value.
    pub std_error: f64,
    pub bound: f64,
    pub bound_constant: f64,
}

impl SparseDiagnostic {
    /// Number of standard errors between empirical and exact rates.
    pub fn z_score(&self) -> f64 {
        if self.std_error == 0.0 {
            if self.empirical_rate == self.binomial_tail { 0.0 } else { f64::INFINITY }
        } else {
            (self.empirical_rate - self.binomial_tail).abs() / self.std_error
        }
    }
}

/// Samples `trials` instances (seeds `base_seed + i`) and measures how often
/// `cell` is sparse.
pub fn sparse_diagnostic(
    cfg: &TrialConfig,
    trials: usize,
    base_seed: u64,
    cell: Cell,
    bound_constant: f64,
    jobs: usize,
) -> Result<SparseDiagnostic> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be >= 1".into()));
    }
    let (spec, _) = cfg.tiling()?;
    if cell.row >= spec.k || cell.col >= spec.k {
        return Err(Error::InvalidInput(format!("{cell:?} lies outside a {0}x{0} grid", spec.k)));
    }
    let sparse = pool(jobs)?.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|i| {
                let inst = sampling::sample_nodes(&cfg.params, &cfg.density, base_seed.wrapping_add(i))?;
                let count = inst.points.iter().filter(|p| grid::cell_of(p, spec.k) == cell).count();
                Ok(usize::from(count < cfg.params.l))
            })
            .collect::<Result<Vec<usize>>>()
    })?;
    let empirical_rate = sparse.iter().sum::<usize>() as f64 / trials as f64;
    let binomial_tail = binomial_tail_below(cfg.params.n, cell_mass(&cfg.density, cell, spec.k), cfg.params.l);
    Ok(SparseDiagnostic {
        cell,
        trials,
        empirical_rate,
        binomial_tail,
        std_error: (binomial_tail * (1.0 - binomial_tail) / trials as f64).sqrt(),
        bound: sparse_probability_bound(1, &cfg.params, &spec, bound_constant)?,
        bound_constant,
    })
}
