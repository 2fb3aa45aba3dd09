//! Command line front end: loads scenario files, drives the core solvers,
//! and writes CSV artifacts plus a JSON run manifest per invocation.
//!
//! Exit codes: 0 success, 1 bad command line, 2 invalid input, 3 a path or
//! integration failed, 4 a terminal target is unreachable, 5 a solver ran
//! out of iterations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fishery_core::ccd;
use fishery_core::error::Error as CoreError;
use fishery_core::scenario::{validate, Scenario};
use fishery_core::shooting::{self, KEvaluation};
use fishery_core::simulate::{self, HarvestSpec, SimSpec};
use fishery_core::trajectory::{Grid, SensitivityScope, Trajectory};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

pub mod format;
pub mod manifest;

use manifest::Manifest;

/// Sentinel upper control bound used by `--unbounded-control`.
pub const UNBOUNDED_H_MAX: f64 = 1e6;

/// Stock rates below this at the end of a run count as settled.
pub const SETTLE_RATE_TOL: f64 = 0.05;

/// Consecutive sweep terminals closer than this end the horizon-study walk.
const PLATEAU_TOL: f64 = 1e-3;
const PLATEAU_STEP: f64 = 0.2;
const PLATEAU_MAX_STEPS: usize = 1000;

#[derive(Parser, Debug)]
#[command(
    name = "fishery",
    version,
    about = "Multi-species harvest scheduling: simulation, optimization, and sweep studies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate the stock dynamics forward under a fixed harvest policy.
    Simulate(SimulateArgs),
    /// Find the revenue-maximizing harvest schedule meeting the terminal
    /// stock targets.
    Optimize(OptimizeArgs),
    /// Evaluate one species' constant-K paths over a grid of K values.
    SweepK(SweepKArgs),
    /// Re-solve under several horizons and report each horizon's largest
    /// reachable terminal stock.
    SweepHorizon(SweepHorizonArgs),
    /// Validate a scenario file and report every broken rule.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Years to simulate (default: the scenario horizon).
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Euler steps (default: ten per year, at least two).
    #[arg(long)]
    pub steps: Option<usize>,
    /// "none", one rate for all species, or one rate per species
    /// (comma-separated).
    #[arg(long, default_value = "none")]
    pub harvest: String,
    /// Output directory for trajectory.csv and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory for solution.csv, history.csv and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Replace every upper control bound with a non-binding sentinel.
    #[arg(long)]
    pub unbounded_control: bool,
}

#[derive(Args, Debug)]
pub struct SweepKArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Species to sweep, 1-based.
    #[arg(long)]
    pub species: usize,
    /// Comma-separated K values, evaluated in the given order.
    #[arg(long, allow_hyphen_values = true)]
    pub k_grid: String,
    /// Directory holding a previous `optimize` run; its solution.csv fixes
    /// the companion stocks. Without it companions stay at their starting
    /// stocks.
    #[arg(long)]
    pub companions: Option<PathBuf>,
    /// Replace every upper control bound with a non-binding sentinel.
    #[arg(long)]
    pub unbounded_control: bool,
    /// Output directory for sweep.csv, per-K path files and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SweepHorizonArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Species to study, 1-based.
    #[arg(long)]
    pub species: usize,
    /// Comma-separated horizons in years, reported in the given order.
    #[arg(long, allow_hyphen_values = true)]
    pub horizons: String,
    /// Replace every upper control bound with a non-binding sentinel.
    #[arg(long)]
    pub unbounded_control: bool,
    /// Output directory for horizons.csv and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
}

/// Anything that can stop a run, with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or unparsable input, or a scenario that broke validation.
    Input(String),
    /// The model failed while integrating (collapse, overflow, bad grid).
    Integration(String),
    /// A terminal target lies outside what any control can reach.
    Unreachable(String),
    /// An iteration budget ran out before convergence.
    NoConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Integration(_) => 3,
            CliError::Unreachable(_) => 4,
            CliError::NoConvergence(_) => 5,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m)
            | CliError::Integration(m)
            | CliError::Unreachable(m)
            | CliError::NoConvergence(m) => m,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let text = e.to_string();
        match e {
            CoreError::InvalidScenario { .. } | CoreError::Domain { .. } => CliError::Input(text),
            CoreError::InfeasiblePath { .. }
            | CoreError::Overflow { .. }
            | CoreError::InvalidBracket { .. }
            | CoreError::InvalidGrid { .. } => CliError::Integration(text),
            CoreError::InfeasibleTarget { .. } => CliError::Unreachable(text),
            CoreError::NoRoot { .. } | CoreError::NoConvergence { .. } => {
                CliError::NoConvergence(text)
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Optimize(a) => cmd_optimize(&a),
        Command::SweepK(a) => cmd_sweep_k(&a),
        Command::SweepHorizon(a) => cmd_sweep_horizon(&a),
        Command::Check(a) => cmd_check(&a),
    }
}

fn load_scenario(path: &Path) -> Result<(Scenario, String), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let scenario: Scenario = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let violations = validate(&scenario);
    if !violations.is_empty() {
        let mut msg = format!("{} is invalid:", path.display());
        for v in &violations {
            let _ = write!(msg, "\n  {v}");
        }
        return Err(CliError::Input(msg));
    }
    let digest = hex_digest(&text);
    Ok((scenario, digest))
}

fn hex_digest(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let out = hasher.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        let _ = write!(s, "{b:02x}");
    }
    s
}

fn lift_control_bounds(scenario: &mut Scenario) {
    for sp in &mut scenario.species {
        sp.h_max = UNBOUNDED_H_MAX;
    }
}

fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let workers = match std::env::var("FISHERY_WORKERS") {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| CliError::Input(format!("FISHERY_WORKERS must be a positive integer, got {v:?}")))?,
        Err(_) => 1,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Input(e.to_string()))
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    std::fs::write(dir.join(name), content)
        .map_err(|e| CliError::Input(format!("cannot write {name}: {e}")))
}

/// CSV rows `t,x_1..x_n,h_1..h_n` for a full trajectory.
fn trajectory_csv(grid: &Grid, tr: &Trajectory) -> String {
    let n = tr.n_species();
    let mut out = String::from("t");
    for i in 1..=n {
        let _ = write!(out, ",x_{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",h_{i}");
    }
    out.push('\n');
    for node in 0..tr.n_nodes() {
        let _ = write!(out, "{}", format::sig6(grid.time(node)));
        for i in 0..n {
            let _ = write!(out, ",{}", format::sig6(tr.stocks[node][i]));
        }
        for i in 0..n {
            let _ = write!(out, ",{}", format::sig6(tr.harvests[node][i]));
        }
        out.push('\n');
    }
    out
}

fn parse_harvest(arg: &str, n: usize) -> Result<HarvestSpec, CliError> {
    if arg == "none" {
        return Ok(HarvestSpec::None);
    }
    let rates = parse_f64_list(arg, "--harvest")?;
    let rates = if rates.len() == 1 {
        vec![rates[0]; n]
    } else if rates.len() == n {
        rates
    } else {
        return Err(CliError::Input(format!(
            "--harvest needs 1 or {n} rates, got {}",
            rates.len()
        )));
    };
    Ok(HarvestSpec::Constant(rates))
}

fn parse_f64_list(arg: &str, what: &str) -> Result<Vec<f64>, CliError> {
    arg.split(',')
        .map(|s| {
            let t = s.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Input(format!("{what}: {t:?} is not a finite number")))
        })
        .collect()
}

fn species_index(one_based: usize, n: usize) -> Result<usize, CliError> {
    if one_based == 0 || one_based > n {
        return Err(CliError::Input(format!(
            "--species must be between 1 and {n}, got {one_based}"
        )));
    }
    Ok(one_based - 1)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let (scenario, digest) = load_scenario(&args.scenario)?;
    let n = scenario.n_species();
    let horizon = args.horizon.unwrap_or(scenario.horizon);
    let n_steps = args.steps.unwrap_or_else(|| simulate::default_sim_steps(horizon));
    let harvests = parse_harvest(&args.harvest, n)?;
    let spec = SimSpec {
        horizon,
        n_steps,
        x0: scenario.species.iter().map(|s| s.x0).collect(),
        harvests,
    };
    let grid = Grid::new(horizon, n_steps)?;
    let tr = simulate::integrate(&scenario, &spec)?;

    let last = tr.n_nodes() - 1;
    let terminal = tr.stocks[last].clone();
    let rates: Result<Vec<f64>, CoreError> = (0..n)
        .map(|i| scenario.dynamics(i, &tr.stocks[last], tr.harvests[last][i]))
        .collect();
    let rates = rates?;
    let settled = rates.iter().all(|r| r.abs() < SETTLE_RATE_TOL);

    ensure_out_dir(&args.out)?;
    write_file(&args.out, "trajectory.csv", &trajectory_csv(&grid, &tr))?;

    let mut m = Manifest::new("simulate", &args.scenario, &digest);
    m.setting("horizon", horizon);
    m.setting("steps", n_steps);
    m.setting("harvest", args.harvest.clone());
    m.output("trajectory.csv");
    m.metric("terminal_stocks", terminal.clone());
    m.metric("terminal_rates", rates);
    m.metric("settled", settled);
    write_file(&args.out, "manifest.json", &m.render())?;

    for (i, v) in terminal.iter().enumerate() {
        println!("x_{} terminal: {}", i + 1, format::sig6(*v));
    }
    println!("settled: {settled}");
    Ok(())
}

/// CSV rows `iter,K_1..K_n,objective` for the outer iteration history.
fn history_csv(history: &[ccd::HistoryEntry], n: usize) -> String {
    let mut out = String::from("iter");
    for i in 1..=n {
        let _ = write!(out, ",K_{i}");
    }
    out.push_str(",objective\n");
    for (pass, entry) in history.iter().enumerate() {
        let _ = write!(out, "{}", pass + 1);
        for i in 0..n {
            let _ = write!(out, ",{}", format::sig6(entry.k[i]));
        }
        let _ = write!(out, ",{}", format::sig6(entry.objective));
        out.push('\n');
    }
    out
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<(), CliError> {
    let (mut scenario, digest) = load_scenario(&args.scenario)?;
    if args.unbounded_control {
        lift_control_bounds(&mut scenario);
    }
    let n = scenario.n_species();
    let grid = Grid::new(scenario.horizon, scenario.solver.grid_steps)?;
    let solution = ccd::solve(&scenario)?;

    ensure_out_dir(&args.out)?;
    write_file(
        &args.out,
        "solution.csv",
        &trajectory_csv(&grid, &solution.trajectory),
    )?;
    write_file(&args.out, "history.csv", &history_csv(&solution.history, n))?;

    let mut m = Manifest::new("optimize", &args.scenario, &digest);
    m.setting("unbounded_control", args.unbounded_control);
    m.setting("grid_steps", scenario.solver.grid_steps);
    m.setting("tol_terminal", scenario.solver.shooting.tol_terminal);
    m.setting("tol_k_change", scenario.solver.ccd.tol_k_change);
    m.setting("max_outer_iters", scenario.solver.ccd.max_outer_iters);
    m.output("solution.csv");
    m.output("history.csv");
    m.metric("revenue", solution.revenue);
    m.metric("k", solution.k.clone());
    m.metric("boundary_residuals", solution.residuals.clone());
    m.metric("outer_iters", solution.outer_iters);
    write_file(&args.out, "manifest.json", &m.render())?;

    for (i, k) in solution.k.iter().enumerate() {
        println!("K_{}: {}", i + 1, format::sig6(*k));
    }
    println!("revenue: {}", format::sig6(solution.revenue));
    println!("outer iterations: {}", solution.outer_iters);
    Ok(())
}

/// CSV rows `t,x_i,h_i` for one species' constant-K path.
fn species_path_csv(grid: &Grid, path: &fishery_core::trajectory::SpeciesPath, i: usize) -> String {
    let mut out = format!("t,x_{},h_{}\n", i + 1, i + 1);
    for node in 0..path.stocks.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            format::sig6(grid.time(node)),
            format::sig6(path.stocks[node]),
            format::sig6(path.harvests[node])
        );
    }
    out
}

/// Companion stocks for a sweep: a previous solution's trajectory, or the
/// starting stocks held constant.
fn sweep_companions(
    scenario: &Scenario,
    grid: &Grid,
    dir: Option<&PathBuf>,
) -> Result<Vec<Vec<f64>>, CliError> {
    let n = scenario.n_species();
    match dir {
        None => {
            let row: Vec<f64> = scenario.species.iter().map(|s| s.x0).collect();
            Ok(vec![row; grid.n_nodes()])
        }
        Some(d) => {
            let path = d.join("solution.csv");
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            let mut rows = Vec::new();
            for (ln, line) in text.lines().enumerate().skip(1) {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != 1 + 2 * n {
                    return Err(CliError::Input(format!(
                        "{}:{}: expected {} columns, got {}",
                        path.display(),
                        ln + 1,
                        1 + 2 * n,
                        fields.len()
                    )));
                }
                let stocks: Result<Vec<f64>, CliError> = fields[1..=n]
                    .iter()
                    .map(|f| {
                        f.parse::<f64>().map_err(|e| {
                            CliError::Input(format!("{}:{}: {e}", path.display(), ln + 1))
                        })
                    })
                    .collect();
                rows.push(stocks?);
            }
            if rows.len() != grid.n_nodes() {
                return Err(CliError::Input(format!(
                    "{} has {} data rows but the grid needs {}",
                    path.display(),
                    rows.len(),
                    grid.n_nodes()
                )));
            }
            Ok(rows)
        }
    }
}

fn cmd_sweep_k(args: &SweepKArgs) -> Result<(), CliError> {
    let (mut scenario, digest) = load_scenario(&args.scenario)?;
    if args.unbounded_control {
        lift_control_bounds(&mut scenario);
    }
    let i = species_index(args.species, scenario.n_species())?;
    let ks = parse_f64_list(&args.k_grid, "--k-grid")?;
    if ks.is_empty() {
        return Err(CliError::Input("--k-grid is empty".into()));
    }
    let grid = Grid::new(scenario.horizon, scenario.solver.grid_steps)?;
    let companions = sweep_companions(&scenario, &grid, args.companions.as_ref())?;

    let pool = worker_pool()?;
    let evals: Result<Vec<KEvaluation>, CoreError> = pool.install(|| {
        ks.par_iter()
            .map(|&k| {
                shooting::evaluate(k, i, &scenario, &companions, &grid, SensitivityScope::OwnOnly)
            })
            .collect()
    });
    let evals = evals.map_err(CliError::from)?;

    ensure_out_dir(&args.out)?;
    let mut sweep = String::from("K,terminal_stock,feasible_flag\n");
    let mut path_files = Vec::new();
    for e in &evals {
        let _ = writeln!(
            sweep,
            "{},{},{}",
            format::sig6(e.k),
            format::sig6(e.terminal),
            e.feasible
        );
        if let Some(p) = &e.path {
            let name = format!("path_k_{}.csv", format::sig6(e.k));
            write_file(&args.out, &name, &species_path_csv(&grid, p, i))?;
            path_files.push(name);
        }
    }
    write_file(&args.out, "sweep.csv", &sweep)?;

    let mut m = Manifest::new("sweep-k", &args.scenario, &digest);
    m.setting("species", args.species);
    m.setting("k_grid", ks.clone());
    m.setting("unbounded_control", args.unbounded_control);
    m.setting(
        "companions",
        args.companions
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "constant".into()),
    );
    m.output("sweep.csv");
    for f in &path_files {
        m.output(f);
    }
    m.metric(
        "terminals",
        evals.iter().map(|e| e.terminal).collect::<Vec<_>>(),
    );
    m.metric("feasible", evals.iter().map(|e| e.feasible).collect::<Vec<_>>());
    write_file(&args.out, "manifest.json", &m.render())?;

    println!("swept {} K values for species {}", evals.len(), args.species);
    Ok(())
}

/// Largest terminal stock species i can hold at the given horizon: walk K
/// upward from zero until the terminal stops moving, and report the last
/// value. The walk re-solves the coupled schedule first so companions sit
/// on their optimized paths.
fn max_terminal_for_horizon(
    scenario: &Scenario,
    i: usize,
    horizon: f64,
) -> Result<f64, CliError> {
    let mut sc = scenario.clone();
    sc.horizon = horizon;
    let solution = ccd::solve(&sc)?;
    let grid = Grid::new(horizon, sc.solver.grid_steps)?;
    let companions = solution.trajectory.stocks;

    let mut prev: Option<f64> = None;
    for step in 0..PLATEAU_MAX_STEPS {
        let k = PLATEAU_STEP * step as f64;
        let eval = shooting::evaluate(k, i, &sc, &companions, &grid, SensitivityScope::OwnOnly)?;
        let terminal = eval.terminal;
        if let Some(p) = prev {
            if (terminal - p).abs() < PLATEAU_TOL {
                return Ok(terminal);
            }
        }
        prev = Some(terminal);
    }
    Err(CliError::NoConvergence(format!(
        "terminal stock of species {} has no plateau below K = {}",
        i + 1,
        PLATEAU_STEP * PLATEAU_MAX_STEPS as f64
    )))
}

fn cmd_sweep_horizon(args: &SweepHorizonArgs) -> Result<(), CliError> {
    let (mut scenario, digest) = load_scenario(&args.scenario)?;
    if args.unbounded_control {
        lift_control_bounds(&mut scenario);
    }
    let i = species_index(args.species, scenario.n_species())?;
    let horizons = parse_f64_list(&args.horizons, "--horizons")?;
    if horizons.is_empty() {
        return Err(CliError::Input("--horizons is empty".into()));
    }
    if let Some(bad) = horizons.iter().find(|h| **h <= 0.0) {
        return Err(CliError::Input(format!("--horizons: {bad} is not positive")));
    }

    let pool = worker_pool()?;
    let maxima: Result<Vec<f64>, CliError> = pool.install(|| {
        horizons
            .par_iter()
            .map(|&t| max_terminal_for_horizon(&scenario, i, t))
            .collect()
    });
    let maxima = maxima?;

    ensure_out_dir(&args.out)?;
    let mut csv = String::from("T,max_terminal_stock\n");
    for (t, v) in horizons.iter().zip(&maxima) {
        let _ = writeln!(csv, "{},{}", format::sig6(*t), format::sig6(*v));
    }
    write_file(&args.out, "horizons.csv", &csv)?;

    let mut m = Manifest::new("sweep-horizon", &args.scenario, &digest);
    m.setting("species", args.species);
    m.setting("horizons", horizons.clone());
    m.setting("unbounded_control", args.unbounded_control);
    m.output("horizons.csv");
    m.metric("max_terminal_stocks", maxima.clone());
    write_file(&args.out, "manifest.json", &m.render())?;

    for (t, v) in horizons.iter().zip(&maxima) {
        println!("T={}: {}", format::sig6(*t), format::sig6(*v));
    }
    Ok(())
}

fn cmd_check(args: &CheckArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.scenario)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.scenario.display())))?;
    let scenario: Scenario = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.scenario.display())))?;
    let violations = validate(&scenario);
    if violations.is_empty() {
        println!("{}: ok", args.scenario.display());
        return Ok(());
    }
    let mut msg = format!("{} is invalid:", args.scenario.display());
    for v in &violations {
        let _ = write!(msg, "\n  {v}");
    }
    Err(CliError::Input(msg))
}
