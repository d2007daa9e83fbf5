//! The `roughhj` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use roughhj::game::{delta_eps, dp_value, payoff, simulate, GameConfig, PiecewiseControl};
use roughhj::signal::{theorem_bound, BoundConfig, PathSpec};
use roughhj::solver::{abs_diagonal, dependence_radius, ic_paper, Engine, Ordering};
use roughhj::{evolve, DrivingPath, Grid, HamiltonianSpec, SolveConfig};
use serde_json::json;

use crate::config::{ExperimentName, ExperimentSpec, PathField};
use crate::report::{emit_report, Format, Report};
use crate::{run_experiment, LabError};

#[derive(Debug, Parser)]
#[command(name = "roughhj", about = "Hamilton-Jacobi equations driven by rough signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve initial data along a path and report point values.
    Solve(SolveArgs),
    /// Compute a game value by dynamic programming or play one strategy pair.
    #[command(subcommand)]
    Game(GameCommand),
    /// Run a named experiment (or `all`) and emit its report.
    Experiment(ExperimentArgs),
    /// Print the lower bound for a path and radius.
    Bound(BoundArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Path in short form, e.g. zigzag:1,4,1 or knots:0,0;1,1.
    #[arg(long)]
    path: String,
    #[arg(long, default_value = "paper_saddle")]
    hamiltonian: String,
    /// Initial data: `paper` (needs --R) or `diagonal`.
    #[arg(long, default_value = "paper")]
    ic: String,
    #[arg(long = "R", default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 0.02)]
    dx: f64,
    /// Half-width of the grid; chosen from the dependence radius when absent.
    #[arg(long = "L")]
    half_width: Option<f64>,
    #[arg(long, default_value = "morphological")]
    engine: String,
    #[arg(long, default_value_t = 64)]
    m: usize,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long, default_value = "erode_first")]
    ordering: String,
    /// Points as `x,y;x,y;...`.
    #[arg(long, default_value = "0,0")]
    points: String,
    /// Directory for solve.json and solve.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum GameCommand {
    /// Backward dynamic programming for the value at the origin.
    Dp(DpArgs),
    /// Play the epsilon strategy against a piecewise-constant reply.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct DpArgs {
    #[arg(long)]
    path: String,
    #[arg(long = "R", default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 0.05)]
    dx: f64,
    #[arg(long = "L")]
    half_width: Option<f64>,
    /// Steps per monotone stretch; one cell per step when absent.
    #[arg(long)]
    substeps: Option<usize>,
    #[arg(long, default_value_t = 3)]
    levels: usize,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    path: String,
    #[arg(long)]
    epsilon: f64,
    /// Reply values on equal pieces of [0, T], e.g. `1,-1,0.5`.
    #[arg(long, allow_hyphen_values = true)]
    beta: String,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long = "R", default_value_t = 1.0)]
    radius: f64,
    /// Write the trajectory as CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Experiment name, or `all`.
    name: String,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; the JSON report goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: String,
    #[arg(long)]
    path: Option<String>,
    #[arg(long = "R")]
    radius: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long = "L")]
    half_width: Option<f64>,
    /// Comma-separated spacings.
    #[arg(long)]
    ladder: Option<String>,
    #[arg(long)]
    engine: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget: Option<u64>,
    /// Let theorem1 pass when the bound is 0.
    #[arg(long)]
    vacuous_pass: bool,
    /// With `all`, run the experiments on separate threads.
    #[arg(long)]
    concurrent: bool,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[arg(long)]
    path: String,
    #[arg(long = "R")]
    radius: f64,
}

/// Runs the command line and returns the process exit code: 0 when every
/// verdict passes, 1 when one fails, 2 on configuration or other errors.
pub fn cli_main<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(pass) => u8::from(!pass),
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cmd: Command) -> Result<bool, LabError> {
    match cmd {
        Command::Solve(a) => solve(a).map(|_| true),
        Command::Game(GameCommand::Dp(a)) => game_dp(a).map(|_| true),
        Command::Game(GameCommand::Simulate(a)) => game_simulate(a).map(|_| true),
        Command::Experiment(a) => experiment(a),
        Command::Bound(a) => {
            let w = theorem_bound(&parse_path(&a.path)?, a.radius, &BoundConfig::default());
            println!("{}", w.value);
            Ok(true)
        }
    }
}

fn parse_path(s: &str) -> Result<DrivingPath, LabError> {
    Ok(PathSpec::parse_short(s)?.build()?)
}

fn parse_engine(s: &str) -> Result<Engine, LabError> {
    serde_json::from_value(json!(s)).map_err(|_| LabError::Config(format!("unknown engine '{s}'")))
}

fn parse_ordering(s: &str) -> Result<Ordering, LabError> {
    serde_json::from_value(json!(s)).map_err(|_| LabError::Config(format!("unknown ordering '{s}'")))
}

fn parse_list(s: &str, sep: char) -> Result<Vec<f64>, LabError> {
    s.split(sep)
        .map(|t| t.trim().parse::<f64>().map_err(|_| LabError::Config(format!("bad number '{t}'"))))
        .collect()
}

fn print_json(v: &serde_json::Value) -> Result<(), LabError> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn solve(a: SolveArgs) -> Result<(), LabError> {
    let path = parse_path(&a.path)?;
    let h = HamiltonianSpec::by_name(&a.hamiltonian)?;
    let base = match parse_engine(&a.engine)? {
        Engine::Morphological => SolveConfig::morphological(a.m),
        Engine::LaxFriedrichs => SolveConfig::lax_friedrichs(a.cfl),
    };
    let points: Vec<Vec<f64>> = a
        .points
        .split(';')
        .map(|p| parse_list(p, ','))
        .collect::<Result<_, _>>()?;
    let reach = points.iter().flatten().fold(0.0f64, |m, c| m.max(c.abs()));
    let cfg = base.with_ordering(parse_ordering(&a.ordering)?).with_observation_radius(reach);
    let half = match a.half_width {
        Some(l) => l,
        None => {
            let dep = dependence_radius(&Grid::new(h.dim(), a.dx, a.dx)?, &path, &h, &cfg)?;
            let l = reach + dep + a.dx;
            if a.ic == "paper" { l.max(a.radius + a.dx) } else { l }
        }
    };
    let grid = Grid::new(h.dim(), half, a.dx)?;
    let u0 = match a.ic.as_str() {
        "paper" => ic_paper(&grid, a.radius)?,
        "diagonal" => abs_diagonal(&grid),
        other => return Err(LabError::Config(format!("unknown initial data '{other}'"))),
    };
    let out = evolve(&u0, &path, &h, &cfg)?;
    let mut values = serde_json::Map::new();
    for p in &points {
        let idx = out.final_state.grid().node_at(p)?;
        if !out.is_trusted(idx) {
            return Err(LabError::Config(format!("point {p:?} lies outside the trusted region")));
        }
        let key = p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        values.insert(key, json!(out.final_state.values()[idx]));
    }
    let doc = json!({
        "engine": out.engine,
        "dx": out.dx,
        "m": out.substeps_per_unit,
        "cfl": out.cfl,
        "L": half,
        "segments": out.segments,
        "sup_changes": out.sup_changes,
        "dependence_radius": out.dependence_radius,
        "trusted_radius": out.trusted_radius,
        "values": values,
    });
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("solve.json"), serde_json::to_string_pretty(&doc)? + "\n")?;
        fs::write(dir.join("solve.csv"), out.final_state.to_csv_string())?;
    }
    print_json(&doc)
}

fn game_dp(a: DpArgs) -> Result<(), LabError> {
    let path = parse_path(&a.path)?;
    let longest = path.monotone_decomposition().iter().map(|s| s.variation()).fold(0.0, f64::max);
    let n = a.substeps.unwrap_or(((longest / a.dx) - 1e-9).ceil().max(1.0) as usize);
    let half = a.half_width.unwrap_or((path.total_variation() + 3.0 * a.dx).max(a.radius + a.dx));
    let grid = Grid::new(2, half, a.dx)?;
    let table = dp_value(&path, &GameConfig::new(ic_paper(&grid, a.radius)?, n).with_levels(a.levels))?;
    print_json(&json!({
        "value": table.value_at_origin(),
        "dx": a.dx,
        "L": half,
        "substeps_per_segment": n,
        "levels": a.levels,
    }))
}

fn game_simulate(a: SimulateArgs) -> Result<(), LabError> {
    let path = parse_path(&a.path)?;
    let beta = PiecewiseControl::uniform(parse_list(&a.beta, ',')?, path.horizon())?;
    let traj = simulate(&path, &delta_eps(a.epsilon)?, &beta, a.dt)?;
    if let Some(p) = &a.out {
        fs::write(p, traj.to_csv_string())?;
    }
    let (x, y) = traj.final_position();
    print_json(&json!({
        "payoff": payoff(&traj, a.radius),
        "tau": traj.tau(),
        "final": [x, y],
        "max_gap": traj.max_gap(),
    }))
}

fn spec_for(name: ExperimentName, a: &ExperimentArgs) -> Result<ExperimentSpec, LabError> {
    let mut spec = match &a.config {
        Some(p) => {
            let spec = ExperimentSpec::from_json(&fs::read_to_string(p)?)?;
            if spec.experiment != name {
                return Err(LabError::Config(format!(
                    "config names experiment '{}' but '{name}' was requested",
                    spec.experiment
                )));
            }
            spec
        }
        None => ExperimentSpec::new(name),
    };
    if let Some(p) = &a.path {
        spec.path = Some(PathField::Short(p.clone()));
    }
    spec.radius = a.radius.or(spec.radius);
    spec.epsilon = a.epsilon.or(spec.epsilon);
    spec.grid.dx = a.dx.or(spec.grid.dx);
    spec.grid.half_width = a.half_width.or(spec.grid.half_width);
    if let Some(l) = &a.ladder {
        spec.ladder = Some(parse_list(l, ',')?);
    }
    if let Some(e) = &a.engine {
        spec.engine.kind = parse_engine(e)?;
    }
    if let Some(m) = a.m {
        spec.engine.m = m;
    }
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    spec.budget = a.budget.or(spec.budget);
    spec.vacuous_pass |= a.vacuous_pass;
    if let Some(o) = &a.out {
        spec.out = Some(o.clone());
    }
    Ok(spec)
}

fn finish(report: &Report, format: Format, out: Option<&Path>) -> Result<bool, LabError> {
    for v in &report.verdicts {
        let status = if v.pass { "PASS" } else { "FAIL" };
        match &v.note {
            Some(n) => eprintln!("{status} {}/{}: {n}", report.experiment, v.name),
            None => eprintln!("{status} {}/{}", report.experiment, v.name),
        }
    }
    match out {
        Some(dir) => {
            for p in emit_report(report, format, dir)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => print!("{}", report.to_json()),
    }
    Ok(report.all_pass())
}

fn experiment(a: ExperimentArgs) -> Result<bool, LabError> {
    let format: Format = a.format.parse()?;
    let names: Vec<ExperimentName> =
        if a.name == "all" { ExperimentName::ALL.to_vec() } else { vec![a.name.parse()?] };
    let specs: Vec<ExperimentSpec> = names.iter().map(|&n| spec_for(n, &a)).collect::<Result<_, _>>()?;
    let reports: Vec<Result<Report, LabError>> = if a.concurrent {
        std::thread::scope(|s| {
            let handles: Vec<_> = specs.iter().map(|spec| s.spawn(move || run_experiment(spec))).collect();
            handles.into_iter().map(|h| h.join().expect("experiment thread panicked")).collect()
        })
    } else {
        specs.iter().map(run_experiment).collect()
    };
    let mut pass = true;
    for (spec, report) in specs.iter().zip(reports) {
        pass &= finish(&report?, format, spec.out.as_deref())?;
    }
    Ok(pass)
}
