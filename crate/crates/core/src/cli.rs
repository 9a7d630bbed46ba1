//! Command-line front end.
//!
//! Exit codes: 0 success, 1 output I/O failure, 2 configuration or usage
//! error, 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::config::{Config, ConfigError, GridFile};
use crate::dynamics::{run_cycles, run_cycles_observed, RunState, TraceRow};
use crate::error::{DynamicsError, ExperimentError};
use crate::experiments::{
    calibrate, efficiency, scenarios, sweep_delta, vertical_capability, CalibrationTarget, RowStatus,
};
use crate::gait::canonical_schedule;
use crate::inflation::payload_capacity;
use crate::output::{fmt_g9, sha256_hex, RunManifest, Table};

#[derive(Debug, Parser)]
#[command(name = "ovisim", version, about = "Stick-slip simulation of a sliding in-pipe robot")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run gait cycles and write cycles.csv (and optionally trace.csv).
    Simulate {
        config: PathBuf,
        #[arg(long)]
        cycles: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        trace: bool,
    },
    /// Run a diameter-ratio sweep and write sweep.csv and summary.csv.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1u64, 2, 3])]
        seeds: Vec<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Fit friction parameters to the bench efficiencies.
    Calibrate {
        config: PathBuf,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Payload capacity and vertical holding margin.
    Capacity {
        config: PathBuf,
        /// Total mass to hold (kg); defaults to robot plus cart plus payload.
        #[arg(long)]
        mass: Option<f64>,
    },
    /// Print the gait phase table.
    Gait {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        groups: Option<usize>,
        #[arg(long)]
        stroke: Option<f64>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Io(_) => 1,
            Self::Usage(_) => 2,
            Self::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Numerical(m) | Self::Io(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::Usage(e.to_string())
    }
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Domain(d) => Self::Usage(d.to_string()),
            other => Self::Numerical(other.to_string()),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Dynamics(d) => d.into(),
            ExperimentError::Domain(d) => Self::Usage(d.to_string()),
            other => Self::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

/// Parses `args` and runs the command, printing errors to standard error.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Simulate {
            config,
            cycles,
            seed,
            out,
            trace,
        } => simulate(&config, cycles, seed, &out, trace),
        Command::Sweep {
            config,
            grid,
            seeds,
            out,
        } => sweep(&config, grid.as_deref(), &seeds, &out),
        Command::Calibrate { config, budget, out } => calibrate_cmd(&config, budget, &out),
        Command::Capacity { config, mass } => capacity(&config, mass),
        Command::Gait {
            config,
            groups,
            stroke,
        } => gait(config.as_deref(), groups, stroke),
    }
}

fn start_manifest(command: &str, path: &Path, raw: &[u8]) -> RunManifest {
    let mut m = RunManifest::new(command);
    m.config_path = Some(path.to_path_buf());
    m.config_sha256 = Some(sha256_hex(raw));
    m
}

fn finish_manifest(mut m: RunManifest, out: &Path, started: Instant) -> Result<(), Failure> {
    m.wall_clock_s = started.elapsed().as_secs_f64();
    crate::output::write_atomic(&out.join("manifest.json"), m.to_json().as_bytes())?;
    Ok(())
}

fn simulate(path: &Path, cycles: Option<usize>, seed: Option<u64>, out: &Path, trace: bool) -> Result<(), Failure> {
    let started = Instant::now();
    let (mut cfg, raw) = Config::load(path)?;
    if let Some(s) = seed {
        cfg.friction.seed = s;
    }
    let n = cycles.unwrap_or(cfg.run.cycles);
    if n == 0 {
        return Err(Failure::Usage("--cycles must be >= 1".into()));
    }
    let setup = cfg.setup();
    let mut state = RunState::new(cfg.robot.n_sliders(), cfg.run.station_mm);
    if cfg.run.settle_cycles > 0 {
        run_cycles(cfg.run.settle_cycles, &mut state, &setup)?;
    }
    let n_sliders = cfg.robot.n_sliders();
    let mut trace_table = Table::new(
        ["cycle", "phase", "label", "tau", "tube_x_mm"]
            .into_iter()
            .map(String::from)
            .chain((1..=n_sliders).map(|i| format!("force_{i}_n"))),
    );
    let settle = cfg.run.settle_cycles;
    let per_cycle = setup.schedule.phases.len();
    let mut record = |row: &TraceRow| {
        if trace {
            let mut r = vec![
                (row.cycle + 1 - settle).to_string(),
                (row.phase % per_cycle + 1).to_string(),
                row.label.to_string(),
                fmt_g9(row.tau),
                fmt_g9(row.tube_x_mm),
            ];
            r.extend(row.forces_n.iter().map(|f| fmt_g9(*f)));
            trace_table.push(r);
        }
    };
    let results = run_cycles_observed(n, &mut state, &setup, &mut record)?;

    let mut table = Table::new(["cycle", "net_mm", "eta_percent", "slip_events"]);
    for (i, c) in results.iter().enumerate() {
        let eta = efficiency(c.x_initial_mm, c.x_final_mm, setup.theoretical_per_cycle_mm())
            .map_err(|e| Failure::Usage(e.to_string()))?;
        table.push(vec![
            (i + 1).to_string(),
            fmt_g9(c.net_tube_displacement_mm),
            fmt_g9(eta),
            c.slip_event_count().to_string(),
        ]);
    }
    let mut manifest = start_manifest("simulate", path, &raw);
    manifest.seeds = vec![cfg.friction.seed];
    manifest.parameters = json!({ "cycles": n, "settle_cycles": settle, "trace": trace });
    manifest.emit(&out.join("cycles.csv"), &table.to_bytes())?;
    if trace {
        manifest.emit(&out.join("trace.csv"), &trace_table.to_bytes())?;
    }
    let total = results.iter().fold(0.0, |a, c| a + c.net_tube_displacement_mm);
    println!(
        "{n} cycles: net {} mm, efficiency {} %",
        fmt_g9(total),
        fmt_g9(total.abs() / (setup.theoretical_per_cycle_mm() * n as f64) * 100.0)
    );
    finish_manifest(manifest, out, started)
}

fn sweep(path: &Path, grid: Option<&Path>, seeds: &[u64], out: &Path) -> Result<(), Failure> {
    let started = Instant::now();
    let (cfg, raw) = Config::load(path)?;
    let points = match grid {
        Some(g) => GridFile::load(g)?,
        None => scenarios::default_grid(&cfg.robot).map_err(|e| Failure::Usage(e.to_string()))?,
    };
    let result = sweep_delta(
        &points,
        &cfg.robot,
        &cfg.friction,
        &cfg.load,
        cfg.protocol(),
        cfg.solver(),
        seeds,
    )?;
    let mut rows = Table::new([
        "point",
        "tube",
        "actuation_mm",
        "free_diameter_mm",
        "delta",
        "seed",
        "cycles",
        "net_mm",
        "theoretical_mm",
        "eta_percent",
        "slip_event_count",
        "status",
        "error",
    ]);
    for r in &result.rows {
        let (status, error) = match &r.status {
            RowStatus::Ok => ("ok", String::new()),
            RowStatus::Error(e) => ("error", e.clone()),
        };
        rows.push(vec![
            (r.point + 1).to_string(),
            r.tube.clone(),
            fmt_g9(r.actuation_mm),
            fmt_g9(r.free_diameter_mm),
            fmt_g9(r.delta),
            r.seed.to_string(),
            r.cycles.to_string(),
            fmt_g9(r.net_mm),
            fmt_g9(r.theoretical_mm),
            fmt_g9(r.eta_percent),
            r.slip_events.to_string(),
            status.into(),
            error,
        ]);
    }
    let mut summary = Table::new(["rows", "ok_rows", "mean_eta_percent", "pearson_r", "reason"]);
    let (r_text, reason) = match &result.pearson_r {
        Ok(r) => (fmt_g9(*r), String::new()),
        Err(reason) => (String::new(), reason.clone()),
    };
    summary.push(vec![
        result.rows.len().to_string(),
        result.ok_rows().count().to_string(),
        result.mean_eta().map(fmt_g9).unwrap_or_default(),
        r_text.clone(),
        reason.clone(),
    ]);
    let mut manifest = start_manifest("sweep", path, &raw);
    manifest.seeds = seeds.to_vec();
    manifest.parameters = json!({
        "grid": grid.map(|g| g.display().to_string()),
        "points": points.len(),
        "settle_cycles": cfg.run.settle_cycles,
        "cycles": cfg.run.cycles,
    });
    manifest.emit(&out.join("sweep.csv"), &rows.to_bytes())?;
    manifest.emit(&out.join("summary.csv"), &summary.to_bytes())?;
    println!(
        "{} rows ({} ok), pearson_r {}",
        result.rows.len(),
        result.ok_rows().count(),
        if r_text.is_empty() { format!("undefined ({reason})") } else { r_text }
    );
    finish_manifest(manifest, out, started)
}

fn calibrate_cmd(path: &Path, budget: Option<usize>, out: &Path) -> Result<(), Failure> {
    let started = Instant::now();
    let (cfg, raw) = Config::load(path)?;
    let mut target = CalibrationTarget::bench(&cfg.robot, &cfg.load).map_err(|e| Failure::Usage(e.to_string()))?;
    target.bounds = cfg.calibration.bounds;
    for t in &mut target.targets {
        t.scenario.solver = cfg.solver();
        t.scenario.protocol = cfg.protocol();
    }
    let budget = budget.unwrap_or(cfg.calibration.budget);
    let result = calibrate(&target, &cfg.friction, budget)?;

    let mut table = Table::new(["target", "target_percent", "achieved_percent", "residual", "weight"]);
    for r in &result.residuals {
        table.push(vec![
            r.name.clone(),
            fmt_g9(r.target_percent),
            fmt_g9(r.achieved_percent),
            fmt_g9(r.residual()),
            fmt_g9(r.weight),
        ]);
    }
    #[derive(serde::Serialize)]
    struct Fragment<'a> {
        friction: &'a crate::model::FrictionParams,
    }
    let fragment = format!(
        "# evaluations = {}, converged = {}, objective = {}\n{}",
        result.evaluations,
        result.converged,
        fmt_g9(result.objective),
        toml::to_string(&Fragment {
            friction: &result.friction
        })
        .expect("friction serializes")
    );
    let mut manifest = start_manifest("calibrate", path, &raw);
    manifest.seeds = vec![cfg.friction.seed];
    manifest.parameters = json!({
        "budget": budget,
        "evaluations": result.evaluations,
        "converged": result.converged,
    });
    manifest.emit(&out.join("residuals.csv"), &table.to_bytes())?;
    manifest.emit(&out.join("fitted_friction.toml"), fragment.as_bytes())?;
    println!(
        "mu_s {} mu_k {} k_t {} sigma {} after {} evaluations ({})",
        fmt_g9(result.friction.mu_s),
        fmt_g9(result.friction.mu_k),
        fmt_g9(result.friction.k_t),
        fmt_g9(result.friction.heterogeneity_sigma),
        result.evaluations,
        if result.converged { "converged" } else { "budget exhausted" }
    );
    for r in &result.residuals {
        println!("  {}: {} % (target {} %)", r.name, fmt_g9(r.achieved_percent), fmt_g9(r.target_percent));
    }
    finish_manifest(manifest, out, started)
}

fn capacity(path: &Path, mass: Option<f64>) -> Result<(), Failure> {
    let (cfg, _) = Config::load(path)?;
    let station = 0.5 * cfg.tube.length_mm;
    let kg = payload_capacity(&cfg.robot, cfg.run.actuation_mm, &cfg.tube, station, cfg.friction.mu_s)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let total = mass.unwrap_or(cfg.robot.mass_kg + cfg.load.total_mass_kg());
    let cap = vertical_capability(&cfg.robot, &cfg.tube, cfg.run.actuation_mm, &cfg.friction, total)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    println!("payload capacity: {:.2} kg", kg);
    println!("capacity_kg,{}", fmt_g9(kg));
    println!("total_normal_n,{}", fmt_g9(cap.total_normal_n));
    println!("total_mass_kg,{}", fmt_g9(total));
    println!("capable,{}", cap.capable);
    println!("margin_n,{}", fmt_g9(cap.margin_n));
    Ok(())
}

fn gait(config: Option<&Path>, groups: Option<usize>, stroke: Option<f64>) -> Result<(), Failure> {
    let (n, s, custom) = match config {
        Some(p) => {
            let (cfg, _) = Config::load(p)?;
            let custom = cfg.gait.phases.is_some().then(|| cfg.schedule());
            (cfg.robot.n_groups, cfg.robot.stroke_mm, custom)
        }
        None => (3, 10.0, None),
    };
    let schedule = match (custom, groups, stroke) {
        (Some(c), None, None) => c,
        _ => canonical_schedule(groups.unwrap_or(n), stroke.unwrap_or(s)).map_err(|e| Failure::Usage(e.to_string()))?,
    };
    print!("{}", schedule.table());
    Ok(())
}
