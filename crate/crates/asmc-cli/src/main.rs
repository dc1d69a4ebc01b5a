//! Experiment CLI: closed-loop simulations, reach-time sweeps, scenario
//! reproduction, assumption checking and the time-scale cross-check.
//!
//! Configuration precedence is CLI flags over config-file values over
//! built-in defaults; the defaults are the published parameter sets, so
//! `asmc simulate --scenario 1`, `asmc simulate --scenario 2` and
//! `asmc sweep` reproduce the reference experiments with no configuration.
//!
//! Exit codes: 0 success, 2 configuration error, 3 simulation fault,
//! 4 I/O failure, 5 verification failure.

mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use asmc::controllers::{ArpsParams, BarrierSpec, BaselineParams, Controller};
use asmc::experiments::{
    self, export_series_csv, export_sweep_csv, export_sweep_svg, export_trace_svg, run_scenario1,
    run_scenario2, run_sweep, ScenarioConfig, SweepConfig, SweepController, SweepGrid, TraceKind,
    EPSILON,
};
use asmc::integrator::{
    fmt_g17, simulate, symmetric_initial_condition, SimConfig, StateVector, Termination,
};
use asmc::plants::{
    check_assumptions, linspace, DisturbanceParams, FactoredPlant, Plant, RhoSchedule,
    UncertainInputPlant,
};
use asmc::timescale::{compare_scaled_direct, lyapunov_trace, max_forward_difference};

use config::{parse_schedule, FlatConfig};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "asmc",
    version,
    about = "Adaptive sliding-mode control simulation and experiment runner",
    long_about = "Simulates perturbed first-order MIMO systems under adaptive sliding-mode \
                  gain laws, sweeps reach times over initial conditions and disturbance \
                  sizes, replays the disturbance-step scenarios and verifies the standing \
                  assumptions. Flags override config-file keys, which override the built-in \
                  published defaults."
)]
struct Cli {
    /// Configuration file, flat `key = value` lines (see README for the schema)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for CSV/SVG/manifest files [default: out]
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Integration step in seconds [config: sim.dt]
    #[arg(long, global = true, value_name = "REAL")]
    dt: Option<f64>,

    /// Record every k-th integration step [config: sim.stride]
    #[arg(long, global = true, value_name = "INT")]
    stride: Option<usize>,

    /// Sweep the finer sampling of the full published parameter ranges
    #[arg(long, global = true)]
    dense: bool,

    /// Use the 1e-6 reference integration step instead of the 1e-5 default
    /// for scenario and single-run simulations [config: sim.dt]
    #[arg(long, global = true)]
    paper_step: bool,

    /// Worker threads for sweep parallelism [default: available cores]
    #[arg(long, global = true, value_name = "INT")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed-loop simulation or a preset scenario
    Simulate(SimulateArgs),
    /// Run a reach-time sweep over the (rho, n, b) grid
    Sweep(SweepArgs),
    /// Check the standing assumptions on a sampling grid
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Preset scenario to reproduce (1: stepping-down disturbance, three
    /// initial conditions; 2: stepping-up disturbance, 9 s horizon)
    #[arg(long, value_name = "1|2")]
    scenario: Option<u8>,

    /// Plant: `factored` (known constant input matrix with multiplicative
    /// uncertainty) or `uncertain-input` [config: plant.kind]
    #[arg(long, value_name = "NAME")]
    plant: Option<String>,

    /// Gain law: `arps` (prescribed reaching time + barrier) or `baseline`
    /// [config: controller.kind]
    #[arg(long, value_name = "NAME")]
    controller: Option<String>,

    /// Disturbance scale rho >= 0 [config: disturbance.rho]
    #[arg(long, value_name = "REAL")]
    rho: Option<f64>,

    /// Initial-condition exponent: ||sigma_0|| = b * 10^n [config: sim.sigma0_n]
    #[arg(long, value_name = "INT")]
    sigma0_n: Option<i32>,

    /// Initial-condition mantissa: ||sigma_0|| = b * 10^n [config: sim.sigma0_b]
    #[arg(long, value_name = "REAL")]
    sigma0_b: Option<f64>,

    /// Simulation horizon in seconds [config: sim.t_end]
    #[arg(long, value_name = "REAL")]
    t_end: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Gain law to sweep: `arps` or `baseline` [config: controller.kind]
    #[arg(long, value_name = "NAME")]
    controller: Option<String>,

    /// Comma-separated disturbance scales (overrides the built-in grid)
    #[arg(long, value_name = "LIST")]
    rho_values: Option<String>,

    /// Comma-separated initial-condition exponents
    #[arg(long, value_name = "LIST")]
    n_values: Option<String>,

    /// Comma-separated initial-condition mantissas
    #[arg(long, value_name = "LIST")]
    b_values: Option<String>,

    /// Accept grid values outside the published ranges
    #[arg(long)]
    allow_wide: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Plant to check [config: plant.kind]
    #[arg(long, value_name = "NAME")]
    plant: Option<String>,

    /// Disturbance scale for the bound estimate [config: disturbance.rho]
    #[arg(long, value_name = "REAL")]
    rho: Option<f64>,

    /// Also run the time-scale equivalence and decrease cross-checks
    #[arg(long)]
    oracle: bool,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Sim(String),
    Io(String),
    Verify(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Sim(_) => 3,
            CliError::Io(_) => 4,
            CliError::Verify(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Sim(m) | CliError::Io(m) | CliError::Verify(m) => m,
        }
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<asmc::experiments::ExportError> for CliError {
    fn from(e: asmc::experiments::ExportError) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

/// Resolves values with flag > config > default precedence while recording
/// everything for the manifest.
struct Resolver {
    cfg: FlatConfig,
    resolved: BTreeMap<String, String>,
    overrides: Vec<(String, String)>,
}

impl Resolver {
    fn new(cfg: FlatConfig) -> Self {
        Self {
            cfg,
            resolved: BTreeMap::new(),
            overrides: Vec::new(),
        }
    }

    fn record(&mut self, key: &str, value: String, from_flag: bool) {
        if from_flag {
            self.overrides.push((key.to_string(), value.clone()));
        }
        self.resolved.insert(key.to_string(), value);
    }

    fn f64(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64, CliError> {
        let (v, from_flag) = match flag {
            Some(v) => (v, true),
            None => (self.cfg.get_f64(key)?.unwrap_or(default), false),
        };
        self.record(key, format!("{v}"), from_flag);
        Ok(v)
    }

    fn i32(&mut self, key: &str, flag: Option<i32>, default: i32) -> Result<i32, CliError> {
        let (v, from_flag) = match flag {
            Some(v) => (v, true),
            None => (self.cfg.get_i32(key)?.unwrap_or(default), false),
        };
        self.record(key, format!("{v}"), from_flag);
        Ok(v)
    }

    fn usize(&mut self, key: &str, flag: Option<usize>, default: usize) -> Result<usize, CliError> {
        let (v, from_flag) = match flag {
            Some(v) => (v, true),
            None => (self.cfg.get_usize(key)?.unwrap_or(default), false),
        };
        self.record(key, format!("{v}"), from_flag);
        Ok(v)
    }

    fn string(&mut self, key: &str, flag: Option<&str>, default: &str) -> String {
        let (v, from_flag) = match flag {
            Some(v) => (v.to_string(), true),
            None => (
                self.cfg.get(key).unwrap_or(default).to_string(),
                false,
            ),
        };
        self.record(key, v.clone(), from_flag);
        v
    }
}

#[derive(Serialize)]
struct ManifestOverride {
    key: String,
    value: String,
}

/// Record of one command invocation; rerunning the recorded command with the
/// recorded configuration reproduces the outputs byte-identically (runs are
/// deterministic and no seeds exist).
#[derive(Serialize)]
struct RunManifest {
    tool_version: String,
    command: String,
    config_path: Option<String>,
    output_dir: String,
    overrides: Vec<ManifestOverride>,
    resolved: BTreeMap<String, String>,
}

fn write_manifest(
    out_dir: &Path,
    config_path: &Option<PathBuf>,
    resolver: &Resolver,
) -> Result<(), CliError> {
    let manifest = RunManifest {
        tool_version: TOOL_VERSION.to_string(),
        command: std::env::args().collect::<Vec<_>>().join(" "),
        config_path: config_path.as_ref().map(|p| p.display().to_string()),
        output_dir: out_dir.display().to_string(),
        overrides: resolver
            .overrides
            .iter()
            .map(|(key, value)| ManifestOverride {
                key: key.clone(),
                value: value.clone(),
            })
            .collect(),
        resolved: resolver.resolved.clone(),
    };
    let path = out_dir.join("manifest.json");
    let body = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Io(format!("manifest serialization: {e}")))?;
    std::fs::write(&path, body + "\n")
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn ensure_out_dir(out: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    let dir = out.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        // Ignore the error if a pool already exists (only possible in-process).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }

    let cfg = match &cli.config {
        Some(path) => FlatConfig::load(path)?,
        None => FlatConfig::default(),
    };
    let mut resolver = Resolver::new(cfg);

    match &cli.command {
        Command::Simulate(args) => cmd_simulate(&cli, args, &mut resolver),
        Command::Sweep(args) => cmd_sweep(&cli, args, &mut resolver),
        Command::Verify(args) => cmd_verify(&cli, args, &mut resolver),
    }
}

fn parse_plant(name: &str) -> Result<Box<dyn Plant>, CliError> {
    match name {
        "factored" => Ok(Box::new(FactoredPlant)),
        "uncertain-input" => Ok(Box::new(UncertainInputPlant)),
        _ => Err(CliError::Config(format!(
            "unknown plant `{name}` (expected `factored` or `uncertain-input`)"
        ))),
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<f64, CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be >= 0, got {v}")))
    }
}

fn scenario_dt(cli: &Cli, resolver: &mut Resolver) -> Result<f64, CliError> {
    let default = if cli.paper_step { 1e-6 } else { 1e-5 };
    positive("sim.dt", resolver.f64("sim.dt", cli.dt, default)?)
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs, resolver: &mut Resolver) -> Result<(), CliError> {
    let out_dir = ensure_out_dir(&cli.out)?;

    if let Some(scenario) = args.scenario {
        if args.plant.is_some()
            || args.controller.is_some()
            || args.rho.is_some()
            || args.sigma0_n.is_some()
            || args.sigma0_b.is_some()
            || args.t_end.is_some()
        {
            return Err(CliError::Config(
                "--scenario presets fix the plant, controller, disturbance and initial \
                 conditions; drop the conflicting flags"
                    .into(),
            ));
        }
        return cmd_scenario(cli, scenario, resolver, &out_dir);
    }

    let controller_kind = resolver.string("controller.kind", args.controller.as_deref(), "arps");
    let default_plant = match controller_kind.as_str() {
        "baseline" => "uncertain-input",
        _ => "factored",
    };
    let plant_kind = resolver.string("plant.kind", args.plant.as_deref(), default_plant);
    let plant = parse_plant(&plant_kind)?;

    let rho = nonnegative("disturbance.rho", resolver.f64("disturbance.rho", args.rho, 100.0)?)?;
    let a1 = resolver.f64("disturbance.a1", None, 1.0)?;
    let b1 = resolver.f64("disturbance.b1", None, 1.2)?;
    let omega1 = resolver.f64("disturbance.omega1", None, 3.0)?;
    let omega2 = resolver.f64("disturbance.omega2", None, 2.0)?;
    let rescale_bias = resolver
        .cfg
        .get_bool("disturbance.rescale_bias")?
        .unwrap_or(false);
    resolver.record("disturbance.rescale_bias", format!("{rescale_bias}"), false);
    let schedule = match resolver.cfg.get("disturbance.rho_schedule") {
        Some(text) => {
            let text = text.to_string();
            resolver.record("disturbance.rho_schedule", text.clone(), false);
            Some(
                RhoSchedule::new(parse_schedule(&text)?)
                    .map_err(|e| CliError::Config(format!("disturbance.rho_schedule: {e}")))?,
            )
        }
        None => None,
    };
    let dist = DisturbanceParams {
        rho,
        a1,
        b1,
        omega1,
        omega2,
        rho_schedule: schedule,
        rescale_bias,
    };

    let alpha = resolver.f64("controller.alpha", None, 0.4)?;
    let t_c = positive("controller.t_c", resolver.f64("controller.t_c", None, 0.1)?)?;
    let beta0 = nonnegative("controller.beta0", resolver.f64("controller.beta0", None, 0.0)?)?;
    let epsilon = positive(
        "controller.epsilon",
        resolver.f64("controller.epsilon", None, EPSILON)?,
    )?;
    let barrier_kind = resolver.string("controller.barrier", None, "psd");
    let beta_bar = nonnegative(
        "controller.beta_bar",
        resolver.f64("controller.beta_bar", None, 0.7)?,
    )?;
    let k_bar = positive("controller.k_bar", resolver.f64("controller.k_bar", None, 100.0)?)?;
    let k0 = nonnegative("controller.k0", resolver.f64("controller.k0", None, 0.0)?)?;

    let controller = match controller_kind.as_str() {
        "arps" => {
            let barrier = match barrier_kind.as_str() {
                "psd" => BarrierSpec::psd(epsilon),
                "pd" => BarrierSpec::pd(epsilon, beta_bar),
                other => {
                    return Err(CliError::Config(format!(
                        "unknown barrier kind `{other}` (expected `psd` or `pd`)"
                    )))
                }
            };
            Controller::Hybrid {
                arps: ArpsParams::new(alpha, t_c, beta0),
                barrier,
            }
        }
        "baseline" => Controller::Baseline(BaselineParams::new(k_bar, k0)),
        other => {
            return Err(CliError::Config(format!(
                "unknown controller `{other}` (expected `arps` or `baseline`)"
            )))
        }
    };
    controller
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;

    let n = resolver.i32("sim.sigma0_n", args.sigma0_n, 1)?;
    let b = positive("sim.sigma0_b", resolver.f64("sim.sigma0_b", args.sigma0_b, 1.0)?)?;
    let dt = scenario_dt(cli, resolver)?;
    let t_end = positive("sim.t_end", resolver.f64("sim.t_end", args.t_end, 0.5)?)?;
    let stride = resolver.usize("sim.stride", cli.stride, 100)?.max(1);
    let deadzone = nonnegative("sim.deadzone", resolver.f64("sim.deadzone", None, 1e-12)?)?;

    let sim = SimConfig {
        dt,
        t_end,
        record_stride: stride,
        deadzone,
        reach_threshold: Some(epsilon / 2.0),
        stop_at_reach: false,
    };
    let initial = StateVector::at_origin_time(symmetric_initial_condition(n, b));
    let outcome = simulate(plant.as_ref(), &dist, &controller, &initial, &sim);

    export_series_csv(&outcome.series, &out_dir.join("series.csv"))?;
    let labelled = [(&outcome.series, "run")];
    let t_c_line = controller.horizon();
    export_trace_svg(
        TraceKind::Norm,
        &labelled,
        Some(epsilon),
        t_c_line,
        &out_dir.join("norm_trace.svg"),
    )?;
    export_trace_svg(
        TraceKind::Gain,
        &labelled,
        None,
        t_c_line,
        &out_dir.join("gain_trace.svg"),
    )?;
    export_trace_svg(
        TraceKind::Input,
        &labelled,
        None,
        t_c_line,
        &out_dir.join("input_trace.svg"),
    )?;
    write_manifest(&out_dir, &cli.config, resolver)?;

    match outcome.t_bar() {
        Some(t_bar) => println!("t_bar = {}", fmt_g17(t_bar)),
        None => println!("t_bar = not reached"),
    }
    match &outcome.termination {
        Termination::Fault(fault) => Err(CliError::Sim(format!("simulation fault: {fault}"))),
        _ => Ok(()),
    }
}

fn cmd_scenario(
    cli: &Cli,
    scenario: u8,
    resolver: &mut Resolver,
    out_dir: &Path,
) -> Result<(), CliError> {
    let dt = scenario_dt(cli, resolver)?;
    let stride = resolver.usize("sim.stride", cli.stride, 100)?.max(1);
    resolver.record("scenario", format!("{scenario}"), true);
    let cfg = ScenarioConfig {
        dt,
        record_stride: stride,
    };

    let reports = match scenario {
        1 => run_scenario1(&cfg),
        2 => vec![run_scenario2(&cfg)],
        other => {
            return Err(CliError::Config(format!(
                "unknown scenario `{other}` (expected 1 or 2)"
            )))
        }
    };

    for report in &reports {
        let name = if reports.len() == 1 {
            "series.csv".to_string()
        } else {
            format!("series_sigma0_{}.csv", report.sigma0_norm)
        };
        export_series_csv(&report.series, &out_dir.join(name))?;
    }
    let labelled: Vec<(&asmc::integrator::TimeSeries, String)> = reports
        .iter()
        .map(|r| (&r.series, format!("||sigma0|| = {}", r.sigma0_norm)))
        .collect();
    let labelled_refs: Vec<(&asmc::integrator::TimeSeries, &str)> = labelled
        .iter()
        .map(|(s, l)| (*s, l.as_str()))
        .collect();
    export_trace_svg(
        TraceKind::Norm,
        &labelled_refs,
        Some(EPSILON),
        Some(1.0),
        &out_dir.join("norm_trace.svg"),
    )?;
    export_trace_svg(
        TraceKind::Gain,
        &labelled_refs,
        None,
        Some(1.0),
        &out_dir.join("gain_trace.svg"),
    )?;
    export_trace_svg(
        TraceKind::Input,
        &labelled_refs,
        None,
        Some(1.0),
        &out_dir.join("input_trace.svg"),
    )?;
    write_manifest(out_dir, &cli.config, resolver)?;

    let mut fault = None;
    for report in &reports {
        match report.t_bar {
            Some(t_bar) => println!(
                "||sigma0|| = {}: t_bar = {}",
                report.sigma0_norm,
                fmt_g17(t_bar)
            ),
            None => println!("||sigma0|| = {}: t_bar = not reached", report.sigma0_norm),
        }
        if let Termination::Fault(f) = &report.termination {
            fault = Some(f.to_string());
        }
    }
    match fault {
        Some(f) => Err(CliError::Sim(format!("simulation fault: {f}"))),
        None => Ok(()),
    }
}

fn parse_list<T: std::str::FromStr>(name: &str, text: &str) -> Result<Vec<T>, CliError> {
    if text.trim().is_empty() {
        return Err(CliError::Config(format!("{name}: empty grid axis")));
    }
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<T>()
                .map_err(|_| CliError::Config(format!("{name}: cannot parse `{v}`")))
        })
        .collect()
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs, resolver: &mut Resolver) -> Result<(), CliError> {
    let out_dir = ensure_out_dir(&cli.out)?;
    let controller_kind = resolver.string("controller.kind", args.controller.as_deref(), "arps");
    let kind = match controller_kind.as_str() {
        "arps" => SweepController::Arps,
        "baseline" => SweepController::Baseline,
        other => {
            return Err(CliError::Config(format!(
                "unknown controller `{other}` (expected `arps` or `baseline`)"
            )))
        }
    };

    let mut grid = if cli.dense {
        SweepGrid::dense()
    } else {
        SweepGrid::standard()
    };
    if let Some(text) = &args.rho_values {
        grid.rho_values = parse_list("--rho-values", text)?;
    }
    if let Some(text) = &args.n_values {
        grid.n_values = parse_list("--n-values", text)?;
    }
    if let Some(text) = &args.b_values {
        grid.b_values = parse_list("--b-values", text)?;
    }
    grid.validate(args.allow_wide)
        .map_err(|e| CliError::Config(e.to_string()))?;
    resolver.record(
        "sweep.grid",
        format!(
            "rho={:?} n={:?} b={:?}",
            grid.rho_values, grid.n_values, grid.b_values
        ),
        args.rho_values.is_some() || args.n_values.is_some() || args.b_values.is_some() || cli.dense,
    );

    let dt = positive("sim.dt", resolver.f64("sim.dt", cli.dt, 1e-6)?)?;
    let sweep_cfg = SweepConfig {
        dt,
        deadzone: 1e-12,
    };
    let result = run_sweep(kind, &grid, &sweep_cfg);

    export_sweep_csv(&result, &out_dir.join("sweep.csv"))?;
    let t_c_line = match kind {
        SweepController::Arps => Some(0.1),
        SweepController::Baseline => None,
    };
    export_sweep_svg(&result, t_c_line, &out_dir.join("rt_surface.svg"))?;
    write_manifest(&out_dir, &cli.config, resolver)?;

    let reached = result
        .entries
        .iter()
        .filter(|e| e.status == experiments::SweepStatus::Reached)
        .count();
    println!(
        "{} grid points: {} reached, {} other",
        result.entries.len(),
        reached,
        result.entries.len() - reached
    );
    if let (Some(min), Some(max)) = (result.min_t_bar(), result.max_t_bar()) {
        println!("t_bar in [{}, {}]", fmt_g17(min), fmt_g17(max));
    }
    if result.all_reached() {
        Ok(())
    } else {
        for e in result
            .entries
            .iter()
            .filter(|e| e.status != experiments::SweepStatus::Reached)
        {
            eprintln!(
                "not reached: rho={} n={} b={} status={}",
                e.rho,
                e.n,
                e.b,
                e.status.as_str()
            );
        }
        Err(CliError::Sim("sweep had non-reached grid points".into()))
    }
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs, resolver: &mut Resolver) -> Result<(), CliError> {
    let plant_kind = resolver.string("plant.kind", args.plant.as_deref(), "factored");
    let plant = parse_plant(&plant_kind)?;
    let rho = nonnegative(
        "disturbance.rho",
        resolver.f64("disturbance.rho", args.rho, 100.0)?,
    )?;
    let dist = DisturbanceParams::constant(rho, 1.0, 1.2, 3.0, 2.0);

    let t_grid = linspace(0.0, 10.0, 21);
    let sigma_axis = linspace(-std::f64::consts::PI, std::f64::consts::PI, 21);
    let report = check_assumptions(plant.as_ref(), &dist, &t_grid, &sigma_axis);

    println!("grid points: {}", report.grid_size);
    println!("rank_ok: {}", report.rank_ok);
    println!("q_est:  {}", fmt_g17(report.q_est));
    println!("q1_est: {}", fmt_g17(report.q1_est));
    println!("d_est:  {}", fmt_g17(report.d_est));
    println!("b0_est: {}", fmt_g17(report.b0_est()));
    println!(
        "assumptions hold on grid: {}",
        if report.holds() { "yes" } else { "no" }
    );

    let mut failed = !report.holds();

    if args.oracle {
        let arps = ArpsParams::new(0.4, 0.1, 0.0);
        let dt_direct = cli.dt.unwrap_or(1e-6);
        let sigma0 = symmetric_initial_condition(1, 1.0);
        let equivalence = compare_scaled_direct(
            plant.as_ref(),
            &dist,
            &arps,
            &sigma0,
            dt_direct,
            dt_direct * 10.0,
        );
        let equiv_ok = equivalence.sup_deviation <= 1e-3;
        println!(
            "oracle equivalence deviation: {} over {} points: {}",
            fmt_g17(equivalence.sup_deviation),
            equivalence.compared_points,
            if equiv_ok { "pass" } else { "fail" }
        );

        let trace = lyapunov_trace(
            &equivalence.scaled.series,
            report.beta_star_est(),
            report.b0_est(),
        );
        let max_v = trace.iter().map(|s| s.v).fold(0.0_f64, f64::max);
        let max_dv = max_forward_difference(&trace);
        let decrease_ok = max_dv <= 1e-6 * max_v;
        println!(
            "oracle decrease: max forward difference {} vs tolerance {}: {}",
            fmt_g17(max_dv),
            fmt_g17(1e-6 * max_v),
            if decrease_ok { "pass" } else { "fail" }
        );
        failed |= !(equiv_ok && decrease_ok);
    }

    if failed {
        Err(CliError::Verify(
            "verification failed (see report above)".into(),
        ))
    } else {
        Ok(())
    }
}
