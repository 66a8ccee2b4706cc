//! Config-driven front end: `simulate`, `sweep` and `compare` write CSV, JSON
//! metadata and optional SVG plots into an output directory.

pub mod config;
pub mod plot;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use quadsim_core::{
    compare_protocols, evolve, run_sweep, transfer_metrics, AmplitudeMode, Axis, AxisWindow, Comparison, Perturbation,
    SweepResult, SweepSpec,
};
use thiserror::Error;

use config::{ConfigError, RunConfig};
use plot::Series;
use report::SimulationSummary;

/// Points kept in a trajectory file when no stride is configured.
pub const DEFAULT_TRAJECTORY_POINTS: usize = 1000;
pub const WORKERS_ENV: &str = "QUAD_WORKERS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation: {0}")]
    Simulation(#[from] quadsim_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 1 for bad input, 2 for a failed integration, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Simulation(e) if e.is_integration_failure() => 2,
            CliError::Simulation(_) => 1,
            CliError::Io { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Sweep,
    Compare,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub config: PathBuf,
    pub out: PathBuf,
    pub plot: bool,
    pub trajectory: bool,
}

/// Worker count from `QUAD_WORKERS`, if set.
pub fn workers_from_env() -> std::result::Result<Option<usize>, ConfigError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ConfigError { key: Some(WORKERS_ENV.into()), message: format!("'{v}' is not a positive integer") }),
        },
    }
}

struct OutDir<'a> {
    root: &'a Path,
    written: Vec<&'static str>,
}

impl<'a> OutDir<'a> {
    fn create(root: &'a Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|source| CliError::Io { path: root.to_path_buf(), source })?;
        Ok(Self { root, written: Vec::new() })
    }

    fn write(&mut self, name: &'static str, contents: &str) -> Result<()> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Io { path, source })?;
        self.written.push(name);
        Ok(())
    }

    fn finish(mut self, cfg: &RunConfig, command: Command) -> Result<()> {
        let mut outputs = self.written.clone();
        outputs.push("metadata.json");
        self.write("metadata.json", &report::metadata_string(cfg, command.as_str(), &outputs))
    }
}

/// Parse the config and run one command, printing a short report to `stdout`.
pub fn run(command: Command, opts: &Options, stdout: &mut dyn std::io::Write) -> Result<()> {
    let cfg = RunConfig::from_path(&opts.config)?;
    match command {
        Command::Simulate => simulate(&cfg, opts, stdout),
        Command::Sweep => sweep(&cfg, opts, stdout),
        Command::Compare => compare(&cfg, opts, stdout),
    }
}

fn io_stdout(e: std::io::Error) -> CliError {
    CliError::Io { path: PathBuf::from("<stdout>"), source: e }
}

pub fn simulate(cfg: &RunConfig, opts: &Options, out: &mut dyn std::io::Write) -> Result<()> {
    let protocol = match cfg.protocols.as_slice() {
        [p] => *p,
        _ => return Err(ConfigError { key: Some("protocol".into()), message: "simulate takes exactly one protocol".into() }.into()),
    };
    let runs = cfg.protocol_runs()?;
    let t = runs[0].duration;
    let mut req = cfg.base.request(protocol, t, Perturbation::default())?;
    if opts.trajectory {
        let stride = cfg.trajectory_stride.unwrap_or((cfg.steps / DEFAULT_TRAJECTORY_POINTS).max(1));
        req = req.with_trajectory(stride);
    }
    let res = evolve(&req)?;
    let m = transfer_metrics(&res.final_state, 1)?;
    let summary = SimulationSummary {
        fidelity: m.fidelity,
        error: m.error,
        final_norm_sq: m.final_norm_sq,
        populations: res.populations.clone(),
    };

    let mut dir = OutDir::create(&opts.out)?;
    dir.write("metrics.csv", &report::metrics_csv(cfg, protocol.as_str(), t, &summary))?;
    if let Some(traj) = &res.trajectory {
        dir.write("trajectory.csv", &report::trajectory_csv(traj))?;
    }
    dir.finish(cfg, Command::Simulate)?;

    writeln!(out, "protocol       {protocol} ({})", cfg.scenario).map_err(io_stdout)?;
    writeln!(out, "T              {} s ({:.4} tau_pi)", report::num(t), t / cfg.tau_pi_s).map_err(io_stdout)?;
    writeln!(out, "fidelity       {}", report::num(m.fidelity)).map_err(io_stdout)?;
    writeln!(out, "error          {}", report::num(m.error)).map_err(io_stdout)?;
    writeln!(out, "norm_sq        {}", report::num(m.final_norm_sq)).map_err(io_stdout)?;
    Ok(())
}

fn sweep_section_window(cfg: &RunConfig, axis: Axis) -> AxisWindow {
    cfg.sweep
        .as_ref()
        .and_then(|s| s.window(axis))
        .unwrap_or_else(|| match axis {
            Axis::DetuningOffset => AxisWindow::default_detuning(cfg.base.gap()),
            _ => AxisWindow::default_amplitude(),
        })
}

fn x_label(cfg: &RunConfig, w: &AxisWindow) -> (String, f64) {
    match (w.axis, w.amplitude_mode) {
        (Axis::Duration, _) => ("operation time T / tau_pi".into(), 1.0 / cfg.tau_pi_s),
        (Axis::AmplitudeScale, AmplitudeMode::Scale) => ("coupling scale factor".into(), 1.0),
        (Axis::AmplitudeScale, AmplitudeMode::Additive) => ("coupling offset / gap".into(), 1.0 / cfg.omega_gap_rad_s),
        (Axis::DetuningOffset, _) => ("detuning offset / gap".into(), 1.0 / cfg.omega_gap_rad_s),
    }
}

fn sweep_plot(cfg: &RunConfig, result: &SweepResult, title: &str) -> String {
    let (label, scale) = x_label(cfg, &result.spec.window);
    let series: Vec<Series> = result
        .spec
        .protocols
        .iter()
        .map(|run| Series {
            label: run.protocol.to_string(),
            points: result.rows_for(run.protocol).map(|r| (r.axis_value * scale, r.error)).collect(),
        })
        .collect();
    plot::error_plot(title, &label, &series)
}

pub fn sweep(cfg: &RunConfig, opts: &Options, out: &mut dyn std::io::Write) -> Result<()> {
    let axis = cfg
        .sweep
        .as_ref()
        .and_then(|s| s.axis)
        .ok_or_else(|| ConfigError { key: Some("axis".into()), message: "sweep needs a [sweep] section with 'axis'".into() })?;
    let window = sweep_section_window(cfg, axis);
    let protocols = if axis == Axis::Duration { cfg.protocol_runs_lenient() } else { cfg.protocol_runs()? };
    let result = run_sweep(&SweepSpec { base: cfg.base, protocols, window })?;

    let mut dir = OutDir::create(&opts.out)?;
    dir.write("sweep.csv", &report::sweep_csv(cfg, &result))?;
    if opts.plot {
        let title = format!("{} sweep over {axis}", cfg.scenario);
        dir.write("sweep.svg", &sweep_plot(cfg, &result, &title))?;
    }
    dir.finish(cfg, Command::Sweep)?;

    writeln!(out, "{} points x {} protocols along {axis}", window.points, cfg.protocols.len()).map_err(io_stdout)?;
    for p in &cfg.protocols {
        let errs = result.errors_for(*p);
        let min = errs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = errs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        writeln!(out, "{:<8} min error {}  max error {}", p.as_str(), report::num(min), report::num(max)).map_err(io_stdout)?;
    }
    writeln!(out, "wall time {:.3} s", result.wall_time_s).map_err(io_stdout)?;
    Ok(())
}

/// Run the configured error axes for every protocol at its own duration.
pub fn comparison(cfg: &RunConfig) -> Result<Comparison> {
    let runs = cfg.protocol_runs()?;
    let axes = cfg.sweep.as_ref().map(|s| s.axes.clone()).unwrap_or_else(|| vec![Axis::AmplitudeScale, Axis::DetuningOffset]);
    let windows: Vec<AxisWindow> = axes.iter().map(|&a| sweep_section_window(cfg, a)).collect();
    Ok(compare_protocols(&cfg.base, &runs, &windows)?)
}

pub fn compare(cfg: &RunConfig, opts: &Options, out: &mut dyn std::io::Write) -> Result<()> {
    let cmp = comparison(cfg)?;

    let mut dir = OutDir::create(&opts.out)?;
    dir.write("compare_rows.csv", &report::compare_rows_csv(cfg, &cmp))?;
    dir.write("compare_summary.csv", &report::compare_summary_csv(&cmp))?;
    dir.write("dominance.csv", &report::dominance_csv(&cmp))?;
    if opts.plot {
        for ax in &cmp.axes {
            let name = match ax.axis {
                Axis::AmplitudeScale => "compare_amplitude_scale.svg",
                Axis::DetuningOffset => "compare_detuning_offset.svg",
                Axis::Duration => "compare_duration.svg",
            };
            let title = format!("{} protocols vs {}", cfg.scenario, ax.axis);
            dir.write(name, &sweep_plot(cfg, &ax.sweep, &title))?;
        }
    }
    dir.finish(cfg, Command::Compare)?;

    for ax in &cmp.axes {
        writeln!(out, "axis {}", ax.axis).map_err(io_stdout)?;
        writeln!(out, "  {:<8} {:>12} {:>12} {:>12}  dominates", "protocol", "worst", "mean", "nominal").map_err(io_stdout)?;
        for s in &ax.summaries {
            let dom: Vec<&str> = ax.dominated_by(s.protocol).iter().map(|p| p.as_str()).collect();
            writeln!(
                out,
                "  {:<8} {:>12.4e} {:>12.4e} {:>12}  {}",
                s.protocol.as_str(),
                s.worst_error,
                s.mean_error,
                s.nominal_error.map_or("-".to_string(), |e| format!("{e:.4e}")),
                if dom.is_empty() { "-".to_string() } else { dom.join(",") }
            )
            .map_err(io_stdout)?;
        }
    }
    Ok(())
}
