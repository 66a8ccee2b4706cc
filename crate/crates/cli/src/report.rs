//! CSV tables and the JSON metadata echo.
//!
//! Floats are written with `{:.16e}` (17 significant digits), which round-trips
//! every f64 exactly.

use std::fmt::Write;

use quadsim_core::propagator::TrajectoryPoint;
use quadsim_core::{AmplitudeMode, Axis, AxisWindow, Comparison, SweepResult};
use serde_json::{json, Value};

use crate::config::{method_name, RunConfig};

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub const SWEEP_HEADER: &str = "protocol,scenario,axis,axis_value,T_s,fidelity,error,final_norm_sq,method,steps";

/// One row per sampled point, protocol-major.
pub fn sweep_csv(cfg: &RunConfig, result: &SweepResult) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    append_sweep_rows(&mut out, cfg, result);
    out
}

fn append_sweep_rows(out: &mut String, cfg: &RunConfig, result: &SweepResult) {
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.protocol,
            cfg.scenario,
            result.spec.window.axis,
            num(r.axis_value),
            num(r.duration),
            num(r.fidelity),
            num(r.error),
            num(r.final_norm_sq),
            method_name(cfg.method),
            cfg.steps
        );
    }
}

pub fn compare_rows_csv(cfg: &RunConfig, cmp: &Comparison) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for ax in &cmp.axes {
        append_sweep_rows(&mut out, cfg, &ax.sweep);
    }
    out
}

pub fn compare_summary_csv(cmp: &Comparison) -> String {
    let mut out = String::from("axis,protocol,T_s,worst_error,mean_error,nominal_error,dominates\n");
    for ax in &cmp.axes {
        for s in &ax.summaries {
            let dominated: Vec<String> = ax.dominated_by(s.protocol).iter().map(|p| p.to_string()).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                ax.axis,
                s.protocol,
                num(s.duration),
                num(s.worst_error),
                num(s.mean_error),
                s.nominal_error.map(num).unwrap_or_default(),
                dominated.join(";")
            );
        }
    }
    out
}

pub fn dominance_csv(cmp: &Comparison) -> String {
    let mut out = String::from("axis,protocol,other,fraction_not_worse,dominates\n");
    for ax in &cmp.axes {
        for d in &ax.dominance {
            let _ = writeln!(out, "{},{},{},{},{}", ax.axis, d.protocol, d.other, num(d.fraction), d.dominates);
        }
    }
    out
}

pub struct SimulationSummary {
    pub fidelity: f64,
    pub error: f64,
    pub final_norm_sq: f64,
    pub populations: Vec<f64>,
}

pub fn metrics_csv(cfg: &RunConfig, protocol: &str, t_s: f64, m: &SimulationSummary) -> String {
    let pops: Vec<String> = (1..=m.populations.len()).map(|i| format!("pop{i}")).collect();
    let mut out = format!("protocol,scenario,T_s,fidelity,error,final_norm_sq,{},method,steps\n", pops.join(","));
    let vals: Vec<String> = m.populations.iter().map(|&p| num(p)).collect();
    let _ = writeln!(
        out,
        "{protocol},{},{},{},{},{},{},{},{}",
        cfg.scenario,
        num(t_s),
        num(m.fidelity),
        num(m.error),
        num(m.final_norm_sq),
        vals.join(","),
        method_name(cfg.method),
        cfg.steps
    );
    out
}

pub fn trajectory_csv(points: &[TrajectoryPoint]) -> String {
    let dim = points.first().map_or(0, |p| p.state.dim());
    let mut header = vec!["t_s".to_string()];
    for i in 1..=dim {
        header.push(format!("re_c{i}"));
        header.push(format!("im_c{i}"));
    }
    header.push("norm_sq".into());
    header.extend((1..=dim).map(|i| format!("pop{i}")));
    let mut out = header.join(",");
    out.push('\n');
    for p in points {
        let mut row = vec![num(p.t)];
        for a in p.state.amplitudes() {
            row.push(num(a.re));
            row.push(num(a.im));
        }
        row.push(num(p.state.norm_sq()));
        row.extend(p.state.populations().into_iter().map(num));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn window_json(w: &AxisWindow) -> Value {
    json!({
        "axis": w.axis.as_str(),
        "lo": w.lo,
        "hi": w.hi,
        "points": w.points,
        "amplitude_mode": match w.amplitude_mode {
            AmplitudeMode::Scale => "scale",
            AmplitudeMode::Additive => "additive",
        },
        "unit": match (w.axis, w.amplitude_mode) {
            (Axis::Duration, _) => "s",
            (Axis::AmplitudeScale, AmplitudeMode::Scale) => "factor",
            _ => "rad/s",
        },
    })
}

/// Parsed configuration plus derived quantities. Wall time is deliberately left
/// out so that reruns produce identical files.
pub fn metadata(cfg: &RunConfig, command: &str, outputs: &[&str]) -> Value {
    let p = &cfg.params;
    json!({
        "tool": { "name": "quadsim", "version": env!("CARGO_PKG_VERSION") },
        "command": command,
        "config": {
            "scenario": cfg.scenario.as_str(),
            "protocols": cfg.protocols.iter().map(|p| p.as_str()).collect::<Vec<_>>(),
            "omega_m_hz": p.omega_m_hz,
            "omega0_hz": p.omega0_hz,
            "delta_big_hz": p.delta_big_hz,
            "delta_m_hz": p.delta_m_hz,
            "gamma_hz": p.gamma_hz,
            "durations": cfg.durations.iter().map(|d| json!({
                "protocol": d.protocol.as_str(),
                "T_s": d.t_s,
                "source": d.source,
            })).collect::<Vec<_>>(),
            "steps": cfg.steps,
            "method": method_name(cfg.method),
            "stirap_sigma_frac": cfg.stirap_sigma_frac,
            "stirap_tau_sep_frac": cfg.stirap_tau_sep_frac,
            "trajectory_stride": cfg.trajectory_stride,
            "sweep": cfg.sweep.as_ref().map(|s| json!({
                "axis": s.axis.map(|a| a.as_str()),
                "axes": s.axes.iter().map(|a| a.as_str()).collect::<Vec<_>>(),
                "windows": s.windows.iter().map(window_json).collect::<Vec<_>>(),
            })),
        },
        "derived": {
            "omega_gap_rad_s": cfg.omega_gap_rad_s,
            "tau_pi_s": cfg.tau_pi_s,
            "delta_m_rad_s": cfg.base.delta_m.rad_per_s(),
        },
        "outputs": outputs,
    })
}

pub fn metadata_string(cfg: &RunConfig, command: &str, outputs: &[&str]) -> String {
    let mut s = serde_json::to_string_pretty(&metadata(cfg, command, outputs)).expect("metadata serializes");
    s.push('\n');
    s
}
