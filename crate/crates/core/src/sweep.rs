//! Protocol comparisons across operation time, coupling-amplitude error and detuning error.
//!
//! Axis points are independent and evaluated on the current rayon pool; rows come
//! back in a fixed order (protocol-major, then ascending axis index) regardless
//! of how many workers ran them.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{transfer_metrics, TransferMetrics};
use crate::error::{Error, Result};
use crate::model::{operating_gap, AngularFrequency, CouplingError, HamiltonianModel, QuantumState, System};
use crate::propagator::{evolve, EvolveRequest, Method};
use crate::schedule::{PulseSchedule, StirapShape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    TwoLevel,
    ThreeLevel,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::TwoLevel => "two_level",
            Scenario::ThreeLevel => "three_level",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "two_level" => Ok(Scenario::TwoLevel),
            "three_level" => Ok(Scenario::ThreeLevel),
            other => Err(format!("unknown scenario '{other}' (expected two_level or three_level)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Protocol {
    Siquad,
    Faquad,
    Linear,
    Pi,
    Stirap,
}

impl Protocol {
    pub const ALL: [Protocol; 5] = [Protocol::Siquad, Protocol::Faquad, Protocol::Linear, Protocol::Pi, Protocol::Stirap];

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Siquad => "siquad",
            Protocol::Faquad => "faquad",
            Protocol::Linear => "linear",
            Protocol::Pi => "pi",
            Protocol::Stirap => "stirap",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown protocol '{s}' (expected one of siquad, faquad, linear, pi, stirap)"))
    }
}

/// Systematic errors applied to one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub coupling: CouplingError,
    pub detuning_offset: AngularFrequency,
}

/// Everything shared by the protocols of one comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolBase {
    /// `TwoLevel` or `Lambda` (an `Eliminated` system is accepted for oracle runs).
    pub system: System,
    pub delta_m: AngularFrequency,
    pub stirap_sigma_frac: f64,
    pub stirap_tau_sep_frac: f64,
    pub method: Method,
    pub steps: usize,
}

pub const DEFAULT_STIRAP_SIGMA_FRAC: f64 = 1.0 / 8.0;
pub const DEFAULT_STIRAP_TAU_SEP_FRAC: f64 = 1.0 / 5.0;
pub const DEFAULT_STEPS_TWO_LEVEL: usize = 100_000;
pub const DEFAULT_STEPS_THREE_LEVEL: usize = 500_000;

/// |1⟩ → |2⟩ for every protocol.
const INITIAL_INDEX: usize = 0;
const TARGET_INDEX: usize = 1;

impl ProtocolBase {
    pub fn new(system: System, delta_m: AngularFrequency) -> Self {
        let steps = match system {
            System::Lambda(_) => DEFAULT_STEPS_THREE_LEVEL,
            _ => DEFAULT_STEPS_TWO_LEVEL,
        };
        Self {
            system,
            delta_m,
            stirap_sigma_frac: DEFAULT_STIRAP_SIGMA_FRAC,
            stirap_tau_sep_frac: DEFAULT_STIRAP_TAU_SEP_FRAC,
            method: Method::PiecewiseExpm,
            steps,
        }
    }

    pub fn scenario(&self) -> Scenario {
        match self.system {
            System::TwoLevel(_) => Scenario::TwoLevel,
            System::Lambda(_) | System::Eliminated(_) => Scenario::ThreeLevel,
        }
    }

    /// Gap Ω used by the sweep schedules (Ω_M, or the Λ-system gap).
    pub fn gap(&self) -> AngularFrequency {
        operating_gap(&self.system)
    }

    /// Resonant π time at the operating gap.
    pub fn pi_time(&self) -> f64 {
        std::f64::consts::PI / self.gap().rad_per_s()
    }

    fn stirap_peak(&self) -> Result<AngularFrequency> {
        match self.system {
            System::Lambda(p) | System::Eliminated(p) => Ok(p.omega_p0),
            System::TwoLevel(_) => Err(Error::invalid("protocol", "stirap needs a three-level scenario")),
        }
    }

    pub fn schedule(&self, protocol: Protocol, duration: f64) -> Result<PulseSchedule> {
        let gap = self.gap();
        match protocol {
            Protocol::Siquad => PulseSchedule::siquad(duration, self.delta_m, gap),
            Protocol::Faquad => PulseSchedule::faquad(duration, self.delta_m, gap),
            Protocol::Linear => PulseSchedule::linear(duration, self.delta_m, gap),
            Protocol::Pi => PulseSchedule::flat_pi(duration, gap),
            Protocol::Stirap => {
                let shape = StirapShape {
                    peak: self.stirap_peak()?,
                    tau_sep: self.stirap_tau_sep_frac * duration,
                    sigma: self.stirap_sigma_frac * duration,
                };
                PulseSchedule::stirap(duration, shape, gap)
            }
        }
    }

    pub fn request(&self, protocol: Protocol, duration: f64, perturbation: Perturbation) -> Result<EvolveRequest> {
        let model = HamiltonianModel { system: self.system, coupling_error: perturbation.coupling };
        let schedule = self.schedule(protocol, duration)?.with_detuning_offset(perturbation.detuning_offset);
        let initial = QuantumState::basis(model.dim(), INITIAL_INDEX)?;
        Ok(EvolveRequest::new(model, schedule, initial, self.steps, self.method))
    }

    /// Evolve one protocol and score the |1⟩ → |2⟩ transfer. A zero duration
    /// leaves the initial state untouched.
    pub fn run(&self, protocol: Protocol, duration: f64, perturbation: Perturbation) -> Result<TransferMetrics> {
        if duration == 0.0 {
            let dim = HamiltonianModel { system: self.system, coupling_error: perturbation.coupling }.dim();
            return transfer_metrics(&QuantumState::basis(dim, INITIAL_INDEX)?, TARGET_INDEX);
        }
        let res = evolve(&self.request(protocol, duration, perturbation)?)?;
        transfer_metrics(&res.final_state, TARGET_INDEX)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    /// Operation time T in seconds.
    Duration,
    /// Coupling error: a factor (scale mode) or an offset in rad/s (additive mode).
    AmplitudeScale,
    /// Constant δ′ in rad/s added to δ(t).
    DetuningOffset,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Duration => "duration",
            Axis::AmplitudeScale => "amplitude_scale",
            Axis::DetuningOffset => "detuning_offset",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "duration" => Ok(Axis::Duration),
            "amplitude_scale" => Ok(Axis::AmplitudeScale),
            "detuning_offset" => Ok(Axis::DetuningOffset),
            other => Err(format!("unknown axis '{other}' (expected duration, amplitude_scale or detuning_offset)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum AmplitudeMode {
    #[default]
    Scale,
    Additive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisWindow {
    pub axis: Axis,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub amplitude_mode: AmplitudeMode,
}

impl AxisWindow {
    pub fn new(axis: Axis, lo: f64, hi: f64, points: usize) -> Self {
        Self { axis, lo, hi, points, amplitude_mode: AmplitudeMode::Scale }
    }

    /// A single point; used for on-axis evaluations.
    pub fn single(axis: Axis, value: f64) -> Self {
        Self::new(axis, value, value, 1)
    }

    /// `[0.8, 1.2]`, 41 points.
    pub fn default_amplitude() -> Self {
        Self::new(Axis::AmplitudeScale, 0.8, 1.2, 41)
    }

    /// `[−Ω_gap, +Ω_gap]`, 41 points.
    pub fn default_detuning(gap: AngularFrequency) -> Self {
        Self::new(Axis::DetuningOffset, -gap.rad_per_s(), gap.rad_per_s(), 41)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::invalid("axis range", "bounds must be finite"));
        }
        match self.points {
            0 => return Err(Error::invalid("points", "must be at least 1")),
            1 if self.lo != self.hi => return Err(Error::invalid("points", "a single point needs lo == hi")),
            1 => {}
            _ if self.lo >= self.hi => return Err(Error::invalid("axis range", format!("lo {} must be below hi {}", self.lo, self.hi))),
            _ => {}
        }
        match (self.axis, self.amplitude_mode) {
            (Axis::AmplitudeScale, AmplitudeMode::Scale) if !(self.lo > 0.0 && self.hi <= 2.0) => {
                Err(Error::invalid("amplitude scale range", "must lie within (0, 2]"))
            }
            (Axis::Duration, _) if self.lo < 0.0 => Err(Error::invalid("duration range", "must be non-negative")),
            _ => Ok(()),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let n = self.points - 1;
        (0..=n)
            .map(|k| if k == n { self.hi } else { self.lo + (self.hi - self.lo) * k as f64 / n as f64 })
            .collect()
    }

    /// Perturbation for an error-axis value; identity for the duration axis.
    pub fn perturbation(&self, value: f64) -> Perturbation {
        match self.axis {
            Axis::Duration => Perturbation::default(),
            Axis::AmplitudeScale => Perturbation {
                coupling: match self.amplitude_mode {
                    AmplitudeMode::Scale => CouplingError::Scale(value),
                    AmplitudeMode::Additive => CouplingError::Offset(AngularFrequency::from_rad_per_s(value)),
                },
                ..Perturbation::default()
            },
            Axis::DetuningOffset => {
                Perturbation { detuning_offset: AngularFrequency::from_rad_per_s(value), ..Perturbation::default() }
            }
        }
    }

    /// Axis value that leaves the system unperturbed.
    pub fn nominal_value(&self) -> Option<f64> {
        match (self.axis, self.amplitude_mode) {
            (Axis::Duration, _) => None,
            (Axis::AmplitudeScale, AmplitudeMode::Scale) => Some(1.0),
            _ => Some(0.0),
        }
    }
}

/// A protocol and the operation time it is run at on error axes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRun {
    pub protocol: Protocol,
    pub duration: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: ProtocolBase,
    pub protocols: Vec<ProtocolRun>,
    pub window: AxisWindow,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        if self.protocols.is_empty() {
            return Err(Error::invalid("protocols", "need at least one"));
        }
        if self.window.axis != Axis::Duration {
            for run in &self.protocols {
                if !(run.duration > 0.0 && run.duration.is_finite()) {
                    return Err(Error::invalid("duration", format!("{} has non-positive duration", run.protocol)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub protocol: Protocol,
    pub axis_value: f64,
    pub duration: f64,
    pub fidelity: f64,
    pub error: f64,
    pub final_norm_sq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
    pub wall_time_s: f64,
}

impl SweepResult {
    pub fn rows_for(&self, protocol: Protocol) -> impl Iterator<Item = &SweepRow> + '_ {
        self.rows.iter().filter(move |r| r.protocol == protocol)
    }

    pub fn errors_for(&self, protocol: Protocol) -> Vec<f64> {
        self.rows_for(protocol).map(|r| r.error).collect()
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let started = Instant::now();
    let values = spec.window.values();
    let tasks: Vec<(ProtocolRun, f64)> =
        spec.protocols.iter().flat_map(|run| values.iter().map(move |&v| (*run, v))).collect();
    let rows = tasks
        .into_par_iter()
        .map(|(run, value)| {
            let (duration, perturbation) = match spec.window.axis {
                Axis::Duration => (value, Perturbation::default()),
                _ => (run.duration, spec.window.perturbation(value)),
            };
            spec.base
                .run(run.protocol, duration, perturbation)
                .map(|m| SweepRow {
                    protocol: run.protocol,
                    axis_value: value,
                    duration,
                    fidelity: m.fidelity,
                    error: m.error,
                    final_norm_sq: m.final_norm_sq,
                })
                .map_err(|e| Error::SweepPoint { protocol: run.protocol.to_string(), axis_value: value, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { spec: spec.clone(), rows, wall_time_s: started.elapsed().as_secs_f64() })
}

/// Fraction of points at which `a ≤ b`.
pub fn fraction_not_worse(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "error series differ in length");
    if a.is_empty() {
        return 1.0;
    }
    a.iter().zip(b).filter(|(x, y)| x <= y).count() as f64 / a.len() as f64
}

/// A dominates B on an axis when its error is no larger at this fraction of points.
pub const DOMINANCE_FRACTION: f64 = 0.9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolSummary {
    pub protocol: Protocol,
    pub duration: f64,
    pub worst_error: f64,
    pub mean_error: f64,
    /// Error at the unperturbed axis value, when it is sampled.
    pub nominal_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dominance {
    pub protocol: Protocol,
    pub other: Protocol,
    pub fraction: f64,
    pub dominates: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxisComparison {
    pub axis: Axis,
    pub sweep: SweepResult,
    pub summaries: Vec<ProtocolSummary>,
    pub dominance: Vec<Dominance>,
}

impl AxisComparison {
    /// Protocols this one dominates.
    pub fn dominated_by(&self, protocol: Protocol) -> Vec<Protocol> {
        self.dominance.iter().filter(|d| d.protocol == protocol && d.dominates).map(|d| d.other).collect()
    }

    /// True when `protocol` dominates every other protocol on this axis.
    pub fn dominates_all(&self, protocol: Protocol) -> bool {
        self.dominance.iter().filter(|d| d.protocol == protocol).all(|d| d.dominates)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub axes: Vec<AxisComparison>,
}

/// Run every protocol across every error axis and summarize worst cases and dominance.
pub fn compare_protocols(base: &ProtocolBase, runs: &[ProtocolRun], windows: &[AxisWindow]) -> Result<Comparison> {
    if windows.is_empty() {
        return Err(Error::invalid("axes", "need at least one error axis"));
    }
    let mut axes = Vec::with_capacity(windows.len());
    for window in windows {
        if window.axis == Axis::Duration {
            return Err(Error::invalid("axes", "comparisons run on error axes, not duration"));
        }
        let sweep = run_sweep(&SweepSpec { base: *base, protocols: runs.to_vec(), window: *window })?;
        let nominal_index = window.nominal_value().and_then(|v| window.values().iter().position(|&x| x == v));
        let summaries = runs
            .iter()
            .map(|run| {
                let errs = sweep.errors_for(run.protocol);
                ProtocolSummary {
                    protocol: run.protocol,
                    duration: run.duration,
                    worst_error: errs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    mean_error: errs.iter().sum::<f64>() / errs.len() as f64,
                    nominal_error: nominal_index.map(|i| errs[i]),
                }
            })
            .collect();
        let mut dominance = Vec::new();
        for a in runs {
            for b in runs.iter().filter(|b| b.protocol != a.protocol) {
                let fraction = fraction_not_worse(&sweep.errors_for(a.protocol), &sweep.errors_for(b.protocol));
                dominance.push(Dominance {
                    protocol: a.protocol,
                    other: b.protocol,
                    fraction,
                    dominates: fraction >= DOMINANCE_FRACTION,
                });
            }
        }
        axes.push(AxisComparison { axis: window.axis, sweep, summaries, dominance });
    }
    Ok(Comparison { axes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TwoLevelParams;
    use std::f64::consts::PI;

    fn hz(v: f64) -> AngularFrequency {
        AngularFrequency::from_hz(v)
    }

    fn base() -> ProtocolBase {
        let mut b = ProtocolBase::new(System::TwoLevel(TwoLevelParams::new(hz(150e3)).unwrap()), hz(10e6));
        b.steps = 4000;
        b
    }

    #[test]
    fn window_values() {
        let w = AxisWindow::new(Axis::AmplitudeScale, 0.9, 1.1, 41);
        let v = w.values();
        assert_eq!(v.len(), 41);
        assert_eq!(v[0], 0.9);
        assert_eq!(v[40], 1.1);
        assert!(v.contains(&1.0));
        assert_eq!(AxisWindow::single(Axis::DetuningOffset, 0.0).values(), vec![0.0]);
    }

    #[test]
    fn window_validation() {
        assert!(AxisWindow::new(Axis::AmplitudeScale, 0.0, 1.1, 5).validate().is_err());
        assert!(AxisWindow::new(Axis::AmplitudeScale, 0.5, 2.5, 5).validate().is_err());
        assert!(AxisWindow::new(Axis::DetuningOffset, 1.0, -1.0, 5).validate().is_err());
        assert!(AxisWindow::new(Axis::DetuningOffset, 1.0, 2.0, 1).validate().is_err());
        assert!(AxisWindow::new(Axis::Duration, -1.0, 2.0, 3).validate().is_err());
        let mut add = AxisWindow::new(Axis::AmplitudeScale, -1e4, 1e4, 3);
        add.amplitude_mode = AmplitudeMode::Additive;
        assert!(add.validate().is_ok());
    }

    #[test]
    fn identity_scale_reproduces_unperturbed_run() {
        let b = base();
        let t = 5.83 * b.pi_time();
        let plain = b.run(Protocol::Siquad, t, Perturbation::default()).unwrap();
        let spec = SweepSpec {
            base: b,
            protocols: vec![ProtocolRun { protocol: Protocol::Siquad, duration: t }],
            window: AxisWindow::new(Axis::AmplitudeScale, 0.9, 1.1, 3),
        };
        let res = run_sweep(&spec).unwrap();
        assert_eq!(res.rows[1].axis_value, 1.0);
        assert_eq!(res.rows[1].fidelity, plain.fidelity);
    }

    #[test]
    fn zero_duration_is_identity() {
        let m = base().run(Protocol::Pi, 0.0, Perturbation::default()).unwrap();
        assert_eq!(m.fidelity, 0.0);
        assert_eq!(m.final_norm_sq, 1.0);
    }

    #[test]
    fn rows_are_ordered_and_error_is_complement() {
        let b = base();
        let tp = b.pi_time();
        let spec = SweepSpec {
            base: b,
            protocols: vec![
                ProtocolRun { protocol: Protocol::Pi, duration: tp },
                ProtocolRun { protocol: Protocol::Siquad, duration: 5.83 * tp },
            ],
            window: AxisWindow::new(Axis::DetuningOffset, -hz(50e3).rad_per_s(), hz(50e3).rad_per_s(), 5),
        };
        let res = run_sweep(&spec).unwrap();
        assert_eq!(res.rows.len(), 10);
        assert!(res.rows[..5].iter().all(|r| r.protocol == Protocol::Pi));
        assert!(res.rows.iter().all(|r| r.error == 1.0 - r.fidelity));
        for w in res.rows[..5].windows(2) {
            assert!(w[1].axis_value > w[0].axis_value);
        }
    }

    #[test]
    fn stirap_rejected_for_two_level() {
        let b = base();
        assert!(b.run(Protocol::Stirap, 1e-5, Perturbation::default()).is_err());
    }

    #[test]
    fn single_point_comparison_matches_metrics() {
        let b = base();
        let t = PI / hz(150e3).rad_per_s();
        let run = ProtocolRun { protocol: Protocol::Pi, duration: t };
        let cmp = compare_protocols(&b, &[run], &[AxisWindow::single(Axis::AmplitudeScale, 1.0)]).unwrap();
        let direct = b.run(Protocol::Pi, t, Perturbation::default()).unwrap();
        let s = &cmp.axes[0].summaries[0];
        assert_eq!(s.worst_error, direct.error);
        assert_eq!(s.nominal_error, Some(direct.error));
        assert!(cmp.axes[0].dominance.is_empty());
    }

    #[test]
    fn dominance_fraction() {
        assert_eq!(fraction_not_worse(&[1.0, 2.0, 3.0, 4.0], &[1.0, 1.0, 5.0, 5.0]), 0.75);
    }

    #[test]
    fn parsing_round_trips() {
        for p in Protocol::ALL {
            assert_eq!(p.as_str().parse::<Protocol>().unwrap(), p);
        }
        for a in [Axis::Duration, Axis::AmplitudeScale, Axis::DetuningOffset] {
            assert_eq!(a.as_str().parse::<Axis>().unwrap(), a);
        }
        assert!("stisrap".parse::<Protocol>().is_err());
    }
}
