//! Run configuration: flat `key = value` lines, `#` comments, one optional `[sweep]` section.
//!
//! Frequencies are ordinary Hz and are turned into angular frequencies here and
//! nowhere else. Durations are seconds (`*_s`) or multiples of the π time at the
//! operating gap (`*_tau_pi`). Unknown keys, repeated keys and conflicting
//! duration keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use quadsim_core::sweep::{DEFAULT_STEPS_THREE_LEVEL, DEFAULT_STEPS_TWO_LEVEL, DEFAULT_STIRAP_SIGMA_FRAC, DEFAULT_STIRAP_TAU_SEP_FRAC};
use quadsim_core::{
    operating_gap, AmplitudeMode, AngularFrequency, Axis, AxisWindow, LambdaParams, Method, Protocol, ProtocolBase,
    ProtocolRun, Scenario, System, TwoLevelParams,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// Offending key, when one can be named.
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn key(key: &str, message: impl Into<String>) -> Self {
        Self { key: Some(key.to_string()), message: message.into() }
    }

    fn general(message: impl Into<String>) -> Self {
        Self { key: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(k) => write!(f, "config key '{k}': {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

const TOP_KEYS: &[&str] = &[
    "scenario",
    "protocol",
    "protocols",
    "omega_m_hz",
    "omega0_hz",
    "delta_big_hz",
    "delta_m_hz",
    "gamma_hz",
    "T_s",
    "T_tau_pi",
    "steps",
    "method",
    "stirap_sigma_frac",
    "stirap_tau_sep_frac",
    "trajectory_stride",
];

const SWEEP_KEYS: &[&str] = &[
    "axis",
    "axes",
    "duration_lo_s",
    "duration_hi_s",
    "duration_lo_tau_pi",
    "duration_hi_tau_pi",
    "duration_points",
    "amplitude_mode",
    "amplitude_lo",
    "amplitude_hi",
    "amplitude_lo_hz",
    "amplitude_hi_hz",
    "amplitude_points",
    "detuning_lo_hz",
    "detuning_hi_hz",
    "detuning_lo_gap",
    "detuning_hi_gap",
    "detuning_points",
];

pub const DEFAULT_POINTS: usize = 41;

/// Key/value pairs by section, with the line each came from.
#[derive(Debug, Default)]
struct RawConfig {
    top: BTreeMap<String, (String, usize)>,
    sweep: BTreeMap<String, (String, usize)>,
    has_sweep: bool,
}

fn is_per_protocol_duration(key: &str) -> bool {
    Protocol::ALL.iter().any(|p| key == format!("T_{p}_s") || key == format!("T_{p}_tau_pi"))
}

fn parse_raw(text: &str) -> Result<RawConfig> {
    let mut raw = RawConfig::default();
    let mut in_sweep = false;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if line != "[sweep]" {
                return Err(ConfigError::general(format!("line {lineno}: unknown section {line}")));
            }
            if raw.has_sweep {
                return Err(ConfigError::general(format!("line {lineno}: repeated [sweep] section")));
            }
            raw.has_sweep = true;
            in_sweep = true;
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::general(format!("line {lineno}: expected 'key = value'")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::general(format!("line {lineno}: empty key")));
        }
        let known = if in_sweep { SWEEP_KEYS.contains(&key) } else { TOP_KEYS.contains(&key) || is_per_protocol_duration(key) };
        if !known {
            let section = if in_sweep { "[sweep]" } else { "top level" };
            return Err(ConfigError::key(key, format!("unknown key in {section} (line {lineno})")));
        }
        let map = if in_sweep { &mut raw.sweep } else { &mut raw.top };
        if map.insert(key.to_string(), (value.to_string(), lineno)).is_some() {
            return Err(ConfigError::key(key, format!("repeated on line {lineno}")));
        }
    }
    Ok(raw)
}

fn get<'a>(map: &'a BTreeMap<String, (String, usize)>, key: &str) -> Option<&'a str> {
    map.get(key).map(|(v, _)| v.as_str())
}

fn parse_f64(map: &BTreeMap<String, (String, usize)>, key: &str) -> Result<Option<f64>> {
    get(map, key)
        .map(|v| {
            let x: f64 = v.parse().map_err(|_| ConfigError::key(key, format!("'{v}' is not a number")))?;
            if !x.is_finite() {
                return Err(ConfigError::key(key, "must be finite"));
            }
            Ok(x)
        })
        .transpose()
}

fn parse_usize(map: &BTreeMap<String, (String, usize)>, key: &str) -> Result<Option<usize>> {
    get(map, key)
        .map(|v| {
            let clean = v.replace('_', "");
            clean
                .parse::<usize>()
                .or_else(|_| match clean.parse::<f64>() {
                    Ok(x) if x.fract() == 0.0 && (0.0..1e15).contains(&x) => Ok(x as usize),
                    _ => Err(()),
                })
                .map_err(|_| ConfigError::key(key, format!("'{v}' is not a non-negative integer")))
        })
        .transpose()
}

fn non_negative(key: &str, v: Option<f64>) -> Result<Option<f64>> {
    match v {
        Some(x) if x < 0.0 => Err(ConfigError::key(key, "must be non-negative")),
        other => Ok(other),
    }
}

fn positive(key: &str, v: Option<f64>) -> Result<Option<f64>> {
    match v {
        Some(x) if x <= 0.0 => Err(ConfigError::key(key, "must be positive")),
        other => Ok(other),
    }
}

fn require(key: &str, v: Option<f64>, why: &str) -> Result<f64> {
    v.ok_or_else(|| ConfigError::key(key, format!("missing (required {why})")))
}

fn parse_list<T: std::str::FromStr<Err = String>>(key: &str, v: &str) -> Result<Vec<T>> {
    let items: Vec<T> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| ConfigError::key(key, e)))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(ConfigError::key(key, "empty list"));
    }
    Ok(items)
}

fn parse_method(v: &str) -> Result<Method> {
    match v {
        "piecewise_expm" => Ok(Method::PiecewiseExpm),
        "rk4" => Ok(Method::Rk4),
        other => Err(ConfigError::key("method", format!("unknown method '{other}' (expected piecewise_expm or rk4)"))),
    }
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::PiecewiseExpm => "piecewise_expm",
        Method::Rk4 => "rk4",
    }
}

/// Physical parameters exactly as written in the file (Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    pub omega_m_hz: Option<f64>,
    pub omega0_hz: Option<f64>,
    pub delta_big_hz: Option<f64>,
    pub delta_m_hz: Option<f64>,
    pub gamma_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolDuration {
    pub protocol: Protocol,
    /// Resolved operation time in seconds.
    pub t_s: f64,
    /// The key that set it.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub axis: Option<Axis>,
    pub axes: Vec<Axis>,
    pub windows: Vec<AxisWindow>,
}

impl SweepSection {
    pub fn window(&self, axis: Axis) -> Option<AxisWindow> {
        self.windows.iter().copied().find(|w| w.axis == axis)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub protocols: Vec<Protocol>,
    pub params: PhysicalParams,
    pub durations: Vec<ProtocolDuration>,
    pub steps: usize,
    pub method: Method,
    pub stirap_sigma_frac: f64,
    pub stirap_tau_sep_frac: f64,
    pub trajectory_stride: Option<usize>,
    pub sweep: Option<SweepSection>,
    /// Angular gap entering the schedules (rad/s).
    pub omega_gap_rad_s: f64,
    /// π / Ω_gap (s).
    pub tau_pi_s: f64,
    pub base: ProtocolBase,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> std::result::Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::general(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw = parse_raw(text)?;
        let top = &raw.top;

        let scenario: Scenario = get(top, "scenario")
            .ok_or_else(|| ConfigError::key("scenario", "missing (two_level or three_level)"))?
            .parse()
            .map_err(|e: String| ConfigError::key("scenario", e))?;

        let protocols: Vec<Protocol> = match (get(top, "protocol"), get(top, "protocols")) {
            (Some(_), Some(_)) => return Err(ConfigError::key("protocols", "give either 'protocol' or 'protocols', not both")),
            (Some(v), None) => parse_list("protocol", v)?,
            (None, Some(v)) => parse_list("protocols", v)?,
            (None, None) => return Err(ConfigError::key("protocols", "missing")),
        };
        for (i, p) in protocols.iter().enumerate() {
            if protocols[..i].contains(p) {
                return Err(ConfigError::key("protocols", format!("'{p}' listed twice")));
            }
        }

        let params = PhysicalParams {
            omega_m_hz: non_negative("omega_m_hz", parse_f64(top, "omega_m_hz")?)?,
            omega0_hz: non_negative("omega0_hz", parse_f64(top, "omega0_hz")?)?,
            delta_big_hz: positive("delta_big_hz", parse_f64(top, "delta_big_hz")?)?,
            delta_m_hz: positive("delta_m_hz", parse_f64(top, "delta_m_hz")?)?,
            gamma_hz: non_negative("gamma_hz", parse_f64(top, "gamma_hz")?)?,
        };

        let system = match scenario {
            Scenario::TwoLevel => {
                for key in ["omega0_hz", "delta_big_hz", "gamma_hz"] {
                    if top.contains_key(key) {
                        return Err(ConfigError::key(key, "not used by the two_level scenario"));
                    }
                }
                let om = require("omega_m_hz", params.omega_m_hz, "for two_level")?;
                let p = TwoLevelParams::new(AngularFrequency::from_hz(om))
                    .map_err(|e| ConfigError::key("omega_m_hz", e.to_string()))?;
                System::TwoLevel(p)
            }
            Scenario::ThreeLevel => {
                let o0 = require("omega0_hz", params.omega0_hz, "for three_level")?;
                let big = require("delta_big_hz", params.delta_big_hz, "for three_level")?;
                let gamma = require("gamma_hz", params.gamma_hz, "for three_level")?;
                let om = params.omega_m_hz.unwrap_or(0.0);
                let hz = AngularFrequency::from_hz;
                let p = LambdaParams::new(hz(o0), hz(o0), hz(om), hz(big), hz(gamma))
                    .map_err(|e| ConfigError::general(e.to_string()))?;
                if o0 == 0.0 {
                    return Err(ConfigError::key("omega0_hz", "must be positive for three_level"));
                }
                System::Lambda(p)
            }
        };

        for p in &protocols {
            match p {
                Protocol::Siquad | Protocol::Faquad | Protocol::Linear => {
                    require("delta_m_hz", params.delta_m_hz, &format!("by protocol {p}"))?;
                }
                Protocol::Stirap if scenario == Scenario::TwoLevel => {
                    return Err(ConfigError::key("protocols", "stirap needs the three_level scenario"));
                }
                _ => {}
            }
        }

        let gap = operating_gap(&system);
        let tau_pi = std::f64::consts::PI / gap.rad_per_s();

        let method = get(top, "method").map(parse_method).transpose()?.unwrap_or_default();
        let steps = parse_usize(top, "steps")?.unwrap_or(match scenario {
            Scenario::TwoLevel => DEFAULT_STEPS_TWO_LEVEL,
            Scenario::ThreeLevel => DEFAULT_STEPS_THREE_LEVEL,
        });
        if steps < quadsim_core::propagator::MIN_STEPS {
            return Err(ConfigError::key("steps", format!("must be at least {}", quadsim_core::propagator::MIN_STEPS)));
        }
        let frac = |key: &str, default: f64| -> Result<f64> {
            match parse_f64(top, key)? {
                Some(x) if x <= 0.0 => Err(ConfigError::key(key, "must be positive")),
                Some(x) => Ok(x),
                None => Ok(default),
            }
        };
        let stirap_sigma_frac = frac("stirap_sigma_frac", DEFAULT_STIRAP_SIGMA_FRAC)?;
        let stirap_tau_sep_frac = frac("stirap_tau_sep_frac", DEFAULT_STIRAP_TAU_SEP_FRAC)?;
        let trajectory_stride = parse_usize(top, "trajectory_stride")?;
        if trajectory_stride == Some(0) {
            return Err(ConfigError::key("trajectory_stride", "must be positive"));
        }

        let durations = resolve_durations(top, &protocols, tau_pi)?;
        let sweep = if raw.has_sweep { Some(parse_sweep(&raw.sweep, gap, tau_pi)?) } else { None };

        let base = ProtocolBase {
            system,
            delta_m: AngularFrequency::from_hz(params.delta_m_hz.unwrap_or(0.0)),
            stirap_sigma_frac,
            stirap_tau_sep_frac,
            method,
            steps,
        };

        Ok(RunConfig {
            scenario,
            protocols,
            params,
            durations,
            steps,
            method,
            stirap_sigma_frac,
            stirap_tau_sep_frac,
            trajectory_stride,
            sweep,
            omega_gap_rad_s: gap.rad_per_s(),
            tau_pi_s: tau_pi,
            base,
        })
    }

    pub fn duration(&self, protocol: Protocol) -> Option<f64> {
        self.durations.iter().find(|d| d.protocol == protocol).map(|d| d.t_s)
    }

    /// Protocols paired with their durations; every protocol must have one.
    pub fn protocol_runs(&self) -> Result<Vec<ProtocolRun>> {
        self.protocols
            .iter()
            .map(|&p| {
                self.duration(p)
                    .map(|duration| ProtocolRun { protocol: p, duration })
                    .ok_or_else(|| ConfigError::key("T_s", format!("no duration for protocol {p} (set T_s, T_tau_pi or T_{p}_s)")))
            })
            .collect()
    }

    /// Runs for a DURATION sweep, where fixed durations are not needed.
    pub fn protocol_runs_lenient(&self) -> Vec<ProtocolRun> {
        self.protocols
            .iter()
            .map(|&p| ProtocolRun { protocol: p, duration: self.duration(p).unwrap_or(0.0) })
            .collect()
    }
}

fn seconds_from(
    map: &BTreeMap<String, (String, usize)>,
    s_key: &str,
    tau_key: &str,
    tau_pi: f64,
) -> Result<Option<(f64, String)>> {
    match (parse_f64(map, s_key)?, parse_f64(map, tau_key)?) {
        (Some(_), Some(_)) => Err(ConfigError::key(s_key, format!("conflicts with {tau_key}"))),
        (Some(s), None) => Ok(Some((s, s_key.to_string()))),
        (None, Some(k)) => Ok(Some((k * tau_pi, tau_key.to_string()))),
        (None, None) => Ok(None),
    }
}

fn resolve_durations(
    top: &BTreeMap<String, (String, usize)>,
    protocols: &[Protocol],
    tau_pi: f64,
) -> Result<Vec<ProtocolDuration>> {
    for p in Protocol::ALL {
        if !protocols.contains(&p) {
            for key in [format!("T_{p}_s"), format!("T_{p}_tau_pi")] {
                if top.contains_key(&key) {
                    return Err(ConfigError::key(&key, format!("protocol {p} is not selected")));
                }
            }
        }
    }
    let global = seconds_from(top, "T_s", "T_tau_pi", tau_pi)?;
    let mut out = Vec::new();
    for &p in protocols {
        let own = seconds_from(top, &format!("T_{p}_s"), &format!("T_{p}_tau_pi"), tau_pi)?;
        if let Some((t, source)) = own.or_else(|| global.clone()) {
            if !(t > 0.0) {
                return Err(ConfigError::key(&source, "duration must be positive"));
            }
            out.push(ProtocolDuration { protocol: p, t_s: t, source });
        }
    }
    Ok(out)
}

fn parse_sweep(map: &BTreeMap<String, (String, usize)>, gap: AngularFrequency, tau_pi: f64) -> Result<SweepSection> {
    let axis = get(map, "axis")
        .map(|v| v.parse::<Axis>().map_err(|e| ConfigError::key("axis", e)))
        .transpose()?;
    let axes = match get(map, "axes") {
        Some(v) => parse_list::<Axis>("axes", v)?,
        None => vec![Axis::AmplitudeScale, Axis::DetuningOffset],
    };
    let points = |key: &str| -> Result<usize> {
        let n = parse_usize(map, key)?.unwrap_or(DEFAULT_POINTS);
        if n < 2 {
            return Err(ConfigError::key(key, "need at least 2 points"));
        }
        Ok(n)
    };
    let pair = |lo: Option<f64>, hi: Option<f64>, lo_key: &str, hi_key: &str| -> Result<Option<(f64, f64)>> {
        match (lo, hi) {
            (Some(a), Some(b)) => Ok(Some((a, b))),
            (None, None) => Ok(None),
            (Some(_), None) => Err(ConfigError::key(hi_key, "missing (its lower bound is set)")),
            (None, Some(_)) => Err(ConfigError::key(lo_key, "missing (its upper bound is set)")),
        }
    };
    let mut windows = Vec::new();

    let dur_s = pair(parse_f64(map, "duration_lo_s")?, parse_f64(map, "duration_hi_s")?, "duration_lo_s", "duration_hi_s")?;
    let dur_tau = pair(
        parse_f64(map, "duration_lo_tau_pi")?,
        parse_f64(map, "duration_hi_tau_pi")?,
        "duration_lo_tau_pi",
        "duration_hi_tau_pi",
    )?;
    let duration = match (dur_s, dur_tau) {
        (Some(_), Some(_)) => return Err(ConfigError::key("duration_lo_s", "conflicts with duration_lo_tau_pi")),
        (Some(r), None) => Some(r),
        (None, Some((a, b))) => Some((a * tau_pi, b * tau_pi)),
        (None, None) => None,
    };
    if let Some((lo, hi)) = duration {
        windows.push(AxisWindow::new(Axis::Duration, lo, hi, points("duration_points")?));
    }

    let mode = match get(map, "amplitude_mode") {
        None | Some("scale") => AmplitudeMode::Scale,
        Some("additive") => AmplitudeMode::Additive,
        Some(other) => return Err(ConfigError::key("amplitude_mode", format!("unknown mode '{other}' (scale or additive)"))),
    };
    let amp_scale = pair(parse_f64(map, "amplitude_lo")?, parse_f64(map, "amplitude_hi")?, "amplitude_lo", "amplitude_hi")?;
    let amp_hz = pair(parse_f64(map, "amplitude_lo_hz")?, parse_f64(map, "amplitude_hi_hz")?, "amplitude_lo_hz", "amplitude_hi_hz")?;
    let amplitude = match mode {
        AmplitudeMode::Scale => {
            if amp_hz.is_some() {
                return Err(ConfigError::key("amplitude_lo_hz", "only valid with amplitude_mode = additive"));
            }
            let (lo, hi) = amp_scale.unwrap_or((0.8, 1.2));
            AxisWindow { amplitude_mode: mode, ..AxisWindow::new(Axis::AmplitudeScale, lo, hi, points("amplitude_points")?) }
        }
        AmplitudeMode::Additive => {
            if amp_scale.is_some() {
                return Err(ConfigError::key("amplitude_lo", "only valid with amplitude_mode = scale"));
            }
            let (lo, hi) = amp_hz.ok_or_else(|| ConfigError::key("amplitude_lo_hz", "missing (required for additive mode)"))?;
            let w = |x: f64| AngularFrequency::from_hz(x).rad_per_s();
            AxisWindow { amplitude_mode: mode, ..AxisWindow::new(Axis::AmplitudeScale, w(lo), w(hi), points("amplitude_points")?) }
        }
    };
    windows.push(amplitude);

    let det_hz = pair(parse_f64(map, "detuning_lo_hz")?, parse_f64(map, "detuning_hi_hz")?, "detuning_lo_hz", "detuning_hi_hz")?;
    let det_gap = pair(parse_f64(map, "detuning_lo_gap")?, parse_f64(map, "detuning_hi_gap")?, "detuning_lo_gap", "detuning_hi_gap")?;
    let (lo, hi) = match (det_hz, det_gap) {
        (Some(_), Some(_)) => return Err(ConfigError::key("detuning_lo_hz", "conflicts with detuning_lo_gap")),
        (Some((a, b)), None) => (AngularFrequency::from_hz(a).rad_per_s(), AngularFrequency::from_hz(b).rad_per_s()),
        (None, Some((a, b))) => (a * gap.rad_per_s(), b * gap.rad_per_s()),
        (None, None) => (-gap.rad_per_s(), gap.rad_per_s()),
    };
    windows.push(AxisWindow::new(Axis::DetuningOffset, lo, hi, points("detuning_points")?));

    for w in &windows {
        let prefix = match w.axis {
            Axis::Duration => "duration",
            Axis::AmplitudeScale => "amplitude",
            Axis::DetuningOffset => "detuning",
        };
        w.validate().map_err(|e| ConfigError::key(&format!("{prefix}_lo"), e.to_string()))?;
    }
    if axis == Some(Axis::Duration) && duration.is_none() {
        return Err(ConfigError::key("duration_lo_s", "missing (set duration_lo_s/hi_s or duration_lo_tau_pi/hi_tau_pi)"));
    }
    if axes.contains(&Axis::Duration) {
        return Err(ConfigError::key("axes", "comparisons run on amplitude_scale and detuning_offset only"));
    }
    Ok(SweepSection { axis, axes, windows })
}
