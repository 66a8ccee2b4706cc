//! Control schedules δ(t), Ω_p(t), Ω_S(t) and the adiabaticity functionals along them.
//!
//! The sweep schedules all run from δ(0) = −δ_m through δ(T/2) = 0 to δ(T) = +δ_m:
//!
//! * SIQUAD holds `s′ = ½ δ̇ / (δ² + Ω²)` constant: `δ = Ω tan[(2t/T − 1) arctan(δ_m/Ω)]`.
//! * FAQUAD holds `s = ½ δ̇ Ω / (δ² + Ω²)^{3/2}` constant: `δ = Ω u / √(1 − u²)` with
//!   `u = (2t/T − 1) δ_m / √(δ_m² + Ω²)`.
//! * LINEAR is the plain Landau-Zener ramp.
//!
//! FLAT_PI keeps δ ≡ 0, and STIRAP_GAUSSIAN keeps δ ≡ 0 while driving a
//! counterintuitive Gaussian pump/Stokes pair.

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::matrix::ComplexMatrix;
use crate::model::{lz_eigensystem, lz_hamiltonian, AngularFrequency, Controls, PulsePair};
use num_complex::Complex64 as C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScheduleKind {
    Siquad,
    Faquad,
    Linear,
    FlatPi,
    StirapGaussian,
}

impl ScheduleKind {
    pub fn is_sweep(self) -> bool {
        matches!(self, ScheduleKind::Siquad | ScheduleKind::Faquad | ScheduleKind::Linear)
    }
}

/// Counterintuitive Gaussian pulse pair: Stokes centered at `(T − τ)/2`, pump at `(T + τ)/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StirapShape {
    pub peak: AngularFrequency,
    pub tau_sep: f64,
    pub sigma: f64,
}

impl StirapShape {
    /// σ = T/8, τ_sep = T/5.
    pub fn default_for(duration: f64, peak: AngularFrequency) -> Self {
        Self { peak, tau_sep: duration / 5.0, sigma: duration / 8.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    kind: ScheduleKind,
    duration: f64,
    delta_m: AngularFrequency,
    omega_ref: AngularFrequency,
    stirap: Option<StirapShape>,
    detuning_offset: AngularFrequency,
}

fn check_duration(duration: f64) -> Result<f64> {
    finite("duration", duration)?;
    if duration <= 0.0 {
        return Err(Error::invalid("duration", "must be positive"));
    }
    Ok(duration)
}

fn check_sweep(duration: f64, delta_m: AngularFrequency, omega: AngularFrequency) -> Result<()> {
    check_duration(duration)?;
    if !(delta_m.rad_per_s() > 0.0 && delta_m.is_finite()) {
        return Err(Error::invalid("delta_m", "must be positive and finite"));
    }
    if !(omega.rad_per_s() > 0.0 && omega.is_finite()) {
        return Err(Error::invalid("omega", "must be positive and finite"));
    }
    Ok(())
}

fn check_time(t: f64, duration: f64) -> Result<()> {
    if (0.0..=duration).contains(&t) {
        Ok(())
    } else {
        Err(Error::TimeOutOfRange { t, duration })
    }
}

/// `Ω tan[(2t/T − 1) arctan(δ_m/Ω)]`
pub fn siquad_delta(t: f64, duration: f64, delta_m: AngularFrequency, omega: AngularFrequency) -> Result<AngularFrequency> {
    check_sweep(duration, delta_m, omega)?;
    check_time(t, duration)?;
    Ok(AngularFrequency::from_rad_per_s(siquad_raw(t, duration, delta_m.rad_per_s(), omega.rad_per_s())))
}

/// Value of the constant `s′` along the SIQUAD schedule, `arctan(δ_m/Ω) / (TΩ)`.
pub fn siquad_sprime_value(duration: f64, delta_m: AngularFrequency, omega: AngularFrequency) -> Result<f64> {
    check_sweep(duration, delta_m, omega)?;
    let o = omega.rad_per_s();
    Ok((delta_m.rad_per_s() / o).atan() / (duration * o))
}

pub fn faquad_delta(t: f64, duration: f64, delta_m: AngularFrequency, omega: AngularFrequency) -> Result<AngularFrequency> {
    check_sweep(duration, delta_m, omega)?;
    check_time(t, duration)?;
    let u = faquad_u(t, duration, delta_m.rad_per_s(), omega.rad_per_s());
    if u.abs() >= 1.0 {
        return Err(Error::invalid("faquad parameter", format!("|u| = {u} reached 1")));
    }
    Ok(AngularFrequency::from_rad_per_s(faquad_raw(t, duration, delta_m.rad_per_s(), omega.rad_per_s())))
}

/// `δ_m (2t/T − 1)`
pub fn linear_delta(t: f64, duration: f64, delta_m: AngularFrequency) -> Result<AngularFrequency> {
    check_duration(duration)?;
    check_time(t, duration)?;
    Ok(AngularFrequency::from_rad_per_s(linear_raw(t, duration, delta_m.rad_per_s())))
}

/// `(Ω_p(t), Ω_S(t))` for the counterintuitive Gaussian pair.
pub fn stirap_pulses(
    t: f64,
    duration: f64,
    peak: AngularFrequency,
    tau_sep: f64,
    sigma: f64,
) -> Result<(AngularFrequency, AngularFrequency)> {
    check_duration(duration)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid("sigma", "must be positive"));
    }
    if !(tau_sep > 0.0 && tau_sep < duration) {
        return Err(Error::invalid("tau_sep", "must lie in (0, T)"));
    }
    let (p, s) = stirap_raw(t, duration, peak.rad_per_s(), tau_sep, sigma);
    Ok((AngularFrequency::from_rad_per_s(p), AngularFrequency::from_rad_per_s(s)))
}

#[inline]
fn siquad_raw(t: f64, duration: f64, dm: f64, o: f64) -> f64 {
    o * ((2.0 * t / duration - 1.0) * (dm / o).atan()).tan()
}

#[inline]
fn siquad_rate_raw(t: f64, duration: f64, dm: f64, o: f64) -> f64 {
    let a = (dm / o).atan();
    let c = ((2.0 * t / duration - 1.0) * a).cos();
    o * 2.0 * a / (duration * c * c)
}

#[inline]
fn faquad_u(t: f64, duration: f64, dm: f64, o: f64) -> f64 {
    (2.0 * t / duration - 1.0) * dm / dm.hypot(o)
}

#[inline]
fn faquad_raw(t: f64, duration: f64, dm: f64, o: f64) -> f64 {
    let u = faquad_u(t, duration, dm, o);
    o * u / (1.0 - u * u).sqrt()
}

#[inline]
fn faquad_rate_raw(t: f64, duration: f64, dm: f64, o: f64) -> f64 {
    let u = faquad_u(t, duration, dm, o);
    let du = 2.0 * dm / (duration * dm.hypot(o));
    let w = 1.0 - u * u;
    o * du / (w * w.sqrt())
}

#[inline]
fn linear_raw(t: f64, duration: f64, dm: f64) -> f64 {
    dm * (2.0 * t / duration - 1.0)
}

#[inline]
fn stirap_raw(t: f64, duration: f64, peak: f64, tau_sep: f64, sigma: f64) -> (f64, f64) {
    let g = |center: f64| {
        let x = (t - center) / sigma;
        peak * (-0.5 * x * x).exp()
    };
    (g(0.5 * (duration + tau_sep)), g(0.5 * (duration - tau_sep)))
}

impl PulseSchedule {
    pub fn siquad(duration: f64, delta_m: AngularFrequency, omega: AngularFrequency) -> Result<Self> {
        Self::sweep(ScheduleKind::Siquad, duration, delta_m, omega)
    }

    pub fn faquad(duration: f64, delta_m: AngularFrequency, omega: AngularFrequency) -> Result<Self> {
        Self::sweep(ScheduleKind::Faquad, duration, delta_m, omega)
    }

    /// `omega` is recorded only as the reference gap for adiabaticity reports.
    pub fn linear(duration: f64, delta_m: AngularFrequency, omega: AngularFrequency) -> Result<Self> {
        Self::sweep(ScheduleKind::Linear, duration, delta_m, omega)
    }

    fn sweep(kind: ScheduleKind, duration: f64, delta_m: AngularFrequency, omega: AngularFrequency) -> Result<Self> {
        check_sweep(duration, delta_m, omega)?;
        Ok(Self {
            kind,
            duration,
            delta_m,
            omega_ref: omega,
            stirap: None,
            detuning_offset: AngularFrequency::ZERO,
        })
    }

    /// Resonant flat drive (δ ≡ 0) for `duration`.
    pub fn flat_pi(duration: f64, omega: AngularFrequency) -> Result<Self> {
        check_duration(duration)?;
        Ok(Self {
            kind: ScheduleKind::FlatPi,
            duration,
            delta_m: AngularFrequency::ZERO,
            omega_ref: omega,
            stirap: None,
            detuning_offset: AngularFrequency::ZERO,
        })
    }

    pub fn stirap(duration: f64, shape: StirapShape, omega_ref: AngularFrequency) -> Result<Self> {
        check_duration(duration)?;
        stirap_pulses(0.0, duration, shape.peak, shape.tau_sep, shape.sigma)?;
        if !(shape.peak.rad_per_s() >= 0.0 && shape.peak.is_finite()) {
            return Err(Error::invalid("stirap peak", "must be non-negative and finite"));
        }
        Ok(Self {
            kind: ScheduleKind::StirapGaussian,
            duration,
            delta_m: AngularFrequency::ZERO,
            omega_ref,
            stirap: Some(shape),
            detuning_offset: AngularFrequency::ZERO,
        })
    }

    /// Constant offset δ′ added to δ(t).
    pub fn with_detuning_offset(self, offset: AngularFrequency) -> Self {
        Self { detuning_offset: offset, ..self }
    }

    /// Same protocol stretched to a new duration; STIRAP widths scale with it.
    pub fn with_duration(self, duration: f64) -> Result<Self> {
        check_duration(duration)?;
        let k = duration / self.duration;
        let stirap = self.stirap.map(|s| StirapShape { peak: s.peak, tau_sep: s.tau_sep * k, sigma: s.sigma * k });
        Ok(Self { duration, stirap, ..self })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn delta_m(&self) -> AngularFrequency {
        self.delta_m
    }

    pub fn omega_ref(&self) -> AngularFrequency {
        self.omega_ref
    }

    pub fn stirap_shape(&self) -> Option<StirapShape> {
        self.stirap
    }

    pub fn detuning_offset(&self) -> AngularFrequency {
        self.detuning_offset
    }

    /// δ(t) including the offset; no range check.
    #[inline]
    pub(crate) fn delta_raw(&self, t: f64) -> f64 {
        let dm = self.delta_m.rad_per_s();
        let o = self.omega_ref.rad_per_s();
        let base = match self.kind {
            ScheduleKind::Siquad => siquad_raw(t, self.duration, dm, o),
            ScheduleKind::Faquad => faquad_raw(t, self.duration, dm, o),
            ScheduleKind::Linear => linear_raw(t, self.duration, dm),
            ScheduleKind::FlatPi | ScheduleKind::StirapGaussian => 0.0,
        };
        base + self.detuning_offset.rad_per_s()
    }

    pub fn delta(&self, t: f64) -> Result<AngularFrequency> {
        check_time(t, self.duration)?;
        Ok(AngularFrequency::from_rad_per_s(self.delta_raw(t)))
    }

    /// Pump/Stokes values for pulsed schedules, `None` otherwise.
    #[inline]
    pub fn pulses(&self, t: f64) -> Option<PulsePair> {
        self.stirap.map(|s| {
            let (p, st) = stirap_raw(t, self.duration, s.peak.rad_per_s(), s.tau_sep, s.sigma);
            PulsePair {
                omega_p: AngularFrequency::from_rad_per_s(p),
                omega_s: AngularFrequency::from_rad_per_s(st),
                peak: s.peak,
            }
        })
    }

    #[inline]
    pub fn controls(&self, t: f64) -> Controls {
        Controls { delta: AngularFrequency::from_rad_per_s(self.delta_raw(t)), pulses: self.pulses(t) }
    }

    /// dδ/dt in rad/s², analytic for every closed form.
    pub fn delta_derivative(&self, t: f64) -> Result<f64> {
        check_time(t, self.duration)?;
        let dm = self.delta_m.rad_per_s();
        let o = self.omega_ref.rad_per_s();
        Ok(match self.kind {
            ScheduleKind::Siquad => siquad_rate_raw(t, self.duration, dm, o),
            ScheduleKind::Faquad => faquad_rate_raw(t, self.duration, dm, o),
            ScheduleKind::Linear => 2.0 * dm / self.duration,
            ScheduleKind::FlatPi | ScheduleKind::StirapGaussian => 0.0,
        })
    }

    /// dδ/dt by finite differences with step `T·1e-6`: central in the interior,
    /// one-sided within two steps of either end.
    pub fn delta_derivative_numeric(&self, t: f64) -> Result<f64> {
        check_time(t, self.duration)?;
        let h = self.duration * 1e-6;
        let f = |x: f64| self.delta_raw(x);
        // Fourth-order central stencil; fifth-order one-sided within 2h of either end.
        let one_sided = |s: f64| {
            const W: [f64; 6] = [-137.0 / 60.0, 5.0, -5.0, 10.0 / 3.0, -5.0 / 4.0, 1.0 / 5.0];
            s * W.iter().enumerate().map(|(k, w)| w * f(t + k as f64 * s * h)).sum::<f64>() / h
        };
        Ok(if t - 2.0 * h < 0.0 {
            one_sided(1.0)
        } else if t + 2.0 * h > self.duration {
            one_sided(-1.0)
        } else {
            (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h)
        })
    }

    /// `n` evenly spaced samples over [0, T], endpoints included.
    pub fn sample_table(&self, n: usize) -> Result<Vec<ScheduleSample>> {
        if n < 2 {
            return Err(Error::invalid("samples", "need at least 2"));
        }
        Ok((0..n)
            .map(|k| {
                let t = if k == n - 1 { self.duration } else { self.duration * k as f64 / (n - 1) as f64 };
                let (omega_p, omega_s) = match self.pulses(t) {
                    Some(p) => (p.omega_p.rad_per_s(), p.omega_s.rad_per_s()),
                    None => (f64::NAN, f64::NAN),
                };
                ScheduleSample { t, delta: self.delta_raw(t), omega_p, omega_s }
            })
            .collect())
    }
}

/// One row of a sampled schedule; `omega_p`/`omega_s` are NaN when the
/// couplings are the model's static values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScheduleSample {
    pub t: f64,
    pub delta: f64,
    pub omega_p: f64,
    pub omega_s: f64,
}

/// `s = ½ δ̇ Ω / (δ² + Ω²)^{3/2}`
pub fn adiabaticity_s(delta: AngularFrequency, ddelta_dt: f64, omega: AngularFrequency) -> f64 {
    let d = delta.rad_per_s();
    let o = omega.rad_per_s();
    let r2 = d * d + o * o;
    0.5 * ddelta_dt * o / (r2 * r2.sqrt())
}

/// `s′ = ½ δ̇ / (δ² + Ω²)`
pub fn adiabaticity_sprime(delta: AngularFrequency, ddelta_dt: f64, omega: AngularFrequency) -> f64 {
    let d = delta.rad_per_s();
    let o = omega.rad_per_s();
    0.5 * ddelta_dt / (d * d + o * o)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdiabaticitySample {
    pub t: f64,
    pub s: f64,
    pub s_prime: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdiabaticityReport {
    pub samples: Vec<AdiabaticitySample>,
    pub max_s: f64,
    pub max_s_prime: f64,
}

impl AdiabaticityReport {
    /// `(max − min) / |mean|` of s.
    pub fn s_spread(&self) -> f64 {
        relative_spread(self.samples.iter().map(|x| x.s))
    }

    pub fn s_prime_spread(&self) -> f64 {
        relative_spread(self.samples.iter().map(|x| x.s_prime))
    }
}

fn relative_spread(values: impl Iterator<Item = f64>) -> f64 {
    let (mut lo, mut hi, mut sum, mut n) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
        sum += v;
        n += 1;
    }
    if n == 0 {
        return 0.0;
    }
    (hi - lo) / (sum / n as f64).abs()
}

/// Sample s and s′ at `n` evenly spaced times using the schedule's own reference gap.
pub fn adiabaticity_report(schedule: &PulseSchedule, n: usize) -> Result<AdiabaticityReport> {
    let omega = schedule.omega_ref();
    if omega.rad_per_s() <= 0.0 {
        return Err(Error::invalid("omega", "must be positive"));
    }
    let samples = schedule
        .sample_table(n)?
        .into_iter()
        .map(|row| {
            let rate = schedule.delta_derivative(row.t)?;
            let d = AngularFrequency::from_rad_per_s(row.delta);
            Ok(AdiabaticitySample { t: row.t, s: adiabaticity_s(d, rate, omega), s_prime: adiabaticity_sprime(d, rate, omega) })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_s = samples.iter().map(|x| x.s).fold(f64::NEG_INFINITY, f64::max);
    let max_s_prime = samples.iter().map(|x| x.s_prime).fold(f64::NEG_INFINITY, f64::max);
    Ok(AdiabaticityReport { samples, max_s, max_s_prime })
}

/// Diagonal gap and off-diagonal magnitude of the Landau-Zener Hamiltonian in
/// its instantaneous eigenbasis, `H̃ = i (dV†/dt) V + V† H V`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotatingFrame {
    /// `H̃₁₁ − H̃₂₂`
    pub diag_gap: f64,
    /// `|H̃₁₂|`
    pub offdiag_coupling: f64,
    pub matrix: ComplexMatrix,
}

/// Forms H̃ numerically: V from the closed-form eigenvectors, dV/dt by a
/// five-point stencil in δ times δ̇.
pub fn rotating_frame_check(delta: AngularFrequency, ddelta_dt: f64, omega: AngularFrequency) -> Result<RotatingFrame> {
    let h = lz_hamiltonian(delta, omega)?;
    let d = delta.rad_per_s();
    let o = omega.rad_per_s();
    let basis = |x: f64| -> Result<ComplexMatrix> {
        let es = lz_eigensystem(AngularFrequency::from_rad_per_s(x), omega)?;
        Ok(ComplexMatrix::from_real_rows(&[[es.phi_plus[0], es.phi_minus[0]], [es.phi_plus[1], es.phi_minus[1]]]))
    };
    let v = basis(d)?;
    let step = 1e-3 * d.hypot(o);
    let c = |k: f64| C64::new(k, 0.0);
    let dv_ddelta = (basis(d - 2.0 * step)? - basis(d + 2.0 * step)?)
        .scale(c(1.0 / (12.0 * step)))
        + (basis(d + step)? - basis(d - step)?).scale(c(8.0 / (12.0 * step)));
    let dv_dt = dv_ddelta.scale(c(ddelta_dt));
    let vd = v.adjoint();
    let h_rot = (dv_dt.adjoint() * v).scale(C64::new(0.0, 1.0)) + vd * h * v;
    Ok(RotatingFrame {
        diag_gap: (h_rot.get(0, 0) - h_rot.get(1, 1)).re,
        offdiag_coupling: h_rot.get(0, 1).norm(),
        matrix: h_rot,
    })
}
