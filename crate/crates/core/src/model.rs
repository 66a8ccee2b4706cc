//! Physical parameters, instantaneous Hamiltonians and the Landau-Zener eigensystem.
//!
//! Every matrix carries an overall factor ½ and is expressed in rad/s with ħ = 1.
//! Couplings are real and non-negative.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::error::{finite, Error, Result};
use crate::matrix::{ComplexMatrix, StateVector};

/// Angular frequency in rad/s.
///
/// Ordinary frequencies enter through [`AngularFrequency::from_hz`], which is the
/// only place a factor 2π is applied.
#[derive(Clone, Copy, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AngularFrequency(f64);

impl AngularFrequency {
    pub const ZERO: Self = Self(0.0);

    #[inline]
    pub const fn from_rad_per_s(value: f64) -> Self {
        Self(value)
    }

    #[inline]
    pub fn from_hz(hz: f64) -> Self {
        Self(TAU * hz)
    }

    #[inline]
    pub const fn rad_per_s(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn hz(self) -> f64 {
        self.0 / TAU
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub(crate) fn checked(self, name: &'static str) -> Result<Self> {
        finite(name, self.0).map(Self)
    }
}

impl fmt::Debug for AngularFrequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2π×{:e} Hz", self.hz())
    }
}

impl std::ops::Add for AngularFrequency {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl std::ops::Sub for AngularFrequency {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl std::ops::Mul<f64> for AngularFrequency {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self(self.0 * rhs)
    }
}

impl std::ops::Neg for AngularFrequency {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

/// Normalized (or decayed) amplitude vector of a 2- or 3-level system.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumState(StateVector);

/// Squared norms above `1 + NORM_SLACK` are rejected.
pub const NORM_SLACK: f64 = 1e-9;

impl QuantumState {
    /// Bare basis state `|index + 1⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::invalid("dimension", format!("{dim} (expected 2 or 3)")));
        }
        if index >= dim {
            return Err(Error::invalid("basis index", format!("{index} for a {dim}-level system")));
        }
        let mut v = StateVector::zeros(dim);
        v.as_mut_slice()[index] = C64::new(1.0, 0.0);
        Ok(Self(v))
    }

    pub fn from_amplitudes(amps: &[C64]) -> Result<Self> {
        if !(2..=3).contains(&amps.len()) {
            return Err(Error::invalid("dimension", format!("{} (expected 2 or 3)", amps.len())));
        }
        Self::from_vector(StateVector::from_slice(amps))
    }

    pub(crate) fn from_vector(v: StateVector) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::invalid("state", "non-finite amplitude"));
        }
        let n = v.norm_sqr();
        if n > 1.0 + NORM_SLACK {
            return Err(Error::invalid("state", format!("squared norm {n} exceeds 1")));
        }
        Ok(Self(v))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.norm_sqr()
    }

    pub fn population(&self, index: usize) -> f64 {
        self.0.as_slice()[index].norm_sqr()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.0.as_slice().iter().map(|a| a.norm_sqr()).collect()
    }

    /// Multiply by `e^{iφ}`.
    pub fn with_global_phase(&self, phi: f64) -> Self {
        Self(self.0.scale(C64::from_polar(1.0, phi)))
    }

    pub fn as_vector(&self) -> &StateVector {
        &self.0
    }
}

impl fmt::Debug for QuantumState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuantumState{:?}", self.0)
    }
}

/// Driven two-level system: a single coupling Ω_M between |1⟩ and |2⟩.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelParams {
    omega_m: AngularFrequency,
}

impl TwoLevelParams {
    pub fn new(omega_m: AngularFrequency) -> Result<Self> {
        let omega_m = omega_m.checked("omega_m")?;
        if omega_m.rad_per_s() <= 0.0 {
            return Err(Error::invalid("omega_m", "must be positive"));
        }
        Ok(Self { omega_m })
    }

    pub fn omega_m(&self) -> AngularFrequency {
        self.omega_m
    }
}

/// Λ system: |1⟩ and |2⟩ coupled to the excited |3⟩ by pump and Stokes fields,
/// optionally to each other by a microwave field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaParams {
    pub omega_p0: AngularFrequency,
    pub omega_s0: AngularFrequency,
    pub omega_m: AngularFrequency,
    pub delta_one_photon: AngularFrequency,
    pub gamma: AngularFrequency,
}

impl LambdaParams {
    pub fn new(
        omega_p0: AngularFrequency,
        omega_s0: AngularFrequency,
        omega_m: AngularFrequency,
        delta_one_photon: AngularFrequency,
        gamma: AngularFrequency,
    ) -> Result<Self> {
        for (name, v) in [
            ("omega_p0", omega_p0),
            ("omega_s0", omega_s0),
            ("omega_m", omega_m),
            ("delta_one_photon", delta_one_photon),
            ("gamma", gamma),
        ] {
            v.checked(name)?;
        }
        for (name, v) in [("omega_p0", omega_p0), ("omega_s0", omega_s0), ("omega_m", omega_m), ("gamma", gamma)] {
            if v.rad_per_s() < 0.0 {
                return Err(Error::invalid(name, "must be non-negative"));
            }
        }
        Ok(Self { omega_p0, omega_s0, omega_m, delta_one_photon, gamma })
    }

    pub fn with_gamma(self, gamma: AngularFrequency) -> Self {
        Self { gamma, ..self }
    }

    /// `Δ ≫ δ_m ≫ Ω_gap`, each "≫" read as a factor of at least 100.
    pub fn is_far_detuned(&self, delta_m: AngularFrequency) -> bool {
        let big = self.delta_one_photon.rad_per_s();
        let dm = delta_m.rad_per_s();
        big >= 100.0 * dm && dm >= 100.0 * three_level_gap(self).rad_per_s()
    }
}

/// `½[[δ, Ω], [Ω, −δ]]`
pub fn lz_hamiltonian(delta: AngularFrequency, omega: AngularFrequency) -> Result<ComplexMatrix> {
    let d = finite("delta", delta.rad_per_s())?;
    let o = finite("omega", omega.rad_per_s())?;
    if o <= 0.0 {
        return Err(Error::invalid("omega", "must be positive"));
    }
    Ok(ComplexMatrix::from_real_rows(&[[0.5 * d, 0.5 * o], [0.5 * o, -0.5 * d]]))
}

/// `½[[2δ, Ω_M], [Ω_M, 0]]`; the simulation form of the two-level problem.
pub fn two_level_hamiltonian(delta: AngularFrequency, params: &TwoLevelParams) -> ComplexMatrix {
    two_level_matrix(delta.rad_per_s(), params.omega_m.rad_per_s())
}

#[inline]
fn two_level_matrix(delta: f64, omega_m: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[[delta, 0.5 * omega_m], [0.5 * omega_m, 0.0]])
}

/// `½[[2δ, Ω_M, Ω_p], [Ω_M, 0, Ω_S], [Ω_p, Ω_S, 2Δ − 2iγ]]`
pub fn lambda_hamiltonian(
    delta: AngularFrequency,
    omega_p: AngularFrequency,
    omega_s: AngularFrequency,
    params: &LambdaParams,
) -> ComplexMatrix {
    lambda_matrix(
        delta.rad_per_s(),
        params.omega_m.rad_per_s(),
        omega_p.rad_per_s(),
        omega_s.rad_per_s(),
        params.delta_one_photon.rad_per_s(),
        params.gamma.rad_per_s(),
    )
}

#[inline]
fn lambda_matrix(delta: f64, omega_m: f64, omega_p: f64, omega_s: f64, big_delta: f64, gamma: f64) -> ComplexMatrix {
    let r = |x: f64| C64::new(x, 0.0);
    ComplexMatrix::from_rows(&[
        [r(delta), r(0.5 * omega_m), r(0.5 * omega_p)],
        [r(0.5 * omega_m), r(0.0), r(0.5 * omega_s)],
        [r(0.5 * omega_p), r(0.5 * omega_s), C64::new(big_delta, -gamma)],
    ])
}

/// Instantaneous eigensystem of [`lz_hamiltonian`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigensystem2 {
    pub e_plus: AngularFrequency,
    pub e_minus: AngularFrequency,
    /// Mixing angle in [0, π]; `cos θ = −δ/√(δ² + Ω²)`.
    pub theta: f64,
    pub phi_plus: [f64; 2],
    pub phi_minus: [f64; 2],
}

pub fn lz_eigensystem(delta: AngularFrequency, omega: AngularFrequency) -> Result<Eigensystem2> {
    let d = finite("delta", delta.rad_per_s())?;
    let o = finite("omega", omega.rad_per_s())?;
    if o < 0.0 {
        return Err(Error::invalid("omega", "must be non-negative"));
    }
    if d == 0.0 && o == 0.0 {
        return Err(Error::Degenerate);
    }
    let r = d.hypot(o);
    // atan2 keeps full precision near θ = 0 and θ = π where arccos does not.
    let theta = o.atan2(-d);
    let (s, c) = (0.5 * theta).sin_cos();
    Ok(Eigensystem2 {
        e_plus: AngularFrequency(0.5 * r),
        e_minus: AngularFrequency(-0.5 * r),
        theta,
        phi_plus: [s, c],
        phi_minus: [c, -s],
    })
}

/// Gap of the two lowest dressed levels of the Λ system at δ = 0, `√(Δ² + Ω₀²) − Δ`.
///
/// With unequal pump and Stokes amplitudes Ω₀ is their geometric mean.
pub fn three_level_gap(params: &LambdaParams) -> AngularFrequency {
    let big = params.delta_one_photon.rad_per_s();
    let o0_sq = params.omega_p0.rad_per_s() * params.omega_s0.rad_per_s();
    let root = (big * big + o0_sq).sqrt();
    // Rationalized to avoid cancellation when Δ ≫ Ω₀.
    let gap = if big > 0.0 { o0_sq / (root + big) } else { root - big };
    AngularFrequency(gap)
}

/// Operating gap Ω that enters the sweep schedules.
pub fn operating_gap(system: &System) -> AngularFrequency {
    match system {
        System::TwoLevel(p) => p.omega_m,
        System::Lambda(p) | System::Eliminated(p) => three_level_gap(p),
    }
}

/// Systematic error on the coupling amplitudes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CouplingError {
    /// Every coupling multiplied by the factor.
    Scale(f64),
    /// Every active coupling amplitude shifted by the offset; pulsed couplings
    /// have their peak shifted.
    Offset(AngularFrequency),
}

impl Default for CouplingError {
    fn default() -> Self {
        CouplingError::Scale(1.0)
    }
}

impl CouplingError {
    #[inline]
    fn apply_static(self, omega: f64) -> f64 {
        match self {
            CouplingError::Scale(k) => k * omega,
            CouplingError::Offset(_) if omega == 0.0 => 0.0,
            CouplingError::Offset(o) => omega + o.rad_per_s(),
        }
    }

    #[inline]
    fn apply_pulsed(self, omega: f64, peak: f64) -> f64 {
        match self {
            CouplingError::Scale(k) => k * omega,
            CouplingError::Offset(_) if peak == 0.0 => omega,
            CouplingError::Offset(o) => omega * (peak + o.rad_per_s()) / peak,
        }
    }
}

/// Which Hamiltonian family is simulated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum System {
    TwoLevel(TwoLevelParams),
    Lambda(LambdaParams),
    /// Two-level reduction of a far-detuned Λ system (excited state eliminated).
    Eliminated(LambdaParams),
}

/// Pump and Stokes values supplied by a pulsed schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulsePair {
    pub omega_p: AngularFrequency,
    pub omega_s: AngularFrequency,
    pub peak: AngularFrequency,
}

/// Schedule values at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Controls {
    pub delta: AngularFrequency,
    /// `None` means the couplings are the model's static amplitudes.
    pub pulses: Option<PulsePair>,
}

/// Static system description plus the rule that turns [`Controls`] into H(t).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianModel {
    pub system: System,
    pub coupling_error: CouplingError,
}

impl HamiltonianModel {
    pub fn two_level(params: TwoLevelParams) -> Self {
        Self { system: System::TwoLevel(params), coupling_error: CouplingError::default() }
    }

    pub fn lambda(params: LambdaParams) -> Self {
        Self { system: System::Lambda(params), coupling_error: CouplingError::default() }
    }

    pub fn eliminated(params: LambdaParams) -> Self {
        Self { system: System::Eliminated(params), coupling_error: CouplingError::default() }
    }

    pub fn with_coupling_error(self, coupling_error: CouplingError) -> Self {
        Self { coupling_error, ..self }
    }

    pub fn dim(&self) -> usize {
        match self.system {
            System::TwoLevel(_) | System::Eliminated(_) => 2,
            System::Lambda(_) => 3,
        }
    }

    /// Whether the model has a place for pulsed pump/Stokes fields.
    pub fn has_raman_fields(&self) -> bool {
        !matches!(self.system, System::TwoLevel(_))
    }

    /// Coupling amplitudes `(Ω_M, Ω_p, Ω_S)` after the systematic error, in rad/s.
    #[inline]
    fn couplings(&self, controls: &Controls) -> (f64, f64, f64) {
        let err = self.coupling_error;
        match self.system {
            System::TwoLevel(p) => (err.apply_static(p.omega_m.rad_per_s()), 0.0, 0.0),
            System::Lambda(p) | System::Eliminated(p) => {
                let (op, os) = match controls.pulses {
                    Some(pp) => {
                        let peak = pp.peak.rad_per_s();
                        (
                            err.apply_pulsed(pp.omega_p.rad_per_s(), peak),
                            err.apply_pulsed(pp.omega_s.rad_per_s(), peak),
                        )
                    }
                    None => (err.apply_static(p.omega_p0.rad_per_s()), err.apply_static(p.omega_s0.rad_per_s())),
                };
                (err.apply_static(p.omega_m.rad_per_s()), op, os)
            }
        }
    }

    #[inline]
    pub fn hamiltonian(&self, controls: &Controls) -> ComplexMatrix {
        let delta = controls.delta.rad_per_s();
        let (om, op, os) = self.couplings(controls);
        match self.system {
            System::TwoLevel(_) => two_level_matrix(delta, om),
            System::Lambda(p) => {
                lambda_matrix(delta, om, op, os, p.delta_one_photon.rad_per_s(), p.gamma.rad_per_s())
            }
            System::Eliminated(p) => {
                let eff = analysis::eliminate_unchecked(&p, op, os);
                let d_eff = delta + eff.stark_shift_1.rad_per_s() - eff.stark_shift_2.rad_per_s();
                let coupling = om - eff.omega_eff.rad_per_s();
                let mut h = two_level_matrix(d_eff, coupling);
                let decay = C64::new(0.0, -eff.gamma_eff.rad_per_s());
                for i in 0..2 {
                    h.set(i, i, h.get(i, i) + decay);
                }
                h
            }
        }
    }

    /// Largest coupling the model can see given a pulse peak, used for regime checks.
    pub(crate) fn max_raman_coupling(&self, pulse_peak: Option<AngularFrequency>) -> f64 {
        let dummy = Controls {
            delta: AngularFrequency::ZERO,
            pulses: pulse_peak.map(|peak| PulsePair { omega_p: peak, omega_s: peak, peak }),
        };
        let (_, op, os) = self.couplings(&dummy);
        op.abs().max(os.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};
    use proptest::prelude::*;

    fn hz(v: f64) -> AngularFrequency {
        AngularFrequency::from_hz(v)
    }

    fn eigvals_2x2_hermitian(h: &ComplexMatrix) -> (f64, f64) {
        let a = h.get(0, 0).re;
        let d = h.get(1, 1).re;
        let b = h.get(0, 1).norm();
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        (mean + r, mean - r)
    }

    #[test]
    fn two_pi_applied_once() {
        let w = hz(150e3);
        assert_eq!(w.rad_per_s(), TAU * 150e3);
        assert_relative_eq!(w.hz(), 150e3, max_relative = 1e-15);
    }

    #[test]
    fn lz_symmetric_crossing() {
        let o = hz(150e3);
        let h = lz_hamiltonian(AngularFrequency::ZERO, o).unwrap();
        assert_eq!(h.get(0, 0).re, 0.0);
        assert_eq!(h.get(0, 1).re, 0.5 * o.rad_per_s());
        let (hi, lo) = eigvals_2x2_hermitian(&h);
        assert_relative_eq!(hi, 0.5 * o.rad_per_s(), max_relative = 1e-14);
        assert_relative_eq!(lo, -0.5 * o.rad_per_s(), max_relative = 1e-14);
    }

    #[test]
    fn lz_eigenvalues_at_delta_equal_omega() {
        let o = hz(1e6);
        let h = lz_hamiltonian(o, o).unwrap();
        let (hi, _) = eigvals_2x2_hermitian(&h);
        assert_relative_eq!(hi, o.rad_per_s() / 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn lz_gap_far_from_crossing() {
        let dm = hz(10e6);
        let o = hz(150e3);
        let es = lz_eigensystem(-dm, o).unwrap();
        let gap = (es.e_plus - es.e_minus).hz();
        // √(10² + 0.15²) MHz
        assert_relative_eq!(gap, 1e6 * (100.0f64 + 0.0225).sqrt(), max_relative = 1e-12);
        assert!((gap / 1e6 - 10.001).abs() < 1e-3);
    }

    #[test]
    fn lz_rejects_bad_input() {
        assert!(matches!(
            lz_hamiltonian(AngularFrequency::from_rad_per_s(f64::NAN), hz(1.0)),
            Err(Error::NonFinite { .. })
        ));
        assert!(lz_hamiltonian(AngularFrequency::ZERO, AngularFrequency::ZERO).is_err());
        assert_eq!(lz_eigensystem(AngularFrequency::ZERO, AngularFrequency::ZERO), Err(Error::Degenerate));
    }

    #[test]
    fn two_level_form() {
        let p = TwoLevelParams::new(hz(150e3)).unwrap();
        let h = two_level_hamiltonian(AngularFrequency::ZERO, &p);
        assert_eq!(h.get(0, 0).re, 0.0);
        assert_eq!(h.get(1, 0).re, 0.5 * p.omega_m().rad_per_s());
        let dm = hz(10e6);
        let h = two_level_hamiltonian(dm, &p);
        assert_eq!(h.trace().re, dm.rad_per_s());
        assert!(TwoLevelParams::new(AngularFrequency::ZERO).is_err());
    }

    fn fig1_lambda(gamma_hz: f64) -> LambdaParams {
        LambdaParams::new(hz(5e6), hz(5e6), AngularFrequency::ZERO, hz(10e9), hz(gamma_hz)).unwrap()
    }

    #[test]
    fn lambda_block_structure() {
        let mut p = fig1_lambda(0.0);
        p.omega_m = hz(150e3);
        let d = hz(1e6);
        let h = lambda_hamiltonian(d, AngularFrequency::ZERO, AngularFrequency::ZERO, &p);
        let h2 = two_level_hamiltonian(d, &TwoLevelParams::new(p.omega_m).unwrap());
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(h.get(i, j), h2.get(i, j));
            }
            assert_eq!(h.get(i, 2), C64::new(0.0, 0.0));
            assert_eq!(h.get(2, i), C64::new(0.0, 0.0));
        }
        assert_eq!(h.get(2, 2).re, p.delta_one_photon.rad_per_s());
    }

    #[test]
    fn lambda_hermitian_without_decay() {
        let p = fig1_lambda(0.0);
        let h = lambda_hamiltonian(hz(3e6), hz(5e6), hz(4e6), &p);
        assert!(h.hermiticity_defect() < 1e-12);
        assert_eq!(h.get(0, 2).re, 0.5 * hz(5e6).rad_per_s());
        assert_eq!(h.get(1, 2).re, 0.5 * hz(4e6).rad_per_s());
    }

    #[test]
    fn lambda_decay_element() {
        let p = fig1_lambda(5.6e6);
        let h = lambda_hamiltonian(AngularFrequency::ZERO, hz(5e6), hz(5e6), &p);
        assert_eq!(h.get(2, 2), C64::new(TAU * 10e9, -TAU * 5.6e6));
        let anti = (h - h.adjoint()).scale(C64::new(0.5, 0.0));
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == 2 && j == 2 { C64::new(0.0, -TAU * 5.6e6) } else { C64::new(0.0, 0.0) };
                assert_eq!(anti.get(i, j), expect, "({i},{j})");
            }
        }
    }

    #[test]
    fn eigensystem_limits() {
        let o = hz(150e3);
        let es = lz_eigensystem(AngularFrequency::ZERO, o).unwrap();
        assert_relative_eq!(es.theta, FRAC_PI_2, max_relative = 1e-15);
        assert_relative_eq!(es.phi_plus[0], 0.5f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(es.phi_plus[1], 0.5f64.sqrt(), max_relative = 1e-15);

        let dm = hz(10e6);
        let start = lz_eigensystem(-dm, o).unwrap();
        assert!(start.theta < 0.02);
        assert!((start.phi_minus[0] - 1.0).abs() < 1e-4 && start.phi_minus[1].abs() < 0.01);

        let end = lz_eigensystem(dm, o).unwrap();
        assert!(PI - end.theta < 0.02);
        assert!(end.phi_minus[0].abs() < 0.01 && (end.phi_minus[1] + 1.0).abs() < 1e-4);
    }

    #[test]
    fn three_level_gap_values() {
        let p = fig1_lambda(0.0);
        let gap = three_level_gap(&p);
        // Ω₀²/(2Δ) = 2π×1.25 kHz to leading order.
        assert_relative_eq!(gap.hz(), 1250.0, max_relative = 1e-6);
        let exact = (hz(10e9).rad_per_s().powi(2) + hz(5e6).rad_per_s().powi(2)).sqrt() - hz(10e9).rad_per_s();
        assert_relative_eq!(gap.rad_per_s(), exact, max_relative = 1e-6);

        let mut zero_delta = p;
        zero_delta.delta_one_photon = AngularFrequency::ZERO;
        assert_relative_eq!(three_level_gap(&zero_delta).rad_per_s(), hz(5e6).rad_per_s(), max_relative = 1e-15);

        let mut dark = p;
        dark.omega_p0 = AngularFrequency::ZERO;
        dark.omega_s0 = AngularFrequency::ZERO;
        assert_eq!(three_level_gap(&dark).rad_per_s(), 0.0);
    }

    #[test]
    fn fig1_regime_flag() {
        let p = fig1_lambda(0.0);
        assert!(p.is_far_detuned(hz(10e6)));
        assert!(!p.is_far_detuned(hz(1e9)));
    }

    #[test]
    fn coupling_error_rules() {
        let p = TwoLevelParams::new(hz(100e3)).unwrap();
        let c = Controls { delta: AngularFrequency::ZERO, pulses: None };
        let scaled = HamiltonianModel::two_level(p).with_coupling_error(CouplingError::Scale(1.1));
        assert_relative_eq!(scaled.hamiltonian(&c).get(0, 1).re, 0.55 * hz(100e3).rad_per_s(), max_relative = 1e-15);
        let shifted = HamiltonianModel::two_level(p).with_coupling_error(CouplingError::Offset(hz(10e3)));
        assert_relative_eq!(shifted.hamiltonian(&c).get(0, 1).re, 0.5 * hz(110e3).rad_per_s(), max_relative = 1e-15);

        // An absent microwave coupling stays absent under an additive error.
        let lp = fig1_lambda(0.0);
        let m = HamiltonianModel::lambda(lp).with_coupling_error(CouplingError::Offset(hz(10e3)));
        assert_eq!(m.hamiltonian(&c).get(0, 1).re, 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn eigensystem_residual(d in -1e8f64..1e8, o in 1e2f64..1e8) {
            let delta = AngularFrequency::from_rad_per_s(d);
            let omega = AngularFrequency::from_rad_per_s(o);
            let h = lz_hamiltonian(delta, omega).unwrap();
            let es = lz_eigensystem(delta, omega).unwrap();
            let hn = h.norm_frobenius();
            for (e, phi) in [(es.e_plus, es.phi_plus), (es.e_minus, es.phi_minus)] {
                let v = StateVector::from_slice(&[C64::new(phi[0], 0.0), C64::new(phi[1], 0.0)]);
                let hv = h.apply(&v);
                let ev = v.scale(C64::new(e.rad_per_s(), 0.0));
                prop_assert!(hv.distance(&ev) < 1e-12 * hn);
            }
            let dot = es.phi_plus[0] * es.phi_minus[0] + es.phi_plus[1] * es.phi_minus[1];
            prop_assert!(dot.abs() < 1e-15);
            prop_assert!((es.theta.cos() + d / d.hypot(o)).abs() < 1e-12);
            prop_assert!((es.e_plus.rad_per_s() + es.e_minus.rad_per_s()).abs() == 0.0);
        }

        #[test]
        fn theta_monotone_in_delta(d in -1e7f64..1e7, step in 1.0f64..1e6, o in 1e3f64..1e7) {
            let omega = AngularFrequency::from_rad_per_s(o);
            let a = lz_eigensystem(AngularFrequency::from_rad_per_s(d), omega).unwrap();
            let b = lz_eigensystem(AngularFrequency::from_rad_per_s(d + step), omega).unwrap();
            prop_assert!(b.theta >= a.theta);
        }

        #[test]
        fn hermitian_without_decay(d in -1e8f64..1e8, op in 0f64..1e8, os in 0f64..1e8, om in 0f64..1e6) {
            let p = LambdaParams::new(
                AngularFrequency::from_rad_per_s(op),
                AngularFrequency::from_rad_per_s(os),
                AngularFrequency::from_rad_per_s(om),
                AngularFrequency::from_hz(10e9),
                AngularFrequency::ZERO,
            ).unwrap();
            let h = lambda_hamiltonian(AngularFrequency::from_rad_per_s(d), p.omega_p0, p.omega_s0, &p);
            prop_assert!(h.hermiticity_defect() < 1e-12);
        }
    }
}
