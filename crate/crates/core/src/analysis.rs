//! Transfer fidelity, characteristic times, and the far-detuned two-level reduction.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AngularFrequency, LambdaParams, QuantumState};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferMetrics {
    /// Final population of the target bare state.
    pub fidelity: f64,
    pub error: f64,
    pub final_norm_sq: f64,
}

/// Population lost to decay counts against the fidelity; nothing is renormalized.
pub fn transfer_metrics(final_state: &QuantumState, target_index: usize) -> Result<TransferMetrics> {
    if target_index >= final_state.dim() {
        return Err(Error::invalid(
            "target index",
            format!("{target_index} for a {}-level state", final_state.dim()),
        ));
    }
    let fidelity = final_state.population(target_index);
    Ok(TransferMetrics { fidelity, error: 1.0 - fidelity, final_norm_sq: final_state.norm_sq() })
}

/// `τ_π = π / Ω_M`
pub fn pi_time(omega_m: AngularFrequency) -> Result<f64> {
    if !(omega_m.rad_per_s() > 0.0 && omega_m.is_finite()) {
        return Err(Error::invalid("omega_m", "must be positive and finite"));
    }
    Ok(PI / omega_m.rad_per_s())
}

/// `T₀ = 2πΔ / Ω²` with Ω the operating gap.
///
/// At Δ = 2π×10 GHz and Ω = 2π×1.25 kHz this evaluates to about 6.4×10³ s, nowhere
/// near the sub-millisecond durations used for the far-detuned Λ runs; those
/// durations are therefore configured in absolute seconds.
pub fn t0_time(delta_one_photon: AngularFrequency, omega_gap: AngularFrequency) -> Result<f64> {
    let d = delta_one_photon.rad_per_s();
    let o = omega_gap.rad_per_s();
    if !(d > 0.0 && o > 0.0 && d.is_finite() && o.is_finite()) {
        return Err(Error::invalid("t0 inputs", "Delta and Omega must be positive and finite"));
    }
    Ok(TAU * d / (o * o))
}

/// Effective |1⟩–|2⟩ system after eliminating |3⟩ from a far-detuned Λ system.
///
/// Light shifts are signed energy shifts of the bare levels (negative for Δ > 0);
/// the effective two-photon detuning is `δ + stark_shift_1 − stark_shift_2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveTwoLevel {
    /// `Ω_p Ω_S / (2Δ)`
    pub omega_eff: AngularFrequency,
    /// `−Ω_p² / (4Δ)`
    pub stark_shift_1: AngularFrequency,
    /// `−Ω_S² / (4Δ)`
    pub stark_shift_2: AngularFrequency,
    /// `γ (Ω_p² + Ω_S²) / (4Δ²)`, applied as a uniform amplitude decay rate.
    pub gamma_eff: AngularFrequency,
}

pub(crate) fn check_elimination_regime(params: &LambdaParams, max_coupling: f64) -> Result<()> {
    let delta = params.delta_one_photon.rad_per_s();
    if !(delta > 0.0 && delta >= 100.0 * max_coupling) {
        return Err(Error::EliminationRegime { delta, coupling: max_coupling });
    }
    Ok(())
}

pub fn adiabatic_elimination(
    params: &LambdaParams,
    omega_p: AngularFrequency,
    omega_s: AngularFrequency,
) -> Result<EffectiveTwoLevel> {
    let (op, os) = (omega_p.rad_per_s(), omega_s.rad_per_s());
    check_elimination_regime(params, op.abs().max(os.abs()))?;
    Ok(eliminate_unchecked(params, op, os))
}

#[inline]
pub(crate) fn eliminate_unchecked(params: &LambdaParams, op: f64, os: f64) -> EffectiveTwoLevel {
    let d = params.delta_one_photon.rad_per_s();
    let g = params.gamma.rad_per_s();
    let w = AngularFrequency::from_rad_per_s;
    EffectiveTwoLevel {
        omega_eff: w(op * os / (2.0 * d)),
        stark_shift_1: w(-op * op / (4.0 * d)),
        stark_shift_2: w(-os * os / (4.0 * d)),
        gamma_eff: w(g * (op * op + os * os) / (4.0 * d * d)),
    }
}
