#![allow(dead_code)]

use quadsim_core::{AngularFrequency, LambdaParams, TwoLevelParams};

pub const OMEGA_M_HZ: f64 = 150e3;
pub const DELTA_M_HZ: f64 = 10e6;
pub const OMEGA0_HZ: f64 = 5e6;
pub const BIG_DELTA_HZ: f64 = 10e9;
pub const GAMMA_HZ: f64 = 5.6e6;

pub fn hz(v: f64) -> AngularFrequency {
    AngularFrequency::from_hz(v)
}

pub fn two_level() -> TwoLevelParams {
    TwoLevelParams::new(hz(OMEGA_M_HZ)).unwrap()
}

pub fn tau_pi() -> f64 {
    std::f64::consts::PI / hz(OMEGA_M_HZ).rad_per_s()
}

pub fn lambda(gamma_hz: f64) -> LambdaParams {
    LambdaParams::new(hz(OMEGA0_HZ), hz(OMEGA0_HZ), AngularFrequency::ZERO, hz(BIG_DELTA_HZ), hz(gamma_hz)).unwrap()
}
