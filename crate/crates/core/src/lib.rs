//! Adiabatic population transfer in two-level and far-detuned Λ systems.
//!
//! The crate builds the Hamiltonians, detuning schedules (SIQUAD, FAQUAD, linear,
//! resonant π pulse and STIRAP), integrates the Schrödinger equation and compares
//! protocols against systematic coupling and detuning errors.

pub mod analysis;
pub mod error;
pub mod expm;
pub mod matrix;
pub mod model;
pub mod propagator;
pub mod schedule;
pub mod sweep;

pub use analysis::{adiabatic_elimination, pi_time, t0_time, transfer_metrics, EffectiveTwoLevel, TransferMetrics};
pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, StateVector};
pub use model::{
    lambda_hamiltonian, lz_eigensystem, lz_hamiltonian, operating_gap, three_level_gap, two_level_hamiltonian,
    AngularFrequency, Controls, CouplingError, Eigensystem2, HamiltonianModel, LambdaParams, PulsePair, QuantumState,
    System, TwoLevelParams,
};
pub use propagator::{convergence_probe, evolve, evolve_backward, ConvergenceReport, EvolveRequest, EvolveResult, Method};
pub use schedule::{adiabaticity_report, rotating_frame_check, PulseSchedule, ScheduleKind, StirapShape};
pub use sweep::{
    compare_protocols, run_sweep, AmplitudeMode, Axis, AxisWindow, Comparison, Perturbation, Protocol, ProtocolBase,
    ProtocolRun, Scenario, SweepResult, SweepRow, SweepSpec,
};
