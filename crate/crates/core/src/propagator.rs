//! Time stepping of `i dψ/dt = H(t) ψ` for 2- and 3-level, possibly non-Hermitian H.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expm::{expm_hermitian, expm_isolated_level, expm_small, SCALED_NORM};
use crate::matrix::StateVector;
use crate::model::{HamiltonianModel, QuantumState};
use crate::schedule::PulseSchedule;

/// Norm growth tolerated before a run is declared failed.
pub const NORM_GROWTH_LIMIT: f64 = 1e-6;
pub const MIN_STEPS: usize = 10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Exact exponential of H sampled at each step midpoint.
    #[default]
    PiecewiseExpm,
    /// Classical fourth-order Runge-Kutta.
    Rk4,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolveRequest {
    pub model: HamiltonianModel,
    pub schedule: PulseSchedule,
    pub initial: QuantumState,
    pub steps: usize,
    pub method: Method,
    pub store_trajectory: bool,
    /// Keep every n-th step in the trajectory (the final step is always kept).
    pub trajectory_stride: usize,
}

impl EvolveRequest {
    pub fn new(model: HamiltonianModel, schedule: PulseSchedule, initial: QuantumState, steps: usize, method: Method) -> Self {
        Self { model, schedule, initial, steps, method, store_trajectory: false, trajectory_stride: 1 }
    }

    pub fn with_trajectory(self, stride: usize) -> Self {
        Self { store_trajectory: true, trajectory_stride: stride.max(1), ..self }
    }

    pub fn with_steps(&self, steps: usize) -> Self {
        Self { steps, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.model.dim() != self.initial.dim() {
            return Err(Error::DimensionMismatch { model: self.model.dim(), state: self.initial.dim() });
        }
        if self.steps < MIN_STEPS {
            return Err(Error::invalid("steps", format!("{} (need at least {MIN_STEPS})", self.steps)));
        }
        if let Some(shape) = self.schedule.stirap_shape() {
            if !self.model.has_raman_fields() {
                return Err(Error::invalid("schedule", "pulsed pump/Stokes schedule on a model without Raman fields"));
            }
            if let crate::model::System::Eliminated(p) = self.model.system {
                let peak = self.model.max_raman_coupling(Some(shape.peak));
                crate::analysis::check_elimination_regime(&p, peak)?;
            }
        } else if let crate::model::System::Eliminated(p) = self.model.system {
            crate::analysis::check_elimination_regime(&p, self.model.max_raman_coupling(None))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: QuantumState,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvolveResult {
    pub final_state: QuantumState,
    pub final_norm_sq: f64,
    pub populations: Vec<f64>,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

const MINUS_I: C64 = C64 { re: 0.0, im: -1.0 };

/// Integrate forward from t = 0 to t = T.
pub fn evolve(req: &EvolveRequest) -> Result<EvolveResult> {
    req.validate()?;
    let steps = req.steps;
    let duration = req.schedule.duration();
    let dt = duration / steps as f64;
    let time = |k: usize| if k == steps { duration } else { k as f64 * dt };

    let initial_norm = req.initial.norm_sq();
    let mut psi = *req.initial.as_vector();
    let mut trajectory = req.store_trajectory.then(|| {
        let mut v = Vec::with_capacity(steps / req.trajectory_stride + 2);
        v.push(TrajectoryPoint { t: 0.0, state: req.initial });
        v
    });

    for k in 0..steps {
        let (t0, t1) = (time(k), time(k + 1));
        psi = match req.method {
            Method::PiecewiseExpm => expm_step(req, &psi, t0, t1 - t0),
            Method::Rk4 => rk4_step(req, &psi, t0, t1 - t0),
        };
        check_state(&psi, initial_norm, k, t1)?;
        if let Some(traj) = trajectory.as_mut() {
            if (k + 1) % req.trajectory_stride == 0 || k + 1 == steps {
                traj.push(TrajectoryPoint { t: t1, state: QuantumState::from_vector(psi)? });
            }
        }
    }
    finish(psi, trajectory)
}

/// Undo a forward run: step from T back to 0 with the inverse of each
/// forward step map, starting from `state`.
pub fn evolve_backward(req: &EvolveRequest, state: &QuantumState) -> Result<QuantumState> {
    req.validate()?;
    if state.dim() != req.model.dim() {
        return Err(Error::DimensionMismatch { model: req.model.dim(), state: state.dim() });
    }
    let steps = req.steps;
    let duration = req.schedule.duration();
    let dt = duration / steps as f64;
    let time = |k: usize| if k == steps { duration } else { k as f64 * dt };
    let mut psi = *state.as_vector();
    for k in (0..steps).rev() {
        let (t0, t1) = (time(k), time(k + 1));
        psi = match req.method {
            Method::PiecewiseExpm => expm_step(req, &psi, t1, t0 - t1),
            Method::Rk4 => rk4_step(req, &psi, t1, t0 - t1),
        };
        if !psi.is_finite() {
            return Err(Error::IntegrationFailure { step: k, t: t0, reason: "non-finite amplitude".into() });
        }
    }
    QuantumState::from_vector(psi)
}

fn finish(psi: StateVector, trajectory: Option<Vec<TrajectoryPoint>>) -> Result<EvolveResult> {
    let final_state = QuantumState::from_vector(psi)?;
    Ok(EvolveResult {
        final_norm_sq: final_state.norm_sq(),
        populations: final_state.populations(),
        final_state,
        trajectory,
    })
}

#[inline]
fn check_state(psi: &StateVector, initial_norm: f64, step: usize, t: f64) -> Result<()> {
    if !psi.is_finite() {
        return Err(Error::IntegrationFailure { step, t, reason: "non-finite amplitude".into() });
    }
    let n = psi.norm_sqr();
    if n > initial_norm * (1.0 + NORM_GROWTH_LIMIT) {
        return Err(Error::IntegrationFailure {
            step,
            t,
            reason: format!("squared norm grew to {n:.12e} from {initial_norm:.12e}"),
        });
    }
    Ok(())
}

/// One step of signed length `h` starting at `t`, H sampled at `t + h/2`.
#[inline]
fn expm_step(req: &EvolveRequest, psi: &StateVector, t: f64, h: f64) -> StateVector {
    let hm = req.model.hamiltonian(&req.schedule.controls(t + 0.5 * h));
    let a = hm.scale(C64::new(0.0, -h));
    // Large steps avoid repeated squaring, whose rounding error grows with the
    // phase per step and shows up as norm drift.
    let u = if a.norm_one() <= SCALED_NORM {
        expm_small(&a)
    } else if hm.is_hermitian() {
        expm_hermitian(&hm, h)
    } else {
        expm_isolated_level(&hm, h).unwrap_or_else(|| expm_small(&a))
    };
    u.apply(psi)
}

#[inline]
fn rk4_step(req: &EvolveRequest, psi: &StateVector, t: f64, h: f64) -> StateVector {
    let deriv = |tt: f64, y: &StateVector| -> StateVector {
        req.model.hamiltonian(&req.schedule.controls(tt)).apply(y).scale(MINUS_I)
    };
    let c = |x: f64| C64::new(x, 0.0);
    let k1 = deriv(t, psi);
    let k2 = deriv(t + 0.5 * h, &psi.axpy(c(0.5 * h), &k1));
    let k3 = deriv(t + 0.5 * h, &psi.axpy(c(0.5 * h), &k2));
    let k4 = deriv(t + h, &psi.axpy(c(h), &k3));
    psi.axpy(c(h / 6.0), &k1)
        .axpy(c(h / 3.0), &k2)
        .axpy(c(h / 3.0), &k3)
        .axpy(c(h / 6.0), &k4)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub steps: usize,
    /// Euclidean distance of the final amplitudes from the finest run.
    pub error_vs_richest: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// `log2(|ψ_n − ψ_2n| / |ψ_2n − ψ_4n|)` for each consecutive triple of resolutions.
    pub richardson_orders: Vec<f64>,
    /// Finest Richardson estimate whose differences sit above round-off.
    pub observed_order: Option<f64>,
}

/// Differences below this are treated as round-off when estimating the order.
const ORDER_NOISE_FLOOR: f64 = 1e-12;

/// Run at `steps · 2^k` for `k = 0..refinements` and estimate the convergence order.
pub fn convergence_probe(req: &EvolveRequest, refinements: usize) -> Result<ConvergenceReport> {
    if refinements < 3 {
        return Err(Error::invalid("refinements", "need at least 3"));
    }
    let finals = (0..refinements)
        .map(|k| {
            let steps = req.steps << k;
            let mut r = req.with_steps(steps);
            r.store_trajectory = false;
            evolve(&r).map(|res| (steps, *res.final_state.as_vector()))
        })
        .collect::<Result<Vec<_>>>()?;
    let richest = finals.last().expect("refinements >= 3").1;
    let rows = finals
        .iter()
        .map(|(steps, v)| ConvergenceRow { steps: *steps, error_vs_richest: v.distance(&richest) })
        .collect();
    let diffs: Vec<f64> = finals.windows(2).map(|w| w[0].1.distance(&w[1].1)).collect();
    let richardson_orders: Vec<f64> = diffs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let observed_order = diffs
        .windows(2)
        .zip(&richardson_orders)
        .filter(|(w, _)| w[1] > ORDER_NOISE_FLOOR)
        .map(|(_, p)| *p)
        .next_back();
    Ok(ConvergenceReport { rows, richardson_orders, observed_order })
}
