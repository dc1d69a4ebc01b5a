//! Fixed-step explicit Euler integration of the closed loop, with
//! reach-event detection and trajectory recording.
//!
//! The closed loop is `sigma_dot = G (I + dg) u + f` with the control vector
//! supplied by a [`Controller`]. Integration is deterministic: identical
//! inputs produce bit-identical series.

use std::io::{self, Write};

use thiserror::Error;

use crate::controllers::{
    arps_gain_rate, baseline_gain_rate, hybrid_gain, unit_vector_control, Controller,
    ControlError, GainError, GainState, Mode,
};
use crate::linalg::{LinalgError, VecM};
use crate::plants::{DisturbanceParams, Plant};

/// Format used for every numeric field in CSV output: 17 significant digits,
/// enough to round-trip an f64 exactly.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Fixed-step simulation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Euler step, seconds.
    pub dt: f64,
    /// Simulation horizon, seconds.
    pub t_end: f64,
    /// Store every k-th integration step.
    pub record_stride: usize,
    /// Norm threshold below which the discontinuous law selects `nu = 0`.
    pub deadzone: f64,
    /// Reach-detection threshold for controllers without a built-in switch
    /// (the hybrid law always uses its own `epsilon / 2`).
    pub reach_threshold: Option<f64>,
    /// Stop integrating at the first reach event.
    pub stop_at_reach: bool,
}

impl SimConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            record_stride: 100,
            deadzone: 1e-12,
            reach_threshold: None,
            stop_at_reach: false,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn with_reach_threshold(mut self, threshold: f64) -> Self {
        self.reach_threshold = Some(threshold);
        self
    }

    pub fn stopping_at_reach(mut self) -> Self {
        self.stop_at_reach = true;
        self
    }
}

/// Sliding variable plus simulation clock.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub sigma: VecM,
    pub t: f64,
}

impl StateVector {
    pub fn at_origin_time(sigma: VecM) -> Self {
        Self { sigma, t: 0.0 }
    }
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub sigma: VecM,
    pub norm_sigma: f64,
    pub lambda: f64,
    pub norm_nu: f64,
    pub norm_f: f64,
    pub mode: Mode,
}

/// Recorded trajectory, strictly increasing in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub dim: usize,
    pub samples: Vec<Sample>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// CSV with header `t,sigma_1..sigma_m,norm_sigma,Lambda,norm_nu,norm_f,mode`
    /// and 17-significant-digit floats. Byte output is deterministic.
    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        write!(w, "t")?;
        for i in 1..=self.dim {
            write!(w, ",sigma_{i}")?;
        }
        writeln!(w, ",norm_sigma,Lambda,norm_nu,norm_f,mode")?;
        for s in &self.samples {
            write!(w, "{}", fmt_g17(s.t))?;
            for i in 0..self.dim {
                write!(w, ",{}", fmt_g17(s.sigma[i]))?;
            }
            writeln!(
                w,
                ",{},{},{},{},{}",
                fmt_g17(s.norm_sigma),
                fmt_g17(s.lambda),
                fmt_g17(s.norm_nu),
                fmt_g17(s.norm_f),
                s.mode.as_str()
            )?;
        }
        Ok(())
    }
}

/// First crossing of the reach threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachEvent {
    pub t_bar: f64,
    pub norm_at_event: f64,
    pub steps_taken: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("reaching phase still active at t = {t} (horizon T_c = {t_c})")]
    TimeHorizonExceeded { t: f64, t_c: f64 },
    #[error("barrier breached at t = {t}: ||sigma|| = {norm} >= epsilon = {epsilon}")]
    BarrierBreached { t: f64, norm: f64, epsilon: f64 },
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("singular input matrix at t = {t}: {source}")]
    SingularMatrix { t: f64, source: LinalgError },
}

/// How a simulation ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    /// Ran to `t_end`.
    Completed,
    /// Stopped early at the reach event, as requested.
    StoppedAtReach,
    /// Aborted by a fault; the series holds everything recorded before it.
    Fault(SimError),
}

/// Result of a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub series: TimeSeries,
    pub reach: Option<ReachEvent>,
    pub termination: Termination,
}

impl SimOutcome {
    pub fn is_fault(&self) -> bool {
        matches!(self.termination, Termination::Fault(_))
    }

    pub fn t_bar(&self) -> Option<f64> {
        self.reach.map(|e| e.t_bar)
    }
}

/// Gain, control vector and state derivative at one time point, with the
/// post-switch gain state.
struct StepEval {
    gains: GainState,
    lambda: f64,
    nu: VecM,
    f: VecM,
    derivative: VecM,
}

fn eval_step(
    plant: &dyn Plant,
    dist: &DisturbanceParams,
    controller: &Controller,
    t: f64,
    sigma: &VecM,
    gains: GainState,
    cfg: &SimConfig,
) -> Result<StepEval, SimError> {
    let m = plant.dim();
    let norm = sigma.norm2();

    // Guard the reaching-phase horizon one step early so kappa cannot blow up
    // inside the update.
    if gains.mode == Mode::ReachingPhase {
        if let Some(t_c) = controller.horizon() {
            if t >= t_c - cfg.dt {
                return Err(SimError::TimeHorizonExceeded { t, t_c });
            }
        }
    }

    let (lambda, gains) = match controller {
        Controller::Baseline(_) => (gains.k_hat, gains),
        Controller::Arps(p) => {
            let lambda = map_gain_err(crate::controllers::arps_gain(t, norm, gains.beta_hat, p), t)?;
            (lambda, gains)
        }
        Controller::Hybrid { arps, barrier } => {
            map_gain_err(hybrid_gain(t, norm, gains, arps, barrier), t)?
        }
    };

    let g = plant.input_matrix(t, sigma);
    let (u, nu) = match controller {
        Controller::Baseline(_) => {
            if norm < cfg.deadzone {
                (VecM::zeros(m), VecM::zeros(m))
            } else {
                let nu = sigma.scaled(-lambda / norm);
                (nu.clone(), nu)
            }
        }
        _ => match unit_vector_control(sigma, lambda, &g, cfg.deadzone) {
            Ok(pair) => pair,
            Err(ControlError::DeadzoneHit { .. }) => (VecM::zeros(m), VecM::zeros(m)),
            Err(ControlError::Singular(source)) => {
                return Err(SimError::SingularMatrix { t, source })
            }
        },
    };

    let f = plant.disturbance(t, sigma, dist);
    let effective = u.add(&plant.input_uncertainty(t, sigma).matvec(&u));
    let mut derivative = g.matvec(&effective);
    derivative.add_scaled_assign(1.0, &f);

    Ok(StepEval {
        gains,
        lambda,
        nu,
        f,
        derivative,
    })
}

fn map_gain_err<T>(r: Result<T, GainError>, t: f64) -> Result<T, SimError> {
    r.map_err(|e| match e {
        GainError::TimeHorizonExceeded { t_c, .. } => SimError::TimeHorizonExceeded { t, t_c },
        GainError::BarrierBreached { norm, epsilon } => {
            SimError::BarrierBreached { t, norm, epsilon }
        }
    })
}

fn gain_rate(controller: &Controller, gains: &mut GainState, norm: f64, dt: f64) {
    match controller {
        Controller::Baseline(p) => gains.k_hat += dt * baseline_gain_rate(norm, p),
        Controller::Arps(_) => gains.beta_hat += dt * arps_gain_rate(norm),
        Controller::Hybrid { .. } => {
            if gains.mode == Mode::ReachingPhase {
                gains.beta_hat += dt * arps_gain_rate(norm);
            }
        }
    }
}

/// One explicit Euler step of the closed loop:
/// `sigma+ = sigma + dt (G (I + dg) u + f)`, adaptive gains advanced with the
/// current norm.
pub fn step(
    state: &StateVector,
    gains: GainState,
    plant: &dyn Plant,
    dist: &DisturbanceParams,
    controller: &Controller,
    cfg: &SimConfig,
) -> Result<(StateVector, GainState), SimError> {
    if !state.sigma.is_finite() || !gains.is_finite() {
        return Err(SimError::NonFiniteState { t: state.t });
    }
    let eval = eval_step(plant, dist, controller, state.t, &state.sigma, gains, cfg)?;
    let mut sigma = state.sigma.clone();
    sigma.add_scaled_assign(cfg.dt, &eval.derivative);
    let mut gains = eval.gains;
    gain_rate(controller, &mut gains, state.sigma.norm2(), cfg.dt);
    Ok((
        StateVector {
            sigma,
            t: state.t + cfg.dt,
        },
        gains,
    ))
}

/// Integrate the closed loop from `initial` until `t_end`, a reach-stop, or
/// a fault. Records every `record_stride`-th step; the reach event is
/// detected at every step regardless of stride.
pub fn simulate(
    plant: &dyn Plant,
    dist: &DisturbanceParams,
    controller: &Controller,
    initial: &StateVector,
    cfg: &SimConfig,
) -> SimOutcome {
    let m = plant.dim();
    let n_steps = (cfg.t_end / cfg.dt).round() as usize;
    let mut samples = Vec::with_capacity(n_steps / cfg.record_stride.max(1) + 2);
    let mut sigma = initial.sigma.clone();
    let mut gains = controller.initial_gains();
    let mut reach: Option<ReachEvent> = None;
    let mut termination = Termination::Completed;

    for k in 0..=n_steps {
        let t = initial.t + k as f64 * cfg.dt;
        if !sigma.is_finite() || !gains.is_finite() {
            termination = Termination::Fault(SimError::NonFiniteState { t });
            break;
        }
        let norm = sigma.norm2();

        let eval = match eval_step(plant, dist, controller, t, &sigma, gains, cfg) {
            Ok(eval) => eval,
            Err(e) => {
                termination = Termination::Fault(e);
                break;
            }
        };
        gains = eval.gains;

        // Reach detection: the hybrid law switches internally; other
        // controllers use the configured threshold.
        if reach.is_none() {
            let crossed = match controller {
                Controller::Hybrid { .. } => gains.t_bar.is_some(),
                _ => cfg.reach_threshold.is_some_and(|th| norm <= th),
            };
            if crossed {
                reach = Some(ReachEvent {
                    t_bar: t,
                    norm_at_event: norm,
                    steps_taken: k,
                });
            }
        }

        let recorded = k % cfg.record_stride == 0;
        if recorded {
            samples.push(Sample {
                t,
                sigma: sigma.clone(),
                norm_sigma: norm,
                lambda: eval.lambda,
                norm_nu: eval.nu.norm2(),
                norm_f: eval.f.norm2(),
                mode: gains.mode,
            });
        }

        if k == n_steps {
            break;
        }
        if cfg.stop_at_reach && reach.is_some() {
            if !recorded {
                samples.push(Sample {
                    t,
                    sigma: sigma.clone(),
                    norm_sigma: norm,
                    lambda: eval.lambda,
                    norm_nu: eval.nu.norm2(),
                    norm_f: eval.f.norm2(),
                    mode: gains.mode,
                });
            }
            termination = Termination::StoppedAtReach;
            break;
        }

        sigma.add_scaled_assign(cfg.dt, &eval.derivative);
        gain_rate(controller, &mut gains, norm, cfg.dt);
    }

    SimOutcome {
        series: TimeSeries {
            dim: m,
            samples,
        },
        reach,
        termination,
    }
}

/// First recorded sample time with `norm_sigma <= threshold`.
pub fn reach_time(series: &TimeSeries, threshold: f64) -> Option<f64> {
    series
        .samples
        .iter()
        .find(|s| s.norm_sigma <= threshold)
        .map(|s| s.t)
}

/// Convenience constructor for the symmetric initial condition family
/// `sigma_0 = (b / sqrt(2)) (10^n, -10^n)`, whose norm is `b * 10^n`.
pub fn symmetric_initial_condition(n: i32, b: f64) -> VecM {
    let scale = b * 10.0_f64.powi(n) / 2.0_f64.sqrt();
    VecM::from_slice(&[scale, -scale])
}
