//! Independent verification path for the reaching phase.
//!
//! The bijection `t = T_c (1 - e^{-alpha tau})` maps the finite horizon
//! `[0, T_c)` onto `tau in [0, inf)`. In the stretched clock the closed loop
//! becomes
//!
//! ```text
//! y' = (I + DG)(-kbar_inv(tau) beta_tilde y/||y|| - y) + f_bar,
//! beta_tilde' = kbar_inv(tau) ||y||,
//! kbar_inv(tau) = alpha T_c e^{-alpha tau},
//! f_bar(tau, y) = kbar_inv(tau) f(t(tau), y),
//! ```
//!
//! so the disturbance vanishes as `tau` grows and `y(tau)` must coincide with
//! `sigma(t(tau))` from the direct run. Simulating this system with its own
//! Euler step gives a second route to the same trajectory, and the candidate
//! function `V = ||y||^2 + b0 (beta_tilde - beta*)^2` must be nonincreasing
//! along it. Both checks are exercised against the direct integrator.

use std::io::{self, Write};

use thiserror::Error;

use crate::controllers::{ArpsParams, Controller, Mode};
use crate::integrator::{
    fmt_g17, simulate, SimConfig, SimError, SimOutcome, StateVector, Termination,
};
use crate::linalg::VecM;
use crate::plants::{DisturbanceParams, Plant};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimescaleError {
    #[error("t = {t} is outside the reaching horizon [0, {t_c})")]
    OutOfDomain { t: f64, t_c: f64 },
}

/// The time-scale bijection parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleMap {
    pub alpha: f64,
    pub t_c: f64,
}

impl ScaleMap {
    pub fn from_arps(p: &ArpsParams) -> Self {
        Self {
            alpha: p.alpha,
            t_c: p.t_c,
        }
    }

    /// `t = T_c (1 - e^{-alpha tau})`; strictly increasing, bounded by `T_c`.
    pub fn t_of_tau(&self, tau: f64) -> f64 {
        self.t_c * (1.0 - (-self.alpha * tau).exp())
    }

    /// Inverse map `tau = -ln(1 - t / T_c) / alpha` on `[0, T_c)`.
    pub fn tau_of_t(&self, t: f64) -> Result<f64, TimescaleError> {
        if !(0.0..self.t_c).contains(&t) {
            return Err(TimescaleError::OutOfDomain { t, t_c: self.t_c });
        }
        Ok(-(1.0 - t / self.t_c).ln() / self.alpha)
    }

    /// `kappa_bar(tau)^-1 = alpha T_c e^{-alpha tau}`, the clock-rate factor.
    pub fn kappa_bar_inv(&self, tau: f64) -> f64 {
        self.alpha * self.t_c * (-self.alpha * tau).exp()
    }
}

/// One recorded point of a scaled-clock trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledSample {
    pub tau: f64,
    /// Physical time `t(tau)`.
    pub t: f64,
    pub y: VecM,
    pub norm_y: f64,
    /// Adaptive term `beta_tilde(tau)`.
    pub beta_tilde: f64,
    /// Effective unit-vector gain `kbar_inv beta_tilde + ||y||`.
    pub lambda: f64,
    pub norm_f_bar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledSeries {
    pub dim: usize,
    pub samples: Vec<ScaledSample>,
}

impl ScaledSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Same CSV schema as the direct series with a `tau` column prepended.
    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        write!(w, "tau,t")?;
        for i in 1..=self.dim {
            write!(w, ",sigma_{i}")?;
        }
        writeln!(w, ",norm_sigma,Lambda,norm_nu,norm_f,mode")?;
        for s in &self.samples {
            write!(w, "{},{}", fmt_g17(s.tau), fmt_g17(s.t))?;
            for i in 0..self.dim {
                write!(w, ",{}", fmt_g17(s.y[i]))?;
            }
            writeln!(
                w,
                ",{},{},{},{},{}",
                fmt_g17(s.norm_y),
                fmt_g17(s.lambda),
                fmt_g17(s.lambda),
                fmt_g17(s.norm_f_bar),
                Mode::ReachingPhase.as_str()
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledOutcome {
    pub series: ScaledSeries,
    pub termination: Termination,
}

/// Integrate the scaled system with Euler steps `cfg.dt` in `tau` up to
/// `cfg.t_end` (interpreted as `tau_max`).
pub fn simulate_scaled(
    plant: &dyn Plant,
    dist: &DisturbanceParams,
    arps: &ArpsParams,
    y0: &VecM,
    cfg: &SimConfig,
) -> ScaledOutcome {
    let m = plant.dim();
    let map = ScaleMap::from_arps(arps);
    let n_steps = (cfg.t_end / cfg.dt).round() as usize;
    let mut samples = Vec::with_capacity(n_steps / cfg.record_stride.max(1) + 2);
    let mut y = y0.clone();
    let mut beta_tilde = arps.beta0;
    let mut termination = Termination::Completed;

    for k in 0..=n_steps {
        let tau = k as f64 * cfg.dt;
        if !y.is_finite() || !beta_tilde.is_finite() {
            termination = Termination::Fault(SimError::NonFiniteState { t: tau });
            break;
        }
        let t = map.t_of_tau(tau);
        let norm = y.norm2();
        let kbar_inv = map.kappa_bar_inv(tau);

        let g = plant.input_matrix(t, &y);
        let g_inv = match g.invert() {
            Ok(g_inv) => g_inv,
            Err(source) => {
                termination = Termination::Fault(SimError::SingularMatrix { t, source });
                break;
            }
        };
        let delta_g = g.matmul(&plant.input_uncertainty(t, &y)).matmul(&g_inv);

        let lambda = kbar_inv * beta_tilde + norm;
        let w = if norm < cfg.deadzone {
            VecM::zeros(m)
        } else {
            y.scaled(-lambda / norm)
        };
        let f_bar = plant.disturbance(t, &y, dist).scaled(kbar_inv);
        let mut derivative = w.add(&delta_g.matvec(&w));
        derivative.add_scaled_assign(1.0, &f_bar);

        if k % cfg.record_stride == 0 {
            samples.push(ScaledSample {
                tau,
                t,
                y: y.clone(),
                norm_y: norm,
                beta_tilde,
                lambda,
                norm_f_bar: f_bar.norm2(),
            });
        }
        if k == n_steps {
            break;
        }

        y.add_scaled_assign(cfg.dt, &derivative);
        beta_tilde += cfg.dt * kbar_inv * norm;
    }

    ScaledOutcome {
        series: ScaledSeries { dim: m, samples },
        termination,
    }
}

/// One point of the candidate-function trace `V = V1 + V2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovSample {
    pub tau: f64,
    pub v: f64,
    /// `||y||^2`
    pub v1: f64,
    /// `b0 (beta_tilde - beta*)^2`
    pub v2: f64,
}

/// Evaluate `V` along a scaled trajectory. `beta_star` and `b0` come from
/// empirical assumption estimates, so the trace is a consistency check
/// rather than a proof.
pub fn lyapunov_trace(series: &ScaledSeries, beta_star: f64, b0: f64) -> Vec<LyapunovSample> {
    series
        .samples
        .iter()
        .map(|s| {
            let v1 = s.norm_y * s.norm_y;
            let d = s.beta_tilde - beta_star;
            let v2 = b0 * d * d;
            LyapunovSample {
                tau: s.tau,
                v: v1 + v2,
                v1,
                v2,
            }
        })
        .collect()
}

/// Largest forward difference `V_{k+1} - V_k` of a trace; nonpositive up to
/// discretization error when the decrease condition holds.
pub fn max_forward_difference(trace: &[LyapunovSample]) -> f64 {
    trace
        .windows(2)
        .map(|w| w[1].v - w[0].v)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Deviation between the direct reaching-phase run and the scaled run,
/// measured on the scaled sample grid mapped back through `t(tau)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    /// `sup_tau || sigma(t(tau)) - y(tau) ||` over compared samples.
    pub sup_deviation: f64,
    pub compared_points: usize,
    /// Horizon used for the comparison, as a fraction of `T_c`.
    pub t_compare: f64,
    pub direct: SimOutcome,
    pub scaled: ScaledOutcome,
}

/// Fraction of the reaching horizon covered by the equivalence comparison.
pub const COMPARE_HORIZON_FRACTION: f64 = 0.999;

/// Run the direct reaching-phase simulation (step `dt_direct` in `t`) and
/// the scaled simulation (step `dt_tau` in `tau`) from the same initial
/// condition, then report the sup-norm deviation on the mapped grid. The
/// direct series is sampled every step and linearly interpolated at `t(tau)`.
pub fn compare_scaled_direct(
    plant: &dyn Plant,
    dist: &DisturbanceParams,
    arps: &ArpsParams,
    sigma0: &VecM,
    dt_direct: f64,
    dt_tau: f64,
) -> EquivalenceReport {
    let map = ScaleMap::from_arps(arps);
    let t_compare = COMPARE_HORIZON_FRACTION * arps.t_c;

    let direct_cfg = SimConfig::new(dt_direct, t_compare).with_stride(1);
    let direct = simulate(
        plant,
        dist,
        &Controller::Arps(*arps),
        &StateVector::at_origin_time(sigma0.clone()),
        &direct_cfg,
    );

    let tau_max = map
        .tau_of_t(t_compare)
        .expect("compare horizon lies inside [0, T_c)");
    let scaled_cfg = SimConfig::new(dt_tau, tau_max).with_stride(10);
    let scaled = simulate_scaled(plant, dist, arps, sigma0, &scaled_cfg);

    let mut sup = 0.0_f64;
    let mut compared = 0usize;
    let direct_samples = &direct.series.samples;
    if direct_samples.len() >= 2 {
        let last = direct_samples.len() - 1;
        for s in &scaled.series.samples {
            let x = (s.t / dt_direct).min(last as f64);
            let i = (x.floor() as usize).min(last - 1);
            let frac = x - i as f64;
            let interp = direct_samples[i]
                .sigma
                .scaled(1.0 - frac)
                .add(&direct_samples[i + 1].sigma.scaled(frac));
            sup = sup.max(interp.sub(&s.y).norm2());
            compared += 1;
        }
    }

    EquivalenceReport {
        sup_deviation: sup,
        compared_points: compared,
        t_compare,
        direct,
        scaled,
    }
}
