//! Concrete uncertain plants and empirical checks of the standing
//! assumptions (full-rank input matrix, bounded uncertainty, bounded
//! disturbance).
//!
//! Both shipped plants are two-dimensional and share one matched-disturbance
//! family. They are realizations of
//! `sigma_dot = G(t, sigma) [I + dg(t, sigma)] u + f(t, sigma)`:
//!
//! * [`UncertainInputPlant`]: the input matrix itself is time-varying and
//!   unknown to the controller (`G := H`, `dg := 0`); controllers drive it
//!   without model inversion.
//! * [`FactoredPlant`]: a known constant input matrix with multiplicative
//!   input uncertainty.

use thiserror::Error;

use crate::linalg::{MatM, VecM};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("schedule must start at t = 0 (got {0})")]
    FirstBreakpointNonzero(f64),
    #[error("schedule breakpoints must be strictly increasing")]
    NonIncreasingBreakpoints,
    #[error("schedule values must be finite and nonnegative")]
    InvalidValue,
    #[error("schedule must have at least one segment")]
    Empty,
}

/// Piecewise-constant disturbance-scale schedule on left-closed intervals
/// `[t_k, t_{k+1})`; the last segment extends to infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoSchedule {
    segments: Vec<(f64, f64)>, // (start time, value)
}

impl RhoSchedule {
    pub fn new(segments: Vec<(f64, f64)>) -> Result<Self, ScheduleError> {
        if segments.is_empty() {
            return Err(ScheduleError::Empty);
        }
        if segments[0].0 != 0.0 {
            return Err(ScheduleError::FirstBreakpointNonzero(segments[0].0));
        }
        for w in segments.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(ScheduleError::NonIncreasingBreakpoints);
            }
        }
        if segments.iter().any(|&(t, v)| !t.is_finite() || !v.is_finite() || v < 0.0) {
            return Err(ScheduleError::InvalidValue);
        }
        Ok(Self { segments })
    }

    /// Value at time `t`; right-continuous at breakpoints.
    pub fn value_at(&self, t: f64) -> f64 {
        let mut v = self.segments[0].1;
        for &(start, value) in &self.segments {
            if t >= start {
                v = value;
            } else {
                break;
            }
        }
        v
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }
}

/// Parameters of the matched-disturbance family
/// `f(t, sigma) = rho * (a1 + 0.4 sin(w1 t) + 0.01 cos(20 t + sigma_2),
///                b1 + 0.2 sin(w2 t) + 0.02 cos(15 t + sigma_2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceParams {
    pub rho: f64,
    pub a1: f64,
    pub b1: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub rho_schedule: Option<RhoSchedule>,
    /// Re-derive `a1`/`b1` per schedule segment so that the products
    /// `rho * a1` and `rho * b1` keep their base values. This models
    /// scenarios whose constant bias is fixed while `rho` scales only the
    /// oscillatory part.
    pub rescale_bias: bool,
}

impl DisturbanceParams {
    pub fn constant(rho: f64, a1: f64, b1: f64, omega1: f64, omega2: f64) -> Self {
        Self {
            rho,
            a1,
            b1,
            omega1,
            omega2,
            rho_schedule: None,
            rescale_bias: false,
        }
    }

    /// Effective `(rho, a1, b1)` at time `t`, resolving the schedule and the
    /// per-segment bias rescaling.
    pub fn effective(&self, t: f64) -> (f64, f64, f64) {
        let rho_t = match &self.rho_schedule {
            Some(s) => s.value_at(t),
            None => self.rho,
        };
        if self.rescale_bias && rho_t != self.rho && rho_t > 0.0 {
            let scale = self.rho / rho_t;
            (rho_t, self.a1 * scale, self.b1 * scale)
        } else {
            (rho_t, self.a1, self.b1)
        }
    }
}

/// Matched disturbance shared by both plants (m = 2).
pub fn matched_disturbance(t: f64, sigma: &VecM, p: &DisturbanceParams) -> VecM {
    debug_assert_eq!(sigma.dim(), 2);
    let (rho, a1, b1) = p.effective(t);
    let s2 = sigma[1];
    VecM::from_slice(&[
        rho * (a1 + 0.4 * (p.omega1 * t).sin() + 0.01 * (20.0 * t + s2).cos()),
        rho * (b1 + 0.2 * (p.omega2 * t).sin() + 0.02 * (15.0 * t + s2).cos()),
    ])
}

/// Time-varying triangular input matrix of [`UncertainInputPlant`] (m = 2).
pub fn uncertain_input_matrix(t: f64, sigma: &VecM) -> MatM {
    debug_assert_eq!(sigma.dim(), 2);
    let c1 = sigma[0].cos();
    let s5 = (5.0 * t + sigma[1]).sin();
    MatM::from_row_major(
        2,
        &[
            1.0 + 0.5 * c1,
            (13.0 / 30.0) * c1 - (1.0 / 30.0) * s5,
            0.0,
            1.0 + 0.2 * c1 + 0.1 * s5,
        ],
    )
}

/// Constant input matrix of [`FactoredPlant`].
pub fn factored_input_matrix() -> MatM {
    MatM::from_row_major(2, &[2.0, -3.0, 0.0, 3.0])
}

/// Multiplicative input uncertainty of [`FactoredPlant`] (m = 2).
pub fn factored_uncertainty(t: f64, sigma: &VecM) -> MatM {
    debug_assert_eq!(sigma.dim(), 2);
    let c1 = sigma[0].cos();
    let w = 0.2 * c1 + 0.1 * (5.0 * t + sigma[1]).sin();
    MatM::from_row_major(2, &[0.5 * c1, w, 0.0, w])
}

/// Evaluation interface of an uncertain plant
/// `sigma_dot = G(t, sigma) [I + dg(t, sigma)] u + f(t, sigma)`.
pub trait Plant: Sync {
    fn dim(&self) -> usize;
    /// Input matrix `G(t, sigma)`.
    fn input_matrix(&self, t: f64, sigma: &VecM) -> MatM;
    /// Multiplicative input uncertainty `dg(t, sigma)`.
    fn input_uncertainty(&self, t: f64, sigma: &VecM) -> MatM;
    /// Matched disturbance `f(t, sigma)`.
    fn disturbance(&self, t: f64, sigma: &VecM, p: &DisturbanceParams) -> VecM;
}

/// Plant whose full input matrix is uncertain; controllers apply their
/// control vector directly, without inverting a model.
#[derive(Debug, Clone, Copy, Default)]
pub struct UncertainInputPlant;

impl Plant for UncertainInputPlant {
    fn dim(&self) -> usize {
        2
    }

    fn input_matrix(&self, t: f64, sigma: &VecM) -> MatM {
        uncertain_input_matrix(t, sigma)
    }

    fn input_uncertainty(&self, _t: f64, _sigma: &VecM) -> MatM {
        MatM::zeros(2)
    }

    fn disturbance(&self, t: f64, sigma: &VecM, p: &DisturbanceParams) -> VecM {
        matched_disturbance(t, sigma, p)
    }
}

/// Plant with a known constant input matrix and multiplicative uncertainty.
#[derive(Debug, Clone, Copy, Default)]
pub struct FactoredPlant;

impl Plant for FactoredPlant {
    fn dim(&self) -> usize {
        2
    }

    fn input_matrix(&self, _t: f64, _sigma: &VecM) -> MatM {
        factored_input_matrix()
    }

    fn input_uncertainty(&self, t: f64, sigma: &VecM) -> MatM {
        factored_uncertainty(t, sigma)
    }

    fn disturbance(&self, t: f64, sigma: &VecM, p: &DisturbanceParams) -> VecM {
        matched_disturbance(t, sigma, p)
    }
}

/// Worst cases of the standing assumptions over a sampling grid. The report
/// claims nothing beyond the grid it was evaluated on.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    /// `G` was invertible at every grid point.
    pub rank_ok: bool,
    /// Empirical max of the induced infinity norm of `G dg G^-1` (must be < 1).
    pub q_est: f64,
    /// Empirical min over the grid of the smallest eigenvalue of the
    /// symmetric part of `G dg G^-1` (must be > -1).
    pub q1_est: f64,
    /// Empirical max of `||f||`.
    pub d_est: f64,
    /// Number of grid points evaluated.
    pub grid_size: usize,
}

impl AssumptionReport {
    /// `b0 = 1 + q1`, the worst-case effective control-direction coefficient.
    pub fn b0_est(&self) -> f64 {
        1.0 + self.q1_est
    }

    /// `beta* = d / b0`, the gain level that dominates the disturbance.
    pub fn beta_star_est(&self) -> f64 {
        self.d_est / self.b0_est()
    }

    pub fn holds(&self) -> bool {
        self.rank_ok && self.q_est < 1.0 && self.q1_est > -1.0
    }
}

/// Evaluate the standing assumptions on the cartesian grid
/// `t_grid x sigma_axis^m`. Points where `G` is numerically singular set
/// `rank_ok = false` and are skipped in the uncertainty statistics.
pub fn check_assumptions(
    plant: &dyn Plant,
    p: &DisturbanceParams,
    t_grid: &[f64],
    sigma_axis: &[f64],
) -> AssumptionReport {
    let m = plant.dim();
    let mut rank_ok = true;
    let mut q_est = 0.0_f64;
    let mut q1_est = f64::INFINITY;
    let mut d_est = 0.0_f64;
    let mut grid_size = 0usize;

    let mut idx = vec![0usize; m];
    let mut sigma = VecM::zeros(m);
    loop {
        for (k, &i) in idx.iter().enumerate() {
            sigma[k] = sigma_axis[i];
        }
        for &t in t_grid {
            grid_size += 1;
            d_est = d_est.max(plant.disturbance(t, &sigma, p).norm2());
            let g = plant.input_matrix(t, &sigma);
            match g.invert() {
                Ok(g_inv) => {
                    let dg = plant.input_uncertainty(t, &sigma);
                    let delta_g = g.matmul(&dg).matmul(&g_inv);
                    q_est = q_est.max(delta_g.inf_norm());
                    q1_est = q1_est.min(delta_g.min_eig_sym_part());
                }
                Err(_) => rank_ok = false,
            }
        }
        // Advance the mixed-radix sigma index.
        let mut k = 0;
        loop {
            if k == m {
                return AssumptionReport {
                    rank_ok,
                    q_est,
                    q1_est: if q1_est.is_finite() { q1_est } else { 0.0 },
                    d_est,
                    grid_size,
                };
            }
            idx[k] += 1;
            if idx[k] < sigma_axis.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Evenly spaced grid of `n` points covering `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} != {b} (tol {tol})");
    }

    fn base_params(rho: f64) -> DisturbanceParams {
        DisturbanceParams::constant(rho, 1.0, 1.2, 3.0, 2.0)
    }

    #[test]
    fn disturbance_known_values() {
        let z = VecM::zeros(2);
        let f = matched_disturbance(0.0, &z, &base_params(1.0));
        assert_close(f[0], 1.01, 1e-15);
        assert_close(f[1], 1.22, 1e-15);

        let f0 = matched_disturbance(0.37, &VecM::from_slice(&[1.0, -2.0]), &base_params(0.0));
        assert_eq!(f0[0], 0.0);
        assert_eq!(f0[1], 0.0);
    }

    #[test]
    fn disturbance_linear_in_rho() {
        let sigma = VecM::from_slice(&[0.3, -0.7]);
        for &t in &[0.0, 0.123, 2.5, 9.99] {
            let f1 = matched_disturbance(t, &sigma, &base_params(321.5));
            let f2 = matched_disturbance(t, &sigma, &base_params(643.0));
            assert_eq!(f2[0], 2.0 * f1[0]);
            assert_eq!(f2[1], 2.0 * f1[1]);
        }
    }

    #[test]
    fn disturbance_norm_bound_on_dense_time_grid() {
        // Brute-force scan of ||f|| / rho at sigma = 0 over t in [0, 10];
        // the stated bound 2.63 is conservative, the scan stays below it.
        let p = base_params(1.0);
        let z = VecM::zeros(2);
        let mut max_ratio = 0.0_f64;
        let steps = 100_000;
        for i in 0..=steps {
            let t = 10.0 * i as f64 / steps as f64;
            max_ratio = max_ratio.max(matched_disturbance(t, &z, &p).norm2());
        }
        assert!(max_ratio <= 2.63, "max ||f||/rho = {max_ratio}");
        // The same scan certifies the scaled bound used at rho = 1000.
        assert!(1000.0 * max_ratio <= 2630.0);
    }

    #[test]
    fn schedule_semantics() {
        let s = RhoSchedule::new(vec![(0.0, 80.0), (0.2, 50.0), (0.4, 10.0)]).unwrap();
        assert_eq!(s.value_at(0.0), 80.0);
        assert_eq!(s.value_at(0.2 - 1e-9), 80.0);
        assert_eq!(s.value_at(0.2), 50.0); // right-continuous
        assert_eq!(s.value_at(0.3), 50.0);
        assert_eq!(s.value_at(0.4), 10.0);
        assert_eq!(s.value_at(100.0), 10.0);

        assert!(RhoSchedule::new(vec![]).is_err());
        assert!(RhoSchedule::new(vec![(0.1, 1.0)]).is_err());
        assert!(RhoSchedule::new(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(RhoSchedule::new(vec![(0.0, -1.0)]).is_err());
    }

    #[test]
    fn scheduled_bias_rescaling_keeps_products_fixed() {
        let mut p = base_params(80.0);
        p.a1 = 1.0 / 80.0;
        p.b1 = 1.2 / 80.0;
        p.rho_schedule =
            Some(RhoSchedule::new(vec![(0.0, 80.0), (0.2, 50.0), (0.4, 10.0)]).unwrap());
        p.rescale_bias = true;
        for &t in &[0.0, 0.25, 0.7] {
            let (rho, a1, b1) = p.effective(t);
            assert_close(rho * a1, 1.0, 1e-12);
            assert_close(rho * b1, 1.2, 1e-12);
        }
        assert_eq!(p.effective(0.3).0, 50.0);
    }

    #[test]
    fn uncertain_input_matrix_known_values() {
        let h0 = uncertain_input_matrix(0.0, &VecM::zeros(2));
        assert_close(h0.at(0, 0), 1.5, 1e-15);
        assert_close(h0.at(0, 1), 13.0 / 30.0, 1e-15);
        assert_eq!(h0.at(1, 0), 0.0);
        assert_close(h0.at(1, 1), 1.2, 1e-15);

        let hpi = uncertain_input_matrix(0.0, &VecM::from_slice(&[PI, 0.0]));
        assert_close(hpi.at(0, 0), 0.5, 1e-12);
        assert_close(hpi.at(0, 1), -13.0 / 30.0, 1e-12);
        assert_close(hpi.at(1, 1), 0.8, 1e-12);

        // The (2,1) entry is structurally zero.
        for i in 0..20 {
            let t = 0.37 * i as f64;
            let sigma = VecM::from_slice(&[(i as f64).sin() * 3.0, (i as f64).cos() * 2.0]);
            assert_eq!(uncertain_input_matrix(t, &sigma).at(1, 0), 0.0);
        }
    }

    #[test]
    fn factored_matrices_known_values() {
        let g = factored_input_matrix();
        assert_eq!(g.at(0, 0), 2.0);
        assert_eq!(g.at(0, 1), -3.0);
        assert_eq!(g.at(1, 0), 0.0);
        assert_eq!(g.at(1, 1), 3.0);
        assert!(g.invert().is_ok()); // det = 6, rank 2

        let dg0 = factored_uncertainty(0.0, &VecM::zeros(2));
        assert_close(dg0.at(0, 0), 0.5, 1e-15);
        assert_close(dg0.at(0, 1), 0.2, 1e-15);
        assert_eq!(dg0.at(1, 0), 0.0);
        assert_close(dg0.at(1, 1), 0.2, 1e-15);

        // cos(sigma_1) = 0 isolates the sin term; sigma_2 = pi/2 maxes it.
        let dg_half_pi = factored_uncertainty(0.0, &VecM::from_slice(&[PI / 2.0, PI / 2.0]));
        assert_close(dg_half_pi.at(0, 0), 0.0, 1e-15);
        assert_close(dg_half_pi.at(0, 1), 0.1, 1e-12);
        assert_close(dg_half_pi.at(1, 1), 0.1, 1e-12);
    }

    #[test]
    fn scaled_uncertainty_matches_hand_reduction() {
        // For the factored plant, G dg G^-1 reduces in closed form to
        // [[c/2, (13c - s)/30], [0, w]] with c = cos(sigma_1),
        // s = sin(5t + sigma_2), w = 0.2c + 0.1s. Independent algebra route.
        let g = factored_input_matrix();
        let g_inv = g.invert().unwrap();
        for i in 0..50 {
            let t = 0.21 * i as f64;
            let sigma = VecM::from_slice(&[1.7 * (i as f64).sin(), 2.3 * (i as f64).cos()]);
            let c = sigma[0].cos();
            let s = (5.0 * t + sigma[1]).sin();
            let w = 0.2 * c + 0.1 * s;
            let delta_g = g.matmul(&factored_uncertainty(t, &sigma)).matmul(&g_inv);
            assert_close(delta_g.at(0, 0), 0.5 * c, 1e-12);
            assert_close(delta_g.at(0, 1), (13.0 * c - s) / 30.0, 1e-12);
            assert_close(delta_g.at(1, 0), 0.0, 1e-12);
            assert_close(delta_g.at(1, 1), w, 1e-12);
        }
    }

    #[test]
    fn assumptions_hold_for_factored_plant_on_verification_grid() {
        let t_grid = linspace(0.0, 10.0, 21);
        let sigma_axis = linspace(-PI, PI, 21);
        let report = check_assumptions(&FactoredPlant, &base_params(1.0), &t_grid, &sigma_axis);
        assert_eq!(report.grid_size, 21 * 21 * 21);
        assert!(report.rank_ok);
        assert!(report.q_est < 1.0, "q_est = {}", report.q_est);
        // Analytic supremum of the infinity norm is 29/30.
        assert!(report.q_est > 0.9 && report.q_est <= 29.0 / 30.0 + 1e-9);
        assert!(report.q1_est > -1.0, "q1_est = {}", report.q1_est);
        assert!(report.q1_est < 0.0);
        assert!(report.b0_est() > 0.0);
    }

    #[test]
    fn assumptions_trivial_for_zero_uncertainty() {
        let t_grid = linspace(0.0, 5.0, 5);
        let sigma_axis = linspace(-1.0, 1.0, 5);
        let report =
            check_assumptions(&UncertainInputPlant, &base_params(1.0), &t_grid, &sigma_axis);
        assert!(report.rank_ok);
        assert_eq!(report.q_est, 0.0);
        assert_eq!(report.q1_est, 0.0);
    }

    #[test]
    fn disturbance_peak_scales_with_rho_on_grid() {
        let t_grid = linspace(0.0, 10.0, 21);
        let sigma_axis = linspace(-PI, PI, 21);
        let report =
            check_assumptions(&FactoredPlant, &base_params(1000.0), &t_grid, &sigma_axis);
        assert!(report.d_est <= 2630.0, "d_est = {}", report.d_est);
        assert!(report.d_est >= 1500.0);
    }
}
