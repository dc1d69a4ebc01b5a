//! Gain laws and control-vector computation.
//!
//! Three gain laws ship:
//!
//! * the baseline adaptive law `k_hat_dot = K_bar ||sigma||`, whose reaching
//!   time depends on initial conditions and disturbance size;
//! * the ARPS reaching-phase law
//!   `Lambda = beta_hat + ||sigma|| / (alpha (T_c - t))`, which bounds the
//!   reaching time by the prescribed constant `T_c` regardless of both;
//! * barrier-function gains, finite on `[0, epsilon)` and diverging at the
//!   barrier width, used after the switch to hold `||sigma|| < epsilon`.
//!
//! The hybrid law runs ARPS until `||sigma||` first drops to `epsilon / 2`,
//! then switches to the barrier gain exactly once.

use thiserror::Error;

use crate::linalg::{LinalgError, MatM, VecM};

/// Parameters of the ARPS reaching-phase gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArpsParams {
    /// Shape constant in (0, 1).
    pub alpha: f64,
    /// Prescribed upper bound on the reaching time, seconds.
    pub t_c: f64,
    /// Initial value of the adaptive term `beta_hat`.
    pub beta0: f64,
}

impl ArpsParams {
    pub fn new(alpha: f64, t_c: f64, beta0: f64) -> Self {
        Self { alpha, t_c, beta0 }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ParamError::AlphaOutOfRange(self.alpha));
        }
        if !(self.t_c > 0.0) {
            return Err(ParamError::NonPositiveHorizon(self.t_c));
        }
        if !(self.beta0 >= 0.0) {
            return Err(ParamError::NegativeGain(self.beta0));
        }
        Ok(())
    }
}

/// Barrier-function family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierKind {
    /// `K(r) = beta_bar * epsilon / (epsilon - r)`, minimum `beta_bar` at 0.
    PositiveDefinite,
    /// `K(r) = r / (epsilon - r)`, minimum 0 at 0.
    PositiveSemiDefinite,
}

/// A barrier gain: strictly increasing on `[0, epsilon)` with a vertical
/// asymptote at the barrier width `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec {
    pub kind: BarrierKind,
    pub epsilon: f64,
    /// Value at zero for the positive-definite kind; 0 for semi-definite.
    pub beta_bar: f64,
}

impl BarrierSpec {
    pub fn psd(epsilon: f64) -> Self {
        Self {
            kind: BarrierKind::PositiveSemiDefinite,
            epsilon,
            beta_bar: 0.0,
        }
    }

    pub fn pd(epsilon: f64, beta_bar: f64) -> Self {
        Self {
            kind: BarrierKind::PositiveDefinite,
            epsilon,
            beta_bar,
        }
    }

    /// Norm level at which the hybrid law hands over to the barrier gain.
    pub fn switch_threshold(&self) -> f64 {
        self.epsilon / 2.0
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.epsilon > 0.0) {
            return Err(ParamError::NonPositiveEpsilon(self.epsilon));
        }
        if !(self.beta_bar >= 0.0) {
            return Err(ParamError::NegativeGain(self.beta_bar));
        }
        if self.kind == BarrierKind::PositiveSemiDefinite && self.beta_bar != 0.0 {
            return Err(ParamError::SemiDefiniteWithOffset(self.beta_bar));
        }
        Ok(())
    }
}

/// Parameters of the baseline adaptive law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineParams {
    /// Adaptation rate `K_bar` > 0.
    pub k_bar: f64,
    /// Initial gain `k_hat(0)`.
    pub k0: f64,
}

impl BaselineParams {
    pub fn new(k_bar: f64, k0: f64) -> Self {
        Self { k_bar, k0 }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.k_bar > 0.0) {
            return Err(ParamError::NonPositiveRate(self.k_bar));
        }
        if !(self.k0 >= 0.0) {
            return Err(ParamError::NegativeGain(self.k0));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("alpha must lie in (0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("reaching-time bound must be positive, got {0}")]
    NonPositiveHorizon(f64),
    #[error("barrier width epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("adaptation rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("gain values must be nonnegative, got {0}")]
    NegativeGain(f64),
    #[error("semi-definite barrier requires beta_bar = 0, got {0}")]
    SemiDefiniteWithOffset(f64),
}

/// Controller phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    ReachingPhase,
    AdaptivePhase,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::ReachingPhase => "RP",
            Mode::AdaptivePhase => "ASP",
        }
    }
}

/// Adaptive integrator state threaded through a simulation. `beta_hat` and
/// `k_hat` are nondecreasing along any trajectory (their rates are norms);
/// the mode switches `ReachingPhase -> AdaptivePhase` at most once and
/// `t_bar` is set exactly when it does.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainState {
    pub beta_hat: f64,
    pub k_hat: f64,
    pub mode: Mode,
    pub t_bar: Option<f64>,
}

impl GainState {
    pub fn initial(beta0: f64, k0: f64) -> Self {
        Self {
            beta_hat: beta0,
            k_hat: k0,
            mode: Mode::ReachingPhase,
            t_bar: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.beta_hat.is_finite() && self.k_hat.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GainError {
    #[error("reaching-phase gain undefined at t = {t}: horizon T_c = {t_c} reached")]
    TimeHorizonExceeded { t: f64, t_c: f64 },
    #[error("barrier breached: ||sigma|| = {norm} >= epsilon = {epsilon}")]
    BarrierBreached { norm: f64, epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error(transparent)]
    Singular(#[from] LinalgError),
    /// `||sigma||` fell below the deadzone; the caller substitutes `nu = 0`,
    /// a valid selection of the discontinuous law at `sigma = 0`.
    #[error("||sigma|| = {norm:.3e} below deadzone {deadzone:.3e}")]
    DeadzoneHit { norm: f64, deadzone: f64 },
}

/// Unit-vector control `nu = -Lambda sigma / ||sigma||`, `u = G^-1 nu`.
/// Returns `(u, nu)`.
pub fn unit_vector_control(
    sigma: &VecM,
    lambda: f64,
    g: &MatM,
    deadzone: f64,
) -> Result<(VecM, VecM), ControlError> {
    let norm = sigma.norm2();
    if norm < deadzone {
        return Err(ControlError::DeadzoneHit { norm, deadzone });
    }
    let nu = sigma.scaled(-lambda / norm);
    let u = g.invert()?.matvec(&nu);
    Ok((u, nu))
}

/// ARPS reaching-phase gain `beta_hat + ||sigma|| / (alpha (T_c - t))`.
pub fn arps_gain(
    t: f64,
    norm_sigma: f64,
    beta_hat: f64,
    p: &ArpsParams,
) -> Result<f64, GainError> {
    if t >= p.t_c {
        return Err(GainError::TimeHorizonExceeded { t, t_c: p.t_c });
    }
    Ok(beta_hat + norm_sigma / (p.alpha * (p.t_c - t)))
}

/// Rate of the ARPS adaptive term: `beta_hat_dot = ||sigma||`.
pub fn arps_gain_rate(norm_sigma: f64) -> f64 {
    norm_sigma
}

/// Rate of the baseline adaptive gain: `k_hat_dot = K_bar ||sigma||`.
pub fn baseline_gain_rate(norm_sigma: f64, p: &BaselineParams) -> f64 {
    p.k_bar * norm_sigma
}

/// Barrier gain evaluated at `||sigma||`; fails when the norm is at or past
/// the barrier width (the closed loop is designed never to get there, so
/// reaching it is a simulation fault).
pub fn barrier_gain(norm_sigma: f64, spec: &BarrierSpec) -> Result<f64, GainError> {
    if norm_sigma >= spec.epsilon {
        return Err(GainError::BarrierBreached {
            norm: norm_sigma,
            epsilon: spec.epsilon,
        });
    }
    Ok(match spec.kind {
        BarrierKind::PositiveDefinite => spec.beta_bar * spec.epsilon / (spec.epsilon - norm_sigma),
        BarrierKind::PositiveSemiDefinite => norm_sigma / (spec.epsilon - norm_sigma),
    })
}

/// Root `s < epsilon` of `K(s) = beta_star`: the norm level at which the
/// barrier gain matches a given disturbance-dominating level. Diagnostic
/// only; the controller never needs `beta_star` online.
pub fn barrier_root_s(spec: &BarrierSpec, beta_star: f64) -> f64 {
    match spec.kind {
        BarrierKind::PositiveDefinite => {
            if spec.beta_bar < beta_star {
                spec.epsilon * (1.0 - spec.beta_bar / beta_star)
            } else {
                0.0
            }
        }
        BarrierKind::PositiveSemiDefinite => spec.epsilon * beta_star / (1.0 + beta_star),
    }
}

/// Switched gain: ARPS while reaching, barrier once `||sigma||` first drops
/// to `epsilon / 2`. The transition fires at most once and records `t_bar`.
pub fn hybrid_gain(
    t: f64,
    norm_sigma: f64,
    mut state: GainState,
    arps: &ArpsParams,
    barrier: &BarrierSpec,
) -> Result<(f64, GainState), GainError> {
    if state.mode == Mode::ReachingPhase && norm_sigma <= barrier.switch_threshold() {
        state.mode = Mode::AdaptivePhase;
        state.t_bar = Some(t);
    }
    let lambda = match state.mode {
        Mode::ReachingPhase => arps_gain(t, norm_sigma, state.beta_hat, arps)?,
        Mode::AdaptivePhase => barrier_gain(norm_sigma, barrier)?,
    };
    Ok((lambda, state))
}

/// A gain law paired with how its control vector enters the plant.
#[derive(Debug, Clone, PartialEq)]
pub enum Controller {
    /// `nu = -k_hat sigma / ||sigma||` applied directly as the plant input
    /// (no model inversion).
    Baseline(BaselineParams),
    /// Pure ARPS reaching law through `u = G^-1 nu`; never switches.
    Arps(ArpsParams),
    /// ARPS followed by a barrier gain after the `epsilon / 2` crossing.
    Hybrid {
        arps: ArpsParams,
        barrier: BarrierSpec,
    },
}

impl Controller {
    pub fn initial_gains(&self) -> GainState {
        match self {
            Controller::Baseline(p) => GainState::initial(0.0, p.k0),
            Controller::Arps(p) => GainState::initial(p.beta0, 0.0),
            Controller::Hybrid { arps, .. } => GainState::initial(arps.beta0, 0.0),
        }
    }

    /// Reaching-phase horizon, when the law has one.
    pub fn horizon(&self) -> Option<f64> {
        match self {
            Controller::Baseline(_) => None,
            Controller::Arps(p) => Some(p.t_c),
            Controller::Hybrid { arps, .. } => Some(arps.t_c),
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        match self {
            Controller::Baseline(p) => p.validate(),
            Controller::Arps(p) => p.validate(),
            Controller::Hybrid { arps, barrier } => {
                arps.validate()?;
                barrier.validate()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::MatM;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} != {b} (tol {tol})");
    }

    #[test]
    fn unit_vector_control_known_values() {
        let id = MatM::identity(2);
        let (u, nu) =
            unit_vector_control(&VecM::from_slice(&[1.0, 0.0]), 1.0, &id, 1e-12).unwrap();
        assert_close(nu[0], -1.0, 1e-15);
        assert_close(nu[1], 0.0, 1e-15);
        assert_close(u[0], -1.0, 1e-15);

        let (_, nu) = unit_vector_control(&VecM::from_slice(&[3.0, 4.0]), 10.0, &id, 1e-12).unwrap();
        assert_close(nu[0], -6.0, 1e-12);
        assert_close(nu[1], -8.0, 1e-12);
        assert_close(nu.norm2(), 10.0, 1e-12);

        let g = MatM::from_row_major(2, &[2.0, -3.0, 0.0, 3.0]);
        let (u, nu) = unit_vector_control(&VecM::from_slice(&[0.0, 1.0]), 3.0, &g, 1e-12).unwrap();
        assert_close(nu[0], 0.0, 1e-15);
        assert_close(nu[1], -3.0, 1e-15);
        assert_close(u[0], -1.5, 1e-12);
        assert_close(u[1], -1.0, 1e-12);
    }

    #[test]
    fn unit_vector_control_deadzone() {
        let id = MatM::identity(2);
        let err = unit_vector_control(&VecM::from_slice(&[1e-13, 0.0]), 1.0, &id, 1e-12);
        assert!(matches!(err, Err(ControlError::DeadzoneHit { .. })));

        let sing = MatM::from_row_major(2, &[1.0, 1.0, 1.0, 1.0]);
        let err = unit_vector_control(&VecM::from_slice(&[1.0, 0.0]), 1.0, &sing, 1e-12);
        assert!(matches!(err, Err(ControlError::Singular(_))));
    }

    #[test]
    fn arps_gain_known_values() {
        let p = ArpsParams::new(0.4, 0.1, 0.0);
        assert_close(arps_gain(0.0, 1.0, 0.0, &p).unwrap(), 25.0, 1e-12);
        assert_close(arps_gain(0.05, 0.0, 5.0, &p).unwrap(), 5.0, 1e-15);

        let p2 = ArpsParams::new(0.5, 1.0, 0.0);
        assert_close(arps_gain(0.5, 2.0, 1.0, &p2).unwrap(), 9.0, 1e-12);

        assert!(matches!(
            arps_gain(0.1, 1.0, 0.0, &p),
            Err(GainError::TimeHorizonExceeded { .. })
        ));
    }

    #[test]
    fn arps_gain_is_affine_in_its_inputs() {
        let p = ArpsParams::new(0.3, 2.0, 0.0);
        let t = 0.7;
        let base = arps_gain(t, 1.0, 0.0, &p).unwrap();
        for i in 0..20 {
            let beta = 0.5 * i as f64;
            let norm = 0.25 * i as f64;
            let got = arps_gain(t, norm, beta, &p).unwrap();
            assert_close(got, beta + norm * base, 1e-10);
        }
    }

    #[test]
    fn gain_rates() {
        assert_eq!(arps_gain_rate(0.0), 0.0);
        assert_eq!(arps_gain_rate(5.0), 5.0);
        assert_eq!(arps_gain_rate(300.0), 300.0);

        let p = BaselineParams::new(100.0, 0.0);
        assert_eq!(baseline_gain_rate(0.0, &p), 0.0);
        assert_eq!(baseline_gain_rate(1.0, &p), 100.0);
        assert_eq!(baseline_gain_rate(0.5, &BaselineParams::new(2.0, 0.0)), 1.0);
    }

    #[test]
    fn barrier_gain_known_values() {
        let psd = BarrierSpec::psd(0.05);
        assert_eq!(barrier_gain(0.0, &psd).unwrap(), 0.0);
        assert_close(barrier_gain(0.025, &psd).unwrap(), 1.0, 1e-12);

        let pd = BarrierSpec::pd(0.05, 0.7);
        assert_close(barrier_gain(0.0, &pd).unwrap(), 0.7, 1e-15);

        assert!(matches!(
            barrier_gain(0.05, &psd),
            Err(GainError::BarrierBreached { .. })
        ));
        assert!(matches!(
            barrier_gain(0.06, &pd),
            Err(GainError::BarrierBreached { .. })
        ));
    }

    #[test]
    fn barrier_gain_strictly_increasing_on_dense_sample() {
        for spec in [BarrierSpec::psd(0.05), BarrierSpec::pd(0.05, 0.7)] {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=1000 {
                let r = 0.999 * spec.epsilon * i as f64 / 1000.0;
                let k = barrier_gain(r, &spec).unwrap();
                assert!(k > prev, "not increasing at r = {r}");
                prev = k;
            }
        }
    }

    #[test]
    fn barrier_gain_diverges_at_the_barrier_width() {
        for spec in [BarrierSpec::psd(0.05), BarrierSpec::pd(0.05, 0.7)] {
            let floor = (spec.beta_bar * spec.epsilon).min(spec.epsilon / 2.0) / spec.epsilon;
            for k in 3..=9 {
                let r = spec.epsilon * (1.0 - 10.0_f64.powi(-k));
                let gain = barrier_gain(r, &spec).unwrap();
                assert!(
                    gain > 10.0_f64.powi(k - 1) * floor,
                    "gain {gain} too small at k = {k}"
                );
            }
        }
    }

    #[test]
    fn barrier_root_known_values() {
        let psd = BarrierSpec::psd(0.05);
        assert_close(barrier_root_s(&psd, 1.0), 0.025, 1e-15);

        let pd = BarrierSpec::pd(0.05, 0.5);
        assert_close(barrier_root_s(&pd, 1.0), 0.025, 1e-15);

        let pd_high = BarrierSpec::pd(0.05, 2.0);
        assert_eq!(barrier_root_s(&pd_high, 1.0), 0.0);
    }

    #[test]
    fn barrier_root_consistency_random() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..1000 {
            let epsilon = rng.gen_range(1e-3..1.0);
            let beta_bar = rng.gen_range(0.05..5.0);
            let beta_star = beta_bar + rng.gen_range(0.01..10.0);

            let psd = BarrierSpec::psd(epsilon);
            let s = barrier_root_s(&psd, beta_star);
            assert!(s < epsilon);
            assert_close(barrier_gain(s, &psd).unwrap(), beta_star, 1e-12);

            let pd = BarrierSpec::pd(epsilon, beta_bar);
            let s = barrier_root_s(&pd, beta_star);
            assert!(s < epsilon);
            assert_close(barrier_gain(s, &pd).unwrap(), beta_star, 1e-12);
        }
    }

    #[test]
    fn barrier_gain_depends_on_sigma_only_through_its_norm() {
        // With m = 1 the law degenerates to the scalar barrier of |sigma|.
        let spec = BarrierSpec::psd(0.05);
        for i in 1..50 {
            let x = 0.049 * i as f64 / 50.0;
            let plus = VecM::from_slice(&[x]).norm2();
            let minus = VecM::from_slice(&[-x]).norm2();
            assert_eq!(
                barrier_gain(plus, &spec).unwrap(),
                barrier_gain(minus, &spec).unwrap()
            );
        }
    }

    #[test]
    fn hybrid_gain_state_machine() {
        let arps = ArpsParams::new(0.4, 0.1, 0.0);
        let barrier = BarrierSpec::psd(0.05);
        let state = GainState::initial(0.0, 0.0);

        // Above threshold: stays in the reaching phase.
        let (lambda, s1) = hybrid_gain(0.0, 10.0, state, &arps, &barrier).unwrap();
        assert_eq!(s1.mode, Mode::ReachingPhase);
        assert!(s1.t_bar.is_none());
        assert_close(lambda, 250.0, 1e-9);

        // First crossing of epsilon / 2 switches and records t_bar.
        let (lambda, s2) = hybrid_gain(0.03, 0.024, s1, &arps, &barrier).unwrap();
        assert_eq!(s2.mode, Mode::AdaptivePhase);
        assert_eq!(s2.t_bar, Some(0.03));
        assert_close(lambda, 0.024 / (0.05 - 0.024), 1e-12);

        // Exactly at epsilon / 2 inside the adaptive phase: K_psd = 1.
        let (lambda, s3) = hybrid_gain(0.05, 0.025, s2, &arps, &barrier).unwrap();
        assert_eq!(s3.mode, Mode::AdaptivePhase);
        assert_eq!(s3.t_bar, Some(0.03)); // no second transition
        assert_close(lambda, 1.0, 1e-12);

        // Norm rising back above the threshold does not reopen the phase.
        let (_, s4) = hybrid_gain(0.06, 0.04, s3, &arps, &barrier).unwrap();
        assert_eq!(s4.mode, Mode::AdaptivePhase);
        assert_eq!(s4.t_bar, Some(0.03));
    }

    #[test]
    fn parameter_validation() {
        assert!(ArpsParams::new(0.4, 0.1, 0.0).validate().is_ok());
        assert!(ArpsParams::new(1.4, 0.1, 0.0).validate().is_err());
        assert!(ArpsParams::new(0.4, 0.0, 0.0).validate().is_err());
        assert!(BarrierSpec::psd(0.0).validate().is_err());
        assert!(
            BarrierSpec {
                kind: BarrierKind::PositiveSemiDefinite,
                epsilon: 0.05,
                beta_bar: 0.1,
            }
            .validate()
            .is_err()
        );
        assert!(BaselineParams::new(0.0, 0.0).validate().is_err());
    }
}
