//! Fixed-step closed-loop integration of model plus controller.
//!
//! Switching discontinuities make a small fixed step both simpler and
//! reproducible, so there is no adaptive stepping. The controller is
//! evaluated every step; a step of 0.01 days resolves the default
//! dead-band comfortably.

use crate::controller::{
    surface_residual, switch_decision, ControllerConfig, ControllerState, Regime,
};
use crate::error::{Error, Result};
use crate::model::{
    herd_threshold, observable_derivatives, rhs, Derivative, ModelKind, ModelParams, State,
    VaccinationSchedule,
};
use crate::scalar::Scalar;

/// Fixed-step integration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<T> {
    /// Step size in days.
    pub dt: T,
    /// Total simulated span in days.
    pub horizon: T,
    /// Steps per recorded sample (switch events are recorded regardless).
    pub record_stride: usize,
}

impl<T: Scalar> IntegratorConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt <= T::zero() {
            return Err(Error::validation("dt", "must be strictly positive"));
        }
        if !self.horizon.is_finite() || self.horizon <= T::zero() {
            return Err(Error::validation("horizon", "must be strictly positive"));
        }
        if self.record_stride == 0 {
            return Err(Error::validation("record_stride", "must be at least 1"));
        }
        Ok(())
    }
}

impl<T: Scalar> Default for IntegratorConfig<T> {
    fn default() -> Self {
        IntegratorConfig {
            dt: T::c(0.01),
            horizon: T::c(400.0),
            record_stride: 10,
        }
    }
}

/// A regime change with its instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchEvent<T> {
    pub time: T,
    pub from: Regime,
    pub to: Regime,
}

/// Fully logged closed-loop run. All per-sample vectors share one length;
/// switch events are exact to the step grid even between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub kind: ModelKind,
    pub dt: T,
    pub times: Vec<T>,
    pub states: Vec<State<T>>,
    pub regimes: Vec<Regime>,
    pub betas: Vec<T>,
    pub residuals: Vec<T>,
    pub switch_events: Vec<SwitchEvent<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn advance<T: Scalar>(state: &State<T>, d: &Derivative<T>, c: T) -> State<T> {
    State {
        kind: state.kind,
        s: state.s + c * d.ds,
        e: state.e + c * d.de,
        a: state.a + c * d.da,
        i: state.i + c * d.di,
        r: state.r + c * d.dr,
    }
}

fn all_finite<T: Scalar>(state: &State<T>) -> bool {
    state.s.is_finite()
        && state.e.is_finite()
        && state.a.is_finite()
        && state.i.is_finite()
        && state.r.is_finite()
}

/// One classical fourth-order Runge-Kutta step at constant `beta` and
/// vaccination throughput `v`. The output is renormalized to sum one only
/// if conservation drift exceeds `1e-12`.
pub fn rk4_step<T: Scalar>(
    kind: ModelKind,
    params: &ModelParams<T>,
    state: &State<T>,
    beta: T,
    v: T,
    dt: T,
) -> Result<State<T>> {
    debug_assert!(dt > T::zero());
    let half = T::c(0.5);
    let sixth = T::c(1.0 / 6.0);
    let two = T::c(2.0);

    let k1 = rhs(kind, params, state, beta, v)?;
    let k2 = rhs(kind, params, &advance(state, &k1, half * dt), beta, v)?;
    let k3 = rhs(kind, params, &advance(state, &k2, half * dt), beta, v)?;
    let k4 = rhs(kind, params, &advance(state, &k3, dt), beta, v)?;

    let combined = Derivative {
        ds: (k1.ds + two * k2.ds + two * k3.ds + k4.ds) * sixth,
        de: (k1.de + two * k2.de + two * k3.de + k4.de) * sixth,
        da: (k1.da + two * k2.da + two * k3.da + k4.da) * sixth,
        di: (k1.di + two * k2.di + two * k3.di + k4.di) * sixth,
        dr: (k1.dr + two * k2.dr + two * k3.dr + k4.dr) * sixth,
    };
    let mut next = advance(state, &combined, dt);

    if !all_finite(&next) {
        return Err(Error::Numerical {
            time: f64::NAN,
            detail: format!("non-finite state after RK4 step (beta={beta}, v={v}, dt={dt})"),
        });
    }

    let total = next.total();
    if (total - T::one()).abs() > T::c(1e-12) {
        next.s = next.s / total;
        next.e = next.e / total;
        next.a = next.a / total;
        next.i = next.i / total;
        next.r = next.r / total;
    }
    Ok(next)
}

/// Runs the closed loop: at every step the residual is evaluated from the
/// model-implied derivatives under the incumbent regime's contact rate,
/// the hysteresis decision is applied, and the (possibly new) regime's
/// contact rate drives the same step's integration.
pub fn simulate<T: Scalar>(
    kind: ModelKind,
    params: &ModelParams<T>,
    controller: &ControllerConfig<T>,
    vaccination: Option<&VaccinationSchedule<T>>,
    init: &State<T>,
    integ: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    params.validate(kind)?;
    controller.validate(kind)?;
    integ.validate()?;
    init.validate()?;
    if let Some(v) = vaccination {
        v.validate()?;
    }
    if init.kind != kind {
        return Err(Error::ShapeMismatch {
            expected: kind,
            state: init.kind,
        });
    }

    let dt = integ.dt;
    let steps = (integ.horizon / dt).round().to_usize().ok_or_else(|| {
        Error::validation("horizon", "horizon/dt does not fit in a step count")
    })?;

    let mut state = *init;
    let mut ctrl = ControllerState::new();
    let mut traj = Trajectory {
        kind,
        dt,
        times: Vec::with_capacity(steps / integ.record_stride + 2),
        states: Vec::with_capacity(steps / integ.record_stride + 2),
        regimes: Vec::with_capacity(steps / integ.record_stride + 2),
        betas: Vec::with_capacity(steps / integ.record_stride + 2),
        residuals: Vec::with_capacity(steps / integ.record_stride + 2),
        switch_events: Vec::new(),
    };

    for n in 0..=steps {
        let t = T::from_usize(n).unwrap() * dt;

        let incumbent_beta = ctrl.regime.beta(params);
        let (i_dot, i_ddot) = observable_derivatives(kind, params, &state, incumbent_beta)?;
        let residual = surface_residual(controller, state.i, i_dot, i_ddot);
        let prev_regime = ctrl.regime;
        let (regime, next_ctrl) = switch_decision(controller, &ctrl, residual, t);
        ctrl = next_ctrl;
        if regime != prev_regime {
            traj.switch_events.push(SwitchEvent {
                time: t,
                from: prev_regime,
                to: regime,
            });
        }

        if n % integ.record_stride == 0 || n == steps {
            traj.times.push(t);
            traj.states.push(state);
            traj.regimes.push(regime);
            traj.betas.push(regime.beta(params));
            traj.residuals.push(residual);
        }
        if n == steps {
            break;
        }

        let beta = regime.beta(params);
        let mut v = match vaccination {
            Some(schedule) => schedule.effective_rate(t, state.s),
            None => T::zero(),
        };
        // never ask vaccination for more susceptibles than one step holds
        if v > T::zero() {
            v = v.min(state.s.max(T::zero()) / dt);
        }

        state = rk4_step(kind, params, &state, beta, v, dt).map_err(|e| match e {
            Error::Numerical { detail, .. } => Error::Numerical {
                time: t.to_f64().unwrap_or(f64::NAN),
                detail,
            },
            other => other,
        })?;

        // vaccination may overshoot within the step; land S exactly at
        // zero and hand the surplus back from R so mass stays balanced
        if state.s < T::zero() {
            let deficit = -state.s;
            if deficit > v * dt + T::c(1e-9) {
                return Err(Error::Numerical {
                    time: t.to_f64().unwrap_or(f64::NAN),
                    detail: format!("susceptible fraction went negative by {deficit:e}"),
                });
            }
            state.r = state.r + state.s;
            state.s = T::zero();
        }

        let drift = (state.total() - T::one()).abs();
        if drift > T::c(1e-6) {
            return Err(Error::Numerical {
                time: t.to_f64().unwrap_or(f64::NAN),
                detail: format!("conservation lost: sum deviates by {drift:e}"),
            });
        }
    }

    Ok(traj)
}

/// First time the susceptible fraction crosses the herd threshold,
/// linearly interpolated between logged samples; `None` if never crossed.
pub fn detect_herd_crossing<T: Scalar>(
    traj: &Trajectory<T>,
    kind: ModelKind,
    params: &ModelParams<T>,
) -> Result<Option<T>> {
    if traj.is_empty() {
        return Err(Error::validation("trajectory", "empty trajectory"));
    }
    let threshold = herd_threshold(kind, params)?;
    if traj.states[0].s <= threshold {
        return Ok(Some(traj.times[0]));
    }
    for k in 1..traj.len() {
        if traj.states[k].s <= threshold {
            let s0 = traj.states[k - 1].s;
            let s1 = traj.states[k].s;
            let t0 = traj.times[k - 1];
            let t1 = traj.times[k];
            let frac = (s0 - threshold) / (s0 - s1);
            return Ok(Some(t0 + frac * (t1 - t0)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn seir_params() -> ModelParams<f64> {
        ModelParams {
            gamma: 0.05,
            epsilon: 0.2,
            epsilon1: 0.0,
            epsilon2: 0.0,
            beta_freedom: 0.065,
            beta_lockdown: 0.01,
        }
    }

    fn nominal_controller() -> ControllerConfig<f64> {
        ControllerConfig {
            lambda: 0.2,
            phi: 1e-4,
            mu: 0.0,
            i_target: 0.002,
        }
    }

    fn nominal_init() -> State<f64> {
        State::seir(0.998, 0.001, 0.001, 0.0)
    }

    #[test]
    fn rk4_step_is_identity_without_dynamics() {
        let state = State::seir(0.6, 0.0, 0.0, 0.4);
        let next = rk4_step(ModelKind::Seir, &seir_params(), &state, 0.0, 0.0, 0.01).unwrap();
        assert_eq!(next, state);
    }

    #[test]
    fn rk4_order_four_self_convergence() {
        // halving dt shrinks the endpoint error against a dt/16 reference
        // by about 2^4; accept [12, 20]
        let params = seir_params();
        let ctrl = nominal_controller();
        let init = nominal_init();
        let endpoint = |dt: f64| {
            let integ = IntegratorConfig {
                dt,
                horizon: 10.0,
                record_stride: 1,
            };
            *simulate(ModelKind::Seir, &params, &ctrl, None, &init, &integ)
                .unwrap()
                .states
                .last()
                .unwrap()
        };
        let reference = endpoint(1.0 / 16.0);
        let err = |st: State<f64>| -> f64 {
            [
                st.s - reference.s,
                st.e - reference.e,
                st.i - reference.i,
                st.r - reference.r,
            ]
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max)
        };
        let e1 = err(endpoint(1.0));
        let e2 = err(endpoint(0.5));
        let factor = e1 / e2;
        assert!(
            (12.0..=20.0).contains(&factor),
            "self-convergence factor {factor} outside [12, 20] (e1={e1:e}, e2={e2:e})"
        );
    }

    #[test]
    fn near_disease_free_dynamics_match_the_linearized_solution() {
        // with S pinned at ~1 by vanishing prevalence, (E, I) follows
        // x' = [[-eps, beta], [eps, -gamma]] x; compare against the
        // closed-form matrix exponential
        let mut params = seir_params();
        params.beta_lockdown = 0.065 - 1e-12; // actuator moot
        let beta = 0.065;
        let (eps, gamma) = (params.epsilon, params.gamma);
        let e0 = 1e-9;
        let i0 = 1e-9;
        let mut state = State::seir(1.0 - e0 - i0, e0, i0, 0.0);
        let dt = 0.01f64;
        let days = 5.0f64;
        let steps = (days / dt).round() as usize;
        for _ in 0..steps {
            state = rk4_step(ModelKind::Seir, &params, &state, beta, 0.0, dt).unwrap();
        }

        // eigendecomposition of the 2x2 linear system
        let tr = -(eps + gamma);
        let disc = ((eps - gamma) * (eps - gamma) + 4.0 * beta * eps).sqrt();
        let mu_plus = (tr + disc) / 2.0;
        let mu_minus = (tr - disc) / 2.0;
        let a = [[-eps, beta], [eps, -gamma]];
        let proj = |mu_other: f64, x: [f64; 2]| {
            [
                (a[0][0] - mu_other) * x[0] + a[0][1] * x[1],
                a[1][0] * x[0] + (a[1][1] - mu_other) * x[1],
            ]
        };
        let x0 = [e0, i0];
        let p_plus = proj(mu_minus, x0);
        let p_minus = proj(mu_plus, x0);
        let scale = mu_plus - mu_minus;
        let expected_e =
            ((mu_plus * days).exp() * p_plus[0] - (mu_minus * days).exp() * p_minus[0]) / scale;
        let expected_i =
            ((mu_plus * days).exp() * p_plus[1] - (mu_minus * days).exp() * p_minus[1]) / scale;

        assert_relative_eq!(state.e, expected_e, max_relative = 1e-8);
        assert_relative_eq!(state.i, expected_i, max_relative = 1e-8);
    }

    #[test]
    fn simulate_is_deterministic() {
        let integ = IntegratorConfig {
            dt: 0.01,
            horizon: 80.0,
            record_stride: 10,
        };
        let run = || {
            simulate(
                ModelKind::Seir,
                &seir_params(),
                &nominal_controller(),
                None,
                &nominal_init(),
                &integ,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
    }

    #[test]
    fn identical_betas_make_the_controller_moot() {
        let mut pinned = seir_params();
        pinned.beta_lockdown = pinned.beta_freedom * (1.0 - 1e-12);
        let integ = IntegratorConfig {
            dt: 0.01,
            horizon: 60.0,
            record_stride: 10,
        };
        let controlled = simulate(
            ModelKind::Seir,
            &pinned,
            &nominal_controller(),
            None,
            &nominal_init(),
            &integ,
        )
        .unwrap();
        // uncontrolled twin: same beta at every step via a huge dead-band
        let free = ControllerConfig {
            phi: 1e6, // never crossed: the controller holds freedom
            ..nominal_controller()
        };
        let uncontrolled = simulate(
            ModelKind::Seir,
            &pinned,
            &free,
            None,
            &nominal_init(),
            &integ,
        )
        .unwrap();
        for (a, b) in controlled.states.iter().zip(&uncontrolled.states) {
            assert_abs_diff_eq!(a.i, b.i, epsilon = 1e-12);
            assert_abs_diff_eq!(a.s, b.s, epsilon = 1e-11);
        }
    }

    #[test]
    fn conservation_holds_over_the_full_horizon() {
        let integ = IntegratorConfig {
            dt: 0.01,
            horizon: 400.0,
            record_stride: 10,
        };
        let traj = simulate(
            ModelKind::Seir,
            &seir_params(),
            &nominal_controller(),
            None,
            &nominal_init(),
            &integ,
        )
        .unwrap();
        for st in &traj.states {
            assert!((st.total() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn switch_events_are_consistent_with_logged_regimes() {
        let integ = IntegratorConfig {
            dt: 0.01,
            horizon: 200.0,
            record_stride: 10,
        };
        let traj = simulate(
            ModelKind::Seir,
            &seir_params(),
            &nominal_controller(),
            None,
            &nominal_init(),
            &integ,
        )
        .unwrap();
        assert!(traj.switch_events.len() >= 4);
        // folding the events over time must reproduce the logged regimes
        let mut regime = Regime::Freedom;
        let mut ev = traj.switch_events.iter().peekable();
        for (t, logged) in traj.times.iter().zip(&traj.regimes) {
            while let Some(e) = ev.peek() {
                if e.time <= *t {
                    regime = e.to;
                    ev.next();
                } else {
                    break;
                }
            }
            assert_eq!(regime, *logged, "regime mismatch at t={t}");
        }
        // alternation
        for pair in traj.switch_events.windows(2) {
            assert_eq!(pair[0].to, pair[1].from);
        }
    }

    #[test]
    fn herd_crossing_detected_on_uncontrolled_run() {
        // uncontrolled freedom run from almost-fully-susceptible: S must
        // cross gamma/beta_F and the interpolated time must pin S there
        let params = seir_params();
        let free = ControllerConfig {
            phi: 1e6, // never crossed: stays in freedom throughout
            ..nominal_controller()
        };
        let integ = IntegratorConfig {
            dt: 0.01,
            horizon: 800.0,
            record_stride: 10,
        };
        let init = State::seir(0.998, 0.001, 0.001, 0.0);
        let traj = simulate(ModelKind::Seir, &params, &free, None, &init, &integ).unwrap();
        let t_herd = detect_herd_crossing(&traj, ModelKind::Seir, &params)
            .unwrap()
            .expect("uncontrolled epidemic must pass herd threshold");
        // locate the bracketing samples and check interpolation quality
        let k = traj.times.iter().position(|&t| t >= t_herd).unwrap();
        let s_dot = (traj.states[k].s - traj.states[k - 1].s).abs()
            / (traj.times[k] - traj.times[k - 1]);
        let threshold = 0.05 / 0.065;
        let s_at = traj.states[k].s + (traj.times[k] - t_herd) * s_dot;
        assert_abs_diff_eq!(s_at, threshold, epsilon = 2.0 * 0.01 * s_dot.max(1e-6));

        // never-crossing trajectory reports none
        let short = IntegratorConfig {
            dt: 0.01,
            horizon: 5.0,
            record_stride: 10,
        };
        let traj = simulate(ModelKind::Seir, &params, &free, None, &init, &short).unwrap();
        assert!(detect_herd_crossing(&traj, ModelKind::Seir, &params)
            .unwrap()
            .is_none());
    }

    #[test]
    fn vaccination_exhaustion_clamps_susceptibles_at_zero() {
        // stress: 5% per day empties S in ~20 days with no invariant breach
        let schedule = VaccinationSchedule {
            start_time: 0.0,
            activation_delay: 0.0,
            daily_rate: 0.05,
        };
        let integ = IntegratorConfig {
            dt: 0.01,
            horizon: 40.0,
            record_stride: 10,
        };
        let traj = simulate(
            ModelKind::Seir,
            &seir_params(),
            &nominal_controller(),
            Some(&schedule),
            &nominal_init(),
            &integ,
        )
        .unwrap();
        let last = traj.states.last().unwrap();
        assert_eq!(last.s, 0.0);
        for st in &traj.states {
            assert!(st.s >= 0.0);
            assert!((st.total() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn rk4_step_works_in_f32() {
        let params = ModelParams::<f32> {
            gamma: 0.05,
            epsilon: 0.2,
            epsilon1: 0.0,
            epsilon2: 0.0,
            beta_freedom: 0.065,
            beta_lockdown: 0.01,
        };
        let mut state = State::<f32>::seir(0.998, 0.001, 0.001, 0.0);
        for _ in 0..100 {
            state = rk4_step(ModelKind::Seir, &params, &state, 0.065f32, 0.0, 0.01f32).unwrap();
        }
        assert!((state.total() - 1.0).abs() <= 1e-6);
        assert!(state.i > 0.0);
    }

    #[test]
    fn integrator_config_validation() {
        let ok = IntegratorConfig::<f64>::default();
        assert!(ok.validate().is_ok());
        assert!(IntegratorConfig { dt: 0.0, ..ok }.validate().is_err());
        assert!(IntegratorConfig { horizon: -1.0, ..ok }.validate().is_err());
        assert!(IntegratorConfig {
            record_stride: 0,
            ..ok
        }
        .validate()
        .is_err());
    }
}
