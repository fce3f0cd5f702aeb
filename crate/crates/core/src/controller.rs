//! Sliding-surface design and the hysteresis switching law.
//!
//! The switching decision itself only needs the residual
//! `r = lambda (I - I0) + I' (+ mu I'')`; the surface gains, state-space
//! residual forms, and equivalent input exist for analysis and
//! cross-validation of that law against the reduced linear dynamics.

use crate::error::{Error, Result};
use crate::model::{equilibrium_state, ModelKind, ModelParams, State};
use crate::scalar::Scalar;

/// Design parameters of the switching law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig<T> {
    /// Decay rate assigned to the sliding dynamics (1/days).
    pub lambda: T,
    /// Dead-band half-width on the residual; positive values trade ideal
    /// sliding for switching periods of practical length.
    pub phi: T,
    /// Weight of the second derivative in the residual (SEAIR only).
    pub mu: T,
    /// Target infected fraction `I0`.
    pub i_target: T,
}

impl<T: Scalar> ControllerConfig<T> {
    pub fn validate(&self, kind: ModelKind) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda <= T::zero() {
            return Err(Error::validation("lambda", "must be strictly positive"));
        }
        if !self.phi.is_finite() || self.phi < T::zero() {
            return Err(Error::validation("phi", "must be nonnegative"));
        }
        if !self.mu.is_finite() || self.mu < T::zero() {
            return Err(Error::validation("mu", "must be nonnegative"));
        }
        if kind != ModelKind::Seair && self.mu != T::zero() {
            return Err(Error::validation(
                "mu",
                "second-derivative weight only applies to SEAIR",
            ));
        }
        if !self.i_target.is_finite() || self.i_target <= T::zero() {
            return Err(Error::validation("i_target", "must be strictly positive"));
        }
        Ok(())
    }
}

/// The binary actuator state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Freedom,
    Lockdown,
}

impl Regime {
    pub fn beta<T: Scalar>(self, params: &ModelParams<T>) -> T {
        match self {
            Regime::Freedom => params.beta_freedom,
            Regime::Lockdown => params.beta_lockdown,
        }
    }

    /// Single-letter code used in CSV exports.
    pub fn code(self) -> char {
        match self {
            Regime::Freedom => 'F',
            Regime::Lockdown => 'L',
        }
    }
}

/// Latched switching state carried along a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState<T> {
    pub regime: Regime,
    pub last_switch_time: T,
    pub switch_count: u32,
}

impl<T: Scalar> ControllerState<T> {
    /// Initial regime is freedom: the scenarios of interest start from an
    /// unrestricted population at low prevalence.
    pub fn new() -> Self {
        ControllerState {
            regime: Regime::Freedom,
            last_switch_time: T::zero(),
            switch_count: 0,
        }
    }
}

impl<T: Scalar> Default for ControllerState<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Surface gains realizing a chosen sliding dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceGains<T> {
    /// Single-gain surface `h x1 + x2 = 0` (SEIR, SAIR).
    FirstOrder { h: T },
    /// Two-gain surface `h x1 + k x2 + x3 = 0` (SEAIR) with the
    /// characteristic polynomial `s (s^2 + delta1 s + delta0)`.
    SecondOrder { h: T, k: T, delta1: T, delta0: T },
}

/// Gain placing the sliding-line eigenvalue at `-lambda` for the
/// first-order surfaces: `h = (lambda - (gamma + epsilon)) / epsilon`
/// for SEIR and `h = (lambda - gamma) / epsilon1` for SAIR.
pub fn gains_from_lambda<T: Scalar>(
    kind: ModelKind,
    lambda: T,
    params: &ModelParams<T>,
) -> Result<SurfaceGains<T>> {
    if !lambda.is_finite() || lambda <= T::zero() {
        return Err(Error::domain("gains_from_lambda", "lambda must be positive"));
    }
    let h = match kind {
        ModelKind::Seir => (lambda - (params.gamma + params.epsilon)) / params.epsilon,
        ModelKind::Sair => (lambda - params.gamma) / params.epsilon1,
        ModelKind::Seair => {
            return Err(Error::domain(
                "gains_from_lambda",
                "SEAIR needs two gains; use gains_from_deltas",
            ))
        }
    };
    Ok(SurfaceGains::FirstOrder { h })
}

/// SEAIR gains realizing the characteristic polynomial
/// `s (s^2 + delta1 s + delta0)`:
///
/// ```text
/// delta1 = gamma + eps1 + eps2 + eps k
/// delta0 = gamma (eps1 + eps2) + gamma eps k + eps1 eps h
/// ```
///
/// inverted for `(h, k)`. The map is linear and invertible.
pub fn gains_from_deltas<T: Scalar>(
    delta1: T,
    delta0: T,
    params: &ModelParams<T>,
) -> Result<SurfaceGains<T>> {
    if !(delta1.is_finite() && delta0.is_finite()) || delta1 <= T::zero() || delta0 <= T::zero() {
        return Err(Error::Stability(format!(
            "stability requires delta1, delta0 > 0 (got {delta1}, {delta0})"
        )));
    }
    let eps_sum = params.epsilon1 + params.epsilon2;
    let a = delta1 - (params.gamma + eps_sum);
    let b = delta0 - params.gamma * eps_sum;
    let k = a / params.epsilon;
    let h = (b - params.gamma * a) / (params.epsilon1 * params.epsilon);
    Ok(SurfaceGains::SecondOrder {
        h,
        k,
        delta1,
        delta0,
    })
}

/// Forward map `(h, k) -> (delta1, delta0)`; the algebraic inverse of
/// `gains_from_deltas`.
pub fn deltas_from_gains<T: Scalar>(h: T, k: T, params: &ModelParams<T>) -> (T, T) {
    let eps_sum = params.epsilon1 + params.epsilon2;
    let delta1 = params.gamma + eps_sum + params.epsilon * k;
    let delta0 =
        params.gamma * eps_sum + params.gamma * params.epsilon * k + params.epsilon1 * params.epsilon * h;
    (delta1, delta0)
}

/// Signed residual driving the switching: `lambda (i - i0) + i' + mu i''`.
/// Zero defines the sliding surface.
pub fn surface_residual<T: Scalar>(
    config: &ControllerConfig<T>,
    i: T,
    i_dot: T,
    i_ddot: Option<T>,
) -> T {
    let second = match i_ddot {
        Some(dd) => config.mu * dd,
        None => T::zero(),
    };
    config.lambda * (i - config.i_target) + i_dot + second
}

/// The sliding surface evaluated on state variables instead of measured
/// derivatives; used to cross-validate `surface_residual`, never for
/// control.
///
/// Substituting the model's expression for `I'` (and `I''`) shows these
/// equal the derivative forms identically: the SEIR/SAIR expressions equal
/// `surface_residual` with `mu = 0`, and the SEAIR expression equals
/// `delta0 (I - I0) + delta1 I' + I''`.
pub fn surface_residual_statespace<T: Scalar>(
    kind: ModelKind,
    gains: &SurfaceGains<T>,
    config: &ControllerConfig<T>,
    state: &State<T>,
    params: &ModelParams<T>,
) -> Result<T> {
    if state.kind != kind {
        return Err(Error::ShapeMismatch {
            expected: kind,
            state: state.kind,
        });
    }
    let i0 = config.i_target;
    match kind {
        ModelKind::Seir => Ok(params.epsilon * state.e
            + (config.lambda - params.gamma) * state.i
            - config.lambda * i0),
        ModelKind::Sair => Ok(params.epsilon1 * state.a
            + (config.lambda - params.gamma) * state.i
            - config.lambda * i0),
        ModelKind::Seair => {
            let (delta1, delta0) = match gains {
                SurfaceGains::SecondOrder { delta1, delta0, .. } => (*delta1, *delta0),
                SurfaceGains::FirstOrder { .. } => {
                    return Err(Error::Stability(
                        "SEAIR state-space residual needs second-order gains".into(),
                    ))
                }
            };
            let g = params.gamma;
            let e1 = params.epsilon1;
            let eps_sum = params.epsilon1 + params.epsilon2;
            Ok((delta0 - g * delta1 + g * g) * state.i
                + e1 * (delta1 - (g + eps_sum)) * state.a
                + e1 * params.epsilon * state.e
                - delta0 * i0)
        }
    }
}

/// One evaluation of the hysteresis law: leave freedom when the residual
/// exceeds `+phi`, leave lockdown when it drops below `-phi`, otherwise
/// keep the latched regime (ties included).
pub fn switch_decision<T: Scalar>(
    config: &ControllerConfig<T>,
    ctrl: &ControllerState<T>,
    residual: T,
    t: T,
) -> (Regime, ControllerState<T>) {
    let next = match ctrl.regime {
        Regime::Freedom if residual > config.phi => Regime::Lockdown,
        Regime::Lockdown if residual < -config.phi => Regime::Freedom,
        other => other,
    };
    let state = if next != ctrl.regime {
        ControllerState {
            regime: next,
            last_switch_time: t,
            switch_count: ctrl.switch_count + 1,
        }
    } else {
        *ctrl
    };
    (next, state)
}

/// Deviation coordinates of `state` from the `i0` fixed point, in the
/// order the reduced systems use: `[I - I0, W - W0]` for SEIR
/// (`W = E + I`), `[I - I0, A - A0]` for SAIR, `[I - I0, A - A0, E - E0]`
/// for SEAIR.
pub fn reduced_deviations<T: Scalar>(
    kind: ModelKind,
    params: &ModelParams<T>,
    state: &State<T>,
    i0: T,
) -> Result<Vec<T>> {
    if state.kind != kind {
        return Err(Error::ShapeMismatch {
            expected: kind,
            state: state.kind,
        });
    }
    let eq = equilibrium_state(kind, params, i0);
    Ok(match kind {
        ModelKind::Seir => {
            let w0 = (params.gamma + params.epsilon) * i0 / params.epsilon;
            vec![state.i - i0, (state.e + state.i) - w0]
        }
        ModelKind::Sair => vec![state.i - i0, state.a - eq.a],
        ModelKind::Seair => vec![state.i - i0, state.a - eq.a, state.e - eq.e],
    })
}

fn kf_row<T: Scalar>(kind: ModelKind, gains: &SurfaceGains<T>, params: &ModelParams<T>) -> Result<Vec<T>> {
    let g = params.gamma;
    match (kind, gains) {
        (ModelKind::Seir, SurfaceGains::FirstOrder { h }) => {
            Ok(vec![*h * (g + params.epsilon), -*h * params.epsilon])
        }
        (ModelKind::Sair, SurfaceGains::FirstOrder { h }) => {
            let q = g * (params.epsilon1 + params.epsilon2) / (g + params.epsilon1);
            Ok(vec![
                g * *h - q,
                -params.epsilon1 * *h + params.epsilon1 * (params.epsilon1 + params.epsilon2) / (g + params.epsilon1),
            ])
        }
        (ModelKind::Seair, SurfaceGains::SecondOrder { h, k, .. }) => {
            let eps_sum = params.epsilon1 + params.epsilon2;
            let q = g * eps_sum / (g + params.epsilon1);
            Ok(vec![
                g * *h - q,
                -params.epsilon1 * *h + *k * eps_sum - q,
                -params.epsilon * *k + params.epsilon,
            ])
        }
        _ => Err(Error::Stability(format!(
            "gain arity does not match model kind {kind:?}"
        ))),
    }
}

/// The input that keeps the reduced state exactly on the surface
/// (`K x' = 0`); a diagnostic only, since the real actuator is the binary
/// contact rate.
pub fn equivalent_input<T: Scalar>(
    kind: ModelKind,
    gains: &SurfaceGains<T>,
    params: &ModelParams<T>,
    reduced_state: &[T],
) -> Result<T> {
    let row = kf_row(kind, gains, params)?;
    if row.len() != reduced_state.len() {
        return Err(Error::domain(
            "equivalent_input",
            format!(
                "reduced state has {} coordinates, model needs {}",
                reduced_state.len(),
                row.len()
            ),
        ));
    }
    Ok(row
        .iter()
        .zip(reduced_state)
        .map(|(&c, &x)| c * x)
        .fold(T::zero(), |acc, term| acc + term))
}

/// Open-loop matrix `F` of the reduced deviation dynamics `x' = F x + g u`
/// with `g` the last unit vector; rows ordered as in `reduced_deviations`.
pub fn open_loop_matrix<T: Scalar>(kind: ModelKind, params: &ModelParams<T>) -> Vec<Vec<T>> {
    let g = params.gamma;
    let z = T::zero();
    match kind {
        ModelKind::Seir => vec![
            vec![-(g + params.epsilon), params.epsilon],
            vec![z, z],
        ],
        ModelKind::Sair => {
            let denom = g + params.epsilon1;
            let eps_sum = params.epsilon1 + params.epsilon2;
            vec![
                vec![-g, params.epsilon1],
                vec![g * eps_sum / denom, -params.epsilon1 * eps_sum / denom],
            ]
        }
        ModelKind::Seair => {
            let denom = g + params.epsilon1;
            let eps_sum = params.epsilon1 + params.epsilon2;
            let q = g * eps_sum / denom;
            vec![
                vec![-g, params.epsilon1, z],
                vec![z, -eps_sum, params.epsilon],
                vec![q, q, -params.epsilon],
            ]
        }
    }
}

/// Closed-loop matrix `P = F + g (K F)` obtained under the equivalent
/// input; its spectrum is `{0, -lambda}` (plus the second design root for
/// SEAIR).
pub fn closed_loop_matrix<T: Scalar>(
    kind: ModelKind,
    gains: &SurfaceGains<T>,
    params: &ModelParams<T>,
) -> Result<Vec<Vec<T>>> {
    let mut f = open_loop_matrix(kind, params);
    let row = kf_row(kind, gains, params)?;
    let last = f.len() - 1;
    for (dst, add) in f[last].iter_mut().zip(row) {
        *dst = *dst + add;
    }
    Ok(f)
}

/// Eigenvalues of a 2x2 matrix, returned with the larger real part first.
pub fn eigenvalues_2x2<T: Scalar>(m: &[Vec<T>]) -> (T, T) {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let four = T::c(4.0);
    let half = T::c(0.5);
    let disc = (tr * tr - four * det).max(T::zero()).sqrt();
    ((tr + disc) * half, (tr - disc) * half)
}

/// Coefficients `(delta1, delta0, det)` of the characteristic polynomial
/// `s^3 + delta1 s^2 + delta0 s - det` of a 3x3 matrix; for a valid SEAIR
/// closed loop the determinant term vanishes.
pub fn char_poly_3x3<T: Scalar>(m: &[Vec<T>]) -> (T, T, T) {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let minor = |i: usize, j: usize| {
        m[i][i] * m[j][j] - m[i][j] * m[j][i]
    };
    let minors = minor(0, 1) + minor(0, 2) + minor(1, 2);
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    (-tr, minors, det)
}
