//! Compartmental epidemic models: right-hand sides, equilibria, and
//! threshold quantities.
//!
//! Three model families are supported. All compartments are population
//! fractions summing to one, all rates are per day, and the contact rate
//! `beta` is the single actuated parameter.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which compartmental family a state or parameter set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Susceptible, exposed, infected, removed.
    Seir,
    /// Susceptible, asymptomatic, infected, removed.
    Sair,
    /// Susceptible, exposed, asymptomatic, infected, removed.
    Seair,
}

impl ModelKind {
    pub fn has_exposed(self) -> bool {
        matches!(self, ModelKind::Seir | ModelKind::Seair)
    }

    pub fn has_asymptomatic(self) -> bool {
        matches!(self, ModelKind::Sair | ModelKind::Seair)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Seir => "SEIR",
            ModelKind::Sair => "SAIR",
            ModelKind::Seair => "SEAIR",
        }
    }
}

/// Epidemiological rates plus the two-level contact rate.
///
/// Which of the transition rates are meaningful depends on the model kind:
/// `epsilon` applies to SEIR/SEAIR, `epsilon1`/`epsilon2` to SAIR/SEAIR.
/// Unused fields are ignored by `validate` and by the dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    /// Recovery rate of the infected class (1/days).
    pub gamma: T,
    /// Exposed -> next-class progression rate (SEIR/SEAIR).
    pub epsilon: T,
    /// Asymptomatic -> infected progression rate (SAIR/SEAIR).
    pub epsilon1: T,
    /// Asymptomatic direct-recovery rate (SAIR/SEAIR).
    pub epsilon2: T,
    /// Contact rate with no restrictions in place.
    pub beta_freedom: T,
    /// Contact rate under lockdown.
    pub beta_lockdown: T,
}

impl<T: Scalar> ModelParams<T> {
    /// Checks the rates required by `kind` are strictly positive and the
    /// lockdown contact rate sits below the freedom one.
    pub fn validate(&self, kind: ModelKind) -> Result<()> {
        let mut required: Vec<(&'static str, T)> = vec![("gamma", self.gamma)];
        if kind.has_exposed() {
            required.push(("epsilon", self.epsilon));
        }
        if kind.has_asymptomatic() {
            required.push(("epsilon1", self.epsilon1));
            required.push(("epsilon2", self.epsilon2));
        }
        required.push(("beta_freedom", self.beta_freedom));
        required.push(("beta_lockdown", self.beta_lockdown));
        for (name, value) in required {
            if !value.is_finite() || value <= T::zero() {
                return Err(Error::validation(
                    name,
                    format!("must be strictly positive, got {value}"),
                ));
            }
        }
        if self.beta_lockdown >= self.beta_freedom {
            return Err(Error::validation(
                "beta_lockdown",
                format!(
                    "must be below beta_freedom ({} >= {})",
                    self.beta_lockdown, self.beta_freedom
                ),
            ));
        }
        Ok(())
    }

    /// True when `beta_freedom > beta0(s) > beta_lockdown`, the window in
    /// which the two-level actuator can steer the epidemic at susceptible
    /// fraction `s`.
    pub fn beta_window_ok(&self, kind: ModelKind, s: T) -> bool {
        match critical_contact_rate(kind, self, s) {
            Ok(beta0) => self.beta_freedom > beta0 && beta0 > self.beta_lockdown,
            Err(_) => false,
        }
    }
}

/// Compartment fractions for one model kind.
///
/// Compartments absent from the kind are carried as exact zeros so that
/// the integrator can treat every state as a fixed-width vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State<T> {
    pub kind: ModelKind,
    pub s: T,
    pub e: T,
    pub a: T,
    pub i: T,
    pub r: T,
}

impl<T: Scalar> State<T> {
    pub fn seir(s: T, e: T, i: T, r: T) -> Self {
        State {
            kind: ModelKind::Seir,
            s,
            e,
            a: T::zero(),
            i,
            r,
        }
    }

    pub fn sair(s: T, a: T, i: T, r: T) -> Self {
        State {
            kind: ModelKind::Sair,
            s,
            e: T::zero(),
            a,
            i,
            r,
        }
    }

    pub fn seair(s: T, e: T, a: T, i: T, r: T) -> Self {
        State {
            kind: ModelKind::Seair,
            s,
            e,
            a,
            i,
            r,
        }
    }

    /// Default initial condition: `prevalence` in each infectious-side
    /// compartment the kind carries (E, A, I as applicable), remainder
    /// susceptible.
    pub fn from_initial_prevalence(kind: ModelKind, prevalence: T) -> Self {
        let z = T::zero();
        let e = if kind.has_exposed() { prevalence } else { z };
        let a = if kind.has_asymptomatic() { prevalence } else { z };
        let i = prevalence;
        let s = T::one() - e - a - i;
        State { kind, s, e, a, i, r: z }
    }

    /// Sum of all compartments, evaluated in a fixed association order.
    pub fn total(&self) -> T {
        (((self.s + self.e) + self.a) + self.i) + self.r
    }

    /// The infectious aggregate `W` whose sign of growth the critical
    /// contact rate controls: E+I for SEIR, A+I for SAIR/SEAIR.
    pub fn infectious_aggregate(&self) -> T {
        match self.kind {
            ModelKind::Seir => self.e + self.i,
            ModelKind::Sair | ModelKind::Seair => self.a + self.i,
        }
    }

    /// Everything not yet recovered or susceptible: E + A + I. Used by the
    /// extinction detector.
    pub fn total_infected(&self) -> T {
        (self.e + self.a) + self.i
    }

    /// Checks compartments lie in `[0, 1]`, sum to one within `1e-9`, and
    /// that compartments absent from the kind are exactly zero.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("S", self.s),
            ("E", self.e),
            ("A", self.a),
            ("I", self.i),
            ("R", self.r),
        ] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::validation(
                    name,
                    format!("compartment out of [0,1]: {v}"),
                ));
            }
        }
        if !self.kind.has_exposed() && self.e != T::zero() {
            return Err(Error::validation("E", "not a compartment of this model"));
        }
        if !self.kind.has_asymptomatic() && self.a != T::zero() {
            return Err(Error::validation("A", "not a compartment of this model"));
        }
        let drift = (self.total() - T::one()).abs();
        if drift > T::c(1e-9) {
            return Err(Error::validation(
                "state",
                format!("compartments sum to 1 + {drift:e}"),
            ));
        }
        Ok(())
    }
}

/// Time derivative of a state. `dr` closes the balance: it is defined as
/// the exact negation of the other components' sum, so `sum()` is zero to
/// the bit and mass is conserved by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative<T> {
    pub ds: T,
    pub de: T,
    pub da: T,
    pub di: T,
    pub dr: T,
}

impl<T: Scalar> Derivative<T> {
    fn closed(ds: T, de: T, da: T, di: T) -> Self {
        let dr = -(((ds + de) + da) + di);
        Derivative { ds, de, da, di, dr }
    }

    /// Sum of the components in the same association order used to close
    /// the balance; exactly zero for any `rhs` output.
    pub fn sum(&self) -> T {
        (((self.ds + self.de) + self.da) + self.di) + self.dr
    }
}

/// Right-hand side of the model ODEs at contact rate `beta` with
/// vaccination throughput `v` (moves mass from S to R).
pub fn rhs<T: Scalar>(
    kind: ModelKind,
    params: &ModelParams<T>,
    state: &State<T>,
    beta: T,
    v: T,
) -> Result<Derivative<T>> {
    if state.kind != kind {
        return Err(Error::ShapeMismatch {
            expected: kind,
            state: state.kind,
        });
    }
    debug_assert!(beta >= T::zero() && v >= T::zero());
    let z = T::zero();
    let d = match kind {
        ModelKind::Seir => {
            let infection = beta * state.s * state.i;
            let progression = params.epsilon * state.e;
            let recovery = params.gamma * state.i;
            Derivative::closed(
                -infection - v,
                infection - progression,
                z,
                progression - recovery,
            )
        }
        ModelKind::Sair => {
            let infection = beta * state.s * (state.a + state.i);
            let progression = params.epsilon1 * state.a;
            let direct_recovery = params.epsilon2 * state.a;
            let recovery = params.gamma * state.i;
            Derivative::closed(
                -infection - v,
                z,
                infection - (progression + direct_recovery),
                progression - recovery,
            )
        }
        ModelKind::Seair => {
            let infection = beta * state.s * (state.a + state.i);
            let incubation = params.epsilon * state.e;
            let progression = params.epsilon1 * state.a;
            let direct_recovery = params.epsilon2 * state.a;
            let recovery = params.gamma * state.i;
            Derivative::closed(
                -infection - v,
                infection - incubation,
                incubation - (progression + direct_recovery),
                progression - recovery,
            )
        }
    };
    Ok(d)
}

/// Reproduction number `beta / gamma` (valid near S ~ 1 at constant beta).
pub fn reproduction_number<T: Scalar>(beta: T, gamma: T) -> Result<T> {
    if !gamma.is_finite() || gamma <= T::zero() {
        return Err(Error::domain(
            "reproduction_number",
            format!("gamma must be positive, got {gamma}"),
        ));
    }
    Ok(beta / gamma)
}

/// Contact rate at which a nonzero infected equilibrium exists for the
/// given susceptible fraction: `gamma/S` for SEIR, and
/// `gamma (eps1+eps2) / ((gamma+eps1) S)` for SAIR/SEAIR.
pub fn critical_contact_rate<T: Scalar>(
    kind: ModelKind,
    params: &ModelParams<T>,
    s: T,
) -> Result<T> {
    if !s.is_finite() || s <= T::zero() {
        return Err(Error::domain(
            "critical_contact_rate",
            format!("susceptible fraction must be positive, got {s}"),
        ));
    }
    let numerator = match kind {
        ModelKind::Seir => params.gamma,
        ModelKind::Sair | ModelKind::Seair => {
            params.gamma * (params.epsilon1 + params.epsilon2) / (params.gamma + params.epsilon1)
        }
    };
    Ok(numerator / s)
}

/// Susceptible fraction below which full freedom can no longer grow the
/// infectious aggregate; solves `critical_contact_rate(kind, S) = beta_F`.
pub fn herd_threshold<T: Scalar>(kind: ModelKind, params: &ModelParams<T>) -> Result<T> {
    params.validate(kind)?;
    let beta0_at_one = critical_contact_rate(kind, params, T::one())?;
    Ok(beta0_at_one / params.beta_freedom)
}

/// Equilibrium values of the companion compartments for a target infected
/// fraction `i0` (S is not part of the fixed point; it keeps decreasing).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumState<T> {
    pub e: T,
    pub a: T,
    pub i: T,
}

pub fn equilibrium_state<T: Scalar>(
    kind: ModelKind,
    params: &ModelParams<T>,
    i0: T,
) -> EquilibriumState<T> {
    debug_assert!(i0 > T::zero());
    let z = T::zero();
    match kind {
        ModelKind::Seir => EquilibriumState {
            e: params.gamma * i0 / params.epsilon,
            a: z,
            i: i0,
        },
        ModelKind::Sair => EquilibriumState {
            e: z,
            a: params.gamma / params.epsilon1 * i0,
            i: i0,
        },
        ModelKind::Seair => EquilibriumState {
            e: params.gamma * (params.epsilon1 + params.epsilon2) * i0
                / (params.epsilon1 * params.epsilon),
            a: params.gamma / params.epsilon1 * i0,
            i: i0,
        },
    }
}

impl<T: Scalar> State<T> {
    /// Full state at susceptible fraction `s` with the companion
    /// compartments at their `i0` equilibrium; the remainder goes to R.
    pub fn at_equilibrium(kind: ModelKind, params: &ModelParams<T>, s: T, i0: T) -> Self {
        let eq = equilibrium_state(kind, params, i0);
        let r = T::one() - s - eq.e - eq.a - eq.i;
        State {
            kind,
            s,
            e: eq.e,
            a: eq.a,
            i: eq.i,
            r,
        }
    }
}

/// Minimal epidemic duration under the constraint `I(t) <= i0` with ideal
/// control and no transient: `(1 - S_herd) / (gamma i0)`.
pub fn epidemic_duration_bound<T: Scalar>(
    kind: ModelKind,
    params: &ModelParams<T>,
    i0: T,
) -> Result<T> {
    debug_assert!(i0 > T::zero());
    let s_herd = herd_threshold(kind, params)?;
    Ok((T::one() - s_herd) / (params.gamma * i0))
}

/// First (and for SEAIR second) time derivative of `I` implied by the
/// model equations at the current state.
///
/// The contact rate is accepted for interface symmetry with the residual
/// evaluation path but does not enter: for these families neither `I'`
/// nor the SEAIR `I''` depends on beta.
pub fn observable_derivatives<T: Scalar>(
    kind: ModelKind,
    params: &ModelParams<T>,
    state: &State<T>,
    _beta: T,
) -> Result<(T, Option<T>)> {
    if state.kind != kind {
        return Err(Error::ShapeMismatch {
            expected: kind,
            state: state.kind,
        });
    }
    match kind {
        ModelKind::Seir => Ok((params.epsilon * state.e - params.gamma * state.i, None)),
        ModelKind::Sair => Ok((params.epsilon1 * state.a - params.gamma * state.i, None)),
        ModelKind::Seair => {
            let i_dot = params.epsilon1 * state.a - params.gamma * state.i;
            let a_dot =
                params.epsilon * state.e - (params.epsilon1 + params.epsilon2) * state.a;
            let i_ddot = params.epsilon1 * a_dot - params.gamma * i_dot;
            Ok((i_dot, Some(i_ddot)))
        }
    }
}

/// A constant-rate vaccination campaign with a delayed onset of effect.
/// The input is active from `start_time + activation_delay` onward while
/// susceptibles remain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaccinationSchedule<T> {
    /// Day the campaign is administered.
    pub start_time: T,
    /// Days until administered doses take effect in the population.
    pub activation_delay: T,
    /// Fraction of the total population vaccinated per day.
    pub daily_rate: T,
}

impl<T: Scalar> VaccinationSchedule<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("start_time", self.start_time),
            ("activation_delay", self.activation_delay),
            ("daily_rate", self.daily_rate),
        ] {
            if !v.is_finite() || v < T::zero() {
                return Err(Error::validation(
                    name,
                    format!("must be nonnegative, got {v}"),
                ));
            }
        }
        Ok(())
    }

    /// Effective throughput at time `t` with susceptible fraction `s`.
    pub fn effective_rate(&self, t: T, s: T) -> T {
        if t >= self.start_time + self.activation_delay && s > T::zero() {
            self.daily_rate
        } else {
            T::zero()
        }
    }
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

    fn sair_params() -> ModelParams<f64> {
        ModelParams {
            gamma: 0.05,
            epsilon: 0.0,
            epsilon1: 0.2,
            epsilon2: 0.07,
            beta_freedom: 0.065,
            beta_lockdown: 0.01,
        }
    }

    fn seair_params() -> ModelParams<f64> {
        ModelParams {
            gamma: 0.05,
            epsilon: 0.3,
            epsilon1: 0.3,
            epsilon2: 0.07,
            beta_freedom: 0.065,
            beta_lockdown: 0.01,
        }
    }

    #[test]
    fn disease_free_equilibrium_has_zero_rhs() {
        let state = State::seir(1.0, 0.0, 0.0, 0.0);
        let d = rhs(ModelKind::Seir, &seir_params(), &state, 0.065, 0.0).unwrap();
        assert_eq!((d.ds, d.de, d.di, d.dr), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn seir_rhs_matches_direct_substitution() {
        // S=0.998, E=I=0.001, beta=0.065: infection term 0.065*0.998*0.001
        let state = State::seir(0.998, 0.001, 0.001, 0.0);
        let d = rhs(ModelKind::Seir, &seir_params(), &state, 0.065, 0.0).unwrap();
        let infection = 0.065 * 0.998 * 0.001;
        assert_relative_eq!(d.ds, -infection, max_relative = 1e-12);
        assert_relative_eq!(d.de, infection - 0.2 * 0.001, max_relative = 1e-12);
        assert_relative_eq!(d.di, 0.2 * 0.001 - 0.05 * 0.001, max_relative = 1e-12);
        assert_relative_eq!(d.dr, 0.05 * 0.001, max_relative = 1e-12);
    }

    #[test]
    fn sair_infected_flow_matches_substitution() {
        let state = State::sair(0.9, 0.01, 0.005, 0.085);
        let d = rhs(ModelKind::Sair, &sair_params(), &state, 0.065, 0.0).unwrap();
        assert_relative_eq!(d.di, 0.00175, max_relative = 1e-12);
    }

    #[test]
    fn rhs_conserves_mass_to_the_bit() {
        let cases = [
            (ModelKind::Seir, State::seir(0.9, 0.03, 0.02, 0.05), seir_params()),
            (ModelKind::Sair, State::sair(0.7, 0.1, 0.05, 0.15), sair_params()),
            (
                ModelKind::Seair,
                State::seair(0.6, 0.1, 0.1, 0.05, 0.15),
                seair_params(),
            ),
        ];
        for (kind, state, params) in cases {
            let d = rhs(kind, &params, &state, 0.0437, 0.0013).unwrap();
            assert_eq!(d.sum(), 0.0);
        }
    }

    #[test]
    fn rhs_conserves_mass_in_f32() {
        let params = ModelParams::<f32> {
            gamma: 0.05,
            epsilon: 0.2,
            epsilon1: 0.0,
            epsilon2: 0.0,
            beta_freedom: 0.065,
            beta_lockdown: 0.01,
        };
        let state = State::<f32>::seir(0.9, 0.03, 0.02, 0.05);
        let d = rhs(ModelKind::Seir, &params, &state, 0.065f32, 0.001f32).unwrap();
        assert_eq!(d.sum(), 0.0f32);
    }

    #[test]
    fn rhs_rejects_mismatched_state() {
        let state = State::sair(0.9, 0.01, 0.005, 0.085);
        let err = rhs(ModelKind::Seir, &seir_params(), &state, 0.065, 0.0).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { .. }));
    }

    #[test]
    fn vaccination_moves_mass_from_s_to_r() {
        let state = State::seir(0.998, 0.001, 0.001, 0.0);
        let base = rhs(ModelKind::Seir, &seir_params(), &state, 0.065, 0.0).unwrap();
        let vax = rhs(ModelKind::Seir, &seir_params(), &state, 0.065, 0.0008).unwrap();
        assert_relative_eq!(vax.ds, base.ds - 0.0008, max_relative = 1e-12);
        assert_relative_eq!(vax.dr, base.dr + 0.0008, max_relative = 1e-9);
        assert_eq!(vax.sum(), 0.0);
    }

    #[test]
    fn reproduction_number_examples() {
        assert_relative_eq!(reproduction_number(0.065, 0.05).unwrap(), 1.3);
        assert_eq!(reproduction_number(0.05, 0.05).unwrap(), 1.0);
        assert_relative_eq!(reproduction_number(0.01, 0.05).unwrap(), 0.2);
        assert!(reproduction_number(0.065, 0.0).is_err());
    }

    #[test]
    fn critical_contact_rate_examples() {
        assert_relative_eq!(
            critical_contact_rate(ModelKind::Seir, &seir_params(), 1.0).unwrap(),
            0.05
        );
        assert_relative_eq!(
            critical_contact_rate(ModelKind::Sair, &sair_params(), 1.0).unwrap(),
            0.054,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            critical_contact_rate(ModelKind::Seir, &seir_params(), 0.5).unwrap(),
            0.1
        );
        assert!(critical_contact_rate(ModelKind::Seir, &seir_params(), 0.0).is_err());
    }

    #[test]
    fn herd_threshold_examples() {
        assert_relative_eq!(
            herd_threshold(ModelKind::Seir, &seir_params()).unwrap(),
            1.0 / 1.3,
            max_relative = 1e-12
        );
        let mut p = seir_params();
        p.beta_freedom = 0.05 + 1e-12; // RN ~ 1 puts herd at S ~ 1
        assert_relative_eq!(
            herd_threshold(ModelKind::Seir, &p).unwrap(),
            1.0,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            herd_threshold(ModelKind::Sair, &sair_params()).unwrap(),
            0.054 / 0.065,
            max_relative = 1e-12
        );
    }

    #[test]
    fn equilibrium_state_examples() {
        let eq = equilibrium_state(ModelKind::Seir, &seir_params(), 0.002);
        assert_relative_eq!(eq.e, 0.0005, max_relative = 1e-12);

        let eq = equilibrium_state(ModelKind::Sair, &sair_params(), 0.002);
        assert_relative_eq!(eq.a, 0.0005, max_relative = 1e-12);

        let eq = equilibrium_state(ModelKind::Seair, &seair_params(), 0.002);
        assert_relative_eq!(eq.a, 0.002 / 6.0, max_relative = 1e-12);
        assert_relative_eq!(eq.e, 0.05 * 0.37 * 0.002 / 0.09, max_relative = 1e-12);
    }

    #[test]
    fn equilibrium_is_a_fixed_point_of_the_infective_chain() {
        for (kind, params) in [
            (ModelKind::Seir, seir_params()),
            (ModelKind::Sair, sair_params()),
            (ModelKind::Seair, seair_params()),
        ] {
            let s = 0.95;
            let beta0 = critical_contact_rate(kind, &params, s).unwrap();
            let state = State::at_equilibrium(kind, &params, s, 0.002);
            let d = rhs(kind, &params, &state, beta0, 0.0).unwrap();
            assert_abs_diff_eq!(d.di, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(d.de, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(d.da, 0.0, epsilon = 1e-15);
            assert!(d.ds < 0.0, "S keeps decreasing at the fixed point");
        }
    }

    #[test]
    fn epidemic_duration_bound_examples() {
        let t = epidemic_duration_bound(ModelKind::Seir, &seir_params(), 0.002).unwrap();
        assert_relative_eq!(t, (1.0 - 1.0 / 1.3) / (0.05 * 0.002), max_relative = 1e-12);
        assert_relative_eq!(t, 2307.69, max_relative = 1e-4);

        // doubling the target halves the bound
        let t2 = epidemic_duration_bound(ModelKind::Seir, &seir_params(), 0.004).unwrap();
        assert_relative_eq!(t2, t / 2.0, max_relative = 1e-12);

        let mut p = seir_params();
        p.beta_freedom = 0.05 + 1e-12;
        let t0 = epidemic_duration_bound(ModelKind::Seir, &p, 0.002).unwrap();
        assert_abs_diff_eq!(t0, 0.0, epsilon = 1e-4);
    }

    #[test]
    fn observable_derivatives_examples() {
        // at the SEIR equilibrium mix the flow is balanced
        let st = State::seir(0.95, 0.05 * 0.002 / 0.2, 0.002, 0.0475);
        let (i_dot, i_ddot) =
            observable_derivatives(ModelKind::Seir, &seir_params(), &st, 0.065).unwrap();
        assert_abs_diff_eq!(i_dot, 0.0, epsilon = 1e-15);
        assert!(i_ddot.is_none());

        let st = State::seir(0.9, 0.001, 0.001, 0.098);
        let (i_dot, _) =
            observable_derivatives(ModelKind::Seir, &seir_params(), &st, 0.065).unwrap();
        assert_relative_eq!(i_dot, 0.00015, max_relative = 1e-12);

        let params = seair_params();
        let st = State::at_equilibrium(ModelKind::Seair, &params, 0.9, 0.002);
        let (i_dot, i_ddot) =
            observable_derivatives(ModelKind::Seair, &params, &st, 0.065).unwrap();
        assert_abs_diff_eq!(i_dot, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(i_ddot.unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn initial_prevalence_expansion() {
        let st = State::<f64>::from_initial_prevalence(ModelKind::Seir, 0.001);
        assert_eq!((st.s, st.e, st.a, st.i, st.r), (0.998, 0.001, 0.0, 0.001, 0.0));
        let st = State::<f64>::from_initial_prevalence(ModelKind::Seair, 0.001);
        assert_eq!(st.s, 0.997);
        st.validate().unwrap();
    }

    #[test]
    fn params_validation() {
        let mut p = seir_params();
        assert!(p.validate(ModelKind::Seir).is_ok());
        // epsilon1 not required for SEIR even though it is zero
        assert!(p.validate(ModelKind::Sair).is_err());
        p.beta_lockdown = 0.07;
        assert!(p.validate(ModelKind::Seir).is_err());
    }

    #[test]
    fn vaccination_schedule_gating() {
        let sched = VaccinationSchedule {
            start_time: 60.0,
            activation_delay: 60.0,
            daily_rate: 0.0008,
        };
        sched.validate().unwrap();
        assert_eq!(sched.effective_rate(119.99, 0.9), 0.0);
        assert_eq!(sched.effective_rate(120.0, 0.9), 0.0008);
        assert_eq!(sched.effective_rate(500.0, 0.0), 0.0);
    }

    #[test]
    fn state_validation_bounds() {
        assert!(State::seir(0.5, 0.25, 0.25, 0.0).validate().is_ok());
        assert!(State::seir(0.5, 0.2, 0.2, 0.0).validate().is_err()); // sum 0.9
        assert!(State::seir(-0.1, 0.55, 0.55, 0.0).validate().is_err());
        let bad = State {
            kind: ModelKind::Seir,
            s: 0.5,
            e: 0.2,
            a: 0.1,
            i: 0.1,
            r: 0.1,
        };
        assert!(bad.validate().is_err()); // A present in SEIR
    }
}
