//! TOML scenario configuration: the contract between the CLI and the
//! library. Key names here are stable; everything runs at f64.

use serde::{Deserialize, Serialize};

use crate::controller::ControllerConfig;
use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;
use crate::model::{ModelKind, ModelParams, State, VaccinationSchedule};
use crate::signal::SeriesKind;
use crate::sweep::{Scenario, SweepAxis, SweepSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelSection,
    pub controller: ControllerSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    pub initial: InitialSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vaccination: Option<VaccinationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vaccinate: Option<VaccinateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay: Option<ReplaySection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// `seir`, `sair`, or `seair`.
    pub kind: String,
    pub gamma: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub epsilon1: f64,
    #[serde(default)]
    pub epsilon2: f64,
    pub beta_freedom: f64,
    pub beta_lockdown: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    pub lambda: f64,
    pub phi: f64,
    #[serde(default)]
    pub mu: f64,
    pub i_target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub dt: f64,
    pub horizon: f64,
    pub record_stride: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        IntegratorSection {
            dt: 0.01,
            horizon: 400.0,
            record_stride: 10,
        }
    }
}

/// Initial state: either the `prevalence` shorthand (that fraction in each
/// infectious-side compartment of the model, remainder susceptible) or
/// explicit compartments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prevalence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VaccinationSection {
    pub start_time: f64,
    pub activation_delay: f64,
    pub daily_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// One of `rn`, `gamma`, `epsilon`, `epsilon1`, `epsilon2`,
    /// `vaccination_rate`; mutually exclusive with `grid`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub gamma: RangeSection,
    pub epsilon: RangeSection,
    #[serde(default = "default_grid_count")]
    pub count: usize,
}

fn default_grid_count() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSection {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VaccinateSection {
    /// Daily vaccination throughputs as population fractions per day.
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplaySection {
    pub population: f64,
    #[serde(default = "default_h_factor")]
    pub h_factor: f64,
    /// `diagnosed_infected`, `hospitalized`, or `critical_care`.
    #[serde(default = "default_series_kind")]
    pub series_kind: String,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_degree")]
    pub degree: usize,
    /// Dead-band used when replaying, defaulting to the controller's.
    /// Replaying a signal produced by the closed loop itself needs a value
    /// slightly inside the loop's: the loop clips its residual at the
    /// dead-band edges, so an equal threshold never retriggers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

fn default_h_factor() -> f64 {
    50.0
}

fn default_series_kind() -> String {
    "critical_care".into()
}

fn default_window() -> usize {
    7
}

fn default_degree() -> usize {
    3
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::validation("config", e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::validation("config", e.to_string()))
    }

    pub fn model_kind(&self) -> Result<ModelKind> {
        match self.model.kind.to_ascii_lowercase().as_str() {
            "seir" => Ok(ModelKind::Seir),
            "sair" => Ok(ModelKind::Sair),
            "seair" => Ok(ModelKind::Seair),
            other => Err(Error::validation(
                "model.kind",
                format!("unknown model kind `{other}` (expected seir|sair|seair)"),
            )),
        }
    }

    pub fn params(&self) -> ModelParams<f64> {
        ModelParams {
            gamma: self.model.gamma,
            epsilon: self.model.epsilon,
            epsilon1: self.model.epsilon1,
            epsilon2: self.model.epsilon2,
            beta_freedom: self.model.beta_freedom,
            beta_lockdown: self.model.beta_lockdown,
        }
    }

    pub fn controller(&self) -> ControllerConfig<f64> {
        ControllerConfig {
            lambda: self.controller.lambda,
            phi: self.controller.phi,
            mu: self.controller.mu,
            i_target: self.controller.i_target,
        }
    }

    pub fn integrator(&self) -> IntegratorConfig<f64> {
        IntegratorConfig {
            dt: self.integrator.dt,
            horizon: self.integrator.horizon,
            record_stride: self.integrator.record_stride,
        }
    }

    fn initial_state(&self, kind: ModelKind) -> Result<State<f64>> {
        let init = &self.initial;
        let explicit = [init.s, init.e, init.a, init.i, init.r]
            .iter()
            .any(Option::is_some);
        match (init.prevalence, explicit) {
            (Some(_), true) => Err(Error::validation(
                "initial",
                "give either `prevalence` or explicit compartments, not both",
            )),
            (Some(p), false) => {
                if !p.is_finite() || p <= 0.0 || p >= 1.0 {
                    return Err(Error::validation("initial.prevalence", "must be in (0, 1)"));
                }
                Ok(State::from_initial_prevalence(kind, p))
            }
            (None, true) => {
                let e = init.e.unwrap_or(0.0);
                let a = init.a.unwrap_or(0.0);
                let i = init.i.unwrap_or(0.0);
                let r = init.r.unwrap_or(0.0);
                let s = init.s.unwrap_or(1.0 - e - a - i - r);
                let state = State { kind, s, e, a, i, r };
                state.validate()?;
                Ok(state)
            }
            (None, false) => Err(Error::validation(
                "initial",
                "missing `prevalence` or explicit compartments",
            )),
        }
    }

    pub fn vaccination(&self) -> Option<VaccinationSchedule<f64>> {
        self.vaccination.as_ref().map(|v| VaccinationSchedule {
            start_time: v.start_time,
            activation_delay: v.activation_delay,
            daily_rate: v.daily_rate,
        })
    }

    pub fn sweep_spec(&self) -> Result<Option<SweepSpec<f64>>> {
        let Some(section) = &self.sweep else {
            return Ok(None);
        };
        match (&section.axis, &section.values, &section.grid) {
            (Some(axis), Some(values), None) => {
                let axis = match axis.to_ascii_lowercase().as_str() {
                    "rn" => SweepAxis::Rn,
                    "gamma" => SweepAxis::Gamma,
                    "epsilon" => SweepAxis::Epsilon,
                    "epsilon1" => SweepAxis::Epsilon1,
                    "epsilon2" => SweepAxis::Epsilon2,
                    "vaccination_rate" => SweepAxis::VaccinationRate,
                    other => {
                        return Err(Error::validation(
                            "sweep.axis",
                            format!("unknown axis `{other}`"),
                        ))
                    }
                };
                Ok(Some(SweepSpec {
                    axis,
                    values: values.clone(),
                }))
            }
            (None, None, Some(_)) => Ok(None),
            _ => Err(Error::validation(
                "sweep",
                "need either `axis` + `values` or a `grid` table",
            )),
        }
    }

    pub fn series_kind(&self) -> Result<SeriesKind> {
        let Some(replay) = &self.replay else {
            return Err(Error::validation("replay", "missing [replay] section"));
        };
        match replay.series_kind.to_ascii_lowercase().as_str() {
            "diagnosed_infected" => Ok(SeriesKind::DiagnosedInfected),
            "hospitalized" => Ok(SeriesKind::Hospitalized),
            "critical_care" => Ok(SeriesKind::CriticalCare),
            other => Err(Error::validation(
                "replay.series_kind",
                format!("unknown series kind `{other}`"),
            )),
        }
    }

    /// Builds the runnable scenario, validating every section.
    pub fn to_scenario(&self) -> Result<Scenario<f64>> {
        let kind = self.model_kind()?;
        let params = self.params();
        params.validate(kind)?;
        let controller = self.controller();
        controller.validate(kind)?;
        let integ = self.integrator();
        integ.validate()?;
        let init = self.initial_state(kind)?;
        let vaccination = self.vaccination();
        if let Some(v) = &vaccination {
            v.validate()?;
        }
        Ok(Scenario {
            kind,
            params,
            controller,
            vaccination,
            init,
            integ,
        })
    }

    /// Non-fatal setup diagnostics: currently, whether the two contact
    /// rates bracket the critical rate at the initial susceptible level.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Ok(scenario) = self.to_scenario() {
            if !scenario.params.beta_window_ok(scenario.kind, scenario.init.s) {
                out.push(format!(
                    "contact rates do not bracket the critical rate at S = {}: \
                     the lockdown/freedom pair cannot regulate the epidemic",
                    scenario.init.s
                ));
            }
        }
        out
    }

    /// The same configuration with all defaults materialized, so that a
    /// rerun from the serialized form reproduces this run exactly.
    pub fn effective(&self) -> Self {
        let mut cfg = self.clone();
        if let Some(replay) = &mut cfg.replay {
            replay.phi.get_or_insert(cfg.controller.phi);
        }
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NOMINAL: &str = r#"
[model]
kind = "seir"
gamma = 0.05
epsilon = 0.2
beta_freedom = 0.065
beta_lockdown = 0.01

[controller]
lambda = 0.2
phi = 1e-4
i_target = 0.002

[initial]
prevalence = 0.001
"#;

    #[test]
    fn nominal_config_parses_and_expands() {
        let cfg = ScenarioConfig::from_toml_str(NOMINAL).unwrap();
        let scenario = cfg.to_scenario().unwrap();
        assert_eq!(scenario.kind, ModelKind::Seir);
        assert_eq!(scenario.init.s, 0.998);
        assert_eq!(scenario.integ.dt, 0.01);
        assert_eq!(scenario.integ.horizon, 400.0);
        assert!(cfg.warnings().is_empty());
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = ScenarioConfig::from_toml_str(NOMINAL).unwrap().effective();
        let text = cfg.to_toml_string().unwrap();
        let reparsed = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(reparsed.to_scenario().unwrap(), cfg.to_scenario().unwrap());
    }

    #[test]
    fn explicit_initial_state() {
        let text = NOMINAL.replace(
            "[initial]\nprevalence = 0.001",
            "[initial]\ns = 0.996\ne = 0.002\ni = 0.002",
        );
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        let scenario = cfg.to_scenario().unwrap();
        assert_eq!(scenario.init.e, 0.002);
        assert_eq!(scenario.init.r, 0.0);
    }

    #[test]
    fn both_initial_styles_rejected() {
        let text = NOMINAL.replace(
            "[initial]\nprevalence = 0.001",
            "[initial]\nprevalence = 0.001\ni = 0.002",
        );
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        assert!(cfg.to_scenario().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{NOMINAL}\n[bogus]\nx = 1\n");
        assert!(ScenarioConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn sweep_section_forms() {
        let text = format!("{NOMINAL}\n[sweep]\naxis = \"rn\"\nvalues = [1.2, 1.3]\n");
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        let spec = cfg.sweep_spec().unwrap().unwrap();
        assert_eq!(spec.axis, SweepAxis::Rn);
        assert_eq!(spec.values, vec![1.2, 1.3]);

        let text = format!(
            "{NOMINAL}\n[sweep.grid]\ncount = 5\ngamma = {{ min = 0.03, max = 0.07 }}\nepsilon = {{ min = 0.1, max = 0.3 }}\n"
        );
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        assert!(cfg.sweep_spec().unwrap().is_none());
        assert_eq!(cfg.sweep.as_ref().unwrap().grid.as_ref().unwrap().count, 5);
    }

    #[test]
    fn beta_window_warning_fires() {
        let text = NOMINAL.replace("beta_lockdown = 0.01", "beta_lockdown = 0.06");
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.warnings().len(), 1);
    }

    #[test]
    fn invalid_mu_for_seir_fails_validation() {
        let text = NOMINAL.replace("phi = 1e-4", "phi = 1e-4\nmu = 0.5");
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        assert!(cfg.to_scenario().is_err());
    }
}
