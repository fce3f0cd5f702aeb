//! Parameter sweeps, robustness grids, and vaccination scenarios.
//!
//! Every cell is an independent job; execution order never affects the
//! assembled results (cells are keyed by index), so the engine is free to
//! run them on any number of threads.

use rayon::prelude::*;

use crate::controller::ControllerConfig;
use crate::error::{Error, Result};
use crate::integrator::{simulate, IntegratorConfig, Trajectory};
use crate::metrics::{default_transient_cutoff, measure_cycles, median_cycle, MetricsReport};
use crate::model::{ModelKind, ModelParams, State, VaccinationSchedule};
use crate::scalar::Scalar;

/// A fully specified closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario<T> {
    pub kind: ModelKind,
    pub params: ModelParams<T>,
    pub controller: ControllerConfig<T>,
    pub vaccination: Option<VaccinationSchedule<T>>,
    pub init: State<T>,
    pub integ: IntegratorConfig<T>,
}

impl<T: Scalar> Scenario<T> {
    pub fn run(&self) -> Result<Trajectory<T>> {
        simulate(
            self.kind,
            &self.params,
            &self.controller,
            self.vaccination.as_ref(),
            &self.init,
            &self.integ,
        )
    }

    pub fn metrics(&self, traj: &Trajectory<T>) -> Result<MetricsReport<T>> {
        MetricsReport::from_trajectory(traj, &self.params, self.controller.i_target, None)
    }

    pub fn run_with_metrics(&self) -> Result<(Trajectory<T>, MetricsReport<T>)> {
        let traj = self.run()?;
        let metrics = self.metrics(&traj)?;
        Ok((traj, metrics))
    }
}

/// The swept parameter of a single-axis sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Freedom-period reproduction number; sets `beta_freedom = RN * gamma`.
    Rn,
    Gamma,
    Epsilon,
    Epsilon1,
    Epsilon2,
    VaccinationRate,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Rn => "rn",
            SweepAxis::Gamma => "gamma",
            SweepAxis::Epsilon => "epsilon",
            SweepAxis::Epsilon1 => "epsilon1",
            SweepAxis::Epsilon2 => "epsilon2",
            SweepAxis::VaccinationRate => "vaccination_rate",
        }
    }
}

/// A single-axis sweep over a base scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec<T> {
    pub axis: SweepAxis,
    pub values: Vec<T>,
}

impl<T: Scalar> SweepSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::validation("sweep.values", "must be nonempty"));
        }
        Ok(())
    }

    /// The base scenario with one axis value substituted.
    pub fn apply(&self, base: &Scenario<T>, value: T) -> Scenario<T> {
        let mut scenario = *base;
        match self.axis {
            SweepAxis::Rn => scenario.params.beta_freedom = value * scenario.params.gamma,
            SweepAxis::Gamma => {
                // keep the freedom-period reproduction number of the base
                let rn = base.params.beta_freedom / base.params.gamma;
                scenario.params.gamma = value;
                scenario.params.beta_freedom = rn * value;
            }
            SweepAxis::Epsilon => scenario.params.epsilon = value,
            SweepAxis::Epsilon1 => scenario.params.epsilon1 = value,
            SweepAxis::Epsilon2 => scenario.params.epsilon2 = value,
            SweepAxis::VaccinationRate => {
                let mut schedule = scenario.vaccination.unwrap_or(VaccinationSchedule {
                    start_time: T::zero(),
                    activation_delay: T::zero(),
                    daily_rate: T::zero(),
                });
                schedule.daily_rate = value;
                scenario.vaccination = Some(schedule);
            }
        }
        scenario
    }
}

/// One sweep cell outcome; failures are recorded, not fatal.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub values: Vec<(&'static str, T)>,
    pub report: Option<MetricsReport<T>>,
    pub error: Option<String>,
}

/// Runs a single-axis sweep, one full metrics report per value.
pub fn run_sweep<T: Scalar + Send + Sync>(
    base: &Scenario<T>,
    spec: &SweepSpec<T>,
) -> Result<Vec<SweepRow<T>>> {
    spec.validate()?;
    Ok(spec
        .values
        .par_iter()
        .map(|&value| {
            let scenario = spec.apply(base, value);
            match scenario.run_with_metrics() {
                Ok((_, report)) => SweepRow {
                    values: vec![(spec.axis.name(), value)],
                    report: Some(report),
                    error: None,
                },
                Err(e) => SweepRow {
                    values: vec![(spec.axis.name(), value)],
                    report: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

/// Early steady cycle: median over the first three completed cycles after
/// the transient cutoff.
///
/// Reading cycles at a matched index keeps parameter sweeps comparable:
/// it isolates the parameter's effect from susceptible depletion (later
/// cycles stretch as S falls) and is invariant to extending the horizon.
pub fn early_steady_cycle<T: Scalar>(traj: &Trajectory<T>) -> Option<(T, T)> {
    let analysis = measure_cycles(traj, default_transient_cutoff(traj));
    let head = &analysis.cycles[..analysis.cycles.len().min(3)];
    median_cycle(head)
}

/// One reproduction-number sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct RnSweepPoint<T> {
    pub rn: T,
    pub steady_freedom: Option<T>,
    pub steady_lockdown: Option<T>,
    pub error: Option<String>,
}

/// Sweeps the freedom-period reproduction number (`beta_freedom = RN *
/// gamma`), reporting early steady cycle durations per point.
pub fn rn_sweep<T: Scalar + Send + Sync>(
    base: &Scenario<T>,
    rn_values: &[T],
) -> Result<Vec<RnSweepPoint<T>>> {
    if rn_values.is_empty() {
        return Err(Error::validation("rn_values", "must be nonempty"));
    }
    Ok(rn_values
        .par_iter()
        .map(|&rn| {
            let mut scenario = *base;
            scenario.params.beta_freedom = rn * scenario.params.gamma;
            match scenario.run() {
                Ok(traj) => {
                    let steady = early_steady_cycle(&traj);
                    RnSweepPoint {
                        rn,
                        steady_freedom: steady.map(|s| s.0),
                        steady_lockdown: steady.map(|s| s.1),
                        error: None,
                    }
                }
                Err(e) => RnSweepPoint {
                    rn,
                    steady_freedom: None,
                    steady_lockdown: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

/// One robustness-grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell<T> {
    pub gamma: T,
    pub epsilon: T,
    pub max_deviation_pct: Option<T>,
    pub error: Option<String>,
}

/// `count` evenly spaced values across `[lo, hi]`; the midpoint when
/// `count == 1`.
pub fn linspace<T: Scalar>(lo: T, hi: T, count: usize) -> Vec<T> {
    if count == 1 {
        return vec![(lo + hi) * T::c(0.5)];
    }
    let step = (hi - lo) / T::from_usize(count - 1).unwrap();
    (0..count)
        .map(|k| lo + step * T::from_usize(k).unwrap())
        .collect()
}

/// Runs the controller over a `grid_size x grid_size` grid of
/// `(gamma, epsilon)` model parameters with full per-cell reports. The
/// freedom contact rate tracks the base reproduction number
/// (`beta_freedom = RN_base * gamma`).
pub fn run_grid<T: Scalar + Send + Sync>(
    base: &Scenario<T>,
    gamma_range: (T, T),
    epsilon_range: (T, T),
    grid_size: usize,
) -> Result<Vec<SweepRow<T>>> {
    if grid_size == 0 {
        return Err(Error::validation("grid_size", "must be at least 1"));
    }
    let gammas = linspace(gamma_range.0, gamma_range.1, grid_size);
    let epsilons = linspace(epsilon_range.0, epsilon_range.1, grid_size);
    let rn_base = base.params.beta_freedom / base.params.gamma;
    let cells: Vec<(T, T)> = gammas
        .iter()
        .flat_map(|&g| epsilons.iter().map(move |&e| (g, e)))
        .collect();
    Ok(cells
        .par_iter()
        .map(|&(gamma, epsilon)| {
            let mut scenario = *base;
            scenario.params.gamma = gamma;
            scenario.params.epsilon = epsilon;
            scenario.params.beta_freedom = rn_base * gamma;
            let values = vec![("gamma", gamma), ("epsilon", epsilon)];
            match scenario.run_with_metrics() {
                Ok((_, report)) => SweepRow {
                    values,
                    report: Some(report),
                    error: None,
                },
                Err(e) => SweepRow {
                    values,
                    report: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

/// Deviation-per-cell view of `run_grid`.
pub fn robustness_grid<T: Scalar + Send + Sync>(
    base: &Scenario<T>,
    gamma_range: (T, T),
    epsilon_range: (T, T),
    grid_size: usize,
) -> Result<Vec<GridCell<T>>> {
    Ok(run_grid(base, gamma_range, epsilon_range, grid_size)?
        .into_iter()
        .map(|row| GridCell {
            gamma: row.values[0].1,
            epsilon: row.values[1].1,
            max_deviation_pct: row.report.as_ref().map(|r| r.max_deviation_pct),
            error: row.error,
        })
        .collect())
}

/// Per-rate outcome of a vaccination scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct VaccinationOutcome<T> {
    pub rate: T,
    pub report: Option<MetricsReport<T>>,
    pub error: Option<String>,
}

/// Runs one scenario per vaccination rate on the given schedule.
pub fn vaccination_scenarios<T: Scalar + Send + Sync>(
    base: &Scenario<T>,
    schedule: &VaccinationSchedule<T>,
    rates: &[T],
) -> Result<Vec<VaccinationOutcome<T>>> {
    if rates.is_empty() {
        return Err(Error::validation("rates", "must be nonempty"));
    }
    Ok(rates
        .par_iter()
        .map(|&rate| {
            let mut scenario = *base;
            scenario.vaccination = Some(VaccinationSchedule {
                daily_rate: rate,
                ..*schedule
            });
            match scenario.run_with_metrics() {
                Ok((_, report)) => VaccinationOutcome {
                    rate,
                    report: Some(report),
                    error: None,
                },
                Err(e) => VaccinationOutcome {
                    rate,
                    report: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

/// Cycle-duration change when the lockdown contact rate is raised to
/// `alt_beta_lockdown`: `(delta_freedom, delta_lockdown)` between early
/// steady cycles of the two runs (matched cycle index, so the comparison
/// is not confounded by susceptible depletion).
pub fn beta_lockdown_sensitivity<T: Scalar + Send + Sync>(
    base: &Scenario<T>,
    alt_beta_lockdown: T,
) -> Result<(T, T)> {
    let mut alt = *base;
    alt.params.beta_lockdown = alt_beta_lockdown;
    let base_traj = base.run()?;
    let alt_traj = alt.run()?;
    let (f0, l0) = early_steady_cycle(&base_traj).ok_or_else(|| {
        Error::validation("beta_lockdown_sensitivity", "base run produced no cycles")
    })?;
    let (f1, l1) = early_steady_cycle(&alt_traj).ok_or_else(|| {
        Error::validation("beta_lockdown_sensitivity", "alternate run produced no cycles")
    })?;
    Ok((f1 - f0, l1 - l0))
}
