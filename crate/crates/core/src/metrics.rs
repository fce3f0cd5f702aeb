//! Measurements over logged trajectories: cycle durations, deviation
//! percentages, duty cycles, herd and extinction times.

use crate::controller::Regime;
use crate::error::{Error, Result};
use crate::integrator::{detect_herd_crossing, Trajectory};
use crate::model::ModelParams;
use crate::scalar::Scalar;

/// Total infected fraction below which the epidemic counts as extinct...
pub const EXTINCTION_THRESHOLD: f64 = 1e-6;
/// ...provided it stays below for this many days.
pub const EXTINCTION_SUSTAIN_DAYS: f64 = 30.0;

/// One completed freedom/lockdown alternation, anchored at a freedom start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleRecord<T> {
    pub cycle_start: T,
    pub freedom_duration: T,
    pub lockdown_duration: T,
}

impl<T: Scalar> CycleRecord<T> {
    /// Lockdown share of the cycle.
    pub fn duty_cycle(&self) -> T {
        self.lockdown_duration / (self.freedom_duration + self.lockdown_duration)
    }
}

/// Cycles extracted from a trajectory plus a flag for degenerate inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleAnalysis<T> {
    pub cycles: Vec<CycleRecord<T>>,
    /// Set when fewer than two switch events followed the cutoff.
    pub insufficient_switches: bool,
}

/// Default transient cutoff: the time of the second switch event, which
/// discards the initial approach phase.
pub fn default_transient_cutoff<T: Scalar>(traj: &Trajectory<T>) -> T {
    traj.switch_events
        .get(1)
        .map(|e| e.time)
        .unwrap_or_else(T::zero)
}

/// Pairs switch events after `transient_cutoff` into completed cycles:
/// freedom start -> lockdown start -> next freedom start.
pub fn measure_cycles<T: Scalar>(traj: &Trajectory<T>, transient_cutoff: T) -> CycleAnalysis<T> {
    let events: Vec<_> = traj
        .switch_events
        .iter()
        .filter(|e| e.time >= transient_cutoff)
        .collect();
    let insufficient = events.len() < 2;
    let mut cycles = Vec::new();
    let mut idx = 0;
    while idx + 2 < events.len() {
        if events[idx].to == Regime::Freedom {
            let freedom_start = events[idx].time;
            let lockdown_start = events[idx + 1].time;
            let next_freedom = events[idx + 2].time;
            cycles.push(CycleRecord {
                cycle_start: freedom_start,
                freedom_duration: lockdown_start - freedom_start,
                lockdown_duration: next_freedom - lockdown_start,
            });
            idx += 2;
        } else {
            idx += 1;
        }
    }
    CycleAnalysis {
        cycles,
        insufficient_switches: insufficient,
    }
}

fn median<T: Scalar>(values: &mut [T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        Some(values[n / 2])
    } else {
        Some((values[n / 2 - 1] + values[n / 2]) * T::c(0.5))
    }
}

/// Median freedom/lockdown durations over the given cycles.
pub fn median_cycle<T: Scalar>(cycles: &[CycleRecord<T>]) -> Option<(T, T)> {
    let mut freedoms: Vec<T> = cycles.iter().map(|c| c.freedom_duration).collect();
    let mut lockdowns: Vec<T> = cycles.iter().map(|c| c.lockdown_duration).collect();
    Some((median(&mut freedoms)?, median(&mut lockdowns)?))
}

/// Steady-state reading: median over the last three completed cycles
/// before the herd crossing (or before the horizon when never crossed).
pub fn steady_cycle<T: Scalar>(
    cycles: &[CycleRecord<T>],
    herd_time: Option<T>,
) -> Option<(T, T)> {
    let eligible: Vec<CycleRecord<T>> = cycles
        .iter()
        .filter(|c| match herd_time {
            Some(t) => c.cycle_start + c.freedom_duration + c.lockdown_duration <= t,
            None => true,
        })
        .copied()
        .collect();
    let tail = &eligible[eligible.len().saturating_sub(3)..];
    median_cycle(tail)
}

/// Percentage deviation `100 max_t |I(t) - i0| / i0` over `t >= cutoff`.
pub fn max_deviation_pct<T: Scalar>(traj: &Trajectory<T>, i_target: T, cutoff: T) -> Result<T> {
    let mut max_dev = T::neg_infinity();
    for (t, st) in traj.times.iter().zip(&traj.states) {
        if *t >= cutoff {
            max_dev = max_dev.max((st.i - i_target).abs());
        }
    }
    if max_dev == T::neg_infinity() {
        return Err(Error::validation(
            "transient_cutoff",
            "cutoff excludes every logged sample",
        ));
    }
    Ok(T::c(100.0) * max_dev / i_target)
}

/// First instant a sustained extinction window starts: total infected
/// stays below `EXTINCTION_THRESHOLD` for `EXTINCTION_SUSTAIN_DAYS`.
pub fn detect_extinction<T: Scalar>(traj: &Trajectory<T>) -> Option<T> {
    let threshold = T::c(EXTINCTION_THRESHOLD);
    let sustain = T::c(EXTINCTION_SUSTAIN_DAYS);
    let mut window_start: Option<T> = None;
    for (t, st) in traj.times.iter().zip(&traj.states) {
        if st.total_infected() < threshold {
            let start = *window_start.get_or_insert(*t);
            if *t - start >= sustain {
                return Some(start);
            }
        } else {
            window_start = None;
        }
    }
    None
}

/// Everything the scenario engine reports about one run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport<T> {
    pub cycles: Vec<CycleRecord<T>>,
    pub steady_freedom: Option<T>,
    pub steady_lockdown: Option<T>,
    pub max_deviation_pct: T,
    pub peak_infected: T,
    pub duty_cycles: Vec<T>,
    pub herd_time: Option<T>,
    pub extinction_time: Option<T>,
    pub insufficient_switches: bool,
}

impl<T: Scalar> MetricsReport<T> {
    /// Measures a trajectory. `cutoff` defaults to the second switch event.
    pub fn from_trajectory(
        traj: &Trajectory<T>,
        params: &ModelParams<T>,
        i_target: T,
        cutoff: Option<T>,
    ) -> Result<Self> {
        let cutoff = cutoff.unwrap_or_else(|| default_transient_cutoff(traj));
        let analysis = measure_cycles(traj, cutoff);
        let herd_time = detect_herd_crossing(traj, traj.kind, params)?;
        let steady = steady_cycle(&analysis.cycles, herd_time);
        let duty_cycles = analysis.cycles.iter().map(|c| c.duty_cycle()).collect();
        let max_dev = max_deviation_pct(traj, i_target, cutoff)?;
        let peak = traj
            .times
            .iter()
            .zip(&traj.states)
            .filter(|(t, _)| **t >= cutoff)
            .map(|(_, st)| st.i)
            .fold(T::neg_infinity(), T::max);
        Ok(MetricsReport {
            cycles: analysis.cycles,
            steady_freedom: steady.map(|s| s.0),
            steady_lockdown: steady.map(|s| s.1),
            max_deviation_pct: max_dev,
            peak_infected: peak,
            duty_cycles,
            herd_time,
            extinction_time: detect_extinction(traj),
            insufficient_switches: analysis.insufficient_switches,
        })
    }
}
