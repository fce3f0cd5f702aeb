//! CSV writers for trajectories, metric reports, and replay timelines.
//! Column layouts are stable interfaces; floats print in Rust's shortest
//! round-trip form so outputs are deterministic.

use std::io::Write;

use chrono::NaiveDate;

use crate::error::Result;
use crate::integrator::Trajectory;
use crate::metrics::MetricsReport;
use crate::signal::{ReplayStep, SmoothedSignal};
use crate::sweep::SweepRow;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `t,S,E,A,I,R,regime,beta,residual`, one row per logged sample; the
/// compartments a model does not carry stay empty; regime is `F`/`L`.
pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory<f64>) -> Result<()> {
    writeln!(w, "t,S,E,A,I,R,regime,beta,residual")?;
    let has_e = traj.kind.has_exposed();
    let has_a = traj.kind.has_asymptomatic();
    for k in 0..traj.len() {
        let st = &traj.states[k];
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            traj.times[k],
            st.s,
            if has_e { st.e.to_string() } else { String::new() },
            if has_a { st.a.to_string() } else { String::new() },
            st.i,
            st.r,
            traj.regimes[k].code(),
            traj.betas[k],
            traj.residuals[k],
        )?;
    }
    Ok(())
}

/// One metrics row per run: `run_id,<axes...>,steady_freedom,
/// steady_lockdown,max_dev_pct,peak_I,herd_time,extinction_time`.
/// Failed cells keep their identifying columns and leave metrics empty.
pub fn write_metrics_csv<W: Write>(
    mut w: W,
    axis_names: &[&str],
    rows: &[SweepRow<f64>],
) -> Result<()> {
    write!(w, "run_id")?;
    for name in axis_names {
        write!(w, ",{name}")?;
    }
    writeln!(
        w,
        ",steady_freedom,steady_lockdown,max_dev_pct,peak_I,herd_time,extinction_time"
    )?;
    for (run_id, row) in rows.iter().enumerate() {
        write!(w, "{run_id}")?;
        for (_, value) in &row.values {
            write!(w, ",{value}")?;
        }
        match &row.report {
            Some(report) => writeln!(
                w,
                ",{},{},{},{},{},{}",
                opt(report.steady_freedom),
                opt(report.steady_lockdown),
                report.max_deviation_pct,
                report.peak_infected,
                opt(report.herd_time),
                opt(report.extinction_time),
            )?,
            None => writeln!(w, ",,,,,,")?,
        }
    }
    Ok(())
}

/// Single-run convenience wrapper around `write_metrics_csv`.
pub fn write_single_metrics_csv<W: Write>(w: W, report: &MetricsReport<f64>) -> Result<()> {
    let row = SweepRow {
        values: vec![],
        report: Some(report.clone()),
        error: None,
    };
    write_metrics_csv(w, &[], &[row])
}

/// `date,I_hat,I_dot_hat,residual,regime`, one row per replayed day.
pub fn write_replay_csv<W: Write>(
    mut w: W,
    start_date: NaiveDate,
    signal: &SmoothedSignal<f64>,
    steps: &[ReplayStep<f64>],
) -> Result<()> {
    writeln!(w, "date,I_hat,I_dot_hat,residual,regime")?;
    for (k, step) in steps.iter().enumerate() {
        let date = start_date + chrono::Days::new(k as u64);
        writeln!(
            w,
            "{},{},{},{},{}",
            date.format("%Y-%m-%d"),
            signal.i_hat[k],
            signal.i_dot_hat[k],
            step.residual,
            step.regime.code(),
        )?;
    }
    Ok(())
}

/// Daily `date,count` export of a trajectory's infected fraction scaled to
/// a measured series; the inverse of the replay ingestion path, used to
/// build synthetic replay fixtures.
pub fn write_daily_counts_csv<W: Write>(
    mut w: W,
    traj: &Trajectory<f64>,
    start_date: NaiveDate,
    population: f64,
    h_factor: f64,
) -> Result<()> {
    writeln!(w, "date,count")?;
    let mut day = 0u64;
    for (t, st) in traj.times.iter().zip(&traj.states) {
        // pick the sample on each whole day
        if (t - day as f64).abs() < traj.dt / 2.0 {
            let date = start_date + chrono::Days::new(day);
            let count = st.i * population / h_factor;
            writeln!(w, "{},{}", date.format("%Y-%m-%d"), count)?;
            day += 1;
        }
    }
    Ok(())
}
