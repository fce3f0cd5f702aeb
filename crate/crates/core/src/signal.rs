//! Measured-signal ingestion, smoothing, differentiation, and replay of
//! the switching law on estimated signals.
//!
//! Smoothing is local polynomial least squares (Savitzky-Golay): each
//! sample gets a fitted value and the analytic derivative of its local
//! polynomial, with shifted windows at the series ends. Closed-form
//! derivatives and no global smoothing penalty to tune.

use chrono::NaiveDate;
use std::io::{BufRead, BufReader, Read};

use crate::controller::{surface_residual, switch_decision, ControllerConfig, ControllerState, Regime};
use crate::error::{Error, Result};
use crate::model::ModelKind;
use crate::scalar::Scalar;

/// What a daily count series measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    DiagnosedInfected,
    Hospitalized,
    CriticalCare,
}

/// Daily epidemiological counts.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    pub start_date: NaiveDate,
    /// One count per day, gaps filled by linear interpolation.
    pub values: Vec<f64>,
    pub population: f64,
    pub kind: SeriesKind,
    /// Dates that were absent from the input and interpolated.
    pub interpolated: Vec<NaiveDate>,
}

impl DailySeries {
    pub fn validate(&self) -> Result<()> {
        if !self.population.is_finite() || self.population <= 0.0 {
            return Err(Error::validation("population", "must be positive"));
        }
        if let Some(v) = self.values.iter().find(|v| **v < 0.0 || !v.is_finite()) {
            return Err(Error::validation("values", format!("invalid count {v}")));
        }
        Ok(())
    }

    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.start_date + chrono::Days::new(index as u64)
    }
}

/// Parses a two-column `date,count` CSV (ISO-8601 dates, one row per day,
/// optional header). Missing days are linearly interpolated and flagged.
pub fn ingest_csv(
    source: impl Read,
    kind: SeriesKind,
    population: f64,
) -> Result<DailySeries> {
    let reader = BufReader::new(source);
    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut fields = trimmed.split(',');
        let date_field = fields.next().unwrap_or("").trim();
        let count_field = fields.next().unwrap_or("").trim();
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: line_no,
                detail: "expected exactly two columns `date,count`".into(),
            });
        }
        if idx == 0 && date_field.eq_ignore_ascii_case("date") {
            continue; // header
        }
        let date = NaiveDate::parse_from_str(date_field, "%Y-%m-%d").map_err(|e| Error::Parse {
            line: line_no,
            detail: format!("bad date `{date_field}`: {e}"),
        })?;
        let count: f64 = count_field.parse().map_err(|e| Error::Parse {
            line: line_no,
            detail: format!("bad count `{count_field}`: {e}"),
        })?;
        if count < 0.0 {
            return Err(Error::validation(
                format!("line {line_no}"),
                format!("negative count {count}"),
            ));
        }
        if let Some((prev_date, _)) = rows.last() {
            if date <= *prev_date {
                return Err(Error::Parse {
                    line: line_no,
                    detail: format!("dates must be strictly increasing ({prev_date} then {date})"),
                });
            }
        }
        rows.push((date, count));
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            detail: "no data rows".into(),
        });
    }

    let start_date = rows[0].0;
    let mut values = Vec::new();
    let mut interpolated = Vec::new();
    for pair in rows.windows(2) {
        let (d0, v0) = pair[0];
        let (d1, v1) = pair[1];
        values.push(v0);
        let gap = (d1 - d0).num_days();
        for step in 1..gap {
            let frac = step as f64 / gap as f64;
            values.push(v0 + frac * (v1 - v0));
            interpolated.push(d0 + chrono::Days::new(step as u64));
        }
    }
    values.push(rows.last().unwrap().1);

    let series = DailySeries {
        start_date,
        values,
        population,
        kind,
        interpolated,
    };
    series.validate()?;
    Ok(series)
}

/// Converts counts to infected fractions: `count * h_factor / population`.
/// `h_factor` is the infected-per-measured multiplier (for critical-care
/// series a lower bound around 50 applies; diagnosed counts may use 1).
pub fn scale_to_infected(series: &DailySeries, h_factor: f64) -> Result<Vec<f64>> {
    series.validate()?;
    if !h_factor.is_finite() || h_factor <= 0.0 {
        return Err(Error::Scaling(format!(
            "h_factor must be positive, got {h_factor}"
        )));
    }
    if series.kind == SeriesKind::CriticalCare && h_factor < 1.0 {
        return Err(Error::Scaling(
            "critical-care counts undercount infections; h_factor must be >= 1".into(),
        ));
    }
    let fractions: Vec<f64> = series
        .values
        .iter()
        .map(|v| v * h_factor / series.population)
        .collect();
    if let Some(bad) = fractions.iter().find(|f| **f > 1.0) {
        return Err(Error::Scaling(format!(
            "scaled fraction {bad} exceeds 1; check h_factor/population"
        )));
    }
    Ok(fractions)
}

/// Per-day estimates of the infected fraction and its rate of change.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedSignal<T> {
    /// Days since the first sample.
    pub times: Vec<T>,
    pub i_hat: Vec<T>,
    pub i_dot_hat: Vec<T>,
    pub window: usize,
    pub degree: usize,
}

/// Inverts a small symmetric positive-definite matrix by Gauss-Jordan
/// elimination with partial pivoting.
fn invert<T: Scalar>(mut a: Vec<Vec<T>>) -> Result<Vec<Vec<T>>> {
    let n = a.len();
    let mut inv: Vec<Vec<T>> = (0..n)
        .map(|r| (0..n).map(|c| if r == c { T::one() } else { T::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap())
            .unwrap();
        if a[pivot_row][col].abs() == T::zero() {
            return Err(Error::Sizing("singular smoothing design matrix".into()));
        }
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let pivot = a[col][col];
        for c in 0..n {
            a[col][c] = a[col][c] / pivot;
            inv[col][c] = inv[col][c] / pivot;
        }
        for r in 0..n {
            if r != col {
                let factor = a[r][col];
                for c in 0..n {
                    a[r][c] = a[r][c] - factor * a[col][c];
                    inv[r][c] = inv[r][c] - factor * inv[col][c];
                }
            }
        }
    }
    Ok(inv)
}

/// Least-squares weights for the fitted value and first derivative at
/// window offset `at` (window abscissae are `-m..=m`).
fn sg_weights<T: Scalar>(window: usize, degree: usize, at: T) -> Result<(Vec<T>, Vec<T>)> {
    let m = (window / 2) as isize;
    let xs: Vec<T> = (-m..=m).map(|j| T::from_isize(j).unwrap()).collect();
    let dim = degree + 1;
    // normal-equations matrix X^T X and pseudoinverse rows
    let mut xtx = vec![vec![T::zero(); dim]; dim];
    for x in &xs {
        let mut powers = vec![T::one(); dim];
        for k in 1..dim {
            powers[k] = powers[k - 1] * *x;
        }
        for r in 0..dim {
            for c in 0..dim {
                xtx[r][c] = xtx[r][c] + powers[r] * powers[c];
            }
        }
    }
    let inv = invert(xtx)?;
    // coefficient weights: B = (X^T X)^{-1} X^T, column per sample
    let mut value_w = vec![T::zero(); window];
    let mut deriv_w = vec![T::zero(); window];
    let mut at_pows = vec![T::one(); dim];
    for k in 1..dim {
        at_pows[k] = at_pows[k - 1] * at;
    }
    for (j, x) in xs.iter().enumerate() {
        let mut powers = vec![T::one(); dim];
        for k in 1..dim {
            powers[k] = powers[k - 1] * *x;
        }
        for k in 0..dim {
            // coefficient c_k weight for sample j
            let b_kj = (0..dim).fold(T::zero(), |acc, c| acc + inv[k][c] * powers[c]);
            value_w[j] = value_w[j] + at_pows[k] * b_kj;
            if k >= 1 {
                deriv_w[j] =
                    deriv_w[j] + T::from_usize(k).unwrap() * at_pows[k - 1] * b_kj;
            }
        }
    }
    Ok((value_w, deriv_w))
}

/// Fits a degree-`degree` polynomial in a sliding `window` (odd, in days)
/// around every sample and returns the fitted values with their analytic
/// first derivatives. Samples closer than half a window to either end use
/// the nearest full window evaluated off-center.
pub fn smooth_and_differentiate<T: Scalar>(
    fractions: &[T],
    window: usize,
    degree: usize,
) -> Result<SmoothedSignal<T>> {
    if window.is_multiple_of(2) {
        return Err(Error::Sizing(format!("window must be odd, got {window}")));
    }
    if window < degree + 2 {
        return Err(Error::Sizing(format!(
            "window {window} too small for degree {degree}; need >= degree + 2"
        )));
    }
    if fractions.len() < window {
        return Err(Error::Sizing(format!(
            "series length {} shorter than window {window}",
            fractions.len()
        )));
    }
    let n = fractions.len();
    let m = window / 2;
    let (center_v, center_d) = sg_weights::<T>(window, degree, T::zero())?;
    let dot = |w: &[T], seg: &[T]| {
        w.iter()
            .zip(seg)
            .fold(T::zero(), |acc, (wi, yi)| acc + *wi * *yi)
    };

    let mut i_hat = Vec::with_capacity(n);
    let mut i_dot_hat = Vec::with_capacity(n);
    for i in 0..n {
        let (seg, offset) = if i < m {
            (&fractions[0..window], i as isize - m as isize)
        } else if i >= n - m {
            (
                &fractions[n - window..n],
                i as isize - (n - 1 - m) as isize,
            )
        } else {
            (&fractions[i - m..i + m + 1], 0)
        };
        if offset == 0 {
            i_hat.push(dot(&center_v, seg));
            i_dot_hat.push(dot(&center_d, seg));
        } else {
            let (v, d) = sg_weights::<T>(window, degree, T::from_isize(offset).unwrap())?;
            i_hat.push(dot(&v, seg));
            i_dot_hat.push(dot(&d, seg));
        }
    }

    Ok(SmoothedSignal {
        times: (0..n).map(|k| T::from_usize(k).unwrap()).collect(),
        i_hat,
        i_dot_hat,
        window,
        degree,
    })
}

/// One replay decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayStep<T> {
    pub time: T,
    pub residual: T,
    pub regime: Regime,
}

/// Applies the switching law to an estimated signal at its own (daily)
/// cadence, starting from freedom. Second-derivative feedback is not
/// available from data, so `mu` must be zero.
pub fn replay_control<T: Scalar>(
    signal: &SmoothedSignal<T>,
    config: &ControllerConfig<T>,
) -> Result<Vec<ReplayStep<T>>> {
    if config.mu != T::zero() {
        return Err(Error::validation(
            "mu",
            "replay has no second-derivative estimate; mu must be 0",
        ));
    }
    config.validate(ModelKind::Seir)?;
    let mut ctrl = ControllerState::new();
    let mut steps = Vec::with_capacity(signal.times.len());
    for ((&t, &i), &i_dot) in signal
        .times
        .iter()
        .zip(&signal.i_hat)
        .zip(&signal.i_dot_hat)
    {
        let residual = surface_residual(config, i, i_dot, None);
        let (regime, next) = switch_decision(config, &ctrl, residual, t);
        ctrl = next;
        steps.push(ReplayStep {
            time: t,
            residual,
            regime,
        });
    }
    Ok(steps)
}
