//! Daily return curves on a fixed intraday grid.
//!
//! Prices are sampled on a regular grid, converted to percent log-returns
//! and cut into days. A [`ReturnCurvePanel`] holds the resulting curves and
//! optionally the mean curve removed by [`demean_panel`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;

pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    /// Unix seconds, UTC.
    pub timestamp: i64,
    pub price: f64,
}

impl PricePoint {
    pub fn new(timestamp: i64, price: f64) -> Self {
        PricePoint { timestamp, price }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnCurve {
    /// 1-based position of the day in the panel.
    pub day_index: usize,
    /// Unix seconds of the day boundary.
    pub day_start: i64,
    /// Percent log-returns, one per grid interval.
    pub values: Vec<f64>,
    /// Interval end points as fractions of the day, strictly increasing in (0, 1].
    pub grid: Vec<f64>,
}

/// Intraday grid labels `(m + 1) / T` for `m = 0..T`.
pub fn day_grid(t: usize) -> Vec<f64> {
    (0..t).map(|m| (m + 1) as f64 / t as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillPolicy {
    /// Carry the last observed price onto empty or off-grid points.
    #[default]
    ForwardFill,
    /// Every grid point must carry an observation and nothing may be off-grid.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Grid step in seconds; must divide 24h.
    pub grid_step: i64,
    pub fill: FillPolicy,
    /// Day boundary offset from UTC midnight, in whole grid steps.
    pub day_offset_steps: i64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions { grid_step: 3600, fill: FillPolicy::ForwardFill, day_offset_steps: 0 }
    }
}

/// Provenance of an ingested panel.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FillInfo {
    pub policy: FillPolicy,
    /// Grid points inside the kept days that had no exact observation.
    pub filled_points: usize,
    pub dropped_days: usize,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub curves: Vec<ReturnCurve>,
    pub fill: FillInfo,
}

/// Convert a price series into daily return curves.
///
/// The return labelled `m` on a day covers the grid interval starting
/// `m` steps after the day boundary, so the first return of a day is taken
/// against the price at the boundary (the previous day's close).
pub fn compute_returns(prices: &[PricePoint], opts: &IngestOptions) -> Result<Ingested> {
    let step = opts.grid_step;
    if step <= 0 || SECONDS_PER_DAY % step != 0 {
        return Err(Error::BadGridStep(step));
    }
    let t = (SECONDS_PER_DAY / step) as usize;
    for (i, p) in prices.iter().enumerate() {
        if !(p.price > 0.0) || !p.price.is_finite() {
            return Err(Error::NonPositivePrice { timestamp: p.timestamp, price: p.price });
        }
        if i > 0 && p.timestamp <= prices[i - 1].timestamp {
            return Err(Error::UnorderedTimestamps { timestamp: p.timestamp });
        }
    }
    if prices.len() < 2 {
        return Err(Error::NoCompleteDays);
    }
    let offset = opts.day_offset_steps * step;
    let on_grid = |ts: i64| (ts - offset).rem_euclid(step) == 0;
    if opts.fill == FillPolicy::Strict {
        if let Some(p) = prices.iter().find(|p| !on_grid(p.timestamp)) {
            return Err(Error::GridMisaligned { timestamp: p.timestamp, step });
        }
    }

    let first = prices[0].timestamp;
    let last = prices[prices.len() - 1].timestamp;
    // first day boundary at or after the first observation
    let day0 = offset + (first - offset + SECONDS_PER_DAY - 1).div_euclid(SECONDS_PER_DAY) * SECONDS_PER_DAY;
    let mut curves = Vec::new();
    let mut filled_points = 0;
    let mut cursor = 0usize; // index of last price with timestamp <= current grid point
    let mut day_start = day0;
    let mut day_index = 0;
    let grid = day_grid(t);

    while day_start + SECONDS_PER_DAY <= last {
        let day_end = day_start + SECONDS_PER_DAY;
        let observed = prices[cursor..]
            .iter()
            .skip_while(|p| p.timestamp < day_start)
            .take_while(|p| p.timestamp < day_end)
            .count();
        if observed < 2 {
            return Err(Error::EmptyDay { day_start });
        }
        let mut levels = Vec::with_capacity(t + 1);
        for m in 0..=t {
            let g = day_start + m as i64 * step;
            while cursor + 1 < prices.len() && prices[cursor + 1].timestamp <= g {
                cursor += 1;
            }
            let p = prices[cursor];
            if p.timestamp != g {
                if opts.fill == FillPolicy::Strict {
                    return Err(Error::GridGap { timestamp: g });
                }
                if m > 0 {
                    filled_points += 1;
                }
            }
            levels.push(p.price.ln());
        }
        // leave the cursor at the boundary so the next day can re-read it
        day_index += 1;
        let values = levels.windows(2).map(|w| 100.0 * (w[1] - w[0])).collect();
        curves.push(ReturnCurve { day_index, day_start, values, grid: grid.clone() });
        day_start = day_end;
    }
    if curves.is_empty() {
        return Err(Error::NoCompleteDays);
    }
    let span_days = (last - first) / SECONDS_PER_DAY + 1;
    let dropped_days = (span_days as usize).saturating_sub(curves.len());
    Ok(Ingested { curves, fill: FillInfo { policy: opts.fill, filled_points, dropped_days } })
}

/// Percent log-returns between consecutive grid points over the whole series,
/// without cutting into days.
pub fn flat_returns(prices: &[PricePoint], opts: &IngestOptions) -> Result<Vec<f64>> {
    let ing = compute_returns(prices, opts)?;
    Ok(ing.curves.into_iter().flat_map(|c| c.values).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnCurvePanel {
    curves: Vec<ReturnCurve>,
    demeaned: bool,
    mean_curve: Option<Vec<f64>>,
    /// Grid step in seconds (0 when unknown, e.g. synthetic panels).
    pub grid_step: i64,
    pub fill: Option<FillInfo>,
}

impl ReturnCurvePanel {
    pub fn new(curves: Vec<ReturnCurve>, grid_step: i64) -> Result<Self> {
        if let Some(first) = curves.first() {
            if first.grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::GridMismatch);
            }
            for c in &curves {
                if c.grid != first.grid || c.values.len() != first.grid.len() {
                    return Err(Error::GridMismatch);
                }
            }
        }
        Ok(ReturnCurvePanel { curves, demeaned: false, mean_curve: None, grid_step, fill: None })
    }

    /// Panel from row vectors on the default grid `(m+1)/T`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let t = rows.first().map_or(0, |r| r.len());
        let grid = day_grid(t);
        let curves = rows
            .into_iter()
            .enumerate()
            .map(|(i, values)| ReturnCurve {
                day_index: i + 1,
                day_start: i as i64 * SECONDS_PER_DAY,
                values,
                grid: grid.clone(),
            })
            .collect();
        Self::new(curves, 0)
    }

    pub fn from_ingested(ing: Ingested, grid_step: i64) -> Result<Self> {
        let mut p = Self::new(ing.curves, grid_step)?;
        p.fill = Some(ing.fill);
        Ok(p)
    }

    /// Rebuild a demeaned panel from stored parts (used by deserializers).
    pub fn from_parts(curves: Vec<ReturnCurve>, grid_step: i64, mean_curve: Option<Vec<f64>>) -> Result<Self> {
        let mut p = Self::new(curves, grid_step)?;
        if let Some(m) = mean_curve {
            if m.len() != p.t() {
                return Err(Error::GridMismatch);
            }
            p.demeaned = true;
            p.mean_curve = Some(m);
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.curves.len()
    }

    pub fn t(&self) -> usize {
        self.curves.first().map_or(0, |c| c.values.len())
    }

    pub fn curves(&self) -> &[ReturnCurve] {
        &self.curves
    }

    pub fn grid(&self) -> &[f64] {
        self.curves.first().map_or(&[], |c| &c.grid)
    }

    pub fn is_demeaned(&self) -> bool {
        self.demeaned
    }

    pub fn mean_curve(&self) -> Option<&[f64]> {
        self.mean_curve.as_deref()
    }

    /// `N x T` matrix of curve values.
    pub fn matrix(&self) -> Mat {
        Mat::from_fn(self.n(), self.t(), |i, t| self.curves[i].values[t])
    }

    /// Sub-panel of days `range` (not demeaned, mean discarded).
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        let curves =
            self.curves[range].iter().enumerate().map(|(i, c)| ReturnCurve { day_index: i + 1, ..c.clone() }).collect();
        Self::new(curves, self.grid_step)
    }

    /// Values with the stored mean curve added back.
    pub fn restored(&self) -> Vec<Vec<f64>> {
        let zero = vec![0.0; self.t()];
        let m = self.mean_curve.as_deref().unwrap_or(&zero);
        self.curves.iter().map(|c| c.values.iter().zip(m).map(|(v, mu)| v + mu).collect()).collect()
    }

    /// Concatenated returns of all days in order.
    pub fn flatten(&self) -> Vec<f64> {
        self.curves.iter().flat_map(|c| c.values.iter().copied()).collect()
    }
}

/// Subtract the pointwise sample mean across days.
pub fn demean_panel(panel: &ReturnCurvePanel) -> Result<ReturnCurvePanel> {
    if panel.demeaned {
        return Err(Error::AlreadyDemeaned);
    }
    let n = panel.n();
    let t = panel.t();
    let mut mean = vec![0.0; t];
    for c in &panel.curves {
        for (m, v) in mean.iter_mut().zip(&c.values) {
            *m += v;
        }
    }
    if n > 0 {
        mean.iter_mut().for_each(|m| *m /= n as f64);
    }
    let curves = panel
        .curves
        .iter()
        .map(|c| ReturnCurve { values: c.values.iter().zip(&mean).map(|(v, m)| v - m).collect(), ..c.clone() })
        .collect();
    Ok(ReturnCurvePanel {
        curves,
        demeaned: true,
        mean_curve: Some(mean),
        grid_step: panel.grid_step,
        fill: panel.fill.clone(),
    })
}
