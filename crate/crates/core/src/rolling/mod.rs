//! Intraday forecasting of the unobserved tail of the current day.
//!
//! Two panels are cut from the flat return sequence. Target curves are the
//! ordinary days `1..N-1`. Auxiliary curves are the same days shifted back by
//! `k` grid steps, so the auxiliary curve of the current day `N` is complete
//! and ends with its last observed return. Scores of the target panel are
//! regressed on scores of the auxiliary panel, and the current day's
//! auxiliary scores give the forecast of its target curve.

mod regression;

pub use regression::{fit_cross_regression, penalty_grid, select_penalty, CrossRegressionFit, Estimator};

use serde::{Deserialize, Serialize};

use crate::curves::{day_grid, demean_panel, ReturnCurve, ReturnCurvePanel};
use crate::error::{Error, Result};
use crate::eval;
use crate::fpca::{fit_fpca, FpcaOptions};
use crate::par::Exec;

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedPanelPair {
    /// `N - 1` demeaned complete days.
    pub target_panel: ReturnCurvePanel,
    /// `N` demeaned curves shifted back by `k` steps; the last is the current day.
    pub aux_panel: ReturnCurvePanel,
    pub k: usize,
    pub overlap: usize,
    /// Raw auxiliary and target curves before demeaning.
    pub aux_raw: Vec<Vec<f64>>,
    pub target_raw: Vec<Vec<f64>>,
}

impl ShiftedPanelPair {
    pub fn n(&self) -> usize {
        self.aux_panel.n()
    }

    pub fn t(&self) -> usize {
        self.aux_panel.t()
    }

    /// Raw auxiliary curve `d` ends with the first `T - k` returns of raw
    /// target curve `d`.
    pub fn overlap_holds(&self) -> bool {
        let (t, k) = (self.t(), self.k);
        self.target_raw.iter().zip(&self.aux_raw).all(|(b, a)| a[k..] == b[..t - k])
    }
}

fn panel_of(rows: &[Vec<f64>], grid: Vec<f64>) -> Result<ReturnCurvePanel> {
    let curves = rows
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, values)| ReturnCurve { day_index: i + 1, day_start: i as i64, values, grid: grid.clone() })
        .collect();
    demean_panel(&ReturnCurvePanel::new(curves, 0)?)
}

/// Cut the last `n_days` days out of `returns`, whose final element is the
/// latest observed return of the current (incomplete) day.
pub fn build_shifted_panels(returns: &[f64], t: usize, k: usize, n_days: usize) -> Result<ShiftedPanelPair> {
    if k == 0 || k >= t {
        return Err(Error::BadHorizon { k, t });
    }
    if n_days < 3 {
        return Err(Error::InsufficientData { need: 3 * t, have: returns.len() });
    }
    let need = n_days * t;
    if returns.len() < need {
        return Err(Error::InsufficientData { need, have: returns.len() });
    }
    let start_n = returns.len() - (t - k);
    let start = |d: usize| start_n - (n_days - 1 - d) * t;
    let aux_rows: Vec<Vec<f64>> = (0..n_days).map(|d| returns[start(d) - k..start(d) - k + t].to_vec()).collect();
    let target_rows: Vec<Vec<f64>> = (0..n_days - 1).map(|d| returns[start(d)..start(d) + t].to_vec()).collect();
    let grid = day_grid(t);
    let shifted: Vec<f64> = grid.iter().map(|g| g - k as f64 / t as f64).collect();
    Ok(ShiftedPanelPair {
        target_panel: panel_of(&target_rows, grid)?,
        aux_panel: panel_of(&aux_rows, shifted)?,
        k,
        overlap: t - k,
        aux_raw: aux_rows,
        target_raw: target_rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingForecast {
    /// Forecast of the last `k` returns of the current day.
    pub tail: Vec<f64>,
    pub full_curve: Vec<f64>,
    /// Number of components used in both panels.
    #[serde(rename = "J")]
    pub j: usize,
    pub fit: CrossRegressionFit,
}

/// FPCA on both panels, score regression, and reconstruction of the current day.
pub fn rolling_forecast(
    pair: &ShiftedPanelPair,
    delta: f64,
    estimator: Estimator,
    penalty: f64,
) -> Result<RollingForecast> {
    let opts = FpcaOptions { delta, ..Default::default() };
    let aux = fit_fpca(&pair.aux_panel, &opts)?;
    let target = fit_fpca(&pair.target_panel, &opts)?;
    let j = aux.j.min(target.j_max());
    let n = pair.n();
    let alpha = aux.scores.columns(0, j).into_owned();
    let beta = target.scores.columns(0, j).into_owned();
    let fit = fit_cross_regression(&alpha.rows(0, n - 1).into_owned(), &beta, estimator, penalty)?;
    let current: Vec<f64> = alpha.row(n - 1).iter().copied().collect();
    let full_curve = target.curve_from_scores(&fit.predict(&current));
    let tail = full_curve[pair.t() - pair.k..].to_vec();
    Ok(RollingForecast { tail, full_curve, j, fit })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Penalty {
    Fixed(f64),
    /// Five-fold cross-validation over [`penalty_grid`] at every origin.
    CrossValidated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingConfig {
    pub t: usize,
    pub k: usize,
    /// Number of days `N` per fit, including the current day.
    pub window: usize,
    pub delta: f64,
    pub estimator: Estimator,
    pub penalty: Penalty,
    /// Number of forecast origins, one per day at the end of the sample.
    pub n_forecasts: usize,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for RollingConfig {
    fn default() -> Self {
        RollingConfig {
            t: 24,
            k: 1,
            window: 100,
            delta: 0.85,
            estimator: Estimator::Ols,
            penalty: Penalty::Fixed(0.0),
            n_forecasts: 200,
            exec: Exec::default(),
        }
    }
}

impl RollingConfig {
    fn penalty_for(&self, pair: &ShiftedPanelPair) -> Result<f64> {
        match self.penalty {
            Penalty::Fixed(p) => Ok(p),
            Penalty::CrossValidated => {
                let opts = FpcaOptions { delta: self.delta, ..Default::default() };
                let aux = fit_fpca(&pair.aux_panel, &opts)?;
                let target = fit_fpca(&pair.target_panel, &opts)?;
                let j = aux.j.min(target.j_max());
                let n = pair.n();
                let alpha = aux.scores.view((0, 0), (n - 1, j)).into_owned();
                let beta = target.scores.columns(0, j).into_owned();
                select_penalty(&alpha, &beta, self.estimator, &penalty_grid(), 5)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingOrigin {
    /// 0-based day whose tail is forecast.
    pub day: usize,
    /// Time of the last observed return, when day starts are known.
    pub origin_timestamp: Option<i64>,
    pub forecast: Vec<f64>,
    pub realized: Vec<f64>,
    pub penalty: f64,
    pub j: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingReport {
    pub config: RollingConfig,
    pub origins: Vec<RollingOrigin>,
    pub rmse: f64,
    pub mae: f64,
    pub sign_rate: f64,
    pub failures: Vec<(usize, String)>,
}

/// Forecast the last `k` returns of each of the last `n_forecasts` days.
///
/// `returns` holds complete days back to back. `day_starts`, when given,
/// has one Unix timestamp per day and is used for origin timestamps.
pub fn rolling_backtest(
    returns: &[f64],
    day_starts: Option<&[i64]>,
    grid_step: i64,
    cfg: &RollingConfig,
) -> Result<RollingReport> {
    let t = cfg.t;
    if t == 0 || returns.len() % t != 0 {
        return Err(Error::Precondition(format!("{} returns do not form whole days of {t}", returns.len())));
    }
    if cfg.k == 0 || cfg.k >= t {
        return Err(Error::BadHorizon { k: cfg.k, t });
    }
    let days = returns.len() / t;
    if days < cfg.window + cfg.n_forecasts {
        return Err(Error::InsufficientData { need: (cfg.window + cfg.n_forecasts) * t, have: returns.len() });
    }
    let first = days - cfg.n_forecasts;
    let observed = t - cfg.k;
    let results = cfg.exec.map(cfg.n_forecasts, |i| {
        let day = first + i;
        let end = day * t + observed;
        let run = || -> Result<RollingOrigin> {
            let pair = build_shifted_panels(&returns[..end], t, cfg.k, cfg.window)?;
            let penalty = cfg.penalty_for(&pair)?;
            let f = rolling_forecast(&pair, cfg.delta, cfg.estimator, penalty)?;
            Ok(RollingOrigin {
                day,
                origin_timestamp: day_starts.map(|s| s[day] + observed as i64 * grid_step),
                forecast: f.tail,
                realized: returns[end..(day + 1) * t].to_vec(),
                penalty,
                j: f.j,
            })
        };
        (day, run())
    });
    let mut origins = Vec::new();
    let mut failures = Vec::new();
    for (day, r) in results {
        match r {
            Ok(o) => origins.push(o),
            Err(e) => {
                log::warn!("rolling origin {day}: {e}");
                failures.push((day, e.to_string()));
            }
        }
    }
    if origins.is_empty() {
        return Err(Error::InsufficientData { need: 1, have: 0 });
    }
    let f: Vec<f64> = origins.iter().flat_map(|o| o.forecast.iter().copied()).collect();
    let r: Vec<f64> = origins.iter().flat_map(|o| o.realized.iter().copied()).collect();
    Ok(RollingReport {
        config: cfg.clone(),
        rmse: eval::rmse(&f, &r)?,
        mae: eval::mae(&f, &r)?,
        sign_rate: eval::sign_rate(&f, &r)?,
        origins,
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowScore {
    pub window: usize,
    pub sign_rate: f64,
    pub rmse: f64,
}

/// Evaluate each window size on the same origins; the best has the highest
/// sign rate, ties broken by lower RMSE.
pub fn search_window(
    returns: &[f64],
    cfg: &RollingConfig,
    windows: std::ops::RangeInclusive<usize>,
) -> Result<(WindowScore, Vec<WindowScore>)> {
    let mut scores = Vec::new();
    for w in windows {
        let c = RollingConfig { window: w, ..cfg.clone() };
        let rep = rolling_backtest(returns, None, 0, &c)?;
        scores.push(WindowScore { window: w, sign_rate: rep.sign_rate, rmse: rep.rmse });
    }
    let best = *scores
        .iter()
        .max_by(|a, b| a.sign_rate.total_cmp(&b.sign_rate).then(b.rmse.total_cmp(&a.rmse)))
        .ok_or_else(|| Error::Config("empty window range".into()))?;
    Ok((best, scores))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonR2 {
    pub k: usize,
    pub mean_r2: f64,
}

/// Mean in-sample R-squared of the score regression at each horizon.
pub fn horizon_diagnostic(
    returns: &[f64],
    t: usize,
    k_range: &[usize],
    n_days: usize,
    delta: f64,
    estimator: Estimator,
) -> Result<Vec<HorizonR2>> {
    k_range
        .iter()
        .map(|&k| {
            let pair = build_shifted_panels(returns, t, k, n_days)?;
            let f = rolling_forecast(&pair, delta, estimator, estimator.default_penalty())?;
            Ok(HorizonR2 { k, mean_r2: f.fit.mean_r2() })
        })
        .collect()
}
