//! Rolling-window one-day-ahead evaluation.

use serde::{Deserialize, Serialize};

use super::aue::{aue_bands, AueOptions, ScoreForecaster};
use super::{fit_argarch_scores, forecast_argarch_day, forecast_sbekk_day, FunctionalForecast, Method};
use crate::curves::{demean_panel, ReturnCurvePanel};
use crate::error::{Error, Result};
use crate::eval::{build_report, BacktestReport, Failure};
use crate::fpca::{fit_fpca, FpcaOptions};
use crate::par::Exec;
use crate::score_models::{fit_sbekk, fit_var1, SbekkOptions, VarFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub window: usize,
    pub horizon_days: usize,
    pub fpca: FpcaOptions,
    pub methods: Vec<Method>,
    pub level: f64,
    pub aue: AueOptions,
    pub sbekk: SbekkOptions,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        BacktestConfig {
            window: 250,
            horizon_days: 10,
            fpca: FpcaOptions::default(),
            methods: Method::ALL.to_vec(),
            level: 0.95,
            aue: AueOptions::default(),
            sbekk: SbekkOptions::default(),
            exec: Exec::default(),
        }
    }
}

/// A forecast paired with the curve it targeted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayOutcome {
    /// 0-based index of the forecast day in the full panel.
    pub day: usize,
    pub forecast: FunctionalForecast,
    pub realized: Vec<f64>,
}

/// Forecast the day after `window` (raw, not demeaned) with each method.
pub fn forecast_day(
    window: &ReturnCurvePanel,
    methods: &[Method],
    cfg: &BacktestConfig,
) -> Result<Vec<Result<FunctionalForecast>>> {
    let demeaned = demean_panel(window)?;
    let basis = fit_fpca(&demeaned, &cfg.fpca)?;
    let scores = basis.retained_scores();
    let mut out = Vec::with_capacity(methods.len());
    for &m in methods {
        let r = match m {
            Method::Argarch => {
                fit_argarch_scores(&scores).and_then(|fits| forecast_argarch_day(&basis, &fits, cfg.level))
            }
            Method::ArmaAue => aue_bands(&demeaned, &basis, ScoreForecaster::Arma, cfg.level, &cfg.aue),
            Method::VarAue => aue_bands(&demeaned, &basis, ScoreForecaster::Var, cfg.level, &cfg.aue),
            Method::VarSbekk => fit_var1(&scores).and_then(|v: VarFit| {
                let bekk = fit_sbekk(&v.residuals, &cfg.sbekk)?;
                forecast_sbekk_day(&basis, &v, &bekk, cfg.level)
            }),
        };
        out.push(r);
    }
    Ok(out)
}

/// Refit on the trailing `window` days and forecast each of the last
/// `horizon_days` days of `panel`.
pub fn rolling_backtest(panel: &ReturnCurvePanel, cfg: &BacktestConfig) -> Result<(BacktestReport, Vec<DayOutcome>)> {
    let n = panel.n();
    if cfg.horizon_days == 0 {
        return Ok((BacktestReport { level: cfg.level, window: cfg.window, ..Default::default() }, vec![]));
    }
    if n < cfg.window + cfg.horizon_days {
        return Err(Error::InsufficientHistory { need: cfg.window + cfg.horizon_days, have: n });
    }
    let first = n - cfg.horizon_days;
    let results = cfg.exec.map(cfg.horizon_days, |i| {
        let day = first + i;
        let r = panel.slice(day - cfg.window..day).and_then(|w| forecast_day(&w, &cfg.methods, cfg));
        (day, r)
    });
    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for (day, r) in results {
        let realized = panel.curves()[day].values.clone();
        match r {
            Err(e) => {
                log::warn!("day {day}: {e}");
                failures.push(Failure { day, method: None, error: e.to_string() });
            }
            Ok(per_method) => {
                for (m, f) in cfg.methods.iter().zip(per_method) {
                    match f {
                        Ok(forecast) => outcomes.push(DayOutcome { day, forecast, realized: realized.clone() }),
                        Err(e) => {
                            log::warn!("day {day} {m}: {e}");
                            failures.push(Failure { day, method: Some(*m), error: e.to_string() });
                        }
                    }
                }
            }
        }
    }
    let report = build_report(&outcomes, &cfg.methods, cfg.level, cfg.window, failures)?;
    Ok((report, outcomes))
}
