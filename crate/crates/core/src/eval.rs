//! Point and interval forecast metrics, Diebold-Mariano comparison and
//! autocorrelation diagnostics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::forecast::{DayOutcome, Method};

fn same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::Precondition("empty input".into()));
    }
    Ok(())
}

pub fn rmse(forecast: &[f64], realized: &[f64]) -> Result<f64> {
    same_len(forecast, realized)?;
    let s: f64 = forecast.iter().zip(realized).map(|(f, r)| (f - r).powi(2)).sum();
    Ok((s / forecast.len() as f64).sqrt())
}

pub fn mae(forecast: &[f64], realized: &[f64]) -> Result<f64> {
    same_len(forecast, realized)?;
    let s: f64 = forecast.iter().zip(realized).map(|(f, r)| (f - r).abs()).sum();
    Ok(s / forecast.len() as f64)
}

/// A zero forecast only counts as a hit against a zero outcome.
pub fn sign_hit(forecast: f64, realized: f64) -> bool {
    (forecast > 0.0 && realized > 0.0) || (forecast < 0.0 && realized < 0.0) || (forecast == 0.0 && realized == 0.0)
}

pub fn sign_rate(forecast: &[f64], realized: &[f64]) -> Result<f64> {
    same_len(forecast, realized)?;
    let hits = forecast.iter().zip(realized).filter(|(f, r)| sign_hit(**f, **r)).count();
    Ok(hits as f64 / forecast.len() as f64)
}

fn check_bounds(lb: &[f64], ub: &[f64], realized: &[f64]) -> Result<()> {
    same_len(lb, ub)?;
    same_len(lb, realized)?;
    if let Some(i) = lb.iter().zip(ub).position(|(l, u)| !(l <= u)) {
        return Err(Error::InvalidBounds(i));
    }
    Ok(())
}

/// Interval score of a single central `(1 - omega)` interval.
pub fn interval_score_point(lb: f64, ub: f64, x: f64, omega: f64) -> f64 {
    let mut s = ub - lb;
    if x < lb {
        s += 2.0 / omega * (lb - x);
    }
    if x > ub {
        s += 2.0 / omega * (x - ub);
    }
    s
}

/// Pointwise interval scores.
pub fn interval_scores(lb: &[f64], ub: &[f64], realized: &[f64], omega: f64) -> Result<Vec<f64>> {
    check_bounds(lb, ub, realized)?;
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::Config(format!("omega must lie in (0, 1), got {omega}")));
    }
    Ok(lb.iter().zip(ub).zip(realized).map(|((l, u), x)| interval_score_point(*l, *u, *x, omega)).collect())
}

/// Mean interval score over the grid.
pub fn mean_interval_score(lb: &[f64], ub: &[f64], realized: &[f64], omega: f64) -> Result<f64> {
    let s = interval_scores(lb, ub, realized, omega)?;
    Ok(s.iter().sum::<f64>() / s.len() as f64)
}

pub fn coverage_rate(lb: &[f64], ub: &[f64], realized: &[f64]) -> Result<f64> {
    check_bounds(lb, ub, realized)?;
    let inside = lb.iter().zip(ub).zip(realized).filter(|((l, u), x)| *l <= *x && *x <= *u).count();
    Ok(inside as f64 / lb.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    #[default]
    Squared,
    Absolute,
}

impl Loss {
    fn apply(self, e: f64) -> f64 {
        match self {
            Loss::Squared => e * e,
            Loss::Absolute => e.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmResult {
    pub statistic: f64,
    pub p_value: f64,
    pub lag: usize,
}

/// Diebold-Mariano test of equal accuracy on forecast errors `a` and `b`.
///
/// The long-run variance of the loss differential uses Bartlett weights up
/// to `max_lag` (default `floor(n^(1/3))`); the p-value is two-sided Normal.
pub fn diebold_mariano(errors_a: &[f64], errors_b: &[f64], loss: Loss, max_lag: Option<usize>) -> Result<DmResult> {
    same_len(errors_a, errors_b)?;
    let n = errors_a.len();
    if n < 10 {
        return Err(Error::Precondition(format!("Diebold-Mariano needs n >= 10, got {n}")));
    }
    let lag = max_lag.unwrap_or((n as f64).cbrt().floor() as usize).min(n - 1);
    let d: Vec<f64> = errors_a.iter().zip(errors_b).map(|(a, b)| loss.apply(*a) - loss.apply(*b)).collect();
    if d.iter().all(|&v| v == 0.0) {
        return Ok(DmResult { statistic: 0.0, p_value: 1.0, lag });
    }
    let mean = d.iter().sum::<f64>() / n as f64;
    let gamma = |k: usize| -> f64 { (k..n).map(|t| (d[t] - mean) * (d[t - k] - mean)).sum::<f64>() / n as f64 };
    let mut lrv = gamma(0);
    for k in 1..=lag {
        lrv += 2.0 * (1.0 - k as f64 / (lag + 1) as f64) * gamma(k);
    }
    if !(lrv > 0.0) {
        return Err(Error::ZeroVarianceDifferential);
    }
    let statistic = mean / (lrv / n as f64).sqrt();
    let p_value = 2.0 * (1.0 - std_normal().cdf(statistic.abs()));
    Ok(DmResult { statistic, p_value, lag })
}

pub(crate) fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfResult {
    /// Lags `0..=max_lag`.
    pub values: Vec<f64>,
    /// `1.96 / sqrt(n)`.
    pub band: f64,
}

pub fn acf(series: &[f64], max_lag: usize) -> Result<AcfResult> {
    cross_acf(series, series, max_lag)
}

/// Sample cross-correlation `corr(a_{t+l}, b_t)` for `l = 0..=max_lag`.
pub fn cross_acf(a: &[f64], b: &[f64], max_lag: usize) -> Result<AcfResult> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n <= max_lag {
        return Err(Error::SeriesTooShort { len: n, max_lag });
    }
    let ma = a.iter().sum::<f64>() / n as f64;
    let mb = b.iter().sum::<f64>() / n as f64;
    let sa = a.iter().map(|v| (v - ma).powi(2)).sum::<f64>();
    let sb = b.iter().map(|v| (v - mb).powi(2)).sum::<f64>();
    let denom = (sa * sb).sqrt();
    let values = (0..=max_lag)
        .map(|l| {
            if denom == 0.0 {
                return if l == 0 { 1.0 } else { 0.0 };
            }
            (l..n).map(|t| (a[t] - ma) * (b[t - l] - mb)).sum::<f64>() / denom
        })
        .collect::<Vec<f64>>();
    let mut values = values;
    if std::ptr::eq(a, b) || a == b {
        values[0] = 1.0;
    }
    Ok(AcfResult { values, band: 1.96 / (n as f64).sqrt() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayRecord {
    pub day: usize,
    pub method: Method,
    pub rmse: f64,
    pub mae: f64,
    pub sign_rate: f64,
    pub mean_interval_score: f64,
    pub mean_width: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodAggregate {
    pub method: Method,
    pub n_points: usize,
    pub rmse: f64,
    pub mae: f64,
    pub sign_rate: f64,
    pub mean_interval_score: f64,
    pub mean_width: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmRecord {
    pub method_a: Method,
    pub method_b: Method,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub day: usize,
    pub method: Option<Method>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct BacktestReport {
    pub level: f64,
    pub window: usize,
    pub per_day: Vec<DayRecord>,
    pub aggregates: Vec<MethodAggregate>,
    pub dm_tests: Vec<DmRecord>,
    pub failures: Vec<Failure>,
}

struct Pooled {
    point: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    realized: Vec<f64>,
}

/// Score every day and pool the discrete points per method.
pub fn build_report(
    outcomes: &[DayOutcome],
    methods: &[Method],
    level: f64,
    window: usize,
    failures: Vec<Failure>,
) -> Result<BacktestReport> {
    let omega = 1.0 - level;
    let mut per_day = Vec::new();
    let mut pooled: Vec<Pooled> =
        methods.iter().map(|_| Pooled { point: vec![], lower: vec![], upper: vec![], realized: vec![] }).collect();
    for o in outcomes {
        let f = &o.forecast;
        let width = f.upper.iter().zip(&f.lower).map(|(u, l)| u - l).sum::<f64>() / f.point.len() as f64;
        per_day.push(DayRecord {
            day: o.day,
            method: f.method,
            rmse: rmse(&f.point, &o.realized)?,
            mae: mae(&f.point, &o.realized)?,
            sign_rate: sign_rate(&f.point, &o.realized)?,
            mean_interval_score: mean_interval_score(&f.lower, &f.upper, &o.realized, omega)?,
            mean_width: width,
            coverage: coverage_rate(&f.lower, &f.upper, &o.realized)?,
        });
        if let Some(k) = methods.iter().position(|m| *m == f.method) {
            let p = &mut pooled[k];
            p.point.extend(&f.point);
            p.lower.extend(&f.lower);
            p.upper.extend(&f.upper);
            p.realized.extend(&o.realized);
        }
    }
    let mut aggregates = Vec::new();
    for (m, p) in methods.iter().zip(&pooled) {
        if p.point.is_empty() {
            continue;
        }
        let n = p.point.len();
        aggregates.push(MethodAggregate {
            method: *m,
            n_points: n,
            rmse: rmse(&p.point, &p.realized)?,
            mae: mae(&p.point, &p.realized)?,
            sign_rate: sign_rate(&p.point, &p.realized)?,
            mean_interval_score: mean_interval_score(&p.lower, &p.upper, &p.realized, omega)?,
            mean_width: p.upper.iter().zip(&p.lower).map(|(u, l)| u - l).sum::<f64>() / n as f64,
            coverage: coverage_rate(&p.lower, &p.upper, &p.realized)?,
        });
    }
    let mut dm_tests = Vec::new();
    for a in 0..methods.len() {
        for b in a + 1..methods.len() {
            let (pa, pb) = (&pooled[a], &pooled[b]);
            if pa.point.len() != pb.point.len() || pa.point.len() < 10 {
                continue;
            }
            let ea: Vec<f64> = pa.point.iter().zip(&pa.realized).map(|(f, r)| f - r).collect();
            let eb: Vec<f64> = pb.point.iter().zip(&pb.realized).map(|(f, r)| f - r).collect();
            match diebold_mariano(&ea, &eb, Loss::Squared, None) {
                Ok(r) => dm_tests.push(DmRecord {
                    method_a: methods[a],
                    method_b: methods[b],
                    statistic: r.statistic,
                    p_value: r.p_value,
                }),
                Err(Error::ZeroVarianceDifferential) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(BacktestReport { level, window, per_day, aggregates, dm_tests, failures })
}
