//! File formats: price CSV input, panel CSV with JSON sidecar, basis JSON,
//! score/forecast/rolling CSVs and backtest reports.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::curves::{FillInfo, PricePoint, ReturnCurve, ReturnCurvePanel};
use crate::error::{Error, Result};
use crate::eval::BacktestReport;
use crate::forecast::FunctionalForecast;
use crate::fpca::FpcaBasis;
use crate::rolling::RollingReport;

/// Parse Unix seconds or an ISO-8601 date-time (UTC when no offset is given).
pub fn parse_timestamp(s: &str) -> Result<i64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<i64>() {
        return Ok(v);
    }
    if let Ok(v) = s.parse::<f64>() {
        if v.is_finite() {
            return Ok(v.floor() as i64);
        }
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(dt.and_utc().timestamp());
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp());
    }
    Err(Error::Parse(format!("unrecognized timestamp {s:?}")))
}

fn column_index(headers: &csv::StringRecord, names: &[&str], fallback: usize) -> usize {
    headers.iter().position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n))).unwrap_or(fallback)
}

/// Read `timestamp,price` rows. Columns are found by header name
/// (`timestamp`/`time`/`date`, `price`/`close`), else the first two are used.
pub fn read_prices(path: &Path) -> Result<Vec<PricePoint>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let ti = column_index(&headers, &["timestamp", "time", "date", "datetime"], 0);
    let pi = column_index(&headers, &["price", "close"], 1);
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).ok_or_else(|| Error::Parse(format!("row {}: missing column {i}", line + 2)));
        let ts = parse_timestamp(field(ti)?)?;
        let price: f64 =
            field(pi)?.parse().map_err(|_| Error::Parse(format!("row {}: bad price {:?}", line + 2, rec.get(pi))))?;
        out.push(PricePoint::new(ts, price));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelMeta {
    pub grid_step: i64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub demeaned: bool,
    pub mean_curve: Option<Vec<f64>>,
    pub day_starts: Vec<i64>,
    pub grid: Vec<f64>,
    pub fill_policy: Option<crate::curves::FillPolicy>,
    pub filled_points: Option<usize>,
    pub dropped_days: Option<usize>,
}

fn grid_label(g: f64) -> String {
    format!("{g:.6}")
}

/// One row per day, one column per grid point, plus a JSON sidecar.
pub fn write_panel(panel: &ReturnCurvePanel, csv_path: &Path, meta_path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(csv_path)?;
    w.write_record(panel.grid().iter().map(|g| grid_label(*g)))?;
    for c in panel.curves() {
        w.write_record(c.values.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    let meta = PanelMeta {
        grid_step: panel.grid_step,
        n: panel.n(),
        t: panel.t(),
        demeaned: panel.is_demeaned(),
        mean_curve: panel.mean_curve().map(<[f64]>::to_vec),
        day_starts: panel.curves().iter().map(|c| c.day_start).collect(),
        grid: panel.grid().to_vec(),
        fill_policy: panel.fill.as_ref().map(|f| f.policy),
        filled_points: panel.fill.as_ref().map(|f| f.filled_points),
        dropped_days: panel.fill.as_ref().map(|f| f.dropped_days),
    };
    write_json(&meta, meta_path)
}

pub fn read_panel(csv_path: &Path, meta_path: &Path) -> Result<ReturnCurvePanel> {
    let meta: PanelMeta = read_json(meta_path)?;
    let mut rdr = csv::Reader::from_path(csv_path)?;
    let mut curves = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let values = rec?
            .iter()
            .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("panel row {}: bad value {v:?}", i + 2))))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != meta.t {
            return Err(Error::GridMismatch);
        }
        curves.push(ReturnCurve {
            day_index: i + 1,
            day_start: meta.day_starts.get(i).copied().unwrap_or(i as i64),
            values,
            grid: meta.grid.clone(),
        });
    }
    if curves.len() != meta.n {
        return Err(Error::Parse(format!("sidecar says N={} but CSV has {} rows", meta.n, curves.len())));
    }
    let mean = if meta.demeaned { meta.mean_curve.clone() } else { None };
    let mut p = ReturnCurvePanel::from_parts(curves, meta.grid_step, mean)?;
    if let Some(policy) = meta.fill_policy {
        p.fill = Some(FillInfo {
            policy,
            filled_points: meta.filled_points.unwrap_or(0),
            dropped_days: meta.dropped_days.unwrap_or(0),
        });
    }
    Ok(p)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let f = File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(f))?)
}

pub fn write_basis(basis: &FpcaBasis, path: &Path) -> Result<()> {
    write_json(basis, path)
}

/// `day, beta_1, ..., beta_J` for the retained scores.
pub fn write_scores(basis: &FpcaBasis, day_starts: &[i64], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["day_start".to_string()];
    header.extend((1..=basis.j).map(|j| format!("beta_{j}")));
    w.write_record(&header)?;
    for i in 0..basis.n() {
        let mut row = vec![day_starts.get(i).map_or(i.to_string(), |d| d.to_string())];
        row.extend((0..basis.j).map(|j| format!("{:e}", basis.scores[(i, j)])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Plain matrix CSV with a header row.
pub fn write_matrix(m: &crate::linalg::Mat, header: &[String], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastMeta {
    pub method: crate::forecast::Method,
    pub level: f64,
    #[serde(rename = "J")]
    pub j: usize,
    pub window: usize,
    pub day: Option<i64>,
    pub score_forecasts: Vec<f64>,
    pub score_variances: Vec<Vec<f64>>,
    pub kappa: Option<(f64, f64)>,
}

/// `t, point, lower, upper, realized` (realized left empty when unknown).
pub fn write_forecast(f: &FunctionalForecast, grid: &[f64], realized: Option<&[f64]>, csv_path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(csv_path)?;
    w.write_record(["t", "point", "lower", "upper", "realized"])?;
    for t in 0..f.point.len() {
        w.write_record([
            grid.get(t).map_or(t.to_string(), |g| grid_label(*g)),
            format!("{:e}", f.point[t]),
            format!("{:e}", f.lower[t]),
            format!("{:e}", f.upper[t]),
            realized.map_or(String::new(), |r| format!("{:e}", r[t])),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Report JSON plus a table with one row per method.
pub fn write_report(report: &BacktestReport, json_path: &Path, table_path: &Path) -> Result<()> {
    write_json(report, json_path)?;
    let mut w = csv::Writer::from_path(table_path)?;
    w.write_record(["method", "n_points", "RMSE", "MAE", "Sign", "S_bar", "coverage", "mean_width"])?;
    for a in &report.aggregates {
        w.write_record([
            a.method.to_string(),
            a.n_points.to_string(),
            format!("{:.6}", a.rmse),
            format!("{:.6}", a.mae),
            format!("{:.4}", a.sign_rate),
            format!("{:.6}", a.mean_interval_score),
            format!("{:.4}", a.coverage),
            format!("{:.6}", a.mean_width),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `origin_timestamp, day, step, forecast, realized, sign_hit`.
pub fn write_rolling(report: &RollingReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["origin_timestamp", "day", "step", "forecast", "realized", "sign_hit"])?;
    for o in &report.origins {
        for (s, (f, r)) in o.forecast.iter().zip(&o.realized).enumerate() {
            w.write_record([
                o.origin_timestamp.map_or(String::new(), |t| t.to_string()),
                o.day.to_string(),
                (s + 1).to_string(),
                format!("{f:e}"),
                format!("{r:e}"),
                (crate::eval::sign_hit(*f, *r) as u8).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
