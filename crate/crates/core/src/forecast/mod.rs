//! One-day-ahead functional forecasts with pointwise intervals.

mod aue;
mod backtest;

pub use aue::{aue_bands, search_kappa, AueOptions, KappaFit, RefitMode, ScoreForecaster};
pub use backtest::{forecast_day, rolling_backtest, BacktestConfig, DayOutcome};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;

use crate::error::{Error, Result};
use crate::eval::std_normal;
use crate::fpca::FpcaBasis;
use crate::linalg::{is_psd, Mat};
use crate::score_models::{ArGarchFit, SbekkFit, VarFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "ARGARCH")]
    Argarch,
    #[serde(rename = "ARMA_AUE")]
    ArmaAue,
    #[serde(rename = "VAR_SBEKK")]
    VarSbekk,
    #[serde(rename = "VAR_AUE")]
    VarAue,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::ArmaAue, Method::Argarch, Method::VarAue, Method::VarSbekk];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Argarch => "ARGARCH",
            Method::ArmaAue => "ARMA_AUE",
            Method::VarSbekk => "VAR_SBEKK",
            Method::VarAue => "VAR_AUE",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "ARGARCH" | "AR_GARCH" => Ok(Method::Argarch),
            "ARMA_AUE" | "ARMA" => Ok(Method::ArmaAue),
            "VAR_SBEKK" | "SBEKK" => Ok(Method::VarSbekk),
            "VAR_AUE" | "VAR" => Ok(Method::VarAue),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalForecast {
    pub point: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
    pub method: Method,
    pub score_forecasts: Vec<f64>,
    /// `J x J` rows; diagonal for univariate methods, empty for band methods.
    pub score_variances: Vec<Vec<f64>>,
    /// `(lower, upper)` band multipliers for the constant-band methods.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kappa: Option<(f64, f64)>,
}

impl FunctionalForecast {
    pub fn j(&self) -> usize {
        self.score_forecasts.len()
    }

    pub fn t(&self) -> usize {
        self.point.len()
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("level must lie in (0, 1), got {level}")))
    }
}

/// Two-sided standard Normal quantile for a central interval at `level`.
pub fn normal_quantile(level: f64) -> Result<f64> {
    check_level(level)?;
    Ok(std_normal().inverse_cdf(1.0 - (1.0 - level) / 2.0))
}

fn point_curve(basis: &FpcaBasis, score_fc: &[f64]) -> Result<Vec<f64>> {
    if score_fc.len() > basis.j_max() {
        return Err(Error::IndexOutOfRange { index: score_fc.len(), len: basis.j_max() });
    }
    Ok(basis.curve_from_scores(score_fc))
}

fn gaussian_bands(point: &[f64], var: &[f64], level: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let z = normal_quantile(level)?;
    let half: Vec<f64> = var.iter().map(|v| z * v.max(0.0).sqrt()).collect();
    Ok((point.iter().zip(&half).map(|(p, h)| p - h).collect(), point.iter().zip(&half).map(|(p, h)| p + h).collect()))
}

/// Pointwise variance `xi(t)' S xi(t) + omega(t)` for a full score covariance.
pub fn pointwise_variance(basis: &FpcaBasis, score_cov: &Mat) -> Vec<f64> {
    let j = score_cov.nrows();
    (0..basis.t())
        .map(|t| {
            let mut v = basis.omega[t];
            for a in 0..j {
                let xa = basis.xi(a, t);
                for b in 0..j {
                    v += xa * score_cov[(a, b)] * basis.xi(b, t);
                }
            }
            v
        })
        .collect()
}

/// Pointwise variance `sum_j nu_j xi_j(t)^2 + omega(t)` for independent scores.
pub fn pointwise_variance_diagonal(basis: &FpcaBasis, score_var: &[f64]) -> Vec<f64> {
    (0..basis.t())
        .map(|t| basis.omega[t] + score_var.iter().enumerate().map(|(j, nu)| nu * basis.xi(j, t).powi(2)).sum::<f64>())
        .collect()
}

/// Curve forecast from score forecasts and their covariance.
pub fn forecast_curve(
    basis: &FpcaBasis,
    score_fc: &[f64],
    score_cov: &Mat,
    level: f64,
    method: Method,
) -> Result<FunctionalForecast> {
    let j = score_fc.len();
    if score_cov.nrows() != j || score_cov.ncols() != j {
        return Err(Error::LengthMismatch(score_cov.nrows(), j));
    }
    let scale = score_cov.amax().max(1.0);
    let asym = (score_cov - score_cov.transpose()).amax();
    if asym > 1e-10 * scale || !is_psd(score_cov, 1e-10 * scale) {
        return Err(Error::NonPsdCov);
    }
    let point = point_curve(basis, score_fc)?;
    let var = pointwise_variance(basis, score_cov);
    let (lower, upper) = gaussian_bands(&point, &var, level)?;
    Ok(FunctionalForecast {
        point,
        lower,
        upper,
        level,
        method,
        score_forecasts: score_fc.to_vec(),
        score_variances: crate::linalg::to_rows(score_cov),
        kappa: None,
    })
}

/// Curve forecast from independent per-score means and variances.
pub fn forecast_diagonal(
    basis: &FpcaBasis,
    means: &[f64],
    vars: &[f64],
    level: f64,
    method: Method,
) -> Result<FunctionalForecast> {
    if means.len() != vars.len() {
        return Err(Error::LengthMismatch(means.len(), vars.len()));
    }
    if vars.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::NonPsdCov);
    }
    let point = point_curve(basis, means)?;
    let var = pointwise_variance_diagonal(basis, vars);
    let (lower, upper) = gaussian_bands(&point, &var, level)?;
    let j = means.len();
    let score_variances = (0..j).map(|a| (0..j).map(|b| if a == b { vars[a] } else { 0.0 }).collect()).collect();
    Ok(FunctionalForecast {
        point,
        lower,
        upper,
        level,
        method,
        score_forecasts: means.to_vec(),
        score_variances,
        kappa: None,
    })
}

/// AR-GARCH forecast from one fit per retained score.
pub fn forecast_argarch_day(basis: &FpcaBasis, fits: &[ArGarchFit], level: f64) -> Result<FunctionalForecast> {
    if fits.is_empty() || fits.len() > basis.j_max() {
        return Err(Error::LengthMismatch(fits.len(), basis.j));
    }
    let (means, vars): (Vec<f64>, Vec<f64>) = fits.iter().map(ArGarchFit::forecast_next).unzip();
    forecast_diagonal(basis, &means, &vars, level, Method::Argarch)
}

/// VAR mean with sBEKK covariance.
pub fn forecast_sbekk_day(
    basis: &FpcaBasis,
    var_fit: &VarFit,
    bekk_fit: &SbekkFit,
    level: f64,
) -> Result<FunctionalForecast> {
    if var_fit.dim() != bekk_fit.dim() {
        return Err(Error::LengthMismatch(var_fit.dim(), bekk_fit.dim()));
    }
    let h = crate::linalg::symmetrize(&bekk_fit.forecast_next());
    forecast_curve(basis, &var_fit.forecast_next(), &h, level, Method::VarSbekk)
}

/// Fit one AR-GARCH model per retained score column.
pub fn fit_argarch_scores(scores: &Mat) -> Result<Vec<ArGarchFit>> {
    (0..scores.ncols())
        .map(|j| {
            let col: Vec<f64> = scores.column(j).iter().copied().collect();
            crate::score_models::fit_ar_garch(&col)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{demean_panel, ReturnCurvePanel};
    use crate::fpca::{fit_fpca, FpcaOptions};

    fn basis() -> FpcaBasis {
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| (0..5).map(|t| ((i * 7 + t * 3) % 11) as f64 * 0.1 + (t as f64 * 0.4 + i as f64).sin()).collect())
            .collect();
        let p = demean_panel(&ReturnCurvePanel::from_rows(rows).unwrap()).unwrap();
        fit_fpca(&p, &FpcaOptions::default()).unwrap()
    }

    #[test]
    fn zero_variance_collapses_band() {
        let mut b = basis();
        b.omega.iter_mut().for_each(|w| *w = 0.0);
        let f = forecast_curve(&b, &[0.3, -0.2], &Mat::zeros(2, 2), 0.95, Method::VarSbekk).unwrap();
        assert_eq!(f.lower, f.point);
        assert_eq!(f.upper, f.point);
    }

    #[test]
    fn non_psd_rejected() {
        let b = basis();
        let s = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(forecast_curve(&b, &[0.0, 0.0], &s, 0.95, Method::VarSbekk), Err(Error::NonPsdCov));
    }

    #[test]
    fn diagonal_paths_agree() {
        let b = basis();
        let (m, v) = ([0.4, -0.1], [0.7, 0.2]);
        let d = forecast_diagonal(&b, &m, &v, 0.9, Method::Argarch).unwrap();
        let f = forecast_curve(
            &b,
            &m,
            &Mat::from_diagonal(&nalgebra::DVector::from_vec(v.to_vec())),
            0.9,
            Method::VarSbekk,
        )
        .unwrap();
        for t in 0..b.t() {
            assert!((d.lower[t] - f.lower[t]).abs() < 1e-12);
            assert!((d.upper[t] - f.upper[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_terms_enter_variance() {
        let b = basis();
        let s = Mat::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0]);
        let v = pointwise_variance(&b, &s);
        for t in 0..b.t() {
            let (x0, x1) = (b.xi(0, t), b.xi(1, t));
            let expect = x0 * x0 + 2.0 * x1 * x1 + 2.0 * 0.5 * x0 * x1 + b.omega[t];
            assert!((v[t] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn wider_level_contains_narrower() {
        let b = basis();
        let s = Mat::identity(2, 2) * 0.5;
        let f95 = forecast_curve(&b, &[0.1, 0.1], &s, 0.95, Method::VarSbekk).unwrap();
        let f99 = forecast_curve(&b, &[0.1, 0.1], &s, 0.99, Method::VarSbekk).unwrap();
        for t in 0..b.t() {
            assert!(f99.lower[t] <= f95.lower[t] && f99.upper[t] >= f95.upper[t]);
        }
        assert!((normal_quantile(0.95).unwrap() - 1.959964).abs() < 1e-5);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.as_str()));
        }
    }
}
