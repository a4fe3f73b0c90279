//! Constant-multiplier forecast bands built from in-sample one-step errors.

use serde::{Deserialize, Serialize};

use super::{check_level, FunctionalForecast, Method};
use crate::curves::ReturnCurvePanel;
use crate::error::{Error, Result};
use crate::fpca::FpcaBasis;
use crate::linalg::Mat;
use crate::score_models::{arma, fit_arma_auto, fit_var1, ArmaFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreForecaster {
    Arma,
    Var,
}

impl ScoreForecaster {
    pub fn method(self) -> Method {
        match self {
            ScoreForecaster::Arma => Method::ArmaAue,
            ScoreForecaster::Var => Method::VarAue,
        }
    }
}

/// How score models are re-estimated for the in-sample errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RefitMode {
    /// Refit on scores `1..=k` before predicting score `k+1`.
    #[default]
    Expanding,
    /// Fit once on all scores and use in-sample one-step predictions.
    FullSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AueOptions {
    pub refit: RefitMode,
    pub p_max: usize,
    pub q_max: usize,
    pub kappa_max: f64,
    pub kappa_step: f64,
}

impl Default for AueOptions {
    fn default() -> Self {
        AueOptions { refit: RefitMode::Expanding, p_max: 2, q_max: 2, kappa_max: 6.0, kappa_step: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaFit {
    pub lower: f64,
    pub upper: f64,
    /// In-sample fraction of standardized errors inside `[-lower, upper]`.
    pub coverage: f64,
}

/// Narrowest grid pair `(kl, ku)` with `#{-kl <= z <= ku} >= level * n`.
///
/// Ties in `kl + ku` go to the pair with the smaller `|kl - ku|`. If no pair
/// on the grid reaches the level, the widest pair is returned.
pub fn search_kappa(z: &[f64], level: f64, kappa_max: f64, step: f64) -> Result<KappaFit> {
    check_level(level)?;
    if z.is_empty() {
        return Err(Error::InsufficientHistory { need: 1, have: 0 });
    }
    if !(step > 0.0 && kappa_max >= 0.0) {
        return Err(Error::Config("kappa grid must have positive step".into()));
    }
    let mut sorted = z.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    let need = (level * n as f64 - 1e-9).ceil() as usize;
    let m = (kappa_max / step).round() as usize;
    let k = |i: usize| i as f64 * step;
    let at_most = |x: f64| sorted.partition_point(|v| *v <= x);
    let below = |x: f64| sorted.partition_point(|v| *v < x);
    let covered = |lo: usize, hi: usize| at_most(k(hi)) - below(-k(lo));

    let mut best: Option<(usize, usize)> = None;
    for lo in 0..=m {
        if covered(lo, m) < need {
            continue;
        }
        let (mut a, mut b) = (0usize, m);
        while a < b {
            let mid = (a + b) / 2;
            if covered(lo, mid) >= need {
                b = mid;
            } else {
                a = mid + 1;
            }
        }
        let cand = (lo, a);
        let better = match best {
            None => true,
            Some((bl, bu)) => {
                let (s, bs) = (cand.0 + cand.1, bl + bu);
                s < bs || (s == bs && cand.0.abs_diff(cand.1) < bl.abs_diff(bu))
            }
        };
        if better {
            best = Some(cand);
        }
    }
    let (lo, hi) = best.unwrap_or_else(|| {
        log::warn!("no band multiplier on [0, {kappa_max}] reaches level {level}");
        (m, m)
    });
    Ok(KappaFit { lower: k(lo), upper: k(hi), coverage: covered(lo, hi) as f64 / n as f64 })
}

fn column(m: &Mat, j: usize, rows: usize) -> Vec<f64> {
    m.column(j).iter().take(rows).copied().collect()
}

fn history_mean(scores: &Mat, rows: usize) -> Vec<f64> {
    (0..scores.ncols())
        .map(|j| if rows == 0 { 0.0 } else { scores.column(j).iter().take(rows).sum::<f64>() / rows as f64 })
        .collect()
}

/// One-step forecast of score row `rows` from rows `0..rows`.
fn predict_next(scores: &Mat, rows: usize, fc: ScoreForecaster, opts: &AueOptions) -> Vec<f64> {
    let j = scores.ncols();
    match fc {
        ScoreForecaster::Arma => (0..j)
            .map(|c| {
                let y = column(scores, c, rows);
                if rows < arma::MIN_LEN {
                    return history_mean(scores, rows)[c];
                }
                match fit_arma_auto(&y, opts.p_max, opts.q_max) {
                    Ok(f) => f.forecast_next(),
                    Err(_) => y.iter().sum::<f64>() / rows as f64,
                }
            })
            .collect(),
        ScoreForecaster::Var => {
            if rows < j + 2 {
                return history_mean(scores, rows);
            }
            match fit_var1(&scores.rows(0, rows).into_owned()) {
                Ok(f) => f.forecast_next(),
                Err(_) => history_mean(scores, rows),
            }
        }
    }
}

/// In-sample one-step predictions of every score row from a single full-sample fit.
fn full_sample_predictions(scores: &Mat, fc: ScoreForecaster, opts: &AueOptions) -> Result<Mat> {
    let (n, j) = (scores.nrows(), scores.ncols());
    let mut pred = Mat::zeros(n, j);
    match fc {
        ScoreForecaster::Arma => {
            for c in 0..j {
                let y = column(scores, c, n);
                let fit: ArmaFit = fit_arma_auto(&y, opts.p_max, opts.q_max)?;
                let start = n - fit.residuals.len();
                for t in 0..n {
                    pred[(t, c)] = if t >= start { y[t] - fit.residuals[t - start] } else { fit.mean };
                }
            }
        }
        ScoreForecaster::Var => {
            let fit = fit_var1(scores)?;
            let mean = history_mean(scores, n);
            for c in 0..j {
                pred[(0, c)] = mean[c];
            }
            for t in 1..n {
                let prev: Vec<f64> = scores.row(t - 1).iter().copied().collect();
                for (c, v) in fit.forecast_mean(&prev).into_iter().enumerate() {
                    pred[(t, c)] = v;
                }
            }
        }
    }
    Ok(pred)
}

/// Point forecast with bands `[point - kl*gamma, point + ku*gamma]`.
///
/// `panel` is the demeaned panel the basis was fitted on.
pub fn aue_bands(
    panel: &ReturnCurvePanel,
    basis: &FpcaBasis,
    fc: ScoreForecaster,
    level: f64,
    opts: &AueOptions,
) -> Result<FunctionalForecast> {
    check_level(level)?;
    if !panel.is_demeaned() {
        return Err(Error::NotDemeaned);
    }
    let n = panel.n();
    let t_len = panel.t();
    let j = basis.j;
    if n != basis.n() || t_len != basis.t() {
        return Err(Error::GridMismatch);
    }
    if n <= j + 2 {
        return Err(Error::InsufficientHistory { need: j + 3, have: n });
    }
    let scores = basis.retained_scores();
    let x = panel.matrix();

    let first = j + 1;
    let rows: Vec<usize> = (first..n).collect();
    let predicted: Vec<Vec<f64>> = match opts.refit {
        RefitMode::Expanding => rows.iter().map(|&k| predict_next(&scores, k, fc, opts)).collect(),
        RefitMode::FullSample => {
            let p = full_sample_predictions(&scores, fc, opts)?;
            rows.iter().map(|&k| p.row(k).iter().copied().collect()).collect()
        }
    };

    let mut errors = Mat::zeros(rows.len(), t_len);
    for (r, (&k, b)) in rows.iter().zip(&predicted).enumerate() {
        for t in 0..t_len {
            let fitted: f64 = b.iter().enumerate().map(|(c, v)| v * basis.xi(c, t)).sum();
            errors[(r, t)] = x[(k, t)] - fitted;
        }
    }
    let divisor = ((n - 1) - (j + 1)) as f64;
    let gamma: Vec<f64> =
        (0..t_len).map(|t| (errors.column(t).iter().map(|e| e * e).sum::<f64>() / divisor).sqrt()).collect();
    let z: Vec<f64> = (0..rows.len())
        .flat_map(|r| {
            let e = &errors;
            let g = &gamma;
            (0..t_len).map(move |t| if g[t] > 0.0 { e[(r, t)] / g[t] } else { 0.0 })
        })
        .collect();
    let kappa = search_kappa(&z, level, opts.kappa_max, opts.kappa_step)?;

    let score_fc = match opts.refit {
        RefitMode::Expanding => predict_next(&scores, n, fc, opts),
        RefitMode::FullSample => full_sample_forecast(&scores, fc, opts)?,
    };
    let point = basis.curve_from_scores(&score_fc);
    Ok(FunctionalForecast {
        lower: point.iter().zip(&gamma).map(|(p, g)| p - kappa.lower * g).collect(),
        upper: point.iter().zip(&gamma).map(|(p, g)| p + kappa.upper * g).collect(),
        point,
        level,
        method: fc.method(),
        score_forecasts: score_fc,
        score_variances: vec![],
        kappa: Some((kappa.lower, kappa.upper)),
    })
}

fn full_sample_forecast(scores: &Mat, fc: ScoreForecaster, opts: &AueOptions) -> Result<Vec<f64>> {
    let n = scores.nrows();
    match fc {
        ScoreForecaster::Arma => (0..scores.ncols())
            .map(|c| fit_arma_auto(&column(scores, c, n), opts.p_max, opts.q_max).map(|f| f.forecast_next()))
            .collect(),
        ScoreForecaster::Var => Ok(fit_var1(scores)?.forecast_next()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::demean_panel;
    use crate::fpca::{fit_fpca, FpcaOptions};
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn kappa_symmetric_normal() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let z: Vec<f64> = (0..200_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let k = search_kappa(&z, 0.95, 6.0, 0.01).unwrap();
        assert!((k.lower - 1.96).abs() < 0.05 && (k.upper - 1.96).abs() < 0.05, "{k:?}");
        assert!(k.coverage >= 0.95);
    }

    #[test]
    fn kappa_zero_errors() {
        let k = search_kappa(&[0.0; 10], 0.95, 6.0, 0.01).unwrap();
        assert_eq!((k.lower, k.upper, k.coverage), (0.0, 0.0, 1.0));
    }

    #[test]
    fn kappa_coverage_reaches_level() {
        let z: Vec<f64> = (0..97).map(|i| (i as f64 - 30.0) * 0.05).collect();
        for level in [0.5, 0.8, 0.9, 0.95] {
            let k = search_kappa(&z, level, 6.0, 0.01).unwrap();
            assert!(k.coverage >= level);
        }
    }

    #[test]
    fn exact_rank_one_gives_degenerate_band() {
        // scores follow an exact AR(1) path in a VAR sense: b_i = 0.5^i
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let b = 0.9f64.powi(i) * 3.0;
                (0..4).map(|t| b * [1.0, -0.5, 0.25, 0.7][t]).collect()
            })
            .collect();
        let p = demean_panel(&ReturnCurvePanel::from_rows(rows).unwrap()).unwrap();
        let basis = fit_fpca(&p, &FpcaOptions::default()).unwrap();
        assert_eq!(basis.j, 1);
        let opts = AueOptions { refit: RefitMode::FullSample, ..Default::default() };
        let f = aue_bands(&p, &basis, ScoreForecaster::Var, 0.95, &opts).unwrap();
        for t in 0..4 {
            assert!((f.upper[t] - f.point[t]).abs() < 1e-8);
            assert!((f.point[t] - f.lower[t]).abs() < 1e-8);
        }
    }

    #[test]
    fn short_history_rejected() {
        let rows: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64, 1.0 - i as f64, (i * i) as f64]).collect();
        let p = demean_panel(&ReturnCurvePanel::from_rows(rows).unwrap()).unwrap();
        let basis = fit_fpca(&p, &FpcaOptions { delta: 1.0, ..Default::default() }).unwrap();
        let r = aue_bands(&p, &basis, ScoreForecaster::Var, 0.95, &AueOptions::default());
        assert!(matches!(r, Err(Error::InsufficientHistory { .. })));
    }
}
