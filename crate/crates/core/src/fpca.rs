//! Discrete-grid functional principal components.
//!
//! Curves are vectors on the grid with inner product `<x, y> = w * sum x(t) y(t)`.
//! The default weight `w = 1` makes scores identical to a plain PCA; `w = 1/T`
//! approximates the integral over the unit day.

use serde::{Deserialize, Serialize};

use crate::curves::ReturnCurvePanel;
use crate::error::{Error, Result};
use crate::linalg::{sym_eigen_desc, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GridWeight {
    /// Euclidean inner product.
    #[default]
    Unit,
    /// `1/T` per grid point.
    Uniform,
}

impl GridWeight {
    pub fn value(self, t: usize) -> f64 {
        match self {
            GridWeight::Unit => 1.0,
            GridWeight::Uniform => 1.0 / t as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FpcaOptions {
    /// CPV threshold in (0, 1].
    pub delta: f64,
    pub weight: GridWeight,
    /// Number of components kept; defaults to `min(N - 1, T)`.
    pub j_max: Option<usize>,
}

impl Default for FpcaOptions {
    fn default() -> Self {
        FpcaOptions { delta: 0.85, weight: GridWeight::Unit, j_max: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpcaBasis {
    pub mean_curve: Vec<f64>,
    /// Leading `J_max` eigenvalues, nonincreasing, clipped at zero.
    pub eigenvalues: Vec<f64>,
    /// `J_max` eigenfunctions of length `T`, orthonormal under the grid inner product.
    pub eigenfunctions: Vec<Vec<f64>>,
    /// `N x J_max` eigenscores.
    #[serde(skip)]
    pub scores: Mat,
    /// Selected truncation.
    #[serde(rename = "J")]
    pub j: usize,
    /// Cumulative proportion of variance for `1..=J_max` components.
    pub cpv: Vec<f64>,
    pub sigma2_resid: f64,
    /// Pointwise truncation-noise variance.
    pub omega: Vec<f64>,
    pub grid_weight: f64,
    /// Sum of all positive eigenvalues (grid-weighted trace).
    pub total_variance: f64,
    pub near_degenerate: bool,
}

impl FpcaBasis {
    pub fn n(&self) -> usize {
        self.scores.nrows()
    }

    pub fn t(&self) -> usize {
        self.mean_curve.len()
    }

    pub fn j_max(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenfunction `j` evaluated at grid point `t`.
    #[inline]
    pub fn xi(&self, j: usize, t: usize) -> f64 {
        self.eigenfunctions[j][t]
    }

    /// Scores of a (demeaned) curve on the first `j_use` eigenfunctions.
    pub fn project(&self, demeaned: &[f64], j_use: usize) -> Vec<f64> {
        (0..j_use)
            .map(|j| self.grid_weight * demeaned.iter().zip(&self.eigenfunctions[j]).map(|(x, e)| x * e).sum::<f64>())
            .collect()
    }

    /// `mu(t) + sum_j scores[j] * xi_j(t)`.
    pub fn curve_from_scores(&self, scores: &[f64]) -> Vec<f64> {
        let mut out = self.mean_curve.clone();
        for (j, b) in scores.iter().enumerate() {
            for (o, e) in out.iter_mut().zip(&self.eigenfunctions[j]) {
                *o += b * e;
            }
        }
        out
    }

    /// `N x J` matrix of the retained scores.
    pub fn retained_scores(&self) -> Mat {
        self.scores.columns(0, self.j).into_owned()
    }
}

/// Smallest `J` whose cumulative share of the positive eigenvalue mass reaches `delta`.
pub fn select_j(eigenvalues: &[f64], delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Config(format!("delta must lie in (0, 1], got {delta}")));
    }
    let total: f64 = eigenvalues.iter().filter(|&&l| l > 0.0).sum();
    if !(total > 0.0) {
        return Err(Error::AllZeroEigenvalues);
    }
    let mut acc = 0.0;
    for (j, &l) in eigenvalues.iter().enumerate() {
        acc += l.max(0.0);
        if acc / total >= delta {
            return Ok(j + 1);
        }
    }
    // rounding can leave the final ratio a hair below 1
    Ok(eigenvalues.iter().rposition(|&l| l > 0.0).map_or(1, |p| p + 1))
}

pub fn fit_fpca(panel: &ReturnCurvePanel, opts: &FpcaOptions) -> Result<FpcaBasis> {
    if !panel.is_demeaned() {
        return Err(Error::NotDemeaned);
    }
    let n = panel.n();
    let t = panel.t();
    if n < 3 {
        return Err(Error::Precondition(format!("fit_fpca needs N >= 3 curves, got {n}")));
    }
    let x = panel.matrix();
    let w = opts.weight.value(t);
    let cov = x.transpose() * &x / n as f64;
    if cov.amax() == 0.0 {
        return Err(Error::DegeneratePanel);
    }
    let (raw_vals, vecs) = sym_eigen_desc(&(cov * w));
    let scale = raw_vals[0].abs();
    let vals: Vec<f64> = raw_vals
        .iter()
        .map(|&v| {
            if v < -1e-10 * scale.max(1.0) {
                log::warn!("eigenvalue {v:.3e} below clipping tolerance");
            }
            v.max(0.0)
        })
        .collect();
    if !(vals[0] > 0.0) {
        return Err(Error::DegeneratePanel);
    }

    let j_max = opts.j_max.unwrap_or(n.saturating_sub(1).min(t)).clamp(1, n.min(t));
    let total: f64 = vals.iter().sum();
    let j = select_j(&vals, opts.delta)?.min(j_max);

    let inv_sqrt_w = 1.0 / w.sqrt();
    let eigenfunctions: Vec<Vec<f64>> = (0..j_max)
        .map(|k| {
            let mut v: Vec<f64> = vecs.column(k).iter().map(|e| e * inv_sqrt_w).collect();
            let pivot = v
                .iter()
                .enumerate()
                .fold((0, 0.0_f64), |(bi, bv), (i, e)| if e.abs() > bv { (i, e.abs()) } else { (bi, bv) })
                .0;
            if v[pivot] < 0.0 {
                v.iter_mut().for_each(|e| *e = -*e);
            }
            v
        })
        .collect();

    let xi = Mat::from_fn(t, j_max, |r, c| eigenfunctions[c][r]);
    let scores = &x * &xi * w;

    let mut near_degenerate = false;
    for k in 0..j.min(j_max.saturating_sub(1)) {
        if vals[k] - vals[k + 1] < 1e-10 * vals[0] {
            near_degenerate = true;
            log::warn!("eigenvalues {k} and {} are nearly tied", k + 1);
        }
    }

    let mut cum = 0.0;
    let cpv: Vec<f64> = vals[..j_max]
        .iter()
        .map(|l| {
            cum += l;
            cum / total
        })
        .collect();

    let xi_j = xi.columns(0, j);
    let fitted = scores.columns(0, j) * xi_j.transpose();
    let resid = &x - fitted;
    let sigma2_resid = if t > 1 {
        (0..n)
            .map(|i| {
                let row = resid.row(i);
                let m = row.mean();
                row.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (t - 1) as f64
            })
            .sum::<f64>()
            / n as f64
    } else {
        0.0
    };
    let omega = (0..t)
        .map(|r| {
            let proj: f64 = (0..j).map(|c| xi[(r, c)].powi(2)).sum::<f64>() * w;
            (sigma2_resid * (1.0 - proj)).max(0.0)
        })
        .collect();

    Ok(FpcaBasis {
        mean_curve: panel.mean_curve().map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; t]),
        eigenvalues: vals[..j_max].to_vec(),
        eigenfunctions,
        scores,
        j,
        cpv,
        sigma2_resid,
        omega,
        grid_weight: w,
        total_variance: total,
        near_degenerate,
    })
}

/// In-sample fitted curve `mu + sum_{j <= j_use} beta_ij xi_j` for row `i` (0-based).
pub fn reconstruct(basis: &FpcaBasis, i: usize, j_use: usize) -> Result<Vec<f64>> {
    if i >= basis.n() {
        return Err(Error::IndexOutOfRange { index: i, len: basis.n() });
    }
    if j_use == 0 || j_use > basis.j_max() {
        return Err(Error::IndexOutOfRange { index: j_use, len: basis.j_max() });
    }
    let scores: Vec<f64> = (0..j_use).map(|j| basis.scores[(i, j)]).collect();
    Ok(basis.curve_from_scores(&scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::demean_panel;

    fn panel(rows: Vec<Vec<f64>>) -> ReturnCurvePanel {
        demean_panel(&ReturnCurvePanel::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn select_j_examples() {
        assert_eq!(select_j(&[1.0, 0.0, 0.0], 0.85).unwrap(), 1);
        assert_eq!(select_j(&[0.5, 0.3, 0.2], 0.85).unwrap(), 3);
        assert_eq!(select_j(&[0.9, 0.1], 0.9).unwrap(), 1);
        assert_eq!(select_j(&[0.0, 0.0], 0.5), Err(Error::AllZeroEigenvalues));
        assert!(select_j(&[1.0], 0.0).is_err());
    }

    #[test]
    fn zero_panel_is_degenerate() {
        let p = panel(vec![vec![0.0; 4]; 5]);
        assert_eq!(fit_fpca(&p, &FpcaOptions::default()), Err(Error::DegeneratePanel));
    }

    #[test]
    fn requires_demeaned_panel() {
        let p = ReturnCurvePanel::from_rows(vec![vec![1.0, 2.0]; 4]).unwrap();
        assert_eq!(fit_fpca(&p, &FpcaOptions::default()), Err(Error::NotDemeaned));
    }

    #[test]
    fn rank_one_panel() {
        let xi = [0.6, -0.8, 0.0];
        let betas = [1.5, -0.5, 2.0, -3.0, 0.25, -0.25];
        let mean_b = betas.iter().sum::<f64>() / betas.len() as f64;
        let rows = betas.iter().map(|b| xi.iter().map(|e| b * e).collect()).collect();
        let p = panel(rows);
        for delta in [0.1, 0.85, 1.0] {
            let basis = fit_fpca(&p, &FpcaOptions { delta, ..Default::default() }).unwrap();
            assert_eq!(basis.j, 1);
            let var_b = betas.iter().map(|b| (b - mean_b).powi(2)).sum::<f64>() / betas.len() as f64;
            assert!((basis.eigenvalues[0] - var_b).abs() < 1e-10);
            // sign convention puts the largest entry (|-0.8|) positive
            let f = &basis.eigenfunctions[0];
            assert!((f[1] - 0.8).abs() < 1e-10 && (f[0] + 0.6).abs() < 1e-10);
            for i in 0..betas.len() {
                let r = reconstruct(&basis, i, 1).unwrap();
                let orig: Vec<f64> = p.restored()[i].clone();
                for (a, b) in r.iter().zip(&orig) {
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn reconstruct_bounds() {
        let p = panel(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![2.0, 1.0], vec![-1.0, 3.0]]);
        let basis = fit_fpca(&p, &FpcaOptions::default()).unwrap();
        assert!(reconstruct(&basis, 0, 0).is_err());
        assert!(reconstruct(&basis, 4, 1).is_err());
        assert!(reconstruct(&basis, 0, basis.j_max() + 1).is_err());
    }

    #[test]
    fn uniform_weight_scales_eigenvalues() {
        let rows = vec![vec![1.0, 2.0, 0.5], vec![-1.0, 0.0, 2.0], vec![0.3, -1.0, 1.0], vec![2.0, 1.0, -1.0]];
        let p = panel(rows);
        let unit = fit_fpca(&p, &FpcaOptions::default()).unwrap();
        let uni = fit_fpca(&p, &FpcaOptions { weight: GridWeight::Uniform, ..Default::default() }).unwrap();
        for (a, b) in unit.eigenvalues.iter().zip(&uni.eigenvalues) {
            assert!((a / 3.0 - b).abs() < 1e-12);
        }
        // scores scale with sqrt(w)
        assert!((unit.scores.clone() - uni.scores.clone() * 3f64.sqrt()).amax() < 1e-10);
        // weighted orthonormality
        for j in 0..uni.j_max() {
            let nrm: f64 = uni.eigenfunctions[j].iter().map(|e| e * e).sum::<f64>() / 3.0;
            assert!((nrm - 1.0).abs() < 1e-10);
        }
    }
}
