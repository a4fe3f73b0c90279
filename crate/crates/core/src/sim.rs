//! Synthetic functional panels from truncated Karhunen-Loeve factor models.
//!
//! Curves are `X_i = mu + sum_j sqrt(lambda_j) z_ij xi_j + e_i`, where the
//! standardized score vector `z_i` follows one of three dynamics and `e_i` is
//! Gaussian noise projected onto the orthogonal complement of the
//! eigenfunctions. When the dynamics have unit marginal variance the
//! eigenvalues of the panel covariance are the `lambdas`.

use nalgebra::Cholesky;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::curves::{ReturnCurvePanel, SECONDS_PER_DAY};
use crate::error::{Error, Result};
use crate::linalg::{from_rows, sym_sqrt, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub a: f64,
    pub varsigma0: f64,
    pub zeta: f64,
    pub varsigma: f64,
}

impl GarchParams {
    /// Parameters with unit marginal score variance for a given AR
    /// coefficient and GARCH shape.
    pub fn unit_variance(a: f64, zeta: f64, varsigma: f64) -> Self {
        GarchParams { a, varsigma0: (1.0 - a * a) * (1.0 - zeta - varsigma), zeta, varsigma }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dynamics {
    /// `z_i = Pi z_{i-1} + eps_i`, `eps_i ~ N(0, Sigma)`.
    LinearVar { pi: Vec<Vec<f64>>, sigma: Vec<Vec<f64>> },
    /// `z_i = Pi z_{i-1} + H_i^{1/2} eta_i` with scalar BEKK `H_i`.
    VarSbekk { pi: Vec<Vec<f64>>, c: Vec<Vec<f64>>, a: f64, g: f64 },
    /// Independent AR(1)-GARCH(1,1) per score.
    UnivArGarch { params: Vec<GarchParams> },
}

impl Dynamics {
    pub fn is_heteroscedastic(&self) -> bool {
        !matches!(self, Dynamics::LinearVar { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    /// Orthonormalized sines and cosines.
    #[default]
    Fourier,
    /// Orthonormalized seeded Gaussian vectors.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlFactorSpec {
    pub j0: usize,
    pub t: usize,
    /// Empty means zero.
    #[serde(default)]
    pub mean_curve: Vec<f64>,
    /// `J0` vectors of length `T`. Empty means "generate from `basis`".
    #[serde(default)]
    pub eigenfunctions: Vec<Vec<f64>>,
    #[serde(default)]
    pub basis: BasisKind,
    pub lambdas: Vec<f64>,
    pub dynamics: Dynamics,
    #[serde(default)]
    pub noise_sigma2: f64,
    #[serde(default)]
    pub seed: u64,
    /// Reject parameters that violate the unit-marginal-variance restrictions.
    #[serde(default)]
    pub enforce_unit_variance: bool,
}

fn diag_rows(d: &[f64]) -> Vec<Vec<f64>> {
    (0..d.len()).map(|r| (0..d.len()).map(|c| if r == c { d[r] } else { 0.0 }).collect()).collect()
}

impl KlFactorSpec {
    /// Gaussian VAR(1) scores with diagonal `Pi` and `Sigma = I - Pi Pi'`.
    pub fn var_diagonal(t: usize, lambdas: Vec<f64>, pi_diag: &[f64], noise_sigma2: f64, seed: u64) -> Self {
        let sigma: Vec<f64> = pi_diag.iter().map(|p| 1.0 - p * p).collect();
        KlFactorSpec {
            j0: lambdas.len(),
            t,
            mean_curve: vec![],
            eigenfunctions: vec![],
            basis: BasisKind::Fourier,
            lambdas,
            dynamics: Dynamics::LinearVar { pi: diag_rows(pi_diag), sigma: diag_rows(&sigma) },
            noise_sigma2,
            seed,
            enforce_unit_variance: false,
        }
    }

    /// VAR(1)-sBEKK scores with diagonal `Pi` and `CC' = (1 - a - g)(I - Pi Pi')`.
    pub fn var_sbekk(
        t: usize,
        lambdas: Vec<f64>,
        pi_diag: &[f64],
        a: f64,
        g: f64,
        noise_sigma2: f64,
        seed: u64,
    ) -> Self {
        let c: Vec<f64> = pi_diag.iter().map(|p| ((1.0 - a - g) * (1.0 - p * p)).sqrt()).collect();
        KlFactorSpec {
            dynamics: Dynamics::VarSbekk { pi: diag_rows(pi_diag), c: diag_rows(&c), a, g },
            ..Self::var_diagonal(t, lambdas, pi_diag, noise_sigma2, seed)
        }
    }

    /// Independent AR(1)-GARCH(1,1) scores.
    pub fn ar_garch(t: usize, lambdas: Vec<f64>, params: Vec<GarchParams>, noise_sigma2: f64, seed: u64) -> Self {
        let zeros = vec![0.0; lambdas.len()];
        KlFactorSpec {
            dynamics: Dynamics::UnivArGarch { params },
            ..Self::var_diagonal(t, lambdas, &zeros, noise_sigma2, seed)
        }
    }

    /// Eigenfunctions as a `T x J0` matrix (generated when not given).
    pub fn basis_matrix(&self) -> Result<Mat> {
        if self.eigenfunctions.is_empty() {
            make_orthonormal_basis(self.t, self.j0, self.seed, self.basis)
        } else {
            Ok(Mat::from_fn(self.t, self.j0, |r, c| self.eigenfunctions[c][r]))
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.j0 == 0 || self.t == 0 || self.j0 > self.t {
            return bad(format!("need 1 <= J0 <= T, got J0={} T={}", self.j0, self.t));
        }
        if self.lambdas.len() != self.j0 || self.lambdas.iter().any(|l| !(*l > 0.0)) {
            return bad("lambdas must be J0 positive values".into());
        }
        if !self.mean_curve.is_empty() && self.mean_curve.len() != self.t {
            return bad("mean_curve must have length T".into());
        }
        if !(self.noise_sigma2 >= 0.0) {
            return bad("noise_sigma2 must be nonnegative".into());
        }
        if !self.eigenfunctions.is_empty() {
            if self.eigenfunctions.len() != self.j0 || self.eigenfunctions.iter().any(|f| f.len() != self.t) {
                return bad("eigenfunctions must be J0 vectors of length T".into());
            }
            let xi = self.basis_matrix()?;
            let gram = xi.transpose() * &xi;
            if (gram - Mat::identity(self.j0, self.j0)).amax() > 1e-10 {
                return bad("eigenfunctions are not orthonormal".into());
            }
        }
        let j = self.j0;
        let square = |m: &Vec<Vec<f64>>, name: &str| -> Result<Mat> {
            if m.len() != j || m.iter().any(|r| r.len() != j) {
                return Err(Error::InvalidSpec(format!("{name} must be J0 x J0")));
            }
            Ok(from_rows(m))
        };
        let id = Mat::identity(j, j);
        match &self.dynamics {
            Dynamics::LinearVar { pi, sigma } => {
                let pi = square(pi, "pi")?;
                let sigma = square(sigma, "sigma")?;
                stationary(&pi)?;
                if sigma.clone().cholesky().is_none() {
                    return bad("sigma must be positive definite".into());
                }
                if self.enforce_unit_variance && (&sigma - (&id - &pi * pi.transpose())).amax() > 1e-8 {
                    return bad("unit variance requires Sigma = I - Pi Pi'".into());
                }
            }
            Dynamics::VarSbekk { pi, c, a, g } => {
                let pi = square(pi, "pi")?;
                let c = square(c, "c")?;
                stationary(&pi)?;
                if !(*a >= 0.0 && *g >= 0.0 && a + g < 1.0) {
                    return bad(format!("sBEKK needs a, g >= 0 and a + g < 1, got a={a} g={g}"));
                }
                let cct = &c * c.transpose();
                if cct.clone().cholesky().is_none() {
                    return bad("CC' must be positive definite".into());
                }
                if self.enforce_unit_variance && ((&id - &pi * pi.transpose()) - cct / (1.0 - a - g)).amax() > 1e-8 {
                    return bad("unit variance requires I - Pi Pi' = CC'/(1 - a - g)".into());
                }
            }
            Dynamics::UnivArGarch { params } => {
                if params.len() != j {
                    return bad("one GARCH parameter set per score".into());
                }
                for p in params {
                    if !(p.a.abs() < 1.0
                        && p.varsigma0 > 0.0
                        && p.zeta >= 0.0
                        && p.varsigma >= 0.0
                        && p.zeta + p.varsigma < 1.0)
                    {
                        return bad(format!("invalid AR-GARCH parameters {p:?}"));
                    }
                    if self.enforce_unit_variance
                        && ((1.0 - p.a * p.a) - p.varsigma0 / (1.0 - p.zeta - p.varsigma)).abs() > 1e-8
                    {
                        return bad("unit variance requires 1 - a^2 = varsigma0/(1 - zeta - varsigma)".into());
                    }
                }
            }
        }
        Ok(())
    }
}

fn stationary(pi: &Mat) -> Result<()> {
    let rho = crate::score_models::var::spectral_radius(pi);
    if rho >= 1.0 {
        return Err(Error::InvalidSpec(format!("spectral radius {rho} >= 1")));
    }
    Ok(())
}

/// `J0` orthonormal vectors of length `T` as the columns of a matrix.
pub fn make_orthonormal_basis(t: usize, j0: usize, seed: u64, kind: BasisKind) -> Result<Mat> {
    if j0 > t {
        return Err(Error::InvalidSpec(format!("J0={j0} exceeds T={t}")));
    }
    let candidates: Box<dyn Iterator<Item = Vec<f64>>> = match kind {
        BasisKind::Fourier => Box::new(
            (0..)
                .map(move |k: usize| {
                    let freq = k.div_ceil(2) as f64;
                    (0..t)
                        .map(|s| {
                            let x = 2.0 * std::f64::consts::PI * freq * (s as f64 + 0.5) / t as f64;
                            if k == 0 {
                                1.0
                            } else if k % 2 == 1 {
                                x.cos()
                            } else {
                                x.sin()
                            }
                        })
                        .collect()
                })
                .take(2 * t + 2),
        ),
        BasisKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Box::new(
                std::iter::repeat_with(move || (0..t).map(|_| StandardNormal.sample(&mut rng)).collect::<Vec<f64>>())
                    .take(4 * t + 4),
            )
        }
    };
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(j0);
    for mut v in candidates {
        if cols.len() == j0 {
            break;
        }
        // modified Gram-Schmidt, two passes
        for _ in 0..2 {
            for q in &cols {
                let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
            }
        }
        let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nrm > 1e-8 {
            v.iter_mut().for_each(|a| *a /= nrm);
            cols.push(v);
        }
    }
    if cols.len() < j0 {
        return Err(Error::InvalidSpec("could not build an orthonormal basis".into()));
    }
    Ok(Mat::from_fn(t, j0, |r, c| cols[c][r]))
}

/// Standardized score paths `z` (`n_days x J0`) after discarding `burn_in` days.
fn simulate_scores(spec: &KlFactorSpec, n_days: usize, burn_in: usize, rng: &mut ChaCha8Rng) -> Result<Mat> {
    let j = spec.j0;
    let total = n_days + burn_in;
    let mut z = Mat::zeros(total, j);
    let normal = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..j).map(|_| StandardNormal.sample(rng)).collect() };
    match &spec.dynamics {
        Dynamics::LinearVar { pi, sigma } => {
            let pi = from_rows(pi);
            let l = Cholesky::new(from_rows(sigma)).ok_or_else(|| Error::InvalidSpec("sigma not PD".into()))?.l();
            let mut prev = nalgebra::DVector::zeros(j);
            for i in 0..total {
                let eta = nalgebra::DVector::from_vec(normal(rng));
                let cur = &pi * &prev + &l * eta;
                z.row_mut(i).copy_from(&cur.transpose());
                prev = cur;
            }
        }
        Dynamics::VarSbekk { pi, c, a, g } => {
            let pi = from_rows(pi);
            let c = from_rows(c);
            let cct = &c * c.transpose();
            let mut h = &cct / (1.0 - a - g);
            let mut prev = nalgebra::DVector::zeros(j);
            let mut eps_prev = nalgebra::DVector::zeros(j);
            for i in 0..total {
                if i > 0 {
                    h = &cct + &eps_prev * eps_prev.transpose() * *a + &h * *g;
                }
                let eta = nalgebra::DVector::from_vec(normal(rng));
                let eps = sym_sqrt(&h) * eta;
                let cur = &pi * &prev + &eps;
                z.row_mut(i).copy_from(&cur.transpose());
                prev = cur;
                eps_prev = eps;
            }
        }
        Dynamics::UnivArGarch { params } => {
            let mut prev = vec![0.0; j];
            let mut h: Vec<f64> = params.iter().map(|p| p.varsigma0 / (1.0 - p.zeta - p.varsigma)).collect();
            let mut eps_prev = vec![0.0; j];
            for i in 0..total {
                let eta = normal(rng);
                for (k, p) in params.iter().enumerate() {
                    if i > 0 {
                        h[k] = p.varsigma0 + p.zeta * eps_prev[k] * eps_prev[k] + p.varsigma * h[k];
                    }
                    let eps = h[k].sqrt() * eta[k];
                    let cur = p.a * prev[k] + eps;
                    z[(i, k)] = cur;
                    prev[k] = cur;
                    eps_prev[k] = eps;
                }
            }
        }
    }
    Ok(z.rows(burn_in, n_days).into_owned())
}

/// Simulated panel (not demeaned) and the true scores `sqrt(lambda_j) z_ij`.
pub fn simulate_panel(spec: &KlFactorSpec, n_days: usize, burn_in: usize) -> Result<(ReturnCurvePanel, Mat)> {
    spec.validate()?;
    if spec.dynamics.is_heteroscedastic() && burn_in < 200 {
        return Err(Error::Precondition(format!("heteroscedastic dynamics need burn_in >= 200, got {burn_in}")));
    }
    let t = spec.t;
    let xi = spec.basis_matrix()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let z = simulate_scores(spec, n_days, burn_in, &mut rng)?;
    let scale: Vec<f64> = spec.lambdas.iter().map(|l| l.sqrt()).collect();
    let scores = Mat::from_fn(n_days, spec.j0, |i, k| z[(i, k)] * scale[k]);
    let sigma = spec.noise_sigma2.sqrt();
    let mean = if spec.mean_curve.is_empty() { vec![0.0; t] } else { spec.mean_curve.clone() };
    let mut rows = Vec::with_capacity(n_days);
    for i in 0..n_days {
        let mut noise: Vec<f64> =
            (0..t).map(|_| sigma * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
        if sigma > 0.0 {
            for k in 0..spec.j0 {
                let d: f64 = (0..t).map(|s| noise[s] * xi[(s, k)]).sum();
                for (s, e) in noise.iter_mut().enumerate() {
                    *e -= d * xi[(s, k)];
                }
            }
        }
        let row: Vec<f64> = (0..t)
            .map(|s| mean[s] + (0..spec.j0).map(|k| scores[(i, k)] * xi[(s, k)]).sum::<f64>() + noise[s])
            .collect();
        rows.push(row);
    }
    let mut panel = ReturnCurvePanel::from_rows(rows)?;
    if SECONDS_PER_DAY % t as i64 == 0 {
        panel.grid_step = SECONDS_PER_DAY / t as i64;
    }
    Ok((panel, scores))
}

/// A single AR(1)-GARCH(1,1) path without intercept.
pub fn simulate_ar_garch(p: &GarchParams, n: usize, burn_in: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = p.varsigma0 / (1.0 - p.zeta - p.varsigma);
    let mut y = 0.0;
    let mut eps = 0.0;
    let mut out = Vec::with_capacity(n);
    for i in 0..n + burn_in {
        if i > 0 {
            h = p.varsigma0 + p.zeta * eps * eps + p.varsigma * h;
        }
        let z: f64 = StandardNormal.sample(&mut rng);
        eps = h.sqrt() * z;
        y = p.a * y + eps;
        if i >= burn_in {
            out.push(y);
        }
    }
    out
}
