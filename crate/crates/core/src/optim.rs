//! Quasi-Newton minimization (BFGS with backtracking line search).
//!
//! Objectives return `(value, gradient)`. Non-finite values are treated as
//! infeasible and make the line search backtrack, which is how constrained
//! likelihoods reject invalid candidates.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub f_tol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options { max_iter: 500, grad_tol: 1e-6, f_tol: 1e-12 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    /// Objective value after every accepted step, starting with `f(x0)`.
    pub trace: Vec<f64>,
}

/// Convergence metadata carried by fitted models.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    pub restarts_used: usize,
}

fn inf_norm(g: &[f64]) -> f64 {
    g.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn bfgs<F>(mut fg: F, x0: &[f64], opts: Options) -> Minimum
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut f, mut g) = fg(&x);
    let mut trace = vec![f];
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Minimum { x, f, iterations: 0, grad_norm: f64::INFINITY, converged: false, trace };
    }
    // inverse Hessian approximation, row-major
    let mut hinv = vec![0.0; n * n];
    for i in 0..n {
        hinv[i * n + i] = 1.0;
    }
    let mut converged = false;
    let mut iterations = 0;
    let mut stalls = 0;

    for it in 0..opts.max_iter {
        iterations = it + 1;
        if inf_norm(&g) < opts.grad_tol {
            converged = true;
            break;
        }
        let mut dir: Vec<f64> = (0..n).map(|i| -dot(&hinv[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&dir, &g);
        if !(slope < 0.0) {
            // reset to steepest descent
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] = if i == j { 1.0 } else { 0.0 };
                }
            }
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&dir, &g);
        }
        let dnorm = inf_norm(&dir);
        let mut step = if dnorm > 1.0 { 1.0 / dnorm } else { 1.0 };
        if it > 0 {
            step = 1.0;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
            let (fnew, gnew) = fg(&xn);
            if fnew.is_finite() && gnew.iter().all(|v| v.is_finite()) && fnew <= f + 1e-4 * step * slope {
                accepted = Some((xn, fnew, gnew));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            // no descent possible along this direction
            converged = inf_norm(&g) < opts.grad_tol.sqrt();
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if it == 0 {
                // Shanno scaling of the initial inverse Hessian
                let scale = sy / dot(&y, &y);
                for v in hinv.iter_mut() {
                    *v *= scale;
                }
            }
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| dot(&hinv[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] += (1.0 + rho * yhy) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
        let df = f - fnew;
        x = xn;
        f = fnew;
        g = gnew;
        trace.push(f);
        if df <= opts.f_tol * (1.0 + f.abs()) {
            stalls += 1;
            if stalls >= 3 {
                converged = true;
                break;
            }
        } else {
            stalls = 0;
        }
    }
    let grad_norm = inf_norm(&g);
    if grad_norm < opts.grad_tol {
        converged = true;
    }
    Minimum { x, f, iterations, grad_norm, converged, trace }
}

/// Central finite-difference gradient.
pub fn numeric_gradient<F>(f: &mut F, x: &[f64]) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = 1e-6 * x[i].abs().max(1.0);
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Wrap a value-only objective so it can be fed to [`bfgs`].
pub fn with_numeric_gradient<F>(mut f: F) -> impl FnMut(&[f64]) -> (f64, Vec<f64>)
where
    F: FnMut(&[f64]) -> f64,
{
    move |x: &[f64]| {
        let v = f(x);
        if !v.is_finite() {
            return (v, vec![0.0; x.len()]);
        }
        let g = numeric_gradient(&mut f, x);
        (v, g)
    }
}

/// Run [`bfgs`] from several starting points and keep the best minimum.
pub fn multi_start<F>(mut fg: F, starts: &[Vec<f64>], opts: Options) -> Option<(Minimum, usize)>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut best: Option<Minimum> = None;
    let mut used = 0;
    for x0 in starts {
        let m = bfgs(&mut fg, x0, opts);
        if !m.f.is_finite() {
            continue;
        }
        used += 1;
        if best.as_ref().is_none_or(|b| m.f < b.f) {
            best = Some(m);
        }
    }
    best.map(|b| (b, used))
}
