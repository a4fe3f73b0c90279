//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Symmetric eigendecomposition with eigenvalues sorted nonincreasing.
///
/// The sort is stable, so tied eigenvalues keep the solver's order.
/// Columns of the returned matrix are the matching unit eigenvectors.
pub fn sym_eigen_desc(m: &Mat) -> (Vec<f64>, Mat) {
    let sym = symmetrize(m);
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = Mat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Symmetric PSD square root via eigendecomposition; negative eigenvalues are clipped.
pub fn sym_sqrt(m: &Mat) -> Mat {
    let (vals, vecs) = sym_eigen_desc(m);
    let d = Vector::from_iterator(vals.len(), vals.iter().map(|v| v.max(0.0).sqrt()));
    &vecs * Mat::from_diagonal(&d) * vecs.transpose()
}

/// True when `m` is symmetric and its smallest eigenvalue is not below `-tol * scale`.
pub fn is_psd(m: &Mat, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    if m.nrows() == 0 {
        return true;
    }
    let scale = m.amax().max(1e-300);
    if (m - m.transpose()).amax() > tol * scale.max(1.0) {
        return false;
    }
    let (vals, _) = sym_eigen_desc(m);
    vals.last().copied().unwrap_or(0.0) >= -tol * scale
}

pub fn from_rows(rows: &[Vec<f64>]) -> Mat {
    let nr = rows.len();
    let nc = rows.first().map_or(0, |r| r.len());
    Mat::from_fn(nr, nc, |i, j| rows[i][j])
}

pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Column means of an `n x p` matrix.
pub fn col_means(m: &Mat) -> Vec<f64> {
    let n = m.nrows().max(1) as f64;
    (0..m.ncols()).map(|j| m.column(j).sum() / n).collect()
}

/// Least-squares solve of `x * b = y` via the normal equations and Cholesky.
///
/// Returns `None` when `x'x` is numerically singular.
pub fn ols(x: &Mat, y: &Mat) -> Option<Mat> {
    let xtx = x.transpose() * x;
    let xty = x.transpose() * y;
    let diag_max = xtx.diagonal().amax();
    if !(diag_max > 0.0) {
        return None;
    }
    let (vals, _) = sym_eigen_desc(&xtx);
    let min = vals.last().copied().unwrap_or(0.0);
    if min <= 1e-12 * vals[0] {
        return None;
    }
    let chol = xtx.cholesky()?;
    Some(chol.solve(&xty))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_desc() {
        let m = Mat::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, 5.0, 0.0, 0.0, 0.0, 1.0]);
        let (vals, vecs) = sym_eigen_desc(&m);
        assert_eq!(vals, vec![5.0, 2.0, 1.0]);
        assert!((vecs[(1, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let m = Mat::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let r = sym_sqrt(&m);
        assert!((&r * &r - &m).amax() < 1e-12);
        assert!((&r - r.transpose()).amax() < 1e-14);
    }

    #[test]
    fn psd_detection() {
        assert!(is_psd(&Mat::identity(3, 3), 1e-10));
        let m = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(!is_psd(&m, 1e-10));
        let asym = Mat::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(!is_psd(&asym, 1e-10));
    }

    #[test]
    fn ols_detects_collinearity() {
        let x = Mat::from_row_slice(4, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0, 4.0, 8.0]);
        let y = Mat::from_row_slice(4, 1, &[1.0, 2.0, 3.0, 4.0]);
        assert!(ols(&x, &y).is_none());
    }
}
