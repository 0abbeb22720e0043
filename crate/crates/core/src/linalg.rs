//! Thin helpers over `nalgebra` for the dense, small matrices used here.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky_lower(a: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Factorization(format!(
            "{what}: matrix is {}x{}, not square",
            a.nrows(),
            a.ncols()
        )));
    }
    let sym_err = (a - a.transpose()).amax();
    if sym_err > 1e-10 * a.amax().max(1.0) {
        return Err(Error::Factorization(format!(
            "{what}: matrix is not symmetric (max asymmetry {sym_err:e})"
        )));
    }
    a.clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::Factorization(format!("{what}: matrix is not positive definite")))
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map(Vec::len).unwrap_or(0);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidParameter("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn to_rows(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows())
        .map(|i| a.row(i).iter().copied().collect())
        .collect()
}

/// Solves `L x = b` for lower-triangular `L`.
pub fn solve_lower(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    l.solve_lower_triangular(b)
        .expect("triangular factor has a zero on its diagonal")
}
