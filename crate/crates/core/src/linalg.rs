//! Small dense complex linear-algebra helpers shared by the other modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative singular-value tolerance below which a least-squares system is
/// reported as rank deficient.
pub const RANK_RTOL: f64 = 1e-12;

/// A column whose norm is at most this fraction of the largest column norm is
/// treated as zero.
pub const ZERO_COLUMN_RTOL: f64 = 1e-10;

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn column_norms(m: &CMatrix) -> Vec<f64> {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect()
}

/// Column norms, failing on the first column that is zero relative to the
/// largest one (or non-finite).
pub fn nonzero_column_norms(m: &CMatrix) -> Result<Vec<f64>> {
    let norms = column_norms(m);
    let max = norms.iter().cloned().fold(0.0_f64, f64::max);
    for (index, &n) in norms.iter().enumerate() {
        if !n.is_finite() || n == 0.0 || n <= ZERO_COLUMN_RTOL * max {
            return Err(Error::ZeroColumn { index });
        }
    }
    Ok(norms)
}

/// Least-squares solution of `a · x = b` through an SVD.
///
/// Fails with [`Error::RankDeficient`] when the smallest singular value is at
/// most [`RANK_RTOL`] times the largest; nothing is truncated silently.
pub fn lstsq(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.nrows() != b.nrows() {
        return Err(Error::invalid(format!(
            "least-squares row mismatch: {} vs {}",
            a.nrows(),
            b.nrows()
        )));
    }
    let cols = a.ncols();
    if cols == 0 {
        return Ok(CMatrix::zeros(0, b.ncols()));
    }
    if cols > a.nrows() {
        return Err(Error::RankDeficient { rank: a.nrows(), cols });
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let tol = RANK_RTOL * smax;
    let rank = sv.iter().filter(|&&s| s > tol).count();
    if rank < cols || !smax.is_finite() {
        return Err(Error::RankDeficient { rank, cols });
    }
    svd.solve(b, tol)
        .map_err(|e| Error::invalid(format!("least-squares solve failed: {e}")))
}

/// Khatri-Rao (column-wise Kronecker) product of two column vectors:
/// `[x₀·v; x₁·v; …]`.
pub fn khatri_rao(x: &CVector, v: &CVector) -> CVector {
    let n = v.len();
    CVector::from_fn(x.len() * n, |i, _| x[i / n] * v[i % n])
}

/// Column-major vectorization.
pub fn vec(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}
