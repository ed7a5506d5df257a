use crate::error::{Error, Result};
use crate::linalg::{column_norms, frobenius_sq, lstsq, CMatrix, ZERO_COLUMN_RTOL};
use crate::projection_design::SensingMatrix;

/// Support and coefficients returned by [`omp`].
#[derive(Debug, Clone, PartialEq)]
pub struct OmpSupport {
    /// Selected grid indices in selection order.
    pub indices: Vec<usize>,
    /// `K × L` least-squares coefficients, row `k` for `indices[k]`.
    pub coefficients: CMatrix,
}

/// Simultaneous (multi-snapshot) OMP.
///
/// Each round picks the column maximizing `‖ψ_pᴴR‖₂ / ‖ψ_p‖₂` over the
/// residual matrix, re-solves least squares jointly on the selected set and
/// updates the residual. Columns that vanish (numerically zero norm) are never
/// selected.
pub fn omp(y: &CMatrix, sensing: &SensingMatrix<'_>, k: usize) -> Result<OmpSupport> {
    let psi = sensing.psi();
    let (n, p) = (psi.nrows(), psi.ncols());
    if y.nrows() != n {
        return Err(Error::invalid(format!(
            "measurement has {} rows but the sensing matrix has {n}",
            y.nrows()
        )));
    }
    if k == 0 || k > n || k > p {
        return Err(Error::invalid(format!(
            "OMP needs 1 <= K <= N <= P, got K={k}, N={n}, P={p}"
        )));
    }
    if y.ncols() == 0 || frobenius_sq(y) == 0.0 {
        return Err(Error::EmptySelection);
    }

    let norms = column_norms(psi);
    let max_norm = norms.iter().cloned().fold(0.0_f64, f64::max);
    let usable: Vec<bool> = norms
        .iter()
        .map(|&n| n.is_finite() && n > ZERO_COLUMN_RTOL * max_norm && n > 0.0)
        .collect();

    let mut indices: Vec<usize> = Vec::with_capacity(k);
    let mut residual = y.clone();
    let mut coefficients = CMatrix::zeros(0, y.ncols());
    for _ in 0..k {
        let corr = psi.adjoint() * &residual;
        let mut best: Option<(usize, f64)> = None;
        for col in 0..p {
            if !usable[col] || indices.contains(&col) {
                continue;
            }
            let score = corr.row(col).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / norms[col];
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((col, score));
            }
        }
        let (col, _) = best.ok_or(Error::EmptySelection)?;
        indices.push(col);
        let basis = psi.select_columns(&indices);
        coefficients = lstsq(&basis, y)?;
        residual = y - &basis * &coefficients;
    }
    Ok(OmpSupport { indices, coefficients })
}
