use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{nonzero_column_norms, CMatrix, C64};

/// Largest normalized absolute inner product between two distinct columns.
pub fn mutual_coherence(psi: &CMatrix) -> Result<f64> {
    if psi.ncols() < 2 {
        return Err(Error::invalid(format!(
            "mutual coherence needs at least 2 columns, got {}",
            psi.ncols()
        )));
    }
    let norms = nonzero_column_norms(psi)?;
    let mut unit = psi.clone();
    for (mut col, n) in unit.column_iter_mut().zip(&norms) {
        col.unscale_mut(*n);
    }
    let gram = unit.adjoint() * &unit;
    let p = gram.ncols();
    let mut mu = 0.0_f64;
    for j in 0..p {
        for i in 0..j {
            mu = mu.max(gram[(i, j)].norm());
        }
    }
    Ok(mu.min(1.0))
}

/// Welch lower bound `√((P−N) / (N(P−1)))` on the coherence of `P` unit
/// vectors in `N` dimensions.
pub fn welch_bound(n: usize, p: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("Welch bound needs N >= 1"));
    }
    if p < 2 {
        return Err(Error::invalid(format!("Welch bound needs P >= 2, got {p}")));
    }
    if p < n {
        return Err(Error::invalid(format!("Welch bound needs P >= N, got N={n}, P={p}")));
    }
    Ok((((p - n) as f64) / ((n * (p - 1)) as f64)).sqrt())
}

/// Diagonal of `D = diag{1/‖q_1‖, …, 1/‖q_P‖}`.
pub fn column_normalizer(q: &CMatrix) -> Result<DVector<f64>> {
    let norms = nonzero_column_norms(q)?;
    Ok(DVector::from_iterator(norms.len(), norms.into_iter().map(|n| 1.0 / n)))
}

/// `E = D Qᴴ Q D − I`, with `d` the diagonal of `D`.
pub fn gram_error(q: &CMatrix, d: &DVector<f64>) -> Result<CMatrix> {
    if q.ncols() != d.len() {
        return Err(Error::invalid(format!(
            "normalizer length {} does not match {} columns",
            d.len(),
            q.ncols()
        )));
    }
    let mut psi = q.clone();
    for (mut col, s) in psi.column_iter_mut().zip(d.iter()) {
        col.scale_mut(*s);
    }
    let mut e = psi.adjoint() * &psi;
    for i in 0..e.nrows() {
        e[(i, i)] -= C64::new(1.0, 0.0);
    }
    Ok(e)
}

/// Entry-wise complex soft threshold at `alpha · beta`.
pub fn shrink_error(e: &CMatrix, alpha: f64, beta: f64) -> CMatrix {
    let threshold = alpha * beta;
    e.map(|z| {
        let mag = z.norm();
        if mag < threshold || mag == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            z * ((mag - threshold) / mag)
        }
    })
}
