//! On-grid sparse coding followed by gradient OMP refinement.
//!
//! [`estimate`] runs simultaneous OMP over the sensing matrix `ΦÅ` to get
//! on-grid frequencies and waveforms, then [`refine_multi`] removes the grid
//! sampling error source by source with first-order (Taylor) steps on the
//! steering vector.

mod gomp;
mod omp;

use crate::array_model::Dictionary;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::projection_design::{ProjectionMatrix, SensingMatrix};

pub use gomp::{delta_step, ls_signal, refine_multi, refine_single, residual_cost, Refinement};
pub use omp::{omp, OmpSupport};

/// Inner (`i_max`) and outer (`j_max`) iteration budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GompConfig {
    pub i_max: usize,
    pub j_max: usize,
}

impl Default for GompConfig {
    fn default() -> Self {
        Self { i_max: 10, j_max: 5 }
    }
}

impl GompConfig {
    pub fn validate(&self) -> Result<()> {
        if self.i_max == 0 {
            return Err(Error::config("i_max", "i_max >= 1 required"));
        }
        if self.j_max == 0 {
            return Err(Error::config("j_max", "j_max >= 1 required"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub nu_hat: Vec<f64>,
    /// `K × L`, row `k` is the waveform of `nu_hat[k]`.
    pub x_hat: CMatrix,
    /// Accepted costs of every single-source refinement, in call order
    /// (outer pass major, source minor). Each entry is non-increasing.
    pub residual_history: Vec<Vec<f64>>,
    /// Grid indices chosen by OMP (empty when refinement was started from
    /// caller-supplied frequencies).
    pub initial_grid_indices: Vec<usize>,
    pub nu_initial: Vec<f64>,
}

/// OMP initialization on the dictionary grid followed by GOMP refinement.
pub fn estimate(
    y: &CMatrix,
    phi: &ProjectionMatrix,
    dict: &Dictionary,
    k: usize,
    cfg: &GompConfig,
) -> Result<EstimationResult> {
    cfg.validate()?;
    if k > phi.rows() {
        return Err(Error::invalid(format!("K <= N required, got K={k}, N={}", phi.rows())));
    }
    let sensing = SensingMatrix::new(phi, dict)?;
    let support = omp(y, &sensing, k)?;
    let nu0: Vec<f64> = support.indices.iter().map(|&p| dict.grid()[p]).collect();
    let mut result = refine_multi(y, phi, &nu0, &support.coefficients, cfg)?;
    result.initial_grid_indices = support.indices;
    Ok(result)
}
