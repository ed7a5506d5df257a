//! Sensing-matrix diagnostics and constant-modulus projection design.
//!
//! A projection `Φ` (N × M, unit-modulus entries) compresses the array output;
//! together with a grid dictionary `Å` it forms the sensing matrix `Ψ = ΦÅ`.
//! [`design`] lowers the mutual coherence of `Ψ` by projected gradient descent
//! on `η(Φ) = ‖DQᴴQD − I‖²_F` where the error matrix is soft-thresholded at
//! `α·β` (β the Welch bound) before it enters the gradient.

mod coherence;
mod descent;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::array_model::Dictionary;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

pub use coherence::{column_normalizer, gram_error, mutual_coherence, shrink_error, welch_bound};
pub use descent::{
    cm_project, design, design_alpha_sweep, gradient_eta, initial_projection, objective_eta, DesignConfig, DesignTrace,
    DesignVariant, InitKind,
};

/// Entries of a valid projection have modulus 1 within this tolerance.
pub const CM_TOLERANCE: f64 = 1e-9;

/// An `N × M` analog projection with unit-modulus entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix(CMatrix);

impl ProjectionMatrix {
    pub fn new(phi: CMatrix) -> Result<Self> {
        if phi.nrows() == 0 || phi.ncols() == 0 {
            return Err(Error::invalid("projection matrix must be non-empty"));
        }
        if let Some((i, z)) = phi.iter().enumerate().find(|(_, z)| {
            let dev = (z.norm() - 1.0).abs();
            dev.is_nan() || dev > CM_TOLERANCE
        }) {
            let (r, c) = (i % phi.nrows(), i / phi.nrows());
            return Err(Error::invalid(format!(
                "projection entry ({r},{c}) = {z} violates the constant-modulus constraint"
            )));
        }
        Ok(Self(phi))
    }

    /// Projects an arbitrary matrix onto the constant-modulus set.
    pub fn from_projected(z: &CMatrix) -> Result<Self> {
        Self::new(cm_project(z))
    }

    /// Entry `(n, m)` is `e^{jθ_{n,m}}`.
    pub fn from_phases(rows: usize, cols: usize, phases: &[f64]) -> Result<Self> {
        if phases.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} phases, got {}",
                rows * cols,
                phases.len()
            )));
        }
        Self::new(CMatrix::from_row_iterator(
            rows,
            cols,
            phases.iter().map(|&t| C64::from_polar(1.0, t)),
        ))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }
}

/// `Ψ = ΦÅ` together with the pieces it was built from.
#[derive(Debug, Clone)]
pub struct SensingMatrix<'a> {
    psi: CMatrix,
    phi: &'a ProjectionMatrix,
    dictionary: &'a Dictionary,
}

impl<'a> SensingMatrix<'a> {
    pub fn new(phi: &'a ProjectionMatrix, dictionary: &'a Dictionary) -> Result<Self> {
        if phi.cols() != dictionary.sensors() {
            return Err(Error::invalid(format!(
                "projection has {} columns but the dictionary has {} sensors",
                phi.cols(),
                dictionary.sensors()
            )));
        }
        if dictionary.len() < phi.rows() {
            return Err(Error::invalid(format!(
                "sensing matrix needs P >= N, got P={}, N={}",
                dictionary.len(),
                phi.rows()
            )));
        }
        let psi = phi.as_matrix() * dictionary.atoms();
        Ok(Self { psi, phi, dictionary })
    }

    pub fn psi(&self) -> &CMatrix {
        &self.psi
    }

    pub fn projection(&self) -> &'a ProjectionMatrix {
        self.phi
    }

    pub fn dictionary(&self) -> &'a Dictionary {
        self.dictionary
    }

    pub fn coherence(&self) -> Result<f64> {
        mutual_coherence(&self.psi)
    }
}

/// `N` rows of the `M`-point DFT matrix at stride `M/N`, starting at row 0.
pub fn dft_projection(n: usize, m: usize) -> Result<ProjectionMatrix> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("DFT projection needs N, M >= 1"));
    }
    if !m.is_multiple_of(n) {
        return Err(Error::invalid(format!(
            "DFT projection needs M divisible by N, got M={m}, N={n}"
        )));
    }
    let stride = m / n;
    let phi = CMatrix::from_fn(n, m, |r, c| {
        // reduce the exponent mod M so large products stay exact
        let k = ((r * stride * c) % m) as f64;
        C64::from_polar(1.0, -2.0 * PI * k / m as f64)
    });
    ProjectionMatrix::new(phi)
}

/// I.i.d. uniform phases in `[0, 2π)`, deterministic per seed.
pub fn random_cm_projection(n: usize, m: usize, seed: u64) -> ProjectionMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = CMatrix::from_fn(n, m, |_, _| C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)));
    ProjectionMatrix(phi)
}

/// Which projection a benchmark uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    /// Shrunk-error gradient descent with full normalized-Gram gradient.
    Designed,
    Dft,
    Random,
    /// Shrunk-error descent that treats the column normalizer as constant.
    GdPriorA,
    /// Full normalized-Gram gradient without shrinking.
    GdPriorB,
}

impl ProjectionKind {
    pub const ALL: [ProjectionKind; 5] = [
        ProjectionKind::Designed,
        ProjectionKind::GdPriorA,
        ProjectionKind::GdPriorB,
        ProjectionKind::Dft,
        ProjectionKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProjectionKind::Designed => "designed",
            ProjectionKind::Dft => "dft",
            ProjectionKind::Random => "random",
            ProjectionKind::GdPriorA => "gd_prior_a",
            ProjectionKind::GdPriorB => "gd_prior_b",
        }
    }

    /// The descent variant for the gradient-based kinds.
    pub fn variant(self) -> Option<DesignVariant> {
        match self {
            ProjectionKind::Designed => Some(DesignVariant::Shrunk),
            ProjectionKind::GdPriorA => Some(DesignVariant::FixedNormalizer),
            ProjectionKind::GdPriorB => Some(DesignVariant::Unshrunk),
            ProjectionKind::Dft | ProjectionKind::Random => None,
        }
    }
}

impl std::fmt::Display for ProjectionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Builds the projection of the given kind for a dictionary.
///
/// Gradient-based kinds start from [`initial_projection`] and sweep
/// `alpha_candidates` (ignored by the unshrunk variant).
pub fn build_projection(
    kind: ProjectionKind,
    dictionary: &Dictionary,
    n: usize,
    cfg: &DesignConfig,
    alpha_candidates: &[f64],
) -> Result<ProjectionMatrix> {
    let m = dictionary.sensors();
    match kind {
        ProjectionKind::Dft => dft_projection(n, m),
        ProjectionKind::Random => Ok(random_cm_projection(n, m, cfg.seed)),
        _ => {
            let variant = kind.variant().expect("gradient kind");
            let phi0 = initial_projection(dictionary, n, cfg.init, cfg.seed)?;
            let cfg = DesignConfig { variant, ..cfg.clone() };
            Ok(design_alpha_sweep(dictionary, &cfg, &phi0, alpha_candidates)?.final_phi)
        }
    }
}
