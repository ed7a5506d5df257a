use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coherence::{column_normalizer, gram_error, shrink_error, welch_bound};
use super::{random_cm_projection, ProjectionMatrix};
use crate::array_model::Dictionary;
use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, CMatrix, C64};

/// How the error matrix enters the descent direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignVariant {
    /// Shrunk error in both gradient terms.
    Shrunk,
    /// Shrunk error, first gradient term only: the normalizer `D` is held
    /// constant and columns are only renormalized when `E` is recomputed.
    FixedNormalizer,
    /// Exact error, full gradient (no shrinking).
    Unshrunk,
}

/// Starting point for the descent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    /// CM projection of the N principal left singular vectors of the
    /// dictionary, falling back to [`InitKind::Random`] when that subspace is
    /// not unique.
    Svd,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignConfig {
    /// Iteration budget; 0 returns the initial projection.
    pub t_max: usize,
    pub step_size: f64,
    /// Shrinkage relaxation, `α >= 1`.
    pub alpha: f64,
    /// Step halvings allowed per iteration while `η` increases before the CM
    /// projection.
    pub max_halvings: u32,
    pub variant: DesignVariant,
    pub init: InitKind,
    pub seed: u64,
}

impl Default for DesignConfig {
    fn default() -> Self {
        Self {
            t_max: 200,
            step_size: 0.5,
            alpha: 1.0,
            max_halvings: 20,
            variant: DesignVariant::Shrunk,
            init: InitKind::Svd,
            seed: 0,
        }
    }
}

impl DesignConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::config(
                "step_size",
                format!("must be positive, got {}", self.step_size),
            ));
        }
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return Err(Error::config(
                "alpha",
                format!("alpha >= 1 required, got {}", self.alpha),
            ));
        }
        Ok(())
    }
}

/// Per-iteration record of a design run.
#[derive(Debug, Clone)]
pub struct DesignTrace {
    /// `μ_max` of every iterate, starting with the initial projection.
    pub coherence_per_iter: Vec<f64>,
    /// `η` of every iterate (exact, unshrunk error).
    pub objective_per_iter: Vec<f64>,
    /// Step actually taken at iterations `1..`.
    pub step_sizes: Vec<f64>,
    /// Index of the iterate with the lowest coherence.
    pub best_iter: usize,
    /// The lowest-coherence iterate.
    pub final_phi: ProjectionMatrix,
    pub alpha: f64,
    pub variant: DesignVariant,
}

impl DesignTrace {
    pub fn initial_coherence(&self) -> f64 {
        self.coherence_per_iter[0]
    }

    pub fn best_coherence(&self) -> f64 {
        self.coherence_per_iter[self.best_iter]
    }

    /// Running minimum of the coherence trace.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.coherence_per_iter
            .iter()
            .scan(f64::INFINITY, |best, &c| {
                *best = best.min(c);
                Some(*best)
            })
            .collect()
    }
}

/// `Q = ΦÅ`, its normalizer and the Gram error.
struct GramState {
    q: CMatrix,
    d: DVector<f64>,
    e: CMatrix,
}

impl GramState {
    fn new(phi: &CMatrix, atoms: &CMatrix) -> Result<Self> {
        let q = phi * atoms;
        let d = column_normalizer(&q)?;
        let e = gram_error(&q, &d)?;
        Ok(Self { q, d, e })
    }

    fn eta(&self) -> f64 {
        frobenius_sq(&self.e)
    }

    /// Off-diagonal entries of `E` are the normalized inner products.
    fn coherence(&self) -> f64 {
        let p = self.e.ncols();
        let mut mu = 0.0_f64;
        for j in 0..p {
            for i in 0..j {
                mu = mu.max(self.e[(i, j)].norm());
            }
        }
        mu.min(1.0)
    }

    fn direction(&self, e_used: &CMatrix, atoms: &CMatrix, full: bool) -> CMatrix {
        let mut psi = self.q.clone();
        for (mut col, s) in psi.column_iter_mut().zip(self.d.iter()) {
            col.scale_mut(*s);
        }
        // columns of 4·ΨĒD − 2·Q·R, then times Åᴴ
        let mut w = &psi * e_used;
        for (p, mut col) in w.column_iter_mut().enumerate() {
            col.scale_mut(4.0 * self.d[p]);
            if full {
                // R_pp = [2ĒDQᴴQD³]_pp = 2 d_p² Σ_j Ē_pj (E_jp + δ_jp)
                let mut c = C64::new(0.0, 0.0);
                for j in 0..e_used.nrows() {
                    let gram = if j == p { self.e[(j, p)] + 1.0 } else { self.e[(j, p)] };
                    c += e_used[(p, j)] * gram;
                }
                let r = c * (2.0 * self.d[p] * self.d[p]);
                col.axpy(r * -2.0, &self.q.column(p), C64::new(1.0, 0.0));
            }
        }
        w * atoms.adjoint()
    }
}

fn check_shapes(phi: &CMatrix, dict: &Dictionary) -> Result<()> {
    if phi.ncols() != dict.sensors() {
        return Err(Error::invalid(format!(
            "projection has {} columns but the dictionary has {} sensors",
            phi.ncols(),
            dict.sensors()
        )));
    }
    Ok(())
}

/// `η(Φ) = ‖DQᴴQD − I‖²_F` with `Q = ΦÅ`.
///
/// Defined for any `Φ`, not only constant-modulus ones, so it can be probed
/// along arbitrary directions.
pub fn objective_eta(phi: &CMatrix, dict: &Dictionary) -> Result<f64> {
    check_shapes(phi, dict)?;
    Ok(GramState::new(phi, dict.atoms())?.eta())
}

/// `4QDE_uDÅᴴ − 2ΦÅRÅᴴ` with `R = diag(2E_uDQᴴQD³)` and `E_u` the supplied
/// (exact or shrunk) error matrix.
///
/// With the exact error this is the gradient of [`objective_eta`] in the
/// sense that the directional derivative along `Δ` is `Re⟨G, Δ⟩`.
pub fn gradient_eta(phi: &CMatrix, dict: &Dictionary, e_used: &CMatrix) -> Result<CMatrix> {
    check_shapes(phi, dict)?;
    let p = dict.len();
    if e_used.nrows() != p || e_used.ncols() != p {
        return Err(Error::invalid(format!(
            "error matrix must be {p}x{p}, got {}x{}",
            e_used.nrows(),
            e_used.ncols()
        )));
    }
    let state = GramState::new(phi, dict.atoms())?;
    Ok(state.direction(e_used, dict.atoms(), true))
}

/// Entry-wise `z/|z|`; zero entries map to 1.
pub fn cm_project(z: &CMatrix) -> CMatrix {
    z.map(|v| {
        let mag = v.norm();
        if mag == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            v / mag
        }
    })
}

/// Projected gradient descent on `η` with the configured error shaping.
/// Returns the lowest-coherence iterate.
pub fn design(dict: &Dictionary, cfg: &DesignConfig, phi0: &ProjectionMatrix) -> Result<DesignTrace> {
    cfg.validate()?;
    check_shapes(phi0.as_matrix(), dict)?;
    let atoms = dict.atoms();
    let beta = welch_bound(phi0.rows(), dict.len())?;

    let mut phi = phi0.as_matrix().clone();
    let mut state = GramState::new(&phi, atoms)?;
    let mut coherence = vec![state.coherence()];
    let mut objective = vec![state.eta()];
    let mut steps = Vec::with_capacity(cfg.t_max);
    let mut best_iter = 0;
    let mut best_phi = phi.clone();

    for t in 1..=cfg.t_max {
        let e_used = match cfg.variant {
            DesignVariant::Unshrunk => state.e.clone(),
            _ => shrink_error(&state.e, cfg.alpha, beta),
        };
        let grad = state.direction(&e_used, atoms, cfg.variant != DesignVariant::FixedNormalizer);
        if grad.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            break;
        }

        let eta0 = state.eta();
        let mut step = cfg.step_size;
        let mut halvings = 0;
        let trial = loop {
            let trial = &phi - &grad * C64::new(step, 0.0);
            let eta = GramState::new(&trial, atoms).map(|s| s.eta());
            match eta {
                Ok(eta) if eta <= eta0 => break trial,
                _ if halvings >= cfg.max_halvings => break trial,
                _ => {
                    step *= 0.5;
                    halvings += 1;
                }
            }
        };

        phi = cm_project(&trial);
        state = GramState::new(&phi, atoms)?;
        let mu = state.coherence();
        coherence.push(mu);
        objective.push(state.eta());
        steps.push(step);
        if mu < coherence[best_iter] {
            best_iter = t;
            best_phi = phi.clone();
        }
    }

    Ok(DesignTrace {
        coherence_per_iter: coherence,
        objective_per_iter: objective,
        step_sizes: steps,
        best_iter,
        final_phi: ProjectionMatrix::new(best_phi)?,
        alpha: cfg.alpha,
        variant: cfg.variant,
    })
}

/// Runs [`design`] once per relaxation candidate (in parallel) and keeps the
/// run with the lowest coherence; ties go to the earlier candidate.
///
/// The unshrunk variant ignores α and runs once with `cfg.alpha`.
pub fn design_alpha_sweep(
    dict: &Dictionary,
    cfg: &DesignConfig,
    phi0: &ProjectionMatrix,
    candidates: &[f64],
) -> Result<DesignTrace> {
    if cfg.variant == DesignVariant::Unshrunk || candidates.is_empty() {
        return design(dict, cfg, phi0);
    }
    let runs = candidates
        .par_iter()
        .map(|&alpha| design(dict, &DesignConfig { alpha, ..cfg.clone() }, phi0))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.best_coherence() < runs[best].best_coherence() {
            best = i;
        }
    }
    Ok(runs.into_iter().nth(best).expect("non-empty"))
}

/// Relative singular-value gap below which the principal subspace of the
/// dictionary is considered ambiguous.
const SUBSPACE_GAP_RTOL: f64 = 1e-8;

/// Starting projection for the descent.
pub fn initial_projection(dict: &Dictionary, n: usize, init: InitKind, seed: u64) -> Result<ProjectionMatrix> {
    let m = dict.sensors();
    if n == 0 || n > m {
        return Err(Error::invalid(format!(
            "projection needs 1 <= N <= M, got N={n}, M={m}"
        )));
    }
    if init == InitKind::Random {
        return Ok(random_cm_projection(n, m, seed));
    }
    let svd = dict.atoms().clone().svd(true, false);
    let u = svd.u.as_ref().expect("requested U");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    if n < order.len() {
        let gap = sv[order[n - 1]] - sv[order[n]];
        if gap <= SUBSPACE_GAP_RTOL * sv[order[0]] {
            return Ok(random_cm_projection(n, m, seed));
        }
    }
    let rows = CMatrix::from_fn(n, m, |r, c| u[(c, order[r])].conj());
    ProjectionMatrix::from_projected(&rows)
}
