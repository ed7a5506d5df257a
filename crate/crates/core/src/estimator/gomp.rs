use crate::array_model::{gradient_unchecked, steering_unchecked};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, khatri_rao, vec, CMatrix, CVector};
use crate::projection_design::ProjectionMatrix;

use super::{EstimationResult, GompConfig};

fn check_frequency(nu: f64) -> Result<()> {
    if nu.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("frequency must be finite, got {nu}")))
    }
}

fn check_measurement(y: &CMatrix, phi: &ProjectionMatrix) -> Result<()> {
    if y.nrows() != phi.rows() {
        return Err(Error::invalid(format!(
            "measurement has {} rows but the projection has {}",
            y.nrows(),
            phi.rows()
        )));
    }
    Ok(())
}

fn projected_steering(phi: &ProjectionMatrix, nu: f64) -> CVector {
    phi.as_matrix() * steering_unchecked(nu, phi.cols())
}

/// Least-squares waveform for a fixed frequency: `x = ({Φa(ν)}⁺ Y)ᵀ`.
pub fn ls_signal(y: &CMatrix, phi: &ProjectionMatrix, nu: f64) -> Result<CVector> {
    check_measurement(y, phi)?;
    check_frequency(nu)?;
    let b = projected_steering(phi, nu);
    let energy = b.norm_squared();
    if energy == 0.0 {
        return Err(Error::invalid(format!("Φa(ν) vanishes at ν = {nu}")));
    }
    Ok((y.adjoint() * b).map(|z| z.conj() / energy))
}

/// `‖Y − Φa(ν)xᵀ‖²_F`.
pub fn residual_cost(y: &CMatrix, phi: &ProjectionMatrix, nu: f64, x: &CVector) -> Result<f64> {
    check_measurement(y, phi)?;
    check_frequency(nu)?;
    if x.len() != y.ncols() {
        return Err(Error::invalid(format!(
            "waveform length {} does not match {} snapshots",
            x.len(),
            y.ncols()
        )));
    }
    let b = projected_steering(phi, nu);
    Ok(frobenius_sq(&(y - b * x.transpose())))
}

/// First-order correction δ of `nu_ring` for a fixed waveform:
/// `Re{ (x ⋄ Φg)⁺ (vec(Y) − x ⋄ Φa) }`.
pub fn delta_step(y: &CMatrix, phi: &ProjectionMatrix, nu_ring: f64, x: &CVector) -> Result<f64> {
    check_measurement(y, phi)?;
    check_frequency(nu_ring)?;
    if x.len() != y.ncols() {
        return Err(Error::invalid(format!(
            "waveform length {} does not match {} snapshots",
            x.len(),
            y.ncols()
        )));
    }
    let b = projected_steering(phi, nu_ring);
    let bg = phi.as_matrix() * gradient_unchecked(nu_ring, phi.cols());
    let u = khatri_rao(x, &bg);
    let energy = u.norm_squared();
    if energy == 0.0 || !energy.is_finite() {
        return Err(Error::invalid("Khatri-Rao column x ⋄ Φg(ν̊) is zero"));
    }
    let r = vec(y) - khatri_rao(x, &b);
    Ok(u.dotc(&r).re / energy)
}

/// Outcome of one single-source refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub nu: f64,
    pub x: CVector,
    /// Accepted costs, starting with the cost of the initial pair.
    pub history: Vec<f64>,
}

/// Single-source GOMP: alternate δ-steps and least-squares waveforms until
/// `i_max` iterations or the first update that increases the cost, in which
/// case the previous pair is returned.
pub fn refine_single(
    y: &CMatrix,
    phi: &ProjectionMatrix,
    nu0: f64,
    x0: &CVector,
    cfg: &GompConfig,
) -> Result<Refinement> {
    cfg.validate()?;
    let mut nu = nu0;
    let mut x = x0.clone();
    let mut eps = residual_cost(y, phi, nu, &x)?;
    let mut history = vec![eps];
    for _ in 0..cfg.i_max {
        let delta = delta_step(y, phi, nu, &x)?;
        let nu_next = nu + delta;
        let x_next = ls_signal(y, phi, nu_next)?;
        let eps_next = residual_cost(y, phi, nu_next, &x_next)?;
        // ties are accepted; NaN never is
        if eps_next.is_nan() || eps_next > eps {
            break;
        }
        nu = nu_next;
        x = x_next;
        eps = eps_next;
        history.push(eps);
    }
    Ok(Refinement { nu, x, history })
}

fn source_contribution(phi: &ProjectionMatrix, nu: f64, x: &CVector) -> CMatrix {
    projected_steering(phi, nu) * x.transpose()
}

/// Multi-source GOMP: `j_max` outer passes, each refining sources in order
/// against the measurement with every other source's current estimate
/// removed (already-updated ones from this pass, the rest from the previous).
pub fn refine_multi(
    y: &CMatrix,
    phi: &ProjectionMatrix,
    nu0: &[f64],
    x0: &CMatrix,
    cfg: &GompConfig,
) -> Result<EstimationResult> {
    cfg.validate()?;
    check_measurement(y, phi)?;
    let k = nu0.len();
    if k == 0 {
        return Err(Error::invalid("refinement needs at least one source"));
    }
    if x0.nrows() != k || x0.ncols() != y.ncols() {
        return Err(Error::invalid(format!(
            "initial waveforms must be {k}x{}, got {}x{}",
            y.ncols(),
            x0.nrows(),
            x0.ncols()
        )));
    }
    let snapshots = y.ncols();
    let mut nu_prev = nu0.to_vec();
    let mut x_prev: Vec<CVector> = (0..k).map(|i| x0.row(i).transpose()).collect();
    let mut histories = Vec::with_capacity(cfg.j_max * k);

    for _ in 0..cfg.j_max {
        let mut nu_cur = vec![0.0; k];
        let mut x_cur = vec![CVector::zeros(snapshots); k];
        for src in 0..k {
            let mut target = y.clone();
            for other in 0..src {
                target -= source_contribution(phi, nu_cur[other], &x_cur[other]);
            }
            for other in src + 1..k {
                target -= source_contribution(phi, nu_prev[other], &x_prev[other]);
            }
            let refined = refine_single(&target, phi, nu_prev[src], &x_prev[src], cfg)?;
            nu_cur[src] = refined.nu;
            x_cur[src] = refined.x;
            histories.push(refined.history);
        }
        nu_prev = nu_cur;
        x_prev = x_cur;
    }

    let x_hat = CMatrix::from_fn(k, snapshots, |i, l| x_prev[i][l]);
    Ok(EstimationResult {
        nu_hat: nu_prev,
        x_hat,
        residual_history: histories,
        initial_grid_indices: Vec::new(),
        nu_initial: nu0.to_vec(),
    })
}
