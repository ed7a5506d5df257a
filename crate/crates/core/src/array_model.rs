//! Uniform linear array model: steering vectors, grid dictionaries and
//! synthetic compressed measurements.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, CMatrix, CVector, C64};
use crate::projection_design::ProjectionMatrix;

/// Geometry of a uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlaConfig {
    sensors: usize,
    spacing_ratio: f64,
}

impl UlaConfig {
    pub fn new(sensors: usize, spacing_ratio: f64) -> Result<Self> {
        if sensors < 2 {
            return Err(Error::invalid(format!("a ULA needs at least 2 sensors, got {sensors}")));
        }
        if !(spacing_ratio > 0.0 && spacing_ratio.is_finite()) {
            return Err(Error::invalid(format!(
                "spacing ratio d/λ must be positive, got {spacing_ratio}"
            )));
        }
        Ok(Self { sensors, spacing_ratio })
    }

    /// Half-wavelength spacing.
    pub fn half_wavelength(sensors: usize) -> Result<Self> {
        Self::new(sensors, 0.5)
    }

    pub fn sensors(&self) -> usize {
        self.sensors
    }

    pub fn spacing_ratio(&self) -> f64 {
        self.spacing_ratio
    }

    /// Spatial frequency `ν = 2π (d/λ) sin θ` for an angle `theta` in radians.
    pub fn spatial_frequency(&self, theta: f64) -> f64 {
        2.0 * PI * self.spacing_ratio * theta.sin()
    }
}

fn check_steering_args(nu: f64, sensors: usize) -> Result<()> {
    if sensors == 0 {
        return Err(Error::invalid("steering vector needs at least one sensor"));
    }
    if !nu.is_finite() {
        return Err(Error::invalid(format!("spatial frequency must be finite, got {nu}")));
    }
    Ok(())
}

/// `a(ν) = [1, e^{jν}, …, e^{j(M−1)ν}]ᵀ`.
pub fn steering_vector(nu: f64, sensors: usize) -> Result<CVector> {
    check_steering_args(nu, sensors)?;
    Ok(steering_unchecked(nu, sensors))
}

/// Derivative of [`steering_vector`] with respect to ν: entry `m` is `j·m·e^{jmν}`.
pub fn steering_gradient(nu: f64, sensors: usize) -> Result<CVector> {
    check_steering_args(nu, sensors)?;
    Ok(gradient_unchecked(nu, sensors))
}

pub(crate) fn steering_unchecked(nu: f64, sensors: usize) -> CVector {
    CVector::from_fn(sensors, |m, _| C64::from_polar(1.0, m as f64 * nu))
}

pub(crate) fn gradient_unchecked(nu: f64, sensors: usize) -> CVector {
    CVector::from_fn(sensors, |m, _| {
        C64::new(0.0, m as f64) * C64::from_polar(1.0, m as f64 * nu)
    })
}

/// `A(ν)`: one steering column per frequency.
pub fn steering_matrix(nus: &[f64], sensors: usize) -> Result<CMatrix> {
    for &nu in nus {
        check_steering_args(nu, sensors)?;
    }
    Ok(CMatrix::from_fn(sensors, nus.len(), |m, k| {
        C64::from_polar(1.0, m as f64 * nus[k])
    }))
}

/// Grid of candidate frequencies with their steering columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    grid: Vec<f64>,
    atoms: CMatrix,
}

impl Dictionary {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// The `M × P` matrix of steering columns.
    pub fn atoms(&self) -> &CMatrix {
        &self.atoms
    }

    pub fn sensors(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Grid spacing `nu_max / P`.
    pub fn spacing(&self) -> f64 {
        if self.grid.len() > 1 {
            self.grid[1] - self.grid[0]
        } else {
            0.0
        }
    }
}

/// Uniform grid `ν̊_p = nu_max · p / P`, `p = 0 … P−1`, with its steering columns.
pub fn build_dictionary(points: usize, nu_max: f64, sensors: usize) -> Result<Dictionary> {
    if points == 0 {
        return Err(Error::invalid("dictionary needs at least one grid point"));
    }
    if !(nu_max > 0.0 && nu_max.is_finite()) {
        return Err(Error::invalid(format!(
            "nu_max must be positive and finite, got {nu_max}"
        )));
    }
    if sensors == 0 {
        return Err(Error::invalid("dictionary needs at least one sensor"));
    }
    if points < sensors {
        return Err(Error::invalid(format!(
            "dictionary needs P >= M, got P={points}, M={sensors}"
        )));
    }
    let grid: Vec<f64> = (0..points).map(|p| nu_max * p as f64 / points as f64).collect();
    let atoms = steering_matrix(&grid, sensors)?;
    Ok(Dictionary { grid, atoms })
}

/// Ground-truth sources: frequencies and their `K × L` waveforms.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceScene {
    nu: Vec<f64>,
    waveforms: CMatrix,
}

impl SourceScene {
    pub fn new(nu: Vec<f64>, waveforms: CMatrix) -> Result<Self> {
        if nu.is_empty() {
            return Err(Error::invalid("scene needs at least one source"));
        }
        if waveforms.nrows() != nu.len() {
            return Err(Error::invalid(format!(
                "waveform rows ({}) must match the number of sources ({})",
                waveforms.nrows(),
                nu.len()
            )));
        }
        if waveforms.ncols() == 0 {
            return Err(Error::invalid("scene needs at least one snapshot"));
        }
        if let Some(k) = nu.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("source {k} has a non-finite frequency")));
        }
        if let Some(k) = (0..nu.len()).find(|&k| waveforms.row(k).iter().all(|z| *z == C64::new(0.0, 0.0))) {
            return Err(Error::invalid(format!("source {k} has an all-zero waveform")));
        }
        Ok(Self { nu, waveforms })
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn waveforms(&self) -> &CMatrix {
        &self.waveforms
    }

    pub fn num_sources(&self) -> usize {
        self.nu.len()
    }

    pub fn snapshots(&self) -> usize {
        self.waveforms.ncols()
    }
}

/// Compressed snapshots plus what generated them.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    pub y: CMatrix,
    /// `f64::INFINITY` for noiseless data.
    pub snr_db: f64,
    pub truth: Option<SourceScene>,
    pub noise_seed: u64,
}

/// Noise amplitude σ with `signal_power / (σ² · noise_unit_power) = 10^(snr_db/10)`.
///
/// An SNR of `+∞` yields σ = 0.
pub fn noise_scale_for_snr(signal_power: f64, snr_db: f64, noise_unit_power: f64) -> Result<f64> {
    if !(signal_power >= 0.0 && signal_power.is_finite()) {
        return Err(Error::invalid(format!(
            "signal power must be finite and >= 0, got {signal_power}"
        )));
    }
    if !(noise_unit_power > 0.0 && noise_unit_power.is_finite()) {
        return Err(Error::invalid(format!(
            "noise unit power must be positive, got {noise_unit_power}"
        )));
    }
    if snr_db == f64::INFINITY {
        return Ok(0.0);
    }
    if !snr_db.is_finite() {
        return Err(Error::invalid(format!("SNR must be finite or +inf, got {snr_db}")));
    }
    let ratio = 10f64.powf(snr_db / 10.0);
    Ok((signal_power / (noise_unit_power * ratio)).sqrt())
}

/// I.i.d. circular complex Gaussian entries with unit variance.
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMatrix::zeros(rows, cols);
    // column-major fill order is part of the determinism contract
    for z in m.iter_mut() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *z = C64::new(re * scale, im * scale);
    }
    m
}

/// `Y = ΦA(ν)X + σΦN̄` with sensor-space noise `N̄` and σ chosen so that the
/// realized signal power over the expected projected noise power equals the
/// requested SNR.
pub fn synthesize_measurements(
    scene: &SourceScene,
    phi: &ProjectionMatrix,
    ula: &UlaConfig,
    snr_db: f64,
    seed: u64,
) -> Result<MeasurementSet> {
    let sensors = ula.sensors();
    if phi.cols() != sensors {
        return Err(Error::invalid(format!(
            "projection has {} columns but the array has {sensors} sensors",
            phi.cols()
        )));
    }
    let a = steering_matrix(scene.nu(), sensors)?;
    let clean = phi.as_matrix() * (a * scene.waveforms());
    let snapshots = scene.snapshots();
    let y = if snr_db == f64::INFINITY {
        clean
    } else {
        // E‖ΦN̄‖²_F = L · ‖Φ‖²_F for unit-variance N̄
        let unit = snapshots as f64 * frobenius_sq(phi.as_matrix());
        let sigma = noise_scale_for_snr(frobenius_sq(&clean), snr_db, unit)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = complex_gaussian(sensors, snapshots, &mut rng);
        clean + phi.as_matrix() * noise * C64::new(sigma, 0.0)
    };
    Ok(MeasurementSet {
        y,
        snr_db,
        truth: Some(scene.clone()),
        noise_seed: seed,
    })
}
