use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::SweepConfig;
use super::metrics::mse_frequencies;
use super::scene::{derive_seed, draw_scene};
use crate::array_model::{build_dictionary, synthesize_measurements, Dictionary, UlaConfig};
use crate::error::{Error, Result};
use crate::estimator::estimate;
use crate::projection_design::{
    design_alpha_sweep, dft_projection, initial_projection, mutual_coherence, random_cm_projection, DesignTrace,
    ProjectionKind, ProjectionMatrix,
};

/// Sub-seed streams below `(seed, snr_index, trial_index)`.
const SCENE_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

/// One point of a coherence trace.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceRow {
    pub method: ProjectionKind,
    pub p: usize,
    pub iter: usize,
    /// Best coherence found up to and including `iter`.
    pub mu_max: f64,
}

/// Aggregate over the trials of one (method, SNR) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: ProjectionKind,
    pub snr_db: f64,
    /// Mean MSE of the on-grid OMP frequencies (NaN when every trial failed).
    pub mse_ongrid: f64,
    /// Mean MSE after gradient refinement (NaN when every trial failed).
    pub mse_refined: f64,
    /// Successful trials.
    pub trials: usize,
    /// Trials whose estimator returned an error; excluded from the means.
    pub failed_trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Mean wall-clock time per trial, parallel to `rows`. Kept out of the
    /// CSV so result files stay byte-reproducible.
    pub mean_trial_runtime: Vec<Duration>,
}

/// `μ_max(ΦÅ)`, reporting a projection that blinds some grid columns as
/// fully coherent: those grid points are indistinguishable from each other.
pub fn projection_coherence(phi: &ProjectionMatrix, dict: &Dictionary) -> Result<f64> {
    match mutual_coherence(&(phi.as_matrix() * dict.atoms())) {
        Err(Error::ZeroColumn { .. }) => Ok(1.0),
        other => other,
    }
}

/// Runs the gradient design for `kind`, keeping the best of the configured
/// `alpha_candidates`.
pub fn run_design(cfg: &SweepConfig, kind: ProjectionKind, dict: &Dictionary) -> Result<DesignTrace> {
    let variant = kind.variant().ok_or_else(|| {
        Error::config(
            "projection_kind",
            format!("`{kind}` is not a gradient-designed projection"),
        )
    })?;
    let design = cfg.design_for(variant);
    let phi0 = initial_projection(dict, cfg.n, design.init, design.seed)?;
    design_alpha_sweep(dict, &design, &phi0, &cfg.alpha_candidates)
}

/// The projection of the given kind for the configured `N` and dictionary.
pub fn make_projection(cfg: &SweepConfig, kind: ProjectionKind, dict: &Dictionary) -> Result<ProjectionMatrix> {
    match kind {
        ProjectionKind::Dft => dft_projection(cfg.n, cfg.m),
        ProjectionKind::Random => Ok(random_cm_projection(cfg.n, cfg.m, cfg.seed)),
        _ => Ok(run_design(cfg, kind, dict)?.final_phi),
    }
}

/// Coherence versus iteration for every configured method and grid size.
///
/// Gradient methods report the running best coherence at each iteration;
/// the DFT and random baselines are repeated as constant rows over
/// `0..=t_max` so all traces share one iteration axis.
pub fn run_coherence_experiment(cfg: &SweepConfig) -> Result<Vec<CoherenceRow>> {
    cfg.validate()?;
    let p_values = if cfg.p_values.is_empty() {
        vec![cfg.p]
    } else {
        cfg.p_values.clone()
    };
    let mut rows = Vec::new();
    for method in cfg.coherence_methods() {
        for &p in &p_values {
            let dict = build_dictionary(p, cfg.nu_max, cfg.m)?;
            let trace: Vec<f64> = match method {
                ProjectionKind::Dft | ProjectionKind::Random => {
                    let phi = make_projection(cfg, method, &dict)?;
                    vec![projection_coherence(&phi, &dict)?; cfg.design.t_max + 1]
                }
                _ => run_design(cfg, method, &dict)?.best_so_far(),
            };
            rows.extend(trace.into_iter().enumerate().map(|(iter, mu_max)| CoherenceRow {
                method,
                p,
                iter,
                mu_max,
            }));
        }
    }
    Ok(rows)
}

struct TrialOutcome {
    mse_ongrid: f64,
    mse_refined: f64,
}

fn run_trial(
    cfg: &SweepConfig,
    phi: &ProjectionMatrix,
    dict: &Dictionary,
    ula: &UlaConfig,
    snr_index: usize,
    trial: usize,
) -> Result<TrialOutcome> {
    let path = [snr_index as u64, trial as u64];
    let scene = draw_scene(cfg, derive_seed(cfg.seed, &[path[0], path[1], SCENE_STREAM]))?;
    let snr_db = cfg.snr_grid_db[snr_index];
    let noise_seed = derive_seed(cfg.seed, &[path[0], path[1], NOISE_STREAM]);
    let meas = synthesize_measurements(&scene, phi, ula, snr_db, noise_seed)?;
    let est = estimate(&meas.y, phi, dict, cfg.k, &cfg.gomp)?;
    Ok(TrialOutcome {
        mse_ongrid: mse_frequencies(scene.nu(), &est.nu_initial)?,
        mse_refined: mse_frequencies(scene.nu(), &est.nu_hat)?,
    })
}

/// MSE of the on-grid and refined frequencies versus SNR for every sweep
/// method. Trials run in parallel; each draws its scene and noise from a
/// sub-seed of `(seed, snr index, trial index)`, so results do not depend on
/// scheduling. Estimator failures are counted per cell, not fatal.
pub fn run_mse_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let dict = build_dictionary(cfg.p, cfg.nu_max, cfg.m)?;
    let ula = UlaConfig::half_wavelength(cfg.m)?;
    let mut rows = Vec::new();
    let mut runtimes = Vec::new();
    for method in cfg.sweep_methods() {
        let phi = make_projection(cfg, method, &dict)?;
        for (snr_index, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
            let outcomes: Vec<(Result<TrialOutcome>, Duration)> = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let start = Instant::now();
                    let out = run_trial(cfg, &phi, &dict, &ula, snr_index, trial);
                    (out, start.elapsed())
                })
                .collect();
            let (mut sum_ongrid, mut sum_refined, mut ok, mut failed) = (0.0, 0.0, 0usize, 0usize);
            let mut elapsed = Duration::ZERO;
            // summed in trial order: the totals are independent of scheduling
            for (out, dt) in outcomes {
                elapsed += dt;
                match out {
                    Ok(t) => {
                        sum_ongrid += t.mse_ongrid;
                        sum_refined += t.mse_refined;
                        ok += 1;
                    }
                    Err(_) => failed += 1,
                }
            }
            let mean = |s: f64| if ok == 0 { f64::NAN } else { s / ok as f64 };
            rows.push(SweepRow {
                method,
                snr_db,
                mse_ongrid: mean(sum_ongrid),
                mse_refined: mean(sum_refined),
                trials: ok,
                failed_trials: failed,
            });
            runtimes.push(elapsed / cfg.trials as u32);
        }
    }
    Ok(SweepResult {
        rows,
        mean_trial_runtime: runtimes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepConfig {
        let mut cfg = SweepConfig {
            n: 4,
            m: 8,
            p: 16,
            k: 2,
            l: 4,
            snr_grid_db: vec![10.0, f64::INFINITY],
            trials: 6,
            seed: 5,
            p_values: vec![16],
            ..SweepConfig::default()
        };
        cfg.design.t_max = 10;
        cfg
    }

    #[test]
    fn coherence_rows_cover_methods_and_grids() {
        let cfg = SweepConfig {
            p_values: vec![16, 24],
            ..small()
        };
        let rows = run_coherence_experiment(&cfg).unwrap();
        for method in ProjectionKind::ALL {
            for p in [16, 24] {
                let trace: Vec<&CoherenceRow> = rows.iter().filter(|r| r.method == method && r.p == p).collect();
                assert!(!trace.is_empty(), "{method} P={p}");
                assert!(trace.windows(2).all(|w| w[1].mu_max <= w[0].mu_max));
                assert!(trace.iter().enumerate().all(|(i, r)| r.iter == i));
                if matches!(method, ProjectionKind::Dft | ProjectionKind::Random) {
                    assert_eq!(trace.len(), 11);
                    assert!(trace.iter().all(|r| r.mu_max == trace[0].mu_max));
                }
            }
        }
    }

    #[test]
    fn blind_dft_columns_count_as_fully_coherent() {
        let dict = build_dictionary(16, 2.0 * std::f64::consts::PI, 16).unwrap();
        let phi = dft_projection(4, 16).unwrap();
        assert_eq!(projection_coherence(&phi, &dict).unwrap(), 1.0);
    }

    #[test]
    fn sweep_counts_and_determinism() {
        let cfg = SweepConfig {
            methods: vec![ProjectionKind::Random, ProjectionKind::Designed],
            ..small()
        };
        let a = run_mse_sweep(&cfg).unwrap();
        let b = run_mse_sweep(&cfg).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.rows.len(), 4);
        assert_eq!(a.mean_trial_runtime.len(), 4);
        for r in &a.rows {
            assert_eq!(r.trials + r.failed_trials, cfg.trials);
            assert!(r.mse_ongrid >= 0.0 && r.mse_refined >= 0.0);
        }
    }

    #[test]
    fn noiseless_on_grid_sources_give_zero_error() {
        let cfg = SweepConfig { k: 1, ..small() };
        let dict = build_dictionary(cfg.p, cfg.nu_max, cfg.m).unwrap();
        let phi = make_projection(&cfg, ProjectionKind::Designed, &dict).unwrap();
        for p in [0, 3, 9] {
            let scene = crate::array_model::SourceScene::new(
                vec![dict.grid()[p]],
                crate::CMatrix::from_element(1, 4, crate::C64::new(1.0, -0.5)),
            )
            .unwrap();
            let ula = UlaConfig::half_wavelength(cfg.m).unwrap();
            let meas = synthesize_measurements(&scene, &phi, &ula, f64::INFINITY, 0).unwrap();
            let est = estimate(&meas.y, &phi, &dict, 1, &cfg.gomp).unwrap();
            assert_eq!(mse_frequencies(scene.nu(), &est.nu_initial).unwrap(), 0.0);
            assert!(mse_frequencies(scene.nu(), &est.nu_hat).unwrap() < 1e-20);
        }
    }

    #[test]
    fn non_gradient_kind_cannot_be_designed() {
        let cfg = small();
        let dict = build_dictionary(cfg.p, cfg.nu_max, cfg.m).unwrap();
        let err = run_design(&cfg, ProjectionKind::Dft, &dict).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "projection_kind"));
    }
}
