use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::SweepConfig;
use super::metrics::wrapped_difference;
use crate::array_model::{complex_gaussian, SourceScene};
use crate::error::{Error, Result};

/// Rejection-sampling budget per scene; far above what any config that
/// passes validation needs in practice.
const MAX_DRAWS: usize = 1_000_000;

/// One SplitMix64 output step.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent sub-seed for a path of indices below a root seed, e.g.
/// `(seed, [snr_index, trial_index, stream])`.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(seed), |acc, &i| {
        splitmix64(acc.rotate_left(23) ^ splitmix64(i.wrapping_add(0x632B_E59B_D9B4_E019)))
    })
}

/// `K` frequencies uniform on `[0, nu_max]` with pairwise (circular) gaps of
/// at least the configured separation, plus unit-variance complex Gaussian
/// waveforms, all drawn from `trial_seed`.
pub fn draw_scene(cfg: &SweepConfig, trial_seed: u64) -> Result<SourceScene> {
    cfg.validate()?;
    let sep = cfg.min_separation();
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let mut nu = Vec::with_capacity(cfg.k);
    let mut accepted = false;
    for _ in 0..MAX_DRAWS {
        nu.clear();
        nu.extend((0..cfg.k).map(|_| rng.random_range(0.0..=cfg.nu_max)));
        if min_circular_gap(&nu) >= sep {
            accepted = true;
            break;
        }
    }
    if !accepted {
        return Err(Error::invalid(format!(
            "could not draw {} sources separated by {} cells in {MAX_DRAWS} attempts",
            cfg.k, cfg.min_separation_cells
        )));
    }
    let waveforms = complex_gaussian(cfg.k, cfg.l, &mut rng);
    SourceScene::new(nu, waveforms)
}

/// Smallest pairwise wrapped distance (`+∞` for fewer than two points).
pub fn min_circular_gap(nu: &[f64]) -> f64 {
    let mut gap = f64::INFINITY;
    for (i, a) in nu.iter().enumerate() {
        for b in &nu[i + 1..] {
            gap = gap.min(wrapped_difference(*a, *b).abs());
        }
    }
    gap
}
