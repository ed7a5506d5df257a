//! Acceptance suite: one PASS/FAIL line per criterion on stderr, one test
//! per criterion. Tolerances and budgets are fixed here, not tuned per run.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use gomp_doa::array_model::{build_dictionary, complex_gaussian, steering_matrix, Dictionary};
use gomp_doa::bench::{
    derive_seed, draw_scene, make_projection, projection_coherence, run_coherence_experiment, run_design,
    run_mse_sweep, SweepConfig, SweepResult,
};
use gomp_doa::estimator::{estimate, ls_signal, omp, refine_single, GompConfig};
use gomp_doa::linalg::frobenius_sq;
use gomp_doa::projection_design::{
    column_normalizer, gradient_eta, gram_error, mutual_coherence, objective_eta, random_cm_projection, welch_bound,
    ProjectionKind, ProjectionMatrix, SensingMatrix,
};
use gomp_doa::{CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Prints the criterion line outside the test harness's capture, then
/// asserts.
fn report(criterion: u32, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {criterion}: {verdict} | {detail}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn random_direction(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    complex_gaussian(rows, cols, rng)
}

fn inner_re(g: &CMatrix, d: &CMatrix) -> f64 {
    g.iter().zip(d.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

#[test]
fn criterion_1_gradient_matches_finite_differences() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let h = 1e-6;
    let mut worst_spread = 0.0_f64;
    let mut constants = Vec::new();
    let mut ok = 0;
    for instance in 0..20 {
        let n = rng.random_range(2..=4);
        let m = rng.random_range(3..=6).max(n);
        let p = rng.random_range(4..=8).max(m);
        let dict = build_dictionary(p, 2.0 * PI, m).unwrap();
        let phi = random_cm_projection(n, m, 1000 + instance).into_inner();
        let q = &phi * dict.atoms();
        let e = gram_error(&q, &column_normalizer(&q).unwrap()).unwrap();
        let g = gradient_eta(&phi, &dict, &e).unwrap();
        let ratios: Vec<f64> = (0..20)
            .map(|_| {
                let dir = random_direction(n, m, &mut rng);
                let plus = objective_eta(&(&phi + &dir * C64::new(h, 0.0)), &dict).unwrap();
                let minus = objective_eta(&(&phi - &dir * C64::new(h, 0.0)), &dict).unwrap();
                ((plus - minus) / (2.0 * h)) / inner_re(&g, &dir)
            })
            .collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let spread = (hi - lo) / mean.abs();
        worst_spread = worst_spread.max(spread);
        constants.push(mean);
        if spread < 1e-4 {
            ok += 1;
        }
    }
    let c_lo = constants.iter().cloned().fold(f64::INFINITY, f64::min);
    let c_hi = constants.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let elapsed = start.elapsed();
    let single_constant = (c_hi - c_lo) / c_hi.abs() < 1e-4;
    report(
        1,
        ok == 20 && single_constant && elapsed < Duration::from_secs(5),
        format!(
            "{ok}/20 instances with spread < 1e-4 (worst {worst_spread:.2e}); c in [{c_lo:.8}, {c_hi:.8}]; {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_2_welch_bound() {
    let beta = welch_bound(16, 64).unwrap();
    let value_ok = (beta - 0.218218).abs() <= 1e-6;
    let mut checked = 0;
    let mut violations = 0;
    let mut worst_margin = f64::INFINITY;
    for (n, m, p) in [(4, 8, 8), (4, 8, 16), (8, 16, 32), (16, 64, 64), (16, 64, 128)] {
        let dict = build_dictionary(p, 2.0 * PI, m).unwrap();
        let beta = welch_bound(n, p).unwrap();
        let mut cfg = SweepConfig {
            n,
            m,
            p,
            k: 1,
            ..SweepConfig::default()
        };
        cfg.design.t_max = 60;
        for seed in 0..3 {
            cfg.seed = seed;
            cfg.design.seed = seed;
            for kind in ProjectionKind::ALL {
                let phi = make_projection(&cfg, kind, &dict).unwrap();
                let mu = projection_coherence(&phi, &dict).unwrap();
                checked += 1;
                worst_margin = worst_margin.min(mu - beta);
                if mu < beta - 1e-9 {
                    violations += 1;
                }
            }
        }
        for seed in 0..50 {
            let phi = random_cm_projection(n, m, 10_000 + seed);
            let mu = mutual_coherence(&(phi.as_matrix() * dict.atoms())).unwrap();
            checked += 1;
            worst_margin = worst_margin.min(mu - beta);
            if mu < beta - 1e-9 {
                violations += 1;
            }
        }
    }
    report(
        2,
        value_ok && violations == 0,
        format!(
            "welch_bound(16, 64) = {beta:.9}; {violations} of {checked} sensing matrices below the bound \
             (smallest margin {worst_margin:.3e})"
        ),
    );
}

#[test]
fn criterion_3_coherence_ordering() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for p in [64, 128] {
        let mut finals: std::collections::BTreeMap<&str, Vec<f64>> = Default::default();
        for seed in 0..10 {
            let mut cfg = SweepConfig {
                n: 16,
                m: 64,
                p,
                k: 1,
                seed,
                p_values: vec![p],
                methods: vec![
                    ProjectionKind::Designed,
                    ProjectionKind::Random,
                    ProjectionKind::Dft,
                    ProjectionKind::GdPriorB,
                ],
                ..SweepConfig::default()
            };
            cfg.design.seed = seed;
            // rows are in iteration order, so the last one per method is final
            let mut last: std::collections::BTreeMap<&str, f64> = Default::default();
            for row in run_coherence_experiment(&cfg).unwrap() {
                last.insert(row.method.name(), row.mu_max);
            }
            for (method, mu) in last {
                finals.entry(method).or_default().push(mu);
            }
        }
        let med: std::collections::BTreeMap<&str, f64> = finals.into_iter().map(|(k, v)| (k, median(v))).collect();
        let d = med["designed"];
        let ok = d < med["random"] && d < med["dft"] && d < med["gd_prior_b"];
        pass &= ok;
        lines.push(format!(
            "P={p}: designed {d:.4}, random {:.4}, dft {:.4}, unshrunk {:.4}",
            med["random"], med["dft"], med["gd_prior_b"]
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(300);
    report(
        3,
        pass,
        format!("median final mu_max over 10 seeds; {}; {elapsed:.1?}", lines.join("; ")),
    );
}

#[test]
fn criterion_4_refinement_history_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let dict = build_dictionary(64, 2.0 * PI, 32).unwrap();
    let snrs = [0.0, 10.0, 20.0, f64::INFINITY];
    let mut monotone = 0;
    let mut total = 0;
    for i in 0..500 {
        let phi = random_cm_projection(8, 32, 500 + i as u64);
        let snr = snrs[i % 4];
        let grid_index = rng.random_range(0..64);
        let offset = if i % 8 < 4 { 0.0 } else { rng.random_range(-0.5..0.5) };
        let nu = dict.grid()[grid_index] + offset * dict.spacing();
        let x = complex_gaussian(1, 8, &mut rng);
        let clean = phi.as_matrix() * steering_matrix(&[nu], 32).unwrap() * &x;
        let y = if snr.is_finite() {
            let sigma = (frobenius_sq(&clean) / (8.0 * frobenius_sq(phi.as_matrix()) * 10f64.powf(snr / 10.0))).sqrt();
            let noise = complex_gaussian(32, 8, &mut rng);
            &clean + phi.as_matrix() * noise * C64::new(sigma, 0.0)
        } else {
            clean
        };
        let nu0 = dict.grid()[grid_index];
        let x0 = ls_signal(&y, &phi, nu0).unwrap();
        let out = refine_single(&y, &phi, nu0, &x0, &GompConfig::default()).unwrap();
        total += 1;
        if out.history.windows(2).all(|w| w[1] <= w[0]) {
            monotone += 1;
        }
    }
    report(
        4,
        monotone == total,
        format!("{monotone}/{total} accepted-cost histories non-increasing"),
    );
}

fn half_cell_instances(dict: &Dictionary, phi: &ProjectionMatrix, trials: u64) -> Vec<(f64, CMatrix)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
    (0..trials)
        .map(|_| {
            let p = rng.random_range(0..dict.len());
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let nu = (dict.grid()[p] + sign * 0.5 * dict.spacing()).rem_euclid(2.0 * PI);
            let x = complex_gaussian(1, 16, &mut rng);
            let y = phi.as_matrix() * steering_matrix(&[nu], dict.sensors()).unwrap() * x;
            (nu, y)
        })
        .collect()
}

#[test]
fn criterion_5_half_cell_offset_is_refined() {
    let start = Instant::now();
    let mut cfg = SweepConfig {
        n: 16,
        m: 64,
        p: 64,
        k: 1,
        ..SweepConfig::default()
    };
    cfg.design.t_max = 200;
    let dict = build_dictionary(cfg.p, cfg.nu_max, cfg.m).unwrap();
    let phi = make_projection(&cfg, ProjectionKind::Designed, &dict).unwrap();
    let gomp = GompConfig {
        i_max: 10,
        ..GompConfig::default()
    };
    let mut hits = 0;
    let mut worst = 0.0_f64;
    let mut worst_single = 0.0_f64;
    let instances = half_cell_instances(&dict, &phi, 100);
    for (nu, y) in &instances {
        let out = estimate(y, &phi, &dict, 1, &gomp).unwrap();
        let err = gomp_doa::bench::wrapped_difference(out.nu_hat[0], *nu).abs();
        worst = worst.max(err);
        if err <= 1e-6 {
            hits += 1;
        }
        // one inner run alone, for the record
        let x0 = ls_signal(y, &phi, out.nu_initial[0]).unwrap();
        let single = refine_single(y, &phi, out.nu_initial[0], &x0, &gomp).unwrap();
        worst_single = worst_single.max(gomp_doa::bench::wrapped_difference(single.nu, *nu).abs());
    }
    let elapsed = start.elapsed();
    report(
        5,
        hits == 100 && elapsed < Duration::from_secs(10),
        format!(
            "{hits}/100 within 1e-6 (worst {worst:.2e}; I_max={}, J_max={}; a single inner run reaches \
             only {worst_single:.2e}); {elapsed:.2?}",
            gomp.i_max, gomp.j_max
        ),
    );
}

/// Best-K-correlation oracle for a single atom: the column with the largest
/// normalized correlation, found by exhaustive search.
fn brute_force_single(y: &CMatrix, psi: &CMatrix) -> usize {
    (0..psi.ncols())
        .map(|p| {
            let col = psi.column(p);
            let corr: f64 = (col.adjoint() * y).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / col.norm();
            (p, corr)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
        .0
}

#[test]
fn criterion_6_exact_on_grid_recovery() {
    let mut cfg = SweepConfig {
        n: 32,
        m: 64,
        p: 64,
        k: 3,
        l: 8,
        ..SweepConfig::default()
    };
    cfg.design.seed = cfg.seed;
    let dict = build_dictionary(cfg.p, cfg.nu_max, cfg.m).unwrap();
    let phi = make_projection(&cfg, ProjectionKind::Designed, &dict).unwrap();
    let sensing = SensingMatrix::new(&phi, &dict).unwrap();
    let mu = sensing.coherence().unwrap();
    let k_bound = (1.0 + 1.0 / mu) / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0xC6);
    let mut details = Vec::new();
    let mut pass = true;
    for k in 1..=3usize {
        let condition = (k as f64) < k_bound;
        let mut exact = 0;
        let mut oracle_agree = 0;
        for _ in 0..100 {
            // well separated: at least two grid cells apart on the circle
            let support: Vec<usize> = loop {
                let mut s: Vec<usize> = (0..k).map(|_| rng.random_range(0..cfg.p)).collect();
                s.sort();
                let sep_ok = s.windows(2).all(|w| w[1] - w[0] >= 2) && (k == 1 || s[0] + cfg.p - s[k - 1] >= 2);
                if sep_ok {
                    break s;
                }
            };
            let x = complex_gaussian(k, cfg.l, &mut rng);
            let y = sensing.psi().select_columns(&support) * &x;
            let got = omp(&y, &sensing, k).unwrap();
            let mut idx = got.indices.clone();
            idx.sort();
            if idx == support {
                exact += 1;
            }
            if k == 1 && brute_force_single(&y, sensing.psi()) == got.indices[0] {
                oracle_agree += 1;
            }
        }
        pass &= condition && exact == 100 && (k != 1 || oracle_agree == 100);
        details.push(if k == 1 {
            format!("K=1: {exact}/100 exact, {oracle_agree}/100 match the brute-force oracle")
        } else {
            format!("K={k}: {exact}/100 exact")
        });
    }
    report(
        6,
        pass,
        format!(
            "N=32, M=64, P=64, mu_max={mu:.4} (K < {k_bound:.3}); {}",
            details.join("; ")
        ),
    );
}

fn sweep_cell(result: &SweepResult) -> (f64, usize, usize) {
    let r = &result.rows[0];
    (r.mse_ongrid, r.trials, r.failed_trials)
}

#[test]
fn criterion_7_on_grid_error_matches_quantization_floor() {
    let mut details = Vec::new();
    let mut pass = true;
    // Five sources need more compressed rows and a finer grid than one before
    // OMP stops confusing a neighbouring cell of a strong source with a weak
    // source.
    for (k, n, p, l, sep) in [(1usize, 16usize, 64usize, 16usize, 2.0), (5, 32, 128, 64, 4.0)] {
        let cfg = SweepConfig {
            n,
            m: 64,
            p,
            k,
            l,
            snr_grid_db: vec![60.0],
            trials: 500,
            seed: 7,
            min_separation_cells: sep,
            ..SweepConfig::default()
        };
        let result = run_mse_sweep(&cfg).unwrap();
        let (mse, ok, failed) = sweep_cell(&result);
        let delta = cfg.nu_max / p as f64;
        let floor = k as f64 * delta * delta / 12.0;
        let ratio = mse / floor;
        pass &= ok >= 500 && (0.8..=1.2).contains(&ratio);
        details.push(format!(
            "K={k}, N={n}, P={p}, L={l}: on-grid MSE {mse:.4e} vs floor {floor:.4e} (ratio {ratio:.3}, {ok} trials, {failed} failed)"
        ));
    }
    report(7, pass, details.join("; "));
}

fn inversions(v: &[f64]) -> usize {
    v.windows(2).filter(|w| w[1] > w[0]).count()
}

#[test]
fn criterion_8_refinement_beats_grid_versus_snr() {
    let start = Instant::now();
    let cfg = SweepConfig {
        n: 16,
        m: 64,
        p: 64,
        k: 5,
        l: 16,
        nu_max: 2.0 * PI * 15.0 / 64.0,
        snr_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
        trials: 200,
        seed: 8,
        ..SweepConfig::default()
    };
    let result = run_mse_sweep(&cfg).unwrap();
    let ongrid: Vec<f64> = result.rows.iter().map(|r| r.mse_ongrid).collect();
    let refined: Vec<f64> = result.rows.iter().map(|r| r.mse_refined).collect();
    let better = result
        .rows
        .iter()
        .filter(|r| r.snr_db >= 10.0)
        .all(|r| r.mse_refined < r.mse_ongrid);
    let elapsed = start.elapsed();
    let pass = better && inversions(&ongrid) <= 1 && inversions(&refined) <= 1 && elapsed < Duration::from_secs(900);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ");
    report(
        8,
        pass,
        format!(
            "SNR 0..20 dB: on-grid [{}], refined [{}]; refined < on-grid at >= 10 dB: {better}; {elapsed:.1?}",
            fmt(&ongrid),
            fmt(&refined)
        ),
    );
}

#[test]
fn criterion_9_outputs_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SweepConfig {
        n: 8,
        m: 16,
        p: 32,
        k: 3,
        l: 4,
        snr_grid_db: vec![0.0, 20.0, f64::INFINITY],
        trials: 20,
        seed: 99,
        methods: ProjectionKind::ALL.to_vec(),
        p_values: vec![16, 32],
        ..SweepConfig::default()
    };
    cfg.design.t_max = 40;
    cfg.design.seed = cfg.seed;
    let dict = build_dictionary(cfg.p, cfg.nu_max, cfg.m).unwrap();
    let mut identical = 0;
    let mut total = 0;
    let mut produce = |tag: &str, run: &dyn Fn(&std::path::Path)| {
        let a = dir.path().join(format!("{tag}_a.csv"));
        let b = dir.path().join(format!("{tag}_b.csv"));
        run(&a);
        run(&b);
        total += 1;
        if std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap() {
            identical += 1;
        }
    };
    produce("sweep", &|path| {
        gomp_doa::bench::emit_csv(&run_mse_sweep(&cfg).unwrap(), path).unwrap()
    });
    produce("coherence", &|path| {
        gomp_doa::bench::write_coherence_csv(&run_coherence_experiment(&cfg).unwrap(), path).unwrap()
    });
    produce("design", &|path| {
        gomp_doa::bench::write_trace_csv(&run_design(&cfg, ProjectionKind::Designed, &dict).unwrap(), path).unwrap()
    });
    produce("scene", &|path| {
        let s = draw_scene(&cfg, derive_seed(cfg.seed, &[3])).unwrap();
        gomp_doa::bench::write_complex_matrix(s.waveforms(), path).unwrap()
    });
    report(
        9,
        identical == total,
        format!("{identical}/{total} experiment outputs byte-identical across reruns"),
    );
}
