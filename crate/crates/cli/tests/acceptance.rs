//! Acceptance suite: one test per release criterion, each printing a
//! single PASS/FAIL line (visible with `--nocapture`). Seeds are
//! frozen; every run is byte-reproducible.
//!
//! Run with:
//!     cargo test -p vrjp-cli --test acceptance -- --nocapture

use std::time::Instant;

use vrjp_cli::config::*;
use vrjp_cli::{run, ExperimentConfig};

use vrjp_core::estimators::{moment_constant, path_prefix_test, variance_check};
use vrjp_core::graph::{small, BoxSpec};
use vrjp_core::green::{assemble_h, green};
use vrjp_core::localization::{tau_regularity, SingleSiteDensity};
use vrjp_core::potential::sample_nu;
use vrjp_core::process::{
    density_fx_annealed, density_fx_quenched, density_fz, simulate_vrjp, time_change, StopRule,
    Trajectory,
};
use vrjp_core::rng::replica_rng;
use vrjp_core::stats;
use vrjp_core::testkit::PairRejectionOracle;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

/// 1. Closed-form transform/ratio identities vs Monte Carlo at 4 SE,
/// N = 1e5, on the 1-, 2-, 3-vertex graphs and the wired 3×3 box;
/// under 60 s.
#[test]
fn criterion_01_ward_laplace_oracles() {
    let t0 = Instant::now();
    let outcome = run(
        &ExperimentConfig::WardCheck(WardCheckConfig {
            seed: 1101,
            n_samples: 100_000,
            z_max: 4.0,
        }),
        0,
    )
    .unwrap();
    let elapsed = t0.elapsed();
    let pass = outcome.pass == Some(true) && elapsed.as_secs() < 60;
    report(
        "1 (transform identities)",
        pass,
        &format!("{}; elapsed {elapsed:?}", outcome.summary),
    );
    assert!(pass, "{}", outcome.summary);
}

/// 2. Sampler exactness: KS of 1/(2G(i0,i0)) against Gamma(1/2, θ²)
/// for θ in {0.5, 1, 2} at N = 1e4; rejection-oracle KS on the
/// two-vertex graph.
#[test]
fn criterion_02_sampler_exactness() {
    use statrs::function::gamma::gamma_lr;
    let mut detail = String::new();
    let mut pass = true;
    for (theta, seed) in [(0.5f64, 1301u64), (1.0, 1302), (2.0, 1303)] {
        let g = small::path(3, 1.0, theta);
        let order = g.default_order();
        let mut rng = replica_rng(seed, 0);
        let draws: Vec<f64> = (0..10_000)
            .map(|_| {
                let b = sample_nu(&g, &order, &mut rng);
                let gm = green(&assemble_h(&g, &b)).unwrap();
                1.0 / (2.0 * gm.entry(0, 0))
            })
            .collect();
        let rate = theta * theta;
        let (_, p) = stats::ks_test(&draws, move |x| {
            if x <= 0.0 {
                0.0
            } else {
                gamma_lr(0.5, rate * x)
            }
        });
        pass &= p > 0.01;
        detail.push_str(&format!("theta {theta}: KS p = {p:.4}; "));
    }

    let g = small::pair(1.0, [1.0, 1.0]);
    let oracle = PairRejectionOracle::new(g.clone(), 9.0).unwrap();
    let n = 100_000;
    let mut rng = replica_rng(1304, 0);
    let mut rej = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let (b1, b2) = oracle.sample(&mut rng);
        rej.0.push(b1);
        rej.1.push(b2);
    }
    let order = g.default_order();
    let mut rng = replica_rng(1305, 0);
    let mut dir = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let b = sample_nu(&g, &order, &mut rng);
        dir.0.push(b[0]);
        dir.1.push(b[1]);
    }
    let (_, p0) = stats::ks_two_sample(&rej.0, &dir.0);
    let (_, p1) = stats::ks_two_sample(&rej.1, &dir.1);
    pass &= p0 > 0.01 && p1 > 0.01;
    detail.push_str(&format!("rejection oracle marginals p = {p0:.4}, {p1:.4}"));
    report("2 (sampler exactness)", pass, &detail);
    assert!(pass, "{detail}");
}

/// 3. Truncated path expansion vs direct inverse (1e-8 on the 3×3 box
/// at 200 terms) and the exact two-vertex geometric series.
#[test]
fn criterion_03_inverse_expansion_equivalence() {
    let outcome = run(
        &ExperimentConfig::GreenCheck(GreenCheckConfig {
            seed: 322,
            max_len: 200,
            tolerance: 1e-8,
        }),
        0,
    )
    .unwrap();
    let pass = outcome.pass == Some(true);
    report("3 (inverse vs expansion)", pass, &outcome.summary);
    assert!(pass, "{}", outcome.summary);
}

/// 4. Trajectory densities: the direct time-changed density equals the
/// annealed closed form to 1e-10 relative on 100 random trajectories;
/// the quenched density averages to the annealed one within 4 SE.
#[test]
fn criterion_04_trajectory_density_identity() {
    let g = small::cycle(4, 1.0, 1.0);
    let mut rng = replica_rng(1401, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let jumps = 1 + (rng.random::<u32>() % 5) as usize;
        let t = simulate_vrjp(&g, 0, StopRule::Jumps(jumps), &mut rng).unwrap();
        let t = Trajectory {
            horizon: t.horizon + rng.random::<f64>(),
            ..t
        };
        let z = time_change(&t, g.theta());
        let fz = density_fz(&g, &z).unwrap();
        let fa = density_fx_annealed(&g, &z).unwrap();
        worst = worst.max((fz - fa).abs() / fa.abs());
    }
    let identity_pass = worst < 1e-10;

    let traj = Trajectory {
        states: vec![0, 1, 2, 1],
        epochs: vec![0.4, 0.9, 1.7],
        horizon: 2.1,
    };
    let target = density_fx_annealed(&g, &traj).unwrap();
    let order = g.default_order();
    let mut rng = replica_rng(1402, 0);
    let vals: Vec<f64> = (0..100_000)
        .map(|_| {
            let beta = sample_nu(&g, &order, &mut rng);
            density_fx_quenched(&g, &beta, &traj).unwrap()
        })
        .collect();
    let (mean, se) = stats::mean_stderr(&vals);
    let z = (mean - target).abs() / se;
    let anneal_pass = z < 4.0;

    let pass = identity_pass && anneal_pass;
    report(
        "4 (trajectory densities)",
        pass,
        &format!("max relative gap {worst:.2e}; annealing z = {z:.2}"),
    );
    assert!(pass, "gap {worst:e}, z {z}");
}

/// 5. Mixture and edge-reinforcement equivalences: prefix-3 χ² at
/// p > 0.01 with N = 1e5 on the triangle and the 3-path, plus the null
/// calibration of the test itself.
#[test]
fn criterion_05_mixture_and_errw_equivalence() {
    let mix = run(
        &ExperimentConfig::MixtureTest(MixtureTestConfig {
            seed: 1002,
            n_samples: 100_000,
            prefix_len: 3,
            p_min: 0.01,
        }),
        0,
    )
    .unwrap();
    let errw = run(
        &ExperimentConfig::ErrwEquivalence(ErrwEquivalenceConfig {
            seed: 2002,
            n_samples: 100_000,
            prefix_len: 3,
            p_min: 0.01,
            a: 1.0,
        }),
        0,
    )
    .unwrap();

    // null calibration: identical generators on disjoint streams give
    // uniform p-values
    let mut pvals = Vec::new();
    for trial in 0..200u64 {
        let gen = |stream: u64| -> Vec<Vec<usize>> {
            let mut rng = replica_rng(1501, 2 * trial + stream);
            (0..2000)
                .map(|_| {
                    (0..3)
                        .map(|_| usize::from(rng.random::<f64>() < 0.5))
                        .collect()
                })
                .collect()
        };
        pvals.push(path_prefix_test(&gen(0), &gen(1), 3).unwrap());
    }
    let (_, p_cal) = stats::ks_test(&pvals, |x| x.clamp(0.0, 1.0));
    let cal_pass = p_cal > 0.01;

    let pass = mix.pass == Some(true) && errw.pass == Some(true) && cal_pass;
    report(
        "5 (mixture / edge-reinforcement laws)",
        pass,
        &format!(
            "{}; {}; calibration KS p = {p_cal:.4}",
            mix.summary, errw.summary
        ),
    );
    assert!(pass);
}

/// 6. Fractional-moment decay on the 41-site chain (W = 0.01) and the
/// 11×11 box (W = 0.05): monotone estimates, positive fitted rate with
/// R² > 0.9, diagonal matching the closed-form constant, both runs in
/// under 10 minutes.
#[test]
fn criterion_06_fractional_moment_decay() {
    let t0 = Instant::now();
    let d1 = run(
        &ExperimentConfig::FractionalDecay(FractionalDecayConfig {
            seed: 1201,
            dimension: 1,
            side: 41,
            w: 0.01,
            gamma_shape: None,
            theta: 1.0,
            exponent: 0.25,
            n_samples: 5000,
            max_offset: None,
            z_max: 4.0,
        }),
        0,
    )
    .unwrap();
    let d2 = run(
        &ExperimentConfig::FractionalDecay(FractionalDecayConfig {
            seed: 1206,
            dimension: 2,
            side: 11,
            w: 0.05,
            gamma_shape: None,
            theta: 1.0,
            exponent: 0.25,
            n_samples: 4000,
            max_offset: None,
            z_max: 4.0,
        }),
        0,
    )
    .unwrap();
    let elapsed = t0.elapsed();
    let pass = d1.pass == Some(true) && d2.pass == Some(true) && elapsed.as_secs() < 600;
    report(
        "6 (fractional-moment decay)",
        pass,
        &format!("{}; {}; elapsed {elapsed:?}", d1.summary, d2.summary),
    );
    assert!(pass, "{} / {}", d1.summary, d2.summary);
}

/// 7. Threshold numbers: the self-consistent bound ≈ 0.2907 at d = 1
/// next to the 0.24/d and a(3) ≈ 0.65 comparators, with the
/// discrepancy note in the summary.
#[test]
fn criterion_07_threshold_numbers() {
    let outcome = run(
        &ExperimentConfig::Thresholds(ThresholdsConfig {
            dimensions: vec![1, 2, 3],
            theta: 1.0,
        }),
        0,
    )
    .unwrap();
    let mut lines = outcome.csv.lines();
    let header = lines.next().unwrap();
    let row1: Vec<&str> = lines.next().unwrap().split(',').collect();
    let wprime: f64 = row1[1].parse().unwrap();
    let own_value = (wprime - 0.290684).abs() < 5e-4;
    let comparators = header.contains("comparator_wbar") && outcome.csv.contains("0.65");
    let note = outcome.summary.contains("does not match")
        && outcome.summary.contains("differs");
    let pass = own_value && comparators && note;
    report(
        "7 (threshold numbers)",
        pass,
        &format!("W'(1) = {wprime:.6}; comparators and discrepancy note emitted"),
    );
    assert!(pass, "{}", outcome.summary);
}

/// 8. Variance identity: Monte Carlo variance of the center potential
/// against (1 + dW)/(2θ²) within 4 SE for (d, W, θ) in
/// {(1,1,1), (2,0.5,1), (2,0.5,2)}.
///
/// The θ = 2 tuple asserts a reference value the sampled law provably
/// does not have (the exact variance is (1 + dWθ²)/(2θ⁴), which equals
/// the quoted formula only at θ = 1), so that sub-case fails; the
/// detail line also shows the exact-law comparison, which the Monte
/// Carlo does satisfy.
#[test]
fn criterion_08_variance_identity() {
    let mut detail = String::new();
    let mut pass = true;
    for (d, w, theta, seed) in [
        (1usize, 1.0f64, 1.0f64, 1801u64),
        (2, 0.5, 1.0, 1802),
        (2, 0.5, 2.0, 1803),
    ] {
        let spec = BoxSpec::new(d, 2);
        let r = variance_check(&spec, w, theta, 20_000, seed).unwrap();
        let stated = (1.0 + d as f64 * w) / (2.0 * theta * theta);
        let exact = vrjp_core::estimators::exact_center_variance(d, w, theta);
        let z_stated = r.z_score(stated);
        let z_exact = r.z_score(exact);
        let ok = z_stated < 4.0;
        pass &= ok;
        detail.push_str(&format!(
            "(d={d},W={w},theta={theta}): var = {:.4}, stated {stated:.4} (z = {z_stated:.1}), exact-law {exact:.4} (z = {z_exact:.1}); ",
            r.estimate
        ));
    }
    report("8 (variance identity)", pass, &detail);
    assert!(pass, "{detail}");
}

/// 9. Regularity: the edge exponent on the fixed window [1e-6, 1e-1]
/// is 0.50 ± 0.02 for θ in {0.1, 1, 10} and D₀ in {0, 3}.
///
/// At θ = 10 the fixed window leaves the √x regime (the edge CDF
/// saturates once θ²x is order one), so that sub-case fails; the
/// scale-adapted window recovers 0.499 for every θ, as the detail
/// line shows.
#[test]
fn criterion_09_regularity_exponent() {
    let mut detail = String::new();
    let mut pass = true;
    for theta in [0.1, 1.0, 10.0] {
        for d0 in [0.0, 3.0] {
            let law = SingleSiteDensity::new(theta, d0).unwrap();
            let slope = tau_regularity(&law).unwrap();
            let scaled = vrjp_core::localization::tau_regularity_on_grid(
                &law,
                &vrjp_core::localization::log_grid(
                    1e-6 / (theta * theta),
                    1e-1 / (theta * theta),
                    20,
                ),
            )
            .unwrap();
            let ok = (slope - 0.5).abs() <= 0.02;
            pass &= ok;
            detail.push_str(&format!(
                "(theta={theta},d0={d0}): slope = {slope:.4} (scale-adapted {scaled:.4}); "
            ));
        }
    }
    report("9 (regularity exponent)", pass, &detail);
    assert!(pass, "{detail}");
}

/// 10. Localization contrast: median inverse participation ratio at
/// θ = 0.1 exceeds the θ = 10 one on 100-site chains (200 samples
/// each); eigen residuals below 1e-8.
#[test]
fn criterion_10_localization_contrast() {
    let outcome = run(
        &ExperimentConfig::Localization(LocalizationConfig {
            seed: 2010,
            sites: 100,
            thetas: vec![0.1, 10.0],
            samples: 200,
            w: 1.0,
            residual_tol: 1e-8,
        }),
        0,
    )
    .unwrap();
    let pass = outcome.pass == Some(true);
    report("10 (localization contrast)", pass, &outcome.summary);
    assert!(pass, "{}", outcome.summary);
}

/// 11. Determinism: rerunning any experiment with the same seed (and
/// any worker count) yields byte-identical CSV; this drives the real
/// binary end to end.
#[test]
fn criterion_11_byte_identical_reruns() {
    let bin = env!("CARGO_BIN_EXE_vrjp");
    let dir = std::env::temp_dir().join("vrjp-acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("thresholds", vec!["thresholds"]),
        (
            "sample-potential",
            vec![
                "sample-potential",
                "--seed",
                "99",
                "-d",
                "2",
                "--side",
                "5",
                "--wired",
                "--samples",
                "3",
            ],
        ),
        (
            "ward-check",
            vec!["ward-check", "--seed", "1101", "--n-samples", "2000"],
        ),
        (
            "fractional-decay",
            vec![
                "fractional-decay",
                "--seed",
                "1201",
                "--side",
                "11",
                "--n-samples",
                "400",
            ],
        ),
    ];
    for (name, args) in cases {
        let mut outputs = Vec::new();
        for (tag, workers) in [("a", "1"), ("b", "4"), ("c", "4")] {
            let path = dir.join(format!("{name}-{tag}.csv"));
            let status = std::process::Command::new(bin)
                .args(&args)
                .arg("--workers")
                .arg(workers)
                .arg("--out")
                .arg(&path)
                .stderr(std::process::Stdio::null())
                .status()
                .unwrap();
            assert!(status.code().is_some(), "binary crashed");
            outputs.push(std::fs::read(&path).unwrap());
        }
        let identical = outputs[0] == outputs[1] && outputs[1] == outputs[2];
        pass &= identical;
        detail.push_str(&format!("{name}: identical = {identical}; "));
    }
    report("11 (byte-identical reruns)", pass, &detail);
    assert!(pass, "{detail}");
}
