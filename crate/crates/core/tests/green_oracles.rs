//! Green function checks: truncated path expansion against the direct
//! inverse, brute-force path enumeration on tiny graphs, and the
//! harmonic return probability against a walk simulation.

use rand::Rng;

use vrjp_core::graph::{build_box, small, wire_box, BoxSpec};
use vrjp_core::green::{
    assemble_h, conductances, green, return_probability, rw_expansion, EXPANSION_TOL,
    IDENTITY_TOL,
};
use vrjp_core::potential::sample_nu;
use vrjp_core::rng::replica_rng;
use vrjp_core::testkit::green_entry_by_path_enumeration;

#[test]
fn expansion_matches_inverse_on_3x3_box() {
    let g = build_box(&BoxSpec::new(2, 1), 1.0, 1.0).unwrap();
    let mut rng = replica_rng(322, 0);
    let beta = sample_nu(&g, &g.default_order(), &mut rng);
    let h = assemble_h(&g, &beta);
    let exact = green(&h).unwrap();
    assert!(exact.identity_residual(&h) < IDENTITY_TOL);
    let approx = rw_expansion(&g, &beta, 200).unwrap();
    let mut worst = 0.0f64;
    for i in 0..9 {
        for j in 0..9 {
            worst = worst.max((approx[(i, j)] - exact.entry(i, j)).abs());
        }
    }
    assert!(worst < EXPANSION_TOL, "worst = {worst}");
}

#[test]
fn expansion_matches_brute_force_path_enumeration() {
    // triangle: enumerate every path of length <= 12 explicitly
    let g = small::cycle(3, 0.8, 1.0);
    let beta = vec![1.1, 0.9, 1.4];
    let len = 12;
    let exp = rw_expansion(&g, &beta, len).unwrap();
    for from in 0..3 {
        for to in 0..3 {
            let oracle = green_entry_by_path_enumeration(&g, &beta, from, to, len);
            assert!(
                (exp[(from, to)] - oracle).abs() < 1e-12,
                "({from},{to}): {} vs {oracle}",
                exp[(from, to)]
            );
        }
    }
}

#[test]
fn identity_residual_small_across_samples() {
    // the identity holds to 1e-10 except for draws whose conditioning
    // puts the double-precision floor above that; those must still sit
    // at their floor
    let g = wire_box(&build_box(&BoxSpec::new(1, 3), 1.0, 1.0).unwrap(), 1.0).unwrap();
    let mut rng = replica_rng(302, 0);
    let mut extreme = 0usize;
    for _ in 0..200 {
        let beta = sample_nu(&g, &g.default_order(), &mut rng);
        let h = assemble_h(&g, &beta);
        let gm = green(&h).unwrap();
        let resid = gm.identity_residual(&h);
        let floor = gm.residual_floor(&h);
        if floor > IDENTITY_TOL {
            extreme += 1;
            assert!(resid < 16.0 * floor, "resid = {resid:e}, floor = {floor:e}");
        } else {
            assert!(resid < IDENTITY_TOL, "resid = {resid:e}");
        }
        // symmetry and positive diagonal
        for i in 0..g.vertex_count() {
            assert!(gm.entry(i, i) > 0.0);
            for j in 0..i {
                let scale = gm.entry(i, i).max(1.0);
                assert!((gm.entry(i, j) - gm.entry(j, i)).abs() < IDENTITY_TOL * scale);
            }
        }
    }
    // ill-conditioned draws are a small minority
    assert!(extreme < 20, "extreme draws: {extreme}");
}

#[test]
fn return_probability_matches_walk_simulation() {
    // sampled conductances on a wired 3x3 box, oracle = direct walk runs
    let g = wire_box(&build_box(&BoxSpec::new(2, 1), 1.0, 1.0).unwrap(), 1.0).unwrap();
    let delta = g.delta().unwrap();
    let i0 = 4; // center
    let mut rng = replica_rng(303, 0);
    let beta = sample_nu(&g, &g.default_order(), &mut rng);
    let gm = green(&assemble_h(&g, &beta)).unwrap();
    let cond = conductances(&g, &gm, i0);
    let p_formula = return_probability(&g, &cond, i0).unwrap();

    // walk oracle
    let n = g.vertex_count();
    let mut c = vec![vec![0.0; n]; n];
    for (&(a, b, _), &cc) in g.edges().iter().zip(&cond) {
        c[a][b] = cc;
        c[b][a] = cc;
    }
    let walks = 200_000;
    let mut returned = 0u64;
    for _ in 0..walks {
        let mut cur = i0;
        loop {
            let row = &c[cur];
            let total: f64 = row.iter().sum();
            let mut u = rng.random::<f64>() * total;
            let mut next = 0;
            for (j, w) in row.iter().enumerate() {
                u -= w;
                if u <= 0.0 {
                    next = j;
                    break;
                }
            }
            if next == delta {
                break;
            }
            if next == i0 {
                returned += 1;
                break;
            }
            cur = next;
        }
    }
    let p_sim = returned as f64 / walks as f64;
    let se = (p_sim * (1.0 - p_sim) / walks as f64).sqrt();
    assert!(
        (p_formula - p_sim).abs() < 4.0 * se,
        "formula = {p_formula}, sim = {p_sim} ± {se}"
    );
}

#[test]
fn return_probability_series_network_by_simulation() {
    // i0 - m - delta with equal conductances: formula says 1/2; confirm
    // against the walk
    let g = wire_box(&build_box(&BoxSpec::new(1, 1), 1.0, 1.0).unwrap(), 1.0).unwrap();
    let i0 = 1;
    let cond = vec![1.0; g.edge_count()];
    let p_formula = return_probability(&g, &cond, i0).unwrap();
    assert!((p_formula - 0.5).abs() < 1e-12);
    let delta = g.delta().unwrap();
    let mut rng = replica_rng(304, 0);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); g.vertex_count()];
    for &(a, b, _) in g.edges() {
        adj[a].push(b);
        adj[b].push(a);
    }
    let walks = 1_000_000;
    let mut returned = 0u64;
    for _ in 0..walks {
        let mut cur = i0;
        loop {
            let nbrs = &adj[cur];
            let next = nbrs[(rng.random::<f64>() * nbrs.len() as f64) as usize % nbrs.len()];
            if next == delta {
                break;
            }
            if next == i0 {
                returned += 1;
                break;
            }
            cur = next;
        }
    }
    let p_sim = returned as f64 / walks as f64;
    let se = (0.25f64 / walks as f64).sqrt();
    assert!((p_sim - 0.5).abs() < 4.0 * se, "sim = {p_sim}");
}
