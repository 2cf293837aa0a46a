//! Test-only oracles, deliberately independent of the implementation
//! paths they check: a rejection sampler driven by the raw density, a
//! brute-force path-sum Green function, and windowed quadrature of the
//! two-vertex density. Used by the integration and acceptance suites;
//! not part of the stable API.

use rand::Rng;

use crate::error::{CoreError, Result};
use crate::graph::WeightedGraph;
use crate::potential::density_nu;


/// Rejection sampler for the potential on a two-vertex graph, driven
/// only by [`density_nu`].
///
/// Works in the coordinates `(β₁, t)` with `β₂ = (W² + t²)/(4β₁)`,
/// where the positive-definiteness boundary becomes `t = 0` and the
/// transformed density `density_nu · t/(2β₁)` is bounded, so a uniform
/// envelope is valid. Panics if the scanned envelope is ever exceeded.
pub struct PairRejectionOracle {
    graph: WeightedGraph,
    w: f64,
    window: f64,
    envelope: f64,
}

impl PairRejectionOracle {
    pub fn new(graph: WeightedGraph, window: f64) -> Result<Self> {
        if graph.vertex_count() != 2 || graph.edge_count() != 1 {
            return Err(CoreError::InvalidParameter("oracle needs a two-vertex graph".into()));
        }
        let w = graph.edges()[0].2;
        let mut envelope = 0.0f64;
        let grid = 600;
        for i in 1..=grid {
            for j in 1..=grid {
                let b1 = window * i as f64 / grid as f64;
                let t = window * j as f64 / grid as f64;
                let b2 = (w * w + t * t) / (4.0 * b1);
                let v = density_nu(&graph, &[b1, b2]) * t / (2.0 * b1);
                envelope = envelope.max(v);
            }
        }
        Ok(PairRejectionOracle {
            graph,
            w,
            window,
            envelope: envelope * 1.3,
        })
    }

    /// One exact draw of `(β₁, β₂)` restricted to the window.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        loop {
            let b1 = rng.random::<f64>() * self.window;
            let t = rng.random::<f64>() * self.window;
            let b2 = (self.w * self.w + t * t) / (4.0 * b1);
            let v = density_nu(&self.graph, &[b1, b2]) * t / (2.0 * b1);
            assert!(
                v <= self.envelope,
                "rejection envelope exceeded: {v} > {}",
                self.envelope
            );
            if rng.random::<f64>() * self.envelope < v {
                return (b1, b2);
            }
        }
    }
}

/// Brute-force Green entry as the truncated sum over explicitly
/// enumerated paths `Σ_σ W_σ/(2β)_σ`; exponential cost, for tiny graphs
/// only.
pub fn green_entry_by_path_enumeration(
    graph: &WeightedGraph,
    beta: &[f64],
    from: usize,
    to: usize,
    max_len: usize,
) -> f64 {
    fn walk(
        graph: &WeightedGraph,
        beta: &[f64],
        cur: usize,
        to: usize,
        weight: f64,
        remaining: usize,
        acc: &mut f64,
    ) {
        let here = weight / (2.0 * beta[cur]);
        if cur == to {
            *acc += here;
        }
        if remaining == 0 {
            return;
        }
        for &(j, w) in graph.neighbors(cur) {
            walk(graph, beta, j, to, here * w, remaining - 1, acc);
        }
    }
    let mut acc = 0.0;
    walk(graph, beta, from, to, 1.0, max_len, &mut acc);
    acc
}

/// Quadrature of the raw two-vertex density over the window
/// `[0, window]²` (clipped to the positive-definite cone), again in the
/// `(β₁, t)` coordinates that remove the boundary singularity.
pub fn pair_density_mass(graph: &WeightedGraph, window: f64, tol: f64) -> Result<f64> {
    if graph.vertex_count() != 2 || graph.edge_count() != 1 {
        return Err(CoreError::InvalidParameter("needs a two-vertex graph".into()));
    }
    let _ = tol;
    let w = graph.edges()[0].2;
    // Substitute β₁ = u², β₂ = W²/(4β₁) + v²: the Jacobian cancels the
    // 1/√det singularity exactly and both directions become
    // Gaussian-shaped, so tensor composite Simpson on a fixed grid
    // converges at full order. Integrand: density · 2u · 2v.
    let u_max = window.sqrt();
    let (nu_, nv) = (2000usize, 400usize);
    let hu = u_max / nu_ as f64;
    let weight = |i: usize, n: usize| -> f64 {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut total = 0.0;
    for i in 0..=nu_ {
        let u = i as f64 * hu;
        let b1 = u * u;
        if b1 <= 0.0 {
            continue;
        }
        let floor = w * w / (4.0 * b1);
        if floor >= window {
            continue;
        }
        let v_max = (window - floor).sqrt();
        let hv = v_max / nv as f64;
        let mut inner = 0.0;
        for j in 0..=nv {
            // the integrand has a finite nonzero limit at v = 0; evaluate
            // just off the boundary, far enough that floor + v² is
            // representable
            let v = if j == 0 { 1e-6 } else { j as f64 * hv };
            let b2 = floor + v * v;
            inner += weight(j, nv) * density_nu(graph, &[b1, b2]) * 2.0 * v;
        }
        total += weight(i, nu_) * (inner * hv / 3.0) * 2.0 * u;
    }
    Ok(total * hu / 3.0)
}
