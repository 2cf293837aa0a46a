//! The multivariate inverse-Gaussian law of the random potential.
//!
//! A potential `beta` on a graph with weights (W, θ, η) is distributed
//! so that the operator `H = 2[β] − Δ_W` is positive definite almost
//! surely and the density is
//!
//! ```text
//! (2/π)^{N/2} (Π θ_i) exp(-½(⟨θ,Hθ⟩ + ⟨η,H⁻¹η⟩ − 2⟨θ,η⟩)) / √(det H)
//! ```
//!
//! on `{H ≻ 0}`. Sampling is exact (no MCMC): vertices are visited in an
//! elimination order; each step draws one generalized-inverse-Gaussian
//! variable for the conditional law and applies the deterministic shift
//! that couples it to the already-sampled block. The inverse of the
//! growing block is maintained by rank-one Schur updates, so a full
//! sample costs O(N³).
//!
//! The closed-form Laplace transform and the two expectation identities
//! (over `G(i₀,l)/G(i₀,i₀)`) are implemented next to their Monte Carlo
//! counterparts; together they are the oracle suite for the sampler.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{CoreError, Result};
use crate::estimators::EstimateReport;
use crate::graph::WeightedGraph;
use crate::green::{assemble_h, green};
use crate::rng::{parallel_replicas, replica_rng};
use crate::stats;

/// Parameters of the `λ = 1/2` generalized inverse Gaussian family
/// with density proportional to `x^{-1/2} exp(-(a x + b/x)/2)`.
///
/// For `b = 0` this is Gamma(1/2, rate a/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GigParams {
    a: f64,
    b: f64,
}

impl GigParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(CoreError::InvalidParameter(format!("gig: a must be > 0, got {a}")));
        }
        if !(b >= 0.0) {
            return Err(CoreError::InvalidParameter(format!("gig: b must be >= 0, got {b}")));
        }
        Ok(GigParams { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Normalized density: `√(a/2π) e^{√(ab)} x^{-1/2} e^{-(ax+b/x)/2}`.
    pub fn density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let norm = (self.a / (2.0 * std::f64::consts::PI)).sqrt() * (self.a * self.b).sqrt().exp();
        norm * x.powf(-0.5) * (-(self.a * x + self.b / x) / 2.0).exp()
    }

    /// Exact draw.
    ///
    /// `b = 0`: `Z²/a` with standard normal `Z` is Gamma(1/2, rate a/2).
    /// `b > 0`: the reciprocal is inverse-Gaussian with mean `√(a/b)`
    /// and shape `a`; sampled by the Michael–Schucany–Haas transform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        if self.b == 0.0 {
            let x = z * z / self.a;
            // guard against an exact zero from z == 0
            return x.max(f64::MIN_POSITIVE);
        }
        let mu = (self.a / self.b).sqrt();
        let lam = self.a;
        let y = z * z;
        let x = mu + mu * mu * y / (2.0 * lam)
            - mu / (2.0 * lam) * (4.0 * mu * lam * y + mu * mu * y * y).sqrt();
        let u: f64 = rng.random();
        let ig = if u <= mu / (mu + x) { x } else { mu * mu / x };
        1.0 / ig
    }
}

/// Exact sample from the `λ = 1/2` GIG law.
pub fn sample_gig<R: Rng + ?Sized>(params: &GigParams, rng: &mut R) -> f64 {
    params.sample(rng)
}

/// One realization of the random potential together with the order it
/// was generated in and the seed of its stream.
#[derive(Debug, Clone)]
pub struct PotentialSample {
    pub beta: Vec<f64>,
    pub elimination_order: Vec<usize>,
    pub seed: u64,
}

impl PotentialSample {
    /// Draw on replica stream `replica` of `master_seed`, default order.
    pub fn draw(graph: &WeightedGraph, master_seed: u64, replica: u64) -> Self {
        let order = graph.default_order();
        let mut rng = replica_rng(master_seed, replica);
        let beta = sample_nu(graph, &order, &mut rng);
        PotentialSample {
            beta,
            elimination_order: order,
            seed: master_seed,
        }
    }
}

/// Density of the potential law at `beta`; exactly 0 off `{H ≻ 0}`.
pub fn density_nu(graph: &WeightedGraph, beta: &[f64]) -> f64 {
    let n = graph.vertex_count();
    assert_eq!(beta.len(), n, "beta length must match vertex count");
    let h = assemble_h(graph, beta);
    let chol = match Cholesky::new(h.as_matrix().clone()) {
        Some(c) => c,
        None => return 0.0,
    };
    let theta = DVector::from_column_slice(graph.theta());
    let eta = DVector::from_column_slice(graph.eta());
    let quad_theta = theta.dot(&(h.as_matrix() * &theta));
    let quad_eta = eta.dot(&chol.solve(&eta));
    let cross = 2.0 * theta.dot(&eta);
    let log_det: f64 = chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
    let log_theta: f64 = graph.theta().iter().map(|t| t.ln()).sum();
    let log_const = 0.5 * n as f64 * (2.0 / std::f64::consts::PI).ln();
    (log_const + log_theta - 0.5 * (quad_theta + quad_eta - cross) - 0.5 * log_det).exp()
}

/// Level fields for the elimination order: `fields[k]` is the boundary
/// field of the induced subgraph on `order[..k]`, i.e. η plus the θ-mass
/// of every eliminated vertex pushed onto its remaining neighbors.
fn level_fields(graph: &WeightedGraph, order: &[usize]) -> Vec<Vec<f64>> {
    let n = order.len();
    let mut fields = vec![Vec::new(); n + 1];
    let mut cur = graph.eta().to_vec();
    fields[n] = cur.clone();
    for k in (2..=n).rev() {
        let vk = order[k - 1];
        for &j in &order[..k - 1] {
            cur[j] += graph.w(j, vk) * graph.theta()[vk];
        }
        fields[k - 1] = cur.clone();
    }
    fields
}

/// Exact sequential sampler for the potential law.
///
/// `order` is the sampling order (a permutation of the vertices); the
/// marginalization sweep peels vertices from the back of `order`. The
/// law of the output does not depend on `order`.
pub fn sample_nu<R: Rng + ?Sized>(graph: &WeightedGraph, order: &[usize], rng: &mut R) -> Vec<f64> {
    let n = graph.vertex_count();
    assert_eq!(order.len(), n, "order must cover all vertices");
    {
        let mut seen = vec![false; n];
        for &v in order {
            assert!(v < n && !seen[v], "order must be a permutation");
            seen[v] = true;
        }
    }
    let theta = graph.theta();
    let fields = level_fields(graph, order);
    let mut beta = vec![0.0; n];

    // base step
    let v1 = order[0];
    let g1 = GigParams::new(2.0 * theta[v1] * theta[v1], fields[1][v1].powi(2) / 2.0)
        .expect("theta > 0")
        .sample(rng);
    beta[v1] = g1;

    // inverse of the sampled block, grown by one vertex per step; the
    // top-left k×k corner of a flat row-major buffer is the live part
    let mut ghat = vec![0.0; n * n];
    ghat[0] = 1.0 / (2.0 * g1);
    let mut w = vec![0.0; n];
    let mut gw = vec![0.0; n];
    let mut slot = vec![0usize; n]; // position of each vertex in the order
    for (pos, &v) in order.iter().enumerate() {
        slot[v] = pos;
    }

    for k in 2..=n {
        let m = k - 1;
        let vk = order[m];
        let field = &fields[k];
        // edge weights from vk into the sampled block; visit only the
        // neighbors instead of filling the dense vector
        w[..m].fill(0.0);
        let mut touched = 0usize;
        for &(j, wj) in graph.neighbors(vk) {
            if slot[j] < m {
                w[slot[j]] = wj;
                touched += 1;
            }
        }
        if touched == 0 {
            // no edge into the block yet: independent base draw
            let gk = GigParams::new(
                2.0 * theta[vk] * theta[vk],
                field[vk].powi(2) / 2.0,
            )
            .expect("theta > 0")
            .sample(rng);
            beta[vk] = gk;
            gw[..m].fill(0.0);
            let pivot_inv = 1.0 / (2.0 * gk);
            for i in 0..m {
                ghat[i * n + m] = 0.0;
                ghat[m * n + i] = 0.0;
            }
            ghat[m * n + m] = pivot_inv;
            continue;
        }
        // gw = Ĝ w over the live block
        for i in 0..m {
            let row = &ghat[i * n..i * n + m];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(&w[..m]) {
                acc += a * b;
            }
            gw[i] = acc;
        }
        let mut eta_check = field[vk];
        let mut quad = 0.0;
        for (i, &j) in order[..m].iter().enumerate() {
            eta_check += gw[i] * field[j];
            quad += gw[i] * w[i];
        }
        assert!(
            eta_check >= -1e-9,
            "conditional field must be non-negative, got {eta_check}"
        );
        let gk = GigParams::new(
            2.0 * theta[vk] * theta[vk],
            eta_check.max(0.0).powi(2) / 2.0,
        )
        .expect("theta > 0")
        .sample(rng);
        beta[vk] = gk + 0.5 * quad;

        // Schur growth: the new block inverse in terms of the old one.
        // The pivot is 2β_vk − wᵀ Ĝ w = 2γ_k > 0, so positive
        // definiteness holds by construction at every step.
        let pivot_inv = 1.0 / (2.0 * gk);
        for i in 0..m {
            let gi = gw[i] * pivot_inv;
            let row = i * n;
            for (cell, &gj) in ghat[row..row + m].iter_mut().zip(&gw[..m]) {
                *cell += gi * gj;
            }
            ghat[row + m] = gi;
            ghat[m * n + i] = gi;
        }
        ghat[m * n + m] = pivot_inv;
    }
    beta
}

/// A Laplace-transform probe point: one non-negative entry per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacePoint(Vec<f64>);

impl LaplacePoint {
    pub fn new(k: Vec<f64>) -> Result<Self> {
        if k.iter().any(|v| !(*v >= 0.0)) {
            return Err(CoreError::InvalidParameter("laplace point needs k >= 0".into()));
        }
        Ok(LaplacePoint(k))
    }

    /// All-zero point.
    pub fn zero(n: usize) -> Self {
        LaplacePoint(vec![0.0; n])
    }

    /// Mass `value` at a single vertex.
    pub fn at_vertex(n: usize, vertex: usize, value: f64) -> Result<Self> {
        let mut k = vec![0.0; n];
        k[vertex] = value;
        LaplacePoint::new(k)
    }

    pub fn k(&self) -> &[f64] {
        &self.0
    }
}

/// Closed form of `E[exp(-Σ k_i β_i)]`.
pub fn laplace_closed(graph: &WeightedGraph, point: &LaplacePoint) -> f64 {
    let k = point.k();
    assert_eq!(k.len(), graph.vertex_count());
    let theta = graph.theta();
    let eta = graph.eta();
    let shifted: Vec<f64> = theta
        .iter()
        .zip(k)
        .map(|(t, ki)| (t * t + ki).sqrt())
        .collect();
    let mut exponent = 0.0;
    for (i, (t, s)) in theta.iter().zip(&shifted).enumerate() {
        exponent -= eta[i] * (s - t);
    }
    for &(i, j, w) in graph.edges() {
        exponent -= w * (shifted[i] * shifted[j] - theta[i] * theta[j]);
    }
    let mut prefactor = 1.0;
    for (t, s) in theta.iter().zip(&shifted) {
        prefactor *= t / s;
    }
    prefactor * exponent.exp()
}

/// Monte Carlo counterpart of [`laplace_closed`] over exact samples.
pub fn laplace_mc(
    graph: &WeightedGraph,
    point: &LaplacePoint,
    n_samples: usize,
    seed: u64,
) -> Result<EstimateReport> {
    if n_samples < 100 {
        return Err(CoreError::InvalidParameter("need n_samples >= 100".into()));
    }
    let order = graph.default_order();
    let k = point.k().to_vec();
    let vals = parallel_replicas(n_samples, seed, |_, rng| {
        let beta = sample_nu(graph, &order, rng);
        (-beta.iter().zip(&k).map(|(b, ki)| b * ki).sum::<f64>()).exp()
    });
    Ok(EstimateReport::from_samples(&vals, seed))
}

/// Closed form of the ratio identity
/// `E[(G(i₀,l)/G(i₀,i₀)) exp(k_{i₀}/(2G(i₀,i₀)) − Σ k_i β_i)]`
/// for η ≡ 0.
pub fn ward_xi_closed(
    graph: &WeightedGraph,
    point: &LaplacePoint,
    i0: usize,
    l: usize,
) -> Result<f64> {
    if l == i0 {
        return Err(CoreError::InvalidParameter("ward ratio needs l != i0".into()));
    }
    if graph.eta().iter().any(|e| *e != 0.0) {
        return Err(CoreError::InvalidParameter("ward ratio stated for eta = 0".into()));
    }
    let k = point.k();
    let theta = graph.theta();
    let shifted: Vec<f64> = theta
        .iter()
        .zip(k)
        .map(|(t, ki)| (t * t + ki).sqrt())
        .collect();
    let mut value = 1.0;
    for (i, t) in theta.iter().enumerate() {
        if i != i0 {
            value *= t;
        }
    }
    for (i, s) in shifted.iter().enumerate() {
        if i != l {
            value /= s;
        }
    }
    let mut exponent = 0.0;
    for &(i, j, w) in graph.edges() {
        exponent -= w * (shifted[i] * shifted[j] - theta[i] * theta[j]);
    }
    Ok(value * exponent.exp())
}

/// Monte Carlo side of the ratio identity, using the exact Green column.
pub fn ward_xi_mc(
    graph: &WeightedGraph,
    point: &LaplacePoint,
    i0: usize,
    l: usize,
    n_samples: usize,
    seed: u64,
) -> Result<EstimateReport> {
    if l == i0 {
        return Err(CoreError::InvalidParameter("ward ratio needs l != i0".into()));
    }
    if n_samples < 100 {
        return Err(CoreError::InvalidParameter("need n_samples >= 100".into()));
    }
    let order = graph.default_order();
    let k = point.k().to_vec();
    let vals = parallel_replicas(n_samples, seed, |_, rng| {
        let beta = sample_nu(graph, &order, rng);
        let g = green(&assemble_h(graph, &beta)).expect("sampled potential is in the PD cone");
        let ratio = g.entry(i0, l) / g.entry(i0, i0);
        let exponent =
            k[i0] / (2.0 * g.entry(i0, i0)) - beta.iter().zip(&k).map(|(b, ki)| b * ki).sum::<f64>();
        ratio * exponent.exp()
    });
    Ok(EstimateReport::from_samples(&vals, seed))
}

/// Conditional boundary field at `vertex` given the potential on the
/// rest of the graph: the surface field pushed through the inverse of
/// the reduced block, plus the field at the vertex itself.
pub fn conditional_field_at(graph: &WeightedGraph, beta: &[f64], vertex: usize) -> Result<f64> {
    let n = graph.vertex_count();
    assert_eq!(beta.len(), n);
    let others: Vec<usize> = (0..n).filter(|v| *v != vertex).collect();
    let mut reduced = DMatrix::zeros(n - 1, n - 1);
    for (a, &i) in others.iter().enumerate() {
        reduced[(a, a)] = 2.0 * beta[i];
        for (b, &j) in others.iter().enumerate() {
            if a != b {
                reduced[(a, b)] = -graph.w(i, j);
            }
        }
    }
    let chol = Cholesky::new(reduced).ok_or(CoreError::NotPositiveDefinite)?;
    let eta_red = DVector::from_iterator(n - 1, others.iter().map(|&i| graph.eta()[i]));
    let sol = chol.solve(&eta_red);
    let mut acc = graph.eta()[vertex];
    for (a, &i) in others.iter().enumerate() {
        acc += graph.w(vertex, i) * sol[a];
    }
    Ok(acc)
}

/// Mean and stderr of `beta` at one vertex over exact samples.
pub fn sample_mean_at(
    graph: &WeightedGraph,
    vertex: usize,
    n_samples: usize,
    seed: u64,
) -> EstimateReport {
    let order = graph.default_order();
    let vals = parallel_replicas(n_samples, seed, |_, rng| sample_nu(graph, &order, rng)[vertex]);
    EstimateReport::from_samples(&vals, seed)
}

/// Empirical covariance of `(beta_i, beta_j)` with a plug-in stderr.
pub fn sample_cov(
    graph: &WeightedGraph,
    i: usize,
    j: usize,
    n_samples: usize,
    seed: u64,
) -> EstimateReport {
    let order = graph.default_order();
    let pairs = parallel_replicas(n_samples, seed, |_, rng| {
        let b = sample_nu(graph, &order, rng);
        (b[i], b[j])
    });
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mx = stats::pairwise_sum(&xs) / xs.len() as f64;
    let my = stats::pairwise_sum(&ys) / ys.len() as f64;
    let prods: Vec<f64> = pairs.iter().map(|(x, y)| (x - mx) * (y - my)).collect();
    EstimateReport::from_samples(&prods, seed)
}
