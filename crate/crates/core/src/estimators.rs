//! Fractional-moment Monte Carlo, exponential decay fits, recurrence
//! thresholds, and the path-distribution chi-square test.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::ln_gamma;

use crate::error::{CoreError, Result};
use crate::graph::{build_box, missing_neighbor_counts, wire_box, BoxSpec, WeightedGraph};
use crate::green::{assemble_h, green_column};
use crate::potential::sample_nu;
use crate::rng::parallel_replicas;
use crate::stats;

/// The unit of all statistical output: Monte Carlo mean, its standard
/// error, the replica count, and the master seed that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateReport {
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
}

impl EstimateReport {
    /// Mean and stderr (= sample std / √n) of raw replica values,
    /// reduced with pairwise summation.
    pub fn from_samples(values: &[f64], seed: u64) -> Self {
        let (estimate, stderr) = stats::mean_stderr(values);
        EstimateReport {
            estimate,
            stderr,
            n: values.len(),
            seed,
        }
    }

    /// |estimate − reference| in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.estimate == reference {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.estimate - reference).abs() / self.stderr
        }
    }

    /// CSV row `estimate,stderr,n,seed`.
    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.estimate, self.stderr, self.n, self.seed)
    }
}

/// Exponential decay fit of log-estimates against distance.
#[derive(Debug, Clone)]
pub struct DecayFit {
    /// Fitted decay rate (minus the log-linear slope).
    pub kappa: f64,
    pub r_squared: f64,
    /// (|x|, log estimate) pairs that entered the fit.
    pub points: Vec<(f64, f64)>,
}

/// Per-edge weight law for fractional-moment runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeWeightLaw {
    Deterministic(f64),
    /// Gamma(shape, 1) independently on every edge.
    Gamma(f64),
}

impl EdgeWeightLaw {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            EdgeWeightLaw::Deterministic(w) => *w,
            EdgeWeightLaw::Gamma(a) => Gamma::new(*a, 1.0).expect("shape > 0").sample(rng),
        }
    }
}

/// One target of a fractional-moment run.
#[derive(Debug, Clone)]
pub struct TargetEstimate {
    /// Lattice offset of the target from the box center.
    pub offset: Vec<i64>,
    /// L1 distance |x|.
    pub abs_x: f64,
    pub report: EstimateReport,
}

/// Wired box with the edge-weight law applied independently per replica
/// (boundary-crossing stubs drawn edge by edge, then pooled onto δ).
fn draw_wired_box<R: Rng + ?Sized>(
    spec: &BoxSpec,
    law: &EdgeWeightLaw,
    theta: f64,
    rng: &mut R,
) -> WeightedGraph {
    match law {
        EdgeWeightLaw::Deterministic(w) => {
            let g = build_box(spec, *w, theta).expect("validated spec");
            wire_box(&g, theta).expect("fresh box")
        }
        EdgeWeightLaw::Gamma(_) => {
            let base = build_box(spec, 1.0, theta).expect("validated spec");
            let n = base.vertex_count();
            let mut edges: Vec<(usize, usize, f64)> = base
                .edges()
                .iter()
                .map(|&(i, j, _)| (i, j, law.draw(rng)))
                .collect();
            let missing = missing_neighbor_counts(spec);
            for (i, m) in missing.iter().enumerate() {
                if *m > 0 {
                    // one independent draw per missing lattice edge
                    let w: f64 = (0..*m).map(|_| law.draw(rng)).sum();
                    edges.push((i, n, w));
                }
            }
            WeightedGraph::from_edges_with_delta(n + 1, &edges, vec![theta; n + 1], vec![0.0; n + 1], n)
                .expect("wired box is connected")
        }
    }
}

/// Monte Carlo estimate of `E[G(0,x)^s]` on a wired box for each target
/// offset `x`, drawing edge weights (when random) and the potential
/// fresh per replica. Uses the exact Green column, not the path
/// expansion.
#[allow(clippy::too_many_arguments)]
pub fn fractional_moment(
    spec: &BoxSpec,
    law: EdgeWeightLaw,
    theta: f64,
    s: f64,
    targets: &[Vec<i64>],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<TargetEstimate>> {
    if !(theta > 0.0) {
        return Err(CoreError::InvalidParameter("theta must be positive".into()));
    }
    if !(s > 0.0) {
        return Err(CoreError::InvalidParameter("s must be positive".into()));
    }
    let mut spec = spec.clone();
    spec.wired = true;
    if spec.center.is_empty() {
        spec.center = vec![0; spec.dimension];
    }
    let center = spec.center_index();
    let mut target_idx = Vec::with_capacity(targets.len());
    for off in targets {
        if off.len() != spec.dimension {
            return Err(CoreError::InvalidParameter("target dimension mismatch".into()));
        }
        let p: Vec<i64> = off
            .iter()
            .zip(&spec.center)
            .map(|(o, c)| o + c)
            .collect();
        let idx = spec
            .index_of(&p)
            .ok_or_else(|| CoreError::InvalidParameter(format!("target {off:?} outside box")))?;
        if idx == center && s >= 0.5 {
            return Err(CoreError::InvalidParameter(
                "diagonal moments of order >= 1/2 diverge".into(),
            ));
        }
        target_idx.push(idx);
    }
    if let EdgeWeightLaw::Deterministic(w) = law {
        if !(w > 0.0) {
            return Err(CoreError::InvalidParameter("w must be positive".into()));
        }
    }
    if let EdgeWeightLaw::Gamma(a) = law {
        if !(a > 0.0) {
            return Err(CoreError::InvalidParameter("gamma shape must be positive".into()));
        }
    }

    let rows = parallel_replicas(n_samples, seed, |_, rng| {
        let g = draw_wired_box(&spec, &law, theta, rng);
        let order = g.default_order();
        let beta = sample_nu(&g, &order, rng);
        let col = green_column(&assemble_h(&g, &beta), center)
            .expect("sampled potential is in the PD cone");
        target_idx.iter().map(|&t| col[t].powf(s)).collect::<Vec<f64>>()
    });

    Ok(targets
        .iter()
        .enumerate()
        .map(|(ti, off)| {
            let vals: Vec<f64> = rows.iter().map(|r| r[ti]).collect();
            TargetEstimate {
                offset: off.clone(),
                abs_x: off.iter().map(|o| o.abs()).sum::<i64>() as f64,
                report: EstimateReport::from_samples(&vals, seed),
            }
        })
        .collect())
}

/// Least-squares exponential decay rate of estimates against |x|.
pub fn fit_decay(points: &[(f64, EstimateReport)]) -> Result<DecayFit> {
    let mut xs = Vec::new();
    let mut logs = Vec::new();
    for (x, r) in points {
        if !(r.estimate > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "non-positive estimate {} at |x| = {x}",
                r.estimate
            )));
        }
        xs.push(*x);
        logs.push(r.estimate.ln());
    }
    let mut distinct = xs.clone();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(CoreError::InvalidParameter(
            "decay fit needs >= 3 distinct |x| values".into(),
        ));
    }
    let (slope, _, r2) = stats::linear_fit(&xs, &logs);
    Ok(DecayFit {
        kappa: -slope,
        r_squared: r2,
        points: xs.into_iter().zip(logs).collect(),
    })
}

/// Analytic `E[G(i₀,i₀)^s] = 2^{-s} Γ(1/2 − s)/Γ(1/2) θ^{2s}`, valid
/// for `s < 1/2` (the diagonal law is an inverse Gamma power).
pub fn moment_constant(theta: f64, s: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(CoreError::InvalidParameter("theta must be positive".into()));
    }
    if !(s >= 0.0 && s < 0.5) {
        return Err(CoreError::InvalidParameter(format!(
            "moment of order {s} diverges (need 0 <= s < 1/2)"
        )));
    }
    let log = -s * 2.0f64.ln() + ln_gamma(0.5 - s) - ln_gamma(0.5) + 2.0 * s * theta.ln();
    Ok(log.exp())
}

/// Recurrence thresholds: `(W̄', W̄'^4)` where
/// `W̄' = 1/(2d · E[G(0,0)^{1/4}])`. The fourth power is the
/// deterministic-weight threshold.
pub fn threshold_w(d: usize, theta: f64) -> Result<(f64, f64)> {
    if d == 0 {
        return Err(CoreError::InvalidParameter("d must be >= 1".into()));
    }
    let c = moment_constant(theta, 0.25)?;
    let wp = 1.0 / (2.0 * d as f64 * c);
    Ok((wp, wp.powi(4)))
}

/// Gamma quarter-moment `E[W^{1/4}] = Γ(a + 1/4)/Γ(a)` for W ~ Gamma(a, 1).
pub fn gamma_quarter_moment(a: f64) -> f64 {
    (ln_gamma(a + 0.25) - ln_gamma(a)).exp()
}

/// ERRW threshold: the root `ā` of `Γ(ā + 1/4)/Γ(ā) = W̄'(d, θ=1)`,
/// found by bisection (the left side grows from 0, strictly).
pub fn threshold_errw(d: usize) -> Result<f64> {
    let (wp, _) = threshold_w(d, 1.0)?;
    let f = |a: f64| gamma_quarter_moment(a) - wp;
    let mut lo = 1e-12;
    let mut hi = 50.0;
    if !(f(lo) < 0.0 && f(hi) > 0.0) {
        return Err(CoreError::BracketFailure(format!(
            "no sign change on [{lo}, {hi}] for d = {d}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Two-sample chi-square over length-`prefix_len` path prefixes.
/// Sequences shorter than the prefix are rejected; bins with expected
/// count below 5 are merged. Returns the p-value.
pub fn path_prefix_test(
    samples_a: &[Vec<usize>],
    samples_b: &[Vec<usize>],
    prefix_len: usize,
) -> Result<f64> {
    if prefix_len == 0 {
        return Err(CoreError::InvalidParameter("prefix_len must be >= 1".into()));
    }
    if samples_a.is_empty() || samples_b.is_empty() {
        return Err(CoreError::DegenerateTest("empty sample set".into()));
    }
    let count = |set: &[Vec<usize>]| -> Result<BTreeMap<Vec<usize>, u64>> {
        let mut m = BTreeMap::new();
        for s in set {
            if s.len() < prefix_len {
                return Err(CoreError::InvalidParameter(format!(
                    "sequence of length {} shorter than prefix {prefix_len}",
                    s.len()
                )));
            }
            *m.entry(s[..prefix_len].to_vec()).or_insert(0u64) += 1;
        }
        Ok(m)
    };
    let ca = count(samples_a)?;
    let cb = count(samples_b)?;
    let (_, p, _) = stats::chi2_two_sample_counts(&ca, &cb)?;
    Ok(p)
}

/// Monte Carlo variance of the potential at the box center on the
/// wired box. The stderr is the plug-in standard error of the variance
/// estimate (mean of centered squares).
pub fn variance_check(
    spec: &BoxSpec,
    w: f64,
    theta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<EstimateReport> {
    if spec.side() < 5 {
        return Err(CoreError::InvalidParameter(
            "variance probe needs box side >= 5".into(),
        ));
    }
    let g = wire_box(&build_box(spec, w, theta)?, theta)?;
    let center = spec.center_index();
    let order = g.default_order();
    let vals = parallel_replicas(n_samples, seed, |_, rng| sample_nu(&g, &order, rng)[center]);
    let mean = stats::pairwise_sum(&vals) / vals.len() as f64;
    let sq: Vec<f64> = vals.iter().map(|v| (v - mean) * (v - mean)).collect();
    Ok(EstimateReport::from_samples(&sq, seed))
}

/// Exact variance of the potential at a bulk vertex of the constant
/// (w, θ) lattice: `Σ_j W_ij θ_j/(4θ³) + 1/(2θ⁴) = (1 + d·w·θ²)/(2θ⁴)`.
/// Second derivative of the log Laplace transform at 0; agrees with the
/// Gamma law on a single vertex.
pub fn exact_center_variance(d: usize, w: f64, theta: f64) -> f64 {
    let c = 2.0 * d as f64 * w * theta; // Σ_j W_ij θ_j
    c / (4.0 * theta.powi(3)) + 1.0 / (2.0 * theta.powi(4))
}
