//! Spectral and regularity diagnostics for the random operator on
//! finite boxes: eigen decomposition with per-mode localization
//! measures, the conditional single-site density of the potential, and
//! its edge regularity exponent.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{CoreError, Result};
use crate::graph::WeightedGraph;
use crate::green::{GreenMatrix, SchrodingerMatrix};
use crate::quad;
use crate::stats;

/// Full symmetric eigendecomposition plus per-eigenvector localization
/// length and inverse participation ratio.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, one column per eigenvalue.
    pub eigenvectors: DMatrix<f64>,
    /// Decay length fitted from log|ψ| against graph distance from the
    /// max-modulus site; infinite when the fit does not decay.
    pub localization_lengths: Vec<f64>,
    /// Σψ⁴/(Σψ²)² per eigenvector.
    pub ipr: Vec<f64>,
}

/// Hop distances from `source` on the adjacency pattern of `h`
/// (nonzero off-diagonal entries).
fn bfs_distances(h: &DMatrix<f64>, source: usize) -> Vec<usize> {
    let n = h.nrows();
    let mut dist = vec![usize::MAX; n];
    dist[source] = 0;
    let mut queue = std::collections::VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for u in 0..n {
            if u != v && h[(v, u)] != 0.0 && dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Eigen decomposition with localization diagnostics. The graph
/// distance used for decay fits is recovered from the sparsity pattern
/// of `h` itself.
pub fn spectrum(h: &SchrodingerMatrix) -> Result<SpectralReport> {
    let m = h.as_matrix();
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    // sort ascending
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let eigenvalues: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        eigenvectors.set_column(col, &eig.eigenvectors.column(i));
    }

    let mut localization_lengths = Vec::with_capacity(n);
    let mut ipr = Vec::with_capacity(n);
    for col in 0..n {
        let psi = eigenvectors.column(col);
        let s2: f64 = psi.iter().map(|v| v * v).sum();
        let s4: f64 = psi.iter().map(|v| v.powi(4)).sum();
        ipr.push(s4 / (s2 * s2));

        let (peak, _) = psi
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap();
        let dist = bfs_distances(m, peak);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, v) in psi.iter().enumerate() {
            if v.abs() > 1e-12 && dist[i] != usize::MAX {
                xs.push(dist[i] as f64);
                ys.push(v.abs().ln());
            }
        }
        if xs.len() < 2 || xs.iter().all(|x| *x == xs[0]) {
            localization_lengths.push(f64::INFINITY);
            continue;
        }
        let (slope, _, _) = stats::linear_fit(&xs, &ys);
        localization_lengths.push(if slope < 0.0 { -1.0 / slope } else { f64::INFINITY });
    }
    Ok(SpectralReport {
        eigenvalues,
        eigenvectors,
        localization_lengths,
        ipr,
    })
}

impl SpectralReport {
    /// Max residual `‖Hψ − λψ‖∞` over all eigenpairs.
    pub fn max_residual(&self, h: &SchrodingerMatrix) -> f64 {
        let mut worst = 0.0f64;
        for (col, &lambda) in self.eigenvalues.iter().enumerate() {
            let psi = self.eigenvectors.column(col);
            let r = h.as_matrix() * psi - lambda * psi;
            worst = worst.max(r.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
        worst
    }

    /// Max entrywise error of the reconstruction `Σ λ ψψᵀ = H`.
    pub fn reconstruction_error(&self, h: &SchrodingerMatrix) -> f64 {
        let n = self.eigenvalues.len();
        let mut acc = DMatrix::zeros(n, n);
        for (col, &lambda) in self.eigenvalues.iter().enumerate() {
            let psi = self.eigenvectors.column(col);
            acc += lambda * psi * psi.transpose();
        }
        (acc - h.as_matrix())
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Max deviation of `ψᵀψ` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let q = &self.eigenvectors;
        let mut g = q.transpose() * q;
        for i in 0..g.nrows() {
            g[(i, i)] -= 1.0;
        }
        g.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Sum of neighbor Green ratios at the probe vertex:
/// `Σ_{j∼i₀} G(i₀,j)/G(i₀,i₀)`.
pub fn d0(graph: &WeightedGraph, g: &GreenMatrix, i0: usize) -> f64 {
    graph
        .neighbors(i0)
        .iter()
        .map(|&(j, _)| g.entry(i0, j) / g.entry(i0, i0))
        .sum()
}

/// Conditional single-site density of the potential `2β₀` given the
/// rest: a shifted square-root-singular exponential supported on
/// `(d0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleSiteDensity {
    pub theta: f64,
    pub d0: f64,
}

impl SingleSiteDensity {
    pub fn new(theta: f64, d0: f64) -> Result<Self> {
        if !(theta > 0.0) {
            return Err(CoreError::InvalidParameter("theta must be positive".into()));
        }
        Ok(SingleSiteDensity { theta, d0 })
    }

    /// Pointwise density
    /// `(1/√(2π)) exp(−(u−D₀)θ²/2) θ/√(u−D₀)` for `u > D₀`, else 0.
    pub fn density(&self, u: f64) -> f64 {
        if u <= self.d0 {
            return 0.0;
        }
        let v = u - self.d0;
        (2.0 * std::f64::consts::PI).sqrt().recip()
            * (-v * self.theta * self.theta / 2.0).exp()
            * self.theta
            / v.sqrt()
    }

    /// Mass of `(D₀, D₀ + x]` by quadrature (substituting away the edge
    /// singularity).
    pub fn edge_cdf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        let th = self.theta;
        let c = 2.0 * th / (2.0 * std::f64::consts::PI).sqrt();
        quad::integrate(|r| c * (-th * th * r * r / 2.0).exp(), 0.0, x.sqrt(), 1e-12)
    }

    /// Total mass by quadrature over an effectively full window.
    pub fn total_mass(&self) -> Result<f64> {
        // the exponential scale is 2/θ²; 60 scales is past double precision
        self.edge_cdf(120.0 / (self.theta * self.theta))
    }
}

/// Pointwise evaluation of the single-site conditional density.
pub fn single_site_density(params: &SingleSiteDensity, u: f64) -> f64 {
    params.density(u)
}

/// Default measurement grid for the edge regularity exponent.
pub fn default_tau_grid() -> Vec<f64> {
    log_grid(1e-6, 1e-1, 20)
}

/// Log-spaced grid.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (l, h) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (l + (h - l) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Least-squares slope of `log F(x)` against `log x` where `F` is the
/// mass of `(D₀, D₀+x]`, measured on the given grid.
pub fn tau_regularity_on_grid(params: &SingleSiteDensity, grid: &[f64]) -> Result<f64> {
    if grid.len() < 3 {
        return Err(CoreError::InvalidParameter("grid needs >= 3 points".into()));
    }
    let mut xs = Vec::with_capacity(grid.len());
    let mut ys = Vec::with_capacity(grid.len());
    for &x in grid {
        if !(x > 0.0) {
            return Err(CoreError::InvalidParameter("grid must be positive".into()));
        }
        let f = params.edge_cdf(x)?;
        if !(f > 0.0) {
            return Err(CoreError::QuadratureFailure(format!("vanishing mass at x = {x}")));
        }
        xs.push(x.ln());
        ys.push(f.ln());
    }
    let (slope, _, _) = stats::linear_fit(&xs, &ys);
    Ok(slope)
}

/// Edge regularity exponent on the default grid `[1e-6, 1e-1]`.
pub fn tau_regularity(params: &SingleSiteDensity) -> Result<f64> {
    tau_regularity_on_grid(params, &default_tau_grid())
}
