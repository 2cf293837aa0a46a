//! The operator `H = 2[β] − Δ_W`, its inverse, the random-walk
//! expansion of the inverse, edge conductances, and the recurrence
//! diagnostic on wired graphs.
//!
//! Everything is dense: the graphs in scope are desk-scale boxes, and a
//! Cholesky factorization doubles as the positive-definiteness
//! certificate.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{CoreError, Result};
use crate::graph::WeightedGraph;

/// Residual tolerance for the `H·G = I` identity.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Acceptance tolerance for the truncated random-walk expansion.
pub const EXPANSION_TOL: f64 = 1e-8;

/// Dense symmetric matrix with diagonal `2β_i`, off-diagonal `−W_{ij}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchrodingerMatrix {
    m: DMatrix<f64>,
}

impl SchrodingerMatrix {
    /// Wrap an explicit symmetric matrix.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(CoreError::InvalidParameter("matrix must be square".into()));
        }
        let sym = m
            .iter()
            .zip(m.transpose().iter())
            .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        if !sym {
            return Err(CoreError::InvalidParameter("matrix must be symmetric".into()));
        }
        Ok(SchrodingerMatrix { m })
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }
}

/// Assemble `H = 2[β] − Δ_W` for the given potential.
pub fn assemble_h(graph: &WeightedGraph, beta: &[f64]) -> SchrodingerMatrix {
    let n = graph.vertex_count();
    assert_eq!(beta.len(), n, "beta length must match vertex count");
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = 2.0 * beta[i];
        for &(j, w) in graph.neighbors(i) {
            m[(i, j)] = -w;
        }
    }
    SchrodingerMatrix { m }
}

/// Inverse of a positive definite operator, with the factorization
/// kept as the certificate.
#[derive(Debug, Clone)]
pub struct GreenMatrix {
    g: DMatrix<f64>,
}

impl GreenMatrix {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.g[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// Max-norm residual of `H·G − I`.
    ///
    /// For typical draws this sits near machine precision. The law of
    /// the potential has a polynomial lower tail in the conditional
    /// variable `1/(2G(i,i))`, so occasional draws are extremely
    /// ill-conditioned and no double-precision inverse can push the
    /// absolute residual below roughly `‖H‖·‖G‖·ε`; compare against
    /// [`GreenMatrix::residual_floor`] for those.
    pub fn identity_residual(&self, h: &SchrodingerMatrix) -> f64 {
        let mut prod = h.as_matrix() * &self.g;
        for i in 0..prod.nrows() {
            prod[(i, i)] -= 1.0;
        }
        prod.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Attainable double-precision residual scale `‖H‖∞·‖G‖∞·N·ε`.
    pub fn residual_floor(&self, h: &SchrodingerMatrix) -> f64 {
        let hn = h
            .as_matrix()
            .row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
        let gn = self
            .g
            .row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
        hn * gn * self.g.nrows() as f64 * f64::EPSILON
    }
}

/// Invert via Cholesky; `Err(NotPositiveDefinite)` when the
/// factorization fails. One step of iterative refinement keeps the
/// identity residual at the contract tolerance even for
/// ill-conditioned draws.
pub fn green(h: &SchrodingerMatrix) -> Result<GreenMatrix> {
    let chol = Cholesky::new(h.m.clone()).ok_or(CoreError::NotPositiveDefinite)?;
    let mut g = chol.inverse();
    // per-column solves leave κ·ε-level asymmetry; fold it in before
    // refining so the Newton steps drive both one-sided residuals
    let gt = g.transpose();
    g = (&g + gt) * 0.5;
    // Newton steps G <- 2G − G·H·G square the inversion error; once at
    // the f64 floor a step can bounce, so keep the best iterate seen
    let measure = |g: &DMatrix<f64>| -> f64 {
        let mut r = &h.m * g;
        for i in 0..r.nrows() {
            r[(i, i)] -= 1.0;
        }
        r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    };
    let mut best_resid = measure(&g);
    let mut best = g.clone();
    for _ in 0..4 {
        if best_resid < 1e-13 {
            break;
        }
        let hg = &h.m * &g;
        g = 2.0 * &g - &g * hg;
        let gt = g.transpose();
        g = (&g + gt) * 0.5;
        let resid = measure(&g);
        if resid < best_resid {
            best_resid = resid;
            best = g.clone();
        } else {
            break;
        }
    }
    Ok(GreenMatrix { g: best })
}

/// One column `G(·, i0)` of the inverse, cheaper than the full matrix.
pub fn green_column(h: &SchrodingerMatrix, i0: usize) -> Result<Vec<f64>> {
    let chol = Cholesky::new(h.m.clone()).ok_or(CoreError::NotPositiveDefinite)?;
    let mut e = DVector::zeros(h.dim());
    e[i0] = 1.0;
    Ok(chol.solve(&e).iter().copied().collect())
}

/// Truncated path-sum `D⁻¹ Σ_{k=0}^{max_len} (A D⁻¹)^k` with
/// `D = 2[β]` and `A` the weighted adjacency matrix. Entrywise
/// nondecreasing in `max_len`; converges to the inverse.
pub fn rw_expansion(
    graph: &WeightedGraph,
    beta: &[f64],
    max_len: usize,
) -> Result<DMatrix<f64>> {
    let n = graph.vertex_count();
    assert_eq!(beta.len(), n);
    if beta.iter().any(|b| !(*b > 0.0)) {
        return Err(CoreError::InvalidParameter(
            "random-walk expansion needs 2β_i > 0".into(),
        ));
    }
    let d_inv: Vec<f64> = beta.iter().map(|b| 1.0 / (2.0 * b)).collect();
    let mut out = DMatrix::zeros(n, n);
    // column for each source: u_{k+1} = A (D^{-1} u_k), accumulate Σ u_k
    for x in 0..n {
        let mut u = DVector::zeros(n);
        u[x] = 1.0;
        let mut acc = u.clone();
        for _ in 0..max_len {
            let mut next = DVector::zeros(n);
            for i in 0..n {
                let scaled = d_inv[i] * u[i];
                if scaled != 0.0 {
                    for &(j, w) in graph.neighbors(i) {
                        next[j] += w * scaled;
                    }
                }
            }
            u = next;
            acc += &u;
        }
        for i in 0..n {
            out[(i, x)] = d_inv[i] * acc[i];
        }
    }
    Ok(out)
}

/// Edge conductances `C_{ij} = W_{ij} G(i₀,i) G(i₀,j)`, aligned with
/// `graph.edges()`.
pub fn conductances(graph: &WeightedGraph, g: &GreenMatrix, i0: usize) -> Vec<f64> {
    graph
        .edges()
        .iter()
        .map(|&(i, j, w)| w * g.entry(i0, i) * g.entry(i0, j))
        .collect()
}

/// Probability that the discrete conductance walk started at `i0`
/// returns to `i0` before hitting δ, via the harmonic (Dirichlet)
/// system: `1 − C_eff(i0 ↔ δ) / Σ_j C_{i0,j}`.
pub fn return_probability(graph: &WeightedGraph, cond: &[f64], i0: usize) -> Result<f64> {
    let delta = graph
        .delta()
        .ok_or_else(|| CoreError::InvalidParameter("return probability needs a wired graph".into()))?;
    if i0 == delta {
        return Err(CoreError::InvalidParameter("i0 must differ from delta".into()));
    }
    if cond.len() != graph.edge_count() || cond.iter().any(|c| !(*c > 0.0)) {
        return Err(CoreError::InvalidParameter("conductances must be positive per edge".into()));
    }
    let n = graph.vertex_count();
    let mut c = DMatrix::zeros(n, n);
    for (&(i, j, _), &cij) in graph.edges().iter().zip(cond) {
        c[(i, j)] = cij;
        c[(j, i)] = cij;
    }
    // interior unknowns: everything but {i0, delta}
    let interior: Vec<usize> = (0..n).filter(|v| *v != i0 && *v != delta).collect();
    let m = interior.len();
    let mut v = vec![0.0; n];
    v[i0] = 1.0;
    if m > 0 {
        let mut lap = DMatrix::zeros(m, m);
        let mut rhs = DVector::zeros(m);
        for (a, &i) in interior.iter().enumerate() {
            let deg: f64 = (0..n).map(|j| c[(i, j)]).sum();
            lap[(a, a)] = deg;
            for (b, &j) in interior.iter().enumerate() {
                if a != b {
                    lap[(a, b)] = -c[(i, j)];
                }
            }
            rhs[a] = c[(i, i0)]; // boundary value 1 at i0, 0 at delta
        }
        let chol = Cholesky::new(lap).ok_or_else(|| {
            CoreError::SingularSystem("harmonic system is not positive definite".into())
        })?;
        let sol = chol.solve(&rhs);
        for (a, &i) in interior.iter().enumerate() {
            v[i] = sol[a];
        }
    }
    let pi0: f64 = (0..n).map(|j| c[(i0, j)]).sum();
    let c_eff: f64 = (0..n).map(|j| c[(i0, j)] * (1.0 - v[j])).sum();
    Ok(1.0 - c_eff / pi0)
}
