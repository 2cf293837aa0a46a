//! Event-driven simulation of the reinforced processes and exact
//! evaluation of their trajectory densities.
//!
//! The jump rate of the reinforced walker at `i` toward a neighbor `j`
//! is `W_ij L_j(t)` with `L_j(t) = θ_j + (time spent at j)`. Because no
//! self-loops are represented, every neighbor rate is constant during a
//! sojourn, so holding times are exactly exponential and no time
//! discretization is needed.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{CoreError, Result};
use crate::graph::WeightedGraph;
use crate::green::{assemble_h, green, GreenMatrix};

/// A finite continuous-time path: visited states, strictly increasing
/// jump epochs (time of arrival in `states[k]` is `epochs[k - 1]`), and
/// the observation horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub epochs: Vec<f64>,
    pub horizon: f64,
}

impl Trajectory {
    pub fn jump_count(&self) -> usize {
        self.epochs.len()
    }

    /// The discrete skeleton: states in jump order.
    pub fn skeleton(&self) -> &[usize] {
        &self.states
    }

    pub fn validate(&self, graph: &WeightedGraph) -> Result<()> {
        if self.states.is_empty() || self.states.len() != self.epochs.len() + 1 {
            return Err(CoreError::BadTrajectory(
                "need one more state than epochs".into(),
            ));
        }
        if self.states.iter().any(|s| *s >= graph.vertex_count()) {
            return Err(CoreError::BadTrajectory("state out of range".into()));
        }
        let mut prev = 0.0;
        for &e in &self.epochs {
            if !(e > prev) {
                return Err(CoreError::BadTrajectory("epochs must increase".into()));
            }
            prev = e;
        }
        if self.horizon < prev {
            return Err(CoreError::BadTrajectory("horizon before last epoch".into()));
        }
        for w in self.states.windows(2) {
            if graph.w(w[0], w[1]) <= 0.0 {
                return Err(CoreError::BadTrajectory(format!(
                    "consecutive states {} and {} not adjacent",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    /// Occupation times `S_i(horizon)` (clock of the trajectory itself).
    pub fn local_times(&self, vertex_count: usize) -> Vec<f64> {
        let mut s = vec![0.0; vertex_count];
        let mut prev = 0.0;
        for (k, &e) in self.epochs.iter().enumerate() {
            s[self.states[k]] += e - prev;
            prev = e;
        }
        s[*self.states.last().unwrap()] += self.horizon - prev;
        s
    }
}

/// When to stop an event-driven run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Stop at this horizon.
    Time(f64),
    /// Stop after this many jumps; the horizon is the last epoch.
    Jumps(usize),
}

/// Exact simulation of the vertex-reinforced jump process.
pub fn simulate_vrjp<R: Rng + ?Sized>(
    graph: &WeightedGraph,
    i0: usize,
    stop: StopRule,
    rng: &mut R,
) -> Result<Trajectory> {
    if i0 >= graph.vertex_count() {
        return Err(CoreError::InvalidParameter("i0 out of range".into()));
    }
    match stop {
        StopRule::Time(t) if !(t >= 0.0) => {
            return Err(CoreError::InvalidParameter("horizon must be >= 0".into()))
        }
        StopRule::Jumps(0) => {
            return Err(CoreError::InvalidParameter("need at least one jump".into()))
        }
        _ => {}
    }
    let mut local = graph.theta().to_vec(); // L_j = θ_j + occupation
    let mut states = vec![i0];
    let mut epochs = Vec::new();
    let mut t = 0.0;
    let mut cur = i0;
    loop {
        let nbrs = graph.neighbors(cur);
        // rates W_{cur,j} L_j(t), constant during the sojourn
        let total: f64 = nbrs.iter().map(|&(j, w)| w * local[j]).sum();
        let hold = -rng.random::<f64>().ln() / total;
        match stop {
            StopRule::Time(horizon) => {
                if t + hold >= horizon {
                    local[cur] += horizon - t;
                    return Ok(Trajectory {
                        states,
                        epochs,
                        horizon,
                    });
                }
            }
            StopRule::Jumps(m) => {
                if epochs.len() == m {
                    return Ok(Trajectory {
                        states,
                        epochs,
                        horizon: t,
                    });
                }
            }
        }
        t += hold;
        local[cur] += hold;
        // choose the target proportionally to the frozen rates
        let mut u = rng.random::<f64>() * total;
        let mut next = nbrs[nbrs.len() - 1].0;
        for &(j, w) in nbrs {
            u -= w * local[j];
            if u <= 0.0 {
                next = j;
                break;
            }
        }
        states.push(next);
        epochs.push(t);
        cur = next;
    }
}

/// The quadratic clock `D(s) = Σ_i (L_i(s)² − θ_i²)` applied to a
/// trajectory of the reinforced walker: same state sequence, epochs
/// mapped through `D`.
pub fn time_change(traj: &Trajectory, theta: &[f64]) -> Trajectory {
    let mut local = theta.to_vec();
    let mut d = 0.0;
    let mut epochs = Vec::with_capacity(traj.epochs.len());
    let mut prev = 0.0;
    for (k, &e) in traj.epochs.iter().enumerate() {
        let i = traj.states[k];
        let u = e - prev;
        d += (local[i] + u).powi(2) - local[i].powi(2);
        local[i] += u;
        epochs.push(d);
        prev = e;
    }
    let i = *traj.states.last().unwrap();
    let u = traj.horizon - prev;
    d += (local[i] + u).powi(2) - local[i].powi(2);
    Trajectory {
        states: traj.states.clone(),
        epochs,
        horizon: d,
    }
}

/// Inverse of [`time_change`]: recovers the original clock.
pub fn inverse_time_change(traj: &Trajectory, theta: &[f64]) -> Trajectory {
    let mut local = theta.to_vec();
    let mut s = 0.0; // original clock
    let mut d_prev = 0.0;
    let mut epochs = Vec::with_capacity(traj.epochs.len());
    for (k, &dz) in traj.epochs.iter().enumerate() {
        let i = traj.states[k];
        // (ℓ+u)² − ℓ² = dz − d_prev  =>  u = √(ℓ² + Δ) − ℓ
        let du = dz - d_prev;
        let u = (local[i] * local[i] + du).sqrt() - local[i];
        local[i] += u;
        s += u;
        epochs.push(s);
        d_prev = dz;
    }
    let i = *traj.states.last().unwrap();
    let du = traj.horizon - d_prev;
    let u = (local[i] * local[i] + du).sqrt() - local[i];
    Trajectory {
        states: traj.states.clone(),
        epochs,
        horizon: s + u,
    }
}

/// Jump-ordered vertex sequence.
pub fn skeleton(traj: &Trajectory) -> Vec<usize> {
    traj.states.clone()
}

/// Linearly edge-reinforced random walk: traversing an edge adds 1 to
/// its weight; steps are proportional to current weights. `a` holds the
/// initial weights, parallel to `graph.edges()`.
pub fn simulate_errw<R: Rng + ?Sized>(
    graph: &WeightedGraph,
    a: &[f64],
    i0: usize,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if a.len() != graph.edge_count() || a.iter().any(|x| !(*x > 0.0)) {
        return Err(CoreError::InvalidParameter(
            "initial weights must be positive per edge".into(),
        ));
    }
    if i0 >= graph.vertex_count() {
        return Err(CoreError::InvalidParameter("i0 out of range".into()));
    }
    // edge index lookup per vertex
    let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); graph.vertex_count()];
    for (e, &(i, j, _)) in graph.edges().iter().enumerate() {
        incident[i].push((j, e));
        incident[j].push((i, e));
    }
    let mut weights = a.to_vec();
    let mut seq = vec![i0];
    let mut cur = i0;
    for _ in 0..steps {
        let total: f64 = incident[cur].iter().map(|&(_, e)| weights[e]).sum();
        let mut u = rng.random::<f64>() * total;
        let mut chosen = incident[cur][incident[cur].len() - 1];
        for &(j, e) in &incident[cur] {
            u -= weights[e];
            if u <= 0.0 {
                chosen = (j, e);
                break;
            }
        }
        weights[chosen.1] += 1.0;
        cur = chosen.0;
        seq.push(cur);
    }
    Ok(seq)
}

/// Independent Gamma(a_e, 1) edge weights.
pub fn sample_gamma_weights<R: Rng + ?Sized>(a: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if a.iter().any(|x| !(*x > 0.0)) {
        return Err(CoreError::InvalidParameter("gamma shapes must be positive".into()));
    }
    Ok(a.iter()
        .map(|&shape| Gamma::new(shape, 1.0).expect("shape > 0").sample(rng))
        .collect())
}

/// Time-homogeneous Markov jump process with rates
/// `½ W_ij G(i₀,j)/G(i₀,i)` from `i` to `j`.
pub fn simulate_quenched_jump<R: Rng + ?Sized>(
    graph: &WeightedGraph,
    g: &GreenMatrix,
    i0: usize,
    jumps: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    if i0 >= graph.vertex_count() {
        return Err(CoreError::InvalidParameter("i0 out of range".into()));
    }
    if jumps == 0 {
        return Err(CoreError::InvalidParameter("need at least one jump".into()));
    }
    let mut states = vec![i0];
    let mut epochs = Vec::with_capacity(jumps);
    let mut t = 0.0;
    let mut cur = i0;
    for _ in 0..jumps {
        let nbrs = graph.neighbors(cur);
        let rates: Vec<f64> = nbrs
            .iter()
            .map(|&(j, w)| 0.5 * w * g.entry(i0, j) / g.entry(i0, cur))
            .collect();
        let total: f64 = rates.iter().sum();
        t += -rng.random::<f64>().ln() / total;
        let mut u = rng.random::<f64>() * total;
        let mut next = nbrs[nbrs.len() - 1].0;
        for (&(j, _), r) in nbrs.iter().zip(&rates) {
            u -= r;
            if u <= 0.0 {
                next = j;
                break;
            }
        }
        states.push(next);
        epochs.push(t);
        cur = next;
    }
    Ok(Trajectory {
        states,
        epochs,
        horizon: t,
    })
}

/// Exit rate of the quenched walk at `i`: `β_i`, minus `1/(2G(i₀,i₀))`
/// at the start vertex.
pub fn quenched_exit_rate(graph: &WeightedGraph, g: &GreenMatrix, i0: usize, i: usize) -> f64 {
    graph
        .neighbors(i)
        .iter()
        .map(|&(j, w)| 0.5 * w * g.entry(i0, j) / g.entry(i0, i))
        .sum()
}

/// Trajectory density of the time-changed reinforced walker, computed
/// directly from its jump rates: product of the rate of each taken jump
/// times `exp(−∫ total exit rate)`, the integral evaluated in closed
/// form per sojourn.
pub fn density_fz(graph: &WeightedGraph, traj: &Trajectory) -> Result<f64> {
    traj.validate(graph)?;
    let theta = graph.theta();
    let n = graph.vertex_count();
    let mut s = vec![0.0; n]; // local times of the time-changed clock
    let mut log_density = 0.0;
    let mut prev = 0.0;
    let aug = |s_i: f64, th: f64| (s_i + th * th).sqrt();
    for (k, &e) in traj.epochs.iter().enumerate() {
        let c = traj.states[k];
        let dt = e - prev;
        // ∫ rate over the sojourn: only S_c moves
        let a0 = aug(s[c], theta[c]);
        let a1 = aug(s[c] + dt, theta[c]);
        for &(j, w) in graph.neighbors(c) {
            log_density -= w * aug(s[j], theta[j]) * (a1 - a0);
        }
        s[c] += dt;
        let next = traj.states[k + 1];
        let rate = 0.5 * graph.w(c, next) * aug(s[next], theta[next]) / aug(s[c], theta[c]);
        log_density += rate.ln();
        prev = e;
    }
    let c = *traj.states.last().unwrap();
    let dt = traj.horizon - prev;
    let a0 = aug(s[c], theta[c]);
    let a1 = aug(s[c] + dt, theta[c]);
    for &(j, w) in graph.neighbors(c) {
        log_density -= w * aug(s[j], theta[j]) * (a1 - a0);
    }
    Ok(log_density.exp())
}

/// Annealed trajectory density in closed form:
/// `Π_k ½W · Π_{i≠i₀}θ_i / Π_{i≠i_n}√(S_i+θ_i²) · exp(−Σ_{i∼j} W_ij(√((S_i+θ_i²)(S_j+θ_j²)) − θ_iθ_j))`.
pub fn density_fx_annealed(graph: &WeightedGraph, traj: &Trajectory) -> Result<f64> {
    traj.validate(graph)?;
    let theta = graph.theta();
    let n = graph.vertex_count();
    let s = traj.local_times(n);
    let i0 = traj.states[0];
    let last = *traj.states.last().unwrap();
    let mut log_density = 0.0;
    for w in traj.states.windows(2) {
        log_density += (0.5 * graph.w(w[0], w[1])).ln();
    }
    for i in 0..n {
        if i != i0 {
            log_density += theta[i].ln();
        }
        if i != last {
            log_density -= 0.5 * (s[i] + theta[i] * theta[i]).ln();
        }
    }
    for &(i, j, w) in graph.edges() {
        let ai = (s[i] + theta[i] * theta[i]).sqrt();
        let aj = (s[j] + theta[j] * theta[j]).sqrt();
        log_density -= w * (ai * aj - theta[i] * theta[j]);
    }
    Ok(log_density.exp())
}

/// Quenched trajectory density for the potential `beta`:
/// `Π_k ½W · G(i₀,i_n)/G(i₀,i₀) · exp(−Σ_i S_i β_i + S_{i₀}/(2G(i₀,i₀)))`.
pub fn density_fx_quenched(
    graph: &WeightedGraph,
    beta: &[f64],
    traj: &Trajectory,
) -> Result<f64> {
    traj.validate(graph)?;
    let g = green(&assemble_h(graph, beta))?;
    let n = graph.vertex_count();
    let s = traj.local_times(n);
    let i0 = traj.states[0];
    let last = *traj.states.last().unwrap();
    let mut log_density = (g.entry(i0, last) / g.entry(i0, i0)).ln();
    for w in traj.states.windows(2) {
        log_density += (0.5 * graph.w(w[0], w[1])).ln();
    }
    for i in 0..n {
        log_density -= s[i] * beta[i];
    }
    log_density += s[i0] / (2.0 * g.entry(i0, i0));
    Ok(log_density.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::small;
    use crate::rng::replica_rng;
    use crate::stats;

    #[test]
    fn two_vertex_first_jump_is_forced() {
        let g = small::pair(1.0, [1.0, 1.0]);
        let mut rng = replica_rng(1, 0);
        let t = simulate_vrjp(&g, 0, StopRule::Jumps(1), &mut rng).unwrap();
        assert_eq!(t.states, vec![0, 1]);
        assert_eq!(t.horizon, t.epochs[0]);
    }

    #[test]
    fn first_holding_time_is_exp_one() {
        // 2-vertex graph W=1, θ=1: rate to the single neighbor is 1
        let g = small::pair(1.0, [1.0, 1.0]);
        let mut rng = replica_rng(2, 0);
        let holds: Vec<f64> = (0..40_000)
            .map(|_| {
                simulate_vrjp(&g, 0, StopRule::Jumps(1), &mut rng)
                    .unwrap()
                    .epochs[0]
            })
            .collect();
        let (_, p) = stats::ks_test(&holds, |x| 1.0 - (-x).exp());
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn star_first_jump_is_uniform() {
        let g = small::star(3, 1.0, 1.0);
        let mut rng = replica_rng(3, 0);
        let mut counts = [0u64; 3];
        let n = 100_000;
        for _ in 0..n {
            let t = simulate_vrjp(&g, 0, StopRule::Jumps(1), &mut rng).unwrap();
            counts[t.states[1] - 1] += 1;
        }
        let (_, p) = stats::chi2_gof(&counts, &[1.0 / 3.0; 3]).unwrap();
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn time_stop_truncates() {
        let g = small::pair(1.0, [1.0, 1.0]);
        let mut rng = replica_rng(4, 0);
        let t = simulate_vrjp(&g, 0, StopRule::Time(0.5), &mut rng).unwrap();
        assert_eq!(t.horizon, 0.5);
        assert!(t.epochs.iter().all(|e| *e < 0.5));
        assert!(simulate_vrjp(&g, 0, StopRule::Time(-1.0), &mut rng).is_err());
        assert!(simulate_vrjp(&g, 0, StopRule::Jumps(0), &mut rng).is_err());
    }

    #[test]
    fn reinforcement_self_consistency_on_triangle() {
        // P(third distinct vertex within two jumps): no closed form; two
        // independent streams must agree within combined 4 SE
        let g = small::cycle(3, 1.0, 1.0);
        let run = |seed: u64| -> (f64, f64) {
            let mut rng = replica_rng(seed, 0);
            let n = 1_000_000;
            let mut hits = 0u64;
            for _ in 0..n {
                let t = simulate_vrjp(&g, 0, StopRule::Jumps(2), &mut rng).unwrap();
                if t.states[2] != 0 {
                    hits += 1;
                }
            }
            let p = hits as f64 / n as f64;
            (p, (p * (1.0 - p) / n as f64).sqrt())
        };
        let (p1, se1) = run(100);
        let (p2, se2) = run(200);
        let z = (p1 - p2).abs() / (se1 * se1 + se2 * se2).sqrt();
        assert!(z < 4.0, "p1 = {p1}, p2 = {p2}, z = {z}");
    }

    #[test]
    fn time_change_single_sojourn() {
        // staying at i0 (θ=1) for time s maps to 2s + s²
        let g = small::pair(1.0, [1.0, 1.0]);
        let traj = Trajectory {
            states: vec![0],
            epochs: vec![],
            horizon: 1.5,
        };
        let z = time_change(&traj, g.theta());
        assert!((z.horizon - (2.0 * 1.5 + 1.5 * 1.5)).abs() < 1e-15);
        assert!(z.epochs.is_empty());
    }

    #[test]
    fn time_change_round_trips() {
        let g = small::cycle(4, 1.0, 1.3);
        let mut rng = replica_rng(5, 0);
        for _ in 0..50 {
            let t = simulate_vrjp(&g, 0, StopRule::Jumps(6), &mut rng).unwrap();
            let t = Trajectory {
                horizon: t.horizon + 0.4,
                ..t
            };
            let z = time_change(&t, g.theta());
            assert_eq!(z.states, t.states);
            // D(0) = 0, strictly increasing
            let mut prev = 0.0;
            for &e in &z.epochs {
                assert!(e > prev);
                prev = e;
            }
            let back = inverse_time_change(&z, g.theta());
            for (a, b) in back.epochs.iter().zip(&t.epochs) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!((back.horizon - t.horizon).abs() < 1e-12);
        }
    }

    #[test]
    fn time_change_maps_horizon_to_local_time_sum() {
        let g = small::cycle(4, 1.0, 1.0);
        let mut rng = replica_rng(6, 0);
        let t = simulate_vrjp(&g, 0, StopRule::Jumps(5), &mut rng).unwrap();
        let z = time_change(&t, g.theta());
        let l = t.local_times(4);
        let total: f64 = l
            .iter()
            .zip(g.theta())
            .map(|(s, th)| (s + th).powi(2) - th * th)
            .sum();
        assert!((z.horizon - total).abs() < 1e-12);
        // and the time-changed local times sum to the new horizon
        let sz: f64 = z.local_times(4).iter().sum();
        assert!((sz - z.horizon).abs() < 1e-12);
    }

    #[test]
    fn skeleton_is_invariant_under_time_change() {
        let g = small::cycle(3, 1.0, 1.0);
        let mut rng = replica_rng(7, 0);
        let t = simulate_vrjp(&g, 0, StopRule::Jumps(4), &mut rng).unwrap();
        let z = time_change(&t, g.theta());
        assert_eq!(skeleton(&t), skeleton(&z));
        assert_eq!(skeleton(&t).len(), 5);
        let single = Trajectory {
            states: vec![2],
            epochs: vec![],
            horizon: 1.0,
        };
        assert_eq!(skeleton(&single), vec![2]);
    }

    #[test]
    fn errw_on_an_edge_alternates() {
        let g = small::pair(1.0, [1.0, 1.0]);
        let mut rng = replica_rng(8, 0);
        let seq = simulate_errw(&g, &[1.0], 0, 6, &mut rng).unwrap();
        assert_eq!(seq, vec![0, 1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn errw_triangle_first_step_uniform() {
        let g = small::cycle(3, 1.0, 1.0);
        let mut rng = replica_rng(9, 0);
        let mut ones = 0u64;
        let n = 100_000;
        for _ in 0..n {
            let seq = simulate_errw(&g, &[1.0; 3], 0, 1, &mut rng).unwrap();
            if seq[1] == 1 {
                ones += 1;
            }
        }
        let p = ones as f64 / n as f64;
        assert!((p - 0.5).abs() < 4.0 * (0.25f64 / n as f64).sqrt(), "p = {p}");
    }

    #[test]
    fn errw_star_reuse_probability() {
        // center 0, three arms, a ≡ 1. The walk must go 0→arm→0, and the
        // used edge is traversed twice (out and back), so at step 3 the
        // weights are (3, 1, 1): reuse probability 3/5.
        let g = small::star(3, 1.0, 1.0);
        let mut rng = replica_rng(10, 0);
        let mut reuse = 0u64;
        let mut total = 0u64;
        for _ in 0..200_000 {
            let seq = simulate_errw(&g, &[1.0; 3], 0, 3, &mut rng).unwrap();
            // always returns to center after an arm visit
            assert_eq!(seq[2], 0);
            total += 1;
            if seq[3] == seq[1] {
                reuse += 1;
            }
        }
        let p = reuse as f64 / total as f64;
        let expect = 3.0 / 5.0;
        let se = (expect * (1.0 - expect) / total as f64).sqrt();
        assert!((p - expect).abs() < 4.0 * se, "p = {p}");
    }

    #[test]
    fn gamma_weights_match_moments() {
        let mut rng = replica_rng(11, 0);
        let a = vec![0.7; 1];
        let n = 200_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| sample_gamma_weights(&a, &mut rng).unwrap()[0])
            .collect();
        let (mean, se) = stats::mean_stderr(&draws);
        assert!((mean - 0.7).abs() < 4.0 * se, "mean = {mean}");
        // E[W^{1/4}] = Γ(a + 1/4)/Γ(a)
        let q: Vec<f64> = draws.iter().map(|w| w.powf(0.25)).collect();
        let (mq, seq_) = stats::mean_stderr(&q);
        let expect = crate::estimators::gamma_quarter_moment(0.7);
        assert!((mq - expect).abs() < 4.0 * seq_, "mq = {mq}, expect = {expect}");
    }

    #[test]
    fn gamma_weights_ks_against_quadrature_cdf() {
        // CDF oracle by quadrature of the density, independent of any
        // library incomplete-gamma routine; t = u² removes the kink at 0
        let shape = 1.5f64;
        let mut rng = replica_rng(12, 0);
        let n = 20_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| sample_gamma_weights(&[shape], &mut rng).unwrap()[0])
            .collect();
        let norm = 0.5 * std::f64::consts::PI.sqrt(); // Γ(3/2)
        let cdf = |x: f64| {
            if x <= 0.0 {
                return 0.0;
            }
            crate::quad::integrate(|u| 2.0 * u * u * (-u * u).exp(), 0.0, x.sqrt(), 1e-11)
                .unwrap()
                / norm
        };
        let (_, p) = stats::ks_test(&draws, cdf);
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn quenched_rates_and_conductance_skeleton() {
        let g = small::cycle(4, 1.0, 1.0);
        let beta = crate::potential::sample_nu(&g, &g.default_order(), &mut replica_rng(13, 0));
        let gm = green(&assemble_h(&g, &beta)).unwrap();
        let i0 = 0;
        // exit rates: β_i away from the start, β_i − 1/(2G) at it
        for i in 0..4 {
            let rate = quenched_exit_rate(&g, &gm, i0, i);
            let expect = if i == i0 {
                beta[i] - 1.0 / (2.0 * gm.entry(i0, i0))
            } else {
                beta[i]
            };
            assert!((rate - expect).abs() < 1e-10, "i = {i}");
        }
        // skeleton step law equals the conductance walk law
        let cond = crate::green::conductances(&g, &gm, i0);
        for i in 0..4 {
            let rates: Vec<f64> = g
                .neighbors(i)
                .iter()
                .map(|&(j, w)| 0.5 * w * gm.entry(i0, j) / gm.entry(i0, i))
                .collect();
            let rtot: f64 = rates.iter().sum();
            for (ni, &(j, _)) in g.neighbors(i).iter().enumerate() {
                let c_ij: f64 = g
                    .edges()
                    .iter()
                    .zip(&cond)
                    .find(|(&(a, b, _), _)| (a, b) == (i.min(j), i.max(j)))
                    .map(|(_, c)| *c)
                    .unwrap();
                let c_tot: f64 = g
                    .edges()
                    .iter()
                    .zip(&cond)
                    .filter(|(&(a, b, _), _)| a == i || b == i)
                    .map(|(_, c)| c)
                    .sum();
                assert!((rates[ni] / rtot - c_ij / c_tot).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quenched_holding_times_are_exponential() {
        let g = small::pair(1.0, [1.0, 1.0]);
        let beta = vec![1.0, 1.2];
        let gm = green(&assemble_h(&g, &beta)).unwrap();
        let i0 = 0;
        let mut rng = replica_rng(14, 0);
        let traj = simulate_quenched_jump(&g, &gm, i0, 30_000, &mut rng).unwrap();
        // sojourns at vertex 1 (every complete sojourn there)
        let mut at_one = Vec::new();
        for k in 1..traj.epochs.len() {
            if traj.states[k] == 1 {
                at_one.push(traj.epochs[k] - traj.epochs[k - 1]);
            }
        }
        let rate = quenched_exit_rate(&g, &gm, i0, 1);
        let (_, p) = stats::ks_test(&at_one, |x| 1.0 - (-rate * x).exp());
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn densities_reject_non_adjacent_states() {
        let g = small::path(3, 1.0, 1.0);
        let bad = Trajectory {
            states: vec![0, 2],
            epochs: vec![1.0],
            horizon: 1.5,
        };
        assert!(density_fz(&g, &bad).is_err());
        assert!(density_fx_annealed(&g, &bad).is_err());
        assert!(density_fx_quenched(&g, &[1.0; 3], &bad).is_err());
    }

    #[test]
    fn empty_trajectory_on_single_vertex_has_density_one() {
        // hand evaluation of the closed form with zero jumps: both
        // exclusion products are empty and there are no edges
        let g = small::single(1.0, 0.0);
        let traj = Trajectory {
            states: vec![0],
            epochs: vec![],
            horizon: 2.5,
        };
        assert!((density_fx_annealed(&g, &traj).unwrap() - 1.0).abs() < 1e-15);
        assert!((density_fz(&g, &traj).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn density_identity_fz_equals_annealed() {
        let g = small::cycle(4, 1.0, 1.0);
        let mut rng = replica_rng(15, 0);
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
            assert!(
                (fz - fa).abs() <= 1e-10 * fa.abs(),
                "fz = {fz}, fa = {fa}"
            );
        }
    }

    #[test]
    fn sojourn_exponent_matches_edge_sum_increment() {
        // the exit-rate integral over one sojourn equals the increment of
        // Σ_{i~j} W_ij (√((S_i+θ_i²)(S_j+θ_j²)) − θ_iθ_j); check the closed
        // form against numerical quadrature of the instantaneous rate
        let g = small::cycle(4, 1.0, 1.1);
        let mut rng = replica_rng(16, 0);
        let t = simulate_vrjp(&g, 0, StopRule::Jumps(5), &mut rng).unwrap();
        let z = time_change(&t, g.theta());
        let theta = g.theta();
        let n = g.vertex_count();
        let mut s = vec![0.0; n];
        let mut prev = 0.0;
        let mut boundaries = z.epochs.clone();
        boundaries.push(z.horizon);
        for (k, &e) in boundaries.iter().enumerate() {
            let c = z.states[k];
            let dt = e - prev;
            let aug = |si: f64, th: f64| (si + th * th).sqrt();
            let closed: f64 = g
                .neighbors(c)
                .iter()
                .map(|&(j, w)| {
                    w * aug(s[j], theta[j]) * (aug(s[c] + dt, theta[c]) - aug(s[c], theta[c]))
                })
                .sum();
            let s_snapshot = s.clone();
            let numeric = crate::quad::integrate(
                |u| {
                    g.neighbors(c)
                        .iter()
                        .map(|&(j, w)| {
                            0.5 * w * aug(s_snapshot[j], theta[j])
                                / aug(s_snapshot[c] + u, theta[c])
                        })
                        .sum::<f64>()
                },
                0.0,
                dt,
                1e-12,
            )
            .unwrap();
            assert!((closed - numeric).abs() < 1e-10, "sojourn {k}");
            s[c] += dt;
            prev = e;
        }
    }
}
