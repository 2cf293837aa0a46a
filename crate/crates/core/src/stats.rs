//! Statistical utilities: deterministic reductions, Kolmogorov-Smirnov
//! tests, chi-square goodness-of-fit with low-count bin merging, and a
//! small least-squares fitter.

use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{CoreError, Result};

/// Pairwise (cascade) summation; order-independent up to the fixed
/// recursion pattern, which keeps reductions reproducible.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Sample mean and standard error (sample std / sqrt(n)).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    assert!(n >= 2, "need at least two samples");
    let mean = pairwise_sum(xs) / n as f64;
    let devs: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&devs) / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Survival function of the Kolmogorov distribution,
/// Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2 k² λ²).
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_pvalue(d: f64, n_eff: f64) -> f64 {
    // Asymptotic with the small-sample correction of Stephens.
    let sq = n_eff.sqrt();
    kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)
}

/// One-sample KS test of `samples` against the CDF `cdf`.
/// Returns (statistic, p-value).
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let n = samples.len();
    assert!(n > 0);
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let c = cdf(*x);
        d = d.max((c - i as f64 / nf).abs());
        d = d.max(((i + 1) as f64 / nf - c).abs());
    }
    (d, ks_pvalue(d, nf))
}

/// Two-sample KS test. Returns (statistic, p-value).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert!(!a.is_empty() && !b.is_empty());
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        if xs[i] <= ys[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let n_eff = na * nb / (na + nb);
    (d, ks_pvalue(d, n_eff))
}

/// Upper-tail p-value of a chi-square statistic with `dof` degrees of freedom.
pub fn chi2_pvalue(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let chi = ChiSquared::new(dof as f64).expect("dof > 0");
    chi.sf(stat)
}

/// Two-sample chi-square over categorical counts keyed by `K`.
///
/// Bins whose pooled expected count (in either sample) falls below 5 are
/// merged into a single rest bin before computing the statistic.
/// Returns (statistic, p-value, bins used).
pub fn chi2_two_sample_counts<K: Ord + Clone>(
    counts_a: &BTreeMap<K, u64>,
    counts_b: &BTreeMap<K, u64>,
) -> Result<(f64, f64, usize)> {
    let na: u64 = counts_a.values().sum();
    let nb: u64 = counts_b.values().sum();
    if na == 0 || nb == 0 {
        return Err(CoreError::DegenerateTest("empty sample set".into()));
    }
    let mut keys: Vec<K> = counts_a.keys().chain(counts_b.keys()).cloned().collect();
    keys.sort();
    keys.dedup();

    let total = (na + nb) as f64;
    let frac_a = na as f64 / total;
    let frac_b = nb as f64 / total;

    // (obs_a, obs_b) per bin, rare bins pooled.
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut rest = (0.0, 0.0);
    for k in &keys {
        let oa = *counts_a.get(k).unwrap_or(&0) as f64;
        let ob = *counts_b.get(k).unwrap_or(&0) as f64;
        let pooled = oa + ob;
        if pooled * frac_a < 5.0 || pooled * frac_b < 5.0 {
            rest.0 += oa;
            rest.1 += ob;
        } else {
            bins.push((oa, ob));
        }
    }
    if rest.0 + rest.1 > 0.0 {
        let pooled = rest.0 + rest.1;
        if (pooled * frac_a < 5.0 || pooled * frac_b < 5.0) && !bins.is_empty() {
            // merge the leftover into the smallest regular bin
            let idx = bins
                .iter()
                .enumerate()
                .min_by(|x, y| (x.1 .0 + x.1 .1).partial_cmp(&(y.1 .0 + y.1 .1)).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            bins[idx].0 += rest.0;
            bins[idx].1 += rest.1;
        } else {
            bins.push(rest);
        }
    }
    if bins.len() < 2 {
        return Err(CoreError::DegenerateTest(
            "fewer than two usable bins".into(),
        ));
    }

    let mut stat = 0.0;
    for (oa, ob) in &bins {
        let pooled = oa + ob;
        let ea = pooled * frac_a;
        let eb = pooled * frac_b;
        stat += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    let dof = bins.len() - 1;
    Ok((stat, chi2_pvalue(stat, dof), bins.len()))
}

/// One-sample chi-square of observed counts against given bin probabilities.
/// No merging; the caller controls the binning. Returns (statistic, p-value).
pub fn chi2_gof(observed: &[u64], probs: &[f64]) -> Result<(f64, f64)> {
    if observed.len() != probs.len() || observed.len() < 2 {
        return Err(CoreError::DegenerateTest("bad bin layout".into()));
    }
    let n: u64 = observed.iter().sum();
    let nf = n as f64;
    let mut stat = 0.0;
    for (o, p) in observed.iter().zip(probs) {
        if *p <= 0.0 {
            return Err(CoreError::DegenerateTest("non-positive bin probability".into()));
        }
        let e = nf * p;
        stat += (*o as f64 - e) * (*o as f64 - e) / e;
    }
    Ok((stat, chi2_pvalue(stat, observed.len() - 1)))
}

/// Ordinary least squares y = slope·x + intercept.
/// Returns (slope, intercept, r²). For a perfect fit of constant data
/// r² is reported as 1.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    assert!(x.len() >= 2);
    let mx = pairwise_sum(x) / n;
    let my = pairwise_sum(y) / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = syy - slope * sxy;
    let r2 = if syy <= f64::EPSILON * (1.0 + my * my) {
        1.0
    } else {
        1.0 - ss_res / syy
    };
    (slope, intercept, r2)
}
