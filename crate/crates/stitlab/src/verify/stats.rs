//! Statistical primitives: proportion bands, chi-square (goodness-of-fit
//! and two-sample with tail merging), and Kolmogorov–Smirnov tests.
//!
//! Conventions: proportion checks use a normal band of `n_sigma` standard
//! errors around the closed-form target; p-value tests pass when the
//! p-value exceeds a configured threshold. Integer statistics are binned
//! with neighbor-merging until every bin's expected count is at least 5 in
//! the smaller sample.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

/// Minimum expected count per bin for chi-square validity.
const MIN_EXPECTED: f64 = 5.0;

/// A closed two-sided acceptance band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Self {
        Band { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Normal-approximation band `target ± n_sigma · se` for a proportion
/// estimated from `trials` Bernoulli draws.
pub fn proportion_band(target: f64, trials: u64, n_sigma: f64) -> Band {
    assert!(trials > 0 && target > 0.0 && target < 1.0);
    let se = proportion_se(target, trials);
    Band::new(target - n_sigma * se, target + n_sigma * se)
}

pub fn proportion_se(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Upper-tail chi-square p-value at `df` degrees of freedom.
pub fn chi2_pvalue(stat: f64, df: f64) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    gamma_ur(df / 2.0, stat / 2.0)
}

#[derive(Debug, Clone, Copy)]
pub struct Chi2Result {
    pub stat: f64,
    pub df: u64,
    pub p: f64,
    pub bins: usize,
}

/// Goodness-of-fit chi-square of observed bin counts against pinned bin
/// probabilities (no automatic merging — bins are part of the contract).
pub fn chi2_gof(observed: &[u64], probs: &[f64]) -> Chi2Result {
    assert_eq!(observed.len(), probs.len());
    assert!(observed.len() >= 2);
    let n: u64 = observed.iter().sum();
    let mut stat = 0.0;
    for (&o, &p) in observed.iter().zip(probs) {
        let e = n as f64 * p;
        assert!(e > 0.0, "pinned bins must have positive probability");
        stat += (o as f64 - e).powi(2) / e;
    }
    let df = observed.len() as u64 - 1;
    Chi2Result {
        stat,
        df,
        p: chi2_pvalue(stat, df as f64),
        bins: observed.len(),
    }
}

/// Two-sample chi-square over ordered discrete statistics. Values are
/// binned by merging neighbors (ascending order) until the pooled
/// frequency gives an expected count of at least 5 in the smaller sample;
/// a small trailing remainder is merged into the last bin.
pub fn chi2_two_sample<K: Ord + Clone>(xs: &[K], ys: &[K]) -> Chi2Result {
    assert!(!xs.is_empty() && !ys.is_empty());
    let mut pooled: BTreeMap<K, (u64, u64)> = BTreeMap::new();
    for x in xs {
        pooled.entry(x.clone()).or_insert((0, 0)).0 += 1;
    }
    for y in ys {
        pooled.entry(y.clone()).or_insert((0, 0)).1 += 1;
    }
    let n_min = xs.len().min(ys.len()) as f64;
    let n_total = (xs.len() + ys.len()) as f64;
    // Greedy neighbor merge: a bin closes once its pooled share is large
    // enough that the smaller sample expects MIN_EXPECTED observations.
    let mut bins: Vec<(u64, u64)> = Vec::new();
    let mut acc = (0u64, 0u64);
    for (_, (a, b)) in pooled {
        acc.0 += a;
        acc.1 += b;
        let share = (acc.0 + acc.1) as f64 / n_total;
        if share * n_min >= MIN_EXPECTED {
            bins.push(acc);
            acc = (0, 0);
        }
    }
    if acc != (0, 0) {
        match bins.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => bins.push(acc),
        }
    }
    if bins.len() < 2 {
        // Everything in one bin: the samples are indistinguishable at this
        // resolution; report the null outcome.
        return Chi2Result {
            stat: 0.0,
            df: 1,
            p: 1.0,
            bins: bins.len(),
        };
    }
    let n_a: u64 = xs.len() as u64;
    let n_b: u64 = ys.len() as u64;
    let mut stat = 0.0;
    for &(a, b) in &bins {
        let p_hat = (a + b) as f64 / n_total;
        let ea = n_a as f64 * p_hat;
        let eb = n_b as f64 * p_hat;
        stat += (a as f64 - ea).powi(2) / ea + (b as f64 - eb).powi(2) / eb;
    }
    let df = bins.len() as u64 - 1;
    Chi2Result {
        stat,
        df,
        p: chi2_pvalue(stat, df as f64),
        bins: bins.len(),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    pub d: f64,
    pub p: f64,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} e^{−2 j² λ²}`.
///
/// For small `λ` the alternating series converges too slowly, so the
/// Jacobi-theta transform of the same function is used instead.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.3 {
        let f = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let cdf = ((2.0 * std::f64::consts::PI).sqrt() / lambda)
            * ((-f).exp() + (-9.0 * f).exp() + (-25.0 * f).exp());
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64).powi(2) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_pvalue(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_q((s + 0.12 + 0.11 / s) * d)
}

/// One-sample KS test of `xs` against a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    assert!(!xs.is_empty());
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    KsResult {
        d,
        p: ks_pvalue(d, n),
    }
}

/// Two-sample KS test on continuous statistics.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> KsResult {
    assert!(!xs.is_empty() && !ys.is_empty());
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut d: f64 = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let n_eff = na * nb / (na + nb);
    KsResult {
        d,
        p: ks_pvalue(d, n_eff),
    }
}

/// Poisson pmf table for bins `0..=max_k` plus a final `> max_k` tail bin.
pub fn poisson_bins(lambda: f64, max_k: u64) -> Vec<f64> {
    let mut probs = Vec::with_capacity(max_k as usize + 2);
    let mut p = (-lambda).exp();
    let mut total = 0.0;
    for k in 0..=max_k {
        if k > 0 {
            p *= lambda / k as f64;
        }
        probs.push(p);
        total += p;
    }
    probs.push((1.0 - total).max(f64::MIN_POSITIVE));
    probs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_stream, StreamPart};
    use rand::Rng;

    fn sim_rng(tag: &str) -> impl Rng {
        derive_stream(40, &[StreamPart::Tag("stats-test"), StreamPart::Tag(tag)])
    }

    #[test]
    fn proportion_band_brackets_the_target() {
        let b = proportion_band(0.5, 10_000, 4.0);
        assert!(b.contains(0.5));
        assert!((b.hi - 0.5 - 4.0 * 0.005).abs() < 1e-12);
        assert!(!b.contains(0.53));
    }

    #[test]
    fn chi2_gof_matches_known_values() {
        // Uniform die, perfectly balanced counts -> stat 0, p = 1.
        let r = chi2_gof(&[100, 100, 100, 100], &[0.25; 4]);
        assert_eq!(r.stat, 0.0);
        assert!((r.p - 1.0).abs() < 1e-12);
        // Hand-computed: observed [90, 110], p = [0.5, 0.5], n = 200:
        // stat = (10^2)/100 * 2 = 2.0, df = 1, p = 0.15730.
        let r = chi2_gof(&[90, 110], &[0.5, 0.5]);
        assert!((r.stat - 2.0).abs() < 1e-12);
        assert!((r.p - 0.157299).abs() < 1e-5);
    }

    #[test]
    fn chi2_two_sample_accepts_identical_and_rejects_shifted() {
        let mut rng = sim_rng("chi2");
        let xs: Vec<u64> = (0..4000).map(|_| rng.random_range(0..10u64)).collect();
        let same = chi2_two_sample(&xs, &xs);
        assert!((same.p - 1.0).abs() < 1e-9);
        let ys: Vec<u64> = (0..4000).map(|_| rng.random_range(2..12u64)).collect();
        let diff = chi2_two_sample(&xs, &ys);
        assert!(diff.p < 1e-6);
        // Null case: two independent draws from one law pass at 0.001.
        let zs: Vec<u64> = (0..4000).map(|_| rng.random_range(0..10u64)).collect();
        assert!(chi2_two_sample(&xs, &zs).p > 0.001);
    }

    #[test]
    fn chi2_two_sample_merges_sparse_tails() {
        // Geometric-ish data with a long sparse tail must not produce
        // near-empty bins.
        let mut rng = sim_rng("tails");
        let sample = |rng: &mut dyn FnMut() -> f64| -> Vec<u64> {
            (0..2000)
                .map(|_| {
                    let u: f64 = rng();
                    (-(1.0 - u).ln() / 0.7).floor() as u64
                })
                .collect()
        };
        let mut f = || rng.random::<f64>();
        let xs = sample(&mut f);
        let ys = sample(&mut f);
        let r = chi2_two_sample(&xs, &ys);
        assert!(r.bins >= 2);
        assert!(r.p > 0.001);
    }

    #[test]
    fn ks_one_sample_agrees_with_the_exponential_law() {
        let mut rng = sim_rng("ks1");
        let xs: Vec<f64> = (0..3000)
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        let r = ks_one_sample(&xs, |x| 1.0 - (-x).exp());
        assert!(r.p > 0.001, "exponential sample rejected: p = {}", r.p);
        let bad = ks_one_sample(&xs, |x| 1.0 - (-0.5 * x).exp());
        assert!(bad.p < 1e-6);
    }

    #[test]
    fn ks_two_sample_separates_scales() {
        let mut rng = sim_rng("ks2");
        let xs: Vec<f64> = (0..2500).map(|_| rng.random::<f64>()).collect();
        let ys: Vec<f64> = (0..2500).map(|_| rng.random::<f64>()).collect();
        assert!(ks_two_sample(&xs, &ys).p > 0.001);
        let zs: Vec<f64> = (0..2500).map(|_| 1.15 * rng.random::<f64>()).collect();
        assert!(ks_two_sample(&xs, &zs).p < 1e-6);
    }

    #[test]
    fn poisson_bins_sum_to_one() {
        let probs = poisson_bins(5.0, 14);
        assert_eq!(probs.len(), 16);
        let total: f64 = probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // pmf spot check: P(X = 5 | λ = 5) = 0.175467...
        assert!((probs[5] - 0.1754674).abs() < 1e-6);
    }

    #[test]
    fn kolmogorov_q_endpoints() {
        assert!((kolmogorov_q(1e-9) - 1.0).abs() < 1e-6);
        assert!(kolmogorov_q(3.0) < 1e-6);
        // Known value: Q(1.0) ≈ 0.26999.
        assert!((kolmogorov_q(1.0) - 0.26999).abs() < 1e-4);
    }
}
