//! Counting statistics for the determinantal point process: ball occupation
//! probabilities, the variance of the number of points in a centered ball
//! (exact Bernoulli sum and kernel double-integral routes), the edge variance
//! limit, and a Monte Carlo sampler for the count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::logdomain::log_sum_exp;
use crate::potentials::PotentialModel;
use crate::quad::{ball_integral, gauss_legendre, radial_norm, NormTable};
use crate::specfun::{f_delta, log_gamma};
use crate::{invalid, Result};

/// Radius of the ball probed at depth delta inside (delta < 0) or outside
/// (delta > 0) the edge: a_n = 1 + delta / sqrt(2 n DeltaQ(1)).
pub fn a_n(n: usize, dq1: f64, delta: f64) -> Result<f64> {
    if !(dq1 > 0.0) || n == 0 {
        return invalid("a_n requires n >= 1 and DeltaQ(1) > 0".to_string());
    }
    Ok(1.0 + delta / (2.0 * n as f64 * dq1).sqrt())
}

/// Multiplicity of the radial degree j on C^d: binom(j + d - 1, d - 1).
pub fn multiplicity(j: u64, d: usize) -> u64 {
    let mut m = 1u64;
    for i in 1..=(d as u64 - 1) {
        m = m * (j + i) / i;
    }
    m
}

/// Occupation probabilities p_j = P(mode j lands in the ball |z| <= a),
/// j = 0..n-1, for a radial model.
pub fn ball_probabilities(model: &PotentialModel, n: usize, a: f64) -> Result<Vec<f64>> {
    if !model.is_radial() {
        return invalid("ball_probabilities requires a radial model".to_string());
    }
    let profile = model.factor(0);
    let d = model.d();
    let nf = n as f64;
    let mut ps = Vec::with_capacity(n);
    for j in 0..n as u64 {
        let full = radial_norm(profile, d, nf, j)?;
        let ball = ball_integral(profile, d, nf, j, a)?;
        let p = if ball.is_zero() {
            0.0
        } else {
            (ball.ln - full.ln).exp().min(1.0)
        };
        ps.push(p);
    }
    Ok(ps)
}

/// Var N(a) as the exact Bernoulli sum over modes with multiplicities.
pub fn variance_bernoulli(model: &PotentialModel, n: usize, a: f64) -> Result<f64> {
    let ps = ball_probabilities(model, n, a)?;
    let d = model.d();
    let mut var = 0.0;
    for (j, &p) in ps.iter().enumerate() {
        var += multiplicity(j as u64, d) as f64 * p * (1.0 - p);
    }
    Ok(var)
}

/// Var N(a) via the kernel double integral over the boundary annulus of
/// half-width 10 ln n / sqrt(n):
///   Var = (4/Gamma(d)) iint_{r <= a <= r'}
///         e^{-n(V(r)+V(r'))} S_n(r, r') dr dr',
///   S_n = sum_{j<n} (r r')^{2j+2d-1} / (Gamma(j+1) Gamma(j+d) h_j^2).
pub fn variance_integral(model: &PotentialModel, n: usize, a: f64) -> Result<f64> {
    if !model.is_radial() {
        return invalid("variance_integral requires a radial model".to_string());
    }
    let profile = model.factor(0);
    let d = model.d();
    let nf = n as f64;
    if !(a > 0.0) {
        return invalid("variance_integral requires a > 0".to_string());
    }
    let w = 10.0 * nf.ln() / nf.sqrt();
    let lo = (a - w).max(0.0);
    let hi = a + w;
    let table = NormTable::build(profile, d, nf, n)?;
    let mut lg1 = Vec::with_capacity(n);
    let mut lgd = Vec::with_capacity(n);
    for j in 0..n {
        lg1.push(log_gamma(j as f64 + 1.0)?);
        lgd.push(log_gamma((j + d) as f64)?);
    }
    let nodes = gauss_legendre(96);
    let map = |t: f64, a0: f64, b0: f64| (0.5 * (b0 - a0) * t + 0.5 * (a0 + b0), 0.5 * (b0 - a0));
    let mut total = 0.0f64;
    let mut terms = vec![0.0f64; n];
    for (ti, &t) in nodes.0.iter().enumerate() {
        let (r, jac_r) = map(t, lo, a);
        if r <= 0.0 {
            continue;
        }
        let wr = nodes.1[ti] * jac_r;
        let vr = profile.v(r);
        for (ui, &u) in nodes.0.iter().enumerate() {
            let (rp, jac_rp) = map(u, a, hi);
            let wrp = nodes.1[ui] * jac_rp;
            let lrr = (r * rp).ln();
            let base = -nf * (vr + profile.v(rp));
            for j in 0..n {
                terms[j] = (2 * j + 2 * d - 1) as f64 * lrr - lg1[j] - lgd[j]
                    - 2.0 * table.h_ln[j]
                    + base;
            }
            total += wr * wrp * log_sum_exp(terms.iter().copied()).exp();
        }
    }
    Ok(4.0 / log_gamma(d as f64)?.exp() * total)
}

///// Edge limit of Var N(a_n(delta)) / (n^{d-1} sqrt(n)):
///   f(delta) sqrt(DeltaQ(1)) / (sqrt(pi) Gamma(d)).
/// The d-dependence comes from the Bernoulli decomposition: the modes that
/// fluctuate sit at radial degree j ~ n, where the simplex multiplicity
/// binom(j+d-1, d-1) is n^{d-1}/Gamma(d) to leading order, so the d = 1
/// profile is scaled by exactly that weight.
pub fn edge_variance_limit(d: usize, dq1: f64, delta: f64) -> Result<f64> {
    if !(dq1 > 0.0) || d == 0 {
        return invalid("edge_variance_limit requires d >= 1 and DeltaQ(1) > 0".to_string());
    }
    let pi = std::f64::consts::PI;
    Ok(f_delta(delta)? * dq1.sqrt() / (pi.sqrt() * log_gamma(d as f64)?.exp()))
}

/// Monte Carlo summary for the ball count.
#[derive(Debug, Clone, Copy)]
pub struct McSummary {
    pub trials: u64,
    pub mean: f64,
    pub var: f64,
    /// standard error of the mean
    pub se: f64,
}

/// Samples N(a) = sum_j Binomial(mult_j, p_j) for `trials` independent
/// configurations. Deterministic for a given seed regardless of thread
/// count: trials are split into fixed chunks, each with its own RNG stream.
pub fn mc_count(mults: &[u64], probs: &[f64], trials: u64, seed: u64) -> Result<McSummary> {
    if mults.len() != probs.len() || mults.is_empty() {
        return invalid("mc_count: mults and probs must be equal-length, nonempty".to_string());
    }
    if trials < 2 {
        return invalid("mc_count needs at least 2 trials".to_string());
    }
    if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return invalid("mc_count: probabilities must lie in [0, 1]".to_string());
    }
    // modes with p in {0, 1} contribute deterministically
    let fixed: u64 = mults
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p >= 1.0)
        .map(|(&m, _)| m)
        .sum();
    let dists: Vec<Binomial> = mults
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0 && p < 1.0)
        .map(|(&m, &p)| Binomial::new(m, p).expect("checked p in (0,1)"))
        .collect();
    let n_chunks = 64u64;
    let per = trials / n_chunks;
    let rem = trials % n_chunks;
    let partials: Vec<(f64, f64)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let t = per + if c < rem { 1 } else { 0 };
            let mut s = 0.0f64;
            let mut s2 = 0.0f64;
            for _ in 0..t {
                let mut count = fixed;
                for dist in &dists {
                    count += dist.sample(&mut rng);
                }
                let x = count as f64;
                s += x;
                s2 += x * x;
            }
            (s, s2)
        })
        .collect();
    let s: f64 = partials.iter().map(|p| p.0).sum();
    let s2: f64 = partials.iter().map(|p| p.1).sum();
    let t = trials as f64;
    let mean = s / t;
    let var = (s2 - s * s / t) / (t - 1.0);
    Ok(McSummary {
        trials,
        mean,
        var,
        se: (var / t).sqrt(),
    })
}
