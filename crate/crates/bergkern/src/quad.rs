//! Quadrature: an adaptive Gauss-Legendre panel integrator, log-domain
//! radial norm and ball integrals (peak located by bisection on the Laplace
//! point, tails truncated at e^{-45} of the peak), and polar-grid moments of
//! bivariate polynomial potentials on C.
//!
//! Gauss-Legendre and polar nodes are generated at runtime by Newton
//! iteration on the Legendre recurrence, so no tabulated abscissae enter the
//! build.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::logdomain::{LogComplex, LogComplexSum, LogReal};
use crate::potentials::RadialProfile;
use crate::specfun::log_gamma;
use crate::{invalid, numeric, Cplx, Result};

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// and cached per order.
pub fn gauss_legendre(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(n)
        .or_insert_with(|| {
            let mut xs = vec![0.0; n];
            let mut ws = vec![0.0; n];
            for i in 0..n {
                // Initial guess (Chebyshev-like), then Newton on P_n(x) = 0.
                let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                for _ in 0..100 {
                    let (p, dp) = legendre(n, x);
                    let dx = p / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                let (_, dp) = legendre(n, x);
                xs[i] = x;
                ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
            }
            Arc::new((xs, ws))
        })
        .clone()
}

/// Gauss-Hermite nodes and weights for int f(x) e^{-x^2} dx, by Golub-Welsch
/// on the symmetric Jacobi matrix (off-diagonal sqrt(k/2), beta_0 = sqrt(pi)).
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || n > 200 {
        return invalid(format!("gauss_hermite order must be in 1..=200, got {n}"));
    }
    let mut j = nalgebra::DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = nalgebra::SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(pairs.into_iter().unzip())
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn gl_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64, nodes: &(Vec<f64>, Vec<f64>)) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in nodes.0.iter().zip(nodes.1.iter()) {
        s += w * f(c + h * x);
    }
    s * h
}

/// Adaptive panel integration of f on [a, b] to relative tolerance rel_tol.
/// Each panel is estimated with 16-point Gauss-Legendre; the error estimate
/// is the difference against the two half-panels.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return invalid("integrate requires finite endpoints".to_string());
    }
    if a == b {
        return Ok(0.0);
    }
    let nodes = gauss_legendre(16);
    // Scale for the absolute tolerance: coarse estimate of the L1 mass.
    let rough = gl_panel(&|x| f(x).abs(), a, b, &nodes)
        + gl_panel(&|x| f(x).abs(), a, 0.5 * (a + b), &nodes)
        + gl_panel(&|x| f(x).abs(), 0.5 * (a + b), b, &nodes);
    let scale = (0.5 * rough).max(1e-300);
    let mut total = 0.0;
    let mut stack = vec![(a, b, gl_panel(f, a, b, &nodes), 0u32)];
    let mut panels = 0usize;
    while let Some((x0, x1, whole, depth)) = stack.pop() {
        panels += 1;
        if panels > 100_000 {
            return numeric("adaptive integration exceeded panel budget".to_string());
        }
        let m = 0.5 * (x0 + x1);
        let left = gl_panel(f, x0, m, &nodes);
        let right = gl_panel(f, m, x1, &nodes);
        let err = (left + right - whole).abs();
        let local_tol = rel_tol * scale * ((x1 - x0) / (b - a)).max(1e-6);
        if err <= local_tol || depth >= 60 {
            if depth >= 60 && err > 1e3 * local_tol {
                return numeric("adaptive integration failed to converge".to_string());
            }
            total += left + right;
        } else {
            stack.push((x0, m, left, depth + 1));
            stack.push((m, x1, right, depth + 1));
        }
    }
    Ok(total)
}

/// log integrand of the radial norm: g(r) = p ln r - n V(r), p = 2d - 1 + 2j.
fn radial_log_integrand(profile: &RadialProfile, n: f64, p: f64) -> impl Fn(f64) -> f64 + '_ {
    move |r: f64| {
        if r <= 0.0 {
            f64::NEG_INFINITY
        } else {
            p * r.ln() - n * profile.v(r)
        }
    }
}

/// Laplace peak of g: the unique solution of n r V'(r) = p.
fn radial_peak(profile: &RadialProfile, n: f64, p: f64) -> Result<f64> {
    let target = p / n;
    let mut hi = 1.0f64;
    let mut t = 0;
    while profile.rvp(hi) < target {
        hi *= 2.0;
        t += 1;
        if t > 300 {
            return numeric("radial peak bracket expansion failed".to_string());
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if profile.rvp(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Upper cutoff: smallest r > peak with g(r) < g(peak) - 45.
fn upper_cutoff(g: &dyn Fn(f64) -> f64, peak: f64, gpeak: f64) -> f64 {
    let mut step = (0.05 * peak).max(1e-4);
    let mut r = peak;
    for _ in 0..500 {
        r += step;
        if g(r) < gpeak - 45.0 {
            return r;
        }
        step *= 1.4;
    }
    r
}

/// Lower cutoff toward 0 (g -> -inf there since p >= 1).
fn lower_cutoff(g: &dyn Fn(f64) -> f64, peak: f64, gpeak: f64) -> f64 {
    let mut r = peak;
    for _ in 0..2000 {
        r *= 0.8;
        if r < 1e-280 || g(r) < gpeak - 45.0 {
            return r.max(0.0);
        }
    }
    0.0
}

fn check_norm_args(n: f64, j: u64, d: usize) -> Result<()> {
    if !(n >= 1.0) || d == 0 {
        return invalid(format!("radial norms require n >= 1 and d >= 1, got n={n}, d={d}"));
    }
    if (j as f64) > 10.0 * n {
        return invalid(format!("degree j = {j} exceeds the 10n guard (n = {n})"));
    }
    Ok(())
}

/// Radial norm h_j = (2 / Gamma(j + d)) int_0^inf r^{2d-1+2j} e^{-n V(r)} dr,
/// computed in the log domain with the peak factored out. Relative accuracy
/// ~1e-11.
pub fn radial_norm(profile: &RadialProfile, d: usize, n: f64, j: u64) -> Result<LogReal> {
    check_norm_args(n, j, d)?;
    let p = (2 * d - 1) as f64 + 2.0 * j as f64;
    let g = radial_log_integrand(profile, n, p);
    let peak = radial_peak(profile, n, p)?;
    let gpeak = g(peak);
    let hi = upper_cutoff(&g, peak, gpeak);
    let lo = lower_cutoff(&g, peak, gpeak);
    let scaled = |r: f64| (g(r) - gpeak).exp();
    let integral = integrate(&scaled, lo, hi, 1e-12)?;
    if !(integral > 0.0) {
        return numeric("radial norm integral vanished".to_string());
    }
    let ln = (2.0f64).ln() - log_gamma(j as f64 + d as f64)? + gpeak + integral.ln();
    Ok(LogReal::from_ln(ln))
}

/// Ball integral (2 / Gamma(j + d)) int_0^a r^{2d-1+2j} e^{-n V(r)} dr.
/// Always <= the radial norm; used for counting-statistics probabilities.
pub fn ball_integral(profile: &RadialProfile, d: usize, n: f64, j: u64, a: f64) -> Result<LogReal> {
    check_norm_args(n, j, d)?;
    if !(a >= 0.0) {
        return invalid(format!("ball radius must be >= 0, got {a}"));
    }
    if a == 0.0 {
        return Ok(LogReal::ZERO);
    }
    let p = (2 * d - 1) as f64 + 2.0 * j as f64;
    let g = radial_log_integrand(profile, n, p);
    let peak = radial_peak(profile, n, p)?.min(a);
    let gpeak = g(peak);
    let lo = lower_cutoff(&g, peak, gpeak);
    // Past the decay cutoff the integrand is below e^-45 of the peak, so
    // truncating there keeps the panel count bounded when a >> peak.
    let hi = upper_cutoff(&g, peak, gpeak).min(a);
    let scaled = |r: f64| (g(r) - gpeak).exp();
    let integral = integrate(&scaled, lo, hi, 1e-12)?;
    if !(integral > 0.0) {
        return Ok(LogReal::ZERO);
    }
    let ln = (2.0f64).ln() - log_gamma(j as f64 + d as f64)? + gpeak + integral.ln();
    Ok(LogReal::from_ln(ln))
}

/// Table of log radial norms ln h_j, j = 0..len-1, for one profile.
#[derive(Debug, Clone)]
pub struct NormTable {
    pub d: usize,
    pub n: f64,
    pub h_ln: Vec<f64>,
}

impl NormTable {
    pub fn build(profile: &RadialProfile, d: usize, n: f64, len: usize) -> Result<NormTable> {
        let mut h_ln = Vec::with_capacity(len);
        for j in 0..len {
            h_ln.push(radial_norm(profile, d, n, j as u64)?.ln);
        }
        Ok(NormTable { d, n, h_ln })
    }
}

/// A polynomial potential Q(x, y) on C ~ R^2, used for planar (d = 1) moment
/// computations with non-radial Q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariatePoly {
    /// (px, py, c): sum of c * x^px * y^py.
    pub terms: Vec<(u32, u32, f64)>,
}

impl BivariatePoly {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(px, py, c)| c * x.powi(px as i32) * y.powi(py as i32))
            .sum()
    }

    /// Quarter Laplacian at the origin: (c_{2,0} + c_{0,2}) / 2.
    pub fn delta_q0(&self) -> f64 {
        self.terms
            .iter()
            .filter(|&&(px, py, _)| (px, py) == (2, 0) || (px, py) == (0, 2))
            .map(|&(_, _, c)| c)
            .sum::<f64>()
            / 2.0
    }

    /// |z|^2 - t Re z^2 = (1 - t) x^2 + (1 + t) y^2.
    pub fn elliptic(t: f64) -> BivariatePoly {
        BivariatePoly {
            terms: vec![(2, 0, 1.0 - t), (0, 2, 1.0 + t)],
        }
    }

    /// Validates: no constant/linear terms, DeltaQ(0) > 0, and Q > 0 away
    /// from the origin on a polar sampling grid with superlogarithmic growth.
    pub fn validate(&self) -> Result<()> {
        if self
            .terms
            .iter()
            .any(|&(px, py, c)| (px + py) < 2 && c != 0.0)
        {
            return invalid("planar potential must vanish to second order at 0".to_string());
        }
        if self.delta_q0() <= 0.0 {
            return invalid("planar potential requires DeltaQ(0) > 0".to_string());
        }
        for ir in 1..=60 {
            let r = ir as f64 * 0.1;
            for im in 0..64 {
                let th = 2.0 * std::f64::consts::PI * im as f64 / 64.0;
                let q = self.eval(r * th.cos(), r * th.sin());
                if !(q > 0.0) {
                    return invalid(format!(
                        "planar potential not positive away from 0 (r = {r}, theta = {th})"
                    ));
                }
                if ir == 60 && q < 4.0 * r.ln() {
                    return invalid("planar potential grows too slowly".to_string());
                }
            }
        }
        Ok(())
    }
}

/// Monomial moment J_{jk} = <e_j, e_k> = int z^j zbar^k e^{-n Q} dA(z)/pi,
/// by polar-grid quadrature (Gauss-Legendre radially after Laplace peak
/// location, trapezoid in the angle). Guarded to j, k <= 64.
pub fn planar_moment(q: &BivariatePoly, n: f64, j: u32, k: u32) -> Result<LogComplex> {
    if j > 64 || k > 64 {
        return invalid(format!("planar moments are capped at degree 64, got ({j}, {k})"));
    }
    if !(n >= 1.0) {
        return invalid(format!("planar moments require n >= 1, got {n}"));
    }
    const M: usize = 256; // angular grid
    const NR: usize = 200; // radial Gauss-Legendre nodes
    let p = (j + k + 1) as f64;
    let angles: Vec<(f64, f64)> = (0..M)
        .map(|m| {
            let th = 2.0 * std::f64::consts::PI * m as f64 / M as f64;
            (th.cos(), th.sin())
        })
        .collect();
    let qmin = |r: f64| -> f64 {
        angles
            .iter()
            .map(|&(c, s)| q.eval(r * c, r * s))
            .fold(f64::INFINITY, f64::min)
    };
    let g = |r: f64| p * r.ln() - n * qmin(r);
    // coarse geometric scan for the peak
    let mut best_r = 1e-4;
    let mut best_g = g(best_r);
    let mut r = 1e-4;
    let mut past_peak = 0;
    while past_peak < 60 {
        r *= 1.08;
        let gr = g(r);
        if gr > best_g {
            best_g = gr;
            best_r = r;
            past_peak = 0;
        } else {
            past_peak += 1;
        }
        if r > 1e6 {
            return numeric("planar moment peak scan ran away".to_string());
        }
    }
    // local refinement
    for _ in 0..40 {
        let step = best_r * 0.02;
        let cands = [best_r - step, best_r, best_r + step];
        let (br, bg) = cands
            .iter()
            .filter(|&&r| r > 0.0)
            .map(|&r| (r, g(r)))
            .fold((best_r, best_g), |acc, c| if c.1 > acc.1 { c } else { acc });
        best_r = br;
        best_g = bg;
    }
    let hi = upper_cutoff(&g, best_r, best_g);
    let nodes = gauss_legendre(NR);
    let half = 0.5 * hi;
    let mut acc = LogComplexSum::new();
    let dphi = (j as f64) - (k as f64);
    for (x, w) in nodes.0.iter().zip(nodes.1.iter()) {
        let ri = half + half * x;
        if ri <= 0.0 {
            continue;
        }
        // theta sum with its own anchor
        let qv: Vec<f64> = angles.iter().map(|&(c, s)| n * q.eval(ri * c, ri * s)).collect();
        let cmin = qv.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut a_re = 0.0;
        let mut a_im = 0.0;
        for (m, qm) in qv.iter().enumerate() {
            let th = 2.0 * std::f64::consts::PI * m as f64 / M as f64;
            let amp = (-(qm - cmin)).exp();
            a_re += amp * (dphi * th).cos();
            a_im += amp * (dphi * th).sin();
        }
        let a = Cplx::new(a_re, a_im) * (2.0 * std::f64::consts::PI / M as f64);
        if a.norm() == 0.0 {
            continue;
        }
        // dA/pi = r dr dtheta / pi
        let ln = (w * half).ln() + p * ri.ln() - cmin - std::f64::consts::PI.ln() + a.norm().ln();
        acc.push(ln, a.arg());
    }
    Ok(acc.value())
}

/// Hermitian moment matrix J_{jk}, 0 <= j, k <= m.
pub fn moment_matrix(q: &BivariatePoly, n: f64, m: u32) -> Result<Vec<Vec<LogComplex>>> {
    if m > 64 {
        return invalid(format!("moment matrices are capped at degree 64, got {m}"));
    }
    q.validate()?;
    let sz = (m + 1) as usize;
    let mut out = vec![vec![LogComplex::ZERO; sz]; sz];
    for j in 0..sz {
        for k in 0..=j {
            let v = planar_moment(q, n, j as u32, k as u32)?;
            out[j][k] = v;
            out[k][j] = v.conj();
        }
    }
    Ok(out)
}
