//! Weighted polynomial Bergman kernels.
//!
//! For radial potentials the kernel on C^d collapses to a single sum,
//!   K_n(z, w) = e^{-n(V(|z|)+V(|w|))/2} sum_{j<n} (z.wbar)^j / (j! h_j),
//! with h_j the radial norms; tensor potentials multiply per-coordinate
//! planar sums subject to the shared degree cut sum_k j_k < n, evaluated by
//! convolution over total degree. All sums run in the log domain with
//! phase-coherent accumulation anchored at the dominant term.

use crate::logdomain::{log_sum_exp, LogComplex, LogComplexSum};
use crate::potentials::PotentialModel;
use crate::quad::{BivariatePoly, NormTable};
use crate::specfun::{erfc_complex, log_gamma};
use crate::{invalid, numeric, Cplx, Result};

/// Precomputed per-model tables: radial norms (one table for a radial model,
/// one per factor for a tensor model) and log-factorials.
#[derive(Debug, Clone)]
pub struct KernelJob {
    pub model: PotentialModel,
    pub n: usize,
    tables: Vec<NormTable>,
    lg: Vec<f64>, // ln Gamma(j+1), j = 0..n
}

impl KernelJob {
    pub fn new(model: PotentialModel, n: usize) -> Result<KernelJob> {
        if n == 0 {
            return invalid("kernel dimension n must be positive".to_string());
        }
        model.validate()?;
        let nf = n as f64;
        let tables = match &model {
            PotentialModel::Radial { d, profile, .. } => {
                vec![NormTable::build(profile, *d, nf, n)?]
            }
            PotentialModel::Tensor { factors, .. } => {
                let mut ts = Vec::new();
                for f in factors {
                    ts.push(NormTable::build(f, 1, nf, n)?);
                }
                ts
            }
        };
        let mut lg = Vec::with_capacity(n + 1);
        for j in 0..=n {
            lg.push(log_gamma(j as f64 + 1.0)?);
        }
        Ok(KernelJob {
            model,
            n,
            tables,
            lg,
        })
    }

    pub fn d(&self) -> usize {
        self.model.d()
    }

    /// ln h_j for the radial model (or factor k of a tensor model).
    pub fn norm_ln(&self, k: usize, j: usize) -> f64 {
        self.tables[k].h_ln[j]
    }

    fn check_points(&self, z: &[Cplx], w: &[Cplx]) -> Result<()> {
        if z.len() != self.d() || w.len() != self.d() {
            return invalid(format!(
                "kernel point dimension mismatch: model d = {}, got {} and {}",
                self.d(),
                z.len(),
                w.len()
            ));
        }
        Ok(())
    }

    /// The weighted kernel K_n(z, w). Dispatches on the model kind.
    pub fn kernel(&self, z: &[Cplx], w: &[Cplx]) -> Result<LogComplex> {
        match &self.model {
            PotentialModel::Radial { .. } => self.radial_kernel(z, w, self.n - 1),
            PotentialModel::Tensor { .. } => self.tensor_kernel(z, w),
        }
    }

    /// Radial kernel truncated at degree j <= jmax (jmax = n-1 for the full
    /// kernel; smaller jmax gives the partial kernel).
    pub fn radial_kernel(&self, z: &[Cplx], w: &[Cplx], jmax: usize) -> Result<LogComplex> {
        self.check_points(z, w)?;
        if !self.model.is_radial() {
            return invalid("radial_kernel requires a radial model".to_string());
        }
        if jmax >= self.n {
            return invalid(format!("degree cut {jmax} must be < n = {}", self.n));
        }
        let s: Cplx = z.iter().zip(w).map(|(a, b)| a * b.conj()).sum();
        let t = &self.tables[0];
        let mut acc = LogComplexSum::new();
        if s == Cplx::new(0.0, 0.0) {
            acc.push(-t.h_ln[0], 0.0);
        } else {
            let ln_s = s.norm().ln();
            let arg_s = s.arg();
            // scan once for the anchor, then accumulate
            let mut best = f64::NEG_INFINITY;
            for j in 0..=jmax {
                let ln = j as f64 * ln_s - self.lg[j] - t.h_ln[j];
                if ln > best {
                    best = ln;
                }
            }
            for j in 0..=jmax {
                let ln = j as f64 * ln_s - self.lg[j] - t.h_ln[j];
                if ln >= best - 43.0 {
                    acc.push(ln, wrap(j as f64 * arg_s));
                }
            }
        }
        let mut v = acc.value();
        let rz = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let rw = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let prof = self.model.factor(0);
        v.ln -= self.n as f64 * (prof.v(rz) + prof.v(rw)) / 2.0;
        Ok(v)
    }

    /// Tensor kernel: convolution over total degree of the per-coordinate
    /// term arrays, cut at total degree < n, then weighted.
    pub fn tensor_kernel(&self, z: &[Cplx], w: &[Cplx]) -> Result<LogComplex> {
        self.check_points(z, w)?;
        let factors = match &self.model {
            PotentialModel::Tensor { factors, .. } => factors,
            _ => return invalid("tensor_kernel requires a tensor model".to_string()),
        };
        let n = self.n;
        // Scaled linear arrays per coordinate: cur[j] * e^{off}.
        let mut cur: Vec<Cplx> = Vec::new();
        let mut off = 0.0f64;
        for (k, _f) in factors.iter().enumerate() {
            let s = z[k] * w[k].conj();
            let t = &self.tables[k];
            let (arr, m) = if s == Cplx::new(0.0, 0.0) {
                let mut a = vec![Cplx::new(0.0, 0.0); n];
                a[0] = Cplx::new(1.0, 0.0);
                (a, -t.h_ln[0])
            } else {
                let ln_s = s.norm().ln();
                let arg_s = s.arg();
                let lns: Vec<f64> = (0..n)
                    .map(|j| j as f64 * ln_s - self.lg[j] - t.h_ln[j])
                    .collect();
                let m = lns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let a: Vec<Cplx> = lns
                    .iter()
                    .enumerate()
                    .map(|(j, &ln)| {
                        if ln < m - 700.0 {
                            Cplx::new(0.0, 0.0)
                        } else {
                            Cplx::from_polar((ln - m).exp(), wrap(j as f64 * arg_s))
                        }
                    })
                    .collect();
                (a, m)
            };
            if cur.is_empty() {
                cur = arr;
                off = m;
            } else {
                // convolution truncated at total degree < n
                let mut next = vec![Cplx::new(0.0, 0.0); n];
                for (i, &ci) in cur.iter().enumerate() {
                    if ci == Cplx::new(0.0, 0.0) {
                        continue;
                    }
                    for (j, &aj) in arr.iter().take(n - i).enumerate() {
                        next[i + j] += ci * aj;
                    }
                }
                // rescale to keep magnitudes near 1
                let mx = next.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
                if mx > 0.0 {
                    for c in next.iter_mut() {
                        *c /= mx;
                    }
                    off += m + mx.ln();
                } else {
                    off += m;
                }
                cur = next;
            }
        }
        let total: Cplx = cur.iter().sum();
        let mut v = LogComplex::from_complex(total);
        if !v.is_zero() {
            v.ln += off;
        }
        let mut wsum = 0.0;
        for (k, f) in factors.iter().enumerate() {
            wsum += f.v(z[k].norm()) + f.v(w[k].norm());
        }
        v.ln -= self.n as f64 * wsum / 2.0;
        Ok(v)
    }
}

fn wrap(p: f64) -> f64 {
    // reduce j * arg(s) to (-pi, pi] without losing precision for large j
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = p % two_pi;
    if r > std::f64::consts::PI {
        r - two_pi
    } else if r < -std::f64::consts::PI {
        r + two_pi
    } else {
        r
    }
}

/// Partial radial kernel: degrees j <= m only.
pub fn partial_radial_kernel(job: &KernelJob, z: &[Cplx], w: &[Cplx], m: usize) -> Result<LogComplex> {
    job.radial_kernel(z, w, m.min(job.n - 1))
}

/// Extremal (diagonal-moment) normalized partial kernel on C:
///   k_m(z) = e^{-n Q(z)} / (n DeltaQ(0)) * sum_{j<=m} |z|^{2j} / J_jj,
/// where diag_ln[j] = ln J_jj are the diagonal monomial moments.
pub fn extremal_partial_kernel(
    diag_ln: &[f64],
    q_z: f64,
    n: f64,
    dq0: f64,
    z_abs: f64,
) -> Result<f64> {
    if diag_ln.is_empty() || !(dq0 > 0.0) || !(n >= 1.0) {
        return invalid("extremal_partial_kernel: bad arguments".to_string());
    }
    let ln_z2 = if z_abs == 0.0 { f64::NEG_INFINITY } else { 2.0 * z_abs.ln() };
    let total = log_sum_exp(diag_ln.iter().enumerate().map(|(j, &ljj)| {
        if j == 0 {
            -ljj
        } else {
            j as f64 * ln_z2 - ljj
        }
    }));
    Ok((total - n * q_z - (n * dq0).ln()).exp())
}

/// Orthonormal polynomial coefficients from a Hermitian moment matrix by
/// scaled Cholesky: returns C with P_i(z) = sum_{j<=i} C[i][j] z^j.
/// Fails with the first degree at which the pivot drops below threshold.
pub fn orthonormal_from_moments(moments: &[Vec<LogComplex>]) -> Result<Vec<Vec<Cplx>>> {
    let m = moments.len();
    // scale: Jt_jk = J_jk / sqrt(J_jj J_kk), a correlation-like matrix
    let diag: Vec<f64> = (0..m).map(|j| moments[j][j].ln).collect();
    if diag.iter().any(|&x| !x.is_finite()) {
        return numeric("moment matrix has vanishing diagonal".to_string());
    }
    let mut a = vec![vec![Cplx::new(0.0, 0.0); m]; m];
    for j in 0..m {
        for k in 0..m {
            let e = moments[j][k];
            if !e.is_zero() {
                a[j][k] = Cplx::from_polar((e.ln - 0.5 * (diag[j] + diag[k])).exp(), e.phase);
            }
        }
    }
    // Cholesky A = L L^dagger with pivot monitor
    let mut l = vec![vec![Cplx::new(0.0, 0.0); m]; m];
    for i in 0..m {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj();
            }
            if i == j {
                if s.re < 1e-10 || s.im.abs() > 1e-8 {
                    return numeric(format!(
                        "moment matrix numerically singular at degree {i} (pivot {s})"
                    ));
                }
                l[i][j] = Cplx::new(s.re.sqrt(), 0.0);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // C = D^{-1/2} L^{-1} (row i of L^{-1} by forward substitution), with the
    // column scaling e^{-diag[j]/2} folded in.
    let mut c = vec![vec![Cplx::new(0.0, 0.0); m]; m];
    for i in 0..m {
        // solve L x = e_i
        let mut x = vec![Cplx::new(0.0, 0.0); i + 1];
        for r in 0..=i {
            let mut s = if r == i { Cplx::new(1.0, 0.0) } else { Cplx::new(0.0, 0.0) };
            for k in 0..r {
                s -= l[r][k] * x[k];
            }
            x[r] = s / l[r][r];
        }
        for j in 0..=i {
            c[i][j] = x[j] * (-0.5 * diag[j]).exp();
        }
    }
    Ok(c)
}

/// Low-degree kernel for a planar bivariate-polynomial potential via the
/// Gram route: sum_{i<=m} P_i(z) conj(P_i(w)) e^{-n(Q(z)+Q(w))/2}.
pub fn gram_partial_kernel(
    coeffs: &[Vec<Cplx>],
    q: &BivariatePoly,
    n: f64,
    z: Cplx,
    w: Cplx,
) -> Result<LogComplex> {
    let m = coeffs.len();
    let mut pows_z = Vec::with_capacity(m);
    let mut pows_w = Vec::with_capacity(m);
    let mut pz = Cplx::new(1.0, 0.0);
    let mut pw = Cplx::new(1.0, 0.0);
    for _ in 0..m {
        pows_z.push(pz);
        pows_w.push(pw);
        pz *= z;
        pw *= w;
    }
    let mut total = Cplx::new(0.0, 0.0);
    for row in coeffs {
        let pi_z: Cplx = row.iter().zip(&pows_z).map(|(c, p)| c * p).sum();
        let pi_w: Cplx = row.iter().zip(&pows_w).map(|(c, p)| c * p).sum();
        total += pi_z * pi_w.conj();
    }
    let mut v = LogComplex::from_complex(total);
    if !v.is_zero() {
        v.ln -= n * (q.eval(z.re, z.im) + q.eval(w.re, w.im)) / 2.0;
    }
    Ok(v)
}

/// The pluricomplex Ginibre (bulk) limit kernel exp(xi.etabar - (|xi|^2+|eta|^2)/2).
pub fn limit_ginibre(xi: &[Cplx], eta: &[Cplx]) -> LogComplex {
    let s: Cplx = xi.iter().zip(eta).map(|(a, b)| a * b.conj()).sum();
    let n2: f64 = xi.iter().map(|c| c.norm_sqr()).sum::<f64>()
        + eta.iter().map(|c| c.norm_sqr()).sum::<f64>();
    LogComplex::new(s.re - 0.5 * n2, s.im)
}

/// The planar erfc edge kernel (d = 1 scalar arguments):
/// (1/2) exp(xi etabar - ...) erfc((xi + etabar)/sqrt(2)).
pub fn limit_erfc(xi: Cplx, eta: Cplx) -> Result<LogComplex> {
    let g = limit_ginibre(&[xi], &[eta]);
    let e = erfc_complex((xi + eta.conj()) / Cplx::new(2.0f64.sqrt(), 0.0))?;
    let ec = LogComplex::from_complex(e * 0.5);
    Ok(g.mul(&ec))
}

/// The multivariate erfc edge kernel on C^d:
/// (1/2) exp(xi.etabar - ...) erfc(sum_k (xi_k + etabar_k)/sqrt(2d)).
pub fn limit_mverfc(xi: &[Cplx], eta: &[Cplx]) -> Result<LogComplex> {
    let d = xi.len() as f64;
    let g = limit_ginibre(xi, eta);
    let s: Cplx = xi.iter().zip(eta).map(|(a, b)| a + b.conj()).sum();
    let e = erfc_complex(s / Cplx::new((2.0 * d).sqrt(), 0.0))?;
    let ec = LogComplex::from_complex(e * 0.5);
    Ok(g.mul(&ec))
}

/// Half-space Fock kernel on C^d for a real unit direction v:
///   F(xi, eta) = (1/2) exp(xi.etabar) erfc((xi.v + v.etabar)/sqrt(2)).
pub fn fock_halfspace_kernel(xi: &[Cplx], eta: &[Cplx], v: &[f64]) -> Result<Cplx> {
    if xi.len() != eta.len() || xi.len() != v.len() {
        return invalid("fock_halfspace_kernel: dimension mismatch".to_string());
    }
    let s: Cplx = xi.iter().zip(eta).map(|(a, b)| a * b.conj()).sum();
    let p: Cplx = xi
        .iter()
        .zip(eta)
        .zip(v)
        .map(|((a, b), &c)| (a + b.conj()) * c)
        .sum();
    let e = erfc_complex(p / Cplx::new(2.0f64.sqrt(), 0.0))?;
    Ok(s.exp() * e * 0.5)
}

/// ln F(p, q) for the one-dimensional half-space Fock kernel, valid for
/// arbitrarily large arguments (the erfc factor is kept in the log domain).
fn ln_fock_1d(p: Cplx, q: Cplx) -> Result<LogComplex> {
    let e = crate::specfun::ln_erfc_complex((p + q.conj()) / Cplx::new(2.0f64.sqrt(), 0.0))?;
    let pq = p * q.conj();
    Ok(LogComplex::new(pq.re - 2.0f64.ln(), pq.im).mul(&e))
}

/// Checks the reproducing identity of the half-space Fock kernel,
///   int F(zeta, eta) conj(F(zeta, xi)) e^{-|zeta|^2} dA(zeta)/pi^d = F(xi, eta).
/// Returns (quadrature value, kernel value).
///
/// In coordinates where the first axis is v, the kernel factorizes into a
/// one-dimensional half-space factor along v and the plain Fock kernel on the
/// orthogonal complement.  The orthogonal directions reproduce exactly, so the
/// check reduces to a single complex integral over p = <zeta, v>.  That
/// integrand decays only like 1/(Im p)^2 along the imaginary direction (the
/// erfc growth cancels the Gaussian weight exactly), so instead of
/// Gauss-Hermite we use wide adaptive quadrature with log-domain evaluation.
pub fn fock_reproducing_pair(xi: &[Cplx], eta: &[Cplx], v: &[f64]) -> Result<(Cplx, Cplx)> {
    if xi.len() != eta.len() || xi.len() != v.len() {
        return invalid("fock_reproducing_pair: dimension mismatch".to_string());
    }
    let p_xi: Cplx = xi.iter().zip(v).map(|(a, &c)| a * c).sum();
    let p_eta: Cplx = eta.iter().zip(v).map(|(a, &c)| a * c).sum();
    let s: Cplx = xi.iter().zip(eta).map(|(a, b)| a * b.conj()).sum();
    // exact reproducing factor from the directions orthogonal to v
    let ortho = (s - p_xi * p_eta.conj()).exp();

    let term = |x: f64, y: f64| -> Result<Cplx> {
        let p = Cplx::new(x, y);
        let a = ln_fock_1d(p, p_eta)?;
        let b = ln_fock_1d(p, p_xi)?;
        let t = a.mul(&b.conj());
        Ok(LogComplex::new(t.ln - x * x - y * y, t.phase).to_complex())
    };
    let y_max = 150.0;
    let x_max = 7.0;
    let err: std::cell::RefCell<Option<crate::Error>> = std::cell::RefCell::new(None);
    let inner = |x: f64, re_part: bool| -> f64 {
        let f = |y: f64| match term(x, y) {
            Ok(t) => {
                if re_part {
                    t.re
                } else {
                    t.im
                }
            }
            Err(e) => {
                *err.borrow_mut() = Some(e);
                0.0
            }
        };
        crate::quad::integrate(&f, -y_max, y_max, 1e-9).unwrap_or(0.0)
    };
    let re = crate::quad::integrate(&|x| inner(x, true), -x_max, x_max, 1e-8)?;
    let im = crate::quad::integrate(&|x| inner(x, false), -x_max, x_max, 1e-8)?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let lhs = ortho * Cplx::new(re, im) / std::f64::consts::PI;
    let rhs = fock_halfspace_kernel(xi, eta, v)?;
    Ok((lhs, rhs))
}

/// Hele-Shaw Gaussian prediction for the near-boundary monomial density
/// D_j(r) = r^{2j} e^{-n V(r)} / (Gamma(j+1) h_j) on C (d = 1):
///   D_j(r) ~ sqrt(n DeltaQ(r_tau)) / (r_tau sqrt(2 pi))
///            * exp(-(2 xi + (tau n - j)/(r_tau sqrt(n DeltaQ)))^2 / 2),
/// with xi = (r - r_tau) sqrt(n DeltaQ(r_tau)).
pub fn hw_predicted_density(
    profile: &crate::potentials::RadialProfile,
    n: f64,
    tau: f64,
    j: f64,
    r: f64,
) -> Result<f64> {
    if !(tau > 0.0) || !(n >= 1.0) || !(r >= 0.0) {
        return invalid("hw_predicted_density: requires tau > 0, n >= 1, r >= 0".to_string());
    }
    let rt = crate::potentials::droplet_radius_of(profile, tau)?;
    let dq = profile.delta_q(rt)?;
    if !(dq > 0.0) {
        return numeric("hw_predicted_density: DeltaQ(r_tau) <= 0".to_string());
    }
    let snd = (n * dq).sqrt();
    let xi = (r - rt) * snd;
    let u = 2.0 * xi + (tau * n - j) / (rt * snd);
    Ok(snd / (rt * (2.0 * std::f64::consts::PI).sqrt()) * (-0.5 * u * u).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{PolyTerm, RadialProfile};
    use crate::quad::moment_matrix;

    fn c(re: f64, im: f64) -> Cplx {
        Cplx::new(re, im)
    }

    fn ginibre_job(d: usize, n: usize) -> KernelJob {
        KernelJob::new(PotentialModel::ginibre(d), n).unwrap()
    }

    #[test]
    fn ginibre_kernel_closed_form() {
        // d=1 Ginibre: K_n(z,w) = n e^{-n(|z|^2+|w|^2)/2} sum_{j<n} (n z wbar)^j / j!.
        let n = 32;
        let job = ginibre_job(1, n);
        let z = [c(0.4, 0.2)];
        let w = [c(-0.1, 0.5)];
        let got = job.kernel(&z, &w).unwrap();
        let s = z[0] * w[0].conj() * n as f64;
        let mut sum = Cplx::new(0.0, 0.0);
        let mut term = Cplx::new(1.0, 0.0);
        for j in 0..n {
            sum += term;
            term *= s / (j as f64 + 1.0);
        }
        let want = sum
            * (n as f64)
            * (-(n as f64) * (z[0].norm_sqr() + w[0].norm_sqr()) / 2.0).exp();
        let gotc = got.to_complex();
        assert!(
            (gotc - want).norm() < 1e-10 * want.norm(),
            "{gotc} vs {want}"
        );
    }

    #[test]
    fn kernel_diagonal_real_positive_and_hermitian() {
        let job = KernelJob::new(
            PotentialModel::radial(
                2,
                RadialProfile::Polynomial(vec![PolyTerm { k: 1, c: 0.5 }, PolyTerm { k: 2, c: 0.3 }]),
            )
            .unwrap(),
            24,
        )
        .unwrap();
        let z = [c(0.5, 0.1), c(-0.2, 0.4)];
        let w = [c(0.1, -0.6), c(0.3, 0.2)];
        let kzz = job.kernel(&z, &z).unwrap();
        assert!(kzz.phase.abs() < 1e-12, "diagonal must be positive");
        let kzw = job.kernel(&z, &w).unwrap();
        let kwz = job.kernel(&w, &z).unwrap();
        assert!((kzw.ln - kwz.ln).abs() < 1e-11);
        assert!((kzw.phase + kwz.phase).abs() < 1e-11);
        // Cauchy-Schwarz: |K(z,w)|^2 <= K(z,z) K(w,w)
        let kww = job.kernel(&w, &w).unwrap();
        assert!(2.0 * kzw.ln <= kzz.ln + kww.ln + 1e-10);
    }

    #[test]
    fn kernel_mass_is_n_choose_d() {
        // integral of K(z,z) dA/pi over C = dim of the polynomial space:
        // d=1 Ginibre: n. Integrate radially: 2 int K(r) r dr.
        let n = 64;
        let job = ginibre_job(1, n);
        let f = |r: f64| {
            let v = job.kernel(&[c(r, 0.0)], &[c(r, 0.0)]).unwrap();
            2.0 * r * v.ln.exp()
        };
        let mass = crate::quad::integrate(&f, 0.0, 3.0, 1e-10).unwrap();
        assert!(
            (mass - n as f64).abs() < 1e-3 * n as f64,
            "mass {mass} vs {n}"
        );
    }

    #[test]
    fn tensor_kernel_vs_brute_force() {
        // d=2, small n: enumerate multi-indices j1 + j2 < n directly.
        let m = PotentialModel::tensor(vec![
            RadialProfile::Polynomial(vec![PolyTerm { k: 1, c: 1.0 }]),
            RadialProfile::Polynomial(vec![PolyTerm { k: 2, c: 1.0 }]),
        ])
        .unwrap();
        let n = 16;
        let job = KernelJob::new(m.clone(), n).unwrap();
        let z = [c(0.7, 0.2), c(0.4, -0.5)];
        let w = [c(0.3, 0.3), c(-0.6, 0.1)];
        let got = job.tensor_kernel(&z, &w).unwrap().to_complex();
        // brute force in plain f64 (n small, moderate magnitudes)
        let mut sum = Cplx::new(0.0, 0.0);
        for j1 in 0..n {
            for j2 in 0..(n - j1) {
                let t1 = (z[0] * w[0].conj()).powu(j1 as u32)
                    * ((-job.lg[j1] - job.tables[0].h_ln[j1]).exp());
                let t2 = (z[1] * w[1].conj()).powu(j2 as u32)
                    * ((-job.lg[j2] - job.tables[1].h_ln[j2]).exp());
                sum += t1 * t2;
            }
        }
        let q0 = m.factor(0);
        let q1 = m.factor(1);
        let wgt = (-(n as f64)
            * (q0.v(z[0].norm()) + q0.v(w[0].norm()) + q1.v(z[1].norm()) + q1.v(w[1].norm()))
            / 2.0)
            .exp();
        let want = sum * wgt;
        assert!(
            (got - want).norm() < 1e-10 * want.norm(),
            "{got} vs {want}"
        );
    }

    #[test]
    fn partial_kernel_poisson_cdf() {
        // Ginibre d=1: normalized partial diagonal = P(Poisson(n|z|^2) <= m).
        let n = 256;
        let job = ginibre_job(1, n);
        let m = 40;
        for &r in &[0.1f64, 0.3, 0.38] {
            let v = partial_radial_kernel(&job, &[c(r, 0.0)], &[c(r, 0.0)], m).unwrap();
            let got = (v.ln - (n as f64).ln()).exp();
            let lam = n as f64 * r * r;
            // Poisson CDF = 1 - P(m+1, lam)
            let want = 1.0 - crate::specfun::reg_inc_gamma_lower(m as f64 + 1.0, lam).unwrap();
            assert!(
                (got - want).abs() < 1e-8,
                "r={r}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn extremal_matches_partial_for_radial() {
        // For radial planar potentials the extremal formula with exact
        // diagonal moments equals the normalized partial kernel.
        let prof = RadialProfile::Polynomial(vec![PolyTerm { k: 1, c: 1.0 }]);
        let n = 100usize;
        let m = 20usize;
        let job = KernelJob::new(PotentialModel::radial(1, prof.clone()).unwrap(), n).unwrap();
        // J_jj = Gamma(j+1) h_j (d = 1)
        let diag: Vec<f64> = (0..=m)
            .map(|j| job.lg[j] + job.tables[0].h_ln[j])
            .collect();
        for &r in &[0.0, 0.2, 0.45] {
            let q_z = prof.v(r);
            let ex = extremal_partial_kernel(&diag, q_z, n as f64, 1.0, r).unwrap();
            let pk = partial_radial_kernel(&job, &[c(r, 0.0)], &[c(r, 0.0)], m).unwrap();
            let want = (pk.ln - (n as f64).ln()).exp();
            assert!((ex - want).abs() < 1e-10 * want.max(1e-12), "r={r}: {ex} vs {want}");
        }
    }

    #[test]
    fn gram_route_matches_radial_factorization() {
        // Elliptic Q with t = 0 is Ginibre: the Gram kernel must equal the
        // closed-form partial kernel.
        let q = BivariatePoly {
            terms: vec![(2, 0, 1.0), (0, 2, 1.0)],
        };
        let n = 60.0;
        let m = 8u32;
        let mm = moment_matrix(&q, n, m).unwrap();
        let coeffs = orthonormal_from_moments(&mm).unwrap();
        let job = ginibre_job(1, 64);
        let z = c(0.2, 0.1);
        let w = c(-0.1, 0.15);
        // kernel with n = 60 weights: build a dedicated job
        let job60 = KernelJob::new(PotentialModel::ginibre(1), 60).unwrap();
        let want = partial_radial_kernel(&job60, &[z], &[w], m as usize)
            .unwrap()
            .to_complex();
        let got = gram_partial_kernel(&coeffs, &q, n, z, w).unwrap().to_complex();
        assert!(
            (got - want).norm() < 1e-6 * want.norm(),
            "{got} vs {want}"
        );
        let _ = job;
    }

    #[test]
    fn limit_kernels_basic_values() {
        // Ginibre limit at xi = eta: value 1 on the diagonal.
        let xi = [c(0.3, 0.4), c(-0.2, 0.1)];
        let g = limit_ginibre(&xi, &xi);
        assert!(g.ln.abs() < 1e-14 && g.phase.abs() < 1e-14);
        // (1/2) exp(0) erfc(0) = 1/2.
        let e = limit_erfc(c(0.0, 0.0), c(0.0, 0.0)).unwrap().to_complex();
        assert!((e.re - 0.5).abs() < 1e-12 && e.im.abs() < 1e-14);
        let mv = limit_mverfc(&[c(0.0, 0.0); 2], &[c(0.0, 0.0); 2])
            .unwrap()
            .to_complex();
        assert!((mv.re - 0.5).abs() < 1e-12);
        // Hermitian symmetry of the mverfc kernel
        let xi = [c(0.3, -0.2), c(0.5, 0.1)];
        let eta = [c(-0.4, 0.3), c(0.2, 0.2)];
        let a = limit_mverfc(&xi, &eta).unwrap();
        let b = limit_mverfc(&eta, &xi).unwrap();
        assert!((a.ln - b.ln).abs() < 1e-11 && (a.phase + b.phase).abs() < 1e-11);
    }

    #[test]
    fn fock_reproducing_identity_d1() {
        let v = [1.0];
        let xi = [c(0.4, -0.3)];
        let eta = [c(-0.2, 0.5)];
        let (lhs, rhs) = fock_reproducing_pair(&xi, &eta, &v).unwrap();
        assert!(
            (lhs - rhs).norm() < 0.01 * rhs.norm(),
            "lhs {lhs} vs rhs {rhs}"
        );
    }

    #[test]
    fn fock_reproducing_identity_d2() {
        let r = 0.5f64.sqrt();
        let v = [r, r];
        let xi = [c(0.4, -0.3), c(0.1, 0.6)];
        let eta = [c(-0.2, 0.5), c(0.3, -0.1)];
        let (lhs, rhs) = fock_reproducing_pair(&xi, &eta, &v).unwrap();
        assert!(
            (lhs - rhs).norm() < 0.01 * rhs.norm(),
            "lhs {lhs} vs rhs {rhs}"
        );
    }

    #[test]
    fn hw_prediction_matches_exact_ginibre_monomials() {
        // Exact: D_j(r) = r^{2j} e^{-n r^2} n^{j+1} / j!; prediction within
        // O(1/sqrt n) relatively near the tau-circle.
        let prof = RadialProfile::Polynomial(vec![PolyTerm { k: 1, c: 1.0 }]);
        let n = 4096.0;
        let tau = 0.7f64;
        let j = (tau * n) as u64;
        let rt = tau.sqrt();
        for &dr in &[-0.01, 0.0, 0.012] {
            let r: f64 = rt + dr;
            let exact = ((j as f64) * 2.0 * r.ln() - n * r * r
                + (j as f64 + 1.0) * n.ln()
                - log_gamma(j as f64 + 1.0).unwrap())
            .exp();
            let pred = hw_predicted_density(&prof, n, tau, j as f64, r).unwrap();
            assert!(
                (pred / exact - 1.0).abs() < 0.05,
                "dr={dr}: pred {pred} exact {exact}"
            );
        }
    }
}
