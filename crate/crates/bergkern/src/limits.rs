//! Scaling limits of the weighted kernels: microscopic rescaling maps at
//! edge and bulk points, cocycle-invariant comparison against the limiting
//! kernels, convergence-rate fits, and the steepest-decay direction search.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::EdgeFrame;
use crate::kernels::KernelJob;
use crate::logdomain::LogComplex;
use crate::{invalid, Cplx, Result};

/// Microscopic rescaling map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Scalar zoom along the outward normal: dz = H^{-1/2}(normal * xi)/sqrt(n).
    ErfcNormal,
    /// Unitary zoom: dz = U xi / sqrt(n * ma_det).
    MverfcUnitary,
    /// Interior zoom: dz = H^{-1/2} xi / sqrt(n).
    BulkGinibre,
}

fn matvec(m: &DMatrix<Cplx>, v: &[Cplx]) -> Vec<Cplx> {
    let d = v.len();
    (0..d)
        .map(|i| (0..d).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

/// The microscopic point z0 + dz(xi) for the given mode.
pub fn rescaled_point(
    frame: &EdgeFrame,
    mode: Mode,
    n: usize,
    xi: &[Cplx],
) -> Result<Vec<Cplx>> {
    let d = frame.z0.len();
    let nf = n as f64;
    let dz: Vec<Cplx> = match mode {
        Mode::ErfcNormal => {
            if xi.len() != 1 {
                return invalid("ErfcNormal takes a scalar argument".to_string());
            }
            let v: Vec<Cplx> = frame.normal.iter().map(|c| c * xi[0]).collect();
            matvec(&frame.inv_sqrt, &v)
                .into_iter()
                .map(|c| c / nf.sqrt())
                .collect()
        }
        Mode::MverfcUnitary => {
            if xi.len() != d {
                return invalid("MverfcUnitary takes a d-vector argument".to_string());
            }
            let s = (nf * frame.ma_det).sqrt();
            matvec(&frame.u, xi).into_iter().map(|c| c / s).collect()
        }
        Mode::BulkGinibre => {
            if xi.len() != d {
                return invalid("BulkGinibre takes a d-vector argument".to_string());
            }
            matvec(&frame.inv_sqrt, xi)
                .into_iter()
                .map(|c| c / nf.sqrt())
                .collect()
        }
    };
    Ok(frame.z0.iter().zip(&dz).map(|(a, b)| a + b).collect())
}

/// Rescaled kernel K_n(z0 + dz(xi), z0 + dz(eta)) / (n^d ma_det).
pub fn rescaled_kernel(
    job: &KernelJob,
    frame: &EdgeFrame,
    mode: Mode,
    xi: &[Cplx],
    eta: &[Cplx],
) -> Result<LogComplex> {
    let z = rescaled_point(frame, mode, job.n, xi)?;
    let w = rescaled_point(frame, mode, job.n, eta)?;
    let mut v = job.kernel(&z, &w)?;
    if !v.is_zero() {
        v.ln -= job.d() as f64 * (job.n as f64).ln() + frame.ma_det.ln();
    }
    Ok(v)
}

/// Sup over the pairs of the cocycle-invariant distance between the two
/// kernels: |.| is cocycle-invariant, so moduli are compared, relatively
/// where the limit modulus is at least `floor`, absolutely below it.
pub fn compare_to_limit<F, G>(
    pairs: &[(Vec<Cplx>, Vec<Cplx>)],
    kernel: F,
    limit: G,
    floor: f64,
) -> Result<f64>
where
    F: Fn(&[Cplx], &[Cplx]) -> Result<LogComplex>,
    G: Fn(&[Cplx], &[Cplx]) -> Result<LogComplex>,
{
    let mut sup = 0.0f64;
    for (xi, eta) in pairs {
        let a = kernel(xi, eta)?.ln.exp();
        let b = limit(xi, eta)?.ln.exp();
        let err = if b >= floor { (a - b).abs() / b } else { (a - b).abs() };
        if err > sup {
            sup = err;
        }
    }
    Ok(sup)
}

/// Least-squares slope of ln(err) against ln(n).
pub fn fit_log_log_rate(ns: &[f64], errs: &[f64]) -> Result<f64> {
    if ns.len() != errs.len() || ns.len() < 2 {
        return invalid("fit_log_log_rate needs at least two samples".to_string());
    }
    if errs.iter().any(|&e| !(e > 0.0)) {
        return invalid("fit_log_log_rate needs positive errors".to_string());
    }
    let xs: Vec<f64> = ns.iter().map(|&n| n.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|&e| e.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Convergence study: sup errors at each n plus the fitted log-log rate.
pub fn convergence_study<E>(ns: &[usize], mut sup_err: E) -> Result<(Vec<f64>, f64)>
where
    E: FnMut(usize) -> Result<f64>,
{
    let mut errs = Vec::with_capacity(ns.len());
    for &n in ns {
        errs.push(sup_err(n)?);
    }
    let nsf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let rate = fit_log_log_rate(&nsf, &errs)?;
    Ok((errs, rate))
}

/// Diagonal bulk-degeneracy check at a degenerate tensor edge point:
/// the rescaled kernel with the matrix map dz = H^{-1/2} U xi / sqrt(n)
/// against the half-plane error-function profile. Returns (value, limit).
pub fn bulk_degenerate_check(
    job: &KernelJob,
    frame: &EdgeFrame,
    xi: &[Cplx],
) -> Result<(f64, f64)> {
    let d = job.d();
    if xi.len() != d {
        return invalid("bulk_degenerate_check takes a d-vector argument".to_string());
    }
    let nf = job.n as f64;
    let uxi = matvec(&frame.u, xi);
    let dz: Vec<Cplx> = matvec(&frame.inv_sqrt, &uxi)
        .into_iter()
        .map(|c| c / nf.sqrt())
        .collect();
    let z: Vec<Cplx> = frame.z0.iter().zip(&dz).map(|(a, b)| a + b).collect();
    let k = job.kernel(&z, &z)?;
    let value = (k.ln - d as f64 * nf.ln() - frame.ma_det.ln()).exp();
    let re_sum: f64 = xi.iter().map(|c| c.re).sum();
    let limit =
        0.5 * crate::specfun::erfc_real(2.0f64.sqrt() * re_sum / (d as f64).sqrt())?;
    Ok((value, limit))
}

/// Unit vector in R^{2d} interpreted as a complex d-vector.
fn real_to_complex(v: &[f64]) -> Vec<Cplx> {
    let d = v.len() / 2;
    (0..d).map(|k| Cplx::new(v[2 * k], v[2 * k + 1])).collect()
}

/// Unsigned angle between a real 2d-vector and the frame's outward normal
/// viewed as a real vector (sign of the direction is quotiented out).
pub fn angle_to_normal(frame: &EdgeFrame, v: &[f64]) -> Result<f64> {
    let d = frame.z0.len();
    if v.len() != 2 * d {
        return invalid("angle_to_normal: expected a 2d real vector".to_string());
    }
    let mut nr = Vec::with_capacity(2 * d);
    for c in &frame.normal {
        nr.push(c.re);
        nr.push(c.im);
    }
    let nn: f64 = nr.iter().map(|x| x * x).sum::<f64>().sqrt();
    let vn: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nn <= 0.0 || vn <= 0.0 {
        return invalid("angle_to_normal: zero vector".to_string());
    }
    let ip: f64 = nr.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / (nn * vn);
    Ok(ip.abs().min(1.0).acos())
}

/// Direction of steepest off-diagonal decay of the rescaled kernel at an
/// edge point: minimizes |K~(s v, 0)| over unit v in R^{2d} (s fixed), by
/// seeded coarse sampling followed by a shrinking-neighbourhood refinement.
/// Returns the unit direction as a real 2d-vector.
pub fn steepest_decay_direction(
    job: &KernelJob,
    frame: &EdgeFrame,
    seed: u64,
) -> Result<Vec<f64>> {
    let d = job.d();
    let dim = 2 * d;
    let s = 1.5f64;
    let zero = vec![Cplx::new(0.0, 0.0); d];
    let objective = |v: &[f64]| -> Result<f64> {
        let xi: Vec<Cplx> = real_to_complex(v).iter().map(|c| c * s).collect();
        Ok(rescaled_kernel(job, frame, Mode::MverfcUnitary, &xi, &zero)?.ln)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss_unit = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        // Box-Muller standard normals, normalized
        let mut v = Vec::with_capacity(dim);
        while v.len() < dim {
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            let r = (-2.0 * u1.ln()).sqrt();
            let t = 2.0 * std::f64::consts::PI * u2;
            v.push(r * t.cos());
            if v.len() < dim {
                v.push(r * t.sin());
            }
        }
        let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / n).collect()
    };
    // coarse pass: seeded directions plus the coordinate axes
    let mut best_v: Vec<f64> = Vec::new();
    let mut best = f64::INFINITY;
    let consider = |v: Vec<f64>, best: &mut f64, best_v: &mut Vec<f64>| -> Result<()> {
        let f = objective(&v)?;
        if f < *best {
            *best = f;
            *best_v = v;
        }
        Ok(())
    };
    for a in 0..dim {
        let mut v = vec![0.0; dim];
        v[a] = 1.0;
        consider(v, &mut best, &mut best_v)?;
    }
    for _ in 0..96 {
        let v = gauss_unit(&mut rng);
        consider(v, &mut best, &mut best_v)?;
    }
    // refinement: shrinking Gaussian neighbourhood around the incumbent
    let mut sigma = 0.5f64;
    for _ in 0..30 {
        for _ in 0..10 {
            let g = gauss_unit(&mut rng);
            let mut v: Vec<f64> = best_v
                .iter()
                .zip(&g)
                .map(|(a, b)| a + sigma * b)
                .collect();
            let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in v.iter_mut() {
                *x /= n;
            }
            consider(v, &mut best, &mut best_v)?;
        }
        sigma *= 0.75;
    }
    // The search runs in the argument space of the rescaled kernel; map the
    // winner through the frame's unitary to get the physical direction.
    let mapped = matvec(&frame.u, &real_to_complex(&best_v));
    let mut out = Vec::with_capacity(dim);
    for c in &mapped {
        out.push(c.re);
        out.push(c.im);
    }
    let norm: f64 = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in out.iter_mut() {
        *x /= norm;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{edge_frame_radial, interior_frame};
    use crate::kernels::{limit_erfc, limit_ginibre};
    use crate::potentials::PotentialModel;

    fn c(re: f64, im: f64) -> Cplx {
        Cplx::new(re, im)
    }

    #[test]
    fn erfc_normal_matches_limit_ginibre_d1() {
        let n = 512;
        let job = KernelJob::new(PotentialModel::ginibre(1), n).unwrap();
        let frame = edge_frame_radial(&job.model, &[c(1.0, 0.0)]).unwrap();
        for &(a, b) in &[(0.0, 0.0), (0.5, -0.3), (-1.0, 0.6), (1.2, 0.4)] {
            let xi = c(a, b);
            for &(p, q) in &[(0.0, 0.0), (-0.4, 0.2)] {
                let eta = c(p, q);
                let got = rescaled_kernel(&job, &frame, Mode::ErfcNormal, &[xi], &[eta])
                    .unwrap()
                    .ln
                    .exp();
                let want = limit_erfc(xi, eta).unwrap().ln.exp();
                assert!(
                    (got - want).abs() < 0.05,
                    "xi={xi} eta={eta}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn bulk_ginibre_interior_matches_limit() {
        let n = 512;
        let job = KernelJob::new(PotentialModel::ginibre(1), n).unwrap();
        let frame = interior_frame(&job.model, &[c(0.4, 0.1)]).unwrap();
        for &(a, b) in &[(0.0, 0.0), (0.8, -0.5), (-0.6, 0.9)] {
            let xi = [c(a, b)];
            let eta = [c(0.2, 0.1)];
            let got = rescaled_kernel(&job, &frame, Mode::BulkGinibre, &xi, &eta)
                .unwrap()
                .ln
                .exp();
            let want = limit_ginibre(&xi, &eta).ln.exp();
            assert!(
                (got - want).abs() < 0.02,
                "xi={:?}: {got} vs {want}",
                xi[0]
            );
        }
    }

    #[test]
    fn mverfc_map_reduces_to_scalar_map_on_normal_d1() {
        // In d = 1 the unitary map with xi along the symmetric direction is
        // the same point as the scalar normal map.
        let n = 64;
        let job = KernelJob::new(PotentialModel::ginibre(1), n).unwrap();
        let frame = edge_frame_radial(&job.model, &[c(0.6, 0.8)]).unwrap();
        let xi = c(0.7, -0.2);
        let p1 = rescaled_point(&frame, Mode::ErfcNormal, n, &[xi]).unwrap();
        let p2 = rescaled_point(&frame, Mode::MverfcUnitary, n, &[xi]).unwrap();
        assert!((p1[0] - p2[0]).norm() < 1e-12);
    }

    #[test]
    fn fit_rate_exact_on_synthetic_data() {
        let ns: [f64; 4] = [100.0, 200.0, 400.0, 800.0];
        let errs: Vec<f64> = ns.iter().map(|n| 3.0 * n.powf(-0.5)).collect();
        let r = fit_log_log_rate(&ns, &errs).unwrap();
        assert!((r + 0.5).abs() < 1e-12);
        assert!(fit_log_log_rate(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn compare_to_limit_zero_on_itself() {
        let pairs = vec![
            (vec![c(0.1, 0.2)], vec![c(0.1, 0.2)]),
            (vec![c(0.5, 0.0)], vec![c(-0.3, 0.1)]),
        ];
        let sup = compare_to_limit(
            &pairs,
            |x, e| limit_erfc(x[0], e[0]),
            |x, e| limit_erfc(x[0], e[0]),
            0.05,
        )
        .unwrap();
        assert!(sup == 0.0);
    }

    #[test]
    fn steepest_decay_is_normal_d1() {
        let n = 128;
        let job = KernelJob::new(PotentialModel::ginibre(1), n).unwrap();
        let frame = edge_frame_radial(&job.model, &[c(1.0, 0.0)]).unwrap();
        let v = steepest_decay_direction(&job, &frame, 7).unwrap();
        let ang = angle_to_normal(&frame, &v).unwrap();
        assert!(ang < 0.2, "angle {ang}");
    }

    #[test]
    fn degenerate_check_half_profile_at_zero() {
        // At xi = 0 the rescaled diagonal must be near 1/2 for a degenerate
        // tensor edge; exercised fully in the acceptance suite. Here only the
        // limit formula is sanity-checked.
        let re_sum = 0.0f64;
        let lim = 0.5 * crate::specfun::erfc_real(2.0f64.sqrt() * re_sum).unwrap();
        assert!((lim - 0.5).abs() < 1e-15);
    }
}
