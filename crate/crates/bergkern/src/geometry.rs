//! Droplet geometry: planar and pluricomplex obstacle functions, droplet
//! membership margins, and edge frames (boundary point, outward normal,
//! Hessian data, and the canonical unitary used by the scaling maps).
//!
//! The pluricomplex obstacle for tensor potentials is computed by
//! water-filling over the simplex {tau_k >= 0, sum tau_k = 1}: the marginal
//! derivative of the k-th planar tau-obstacle is 2 log(|z_k| / r_tau), so the
//! optimal weights equalize that level, found by bisection.

use nalgebra::DMatrix;

use crate::potentials::{droplet_radius_of, PotentialModel, RadialProfile};
use crate::{invalid, numeric, Cplx, Result};

/// Planar tau-obstacle of one radial factor:
/// V(r) for r <= r_tau, V(r_tau) + 2 tau log(r / r_tau) outside.
pub fn planar_obstacle(profile: &RadialProfile, tau: f64, r: f64) -> Result<f64> {
    if !(tau >= 0.0) || !(r >= 0.0) {
        return invalid(format!("planar_obstacle requires tau, r >= 0, got ({tau}, {r})"));
    }
    if tau == 0.0 {
        return Ok(0.0);
    }
    let rt = droplet_radius_of(profile, tau)?;
    if r <= rt {
        Ok(profile.v(r))
    } else {
        Ok(profile.v(rt) + 2.0 * tau * (r / rt).ln())
    }
}

/// Margin of the droplet: >= 0 inside (radial: 2 - |z| V'(|z|); tensor:
/// 1 - sum_k |z_k| V_k'(|z_k|)/2, i.e. 1 minus the total saturation weight).
pub fn droplet_margin(model: &PotentialModel, z: &[Cplx]) -> Result<f64> {
    if z.len() != model.d() {
        return invalid("droplet_margin: dimension mismatch".to_string());
    }
    match model {
        PotentialModel::Radial { profile, .. } => {
            let r = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            Ok(2.0 - profile.rvp(r))
        }
        PotentialModel::Tensor { factors, .. } => {
            let s: f64 = factors
                .iter()
                .zip(z)
                .map(|(f, c)| f.rvp(c.norm()) / 2.0)
                .sum();
            Ok(1.0 - s)
        }
    }
}

pub fn droplet_contains(model: &PotentialModel, z: &[Cplx]) -> Result<bool> {
    Ok(droplet_margin(model, z)? >= 0.0)
}

/// Value of the pluricomplex obstacle together with the maximizing simplex
/// weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleValue {
    pub value: f64,
    pub tau: Vec<f64>,
}

/// Pluricomplex obstacle function Qcheck(z) = max over simplex weights tau of
/// sum_k planar_obstacle(V_k, tau_k, |z_k|). Equals Q(z) exactly on the
/// droplet. For radial models this is the planar tau = 1 obstacle of |z|.
pub fn pluri_obstacle(model: &PotentialModel, z: &[Cplx]) -> Result<ObstacleValue> {
    if z.len() != model.d() {
        return invalid("pluri_obstacle: dimension mismatch".to_string());
    }
    match model {
        PotentialModel::Radial { profile, .. } => {
            let r = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            Ok(ObstacleValue {
                value: planar_obstacle(profile, 1.0, r)?,
                tau: vec![1.0],
            })
        }
        PotentialModel::Tensor { factors, .. } => {
            let radii: Vec<f64> = z.iter().map(|c| c.norm()).collect();
            // Saturation weights: tau beyond which the k-th obstacle is flat.
            let sat: Vec<f64> = factors
                .iter()
                .zip(&radii)
                .map(|(f, &r)| f.rvp(r) / 2.0)
                .collect();
            let total_sat: f64 = sat.iter().sum();
            if total_sat <= 1.0 {
                // Interior (or boundary): any padding of the saturations
                // attains sum = 1 and the value Q(z).
                let value: f64 = factors.iter().zip(&radii).map(|(f, &r)| f.v(r)).sum();
                let deficit = 1.0 - total_sat;
                let tau: Vec<f64> = sat.iter().map(|&t| t + deficit / model.d() as f64).collect();
                return Ok(ObstacleValue { value, tau });
            }
            // Water-filling: tau_k(lambda) solves 2 log(|z_k|/r_tau) = lambda,
            // i.e. r = |z_k| e^{-lambda/2}, tau = r V'(r) / 2; decreasing in
            // lambda, total > 1 at lambda = 0.
            let tau_of = |lambda: f64| -> Vec<f64> {
                factors
                    .iter()
                    .zip(&radii)
                    .map(|(f, &r)| {
                        if r == 0.0 {
                            0.0
                        } else {
                            let rl = r * (-lambda / 2.0).exp();
                            f.rvp(rl) / 2.0
                        }
                    })
                    .collect()
            };
            let total = |lambda: f64| tau_of(lambda).iter().sum::<f64>();
            let mut hi = 1.0f64;
            let mut t = 0;
            while total(hi) > 1.0 {
                hi *= 2.0;
                t += 1;
                if t > 200 {
                    return numeric("pluri_obstacle level bracket failed".to_string());
                }
            }
            let mut lo = 0.0f64;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if total(mid) > 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let lambda = 0.5 * (lo + hi);
            let tau = tau_of(lambda);
            // Value = sum_k V_k(r_k(lambda)) + lambda * sum tau_k = ... + lambda.
            let mut value = lambda;
            for (f, &r) in factors.iter().zip(&radii) {
                if r > 0.0 {
                    value += f.v(r * (-lambda / 2.0).exp());
                }
            }
            Ok(ObstacleValue { value, tau })
        }
    }
}

/// Edge (or interior) frame: the data needed by the rescaling maps.
#[derive(Debug, Clone)]
pub struct EdgeFrame {
    /// Base point.
    pub z0: Vec<Cplx>,
    /// Unit outward normal (zero vector for interior frames).
    pub normal: Vec<Cplx>,
    /// Complex Hessian of Q at z0.
    pub hessian: DMatrix<Cplx>,
    /// Inverse square root of the Hessian.
    pub inv_sqrt: DMatrix<Cplx>,
    /// det of the Hessian (Monge-Ampere density) at z0.
    pub ma_det: f64,
    /// Canonical unitary: maps the symmetric vector (1,..,1)/sqrt(d) to z0
    /// (radial), or diag(phases) * R (tensor). Identity for interior frames.
    pub u: DMatrix<Cplx>,
    /// Edge weights for tensor frames.
    pub tau: Option<Vec<f64>>,
}

fn gram_schmidt_basis(first: &[Cplx]) -> DMatrix<Cplx> {
    let d = first.len();
    let mut cols: Vec<Vec<Cplx>> = vec![first.to_vec()];
    let mut cand = 0usize;
    while cols.len() < d {
        let mut v = vec![Cplx::new(0.0, 0.0); d];
        v[cand] = Cplx::new(1.0, 0.0);
        cand += 1;
        for c in &cols {
            let ip: Cplx = v.iter().zip(c).map(|(a, b)| b.conj() * a).sum();
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= ip * ci;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            cols.push(v);
        }
        if cand > d {
            break;
        }
    }
    DMatrix::from_fn(d, d, |i, j| cols[j][i])
}

/// Real Householder reflection mapping unit vector a to unit vector b
/// (symmetric, so it also maps b to a). Identity when a == b.
fn householder_real(a: &[f64], b: &[f64]) -> DMatrix<f64> {
    let d = a.len();
    let w: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let ww: f64 = w.iter().map(|x| x * x).sum();
    if ww < 1e-28 {
        return DMatrix::identity(d, d);
    }
    DMatrix::from_fn(d, d, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - 2.0 * w[i] * w[j] / ww
    })
}

/// Edge frame for a radial model at the boundary point in the given
/// direction (normalized internally; must be nonzero).
pub fn edge_frame_radial(model: &PotentialModel, direction: &[Cplx]) -> Result<EdgeFrame> {
    if !model.is_radial() {
        return invalid("edge_frame_radial requires a radial model".to_string());
    }
    let d = model.d();
    if direction.len() != d {
        return invalid("edge_frame_radial: dimension mismatch".to_string());
    }
    let norm = direction.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return invalid("edge_frame_radial: direction must be nonzero".to_string());
    }
    let z0: Vec<Cplx> = direction.iter().map(|c| c / norm).collect();
    let hessian = model.complex_hessian(&z0)?;
    let inv_sqrt = model.hessian_inv_sqrt(&z0)?;
    let ma_det = model.ma_determinant(&z0)?;
    // U = C B^dagger with C, B deterministic orthonormal completions of z0
    // and of the symmetric vector; then U (1,..,1)/sqrt(d) = z0.
    let sym: Vec<Cplx> = vec![Cplx::new(1.0 / (d as f64).sqrt(), 0.0); d];
    let c = gram_schmidt_basis(&z0);
    let b = gram_schmidt_basis(&sym);
    let u = &c * b.adjoint();
    Ok(EdgeFrame {
        normal: z0.clone(),
        z0,
        hessian,
        inv_sqrt,
        ma_det,
        u,
        tau: None,
    })
}

/// Edge frame for a tensor model at the boundary point with edge weights tau
/// (sum 1) and phases angles (theta_k; coordinate k sits at r_{tau_k}
/// e^{i theta_k}).
pub fn edge_frame_tensor(model: &PotentialModel, tau: &[f64], angles: &[f64]) -> Result<EdgeFrame> {
    let factors = match model {
        PotentialModel::Tensor { factors, .. } => factors,
        _ => return invalid("edge_frame_tensor requires a tensor model".to_string()),
    };
    let d = model.d();
    if tau.len() != d || angles.len() != d {
        return invalid("edge_frame_tensor: dimension mismatch".to_string());
    }
    if tau.iter().any(|&t| t < 0.0) {
        return invalid("edge_frame_tensor: tau must be nonnegative".to_string());
    }
    let s: f64 = tau.iter().sum();
    if (s - 1.0).abs() > 1e-10 {
        return invalid(format!("edge_frame_tensor: tau must sum to 1, got {s}"));
    }
    let mut z0 = Vec::with_capacity(d);
    for k in 0..d {
        let r = droplet_radius_of(&factors[k], tau[k])?;
        z0.push(Cplx::from_polar(r, angles[k]));
    }
    let hessian = model.complex_hessian(&z0)?;
    let inv_sqrt = model.hessian_inv_sqrt(&z0)?;
    let ma_det = model.ma_determinant(&z0)?;
    // Outward normal: gradient of the margin deficit, e^{i theta_k}
    // (V'(r_k) + r_k V''(r_k)) / 2 at active coordinates, zero at tau_k = 0.
    let mut normal = vec![Cplx::new(0.0, 0.0); d];
    for k in 0..d {
        if tau[k] > 0.0 {
            let r = z0[k].norm();
            let w = (factors[k].v_prime(r) + r * factors[k].v_second(r)) / 2.0;
            if !w.is_finite() {
                return numeric("edge_frame_tensor: normal weight not finite".to_string());
            }
            normal[k] = Cplx::from_polar(1.0, angles[k]) * w;
        }
    }
    let nn = normal.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if nn <= 0.0 {
        return numeric("edge_frame_tensor: vanishing normal".to_string());
    }
    for c in normal.iter_mut() {
        *c /= nn;
    }
    // U = D R: D carries the per-coordinate phases (1 at tau_k = 0), R is the
    // symmetric Householder reflection sending the active symmetric vector
    // (1/sqrt(l) at active coordinates) to (1,..,1)/sqrt(d).
    let active: Vec<usize> = (0..d).filter(|&k| tau[k] > 0.0).collect();
    let l = active.len() as f64;
    let mut a = vec![0.0f64; d];
    for &k in &active {
        a[k] = 1.0 / l.sqrt();
    }
    let b = vec![1.0 / (d as f64).sqrt(); d];
    let r_mat = householder_real(&a, &b);
    let mut u = DMatrix::zeros(d, d);
    for i in 0..d {
        let phase = if tau[i] > 0.0 {
            Cplx::from_polar(1.0, angles[i])
        } else {
            Cplx::new(1.0, 0.0)
        };
        for j in 0..d {
            u[(i, j)] = phase * Cplx::new(r_mat[(i, j)], 0.0);
        }
    }
    Ok(EdgeFrame {
        z0,
        normal,
        hessian,
        inv_sqrt,
        ma_det,
        u,
        tau: Some(tau.to_vec()),
    })
}

/// Interior frame used by the bulk rescaling: Hessian data at a strictly
/// interior point, no normal, identity unitary.
pub fn interior_frame(model: &PotentialModel, z: &[Cplx]) -> Result<EdgeFrame> {
    if droplet_margin(model, z)? <= 0.0 {
        return invalid("interior_frame requires a point strictly inside the droplet".to_string());
    }
    let d = model.d();
    Ok(EdgeFrame {
        z0: z.to_vec(),
        normal: vec![Cplx::new(0.0, 0.0); d],
        hessian: model.complex_hessian(z)?,
        inv_sqrt: model.hessian_inv_sqrt(z)?,
        ma_det: model.ma_determinant(z)?,
        u: DMatrix::identity(d, d),
        tau: None,
    })
}
