//! Property-based invariants: log-domain arithmetic, special-function
//! reflections, kernel symmetries, and droplet monotonicity.

use bergkern::kernels::KernelJob;
use bergkern::logdomain::{LogComplex, LogReal};
use bergkern::potentials::{droplet_radius_of, PolyTerm, PotentialModel, RadialProfile};
use bergkern::specfun::erfc_complex;
use bergkern::Cplx;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn logreal_mul_matches_f64(a in 1e-6f64..1e6, b in 1e-6f64..1e6) {
        let la = LogReal::from_f64(a);
        let lb = LogReal::from_f64(b);
        prop_assert!(close(la.mul(&lb).ln, (a * b).ln(), 1e-12));
    }

    #[test]
    fn logcomplex_roundtrip(re in -50.0f64..50.0, im in -50.0f64..50.0) {
        let z = Cplx::new(re, im);
        prop_assume!(z.norm() > 1e-12);
        let l = LogComplex::from_complex(z);
        prop_assert!((l.to_complex() - z).norm() <= 1e-12 * z.norm());
    }

    #[test]
    fn logcomplex_mul_is_complex_mul(
        re1 in -5.0f64..5.0, im1 in -5.0f64..5.0,
        re2 in -5.0f64..5.0, im2 in -5.0f64..5.0,
    ) {
        let a = Cplx::new(re1, im1);
        let b = Cplx::new(re2, im2);
        prop_assume!(a.norm() > 1e-6 && b.norm() > 1e-6);
        let got = LogComplex::from_complex(a).mul(&LogComplex::from_complex(b));
        prop_assert!((got.to_complex() - a * b).norm() <= 1e-10 * (a * b).norm());
    }

    #[test]
    fn erfc_reflection(re in -4.0f64..4.0, im in -4.0f64..4.0) {
        let z = Cplx::new(re, im);
        let plus = erfc_complex(z).unwrap();
        let minus = erfc_complex(-z).unwrap();
        let sum = plus + minus;
        prop_assert!(
            (sum - Cplx::new(2.0, 0.0)).norm() <= 1e-9 * (1.0 + plus.norm()),
            "erfc(z)+erfc(-z) = {sum} at z = {z}"
        );
    }

    #[test]
    fn droplet_radius_monotone_in_tau(
        c2 in 0.1f64..2.0,
        t1 in 0.05f64..0.95,
        t2 in 0.05f64..0.95,
    ) {
        let profile = RadialProfile::Polynomial(vec![
            PolyTerm { k: 1, c: 1.0 },
            PolyTerm { k: 2, c: c2 },
        ]);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let r_lo = droplet_radius_of(&profile, lo).unwrap();
        let r_hi = droplet_radius_of(&profile, hi).unwrap();
        prop_assert!(r_lo <= r_hi + 1e-12, "r({lo}) = {r_lo} > r({hi}) = {r_hi}");
    }

    #[test]
    fn kernel_hermitian_and_diag_positive(
        zr in -1.2f64..1.2, zi in -1.2f64..1.2,
        wr in -1.2f64..1.2, wi in -1.2f64..1.2,
    ) {
        let job = KernelJob::new(PotentialModel::ginibre(1), 24).unwrap();
        let z = [Cplx::new(zr, zi)];
        let w = [Cplx::new(wr, wi)];
        let kzw = job.kernel(&z, &w).unwrap();
        let kwz = job.kernel(&w, &z).unwrap();
        if !kzw.is_zero() {
            prop_assert!(close(kzw.ln, kwz.ln, 1e-9));
            let mut dphi = kzw.phase + kwz.phase;
            while dphi > std::f64::consts::PI { dphi -= 2.0 * std::f64::consts::PI; }
            while dphi < -std::f64::consts::PI { dphi += 2.0 * std::f64::consts::PI; }
            prop_assert!(dphi.abs() <= 1e-9, "phases not conjugate: {dphi}");
        }
        let kzz = job.kernel(&z, &z).unwrap();
        prop_assert!(kzz.phase.abs() <= 1e-9 && kzz.ln.is_finite());
        // Cauchy-Schwarz
        let kww = job.kernel(&w, &w).unwrap();
        prop_assert!(2.0 * kzw.ln <= kzz.ln + kww.ln + 1e-9);
    }
}
