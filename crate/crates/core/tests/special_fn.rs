mod common;

use std::f64::consts::FRAC_PI_2;

use common::{adaptive, c};
use proptest::prelude::*;
use wedge_vortex::special_fn::{elliptic_e, elliptic_k, elliptic_kprime, jacobi_sncndn, jacobi_sn, sncndn_real, Modulus};

fn k_quadrature(k: f64) -> f64 {
    adaptive(&|t: f64| c(1.0 / (1.0 - (k * t.sin()).powi(2)).sqrt(), 0.0), 0.0, FRAC_PI_2, 1e-14).re
}

fn e_quadrature(k: f64) -> f64 {
    adaptive(&|t: f64| c((1.0 - (k * t.sin()).powi(2)).sqrt(), 0.0), 0.0, FRAC_PI_2, 1e-14).re
}

/// Incomplete integral `F(phi, k)`.
fn f_quadrature(phi: f64, k: f64) -> f64 {
    adaptive(&|t: f64| c(1.0 / (1.0 - (k * t.sin()).powi(2)).sqrt(), 0.0), 0.0, phi, 1e-14).re
}

#[test]
fn agm_matches_quadrature() {
    for k in [0.05, 0.3, 0.7, 1.1f64.powf(-0.5), 0.99] {
        let modulus = Modulus::new(k).unwrap();
        let (kk, ee) = (elliptic_k(modulus), elliptic_e(modulus));
        assert!((kk - k_quadrature(k)).abs() < 1e-12 * kk, "K({k})");
        assert!((ee - e_quadrature(k)).abs() < 1e-12 * ee, "E({k})");
    }
}

#[test]
fn slit_modulus_reference_values() {
    let k = Modulus::from_slit(1.1).unwrap();
    assert!((k.k() - 0.953_462_589_245_592_4).abs() < 1e-15);
    assert!((elliptic_k(k) - k_quadrature(k.k())).abs() < 1e-12);
    assert!((elliptic_kprime(k) - k_quadrature(k.kprime())).abs() < 1e-12);
}

proptest! {
    #[test]
    fn legendre_relation(k in 0.01f64..0.999) {
        let m = Modulus::new(k).unwrap();
        let mc = m.complementary();
        let (kk, ee, kp, ep) = (elliptic_k(m), elliptic_e(m), elliptic_k(mc), elliptic_e(mc));
        prop_assert!((ee * kp + ep * kk - kk * kp - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn sn_inverts_the_incomplete_integral(phi in 0.01f64..1.5, k in 0.05f64..0.98) {
        let m = Modulus::new(k).unwrap();
        let (sn, cn, dn) = sncndn_real(f_quadrature(phi, k), m);
        prop_assert!((sn - phi.sin()).abs() < 1e-11);
        prop_assert!((cn - phi.cos()).abs() < 1e-11);
        prop_assert!((dn - (1.0 - (k * phi.sin()).powi(2)).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn complex_identities(re in -3.0f64..3.0, im in -1.5f64..1.5, k in 0.1f64..0.97) {
        let m = Modulus::new(k).unwrap();
        let (sn, cn, dn) = jacobi_sncndn(c(re, im), m).unwrap();
        prop_assume!(sn.norm() < 1e6);
        let scale = 1.0 + sn.norm_sqr();
        prop_assert!((sn * sn + cn * cn - 1.0).norm() < 1e-10 * scale);
        prop_assert!((k * k * sn * sn + dn * dn - 1.0).norm() < 1e-10 * scale);
    }
}

#[test]
fn imaginary_transformation() {
    // sn(i y, k) = i sn(y, k') / cn(y, k').
    let m = Modulus::from_slit(1.2).unwrap();
    for y in [0.1, 0.7, 1.3] {
        let (s, cn, _) = sncndn_real(y, m.complementary());
        let got = jacobi_sn(c(0.0, y), m).unwrap();
        assert!((got - c(0.0, s / cn)).norm() < 1e-12, "{y}: {got}");
    }
}

#[test]
fn periodicity() {
    let m = Modulus::from_slit(1.5).unwrap();
    let (kk, kp) = (elliptic_k(m), elliptic_kprime(m));
    let z = c(0.3, 0.2);
    let sn = jacobi_sn(z, m).unwrap();
    assert!((jacobi_sn(z + 2.0 * kk, m).unwrap() + sn).norm() < 1e-11);
    assert!((jacobi_sn(z + c(0.0, 2.0 * kp), m).unwrap() - sn).norm() < 1e-11);
    assert!((jacobi_sn(c(kk, 0.0), m).unwrap() - 1.0).norm() < 1e-12);
}
