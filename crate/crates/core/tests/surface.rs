use num_complex::Complex64;
use proptest::prelude::*;
use wedge_vortex::surface::{BoundaryPoint, Side, Sheet, Surface, SurfacePoint};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn bank_values_are_limits_of_interior_values() {
    let s = Surface::new(1.1).unwrap();
    for xi in [-3.0, -0.2, 0.1, 0.6, 0.95, 1.02, 1.08, 1.3, 7.0, 400.0] {
        for side in [Side::Plus, Side::Minus] {
            let off = s.sqrt_p(c(xi, side.sign() * 1e-10 * (1.0 + xi.abs())));
            let on = s.sqrt_p_real(xi, side);
            assert!((off - on).norm() < 1e-4 * on.norm().max(1e-3), "{xi} {side:?}: {off} vs {on}");
        }
    }
}

#[test]
fn sign_table() {
    let s = Surface::new(1.1).unwrap();
    assert!(s.sqrt_p_real(-1.0, Side::Plus).re > 0.0);
    assert!(s.sqrt_p_real(0.5, Side::Plus).im < 0.0);
    assert!(s.sqrt_p_real(0.5, Side::Minus).im > 0.0);
    assert!(s.sqrt_p_real(1.05, Side::Plus).re < 0.0);
    assert!(s.sqrt_p_real(2.0, Side::Plus).im > 0.0);
    assert!(s.sqrt_p_real(2.0, Side::Minus).im < 0.0);
}

#[test]
fn glued_banks_share_values() {
    // The upper bank of sheet 1 is glued to the lower bank of sheet 2.
    let s = Surface::new(1.2).unwrap();
    for xi in [0.3, 5.0] {
        let a = s.boundary_site(BoundaryPoint::new(&s, xi, Side::Plus).unwrap(), Sheet::First);
        let b = s.boundary_site(BoundaryPoint::new(&s, xi, Side::Minus).unwrap(), Sheet::Second);
        assert_eq!(a.u, b.u);
    }
}

proptest! {
    #[test]
    fn u_squares_to_p(re in -5.0f64..5.0, im in -5.0f64..5.0, second in proptest::bool::ANY, m in 1.01f64..3.0) {
        prop_assume!(im.abs() > 1e-6);
        let s = Surface::new(m).unwrap();
        let sheet = if second { Sheet::Second } else { Sheet::First };
        let z = c(re, im);
        let u = s.u(SurfacePoint::new(z, sheet));
        prop_assert!((u * u - z * (1.0 - z) * (z - m)).norm() < 1e-12 * (1.0 + z.norm().powi(3)));
    }

    #[test]
    fn conjugate_site_lies_on_the_surface(re in -5.0f64..5.0, im in 0.01f64..5.0, m in 1.01f64..3.0) {
        let s = Surface::new(m).unwrap();
        let site = s.site(SurfacePoint::first(c(re, im)));
        let mirror = s.site(SurfacePoint::new(c(re, -im), Sheet::Second));
        let conj = site.conjugate();
        prop_assert_eq!(conj.sheet, Sheet::Second);
        prop_assert!((conj.u - mirror.u).norm() < 1e-12 * (1.0 + site.u.norm()));
    }

    #[test]
    fn near_m_offsets_agree(d_re in -0.5f64..0.5, d_im in -0.5f64..0.5) {
        prop_assume!(d_im.abs() > 1e-6);
        let s = Surface::new(1.1).unwrap();
        let d = c(d_re, d_im);
        let exact = s.near_m_site(d, Sheet::First, None);
        let direct = s.site(SurfacePoint::first(c(1.1, 0.0) - d));
        prop_assert!((exact.u - direct.u).norm() < 1e-10);
    }
}

#[test]
fn rejects_bad_slits() {
    assert!(Surface::new(1.0).is_err());
    assert!(Surface::new(f64::NAN).is_err());
}
