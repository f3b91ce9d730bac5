//! The elliptic surface `u^2 = p(zeta) = zeta (1 - zeta)(zeta - m)` with cuts
//! `l0 = [m, inf)` and `l1 = [0, 1]`.
//!
//! The branch of `p^{1/2}` is `-sqrt(zeta) sqrt(zeta - 1) sqrt(m - zeta)` with
//! principal roots. On the real axis it takes the values
//!
//! | interval      | upper bank       | lower bank       |
//! |---------------|------------------|------------------|
//! | `xi > m`      | `+i sqrt(|p|)`   | `-i sqrt(|p|)`   |
//! | `1 < xi < m`  | `-sqrt(|p|)`     | `-sqrt(|p|)`     |
//! | `0 < xi < 1`  | `-i sqrt(|p|)`   | `+i sqrt(|p|)`   |
//! | `xi < 0`      | `+sqrt(|p|)`     | `+sqrt(|p|)`     |

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Sheet of the two-sheeted cover; `u = +p^{1/2}` on the first, `-p^{1/2}` on the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Sheet {
    First,
    Second,
}

impl Sheet {
    pub fn sign(self) -> f64 {
        match self {
            Sheet::First => 1.0,
            Sheet::Second => -1.0,
        }
    }

    pub fn other(self) -> Sheet {
        match self {
            Sheet::First => Sheet::Second,
            Sheet::Second => Sheet::First,
        }
    }
}

/// Bank of a cut: `Plus` is the limit from the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contour {
    L0,
    L1,
}

/// Sub-arcs of the contour: `l0'` is `[a, inf)` on the lower bank and carries the
/// forcing of the boundary-value problem; `l0''` is the rest of `l0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arc {
    L0Prime,
    L0DoublePrime,
    L1,
}

/// A point on the surface away from the cuts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub zeta: Complex64,
    pub sheet: Sheet,
}

impl SurfacePoint {
    pub fn new(zeta: Complex64, sheet: Sheet) -> Self {
        SurfacePoint { zeta, sheet }
    }

    pub fn first(zeta: Complex64) -> Self {
        SurfacePoint { zeta, sheet: Sheet::First }
    }

    /// The symmetric point `(conj zeta, opposite sheet)`.
    pub fn conjugate(self) -> Self {
        SurfacePoint { zeta: self.zeta.conj(), sheet: self.sheet.other() }
    }
}

/// A point on one bank of a cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub xi: f64,
    pub side: Side,
    pub contour: Contour,
}

impl BoundaryPoint {
    pub fn new(surface: &Surface, xi: f64, side: Side) -> Result<Self> {
        match surface.cut_of(xi) {
            Some(contour) => Ok(BoundaryPoint { xi, side, contour }),
            None => Err(Error::domain("surface", format!("{xi} is not on a cut"))),
        }
    }

    /// Which sub-arc this point belongs to, given the vertex preimage `a`.
    pub fn arc(&self, a: f64) -> Arc {
        match self.contour {
            Contour::L1 => Arc::L1,
            Contour::L0 if self.side == Side::Minus && self.xi >= a => Arc::L0Prime,
            Contour::L0 => Arc::L0DoublePrime,
        }
    }
}

/// Evaluation site: an affix together with the value of `u` there and, on a cut,
/// the bank the value is taken from. `from_m` optionally carries `m - zeta`
/// exactly for points very close to the branch point `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub zeta: Complex64,
    pub u: Complex64,
    pub sheet: Sheet,
    pub side: Option<Side>,
    pub from_m: Option<Complex64>,
}

impl Site {
    /// The symmetric site `(conj zeta, -conj u)` on the other sheet and bank.
    pub fn conjugate(&self) -> Site {
        Site {
            zeta: self.zeta.conj(),
            u: -self.u.conj(),
            sheet: self.sheet.other(),
            side: self.side.map(Side::flip),
            from_m: self.from_m.map(|d| d.conj()),
        }
    }
}

/// Surface parameters; `m > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surface {
    m: f64,
}

impl Surface {
    pub fn new(m: f64) -> Result<Self> {
        if m.is_finite() && m > 1.0 {
            Ok(Surface { m })
        } else {
            Err(Error::domain("surface", format!("slit parameter m = {m} must exceed 1")))
        }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn p(&self, z: Complex64) -> Complex64 {
        z * (1.0 - z) * (z - self.m)
    }

    pub fn abs_p_real(&self, xi: f64) -> f64 {
        (xi * (1.0 - xi) * (xi - self.m)).abs()
    }

    /// Cut containing the real point `xi`, if any (branch points included).
    pub fn cut_of(&self, xi: f64) -> Option<Contour> {
        if xi >= self.m {
            Some(Contour::L0)
        } else if (0.0..=1.0).contains(&xi) {
            Some(Contour::L1)
        } else {
            None
        }
    }

    /// `p^{1/2}` on the real axis; `side` matters only on the cuts.
    pub fn sqrt_p_real(&self, xi: f64, side: Side) -> Complex64 {
        let r = self.abs_p_real(xi).sqrt();
        if xi > self.m {
            Complex64::new(0.0, side.sign() * r)
        } else if xi > 1.0 {
            Complex64::new(-r, 0.0)
        } else if xi > 0.0 {
            Complex64::new(0.0, -side.sign() * r)
        } else {
            Complex64::new(r, 0.0)
        }
    }

    /// `p^{1/2}` at a complex point. Real points on a cut get the upper-bank value.
    pub fn sqrt_p(&self, z: Complex64) -> Complex64 {
        if z.im == 0.0 {
            return self.sqrt_p_real(z.re, Side::Plus);
        }
        -z.sqrt() * (z - 1.0).sqrt() * (self.m - z).sqrt()
    }

    /// `p^{1/2}` at `zeta = m - d` with the offset `d` known exactly.
    pub fn sqrt_p_near_m(&self, d: Complex64, side: Option<Side>) -> Complex64 {
        let z = Complex64::new(self.m, 0.0) - d;
        if d.im == 0.0 {
            let r = (z.re * (z.re - 1.0) * d.re.abs()).sqrt();
            return if d.re < 0.0 {
                Complex64::new(0.0, side.unwrap_or(Side::Plus).sign() * r)
            } else {
                Complex64::new(-r, 0.0)
            };
        }
        -z.sqrt() * (z - 1.0).sqrt() * d.sqrt()
    }

    pub fn u(&self, point: SurfacePoint) -> Complex64 {
        point.sheet.sign() * self.sqrt_p(point.zeta)
    }

    /// Site for an interior point; a real affix on a cut is read from the upper bank.
    pub fn site(&self, point: SurfacePoint) -> Site {
        let z = point.zeta;
        let side = if z.im == 0.0 && self.cut_of(z.re).is_some() { Some(Side::Plus) } else { None };
        Site { zeta: z, u: self.u(point), sheet: point.sheet, side, from_m: None }
    }

    /// Site on a bank of a cut, viewed from `sheet`.
    pub fn boundary_site(&self, bp: BoundaryPoint, sheet: Sheet) -> Site {
        Site {
            zeta: Complex64::new(bp.xi, 0.0),
            u: sheet.sign() * self.sqrt_p_real(bp.xi, bp.side),
            sheet,
            side: Some(bp.side),
            from_m: None,
        }
    }

    /// Site at `m - d` with the offset kept exactly. A negative real `d` lies on `l0`
    /// and needs a bank.
    pub fn near_m_site(&self, d: Complex64, sheet: Sheet, side: Option<Side>) -> Site {
        let side = if d.im == 0.0 && d.re < 0.0 { Some(side.unwrap_or(Side::Plus)) } else { None };
        Site {
            zeta: Complex64::new(self.m, 0.0) - d,
            u: sheet.sign() * self.sqrt_p_near_m(d, side),
            sheet,
            side,
            from_m: Some(d),
        }
    }

    /// `m - zeta`, exact when the site carries it.
    pub fn m_minus(&self, site: &Site) -> Complex64 {
        site.from_m.unwrap_or(Complex64::new(self.m, 0.0) - site.zeta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn table_examples() {
        let s = Surface::new(2.0).unwrap();
        assert!((s.sqrt_p(c(-1.0, 0.0)) - 6f64.sqrt()).norm() < 1e-14);
        assert!((s.sqrt_p(c(1.5, 0.0)) + 0.375f64.sqrt()).norm() < 1e-14);
        let up = s.sqrt_p_real(3.0, Side::Plus);
        assert!((up - c(0.0, 6f64.sqrt())).norm() < 1e-14);
        let pt = SurfacePoint::new(c(-1.0, 0.0), Sheet::Second);
        assert!((s.u(pt) + 6f64.sqrt()).norm() < 1e-14);
        assert_eq!(s.sqrt_p(c(2.0, 0.0)), c(0.0, 0.0));
        assert_eq!(s.sqrt_p(c(0.0, 0.0)).norm(), 0.0);
    }

    #[test]
    fn formula_matches_table_on_all_lines() {
        let s = Surface::new(1.7).unwrap();
        let eps = 1e-11;
        for &xi in &[-3.0, -0.2, 0.3, 0.8, 1.2, 1.6, 2.5, 40.0] {
            for side in [Side::Plus, Side::Minus] {
                let z = c(xi, side.sign() * eps);
                let formula = -z.sqrt() * (z - 1.0).sqrt() * (s.m() - z).sqrt();
                let table = s.sqrt_p_real(xi, side);
                assert!((formula - table).norm() < 1e-5, "xi {xi} side {side:?}");
            }
        }
    }

    #[test]
    fn near_m_offsets_agree_with_direct() {
        let s = Surface::new(1.1).unwrap();
        for d in [c(0.03, 0.0), c(-0.02, 0.0), c(0.01, 0.02), c(-0.01, -0.03)] {
            let side = if d.im == 0.0 && d.re < 0.0 { Some(Side::Minus) } else { None };
            let exact = s.sqrt_p_near_m(d, side);
            let z = c(1.1, 0.0) - d;
            let direct = match side {
                Some(sd) => s.sqrt_p_real(z.re, sd),
                None => s.sqrt_p(z),
            };
            assert!((exact - direct).norm() < 1e-13);
        }
    }

    #[test]
    fn conjugate_point_involution() {
        let p = SurfacePoint::new(c(0.5, 0.5), Sheet::First);
        let q = p.conjugate();
        assert_eq!(q.zeta, c(0.5, -0.5));
        assert_eq!(q.sheet, Sheet::Second);
        assert_eq!(q.conjugate(), p);
        let s = Surface::new(1.1).unwrap();
        assert!((s.u(q) + s.u(p).conj()).norm() < 1e-12);
    }

    #[test]
    fn arcs() {
        let s = Surface::new(1.1).unwrap();
        let bp = BoundaryPoint::new(&s, 2.0, Side::Minus).unwrap();
        assert_eq!(bp.arc(1.1), Arc::L0Prime);
        assert_eq!(bp.arc(3.0), Arc::L0DoublePrime);
        let bp = BoundaryPoint::new(&s, 2.0, Side::Plus).unwrap();
        assert_eq!(bp.arc(1.1), Arc::L0DoublePrime);
        assert_eq!(BoundaryPoint::new(&s, 0.5, Side::Plus).unwrap().arc(1.1), Arc::L1);
        assert!(BoundaryPoint::new(&s, 1.05, Side::Plus).is_err());
        assert!(Surface::new(1.0).is_err());
    }

    proptest! {
        #[test]
        fn u_squared_is_p(re in -5.0f64..5.0, im in -5.0f64..5.0, m in 1.01f64..4.0) {
            prop_assume!(im.abs() > 1e-6);
            let s = Surface::new(m).unwrap();
            let z = c(re, im);
            let p = s.p(z);
            let u = s.sqrt_p(z);
            prop_assert!((u * u - p).norm() <= 1e-12 * (1.0 + p.norm()));
        }

        #[test]
        fn continuous_off_cuts(xi in prop_oneof![-6.0f64..-0.01, 1.01f64..1.09]) {
            let s = Surface::new(1.1).unwrap();
            let up = s.sqrt_p(c(xi, 1e-8));
            let dn = s.sqrt_p(c(xi, -1e-8));
            prop_assert!((up - dn).norm() < 1e-6);
        }

        #[test]
        fn jump_across_cuts(xi in prop_oneof![0.01f64..0.99, 1.11f64..50.0]) {
            let s = Surface::new(1.1).unwrap();
            let up = s.sqrt_p_real(xi, Side::Plus);
            let dn = s.sqrt_p_real(xi, Side::Minus);
            prop_assert!((up + dn).norm() < 1e-12 * (1.0 + up.norm()));
            prop_assert!((s.sqrt_p(c(xi, 1e-9)) - up).norm() < 1e-4 * (1.0 + up.norm()));
        }

        #[test]
        fn conjugate_symmetry(re in -3.0f64..3.0, im in 0.01f64..3.0) {
            let s = Surface::new(1.3).unwrap();
            let p = SurfacePoint::first(c(re, im));
            prop_assert!((s.u(p.conjugate()) + s.u(p).conj()).norm() < 1e-12 * (1.0 + s.u(p).norm()));
        }
    }
}
