//! Solution `Phi = X (Psi + Omega)` of the symmetric Riemann-Hilbert problem
//! `Phi+ = G Phi- + g` with `g = 2(pi - alpha)` on `l0'` and zero elsewhere.
//!
//! After `xi = 1/tau` the singular integral `Psi` splits into two Cauchy transforms
//! over `(0, 1/a)`:
//!
//! `Psi = (pi - alpha) t / (2 pi i) [(zeta - zeta0) C_A(t) + i u C_B(t) / (zeta - zeta0)]`
//!
//! with densities `h_A = 1 / ((1 - zeta0 tau) X+)` and
//! `h_B = (1 - zeta0 tau) / (sqrt(tau (1 - tau)(1 - m tau)) X+)`, where `X+` is read on
//! the lower bank of `l0` on the first sheet.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factorization::Factorizer;
use crate::quadrature::{CauchyTransform, DensityKind, LegendreRule, TPoint};
use crate::surface::{Sheet, Side, Site, SurfacePoint};

const POLE_GUARD: f64 = 1e-12;
const DENOMINATOR_GUARD: f64 = 1e-12;

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// Wedge angle in radians, `0 < alpha <= 2 pi`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct WedgeAngle(f64);

impl WedgeAngle {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0 * PI) {
            return Err(Error::domain("rh_solver", format!("wedge angle {alpha} outside (0, 2 pi]")));
        }
        Ok(WedgeAngle(alpha))
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// `pi - alpha`, the forcing amplitude on `l0'`.
    pub fn deficit(self) -> f64 {
        PI - self.0
    }
}

/// Real constants of the rational part `Omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaConstants {
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    /// Imaginary part discarded from the `M4` quadrature.
    pub m4_imag: f64,
}

/// Near-m constants of `Psi` and `exp(-i Phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearMConstants {
    pub lambda0: Complex64,
    pub lambda1: Complex64,
}

#[derive(Debug, Clone)]
pub struct RhSolution {
    factorizer: Factorizer,
    alpha: WedgeAngle,
    a: f64,
    transform_a: CauchyTransform,
    transform_b: CauchyTransform,
    /// Gauss-Legendre weights (in `phi`) with `tau_j` and `1/X+` at the nodes.
    nodes: Vec<(f64, f64, Complex64)>,
    constants: OmegaConstants,
    u_eta1: Complex64,
    u_eta1_bar: Complex64,
    near_m: Option<NearMConstants>,
}

impl RhSolution {
    /// Builds the transforms at `nodes` Gauss-Legendre angles and fixes `M0 .. M4`.
    pub fn new(factorizer: Factorizer, alpha: WedgeAngle, a: f64, nodes: usize) -> Result<Self> {
        let surface = *factorizer.surface();
        let m = surface.m();
        if !(a >= m && a.is_finite()) {
            return Err(Error::domain("rh_solver", format!("vertex preimage a = {a} must satisfy a >= m = {m}")));
        }
        let z0 = factorizer.zeta0();
        let length = 1.0 / a;
        let rule = LegendreRule::new(nodes)?;
        let angles = CauchyTransform::sample_angles(&rule);
        // xi = a / sin^2 phi, so xi - m = (a - m) + a cot^2 phi exactly.
        let inverse_x: Vec<Complex64> = angles
            .par_iter()
            .map(|phi| {
                let cot = phi.cos() / phi.sin();
                let d = -((a - m) + a * cot * cot);
                let site = surface.near_m_site(Complex64::new(d, 0.0), Sheet::First, Some(Side::Minus));
                factorizer.x(&site).map(|x| 1.0 / x)
            })
            .collect::<Result<_>>()?;
        let mut samples_a = Vec::with_capacity(nodes);
        let mut samples_b = Vec::with_capacity(nodes);
        let mut node_data = Vec::with_capacity(nodes);
        for ((phi, inv), w) in angles.iter().zip(&inverse_x).zip(rule.weights()) {
            let (s, c) = phi.sin_cos();
            let tau = length * s * s;
            let slope = length * (2.0 * phi).sin();
            samples_a.push(inv / (1.0 - z0 * tau) * slope);
            // sqrt((L - tau) / (1 - m tau)) equals 1/sqrt(m) at a = m.
            let ratio = if a == m { 1.0 / m.sqrt() } else { (length * c * c / (1.0 - m * length * s * s)).sqrt() };
            samples_b.push(2.0 * (1.0 - z0 * tau) / (1.0 - tau).sqrt() * ratio * inv);
            node_data.push((w * FRAC_PI_4, tau, *inv));
        }
        let transform_a = CauchyTransform::from_samples(length, DensityKind::Plain, rule.clone(), samples_a)?;
        let transform_b = CauchyTransform::from_samples(length, DensityKind::Weighted, rule.clone(), samples_b)?;
        let u_eta1 = surface.sqrt_p(factorizer.eta1());
        let u_eta1_bar = surface.sqrt_p(factorizer.eta1().conj());
        let placeholder = OmegaConstants { m0: 0.0, m1: 0.0, m2: 0.0, m3: 0.0, m4: 0.0, m4_imag: 0.0 };
        let mut sol = RhSolution {
            factorizer,
            alpha,
            a,
            transform_a,
            transform_b,
            nodes: node_data,
            constants: placeholder,
            u_eta1,
            u_eta1_bar,
            near_m: None,
        };
        sol.constants = sol.omega_constants()?;
        if a == m {
            sol.near_m = Some(sol.near_m_constants(&rule)?);
        }
        Ok(sol)
    }

    pub fn factorizer(&self) -> &Factorizer {
        &self.factorizer
    }

    pub fn alpha(&self) -> WedgeAngle {
        self.alpha
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn constants(&self) -> &OmegaConstants {
        &self.constants
    }

    /// `Lambda0`, `Lambda1`; available when `a = m`.
    pub fn near_m(&self) -> Option<NearMConstants> {
        self.near_m
    }

    /// `M4 = (pi - alpha)/(4 pi) int_{l0'} dxi / (v X+)`.
    fn m4_integral(&self) -> Complex64 {
        let m = self.factorizer.surface().m();
        let length = 1.0 / self.a;
        let sum: Complex64 = self
            .nodes
            .iter()
            .map(|(w, tau, inv)| {
                let ratio = if self.a == m {
                    1.0 / m.sqrt()
                } else {
                    ((length - tau) / (1.0 - m * tau)).sqrt()
                };
                2.0 * w * ratio / (1.0 - tau).sqrt() * inv
            })
            .sum();
        -i() * self.alpha.deficit() / (4.0 * PI) * sum
    }

    /// `M4` from the integral, `M2 = -M4`, `M3 = 0`, then `M1`, `M0` from the
    /// condition `Psi + Omega = 0` at `q1`.
    pub fn omega_constants(&self) -> Result<OmegaConstants> {
        let surface = self.factorizer.surface();
        let jac = self.factorizer.jacobi();
        let (z1, e1, z0) = (jac.zeta1, self.factorizer.eta1(), self.factorizer.zeta0());
        let m4c = self.m4_integral();
        let m4 = m4c.re;
        let m2 = -m4;
        let q1 = surface.site(SurfacePoint::new(z1, jac.sheet));
        let u1 = q1.u;
        let psi = self.psi(&q1)?;
        let (r, j) = (psi.re, psi.im);
        let c0 = 2.0 * u1 / (z1 - z0);
        let c1 = (u1 + self.u_eta1) / (z1 - e1);
        let c2 = (u1 - self.u_eta1_bar) / (z1 - e1.conj());
        let denom = c1.im - c2.im;
        if denom.abs() < DENOMINATOR_GUARD {
            return Err(Error::degenerate("rh_solver", format!("J1 - J2 = {denom:.3e} in the M1 equation")));
        }
        let m1 = ((c0.re - c1.re - c2.re) * m2 - j) / denom;
        let m0 = (c2.re - c1.re) * m1 + (c1.im + c2.im - c0.im) * m2 - r;
        Ok(OmegaConstants { m0, m1, m2, m3: 0.0, m4, m4_imag: m4c.im })
    }

    fn near_m_constants(&self, rule: &LegendreRule) -> Result<NearMConstants> {
        let z0 = self.factorizer.zeta0();
        let length = 1.0 / self.a;
        let x_m = self.factorizer.x_at_m();
        // Psi1*(1/m): the bracket vanishes at tau = 1/m, so the transform is finite there.
        let samples: Vec<Complex64> = self
            .nodes
            .iter()
            .zip(CauchyTransform::sample_angles(rule))
            .map(|((_, tau, inv), phi)| {
                let density = (1.0 - z0 * length) / (1.0 - z0 * tau) * inv - 1.0 / x_m;
                density * length * (2.0 * phi).sin()
            })
            .collect();
        let at_end = CauchyTransform::from_samples(length, DensityKind::Plain, rule.clone(), samples)?.value_at_end();
        let deficit = self.alpha.deficit();
        let psi1_star = deficit / (2.0 * PI * i()) * at_end;
        let lambda0 = deficit / 2.0 * (i() - self.a.ln() / PI) + i() * x_m * psi1_star;
        let omega_m = self.omega_at_m();
        let lambda1 = (-lambda0 - i() * x_m * omega_m).exp();
        Ok(NearMConstants { lambda0, lambda1 })
    }

    /// `Omega` at the branch point `m`, where `u = 0`.
    pub fn omega_at_m(&self) -> Complex64 {
        let m = self.factorizer.surface().m();
        let e1 = self.factorizer.eta1();
        let c = &self.constants;
        c.m0 + Complex64::new(c.m1, c.m2) * self.u_eta1 / (m - e1) + Complex64::new(c.m1, -c.m2) * self.u_eta1_bar / (m - e1.conj())
    }

    /// The singular integral with the `dV` kernel. On `l0'` the bank of the site
    /// selects the one-sided limit; the principal value is `psi_pv`.
    pub fn psi(&self, site: &Site) -> Result<Complex64> {
        let zeta = site.zeta;
        let z0 = self.factorizer.zeta0();
        if zeta.norm() == 0.0 {
            return Err(Error::domain("rh_solver", "Psi is evaluated away from the branch point 0"));
        }
        if (zeta - z0).norm() < POLE_GUARD {
            return Err(Error::pole("rh_solver", format!("Psi has a pole at the anchor {z0}")));
        }
        let d = self.factorizer.surface().m_minus(site);
        let m = self.factorizer.surface().m();
        if self.a == m && d.norm() == 0.0 {
            return Err(Error::domain("rh_solver", "Psi is logarithmically singular at the vertex preimage"));
        }
        // zeta - i0 maps to t + i0.
        let point = self.t_point(site, d, site.side.map(Side::flip));
        Ok(self.assemble(site, point))
    }

    /// Principal value of `Psi` at a bank site of `l0'`.
    pub fn psi_pv(&self, site: &Site) -> Result<Complex64> {
        let d = self.factorizer.surface().m_minus(site);
        Ok(self.assemble(site, self.t_point(site, d, None)))
    }

    fn t_point(&self, site: &Site, d: Complex64, side: Option<Side>) -> TPoint {
        let m = self.factorizer.surface().m();
        let t = 1.0 / site.zeta;
        // t - 1/a = ((a - m) + (m - zeta)) / (a zeta)
        let from_end = ((self.a - m) + d) / (self.a * site.zeta);
        TPoint { t, from_end, side }
    }

    fn assemble(&self, site: &Site, point: TPoint) -> Complex64 {
        let z0 = self.factorizer.zeta0();
        let shifted = site.zeta - z0;
        let ca = self.transform_a.eval(point);
        let cb = self.transform_b.eval(point);
        self.alpha.deficit() * point.t / (2.0 * PI * i()) * (shifted * ca + i() * site.u * cb / shifted)
    }

    /// Rational part `Omega` with poles at `p1`, its mirror and over `zeta0`.
    pub fn omega(&self, site: &Site) -> Result<Complex64> {
        let (zeta, u) = (site.zeta, site.u);
        let e1 = self.factorizer.eta1();
        let z0 = self.factorizer.zeta0();
        for pole in [e1, e1.conj(), Complex64::new(z0, 0.0)] {
            if (zeta - pole).norm() < POLE_GUARD * (1.0 + pole.norm()) {
                return Err(Error::pole("rh_solver", format!("Omega has a pole over {pole}")));
            }
        }
        let c = &self.constants;
        Ok(c.m0 + Complex64::new(c.m1, c.m2) * (u + self.u_eta1) / (zeta - e1)
            - Complex64::new(c.m1, -c.m2) * (u - self.u_eta1_bar) / (zeta - e1.conj())
            - 2.0 * i() * c.m2 * u / (zeta - z0))
    }

    /// `Phi = X (Psi + Omega)`.
    pub fn phi(&self, site: &Site) -> Result<Complex64> {
        Ok(self.factorizer.x(site)? * (self.psi(site)? + self.omega(site)?))
    }

    pub fn exp_mi_phi(&self, site: &Site) -> Result<Complex64> {
        Ok((-i() * self.phi(site)?).exp())
    }

    /// Leading term `(m - zeta)^{-1/2 + alpha/(2 pi)} Lambda1` of `exp(-i Phi)` as
    /// `zeta -> m` from below on the first sheet.
    pub fn exp_mi_phi_near_m(&self, d: f64) -> Result<Complex64> {
        let near = self
            .near_m
            .ok_or_else(|| Error::domain("rh_solver", "near-m asymptotics need a = m"))?;
        Ok(d.powf(-0.5 + self.alpha.radians() / (2.0 * PI)) * near.lambda1)
    }

    /// Limit of `X+` at `+inf - i0`, which fixes the logarithmic growth of `Psi` there.
    pub fn x_at_infinity(&self) -> Complex64 {
        self.factorizer.x_at_infinity()
    }

    /// `X+` times the jump of `Psi` across `l0'`; equals `2 (pi - alpha)`.
    pub fn jump_target(&self) -> f64 {
        2.0 * self.alpha.deficit()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::solve_inversion;
    use crate::kernel::KernelConfig;
    use crate::quadrature::Resolution;
    use crate::surface::{BoundaryPoint, Surface};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn solution(m: f64, alpha: f64, a: f64) -> RhSolution {
        let s = Surface::new(m).unwrap();
        let k = KernelConfig::new(&s, -5.0).unwrap();
        let eta1 = c(1.0, 0.5);
        let f = Factorizer::new(s, k, -2.0, eta1, solve_inversion(eta1, m).unwrap(), Resolution::default()).unwrap();
        RhSolution::new(f, WedgeAngle::new(alpha).unwrap(), a, 200).unwrap()
    }

    fn bank(sol: &RhSolution, xi: f64, side: Side, sheet: Sheet) -> Site {
        let s = sol.factorizer().surface();
        s.boundary_site(BoundaryPoint::new(s, xi, side).unwrap(), sheet)
    }

    #[test]
    fn constants_match_reference() {
        let sol = solution(1.1, FRAC_PI_4, 1.1);
        let k = sol.constants();
        assert_eq!(k.m3, 0.0);
        assert_eq!(k.m2, -k.m4);
        assert!(k.m4_imag.abs() < 1e-10);
        assert!((k.m2 - 2.195_193_031_735_376).abs() < 1e-7, "{}", k.m2);
        assert!((k.m1 - 3.044_729_074_217_679).abs() < 1e-7, "{}", k.m1);
        assert!((k.m0 + 1.936_012_092_784_194).abs() < 1e-7, "{}", k.m0);
    }

    #[test]
    fn vanishes_at_q1() {
        let sol = solution(1.1, FRAC_PI_4, 1.1);
        let jac = sol.factorizer().jacobi();
        let q1 = sol.factorizer().surface().site(SurfacePoint::new(jac.zeta1, jac.sheet));
        assert!((sol.psi(&q1).unwrap() + sol.omega(&q1).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn residue_at_anchor_cancels() {
        let sol = solution(1.1, FRAC_PI_4, 1.1);
        let s = sol.factorizer().surface();
        for sheet in [Sheet::First, Sheet::Second] {
            let n = 64;
            let r = 1e-3;
            let (res, scale) = (0..n).fold((c(0.0, 0.0), 0.0f64), |(acc, big), j| {
                let e = c(0.0, 2.0 * PI * (j as f64 + 0.5) / n as f64).exp();
                let site = s.site(SurfacePoint::new(c(-5.0, 0.0) + e * r, sheet));
                let psi = sol.psi(&site).unwrap() * e * r;
                let total = psi + sol.omega(&site).unwrap() * e * r;
                (acc + total / n as f64, big.max(psi.norm()))
            });
            assert!(scale > 1e-3);
            assert!(res.norm() < 1e-8, "{sheet:?}: {res}");
        }
    }

    #[test]
    fn jump_across_l0_prime() {
        let sol = solution(1.1, FRAC_PI_4, 1.1);
        for xi in [1.2, 2.0, 5.0, 40.0] {
            let plus = bank(&sol, xi, Side::Minus, Sheet::First);
            let minus = bank(&sol, xi, Side::Plus, Sheet::Second);
            let x = sol.factorizer().x(&plus).unwrap();
            let jump = sol.psi(&plus).unwrap() - sol.psi(&minus).unwrap();
            assert!((jump * x - sol.jump_target()).norm() < 1e-8, "xi {xi}: {}", jump * x);
            let pv = sol.psi_pv(&plus).unwrap();
            assert!((sol.psi(&plus).unwrap() - pv - sol.jump_target() / 2.0 / x).norm() < 1e-8);
        }
    }

    #[test]
    fn continuous_across_l0_double_prime_and_l1() {
        let sol = solution(1.1, FRAC_PI_4, 1.1);
        for (xi, sheet) in [(1.5, Sheet::First), (8.0, Sheet::First), (0.3, Sheet::First), (0.7, Sheet::Second)] {
            let plus = bank(&sol, xi, Side::Plus, sheet);
            let minus = bank(&sol, xi, Side::Minus, sheet.other());
            let gap = (sol.psi(&plus).unwrap() - sol.psi(&minus).unwrap()).norm();
            assert!(gap < 1e-7, "xi {xi}: {gap}");
        }
    }

    #[test]
    fn boundary_real_parts() {
        let sol = solution(1.1, FRAC_PI_4, 1.1);
        for xi in [1.15, 1.6, 3.0, 25.0] {
            let lower = sol.phi(&bank(&sol, xi, Side::Minus, Sheet::First)).unwrap();
            let upper = sol.phi(&bank(&sol, xi, Side::Plus, Sheet::First)).unwrap();
            assert!((lower.re - sol.alpha().deficit()).abs() < 1e-7, "xi {xi}: {lower}");
            assert!(upper.re.abs() < 1e-7, "xi {xi}: {upper}");
        }
        for xi in [0.1, 0.5, 0.9] {
            for side in [Side::Plus, Side::Minus] {
                assert!(sol.phi(&bank(&sol, xi, side, Sheet::First)).unwrap().im.abs() < 1e-7);
            }
        }
    }

    #[test]
    fn phi_reference_probes() {
        let sol = solution(1.1, FRAC_PI_4, 1.1);
        let s = sol.factorizer().surface();
        let probes = [
            (c(-1.0, 0.5), c(1.070_556_482_096_420_4, -0.515_875_677_440_616_1)),
            (c(2.0, 1.0), c(0.280_142_658_698_686_15, -0.444_627_103_319_874_54)),
        ];
        for (z, want) in probes {
            let got = sol.phi(&s.site(SurfacePoint::first(z))).unwrap();
            assert!((got - want).norm() < 1e-7, "{z}: {got}");
        }
    }

    #[test]
    fn near_m_asymptotics() {
        let sol = solution(1.1, FRAC_PI_4, 1.1);
        let s = sol.factorizer().surface();
        let ratio = |d: f64| {
            let site = s.near_m_site(c(d, 0.0), Sheet::First, None);
            sol.exp_mi_phi(&site).unwrap() / sol.exp_mi_phi_near_m(d).unwrap()
        };
        let (r1, r2) = ((ratio(1e-6) - 1.0).norm(), (ratio(1e-10) - 1.0).norm());
        assert!(r2 < 1e-3 && r2 < r1, "{r1} {r2}");
    }

    #[test]
    fn omega_bounded_and_real_on_contour() {
        let sol = solution(1.1, FRAC_PI_4, 1.1);
        let s = sol.factorizer().surface();
        let far = |r: f64| sol.omega(&s.site(SurfacePoint::first(c(r, r)))).unwrap();
        // Omega tends to M0 with an O(zeta^{-1/2}) correction.
        let m0 = sol.constants().m0;
        let scaled = |r: f64| (far(r) - m0).norm() * (2.0f64.sqrt() * r).sqrt();
        let (s6, s10) = (scaled(1e6), scaled(1e10));
        assert!((s6 - s10).abs() < 1e-2 * s10, "{s6} {s10}");
        assert!((far(1e14) - m0).norm() < 1e-5);
        for (xi, side) in [(0.4, Side::Plus), (0.8, Side::Minus), (1.7, Side::Plus), (9.0, Side::Minus)] {
            assert!(sol.omega(&bank(&sol, xi, side, Sheet::First)).unwrap().im.abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_vertex() {
        let s = Surface::new(1.1).unwrap();
        let k = KernelConfig::new(&s, -5.0).unwrap();
        let eta1 = c(1.0, 0.5);
        let f = Factorizer::new(s, k, -2.0, eta1, solve_inversion(eta1, 1.1).unwrap(), Resolution::default()).unwrap();
        assert!(RhSolution::new(f, WedgeAngle::new(1.0).unwrap(), 1.0, 64).is_err());
        assert!(WedgeAngle::new(7.0).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn symmetric(re in -4.0f64..4.0, im in 0.05f64..3.0, second in proptest::bool::ANY) {
            let sol = solution(1.1, FRAC_PI_4, 1.1);
            let sheet = if second { Sheet::Second } else { Sheet::First };
            let site = sol.factorizer().surface().site(SurfacePoint::new(c(re, im), sheet));
            let a = sol.phi(&site).unwrap();
            let b = sol.phi(&site.conjugate()).unwrap();
            proptest::prop_assert!((a - b.conj()).norm() < 1e-8 * (1.0 + a.norm()));
        }
    }
}
