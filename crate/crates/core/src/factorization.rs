//! Factorization function `X(zeta, u)` with `X+ = G X-` on the contour
//! (`G = -1` on `l0`, `G = 1` on `l1`), a simple zero at `p1 = (eta1, u(eta1))`
//! and a simple pole at `q1`.
//!
//! `X = lambda exp{ u/(i(zeta - zeta0)) (1/2 - 2 n_a) J1 - (J2 + J3)/2 }` where `J1`
//! is the integral over `l0` after `xi = 1/tau` and `J2`, `J3` run along the path
//! `gamma` from `p1` to `q1` and its mirror image.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jacobi::JacobiSolution;
use crate::kernel::{bracket, KernelConfig};
use crate::quadrature::{bernstein_rho, CauchyTransform, ChebyshevRule, DensityKind, LegendreRule, PvSeries, Resolution, TPoint, DECAY_GATE};
use crate::surface::{Sheet, Site, Surface};

const POLE_GUARD: f64 = 1e-12;
const LEG_PROXIMITY: f64 = 1e-8;
/// Relative radius `|zeta - m| < NEAR_M (m - 1)` inside which `J1` uses the split form.
pub const NEAR_M: f64 = 0.05;

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// One straight leg of `gamma`, sampled once with the first-sheet branch values.
#[derive(Debug, Clone)]
struct Leg {
    start: Complex64,
    end: Complex64,
    nodes: Vec<Complex64>,
    weights: Vec<Complex64>,
    v: Vec<Complex64>,
}

impl Leg {
    fn straight(surface: &Surface, start: Complex64, end: Complex64, rule: &LegendreRule) -> Leg {
        let half = 0.5 * (end - start);
        let nodes: Vec<Complex64> = rule.nodes().iter().map(|x| start + half * (1.0 + x)).collect();
        let weights = rule.weights().iter().map(|w| half * *w).collect();
        let v = nodes.iter().map(|xi| surface.sqrt_p(*xi)).collect();
        Leg { start, end, nodes, weights, v }
    }

    /// Leg from the branch point 0 with `xi = end s^2`.
    fn from_origin(surface: &Surface, end: Complex64, rule: &LegendreRule) -> Leg {
        let s: Vec<f64> = rule.nodes().iter().map(|x| 0.5 * (1.0 + x)).collect();
        let nodes: Vec<Complex64> = s.iter().map(|s| end * s * s).collect();
        let weights = s.iter().zip(rule.weights()).map(|(s, w)| end * (s * w)).collect();
        let v = nodes.iter().map(|xi| surface.sqrt_p(*xi)).collect();
        Leg { start: Complex64::new(0.0, 0.0), end, nodes, weights, v }
    }

    fn distance(&self, z: Complex64) -> f64 {
        let dir = self.end - self.start;
        let s = ((z - self.start) * dir.conj()).re / dir.norm_sqr();
        (z - (self.start + dir * s.clamp(0.0, 1.0))).norm()
    }

    /// `int bracket dxi / (xi - zeta)`. Close to the leg the value of the bracket at
    /// `xi = zeta` is subtracted and integrated exactly.
    fn integral(&self, surface: &Surface, zeta: Complex64, u: Complex64, zeta0: f64, sign: f64) -> Complex64 {
        let near = self.distance(zeta) < 0.5 * (self.end - self.start).norm();
        let local = if near { 1.0 + sign * u / surface.sqrt_p(zeta) } else { Complex64::new(0.0, 0.0) };
        let body: Complex64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.v)
            .filter(|((xi, _), _)| (**xi - zeta).norm() > 1e-14)
            .map(|((xi, w), v)| w * (bracket(*xi, *v, zeta, u, zeta0, sign) - local) / (xi - zeta))
            .sum();
        if near {
            body + local * ((self.end - zeta) / (self.start - zeta)).ln()
        } else {
            body
        }
    }
}

#[derive(Debug, Clone)]
struct LegTerm {
    leg: Leg,
    weight: f64,
    sign: f64,
}

/// Immutable factorization state for one set of auxiliary points.
#[derive(Debug, Clone)]
pub struct Factorizer {
    surface: Surface,
    kernel: KernelConfig,
    delta: f64,
    eta1: Complex64,
    jacobi: JacobiSolution,
    cheb: ChebyshevRule,
    taus: Vec<f64>,
    ftilde: Vec<f64>,
    series: PvSeries,
    transform: CauchyTransform,
    terms: Vec<LegTerm>,
}

impl Factorizer {
    pub fn new(
        surface: Surface,
        kernel: KernelConfig,
        delta: f64,
        eta1: Complex64,
        jacobi: JacobiSolution,
        res: Resolution,
    ) -> Result<Self> {
        let zeta0 = kernel.zeta0();
        if !(zeta0 < delta && delta < 0.0) {
            return Err(Error::domain("factorization", format!("need zeta0 < delta < 0, got {zeta0}, {delta}")));
        }
        if eta1.im == 0.0 || jacobi.zeta1.im == 0.0 {
            return Err(Error::path("factorization", "gamma endpoints must leave the real axis"));
        }
        let m = surface.m();
        let length = 1.0 / m;
        let ft = move |tau: f64| (1.0 - zeta0 * tau) / (1.0 - tau).sqrt();
        let cheb = ChebyshevRule::new(res.nodes)?;
        let taus: Vec<f64> = cheb.mapped_nodes(length).collect();
        let ftilde = taus.iter().map(|t| ft(*t)).collect();
        let series = PvSeries::build(|t| ft(t).into(), length, res.nodes, res.series_terms)?;
        if series.tail_ratio() > DECAY_GATE {
            return Err(Error::degenerate(
                "factorization",
                format!("J1 series tail ratio {:.2e} fails the decay gate", series.tail_ratio()),
            ));
        }
        let transform = CauchyTransform::new(length, DensityKind::Weighted, res.nodes, |phi| {
            (2.0 * ft(length * phi.sin().powi(2))).into()
        })?;
        let rule = LegendreRule::new(res.leg_nodes)?;
        let (z1, e1) = (jacobi.zeta1, eta1);
        let d = Complex64::new(delta, 0.0);
        let terms = match jacobi.sheet {
            Sheet::First => vec![
                LegTerm { leg: Leg::straight(&surface, d, z1, &rule), weight: 1.0, sign: 1.0 },
                LegTerm { leg: Leg::straight(&surface, d, e1, &rule), weight: -1.0, sign: 1.0 },
                LegTerm { leg: Leg::straight(&surface, d, z1.conj(), &rule), weight: 1.0, sign: -1.0 },
                LegTerm { leg: Leg::straight(&surface, d, e1.conj(), &rule), weight: -1.0, sign: -1.0 },
            ],
            // gamma runs p1 -> 0 on the first sheet and 0 -> q1 on the second.
            Sheet::Second => vec![
                LegTerm { leg: Leg::from_origin(&surface, z1, &rule), weight: 1.0, sign: -1.0 },
                LegTerm { leg: Leg::from_origin(&surface, e1, &rule), weight: -1.0, sign: 1.0 },
                LegTerm { leg: Leg::from_origin(&surface, z1.conj(), &rule), weight: 1.0, sign: 1.0 },
                LegTerm { leg: Leg::from_origin(&surface, e1.conj(), &rule), weight: -1.0, sign: -1.0 },
            ],
        };
        Ok(Factorizer { surface, kernel, delta, eta1, jacobi, cheb, taus, ftilde, series, transform, terms })
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn zeta0(&self) -> f64 {
        self.kernel.zeta0()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eta1(&self) -> Complex64 {
        self.eta1
    }

    pub fn jacobi(&self) -> &JacobiSolution {
        &self.jacobi
    }

    /// Chebyshev series of `F~` used for principal values on `l0`.
    pub fn j1_series(&self) -> &PvSeries {
        &self.series
    }

    /// `J1` off `l0` by the Gauss-Chebyshev rule.
    pub fn j1_gauss(&self, zeta: Complex64) -> Complex64 {
        let sum: Complex64 = self.taus.iter().zip(&self.ftilde).map(|(t, f)| *f / (1.0 - zeta * t)).sum();
        sum * (self.cheb.weight() / self.surface.m().sqrt())
    }

    /// `J1` at a site: the principal value on `l0`, the regular integral elsewhere.
    pub fn j1(&self, site: &Site) -> Complex64 {
        let m = self.surface.m();
        let zeta = site.zeta;
        let d = self.surface.m_minus(site);
        let near_m = d.norm() < NEAR_M * (m - 1.0);
        let length = 1.0 / m;
        let t = 1.0 / zeta;
        let point = TPoint { t, from_end: d / (zeta * m), side: None };
        let scale = -t / m.sqrt();
        if is_on_l0(site, m) {
            let pv = if near_m { self.transform.eval(point) } else { self.series.eval_pv(t.re).unwrap_or_else(|_| self.transform.eval(point)) };
            return scale * pv;
        }
        let far = zeta.norm() == 0.0 || bernstein_rho(t, 0.0, length).powi(2 * self.cheb.len() as i32) > 1e16;
        if far && !near_m {
            self.j1_gauss(zeta)
        } else {
            scale * self.transform.eval(point)
        }
    }

    /// Leg integral `j(zeta, u; eta) = int_delta^eta bracket dxi / (xi - zeta)` with
    /// the bracket sign `sign`.
    pub fn j_pm(&self, site: &Site, eta: Complex64, sign: f64) -> Result<Complex64> {
        if eta == Complex64::new(self.delta, 0.0) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let rule = LegendreRule::new(self.cheb.len())?;
        let leg = Leg::straight(&self.surface, Complex64::new(self.delta, 0.0), eta, &rule);
        if leg.distance(site.zeta) < LEG_PROXIMITY {
            return Err(Error::path("factorization", format!("{} lies on the leg to {eta}", site.zeta)));
        }
        Ok(leg.integral(&self.surface, site.zeta, site.u, self.zeta0(), sign))
    }

    /// `J2 + J3` at a site.
    pub fn path_integrals(&self, site: &Site) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.weight * t.leg.integral(&self.surface, site.zeta, site.u, self.zeta0(), t.sign))
            .sum()
    }

    /// `X` at a site; second-sheet sites are mapped through the symmetry
    /// `X(zeta, u) = conj X(conj zeta, -conj u)`.
    pub fn x(&self, site: &Site) -> Result<Complex64> {
        if site.sheet == Sheet::Second {
            return self.x(&site.conjugate()).map(|x| x.conj());
        }
        self.x_first_sheet(site)
    }

    /// First-sheet evaluation without the symmetry shortcut; also accepts
    /// second-sheet sites, which exercises the raw formula there.
    pub fn x_direct(&self, site: &Site) -> Result<Complex64> {
        self.x_first_sheet(site)
    }

    fn x_first_sheet(&self, site: &Site) -> Result<Complex64> {
        let zeta = site.zeta;
        let d = self.surface.m_minus(site);
        if d.norm() == 0.0 {
            return Ok(self.x_at_m());
        }
        let q1_sheet = self.jacobi.sheet;
        if (zeta - self.jacobi.zeta1).norm() < POLE_GUARD * (1.0 + zeta.norm()) && site.sheet == q1_sheet {
            return Err(Error::pole("factorization", format!("X has a pole at q1 = {zeta}")));
        }
        let z0 = self.zeta0();
        if (zeta - z0).norm() < POLE_GUARD {
            return Err(Error::domain("factorization", "X is evaluated only away from the anchor affix"));
        }
        let na = self.jacobi.n_a as f64;
        let exponent = site.u / (i() * (zeta - z0)) * (0.5 - 2.0 * na) * self.j1(site) - 0.5 * self.path_integrals(site);
        let lambda = if is_on_l0(site, self.surface.m()) { i() } else { Complex64::new(1.0, 0.0) };
        Ok(lambda * exponent.exp())
    }

    /// `X` at the branch point `m`: `i |(zeta1 - zeta0)(eta1 - m) / ((zeta1 - m)(eta1 - zeta0))|`.
    pub fn x_at_m(&self) -> Complex64 {
        let (z1, e1, z0, m) = (self.jacobi.zeta1, self.eta1, self.zeta0(), self.surface.m());
        Complex64::new(0.0, ((z1 - z0) * (e1 - m) / ((z1 - m) * (e1 - z0))).norm())
    }

    /// Limit of `X+` at infinity along the lower bank of `l0`.
    pub fn x_at_infinity(&self) -> Complex64 {
        Complex64::new(0.0, ((self.jacobi.zeta1 - self.zeta0()) / (self.eta1 - self.zeta0())).norm())
    }
}

/// Whether a site lies on a bank of `l0`.
pub fn is_on_l0(site: &Site, m: f64) -> bool {
    site.side.is_some() && site.zeta.im == 0.0 && (site.zeta.re > m || site.from_m.is_some_and(|d| d.re < 0.0))
}
