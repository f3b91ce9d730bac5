//! Jacobi inversion for the divisor point `q1 = (zeta1, u1)` and the cycle
//! integers `(n_a, n_b)` that make the factorization function free of essential
//! singularities at the two points over `zeta0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::LegendreRule;
use crate::special_fn::{elliptic_k, elliptic_kprime, jacobi_sn, Modulus};
use crate::surface::{Sheet, Surface};

const INTEGER_TOL: f64 = 1e-6;
const INTEGER_HARD_TOL: f64 = 1e-3;
const ABELIAN_NODES: usize = 200;

/// Periods `A = -4ikK` and `B = 4kK'` of `dxi/u` over the a- and b-cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Periods {
    pub a: Complex64,
    pub b: Complex64,
}

pub fn periods(m: f64) -> Result<Periods> {
    let k = Modulus::from_slit(m)?;
    Ok(Periods {
        a: Complex64::new(0.0, -4.0 * k.k() * elliptic_k(k)),
        b: Complex64::new(4.0 * k.k() * elliptic_kprime(k), 0.0),
    })
}

/// `int_0^eta dxi / p^{1/2}` along the straight segment, with `xi = eta s^2` to
/// absorb the square-root endpoint behaviour.
pub fn abelian_from_origin(surface: &Surface, eta: Complex64) -> Result<Complex64> {
    if eta.im == 0.0 && eta.re > 0.0 {
        return Err(Error::path("jacobi", format!("segment from 0 to {eta} runs along a cut")));
    }
    let rule = LegendreRule::new(ABELIAN_NODES)?;
    Ok(rule.integrate(0.0, 1.0, |s| {
        let xi = eta * s * s;
        2.0 * s * eta / surface.sqrt_p(xi)
    }))
}

/// `int_from^to dxi / p^{1/2}` along a segment that meets the real axis at most at
/// an endpoint lying off the cuts.
pub fn abelian_segment(surface: &Surface, from: Complex64, to: Complex64) -> Result<Complex64> {
    let crosses = (from.im > 0.0 && to.im < 0.0) || (from.im < 0.0 && to.im > 0.0);
    if crosses {
        let x = from.re + (to.re - from.re) * from.im / (from.im - to.im);
        if surface.cut_of(x).is_some() {
            return Err(Error::path("jacobi", format!("segment {from} -> {to} crosses a cut at {x}")));
        }
    }
    let rule = LegendreRule::new(ABELIAN_NODES)?;
    Ok(rule.integrate(0.0, 1.0, |s| {
        let xi = from + (to - from) * s;
        (to - from) / surface.sqrt_p(xi)
    }))
}

/// Right-hand side `g0 = -ikK + int_0^eta1 dxi / p^{1/2}` along the straight ray.
pub fn g0_rhs(eta1: Complex64, m: f64) -> Result<Complex64> {
    let surface = Surface::new(m)?;
    if eta1.im == 0.0 {
        return Err(Error::path("jacobi", format!("eta1 = {eta1} must leave the real axis")));
    }
    let k = Modulus::from_slit(m)?;
    Ok(Complex64::new(0.0, -k.k() * elliptic_k(k)) + abelian_from_origin(&surface, eta1)?)
}

/// `g0` along the detour `0 -> delta -> eta1` through a point `delta < 0`.
pub fn g0_rhs_via(eta1: Complex64, m: f64, delta: f64) -> Result<Complex64> {
    let surface = Surface::new(m)?;
    if !(delta < 0.0) || eta1.im == 0.0 {
        return Err(Error::path("jacobi", format!("detour through {delta} to {eta1} is not admissible")));
    }
    let k = Modulus::from_slit(m)?;
    let first = abelian_from_origin(&surface, Complex64::new(delta, 0.0))?;
    let second = abelian_segment(&surface, Complex64::new(delta, 0.0), eta1)?;
    Ok(Complex64::new(0.0, -k.k() * elliptic_k(k)) + first + second)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiSolution {
    pub zeta1: Complex64,
    pub sheet: Sheet,
    pub n_a: i64,
    pub n_b: i64,
    pub g0: Complex64,
    /// Largest distance of the pre-rounding `n_a`, `n_b` from integers.
    pub integrality_defect: f64,
}

impl JacobiSolution {
    /// `u(q1)` on the returned sheet.
    pub fn u1(&self, surface: &Surface) -> Complex64 {
        self.sheet.sign() * surface.sqrt_p(self.zeta1)
    }
}

fn integers(i: Complex64, p: &Periods) -> (f64, f64) {
    (-i.im / (-p.a.im), i.re / p.b.re)
}

fn defect(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Solves the inversion problem: `zeta1 = sn^2(i g0 / (2k))`, then classifies the
/// sheet by which of `I_-`, `I_+` yields integer cycle counts.
pub fn solve_inversion(eta1: Complex64, m: f64) -> Result<JacobiSolution> {
    let surface = Surface::new(m)?;
    let k = Modulus::from_slit(m)?;
    let g0 = g0_rhs(eta1, m)?;
    let arg = Complex64::new(0.0, 1.0) * g0 / (2.0 * k.k());
    let sn = jacobi_sn(arg, k)?;
    let zeta1 = sn * sn;
    if surface.cut_of(zeta1.re).is_some() && zeta1.im.abs() < 1e-14 {
        return Err(Error::inconsistent("jacobi", format!("zeta1 = {zeta1} falls on a cut")));
    }
    let per = periods(m)?;
    // I_- and I_+ reduce to g0 -+ int_0^zeta1 dxi / p^{1/2}.
    let to_zeta = abelian_from_origin(&surface, zeta1)?;
    let candidates = [(Sheet::First, g0 - to_zeta), (Sheet::Second, g0 + to_zeta)];
    let scored: Vec<(Sheet, f64, f64, f64)> = candidates
        .iter()
        .map(|(sheet, i)| {
            let (na, nb) = integers(*i, &per);
            (*sheet, na, nb, defect(na).max(defect(nb)))
        })
        .collect();
    let pick = scored
        .iter()
        .find(|c| c.3 <= INTEGER_TOL)
        .or_else(|| scored.iter().filter(|c| c.3 <= INTEGER_HARD_TOL).min_by(|a, b| a.3.total_cmp(&b.3)))
        .ok_or_else(|| {
            Error::inconsistent(
                "jacobi",
                format!("no branch gives integer cycle counts: defects {:.3e}, {:.3e}", scored[0].3, scored[1].3),
            )
        })?;
    Ok(JacobiSolution {
        zeta1,
        sheet: pick.0,
        n_a: pick.1.round() as i64,
        n_b: pick.2.round() as i64,
        g0,
        integrality_defect: pick.3,
    })
}

/// `|g0 - int_0^zeta1 dxi/u - n_a A - n_b B|` for a returned solution.
pub fn inversion_residual(sol: &JacobiSolution, m: f64) -> Result<f64> {
    let surface = Surface::new(m)?;
    let per = periods(m)?;
    let along = sol.sheet.sign() * abelian_from_origin(&surface, sol.zeta1)?;
    Ok((sol.g0 - along - per.a * sol.n_a as f64 - per.b * sol.n_b as f64).norm())
}
