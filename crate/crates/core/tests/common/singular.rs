//! Direct integrals of `J1` and `Psi` in the variable `xi = m + s^2` on `l0`, and
//! the boundary residual of `Phi`.

use std::f64::consts::PI;

use num_complex::Complex64;
use wedge_vortex::factorization::Factorizer;
use wedge_vortex::rh_solver::RhSolution;
use wedge_vortex::surface::{BoundaryPoint, Sheet, Side, Site};

use super::{adaptive_to_infinity, c, pv_excision};

/// `J1(zeta) = int_m^inf (xi - zeta0) dxi / (sqrt(xi (xi - 1) (xi - m)) (xi - zeta))`;
/// returns the part `2 (xi - zeta0) / sqrt(xi (xi - 1))` left after `dxi = 2 s ds`.
fn j1_numerator(m: f64, zeta0: f64) -> impl Fn(f64) -> Complex64 {
    move |s: f64| {
        let xi = m + s * s;
        c(2.0 * (xi - zeta0) / (xi * (xi - 1.0)).sqrt(), 0.0)
    }
}

pub fn j1(fz: &Factorizer, zeta: Complex64) -> Complex64 {
    let (m, z0) = (fz.surface().m(), fz.zeta0());
    let num = j1_numerator(m, z0);
    adaptive_to_infinity(&|s| num(s) / (m + s * s - zeta), 0.0, 4.0, 1e-13)
}

/// Principal value on `l0` at `x`: the pole `1/(xi - x)` is `1/((s - s0)(s + s0))`.
pub fn j1_pv(fz: &Factorizer, x: f64) -> Complex64 {
    let (m, z0) = (fz.surface().m(), fz.zeta0());
    let num = j1_numerator(m, z0);
    let s0 = (x - m).sqrt();
    let top = 2.0 * s0 + 4.0;
    let near = pv_excision(&|s| num(s) / (s + s0), 0.0, top, s0, 1e-2 * s0.min(1.0), 1e-13);
    let tail = adaptive_to_infinity(&|s| num(s) / (m + s * s - x), top, top, 1e-13);
    near + tail
}

/// Integrand of `Psi` on `l0'` (lower bank, `a = m`) in `xi = m + s^2`, without the
/// Cauchy factor `1/(xi - zeta)`. The lower bank is traversed from `+inf` to `m`,
/// hence the sign.
fn psi_density(rh: &RhSolution, field: Site) -> impl Fn(f64) -> Complex64 + '_ {
    let fz = rh.factorizer();
    let surface = *fz.surface();
    let (m, z0) = (surface.m(), fz.zeta0());
    let scale = rh.alpha().deficit() / (2.0 * PI * c(0.0, 1.0));
    move |s: f64| {
        let xi = m + s * s;
        let source = surface.near_m_site(c(-s * s, 0.0), Sheet::First, Some(Side::Minus));
        let x_plus = fz.x(&source).unwrap();
        let (a, b) = (field.zeta - z0, xi - z0);
        let bracket = a / b + field.u / source.u * b / a;
        -scale * bracket / x_plus * (2.0 * s)
    }
}

pub fn psi(rh: &RhSolution, field: Site) -> Complex64 {
    let m = rh.factorizer().surface().m();
    let density = psi_density(rh, field);
    adaptive_to_infinity(&|s| density(s) / (m + s * s - field.zeta), 0.0, 4.0, 1e-12)
}

/// Principal value of `Psi` at a bank site of `l0'`.
pub fn psi_pv(rh: &RhSolution, field: Site) -> Complex64 {
    let m = rh.factorizer().surface().m();
    let x = field.zeta.re;
    let density = psi_density(rh, field);
    let s0 = (x - m).sqrt();
    let top = 2.0 * s0 + 4.0;
    let near = pv_excision(&|s| density(s) / (s + s0), 0.0, top, s0, 1e-2 * s0.min(1.0), 1e-12);
    let tail = adaptive_to_infinity(&|s| density(s) / (m + s * s - x), top, top, 1e-12);
    near + tail
}

pub fn bank(rh: &RhSolution, xi: f64, side: Side, sheet: Sheet) -> Site {
    let s = rh.factorizer().surface();
    s.boundary_site(BoundaryPoint::new(s, xi, side).unwrap(), sheet)
}

/// `|Phi+ - G Phi- - g|` at a first-sheet bank point; `Phi-` is read from the second
/// sheet on the opposite bank, which carries the same `(xi, v)`.
pub fn boundary_residual(rh: &RhSolution, xi: f64, side: Side) -> f64 {
    let plus = rh.phi(&bank(rh, xi, side, Sheet::First)).unwrap();
    let minus = rh.phi(&bank(rh, xi, side.flip(), Sheet::Second)).unwrap();
    let m = rh.factorizer().surface().m();
    let (g_coef, forcing) = if xi < 1.0 {
        (1.0, 0.0)
    } else if xi > m && side == Side::Minus && xi > rh.a() {
        (-1.0, rh.jump_target())
    } else {
        (-1.0, 0.0)
    };
    (plus - g_coef * minus - forcing).norm()
}

/// Forty points: 14 on `l0'`, 13 on `l0''` (upper bank) and 13 on `l1`, alternating banks.
pub fn boundary_points(m: f64) -> Vec<(f64, Side)> {
    let far = |j: usize| m + 0.02 * 4f64.powf(j as f64 / 2.0);
    let mut points: Vec<(f64, Side)> = (0..14).map(|j| (far(j), Side::Minus)).collect();
    points.extend((0..13).map(|j| (far(j) * 1.01, Side::Plus)));
    points.extend((0..13).map(|j| {
        let xi = (j as f64 + 0.5) / 13.0;
        (xi, if j % 2 == 0 { Side::Plus } else { Side::Minus })
    }));
    points
}
