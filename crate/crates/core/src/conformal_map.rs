//! The map `z = f(zeta)` from the slit domain onto the flow domain,
//! `f'(zeta) = omega0(zeta) exp(-i Phi(zeta, u))` with
//! `omega0 = i (N0 + N1 zeta) / p^{1/2}`, calibrated through the circulation and the
//! single-valuedness conditions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factorization::Factorizer;
use crate::jacobi::solve_inversion;
use crate::kernel::KernelConfig;
use crate::quadrature::{ChebyshevRule, LegendreRule, Resolution};
use crate::rh_solver::{RhSolution, WedgeAngle};
use crate::special_fn::{elliptic_e, elliptic_k, Modulus};
use crate::surface::{BoundaryPoint, Sheet, Side, Site, Surface, SurfacePoint};

/// Relative residual below which the endpoint `a = m` is accepted as the root.
pub const ENDPOINT_TOL: f64 = 1e-8;
const SCAN_STEPS: usize = 24;
const BISECTION_STEPS: usize = 60;
const GRADED_FLOOR: f64 = 1e-14;
const PANEL_NODES: usize = 16;
const CLOSURE_LIMIT: f64 = 1e-4;

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// Physical and auxiliary parameters of one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub alpha: WedgeAngle,
    pub gamma_over_u: f64,
    pub m: f64,
    pub zeta0: f64,
    pub delta: f64,
    pub eta1: Complex64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            alpha: WedgeAngle::new(PI / 4.0).expect("default angle"),
            gamma_over_u: -0.1,
            m: 1.1,
            zeta0: -5.0,
            delta: -2.0,
            eta1: Complex64::new(1.0, 0.5),
        }
    }
}

impl ModelParams {
    pub fn new(alpha: f64, gamma_over_u: f64, m: f64, zeta0: f64, delta: f64, eta1: Complex64) -> Result<Self> {
        let alpha = WedgeAngle::new(alpha).map_err(|e| Error::Config(e.to_string()))?;
        let params = ModelParams { alpha, gamma_over_u, m, zeta0, delta, eta1 };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_over_u < 0.0) {
            return Err(Error::Config(format!(
                "gamma_over_U = {} must be negative: a positive circulation needs reversed wall velocities",
                self.gamma_over_u
            )));
        }
        if !(self.m > 1.0 && self.m.is_finite()) {
            return Err(Error::Config(format!("m = {} must exceed 1", self.m)));
        }
        if !(self.zeta0 < self.delta && self.delta < 0.0) {
            return Err(Error::Config(format!("need zeta0 < delta < 0, got {} and {}", self.zeta0, self.delta)));
        }
        if self.eta1.im == 0.0 || !self.eta1.re.is_finite() || !self.eta1.im.is_finite() {
            return Err(Error::Config(format!("eta1 = {} must have a nonzero imaginary part", self.eta1)));
        }
        Ok(())
    }

    /// Factorization data for these parameters.
    pub fn factorizer(&self, res: Resolution) -> Result<Factorizer> {
        let surface = Surface::new(self.m)?;
        let kernel = KernelConfig::new(&surface, self.zeta0)?;
        let jacobi = solve_inversion(self.eta1, self.m)?;
        Factorizer::new(surface, kernel, self.delta, self.eta1, jacobi, res)
    }
}

/// The integrals `C_j`, `S_j` over `l1` that enter the single-valuedness condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub c0: f64,
    pub c1: f64,
    pub s0: f64,
    pub s1: f64,
    /// Largest `|Im Phi+|` met on `l1`; zero in exact arithmetic.
    pub imag_leak: f64,
}

impl Moments {
    /// `C0 S1 - C1 S0`.
    pub fn residual(&self) -> f64 {
        self.c0 * self.s1 - self.c1 * self.s0
    }

    pub fn relative_residual(&self) -> f64 {
        let scale = (self.c0 * self.s1).abs() + (self.c1 * self.s0).abs();
        if scale == 0.0 {
            // Both sine moments vanish when the wall is straight.
            return self.residual().abs();
        }
        self.residual().abs() / scale
    }
}

/// Gauss-Chebyshev evaluation of the moments from `Phi+` on both banks of `l1`.
pub fn moments(rh: &RhSolution, n: usize) -> Result<Moments> {
    let surface = *rh.factorizer().surface();
    let m = surface.m();
    let rule = ChebyshevRule::new(n)?;
    let rows: Vec<(f64, f64, f64, f64)> = rule
        .nodes()
        .par_iter()
        .map(|x| {
            let xi = 0.5 * (1.0 + x);
            let mut cos_sum = 0.0;
            let mut sin_sum = 0.0;
            let mut leak = 0.0f64;
            for side in [Side::Plus, Side::Minus] {
                let site = surface.boundary_site(BoundaryPoint::new(&surface, xi, side)?, Sheet::First);
                let phi = rh.phi(&site)?;
                cos_sum += phi.re.cos();
                sin_sum += phi.re.sin();
                leak = leak.max(phi.im.abs());
            }
            let scale = 1.0 / (m - xi).sqrt();
            Ok((xi, cos_sum * scale, sin_sum * scale, leak))
        })
        .collect::<Result<_>>()?;
    let w = rule.weight();
    let sum = |f: &dyn Fn(&(f64, f64, f64, f64)) -> f64| rows.iter().map(f).sum::<f64>() * w;
    Ok(Moments {
        c0: sum(&|r| r.1),
        c1: sum(&|r| r.1 * r.0),
        s0: sum(&|r| r.2),
        s1: sum(&|r| r.2 * r.0),
        imag_leak: rows.iter().map(|r| r.3).fold(0.0, f64::max),
    })
}

/// Outcome of the search for the vertex preimage `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub a: f64,
    /// Relative residual of `C0 S1 - C1 S0` at `a = m`.
    pub endpoint_residual: f64,
    pub endpoint_root: bool,
    /// Brackets `[a_lo, a_hi]` with a sign change found by the scan.
    pub sign_changes: Vec<(f64, f64)>,
}

fn trapped<F>(rule: &LegendreRule, lo: f64, hi: f64, f: F) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let mut sum = Complex64::new(0.0, 0.0);
    for (x, w) in rule.nodes().iter().zip(rule.weights()) {
        sum += f(mid + half * x)? * *w;
    }
    Ok(sum * half)
}

/// `int_0^length f(d) dd` on panels shrinking by 4 toward `d = 0`. The part
/// below `GRADED_FLOOR` is dropped; callers pass integrands whose leading
/// singular term has already been removed.
fn graded<F>(f: F, length: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let rule = LegendreRule::new(PANEL_NODES)?;
    let mut hi = length;
    let mut sum = Complex64::new(0.0, 0.0);
    while hi > GRADED_FLOOR {
        let lo = 0.25 * hi;
        sum += trapped(&rule, lo, hi, &f)?;
        hi = lo;
    }
    Ok(sum)
}

/// Distance from `z` to the cuts `[0, 1]` and `[m, inf)`.
fn distance_to_cuts(z: Complex64, m: f64) -> f64 {
    let to_l1 = if (0.0..=1.0).contains(&z.re) { z.im.abs() } else { z.norm().min((z - 1.0).norm()) };
    let to_l0 = if z.re >= m { z.im.abs() } else { (z - m).norm() };
    to_l1.min(to_l0)
}

/// Calibrated flow: map constants and the Riemann-Hilbert solution.
#[derive(Debug, Clone)]
pub struct FlowSolution {
    params: ModelParams,
    res: Resolution,
    rh: RhSolution,
    n0: f64,
    n1: f64,
    moments: Moments,
    report: CalibrationReport,
    anchor: f64,
    f_anchor: Complex64,
    f_one: Complex64,
}

/// `C0 S1 - C1 S0` (relative) and the moments for a trial vertex preimage `a`.
pub fn residual_at(factorizer: &Factorizer, alpha: WedgeAngle, a: f64, res: Resolution) -> Result<(RhSolution, Moments)> {
    let rh = RhSolution::new(factorizer.clone(), alpha, a, res.nodes)?;
    let mom = moments(&rh, res.moment_nodes)?;
    Ok((rh, mom))
}

/// Solves `C0 S1 - C1 S0 = 0` for `a >= m`, then fixes `N0`, `N1`.
pub fn calibrate(params: ModelParams, res: Resolution) -> Result<FlowSolution> {
    params.validate()?;
    let factorizer = params.factorizer(res)?;
    let m = params.m;
    let (rh, mom) = residual_at(&factorizer, params.alpha, m, res)?;
    let endpoint_residual = mom.relative_residual();
    if endpoint_residual < ENDPOINT_TOL {
        let report = CalibrationReport { a: m, endpoint_residual, endpoint_root: true, sign_changes: Vec::new() };
        return FlowSolution::assemble(params, res, rh, mom, report);
    }
    // Geometric scan above the endpoint, then bisection on the first bracket.
    let mut sign_changes = Vec::new();
    let mut prev = (m, mom.residual());
    let mut step = 1e-3 * (m - 1.0);
    for _ in 0..SCAN_STEPS {
        let a = m + step;
        let (_, trial) = residual_at(&factorizer, params.alpha, a, res)?;
        if trial.residual().signum() != prev.1.signum() {
            sign_changes.push((prev.0, a));
        }
        prev = (a, trial.residual());
        step *= 2.0;
    }
    let Some(&(mut lo, mut hi)) = sign_changes.first() else {
        return Err(Error::Calibration(format!(
            "no sign change of C0 S1 - C1 S0 on [m, m + {step:.3e}] and the endpoint residual {endpoint_residual:.3e} exceeds {ENDPOINT_TOL:.0e}"
        )));
    };
    let mut r_lo = residual_at(&factorizer, params.alpha, lo, res)?.1.residual();
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let r_mid = residual_at(&factorizer, params.alpha, mid, res)?.1.residual();
        if r_mid.signum() == r_lo.signum() {
            lo = mid;
            r_lo = r_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Calibration(format!(
        "root a = {:.12} lies above m = {m}; the map is implemented for a = m only (sign changes: {sign_changes:?})",
        0.5 * (lo + hi)
    )))
}

impl FlowSolution {
    fn assemble(params: ModelParams, res: Resolution, rh: RhSolution, moments: Moments, report: CalibrationReport) -> Result<Self> {
        let modulus = Modulus::from_slit(params.m)?;
        let (k, kk, ee) = (modulus.k(), elliptic_k(modulus), elliptic_e(modulus));
        if moments.c1 == 0.0 {
            return Err(Error::Calibration("C1 vanishes".into()));
        }
        let ratio = moments.c0 / moments.c1;
        let denom = 1.0 - (kk - ee) / (k * k * kk) * ratio;
        if denom.abs() < 1e-10 {
            return Err(Error::Calibration(format!(
                "circulation and single-valuedness conditions are dependent (1 - (K-E) C0/(k^2 K C1) = {denom:.2e})"
            )));
        }
        let n0 = -params.gamma_over_u / (4.0 * k * kk) / denom;
        let n1 = -n0 * ratio;
        let anchor = 0.5 * (1.0 + params.m);
        let mut sol = FlowSolution {
            params,
            res,
            rh,
            n0,
            n1,
            moments,
            report,
            anchor,
            f_anchor: Complex64::new(0.0, 0.0),
            f_one: Complex64::new(0.0, 0.0),
        };
        sol.f_anchor = sol.map_segment(anchor)?;
        sol.f_one = sol.map_segment(1.0)?;
        Ok(sol)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn resolution(&self) -> Resolution {
        self.res
    }

    pub fn rh(&self) -> &RhSolution {
        &self.rh
    }

    pub fn surface(&self) -> &Surface {
        self.rh.factorizer().surface()
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn n1(&self) -> f64 {
        self.n1
    }

    pub fn moments(&self) -> &Moments {
        &self.moments
    }

    pub fn report(&self) -> &CalibrationReport {
        &self.report
    }

    /// Image of the attachment point `zeta = 1`.
    pub fn f_one(&self) -> Complex64 {
        self.f_one
    }

    /// `N0 kK + (K - E) N1 / k + Gamma/(4U)`, zero by construction.
    pub fn circulation_identity(&self) -> Result<f64> {
        let modulus = Modulus::from_slit(self.params.m)?;
        let (k, kk, ee) = (modulus.k(), elliptic_k(modulus), elliptic_e(modulus));
        Ok(self.n0 * k * kk + (kk - ee) / k * self.n1 + self.params.gamma_over_u / 4.0)
    }

    /// `2 int_0^1 (N0 + N1 xi) / sqrt|p| dxi` by quadrature; equals `-Gamma/U`.
    pub fn circulation(&self) -> Result<f64> {
        let m = self.params.m;
        let rule = ChebyshevRule::new(self.res.moment_nodes)?;
        let val = rule.integrate(1.0, |xi| ((self.n0 + self.n1 * xi) / (m - xi).sqrt()).into());
        Ok(2.0 * val.re)
    }

    /// `int_{l1} f' dzeta` assembled from the moments.
    pub fn loop_integral(&self) -> Complex64 {
        let mo = &self.moments;
        self.n0 * Complex64::new(mo.c0, -mo.s0) + self.n1 * Complex64::new(mo.c1, -mo.s1)
    }

    /// `omega0 = i (N0 + N1 zeta) / p^{1/2}` at a site.
    pub fn omega0(&self, site: &Site) -> Complex64 {
        omega0(site, self.n0, self.n1)
    }

    /// `f'` at a first-sheet site.
    pub fn f_prime(&self, site: &Site) -> Result<Complex64> {
        Ok(self.omega0(site) * self.rh.exp_mi_phi(site)?)
    }

    fn f_prime_at(&self, zeta: Complex64) -> Result<Complex64> {
        let site = self.surface().site(SurfacePoint::first(zeta));
        self.f_prime(&site)
    }

    /// Amplitude `N` of the leading term `N (m - xi)^{-1/2 + alpha/(2 pi)}` of
    /// `(N0 + N1 xi) exp(-i Phi) / sqrt(xi (xi - 1))` below `m`.
    pub fn corner_amplitude(&self) -> Result<Complex64> {
        let m = self.params.m;
        let near = self
            .rh
            .near_m()
            .ok_or_else(|| Error::domain("conformal_map", "corner amplitude needs a = m"))?;
        Ok((self.n0 + self.n1 * m) * near.lambda1 / (m * (m - 1.0)).sqrt())
    }

    fn corner_exponent(&self) -> f64 {
        self.params.alpha.radians() / (2.0 * PI)
    }

    /// `f(zeta)` for `1 <= zeta <= m`. Near `m` the leading power is subtracted
    /// and integrated exactly; near `1` the substitution `xi = 1 + w^2` removes the
    /// inverse square root.
    pub fn map_segment(&self, zeta: f64) -> Result<Complex64> {
        let m = self.params.m;
        if !(1.0..=m).contains(&zeta) {
            return Err(Error::domain("conformal_map", format!("{zeta} is not in [1, {m}]")));
        }
        if zeta == m {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let surface = *self.surface();
        let amp = self.corner_amplitude()?;
        let e = self.corner_exponent();
        let (n0, n1) = (self.n0, self.n1);
        let half = 0.5 * (m - zeta);
        let near = graded(
            |d| {
                if d == 0.0 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let xi = m - d;
                let site = surface.near_m_site(Complex64::new(d, 0.0), Sheet::First, None);
                let g = (n0 + n1 * xi) * self.rh.exp_mi_phi(&site)? / (xi * (xi - 1.0)).sqrt() - amp * d.powf(e - 0.5);
                Ok(g / d.sqrt())
            },
            half,
        )?;
        let corner = 2.0 * PI * i() * amp / self.params.alpha.radians() * half.powf(e);
        let rule = LegendreRule::new(2 * PANEL_NODES)?;
        let (w_lo, w_hi) = ((zeta - 1.0).sqrt(), (m - half - 1.0).sqrt());
        let far = trapped(&rule, w_lo, w_hi, |w| {
            let d = (m - 1.0) - w * w;
            let xi = 1.0 + w * w;
            let site = surface.near_m_site(Complex64::new(d, 0.0), Sheet::First, None);
            Ok(2.0 * (n0 + n1 * xi) * self.rh.exp_mi_phi(&site)? / (xi.sqrt() * d.sqrt()))
        })?;
        Ok(i() * (near + far) + corner)
    }

    /// Integral of `f'` along a polyline, with panels no longer than half the
    /// distance to the cuts.
    pub fn integrate_path(&self, path: &[Complex64]) -> Result<Complex64> {
        let m = self.params.m;
        let rule = LegendreRule::new(PANEL_NODES)?;
        let mut total = Complex64::new(0.0, 0.0);
        for leg in path.windows(2) {
            let (from, to) = (leg[0], leg[1]);
            let length = (to - from).norm();
            if length == 0.0 {
                continue;
            }
            let mut s = 0.0;
            while s < 1.0 {
                let z = from + (to - from) * s;
                let reach = 0.5 * distance_to_cuts(z, m) / length;
                if reach < 1e-14 {
                    return Err(Error::path("conformal_map", format!("path touches a cut near {z}")));
                }
                let h = (1.0 - s).min(reach).min(0.5 / length);
                let a = from + (to - from) * s;
                let dz = (to - from) * h;
                total += trapped(&rule, 0.0, 1.0, |x| self.f_prime_at(a + dz * x))? * dz;
                s = if 1.0 - s <= h { 1.0 } else { s + h };
            }
        }
        Ok(total)
    }

    /// Vertical-then-horizontal polyline from the anchor on `(1, m)` to `zeta`,
    /// with a detour through the upper half-plane for real targets.
    pub fn default_path(&self, zeta: Complex64) -> Result<Vec<Complex64>> {
        let m = self.params.m;
        let start = Complex64::new(self.anchor, 0.0);
        if zeta.im != 0.0 {
            return Ok(vec![start, Complex64::new(self.anchor, zeta.im), zeta]);
        }
        if zeta.re < 0.0 {
            let lift = 1.0;
            return Ok(vec![start, Complex64::new(self.anchor, lift), Complex64::new(zeta.re, lift), zeta]);
        }
        if zeta.re > 1.0 && zeta.re < m {
            return Ok(vec![start, zeta]);
        }
        Err(Error::path("conformal_map", format!("{zeta} lies on a cut; use a tagged boundary point")))
    }

    /// `f(zeta)` at an interior point of the first sheet.
    pub fn map_point(&self, zeta: Complex64) -> Result<Complex64> {
        if zeta.im == 0.0 && zeta.re >= 1.0 && zeta.re <= self.params.m {
            return self.map_segment(zeta.re);
        }
        let path = self.default_path(zeta)?;
        Ok(self.f_anchor + self.integrate_path(&path)?)
    }

    /// `f(zeta)` along a caller-supplied polyline that starts at the anchor.
    pub fn map_point_via(&self, path: &[Complex64]) -> Result<Complex64> {
        if path.first() != Some(&Complex64::new(self.anchor, 0.0)) {
            return Err(Error::path("conformal_map", "paths start at the anchor on (1, m)"));
        }
        Ok(self.f_anchor + self.integrate_path(path)?)
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    /// `2 int_0^theta (N0 + N1 xi) exp(-i Phi(xi, side)) / sqrt(m - xi) dtheta'` with
    /// `xi = cos^2 theta'`.
    fn l1_piece(&self, rule: &LegendreRule, lo: f64, hi: f64, side: Side) -> Result<Complex64> {
        let surface = *self.surface();
        let m = self.params.m;
        trapped(rule, lo, hi, |theta| {
            // The integrand is bounded at xi = 1; keep the node off the branch point.
            let xi = theta.cos().powi(2).min(1.0 - 1e-14);
            let site = surface.boundary_site(BoundaryPoint::new(&surface, xi, side)?, Sheet::First);
            Ok(2.0 * (self.n0 + self.n1 * xi) * self.rh.exp_mi_phi(&site)? / (m - xi).sqrt())
        })
    }

    /// Image of a bank point of `l1`.
    pub fn map_l1(&self, xi: f64, side: Side) -> Result<Complex64> {
        if !(xi > 0.0 && xi < 1.0) {
            return Err(Error::domain("conformal_map", format!("{xi} is not inside l1")));
        }
        let theta = xi.sqrt().acos();
        let rule = LegendreRule::new(PANEL_NODES)?;
        let panels = 16;
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..panels {
            let (lo, hi) = (theta * j as f64 / panels as f64, theta * (j + 1) as f64 / panels as f64);
            sum += self.l1_piece(&rule, lo, hi, side)?;
        }
        Ok(self.f_one + side.sign() * sum)
    }

    /// Closed polyline of the vortex boundary: the image of `l1+` from `f(1)` to
    /// `f(0)`, then `l1-` back to `f(1)`. Panels are uniform in `theta` with
    /// `xi = cos^2 theta`, which clusters points at both ends of `l1`.
    pub fn vortex_boundary(&self, panels: usize) -> Result<VortexBoundary> {
        let rule = LegendreRule::new(8)?;
        let step = 0.5 * PI / panels as f64;
        let branch = |side: Side| -> Result<Vec<Complex64>> {
            let pieces: Vec<Complex64> = (0..panels)
                .into_par_iter()
                .map(|j| self.l1_piece(&rule, step * j as f64, step * (j + 1) as f64, side))
                .collect::<Result<_>>()?;
            let mut acc = self.f_one;
            let mut out = vec![acc];
            for p in pieces {
                acc += side.sign() * p;
                out.push(acc);
            }
            Ok(out)
        };
        let upper = branch(Side::Plus)?;
        let lower = branch(Side::Minus)?;
        let gap_abs = (upper[panels] - lower[panels]).norm();
        let all: Vec<Complex64> = upper.iter().chain(&lower).copied().collect();
        let diameter = all
            .iter()
            .flat_map(|a| all.iter().map(move |b| (a - b).norm()))
            .fold(0.0, f64::max);
        let closure_gap = gap_abs / diameter;
        if closure_gap > CLOSURE_LIMIT {
            return Err(Error::Closure { gap: closure_gap });
        }
        let mut points = upper.clone();
        points.extend(lower.iter().rev().skip(1));
        Ok(VortexBoundary { points, upper, lower, closure_gap, diameter })
    }

    /// Image of a bank point of `l0`: the lower bank maps to `arg z = alpha`, the
    /// upper bank to the real axis.
    pub fn wall_point(&self, xi: f64, side: Side) -> Result<Complex64> {
        let m = self.params.m;
        if !(xi > m) {
            return Err(Error::domain("conformal_map", format!("{xi} is not on l0")));
        }
        let surface = *self.surface();
        let amp = self.corner_amplitude()?;
        let e = self.corner_exponent();
        // Continuation of (m - zeta)^{e - 1/2} to the bank.
        let turn = Complex64::new(0.0, side.sign() * -PI * (e - 0.5)).exp();
        let (n0, n1) = (self.n0, self.n1);
        let body = graded(
            |d| {
                if d == 0.0 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let x = m + d;
                let site = surface.near_m_site(Complex64::new(-d, 0.0), Sheet::First, Some(side));
                let g = (n0 + n1 * x) * self.rh.exp_mi_phi(&site)? / (x * (x - 1.0)).sqrt() - amp * turn * d.powf(e - 0.5);
                Ok(g / d.sqrt())
            },
            xi - m,
        )?;
        let corner = amp * turn * (xi - m).powf(e) / e;
        Ok(side.sign() * (body + corner))
    }

    /// `dw/(U dz) = exp(i Phi+)` on a bank of `l0`.
    pub fn wall_velocity(&self, xi: f64, side: Side) -> Result<Complex64> {
        let m = self.params.m;
        if !(xi > m) {
            return Err(Error::domain("conformal_map", format!("{xi} is not on l0")));
        }
        let site = self
            .surface()
            .near_m_site(Complex64::new(m - xi, 0.0), Sheet::First, Some(side));
        Ok((i() * self.rh.phi(&site)?).exp())
    }

    /// `u_x / U` on the wall `arg z = 0` at the station `x`, located by bisection
    /// on `log(xi - m)`.
    pub fn wall_speed_at(&self, x: f64) -> Result<f64> {
        let m = self.params.m;
        let pos = |t: f64| self.wall_point(m + t.exp(), Side::Plus).map(|z| z.re);
        let (mut lo, mut hi) = (-30.0f64, 0.0f64);
        while pos(hi)? < x {
            hi += 1.0;
            if hi > 30.0 {
                return Err(Error::domain("conformal_map", format!("station {x} is beyond the sampled wall")));
            }
        }
        if pos(lo)? > x {
            return Err(Error::domain("conformal_map", format!("station {x} is inside the corner region")));
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if pos(mid)? < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(self.wall_velocity(m + (0.5 * (lo + hi)).exp(), Side::Plus)?.re)
    }

    /// Smallest `N0 + N1 xi` over `xi` in `(m, 100 m)`.
    pub fn min_wall_factor(&self) -> f64 {
        let m = self.params.m;
        (0..=200)
            .map(|j| m * 100f64.powf(j as f64 / 200.0))
            .map(|xi| self.n0 + self.n1 * xi)
            .fold(f64::INFINITY, f64::min)
    }
}

/// `i (N0 + N1 zeta) / p^{1/2}` with `p^{1/2} = u` on the first sheet.
pub fn omega0(site: &Site, n0: f64, n1: f64) -> Complex64 {
    i() * (n0 + n1 * site.zeta) / (site.sheet.sign() * site.u)
}

/// Closed vortex polyline with its two branches.
#[derive(Debug, Clone)]
pub struct VortexBoundary {
    pub points: Vec<Complex64>,
    /// Images of `l1+` and `l1-`, both starting at `f(1)` and ending near `f(0)`.
    pub upper: Vec<Complex64>,
    pub lower: Vec<Complex64>,
    pub closure_gap: f64,
    pub diameter: f64,
}

impl VortexBoundary {
    /// Area-weighted centroid of the polygon.
    pub fn centroid(&self) -> Complex64 {
        let pts = &self.points;
        let mut area = 0.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..pts.len() {
            let (p, q) = (pts[k], pts[(k + 1) % pts.len()]);
            let cross = p.re * q.im - q.re * p.im;
            area += cross;
            acc += (p + q) * cross;
        }
        acc / (3.0 * area)
    }

    pub fn perimeter(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Enclosed area (shoelace formula).
    pub fn area(&self) -> f64 {
        let pts = &self.points;
        let twice: f64 = (0..pts.len())
            .map(|k| {
                let (p, q) = (pts[k], pts[(k + 1) % pts.len()]);
                p.re * q.im - q.re * p.im
            })
            .sum();
        0.5 * twice.abs()
    }
}
