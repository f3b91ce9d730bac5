//! Quadrature rules and Cauchy-type singular integrals on a finite interval `(0, L)`.
//!
//! * [`ChebyshevRule`]: Gauss-Chebyshev rule for integrands carrying the weight
//!   `1/sqrt(tau (L - tau))`.
//! * [`PvSeries`]: Chebyshev expansion of a smooth factor, giving principal values
//!   through the `U_{s-1}` identity and off-interval values in closed form.
//! * [`CauchyTransform`]: `C(t) = int q(phi) dphi / (tau(phi) - t)` with
//!   `tau = L sin^2 phi`, sampled at Gauss-Legendre nodes in `phi`, valid for `t`
//!   anywhere: near the interval through subtraction of the local singular part,
//!   on it as a principal value with a bank term.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::surface::Side;

const PANEL_NODES: usize = 16;
const COINCIDENT: f64 = 1e-7;
/// Maximum acceptable `|d_S| / max |d_s|`.
pub const DECAY_GATE: f64 = 1e-8;

/// Node counts shared by the solver stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    /// Gauss-Chebyshev and Gauss-Legendre nodes for integrals over `(0, 1/m)`.
    pub nodes: usize,
    /// Retained Chebyshev coefficients of principal-value series.
    pub series_terms: usize,
    /// Gauss-Legendre nodes per straight leg of the path `gamma`.
    pub leg_nodes: usize,
    /// Gauss-Chebyshev nodes for the moment integrals over `l1`.
    pub moment_nodes: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution { nodes: 200, series_terms: 120, leg_nodes: 128, moment_nodes: 128 }
    }
}

/// Gauss-Chebyshev rule of the first kind: nodes `cos((j - 1/2) pi / n)`, weights `pi / n`.
#[derive(Debug, Clone)]
pub struct ChebyshevRule {
    nodes: Vec<f64>,
}

impl ChebyshevRule {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::domain("quadrature", format!("need at least 4 nodes, got {n}")));
        }
        let nodes = (1..=n).map(|j| ((j as f64 - 0.5) * PI / n as f64).cos()).collect();
        Ok(ChebyshevRule { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weight(&self) -> f64 {
        PI / self.nodes.len() as f64
    }

    /// Nodes mapped onto `(0, L)`.
    pub fn mapped_nodes(&self, length: f64) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(move |x| 0.5 * (1.0 + x) * length)
    }

    /// `int_0^L g(tau) dtau / sqrt(tau (L - tau))`.
    pub fn integrate<F>(&self, length: f64, g: F) -> Complex64
    where
        F: Fn(f64) -> Complex64,
    {
        self.mapped_nodes(length).map(g).sum::<Complex64>() * self.weight()
    }
}

/// `int_0^L g(tau) dtau / sqrt(tau (L - tau))` by an `n`-point Gauss-Chebyshev rule.
pub fn gauss_chebyshev<F>(g: F, length: f64, n: usize) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    Ok(ChebyshevRule::new(n)?.integrate(length, g))
}

/// Chebyshev expansion `F(tau) = sum_s c_s T_s(2 tau / L - 1)` of the smooth factor
/// of a weighted Cauchy integral `int_0^L F(tau) w(tau) dtau / (tau - t)`,
/// `w = 1/sqrt(tau (L - tau))`.
#[derive(Debug, Clone)]
pub struct PvSeries {
    length: f64,
    coeffs: Vec<Complex64>,
}

impl PvSeries {
    /// Coefficients from the discrete cosine sum over `n` Chebyshev nodes, keeping
    /// `c_0 .. c_terms`.
    pub fn build<F>(smooth: F, length: f64, n: usize, terms: usize) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        if terms >= n {
            return Err(Error::domain("quadrature", format!("series length {terms} needs more than {n} nodes")));
        }
        let rule = ChebyshevRule::new(n)?;
        let values: Vec<Complex64> = rule.mapped_nodes(length).map(smooth).collect();
        let coeffs = (0..=terms)
            .map(|s| {
                let sum: Complex64 = values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * ((s as f64) * (j as f64 + 0.5) * PI / n as f64).cos())
                    .sum();
                let scale = if s == 0 { 1.0 } else { 2.0 };
                sum * scale / n as f64
            })
            .collect();
        Ok(PvSeries { length, coeffs })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// `c_0, c_1, ..., c_S`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `|c_S| / max_s |c_s|` over `s >= 1`; zero when the series is constant.
    pub fn tail_ratio(&self) -> f64 {
        let max = self.coeffs.iter().skip(1).map(|c| c.norm()).fold(0.0, f64::max);
        let scale = max.max(1e-300 + 1e-15 * self.coeffs[0].norm());
        self.coeffs.last().map_or(0.0, |c| c.norm() / scale)
    }

    pub fn decays(&self) -> bool {
        self.tail_ratio() < DECAY_GATE
    }

    fn mapped(&self, t: f64) -> f64 {
        2.0 * t / self.length - 1.0
    }

    /// The expanded factor `F(t)`.
    pub fn smooth_value(&self, t: f64) -> Complex64 {
        let y = self.mapped(t);
        let (mut prev, mut cur) = (1.0, y);
        let mut sum = self.coeffs[0];
        for (s, c) in self.coeffs.iter().enumerate().skip(1) {
            if s > 1 {
                let next = 2.0 * y * cur - prev;
                prev = cur;
                cur = next;
            }
            sum += c * cur;
        }
        sum
    }

    /// Principal value at `t` strictly inside `(0, L)`.
    pub fn eval_pv(&self, t: f64) -> Result<Complex64> {
        if !(t > 0.0 && t < self.length) {
            return Err(Error::domain("quadrature", format!("principal value point {t} outside (0, {})", self.length)));
        }
        let y = self.mapped(t);
        let (mut prev, mut cur) = (0.0, 1.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for (s, c) in self.coeffs.iter().enumerate().skip(1) {
            if s > 1 {
                let next = 2.0 * y * cur - prev;
                prev = cur;
                cur = next;
            }
            sum += c * cur;
        }
        Ok(sum * (2.0 * PI / self.length))
    }

    /// Boundary value from the upper (`Plus`) or lower half `t`-plane.
    pub fn eval_boundary(&self, t: f64, side: Side) -> Result<Complex64> {
        let pv = self.eval_pv(t)?;
        let density = self.smooth_value(t) / (t * (self.length - t)).sqrt();
        Ok(pv + Complex64::new(0.0, side.sign() * PI) * density)
    }

    /// Value at `t` off the interval.
    pub fn eval_off(&self, t: Complex64) -> Complex64 {
        let x = Complex64::new(2.0, 0.0) * t / self.length - 1.0;
        let sq = (x - 1.0).sqrt() * (x + 1.0).sqrt();
        let r = x - sq;
        let mut power = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for c in &self.coeffs {
            sum += c * power;
            power *= r;
        }
        -sum * (2.0 * PI / self.length) / sq
    }
}

/// Gauss-Legendre rule on `[-1, 1]`, nodes ascending, with barycentric weights.
#[derive(Debug, Clone)]
pub struct LegendreRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
}

impl LegendreRule {
    pub fn new(n: usize) -> Result<Self> {
        let rule = GaussLegendre::new(n)
            .map_err(|e| Error::domain("quadrature", format!("Gauss-Legendre rule of order {n}: {e}")))?;
        let mut pairs = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let bary = nodes
            .iter()
            .zip(&weights)
            .enumerate()
            .map(|(j, (x, w))| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * ((1.0 - x * x) * w).sqrt()
            })
            .collect();
        Ok(LegendreRule { nodes, weights, bary })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `int_a^b f`.
    pub fn integrate<F>(&self, a: f64, b: f64, f: F) -> Complex64
    where
        F: Fn(f64) -> Complex64,
    {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| f(mid + half * x) * *w)
            .sum::<Complex64>()
            * half
    }

    /// Value at `x` of the polynomial interpolating `values` at the nodes.
    pub fn interpolate(&self, values: &[Complex64], x: f64) -> Complex64 {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for ((xj, lj), v) in self.nodes.iter().zip(&self.bary).zip(values) {
            let d = x - xj;
            if d == 0.0 {
                return *v;
            }
            num += v * (lj / d);
            den += lj / d;
        }
        num / den
    }

    /// Derivative of the interpolant at node `i`.
    pub fn derivative_at_node(&self, values: &[Complex64], i: usize) -> Complex64 {
        let (xi, li) = (self.nodes[i], self.bary[i]);
        self.nodes
            .iter()
            .zip(&self.bary)
            .zip(values)
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, ((xj, lj), v))| (v - values[i]) * (lj / li) / (xi - xj))
            .sum()
    }
}

fn panel_rule() -> &'static LegendreRule {
    static RULE: OnceLock<LegendreRule> = OnceLock::new();
    RULE.get_or_init(|| LegendreRule::new(PANEL_NODES).expect("16-point Gauss-Legendre rule"))
}

/// Bernstein-ellipse parameter of `z` relative to `[a, b]`.
pub fn bernstein_rho(z: Complex64, a: f64, b: f64) -> f64 {
    let x = (z - 0.5 * (a + b)) / (0.5 * (b - a));
    let sq = (x - 1.0).sqrt() * (x + 1.0).sqrt();
    (x + sq).norm().max((x - sq).norm())
}

/// `int_0^length f(d) dd` with geometrically graded panels toward `d = 0`, the
/// smallest panel ending at `length * 4^-levels`.
pub fn graded_integral<F>(f: F, length: f64, levels: usize) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let rule = panel_rule();
    let mut hi = length;
    let mut sum = Complex64::new(0.0, 0.0);
    for _ in 0..levels {
        let lo = 0.25 * hi;
        sum += rule.integrate(lo, hi, &f);
        hi = lo;
    }
    sum + rule.integrate(0.0, hi, &f)
}

/// How a density sample relates to the `t`-space density `h` of the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    /// `q = h(tau) tau'(phi)`.
    Plain,
    /// `q = 2 k(tau)` for `h = k / sqrt(tau (L - tau))`.
    Weighted,
}

/// Evaluation point of a Cauchy transform: `t` together with `t - L`, exact when
/// supplied by the caller. `side` picks the bank for real `t` in `(0, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TPoint {
    pub t: Complex64,
    pub from_end: Complex64,
    pub side: Option<Side>,
}

impl TPoint {
    pub fn new(t: Complex64, length: f64) -> Self {
        TPoint { t, from_end: t - length, side: None }
    }

    pub fn with_side(mut self, side: Side) -> Self {
        self.side = Some(side);
        self
    }
}

/// Cauchy transform `C(t) = int_0^{pi/2} q(phi) dphi / (L sin^2 phi - t)`.
#[derive(Debug, Clone)]
pub struct CauchyTransform {
    length: f64,
    kind: DensityKind,
    rule: LegendreRule,
    samples: Vec<Complex64>,
    ratios: Vec<Complex64>,
}

/// Integration variable for a transform: `theta = phi`, or `theta = pi/2 - phi`
/// when `t` sits nearer `L` so that `L - tau = L sin^2 theta` stays accurate.
/// The denominator is kept in the factored form `L sin(theta - r) sin(theta + r)`
/// around its root `r`, which avoids cancellation next to the pole.
#[derive(Debug, Clone, Copy)]
struct Frame {
    mirrored: bool,
    length: f64,
    root: Complex64,
}

/// `asin(s)` refined by Newton steps on `sin(theta) = s`; the library `asin`
/// loses relative accuracy in the imaginary part near the real axis.
fn accurate_asin(s: Complex64) -> Complex64 {
    let mut theta = s.asin();
    for _ in 0..3 {
        let step = (theta.sin() - s) / theta.cos();
        theta -= step;
        if step.norm() <= 1e-17 * (1.0 + theta.norm()) {
            break;
        }
    }
    theta
}

impl Frame {
    fn for_point(p: &TPoint, length: f64) -> Frame {
        let mirrored = p.t.re > 0.5 * length;
        let ratio = if mirrored { -p.from_end / length } else { p.t / length };
        Frame { mirrored, length, root: accurate_asin(ratio.sqrt()) }
    }

    /// `tau - t` at `theta`.
    fn denominator(&self, theta: f64) -> Complex64 {
        let d = self.length * (theta - self.root).sin() * (theta + self.root).sin();
        if self.mirrored {
            -d
        } else {
            d
        }
    }

    fn denominator_slope(&self, theta: f64) -> f64 {
        let d = self.length * (2.0 * theta).sin();
        if self.mirrored {
            -d
        } else {
            d
        }
    }

    fn root(&self) -> Complex64 {
        self.root
    }
}

impl CauchyTransform {
    /// Samples `q` at `n` Gauss-Legendre nodes of `[0, pi/2]`.
    pub fn new<F>(length: f64, kind: DensityKind, n: usize, q: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        let rule = LegendreRule::new(n)?;
        let samples = rule.nodes().iter().map(|x| q(FRAC_PI_4 * (1.0 + x))).collect();
        CauchyTransform::from_samples(length, kind, rule, samples)
    }

    /// Same nodes, parallel sampling.
    pub fn from_samples(length: f64, kind: DensityKind, rule: LegendreRule, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != rule.len() {
            return Err(Error::domain("quadrature", "sample count does not match the rule"));
        }
        // Plain densities vanish like tau' at both ends; the ratio q / tau' does not.
        let ratios = match kind {
            DensityKind::Plain => rule
                .nodes()
                .iter()
                .zip(&samples)
                .map(|(x, q)| q / (length * (FRAC_PI_2 * (1.0 + x)).sin()))
                .collect(),
            DensityKind::Weighted => samples.clone(),
        };
        Ok(CauchyTransform { length, kind, rule, samples, ratios })
    }

    /// Angles `phi_j` at which densities are sampled.
    pub fn sample_angles(rule: &LegendreRule) -> Vec<f64> {
        rule.nodes().iter().map(|x| FRAC_PI_4 * (1.0 + x)).collect()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Interpolated density at angle `phi`.
    pub fn density(&self, phi: f64) -> Complex64 {
        self.rule.interpolate(&self.samples, phi / FRAC_PI_4 - 1.0)
    }

    /// Theta-nodes of the global rule in `frame` with weights (in theta).
    fn global_nodes<'a>(&'a self, frame: &'a Frame) -> impl Iterator<Item = (usize, f64, f64)> + 'a {
        self.rule.nodes().iter().zip(self.rule.weights()).enumerate().map(move |(j, (x, w))| {
            let theta = if frame.mirrored { FRAC_PI_4 * (1.0 - x) } else { FRAC_PI_4 * (1.0 + x) };
            (j, theta, w * FRAC_PI_4)
        })
    }

    /// Subtraction profile `s(theta)`: `tau'` for plain densities, `1` for weighted.
    fn profile(&self, theta: Complex64) -> Complex64 {
        match self.kind {
            DensityKind::Plain => (theta * 2.0).sin() * self.length,
            DensityKind::Weighted => Complex64::new(1.0, 0.0),
        }
    }

    fn profile_slope(&self, theta: f64) -> f64 {
        match self.kind {
            DensityKind::Plain => 2.0 * self.length * (2.0 * theta).cos(),
            DensityKind::Weighted => 0.0,
        }
    }

    /// Interpolated `q / s` at the (possibly complex) angle `theta` of `frame`.
    fn ratio_at(&self, frame: &Frame, theta: Complex64) -> Complex64 {
        let x = if frame.mirrored { 1.0 - theta / FRAC_PI_4 } else { theta / FRAC_PI_4 - 1.0 };
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        for ((xj, lj), v) in self.rule.nodes.iter().zip(&self.rule.bary).zip(&self.ratios) {
            let d = x - xj;
            if d.norm() == 0.0 {
                return *v;
            }
            num += v * (lj / d);
            den += lj / d;
        }
        num / den
    }

    /// `int s(phi) dphi / (tau - t)` in closed form, with the bank for real `t` in `(0, L)`.
    fn profile_integral(&self, p: &TPoint, on_interval: bool) -> Complex64 {
        let (t, end) = (p.t, -p.from_end);
        match (self.kind, on_interval) {
            (DensityKind::Plain, false) => end.ln() - (-t).ln(),
            (DensityKind::Weighted, false) => Complex64::new(PI, 0.0) / ((-t).sqrt() * end.sqrt() * 2.0),
            (kind, true) => {
                let (t, end) = (t.re, end.re);
                let jump = match kind {
                    DensityKind::Plain => 1.0,
                    DensityKind::Weighted => 1.0 / (2.0 * (t * end).sqrt()),
                };
                let pv = if kind == DensityKind::Plain { (end / t).ln() } else { 0.0 };
                Complex64::new(pv, p.side.map_or(0.0, |s| s.sign() * PI * jump))
            }
        }
    }

    /// `t`-space density `h(t)` for real `t` in `(0, L)`.
    pub fn h_at(&self, t: f64, from_end: f64) -> Complex64 {
        let frame = Frame::for_point(&TPoint { t: t.into(), from_end: from_end.into(), side: None }, self.length);
        let ratio = self.ratio_at(&frame, frame.root());
        match self.kind {
            DensityKind::Plain => ratio,
            DensityKind::Weighted => ratio / (2.0 * (t * -from_end).sqrt()),
        }
    }

    /// Evaluates the transform. For real `t` in `(0, L)` the bank is taken from
    /// `side`; without a side the principal value is returned.
    pub fn eval(&self, p: TPoint) -> Complex64 {
        let frame = Frame::for_point(&p, self.length);
        let on_interval = p.t.im == 0.0 && p.t.re > 0.0 && p.from_end.re < 0.0;
        let root = frame.root();
        if !on_interval {
            let roots = [root, -root, Complex64::new(PI, 0.0) - root];
            let rho = roots.iter().map(|r| bernstein_rho(*r, 0.0, FRAC_PI_2)).fold(f64::INFINITY, f64::min);
            if rho.powi(2 * self.rule.len() as i32) > 1e16 {
                return self.global_nodes(&frame).map(|(j, th, w)| self.samples[j] * w / frame.denominator(th)).sum();
            }
        }
        // Subtract c * s(theta) so that the integrand is regular at the root.
        let c = self.ratio_at(&frame, root);
        let mut sum = Complex64::new(0.0, 0.0);
        for (j, th, w) in self.global_nodes(&frame) {
            let gap = self.ratios[j] - c;
            let term = if (Complex64::new(th, 0.0) - root).norm() < COINCIDENT {
                let dr_dphi = self.rule.derivative_at_node(&self.ratios, j) / FRAC_PI_4;
                let dr = if frame.mirrored { -dr_dphi } else { dr_dphi };
                (gap * self.profile_slope(th) + dr * self.profile(th.into())) / frame.denominator_slope(th)
            } else {
                gap * self.profile(th.into()) / frame.denominator(th)
            };
            sum += term * w;
        }
        sum + c * self.profile_integral(&p, on_interval)
    }

    /// `C(L)` for a density vanishing at `tau = L` fast enough for the integral to exist.
    pub fn value_at_end(&self) -> Complex64 {
        let frame = Frame { mirrored: true, length: self.length, root: Complex64::new(0.0, 0.0) };
        self.global_nodes(&frame).map(|(j, th, w)| self.samples[j] * w / frame.denominator(th)).sum()
    }
}
