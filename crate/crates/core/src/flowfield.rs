//! Streamline preimages as level curves of `Im int omega0`, their images in the
//! flow plane, and the penetration diagnostic for nonphysical solutions.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::conformal_map::{FlowSolution, VortexBoundary};
use crate::error::{Error, Result};
use crate::quadrature::LegendreRule;
use crate::surface::SurfacePoint;

const CHORD_NODES: usize = 6;

/// Options for tracing a preimage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// Largest arc-length step in the parametric plane, relative to `max(1, |zeta|)`.
    pub arc_step: f64,
    /// Tracing stops once `|zeta|` exceeds this.
    pub zeta_box: f64,
    pub max_steps: usize,
    /// Start into the lower half-plane instead of the upper one.
    pub lower: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { arc_step: 2e-2, zeta_box: 50.0, max_steps: 40_000, lower: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    Closed,
    LeftBox,
    HitCut,
    MaxSteps,
}

/// A traced level curve of `Im W`, `W = int omega0 dzeta`.
#[derive(Debug, Clone)]
pub struct Preimage {
    pub seed: f64,
    pub points: Vec<Complex64>,
    /// `W - W(seed)` at each point, accumulated along the chords.
    pub potential: Vec<Complex64>,
    /// Largest `|Im (W - W(seed))|` after correction.
    pub drift: f64,
    pub termination: Termination,
}

/// A streamline: preimage and its image in the flow plane.
#[derive(Debug, Clone)]
pub struct Streamline {
    pub preimage: Preimage,
    pub image: Vec<Complex64>,
}

fn distance_to_cuts(z: Complex64, m: f64) -> f64 {
    let to_l1 = if (0.0..=1.0).contains(&z.re) { z.im.abs() } else { z.norm().min((z - 1.0).norm()) };
    let to_l0 = if z.re >= m { z.im.abs() } else { (z - m).norm() };
    to_l1.min(to_l0)
}

struct Tracer<'a> {
    flow: &'a FlowSolution,
    rule: LegendreRule,
}

impl Tracer<'_> {
    fn omega0(&self, z: Complex64) -> Complex64 {
        let site = self.flow.surface().site(SurfacePoint::first(z));
        self.flow.omega0(&site)
    }

    /// Unit tangent `conj(omega0)/|omega0|`, oriented by `sense`.
    fn direction(&self, z: Complex64, sense: f64) -> Complex64 {
        let w = self.omega0(z).conj();
        sense * w / w.norm()
    }

    fn chord(&self, a: Complex64, b: Complex64) -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = Complex64::new(0.0, 0.0);
        for (x, w) in self.rule.nodes().iter().zip(self.rule.weights()) {
            sum += self.omega0(mid + half * x) * *w;
        }
        sum * half
    }
}

/// Traces the level curve of `Im W` through the real seed `xi0`.
pub fn trace_preimage(flow: &FlowSolution, xi0: f64, opts: TraceOptions) -> Result<Preimage> {
    let m = flow.params().m;
    if !(xi0 < 0.0 || (xi0 > 1.0 && xi0 < m)) {
        return Err(Error::domain("flowfield", format!("seed {xi0} must lie in (-inf, 0) or (1, {m})")));
    }
    if !(opts.arc_step > 0.0) {
        return Err(Error::Config(format!("arc step {} must be positive", opts.arc_step)));
    }
    let tracer = Tracer { flow, rule: LegendreRule::new(CHORD_NODES)? };
    let seed = Complex64::new(xi0, 0.0);
    let w0 = tracer.omega0(seed);
    if w0.norm() < 1e-12 {
        return Err(Error::Stagnation(xi0));
    }
    let up = if tracer.direction(seed, 1.0).im >= 0.0 { 1.0 } else { -1.0 };
    let sense = if opts.lower { -up } else { up };
    let mut points = vec![seed];
    let mut potential = vec![Complex64::new(0.0, 0.0)];
    let mut drift = 0.0f64;
    let mut left_seed = false;
    for _ in 0..opts.max_steps {
        let z = *points.last().expect("nonempty");
        let w = *potential.last().expect("nonempty");
        let room = distance_to_cuts(z, m);
        let h = (opts.arc_step * z.norm().max(1.0)).min(0.25 * room);
        if room < 1e-14 {
            return Ok(Preimage { seed: xi0, points, potential, drift, termination: Termination::HitCut });
        }
        let k1 = tracer.direction(z, sense);
        let k2 = tracer.direction(z + 0.5 * h * k1, sense);
        let k3 = tracer.direction(z + 0.5 * h * k2, sense);
        let k4 = tracer.direction(z + h * k3, sense);
        let mut next = z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let mut w_next = w + tracer.chord(z, next);
        // Newton step back onto the level set along the normal.
        for _ in 0..2 {
            let om = tracer.omega0(next);
            let shift = -w_next.im / om.norm();
            let delta = Complex64::new(0.0, shift) * om.conj() / om.norm();
            next += delta;
            w_next = w + tracer.chord(z, next);
        }
        drift = drift.max(w_next.im.abs());
        points.push(next);
        potential.push(w_next);
        let from_seed = (next - seed).norm();
        if from_seed > 4.0 * h {
            left_seed = true;
        }
        if left_seed && from_seed < 1.5 * h {
            points.push(seed);
            let last = w_next + tracer.chord(next, seed);
            potential.push(last);
            return Ok(Preimage { seed: xi0, points, potential, drift, termination: Termination::Closed });
        }
        if next.norm() > opts.zeta_box {
            return Ok(Preimage { seed: xi0, points, potential, drift, termination: Termination::LeftBox });
        }
    }
    Ok(Preimage { seed: xi0, points, potential, drift, termination: Termination::MaxSteps })
}

/// Maps a traced preimage into the flow plane, truncating where `|z|` exceeds
/// `z_limit`.
pub fn physical_streamline(flow: &FlowSolution, preimage: Preimage, z_limit: f64) -> Result<Streamline> {
    let start = flow.map_point(preimage.points[0])?;
    let steps: Vec<Complex64> = preimage
        .points
        .par_windows(2)
        .map(|pair| flow.integrate_path(pair))
        .collect::<Result<_>>()?;
    let mut image = vec![start];
    let mut z = start;
    for dz in steps {
        z += dz;
        if z.norm() > z_limit {
            break;
        }
        image.push(z);
    }
    Ok(Streamline { preimage, image })
}

/// Full streamline through a real seed: the lower-half trace reversed, then the
/// upper-half trace, each mapped from the seed's image.
pub fn streamline(flow: &FlowSolution, xi0: f64, opts: TraceOptions, z_limit: f64) -> Result<Streamline> {
    let upper = physical_streamline(flow, trace_preimage(flow, xi0, TraceOptions { lower: false, ..opts })?, z_limit)?;
    let lower = physical_streamline(flow, trace_preimage(flow, xi0, TraceOptions { lower: true, ..opts })?, z_limit)?;
    let join = |a: &[Complex64], b: &[Complex64]| -> Vec<Complex64> { a.iter().rev().chain(&b[1..]).copied().collect() };
    let preimage = Preimage {
        seed: xi0,
        points: join(&lower.preimage.points, &upper.preimage.points),
        potential: join(&lower.preimage.potential, &upper.preimage.potential),
        drift: upper.preimage.drift.max(lower.preimage.drift),
        termination: upper.preimage.termination,
    };
    Ok(Streamline { preimage, image: join(&lower.image, &upper.image) })
}

/// Stream-function difference between the vortex boundary and the wall, taken
/// along `(1, m)` with `xi = 1 + (m - 1) sin^2 theta`.
pub fn wall_flux(flow: &FlowSolution) -> Result<f64> {
    let m = flow.params().m;
    let (n0, n1) = (flow.n0(), flow.n1());
    let rule = LegendreRule::new(32)?;
    Ok(rule
        .integrate(0.0, std::f64::consts::FRAC_PI_2, |theta| {
            let xi = 1.0 + (m - 1.0) * theta.sin().powi(2);
            Complex64::new(2.0 * (n0 + n1 * xi) / xi.sqrt(), 0.0)
        })
        .re
        .abs())
}

/// Seeds whose stream-function level differs from the vortex boundary's by
/// `offset` times the wall flux. Returns one seed left of `0` and one right of `1`.
pub fn boundary_seeds(flow: &FlowSolution, offset: f64) -> Result<(f64, f64)> {
    let m = flow.params().m;
    let (n0, n1) = (flow.n0(), flow.n1());
    let level = offset * wall_flux(flow)?;
    let rule = LegendreRule::new(24)?;
    // Level offsets in the variables xi = -s^2 and xi = 1 + (m - 1) sin^2 theta,
    // which remove the inverse square roots at the ends of the intervals.
    let left = |s: f64| {
        rule.integrate(0.0, s, |t| {
            let xi = -t * t;
            Complex64::new(2.0 * (n0 + n1 * xi) / ((1.0 - xi) * (m - xi)).sqrt(), 0.0)
        })
        .re
        .abs()
    };
    let right = |theta: f64| {
        rule.integrate(0.0, theta, |t| {
            let xi = 1.0 + (m - 1.0) * t.sin().powi(2);
            Complex64::new(2.0 * (n0 + n1 * xi) / xi.sqrt(), 0.0)
        })
        .re
        .abs()
    };
    let solve = |f: &dyn Fn(f64) -> f64, cap: f64| -> Result<f64> {
        if f(cap) < level {
            return Err(Error::domain("flowfield", format!("level {level} is not reached before {cap}")));
        }
        let (mut lo, mut hi) = (0.0, cap);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let s_left = solve(&left, 10.0)?;
    let theta = solve(&right, std::f64::consts::FRAC_PI_2)?;
    Ok((-s_left * s_left, 1.0 + (m - 1.0) * theta.sin().powi(2)))
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Proper crossing point of segments `p0 p1` and `q0 q1`.
fn crossing(p0: Complex64, p1: Complex64, q0: Complex64, q1: Complex64) -> Option<Complex64> {
    let (r, s) = (p1 - p0, q1 - q0);
    let denom = cross(r, s);
    if denom == 0.0 {
        return None;
    }
    let t = cross(q0 - p0, s) / denom;
    let u = cross(q0 - p0, r) / denom;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then(|| p0 + r * t)
}

fn polyline_crossings(a: &[Complex64], b: &[Complex64], skip: impl Fn(usize, usize) -> bool) -> Vec<Complex64> {
    let mut hits = Vec::new();
    for (i, pa) in a.windows(2).enumerate() {
        for (j, pb) in b.windows(2).enumerate() {
            if skip(i, j) {
                continue;
            }
            if let Some(x) = crossing(pa[0], pa[1], pb[0], pb[1]) {
                hits.push(x);
            }
        }
    }
    hits
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Physical,
    Nonphysical,
}

/// Options for the existence diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExistenceOptions {
    /// Stream-function offset of the near-boundary seeds from the vortex boundary,
    /// relative to the wall flux.
    pub level_offset: f64,
    pub boundary_panels: usize,
    pub segment_samples: usize,
    pub trace: TraceOptions,
}

impl Default for ExistenceOptions {
    fn default() -> Self {
        ExistenceOptions { level_offset: 1e-3, boundary_panels: 400, segment_samples: 120, trace: TraceOptions::default() }
    }
}

/// Outcome of the existence diagnostic with the crossing points found.
#[derive(Debug, Clone)]
pub struct ExistenceReport {
    pub verdict: Verdict,
    /// Crossings of the `[1, m]` image with the vortex boundary.
    pub segment_crossings: Vec<Complex64>,
    /// Crossings of near-boundary streamlines with the vortex boundary.
    pub penetrations: Vec<Complex64>,
    pub vortex: VortexBoundary,
    pub streamlines: Vec<Streamline>,
    pub segment_image: Vec<Complex64>,
}

/// Image of `[1, m]` from `f(1)` to the vertex, sampled with clustering toward both ends.
pub fn segment_image(flow: &FlowSolution, samples: usize) -> Result<Vec<Complex64>> {
    let m = flow.params().m;
    (0..=samples)
        .into_par_iter()
        .map(|j| {
            let theta = std::f64::consts::PI * j as f64 / samples as f64;
            let xi = 1.0 + 0.5 * (m - 1.0) * (1.0 - theta.cos());
            flow.map_segment(xi.clamp(1.0, m))
        })
        .collect()
}

/// Flags a solution as nonphysical when the image of `[1, m]` crosses the vortex
/// boundary or when streamlines next to the boundary cross into it.
pub fn existence_check(flow: &FlowSolution, opts: ExistenceOptions) -> Result<ExistenceReport> {
    let vortex = flow.vortex_boundary(opts.boundary_panels)?;
    let seg = segment_image(flow, opts.segment_samples)?;
    let last_edge = vortex.points.len() - 2;
    // Edges meeting at f(1) share that endpoint with the segment image.
    let segment_crossings = polyline_crossings(&seg, &vortex.points, |i, j| i == 0 && (j == 0 || j == last_edge));
    let (left, right) = boundary_seeds(flow, opts.level_offset)?;
    let z_limit = 20.0 * vortex.diameter + vortex.points.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let streamlines: Vec<Streamline> = [left, right]
        .par_iter()
        .map(|&seed| streamline(flow, seed, opts.trace, z_limit))
        .collect::<Result<_>>()?;
    let penetrations: Vec<Complex64> = streamlines
        .iter()
        .flat_map(|s| polyline_crossings(&s.image, &vortex.points, |_, _| false))
        .collect();
    let verdict = if segment_crossings.is_empty() && penetrations.is_empty() { Verdict::Physical } else { Verdict::Nonphysical };
    Ok(ExistenceReport { verdict, segment_crossings, penetrations, vortex, streamlines, segment_image: seg })
}
