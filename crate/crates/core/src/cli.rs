//! Command-line front end: configuration, single solves, sweeps, self-checks and
//! SVG rendering.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::conformal_map::{calibrate, FlowSolution, ModelParams, VortexBoundary};
use crate::error::{Error, Result};
use crate::flowfield::{existence_check, streamline, ExistenceOptions, Streamline, Verdict};
use crate::quadrature::Resolution;
use crate::rh_solver::WedgeAngle;
use crate::surface::Side;

pub const EXIT_PHYSICAL: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONPHYSICAL: i32 = 3;
pub const EXIT_CALIBRATION: i32 = 4;

/// Grids for `sweep`; an empty grid falls back to the single model value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepGrid {
    pub alpha: Vec<f64>,
    pub gamma_over_u: Vec<f64>,
    pub m: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub resolution: Resolution,
    /// Far-field seeds on the negative real axis.
    pub seeds: Vec<f64>,
    /// Corner-side seeds as fractions of `(1, m)`.
    pub corner_seeds: Vec<f64>,
    pub out_dir: PathBuf,
    pub figures: bool,
    pub existence: ExistenceOptions,
    /// Station on the wall `arg z = 0` where the sweep reports `u_x/U`.
    pub wall_station: f64,
    pub sweep: SweepGrid,
    pub sweep_existence: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelParams::default(),
            resolution: Resolution::default(),
            seeds: vec![-0.05, -0.2, -0.5, -1.0, -2.0, -4.0],
            corner_seeds: vec![0.25, 0.5, 0.75],
            out_dir: PathBuf::from("out"),
            figures: true,
            existence: ExistenceOptions::default(),
            wall_station: 20.0,
            sweep: SweepGrid::default(),
            sweep_existence: true,
        }
    }
}

fn config_err(key: &str, value: &str, why: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key} = {value}: {why}"))
}

/// Reads a real number; multiples of pi may be written as `pi/4`, `3pi/4` or `0.9pi`.
pub fn parse_real(text: &str) -> std::result::Result<f64, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(pos) = t.find("pi") else {
        return t.parse::<f64>().map_err(|e| e.to_string());
    };
    let coef = match t[..pos].trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|e| e.to_string())?,
    };
    let rest = &t[pos + 2..];
    let denom = match rest.strip_prefix('/') {
        Some(d) => d.parse::<f64>().map_err(|e| e.to_string())?,
        None if rest.is_empty() => 1.0,
        None => return Err(format!("unexpected '{rest}'")),
    };
    Ok(coef * PI / denom)
}

/// Reads `a+bi`, `a-bi`, `bi` or `a`.
pub fn parse_complex(text: &str) -> std::result::Result<Complex64, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(parse_real(&t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => parse_real(s)?,
    };
    Ok(Complex64::new(parse_real(re)?, im))
}

fn parse_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(',').filter(|s| !s.trim().is_empty()).map(parse_real).collect()
}

fn parse_bool(text: &str) -> std::result::Result<bool, String> {
    match text.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(format!("'{other}' is not a boolean")),
    }
}

fn parse_count(text: &str) -> std::result::Result<usize, String> {
    text.trim().parse::<usize>().map_err(|e| e.to_string())
}

impl RunConfig {
    /// Sets one `key = value` entry.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let wrap = |r: std::result::Result<(), String>| r.map_err(|e| config_err(key, value, e));
        let v = value.trim();
        match key.trim() {
            "alpha" => wrap(parse_real(v).and_then(|a| {
                WedgeAngle::new(a).map(|w| self.model.alpha = w).map_err(|e| e.to_string())
            })),
            "gamma_over_U" | "gamma_over_u" => wrap(parse_real(v).map(|g| self.model.gamma_over_u = g)),
            "m" => wrap(parse_real(v).map(|m| self.model.m = m)),
            "zeta0" => wrap(parse_real(v).map(|z| self.model.zeta0 = z)),
            "delta" => wrap(parse_real(v).map(|d| self.model.delta = d)),
            "eta1" => wrap(parse_complex(v).map(|e| self.model.eta1 = e)),
            "nodes" => wrap(parse_count(v).map(|n| self.resolution.nodes = n)),
            "series_terms" => wrap(parse_count(v).map(|n| self.resolution.series_terms = n)),
            "leg_nodes" => wrap(parse_count(v).map(|n| self.resolution.leg_nodes = n)),
            "moment_nodes" => wrap(parse_count(v).map(|n| self.resolution.moment_nodes = n)),
            "seeds" => wrap(parse_list(v).map(|s| self.seeds = s)),
            "corner_seeds" => wrap(parse_list(v).map(|s| self.corner_seeds = s)),
            "out_dir" => {
                self.out_dir = PathBuf::from(v);
                Ok(())
            }
            "figures" => wrap(parse_bool(v).map(|b| self.figures = b)),
            "level_offset" => wrap(parse_real(v).map(|x| self.existence.level_offset = x)),
            "boundary_panels" => wrap(parse_count(v).map(|n| self.existence.boundary_panels = n)),
            "segment_samples" => wrap(parse_count(v).map(|n| self.existence.segment_samples = n)),
            "arc_step" => wrap(parse_real(v).map(|x| self.existence.trace.arc_step = x)),
            "zeta_box" => wrap(parse_real(v).map(|x| self.existence.trace.zeta_box = x)),
            "max_steps" => wrap(parse_count(v).map(|n| self.existence.trace.max_steps = n)),
            "wall_station" => wrap(parse_real(v).map(|x| self.wall_station = x)),
            "sweep_alpha" => wrap(parse_list(v).map(|s| self.sweep.alpha = s)),
            "sweep_gamma_over_U" | "sweep_gamma_over_u" => wrap(parse_list(v).map(|s| self.sweep.gamma_over_u = s)),
            "sweep_m" => wrap(parse_list(v).map(|s| self.sweep.m = s)),
            "sweep_existence" => wrap(parse_bool(v).map(|b| self.sweep_existence = b)),
            other => Err(Error::Config(format!("unknown key '{other}'"))),
        }
    }

    /// Parses a flat `key = value` file; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.apply(key, value)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if let Some(s) = self.seeds.iter().find(|&&s| !(s < 0.0)) {
            return Err(Error::Config(format!("far-field seed {s} must be negative")));
        }
        if let Some(s) = self.corner_seeds.iter().find(|&&s| !(s > 0.0 && s < 1.0)) {
            return Err(Error::Config(format!("corner seed fraction {s} must lie in (0, 1)")));
        }
        if !(self.existence.level_offset > 0.0) {
            return Err(Error::Config("level_offset must be positive".into()));
        }
        Ok(())
    }
}

/// Fields written to `solution.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub alpha: f64,
    #[serde(rename = "gamma_over_U")]
    pub gamma_over_u: f64,
    pub m: f64,
    pub a: f64,
    #[serde(rename = "N0")]
    pub n0: f64,
    #[serde(rename = "N1")]
    pub n1: f64,
    pub zeta1_re: f64,
    pub zeta1_im: f64,
    pub n_a: i64,
    pub n_b: i64,
    pub closure_gap: f64,
    pub physical: bool,
    pub calibration_residual: f64,
    pub circulation_error: f64,
    pub loop_integral: f64,
    pub inversion_defect: f64,
    pub segment_crossings: usize,
    pub penetrations: usize,
    pub centroid_distance: f64,
    pub vortex_area: f64,
    pub vortex_perimeter: f64,
}

/// Everything produced by one solve.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub summary: Summary,
    pub verdict: Verdict,
    pub vortex: VortexBoundary,
    pub segment: Vec<Complex64>,
    pub walls: Vec<Complex64>,
    pub velocity: Vec<(f64, f64)>,
    pub streamlines: Vec<Streamline>,
    pub penetrations: Vec<Complex64>,
}

/// Images of both walls as one polyline through the vertex: `l0-` from far out to
/// the vertex, then `l0+` outward, stopping at `|z| = reach`.
pub fn wall_polyline(flow: &FlowSolution, reach: f64) -> Result<(Vec<Complex64>, Vec<(f64, f64)>)> {
    let m = flow.params().m;
    let offsets: Vec<f64> = (0..)
        .map(|k| 1e-10 * 1.25f64.powi(k))
        .take_while(|&d| d < 1e8)
        .collect();
    let sample = |side: Side| -> Result<Vec<(Complex64, f64)>> {
        let mut out = Vec::new();
        for &d in &offsets {
            let z = flow.wall_point(m + d, side)?;
            if z.norm() > reach {
                break;
            }
            out.push((z, d));
        }
        Ok(out)
    };
    let lower = sample(Side::Minus)?;
    let upper = sample(Side::Plus)?;
    let mut walls: Vec<Complex64> = lower.iter().rev().map(|p| p.0).collect();
    walls.push(Complex64::new(0.0, 0.0));
    walls.extend(upper.iter().map(|p| p.0));
    let velocity = upper
        .par_iter()
        .map(|&(z, d)| Ok((z.re, flow.wall_velocity(m + d, Side::Plus)?.re)))
        .collect::<Result<_>>()?;
    Ok((walls, velocity))
}

/// Calibrates, runs the existence diagnostic and traces the configured seeds.
pub fn solve(cfg: &RunConfig) -> Result<Bundle> {
    cfg.validate()?;
    let flow = calibrate(cfg.model, cfg.resolution)?;
    let report = existence_check(&flow, cfg.existence)?;
    let m = cfg.model.m;
    let mut seeds = cfg.seeds.clone();
    seeds.extend(cfg.corner_seeds.iter().map(|f| 1.0 + f * (m - 1.0)));
    let vortex = report.vortex;
    let reach = vortex.points.iter().map(|z| z.norm()).fold(0.0, f64::max) * 2.5;
    let traced: Vec<Streamline> = seeds
        .par_iter()
        .map(|&s| streamline(&flow, s, cfg.existence.trace, reach))
        .collect::<Result<_>>()?;
    let mut streamlines = report.streamlines;
    streamlines.extend(traced);
    let (walls, velocity) = wall_polyline(&flow, reach)?;
    let jacobi = flow.rh().factorizer().jacobi();
    let summary = Summary {
        alpha: cfg.model.alpha.radians(),
        gamma_over_u: cfg.model.gamma_over_u,
        m,
        a: flow.report().a,
        n0: flow.n0(),
        n1: flow.n1(),
        zeta1_re: jacobi.zeta1.re,
        zeta1_im: jacobi.zeta1.im,
        n_a: jacobi.n_a,
        n_b: jacobi.n_b,
        closure_gap: vortex.closure_gap,
        physical: report.verdict == Verdict::Physical,
        calibration_residual: flow.moments().relative_residual(),
        circulation_error: (flow.circulation()? + cfg.model.gamma_over_u).abs(),
        loop_integral: flow.loop_integral().norm(),
        inversion_defect: jacobi.integrality_defect,
        segment_crossings: report.segment_crossings.len(),
        penetrations: report.penetrations.len(),
        centroid_distance: vortex.centroid().norm(),
        vortex_area: vortex.area(),
        vortex_perimeter: vortex.perimeter(),
    };
    let mut penetrations = report.segment_crossings;
    penetrations.extend(report.penetrations);
    Ok(Bundle {
        summary,
        verdict: report.verdict,
        vortex,
        segment: report.segment_image,
        walls,
        velocity,
        streamlines,
        penetrations,
    })
}

fn write_xy(path: &Path, points: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
    let mut out = csv::Writer::from_path(path).map_err(csv_err)?;
    out.write_record(["x", "y"]).map_err(csv_err)?;
    for (x, y) in points {
        out.write_record([format!("{x:.15e}"), format!("{y:.15e}")]).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

fn xy(points: &[Complex64]) -> impl Iterator<Item = (f64, f64)> + '_ {
    points.iter().map(|z| (z.re, z.im))
}

/// Writes the bundle into `dir`.
pub fn write_bundle(bundle: &Bundle, dir: &Path, figures: bool) -> Result<()> {
    fs::create_dir_all(dir.join("streamlines"))?;
    fs::write(dir.join("solution.json"), serde_json::to_string_pretty(&bundle.summary)?)?;
    write_xy(&dir.join("vortex.csv"), xy(&bundle.vortex.points))?;
    write_xy(&dir.join("segment.csv"), xy(&bundle.segment))?;
    write_xy(&dir.join("walls.csv"), xy(&bundle.walls))?;
    write_xy(&dir.join("velocity.csv"), bundle.velocity.iter().copied())?;
    for (k, line) in bundle.streamlines.iter().enumerate() {
        write_xy(&dir.join("streamlines").join(format!("seed_{k:02}.csv")), xy(&line.image))?;
    }
    if bundle.verdict == Verdict::Nonphysical {
        write_xy(&dir.join("penetration.csv"), xy(&bundle.penetrations))?;
    }
    if figures {
        render_dir(dir)?;
    }
    Ok(())
}

/// A polyline layer of a figure.
#[derive(Debug, Clone)]
pub struct Layer {
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub width: f64,
}

/// Minimal SVG line plot with equal or free axis scaling.
#[derive(Debug, Clone, Default)]
pub struct Figure {
    pub title: String,
    pub layers: Vec<Layer>,
    pub markers: Vec<(f64, f64)>,
    pub equal_axes: bool,
}

impl Figure {
    pub fn render(&self) -> String {
        let (w, h, pad) = (800.0, 800.0, 60.0);
        let all = self.layers.iter().flat_map(|l| l.points.iter()).chain(&self.markers);
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in all.filter(|p| p.0.is_finite() && p.1.is_finite()) {
            (x0, x1, y0, y1) = (x0.min(x), x1.max(x), y0.min(y), y1.max(y));
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let (mut sx, mut sy) = ((w - 2.0 * pad) / (x1 - x0).max(1e-300), (h - 2.0 * pad) / (y1 - y0).max(1e-300));
        if self.equal_axes {
            sx = sx.min(sy);
            sy = sx;
        }
        let px = |x: f64| pad + (x - x0) * sx;
        let py = |y: f64| h - pad - (y - y0) * sy;
        let mut svg = String::new();
        writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
        writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(svg, r#"<text x="{}" y="30" font-family="sans-serif" font-size="18" text-anchor="middle">{}</text>"#, w / 2.0, self.title).unwrap();
        let axis = |svg: &mut String, a: (f64, f64), b: (f64, f64)| {
            writeln!(svg, r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-width="1"/>"##, a.0, a.1, b.0, b.1).unwrap();
        };
        axis(&mut svg, (pad, h - pad), (w - pad, h - pad));
        axis(&mut svg, (pad, h - pad), (pad, pad));
        for (v, anchor) in [(x0, "start"), (x1, "end")] {
            writeln!(svg, r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{v:.4}</text>"#, px(v), h - pad + 18.0).unwrap();
        }
        for v in [y0, y1] {
            writeln!(svg, r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">{v:.4}</text>"#, pad - 6.0, py(v)).unwrap();
        }
        for layer in &self.layers {
            let mut path = String::new();
            for &(x, y) in &layer.points {
                write!(path, "{:.3},{:.3} ", px(x), py(y)).unwrap();
            }
            writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="{}"/>"#, path.trim_end(), layer.color, layer.width).unwrap();
        }
        for &(x, y) in &self.markers {
            writeln!(svg, r#"<circle cx="{:.3}" cy="{:.3}" r="4" fill="red"/>"#, px(x), py(y)).unwrap();
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn read_xy(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut input = csv::Reader::from_path(path).map_err(csv_err)?;
    input
        .deserialize::<(f64, f64)>()
        .map(|row| row.map_err(|e| Error::Config(format!("{}: {e}", path.display()))))
        .collect()
}

/// Renders `flow.svg` and `velocity.svg` from the CSV files in `dir`.
pub fn render_dir(dir: &Path) -> Result<()> {
    let vortex = read_xy(&dir.join("vortex.csv"))?;
    let mut flow = Figure { title: "Vortex, walls and streamlines".into(), equal_axes: true, ..Figure::default() };
    flow.layers.push(Layer { points: read_xy(&dir.join("walls.csv"))?, color: "black", width: 2.0 });
    let stream_dir = dir.join("streamlines");
    if stream_dir.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(&stream_dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        for f in files {
            flow.layers.push(Layer { points: read_xy(&f)?, color: "steelblue", width: 1.0 });
        }
    }
    let segment = dir.join("segment.csv");
    if segment.exists() {
        flow.layers.push(Layer { points: read_xy(&segment)?, color: "gray", width: 1.0 });
    }
    // Cusps sit at the first point and at the midpoint of the closed polyline.
    if let (Some(&first), Some(&mid)) = (vortex.first(), vortex.get(vortex.len() / 2)) {
        flow.markers = vec![first, mid];
    }
    flow.layers.push(Layer { points: vortex, color: "darkred", width: 2.0 });
    fs::write(dir.join("flow.svg"), flow.render())?;
    let speed = Figure {
        title: "u_x/U on the wall arg z = 0".into(),
        layers: vec![Layer { points: read_xy(&dir.join("velocity.csv"))?, color: "black", width: 1.5 }],
        ..Figure::default()
    };
    fs::write(dir.join("velocity.svg"), speed.render())?;
    Ok(())
}

/// One row of a sweep table.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    #[serde(rename = "gamma_over_U")]
    pub gamma_over_u: f64,
    pub m: f64,
    pub a: f64,
    pub calibration_residual: f64,
    pub closure_gap: f64,
    pub physical: Option<bool>,
    pub vortex_area: f64,
    pub vortex_perimeter: f64,
    pub centroid_distance: f64,
    pub wall_speed: f64,
    pub error: Option<String>,
}

fn sweep_point(cfg: &RunConfig, model: ModelParams) -> Result<SweepRow> {
    model.validate()?;
    let flow = calibrate(model, cfg.resolution)?;
    let (vortex, physical) = if cfg.sweep_existence {
        let report = existence_check(&flow, cfg.existence)?;
        (report.vortex, Some(report.verdict == Verdict::Physical))
    } else {
        (flow.vortex_boundary(cfg.existence.boundary_panels)?, None)
    };
    Ok(SweepRow {
        alpha: model.alpha.radians(),
        gamma_over_u: model.gamma_over_u,
        m: model.m,
        a: flow.report().a,
        calibration_residual: flow.moments().relative_residual(),
        closure_gap: vortex.closure_gap,
        physical,
        vortex_area: vortex.area(),
        vortex_perimeter: vortex.perimeter(),
        centroid_distance: vortex.centroid().norm(),
        wall_speed: flow.wall_speed_at(cfg.wall_station)?,
        error: None,
    })
}

/// Runs every grid point; failures are recorded in the row and the sweep continues.
pub fn sweep(cfg: &RunConfig) -> Vec<SweepRow> {
    let pick = |grid: &[f64], fallback: f64| if grid.is_empty() { vec![fallback] } else { grid.to_vec() };
    let alphas = pick(&cfg.sweep.alpha, cfg.model.alpha.radians());
    let gammas = pick(&cfg.sweep.gamma_over_u, cfg.model.gamma_over_u);
    let ms = pick(&cfg.sweep.m, cfg.model.m);
    let mut points = Vec::new();
    for &a in &alphas {
        for &g in &gammas {
            points.extend(ms.iter().map(|&m| (a, g, m)));
        }
    }
    points
        .par_iter()
        .map(|&(alpha, gamma, m)| {
            let row = WedgeAngle::new(alpha).and_then(|w| {
                let model = ModelParams { alpha: w, gamma_over_u: gamma, m, ..cfg.model };
                sweep_point(cfg, model)
            });
            row.unwrap_or_else(|e| SweepRow {
                alpha,
                gamma_over_u: gamma,
                m,
                a: f64::NAN,
                calibration_residual: f64::NAN,
                closure_gap: f64::NAN,
                physical: None,
                vortex_area: f64::NAN,
                vortex_perimeter: f64::NAN,
                centroid_distance: f64::NAN,
                wall_speed: f64::NAN,
                error: Some(e.to_string()),
            })
        })
        .collect()
}

pub fn write_sweep(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut out = csv::Writer::from_path(path).map_err(csv_err)?;
    out.write_record([
        "alpha",
        "gamma_over_U",
        "m",
        "a",
        "calibration_residual",
        "closure_gap",
        "physical",
        "vortex_area",
        "vortex_perimeter",
        "centroid_distance",
        "wall_speed",
        "error",
    ])
    .map_err(csv_err)?;
    let num = |x: f64| format!("{x:.15e}");
    for r in rows {
        out.write_record([
            num(r.alpha),
            num(r.gamma_over_u),
            num(r.m),
            num(r.a),
            num(r.calibration_residual),
            num(r.closure_gap),
            r.physical.map_or(String::new(), |p| p.to_string()),
            num(r.vortex_area),
            num(r.vortex_perimeter),
            num(r.centroid_distance),
            num(r.wall_speed),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Outcome of one self-check.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Quick invariant checks on the default configuration.
pub fn self_check() -> Vec<CheckLine> {
    let mut lines = Vec::new();
    let mut push = |name, passed, detail: String| lines.push(CheckLine { name, passed, detail });
    let flow = match calibrate(ModelParams::default(), Resolution::default()) {
        Ok(f) => f,
        Err(e) => {
            push("calibration", false, e.to_string());
            return lines;
        }
    };
    let res = flow.moments().relative_residual();
    push("endpoint root a = m", flow.report().endpoint_root && res < 1e-6, format!("relative residual {res:.2e}"));
    match flow.circulation() {
        Ok(c) => push("circulation", (c - 0.1).abs() < 1e-9, format!("2 int (N0 + N1 xi)/sqrt|p| = {c:.12}")),
        Err(e) => push("circulation", false, e.to_string()),
    }
    match flow.vortex_boundary(400) {
        Ok(vb) => push("closure", vb.closure_gap < 1e-6, format!("gap {:.2e}", vb.closure_gap)),
        Err(e) => push("closure", false, e.to_string()),
    }
    let target = Complex64::new(-1.0, 0.5);
    let anchor = Complex64::new(flow.anchor(), 0.0);
    let two_paths = flow.map_point(target).and_then(|a| {
        let b = flow.map_point_via(&[anchor, Complex64::new(flow.anchor(), -1.0), Complex64::new(-1.0, -1.0), target])?;
        Ok((a - b).norm())
    });
    match two_paths {
        Ok(d) => push("two-path agreement", d < 1e-7, format!("difference {d:.2e}")),
        Err(e) => push("two-path agreement", false, e.to_string()),
    }
    let alpha = flow.params().alpha.radians();
    let walls = [1.2, 3.0, 30.0].iter().try_fold(0.0f64, |worst, &xi| {
        let ac = flow.wall_point(xi, Side::Plus)?;
        let ab = flow.wall_point(xi, Side::Minus)?;
        let vac = flow.wall_velocity(xi, Side::Plus)?;
        let vab = flow.wall_velocity(xi, Side::Minus)?;
        Ok::<f64, Error>(
            worst
                .max(ac.im.abs() / ac.norm())
                .max((ab.arg() - alpha).abs())
                .max(vac.arg().abs())
                .max((vab.arg() - (PI - alpha)).abs()),
        )
    });
    match walls {
        Ok(w) => push("wall contracts", w < 1e-8, format!("worst deviation {w:.2e}")),
        Err(e) => push("wall contracts", false, e.to_string()),
    }
    match existence_check(&flow, ExistenceOptions::default()) {
        Ok(r) => push("existence", r.verdict == Verdict::Physical, format!("{:?}", r.verdict)),
        Err(e) => push("existence", false, e.to_string()),
    }
    lines
}

#[derive(Debug, Parser)]
#[command(name = "wedge-vortex", version, about = "Wedge flow past a vortex with a cusped boundary")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one configuration and write the artifact bundle.
    Solve(RunArgs),
    /// Solve a grid of configurations and write sweep.csv.
    Sweep(RunArgs),
    /// Run the built-in invariant checks.
    Check,
    /// Re-render the SVG figures from the CSV files in a directory.
    Plot {
        #[arg(long, default_value = "out")]
        dir: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Wedge angle; accepts forms like pi/4.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long = "gamma-over-u", allow_hyphen_values = true)]
    pub gamma_over_u: Option<String>,
    #[arg(long)]
    pub m: Option<String>,
    /// Any configuration key, repeated as needed.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl RunArgs {
    pub fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        for (key, value) in [("alpha", &self.alpha), ("gamma_over_U", &self.gamma_over_u), ("m", &self.m)] {
            if let Some(v) = value {
                cfg.apply(key, v)?;
            }
        }
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{item}'")))?;
            cfg.apply(k, v)?;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_CONFIG,
        Error::Calibration(_) => EXIT_CALIBRATION,
        _ => EXIT_FAILURE,
    }
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Solve(args) => args.config().and_then(|cfg| {
            let bundle = solve(&cfg)?;
            write_bundle(&bundle, &cfg.out_dir, cfg.figures)?;
            println!("{}", serde_json::to_string_pretty(&bundle.summary)?);
            Ok(match bundle.verdict {
                Verdict::Physical => EXIT_PHYSICAL,
                Verdict::Nonphysical => {
                    eprintln!("NONPHYSICAL: evidence in {}", cfg.out_dir.join("penetration.csv").display());
                    EXIT_NONPHYSICAL
                }
            })
        }),
        Command::Sweep(args) => args.config().and_then(|cfg| {
            fs::create_dir_all(&cfg.out_dir)?;
            let rows = sweep(&cfg);
            let path = cfg.out_dir.join("sweep.csv");
            write_sweep(&rows, &path)?;
            println!("{} rows written to {}", rows.len(), path.display());
            Ok(EXIT_PHYSICAL)
        }),
        Command::Check => {
            let lines = self_check();
            for l in &lines {
                println!("{} {}: {}", if l.passed { "PASS" } else { "FAIL" }, l.name, l.detail);
            }
            Ok(if lines.iter().all(|l| l.passed) { EXIT_PHYSICAL } else { EXIT_FAILURE })
        }
        Command::Plot { dir } => render_dir(&dir).map(|_| EXIT_PHYSICAL),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_angles_and_complex_values() {
        assert_eq!(parse_real("pi/4").unwrap(), PI / 4.0);
        assert!((parse_real("3pi/4").unwrap() - 0.75 * PI).abs() < 1e-15);
        assert!((parse_real("0.9pi").unwrap() - 0.9 * PI).abs() < 1e-15);
        assert_eq!(parse_real("-0.1").unwrap(), -0.1);
        assert_eq!(parse_complex("1+0.5i").unwrap(), Complex64::new(1.0, 0.5));
        assert_eq!(parse_complex("1-i").unwrap(), Complex64::new(1.0, -1.0));
        assert_eq!(parse_complex("2.5i").unwrap(), Complex64::new(0.0, 2.5));
        assert_eq!(parse_complex("1e-3+2e-1i").unwrap(), Complex64::new(1e-3, 0.2));
        assert!(parse_real("pix").is_err());
    }

    #[test]
    fn config_file_and_overrides() {
        let cfg = RunConfig::parse("# comment\nalpha = pi/2\nm = 1.2  # trailing\neta1 = 1+i\nseeds = -0.1, -1\n").unwrap();
        assert_eq!(cfg.model.alpha.radians(), PI / 2.0);
        assert_eq!(cfg.model.m, 1.2);
        assert_eq!(cfg.model.eta1, Complex64::new(1.0, 1.0));
        assert_eq!(cfg.seeds, vec![-0.1, -1.0]);
        assert!(matches!(RunConfig::parse("colour = red"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("alpha"), Err(Error::Config(_))));
    }

    #[test]
    fn positive_circulation_is_rejected() {
        let mut cfg = RunConfig::default();
        cfg.apply("gamma_over_U", "0.1").unwrap();
        let err = cfg.validate().unwrap_err();
        assert_eq!(exit_code(&err), EXIT_CONFIG);
        assert!(err.to_string().contains("negative"));
    }

    #[test]
    fn figure_renders_layers() {
        let fig = Figure {
            title: "t".into(),
            layers: vec![Layer { points: vec![(0.0, 0.0), (1.0, 2.0)], color: "black", width: 1.0 }],
            markers: vec![(0.5, 0.5)],
            equal_axes: true,
        };
        let svg = fig.render();
        assert!(svg.starts_with("<svg") && svg.contains("<polyline") && svg.contains("<circle"));
    }
}
