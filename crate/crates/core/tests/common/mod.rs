//! Independent oracles shared by the integration tests: adaptive Gauss-Kronrod
//! quadrature and brute-force principal values by symmetric excision.

#![allow(dead_code)]

use std::sync::OnceLock;

pub mod kernels;
pub mod singular;

use num_complex::Complex64;
use wedge_vortex::conformal_map::{calibrate, FlowSolution, ModelParams};
use wedge_vortex::quadrature::Resolution;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
// Gauss weights of the embedded 7-point rule (odd Kronrod nodes).
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod_panel(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let centre = f(mid);
    let mut kronrod = centre * KRONROD_WEIGHTS[7];
    let mut gauss = centre * GAUSS_WEIGHTS[3];
    for j in 0..7 {
        let pair = f(mid - half * KRONROD_NODES[j]) + f(mid + half * KRONROD_NODES[j]);
        kronrod += pair * KRONROD_WEIGHTS[j];
        if j % 2 == 1 {
            gauss += pair * GAUSS_WEIGHTS[j / 2];
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).norm())
}

/// `int_a^b f` by global adaptive bisection with a 7/15-point Gauss-Kronrod pair:
/// the panel with the largest error estimate is split until the summed estimate
/// drops below `tol * max(1, |I|)`.
pub fn adaptive(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    const MAX_PANELS: usize = 4000;
    let mut panels = vec![(a, b, kronrod_panel(f, a, b))];
    loop {
        let total: Complex64 = panels.iter().map(|p| p.2 .0).sum();
        let err: f64 = panels.iter().map(|p| p.2 .1).sum();
        if err <= tol * total.norm().max(1.0) || panels.len() >= MAX_PANELS {
            return total;
        }
        let worst = (0..panels.len())
            .max_by(|i, j| panels[*i].2 .1.total_cmp(&panels[*j].2 .1))
            .unwrap();
        let (lo, hi, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return total;
        }
        panels.push((lo, mid, kronrod_panel(f, lo, mid)));
        panels.push((mid, hi, kronrod_panel(f, mid, hi)));
    }
}

/// `int_a^inf f` through `x = a + s / r`, `r` in `(0, 1]`, after a finite part on `[a, a + s]`.
pub fn adaptive_to_infinity(f: &dyn Fn(f64) -> Complex64, a: f64, s: f64, tol: f64) -> Complex64 {
    let head = adaptive(f, a, a + s, 0.5 * tol);
    let tail = adaptive(&|r: f64| if r == 0.0 { c(0.0, 0.0) } else { f(a + s / r) * (s / (r * r)) }, 0.0, 1.0, 0.5 * tol);
    head + tail
}

/// `int f(x) / (x - x0)` over `[a, b]` minus `(x0 - eps, x0 + eps)`.
pub fn excised(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, x0: f64, eps: f64, tol: f64) -> Complex64 {
    let g = |x: f64| f(x) / (x - x0);
    adaptive(&g, a, x0 - eps, tol) + adaptive(&g, x0 + eps, b, tol)
}

/// Principal value `PV int_a^b f(x) / (x - x0) dx` from symmetric excisions with
/// two Richardson steps: the excision error is odd in `eps`.
pub fn pv_excision(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, x0: f64, eps: f64, tol: f64) -> Complex64 {
    let i = |e: f64| excised(f, a, b, x0, e, tol);
    let (i1, i2, i4) = (i(eps), i(eps / 2.0), i(eps / 4.0));
    let (r1, r2) = (2.0 * i2 - i1, 2.0 * i4 - i2);
    (8.0 * r2 - r1) / 7.0
}

pub fn default_flow() -> &'static FlowSolution {
    static FLOW: OnceLock<FlowSolution> = OnceLock::new();
    FLOW.get_or_init(|| calibrate(ModelParams::default(), Resolution::default()).expect("default calibration"))
}

pub fn relative(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

