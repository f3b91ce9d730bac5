use num_complex::Complex64;
use wedge_vortex::kernel::{dv_density, KernelConfig};
use wedge_vortex::surface::{Sheet, Side, Site, Surface};

use super::{adaptive, c};

/// `int dW` over the lower bank of `l0` from `m` to `exp(s_max)` with unit density,
/// where `dW = (1 + u/v) dxi / (2 (xi - zeta))`. In `s = ln xi` the integrand is
/// `(1 + u e^{-3s/2} / (-i q)) / (2 (1 - zeta e^{-s}))`, `q = sqrt((1 - e^{-s})(1 - m e^{-s}))`,
/// which stays finite for any `s_max`; `s = ln m + w^2` removes the endpoint root.
pub fn weierstrass_partial_sum(surface: &Surface, field: &Site, s_max: f64) -> Complex64 {
    let m = surface.m();
    let density = |w: f64| {
        let s = m.ln() + w * w;
        let e = (-s).exp();
        let q = ((1.0 - e) * (1.0 - m * e)).sqrt();
        let ratio = field.u * (-1.5 * s).exp() / c(0.0, -q);
        0.5 * (1.0 + ratio) / (1.0 - field.zeta * e) * (2.0 * w)
    };
    let w_max = (s_max - m.ln()).sqrt();
    split_adaptive(&density, w_max)
}

/// `int dV` over the lower bank of `l0` from `m` to `r` with unit density, in `xi = m + s^2`.
pub fn dv_partial_sum(surface: &Surface, config: &KernelConfig, field: &Site, r: f64) -> Complex64 {
    let density = |s: f64| {
        let source = surface.near_m_site(c(-s * s, 0.0), Sheet::First, Some(Side::Minus));
        dv_density(&source, field, config).unwrap() * (2.0 * s)
    };
    split_adaptive(&density, (r - surface.m()).sqrt())
}

/// Adaptive quadrature over `[0, top]` on geometrically growing pieces.
fn split_adaptive(f: &dyn Fn(f64) -> Complex64, top: f64) -> Complex64 {
    let mut total = c(0.0, 0.0);
    let (mut lo, mut hi) = (0.0, 1.0f64.min(top));
    while lo < top {
        total += adaptive(f, lo, hi, 1e-12);
        lo = hi;
        hi = (hi * 4.0).min(top);
    }
    total
}

/// Least-squares slope of `log |dV|` against `log xi` on the bank `side` over
/// three decades from `start`.
pub fn decay_exponent(surface: &Surface, config: &KernelConfig, field: &Site, side: Side, start: f64) -> f64 {
    let pts: Vec<(f64, f64)> = (0..=12)
        .map(|j| {
            let xi = start * 10f64.powf(j as f64 / 4.0);
            let source = surface.near_m_site(c(surface.m() - xi, 0.0), Sheet::First, Some(side));
            (xi.ln(), dv_density(&source, field, config).unwrap().norm().ln())
        })
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>()
}
