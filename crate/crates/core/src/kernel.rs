//! Cauchy-kernel analogue `dV` on the elliptic surface, exposed as the coefficient
//! of `dxi`, and its hyperelliptic counterpart with `rho + 1` real anchors.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::surface::{Site, Surface};

const POLE_GUARD: f64 = 1e-12;

/// Anchor `zeta0` of the kernel: real and off both cuts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    zeta0: f64,
}

impl KernelConfig {
    pub fn new(surface: &Surface, zeta0: f64) -> Result<Self> {
        if !zeta0.is_finite() || surface.cut_of(zeta0).is_some() {
            return Err(Error::domain("kernel", format!("anchor {zeta0} lies on a cut")));
        }
        Ok(KernelConfig { zeta0 })
    }

    pub fn zeta0(&self) -> f64 {
        self.zeta0
    }
}

/// `(zeta - zeta0)/(xi - zeta0) + sign (u/v)(xi - zeta0)/(zeta - zeta0)`, the bracket
/// shared by `dV` and the leg integrals of the factorization function.
pub fn bracket(xi: Complex64, v: Complex64, zeta: Complex64, u: Complex64, zeta0: f64, sign: f64) -> Complex64 {
    let (a, b) = (zeta - zeta0, xi - zeta0);
    a / b + sign * (u / v) * b / a
}

/// Density of `dV` at source `(xi, v)` for the field point `(zeta, u)`.
pub fn dv_density(source: &Site, field: &Site, config: &KernelConfig) -> Result<Complex64> {
    let (xi, v, zeta, u) = (source.zeta, source.u, field.zeta, field.u);
    let z0 = config.zeta0;
    if (zeta - z0).norm() < POLE_GUARD {
        return Err(Error::pole("kernel", format!("field point at the anchor {z0}")));
    }
    if (xi - zeta).norm() < POLE_GUARD * (1.0 + xi.norm()) {
        return Err(if (u - v).norm() <= (u + v).norm() {
            Error::pole("kernel", format!("source and field coincide at {xi} on one sheet"))
        } else {
            Error::domain("kernel", format!("opposite-sheet coincidence at {xi} has no pointwise value"))
        });
    }
    Ok(0.5 * bracket(xi, v, zeta, u, z0, 1.0) / (xi - zeta))
}

/// Anchors `zeta_0, ..., zeta_rho` of the genus-`rho` kernel, all real and off the
/// cuts `[lo, hi]` of the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperellipticConfig {
    anchors: Vec<f64>,
}

impl HyperellipticConfig {
    pub fn new(anchors: Vec<f64>, cuts: &[(f64, f64)]) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::domain("kernel", "at least one anchor is required"));
        }
        if let Some(bad) = anchors
            .iter()
            .find(|z| !z.is_finite() || cuts.iter().any(|(lo, hi)| (lo..=hi).contains(z)))
        {
            return Err(Error::domain("kernel", format!("anchor {bad} lies on a cut")));
        }
        Ok(HyperellipticConfig { anchors })
    }

    pub fn genus(&self) -> usize {
        self.anchors.len() - 1
    }

    pub fn anchors(&self) -> &[f64] {
        &self.anchors
    }
}

/// Density of the genus-`rho` kernel
/// `1/2 [1 + (u/v) prod_j (xi - zeta_j)/(zeta - zeta_j)] [1/(xi - zeta) - 1/(xi - zeta_0)]`.
pub fn dv_density_hyperelliptic(source: &Site, field: &Site, config: &HyperellipticConfig) -> Result<Complex64> {
    let (xi, v, zeta, u) = (source.zeta, source.u, field.zeta, field.u);
    let z0 = config.anchors[0];
    if let Some(zj) = config.anchors.iter().find(|zj| (zeta - **zj).norm() < POLE_GUARD) {
        return Err(Error::pole("kernel", format!("field point at the anchor {zj}")));
    }
    if (xi - z0).norm() < POLE_GUARD {
        return Err(Error::pole("kernel", format!("source point at the anchor {z0}")));
    }
    if (xi - zeta).norm() < POLE_GUARD * (1.0 + xi.norm()) {
        return Err(Error::pole("kernel", format!("source and field coincide at {xi}")));
    }
    let ratio: Complex64 = config.anchors.iter().map(|zj| (xi - zj) / (zeta - zj)).product();
    let cauchy = 1.0 / (xi - zeta) - 1.0 / (xi - z0);
    Ok(0.5 * (1.0 + u / v * ratio) * cauchy)
}
