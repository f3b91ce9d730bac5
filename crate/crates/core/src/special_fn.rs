//! Complete elliptic integrals and Jacobi elliptic functions.
//!
//! K and E come from the arithmetic-geometric mean. The Jacobi functions at real
//! argument use the descending Landen sequence; complex arguments are assembled
//! with the addition formulas from real evaluations at moduli k and k'.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const AGM_TOL: f64 = 1e-16;
const POLE_TOL: f64 = 1e-10;

/// Elliptic modulus `k` with `0 < k < 1`, carried together with `k' = sqrt(1 - k^2)`
/// so that the complement of the complement is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulus {
    k: f64,
    kp: f64,
}

impl Modulus {
    pub fn new(k: f64) -> Result<Self> {
        if k.is_finite() && k > 0.0 && k < 1.0 {
            Ok(Modulus { k, kp: ((1.0 - k) * (1.0 + k)).sqrt() })
        } else {
            Err(Error::domain("special_fn", format!("modulus {k} outside (0, 1)")))
        }
    }

    /// The modulus attached to the slit parameter, `k = m^{-1/2}`.
    pub fn from_slit(m: f64) -> Result<Self> {
        if !(m > 1.0) {
            return Err(Error::domain("special_fn", format!("slit parameter {m} must exceed 1")));
        }
        Modulus::new(m.powf(-0.5))
    }

    pub fn k(self) -> f64 {
        self.k
    }

    /// Complementary modulus `sqrt(1 - k^2)`.
    pub fn kprime(self) -> f64 {
        self.kp
    }

    pub fn complementary(self) -> Modulus {
        Modulus { k: self.kp, kp: self.k }
    }
}

struct Agm {
    a: Vec<f64>,
    c: Vec<f64>,
}

fn agm_sequence(k: f64, kp: f64) -> Agm {
    let (mut a, mut b, mut c) = (1.0, kp, k);
    let mut seq = Agm { a: vec![a], c: vec![c] };
    for _ in 0..64 {
        if c.abs() <= AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        seq.a.push(a);
        seq.c.push(c);
    }
    seq
}

/// Complete elliptic integral of the first kind.
pub fn elliptic_k(k: Modulus) -> f64 {
    let seq = agm_sequence(k.k(), k.kprime());
    PI / (2.0 * seq.a.last().copied().unwrap_or(1.0))
}

/// `K'(k) = K(sqrt(1 - k^2))`.
pub fn elliptic_kprime(k: Modulus) -> f64 {
    elliptic_k(k.complementary())
}

/// Complete elliptic integral of the second kind.
pub fn elliptic_e(k: Modulus) -> f64 {
    let seq = agm_sequence(k.k(), k.kprime());
    let big_k = PI / (2.0 * seq.a.last().copied().unwrap_or(1.0));
    let mut sum = 0.5 * k.k() * k.k();
    let mut pow = 0.5;
    for c in seq.c.iter().skip(1) {
        pow *= 2.0;
        sum += pow * c * c;
    }
    big_k * (1.0 - sum)
}

/// Jacobi functions `(sn, cn, dn)` at real argument.
pub fn sncndn_real(x: f64, k: Modulus) -> (f64, f64, f64) {
    let kp = k.kprime();
    if kp < 1e-8 {
        // Hyperbolic limit with the first correction in k'^2.
        let (sech, tanh) = (1.0 / x.cosh(), x.tanh());
        let corr = 0.25 * kp * kp;
        let sc = x.sinh() * x.cosh();
        return (
            tanh + corr * (sc - x) * sech * sech,
            sech - corr * (sc - x) * tanh * sech,
            sech + corr * (sc + x) * tanh * sech,
        );
    }
    let seq = agm_sequence(k.k(), k.kprime());
    let n = seq.a.len() - 1;
    let mut phi = 2f64.powi(n as i32) * seq.a[n] * x;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (seq.c[j] / seq.a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = (kp * kp + k.k() * k.k() * cn * cn).sqrt();
    (sn, cn, dn)
}

fn reduce(x: f64, period: f64) -> f64 {
    let r = x - period * (x / period).round();
    if r <= -0.5 * period {
        r + period
    } else {
        r
    }
}

/// Jacobi `(sn, cn, dn)` at complex argument.
///
/// Fails with a pole error when `z` lies within `1e-10` (in lattice-reduced,
/// period-normalized coordinates) of a pole `iK' + 2pK + 2qiK'`.
pub fn jacobi_sncndn(z: Complex64, k: Modulus) -> Result<(Complex64, Complex64, Complex64)> {
    let big_k = elliptic_k(k);
    let big_kp = elliptic_kprime(k);
    let x = reduce(z.re, 4.0 * big_k);
    let y = reduce(z.im, 4.0 * big_kp);
    let xr = reduce(z.re, 2.0 * big_k);
    let yr = reduce(z.im, 2.0 * big_kp);
    if xr.abs() / big_k < POLE_TOL && ((yr.abs() - big_kp) / big_kp).abs() < POLE_TOL {
        return Err(Error::pole("special_fn", format!("sn has a pole near {z}")));
    }
    let (s, c, d) = sncndn_real(x, k);
    let (s1, c1, d1) = sncndn_real(y, k.complementary());
    let k2 = k.k() * k.k();
    let den = c1 * c1 + k2 * s * s * s1 * s1;
    let sn = Complex64::new(s * d1, c * d * s1 * c1) / den;
    let cn = Complex64::new(c * c1, -s * d * s1 * d1) / den;
    let dn = Complex64::new(d * c1 * d1, -k2 * s * c * s1) / den;
    Ok((sn, cn, dn))
}

/// Jacobi elliptic sine at complex argument.
pub fn jacobi_sn(z: Complex64, k: Modulus) -> Result<Complex64> {
    jacobi_sncndn(z, k).map(|(sn, _, _)| sn)
}
