//! Free-space dyadic Green's functions in the frequency domain and the
//! traces of their products that enter the two-dipole observables.
//!
//! With `k = omega/c`, `R = r - r'` and `d = |R|`:
//!
//! $G^E = \frac{e^{ikd}}{4\pi k^2 d^5}\left[d^2(-1 + ikd + k^2d^2)\,I + (3 - 3ikd - k^2d^2)\,R\otimes R\right]$,
//! $G^H = \frac{e^{ikd}}{4\pi d^3}(-1 + ikd)\,[R]_\times$.
//!
//! The delta-function self-term of the electric function is not represented,
//! so both functions require `r != r'`.

use std::f64::consts::PI;
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::materials::C;

pub type Vec3 = [f64; 3];

/// 3x3 complex tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GfTensor(pub [[Complex64; 3]; 3]);

impl GfTensor {
    pub fn zero() -> Self {
        Self([[Complex64::new(0.0, 0.0); 3]; 3])
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[j][i];
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[j][i].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    /// `Tr{A A^dagger}`, i.e. the squared Frobenius norm.
    pub fn trace_with_adjoint(&self) -> f64 {
        (*self * self.adjoint()).trace().re
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for GfTensor {
    type Output = GfTensor;

    fn mul(self, rhs: GfTensor) -> GfTensor {
        let mut out = GfTensor::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..3 {
                    acc += self.0[i][k] * rhs.0[k][j];
                }
                out.0[i][j] = acc;
            }
        }
        out
    }
}

fn separation(r1: Vec3, r2: Vec3) -> Result<(Vec3, f64)> {
    let sep = [r1[0] - r2[0], r1[1] - r2[1], r1[2] - r2[2]];
    let d = (sep[0] * sep[0] + sep[1] * sep[1] + sep[2] * sep[2]).sqrt();
    if !(d > 0.0) {
        return Err(Error::Domain(
            "source and observation points coincide".into(),
        ));
    }
    Ok((sep, d))
}

/// Electric Green's function between `r1` and `r2`, self-term excluded.
pub fn gf_electric_vacuum(r1: Vec3, r2: Vec3, omega: f64) -> Result<GfTensor> {
    let (sep, d) = separation(r1, r2)?;
    let k = omega / C;
    let kd = k * d;
    let phase = Complex64::from_polar(1.0, kd);
    let pre = phase / (4.0 * PI * k * k * d.powi(5));
    let diag = pre * d * d * Complex64::new(-1.0 + kd * kd, kd);
    let outer = pre * Complex64::new(3.0 - kd * kd, -3.0 * kd);
    let mut g = GfTensor::zero();
    for i in 0..3 {
        for j in 0..3 {
            g.0[i][j] = outer * (sep[i] * sep[j]);
        }
        g.0[i][i] += diag;
    }
    Ok(g)
}

/// Magnetic Green's function between `r1` and `r2`.
pub fn gf_magnetic_vacuum(r1: Vec3, r2: Vec3, omega: f64) -> Result<GfTensor> {
    let (sep, d) = separation(r1, r2)?;
    let kd = omega / C * d;
    let pre = Complex64::from_polar(1.0, kd) / (4.0 * PI * d.powi(3)) * Complex64::new(-1.0, kd);
    let [x, y, z] = sep;
    let cross = [[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]];
    let mut g = GfTensor::zero();
    for i in 0..3 {
        for j in 0..3 {
            g.0[i][j] = pre * cross[i][j];
        }
    }
    Ok(g)
}

/// `Tr{G^E G^E†}` in closed form (1/m^2).
#[inline]
pub fn trace_ee_vacuum(d: f64, omega: f64) -> f64 {
    let x = C / (omega * d);
    let x2 = x * x;
    (1.0 + x2 + 3.0 * x2 * x2) / (8.0 * PI * PI * d * d)
}

/// `Tr{G^H G^H†}` in closed form (1/m^4).
#[inline]
pub fn trace_hh_vacuum(d: f64, omega: f64) -> f64 {
    let k = omega / C;
    let x = 1.0 / (k * d);
    k * k * (1.0 + x * x) / (8.0 * PI * PI * d * d)
}

/// Traces of Green's-function products for the medium surrounding the
/// two particles. Implementations must return nonnegative values.
pub trait EnvTraceProvider: Sync {
    fn trace_ee(&self, d: f64, omega: f64) -> f64;
    fn trace_hh(&self, d: f64, omega: f64) -> f64;
}

/// Empty space.
#[derive(Debug, Clone, Copy, Default)]
pub struct Vacuum;

impl EnvTraceProvider for Vacuum {
    fn trace_ee(&self, d: f64, omega: f64) -> f64 {
        trace_ee_vacuum(d, omega)
    }

    fn trace_hh(&self, d: f64, omega: f64) -> f64 {
        trace_hh_vacuum(d, omega)
    }
}
