//! Physical constants, the Drude–Lorentz permittivity and the resulting
//! dipole polarizability of a small sphere.
//!
//! The polarizability of a sphere of radius `R` is
//! $\alpha(\omega) = R^3 (\varepsilon - 1)/(\varepsilon + 2)$ with
//! $\varepsilon(\omega) = \varepsilon_\infty - \omega_p^2/(\omega^2 - \omega_0^2 + i\gamma\omega)$.
//! Its single resonance sits at $\omega_{0\alpha}^2 = \omega_0^2 + \omega_p^2/(\varepsilon_\infty + 2)$.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const C: f64 = 299_792_458.0;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub c: f64,
    pub hbar: f64,
    pub k_b: f64,
}

/// CODATA 2018 exact and recommended values.
pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    c: C,
    hbar: HBAR,
    k_b: K_B,
};

/// Single-oscillator permittivity parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrudeLorentz {
    pub eps_inf: f64,
    /// Resonance frequency (rad/s).
    pub omega0: f64,
    /// Plasma frequency (rad/s).
    pub omegap: f64,
    /// Damping rate (rad/s).
    pub gamma: f64,
}

impl DrudeLorentz {
    pub fn new(eps_inf: f64, omega0: f64, omegap: f64, gamma: f64) -> Result<Self> {
        let m = Self {
            eps_inf,
            omega0,
            omegap,
            gamma,
        };
        m.validate()?;
        Ok(m)
    }

    /// Silicon carbide.
    pub fn sic() -> Self {
        Self {
            eps_inf: 6.7,
            omega0: 1.49e14,
            omegap: 2.71e14,
            gamma: 8.93e11,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.eps_inf, self.omega0, self.omegap, self.gamma]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("material parameters must be finite".into()));
        }
        if self.gamma <= 0.0 {
            return Err(Error::Config(format!(
                "damping rate must be positive, got {}",
                self.gamma
            )));
        }
        if self.eps_inf <= 0.25 {
            return Err(Error::Config(format!(
                "eps_inf must exceed 1/4, got {}",
                self.eps_inf
            )));
        }
        if self.eps_inf == 1.0 {
            return Err(Error::Config("eps_inf = 1 leaves beta_tilde undefined".into()));
        }
        if self.omega0 < 0.0 || self.omegap < 0.0 {
            return Err(Error::Config(
                "resonance and plasma frequencies must be nonnegative".into(),
            ));
        }
        if self.beta_sq() <= 0.0 {
            return Err(Error::Config(format!(
                "overdamped polarizability: beta^2 = {:e} <= 0",
                self.beta_sq()
            )));
        }
        if self.beta_tilde_sq() <= 0.0 {
            return Err(Error::Config(format!(
                "beta_tilde^2 = {:e} <= 0",
                self.beta_tilde_sq()
            )));
        }
        Ok(())
    }

    pub fn omega0_alpha_sq(&self) -> f64 {
        self.omega0 * self.omega0 + self.omegap * self.omegap / (self.eps_inf + 2.0)
    }

    pub fn beta_sq(&self) -> f64 {
        self.omega0_alpha_sq() - 0.25 * self.gamma * self.gamma
    }

    pub fn beta_tilde_sq(&self) -> f64 {
        self.omega0 * self.omega0 + self.omegap * self.omegap / (self.eps_inf - 1.0)
            - 0.25 * self.gamma * self.gamma
    }
}

/// Relative permittivity at angular frequency `omega` (any sign).
pub fn permittivity(p: &DrudeLorentz, omega: f64) -> Complex64 {
    let den = Complex64::new(omega * omega - p.omega0 * p.omega0, p.gamma * omega);
    Complex64::new(p.eps_inf, 0.0) - p.omegap * p.omegap / den
}

/// Homogeneous sphere described by a Drude–Lorentz permittivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    material: DrudeLorentz,
    radius: f64,
    volume: f64,
}

impl Particle {
    pub fn new(material: DrudeLorentz, radius: f64) -> Result<Self> {
        material.validate()?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Config(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            material,
            radius,
            volume: 4.0 * PI * radius.powi(3) / 3.0,
        })
    }

    pub fn material(&self) -> &DrudeLorentz {
        &self.material
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }
}

/// Resonance quantities of a particle's polarizability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedMaterial {
    /// Oscillation frequency of the time-domain response (rad/s).
    pub beta: f64,
    pub beta_tilde: f64,
    /// Polarizability resonance (rad/s).
    pub omega0_alpha: f64,
    /// High-frequency polarizability (m^3).
    pub alpha_inf: f64,
    /// Oscillator strength `3 wp^2 R^3 / (eps_inf + 2)^2` (m^3 rad^2/s^2).
    pub strength: f64,
    pub gamma: f64,
}

impl DerivedMaterial {
    /// `(w^2 - w0a^2)^2 + gamma^2 w^2`.
    #[inline]
    pub fn resonance_denominator(&self, omega: f64) -> f64 {
        let detune = (omega - self.omega0_alpha) * (omega + self.omega0_alpha);
        detune * detune + self.gamma * self.gamma * omega * omega
    }

    /// Imaginary part of the polarizability from the explicit Lorentzian form.
    #[inline]
    pub fn im_alpha(&self, omega: f64) -> f64 {
        self.strength * self.gamma * omega / self.resonance_denominator(omega)
    }

    /// `Re alpha - alpha_inf` from the explicit form.
    #[inline]
    pub fn re_alpha_minus_inf(&self, omega: f64) -> f64 {
        let detune = (omega - self.omega0_alpha) * (omega + self.omega0_alpha);
        -self.strength * detune / self.resonance_denominator(omega)
    }

    /// Both parts at once: `(Re alpha - alpha_inf, Im alpha)`.
    #[inline]
    pub fn alpha_parts(&self, omega: f64) -> (f64, f64) {
        let detune = (omega - self.omega0_alpha) * (omega + self.omega0_alpha);
        let inv = self.strength / (detune * detune + self.gamma * self.gamma * omega * omega);
        (-detune * inv, self.gamma * omega * inv)
    }
}

pub fn derived_material(pt: &Particle) -> Result<DerivedMaterial> {
    let m = pt.material();
    let beta_sq = m.beta_sq();
    let beta_tilde_sq = m.beta_tilde_sq();
    if !(beta_sq > 0.0) || !(beta_tilde_sq > 0.0) {
        return Err(Error::Config(format!(
            "material outside the oscillator model: beta^2 = {beta_sq:e}, beta_tilde^2 = {beta_tilde_sq:e}"
        )));
    }
    let r3 = pt.radius().powi(3);
    let e2 = m.eps_inf + 2.0;
    Ok(DerivedMaterial {
        beta: beta_sq.sqrt(),
        beta_tilde: beta_tilde_sq.sqrt(),
        omega0_alpha: m.omega0_alpha_sq().sqrt(),
        alpha_inf: (m.eps_inf - 1.0) / e2 * r3,
        strength: 3.0 * m.omegap * m.omegap * r3 / (e2 * e2),
        gamma: m.gamma,
    })
}

/// Polarizability `R^3 (eps - 1)/(eps + 2)` (m^3).
pub fn polarizability_freq(pt: &Particle, omega: f64) -> Complex64 {
    let eps = permittivity(pt.material(), omega);
    (eps - 1.0) / (eps + 2.0) * pt.radius().powi(3)
}

/// Time-domain polarizability: the weight of the instantaneous `delta(t)`
/// response (m^3) and the causal relaxation part at time `t` (m^3/s).
pub fn polarizability_time(pt: &Particle, t: f64) -> (f64, f64) {
    let m = pt.material();
    let r3 = pt.radius().powi(3);
    let e2 = m.eps_inf + 2.0;
    let alpha_inf = (m.eps_inf - 1.0) / e2 * r3;
    if t <= 0.0 {
        return (alpha_inf, 0.0);
    }
    let beta = m.beta_sq().sqrt();
    let amp = 3.0 * m.omegap * m.omegap * r3 / (e2 * e2 * beta);
    (alpha_inf, amp * (-0.5 * m.gamma * t).exp() * (beta * t).sin())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalScales {
    /// `k_B T / hbar` (rad/s).
    pub omega_t: f64,
    /// `hbar c / (k_B T)` (m).
    pub lambda_t: f64,
}

pub fn thermal_scales(temperature: f64) -> Result<ThermalScales> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::Domain(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    Ok(ThermalScales {
        omega_t: K_B * temperature / HBAR,
        lambda_t: HBAR * C / (K_B * temperature),
    })
}

/// Bose–Einstein occupation `1/(exp(omega/omega_t) - 1)`.
#[inline]
pub fn planck_factor(omega: f64, omega_t: f64) -> f64 {
    1.0 / (omega / omega_t).exp_m1()
}
