//! Stationary heat transfer between the two dipoles and the stationary
//! energy densities at the receiver position.
//!
//! $H_{st} = \frac{4\hbar}{\pi c^4}\int_0^\infty d\omega\,\omega^5 n(\omega)\,
//! \mathrm{Im}\,\alpha_1\,\mathrm{Im}\,\alpha_2\left[\frac{1}{d^2} + \frac{c^2}{\omega^2 d^4} + \frac{3c^4}{\omega^4 d^6}\right]$,
//! reported per `V1 V2` by default.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greens::EnvTraceProvider;
use crate::materials::{
    derived_material, planck_factor, thermal_scales, DerivedMaterial, DrudeLorentz, Particle, C, HBAR,
};
use crate::quadrature::{default_cutoffs, integrate_n, QuadSpec, ResonanceWindow};

/// Two particles in vacuum; particle 1 is the emitter at temperature `t1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairConfig {
    particle1: Particle,
    particle2: Particle,
    d: f64,
    t1: f64,
}

impl PairConfig {
    pub fn new(particle1: Particle, particle2: Particle, d: f64, t1: f64) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Config(format!("separation must be positive, got {d}")));
        }
        if !(t1 > 0.0 && t1.is_finite()) {
            return Err(Error::Config(format!("temperature must be positive, got {t1}")));
        }
        derived_material(&particle1)?;
        derived_material(&particle2)?;
        Ok(Self {
            particle1,
            particle2,
            d,
            t1,
        })
    }

    /// Two identical silicon carbide spheres.
    pub fn sic(radius: f64, d: f64, t1: f64) -> Result<Self> {
        let p = Particle::new(DrudeLorentz::sic(), radius)?;
        Self::new(p, p, d, t1)
    }

    pub fn particle1(&self) -> &Particle {
        &self.particle1
    }

    pub fn particle2(&self) -> &Particle {
        &self.particle2
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn with_distance(&self, d: f64) -> Result<Self> {
        Self::new(self.particle1, self.particle2, d, self.t1)
    }

    pub fn with_temperature(&self, t1: f64) -> Result<Self> {
        Self::new(self.particle1, self.particle2, self.d, t1)
    }

    /// Exchanges the roles of the particles, keeping the temperature.
    pub fn swapped(&self) -> Self {
        Self {
            particle1: self.particle2,
            particle2: self.particle1,
            ..*self
        }
    }

    /// Light travel time between the particles.
    pub fn delay(&self) -> f64 {
        self.d / C
    }

    /// Conditions under which the point-dipole description is doubtful.
    pub fn validity_warnings(&self) -> Vec<String> {
        let lambda_t = thermal_scales(self.t1).map(|s| s.lambda_t).unwrap_or(f64::INFINITY);
        let mut out = Vec::new();
        for (name, p) in [("particle 1", &self.particle1), ("particle 2", &self.particle2)] {
            if p.radius() > self.d / 10.0 {
                out.push(format!(
                    "{name}: radius {:e} m exceeds a tenth of the separation {:e} m",
                    p.radius(),
                    self.d
                ));
            }
            if p.radius() > lambda_t / 10.0 {
                out.push(format!(
                    "{name}: radius {:e} m exceeds a tenth of the thermal wavelength {:e} m",
                    p.radius(),
                    lambda_t
                ));
            }
        }
        out
    }
}

/// Numerical settings shared by all frequency integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub rel_tol: f64,
    /// Overrides the default upper frequency cutoff.
    pub omega_max: Option<f64>,
    pub max_panels: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rel_tol: QuadSpec::DEFAULT_REL_TOL,
            omega_max: None,
            max_panels: QuadSpec::DEFAULT_MAX_PANELS,
        }
    }
}

impl SolverOptions {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

/// A validated configuration with its derived quantities cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairModel {
    pub cfg: PairConfig,
    pub mat1: DerivedMaterial,
    pub mat2: DerivedMaterial,
    pub omega_t: f64,
    pub v1: f64,
    pub v2: f64,
}

impl PairModel {
    pub fn new(cfg: &PairConfig) -> Self {
        // PairConfig construction already validated both materials.
        let mat1 = derived_material(cfg.particle1()).expect("validated particle");
        let mat2 = derived_material(cfg.particle2()).expect("validated particle");
        Self {
            cfg: *cfg,
            mat1,
            mat2,
            omega_t: thermal_scales(cfg.t1()).expect("validated temperature").omega_t,
            v1: cfg.particle1().volume(),
            v2: cfg.particle2().volume(),
        }
    }

    pub fn d(&self) -> f64 {
        self.cfg.d()
    }

    /// `n(omega) Im alpha_1(omega)`: thermal occupation times emitter loss.
    #[inline]
    pub fn emission(&self, omega: f64) -> f64 {
        planck_factor(omega, self.omega_t) * self.mat1.im_alpha(omega)
    }

    pub fn cutoffs(&self, opts: &SolverOptions) -> Result<(f64, f64)> {
        let (lo1, hi1) = default_cutoffs(self.cfg.t1(), &self.mat1)?;
        let (_, hi2) = default_cutoffs(self.cfg.t1(), &self.mat2)?;
        Ok((lo1, opts.omega_max.unwrap_or(hi1.max(hi2))))
    }

    /// Frequency quadrature over the default range with both resonances
    /// refined.
    pub fn quad_spec(&self, opts: &SolverOptions) -> Result<QuadSpec> {
        let (lo, hi) = self.cutoffs(opts)?;
        let mut spec = QuadSpec::new(lo, hi)?
            .with_rel_tol(opts.rel_tol)
            .with_max_panels(opts.max_panels)
            .with_resonance(ResonanceWindow::for_material(&self.mat2));
        if self.mat1 != self.mat2 {
            spec = spec.with_resonance(ResonanceWindow::for_material(&self.mat1));
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Divided by `V1 V2`.
    PerVolumes,
    /// Not divided by the particle volumes.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryResult {
    pub value: f64,
    /// `d^-2`, `d^-4` and `d^-6` contributions; `None` for a generic
    /// environment where the trace is not split by distance power.
    pub channels: Option<[f64; 3]>,
    pub err_estimate: f64,
    pub panels_used: usize,
    pub normalization: Normalization,
}

impl StationaryResult {
    /// Channel fractions of the total.
    pub fn fractions(&self) -> Option<[f64; 3]> {
        self.channels
            .map(|c| [c[0] / self.value, c[1] / self.value, c[2] / self.value])
    }

    /// Converts a per-volume flux into the absolute flux (J/s).
    pub fn to_absolute(&self, cfg: &PairConfig) -> Self {
        if self.normalization == Normalization::Absolute {
            return *self;
        }
        let v = cfg.particle1().volume() * cfg.particle2().volume();
        Self {
            value: self.value * v,
            channels: self.channels.map(|c| [c[0] * v, c[1] * v, c[2] * v]),
            err_estimate: self.err_estimate * v,
            normalization: Normalization::Absolute,
            ..*self
        }
    }
}

/// Per-channel stationary spectrum per `V1 V2`.
#[inline]
pub(crate) fn flux_channels_spectrum(m: &PairModel, omega: f64) -> [f64; 3] {
    let d = m.d();
    let base = m.emission(omega) * m.mat2.im_alpha(omega) * 4.0 * HBAR / (PI * m.v1 * m.v2);
    let w2 = omega * omega;
    [
        base * w2 * w2 * omega / (C.powi(4) * d * d),
        base * w2 * omega / (C * C * d.powi(4)),
        3.0 * base * omega / d.powi(6),
    ]
}

/// Spectral density of the stationary transfer per unit `omega`, per `V1 V2`.
pub fn stationary_flux_spectrum(cfg: &PairConfig, omega: f64) -> f64 {
    let c = flux_channels_spectrum(&PairModel::new(cfg), omega);
    c[0] + c[1] + c[2]
}

fn channel_result(r: crate::quadrature::QuadResultN<3>, normalization: Normalization) -> Result<StationaryResult> {
    let r = r.require_converged()?;
    Ok(StationaryResult {
        value: r.value[0] + r.value[1] + r.value[2],
        channels: Some(r.value),
        err_estimate: r.err_estimate.iter().sum(),
        panels_used: r.panels_used,
        normalization,
    })
}

pub fn stationary_flux(cfg: &PairConfig) -> Result<StationaryResult> {
    stationary_flux_with(cfg, &SolverOptions::default())
}

pub fn stationary_flux_with(cfg: &PairConfig, opts: &SolverOptions) -> Result<StationaryResult> {
    let m = PairModel::new(cfg);
    let spec = m.quad_spec(opts)?;
    channel_result(
        integrate_n(|w| flux_channels_spectrum(&m, w), &spec, None),
        Normalization::PerVolumes,
    )
}

/// Stationary transfer for an arbitrary environment given through its
/// electric trace: `32 pi hbar / c^4 int w^5 n Im a1 Im a2 Tr{G G†}`.
pub fn stationary_flux_generic(cfg: &PairConfig, env: &dyn EnvTraceProvider) -> Result<StationaryResult> {
    stationary_flux_generic_with(cfg, env, &SolverOptions::default())
}

pub fn stationary_flux_generic_with(
    cfg: &PairConfig,
    env: &dyn EnvTraceProvider,
    opts: &SolverOptions,
) -> Result<StationaryResult> {
    let m = PairModel::new(cfg);
    let spec = m.quad_spec(opts)?;
    let d = cfg.d();
    let pre = 32.0 * PI * HBAR / (C.powi(4) * m.v1 * m.v2);
    let r = integrate_n(
        |w| {
            let w2 = w * w;
            [pre * w2 * w2 * w * m.emission(w) * m.mat2.im_alpha(w) * env.trace_ee(d, w)]
        },
        &spec,
        None,
    )
    .require_converged()?;
    Ok(StationaryResult {
        value: r.value[0],
        channels: None,
        err_estimate: r.err_estimate[0],
        panels_used: r.panels_used,
        normalization: Normalization::PerVolumes,
    })
}

/// Per-channel spectra of the stationary energy densities (J m^-3 per unit
/// omega). The magnetic density has no `d^-6` channel.
#[inline]
pub(crate) fn energy_channels_spectrum(m: &PairModel, omega: f64, electric: bool) -> [f64; 3] {
    let d = m.d();
    let base = HBAR / (2.0 * PI * PI) * m.emission(omega);
    let w2 = omega * omega;
    [
        base * w2 * w2 / (C.powi(4) * d * d),
        base * w2 / (C * C * d.powi(4)),
        if electric { 3.0 * base / d.powi(6) } else { 0.0 },
    ]
}

fn energy_density(cfg: &PairConfig, opts: &SolverOptions, electric: bool) -> Result<StationaryResult> {
    let m = PairModel::new(cfg);
    let spec = m.quad_spec(opts)?;
    channel_result(
        integrate_n(|w| energy_channels_spectrum(&m, w, electric), &spec, None),
        Normalization::Absolute,
    )
}

/// Stationary magnetic energy density at the receiver (J/m^3).
pub fn stationary_energy_density_h(cfg: &PairConfig) -> Result<StationaryResult> {
    energy_density(cfg, &SolverOptions::default(), false)
}

pub fn stationary_energy_density_h_with(cfg: &PairConfig, opts: &SolverOptions) -> Result<StationaryResult> {
    energy_density(cfg, opts, false)
}

/// Stationary vacuum electric energy density at the receiver (J/m^3).
pub fn stationary_energy_density_e0(cfg: &PairConfig) -> Result<StationaryResult> {
    energy_density(cfg, &SolverOptions::default(), true)
}

pub fn stationary_energy_density_e0_with(cfg: &PairConfig, opts: &SolverOptions) -> Result<StationaryResult> {
    energy_density(cfg, opts, true)
}

/// `n` log-spaced points per decade from `d_min` to `d_max` inclusive.
pub fn log_grid(x_min: f64, x_max: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(x_min > 0.0 && x_min < x_max && per_decade > 0) {
        return Err(Error::Config(format!(
            "log grid needs 0 < min < max and a positive density, got [{x_min:e}, {x_max:e}], {per_decade}"
        )));
    }
    let decades = (x_max / x_min).log10();
    let n = (decades * per_decade as f64).round().max(1.0) as usize;
    Ok((0..=n)
        .map(|i| {
            if i == n {
                x_max
            } else {
                x_min * 10f64.powf(decades * i as f64 / n as f64)
            }
        })
        .collect())
}

/// Stationary transfer over a list of separations, evaluated in parallel.
pub fn distance_sweep(cfg: &PairConfig, distances: &[f64], opts: &SolverOptions) -> Result<Vec<StationaryResult>> {
    distances
        .par_iter()
        .map(|&d| stationary_flux_with(&cfg.with_distance(d)?, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::Vacuum;
    use approx::assert_relative_eq;

    fn sic(d: f64, t: f64) -> PairConfig {
        PairConfig::sic(10e-9, d, t).unwrap()
    }

    #[test]
    fn config_validation() {
        let p = Particle::new(DrudeLorentz::sic(), 1e-8).unwrap();
        assert!(PairConfig::new(p, p, 0.0, 300.0).is_err());
        assert!(PairConfig::new(p, p, 1e-7, -1.0).is_err());
        assert!(PairConfig::new(p, p, 1e-7, 300.0).unwrap().validity_warnings().is_empty());
        let w = PairConfig::new(p, p, 5e-8, 300.0).unwrap().validity_warnings();
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn spectrum_peaks_at_resonance() {
        let cfg = sic(100e-9, 300.0);
        let m = PairModel::new(&cfg);
        let w0a = m.mat2.omega0_alpha;
        let g = m.mat2.gamma;
        let mut best = (0.0, f64::NEG_INFINITY);
        let n = 200_000;
        for i in 0..n {
            let w = 1e12 + (5e14 - 1e12) * i as f64 / n as f64;
            let s = stationary_flux_spectrum(&cfg, w);
            if s > best.1 {
                best = (w, s);
            }
        }
        assert!((best.0 - w0a).abs() < g, "peak at {:e}", best.0);
    }

    #[test]
    fn spectrum_far_field_scaling() {
        let w = 1e15;
        let a = stationary_flux_spectrum(&sic(1e-2, 300.0), w);
        let b = stationary_flux_spectrum(&sic(2e-2, 300.0), w);
        assert_relative_eq!(b / a, 0.25, max_relative = 1e-6);
    }

    #[test]
    fn spectrum_vanishes_without_absorber_loss() {
        let cfg = sic(1e-7, 300.0);
        let mut m = PairModel::new(&cfg);
        m.mat2.gamma = 0.0;
        assert_eq!(flux_channels_spectrum(&m, 1.7e14), [0.0; 3]);
    }

    #[test]
    fn spectrum_finite_at_low_frequency() {
        let cfg = sic(1e-8, 30.0);
        for w in [1e3, 1e5, 1e8] {
            let s = stationary_flux_spectrum(&cfg, w);
            assert!(s.is_finite() && s >= 0.0);
        }
    }

    #[test]
    fn reference_values() {
        let h300 = stationary_flux(&sic(100e-9, 300.0)).unwrap();
        assert_relative_eq!(h300.value, 1.15e34, max_relative = 0.02);
        let h30 = stationary_flux(&sic(1e-3, 30.0)).unwrap();
        assert_relative_eq!(h30.value, 2.44e6, max_relative = 0.02);
        let c = h300.channels.unwrap();
        assert_relative_eq!(c.iter().sum::<f64>(), h300.value, max_relative = 1e-12);
    }

    #[test]
    fn generic_matches_vacuum_closed_form() {
        let cfg = sic(100e-9, 300.0);
        let a = stationary_flux(&cfg).unwrap().value;
        let b = stationary_flux_generic(&cfg, &Vacuum).unwrap().value;
        assert_relative_eq!(a, b, max_relative = 1e-10);

        struct Doubled;
        impl EnvTraceProvider for Doubled {
            fn trace_ee(&self, d: f64, w: f64) -> f64 {
                2.0 * crate::greens::trace_ee_vacuum(d, w)
            }
            fn trace_hh(&self, d: f64, w: f64) -> f64 {
                2.0 * crate::greens::trace_hh_vacuum(d, w)
            }
        }
        struct Dark;
        impl EnvTraceProvider for Dark {
            fn trace_ee(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn trace_hh(&self, _: f64, _: f64) -> f64 {
                0.0
            }
        }
        let c = stationary_flux_generic(&cfg, &Doubled).unwrap().value;
        assert_relative_eq!(c, 2.0 * b, max_relative = 1e-10);
        assert_eq!(stationary_flux_generic(&cfg, &Dark).unwrap().value, 0.0);
    }

    #[test]
    fn swapping_particles_keeps_flux() {
        let p1 = Particle::new(DrudeLorentz::sic(), 10e-9).unwrap();
        let p2 = Particle::new(
            DrudeLorentz {
                gamma: 2e12,
                omegap: 2.5e14,
                ..DrudeLorentz::sic()
            },
            20e-9,
        )
        .unwrap();
        let cfg = PairConfig::new(p1, p2, 300e-9, 300.0).unwrap();
        let a = stationary_flux(&cfg).unwrap().value;
        let b = stationary_flux(&cfg.swapped()).unwrap().value;
        assert_relative_eq!(a, b, max_relative = 1e-7);
    }

    #[test]
    fn channel_dominance() {
        let near = stationary_flux(&sic(10e-9, 300.0)).unwrap().fractions().unwrap();
        assert!(near[2] > 0.99);
        let far = stationary_flux(&sic(0.1, 300.0)).unwrap().fractions().unwrap();
        assert!(far[0] > 0.99);
    }

    #[test]
    fn energy_densities() {
        let cfg = sic(100e-9, 300.0);
        let uh = stationary_energy_density_h(&cfg).unwrap();
        let ue = stationary_energy_density_e0(&cfg).unwrap();
        assert!(uh.value > 0.0);
        assert_eq!(uh.channels.unwrap()[2], 0.0);
        assert!(ue.value >= uh.value);

        let big = PairConfig::sic(20e-9, 100e-9, 300.0).unwrap();
        let ue_big = stationary_energy_density_e0(&big).unwrap();
        assert_relative_eq!(ue_big.value / ue.value, 8.0, max_relative = 1e-7);
    }

    #[test]
    fn energy_and_transfer_spectra_ratio() {
        // Transfer spectrum per V1 V2 over the electric density spectrum per
        // V1 equals 6 omega Im[(eps - 1)/(eps + 2)].
        let cfg = sic(100e-9, 300.0);
        let m = PairModel::new(&cfg);
        for w in [3e13, 1.7e14, 4e14] {
            let h: f64 = flux_channels_spectrum(&m, w).iter().sum();
            let u: f64 = energy_channels_spectrum(&m, w, true).iter().sum::<f64>() / m.v1;
            let eps = crate::materials::permittivity(cfg.particle2().material(), w);
            let factor = 6.0 * w * ((eps - 1.0) / (eps + 2.0)).im;
            assert_relative_eq!(h / u, factor, max_relative = 1e-10);
        }
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-8, 1e-1, 32).unwrap();
        assert_eq!(g.len(), 7 * 32 + 1);
        assert_eq!(g[0], 1e-8);
        assert_eq!(*g.last().unwrap(), 1e-1);
        assert!(log_grid(1.0, 1.0, 3).is_err());
    }
}
