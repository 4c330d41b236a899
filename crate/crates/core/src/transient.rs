//! Transient heat flux into the receiver after the emitter is switched on at
//! `t = 0`, evaluated a time `tau` after the field first reaches it.
//!
//! The flux splits into the rate of change of the receiver's field energy
//! `dU/dt` and the energy transferred to its internal degrees of freedom `H`.
//! Both are frequency integrals over kernels built from `cos(omega tau)`,
//! `sin(omega tau)` and the damped free oscillation
//! `exp(-gamma tau/2) {cos, sin}(beta tau)` of the receiver.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::materials::{DerivedMaterial, C, HBAR};
use crate::quadrature::{integrate, integrate_n, QuadSpec};
use crate::stationary::{
    stationary_energy_density_e0_with, stationary_energy_density_h_with, stationary_flux_with, PairConfig, PairModel, SolverOptions,
    StationaryResult,
};

/// `S = int_0^tau e^{-gamma s/2} sin(beta s) sin(omega s) ds` and
/// `C = int_0^tau e^{-gamma s/2} sin(beta s) cos(omega s) ds`.
pub fn damped_sine_integrals(omega: f64, tau: f64, beta: f64, gamma: f64) -> (f64, f64) {
    if tau <= 0.0 {
        return (0.0, 0.0);
    }
    let a = 0.5 * gamma;
    // With z = a - i nu, int_0^tau e^{-z s} ds = -expm1(-z tau)/z.
    let (nu1, nu2) = (beta - omega, beta + omega);
    let scale = (a * a + nu1.abs().max(nu2.abs()).powi(2)).sqrt() * tau;
    if scale <= 0.5 {
        return damped_sine_series(omega, tau, a, nu1, nu2);
    }
    // S from the difference J(z1) - J(z2), z1 - z2 = 2 i omega, arranged
    // so that no O(1) terms cancel when omega << beta:
    // J1 - J2 = [2 i omega expm1(-z1 tau) + e^{-z1 tau} z1 expm1(2 i omega tau)] / (z1 z2).
    let z1 = Complex64::new(a, -nu1);
    let z2 = Complex64::new(a, -nu2);
    let em1 = expm1_c(-z1 * tau);
    let q = expm1_c(Complex64::new(0.0, 2.0 * omega * tau));
    let diff = (Complex64::new(0.0, 2.0 * omega) * em1 + (em1 + 1.0) * z1 * q) / (z1 * z2);
    let sum = -em1 / z1 - expm1_c(-z2 * tau) / z2;
    (0.5 * diff.re, 0.5 * sum.im)
}

/// `exp(z) - 1` without cancellation for small `|z|`.
fn expm1_c(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * c - 2.0 * half * half, z.re.exp() * s)
}

/// Taylor branch for `|z| tau <= 1/2`, forming the difference of the two
/// segments term by term so the small-`omega` limit stays accurate.
fn damped_sine_series(omega: f64, tau: f64, a: f64, nu1: f64, nu2: f64) -> (f64, f64) {
    // J(z) = tau sum_k (-z tau)^k/(k+1)!, z1 - z2 = 2 i omega.
    let z1 = (a * tau, -nu1 * tau);
    let z2 = (a * tau, -nu2 * tau);
    let mul = |p: (f64, f64), q: (f64, f64)| (p.0 * q.0 - p.1 * q.1, p.0 * q.1 + p.1 * q.0);
    let dz = (0.0, 2.0 * omega * tau);
    let mut p1 = (1.0, 0.0);
    let mut p2 = (1.0, 0.0);
    let mut diff = (0.0, 0.0);
    let mut sum_im = 0.0;
    let mut fact = 1.0;
    let mut sign = 1.0;
    let mut acc_diff = (0.0, 0.0);
    for k in 0..40 {
        fact *= (k + 1) as f64;
        let coef = sign / fact;
        acc_diff.0 += coef * diff.0;
        acc_diff.1 += coef * diff.1;
        sum_im += coef * (p1.1 + p2.1);
        let d_next = mul(z1, diff);
        let cross = mul(p2, dz);
        diff = (d_next.0 + cross.0, d_next.1 + cross.1);
        p1 = mul(p1, z1);
        p2 = mul(p2, z2);
        sign = -sign;
        if k > 4 && coef.abs() < 1e-18 {
            break;
        }
    }
    (0.5 * tau * acc_diff.0, 0.5 * tau * sum_im)
}

/// The five distance channels of the receiver kernel, `d^-2` through
/// `d^-6`, split into the part that feeds the internal energy and the part
/// that feeds the field energy. Both include the distance prefactors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KernelChannels {
    pub transfer: [f64; 5],
    pub energy: [f64; 5],
}

impl KernelChannels {
    pub fn transfer_sum(&self) -> f64 {
        self.transfer.iter().sum()
    }

    pub fn energy_sum(&self) -> f64 {
        self.energy.iter().sum()
    }
}

/// Closed forms of the receiver kernel channels at `(omega, tau)`.
///
/// `mat` describes the receiver; `tau > 0`.
pub fn kernel_channels(omega: f64, tau: f64, mat: &DerivedMaterial, d: f64) -> KernelChannels {
    let (re, im) = mat.alpha_parts(omega);
    let w0a2 = mat.omega0_alpha * mat.omega0_alpha;
    let (b, g) = (mat.beta, mat.gamma);
    let w = omega;
    let w2 = w * w;
    let w3 = w2 * w;
    let (sw, cw) = (w * tau).sin_cos();
    let (sb, cb) = (b * tau).sin_cos();
    let e = (-0.5 * g * tau).exp();
    let one_m_cw = 2.0 * (0.5 * w * tau).sin().powi(2);
    let one_p_cw = 1.0 + cw;
    let det = w2 - w0a2;

    let p2 = 2.0 * w3 / (C.powi(4) * d * d);
    let p3 = 2.0 * w2 / (C.powi(3) * d.powi(3));
    let p4 = 2.0 * w / (C * C * d.powi(4));
    let p5 = 6.0 / (C * d.powi(5));
    let p6 = 6.0 / (w * d.powi(6));

    let t2 = im
        + im * e
            * (-cb * cw - w0a2 * (3.0 * w2 - w0a2) / (2.0 * b * w3) * sb * sw
                - g / w * (cb * sw - w / (2.0 * b) * sb * cw)
                + g * g / (2.0 * b * w) * sb * sw);
    let u2 = re * w0a2 / w2 * e * (-cb * sw + w / b * sb * cw);

    let t3 = im * e * (-det * det / (2.0 * b * w3) * sb * cw + g / w * cb * cw - g * g / (2.0 * b * w) * sb * cw);
    let u3 = -re * e * det / w2 * cb * cw;

    let t4 = im
        + im * (cw
            + e * (-cb * one_p_cw - (2.0 * w2 * w2 - w0a2 * w2 + w0a2 * w0a2) / (2.0 * b * w3) * sb * sw
                + g / w * (cb * sw + w / (2.0 * b) * sb * (1.0 + 3.0 * cw))
                - g * g / (2.0 * b * w) * sb * sw));
    let u4 = re
        * (-sw
            + e * (-(2.0 * w2 - w0a2) / w2 * cb * sw
                + w / b * sb * (w0a2 / w2 - (w2 - 2.0 * w0a2) / w2 * cw)));

    let t5 = im * (sw - e * ((w2 + w0a2) / (2.0 * b * w) * sb - g / b * sb * sw));
    let u5 = re * (cw - e * (cb + det / (b * w) * sb * sw));

    let t6 = im
        + im * (-cw
            + e * (cb * one_m_cw - (w2 + w0a2) / (2.0 * b * w) * sb * sw + g / (2.0 * b) * sb * one_m_cw));
    let u6 = re * (sw + e * (-cb * sw - w / b * sb * one_m_cw));

    KernelChannels {
        transfer: [p2 * t2, p3 * t3, p4 * t4, p5 * t5, p6 * t6],
        energy: [p2 * u2, p3 * u3, p4 * u4, p5 * u5, p6 * u6],
    }
}

/// Spectral density of `d/dtau [V2 u_E0]` per `V1 V2`, the field-energy
/// change without the receiver's response.
#[inline]
pub(crate) fn ddt_ue0_kernel(m: &PairModel, omega: f64, tau: f64) -> f64 {
    HBAR / (PI * PI * C * C) * omega.powi(3) * m.emission(omega) * ns_bracket(m.d(), omega, tau) / m.v1
}

#[inline]
fn ns_bracket(d: f64, w: f64, tau: f64) -> f64 {
    let (sw, cw) = (w * tau).sin_cos();
    -sw / d.powi(4) + 3.0 * C * cw / (w * d.powi(5)) + 3.0 * C * C * sw / (w * w * d.powi(6))
}

/// Literal kernels `(dU/dt, H)` per `V1 V2` at `(omega, tau)`, `tau > 0`.
#[inline]
pub(crate) fn flux_kernels(m: &PairModel, omega: f64, tau: f64) -> [f64; 2] {
    let mat = &m.mat2;
    let d = m.d();
    let w = omega;
    let w2 = w * w;
    let w0a2 = mat.omega0_alpha * mat.omega0_alpha;
    let (b, g) = (mat.beta, mat.gamma);
    let (re, im) = mat.alpha_parts(w);
    let p = m.emission(w);
    let (sw, cw) = (w * tau).sin_cos();
    let (sb, cb) = (b * tau).sin_cos();
    let e = (-0.5 * g * tau).exp();
    let one_m_cw = 2.0 * (0.5 * w * tau).sin().powi(2);
    let vv = m.v1 * m.v2;

    let c2 = C * C;
    let (d2, d3, d4, d5, d6) = (d * d, d.powi(3), d.powi(4), d.powi(5), d.powi(6));
    let x2 = c2 / (w2 * d4);
    let x3 = C * c2 / (w2 * w * d5);
    let x4 = c2 * c2 / (w2 * w2 * d6);
    let pre2 = 4.0 * HBAR / (PI * c2) * w2 * w * p;
    let pre4 = 4.0 * HBAR / (PI * c2 * c2) * w2 * w2 * w * p;

    let ns = -sw / d4 + 3.0 * C * cw / (w * d5) + 3.0 * c2 * sw / (w2 * d6);
    let ddtu = HBAR / (PI * PI * c2) * w2 * w * p * ns;
    let ex_u = w0a2 / (w2 * d2) * (-cb * sw + w / b * sb * cw)
        - C / (w2 * w * d3) * (w2 - w0a2) * cb * cw
        + x2 * (-(2.0 * w2 - w0a2) / w2 * cb * sw + w / b * sb * (w0a2 / w2 - (w2 - 2.0 * w0a2) / w2 * cw))
        - 3.0 * x3 * (cb + (w2 - w0a2) / (b * w) * sb * sw)
        + 3.0 * x4 * (-cb * sw - w / b * sb * one_m_cw);
    let udot = ddtu * (m.v2 + 4.0 * PI * mat.alpha_inf) + pre2 * re * ns + pre4 * e * re * ex_u;

    let st = 1.0 / d2 + x2 + 3.0 * x4;
    let ns_h = cw / d4 + 3.0 * C * sw / (w * d5) - 3.0 * c2 * cw / (w2 * d6);
    let ex_h = 1.0 / d2
        * (-cb * cw - w0a2 * (3.0 * w2 - w0a2) / (2.0 * b * w2 * w) * sb * sw
            - g / w * (cb * sw - w / (2.0 * b) * sb * cw)
            + g * g / (2.0 * b * w) * sb * sw)
        + C / (w * d3)
            * (-(w2 - w0a2).powi(2) / (2.0 * b * w2 * w) * sb * cw + g / w * cb * cw
                - g * g / (2.0 * b * w) * sb * cw)
        + x2 * (-cb * (1.0 + cw) - (2.0 * w2 * w2 - w0a2 * w2 + w0a2 * w0a2) / (2.0 * b * w2 * w) * sb * sw
            + g / w * (cb * sw + w / (2.0 * b) * sb * (1.0 + 3.0 * cw))
            - g * g / (2.0 * b * w) * sb * sw)
        + 3.0 * x3 * (-(w2 + w0a2) / (2.0 * b * w) * sb + g / b * sb * sw)
        + 3.0 * x4 * (cb * one_m_cw - (w2 + w0a2) / (2.0 * b * w) * sb * sw + g / (2.0 * b) * sb * one_m_cw);
    let h = pre4 * im * st + pre2 * im * ns_h + pre4 * e * im * ex_h;

    [udot / vv, h / vv]
}

/// Spectral density of `dU/dt` per `V1 V2`.
pub fn udot_spectrum(cfg: &PairConfig, omega: f64, tau: f64) -> f64 {
    if tau < 0.0 {
        return 0.0;
    }
    flux_kernels(&PairModel::new(cfg), omega, tau)[0]
}

/// Spectral density of the transfer `H` per `V1 V2`.
pub fn transfer_spectrum(cfg: &PairConfig, omega: f64, tau: f64) -> f64 {
    if tau < 0.0 {
        return 0.0;
    }
    flux_kernels(&PairModel::new(cfg), omega, tau)[1]
}

/// Spectral density of `d/dtau [V2 u_E0]` per `V1 V2`.
pub fn ddt_ue0_spectrum(cfg: &PairConfig, omega: f64, tau: f64) -> f64 {
    if tau < 0.0 {
        return 0.0;
    }
    ddt_ue0_kernel(&PairModel::new(cfg), omega, tau)
}

/// Spectral density of the vacuum electric energy density (J m^-3 per unit
/// omega), absolute.
pub fn energy_density_e0_spectrum(cfg: &PairConfig, omega: f64, tau: f64) -> f64 {
    if tau < 0.0 {
        return 0.0;
    }
    ue0_kernel(&PairModel::new(cfg), omega, tau)
}

#[inline]
fn ue0_kernel(m: &PairModel, w: f64, tau: f64) -> f64 {
    let d = m.d();
    let (sw, cw) = (w * tau).sin_cos();
    let one_m_cw = 2.0 * (0.5 * w * tau).sin().powi(2);
    let brace = w.powi(4) / (C.powi(4) * d * d)
        + w * w / (C * C * d.powi(4)) * (1.0 + 2.0 * cw)
        + 6.0 * w / (C * d.powi(5)) * sw
        + 6.0 / d.powi(6) * one_m_cw;
    HBAR / (2.0 * PI * PI) * m.emission(w) * brace
}

/// Total flux and its two parts, per `V1 V2` (W m^-6).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxDecomposition {
    pub tau: f64,
    pub total: f64,
    pub udot: f64,
    pub transfer: f64,
    pub err_estimate: f64,
}

/// Limits of the parts as `tau -> 0+`, per `V1 V2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitTau0 {
    pub udot: f64,
    pub transfer: f64,
}

/// Transient evaluator with the stationary reference and quadrature set-up
/// cached for one configuration.
#[derive(Debug, Clone)]
pub struct TransientSolver {
    model: PairModel,
    opts: SolverOptions,
    spec: QuadSpec,
    stationary: StationaryResult,
    ue0_stationary: f64,
}

impl TransientSolver {
    pub fn new(cfg: &PairConfig, opts: &SolverOptions) -> Result<Self> {
        let model = PairModel::new(cfg);
        let spec = model.quad_spec(opts)?;
        let stationary = stationary_flux_with(cfg, opts)?;
        let ue0_stationary = stationary_energy_density_e0_with(cfg, opts)?.value;
        Ok(Self {
            model,
            opts: *opts,
            spec,
            stationary,
            ue0_stationary,
        })
    }

    pub fn model(&self) -> &PairModel {
        &self.model
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    /// Stationary transfer `H_st` per `V1 V2`.
    pub fn stationary(&self) -> &StationaryResult {
        &self.stationary
    }

    fn check_tau(tau: f64) -> Result<()> {
        if tau == 0.0 {
            return Err(Error::Domain(
                "tau = 0 is the wavefront itself; use the tau -> 0+ limit".into(),
            ));
        }
        if tau.is_nan() {
            return Err(Error::Domain("tau is NaN".into()));
        }
        Ok(())
    }

    fn spec_with_floor(&self, floor: f64) -> QuadSpec {
        self.spec.clone().with_abs_tol(self.opts.rel_tol * floor)
    }

    /// Flux at `tau` after the wavefront. Zero before it arrives.
    pub fn flux_at(&self, tau: f64) -> Result<FluxDecomposition> {
        Self::check_tau(tau)?;
        if tau < 0.0 {
            return Ok(FluxDecomposition {
                tau,
                total: 0.0,
                udot: 0.0,
                transfer: 0.0,
                err_estimate: 0.0,
            });
        }
        if tau.is_infinite() {
            return Err(Error::Domain("tau must be finite".into()));
        }
        let spec = self.spec_with_floor(self.stationary.value);
        let r = integrate_n(|w| flux_kernels(&self.model, w, tau), &spec, Some(2.0 * PI / tau))
            .require_converged()?;
        Ok(FluxDecomposition {
            tau,
            total: r.value[0] + r.value[1],
            udot: r.value[0],
            transfer: r.value[1],
            err_estimate: r.err_estimate[0] + r.err_estimate[1],
        })
    }

    /// `d/dtau [V2 u_E0]` per `V1 V2`.
    pub fn ddt_ue0(&self, tau: f64) -> Result<f64> {
        Self::check_tau(tau)?;
        if tau < 0.0 {
            return Ok(0.0);
        }
        let scale = self.ue0_stationary / self.model.v1 / tau.max(1e-15);
        let spec = self.spec_with_floor(scale);
        Ok(integrate(|w| ddt_ue0_kernel(&self.model, w, tau), &spec, Some(2.0 * PI / tau))
            .require_converged()?
            .value)
    }

    /// Central difference of `V2 u_E0` per `V1 V2` with step `h`, formed
    /// inside one frequency integral.
    pub fn ddt_ue0_finite_difference(&self, tau: f64, h: f64) -> Result<f64> {
        Self::check_tau(tau)?;
        if !(h > 0.0 && h < tau) {
            return Err(Error::Domain(format!("step {h:e} must lie in (0, tau)")));
        }
        let scale = self.ue0_stationary / self.model.v1 / tau;
        let spec = self.spec_with_floor(scale);
        let m = &self.model;
        Ok(integrate(
            |w| (ue0_kernel(m, w, tau + h) - ue0_kernel(m, w, tau - h)) / (2.0 * h * m.v1),
            &spec,
            Some(2.0 * PI / (tau + h)),
        )
        .require_converged()?
        .value)
    }

    /// Vacuum electric energy density at the receiver (J/m^3).
    pub fn energy_density_e0(&self, tau: f64) -> Result<f64> {
        Self::check_tau(tau)?;
        if tau < 0.0 {
            return Ok(0.0);
        }
        let spec = self.spec_with_floor(self.ue0_stationary);
        Ok(integrate(|w| ue0_kernel(&self.model, w, tau), &spec, Some(2.0 * PI / tau))
            .require_converged()?
            .value)
    }

    /// Magnetic energy density at the receiver (J/m^3). The magnetic field
    /// reaches its stationary value as soon as the wavefront passes.
    pub fn energy_density_h(&self, tau: f64) -> Result<f64> {
        Self::check_tau(tau)?;
        if tau < 0.0 {
            return Ok(0.0);
        }
        Ok(stationary_energy_density_h_with(&self.model.cfg, &self.opts)?.value)
    }

    /// `tau -> 0+` limits of `dU/dt` and `H` per `V1 V2`.
    pub fn limit_tau0(&self) -> Result<LimitTau0> {
        let m = &self.model;
        let mat = &m.mat2;
        let d = m.d();
        let vv = m.v1 * m.v2;
        let a = -4.0 * HBAR / (PI * C.powi(3) * d.powi(3) * vv);
        let b = 3.0 * (m.v2 + 4.0 * PI * mat.alpha_inf) * HBAR / (PI * PI * C * d.powi(5) * vv);
        let h = 4.0 * HBAR * mat.gamma / (PI * C.powi(3) * d.powi(3) * vv);
        let spec = self.spec_with_floor(self.stationary.value);
        let r = integrate_n(
            |w| {
                let (re, im) = mat.alpha_parts(w);
                let p = m.emission(w) * w * w;
                let detune = (w - mat.omega0_alpha) * (w + mat.omega0_alpha);
                [a * p * re * detune + b * p, h * p * w * im]
            },
            &spec,
            None,
        )
        .require_converged()?;
        Ok(LimitTau0 {
            udot: r.value[0],
            transfer: r.value[1],
        })
    }
}

/// Flux at `tau` with default options.
pub fn flux_at(cfg: &PairConfig, tau: f64) -> Result<FluxDecomposition> {
    TransientSolver::new(cfg, &SolverOptions::default())?.flux_at(tau)
}

pub fn ddt_ue0(cfg: &PairConfig, tau: f64) -> Result<f64> {
    TransientSolver::new(cfg, &SolverOptions::default())?.ddt_ue0(tau)
}

pub fn energy_density_e0(cfg: &PairConfig, tau: f64) -> Result<f64> {
    TransientSolver::new(cfg, &SolverOptions::default())?.energy_density_e0(tau)
}

pub fn energy_density_h(cfg: &PairConfig, tau: f64) -> Result<f64> {
    TransientSolver::new(cfg, &SolverOptions::default())?.energy_density_h(tau)
}

pub fn limit_tau0(cfg: &PairConfig) -> Result<LimitTau0> {
    TransientSolver::new(cfg, &SolverOptions::default())?.limit_tau0()
}
