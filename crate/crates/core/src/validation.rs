//! Independent checks of the closed forms: direct quadrature of the damped
//! sine integrals, reconstruction of the receiver kernel channels from those
//! integrals, matrix traces of the Green's functions, the late-time
//! stationary limit and a finite-difference derivative of the electric
//! energy density.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::greens::{gf_electric_vacuum, gf_magnetic_vacuum, trace_ee_vacuum, trace_hh_vacuum};
use crate::materials::{derived_material, DerivedMaterial, DrudeLorentz, Particle, C};
use crate::quadrature::integrate_interval;
use crate::stationary::{PairConfig, SolverOptions};
use crate::transient::{damped_sine_integrals, kernel_channels, TransientSolver};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: String,
    pub samples: usize,
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Inputs of the worst sample.
    pub worst: String,
}

impl OracleReport {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            samples: 0,
            max_rel_err: 0.0,
            tolerance,
            passed: true,
            worst: String::new(),
        }
    }

    fn record(&mut self, err: f64, inputs: impl FnOnce() -> String) {
        self.samples += 1;
        if !(err <= self.max_rel_err) {
            self.max_rel_err = err;
            self.worst = inputs();
        }
        self.passed = self.max_rel_err <= self.tolerance;
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// `|a - b| / max(|a|, |b|, floor)`.
fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        return 0.0;
    }
    d / a.abs().max(b.abs()).max(floor)
}

/// Closed-form damped sine integrals against adaptive quadrature.
pub fn oracle_damped_integrals(n: usize, seed: u64) -> OracleReport {
    let tol = 1e-8;
    let mut rep = OracleReport::new("damped sine integrals vs quadrature", tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n {
        let beta = log_uniform(&mut rng, 1e12, 1e15);
        let omega = beta * log_uniform(&mut rng, 1e-2, 1e2);
        let gamma = beta * log_uniform(&mut rng, 1e-2, 1.0);
        let tau = log_uniform(&mut rng, 1e-2, 50.0) / gamma;
        let (s, c) = damped_sine_integrals(omega, tau, beta, gamma);
        let panels = (((beta + omega) * tau / PI).ceil() as usize).max(4);
        let q = |f: &dyn Fn(f64) -> f64| integrate_interval(f, 0.0, tau, panels, 1e-12, 1e-24, 4_000_000).value;
        let sq = q(&|s| (-0.5 * gamma * s).exp() * (beta * s).sin() * (omega * s).sin());
        let cq = q(&|s| (-0.5 * gamma * s).exp() * (beta * s).sin() * (omega * s).cos());
        // Absolute floor of 1e-20 s relative to the tolerance.
        let floor = 1e-20 / tol;
        let err = rel_err(s, sq, floor).max(rel_err(c, cq, floor));
        rep.record(err, || format!("omega={omega:e} tau={tau:e} beta={beta:e} gamma={gamma:e}"));
    }
    rep
}

/// Channel forms rebuilt from `f = e^{-gamma tau/2} sin(beta tau)`, its
/// derivative and the damped sine integrals. Also returns, per channel, the
/// sum of the magnitudes of the terms, which bounds the rounding error.
pub fn reconstruct_channels(omega: f64, tau: f64, mat: &DerivedMaterial, d: f64) -> ([f64; 5], [f64; 5]) {
    let (b, g) = (mat.beta, mat.gamma);
    let w = omega;
    let kb = mat.strength / b;
    let (sw, cw) = (w * tau).sin_cos();
    let (sb, cb) = (b * tau).sin_cos();
    let e = (-0.5 * g * tau).exp();
    let f = e * sb;
    let fp = e * (b * cb - 0.5 * g * sb);
    let (s, c) = damped_sine_integrals(w, tau, b, g);
    let one_m_cw = 2.0 * (0.5 * w * tau).sin().powi(2);
    let terms: [(f64, Vec<f64>); 5] = [
        (2.0 / (C.powi(4) * d * d) * kb * w, vec![-sw * fp, w * cw * f, w * w * s]),
        (2.0 / (C.powi(3) * d.powi(3)) * kb, vec![cw * fp]),
        (
            2.0 / (C * C * d.powi(4)) * kb,
            vec![sw / w * fp, (1.0 + 2.0 * cw) * f, w * (1.0 + cw) * s, -w * sw * c],
        ),
        (6.0 / (C * d.powi(5)) * kb, vec![sw / w * f, cw * c, sw * s]),
        (6.0 / d.powi(6) * kb, vec![one_m_cw / w * s, sw / w * c]),
    ];
    let mut val = [0.0; 5];
    let mut mag = [0.0; 5];
    for (i, (pre, t)) in terms.iter().enumerate() {
        val[i] = pre * t.iter().sum::<f64>();
        mag[i] = pre.abs() * t.iter().map(|x| x.abs()).sum::<f64>();
    }
    (val, mag)
}

fn random_material(rng: &mut ChaCha8Rng) -> Option<DerivedMaterial> {
    let eps_inf = rng.gen_range(2.0..10.0);
    let omega0 = log_uniform(rng, 1e13, 1e15);
    let omegap = omega0 * log_uniform(rng, 0.3, 3.0);
    let gamma = omega0 * log_uniform(rng, 1e-3, 0.1);
    let m = DrudeLorentz::new(eps_inf, omega0, omegap, gamma).ok()?;
    derived_material(&Particle::new(m, 10e-9).ok()?).ok()
}

/// Closed-form channels against the reconstruction, channel by channel.
pub fn oracle_channel_reconstruction(n: usize, seed: u64) -> OracleReport {
    let mut rep = OracleReport::new("kernel channels vs reconstruction", 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while rep.samples < n {
        let Some(mat) = random_material(&mut rng) else { continue };
        let omega = mat.omega0_alpha * log_uniform(&mut rng, 1e-2, 1e2);
        let tau = log_uniform(&mut rng, 1e-2, 30.0) / mat.gamma;
        let d = log_uniform(&mut rng, 1e-8, 1e-3);
        let k = kernel_channels(omega, tau, &mat, d);
        let (r, mag) = reconstruct_channels(omega, tau, &mat, d);
        let err = (0..5)
            .map(|i| rel_err(k.transfer[i] + k.energy[i], r[i], mag[i]))
            .fold(0.0, f64::max);
        rep.record(err, || {
            format!(
                "omega={omega:e} tau={tau:e} d={d:e} beta={:e} gamma={:e}",
                mat.beta, mat.gamma
            )
        });
    }
    rep
}

/// Closed-form traces against explicit matrix products.
pub fn oracle_gf_traces(n: usize, seed: u64) -> Result<OracleReport> {
    let mut rep = OracleReport::new("Green's function traces vs matrix products", 1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n {
        let d = log_uniform(&mut rng, 1e-9, 1.0);
        let omega = log_uniform(&mut rng, 1e12, 1e16);
        let dir: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let norm = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt().max(1e-3);
        let origin: [f64; 3] = [rng.gen_range(-1e-6..1e-6), rng.gen_range(-1e-6..1e-6), rng.gen_range(-1e-6..1e-6)];
        let r1 = [
            origin[0] + d * dir[0] / norm,
            origin[1] + d * dir[1] / norm,
            origin[2] + d * dir[2] / norm,
        ];
        let sep = ((r1[0] - origin[0]).powi(2) + (r1[1] - origin[1]).powi(2) + (r1[2] - origin[2]).powi(2)).sqrt();
        let ge = gf_electric_vacuum(r1, origin, omega)?.trace_with_adjoint();
        let gh = gf_magnetic_vacuum(r1, origin, omega)?.trace_with_adjoint();
        let err = rel_err(ge, trace_ee_vacuum(sep, omega), 0.0).max(rel_err(gh, trace_hh_vacuum(sep, omega), 0.0));
        rep.record(err, || format!("d={sep:e} omega={omega:e}"));
    }
    Ok(rep)
}

/// Late-time transfer against the stationary value, with `dU/dt -> 0`.
pub fn oracle_stationary_limit(cfg: &PairConfig, opts: &SolverOptions) -> Result<OracleReport> {
    let mut rep = OracleReport::new("late-time transfer vs stationary", 1e-4);
    let solver = TransientSolver::new(cfg, opts)?;
    let h = solver.stationary().value;
    let tau = 40.0 / solver.model().mat2.gamma;
    let f = solver.flux_at(tau)?;
    rep.record(rel_err(f.transfer, h, 0.0), || format!("tau={tau:e} H={:e} H_st={h:e}", f.transfer));
    rep.record((f.udot / h).abs(), || format!("tau={tau:e} dU/dt={:e} H_st={h:e}", f.udot));
    Ok(rep)
}

/// Analytic `d/dtau [V2 u_E0]` against a central difference with step
/// `1e-6 tau`, at `n` log-uniform `tau` in `[tau_min, tau_max]`.
pub fn oracle_energy_derivative(
    cfg: &PairConfig,
    n: usize,
    tau_range: (f64, f64),
    seed: u64,
    opts: &SolverOptions,
) -> Result<OracleReport> {
    let mut rep = OracleReport::new("energy density derivative vs finite difference", 1e-4);
    let solver = TransientSolver::new(cfg, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n {
        let tau = log_uniform(&mut rng, tau_range.0, tau_range.1);
        let a = solver.ddt_ue0(tau)?;
        let b = solver.ddt_ue0_finite_difference(tau, 1e-6 * tau)?;
        rep.record(rel_err(a, b, 0.0), || format!("tau={tau:e} analytic={a:e} difference={b:e}"));
    }
    Ok(rep)
}

/// All oracles with `n` random samples each.
pub fn run_all(cfg: &PairConfig, n: usize, seed: u64, opts: &SolverOptions) -> Result<Vec<OracleReport>> {
    Ok(vec![
        oracle_damped_integrals(n, seed),
        oracle_channel_reconstruction(n, seed.wrapping_add(1)),
        oracle_gf_traces(n, seed.wrapping_add(2))?,
        oracle_stationary_limit(cfg, opts)?,
        oracle_energy_derivative(cfg, n, (1e-14, 1e-11), seed.wrapping_add(3), opts)?,
    ])
}
