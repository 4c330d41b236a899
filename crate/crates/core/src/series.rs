//! Fast evaluation of the transient flux on many `tau` values.
//!
//! Each kernel is a sum over `m` of `M_m(tau) [A_m + B_m cos(omega tau) +
//! C_m sin(omega tau)]` with `M_0 = 1`, `M_1 = e^{-gamma tau/2} cos(beta tau)`
//! and `M_2 = e^{-gamma tau/2} sin(beta tau)`, where `A, B, C` depend only on
//! `omega`. The frequency integral is done once on a fixed composite
//! Gauss–Legendre grid fine enough for the largest `tau`; each `tau` then
//! costs a weighted cosine and sine sum over the nodes.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::analysis::TimeSeries;
use crate::error::{Error, Result};
use crate::materials::{C, HBAR};
use crate::stationary::{PairConfig, PairModel, SolverOptions};
use crate::transient::FluxDecomposition;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Number of coefficients per node: 2 observables x 3 modulations x 3 bases.
const NC: usize = 18;

#[inline]
fn idx(obs: usize, m: usize, basis: usize) -> usize {
    obs * 9 + m * 3 + basis
}

/// `A, B, C` coefficients of `(dU/dt, H)` per `V1 V2` at `omega`.
pub(crate) fn coefficients(model: &PairModel, w: f64) -> [f64; NC] {
    let mat = &model.mat2;
    let d = model.d();
    let (b, g) = (mat.beta, mat.gamma);
    let w2 = w * w;
    let w0a2 = mat.omega0_alpha * mat.omega0_alpha;
    let (re, im) = mat.alpha_parts(w);
    let p = model.emission(w);
    let vv = model.v1 * model.v2;
    let c2 = C * C;
    let (d2, d3, d4, d5, d6) = (d * d, d.powi(3), d.powi(4), d.powi(5), d.powi(6));
    let f4 = c2 / (w2 * d4);
    let f5 = 3.0 * C * c2 / (w2 * w * d5);
    let f6 = 3.0 * c2 * c2 / (w2 * w2 * d6);
    let pre2 = 4.0 * HBAR / (PI * c2) * w2 * w * p / vv;
    let pre4 = 4.0 * HBAR / (PI * c2 * c2) * w2 * w2 * w * p / vv;
    let q = HBAR / (PI * PI * c2) * w2 * w * p * (model.v2 + 4.0 * PI * mat.alpha_inf) / vv;
    let wb = w / b;
    let mut k = [0.0; NC];
    let (a_, b_, c_) = (0, 1, 2);

    // dU/dt
    let s = q + pre2 * re;
    k[idx(0, 0, b_)] = s * 3.0 * C / (w * d5);
    k[idx(0, 0, c_)] = s * (-1.0 / d4 + 3.0 * c2 / (w2 * d6));
    let r = pre4 * re;
    k[idx(0, 1, a_)] = r * -f5;
    k[idx(0, 1, b_)] = r * -C * (w2 - w0a2) / (w2 * w * d3);
    k[idx(0, 1, c_)] = r * (-w0a2 / (w2 * d2) - f4 * (2.0 * w2 - w0a2) / w2 - f6);
    k[idx(0, 2, a_)] = r * (f4 * wb * w0a2 / w2 - f6 * wb);
    k[idx(0, 2, b_)] = r * (w0a2 / (w2 * d2) * wb - f4 * wb * (w2 - 2.0 * w0a2) / w2 + f6 * wb);
    k[idx(0, 2, c_)] = r * -f5 * (w2 - w0a2) / (b * w);

    // H
    let l2 = pre2 * im;
    let l4 = pre4 * im;
    k[idx(1, 0, a_)] = l4 * (1.0 / d2 + f4 + f6);
    k[idx(1, 0, b_)] = l2 * (1.0 / d4 - 3.0 * c2 / (w2 * d6));
    k[idx(1, 0, c_)] = l2 * 3.0 * C / (w * d5);
    let gw = g / w;
    let g2bw = g * g / (2.0 * b * w);
    let g2b = g / (2.0 * b);
    let sum_a1 = -f4 + f6;
    let sum_b1 = -1.0 / d2 + C / (w * d3) * gw - f4 - f6;
    let sum_c1 = -gw / d2 + f4 * gw;
    let sum_a2 = f4 * g2b - f5 * (w2 + w0a2) / (2.0 * b * w) + f6 * g2b;
    let sum_b2 = g2b / d2
        + C / (w * d3) * (-(w2 - w0a2).powi(2) / (2.0 * b * w2 * w) - g2bw)
        + f4 * 3.0 * g2b
        - f6 * g2b;
    let sum_c2 = (-w0a2 * (3.0 * w2 - w0a2) / (2.0 * b * w2 * w) + g2bw) / d2
        + f4 * (-(2.0 * w2 * w2 - w0a2 * w2 + w0a2 * w0a2) / (2.0 * b * w2 * w) - g2bw)
        + f5 * g / b
        - f6 * (w2 + w0a2) / (2.0 * b * w);
    k[idx(1, 1, a_)] = l4 * sum_a1;
    k[idx(1, 1, b_)] = l4 * sum_b1;
    k[idx(1, 1, c_)] = l4 * sum_c1;
    k[idx(1, 2, a_)] = l4 * sum_a2;
    k[idx(1, 2, b_)] = l4 * sum_b2;
    k[idx(1, 2, c_)] = l4 * sum_c2;
    k
}

/// Evaluates the kernels from the coefficients; equals the literal kernels.
#[cfg(test)]
pub(crate) fn kernels_from_coefficients(k: &[f64; NC], mat_beta: f64, mat_gamma: f64, w: f64, tau: f64) -> [f64; 2] {
    let (sw, cw) = (w * tau).sin_cos();
    let (sb, cb) = (mat_beta * tau).sin_cos();
    let e = (-0.5 * mat_gamma * tau).exp();
    let m = [1.0, e * cb, e * sb];
    let mut out = [0.0; 2];
    for (o, slot) in out.iter_mut().enumerate() {
        for (mi, mm) in m.iter().enumerate() {
            *slot += mm * (k[idx(o, mi, 0)] + k[idx(o, mi, 1)] * cw + k[idx(o, mi, 2)] * sw);
        }
    }
    out
}

/// Fixed-grid transient evaluator for `0 < tau <= tau_max`.
#[derive(Debug, Clone)]
pub struct SeriesEngine {
    model: PairModel,
    tau_max: f64,
    nodes: Vec<f64>,
    /// Weighted `B` and `C` coefficients, node-major:
    /// `[(obs, m, {B, C})]`, 12 per node.
    bc: Vec<[f64; 12]>,
    /// Integrated `A` coefficients per `(obs, m)`.
    a: [f64; 6],
}

impl SeriesEngine {
    pub const NODES_PER_PANEL: usize = 16;

    pub fn new(cfg: &PairConfig, tau_max: f64, opts: &SolverOptions) -> Result<Self> {
        if !(tau_max > 0.0 && tau_max.is_finite()) {
            return Err(Error::Domain(format!("tau_max must be positive, got {tau_max:e}")));
        }
        let model = PairModel::new(cfg);
        let spec = model.quad_spec(opts)?;
        let (lo, hi) = (spec.omega_min, spec.omega_max);
        let base = (2.0 * PI / tau_max).min((hi - lo) / 64.0);
        let mut windows: Vec<(f64, f64)> = spec
            .resonances
            .iter()
            .map(|r| ((r.center - r.half_width).max(lo), (r.center + r.half_width).min(hi)))
            .filter(|(a, b)| a < b)
            .collect();
        windows.sort_by(|x, y| x.0.total_cmp(&y.0));
        let fine = spec
            .resonances
            .iter()
            .map(|r| 2.0 * r.panel_width)
            .fold(base, f64::min);

        let mut edges = vec![lo];
        let push_segment = |edges: &mut Vec<f64>, a: f64, b: f64, h: f64| {
            let n = ((b - a) / h).ceil().max(1.0) as usize;
            for i in 1..=n {
                edges.push(if i == n { b } else { a + (b - a) * i as f64 / n as f64 });
            }
        };
        let mut cursor = lo;
        for (a, b) in windows {
            let a = a.max(cursor);
            if b <= a {
                continue;
            }
            if a > cursor {
                push_segment(&mut edges, cursor, a, base);
            }
            push_segment(&mut edges, a, b, fine);
            cursor = b;
        }
        if cursor < hi {
            push_segment(&mut edges, cursor, hi, base);
        }
        if edges.len() > opts.max_panels {
            return Err(Error::NotConverged {
                value: f64::NAN,
                err_estimate: f64::NAN,
                panels: edges.len() - 1,
            });
        }

        let (gx, gw) = gauss_legendre(Self::NODES_PER_PANEL);
        let panels: Vec<(f64, f64)> = edges.windows(2).map(|e| (e[0], e[1])).collect();
        let per_panel: Vec<Vec<(f64, f64, [f64; NC])>> = panels
            .par_iter()
            .map(|&(a, b)| {
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                gx.iter()
                    .zip(&gw)
                    .map(|(x, wt)| {
                        let w = mid + half * x;
                        (w, half * wt, coefficients(&model, w))
                    })
                    .collect()
            })
            .collect();

        let mut nodes = Vec::new();
        let mut bc = Vec::new();
        let mut a = [0.0; 6];
        for (w, wt, k) in per_panel.into_iter().flatten() {
            nodes.push(w);
            let mut row = [0.0; 12];
            for o in 0..2 {
                for m in 0..3 {
                    a[o * 3 + m] += wt * k[idx(o, m, 0)];
                    row[(o * 3 + m) * 2] = wt * k[idx(o, m, 1)];
                    row[(o * 3 + m) * 2 + 1] = wt * k[idx(o, m, 2)];
                }
            }
            bc.push(row);
        }
        Ok(Self {
            model,
            tau_max,
            nodes,
            bc,
            a,
        })
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn model(&self) -> &PairModel {
        &self.model
    }

    fn combine(&self, tau: f64, sums: &[f64; 12]) -> FluxDecomposition {
        let mat = &self.model.mat2;
        let e = (-0.5 * mat.gamma * tau).exp();
        let (sb, cb) = (mat.beta * tau).sin_cos();
        let m = [1.0, e * cb, e * sb];
        let mut out = [0.0; 2];
        for (o, slot) in out.iter_mut().enumerate() {
            for (mi, mm) in m.iter().enumerate() {
                let j = o * 3 + mi;
                *slot += mm * (self.a[j] + sums[2 * j] + sums[2 * j + 1]);
            }
        }
        FluxDecomposition {
            tau,
            total: out[0] + out[1],
            udot: out[0],
            transfer: out[1],
            err_estimate: f64::NAN,
        }
    }

    /// Flux at one `tau`; zero for `tau <= 0`.
    pub fn eval(&self, tau: f64) -> FluxDecomposition {
        if tau <= 0.0 {
            return FluxDecomposition {
                tau,
                total: 0.0,
                udot: 0.0,
                transfer: 0.0,
                err_estimate: 0.0,
            };
        }
        let mut sums = [0.0; 12];
        for (w, row) in self.nodes.iter().zip(&self.bc) {
            let (s, c) = (w * tau).sin_cos();
            for j in 0..6 {
                sums[2 * j] += row[2 * j] * c;
                sums[2 * j + 1] += row[2 * j + 1] * s;
            }
        }
        self.combine(tau, &sums)
    }

    /// Flux on `tau0 + i dtau` for `i < n`, using phasor rotation within
    /// blocks of fixed length so the result does not depend on threading.
    pub fn eval_uniform(&self, tau0: f64, dtau: f64, n: usize) -> Vec<FluxDecomposition> {
        const BLOCK: usize = 256;
        let rot: Vec<(f64, f64)> = self.nodes.iter().map(|w| (w * dtau).sin_cos()).collect();
        let blocks: Vec<usize> = (0..n.div_ceil(BLOCK)).collect();
        let parts: Vec<Vec<FluxDecomposition>> = blocks
            .par_iter()
            .map(|&bi| {
                let start = bi * BLOCK;
                let len = BLOCK.min(n - start);
                let mut out = Vec::with_capacity(len);
                let t_start = tau0 + start as f64 * dtau;
                let mut ph: Vec<(f64, f64)> = self.nodes.iter().map(|w| (w * t_start).sin_cos()).collect();
                for step in 0..len {
                    let tau = tau0 + (start + step) as f64 * dtau;
                    if tau <= 0.0 {
                        out.push(self.eval(tau));
                    } else {
                        let mut sums = [0.0; 12];
                        for (&(s, c), row) in ph.iter().zip(&self.bc) {
                            for j in 0..6 {
                                sums[2 * j] += row[2 * j] * c;
                                sums[2 * j + 1] += row[2 * j + 1] * s;
                            }
                        }
                        out.push(self.combine(tau, &sums));
                    }
                    for (p, &(rs, rc)) in ph.iter_mut().zip(&rot) {
                        *p = (p.0 * rc + p.1 * rs, p.1 * rc - p.0 * rs);
                    }
                }
                out
            })
            .collect();
        parts.into_iter().flatten().collect()
    }
}

/// Samples the flux uniformly on `[tau_min, tau_max]` with `n` points.
pub fn build_time_series(
    cfg: &PairConfig,
    tau_min: f64,
    tau_max: f64,
    n: usize,
    opts: &SolverOptions,
) -> Result<TimeSeries> {
    if !(tau_min > 0.0 && tau_max > tau_min && n >= 2) {
        return Err(Error::Config(format!(
            "time grid needs 0 < tau_min < tau_max and two samples, got [{tau_min:e}, {tau_max:e}], {n}"
        )));
    }
    let engine = SeriesEngine::new(cfg, tau_max, opts)?;
    let dtau = (tau_max - tau_min) / (n - 1) as f64;
    let vals = engine.eval_uniform(tau_min, dtau, n);
    let taus = (0..n).map(|i| tau_min + i as f64 * dtau).collect();
    TimeSeries::new(
        taus,
        vals.iter().map(|v| v.total).collect(),
        vals.iter().map(|v| v.udot).collect(),
        vals.iter().map(|v| v.transfer).collect(),
    )
}
