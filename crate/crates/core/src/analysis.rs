//! Post-processing of sampled flux curves: extrema, the average curve, the
//! envelope of the maxima and the near and far field approximations.

use crate::error::{Error, Result};

/// Flux sampled on an increasing `tau` grid, per `V1 V2`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub taus: Vec<f64>,
    pub total: Vec<f64>,
    pub udot: Vec<f64>,
    pub transfer: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Total,
    Udot,
    Transfer,
}

impl TimeSeries {
    pub fn new(taus: Vec<f64>, total: Vec<f64>, udot: Vec<f64>, transfer: Vec<f64>) -> Result<Self> {
        let n = taus.len();
        if total.len() != n || udot.len() != n || transfer.len() != n {
            return Err(Error::Config("time series channels differ in length".into()));
        }
        if taus.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("time series grid must increase strictly".into()));
        }
        Ok(Self {
            taus,
            total,
            udot,
            transfer,
        })
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn channel(&self, c: Channel) -> &[f64] {
        match c {
            Channel::Total => &self.total,
            Channel::Udot => &self.udot,
            Channel::Transfer => &self.transfer,
        }
    }

    pub fn extrema(&self, c: Channel, period: Option<f64>) -> Result<ExtremaSet> {
        find_extrema(&self.taus, self.channel(c), period)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub tau: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtremaSet {
    pub maxima: Vec<Point>,
    pub minima: Vec<Point>,
    /// Midpoints of consecutive extrema in both position and value.
    pub averages: Vec<Point>,
}

impl ExtremaSet {
    pub fn global_max(&self) -> Option<Point> {
        self.maxima.iter().copied().max_by(|a, b| a.value.total_cmp(&b.value))
    }

    pub fn global_min(&self) -> Option<Point> {
        self.minima.iter().copied().min_by(|a, b| a.value.total_cmp(&b.value))
    }
}

/// Vertex of the parabola through three samples, clamped to their span.
fn parabolic_vertex(x: [f64; 3], y: [f64; 3]) -> Point {
    let (h0, h2) = (x[0] - x[1], x[2] - x[1]);
    let (s0, s2) = ((y[0] - y[1]) / h0, (y[2] - y[1]) / h2);
    let a = (s2 - s0) / (h2 - h0);
    if a == 0.0 {
        return Point { tau: x[1], value: y[1] };
    }
    let b = s0 - a * h0;
    let t = (-b / (2.0 * a)).clamp(h0, h2);
    Point {
        tau: x[1] + t,
        value: y[1] + b * t + a * t * t,
    }
}

/// Local extrema of `values` on `taus`, refined by parabolic interpolation.
///
/// With a `period` hint the grid must resolve it with at least 16 samples,
/// and a series spanning three periods must show at least two extrema.
pub fn find_extrema(taus: &[f64], values: &[f64], period: Option<f64>) -> Result<ExtremaSet> {
    if taus.len() != values.len() {
        return Err(Error::Config("grid and values differ in length".into()));
    }
    let n = taus.len();
    if let Some(p) = period {
        let max_step = taus.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        if max_step > p / 16.0 {
            return Err(Error::TooCoarse(format!(
                "step {max_step:e} exceeds a sixteenth of the period {p:e}"
            )));
        }
    }
    // (is_max, point) in grid order.
    let mut found: Vec<(bool, Point)> = Vec::new();
    for i in 1..n.saturating_sub(1) {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        let is_max = b > a && b >= c;
        let is_min = b < a && b <= c;
        if !(is_max || is_min) {
            continue;
        }
        let p = parabolic_vertex([taus[i - 1], taus[i], taus[i + 1]], [a, b, c]);
        match found.last_mut() {
            Some((last_max, last)) if *last_max == is_max => {
                if (is_max && p.value > last.value) || (is_min && p.value < last.value) {
                    *last = p;
                }
            }
            _ => found.push((is_max, p)),
        }
    }
    if let Some(p) = period {
        if n > 1 && taus[n - 1] - taus[0] >= 3.0 * p && found.len() < 2 {
            return Err(Error::TooCoarse(format!(
                "only {} extrema over three periods of {p:e}",
                found.len()
            )));
        }
    }
    let mut out = ExtremaSet::default();
    for (is_max, p) in &found {
        if *is_max {
            out.maxima.push(*p);
        } else {
            out.minima.push(*p);
        }
    }
    out.averages = found
        .windows(2)
        .map(|w| Point {
            tau: 0.5 * (w[0].1.tau + w[1].1.tau),
            value: 0.5 * (w[0].1.value + w[1].1.value),
        })
        .collect();
    Ok(out)
}

/// Average flux `H_st (1 - e^{-gamma tau})`.
pub fn flux_average_model(h_st: f64, gamma: f64, tau: f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    -h_st * (-gamma * tau).exp_m1()
}

/// Envelope through the maxima,
/// `H_st (1 - e^{-gamma tau}) + tau^{3/4} (a e^{-gamma tau} + b e^{-gamma tau/2})`,
/// pinned to a maximum `(tau_max, phi_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParams {
    pub a: f64,
    pub b: f64,
    pub h_st: f64,
    pub gamma: f64,
    pub tau_max: f64,
    pub phi_max: f64,
}

/// Solves for `(a, b)` so the envelope passes through `(tau_max, phi_max)`
/// with zero slope there.
pub fn fit_max_params(tau_max: f64, phi_max: f64, h_st: f64, gamma: f64) -> Result<FitParams> {
    if !(tau_max > 0.0 && gamma > 0.0) {
        return Err(Error::Domain(format!(
            "envelope fit needs tau_max > 0 and gamma > 0, got {tau_max:e}, {gamma:e}"
        )));
    }
    let x = gamma * tau_max;
    if (x - 1.5).abs() < 1e-6 {
        return Err(Error::DegenerateFit(format!(
            "gamma tau_max = {x} is at the singular point 3/2"
        )));
    }
    let a = ((0.5 * x + 0.75) * h_st + (0.5 * x - 0.75) * (h_st - phi_max) * x.exp())
        / (0.5 * gamma * tau_max.powf(1.75));
    let b = (x * tau_max.powf(0.25) * h_st / tau_max - a * (x - 0.75)) * (-0.5 * x).exp() / (0.5 * x - 0.75);
    Ok(FitParams {
        a,
        b,
        h_st,
        gamma,
        tau_max,
        phi_max,
    })
}

pub fn flux_max_model(fp: &FitParams, tau: f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    let g = fp.gamma;
    flux_average_model(fp.h_st, g, tau) + tau.powf(0.75) * (fp.a * (-g * tau).exp() + fp.b * (-0.5 * g * tau).exp())
}

/// Near-field form: the average minus the envelope excursion modulated at
/// the resonance.
pub fn near_field_approx(fp: &FitParams, omega0_alpha: f64, tau: f64) -> f64 {
    let avg = flux_average_model(fp.h_st, fp.gamma, tau);
    let eta = flux_max_model(fp, tau) - avg;
    avg - eta * (omega0_alpha * tau).cos()
}

/// Far-field form: the average with a weak oscillation at twice the
/// resonance. Valid only when `gamma << omega0_alpha`.
pub fn far_field_approx(h_st: f64, gamma: f64, omega0_alpha: f64, tau: f64) -> Result<f64> {
    if !(gamma < 1e-2 * omega0_alpha) {
        return Err(Error::OutOfValidity(format!(
            "far-field form needs gamma << omega0_alpha, got {gamma:e} vs {omega0_alpha:e}"
        )));
    }
    Ok(flux_average_model(h_st, gamma, tau)
        - gamma / (2.0 * omega0_alpha) * h_st * (2.0 * omega0_alpha * tau).sin())
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Config("slope needs at least two paired samples".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("log-log slope needs positive data".into()));
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
