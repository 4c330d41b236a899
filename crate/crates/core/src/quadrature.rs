//! Adaptive Gauss–Kronrod (7/15) integration over the frequency axis.
//!
//! The integrands of this crate combine a Planck cutoff, a sharp Lorentzian
//! of width `gamma` around the polarizability resonance and, for transient
//! observables, `cos(omega tau)`/`sin(omega tau)` factors. The initial
//! partition is therefore seeded from an oscillation period hint and a
//! resonance window before bisection on the largest local error starts.
//! The final sum runs over panels in ascending order of their left edge, so
//! results do not depend on refinement order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::materials::{thermal_scales, DerivedMaterial};
use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Region around a resonance that gets a finer initial partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceWindow {
    pub center: f64,
    pub half_width: f64,
    pub panel_width: f64,
}

impl ResonanceWindow {
    /// Window of `+-40 gamma` around the polarizability resonance with
    /// initial panels of width `gamma/4`.
    pub fn for_material(mat: &DerivedMaterial) -> Self {
        Self {
            center: mat.omega0_alpha,
            half_width: 40.0 * mat.gamma,
            panel_width: 0.25 * mat.gamma,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub max_panels: usize,
    pub resonances: Vec<ResonanceWindow>,
}

impl QuadSpec {
    pub const DEFAULT_REL_TOL: f64 = 1e-8;
    pub const DEFAULT_MAX_PANELS: usize = 4_000_000;

    pub fn new(omega_min: f64, omega_max: f64) -> Result<Self> {
        let spec = Self {
            rel_tol: Self::DEFAULT_REL_TOL,
            abs_tol: 0.0,
            omega_min,
            omega_max,
            max_panels: Self::DEFAULT_MAX_PANELS,
            resonances: Vec::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    pub fn with_resonance(mut self, window: ResonanceWindow) -> Self {
        self.resonances.push(window);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_min > 0.0 && self.omega_min < self.omega_max && self.omega_max.is_finite()) {
            return Err(Error::Config(format!(
                "integration range must satisfy 0 < omega_min < omega_max, got [{:e}, {:e}]",
                self.omega_min, self.omega_max
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(Error::Config(format!(
                "rel_tol must lie in (0, 1e-2], got {:e}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::Config("abs_tol must be nonnegative".into()));
        }
        if self.max_panels < 16 {
            return Err(Error::Config("max_panels must be at least 16".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub err_estimate: f64,
    pub panels_used: usize,
    pub converged: bool,
}

impl QuadResult {
    /// Converts a non-converged result into an error.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                value: self.value,
                err_estimate: self.err_estimate,
                panels: self.panels_used,
            })
        }
    }
}

/// Result of integrating `N` integrands that share their evaluation points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResultN<const N: usize> {
    pub value: [f64; N],
    pub err_estimate: [f64; N],
    pub panels_used: usize,
    pub converged: bool,
}

impl<const N: usize> QuadResultN<N> {
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            let (i, _) = self
                .err_estimate
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, &e)| if e > acc.1 { (i, e) } else { acc });
            Err(Error::NotConverged {
                value: self.value[i],
                err_estimate: self.err_estimate[i],
                panels: self.panels_used,
            })
        }
    }
}

/// Integration limits `(omega_min, omega_max)` for an emitter at `t1`.
///
/// The upper limit covers 50 thermal frequencies and the resonance tail;
/// the lower limit sits far inside the Rayleigh–Jeans region.
pub fn default_cutoffs(t1: f64, mat: &DerivedMaterial) -> Result<(f64, f64)> {
    let omega_t = thermal_scales(t1)?.omega_t;
    let omega_max = (50.0 * omega_t).max(mat.omega0_alpha + 40.0 * mat.gamma);
    Ok((1e-8 * omega_t, omega_max))
}

/// Integrates a scalar function over `[spec.omega_min, spec.omega_max]`.
///
/// `osc_period_hint` is the period in `omega` of any `cos(omega tau)`
/// factor, i.e. `2 pi / tau`.
pub fn integrate<F>(f: F, spec: &QuadSpec, osc_period_hint: Option<f64>) -> QuadResult
where
    F: Fn(f64) -> f64,
{
    let r = integrate_n(|x| [f(x)], spec, osc_period_hint);
    QuadResult {
        value: r.value[0],
        err_estimate: r.err_estimate[0],
        panels_used: r.panels_used,
        converged: r.converged,
    }
}

/// Integrates `N` functions evaluated together. Convergence requires every
/// component to meet `max(rel_tol |value|, abs_tol)`.
pub fn integrate_n<const N: usize, F>(f: F, spec: &QuadSpec, osc_period_hint: Option<f64>) -> QuadResultN<N>
where
    F: Fn(f64) -> [f64; N],
{
    let edges = initial_partition(spec, osc_period_hint);
    adaptive(&f, &edges, spec.rel_tol, spec.abs_tol, spec.max_panels)
}

/// Adaptive integration over an arbitrary finite interval, starting from
/// `initial_panels` equal panels.
pub fn integrate_interval<F>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> QuadResult
where
    F: Fn(f64) -> f64,
{
    let n = initial_panels.max(1);
    let edges: Vec<f64> = (0..=n)
        .map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 })
        .collect();
    let r = adaptive(&|x| [f(x)], &edges, rel_tol, abs_tol, max_panels);
    QuadResult {
        value: r.value[0],
        err_estimate: r.err_estimate[0],
        panels_used: r.panels_used,
        converged: r.converged,
    }
}

/// Panel edges of the initial partition.
pub fn initial_partition(spec: &QuadSpec, osc_period_hint: Option<f64>) -> Vec<f64> {
    let (a, b) = (spec.omega_min, spec.omega_max);
    let mut width = (b - a) / 16.0;
    if let Some(p) = osc_period_hint {
        if p.is_finite() && p > 0.0 {
            width = width.min(p / 8.0);
        }
    }
    // Breakpoints from the resonance windows, each with its own width.
    let mut cuts: Vec<(f64, f64, f64)> = Vec::new();
    for w in &spec.resonances {
        let lo = (w.center - w.half_width).max(a);
        let hi = (w.center + w.half_width).min(b);
        if lo < hi {
            cuts.push((lo, hi, width.min(w.panel_width)));
        }
    }
    cuts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut segments: Vec<(f64, f64, f64)> = Vec::new();
    let mut cursor = a;
    for (lo, hi, w) in cuts {
        let lo = lo.max(cursor);
        if hi <= lo {
            continue;
        }
        if lo > cursor {
            segments.push((cursor, lo, width));
        }
        segments.push((lo, hi, w));
        cursor = hi;
    }
    if cursor < b {
        segments.push((cursor, b, width));
    }
    let mut edges = vec![a];
    for (lo, hi, w) in segments {
        let n = ((hi - lo) / w).ceil().max(1.0) as usize;
        for i in 1..=n {
            edges.push(if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 });
        }
    }
    edges
}

fn gk15<const N: usize, F>(f: &F, a: f64, b: f64) -> ([f64; N], [f64; N])
where
    F: Fn(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = [0.0; N];
    let mut res_g = [0.0; N];
    let mut res_abs = [0.0; N];
    let mut fv = [[[0.0; N]; 2]; 7];
    for i in 0..N {
        res_k[i] = WGK[7] * fc[i];
        res_g[i] = WG[3] * fc[i];
        res_abs[i] = (WGK[7] * fc[i]).abs();
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for i in 0..N {
            let s = f1[i] + f2[i];
            res_k[i] += WGK[j] * s;
            res_abs[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
            if j % 2 == 1 {
                res_g[i] += WG[j / 2] * s;
            }
        }
        fv[j] = [f1, f2];
    }
    let mut val = [0.0; N];
    let mut err = [0.0; N];
    for i in 0..N {
        let mean = 0.5 * res_k[i];
        let mut asc = WGK[7] * (fc[i] - mean).abs();
        for j in 0..7 {
            asc += WGK[j] * ((fv[j][0][i] - mean).abs() + (fv[j][1][i] - mean).abs());
        }
        let abs_half = half.abs();
        let result_asc = asc * abs_half;
        let result_abs = res_abs[i] * abs_half;
        let mut e = ((res_k[i] - res_g[i]) * half).abs();
        if result_asc != 0.0 && e != 0.0 {
            e = result_asc * (200.0 * e / result_asc).powf(1.5).min(1.0);
        }
        if result_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            e = e.max(50.0 * f64::EPSILON * result_abs);
        }
        val[i] = res_k[i] * half;
        err[i] = if e.is_finite() { e } else { f64::INFINITY };
    }
    (val, err)
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    val: [f64; N],
    err: [f64; N],
}

#[derive(PartialEq)]
struct Key {
    priority: f64,
    index: usize,
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.index.cmp(&self.index))
    }
}

fn priority<const N: usize>(err: &[f64; N], scale: &[f64; N]) -> f64 {
    err.iter()
        .zip(scale)
        .map(|(e, s)| e / s)
        .fold(0.0, f64::max)
}

fn tolerances<const N: usize>(val: &[f64; N], rel_tol: f64, abs_tol: f64) -> [f64; N] {
    let mut t = [0.0; N];
    for i in 0..N {
        t[i] = (rel_tol * val[i].abs()).max(abs_tol);
    }
    t
}

fn scales<const N: usize>(tol: &[f64; N]) -> [f64; N] {
    let mut s = [0.0; N];
    for i in 0..N {
        s[i] = if tol[i] > 0.0 { tol[i] } else { f64::MIN_POSITIVE };
    }
    s
}

fn sorted_totals<const N: usize>(panels: &[Panel<N>]) -> ([f64; N], [f64; N]) {
    let mut order: Vec<usize> = (0..panels.len()).collect();
    order.sort_by(|&i, &j| panels[i].a.total_cmp(&panels[j].a));
    let mut val = [0.0; N];
    let mut err = [0.0; N];
    for &k in &order {
        for i in 0..N {
            val[i] += panels[k].val[i];
            err[i] += panels[k].err[i];
        }
    }
    (val, err)
}

fn converged<const N: usize>(err: &[f64; N], tol: &[f64; N]) -> bool {
    err.iter().zip(tol).all(|(e, t)| e <= t)
}

fn adaptive<const N: usize, F>(
    f: &F,
    edges: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> QuadResultN<N>
where
    F: Fn(f64) -> [f64; N],
{
    let mut panels: Vec<Panel<N>> = edges
        .windows(2)
        .map(|w| {
            let (val, err) = gk15(f, w[0], w[1]);
            Panel {
                a: w[0],
                b: w[1],
                val,
                err,
            }
        })
        .collect();
    let (mut tot_val, mut tot_err) = sorted_totals(&panels);
    let mut tol = tolerances(&tot_val, rel_tol, abs_tol);
    let mut scale = scales(&tol);
    let mut heap: BinaryHeap<Key> = panels
        .iter()
        .enumerate()
        .map(|(index, p)| Key {
            priority: priority(&p.err, &scale),
            index,
        })
        .collect();
    let mut next_refresh = 2 * panels.len().max(64);

    while !converged(&tot_err, &tol) && panels.len() < max_panels {
        let Some(top) = heap.pop() else { break };
        let p = &panels[top.index];
        let (a, b) = (p.a, p.b);
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) || top.priority == 0.0 {
            // Panel cannot be split further; leave it out of the queue.
            continue;
        }
        let (lv, le) = gk15(f, a, mid);
        let (rv, re) = gk15(f, mid, b);
        for i in 0..N {
            tot_val[i] += lv[i] + rv[i] - p.val[i];
            tot_err[i] += le[i] + re[i] - p.err[i];
        }
        panels[top.index] = Panel {
            a,
            b: mid,
            val: lv,
            err: le,
        };
        heap.push(Key {
            priority: priority(&le, &scale),
            index: top.index,
        });
        panels.push(Panel {
            a: mid,
            b,
            val: rv,
            err: re,
        });
        heap.push(Key {
            priority: priority(&re, &scale),
            index: panels.len() - 1,
        });
        tol = tolerances(&tot_val, rel_tol, abs_tol);
        if panels.len() >= next_refresh {
            // Drop accumulated rounding in the running sums and rescale keys.
            (tot_val, tot_err) = sorted_totals(&panels);
            tol = tolerances(&tot_val, rel_tol, abs_tol);
            scale = scales(&tol);
            heap = panels
                .iter()
                .enumerate()
                .map(|(index, p)| Key {
                    priority: priority(&p.err, &scale),
                    index,
                })
                .collect();
            next_refresh = 2 * panels.len();
        }
    }

    let (value, err_estimate) = sorted_totals(&panels);
    let tol = tolerances(&value, rel_tol, abs_tol);
    QuadResultN {
        value,
        err_estimate,
        panels_used: panels.len(),
        converged: converged(&err_estimate, &tol),
    }
}
