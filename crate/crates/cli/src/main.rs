// Negated comparisons reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use heatflux::analysis::{
    far_field_approx, fit_max_params, flux_average_model, near_field_approx, Channel, ExtremaSet, FitParams, TimeSeries,
};
use heatflux::materials::{derived_material, thermal_scales, DerivedMaterial};
use heatflux::series::build_time_series;
use heatflux::stationary::{distance_sweep, log_grid, stationary_flux_spectrum, stationary_flux_with, PairConfig};
use heatflux::transient::{transfer_spectrum, udot_spectrum};
use heatflux::validation::run_all;

use config::{Format, RunConfig};
use output::{Cell, Table};

/// Transient and stationary radiative heat flux between two nanoparticles.
#[derive(Parser)]
#[command(name = "heatflux", version)]
struct Cli {
    /// Run configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in configuration instead of a file.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    /// Output file; standard output if absent.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Relative tolerance of the frequency integrals.
    #[arg(long, global = true, value_name = "X")]
    rel_tol: Option<f64>,
    /// Seed of the random oracle samples.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stationary transfer on a logarithmic distance grid.
    Stationary {
        #[arg(long, default_value_t = 1e-8)]
        d_min: f64,
        #[arg(long, default_value_t = 1e-1)]
        d_max: f64,
        #[arg(long, default_value_t = 10)]
        points_per_decade: usize,
    },
    /// Flux, energy change and transfer against time.
    Transient(Grid),
    /// Spectral densities at a fixed time.
    Spectrum {
        /// Time after arrival (s); defaults to the inverse damping rate.
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 1e11)]
        omega_min: f64,
        #[arg(long, default_value_t = 1e15)]
        omega_max: f64,
        #[arg(long, default_value_t = 100)]
        points_per_decade: usize,
    },
    /// Maxima, minima and averages of each channel and the envelope fit.
    Extrema {
        #[command(flatten)]
        grid: Grid,
        /// Series written by `transient` instead of computing one.
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
    },
    /// Runs the independent oracles.
    Validate {
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

#[derive(Args, Clone, Copy)]
struct Grid {
    #[arg(long, default_value_t = 1e-15)]
    tau_min: f64,
    #[arg(long, default_value_t = 6e-12)]
    tau_max: f64,
    /// Samples per resonance period.
    #[arg(long, default_value_t = 32)]
    samples_per_period: usize,
}

enum Failure {
    Config(String),
    Convergence(String),
    Oracle(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Convergence(_) => 3,
            Failure::Oracle(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Convergence(m) | Failure::Oracle(m) => m,
        }
    }
}

impl From<heatflux::Error> for Failure {
    fn from(e: heatflux::Error) -> Self {
        match e {
            heatflux::Error::NotConverged { .. } => Failure::Convergence(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<String> for Failure {
    fn from(m: String) -> Self {
        Failure::Config(m)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(format!("i/o: {e}"))
    }
}

type Outcome<T> = Result<T, Failure>;

/// Everything a subcommand needs from the configuration.
struct Run {
    cfg: RunConfig,
    pair: PairConfig,
    opts: heatflux::stationary::SolverOptions,
    hash: String,
    receiver: DerivedMaterial,
}

impl Run {
    fn new(cli: &Cli, default_preset: Option<&str>) -> Outcome<Self> {
        let mut cfg = match (&cli.config, &cli.preset, default_preset) {
            (Some(_), Some(_), _) => return Err(Failure::Config("--config and --preset are exclusive".into())),
            (Some(path), None, _) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
                config::parse(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
            }
            (None, Some(name), _) => config::preset(name)?,
            (None, None, Some(name)) => config::preset(name)?,
            (None, None, None) => return Err(Failure::Config("a configuration is required: --config or --preset".into())),
        };
        if cli.rel_tol.is_some() {
            cfg.rel_tol = cli.rel_tol;
        }
        let opts = cfg.options()?;
        let pair = cfg.pair()?;
        for w in pair.validity_warnings() {
            eprintln!("warning: {w}");
        }
        let receiver = derived_material(pair.particle2())?;
        Ok(Self {
            hash: cfg.hash(),
            cfg,
            pair,
            opts,
            receiver,
        })
    }

    fn period(&self) -> f64 {
        2.0 * PI / self.receiver.omega0_alpha
    }

    fn table(&self, command: &'static str, columns: &[&'static str]) -> Table {
        let mut t = Table::new(command, self.hash.clone(), columns);
        t.meta("distance_m", output::fmt_num(self.cfg.distance));
        t.meta("temperature_K", output::fmt_num(self.cfg.temperature));
        t.meta("rel_tol", output::fmt_num(self.opts.rel_tol));
        t
    }

    fn series(&self, g: Grid) -> Outcome<TimeSeries> {
        if !(g.tau_min > 0.0 && g.tau_max > g.tau_min) {
            return Err(Failure::Config(format!(
                "time range needs 0 < tau_min < tau_max, got [{:e}, {:e}]",
                g.tau_min, g.tau_max
            )));
        }
        if g.samples_per_period < 16 {
            return Err(Failure::Config("at least 16 samples per period are needed".into()));
        }
        let dtau = self.period() / g.samples_per_period as f64;
        let steps = ((g.tau_max - g.tau_min) / dtau).ceil();
        if steps > 5e7 {
            return Err(Failure::Config(format!("{steps:e} samples requested, limit is 5e7")));
        }
        let n = steps as usize + 1;
        Ok(build_time_series(&self.pair, g.tau_min, g.tau_max, n.max(2), &self.opts)?)
    }

    fn emit(&self, cli: &Cli, table: &Table) -> Outcome<()> {
        let format = cli.format.or(self.cfg.format).unwrap_or(Format::Csv);
        let path = cli.output.as_ref().or(self.cfg.output.as_ref());
        write_table(table, path.map(|p| p.as_path()), format)
    }
}

fn write_table(table: &Table, path: Option<&Path>, format: Format) -> Outcome<()> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(f);
            table.write(&mut w, format)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            table.write(&mut w, format)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn cmd_stationary(cli: &Cli, d_min: f64, d_max: f64, per_decade: usize) -> Outcome<()> {
    let run = Run::new(cli, None)?;
    if !(d_min > 0.0 && d_max > d_min) {
        return Err(Failure::Config(format!("distance range needs 0 < d_min < d_max, got [{d_min:e}, {d_max:e}]")));
    }
    let ds = log_grid(d_min, d_max, per_decade)?;
    let results = distance_sweep(&run.pair, &ds, &run.opts)?;
    let mut t = run.table(
        "stationary",
        &["d_m", "flux_norm_J_s^-1_m^-6", "frac_d2", "frac_d4", "frac_d6"],
    );
    t.meta("lambda_T_m", output::fmt_num(thermal_scales(run.cfg.temperature)?.lambda_t));
    for (d, r) in ds.iter().zip(&results) {
        let f = r.fractions().unwrap_or([f64::NAN; 3]);
        t.push(vec![(*d).into(), r.value.into(), f[0].into(), f[1].into(), f[2].into()]);
    }
    run.emit(cli, &t)
}

/// The near field form needs the envelope fit, which needs a resolved peak.
fn envelope_fit(run: &Run, ts: &TimeSeries, h_st: f64) -> Option<FitParams> {
    let peak = ts.extrema(Channel::Total, Some(run.period())).ok()?.global_max()?;
    fit_max_params(peak.tau, peak.value, h_st, run.receiver.gamma).ok()
}

fn cmd_transient(cli: &Cli, grid: Grid) -> Outcome<()> {
    let run = Run::new(cli, None)?;
    let h_st = stationary_flux_with(&run.pair, &run.opts)?.value;
    let ts = run.series(grid)?;
    let lambda_t = thermal_scales(run.cfg.temperature)?.lambda_t;
    let near = run.cfg.distance < lambda_t;
    let (g, w0) = (run.receiver.gamma, run.receiver.omega0_alpha);
    let fit = if near { envelope_fit(&run, &ts, h_st) } else { None };
    if near && fit.is_none() {
        eprintln!("warning: no resolved maximum of the total flux; the approximation column is nan");
    }
    let approx = |tau: f64| -> f64 {
        if near {
            fit.map_or(f64::NAN, |fp| near_field_approx(&fp, w0, tau))
        } else {
            far_field_approx(h_st, g, w0, tau).unwrap_or(f64::NAN)
        }
    };
    let mut t = run.table("transient", &["tau_s", "total", "udot", "transfer", "avg_model", "approx"]);
    t.meta("normalization", "per V1 V2 (J s^-1 m^-6)");
    t.meta("delay_s", output::fmt_num(run.pair.delay()));
    t.meta("h_st", output::fmt_num(h_st));
    t.meta("approx", if near { "near field" } else { "far field" });
    for i in 0..ts.len() {
        let tau = ts.taus[i];
        t.push(vec![
            tau.into(),
            ts.total[i].into(),
            ts.udot[i].into(),
            ts.transfer[i].into(),
            flux_average_model(h_st, g, tau).into(),
            approx(tau).into(),
        ]);
    }
    run.emit(cli, &t)
}

fn cmd_spectrum(cli: &Cli, tau: Option<f64>, w_min: f64, w_max: f64, per_decade: usize) -> Outcome<()> {
    let run = Run::new(cli, None)?;
    let tau = tau.unwrap_or(1.0 / run.receiver.gamma);
    if !(tau > 0.0) {
        return Err(Failure::Config(format!("tau must be positive, got {tau:e}")));
    }
    if !(w_min > 0.0 && w_max > w_min) {
        return Err(Failure::Config(format!(
            "frequency range needs 0 < omega_min < omega_max, got [{w_min:e}, {w_max:e}]"
        )));
    }
    let ws = log_grid(w_min, w_max, per_decade)?;
    let rows: Vec<[f64; 4]> = ws
        .par_iter()
        .map(|&w| {
            [
                w,
                udot_spectrum(&run.pair, w, tau),
                transfer_spectrum(&run.pair, w, tau),
                stationary_flux_spectrum(&run.pair, w),
            ]
        })
        .collect();
    let mut t = run.table(
        "spectrum",
        &["omega_rad_s", "udot_spectrum", "transfer_spectrum", "stationary_spectrum"],
    );
    t.meta("normalization", "per V1 V2 and unit angular frequency");
    t.meta("tau_s", output::fmt_num(tau));
    for r in rows {
        t.push(r.iter().map(|&v| v.into()).collect());
    }
    run.emit(cli, &t)
}

/// Reads `tau_s,total,udot,transfer` columns from a CSV written by `transient`.
fn read_series(path: &Path) -> Outcome<TimeSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| Failure::Config("input series is empty".into()))?.split(',').map(str::trim).collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Failure::Config(format!("input series lacks column '{name}'")))
    };
    let idx = [col("tau_s")?, col("total")?, col("udot")?, col("transfer")?];
    let mut cols: [Vec<f64>; 4] = Default::default();
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        for (c, &i) in idx.iter().enumerate() {
            let v = fields
                .get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Failure::Config(format!("input series row {}: bad field {}", n + 1, header[i])))?;
            cols[c].push(v);
        }
    }
    let [taus, total, udot, transfer] = cols;
    Ok(TimeSeries::new(taus, total, udot, transfer)?)
}

fn cmd_extrema(cli: &Cli, grid: Grid, input: Option<&Path>) -> Outcome<()> {
    let run = Run::new(cli, None)?;
    let ts = match input {
        Some(p) => read_series(p)?,
        None => run.series(grid)?,
    };
    let period = run.period();
    let h_st = stationary_flux_with(&run.pair, &run.opts)?.value;
    let sets: Vec<(&str, ExtremaSet)> = [
        ("total", Channel::Total),
        ("udot", Channel::Udot),
        ("transfer", Channel::Transfer),
    ]
    .into_iter()
    .map(|(name, c)| Ok((name, ts.extrema(c, Some(period))?)))
    .collect::<Outcome<_>>()?;

    let mut t = run.table("extrema", &["record", "channel", "tau_s", "value"]);
    t.meta("h_st", output::fmt_num(h_st));
    t.meta("period_s", output::fmt_num(period));
    for (name, set) in &sets {
        for (kind, points) in [("maximum", &set.maxima), ("minimum", &set.minima), ("average", &set.averages)] {
            for p in points.iter() {
                t.push(vec![kind.into(), (*name).into(), p.tau.into(), p.value.into()]);
            }
        }
    }
    let peak = sets[0].1.global_max().ok_or_else(|| Failure::Config("total flux has no maximum".into()))?;
    let fp = fit_max_params(peak.tau, peak.value, h_st, run.receiver.gamma)?;
    for (kind, v) in [("fit_a", fp.a), ("fit_b", fp.b)] {
        t.push(vec![kind.into(), "total".into(), f64::NAN.into(), v.into()]);
    }
    t.push(vec!["fit_peak".into(), "total".into(), fp.tau_max.into(), fp.phi_max.into()]);
    run.emit(cli, &t)
}

fn cmd_validate(cli: &Cli, samples: usize) -> Outcome<()> {
    let run = Run::new(cli, Some("sic-300k-nearfield"))?;
    if samples == 0 {
        return Err(Failure::Config("at least one sample is needed".into()));
    }
    let reports = run_all(&run.pair, samples, cli.seed, &run.opts)?;
    let mut t = run.table("validate", &["oracle", "samples", "max_rel_err", "tolerance", "passed", "worst"]);
    t.meta("seed", cli.seed);
    for r in &reports {
        eprintln!(
            "{} {}: max error {:.2e}, tolerance {:.0e}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.max_rel_err,
            r.tolerance
        );
        t.push(vec![
            r.name.as_str().into(),
            r.samples.into(),
            r.max_rel_err.into(),
            r.tolerance.into(),
            r.passed.into(),
            Cell::Text(r.worst.replace(',', ";")),
        ]);
    }
    run.emit(cli, &t)?;
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Oracle(format!("oracles failed: {}", failed.join(", "))))
    }
}

fn init_threads() -> Outcome<()> {
    let Ok(v) = std::env::var("HEATFLUX_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("HEATFLUX_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(format!("thread pool: {e}")))
}

fn run(cli: &Cli) -> Outcome<()> {
    init_threads()?;
    match &cli.command {
        Command::Stationary {
            d_min,
            d_max,
            points_per_decade,
        } => cmd_stationary(cli, *d_min, *d_max, *points_per_decade),
        Command::Transient(grid) => cmd_transient(cli, *grid),
        Command::Spectrum {
            tau,
            omega_min,
            omega_max,
            points_per_decade,
        } => cmd_spectrum(cli, *tau, *omega_min, *omega_max, *points_per_decade),
        Command::Extrema { grid, input } => cmd_extrema(cli, *grid, input.as_deref()),
        Command::Validate { samples } => cmd_validate(cli, *samples),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
