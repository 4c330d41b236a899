//! Run configuration: a flat `key = value` file with one section per
//! particle. Parsing is strict; unknown or repeated keys are errors.

use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use heatflux::materials::{DrudeLorentz, Particle};
use heatflux::stationary::{PairConfig, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialBlock {
    pub eps_inf: f64,
    pub omega0: f64,
    pub omegap: f64,
    pub gamma: f64,
    pub radius: f64,
}

impl MaterialBlock {
    const KEYS: [&'static str; 5] = ["eps_inf", "omega0_rad_s", "omegap_rad_s", "gamma_rad_s", "radius_m"];

    pub fn sic(radius: f64) -> Self {
        let m = DrudeLorentz::sic();
        Self {
            eps_inf: m.eps_inf,
            omega0: m.omega0,
            omegap: m.omegap,
            gamma: m.gamma,
            radius,
        }
    }

    fn particle(&self) -> Result<Particle, String> {
        let m = DrudeLorentz::new(self.eps_inf, self.omega0, self.omegap, self.gamma).map_err(|e| e.to_string())?;
        Particle::new(m, self.radius).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub particle1: MaterialBlock,
    pub particle2: MaterialBlock,
    pub distance: f64,
    pub temperature: f64,
    pub rel_tol: Option<f64>,
    pub omega_max: Option<f64>,
    pub max_panels: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

pub const PRESETS: [(&str, f64, f64); 4] = [
    ("sic-300k-nearfield", 300.0, 100e-9),
    ("sic-300k-farfield", 300.0, 1e-3),
    ("sic-30k-nearfield", 30.0, 100e-9),
    ("sic-30k-farfield", 30.0, 1e-3),
];

const PRESET_RADIUS: f64 = 10e-9;

pub fn preset(name: &str) -> Result<RunConfig, String> {
    let Some(&(_, t, d)) = PRESETS.iter().find(|p| p.0 == name) else {
        let names: Vec<_> = PRESETS.iter().map(|p| p.0).collect();
        return Err(format!("unknown preset '{name}', expected one of {}", names.join(", ")));
    };
    let cfg = RunConfig {
        particle1: MaterialBlock::sic(PRESET_RADIUS),
        particle2: MaterialBlock::sic(PRESET_RADIUS),
        distance: d,
        temperature: t,
        rel_tol: None,
        omega_max: None,
        max_panels: None,
        output: None,
        format: None,
    };
    cfg.pair()?;
    Ok(cfg)
}

#[derive(Default)]
struct Partial {
    values: Vec<(String, f64)>,
}

impl Partial {
    fn take(&self, key: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    fn block(&self, section: &str) -> Result<MaterialBlock, String> {
        let get = |k: &str| self.take(k).ok_or_else(|| format!("[{section}]: missing key '{k}'"));
        Ok(MaterialBlock {
            eps_inf: get("eps_inf")?,
            omega0: get("omega0_rad_s")?,
            omegap: get("omegap_rad_s")?,
            gamma: get("gamma_rad_s")?,
            radius: get("radius_m")?,
        })
    }
}

fn number(s: &str, line: usize) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("line {line}: '{s}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("line {line}: '{s}' is not finite"));
    }
    Ok(v)
}

pub fn parse(text: &str) -> Result<RunConfig, String> {
    let mut top = Partial::default();
    let mut p1: Option<Partial> = None;
    let mut p2: Option<Partial> = None;
    let mut output = None;
    let mut format = None;
    let mut section = String::new();

    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            let slot = match name {
                "particle1" => &mut p1,
                "particle2" => &mut p2,
                _ => return Err(format!("line {n}: unknown section [{name}]")),
            };
            if slot.is_some() {
                return Err(format!("line {n}: section [{name}] repeated"));
            }
            *slot = Some(Partial::default());
            section = name.to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {n}: expected 'key = value'"));
        };
        let (key, value) = (key.trim(), value.trim());
        let target = match section.as_str() {
            "" => &mut top,
            "particle1" => p1.as_mut().unwrap(),
            _ => p2.as_mut().unwrap(),
        };
        if target.values.iter().any(|(k, _)| k == key)
            || (section.is_empty() && key == "output" && output.is_some())
            || (section.is_empty() && key == "format" && format.is_some())
        {
            return Err(format!("line {n}: key '{key}' repeated"));
        }
        if section.is_empty() {
            match key {
                "distance_m" | "temperature_K" | "rel_tol" | "omega_max" | "max_panels" => {
                    target.values.push((key.into(), number(value, n)?));
                }
                "output" => output = Some(PathBuf::from(value)),
                "format" => {
                    format = Some(match value {
                        "csv" => Format::Csv,
                        "json" => Format::Json,
                        _ => return Err(format!("line {n}: format must be csv or json")),
                    })
                }
                _ => return Err(format!("line {n}: unknown key '{key}'")),
            }
        } else if MaterialBlock::KEYS.contains(&key) {
            target.values.push((key.into(), number(value, n)?));
        } else {
            return Err(format!("line {n}: unknown key '{key}' in [{section}]"));
        }
    }

    let cfg = RunConfig {
        particle1: p1.ok_or("missing section [particle1]")?.block("particle1")?,
        particle2: p2.ok_or("missing section [particle2]")?.block("particle2")?,
        distance: top.take("distance_m").ok_or("missing key 'distance_m'")?,
        temperature: top.take("temperature_K").ok_or("missing key 'temperature_K'")?,
        rel_tol: top.take("rel_tol"),
        omega_max: top.take("omega_max"),
        max_panels: match top.take("max_panels") {
            Some(v) if v >= 1.0 && v.fract() == 0.0 && v <= 1e9 => Some(v as usize),
            Some(v) => return Err(format!("max_panels must be a whole number in [1, 1e9], got {v}")),
            None => None,
        },
        output,
        format,
    };
    cfg.pair()?;
    cfg.options()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn pair(&self) -> Result<PairConfig, String> {
        PairConfig::new(self.particle1.particle()?, self.particle2.particle()?, self.distance, self.temperature)
            .map_err(|e| e.to_string())
    }

    pub fn options(&self) -> Result<SolverOptions, String> {
        let mut opts = SolverOptions::default();
        if let Some(t) = self.rel_tol {
            if !(t > 0.0 && t < 1.0) {
                return Err(format!("rel_tol must lie in (0, 1), got {t:e}"));
            }
            opts.rel_tol = t;
        }
        if let Some(w) = self.omega_max {
            if !(w > 0.0) {
                return Err(format!("omega_max must be positive, got {w:e}"));
            }
            opts.omega_max = Some(w);
        }
        if let Some(n) = self.max_panels {
            opts.max_panels = n;
        }
        Ok(opts)
    }

    /// Physical and numerical content in a fixed layout; output settings
    /// are left out so they do not change the hash.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "distance_m = {:.16e}", self.distance);
        let _ = writeln!(s, "temperature_K = {:.16e}", self.temperature);
        if let Some(t) = self.rel_tol {
            let _ = writeln!(s, "rel_tol = {t:.16e}");
        }
        if let Some(w) = self.omega_max {
            let _ = writeln!(s, "omega_max = {w:.16e}");
        }
        if let Some(n) = self.max_panels {
            let _ = writeln!(s, "max_panels = {n}");
        }
        for (name, b) in [("particle1", &self.particle1), ("particle2", &self.particle2)] {
            let _ = writeln!(s, "[{name}]");
            let vals = [b.eps_inf, b.omega0, b.omegap, b.gamma, b.radius];
            for (k, v) in MaterialBlock::KEYS.iter().zip(vals) {
                let _ = writeln!(s, "{k} = {v:.16e}");
            }
        }
        s
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}
