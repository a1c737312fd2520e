//! Flat key-value experiment configuration.
//!
//! One `key = value` pair per line, `#` starts a comment. Power values take
//! an optional `W` or `dBm` suffix (watts assumed), distances an optional
//! `m`. Everything is normalized to linear watts internally.

use std::fmt::Write as _;
use std::path::Path;

use psea::chain::BatteryModel;
use psea::channel::Topology;
use psea::opt::LambdaGrid;
use psea::sim::{BatteryMode, Scheme, SimConfig};
use psea::SystemParams;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Power,
    Delta,
    Lambda,
}

impl SweepAxis {
    pub fn column(&self) -> &'static str {
        match self {
            SweepAxis::Power => "p",
            SweepAxis::Delta => "delta",
            SweepAxis::Lambda => "lambda",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub params: SystemParams,
    pub capacity: f64,
    pub levels: u32,
    pub delta: u32,
    pub scheme: Scheme,
    pub battery_mode: BatteryMode,
    pub n_blocks: u64,
    pub seed: u64,
    pub grid: LambdaGrid,
    pub sweep: Option<Sweep>,
}

impl ExperimentConfig {
    pub fn battery(&self) -> Result<BatteryModel, CliError> {
        BatteryModel::new(self.capacity, self.levels, self.delta).map_err(CliError::from)
    }

    pub fn sim_config(&self, seed_override: Option<u64>) -> SimConfig {
        SimConfig {
            n_blocks: self.n_blocks,
            seed: seed_override.unwrap_or(self.seed),
            battery_mode: self.battery_mode,
            scheme: self.scheme,
        }
    }

    /// Single-line resolved dump, embedded in CSV comments for provenance.
    pub fn resolved(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let _ = write!(
            s,
            "p_a={:e} p_b={:e} n0={:e} n1={:e} n2={:e} eta={} lambda={} \
             m_a={} m_b={} omega_a={:e} omega_b={:e} sigma_a={} sigma_b={} \
             capacity={} levels={} delta={} scheme={} battery_mode={} \
             n_blocks={} seed={} lambda_grid={}..{}..{}",
            p.p_a,
            p.p_b,
            p.n0,
            p.n1,
            p.n2,
            p.eta,
            p.lambda,
            p.m_a,
            p.m_b,
            p.omega_a,
            p.omega_b,
            p.sigma_a,
            p.sigma_b,
            self.capacity,
            self.levels,
            self.delta,
            scheme_name(self.scheme),
            mode_name(self.battery_mode),
            self.n_blocks,
            self.seed,
            self.grid.min,
            self.grid.step,
            self.grid.max,
        );
        if let Some(sw) = &self.sweep {
            let vals: Vec<String> = sw.values.iter().map(|v| v.to_string()).collect();
            let _ = write!(s, " sweep={}:{}", sw.axis.column(), vals.join(","));
        }
        s
    }
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::PsEa => "ps_ea",
        Scheme::TsEa => "ts_ea",
        Scheme::PsNoEa => "ps_no_ea",
    }
}

fn mode_name(m: BatteryMode) -> &'static str {
    match m {
        BatteryMode::Discrete => "discrete",
        BatteryMode::Continuous => "continuous",
    }
}

struct Entry {
    key: String,
    value: String,
    line: usize,
    used: bool,
}

struct Raw {
    entries: Vec<Entry>,
}

impl Raw {
    fn parse(text: &str) -> Result<Raw, CliError> {
        let mut entries = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            if stripped.trim().is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or_else(|| {
                CliError::config(format!("line {line}: expected `key = value`"))
            })?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(CliError::config(format!(
                    "line {line}: empty key or value"
                )));
            }
            if let Some(prev) = entries.iter().find(|e: &&Entry| e.key == key) {
                return Err(CliError::config(format!(
                    "line {line}: duplicate key `{key}` (first set on line {})",
                    prev.line
                )));
            }
            entries.push(Entry { key, value, line, used: false });
        }
        Ok(Raw { entries })
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        for e in &mut self.entries {
            if e.key == key {
                e.used = true;
                return Some((e.value.clone(), e.line));
            }
        }
        None
    }

    fn unknown(&self) -> Option<&Entry> {
        self.entries.iter().find(|e| !e.used)
    }
}

fn bad(key: &str, line: usize, what: &str) -> CliError {
    CliError::config(format!("line {line}: key `{key}`: {what}"))
}

/// `"-80 dBm"` -> 1e-11 W; `"0.08 W"` or bare `"0.08"` -> 0.08 W.
fn parse_power(key: &str, value: &str, line: usize) -> Result<f64, CliError> {
    let mut parts = value.split_whitespace();
    let num: f64 = parts
        .next()
        .unwrap()
        .parse()
        .map_err(|_| bad(key, line, "expected a number"))?;
    match parts.next() {
        None | Some("W") => Ok(num),
        Some("dBm") => Ok(10f64.powf((num - 30.0) / 10.0)),
        Some(u) => Err(bad(key, line, &format!("unknown power unit `{u}` (use W or dBm)"))),
    }
}

fn parse_length(key: &str, value: &str, line: usize) -> Result<f64, CliError> {
    let mut parts = value.split_whitespace();
    let num: f64 = parts
        .next()
        .unwrap()
        .parse()
        .map_err(|_| bad(key, line, "expected a number"))?;
    match parts.next() {
        None | Some("m") => Ok(num),
        Some(u) => Err(bad(key, line, &format!("unknown length unit `{u}` (use m)"))),
    }
}

fn parse_f64(key: &str, value: &str, line: usize) -> Result<f64, CliError> {
    value.parse().map_err(|_| bad(key, line, "expected a number"))
}

fn parse_int<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, CliError> {
    value.parse().map_err(|_| bad(key, line, "expected an integer"))
}

pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::config(format!("cannot read config {}: {e}", path.display()))
    })?;
    let mut raw = Raw::parse(&text)?;

    let mut power = |key: &str| -> Result<Option<f64>, CliError> {
        raw_take_map(&mut raw, key, parse_power)
    };
    let p_a = require(power("p_a")?, "p_a")?;
    let p_b = require(power("p_b")?, "p_b")?;
    let n0 = require(power("n0")?, "n0")?;
    let n1 = require(power("n1")?, "n1")?;
    let n2 = require(power("n2")?, "n2")?;

    let eta = require(raw_take_map(&mut raw, "eta", parse_f64)?, "eta")?;
    let lambda = require(raw_take_map(&mut raw, "lambda", parse_f64)?, "lambda")?;
    let m_a: u32 = require(raw_take_map(&mut raw, "m_a", parse_int)?, "m_a")?;
    let m_b: u32 = require(raw_take_map(&mut raw, "m_b", parse_int)?, "m_b")?;
    let sigma_a = require(raw_take_map(&mut raw, "sigma_a", parse_f64)?, "sigma_a")?;
    let sigma_b = require(raw_take_map(&mut raw, "sigma_b", parse_f64)?, "sigma_b")?;

    // Average gains: either explicit, or derived from the collinear layout.
    let omega_a = raw_take_map(&mut raw, "omega_a", parse_f64)?;
    let omega_b = raw_take_map(&mut raw, "omega_b", parse_f64)?;
    let d_ab = raw_take_map(&mut raw, "d_ab", parse_length)?;
    let d_ar = raw_take_map(&mut raw, "d_ar", parse_length)?;
    let alpha = raw_take_map(&mut raw, "alpha", parse_f64)?;
    let (omega_a, omega_b) = match (omega_a, omega_b, d_ab, d_ar) {
        (Some(a), Some(b), None, None) => {
            if alpha.is_some() {
                return Err(CliError::config(
                    "alpha has no effect with explicit omega_a/omega_b".into(),
                ));
            }
            (a, b)
        }
        (None, None, Some(d_ab), Some(d_ar)) => {
            let topo = Topology { d_ab, d_ar, alpha: alpha.unwrap_or(2.0) };
            topo.gains()?
        }
        (None, None, None, None) => {
            return Err(CliError::config(
                "set either omega_a/omega_b or the layout d_ab/d_ar".into(),
            ))
        }
        _ => {
            return Err(CliError::config(
                "omega_a/omega_b and d_ab/d_ar are mutually exclusive".into(),
            ))
        }
    };

    let capacity = require(raw_take_map(&mut raw, "capacity", parse_f64)?, "capacity")?;
    let levels: u32 = require(raw_take_map(&mut raw, "levels", parse_int)?, "levels")?;
    let delta: u32 = require(raw_take_map(&mut raw, "delta", parse_int)?, "delta")?;

    let scheme = match raw.take("scheme") {
        None => Scheme::PsEa,
        Some((v, line)) => match v.as_str() {
            "ps_ea" => Scheme::PsEa,
            "ts_ea" => Scheme::TsEa,
            "ps_no_ea" => Scheme::PsNoEa,
            other => {
                return Err(bad(
                    "scheme",
                    line,
                    &format!("unknown scheme `{other}` (ps_ea, ts_ea, ps_no_ea)"),
                ))
            }
        },
    };
    let battery_mode = match raw.take("battery_mode") {
        None => BatteryMode::Discrete,
        Some((v, line)) => match v.as_str() {
            "discrete" => BatteryMode::Discrete,
            "continuous" => BatteryMode::Continuous,
            other => {
                return Err(bad(
                    "battery_mode",
                    line,
                    &format!("unknown battery mode `{other}` (discrete, continuous)"),
                ))
            }
        },
    };

    let n_blocks: u64 =
        raw_take_map(&mut raw, "n_blocks", parse_int)?.unwrap_or(200_000);
    let seed: u64 = raw_take_map(&mut raw, "seed", parse_int)?.unwrap_or(1);

    let defaults = LambdaGrid::default();
    let grid = LambdaGrid {
        min: raw_take_map(&mut raw, "lambda_min", parse_f64)?.unwrap_or(defaults.min),
        max: raw_take_map(&mut raw, "lambda_max", parse_f64)?.unwrap_or(defaults.max),
        step: raw_take_map(&mut raw, "lambda_step", parse_f64)?.unwrap_or(defaults.step),
    };
    if !(grid.min > 0.0 && grid.max < 1.0 && grid.min <= grid.max && grid.step > 0.0) {
        return Err(CliError::config(format!(
            "lambda grid {}..{}..{} must satisfy 0 < min <= max < 1, step > 0",
            grid.min, grid.step, grid.max
        )));
    }

    let sweep = parse_sweep(&mut raw)?;

    if let Some(e) = raw.unknown() {
        return Err(CliError::config(format!(
            "line {}: unknown key `{}`",
            e.line, e.key
        )));
    }

    let params = SystemParams {
        p_a,
        p_b,
        n0,
        n1,
        n2,
        eta,
        lambda,
        m_a,
        m_b,
        omega_a,
        omega_b,
        sigma_a,
        sigma_b,
    };
    params.validate()?;
    // Surface battery errors (e.g. delta out of 1..levels) at parse time.
    BatteryModel::new(capacity, levels, delta)?;

    Ok(ExperimentConfig {
        params,
        capacity,
        levels,
        delta,
        scheme,
        battery_mode,
        n_blocks,
        seed,
        grid,
        sweep,
    })
}

fn raw_take_map<T>(
    raw: &mut Raw,
    key: &str,
    f: impl Fn(&str, &str, usize) -> Result<T, CliError>,
) -> Result<Option<T>, CliError> {
    match raw.take(key) {
        Some((v, line)) => Ok(Some(f(key, &v, line)?)),
        None => Ok(None),
    }
}

fn require<T>(v: Option<T>, key: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::config(format!("missing required key `{key}`")))
}

fn parse_sweep(raw: &mut Raw) -> Result<Option<Sweep>, CliError> {
    let axis = match raw.take("sweep_param") {
        None => {
            for k in ["sweep_min", "sweep_max", "sweep_step", "sweep_values"] {
                if let Some((_, line)) = raw.take(k) {
                    return Err(bad(k, line, "requires sweep_param"));
                }
            }
            return Ok(None);
        }
        Some((v, line)) => match v.as_str() {
            "p" => SweepAxis::Power,
            "delta" => SweepAxis::Delta,
            "lambda" => SweepAxis::Lambda,
            other => {
                return Err(bad(
                    "sweep_param",
                    line,
                    &format!("unknown sweep parameter `{other}` (p, delta, lambda)"),
                ))
            }
        },
    };

    let values = if let Some((list, line)) = raw.take("sweep_values") {
        let mut vals = Vec::new();
        for tok in list.split(',') {
            vals.push(
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| bad("sweep_values", line, "expected comma-separated numbers"))?,
            );
        }
        vals
    } else {
        let min = require(raw_take_map(raw, "sweep_min", parse_f64)?, "sweep_min")?;
        let max = require(raw_take_map(raw, "sweep_max", parse_f64)?, "sweep_max")?;
        let step = require(raw_take_map(raw, "sweep_step", parse_f64)?, "sweep_step")?;
        if !(step > 0.0) {
            return Err(CliError::config("sweep_step must be > 0".into()));
        }
        let mut vals = Vec::new();
        let mut k = 0u32;
        loop {
            let v = min + step * k as f64;
            if v > max + 1e-12 * step {
                break;
            }
            vals.push(v);
            k += 1;
        }
        vals
    };
    if values.is_empty() {
        return Err(CliError::config("sweep axis is empty".into()));
    }
    if axis == SweepAxis::Delta {
        for &v in &values {
            if (v - v.round()).abs() > 1e-9 || v < 1.0 {
                return Err(CliError::config(format!(
                    "delta sweep values must be positive integers, got {v}"
                )));
            }
        }
    }
    Ok(Some(Sweep { axis, values }))
}
