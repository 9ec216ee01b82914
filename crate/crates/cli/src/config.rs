//! Scenario configuration: a flat `key = value` file overlaid by flags.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Seed used when neither the file nor the flags give one.
pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    ConjugateScan,
    LiftVerify,
    FlowCheck,
    SubsprayDemo,
    InvariantSuite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Manifold {
    Flat,
    Sphere,
    Finsler,
}

fn enum_name<E: ValueEnum>(e: &E) -> String {
    e.to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default()
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub manifold: Manifold,
    pub dim: usize,
    /// Coefficients `c_i` of the Finsler example, one per dimension.
    pub finsler_c: Vec<f64>,
    pub h: f64,
    pub t_max: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eps_fd: f64,
    pub eps_var: f64,
    pub seed: u64,
    /// Random samples per randomized check.
    pub samples: usize,
    /// Directory receiving `report.json` and the CSV files.
    pub out: PathBuf,
}

/// Unvalidated values; later layers override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialConfig {
    pub scenario: Option<Scenario>,
    pub manifold: Option<Manifold>,
    pub dim: Option<usize>,
    pub finsler_c: Option<Vec<f64>>,
    pub h: Option<f64>,
    pub t_max: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub eps_fd: Option<f64>,
    pub eps_var: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
}

fn bad(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("line {line}: {msg}"))
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| bad(line, format!("`{key}` expects a number, got `{v}`")))
}

fn seed(v: &str) -> Option<u64> {
    match v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => v.parse().ok(),
    }
}

/// Accepts `0x`-prefixed hex as well as decimal.
pub fn parse_seed(v: &str) -> Result<u64, String> {
    seed(v).ok_or_else(|| format!("invalid seed `{v}`"))
}

fn list(line: usize, v: &str) -> Result<Vec<f64>, CliError> {
    let inner = v.trim().trim_start_matches('[').trim_end_matches(']');
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(line, "finsler_c", s))
        .collect()
}

impl PartialConfig {
    /// Parses `key = value` lines; `#` starts a comment, `-` and `_` are
    /// interchangeable in keys.
    pub fn parse(text: &str) -> Result<PartialConfig, CliError> {
        let mut c = PartialConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| bad(line, format!("expected `key = value`, got `{body}`")))?;
            let key = k.trim().replace('-', "_");
            let v = v.trim();
            match key.as_str() {
                "scenario" => {
                    c.scenario = Some(Scenario::from_str(v, true).map_err(|m| bad(line, m))?)
                }
                "manifold" => {
                    c.manifold = Some(Manifold::from_str(v, true).map_err(|m| bad(line, m))?)
                }
                "dim" => c.dim = Some(num(line, &key, v)?),
                "finsler_c" => c.finsler_c = Some(list(line, v)?),
                "h" => c.h = Some(num(line, &key, v)?),
                "t_max" => c.t_max = Some(num(line, &key, v)?),
                "alpha" => c.alpha = Some(num(line, &key, v)?),
                "beta" => c.beta = Some(num(line, &key, v)?),
                "eps_fd" => c.eps_fd = Some(num(line, &key, v)?),
                "eps_var" => c.eps_var = Some(num(line, &key, v)?),
                "seed" => {
                    c.seed = Some(seed(v).ok_or_else(|| bad(line, format!("invalid seed `{v}`")))?)
                }
                "samples" => c.samples = Some(num(line, &key, v)?),
                "out" => c.out = Some(PathBuf::from(v)),
                _ => return Err(bad(line, format!("unknown key `{key}`"))),
            }
        }
        Ok(c)
    }

    /// Values set in `top` win.
    pub fn overlay(self, top: PartialConfig) -> PartialConfig {
        PartialConfig {
            scenario: top.scenario.or(self.scenario),
            manifold: top.manifold.or(self.manifold),
            dim: top.dim.or(self.dim),
            finsler_c: top.finsler_c.or(self.finsler_c),
            h: top.h.or(self.h),
            t_max: top.t_max.or(self.t_max),
            alpha: top.alpha.or(self.alpha),
            beta: top.beta.or(self.beta),
            eps_fd: top.eps_fd.or(self.eps_fd),
            eps_var: top.eps_var.or(self.eps_var),
            seed: top.seed.or(self.seed),
            samples: top.samples.or(self.samples),
            out: top.out.or(self.out),
        }
    }

    /// Fills defaults and validates.
    pub fn resolve(self) -> Result<ScenarioConfig, CliError> {
        let err = |m: String| Err(CliError::Config(m));
        let Some(scenario) = self.scenario else {
            return err("no scenario given".into());
        };
        let manifold = self.manifold.unwrap_or(Manifold::Sphere);
        let dim = self
            .dim
            .unwrap_or(if manifold == Manifold::Flat { 1 } else { 2 });
        let finsler_c = self.finsler_c.unwrap_or_else(|| {
            (0..dim)
                .map(|i| if i % 2 == 0 { 0.3 } else { 0.6 })
                .collect()
        });
        let cfg = ScenarioConfig {
            scenario,
            manifold,
            dim,
            finsler_c,
            h: self.h.unwrap_or(1e-3),
            t_max: self.t_max.unwrap_or(1.0),
            alpha: self.alpha.unwrap_or(0.5),
            beta: self.beta.unwrap_or(1.0),
            eps_fd: self.eps_fd.unwrap_or(1e-5),
            eps_var: self.eps_var.unwrap_or(1e-4),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            samples: self.samples.unwrap_or(100),
            out: self.out.unwrap_or_else(|| PathBuf::from("spraylift-out")),
        };
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive("h", cfg.h)?;
        positive("t_max", cfg.t_max)?;
        positive("eps_fd", cfg.eps_fd)?;
        positive("eps_var", cfg.eps_var)?;
        if !cfg.alpha.is_finite() || !cfg.beta.is_finite() {
            return err("alpha and beta must be finite".into());
        }
        if cfg.dim == 0 {
            return err("dim must be at least 1".into());
        }
        if cfg.manifold == Manifold::Sphere && cfg.dim != 2 {
            return err(format!("sphere requires dim = 2, got {}", cfg.dim));
        }
        if cfg.finsler_c.len() != cfg.dim || cfg.finsler_c.iter().any(|c| !c.is_finite()) {
            return err(format!("finsler_c needs {} finite entries", cfg.dim));
        }
        if cfg.samples == 0 {
            return err("samples must be at least 1".into());
        }
        if cfg.t_max / cfg.h > 1e7 {
            return err(format!(
                "t_max / h = {:.1e} steps is too many",
                cfg.t_max / cfg.h
            ));
        }
        Ok(cfg)
    }
}

impl ScenarioConfig {
    /// The configuration as a file that parses back to `self`.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let c: Vec<String> = self.finsler_c.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(s, "scenario = {}", enum_name(&self.scenario));
        let _ = writeln!(s, "manifold = {}", enum_name(&self.manifold));
        let _ = writeln!(s, "dim = {}", self.dim);
        let _ = writeln!(s, "finsler_c = [{}]", c.join(", "));
        let _ = writeln!(s, "h = {:?}", self.h);
        let _ = writeln!(s, "t_max = {:?}", self.t_max);
        let _ = writeln!(s, "alpha = {:?}", self.alpha);
        let _ = writeln!(s, "beta = {:?}", self.beta);
        let _ = writeln!(s, "eps_fd = {:?}", self.eps_fd);
        let _ = writeln!(s, "eps_var = {:?}", self.eps_var);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(s, "out = {}", self.out.display());
        s
    }
}
