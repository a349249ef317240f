//! Flat `key = value` run configuration with `#` comments.

use std::path::PathBuf;

use kinproof::variants::VariantKind;
use kinproof::{Degradation, ModelParams};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub alpha: f64,
    pub delta: f64,
    pub sigma: f64,
    pub energy: f64,
    pub b: f64,
    /// Degradation rate; `None` means μ = e^{−bN}.
    pub mu: Option<f64>,

    pub sigma_min: f64,
    pub sigma_max: f64,
    pub sigma_points: usize,
    pub deltas: Vec<f64>,

    pub theta: f64,
    pub taus: Vec<f64>,

    pub e_t: f64,
    pub e_d: f64,
    pub e_p: f64,
    pub t_end: f64,
    pub t_points: usize,

    pub beta: f64,
    pub loss: f64,
    pub length: f64,
    pub cells: usize,

    pub variant: String,
    pub gamma: f64,
    pub truncation: usize,

    pub trials: u64,
    pub seed: u64,
    pub mc_sigmas: Vec<f64>,

    pub out_dir: PathBuf,
    pub svg: bool,
    /// 0 uses every core.
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 20,
            alpha: 1.0,
            delta: 2.0,
            sigma: 0.0,
            energy: 3f64.ln(),
            b: 2f64.ln(),
            mu: None,
            sigma_min: -2.0,
            sigma_max: 4.0,
            sigma_points: 241,
            deltas: vec![0.1, 2.0],
            theta: 0.5,
            taus: vec![40.0, 80.0, 160.0],
            e_t: 0.7,
            e_d: -0.2,
            e_p: 0.4,
            t_end: 100.0,
            t_points: 101,
            beta: 2.0,
            loss: 0.01,
            length: 20.0,
            cells: 2000,
            variant: "attachment".into(),
            gamma: 1.0,
            truncation: 200,
            trials: 100_000,
            seed: 1,
            mc_sigmas: vec![-1.0, 0.0, 1.0, 2.0, 3.0],
            out_dir: PathBuf::from("out"),
            svg: false,
            workers: 0,
        }
    }
}

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{key} = {value}`: {why}"))
}

fn float(key: &str, v: &str) -> Result<f64, CliError> {
    v.parse::<f64>().map_err(|e| bad(key, v, e))
}

fn int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| bad(key, v, e))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',').map(|s| float(key, s.trim())).collect()
}

fn boolean(key: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, v, "expected true or false")),
    }
}

/// Shortest decimal that parses back to the same f64.
fn f(x: f64) -> String {
    format!("{x:?}")
}

fn fl(xs: &[f64]) -> String {
    xs.iter().map(|x| f(*x)).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Applies `key = value` lines on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value, got `{raw}`", i + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<(), CliError> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{kv}` is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        match key {
            "n" => self.n = int(key, v)?,
            "alpha" => self.alpha = float(key, v)?,
            "delta" => self.delta = float(key, v)?,
            "sigma" => self.sigma = float(key, v)?,
            "energy" => self.energy = float(key, v)?,
            "b" => self.b = float(key, v)?,
            "mu" => self.mu = if v == "auto" { None } else { Some(float(key, v)?) },
            "sigma_min" => self.sigma_min = float(key, v)?,
            "sigma_max" => self.sigma_max = float(key, v)?,
            "sigma_points" => self.sigma_points = int(key, v)?,
            "deltas" => self.deltas = list(key, v)?,
            "theta" => self.theta = float(key, v)?,
            "taus" => self.taus = list(key, v)?,
            "e_t" => self.e_t = float(key, v)?,
            "e_d" => self.e_d = float(key, v)?,
            "e_p" => self.e_p = float(key, v)?,
            "t_end" => self.t_end = float(key, v)?,
            "t_points" => self.t_points = int(key, v)?,
            "beta" => self.beta = float(key, v)?,
            "loss" => self.loss = float(key, v)?,
            "length" => self.length = float(key, v)?,
            "cells" => self.cells = int(key, v)?,
            "variant" => {
                parse_variant(v, 1.0).map_err(|e| bad(key, v, e))?;
                self.variant = v.to_string()
            }
            "gamma" => self.gamma = float(key, v)?,
            "truncation" => self.truncation = int(key, v)?,
            "trials" => self.trials = int(key, v)?,
            "seed" => self.seed = int(key, v)?,
            "mc_sigmas" => self.mc_sigmas = list(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "svg" => self.svg = boolean(key, v)?,
            "workers" => self.workers = int(key, v)?,
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Every key in a fixed order, with section comments.
    pub fn serialize(&self) -> String {
        let mut lines = Vec::new();
        let mut kv = |k: &str, v: String| {
            lines.push(if k.starts_with('#') { k.to_string() } else { format!("{k} = {v}") })
        };
        kv("# ladder", String::new());
        kv("n", self.n.to_string());
        kv("alpha", f(self.alpha));
        kv("delta", f(self.delta));
        kv("sigma", f(self.sigma));
        kv("energy", f(self.energy));
        kv("b", f(self.b));
        kv("mu", self.mu.map_or("auto".into(), f));
        kv("# sweeps", String::new());
        kv("sigma_min", f(self.sigma_min));
        kv("sigma_max", f(self.sigma_max));
        kv("sigma_points", self.sigma_points.to_string());
        kv("deltas", fl(&self.deltas));
        kv("# half line", String::new());
        kv("theta", f(self.theta));
        kv("taus", fl(&self.taus));
        kv("# enlarged network", String::new());
        kv("e_t", f(self.e_t));
        kv("e_d", f(self.e_d));
        kv("e_p", f(self.e_p));
        kv("t_end", f(self.t_end));
        kv("t_points", self.t_points.to_string());
        kv("# transport equations", String::new());
        kv("beta", f(self.beta));
        kv("loss", f(self.loss));
        kv("length", f(self.length));
        kv("cells", self.cells.to_string());
        kv("# modified networks", String::new());
        kv("variant", self.variant.clone());
        kv("gamma", f(self.gamma));
        kv("truncation", self.truncation.to_string());
        kv("# Monte Carlo", String::new());
        kv("trials", self.trials.to_string());
        kv("seed", self.seed.to_string());
        kv("mc_sigmas", fl(&self.mc_sigmas));
        kv("# output", String::new());
        kv("out_dir", self.out_dir.display().to_string());
        kv("svg", self.svg.to_string());
        kv("workers", self.workers.to_string());
        lines.join("\n") + "\n"
    }

    pub fn model(&self) -> Result<ModelParams, CliError> {
        let deg = match self.mu {
            Some(mu) => Degradation::Rate(mu),
            None => Degradation::Exponent(self.b),
        };
        Ok(ModelParams::new(self.n, self.alpha, self.delta, self.sigma, self.energy, deg)?)
    }

    pub fn sigma_grid(&self) -> Result<Vec<f64>, CliError> {
        if self.sigma_points == 0 {
            return Err(CliError::Config("sigma_points must be at least 1".into()));
        }
        if !(self.sigma_min <= self.sigma_max) {
            return Err(CliError::Config("sigma_min must not exceed sigma_max".into()));
        }
        if self.sigma_points == 1 {
            return Ok(vec![self.sigma_min]);
        }
        Ok(kinproof::finite::linspace(self.sigma_min, self.sigma_max, self.sigma_points))
    }

    pub fn variant_kind(&self) -> Result<VariantKind, CliError> {
        parse_variant(&self.variant, self.gamma).map_err(|e| bad("variant", &self.variant, e))
    }
}

fn parse_variant(name: &str, gamma: f64) -> Result<VariantKind, String> {
    Ok(match name {
        "detachment" => VariantKind::Detachment,
        "attachment" => VariantKind::Attachment,
        "dephosphorylation" => VariantKind::Dephosphorylation,
        "delta_infty" => VariantKind::DeltaInfty { gamma },
        _ => return Err("expected detachment, attachment, dephosphorylation or delta_infty".into()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_default() {
        let c = RunConfig::default();
        let text = c.serialize();
        assert_eq!(RunConfig::parse(&text).unwrap(), c);
    }

    #[test]
    fn round_trip_edited() {
        let mut c = RunConfig::default();
        for kv in ["mu=1e-7", "deltas=0.1,0.5,2.5", "energy=0.1", "variant=delta_infty", "out_dir=/tmp/x y", "svg=yes"] {
            c.apply_override(kv).unwrap();
        }
        let again = RunConfig::parse(&c.serialize()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.serialize(), c.serialize());
    }

    #[test]
    fn comments_and_errors() {
        let c = RunConfig::parse("# header\n  n = 7   # inline\n\nsigma=-1.5\n").unwrap();
        assert_eq!((c.n, c.sigma), (7, -1.5));
        assert!(RunConfig::parse("nope = 1").is_err());
        assert!(RunConfig::parse("n = -3").is_err());
        assert!(RunConfig::parse("just text").is_err());
        assert!(RunConfig::parse("variant = other").is_err());
    }

    #[test]
    fn empty_grid_rejected() {
        let mut c = RunConfig::default();
        c.sigma_points = 0;
        assert!(c.sigma_grid().is_err());
    }
}
