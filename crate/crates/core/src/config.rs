//! Plain-text experiment configuration.
//!
//! ```text
//! # comment
//! [experiment]
//! name = equilibrium
//!
//! [mesh]
//! n = 32            # comma-separated list for sweeps
//! ```
//!
//! Keys are addressed as `section.key`. Every key is optional: values start
//! from the preset of `experiment.name` and each key present replaces one
//! field. The full key list is in [`KEYS`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::ddg::FluxParams;
use crate::error::{Error, Result};
use crate::experiment::{ExperimentConfig, ExperimentKind, InitialData};
use crate::mesh::BoundaryKind;
use crate::model::{KsParams, MobilityModel};
use crate::stepper::DtRule;

/// Every recognised `section.key`.
pub const KEYS: &[&str] = &[
    "experiment.name",
    "mesh.n",
    "mesh.dim",
    "mesh.lower",
    "mesh.upper",
    "mesh.boundary",
    "discretization.degree",
    "discretization.beta0",
    "discretization.beta1",
    "model.mobility",
    "model.chi",
    "model.b",
    "model.d",
    "model.alpha",
    "model.beta",
    "time.t_final",
    "time.dt",
    "time.dt_scale",
    "time.newton_tol",
    "time.step_cuts",
    "initial.profile",
    "initial.u",
    "initial.c",
    "initial.sources",
    "initial.limiter",
    "output.dir",
    "output.snapshots",
];

/// Parsed `section.key = value` pairs, in key order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |m: &str| Error::Config(format!("line {}: {m}", no + 1));
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| at("unterminated section header"))?
                    .trim();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(at("bad section name"));
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| at("expected key = value"))?;
            let k = k.trim();
            if k.is_empty() || section.is_empty() {
                return Err(at("key outside of a section"));
            }
            let key = format!("{section}.{k}");
            check_key(&key).map_err(|_| at(&format!("unknown key '{key}'")))?;
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(at(&format!("duplicate key '{key}'")));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies a `section.key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
        let k = k.trim();
        check_key(k)?;
        self.entries.insert(k.to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn to_experiment(&self) -> Result<ExperimentConfig> {
        let kind = match self.get("experiment.name") {
            Some(n) => ExperimentKind::parse(n)?,
            None => ExperimentKind::Custom,
        };
        let mut cfg = ExperimentConfig::preset(kind);
        for (key, v) in &self.entries {
            apply(&mut cfg, key, v).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("{key}: {m}")),
                other => Error::Config(format!("{key}: {other}")),
            })?;
        }
        let mut p = cfg.params;
        for (key, slot) in [
            ("model.chi", &mut p.chi),
            ("model.alpha", &mut p.alpha),
            ("model.beta", &mut p.beta),
        ] {
            if let Some(v) = self.get(key) {
                *slot = number(v)?;
            }
        }
        cfg.params = match (self.get("model.b"), self.get("model.d")) {
            (Some(_), Some(_)) => return Err(Error::Config("set model.b or model.d, not both".into())),
            (Some(b), None) => KsParams::new(p.chi, number(b)?, p.alpha, p.beta),
            (None, Some(d)) => KsParams::from_diffusivity(p.chi, number(d)?, p.alpha, p.beta),
            (None, None) => KsParams::new(p.chi, p.b, p.alpha, p.beta),
        }
        .map_err(|e| Error::Config(e.to_string()))?;
        if self.get("discretization.beta0").is_some() || self.get("discretization.beta1").is_some() {
            let base = cfg.flux()?;
            let b0 = self.get("discretization.beta0").map_or(Ok(base.beta0), number)?;
            let b1 = self.get("discretization.beta1").map_or(Ok(base.beta1), number)?;
            cfg.flux = Some(FluxParams::new(b0, b1).map_err(|e| Error::Config(e.to_string()))?);
        }
        if let InitialData::Uniform { .. } = cfg.initial {
            let u = self.get("initial.u").map_or(Ok(0.5), number)?;
            let c = self.get("initial.c").map_or(Ok(u / cfg.params.alpha), number)?;
            cfg.initial = InitialData::Uniform { u, c };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn check_key(key: &str) -> Result<()> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(Error::Config(format!("unknown key '{key}'")))
    }
}

fn number(v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::Config(format!("'{v}' is not a number")))
}

fn count(v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| Error::Config(format!("'{v}' is not a non-negative integer")))
}

fn list<T>(v: &str, f: fn(&str) -> Result<T>) -> Result<Vec<T>> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(f).collect()
}

fn flag(v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("'{v}' is not a boolean"))),
    }
}

fn pair(v: &str) -> Result<[f64; 2]> {
    match list(v, number)?.as_slice() {
        [a] => Ok([*a, *a]),
        [a, b] => Ok([*a, *b]),
        _ => Err(Error::Config(format!("'{v}' needs one or two numbers"))),
    }
}

// keys handled after the loop are skipped here
fn apply(cfg: &mut ExperimentConfig, key: &str, v: &str) -> Result<()> {
    match key {
        "mesh.n" => cfg.n = list(v, count)?,
        "mesh.dim" => cfg.dim = count(v)?,
        "mesh.lower" => cfg.lower = pair(v)?,
        "mesh.upper" => cfg.upper = pair(v)?,
        "mesh.boundary" => {
            cfg.boundary = match v {
                "periodic" => BoundaryKind::Periodic,
                "zero_flux" => BoundaryKind::ZeroFlux,
                _ => return Err(Error::Config(format!("unknown boundary '{v}'"))),
            }
        }
        "discretization.degree" => cfg.degree = count(v)?,
        "model.mobility" => {
            cfg.model = match v {
                "saturated" => MobilityModel::Saturated,
                "linear" => MobilityModel::Linear,
                _ => return Err(Error::Config(format!("unknown mobility '{v}'"))),
            }
        }
        "time.t_final" => cfg.t_final = number(v)?,
        "time.dt" => cfg.dt_rule = DtRule::Fixed(number(v)?),
        "time.dt_scale" => cfg.dt_rule = DtRule::ScaledH2(number(v)?),
        "time.newton_tol" => cfg.newton_tol = number(v)?,
        "time.step_cuts" => cfg.step_cuts = count(v)?,
        "initial.profile" => {
            cfg.initial = match v {
                "manufactured" => InitialData::Manufactured,
                "bump" => InitialData::Bump,
                "focus" => InitialData::Focus,
                "uniform" => InitialData::Uniform { u: 0.5, c: 0.5 },
                _ => return Err(Error::Config(format!("unknown initial profile '{v}'"))),
            };
            if cfg.initial != InitialData::Manufactured {
                cfg.sources = false;
            }
        }
        "initial.sources" => cfg.sources = flag(v)?,
        "initial.limiter" => cfg.limiter = flag(v)?,
        "output.dir" => cfg.output_dir = Some(PathBuf::from(v)),
        "output.snapshots" => cfg.snapshot_times = list(v, number)?,
        _ => {}
    }
    Ok(())
}
