//! Flat `section.key = value` experiment configs.
//!
//! Parsing reports every problem at once: syntax errors carry line numbers,
//! range and type violations carry the offending key, and unknown keys are
//! rejected rather than ignored. Every key has a default except
//! `experiment.kind`, which normally comes from the chosen subcommand.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use josephson::experiments::Engine;
use josephson::junction::{Boundary, JunctionSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Dc,
    Ac,
    Energy,
    Odlro,
    Validate,
    Oracle,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Dc => "dc",
            Kind::Ac => "ac",
            Kind::Energy => "energy",
            Kind::Odlro => "odlro",
            Kind::Validate => "validate",
            Kind::Oracle => "oracle",
        }
    }

    fn parse(value: &str) -> Result<Self, String> {
        match value {
            "dc" => Ok(Kind::Dc),
            "ac" => Ok(Kind::Ac),
            "energy" => Ok(Kind::Energy),
            "odlro" => Ok(Kind::Odlro),
            "validate" => Ok(Kind::Validate),
            "oracle" => Ok(Kind::Oracle),
            other => Err(format!(
                "unknown kind `{}` (expected dc|ac|energy|odlro|validate|oracle)",
                other
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Both => "both",
        }
    }

    pub fn wants_csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentCfg {
    pub kind: Option<Kind>,
    /// Number of equally spaced phase points on `[0, 2 pi)`.
    pub grid: usize,
    pub engine: Engine,
    pub voltage: f64,
    pub theta0: f64,
    /// Drive duration; defaults to 8 expected periods when absent.
    pub t_final: Option<f64>,
    pub n_samples: usize,
    /// Integrator tolerance for `ac`.
    pub tol: f64,
    /// Largest pair separation of the `odlro` scan; defaults to half the
    /// region.
    pub max_separation: Option<usize>,
    /// When set, the `odlro` region coupling is solved so the gap equals
    /// this value instead of using `model.g11` directly.
    pub target_gap: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct OutputCfg {
    pub directory: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct Config {
    pub model: JunctionSpec,
    pub experiment: ExperimentCfg,
    pub output: OutputCfg,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            model: JunctionSpec::two_site(0.1),
            experiment: ExperimentCfg {
                kind: None,
                grid: 17,
                engine: Engine::Exact,
                voltage: 0.25,
                theta0: 0.0,
                t_final: None,
                n_samples: 1024,
                tol: 1e-6,
                max_separation: None,
                target_gap: None,
            },
            output: OutputCfg {
                directory: None,
                format: Format::Both,
                seed: 0,
            },
        }
    }
}

impl Config {
    /// Flat echo of the resolved configuration, for summary.json.
    pub fn echo(&self, kind: Kind) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        let m = &self.model;
        map.insert("model.L1".into(), m.l1.to_string());
        map.insert("model.L2".into(), m.l2.to_string());
        map.insert("model.t_hop".into(), m.t_hop.to_string());
        map.insert("model.mu".into(), m.mu.to_string());
        map.insert("model.g11".into(), m.g11.to_string());
        map.insert("model.g22".into(), m.g22.to_string());
        map.insert("model.g12".into(), m.g12.to_string());
        map.insert("model.charge_unit".into(), m.charge_unit.to_string());
        map.insert(
            "model.boundary".into(),
            match m.boundary {
                Boundary::Open => "open".into(),
                Boundary::Periodic => "periodic".into(),
            },
        );
        map.insert("model.cross_hop".into(), m.cross_hop.to_string());
        let e = &self.experiment;
        map.insert("experiment.kind".into(), kind.name().into());
        map.insert("experiment.grid".into(), e.grid.to_string());
        map.insert("experiment.engine".into(), e.engine.name().into());
        map.insert("experiment.V".into(), e.voltage.to_string());
        map.insert("experiment.theta0".into(), e.theta0.to_string());
        if let Some(t) = e.t_final {
            map.insert("experiment.T".into(), t.to_string());
        }
        map.insert("experiment.n_samples".into(), e.n_samples.to_string());
        map.insert("experiment.dt_tol".into(), e.tol.to_string());
        if let Some(d) = e.max_separation {
            map.insert("experiment.max_separation".into(), d.to_string());
        }
        if let Some(g) = e.target_gap {
            map.insert("experiment.target_gap".into(), g.to_string());
        }
        map.insert("output.format".into(), self.output.format.name().into());
        map.insert("output.seed".into(), self.output.seed.to_string());
        map
    }
}

#[derive(Clone, Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {}: {}: {}", l, k, self.message),
            (Some(l), None) => write!(f, "line {}: {}", l, self.message),
            (None, Some(k)) => write!(f, "{}: {}", k, self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

fn parse_f64(value: &str) -> Result<f64, String> {
    let x: f64 = value
        .parse()
        .map_err(|_| format!("expected a number, got `{}`", value))?;
    if !x.is_finite() {
        return Err(format!("expected a finite number, got `{}`", value));
    }
    Ok(x)
}

fn parse_f64_min(value: &str, min: f64, inclusive: bool) -> Result<f64, String> {
    let x = parse_f64(value)?;
    let ok = if inclusive { x >= min } else { x > min };
    if !ok {
        return Err(format!(
            "value {} out of range (must be {} {})",
            x,
            if inclusive { ">=" } else { ">" },
            min
        ));
    }
    Ok(x)
}

fn parse_usize_min(value: &str, min: usize) -> Result<usize, String> {
    let x: usize = value
        .parse()
        .map_err(|_| format!("expected a nonnegative integer, got `{}`", value))?;
    if x < min {
        return Err(format!("value {} out of range (must be >= {})", x, min));
    }
    Ok(x)
}

fn apply(cfg: &mut Config, key: &str, value: &str) -> Result<(), String> {
    match key {
        "model.L1" => cfg.model.l1 = parse_usize_min(value, 1)?,
        "model.L2" => cfg.model.l2 = parse_usize_min(value, 1)?,
        "model.t_hop" => cfg.model.t_hop = parse_f64(value)?,
        "model.mu" => cfg.model.mu = parse_f64(value)?,
        "model.g11" => cfg.model.g11 = parse_f64_min(value, 0.0, true)?,
        "model.g22" => cfg.model.g22 = parse_f64_min(value, 0.0, true)?,
        "model.g12" => cfg.model.g12 = parse_f64(value)?,
        "model.charge_unit" => cfg.model.charge_unit = parse_f64_min(value, 0.0, false)?,
        "model.boundary" => {
            cfg.model.boundary = match value {
                "open" => Boundary::Open,
                "periodic" => Boundary::Periodic,
                other => {
                    return Err(format!(
                        "unknown boundary `{}` (expected open|periodic)",
                        other
                    ))
                }
            }
        }
        "model.cross_hop" => cfg.model.cross_hop = parse_f64(value)?,
        "experiment.kind" => cfg.experiment.kind = Some(Kind::parse(value)?),
        "experiment.grid" => cfg.experiment.grid = parse_usize_min(value, 3)?,
        "experiment.engine" => {
            cfg.experiment.engine = match value {
                "exact" => Engine::Exact,
                "meanfield" => Engine::MeanField,
                other => {
                    return Err(format!(
                        "unknown engine `{}` (expected exact|meanfield)",
                        other
                    ))
                }
            }
        }
        "experiment.V" => cfg.experiment.voltage = parse_f64(value)?,
        "experiment.theta0" => cfg.experiment.theta0 = parse_f64(value)?,
        "experiment.T" => cfg.experiment.t_final = Some(parse_f64_min(value, 0.0, false)?),
        "experiment.n_samples" => cfg.experiment.n_samples = parse_usize_min(value, 16)?,
        "experiment.dt_tol" => cfg.experiment.tol = parse_f64_min(value, 0.0, false)?,
        "experiment.max_separation" => {
            cfg.experiment.max_separation = Some(parse_usize_min(value, 1)?)
        }
        "experiment.target_gap" => {
            cfg.experiment.target_gap = Some(parse_f64_min(value, 0.0, false)?)
        }
        "output.directory" => cfg.output.directory = Some(PathBuf::from(value)),
        "output.format" => {
            cfg.output.format = match value {
                "csv" => Format::Csv,
                "json" => Format::Json,
                "both" => Format::Both,
                other => {
                    return Err(format!(
                        "unknown format `{}` (expected csv|json|both)",
                        other
                    ))
                }
            }
        }
        "output.seed" => {
            cfg.output.seed = value
                .parse()
                .map_err(|_| format!("expected an unsigned integer, got `{}`", value))?
        }
        _ => return Err("unknown key".into()),
    }
    Ok(())
}

/// Parse a config file, reporting every error rather than the first.
pub fn parse_config(text: &str) -> Result<Config, Vec<ConfigError>> {
    let mut cfg = Config::default();
    let mut errors = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            errors.push(ConfigError {
                line: Some(line_no),
                key: None,
                message: format!("expected `section.key = value`, got `{}`", line),
            });
            continue;
        };
        let key = k.trim();
        let value = v.trim();
        if key.is_empty() || value.is_empty() {
            errors.push(ConfigError {
                line: Some(line_no),
                key: None,
                message: "empty key or value".into(),
            });
            continue;
        }
        if let Some(first) = seen.get(key) {
            errors.push(ConfigError {
                line: Some(line_no),
                key: Some(key.into()),
                message: format!("duplicate key (first set on line {})", first),
            });
            continue;
        }
        seen.insert(key.into(), line_no);
        if let Err(message) = apply(&mut cfg, key, value) {
            errors.push(ConfigError {
                line: Some(line_no),
                key: Some(key.into()),
                message,
            });
        }
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(errors)
    }
}
