//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use ergoseq::dynsim::{Angle, Observable, SystemSpec};
use ergoseq::ledger::{ConstantTable, Profile};
use ergoseq::rational::parse_text;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{key}: {msg}")]
    Value { key: String, msg: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("{0}")]
    Missing(String),
}

/// Parse `key = value` lines. `#` starts a comment, blank lines are skipped,
/// whitespace around keys and values is trimmed, and a repeated key is an
/// error.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |msg: &str| ConfigError::Syntax { line: i + 1, msg: msg.into() };
        let (k, v) = line.split_once('=').ok_or_else(|| syntax("expected key = value"))?;
        let k = k.trim();
        if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-') {
            return Err(syntax("bad key"));
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(syntax(&format!("duplicate key {k:?}")));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub system: SystemSpec,
    pub observable: Observable,
    /// Orbit length; the store horizon when unset.
    pub length: Option<u64>,
    pub per_decade: u32,
    pub x0: Option<u128>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub profile: Profile,
    pub horizon: u32,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub ledger: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub trials: Option<u64>,
    pub experiment: Experiment,
}

const KEYS: &[&str] = &[
    "profile",
    "horizon",
    "seed",
    "out",
    "format",
    "ledger",
    "input",
    "trials",
    "system",
    "alpha",
    "period",
    "bernoulli_p",
    "f",
    "f_lo",
    "f_hi",
    "f_value",
    "length",
    "per_decade",
    "x0",
];

fn value<T>(key: &str, r: Result<T, String>) -> Result<T, ConfigError> {
    r.map_err(|msg| ConfigError::Value { key: key.into(), msg })
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value(key, v.parse::<T>().map_err(|e| e.to_string()))
}

impl RunConfig {
    /// Build from merged pairs; `const.<name>` keys override profile constants.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        for k in pairs.keys() {
            if !KEYS.contains(&k.as_str()) && !k.starts_with("const.") {
                return Err(ConfigError::UnknownKey(k.clone()));
            }
        }
        let get = |k: &str| pairs.get(k).map(String::as_str);
        let mut table: ConstantTable = match get("profile").unwrap_or("demo") {
            "faithful" => Profile::Faithful.constants(),
            "demo" => Profile::demo().constants(),
            other => {
                return Err(ConfigError::Value {
                    key: "profile".into(),
                    msg: format!("expected faithful or demo, got {other:?}"),
                })
            }
        };
        let faithful = get("profile") == Some("faithful");
        let mut overridden = false;
        for (k, v) in pairs {
            if let Some(name) = k.strip_prefix("const.") {
                value(k, table.set(name, v))?;
                overridden = true;
            }
        }
        let profile = if faithful && !overridden { Profile::Faithful } else { Profile::Demo(table) };
        let horizon: u32 = match get("horizon") {
            Some(v) => num("horizon", v)?,
            None => 4,
        };
        if horizon < 1 {
            return Err(ConfigError::Value {
                key: "horizon".into(),
                msg: "must be at least 1".into(),
            });
        }
        let format = match get("format").unwrap_or("json") {
            "json" => Format::Json,
            "csv" => Format::Csv,
            other => {
                return Err(ConfigError::Value {
                    key: "format".into(),
                    msg: format!("expected csv or json, got {other:?}"),
                })
            }
        };
        let seed = get("seed").map(|v| num::<u64>("seed", v)).transpose()?;
        let rat = |k: &str, default: &str| value(k, parse_text(get(k).unwrap_or(default)));
        let system = match get("system").unwrap_or("rotation") {
            "rotation" => {
                let alpha = match get("alpha").unwrap_or("golden") {
                    "golden" => Angle::Golden,
                    a => match a.strip_prefix("sqrt:") {
                        Some(n) => Angle::SqrtFrac(num("alpha", n)?),
                        None => Angle::Rational(value("alpha", parse_text(a))?),
                    },
                };
                SystemSpec::Rotation { alpha }
            }
            "cyclic" => SystemSpec::Cyclic {
                period: num("period", get("period").ok_or_else(|| ConfigError::Missing("cyclic systems need period".into()))?)?,
            },
            "iid" => SystemSpec::IidBernoulli {
                seed: seed.ok_or_else(|| ConfigError::Missing("i.i.d. systems need a seed".into()))?,
                p: rat("bernoulli_p", "1/2")?,
            },
            other => {
                return Err(ConfigError::Value {
                    key: "system".into(),
                    msg: format!("expected rotation, cyclic or iid, got {other:?}"),
                })
            }
        };
        let observable = match get("f").unwrap_or("indicator") {
            "indicator" => Observable::Indicator {
                lo: rat("f_lo", "0")?,
                hi: rat("f_hi", "1/2")?,
            },
            "constant" => Observable::Constant(rat("f_value", "1")?),
            "symbol" => Observable::Symbol,
            other => {
                return Err(ConfigError::Value {
                    key: "f".into(),
                    msg: format!("expected indicator, constant or symbol, got {other:?}"),
                })
            }
        };
        let x0 = match get("x0") {
            None => None,
            Some("random") => None,
            Some(v) => Some(num::<u128>("x0", v)?),
        };
        if get("x0") == Some("random") && seed.is_none() {
            return Err(ConfigError::Missing("x0 = random needs a seed".into()));
        }
        let path = |k: &str| get(k).map(PathBuf::from);
        Ok(Self {
            profile,
            horizon,
            seed,
            out: path("out"),
            format,
            ledger: path("ledger"),
            input: path("input"),
            trials: get("trials").map(|v| num("trials", v)).transpose()?,
            experiment: Experiment {
                system,
                observable,
                length: get("length").map(|v| num("length", v)).transpose()?,
                per_decade: match get("per_decade") {
                    Some(v) => num("per_decade", v)?,
                    None => 4,
                },
                x0,
            },
        })
    }

    pub fn is_faithful(&self) -> bool {
        matches!(self.profile, Profile::Faithful)
    }
}

/// A rotation start phase `x0 / 2^128` from a seed, or 0.
pub fn start_phase(seed: Option<u64>, explicit: Option<u128>) -> u128 {
    use rand::Rng;
    match (explicit, seed) {
        (Some(x), _) => x,
        (None, Some(s)) => ergoseq::rng::seeded(s).gen(),
        (None, None) => 0,
    }
}
