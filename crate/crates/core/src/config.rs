//! JSON process definitions and CSV ingestion of tabulated densities.
//!
//! ```json
//! {"family": "uniform", "tau": 1.0}
//! {"family": "delayed_poisson", "tau_r": 1.0, "tau_l": 1.0}
//! {"family": "poisson", "tau_l": 1.0}
//! {"family": "tabulated", "points": [[0.0, 1.0], [1.0, 1.0]]}
//! {"family": "tabulated", "csv": "density.csv", "class": {"class": "eventually_poisson", "tau_l": 2.0}}
//! ```
//!
//! A tabulated CSV has a header row naming the columns `t,phi`. Relative CSV
//! paths are resolved against the directory of the config file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::RenewalProcess;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProcessConfig {
    Uniform(UniformConfig),
    DelayedPoisson(DelayedPoissonConfig),
    Poisson(PoissonConfig),
    Tabulated(TabulatedConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformConfig {
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayedPoissonConfig {
    pub tau_r: f64,
    pub tau_l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonConfig {
    pub tau_l: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub class: ClassDeclaration,
}

/// Causal class a caller may declare for a tabulated density.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassDeclaration {
    #[default]
    NotEventuallyDeltaPoisson,
    /// The density continues past the last sample as `φ(τ) e^{-(t-τ)/tau_l}`.
    EventuallyPoisson { tau_l: f64 },
}

impl ProcessConfig {
    pub fn uniform(tau: f64) -> Self {
        ProcessConfig::Uniform(UniformConfig { tau })
    }

    pub fn delayed_poisson(tau_r: f64, tau_l: f64) -> Self {
        ProcessConfig::DelayedPoisson(DelayedPoissonConfig { tau_r, tau_l })
    }

    pub fn poisson(tau_l: f64) -> Self {
        ProcessConfig::Poisson(PoissonConfig { tau_l })
    }

    /// Parses a config, naming the offending field and its line on error.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
            Error::Validation(format!(
                "process config (line {}, column {}): {e}",
                e.line(),
                e.column()
            ))
        })?;
        let Some(obj) = value.as_object() else {
            return Err(Error::Validation("process config must be a JSON object".into()));
        };
        let family = match obj.get("family") {
            Some(serde_json::Value::String(f)) => f.clone(),
            Some(_) => return Err(field_error(text, "family", "must be a string")),
            None => return Err(Error::Validation("process config is missing `family`".into())),
        };
        let mut params = obj.clone();
        params.remove("family");
        let params = serde_json::Value::Object(params);
        match family.as_str() {
            "uniform" => parse_params(text, params).map(ProcessConfig::Uniform),
            "delayed_poisson" => parse_params(text, params).map(ProcessConfig::DelayedPoisson),
            "poisson" => parse_params(text, params).map(ProcessConfig::Poisson),
            "tabulated" => parse_params(text, params).map(ProcessConfig::Tabulated),
            other => Err(field_error(
                text,
                "family",
                &format!("unknown family `{other}` (expected uniform, delayed_poisson, poisson or tabulated)"),
            )),
        }
    }

    /// Reads a config file; relative CSV paths become relative to its folder.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_json_str(&text)?;
        if let ProcessConfig::Tabulated(TabulatedConfig { csv: Some(csv), .. }) = &mut cfg {
            if csv.is_relative() {
                if let Some(dir) = path.parent() {
                    *csv = dir.join(&*csv);
                }
            }
        }
        Ok(cfg)
    }

    pub fn build(&self) -> Result<RenewalProcess> {
        match self {
            ProcessConfig::Uniform(c) => RenewalProcess::uniform(c.tau),
            ProcessConfig::DelayedPoisson(c) => RenewalProcess::delayed_poisson(c.tau_r, c.tau_l),
            ProcessConfig::Poisson(c) => RenewalProcess::poisson(c.tau_l),
            ProcessConfig::Tabulated(TabulatedConfig { points, csv, class }) => {
                let samples = match (points, csv) {
                    (Some(p), None) => p.clone(),
                    (None, Some(path)) => read_density_csv(path)?,
                    _ => {
                        return Err(Error::Validation(
                            "tabulated process needs exactly one of `points` or `csv`".into(),
                        ))
                    }
                };
                match class {
                    ClassDeclaration::NotEventuallyDeltaPoisson => RenewalProcess::tabulated(&samples),
                    ClassDeclaration::EventuallyPoisson { tau_l } => {
                        RenewalProcess::tabulated_eventually_poisson(&samples, *tau_l)
                    }
                }
            }
        }
    }

    /// Same process with every time parameter multiplied by `alpha`.
    pub fn rescaled(&self, alpha: f64) -> Option<Self> {
        match self {
            ProcessConfig::Uniform(c) => Some(Self::uniform(c.tau * alpha)),
            ProcessConfig::DelayedPoisson(c) => Some(Self::delayed_poisson(c.tau_r * alpha, c.tau_l * alpha)),
            ProcessConfig::Poisson(c) => Some(Self::poisson(c.tau_l * alpha)),
            ProcessConfig::Tabulated(_) => None,
        }
    }
}

/// Line (1-based) of the first occurrence of `"key"` in the source text.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

fn field_error(text: &str, field: &str, message: &str) -> Error {
    match line_of_key(text, field) {
        Some(line) => Error::Validation(format!("process config field `{field}` (line {line}): {message}")),
        None => Error::Validation(format!("process config field `{field}`: {message}")),
    }
}

fn parse_params<T: serde::de::DeserializeOwned>(text: &str, params: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(params).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        // unknown and missing fields are reported at the object level; pull
        // the field name out of the message instead
        let field = if path == "." {
            inner.split('`').nth(1).unwrap_or("").to_string()
        } else {
            path
        };
        let top = field.split(['.', '[']).next().unwrap_or("").to_string();
        if top.is_empty() {
            Error::Validation(format!("process config: {inner}"))
        } else {
            match line_of_key(text, &top) {
                Some(line) => Error::Validation(format!("process config field `{field}` (line {line}): {inner}")),
                None => Error::Validation(format!("process config field `{field}`: {inner}")),
            }
        }
    })
}

#[derive(Debug, Deserialize)]
struct DensityRow {
    t: f64,
    phi: f64,
}

/// Reads `t,phi` rows (header required).
pub fn read_density_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let file = fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_density_csv(file)
}

pub fn parse_density_csv<R: std::io::Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if !headers.iter().any(|h| h == "t") || !headers.iter().any(|h| h == "phi") {
        return Err(Error::Validation(format!(
            "density CSV header must name columns `t` and `phi`, found {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    rdr.deserialize::<DensityRow>()
        .map(|row| row.map(|r| (r.t, r.phi)).map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::CausalClass;

    #[test]
    fn parses_builtins() {
        let p = ProcessConfig::from_json_str(r#"{"family":"uniform","tau":2.0}"#).unwrap();
        assert_eq!(p, ProcessConfig::uniform(2.0));
        let roundtrip = serde_json::to_string(&p).unwrap();
        assert_eq!(roundtrip, r#"{"family":"uniform","tau":2.0}"#);
        let d = ProcessConfig::from_json_str(r#"{"family":"delayed_poisson","tau_r":1,"tau_l":0.5}"#)
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(d.causal_class(), CausalClass::EventuallyPoisson { tau: 1.0, tau_l: 0.5 });
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = ProcessConfig::from_json_str("{\"family\":\"uniform\",\n \"tau\":\"x\"}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("tau"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
        let err = ProcessConfig::from_json_str(r#"{"family":"uniform","tua":1}"#).unwrap_err();
        assert!(err.to_string().contains("tua"));
        let err = ProcessConfig::from_json_str(r#"{"family":"gamma"}"#).unwrap_err();
        assert!(err.to_string().contains("gamma"));
        let err = ProcessConfig::from_json_str("{\"family\":").unwrap_err();
        assert!(err.to_string().contains("line 1"));
        let err = ProcessConfig::from_json_str(r#"{"family":"uniform","tau":-1}"#).unwrap().build();
        assert!(matches!(err, Err(Error::InvalidParameter { name: "tau", .. })));
    }

    #[test]
    fn tabulated_from_points_and_csv() {
        let cfg = ProcessConfig::from_json_str(
            r#"{"family":"tabulated","points":[[0,1],[1,1]],"class":{"class":"eventually_poisson","tau_l":1}}"#,
        )
        .unwrap();
        let p = cfg.build().unwrap();
        assert_eq!(p.causal_class(), CausalClass::EventuallyPoisson { tau: 1.0, tau_l: 1.0 });

        let rows = parse_density_csv("t,phi\n0,2\n0.5,2\n1.0,2\n".as_bytes()).unwrap();
        assert_eq!(rows, vec![(0.0, 2.0), (0.5, 2.0), (1.0, 2.0)]);
        assert!(parse_density_csv("a,b\n0,1\n".as_bytes()).is_err());
        assert!(parse_density_csv("t,phi\n0,x\n".as_bytes()).is_err());
    }

    #[test]
    fn csv_path_relative_to_config() {
        let dir = std::env::temp_dir().join(format!("qrenew-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("d.csv"), "t,phi\n0,1\n1,1\n").unwrap();
        fs::write(dir.join("p.json"), r#"{"family":"tabulated","csv":"d.csv"}"#).unwrap();
        let p = ProcessConfig::from_path(&dir.join("p.json")).unwrap().build().unwrap();
        assert!((p.firing_rate() - 2.0).abs() < 1e-12);
        fs::remove_dir_all(&dir).ok();
    }
}
