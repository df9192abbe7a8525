//! Run configuration: defaults, config files and command-line overrides.
//!
//! Config files are TOML. A previous JSON output file (its `config` field) or
//! CSV output file (its `# config:` header line) is accepted as well, so any
//! run can be replayed from its own output.

use std::path::Path;

use charpoly_core::ensembles::EntryLaw;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("field `{field}`: {message}")]
    Field { field: &'static str, message: String },
}

fn field(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field,
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LawConfig {
    pub name: String,
    pub mu4: Option<f64>,
    pub p: Option<f64>,
}

impl Default for LawConfig {
    fn default() -> Self {
        Self {
            name: "gaussian".into(),
            mu4: None,
            p: None,
        }
    }
}

impl LawConfig {
    pub fn build(&self) -> Result<EntryLaw, ConfigError> {
        EntryLaw::make(&self.name, self.mu4, self.p).map_err(|e| field("law", e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContourConfig {
    pub a: f64,
    pub big_a: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self { a: 0.05, big_a: 6.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Matrix sizes; commands iterate over them.
    pub n: Vec<usize>,
    pub m: usize,
    pub lambda0: f64,
    /// `2m` local spectral offsets; empty means all zeros.
    pub xi: Vec<f64>,
    pub law: LawConfig,
    pub samples: u64,
    pub seed: u64,
    /// Independent RNG streams; part of the result identity, unlike the
    /// worker count.
    pub streams: usize,
    pub allow_large_n: bool,
    pub tol: f64,
    /// `converge` backend: `contour`, `mc`, `exact` or `config-sum`.
    pub backend: String,
    pub contour: ContourConfig,
    /// `(A, B)` pairs per size for the HCIZ checks.
    pub trials: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: vec![4],
            m: 1,
            lambda0: 0.0,
            xi: Vec::new(),
            law: LawConfig::default(),
            samples: 100_000,
            seed: 0,
            streams: 16,
            allow_large_n: false,
            tol: 1e-6,
            backend: "contour".into(),
            contour: ContourConfig::default(),
            trials: 20,
        }
    }
}

/// Command-line values that override the config file when present.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n: Option<Vec<usize>>,
    pub m: Option<usize>,
    pub lambda0: Option<f64>,
    pub xi: Option<Vec<f64>>,
    pub law: Option<String>,
    pub mu4: Option<f64>,
    pub p: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub streams: Option<usize>,
    pub allow_large_n: bool,
    pub tol: Option<f64>,
    pub backend: Option<String>,
    pub trials: Option<usize>,
}

fn parse_error(path: &Path, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Loads a TOML config, or the embedded config of a JSON or CSV output file.
pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    if let Some(line) = text.lines().find_map(|l| l.strip_prefix("# config: ")) {
        return serde_json::from_str(line).map_err(|e| parse_error(path, e.to_string()));
    }
    if text.trim_start().starts_with('{') {
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| parse_error(path, e.to_string()))?;
        let config = value
            .get("config")
            .ok_or_else(|| parse_error(path, "JSON file has no `config` field"))?;
        return serde_json::from_value(config.clone()).map_err(|e| parse_error(path, e.to_string()));
    }
    toml::from_str(&text).map_err(|e| parse_error(path, e.to_string()))
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.n {
            self.n = v.clone();
        }
        if let Some(v) = o.m {
            self.m = v;
        }
        if let Some(v) = o.lambda0 {
            self.lambda0 = v;
        }
        if let Some(v) = &o.xi {
            self.xi = v.clone();
        }
        if let Some(v) = &o.law {
            if *v != self.law.name {
                self.law = LawConfig {
                    name: v.clone(),
                    ..LawConfig::default()
                };
            }
        }
        if let Some(v) = o.mu4 {
            self.law.mu4 = Some(v);
        }
        if let Some(v) = o.p {
            self.law.p = Some(v);
        }
        if let Some(v) = o.samples {
            self.samples = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.streams {
            self.streams = v;
        }
        if o.allow_large_n {
            self.allow_large_n = true;
        }
        if let Some(v) = o.tol {
            self.tol = v;
        }
        if let Some(v) = &o.backend {
            self.backend = v.clone();
        }
        if let Some(v) = o.trials {
            self.trials = v;
        }
    }

    /// Fills defaults that depend on other fields and checks the result.
    pub fn resolve(mut self) -> Result<Self, ConfigError> {
        if self.m == 0 {
            return Err(field("m", "must be positive"));
        }
        if self.xi.is_empty() {
            self.xi = vec![0.0; 2 * self.m];
        }
        if self.xi.len() != 2 * self.m {
            return Err(field(
                "xi",
                format!("has {} entries, expected 2m = {}", self.xi.len(), 2 * self.m),
            ));
        }
        if self.xi.iter().any(|x| !x.is_finite()) {
            return Err(field("xi", "entries must be finite"));
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(field("n", "needs at least one positive size"));
        }
        if !(self.lambda0.abs() < 2.0) {
            return Err(field("lambda0", format!("{} is outside (-2, 2)", self.lambda0)));
        }
        if self.samples < 2 {
            return Err(field("samples", "needs at least 2"));
        }
        if self.streams == 0 {
            return Err(field("streams", "must be positive"));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(field("tol", "must lie in (0, 1)"));
        }
        if !matches!(self.backend.as_str(), "contour" | "mc" | "exact" | "config-sum") {
            return Err(field(
                "backend",
                format!("unknown backend `{}` (contour, mc, exact, config-sum)", self.backend),
            ));
        }
        if !(self.contour.a > 0.0 && self.contour.a < self.contour.big_a) {
            return Err(field("contour", "needs 0 < a < big_a"));
        }
        if self.trials == 0 {
            return Err(field("trials", "must be positive"));
        }
        self.law.build()?;
        Ok(self)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Parses a sample count written as an integer or in float notation (`1e6`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if f >= 0.0 && f.fract() == 0.0 && f < 1.8e19 {
        Ok(f as u64)
    } else {
        Err(format!("`{s}` is not a non-negative integer"))
    }
}

pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| format!("cannot parse `{}` in `{s}`", p.trim()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_float_notation() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("250"), Ok(250));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<f64>("0.25, -0.25"), Ok(vec![0.25, -0.25]));
        assert!(parse_list::<usize>("1,x").is_err());
    }

    #[test]
    fn resolve_fills_xi_and_rejects_bad_fields() {
        let c = RunConfig {
            m: 2,
            ..RunConfig::default()
        }
        .resolve()
        .unwrap();
        assert_eq!(c.xi, vec![0.0; 4]);
        let bad = RunConfig {
            xi: vec![0.1],
            ..RunConfig::default()
        };
        assert!(matches!(bad.resolve(), Err(ConfigError::Field { field: "xi", .. })));
        let bad = RunConfig {
            lambda0: 2.0,
            ..RunConfig::default()
        };
        assert!(bad.resolve().is_err());
    }

    #[test]
    fn toml_sections_and_unknown_fields() {
        let c: RunConfig = toml::from_str(
            "n = [2, 3]\nxi = [0.1, 0.2]\n[law]\nname = \"mixture\"\nmu4 = 0.9\n",
        )
        .unwrap();
        assert_eq!(c.n, vec![2, 3]);
        assert_eq!(c.law.mu4, Some(0.9));
        let err = toml::from_str::<RunConfig>("n = [2]\nsmaples = 3\n").unwrap_err();
        assert!(err.to_string().contains("smaples"));
    }

    #[test]
    fn flags_override_file() {
        let mut c = RunConfig::default();
        c.law.mu4 = Some(1.0);
        c.apply(&Overrides {
            seed: Some(9),
            law: Some("rademacher".into()),
            ..Overrides::default()
        });
        assert_eq!(c.seed, 9);
        assert_eq!(c.law, LawConfig { name: "rademacher".into(), mu4: None, p: None });
    }
}
