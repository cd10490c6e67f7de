//! `AnalysisConfig`: the JSON input of every `agler-lab` command.

use std::fmt;
use std::str::FromStr;

use agler_core::colligation::ColligationSpec;
use agler_core::gallery::{generate, SequenceSpec};
use agler_core::test_functions::FamilySpec;
use agler_core::{PointConfig, TestFunctionFamily, C64};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Analyze,
    Pick,
    Grammian,
    Carleson,
    Realize,
    VerifyTheorem,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Analyze,
        Command::Pick,
        Command::Grammian,
        Command::Carleson,
        Command::Realize,
        Command::VerifyTheorem,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Pick => "pick",
            Command::Grammian => "grammian",
            Command::Carleson => "carleson",
            Command::Realize => "realize",
            Command::VerifyTheorem => "verify-theorem",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command '{s}'"))
    }
}

/// A complex number written either as a bare real or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    pub fn value(self) -> C64 {
        match self {
            Scalar::Real(x) => C64::new(x, 0.0),
            Scalar::Complex([re, im]) => C64::new(re, im),
        }
    }
}

/// A point: one scalar on the disc, or a coordinate list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Coords(Vec<Scalar>),
    Single(Scalar),
}

impl PointSpec {
    fn coords(&self) -> Vec<C64> {
        match self {
            PointSpec::Coords(c) => c.iter().map(|s| s.value()).collect(),
            PointSpec::Single(s) => vec![s.value()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "Tolerances::default_min_norm")]
    pub min_norm: f64,
    #[serde(default = "Tolerances::default_certificate")]
    pub certificate: f64,
    #[serde(default = "Tolerances::default_witness")]
    pub witness: f64,
    #[serde(default = "Tolerances::default_membership")]
    pub membership: f64,
}

impl Tolerances {
    fn default_min_norm() -> f64 {
        1e-7
    }
    fn default_certificate() -> f64 {
        1e-8
    }
    fn default_witness() -> f64 {
        1e-10
    }
    fn default_membership() -> f64 {
        1e-8
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            min_norm: Self::default_min_norm(),
            certificate: Self::default_certificate(),
            witness: Self::default_witness(),
            membership: Self::default_membership(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for `<command>.json` and `<command>.csv`.
    #[serde(default)]
    pub dir: Option<String>,
    /// Whether to write the CSV table (when the command has one).
    #[serde(default = "yes")]
    pub csv: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: None,
            csv: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub family: Option<FamilySpec>,
    #[serde(default)]
    pub points: Option<Vec<PointSpec>>,
    #[serde(default)]
    pub sequence: Option<SequenceSpec>,
    #[serde(default)]
    pub targets: Option<Vec<Scalar>>,
    #[serde(rename = "C", default)]
    pub c: Option<f64>,
    #[serde(rename = "C_max", default)]
    pub c_max: Option<f64>,
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub n_samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub grid_size: Option<usize>,
    #[serde(default)]
    pub colligation: Option<ColligationSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),

    /// `pointer` is a JSON pointer to the offending field.
    #[error("{pointer}: {message}")]
    Field { pointer: String, message: String },
}

pub(crate) fn field(pointer: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        pointer: pointer.into(),
        message: message.into(),
    }
}

pub const DEFAULT_SAMPLES: usize = 16;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_C_MAX: f64 = 1e3;

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub command: Option<Command>,
    pub out: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub grid: Option<usize>,
}

/// A validated config with the points and family materialized.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub command: Command,
    pub family: TestFunctionFamily,
    pub points: PointConfig,
    pub targets: Option<Vec<C64>>,
    pub config: AnalysisConfig,
    pub n_samples: usize,
    pub seed: u64,
}

impl AnalysisConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Self, ConfigError> {
        match (self.command, o.command) {
            (Some(a), Some(b)) if a != b => {
                return Err(field(
                    "/command",
                    format!("config says '{a}' but the command line says '{b}'"),
                ));
            }
            (None, b) => self.command = b,
            _ => {}
        }
        if let Some(s) = o.seed {
            self.seed = Some(s);
        }
        if let Some(n) = o.samples {
            self.n_samples = Some(n);
        }
        if let Some(g) = o.grid {
            self.grid_size = Some(g);
        }
        if let Some(d) = &o.out {
            self.output.dir = Some(d.clone());
        }
        Ok(self)
    }

    fn family(&self) -> Result<TestFunctionFamily, ConfigError> {
        let mut spec = match (&self.family, &self.colligation) {
            (Some(f), _) => f.clone(),
            (None, Some(c)) => c.family.clone(),
            (None, None) => FamilySpec {
                domain: "disc".into(),
                n: None,
                grid_size: None,
            },
        };
        if let Some(g) = self.grid_size {
            if spec.domain != "g2" {
                return Err(field("/grid_size", "only the g2 family has a grid"));
            }
            spec.grid_size = Some(g);
        }
        TestFunctionFamily::from_spec(&spec).map_err(|e| field("/family", e.to_string()))
    }

    fn points(&self, family: &TestFunctionFamily) -> Result<PointConfig, ConfigError> {
        let pts = match (&self.points, &self.sequence) {
            (Some(_), Some(_)) => {
                return Err(field(
                    "/sequence",
                    "give either points or sequence, not both",
                ))
            }
            (None, None) => return Err(field("/points", "required (or give a sequence)")),
            (None, Some(seq)) => generate(seq).map_err(|e| field("/sequence", e.to_string()))?,
            (Some(ps), None) => {
                if ps.is_empty() {
                    return Err(field("/points", "must not be empty"));
                }
                let domain = family.domain();
                PointConfig::from_coords(domain, ps.iter().map(PointSpec::coords).collect())
                    .map_err(|e| field("/points", e.to_string()))?
            }
        };
        if pts.domain() != family.domain() {
            return Err(field(
                "/family",
                format!(
                    "points live on {} but the family is for {}",
                    pts.domain(),
                    family.domain()
                ),
            ));
        }
        Ok(pts)
    }

    /// Checks the command-specific fields and builds points and family.
    pub fn prepare(self) -> Result<Prepared, ConfigError> {
        let command = self.command.ok_or_else(|| {
            field(
                "/command",
                "missing (set it in the file or on the command line)",
            )
        })?;
        let tol = &self.tolerances;
        for (name, v) in [
            ("min_norm", tol.min_norm),
            ("certificate", tol.certificate),
            ("witness", tol.witness),
            ("membership", tol.membership),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(field(&format!("/tolerances/{name}"), "must be positive"));
            }
        }
        if let Some(c) = self.c {
            if !(c > 0.0 && c.is_finite()) {
                return Err(field("/C", "must be positive"));
            }
        }
        if let Some(c) = self.c_max {
            if !(c >= 1.0 && c.is_finite()) {
                return Err(field("/C_max", "must be at least 1"));
            }
        }
        let n_samples = self.n_samples.unwrap_or(DEFAULT_SAMPLES);
        if n_samples == 0 {
            return Err(field("/n_samples", "must be at least 1"));
        }
        match command {
            Command::Pick if self.targets.is_none() => {
                return Err(field("/targets", "required for pick"))
            }
            Command::Grammian | Command::Carleson | Command::Analyze | Command::VerifyTheorem
                if self.targets.is_some() =>
            {
                return Err(field("/targets", format!("not allowed for {command}")));
            }
            Command::Realize if self.colligation.is_none() => {
                return Err(field("/colligation", "required for realize"))
            }
            _ => {}
        }
        if command != Command::Realize && self.colligation.is_some() {
            return Err(field("/colligation", format!("not allowed for {command}")));
        }
        let family = self.family()?;
        let points = self.points(&family)?;
        let targets = match &self.targets {
            Some(t) if t.len() != points.len() => {
                return Err(field(
                    "/targets",
                    format!("{} targets for {} points", t.len(), points.len()),
                ));
            }
            Some(t) => Some(t.iter().map(|s| s.value()).collect::<Vec<_>>()),
            None => None,
        };
        if let Some(t) = &targets {
            if t.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
                return Err(field("/targets", "must be finite"));
            }
        }
        if let Some(d) = self.depth {
            if d == 0 || d > points.len() {
                return Err(field("/depth", format!("must lie in 1..={}", points.len())));
            }
        }
        Ok(Prepared {
            command,
            family,
            points,
            targets,
            n_samples,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            config: self,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> Result<Prepared, ConfigError> {
        AnalysisConfig::from_json(json)?.prepare()
    }

    fn pointer(e: ConfigError) -> String {
        match e {
            ConfigError::Field { pointer, .. } => pointer,
            other => panic!("{other}"),
        }
    }

    #[test]
    fn scalars_and_points() {
        let p = cfg(
            r#"{"command": "pick", "points": [0, [[0.5, 0.1]]], "targets": [0, [0.6, 0]], "C": 1}"#,
        )
        .unwrap();
        assert_eq!(p.points.points()[1].coords()[0], C64::new(0.5, 0.1));
        assert_eq!(p.targets.unwrap()[1], C64::new(0.6, 0.0));
        let p = cfg(r#"{"command": "grammian", "family": {"domain": "polydisc", "n": 2}, "points": [[0.1, [0, 0.2]]]}"#).unwrap();
        assert_eq!(p.points.points()[0].coords()[1], C64::new(0.0, 0.2));
    }

    #[test]
    fn command_specific_fields() {
        assert_eq!(
            pointer(cfg(r#"{"command": "pick", "points": [0, 0.5]}"#).unwrap_err()),
            "/targets"
        );
        assert_eq!(
            pointer(
                cfg(r#"{"command": "grammian", "points": [0, 0.5], "targets": [0, 1]}"#)
                    .unwrap_err()
            ),
            "/targets"
        );
        assert_eq!(
            pointer(cfg(r#"{"command": "realize", "points": [0]}"#).unwrap_err()),
            "/colligation"
        );
        assert_eq!(pointer(cfg(r#"{"points": [0]}"#).unwrap_err()), "/command");
        assert_eq!(
            pointer(cfg(r#"{"command": "pick", "points": [0, 0.5], "targets": [0]}"#).unwrap_err()),
            "/targets"
        );
        assert_eq!(
            pointer(cfg(r#"{"command": "grammian", "points": [0, 1.5]}"#).unwrap_err()),
            "/points"
        );
        assert_eq!(
            pointer(cfg(r#"{"command": "grammian", "points": [0], "grid_size": 8}"#).unwrap_err()),
            "/grid_size"
        );
        assert_eq!(
            pointer(cfg(r#"{"command": "grammian", "points": [0], "n_samples": 0}"#).unwrap_err()),
            "/n_samples"
        );
        assert_eq!(
            pointer(cfg(r#"{"command": "grammian", "sequence": {"family": {"kind": "exponential_radial", "base": 2.0}, "depth": 3}}"#).unwrap_err()),
            "/sequence"
        );
    }

    #[test]
    fn malformed_and_unknown_fields() {
        assert!(matches!(cfg("{"), Err(ConfigError::Json(_))));
        assert!(matches!(
            cfg(r#"{"command": "pick", "bogus": 1}"#),
            Err(ConfigError::Json(_))
        ));
        assert!(matches!(
            cfg(r#"{"command": "frobnicate"}"#),
            Err(ConfigError::Json(_))
        ));
    }

    #[test]
    fn overrides() {
        let c = AnalysisConfig::from_json(r#"{"command": "pick"}"#).unwrap();
        let o = Overrides {
            command: Some(Command::Grammian),
            ..Default::default()
        };
        assert_eq!(pointer(c.clone().apply(&o).unwrap_err()), "/command");
        let o = Overrides {
            seed: Some(9),
            samples: Some(3),
            out: Some("x".into()),
            ..Default::default()
        };
        let c = c.apply(&o).unwrap();
        assert_eq!(
            (c.seed, c.n_samples, c.output.dir.as_deref()),
            (Some(9), Some(3), Some("x"))
        );
        assert_eq!(
            "verify-theorem".parse::<Command>().unwrap(),
            Command::VerifyTheorem
        );
    }
}
