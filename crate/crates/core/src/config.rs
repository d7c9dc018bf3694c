//! JSON description of an architecture, plus the manifest written next to
//! every simulation run.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "name": "takeover",
//!   "sensors": ["distance", "lane", "speed"],
//!   "stages": [{
//!     "name": "rightwrong",
//!     "inputs": [{"name": "distance", "range": [1, 10], "source": {"sensor": "distance"},
//!                 "mfs": [{"label": "lowrisk", "shape": "trapezoid", "params": [0, 0, 5, 6]}]}],
//!     "output": {"name": "tcrightwrong", "range": [1, 10], "mfs": [...]},
//!     "rules": [{"if": [["distance", "lowrisk"]], "then": ["tcrightwrong", "tcwrong"]}]
//!   }],
//!   "labeling": "takeover"
//! }
//! ```
//!
//! An input without `source` reads the sensor of the same name.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch::{build_dilemma_architecture, build_takeover_architecture, EthicsArchitecture, Source, Stage};
use crate::fuzzy::{
    validate_system, FuzzySystem, FuzzyVariable, MembershipFunction, Rule, Shape, Term, DEFAULT_GRID_POINTS,
};
use crate::sim::{Labeling, SimulationSchedule};

pub const SCHEMA_VERSION: u32 = 1;

/// Names accepted by [`builtin`].
pub const BUILTINS: [&str; 2] = ["takeover", "dilemma"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed configuration: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema_version {found} (this build reads {SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
    #[error("invalid configuration:\n{}", .0.iter().map(|p| format!("  - {p}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureConfig {
    pub schema_version: u32,
    pub name: String,
    pub sensors: Vec<String>,
    pub stages: Vec<StageConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labeling: Option<Labeling>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    pub name: String,
    pub inputs: Vec<VariableConfig>,
    pub output: VariableConfig,
    pub rules: Vec<RuleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableConfig {
    pub name: String,
    pub range: [f64; 2],
    pub mfs: Vec<TermConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub label: String,
    pub shape: Shape,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceConfig {
    Sensor(String),
    Stage(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    #[serde(rename = "if")]
    pub antecedents: Vec<(String, String)>,
    pub then: (String, String),
}

impl ArchitectureConfig {
    pub fn from_architecture(arch: &EthicsArchitecture, labeling: Option<Labeling>) -> Self {
        let stages = arch
            .stages()
            .iter()
            .map(|stage| {
                let sys = &stage.system;
                StageConfig {
                    name: sys.name.clone(),
                    inputs: sys
                        .inputs
                        .iter()
                        .zip(&stage.sources)
                        .map(|(v, src)| {
                            let source = match src {
                                Source::Sensor(s) => SourceConfig::Sensor(s.clone()),
                                Source::Stage(s) => SourceConfig::Stage(s.clone()),
                            };
                            variable_config(v, Some(source))
                        })
                        .collect(),
                    output: variable_config(&sys.output, None),
                    rules: sys
                        .rules
                        .iter()
                        .map(|r| RuleConfig { antecedents: r.antecedents.clone(), then: r.consequent.clone() })
                        .collect(),
                    grid_points: (sys.grid_points != DEFAULT_GRID_POINTS).then_some(sys.grid_points),
                }
            })
            .collect();
        ArchitectureConfig {
            schema_version: SCHEMA_VERSION,
            name: arch.name().to_string(),
            sensors: arch.sensors().to_vec(),
            stages,
            labeling,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        // check the version before the shape so old files get a clear message
        let raw: serde_json::Value = serde_json::from_str(text)?;
        match raw.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            Some(v) => return Err(ConfigError::SchemaVersion { found: v as u32 }),
            None => return Err(ConfigError::Invalid(vec!["missing integer field `schema_version`".into()])),
        }
        Ok(serde_json::from_value(raw)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serialises")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ConfigError> {
        fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    /// Every problem found, across all stages and the wiring.
    pub fn violations(&self) -> Vec<String> {
        match self.build() {
            Ok(_) => Vec::new(),
            Err(ConfigError::Invalid(v)) => v,
            Err(e) => vec![e.to_string()],
        }
    }

    pub fn build(&self) -> Result<EthicsArchitecture, ConfigError> {
        let mut problems = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::SchemaVersion { found: self.schema_version });
        }
        let mut stages = Vec::new();
        for sc in &self.stages {
            let mut inputs = Vec::new();
            let mut sources = Vec::new();
            for v in &sc.inputs {
                inputs.push(build_variable(&sc.name, v, &mut problems));
                sources.push(match &v.source {
                    Some(SourceConfig::Sensor(s)) => Source::Sensor(s.clone()),
                    Some(SourceConfig::Stage(s)) => Source::Stage(s.clone()),
                    None => Source::Sensor(v.name.clone()),
                });
            }
            if sc.output.source.is_some() {
                problems.push(format!("stage `{}`: the output variable cannot have a source", sc.name));
            }
            let output = build_variable(&sc.name, &sc.output, &mut problems);
            let rules = sc
                .rules
                .iter()
                .map(|r| Rule { antecedents: r.antecedents.clone(), consequent: r.then.clone() })
                .collect();
            let system = FuzzySystem {
                name: sc.name.clone(),
                inputs,
                output,
                rules,
                grid_points: sc.grid_points.unwrap_or(DEFAULT_GRID_POINTS),
            };
            problems.extend(validate_system(&system).into_iter().map(|v| format!("stage `{}`: {v}", sc.name)));
            stages.push(Stage { system, sources });
        }
        if !problems.is_empty() {
            return Err(ConfigError::Invalid(problems));
        }
        EthicsArchitecture::new(self.name.clone(), self.sensors.clone(), stages)
            .map_err(|e| ConfigError::Invalid(vec![e.to_string()]))
    }
}

fn variable_config(v: &FuzzyVariable, source: Option<SourceConfig>) -> VariableConfig {
    VariableConfig {
        name: v.name.clone(),
        range: [v.lo, v.hi],
        mfs: v
            .terms
            .iter()
            .map(|t| TermConfig { label: t.label.clone(), shape: t.mf.shape(), params: t.mf.params() })
            .collect(),
        source,
    }
}

/// Terms with the wrong parameter count are dropped (and reported) so that
/// the remaining checks can still run.
fn build_variable(stage: &str, v: &VariableConfig, problems: &mut Vec<String>) -> FuzzyVariable {
    let mut var = FuzzyVariable::new(v.name.clone(), v.range[0], v.range[1]);
    for t in &v.mfs {
        match MembershipFunction::from_parts(t.shape, &t.params) {
            Ok(mf) => var.terms.push(Term { label: t.label.clone(), mf }),
            Err(vs) => problems
                .extend(vs.into_iter().map(|e| format!("stage `{stage}`, term `{}` of `{}`: {e}", t.label, v.name))),
        }
    }
    var
}

/// A built-in architecture and the labelling its runs use.
pub fn builtin(name: &str) -> Option<(EthicsArchitecture, Labeling)> {
    match name {
        "takeover" => Some((build_takeover_architecture(), Labeling::Takeover)),
        "dilemma" => Some((build_dilemma_architecture(), Labeling::dilemma())),
        _ => None,
    }
}

/// Provenance record for one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub architecture: ArchitectureConfig,
    pub schedule: SimulationSchedule,
    pub grid_points: usize,
    pub rows: usize,
    pub output: String,
    /// Class label and row count, in order of first appearance.
    pub class_counts: Vec<(String, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median: Option<f64>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialises")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ConfigError> {
        fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}
