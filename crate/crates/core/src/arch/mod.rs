//! Cascades of fuzzy systems wired from sensors to a single moral output.

mod canonical;
mod moral;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fuzzy::{validate_system, FuzzyError, FuzzySystem, Violation};

pub use canonical::{build_dilemma_architecture, build_takeover_architecture};
pub use moral::{classify_takeover, control_transition, ControlState, VirtuousClass};

/// Where a stage input takes its value from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Sensor(String),
    /// Crisp output of another stage, by stage name.
    Stage(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub system: FuzzySystem,
    /// One source per `system.inputs` entry, same order.
    pub sources: Vec<Source>,
}

impl Stage {
    pub fn name(&self) -> &str {
        &self.system.name
    }
}

#[derive(Debug, Error)]
pub enum ArchError {
    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: String,
        #[source]
        source: FuzzyError,
    },
    #[error("stage `{stage}` is invalid:\n{}", crate::fuzzy::render_violations(.violations))]
    InvalidStage { stage: String, violations: Vec<Violation> },
    #[error("invalid wiring: {0}")]
    Wiring(String),
    #[error("missing value for sensor `{0}`")]
    MissingSensor(String),
}

/// Stages plus wiring. Construct through [`EthicsArchitecture::new`], which
/// checks that the wiring is total and acyclic with a single terminal stage.
#[derive(Debug, Clone, PartialEq)]
pub struct EthicsArchitecture {
    name: String,
    sensors: Vec<String>,
    stages: Vec<Stage>,
    order: Vec<usize>,
    terminal: usize,
}

/// Everything computed for one set of sensor readings.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationTrace {
    /// Sensor values in architecture sensor order.
    pub sensors: Vec<(String, f64)>,
    /// Stage results in declaration order.
    pub stages: Vec<StageOutput>,
    /// Output of the terminal stage.
    pub output: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageOutput {
    pub name: String,
    pub value: f64,
    /// No rule fired; `value` is the midpoint fallback.
    pub fallback: bool,
}

impl EvaluationTrace {
    pub fn stage(&self, name: &str) -> Option<f64> {
        self.stages.iter().find(|s| s.name == name).map(|s| s.value)
    }
}

impl EthicsArchitecture {
    pub fn new(name: impl Into<String>, sensors: Vec<String>, stages: Vec<Stage>) -> Result<Self, ArchError> {
        for stage in &stages {
            let violations = validate_system(&stage.system);
            if !violations.is_empty() {
                return Err(ArchError::InvalidStage { stage: stage.name().to_string(), violations });
            }
        }
        let (order, terminal) = wiring_order(&sensors, &stages)?;
        Ok(EthicsArchitecture { name: name.into(), sensors, stages, order, terminal })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sensors(&self) -> &[String] {
        &self.sensors
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn stage(&self, name: &str) -> Option<&Stage> {
        self.stages.iter().find(|s| s.name() == name)
    }

    pub fn terminal(&self) -> &Stage {
        &self.stages[self.terminal]
    }

    /// Same wiring, every stage resampled at `grid_points`.
    pub fn with_grid_points(mut self, grid_points: usize) -> Result<Self, ArchError> {
        for stage in &mut self.stages {
            let name = stage.name().to_string();
            stage.system = stage
                .system
                .clone()
                .with_grid_points(grid_points)
                .map_err(|source| ArchError::Stage { stage: name, source })?;
        }
        Ok(self)
    }

    /// Runs every stage in dependency order.
    pub fn evaluate(&self, sensors: &BTreeMap<String, f64>) -> Result<EvaluationTrace, ArchError> {
        let readings = self
            .sensors
            .iter()
            .map(|s| sensors.get(s).map(|v| (s.clone(), *v)).ok_or_else(|| ArchError::MissingSensor(s.clone())))
            .collect::<Result<Vec<_>, _>>()?;

        let mut outputs: Vec<Option<StageOutput>> = vec![None; self.stages.len()];
        for &i in &self.order {
            let stage = &self.stages[i];
            let mut inputs = BTreeMap::new();
            for (var, src) in stage.system.inputs.iter().zip(&stage.sources) {
                let value = match src {
                    Source::Sensor(s) => sensors[s],
                    Source::Stage(s) => {
                        let j = self.stage_index(s).expect("wiring checked at construction");
                        outputs[j].as_ref().expect("topological order").value
                    }
                };
                inputs.insert(var.name.clone(), value);
            }
            let inference = stage
                .system
                .infer(&inputs)
                .map_err(|source| ArchError::Stage { stage: stage.name().to_string(), source })?;
            outputs[i] = Some(StageOutput {
                name: stage.name().to_string(),
                value: inference.value,
                fallback: inference.fallback,
            });
        }
        let stages: Vec<StageOutput> = outputs.into_iter().map(|o| o.expect("all stages run")).collect();
        let output = stages[self.terminal].value;
        Ok(EvaluationTrace { sensors: readings, stages, output })
    }

    pub fn evaluate_with(&self, sensors: &[(&str, f64)]) -> Result<EvaluationTrace, ArchError> {
        self.evaluate(&sensors.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }

    fn stage_index(&self, name: &str) -> Option<usize> {
        self.stages.iter().position(|s| s.name() == name)
    }
}

/// Topological order of the stages and the index of the terminal stage.
fn wiring_order(sensors: &[String], stages: &[Stage]) -> Result<(Vec<usize>, usize), ArchError> {
    let wiring = |msg: String| Err(ArchError::Wiring(msg));
    if stages.is_empty() {
        return wiring("architecture has no stages".into());
    }
    let mut seen = BTreeSet::new();
    for s in sensors {
        if !seen.insert(s.as_str()) {
            return wiring(format!("sensor `{s}` declared twice"));
        }
    }
    let index: BTreeMap<&str, usize> = stages.iter().enumerate().map(|(i, s)| (s.name(), i)).collect();
    if index.len() != stages.len() {
        return wiring("stage names must be unique".into());
    }

    // deps[i]: stages feeding stage i
    let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); stages.len()];
    let mut consumed = vec![false; stages.len()];
    for (i, stage) in stages.iter().enumerate() {
        if stage.sources.len() != stage.system.inputs.len() {
            return wiring(format!(
                "stage `{}` has {} inputs but {} sources",
                stage.name(),
                stage.system.inputs.len(),
                stage.sources.len()
            ));
        }
        for (var, src) in stage.system.inputs.iter().zip(&stage.sources) {
            match src {
                Source::Sensor(s) if !seen.contains(s.as_str()) => {
                    return wiring(format!("input `{}.{}` reads unknown sensor `{s}`", stage.name(), var.name));
                }
                Source::Sensor(_) => {}
                Source::Stage(s) => match index.get(s.as_str()) {
                    None => {
                        return wiring(format!("input `{}.{}` reads unknown stage `{s}`", stage.name(), var.name));
                    }
                    Some(&j) if j == i => {
                        return wiring(format!("stage `{s}` feeds itself"));
                    }
                    Some(&j) => {
                        deps[i].insert(j);
                        consumed[j] = true;
                    }
                },
            }
        }
    }

    // Kahn, picking the lowest ready index for a stable order.
    let mut remaining: Vec<usize> = deps.iter().map(|d| d.len()).collect();
    let mut done = vec![false; stages.len()];
    let mut order = Vec::with_capacity(stages.len());
    while order.len() < stages.len() {
        let Some(next) = (0..stages.len()).find(|&i| !done[i] && remaining[i] == 0) else {
            return wiring("stage wiring contains a cycle".into());
        };
        done[next] = true;
        order.push(next);
        for (i, d) in deps.iter().enumerate() {
            if d.contains(&next) {
                remaining[i] -= 1;
            }
        }
    }

    let terminals: Vec<usize> = (0..stages.len()).filter(|&i| !consumed[i]).collect();
    match terminals.as_slice() {
        [t] => Ok((order, *t)),
        _ => {
            let names: Vec<&str> = terminals.iter().map(|&i| stages[i].name()).collect();
            wiring(format!("expected exactly one terminal stage, found {names:?}"))
        }
    }
}
