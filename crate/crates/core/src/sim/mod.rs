//! Fixed-step simulation: periodic sensor signals drive an architecture and
//! every step becomes a dataset row, which can then be labelled and
//! exported.

mod dataset;
mod signal;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::median;
use crate::arch::{classify_takeover, ArchError, EthicsArchitecture};

pub use dataset::{format_sig, LabeledDataset, Row};
pub use signal::{SignalGenerator, Waveform};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("time {t} outside [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error(transparent)]
    Arch(#[from] ArchError),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
}

/// Signals for every sensor channel plus the sampling grid
/// `t_k = k * duration / (steps - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSchedule {
    pub generators: Vec<(String, SignalGenerator)>,
    pub duration: f64,
    pub steps: usize,
}

impl SimulationSchedule {
    pub fn new(generators: Vec<(String, SignalGenerator)>, duration: f64, steps: usize) -> Result<Self, SimError> {
        if steps < 2 {
            return Err(SimError::Schedule(format!("steps must be at least 2, got {steps}")));
        }
        if !(duration.is_finite() && duration > 0.0) {
            return Err(SimError::Schedule(format!("duration must be positive, got {duration}")));
        }
        for (name, g) in &generators {
            if g.duration != duration {
                return Err(SimError::Schedule(format!(
                    "generator `{name}` runs for {} but the schedule runs for {duration}",
                    g.duration
                )));
            }
        }
        Ok(SimulationSchedule { generators, duration, steps })
    }

    pub fn generator(&self, channel: &str) -> Option<&SignalGenerator> {
        self.generators.iter().find(|(c, _)| c == channel).map(|(_, g)| g)
    }

    pub fn time(&self, k: usize) -> f64 {
        let last = self.steps - 1;
        if k >= last {
            self.duration
        } else {
            k as f64 * self.duration / last as f64
        }
    }

    /// Speed one cycle over 0..100, lane two cycles and distance four cycles
    /// over 1..10, ten time units.
    pub fn takeover(waveform: Waveform, steps: usize) -> Result<Self, SimError> {
        let g = |min, max, cycles| SignalGenerator::new(waveform, min, max, cycles, 10.0);
        Self::new(
            vec![
                ("distance".into(), g(1.0, 10.0, 4.0)?),
                ("lane".into(), g(1.0, 10.0, 2.0)?),
                ("speed".into(), g(0.0, 100.0, 1.0)?),
            ],
            10.0,
            steps,
        )
    }

    /// Straight one cycle, swerve two, pedestrian four, all over 1..10.
    pub fn dilemma(waveform: Waveform, steps: usize) -> Result<Self, SimError> {
        let g = |cycles| SignalGenerator::new(waveform, 1.0, 10.0, cycles, 10.0);
        Self::new(
            vec![("straight".into(), g(1.0)?), ("swerve".into(), g(2.0)?), ("pedestrian".into(), g(4.0)?)],
            10.0,
            steps,
        )
    }
}

pub const TAKEOVER_STEPS: usize = 308;
pub const DILEMMA_STEPS: usize = 26;

/// Evaluates `arch` at every step of `schedule`. Rows come back unlabelled
/// and in time order.
pub fn run_simulation(arch: &EthicsArchitecture, schedule: &SimulationSchedule) -> Result<LabeledDataset, SimError> {
    let generators = arch
        .sensors()
        .iter()
        .map(|s| schedule.generator(s).ok_or_else(|| SimError::Schedule(format!("no generator for sensor `{s}`"))))
        .collect::<Result<Vec<_>, _>>()?;

    // terminal stage goes last so that its column doubles as the output
    let terminal = arch.terminal().name().to_string();
    let mut stage_names: Vec<String> =
        arch.stages().iter().map(|s| s.name().to_string()).filter(|n| *n != terminal).collect();
    stage_names.push(terminal);

    let mut ds = LabeledDataset::new(arch.sensors().to_vec(), stage_names.clone());
    let mut readings = std::collections::BTreeMap::new();
    for k in 0..schedule.steps {
        let t = schedule.time(k);
        let mut sensors = Vec::with_capacity(generators.len());
        for (name, g) in arch.sensors().iter().zip(&generators) {
            let v = g.value(t)?;
            readings.insert(name.clone(), v);
            sensors.push(v);
        }
        let trace = arch.evaluate(&readings)?;
        let stages = stage_names.iter().map(|n| trace.stage(n).expect("trace covers every stage")).collect();
        ds.rows.push(Row { time: t, sensors, stages, output: trace.output, label: None });
    }
    Ok(ds)
}

/// How rows get their class label.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Labeling {
    /// Thresholds 5 and 6 on the output.
    Takeover,
    /// Split at the dataset median; ties go to `above`.
    Median { below: String, above: String },
    #[default]
    None,
}

impl Labeling {
    pub fn dilemma() -> Self {
        Labeling::Median { below: "straight_ahead".into(), above: "swerve".into() }
    }

    /// Labels `ds` in place; returns the median cut when one was used.
    pub fn apply(&self, ds: &mut LabeledDataset) -> Result<Option<f64>, SimError> {
        match self {
            Labeling::Takeover => {
                label_takeover(ds);
                Ok(None)
            }
            Labeling::Median { below, above } => label_median(ds, below, above).map(Some),
            Labeling::None => Ok(None),
        }
    }
}

pub fn label_takeover(ds: &mut LabeledDataset) {
    for row in &mut ds.rows {
        row.label = Some(classify_takeover(row.output).to_string());
    }
}

pub fn label_median(ds: &mut LabeledDataset, below: &str, above: &str) -> Result<f64, SimError> {
    let outputs: Vec<f64> = ds.rows.iter().map(|r| r.output).collect();
    let cut = median(&outputs).ok_or(SimError::EmptyDataset)?;
    for row in &mut ds.rows {
        row.label = Some(if row.output < cut { below } else { above }.to_string());
    }
    Ok(cut)
}

/// Straight-ahead / swerve split at the median output.
pub fn label_dilemma(ds: &mut LabeledDataset) -> Result<f64, SimError> {
    label_median(ds, "straight_ahead", "swerve")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::{build_dilemma_architecture, build_takeover_architecture};

    fn with_outputs(outputs: &[f64]) -> LabeledDataset {
        let mut ds = LabeledDataset::new(vec!["x".into()], vec!["out".into()]);
        for (i, o) in outputs.iter().enumerate() {
            ds.rows.push(Row { time: i as f64, sensors: vec![0.0], stages: vec![*o], output: *o, label: None });
        }
        ds
    }

    #[test]
    fn canonical_row_counts() {
        let arch = build_takeover_architecture();
        let ds =
            run_simulation(&arch, &SimulationSchedule::takeover(Waveform::Triangle, TAKEOVER_STEPS).unwrap()).unwrap();
        assert_eq!(ds.rows.len(), 308);
        assert_eq!(ds.stages, vec!["rightwrong", "goodbad", "vmec"]);
        assert!(ds.rows.windows(2).all(|w| w[0].time < w[1].time));
        assert_eq!(ds.rows.last().unwrap().time, 10.0);

        let arch = build_dilemma_architecture();
        let ds =
            run_simulation(&arch, &SimulationSchedule::dilemma(Waveform::Triangle, DILEMMA_STEPS).unwrap()).unwrap();
        assert_eq!(ds.rows.len(), 26);
    }

    #[test]
    fn two_steps_are_the_endpoints() {
        let arch = build_takeover_architecture();
        let sched = SimulationSchedule::takeover(Waveform::Triangle, 2).unwrap();
        let ds = run_simulation(&arch, &sched).unwrap();
        assert_eq!(ds.rows.len(), 2);
        let start = arch.evaluate_with(&[("distance", 1.0), ("lane", 1.0), ("speed", 0.0)]).unwrap();
        assert_eq!(ds.rows[0].time, 0.0);
        assert_eq!(ds.rows[1].time, 10.0);
        assert_eq!(ds.rows[0].output, start.output);
        assert_eq!(ds.rows[1].output, start.output);
    }

    #[test]
    fn reproducible() {
        let arch = build_takeover_architecture();
        let sched = SimulationSchedule::takeover(Waveform::Sine, 97).unwrap();
        let a = run_simulation(&arch, &sched).unwrap();
        let b = run_simulation(&arch, &sched).unwrap();
        let bits = |d: &LabeledDataset| d.rows.iter().map(|r| r.output.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn schedule_checks() {
        assert!(SimulationSchedule::takeover(Waveform::Triangle, 1).is_err());
        let arch = build_takeover_architecture();
        let sched = SimulationSchedule::dilemma(Waveform::Triangle, 10).unwrap();
        assert!(matches!(run_simulation(&arch, &sched), Err(SimError::Schedule(_))));
    }

    #[test]
    fn takeover_labels() {
        let mut ds = with_outputs(&[4.2, 5.99, 6.48]);
        label_takeover(&mut ds);
        let labels: Vec<_> = ds.rows.iter().map(|r| r.label.clone().unwrap()).collect();
        assert_eq!(labels, vec!["0", "1", "2"]);
    }

    #[test]
    fn median_labels() {
        let mut ds = with_outputs(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(label_dilemma(&mut ds).unwrap(), 2.5);
        assert_eq!(ds.rows[1].label.as_deref(), Some("straight_ahead"));
        assert_eq!(ds.rows[2].label.as_deref(), Some("swerve"));

        let mut flat = with_outputs(&[3.0, 3.0, 3.0]);
        label_dilemma(&mut flat).unwrap();
        assert!(flat.rows.iter().all(|r| r.label.as_deref() == Some("swerve")));

        let mut empty = with_outputs(&[]);
        assert!(matches!(label_dilemma(&mut empty), Err(SimError::EmptyDataset)));
    }
}
