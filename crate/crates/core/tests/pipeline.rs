use autometric::analysis::analyze;
use autometric::arch::{build_takeover_architecture, classify_takeover, control_transition, ControlState};
use autometric::config::{builtin, ArchitectureConfig};
use autometric::nnge::{default_features, examples_from_dataset, train};
use autometric::sim::{run_simulation, LabeledDataset, Labeling, SimulationSchedule, Waveform, TAKEOVER_STEPS};

fn labelled(name: &str, steps: usize) -> LabeledDataset {
    let (arch, labeling) = builtin(name).unwrap();
    let sched = match name {
        "takeover" => SimulationSchedule::takeover(Waveform::Triangle, steps),
        _ => SimulationSchedule::dilemma(Waveform::Triangle, steps),
    }
    .unwrap();
    let mut ds = run_simulation(&arch, &sched).unwrap();
    labeling.apply(&mut ds).unwrap();
    ds
}

#[test]
fn csv_file_round_trip_preserves_learning() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("takeover.csv");
    let ds = labelled("takeover", TAKEOVER_STEPS);
    assert_eq!(ds.export_csv(&path).unwrap(), 308);
    let back = LabeledDataset::import_csv(&path).unwrap();
    assert_eq!(back.header(), ds.header());
    assert_eq!(back.labels(), ds.labels());

    let features = default_features(&back);
    assert_eq!(features, ["distance", "lane", "speed", "rightwrong_out", "goodbad_out"]);
    let examples = examples_from_dataset(&back, &features).unwrap();
    let model = train(&examples, &features).unwrap();
    assert_eq!(model.accuracy(&examples).unwrap(), 1.0);
    assert_eq!(model.classes, ["0", "1", "2"]);
}

#[test]
fn dilemma_features_and_labels() {
    let ds = labelled("dilemma", 26);
    assert_eq!(default_features(&ds), ["straight", "swerve", "pedestrian", "rightwrong_out", "goodbad_out"]);
    let labels: Vec<_> = ds.labels().into_iter().map(Option::unwrap).collect();
    assert!(labels.iter().all(|l| *l == "straight_ahead" || *l == "swerve"));
    let examples = examples_from_dataset(&ds, &default_features(&ds)).unwrap();
    let model = train(&examples, &default_features(&ds)).unwrap();
    assert_eq!(model.accuracy(&examples).unwrap(), 1.0);
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("arch.json");
    let (arch, labeling) = builtin("dilemma").unwrap();
    ArchitectureConfig::from_architecture(&arch, Some(labeling.clone())).save(&path).unwrap();
    let cfg = ArchitectureConfig::load(&path).unwrap();
    assert_eq!(cfg.labeling, Some(labeling));
    let rebuilt = cfg.build().unwrap();
    for probe in [[10.0, 1.0, 1.0], [2.0, 9.0, 9.0], [5.0, 5.0, 5.0]] {
        let readings = [("straight", probe[0]), ("swerve", probe[1]), ("pedestrian", probe[2])];
        assert_eq!(arch.evaluate_with(&readings).unwrap(), rebuilt.evaluate_with(&readings).unwrap());
    }
}

#[test]
fn unlabelled_runs_are_rejected_by_the_learner() {
    let arch = build_takeover_architecture();
    let ds = run_simulation(&arch, &SimulationSchedule::takeover(Waveform::Sine, 20).unwrap()).unwrap();
    assert!(examples_from_dataset(&ds, &default_features(&ds)).is_err());
    let mut ds = ds;
    Labeling::Takeover.apply(&mut ds).unwrap();
    assert!(examples_from_dataset(&ds, &default_features(&ds)).is_ok());
}

#[test]
fn control_follows_the_run() {
    // the vehicle takes over during the class-2 stretch and hands back once
    // the stream returns to class 0
    let ds = labelled("takeover", TAKEOVER_STEPS);
    let mut state = ControlState::Human;
    let mut handovers = 0;
    for row in &ds.rows {
        let next = control_transition(state, classify_takeover(row.output));
        if next != state {
            handovers += 1;
        }
        state = next;
    }
    assert!(handovers >= 2, "{handovers}");
    assert_eq!(state, ControlState::Human);
}

#[test]
fn analysis_of_the_canonical_run() {
    let report = analyze(&labelled("takeover", TAKEOVER_STEPS)).unwrap();
    assert_eq!(report.summary.count, 308);
    let r = report.regression.unwrap();
    assert_eq!(r.rows, 308);
    assert!(r.r_squared > 0.9);
}
