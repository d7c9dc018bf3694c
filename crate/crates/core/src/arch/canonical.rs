//! The two reference cascades: the take-over decision stack and the
//! swerve/straight dilemma stack.

use crate::fuzzy::{FuzzySystem, FuzzyVariable, MembershipFunction as Mf, Rule};

use super::{EthicsArchitecture, Source, Stage};

fn trap(p: [f64; 4]) -> Mf {
    Mf::trapezoid(p[0], p[1], p[2], p[3])
}

fn risk(name: &str, lo: f64, hi: f64, low: [f64; 4], high: [f64; 4]) -> FuzzyVariable {
    FuzzyVariable::new(name, lo, hi).term("lowrisk", trap(low)).term("highrisk", trap(high))
}

fn all_three(label: &'static str) -> [(&'static str, &'static str); 3] {
    [("distance", label), ("lane", label), ("speed", label)]
}

fn sensor(name: &str) -> Source {
    Source::Sensor(name.to_string())
}

fn from_stage(name: &str) -> Source {
    Source::Stage(name.to_string())
}

fn stage(system: Result<FuzzySystem, crate::fuzzy::FuzzyError>, sources: Vec<Source>) -> Stage {
    Stage { system: system.expect("reference system is valid"), sources }
}

/// Right/wrong and good/bad reasoners over distance, lane and speed risk,
/// combined by the virtuous meta-ethics controller (`vmec`).
///
/// ```
/// let arch = autometric::arch::build_takeover_architecture();
/// let trace = arch.evaluate_with(&[("distance", 10.0), ("lane", 10.0), ("speed", 100.0)]).unwrap();
/// assert!(trace.output >= 6.0);
/// ```
pub fn build_takeover_architecture() -> EthicsArchitecture {
    let inputs = |speed_high: [f64; 4]| {
        vec![
            risk("distance", 1.0, 10.0, [0., 0., 5., 6.], [5., 6., 10., 10.]),
            risk("lane", 1.0, 10.0, [0., 0., 8., 9.], [7., 8., 10., 10.]),
            risk("speed", 0.0, 100.0, [0., 0., 40., 80.], speed_high),
        ]
    };
    let sensors = vec![sensor("distance"), sensor("lane"), sensor("speed")];

    let right_wrong = FuzzySystem::new(
        "rightwrong",
        inputs([40., 80., 100., 100.]),
        FuzzyVariable::new("tcrightwrong", 1.0, 10.0)
            .term("tcwrong", Mf::z_spline(7.0, 10.0))
            .term("tcright", Mf::s_spline(4.0, 7.0)),
        vec![
            Rule::new(&all_three("lowrisk"), ("tcrightwrong", "tcwrong")),
            Rule::new(&all_three("highrisk"), ("tcrightwrong", "tcright")),
        ],
    );

    // The tabled good/bad high-risk speed edge reads [40, 80, 100, 10]; the
    // last value is a truncated 100.
    let good_bad = FuzzySystem::new(
        "goodbad",
        inputs([40., 80., 100., 100.]),
        FuzzyVariable::new("tcgoodbad", 1.0, 10.0)
            .term("tcbad", Mf::z_spline(4.0, 8.0))
            .term("tcgood", Mf::s_spline(2.0, 6.0)),
        vec![
            Rule::new(&all_three("lowrisk"), ("tcgoodbad", "tcbad")),
            Rule::new(&all_three("highrisk"), ("tcgoodbad", "tcgood")),
        ],
    );

    let vmec = FuzzySystem::new(
        "vmec",
        vec![
            FuzzyVariable::new("tcrw", 1.0, 10.0)
                .term("rwdtc", Mf::z_spline(1.0, 10.0))
                .term("rwtc", Mf::s_spline(1.0, 10.0)),
            FuzzyVariable::new("tcgb", 1.0, 10.0)
                .term("gbdtc", trap([0., 0., 5., 6.]))
                .term("gbtc", trap([5., 6., 10., 10.])),
        ],
        FuzzyVariable::new("control", 1.0, 10.0)
            .term("vcno", Mf::z_spline(5.5, 10.0))
            .term("vcyes", Mf::s_spline(1.0, 5.5)),
        vec![
            Rule::new(&[("tcrw", "rwtc"), ("tcgb", "gbtc")], ("control", "vcyes")),
            Rule::new(&[("tcrw", "rwdtc"), ("tcgb", "gbdtc")], ("control", "vcno")),
        ],
    );

    EthicsArchitecture::new(
        "takeover",
        vec!["distance".into(), "lane".into(), "speed".into()],
        vec![
            stage(right_wrong, sensors.clone()),
            stage(good_bad, sensors),
            stage(vmec, vec![from_stage("rightwrong"), from_stage("goodbad")]),
        ],
    )
    .expect("takeover wiring is valid")
}

/// Swerve right/wrong from death risk straight ahead and on the swerve
/// path, avoid good/bad from pedestrian age (sensor 1..10, age / 10), and
/// the dilemma controller that trades them off.
pub fn build_dilemma_architecture() -> EthicsArchitecture {
    let death = |name: &str| {
        FuzzyVariable::new(name, 1.0, 10.0)
            .term("lowriskdeath", trap([0., 0., 2., 3.]))
            .term("highriskdeath", trap([2., 3., 10., 10.]))
    };
    let right_wrong = FuzzySystem::new(
        "rightwrong",
        vec![death("straight"), death("swerve")],
        FuzzyVariable::new("swerverightwrong", 1.0, 10.0)
            .term("swervewrong", Mf::z_spline(5.0, 6.0))
            .term("swerveright", Mf::s_spline(5.0, 6.0)),
        vec![
            Rule::new(
                &[("straight", "highriskdeath"), ("swerve", "lowriskdeath")],
                ("swerverightwrong", "swerveright"),
            ),
            Rule::new(
                &[("straight", "lowriskdeath"), ("swerve", "highriskdeath")],
                ("swerverightwrong", "swervewrong"),
            ),
        ],
    );

    let good_bad = FuzzySystem::new(
        "goodbad",
        vec![FuzzyVariable::new("pedestrian", 1.0, 10.0)
            .term("young", trap([0., 0., 2., 3.]))
            .term("notyoung", trap([2., 5., 10., 10.]))],
        FuzzyVariable::new("avoid", 1.0, 10.0)
            .term("avoidbad", Mf::z_spline(4.0, 8.0))
            .term("avoidgood", Mf::s_spline(2.0, 6.0)),
        vec![
            Rule::new(&[("pedestrian", "young")], ("avoid", "avoidgood")),
            Rule::new(&[("pedestrian", "notyoung")], ("avoid", "avoidbad")),
        ],
    );

    let controller = FuzzySystem::new(
        "dilemma",
        vec![
            FuzzyVariable::new("deathrisk", 1.0, 10.0)
                .term("riskdeathlow", Mf::generalized_bell(4.5, 3.0, 1.0))
                .term("riskdeathhigh", Mf::generalized_bell(4.5, 2.5, 10.0)),
            FuzzyVariable::new("pedestrianrisk", 1.0, 10.0)
                .term("avoidbad", Mf::generalized_bell(5.0, 2.5, 0.0))
                .term("avoidgood", Mf::generalized_bell(5.0, 2.5, 10.0)),
        ],
        FuzzyVariable::new("dilemmadecision", 1.0, 10.0)
            .term("straight_ahead", Mf::gaussian(1.0, 3.0))
            .term("swerve", Mf::gaussian(1.0, 7.0)),
        vec![
            Rule::new(
                &[("deathrisk", "riskdeathhigh"), ("pedestrianrisk", "avoidgood")],
                ("dilemmadecision", "swerve"),
            ),
            Rule::new(
                &[("deathrisk", "riskdeathlow"), ("pedestrianrisk", "avoidbad")],
                ("dilemmadecision", "straight_ahead"),
            ),
        ],
    );

    EthicsArchitecture::new(
        "dilemma",
        vec!["straight".into(), "swerve".into(), "pedestrian".into()],
        vec![
            stage(right_wrong, vec![sensor("straight"), sensor("swerve")]),
            stage(good_bad, vec![sensor("pedestrian")]),
            stage(controller, vec![from_stage("rightwrong"), from_stage("goodbad")]),
        ],
    )
    .expect("dilemma wiring is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::{validate_system, MembershipFunction};

    #[test]
    fn takeover_tables() {
        let arch = build_takeover_architecture();
        assert_eq!(arch.stages().len(), 3);
        for s in arch.stages() {
            assert!(validate_system(&s.system).is_empty());
        }
        let rw = &arch.stage("rightwrong").unwrap().system;
        assert_eq!(rw.input("speed").unwrap().get("lowrisk").unwrap().params(), vec![0., 0., 40., 80.]);
        let gb = &arch.stage("goodbad").unwrap().system;
        assert_eq!(gb.input("speed").unwrap().get("highrisk").unwrap().params(), vec![40., 80., 100., 100.]);
        let vmec = &arch.stage("vmec").unwrap().system;
        assert_eq!(*vmec.output.get("vcno").unwrap(), MembershipFunction::z_spline(5.5, 10.0));
        assert_eq!(*vmec.output.get("vcyes").unwrap(), MembershipFunction::s_spline(1.0, 5.5));
        assert_eq!(arch.terminal().name(), "vmec");
    }

    #[test]
    fn dilemma_tables() {
        let arch = build_dilemma_architecture();
        for s in arch.stages() {
            assert!(validate_system(&s.system).is_empty());
        }
        let c = &arch.stage("dilemma").unwrap().system;
        let dr = c.input("deathrisk").unwrap();
        assert_eq!(dr.get("riskdeathlow").unwrap().params(), vec![4.5, 3.0, 1.0]);
        assert_eq!(dr.get("riskdeathhigh").unwrap().params(), vec![4.5, 2.5, 10.0]);
        assert_eq!(c.output.get("straight_ahead").unwrap().params(), vec![1.0, 3.0]);
        assert_eq!(c.output.get("swerve").unwrap().params(), vec![1.0, 7.0]);
        assert_eq!(
            arch.stage("dilemma").unwrap().sources,
            vec![Source::Stage("rightwrong".into()), Source::Stage("goodbad".into())]
        );
    }

    #[test]
    fn takeover_corners() {
        let arch = build_takeover_architecture();
        let high = arch.evaluate_with(&[("distance", 10.0), ("lane", 10.0), ("speed", 100.0)]).unwrap();
        assert!(high.output >= 6.0, "{}", high.output);
        let low = arch.evaluate_with(&[("distance", 1.0), ("lane", 1.0), ("speed", 0.0)]).unwrap();
        assert!(low.output < 5.0, "{}", low.output);
        for s in &high.stages {
            assert!((1.0..=10.0).contains(&s.value));
        }
    }

    #[test]
    fn dilemma_probes() {
        let arch = build_dilemma_architecture();
        let young = arch.evaluate_with(&[("straight", 10.0), ("swerve", 1.0), ("pedestrian", 1.0)]).unwrap();
        let old = arch.evaluate_with(&[("straight", 2.0), ("swerve", 9.0), ("pedestrian", 9.0)]).unwrap();
        assert!(young.output > 6.0, "{}", young.output);
        assert!(old.output < 4.5, "{}", old.output);
    }
}
