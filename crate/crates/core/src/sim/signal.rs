use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Waveform {
    /// min -> max over the first half cycle, back to min over the second.
    #[default]
    Triangle,
    /// min -> max over each cycle, then reset.
    Sawtooth,
    /// Raised cosine starting at min.
    Sine,
}

impl fmt::Display for Waveform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Waveform::Triangle => "triangle",
            Waveform::Sawtooth => "sawtooth",
            Waveform::Sine => "sine",
        })
    }
}

impl FromStr for Waveform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "triangle" => Ok(Waveform::Triangle),
            "sawtooth" => Ok(Waveform::Sawtooth),
            "sine" => Ok(Waveform::Sine),
            _ => Err(format!("unknown waveform `{s}` (expected triangle, sawtooth or sine)")),
        }
    }
}

/// A periodic test signal running `cycles` full periods over `duration`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalGenerator {
    pub waveform: Waveform,
    pub min: f64,
    pub max: f64,
    pub cycles: f64,
    pub duration: f64,
}

impl SignalGenerator {
    pub fn new(waveform: Waveform, min: f64, max: f64, cycles: f64, duration: f64) -> Result<Self, SimError> {
        let ok =
            [min, max, cycles, duration].iter().all(|v| v.is_finite()) && min < max && cycles > 0.0 && duration > 0.0;
        if !ok {
            return Err(SimError::Schedule(format!(
                "signal needs min < max, cycles > 0 and duration > 0 (got min {min}, max {max}, cycles {cycles}, duration {duration})"
            )));
        }
        Ok(SignalGenerator { waveform, min, max, cycles, duration })
    }

    pub fn period(&self) -> f64 {
        self.duration / self.cycles
    }

    /// Value at time `t`, which must lie in `[0, duration]`.
    ///
    /// ```
    /// use autometric::sim::{SignalGenerator, Waveform};
    /// let speed = SignalGenerator::new(Waveform::Triangle, 0.0, 100.0, 1.0, 10.0).unwrap();
    /// assert_eq!(speed.value(5.0).unwrap(), 100.0);
    /// ```
    pub fn value(&self, t: f64) -> Result<f64, SimError> {
        if !(0.0..=self.duration).contains(&t) {
            return Err(SimError::TimeOutOfRange { t, duration: self.duration });
        }
        let phase = (self.cycles * t / self.duration).fract();
        let shape = match self.waveform {
            Waveform::Triangle => {
                if phase < 0.5 {
                    2.0 * phase
                } else {
                    2.0 - 2.0 * phase
                }
            }
            Waveform::Sawtooth => phase,
            Waveform::Sine => 0.5 * (1.0 - (2.0 * PI * phase).cos()),
        };
        Ok(self.min + (self.max - self.min) * shape)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_points() {
        let tri = SignalGenerator::new(Waveform::Triangle, 0.0, 100.0, 1.0, 10.0).unwrap();
        assert_eq!(tri.value(5.0).unwrap(), 100.0);
        assert_eq!(tri.value(0.0).unwrap(), 0.0);
        assert_eq!(tri.value(10.0).unwrap(), 0.0);
        let tri4 = SignalGenerator::new(Waveform::Triangle, 1.0, 10.0, 4.0, 10.0).unwrap();
        assert_eq!(tri4.value(0.0).unwrap(), 1.0);
        assert_eq!(tri4.value(1.25).unwrap(), 10.0);
        let saw = SignalGenerator::new(Waveform::Sawtooth, 1.0, 10.0, 2.0, 10.0).unwrap();
        assert_eq!(saw.value(2.5).unwrap(), 5.5);
        let sine = SignalGenerator::new(Waveform::Sine, 1.0, 10.0, 1.0, 10.0).unwrap();
        assert_eq!(sine.value(0.0).unwrap(), 1.0);
        assert!((sine.value(5.0).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_time_and_parameters() {
        let g = SignalGenerator::new(Waveform::Triangle, 1.0, 10.0, 1.0, 10.0).unwrap();
        assert!(matches!(g.value(-0.1), Err(SimError::TimeOutOfRange { .. })));
        assert!(g.value(10.01).is_err());
        assert!(SignalGenerator::new(Waveform::Triangle, 10.0, 1.0, 1.0, 10.0).is_err());
        assert!(SignalGenerator::new(Waveform::Triangle, 1.0, 10.0, 0.0, 10.0).is_err());
    }

    #[test]
    fn waveform_names() {
        for w in [Waveform::Triangle, Waveform::Sawtooth, Waveform::Sine] {
            assert_eq!(w.to_string().parse::<Waveform>().unwrap(), w);
        }
        assert!("square".parse::<Waveform>().is_err());
    }

    fn waveform() -> impl Strategy<Value = Waveform> {
        prop_oneof![Just(Waveform::Triangle), Just(Waveform::Sawtooth), Just(Waveform::Sine)]
    }

    proptest! {
        #[test]
        fn stays_within_bounds(w in waveform(), cycles in 1u32..8, t in 0.0..=10.0f64) {
            let g = SignalGenerator::new(w, 1.0, 10.0, cycles as f64, 10.0).unwrap();
            let v = g.value(t).unwrap();
            prop_assert!((1.0..=10.0).contains(&v));
        }

        #[test]
        fn is_periodic(w in waveform(), cycles in 2u32..8, u in 0.0..1.0f64) {
            let g = SignalGenerator::new(w, 1.0, 10.0, cycles as f64, 10.0).unwrap();
            let t = u * (g.duration - g.period());
            let a = g.value(t).unwrap();
            let b = g.value(t + g.period()).unwrap();
            // a sawtooth may land on either side of its reset
            let jump = if w == Waveform::Sawtooth { (a - b).abs() - 9.0 } else { 1.0 };
            prop_assert!((a - b).abs() < 1e-9 || jump.abs() < 1e-9, "{a} vs {b}");
        }
    }
}
