use std::collections::{BTreeMap, BTreeSet};

use super::{Fuzzified, FuzzyError, FuzzyVariable, Rule, Violation};

/// Resolution of the output grid used for defuzzification.
pub const DEFAULT_GRID_POINTS: usize = 1001;
pub const MIN_GRID_POINTS: usize = 101;

/// A Mamdani system: several inputs, one output, AND-only rules.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzySystem {
    pub name: String,
    pub inputs: Vec<FuzzyVariable>,
    pub output: FuzzyVariable,
    pub rules: Vec<Rule>,
    pub grid_points: usize,
}

/// Crisp result of [`FuzzySystem::infer`].
#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub value: f64,
    /// Per-rule firing strengths, in rule order.
    pub strengths: Vec<f64>,
    /// Set when no rule fired and `value` is the output midpoint.
    pub fallback: bool,
}

impl FuzzySystem {
    /// Assembles and checks a system.
    pub fn new(
        name: impl Into<String>,
        inputs: Vec<FuzzyVariable>,
        output: FuzzyVariable,
        rules: Vec<Rule>,
    ) -> Result<Self, FuzzyError> {
        let system = FuzzySystem { name: name.into(), inputs, output, rules, grid_points: DEFAULT_GRID_POINTS };
        system.checked()
    }

    pub fn with_grid_points(mut self, grid_points: usize) -> Result<Self, FuzzyError> {
        self.grid_points = grid_points;
        self.checked()
    }

    fn checked(self) -> Result<Self, FuzzyError> {
        let v = validate_system(&self);
        if v.is_empty() {
            Ok(self)
        } else {
            Err(FuzzyError::Invalid(v))
        }
    }

    pub fn input(&self, name: &str) -> Option<&FuzzyVariable> {
        self.inputs.iter().find(|v| v.name == name)
    }

    /// Fuzzifies every input. Inputs outside a variable's range are clamped.
    pub fn fuzzify(&self, inputs: &BTreeMap<String, f64>) -> Result<Fuzzified, FuzzyError> {
        self.inputs
            .iter()
            .map(|var| {
                let x = *inputs.get(&var.name).ok_or_else(|| FuzzyError::MissingInput(var.name.clone()))?;
                if !x.is_finite() {
                    return Err(FuzzyError::NonFiniteInput { name: var.name.clone(), value: x });
                }
                Ok((var.name.clone(), var.fuzzify(x)))
            })
            .collect()
    }

    pub fn firing_strengths(&self, fuzzified: &Fuzzified) -> Result<Vec<f64>, FuzzyError> {
        self.rules.iter().map(|r| r.fire(fuzzified)).collect()
    }

    /// The aggregated output curve `max_r min(strength_r, mf_r(x))` sampled
    /// on the uniform grid, as `(x, degree)` pairs.
    pub fn aggregate(&self, strengths: &[f64]) -> Result<Vec<(f64, f64)>, FuzzyError> {
        if strengths.len() != self.rules.len() {
            return Err(FuzzyError::StrengthCount { expected: self.rules.len(), got: strengths.len() });
        }
        let consequents = self
            .rules
            .iter()
            .map(|r| {
                self.output.get(&r.consequent.1).ok_or_else(|| FuzzyError::UnknownLabel {
                    variable: self.output.name.clone(),
                    label: r.consequent.1.clone(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let (lo, hi) = (self.output.lo, self.output.hi);
        let last = self.grid_points - 1;
        let step = (hi - lo) / last as f64;
        Ok((0..self.grid_points)
            .map(|i| {
                let x = if i == last { hi } else { lo + i as f64 * step };
                let mu = strengths
                    .iter()
                    .zip(&consequents)
                    .filter(|(s, _)| **s > 0.0)
                    .map(|(s, mf)| s.min(mf.eval(x)))
                    .fold(0.0f64, f64::max);
                (x, mu)
            })
            .collect())
    }

    /// Centroid of the aggregated output.
    ///
    /// The grid sums carry trapezoid weights (half weight on the two end
    /// points), which makes the ratio a second-order quadrature of
    /// `∫x·μ / ∫μ`.
    pub fn aggregate_and_defuzz(&self, strengths: &[f64]) -> Result<f64, FuzzyError> {
        let curve = self.aggregate(strengths)?;
        let last = curve.len() - 1;
        let (mut moment, mut area) = (0.0, 0.0);
        for (i, (x, mu)) in curve.into_iter().enumerate() {
            let w = if i == 0 || i == last { 0.5 } else { 1.0 };
            moment += w * x * mu;
            area += w * mu;
        }
        if area <= 0.0 {
            return Err(FuzzyError::NoFiring);
        }
        Ok((moment / area).clamp(self.output.lo, self.output.hi))
    }

    /// Full pipeline. When no rule fires the result is the midpoint of the
    /// output range with `fallback` set.
    pub fn infer(&self, inputs: &BTreeMap<String, f64>) -> Result<Inference, FuzzyError> {
        let fuzzified = self.fuzzify(inputs)?;
        let strengths = self.firing_strengths(&fuzzified)?;
        match self.aggregate_and_defuzz(&strengths) {
            Ok(value) => Ok(Inference { value, strengths, fallback: false }),
            Err(FuzzyError::NoFiring) => Ok(Inference { value: self.output.midpoint(), strengths, fallback: true }),
            Err(e) => Err(e),
        }
    }

    /// Convenience wrapper over [`infer`](Self::infer) taking `(name, value)` pairs.
    pub fn infer_with(&self, inputs: &[(&str, f64)]) -> Result<Inference, FuzzyError> {
        let map = inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        self.infer(&map)
    }
}

/// All invariant violations of `system`; empty means the system is usable.
pub fn validate_system(system: &FuzzySystem) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut names = BTreeSet::new();
    for var in system.inputs.iter().chain(std::iter::once(&system.output)) {
        out.extend(var.violations());
        if !names.insert(var.name.as_str()) {
            out.push(Violation::DuplicateVariable(var.name.clone()));
        }
    }
    if system.grid_points < MIN_GRID_POINTS {
        out.push(Violation::GridPoints(system.grid_points));
    }
    for (i, rule) in system.rules.iter().enumerate() {
        if rule.antecedents.is_empty() {
            out.push(Violation::EmptyAntecedent { rule: i });
        }
        for (var, label) in &rule.antecedents {
            match system.input(var) {
                None => out.push(Violation::UnknownVariable { rule: i, variable: var.clone() }),
                Some(v) if v.get(label).is_none() => {
                    out.push(Violation::UnknownLabel { rule: i, variable: var.clone(), label: label.clone() })
                }
                Some(_) => {}
            }
        }
        let (var, label) = &rule.consequent;
        if *var != system.output.name {
            out.push(Violation::UnknownVariable { rule: i, variable: var.clone() });
        } else if system.output.get(label).is_none() {
            out.push(Violation::UnknownLabel { rule: i, variable: var.clone(), label: label.clone() });
        }
    }
    out
}
