use std::collections::BTreeSet;
use std::fmt;

use super::{Degrees, Fuzzified, FuzzyError, MembershipFunction, Violation};

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub label: String,
    pub mf: MembershipFunction,
}

/// A named crisp quantity with a universe `[lo, hi]` and its labelled
/// membership functions.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyVariable {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub terms: Vec<Term>,
}

impl FuzzyVariable {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        FuzzyVariable { name: name.into(), lo, hi, terms: Vec::new() }
    }

    pub fn term(mut self, label: impl Into<String>, mf: MembershipFunction) -> Self {
        self.terms.push(Term { label: label.into(), mf });
        self
    }

    pub fn get(&self, label: &str) -> Option<&MembershipFunction> {
        self.terms.iter().find(|t| t.label == label).map(|t| &t.mf)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    /// Degree of every term at `x`, after clamping `x` into the range.
    pub fn fuzzify(&self, x: f64) -> Degrees {
        let x = self.clamp(x);
        self.terms.iter().map(|t| (t.label.clone(), t.mf.eval(x))).collect()
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.name.is_empty() {
            out.push(Violation::EmptyName);
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            out.push(Violation::Range { variable: self.name.clone(), lo: self.lo, hi: self.hi });
        }
        if self.terms.is_empty() {
            out.push(Violation::NoTerms(self.name.clone()));
        }
        let mut seen = BTreeSet::new();
        for t in &self.terms {
            if t.label.is_empty() {
                out.push(Violation::EmptyLabel { variable: self.name.clone() });
            } else if !seen.insert(t.label.as_str()) {
                out.push(Violation::DuplicateLabel { variable: self.name.clone(), label: t.label.clone() });
            }
            out.extend(t.mf.violations(&format!("{}.{}", self.name, t.label)));
        }
        out
    }
}

/// `IF v1 IS l1 AND v2 IS l2 ... THEN out IS l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub antecedents: Vec<(String, String)>,
    pub consequent: (String, String),
}

impl Rule {
    pub fn new(antecedents: &[(&str, &str)], consequent: (&str, &str)) -> Self {
        Rule {
            antecedents: antecedents.iter().map(|(v, l)| (v.to_string(), l.to_string())).collect(),
            consequent: (consequent.0.to_string(), consequent.1.to_string()),
        }
    }

    /// Firing strength: the minimum antecedent degree.
    pub fn fire(&self, fuzzified: &Fuzzified) -> Result<f64, FuzzyError> {
        let mut strength = 1.0f64;
        for (var, label) in &self.antecedents {
            let degrees = fuzzified.get(var).ok_or_else(|| FuzzyError::UnknownVariable(var.clone()))?;
            let d = degrees
                .get(label)
                .ok_or_else(|| FuzzyError::UnknownLabel { variable: var.clone(), label: label.clone() })?;
            strength = strength.min(*d);
        }
        Ok(strength)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("IF ")?;
        for (i, (v, l)) in self.antecedents.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            write!(f, "{v} IS {l}")?;
        }
        write!(f, " THEN {} IS {}", self.consequent.0, self.consequent.1)
    }
}
