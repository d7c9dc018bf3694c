//! Single-system Mamdani inference. Rules fire with the minimum of their
//! clauses and clip their consequents; the clipped sets are joined with the
//! maximum and reduced to a crisp value by their centroid.

mod membership;
mod system;
mod variable;

use std::collections::BTreeMap;

use thiserror::Error;

pub use membership::{MembershipFunction, MfSpec, Shape};
pub use system::{validate_system, FuzzySystem, Inference, DEFAULT_GRID_POINTS, MIN_GRID_POINTS};
pub use variable::{FuzzyVariable, Rule, Term};

/// Degrees of one variable, keyed by term label.
pub type Degrees = BTreeMap<String, f64>;
/// Fuzzified inputs of a system, keyed by variable name.
pub type Fuzzified = BTreeMap<String, Degrees>;

#[derive(Debug, Error)]
pub enum FuzzyError {
    #[error("missing input for variable `{0}`")]
    MissingInput(String),
    #[error("input `{name}` is not finite ({value})")]
    NonFiniteInput { name: String, value: f64 },
    #[error("rule refers to unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("rule refers to unknown term `{label}` of variable `{variable}`")]
    UnknownLabel { variable: String, label: String },
    #[error("expected {expected} rule strengths, got {got}")]
    StrengthCount { expected: usize, got: usize },
    #[error("no rule fired; the aggregated output is empty")]
    NoFiring,
    #[error("invalid fuzzy system:\n{}", render_violations(.0))]
    Invalid(Vec<Violation>),
}

/// One broken invariant found while checking a variable or system.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("{shape} takes {expected} parameters, got {got}")]
    Arity { shape: Shape, expected: usize, got: usize },
    #[error("{owner}: {reason} (got {shape} {params:?})")]
    Parameters { owner: String, shape: Shape, params: Vec<f64>, reason: String },
    #[error("variable `{variable}`: range [{lo}, {hi}] must satisfy lo < hi")]
    Range { variable: String, lo: f64, hi: f64 },
    #[error("variable name must be nonempty")]
    EmptyName,
    #[error("variable `{0}` has no membership functions")]
    NoTerms(String),
    #[error("variable `{variable}` has an empty term label")]
    EmptyLabel { variable: String },
    #[error("variable `{variable}` repeats term label `{label}`")]
    DuplicateLabel { variable: String, label: String },
    #[error("variable name `{0}` is used more than once in the system")]
    DuplicateVariable(String),
    #[error("rule {rule} has no antecedents")]
    EmptyAntecedent { rule: usize },
    #[error("rule {rule} refers to unknown variable `{variable}`")]
    UnknownVariable { rule: usize, variable: String },
    #[error("rule {rule} refers to unknown term `{label}` of `{variable}`")]
    UnknownLabel { rule: usize, variable: String, label: String },
    #[error("grid_points must be at least {MIN_GRID_POINTS}, got {0}")]
    GridPoints(usize),
}

pub(crate) fn render_violations(v: &[Violation]) -> String {
    v.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n")
}
