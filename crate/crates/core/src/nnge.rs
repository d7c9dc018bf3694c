//! Nearest neighbour with generalisation.
//!
//! Examples are read one at a time. Each becomes part of a same-class
//! hyperrectangle when the nearest exemplar has its class and can be grown
//! to cover it without swallowing an already seen example of another class;
//! otherwise it becomes a point exemplar. A hyperrectangle of another class
//! that contains a new example is cut back along one axis, and the members
//! it loses are re-added as their own exemplar. After training no
//! hyperrectangle contains a training example of a different class, so
//! every training example is classified correctly.
//!
//! Distances are Euclidean over per-feature gaps to the box, each gap
//! divided by that feature's range in the training data.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::sim::{format_sig, LabeledDataset};

#[derive(Debug, Error, PartialEq)]
pub enum NngeError {
    #[error("no training examples")]
    Empty,
    #[error("model has no exemplars")]
    EmptyModel,
    #[error("feature `{0}` has zero width in the training data")]
    ZeroWidthRange(String),
    #[error("examples {first} and {second} have identical features but classes `{first_class}` and `{second_class}`")]
    Conflict { first: usize, second: usize, first_class: String, second_class: String },
    #[error("expected {expected} feature values, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("row {0} has no class label")]
    Unlabelled(usize),
    #[error("unknown feature column `{0}`")]
    UnknownFeature(String),
    #[error("k must satisfy 2 <= k <= {n} (got {k})")]
    InvalidFolds { k: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: Vec<f64>,
    pub class: String,
}

/// Axis-aligned box of closed intervals carrying a class. A point exemplar
/// has `lo == hi` on every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperrectangle {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub class: String,
    /// Training examples inside, by index.
    members: Vec<usize>,
}

impl Hyperrectangle {
    pub fn point(x: &[f64], class: &str, index: usize) -> Self {
        Hyperrectangle { lo: x.to_vec(), hi: x.to_vec(), class: class.to_string(), members: vec![index] }
    }

    pub fn from_bounds(lo: Vec<f64>, hi: Vec<f64>, class: &str, covered: usize) -> Self {
        Hyperrectangle { lo, hi, class: class.to_string(), members: (0..covered).collect() }
    }

    pub fn covered(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    fn extended(&self, x: &[f64]) -> Self {
        let mut h = self.clone();
        for (i, v) in x.iter().enumerate() {
            h.lo[i] = h.lo[i].min(*v);
            h.hi[i] = h.hi[i].max(*v);
        }
        h
    }

    fn bounding(points: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
        let dim = points[0].len();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in points {
            for i in 0..dim {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        (lo, hi)
    }

    fn volume(lo: &[f64], hi: &[f64], widths: &[f64]) -> f64 {
        lo.iter().zip(hi).zip(widths).map(|((l, h), w)| (h - l) / w).product()
    }
}

/// Range-normalised distance from `x` to the nearest point of `h`; zero iff
/// `x` lies inside.
///
/// ```
/// use autometric::nnge::{exemplar_distance, Hyperrectangle};
/// let h = Hyperrectangle::from_bounds(vec![1.0], vec![3.0], "a", 1);
/// assert!((exemplar_distance(&[5.0], &h, &[(0.0, 10.0)]).unwrap() - 0.2).abs() < 1e-12);
/// ```
pub fn exemplar_distance(x: &[f64], h: &Hyperrectangle, ranges: &[(f64, f64)]) -> Result<f64, NngeError> {
    if x.len() != ranges.len() || h.lo.len() != ranges.len() {
        return Err(NngeError::Dimension { expected: ranges.len(), got: x.len() });
    }
    let mut sum = 0.0;
    for (i, v) in x.iter().enumerate() {
        let width = ranges[i].1 - ranges[i].0;
        if width <= 0.0 {
            return Err(NngeError::ZeroWidthRange(format!("#{i}")));
        }
        let gap = if *v < h.lo[i] {
            h.lo[i] - v
        } else if *v > h.hi[i] {
            v - h.hi[i]
        } else {
            0.0
        };
        let d = gap / width;
        sum += d * d;
    }
    Ok(sum.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NngeModel {
    pub features: Vec<String>,
    /// `(min, max)` per feature over the training data.
    pub ranges: Vec<(f64, f64)>,
    /// In insertion order; nearest-exemplar ties go to the earliest.
    pub exemplars: Vec<Hyperrectangle>,
    pub classes: Vec<String>,
}

impl NngeModel {
    fn widths(&self) -> Vec<f64> {
        self.ranges.iter().map(|(lo, hi)| hi - lo).collect()
    }

    /// Index of the nearest exemplar.
    pub fn nearest(&self, x: &[f64]) -> Result<usize, NngeError> {
        if x.len() != self.features.len() {
            return Err(NngeError::Dimension { expected: self.features.len(), got: x.len() });
        }
        match self.exemplars.len() {
            0 => return Err(NngeError::EmptyModel),
            1 => return Ok(0),
            _ => {}
        }
        let mut best = (0, f64::INFINITY);
        for (i, h) in self.exemplars.iter().enumerate() {
            let d = exemplar_distance(x, h, &self.ranges).map_err(|e| self.named(e))?;
            if d < best.1 {
                best = (i, d);
            }
        }
        Ok(best.0)
    }

    pub fn classify(&self, x: &[f64]) -> Result<&str, NngeError> {
        Ok(&self.exemplars[self.nearest(x)?].class)
    }

    /// Fraction of `examples` classified correctly.
    pub fn accuracy(&self, examples: &[Example]) -> Result<f64, NngeError> {
        if examples.is_empty() {
            return Err(NngeError::Empty);
        }
        let mut correct = 0;
        for ex in examples {
            if self.classify(&ex.features)? == ex.class {
                correct += 1;
            }
        }
        Ok(correct as f64 / examples.len() as f64)
    }

    /// One rule per exemplar covering at least `min_covered` examples,
    /// most-covering first.
    pub fn extract_rules(&self, min_covered: usize) -> Vec<IntervalRule> {
        let mut rules: Vec<IntervalRule> = self
            .exemplars
            .iter()
            .filter(|h| h.covered() >= min_covered)
            .map(|h| IntervalRule {
                intervals: self.features.iter().enumerate().map(|(i, f)| (f.clone(), h.lo[i], h.hi[i])).collect(),
                class: h.class.clone(),
                covered: h.covered(),
            })
            .collect();
        rules.sort_by_key(|r| std::cmp::Reverse(r.covered));
        rules
    }

    fn named(&self, e: NngeError) -> NngeError {
        match e {
            NngeError::ZeroWidthRange(tag) => {
                let i: usize = tag.trim_start_matches('#').parse().unwrap_or(0);
                NngeError::ZeroWidthRange(self.features.get(i).cloned().unwrap_or(tag))
            }
            e => e,
        }
    }
}

/// Learns a model from `examples`, processed in order.
pub fn train(examples: &[Example], features: &[String]) -> Result<NngeModel, NngeError> {
    if examples.is_empty() {
        return Err(NngeError::Empty);
    }
    let dim = features.len();
    for ex in examples {
        if ex.features.len() != dim {
            return Err(NngeError::Dimension { expected: dim, got: ex.features.len() });
        }
    }
    check_conflicts(examples)?;

    let (lo, hi) = Hyperrectangle::bounding(&examples.iter().map(|e| e.features.as_slice()).collect::<Vec<_>>());
    let ranges: Vec<(f64, f64)> = lo.into_iter().zip(hi).collect();
    if examples.len() > 1 {
        if let Some(i) = ranges.iter().position(|(l, h)| h <= l) {
            return Err(NngeError::ZeroWidthRange(features[i].clone()));
        }
    }
    let mut classes: Vec<String> = examples.iter().map(|e| e.class.clone()).collect();
    classes.sort();
    classes.dedup();

    let mut model = NngeModel { features: features.to_vec(), ranges, exemplars: Vec::new(), classes };
    let widths = model.widths();

    for (idx, ex) in examples.iter().enumerate() {
        let x = ex.features.as_slice();
        if model.exemplars.is_empty() {
            model.exemplars.push(Hyperrectangle::point(x, &ex.class, idx));
            continue;
        }
        let nearest = model.nearest(x)?;
        let h = &model.exemplars[nearest];
        if h.class == ex.class {
            if h.contains(x) {
                model.exemplars[nearest].members.push(idx);
            } else {
                let grown = h.extended(x);
                if admits_other_class(&grown, &examples[..idx]) {
                    model.exemplars.push(Hyperrectangle::point(x, &ex.class, idx));
                } else {
                    model.exemplars[nearest] = grown;
                    model.exemplars[nearest].members.push(idx);
                }
            }
        } else {
            model.exemplars.push(Hyperrectangle::point(x, &ex.class, idx));
        }

        // No box of another class may keep the new example inside it.
        let offenders: Vec<usize> = model
            .exemplars
            .iter()
            .enumerate()
            .filter(|(_, h)| h.class != ex.class && h.contains(x))
            .map(|(i, _)| i)
            .collect();
        for k in offenders {
            let orphans = shrink(&mut model.exemplars[k], x, examples, &widths);
            if !orphans.is_empty() {
                readd(&mut model.exemplars, orphans, examples, &examples[..=idx]);
            }
        }
    }
    Ok(model)
}

fn check_conflicts(examples: &[Example]) -> Result<(), NngeError> {
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    for (i, ex) in examples.iter().enumerate() {
        // +0.0 and -0.0 are the same point
        let key: Vec<u64> = ex.features.iter().map(|v| (v + 0.0).to_bits()).collect();
        if let Some(&j) = seen.get(&key) {
            if examples[j].class != ex.class {
                return Err(NngeError::Conflict {
                    first: j,
                    second: i,
                    first_class: examples[j].class.clone(),
                    second_class: ex.class.clone(),
                });
            }
        } else {
            seen.insert(key, i);
        }
    }
    Ok(())
}

fn admits_other_class(h: &Hyperrectangle, seen: &[Example]) -> bool {
    seen.iter().any(|e| e.class != h.class && h.contains(&e.features))
}

/// Cuts `h` along one axis so that it excludes `x`. Returns the member
/// indices that fell outside the cut.
///
/// Candidates are "keep the members below x" and "keep the members above x"
/// on every axis. The cut losing the least normalised volume wins; ties go
/// to the cut keeping more members, then to the lowest axis, then to the
/// lower side.
fn shrink(h: &mut Hyperrectangle, x: &[f64], examples: &[Example], widths: &[f64]) -> Vec<usize> {
    let before = Hyperrectangle::volume(&h.lo, &h.hi, widths);
    let mut best: Option<(f64, usize, usize, bool, Vec<usize>, f64)> = None;
    for axis in 0..x.len() {
        for below in [true, false] {
            let kept: Vec<usize> = h
                .members
                .iter()
                .copied()
                .filter(|&m| {
                    let v = examples[m].features[axis];
                    if below {
                        v < x[axis]
                    } else {
                        v > x[axis]
                    }
                })
                .collect();
            let (lost, bound) = if kept.is_empty() {
                (before, f64::NAN)
            } else {
                let vals = kept.iter().map(|&m| examples[m].features[axis]);
                let bound =
                    if below { vals.fold(f64::NEG_INFINITY, f64::max) } else { vals.fold(f64::INFINITY, f64::min) };
                let (mut lo, mut hi) = (h.lo.clone(), h.hi.clone());
                if below {
                    hi[axis] = bound
                } else {
                    lo[axis] = bound
                }
                (before - Hyperrectangle::volume(&lo, &hi, widths), bound)
            };
            let better = match &best {
                None => true,
                Some((b_lost, b_kept, ..)) => lost < *b_lost || (lost == *b_lost && kept.len() > *b_kept),
            };
            if better {
                best = Some((lost, kept.len(), axis, below, kept, bound));
            }
        }
    }
    let (_, _, axis, below, kept, bound) = best.expect("at least one axis");
    let orphans: Vec<usize> = h.members.iter().copied().filter(|m| !kept.contains(m)).collect();
    if kept.is_empty() {
        // Only reachable for a box whose members all coincide with x on
        // every axis, which the conflict check rules out; keep the box
        // inert anyway.
        h.members.clear();
        h.lo.iter_mut().for_each(|v| *v = f64::INFINITY);
        h.hi.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
    } else {
        if below {
            h.hi[axis] = bound
        } else {
            h.lo[axis] = bound
        }
        h.members = kept;
    }
    orphans
}

/// Re-adds examples cut out of a box: as one box when their bounding box is
/// free of other-class examples, otherwise one point each.
fn readd(exemplars: &mut Vec<Hyperrectangle>, orphans: Vec<usize>, examples: &[Example], seen: &[Example]) {
    let class = examples[orphans[0]].class.clone();
    let points: Vec<&[f64]> = orphans.iter().map(|&m| examples[m].features.as_slice()).collect();
    let (lo, hi) = Hyperrectangle::bounding(&points);
    let merged = Hyperrectangle { lo, hi, class, members: orphans.clone() };
    if admits_other_class(&merged, seen) {
        for m in orphans {
            exemplars.push(Hyperrectangle::point(&examples[m].features, &examples[m].class, m));
        }
    } else {
        exemplars.push(merged);
    }
}

/// Interval rule read off one hyperrectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRule {
    /// `(feature, lo, hi)` in feature order.
    pub intervals: Vec<(String, f64, f64)>,
    pub class: String,
    pub covered: usize,
}

impl IntervalRule {
    pub fn interval(&self, feature: &str) -> Option<(f64, f64)> {
        self.intervals.iter().find(|(f, ..)| f == feature).map(|(_, lo, hi)| (*lo, *hi))
    }
}

impl fmt::Display for IntervalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("IF ")?;
        for (i, (name, lo, hi)) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            if lo == hi {
                write!(f, "({name} = {})", rule_number(*lo))?;
            } else {
                write!(f, "({} ≤ {name} ≤ {})", rule_number(*lo), rule_number(*hi))?;
            }
        }
        write!(f, " THEN class {} [covers {}]", self.class, self.covered)
    }
}

/// Three significant digits, at least one decimal: 5.0, 8.04, 66.1.
fn rule_number(v: f64) -> String {
    let s = format_sig(v, 3);
    if s.contains('.') || s.contains('e') {
        s
    } else {
        format!("{s}.0")
    }
}

impl Serialize for IntervalRule {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        struct Intervals<'a>(&'a [(String, f64, f64)]);
        impl Serialize for Intervals<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.len()))?;
                for (name, lo, hi) in self.0 {
                    map.serialize_entry(name, &[lo, hi])?;
                }
                map.end()
            }
        }
        let mut map = serializer.serialize_map(Some(3))?;
        map.serialize_entry("intervals", &Intervals(&self.intervals))?;
        map.serialize_entry("class", &self.class)?;
        map.serialize_entry("covered", &self.covered)?;
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub size: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValidation {
    pub folds: Vec<FoldResult>,
    /// Mean of the per-fold accuracies.
    pub mean_accuracy: f64,
}

/// Seeded k-fold cross-validation: shuffle, cut into k contiguous folds,
/// train on the other k-1 (in original order) and test on the held-out one.
pub fn kfold_eval(
    examples: &[Example],
    features: &[String],
    k: usize,
    seed: u64,
) -> Result<CrossValidation, NngeError> {
    let n = examples.len();
    if k < 2 || n < k {
        return Err(NngeError::InvalidFolds { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = n / k + usize::from(f < n % k);
        let test = &order[start..start + size];
        let mut train_idx: Vec<usize> = order[..start].iter().chain(&order[start + size..]).copied().collect();
        train_idx.sort_unstable();
        let train_set: Vec<Example> = train_idx.iter().map(|&i| examples[i].clone()).collect();
        let model = train(&train_set, features)?;
        let mut correct = 0;
        for &i in test {
            if model.classify(&examples[i].features)? == examples[i].class {
                correct += 1;
            }
        }
        folds.push(FoldResult { size, correct, accuracy: correct as f64 / size as f64 });
        start += size;
    }
    let mean_accuracy = folds.iter().map(|f| f.accuracy).sum::<f64>() / k as f64;
    Ok(CrossValidation { folds, mean_accuracy })
}

/// Feature columns used by default: every sensor and every stage output
/// except the final one (which the labels are derived from).
pub fn default_features(ds: &LabeledDataset) -> Vec<String> {
    let mut f = ds.feature_names();
    f.pop();
    f
}

pub fn examples_from_dataset(ds: &LabeledDataset, features: &[String]) -> Result<Vec<Example>, NngeError> {
    let columns = features
        .iter()
        .map(|f| ds.column(f).ok_or_else(|| NngeError::UnknownFeature(f.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    ds.rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let class = row.label.clone().ok_or(NngeError::Unlabelled(i))?;
            Ok(Example { features: columns.iter().map(|c| c[i]).collect(), class })
        })
        .collect()
}
