//! Checks run over a simulated stream: squared-Euclidean proximity between
//! the output and each intermediate stream, an ordinary least-squares fit of
//! the output on everything else, and per-class summaries.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::sim::LabeledDataset;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("streams differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need more rows ({rows}) than regressors ({regressors})")]
    InsufficientRows { rows: usize, regressors: usize },
    #[error("design matrix is rank deficient; dependent columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),
    #[error("dataset is empty")]
    Empty,
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Median; the mean of the two middle values for an even count.
pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// `Σ (a_i - b_i)^2`.
pub fn stream_sq_distance(a: &[f64], b: &[f64]) -> Result<f64, AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionResult {
    pub intercept: f64,
    /// One entry per regressor, in input order.
    pub coefficients: Vec<(String, f64)>,
    pub r_squared: f64,
    pub rows: usize,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.coefficients.iter().find(|(n, _)| n == name).map(|(_, c)| *c)
    }

    /// Regressor with the largest absolute coefficient.
    pub fn dominant(&self) -> Option<&str> {
        self.coefficients.iter().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).map(|(n, _)| n.as_str())
    }
}

/// Least squares of `y` on `columns` plus an intercept, solved through a
/// QR factorisation of the design matrix.
///
/// A constant `y` has no variance to explain: the fit then reports zero
/// coefficients, the mean as intercept and `R² = 0`.
pub fn ols_fit(columns: &[(String, Vec<f64>)], y: &[f64]) -> Result<RegressionResult, AnalysisError> {
    let n = y.len();
    let p = columns.len();
    if n <= p {
        return Err(AnalysisError::InsufficientRows { rows: n, regressors: p });
    }
    for (_, c) in columns {
        if c.len() != n {
            return Err(AnalysisError::LengthMismatch(c.len(), n));
        }
    }
    let design = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { columns[j - 1].1[i] });
    let qr = design.clone().qr();
    let r = qr.r();

    let dependent: Vec<String> = (0..=p)
        .filter(|&j| {
            let norm = design.column(j).norm();
            norm == 0.0 || r[(j, j)].abs() <= 1e-9 * norm
        })
        .map(|j| if j == 0 { "intercept".to_string() } else { columns[j - 1].0.clone() })
        .collect();
    if !dependent.is_empty() {
        return Err(AnalysisError::RankDeficient(dependent));
    }

    let y_mean = mean(y).expect("n > p >= 0 rows");
    let ss_tot: f64 = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum();
    if ss_tot == 0.0 {
        return Ok(RegressionResult {
            intercept: y_mean,
            coefficients: columns.iter().map(|(name, _)| (name.clone(), 0.0)).collect(),
            r_squared: 0.0,
            rows: n,
        });
    }

    let target = DVector::from_column_slice(y);
    let qty = qr.q().transpose() * &target;
    let beta = r.solve_upper_triangular(&qty).expect("full column rank checked above");
    let residual = &target - &design * &beta;
    let ss_res = residual.norm_squared();
    Ok(RegressionResult {
        intercept: beta[0],
        coefficients: columns.iter().enumerate().map(|(j, (name, _))| (name.clone(), beta[j + 1])).collect(),
        r_squared: (1.0 - ss_res / ss_tot).clamp(0.0, 1.0),
        rows: n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSummary {
    pub label: String,
    pub count: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryReport {
    pub count: usize,
    /// Sorted by label; unlabelled rows appear under `unlabelled`.
    pub classes: Vec<ClassSummary>,
    pub mean: f64,
    pub median: f64,
}

impl SummaryReport {
    pub fn class(&self, label: &str) -> Option<&ClassSummary> {
        self.classes.iter().find(|c| c.label == label)
    }
}

pub fn summarize(ds: &LabeledDataset) -> Result<SummaryReport, AnalysisError> {
    let outputs = ds.outputs();
    let (mean_all, median_all) = match (mean(&outputs), median(&outputs)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(AnalysisError::Empty),
    };
    let mut groups: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for row in &ds.rows {
        let entry = groups.entry(row.label.as_deref().unwrap_or("unlabelled")).or_default();
        entry.0 += 1;
        entry.1 += row.output;
    }
    Ok(SummaryReport {
        count: outputs.len(),
        classes: groups
            .into_iter()
            .map(|(label, (count, sum))| ClassSummary { label: label.to_string(), count, mean: sum / count as f64 })
            .collect(),
        mean: mean_all,
        median: median_all,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Proximity {
    /// Column the distances are measured from (the output stream).
    pub target: String,
    pub distances: Vec<(String, f64)>,
}

impl Proximity {
    pub fn distance(&self, column: &str) -> Option<f64> {
        self.distances.iter().find(|(c, _)| c == column).map(|(_, d)| *d)
    }
}

/// Squared distance from the output stream to every intermediate stage stream.
pub fn stream_proximity(ds: &LabeledDataset) -> Proximity {
    let target = ds.stages.last().map(|s| format!("{s}_out")).unwrap_or_default();
    let out = ds.outputs();
    let distances = ds.stages[..ds.stages.len().saturating_sub(1)]
        .iter()
        .map(|s| {
            let col = format!("{s}_out");
            let stream = ds.column(&col).expect("stage column exists");
            (col, stream_sq_distance(&out, &stream).expect("same dataset"))
        })
        .collect();
    Proximity { target, distances }
}

/// Everything [`analyze`] measures about one run. The regression explains
/// the output by all sensors plus the intermediate stages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub proximity: Proximity,
    pub regression: Option<RegressionResult>,
    /// Why the regression was skipped, when it was.
    pub regression_note: Option<String>,
    pub summary: SummaryReport,
}

pub fn analyze(ds: &LabeledDataset) -> Result<AnalysisReport, AnalysisError> {
    let summary = summarize(ds)?;
    let proximity = stream_proximity(ds);
    let regressors: Vec<(String, Vec<f64>)> = ds
        .feature_names()
        .into_iter()
        .filter(|c| *c != proximity.target)
        .map(|c| {
            let col = ds.column(&c).expect("feature column exists");
            (c, col)
        })
        .collect();
    let (regression, regression_note) = match ols_fit(&regressors, &ds.outputs()) {
        Ok(r) => (Some(r), None),
        Err(e @ (AnalysisError::InsufficientRows { .. } | AnalysisError::RankDeficient(_))) => {
            (None, Some(format!("regression skipped: {e}")))
        }
        Err(e) => return Err(e),
    };
    Ok(AnalysisReport { proximity, regression, regression_note, summary })
}

impl fmt::Display for SummaryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows: {}", self.count)?;
        for c in &self.classes {
            let pct = 100.0 * c.count as f64 / self.count as f64;
            writeln!(f, "  class {:<15} {:>5} ({:>5.1}%)  mean {:.4}", c.label, c.count, pct, c.mean)?;
        }
        write!(f, "output mean {:.4}, median {:.4}", self.mean, self.median)
    }
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "stream proximity (squared Euclidean from {}):", self.proximity.target)?;
        for (c, d) in &self.proximity.distances {
            writeln!(f, "  {c:<20} {d:.4}")?;
        }
        match (&self.regression, &self.regression_note) {
            (Some(r), _) => {
                writeln!(f, "regression of {} ({} rows):", self.proximity.target, r.rows)?;
                writeln!(f, "  {:<20} {:+.5}", "intercept", r.intercept)?;
                for (n, c) in &r.coefficients {
                    writeln!(f, "  {n:<20} {c:+.5}")?;
                }
                writeln!(f, "  R^2 = {:.4}", r.r_squared)?;
            }
            (None, Some(note)) => writeln!(f, "{note}")?,
            (None, None) => {}
        }
        write!(f, "{}", self.summary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Row;
    use proptest::prelude::*;

    fn col(name: &str, v: &[f64]) -> (String, Vec<f64>) {
        (name.to_string(), v.to_vec())
    }

    #[test]
    fn sq_distance() {
        assert_eq!(stream_sq_distance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(stream_sq_distance(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 5.0);
        assert_eq!(stream_sq_distance(&[1.0], &[1.0, 2.0]), Err(AnalysisError::LengthMismatch(1, 2)));
    }

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let fit = ols_fit(&[col("x", &x)], &y).unwrap();
        assert!((fit.coefficient("x").unwrap() - 2.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_target() {
        let fit = ols_fit(&[col("x", &[1.0, 2.0, 3.0])], &[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(fit.r_squared, 0.0);
        assert_eq!(fit.coefficient("x"), Some(0.0));
        assert_eq!(fit.intercept, 4.0);
    }

    #[test]
    fn rank_deficiency_names_columns() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b: Vec<f64> = a.iter().map(|v| 3.0 * v).collect();
        let err = ols_fit(&[col("a", &a), col("b", &b)], &[1.0, 3.0, 2.0, 5.0]).unwrap_err();
        assert_eq!(err, AnalysisError::RankDeficient(vec!["b".into()]));
        let flat = ols_fit(&[col("c", &[2.0; 4])], &[1.0, 3.0, 2.0, 5.0]).unwrap_err();
        assert_eq!(flat, AnalysisError::RankDeficient(vec!["c".into()]));
        assert!(matches!(
            ols_fit(&[col("a", &[1.0]), col("b", &[2.0])], &[1.0]),
            Err(AnalysisError::InsufficientRows { rows: 1, regressors: 2 })
        ));
    }

    fn labelled(outputs: &[f64], labels: &[&str]) -> LabeledDataset {
        let mut ds = LabeledDataset::new(vec!["s".into()], vec!["a".into(), "out".into()]);
        for (i, (o, l)) in outputs.iter().zip(labels).enumerate() {
            ds.rows.push(Row {
                time: i as f64,
                sensors: vec![i as f64],
                stages: vec![o + 1.0, *o],
                output: *o,
                label: Some(l.to_string()),
            });
        }
        ds
    }

    #[test]
    fn summary() {
        let s = summarize(&labelled(&[4.0, 4.0, 6.0, 6.0], &["0", "0", "2", "2"])).unwrap();
        assert_eq!(s.count, 4);
        assert_eq!(s.class("0").unwrap().mean, 4.0);
        assert_eq!(s.class("2").unwrap().mean, 6.0);
        assert_eq!((s.mean, s.median), (5.0, 5.0));

        let one = summarize(&labelled(&[3.25], &["1"])).unwrap();
        assert_eq!((one.mean, one.median), (3.25, 3.25));
        assert_eq!(summarize(&labelled(&[], &[])), Err(AnalysisError::Empty));
    }

    #[test]
    fn short_datasets_skip_regression() {
        let report = analyze(&labelled(&[4.0, 6.0], &["0", "2"])).unwrap();
        assert!(report.regression.is_none());
        assert!(report.regression_note.unwrap().contains("skipped"));
        assert_eq!(report.proximity.distance("a_out"), Some(2.0));
    }

    proptest! {
        #[test]
        fn residuals_orthogonal_to_regressors(
            data in proptest::collection::vec((-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64), 8..40)
        ) {
            let a: Vec<f64> = data.iter().map(|d| d.0).collect();
            let b: Vec<f64> = data.iter().map(|d| d.1).collect();
            let y: Vec<f64> = data.iter().map(|d| d.0 * 0.5 - d.1 + d.2).collect();
            let cols = vec![col("a", &a), col("b", &b)];
            let fit = match ols_fit(&cols, &y) {
                Ok(f) => f,
                Err(AnalysisError::RankDeficient(_)) => return Ok(()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            let resid: Vec<f64> = (0..y.len())
                .map(|i| y[i] - fit.intercept - fit.coefficients[0].1 * a[i] - fit.coefficients[1].1 * b[i])
                .collect();
            for c in [&vec![1.0; y.len()], &a, &b] {
                let dot: f64 = c.iter().zip(&resid).map(|(x, r)| x * r).sum();
                prop_assert!(dot.abs() < 1e-8, "dot {dot}");
            }
            prop_assert!((0.0..=1.0).contains(&fit.r_squared));
        }

        #[test]
        fn sq_distance_is_symmetric(v in proptest::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 0..30)) {
            let a: Vec<f64> = v.iter().map(|p| p.0).collect();
            let b: Vec<f64> = v.iter().map(|p| p.1).collect();
            let d = stream_sq_distance(&a, &b).unwrap();
            prop_assert_eq!(d, stream_sq_distance(&b, &a).unwrap());
            prop_assert!(d >= 0.0);
            prop_assert_eq!(d == 0.0, a == b);
        }

        #[test]
        fn summary_counts_ignore_order(mut outs in proptest::collection::vec(1.0..10.0f64, 1..30)) {
            let labels: Vec<String> = outs.iter().map(|o| crate::arch::classify_takeover(*o).to_string()).collect();
            let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            let a = summarize(&labelled(&outs, &refs)).unwrap();
            outs.reverse();
            let mut rl = refs.clone();
            rl.reverse();
            let b = summarize(&labelled(&outs, &rl)).unwrap();
            let counts = |s: &SummaryReport| s.classes.iter().map(|c| (c.label.clone(), c.count)).collect::<Vec<_>>();
            prop_assert_eq!(counts(&a), counts(&b));
            prop_assert_eq!(a.classes.iter().map(|c| c.count).sum::<usize>(), a.count);
        }
    }
}
