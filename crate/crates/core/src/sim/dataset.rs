use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::SimError;

/// One simulation step.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub time: f64,
    /// Aligned with [`LabeledDataset::sensors`].
    pub sensors: Vec<f64>,
    /// Aligned with [`LabeledDataset::stages`]; the last entry is the output.
    pub stages: Vec<f64>,
    pub output: f64,
    pub label: Option<String>,
}

/// Time-ordered simulation rows with their column names.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledDataset {
    pub sensors: Vec<String>,
    /// Stage names; the terminal stage is last.
    pub stages: Vec<String>,
    pub rows: Vec<Row>,
}

impl LabeledDataset {
    pub fn new(sensors: Vec<String>, stages: Vec<String>) -> Self {
        LabeledDataset { sensors, stages, rows: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Column names in CSV order (without `time` and `class`).
    pub fn feature_names(&self) -> Vec<String> {
        self.sensors.iter().cloned().chain(self.stages.iter().map(|s| format!("{s}_out"))).collect()
    }

    pub fn header(&self) -> String {
        let mut cols = vec!["time".to_string()];
        cols.extend(self.feature_names());
        cols.push("class".into());
        cols.join(",")
    }

    /// Values of a named column (`time`, a sensor or `<stage>_out`).
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        if name == "time" {
            return Some(self.rows.iter().map(|r| r.time).collect());
        }
        if let Some(i) = self.sensors.iter().position(|s| s == name) {
            return Some(self.rows.iter().map(|r| r.sensors[i]).collect());
        }
        let stage = name.strip_suffix("_out")?;
        let i = self.stages.iter().position(|s| s == stage)?;
        Some(self.rows.iter().map(|r| r.stages[i]).collect())
    }

    pub fn outputs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.output).collect()
    }

    pub fn labels(&self) -> Vec<Option<&str>> {
        self.rows.iter().map(|r| r.label.as_deref()).collect()
    }

    /// Writes the CSV form: header plus one LF-terminated line per row,
    /// numbers with six significant digits. Returns the row count.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<usize, SimError> {
        writeln!(out, "{}", self.header())?;
        for row in &self.rows {
            let mut line = format_sig(row.time, 6);
            for v in row.sensors.iter().chain(&row.stages) {
                line.push(',');
                line.push_str(&format_sig(*v, 6));
            }
            line.push(',');
            line.push_str(row.label.as_deref().unwrap_or(""));
            writeln!(out, "{line}")?;
        }
        out.flush()?;
        Ok(self.rows.len())
    }

    pub fn export_csv(&self, path: impl AsRef<Path>) -> Result<usize, SimError> {
        self.write_csv(BufWriter::new(File::create(path)?))
    }

    /// Parses the CSV form. Stage columns are recognised by their `_out`
    /// suffix; everything between `time` and the first of them is a sensor.
    pub fn read_csv<R: Read>(input: R) -> Result<Self, SimError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header_err = |message: String| SimError::Parse { line: 1, message };
        let headers =
            reader.headers().map_err(|e| header_err(e.to_string()))?.iter().map(str::to_string).collect::<Vec<_>>();
        if headers.len() < 4 || headers[0] != "time" || headers[headers.len() - 1] != "class" {
            return Err(header_err(format!(
                "expected `time,<sensors>,<stage>_out...,class`, got `{}`",
                headers.join(",")
            )));
        }
        let middle = &headers[1..headers.len() - 1];
        let first_stage = middle
            .iter()
            .position(|h| h.ends_with("_out"))
            .ok_or_else(|| header_err("no `<stage>_out` columns".into()))?;
        if first_stage == 0 {
            return Err(header_err("no sensor columns before the stage outputs".into()));
        }
        if middle[first_stage..].iter().any(|h| !h.ends_with("_out")) {
            return Err(header_err("sensor columns must come before the stage outputs".into()));
        }
        let sensors = middle[..first_stage].to_vec();
        let stages = middle[first_stage..].iter().map(|h| h.trim_end_matches("_out").to_string()).collect::<Vec<_>>();

        let mut ds = LabeledDataset::new(sensors, stages);
        let n_sensors = ds.sensors.len();
        for record in reader.records() {
            let record = record
                .map_err(|e| SimError::Parse { line: e.position().map_or(0, |p| p.line()), message: e.to_string() })?;
            let line = record.position().map_or(0, |p| p.line());
            let num = |i: usize| -> Result<f64, SimError> {
                let field = &record[i];
                field.trim().parse::<f64>().map_err(|_| SimError::Parse {
                    line,
                    message: format!("column `{}`: `{field}` is not a number", headers[i]),
                })
            };
            let time = num(0)?;
            let sensors = (1..=n_sensors).map(num).collect::<Result<Vec<_>, _>>()?;
            let stages = (n_sensors + 1..headers.len() - 1).map(num).collect::<Result<Vec<_>, _>>()?;
            let label = record[headers.len() - 1].trim();
            ds.rows.push(Row {
                time,
                output: *stages.last().expect("at least one stage column"),
                sensors,
                stages,
                label: (!label.is_empty()).then(|| label.to_string()),
            });
        }
        Ok(ds)
    }

    pub fn import_csv(path: impl AsRef<Path>) -> Result<Self, SimError> {
        Self::read_csv(File::open(path)?)
    }
}

/// `printf("%.*g")`-style rendering: `digits` significant digits, trailing
/// zeros dropped, exponent form outside `1e-4 <= |v| < 10^digits`.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
