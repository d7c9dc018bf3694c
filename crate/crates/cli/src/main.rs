use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use autometric::analysis::{analyze, summarize};
use autometric::arch::{classify_takeover, EthicsArchitecture};
use autometric::config::{builtin, ArchitectureConfig, ConfigError, RunManifest, BUILTINS};
use autometric::nnge::{default_features, examples_from_dataset, kfold_eval, train, NngeError};
use autometric::sim::{
    run_simulation, LabeledDataset, Labeling, SignalGenerator, SimError, SimulationSchedule, Waveform,
};
use autometric::sim::{DILEMMA_STEPS, TAKEOVER_STEPS};
use clap::{Parser, Subcommand};
use serde_json::json;

const GRID_ENV: &str = "AUTOMETRIC_GRID_POINTS";

#[derive(Parser)]
#[command(name = "autometric", version, about = "Fuzzy machine-ethics reasoners, simulation and rule induction")]
struct Cli {
    /// Defuzzification grid size (overrides AUTOMETRIC_GRID_POINTS).
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an architecture once: `eval takeover --distance 8 --lane 9 --speed 90`.
    Eval {
        /// Built-in name (takeover, dilemma) or path to a JSON config.
        arch: String,
        /// Sensor readings as `--name value` or `name=value`.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "SENSORS")]
        readings: Vec<String>,
    },
    /// Run a fixed-step simulation and write the labelled CSV plus a manifest.
    Simulate {
        arch: String,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value = "triangle")]
        waveform: Waveform,
        #[arg(long)]
        duration: Option<f64>,
        /// Per-channel cycle count, `channel=value`; repeatable.
        #[arg(long, value_name = "CH=V")]
        cycles: Vec<String>,
        /// Per-channel signal minimum, `channel=value`; repeatable.
        #[arg(long, value_name = "CH=V")]
        min: Vec<String>,
        /// Per-channel signal maximum, `channel=value`; repeatable.
        #[arg(long, value_name = "CH=V")]
        max: Vec<String>,
        /// Output CSV (default `<arch name>.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Manifest path (default `<out>.manifest.json`).
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Learn NNge interval rules from a labelled CSV.
    Induce {
        csv: PathBuf,
        /// Comma-separated feature columns (default: sensors and intermediate stages).
        #[arg(long, value_delimiter = ',')]
        features: Vec<String>,
        #[arg(long, default_value_t = 2)]
        min_covered: usize,
        /// Also run k-fold cross-validation.
        #[arg(long)]
        kfold: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Report stream proximity and a regression fit for a simulation CSV.
    Analyze {
        csv: PathBuf,
        /// Also write a plotting CSV with speed scaled by 0.1.
        #[arg(long)]
        plot_data: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Check a built-in or JSON architecture and list every problem.
    Validate { arch: String },
    /// Write a built-in architecture as JSON.
    ExportConfig {
        builtin: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Validation(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Validation(m) | Failure::Io(m) => m,
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io(e) => Failure::Io(e.to_string()),
            e => Failure::Validation(e.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Io(e) => Failure::Io(e.to_string()),
            e => Failure::Validation(e.to_string()),
        }
    }
}

impl From<NngeError> for Failure {
    fn from(e: NngeError) -> Self {
        match e {
            NngeError::UnknownFeature(_) | NngeError::InvalidFolds { .. } => Failure::Usage(e.to_string()),
            e => Failure::Validation(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let _ = out.flush();
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli, out: &mut impl Write) -> Result<(), Failure> {
    let grid = grid_points(cli.grid_points)?;
    let w = |e: std::io::Error| Failure::Io(e.to_string());
    match cli.command {
        Command::Eval { arch, readings } => {
            let (arch, labeling) = resolve(&arch, grid)?;
            let readings = parse_readings(arch.sensors(), &readings)?;
            let trace = arch.evaluate(&readings).map_err(|e| Failure::Validation(e.to_string()))?;
            for (name, v) in &trace.sensors {
                writeln!(out, "{name:<12} {v}").map_err(w)?;
            }
            for s in &trace.stages {
                let note = if s.fallback { "  (no rule fired)" } else { "" };
                writeln!(out, "{:<12} {:.6}{note}", format!("{}_out", s.name), s.value).map_err(w)?;
            }
            writeln!(out, "output       {:.6}", trace.output).map_err(w)?;
            if labeling == Labeling::Takeover {
                writeln!(out, "class        {}", classify_takeover(trace.output)).map_err(w)?;
            }
        }
        Command::Simulate { arch, steps, waveform, duration, cycles, min, max, out: csv, manifest } => {
            let (arch, labeling) = resolve(&arch, grid)?;
            let schedule = build_schedule(&arch, waveform, steps, duration, &cycles, &min, &max)?;
            let mut ds = run_simulation(&arch, &schedule)?;
            let median = labeling.apply(&mut ds)?;
            let csv = csv.unwrap_or_else(|| PathBuf::from(format!("{}.csv", arch.name())));
            ds.export_csv(&csv).map_err(|e| io_failure(&csv, e))?;
            let manifest_path = manifest.unwrap_or_else(|| PathBuf::from(format!("{}.manifest.json", csv.display())));
            let record = RunManifest {
                tool: "autometric".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                architecture: ArchitectureConfig::from_architecture(&arch, Some(labeling)),
                grid_points: arch.terminal().system.grid_points,
                schedule,
                rows: ds.len(),
                output: csv.display().to_string(),
                class_counts: class_counts(&ds),
                median,
            };
            record.save(&manifest_path).map_err(|e| io_failure(&manifest_path, e))?;
            writeln!(out, "wrote {} rows to {}", ds.len(), csv.display()).map_err(w)?;
            writeln!(out, "manifest: {}", manifest_path.display()).map_err(w)?;
            let summary = summarize(&ds).map_err(|e| Failure::Validation(e.to_string()))?;
            writeln!(out, "{summary}").map_err(w)?;
            if let Some(m) = median {
                writeln!(out, "labelling median {m:.6}").map_err(w)?;
            }
        }
        Command::Induce { csv, features, min_covered, kfold, seed, json } => {
            let ds = load_dataset(&csv)?;
            let features = if features.is_empty() { default_features(&ds) } else { features };
            let examples = examples_from_dataset(&ds, &features)?;
            let model = train(&examples, &features)?;
            let accuracy = model.accuracy(&examples)?;
            let cv = kfold.map(|k| kfold_eval(&examples, &features, k, seed)).transpose()?;
            let rules = model.extract_rules(min_covered);
            if json {
                let doc = json!({
                    "features": features,
                    "exemplars": model.exemplars.len(),
                    "training_accuracy": accuracy,
                    "rules": rules,
                    "cross_validation": cv,
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json")).map_err(w)?;
            } else {
                writeln!(out, "features: {}", features.join(", ")).map_err(w)?;
                writeln!(
                    out,
                    "{} exemplars, training accuracy {:.2}%; {} rules cover at least {min_covered} examples",
                    model.exemplars.len(),
                    accuracy * 100.0,
                    rules.len()
                )
                .map_err(w)?;
                for r in &rules {
                    writeln!(out, "{r}").map_err(w)?;
                }
                if let Some(cv) = cv {
                    for (i, f) in cv.folds.iter().enumerate() {
                        writeln!(out, "fold {}: {}/{} ({:.2}%)", i + 1, f.correct, f.size, f.accuracy * 100.0)
                            .map_err(w)?;
                    }
                    writeln!(out, "{}-fold mean accuracy {:.2}%", cv.folds.len(), cv.mean_accuracy * 100.0)
                        .map_err(w)?;
                }
            }
        }
        Command::Analyze { csv, plot_data, json } => {
            let ds = load_dataset(&csv)?;
            let report = analyze(&ds).map_err(|e| Failure::Validation(e.to_string()))?;
            if let Some(path) = plot_data {
                plot_dataset(&ds).export_csv(&path).map_err(|e| io_failure(&path, e))?;
            }
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("json")).map_err(w)?;
            } else {
                writeln!(out, "{report}").map_err(w)?;
            }
        }
        Command::Validate { arch } => {
            let (arch, _) = resolve(&arch, grid)?;
            writeln!(
                out,
                "ok: `{}` with {} stages, sensors [{}], terminal stage `{}`",
                arch.name(),
                arch.stages().len(),
                arch.sensors().join(", "),
                arch.terminal().name()
            )
            .map_err(w)?;
        }
        Command::ExportConfig { builtin: name, out: path } => {
            let (arch, labeling) = builtin(&name).ok_or_else(|| {
                Failure::Usage(format!("unknown built-in `{name}` (expected {})", BUILTINS.join(", ")))
            })?;
            let cfg = ArchitectureConfig::from_architecture(&arch, Some(labeling));
            match path {
                Some(p) => cfg.save(&p).map_err(|e| io_failure(&p, e))?,
                None => writeln!(out, "{}", cfg.to_json()).map_err(w)?,
            }
        }
    }
    Ok(())
}

fn grid_points(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(GRID_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("{GRID_ENV}=`{v}` is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

/// A built-in name, or a path to a JSON config.
fn resolve(name_or_path: &str, grid: Option<usize>) -> Result<(EthicsArchitecture, Labeling), Failure> {
    let (arch, labeling) = match builtin(name_or_path) {
        Some(found) => found,
        None => {
            let path = Path::new(name_or_path);
            if !path.exists() {
                return Err(Failure::Io(format!(
                    "`{name_or_path}` is neither a built-in ({}) nor an existing file",
                    BUILTINS.join(", ")
                )));
            }
            let cfg = ArchitectureConfig::load(path).map_err(|e| match e {
                ConfigError::Io(e) => io_failure(path, e),
                e => Failure::Validation(format!("{}: {e}", path.display())),
            })?;
            let labeling = cfg.labeling.clone().unwrap_or_default();
            (cfg.build().map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?, labeling)
        }
    };
    let arch = match grid {
        Some(n) => arch.with_grid_points(n).map_err(|e| Failure::Usage(e.to_string()))?,
        None => arch,
    };
    Ok((arch, labeling))
}

fn parse_readings(sensors: &[String], args: &[String]) -> Result<BTreeMap<String, f64>, Failure> {
    let mut pairs = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        if let Some((k, v)) = arg.trim_start_matches("--").split_once('=') {
            pairs.push((k.to_string(), v.to_string()));
        } else if let Some(k) = arg.strip_prefix("--") {
            let v = it.next().ok_or_else(|| Failure::Usage(format!("`--{k}` needs a value")))?;
            pairs.push((k.to_string(), v.clone()));
        } else {
            return Err(Failure::Usage(format!("unexpected argument `{arg}`; use `--sensor value`")));
        }
    }
    let mut readings = BTreeMap::new();
    for (k, v) in pairs {
        if !sensors.contains(&k) {
            return Err(Failure::Usage(format!("unknown sensor `{k}` (expected {})", sensors.join(", "))));
        }
        let x: f64 = v.parse().map_err(|_| Failure::Usage(format!("sensor `{k}`: `{v}` is not a number")))?;
        readings.insert(k, x);
    }
    if let Some(missing) = sensors.iter().find(|s| !readings.contains_key(*s)) {
        return Err(Failure::Usage(format!("missing value for sensor `{missing}`")));
    }
    Ok(readings)
}

fn channel_values(args: &[String], flag: &str, sensors: &[String]) -> Result<BTreeMap<String, f64>, Failure> {
    let mut map = BTreeMap::new();
    for a in args {
        let (k, v) =
            a.split_once('=').ok_or_else(|| Failure::Usage(format!("--{flag} expects `channel=value`, got `{a}`")))?;
        if !sensors.iter().any(|s| s == k) {
            return Err(Failure::Usage(format!("--{flag}: unknown channel `{k}`")));
        }
        let x = v.parse().map_err(|_| Failure::Usage(format!("--{flag}: `{v}` is not a number")))?;
        map.insert(k.to_string(), x);
    }
    Ok(map)
}

/// Canonical schedules for the built-in sensor sets; for anything else each
/// sensor sweeps the range of the input it feeds, channel i running 2^i cycles.
fn build_schedule(
    arch: &EthicsArchitecture,
    waveform: Waveform,
    steps: Option<usize>,
    duration: Option<f64>,
    cycles: &[String],
    min: &[String],
    max: &[String],
) -> Result<SimulationSchedule, Failure> {
    let sensors = arch.sensors();
    let cycles = channel_values(cycles, "cycles", sensors)?;
    let min = channel_values(min, "min", sensors)?;
    let max = channel_values(max, "max", sensors)?;
    let usage = |e: SimError| Failure::Usage(e.to_string());

    let (base, default_steps) = if sensors == ["distance", "lane", "speed"] {
        (SimulationSchedule::takeover(waveform, 2).map_err(usage)?, TAKEOVER_STEPS)
    } else if sensors == ["straight", "swerve", "pedestrian"] {
        (SimulationSchedule::dilemma(waveform, 2).map_err(usage)?, DILEMMA_STEPS)
    } else {
        let mut gens = Vec::new();
        for (i, s) in sensors.iter().enumerate() {
            let var = arch
                .stages()
                .iter()
                .find_map(|st| {
                    st.sources
                        .iter()
                        .position(|src| *src == autometric::arch::Source::Sensor(s.clone()))
                        .map(|j| &st.system.inputs[j])
                })
                .expect("validated architectures read every sensor");
            let g =
                SignalGenerator::new(waveform, var.lo, var.hi, f64::from(1u32 << i.min(20)), 10.0).map_err(usage)?;
            gens.push((s.clone(), g));
        }
        (SimulationSchedule::new(gens, 10.0, 2).map_err(usage)?, TAKEOVER_STEPS)
    };
    let duration = duration.unwrap_or(base.duration);
    let mut gens = Vec::new();
    for (name, g) in base.generators {
        let g = SignalGenerator::new(
            waveform,
            *min.get(&name).unwrap_or(&g.min),
            *max.get(&name).unwrap_or(&g.max),
            *cycles.get(&name).unwrap_or(&g.cycles),
            duration,
        )
        .map_err(usage)?;
        gens.push((name, g));
    }
    SimulationSchedule::new(gens, duration, steps.unwrap_or(default_steps)).map_err(usage)
}

fn load_dataset(path: &Path) -> Result<LabeledDataset, Failure> {
    LabeledDataset::import_csv(path).map_err(|e| match e {
        SimError::Io(e) => io_failure(path, e),
        e => Failure::Validation(format!("{}: {e}", path.display())),
    })
}

fn class_counts(ds: &LabeledDataset) -> Vec<(String, usize)> {
    let mut counts: Vec<(String, usize)> = Vec::new();
    for label in ds.labels().into_iter().flatten() {
        match counts.iter_mut().find(|(l, _)| l == label) {
            Some(entry) => entry.1 += 1,
            None => counts.push((label.to_string(), 1)),
        }
    }
    counts
}

/// Copy for plotting: speed shares the 0..10 axis with the other channels.
fn plot_dataset(ds: &LabeledDataset) -> LabeledDataset {
    let mut plot = ds.clone();
    if let Some(i) = plot.sensors.iter().position(|s| s == "speed") {
        plot.sensors[i] = "speed_x0.1".into();
        for row in &mut plot.rows {
            row.sensors[i] *= 0.1;
        }
    }
    plot
}
