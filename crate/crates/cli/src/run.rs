//! Subcommand implementations: load, compute, write files, print a summary.
//!
//! File outputs are deterministic: identical argv and identical input files
//! produce byte-identical CSV/JSON/SVG. Anything run-dependent (timing)
//! goes to stdout only.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tiltsweep_core::dataset::{CsvSchema, Task};
use tiltsweep_core::harness::{self, ClassifierChoice, RegressorLaw};
use tiltsweep_core::plot::{self, Series};
use tiltsweep_core::projection;
use tiltsweep_core::stress::{self};
use tiltsweep_core::sweep::{self, Cell};
use tiltsweep_core::{SolverOptions, StressSpec, SweepConfig, SweepResult, TestSet};

use crate::args::*;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Dataset(#[from] tiltsweep_core::dataset::DatasetError),
    #[error(transparent)]
    Projection(#[from] tiltsweep_core::projection::ProjectionError),
    #[error(transparent)]
    Stress(#[from] tiltsweep_core::stress::StressError),
    #[error(transparent)]
    Sweep(#[from] tiltsweep_core::sweep::SweepError),
    #[error(transparent)]
    Harness(#[from] tiltsweep_core::harness::HarnessError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FATAL: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Clone, Copy)]
struct Formats {
    csv: bool,
    json: bool,
    svg: bool,
}

fn parse_formats(spec: &str) -> Result<Formats, CliError> {
    let mut f = Formats {
        csv: false,
        json: false,
        svg: false,
    };
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "csv" => f.csv = true,
            "json" => f.json = true,
            "svg" => f.svg = true,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown format '{other}' (expected a subset of csv,json,svg)"
                )))
            }
        }
    }
    if !(f.csv || f.json || f.svg) {
        return Err(CliError::Usage("no output format selected".to_string()));
    }
    Ok(f)
}

fn parse_name_list(spec: &str) -> Vec<String> {
    spec.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(String::from)
        .collect()
}

fn parse_f64_list(spec: &str, what: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("cannot parse '{p}' in --{what}")))
        })
        .collect()
}

fn load_input(args: &InputArgs) -> Result<TestSet, CliError> {
    if let TaskArg::Multiclass = args.task {
        let classes = args.classes.unwrap_or(0);
        if classes < 2 {
            return Err(CliError::Usage(
                "--classes must be at least 2 for multiclass tasks".to_string(),
            ));
        }
    }
    let schema = CsvSchema {
        prediction_column: args.pred.clone(),
        truth_column: args.truth.clone(),
        task: args.task(),
    };
    Ok(TestSet::load_csv(&args.input, &schema)?)
}

fn resolve_variables(
    ts: &TestSet,
    spec: Option<&str>,
) -> Result<Option<Vec<usize>>, CliError> {
    match spec {
        None => Ok(None),
        Some(raw) => {
            let names = parse_name_list(raw);
            let mut indices = Vec::new();
            for name in &names {
                match ts.feature_index(name) {
                    Some(idx) => indices.push(idx),
                    None => {
                        return Err(CliError::Usage(format!(
                            "unknown variable '{name}'; available: {}",
                            ts.feature_names().join(", ")
                        )))
                    }
                }
            }
            Ok(Some(indices))
        }
    }
}

fn resolve_grid(grid: &GridArgs) -> Result<Vec<f64>, CliError> {
    match &grid.taus {
        Some(raw) => parse_f64_list(raw, "taus"),
        None => {
            if grid.grid_points < 2 {
                return Err(CliError::Usage(
                    "--grid-points must be at least 2".to_string(),
                ));
            }
            Ok(sweep::default_tau_grid(grid.grid_points))
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Effective configuration echoed into every run directory.
#[derive(Debug, Serialize)]
struct ConfigEcho {
    command: String,
    input: Option<PathBuf>,
    prediction_column: Option<String>,
    truth_column: Option<String>,
    task: Option<Task>,
    tau_grid: Option<Vec<f64>>,
    alpha: Option<f64>,
    variables: Option<Vec<String>>,
    indicators: Option<Vec<String>>,
    rates: Option<String>,
    formats: String,
    extra: serde_json::Value,
}

impl ConfigEcho {
    fn new(command: &str, formats: &str) -> Self {
        Self {
            command: command.to_string(),
            input: None,
            prediction_column: None,
            truth_column: None,
            task: None,
            tau_grid: None,
            alpha: None,
            variables: None,
            indicators: None,
            rates: None,
            formats: formats.to_string(),
            extra: serde_json::Value::Null,
        }
    }

    fn with_input(mut self, args: &InputArgs) -> Self {
        self.input = Some(args.input.clone());
        self.prediction_column = Some(args.pred.clone());
        self.truth_column = Some(args.truth.clone());
        self.task = Some(args.task());
        self
    }
}

fn print_sweep_summary(res: &SweepResult, files: &[PathBuf], verbose: u8) {
    println!(
        "dataset: n={} p={} task={}",
        res.n, res.p, res.task
    );
    println!(
        "grid: {} taus in [{}, {}], alpha={}",
        res.tau_grid.len(),
        res.tau_grid.first().unwrap(),
        res.tau_grid.last().unwrap(),
        res.alpha
    );
    for var in &res.variables {
        let kls: Vec<f64> = var
            .cells
            .iter()
            .filter_map(|c| match c {
                Cell::Solved { kl, .. } => Some(*kl),
                Cell::Skipped { .. } => None,
            })
            .collect();
        let kl_range = if kls.is_empty() {
            "-".to_string()
        } else {
            let lo = kls.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = kls.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            format!("{lo:.3e} .. {hi:.3e}")
        };
        println!(
            "  {:<16} solved {:>3}  skipped {:>3}  max_iter {:>3}  kl {}",
            var.name, var.solved, var.skipped, var.max_iterations, kl_range
        );
        for w in &var.warnings {
            println!("    warning: {w}");
        }
        if verbose > 0 {
            for cell in &var.cells {
                match cell {
                    Cell::Solved {
                        tau,
                        kl,
                        xi,
                        iterations,
                        residual,
                        ..
                    } => println!(
                        "    tau={tau:+.3}  kl={kl:.6e}  xi={xi:?}  iters={iterations}  residual={residual:.2e}"
                    ),
                    Cell::Skipped { tau, reason } => {
                        println!("    tau={tau:+.3}  skipped: {reason}")
                    }
                }
            }
        }
    }
    println!("elapsed: {:.3} s", res.elapsed.as_secs_f64());
    print_written(files);
}

fn print_written(files: &[PathBuf]) {
    let listed: Vec<String> = files.iter().map(|f| f.display().to_string()).collect();
    println!("wrote: {}", listed.join(" "));
}

fn sweep_exit(res: &SweepResult) -> i32 {
    if res.total_skipped() > 0 {
        EXIT_PARTIAL
    } else {
        EXIT_OK
    }
}

fn indicator_series(res: &SweepResult, name: &str) -> Vec<Series> {
    res.variables
        .iter()
        .map(|var| Series {
            label: var.name.clone(),
            points: var
                .cells
                .iter()
                .filter_map(|c| {
                    c.value(name)
                        .map(|v| (c.tau(), v))
                })
                .collect(),
        })
        .collect()
}

fn write_sweep_outputs(
    res: &SweepResult,
    out: &Path,
    formats: Formats,
    echo: &ConfigEcho,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(out)?;
    let mut files = Vec::new();

    let config_path = out.join("config.json");
    write_json(&config_path, echo)?;
    files.push(config_path);

    if formats.csv {
        let mut buf = Vec::new();
        res.write_long_csv(&mut buf)?;
        let path = out.join("sweep.csv");
        fs::write(&path, buf)?;
        files.push(path);
    }
    if formats.json {
        let path = out.join("sweep.json");
        write_json(&path, res)?;
        files.push(path);
    }
    if formats.svg {
        let plots = out.join("plots");
        fs::create_dir_all(&plots)?;
        for name in &res.indicator_names {
            let series = indicator_series(res, name);
            let svg = plot::line_chart(name, "tau", name, &series);
            let path = plots.join(format!("{name}.svg"));
            fs::write(&path, svg)?;
            files.push(path);
        }
    }
    Ok(files)
}

pub fn cmd_sweep(args: &SweepArgs, verbose: u8) -> Result<i32, CliError> {
    let formats = parse_formats(&args.output.formats)?;
    let ts = load_input(&args.input)?;
    let variables = resolve_variables(&ts, args.vars.as_deref())?;
    let cfg = SweepConfig {
        tau_grid: resolve_grid(&args.grid)?,
        alpha: args.grid.alpha,
        variables,
        indicators: args.indicators.as_deref().map(parse_name_list),
        rates: args.rates.into(),
        parallel: true,
        solver: SolverOptions::default(),
    };
    let res = sweep::sweep(&ts, &cfg)?;

    let mut echo = ConfigEcho::new("sweep", &args.output.formats).with_input(&args.input);
    echo.tau_grid = Some(res.tau_grid.clone());
    echo.alpha = Some(res.alpha);
    echo.variables = Some(res.variables.iter().map(|v| v.name.clone()).collect());
    echo.indicators = Some(res.indicator_names.clone());
    echo.rates = Some(res.rates.to_string());

    let files = write_sweep_outputs(&res, &args.output.out, formats, &echo)?;
    print_sweep_summary(&res, &files, verbose);
    Ok(sweep_exit(&res))
}

#[derive(Debug, Serialize)]
struct RocPointJson {
    tau: f64,
    fpr: f64,
    tpr: f64,
}

#[derive(Debug, Serialize)]
struct RocSkipJson {
    tau: f64,
    reason: String,
}

#[derive(Debug, Serialize)]
struct RocVariableJson {
    name: String,
    points: Vec<RocPointJson>,
    skipped: Vec<RocSkipJson>,
}

pub fn cmd_roc(args: &RocArgs, verbose: u8) -> Result<i32, CliError> {
    let formats = parse_formats(&args.output.formats)?;
    let ts = load_input(&args.input)?;
    if ts.task() != Task::Binary {
        return Err(CliError::Sweep(sweep::SweepError::TaskMismatch {
            expected: "binary".to_string(),
            actual: ts.task().to_string(),
        }));
    }
    let variables = resolve_variables(&ts, args.vars.as_deref())?;
    let cfg = SweepConfig {
        tau_grid: resolve_grid(&args.grid)?,
        alpha: args.grid.alpha,
        variables,
        indicators: None,
        rates: args.rates.into(),
        parallel: true,
        solver: SolverOptions::default(),
    };
    let res = sweep::sweep(&ts, &cfg)?;

    let roc_vars: Vec<RocVariableJson> = res
        .variables
        .iter()
        .map(|var| {
            let mut points = Vec::new();
            let mut skipped = Vec::new();
            for cell in &var.cells {
                match cell {
                    Cell::Solved { tau, .. } => points.push(RocPointJson {
                        tau: *tau,
                        fpr: cell.value("fpr").expect("binary sweep has fpr"),
                        tpr: cell.value("tpr").expect("binary sweep has tpr"),
                    }),
                    Cell::Skipped { tau, reason } => skipped.push(RocSkipJson {
                        tau: *tau,
                        reason: reason.clone(),
                    }),
                }
            }
            RocVariableJson {
                name: var.name.clone(),
                points,
                skipped,
            }
        })
        .collect();

    fs::create_dir_all(&args.output.out)?;
    let mut files = Vec::new();

    let mut echo = ConfigEcho::new("roc", &args.output.formats).with_input(&args.input);
    echo.tau_grid = Some(res.tau_grid.clone());
    echo.alpha = Some(res.alpha);
    echo.variables = Some(res.variables.iter().map(|v| v.name.clone()).collect());
    echo.rates = Some(res.rates.to_string());
    let config_path = args.output.out.join("config.json");
    write_json(&config_path, &echo)?;
    files.push(config_path);

    if formats.csv {
        let mut text = String::from("variable,tau,fpr,tpr,skipped,reason\n");
        for var in &roc_vars {
            for p in &var.points {
                text.push_str(&format!(
                    "{},{},{},{},false,\n",
                    var.name, p.tau, p.fpr, p.tpr
                ));
            }
            for s in &var.skipped {
                text.push_str(&format!("{},{},,,true,{}\n", var.name, s.tau, s.reason));
            }
        }
        let path = args.output.out.join("roc.csv");
        fs::write(&path, text)?;
        files.push(path);
    }
    if formats.json {
        let path = args.output.out.join("roc.json");
        write_json(&path, &roc_vars)?;
        files.push(path);
    }
    if formats.svg {
        let series: Vec<Series> = roc_vars
            .iter()
            .map(|var| Series {
                label: var.name.clone(),
                points: var.points.iter().map(|p| (p.fpr, p.tpr)).collect(),
            })
            .collect();
        let svg = plot::line_chart("roc", "fpr", "tpr", &series);
        let path = args.output.out.join("roc.svg");
        fs::write(&path, svg)?;
        files.push(path);
    }

    print_sweep_summary(&res, &files, verbose);
    Ok(sweep_exit(&res))
}

pub fn cmd_weights(args: &WeightsArgs, _verbose: u8) -> Result<i32, CliError> {
    let formats = parse_formats(&args.output.formats)?;
    let ts = load_input(&args.input)?;
    let j0 = ts.feature_index(&args.var).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown variable '{}'; available: {}",
            args.var,
            ts.feature_names().join(", ")
        ))
    })?;

    let (constraint, description) = if let Some(cov_with) = &args.cov_with {
        let j1 = ts.feature_index(cov_with).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown variable '{cov_with}'; available: {}",
                ts.feature_names().join(", ")
            ))
        })?;
        let cov_target = args.cov_target.ok_or_else(|| {
            CliError::Usage("--cov-target is required with --cov-with".to_string())
        })?;
        let (m_i, m_j) = match &args.mean_targets {
            Some(raw) => {
                let parsed = parse_f64_list(raw, "mean-targets")?;
                if parsed.len() != 2 {
                    return Err(CliError::Usage(
                        "--mean-targets expects exactly two values".to_string(),
                    ));
                }
                (parsed[0], parsed[1])
            }
            None => (
                ts.column_stats(j0)?.mean,
                ts.column_stats(j1)?.mean,
            ),
        };
        let spec = projection::mean_cov_constraint(&ts, j0, j1, m_i, m_j, cov_target)?;
        let desc = format!(
            "mean+mean+covariance constraint on ({}, {}): means ({m_i}, {m_j}), cov {cov_target}",
            args.var, cov_with
        );
        (spec, desc)
    } else {
        let stats = ts.column_stats(j0)?;
        let target = match (args.tau, args.target) {
            (Some(tau), None) => {
                let spec = StressSpec {
                    variable: j0,
                    tau,
                    alpha: args.alpha,
                };
                stress::target_for_tau(&stats, &spec)?
            }
            (None, Some(t)) => t,
            (None, None) => {
                return Err(CliError::Usage(
                    "one of --tau or --target is required (or --cov-with)".to_string(),
                ))
            }
            (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
        };
        let spec = projection::mean_constraint(&ts, j0, target)?;
        let desc = format!("mean constraint on {}: target {target}", args.var);
        (spec, desc)
    };

    let weights = projection::solve_weights(&constraint, &SolverOptions::default())?;

    fs::create_dir_all(&args.output.out)?;
    let mut files = Vec::new();

    let mut echo =
        ConfigEcho::new("weights", &args.output.formats).with_input(&args.input);
    echo.alpha = Some(args.alpha);
    echo.variables = Some(vec![args.var.clone()]);
    echo.extra = serde_json::json!({
        "description": description,
        "target": constraint.target(),
        "labels": constraint.labels(),
    });
    let config_path = args.output.out.join("config.json");
    write_json(&config_path, &echo)?;
    files.push(config_path);

    if formats.csv {
        let mut buf = Vec::new();
        weights.write_csv(&mut buf)?;
        let path = args.output.out.join("weights.csv");
        fs::write(&path, buf)?;
        files.push(path);
    }
    if formats.json {
        let path = args.output.out.join("weights.json");
        write_json(&path, &weights)?;
        files.push(path);
    }

    println!("{description}");
    println!(
        "xi = {:?}  log_partition = {:.6e}  kl = {:.6e}",
        weights.dual.xi, weights.dual.log_partition, weights.kl
    );
    println!(
        "converged in {} iterations, residual {:.2e}; weights in ({:.3e}, {:.3e})",
        weights.dual.iterations,
        weights.dual.residual,
        weights.lambdas.iter().cloned().fold(f64::INFINITY, f64::min),
        weights.lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    print_written(&files);
    Ok(EXIT_OK)
}

pub fn cmd_scores(args: &ScoresArgs, _verbose: u8) -> Result<i32, CliError> {
    let formats = parse_formats(&args.output.formats)?;
    let text = fs::read_to_string(&args.sweep)?;
    let res: SweepResult = serde_json::from_str(&text)?;
    let table = sweep::score_table(&res, &args.indicator, args.from, args.to)?;

    fs::create_dir_all(&args.output.out)?;
    let mut files = Vec::new();

    let mut echo = ConfigEcho::new("scores", &args.output.formats);
    echo.indicators = Some(vec![args.indicator.clone()]);
    echo.extra = serde_json::json!({
        "sweep": args.sweep,
        "from": args.from,
        "to": args.to,
    });
    let config_path = args.output.out.join("config.json");
    write_json(&config_path, &echo)?;
    files.push(config_path);

    if formats.csv {
        let mut text = String::from("rank,variable,score,note\n");
        for (rank, row) in table.iter().enumerate() {
            text.push_str(&format!(
                "{},{},{},{}\n",
                rank + 1,
                row.variable,
                row.score.map(|s| s.to_string()).unwrap_or_default(),
                row.note.clone().unwrap_or_default().replace(',', ";"),
            ));
        }
        let path = args.output.out.join("scores.csv");
        fs::write(&path, text)?;
        files.push(path);
    }
    if formats.json {
        let path = args.output.out.join("scores.json");
        write_json(&path, &table)?;
        files.push(path);
    }

    println!(
        "{} change from tau={} to tau={}:",
        args.indicator, args.from, args.to
    );
    for row in &table {
        match (row.score, &row.note) {
            (Some(score), _) => println!("  {:<16} {score:+.6}", row.variable),
            (None, Some(note)) => println!("  {:<16} ({note})", row.variable),
            (None, None) => {}
        }
    }
    print_written(&files);
    Ok(EXIT_OK)
}

pub fn cmd_saturate(args: &SaturateArgs, verbose: u8) -> Result<i32, CliError> {
    let formats = parse_formats(&args.output.formats)?;
    let ts = load_input(&args.input)?;
    let variables = resolve_variables(&ts, args.vars.as_deref())?;
    let cfg = SweepConfig {
        tau_grid: vec![-1.0, 0.0, 1.0],
        alpha: args.alpha,
        variables,
        indicators: None,
        rates: args.rates.into(),
        parallel: true,
        solver: SolverOptions::default(),
    };
    let res = sweep::sweep(&ts, &cfg)?;
    let deltas = sweep::saturation_deltas(&res)?;

    fs::create_dir_all(&args.output.out)?;
    let mut files = Vec::new();

    let mut echo =
        ConfigEcho::new("saturate", &args.output.formats).with_input(&args.input);
    echo.tau_grid = Some(res.tau_grid.clone());
    echo.alpha = Some(res.alpha);
    echo.variables = Some(res.variables.iter().map(|v| v.name.clone()).collect());
    let config_path = args.output.out.join("config.json");
    write_json(&config_path, &echo)?;
    files.push(config_path);

    if formats.csv {
        let mut text = String::from("variable,class,p_base,delta_tau_plus,delta_tau_minus\n");
        for d in &deltas {
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                d.variable,
                d.class_id,
                d.base.map(|v| v.to_string()).unwrap_or_default(),
                d.delta_up.map(|v| v.to_string()).unwrap_or_default(),
                d.delta_down.map(|v| v.to_string()).unwrap_or_default(),
            ));
        }
        let path = args.output.out.join("saturate.csv");
        fs::write(&path, text)?;
        files.push(path);
    }
    if formats.json {
        #[derive(Serialize)]
        struct SaturateJson<'a> {
            deltas: &'a [sweep::SaturationDelta<f64>],
            skipped_cells: Vec<RocSkipJsonNamed>,
        }
        #[derive(Serialize)]
        struct RocSkipJsonNamed {
            variable: String,
            tau: f64,
            reason: String,
        }
        let mut skipped_cells = Vec::new();
        for var in &res.variables {
            for cell in &var.cells {
                if let Cell::Skipped { tau, reason } = cell {
                    skipped_cells.push(RocSkipJsonNamed {
                        variable: var.name.clone(),
                        tau: *tau,
                        reason: reason.clone(),
                    });
                }
            }
        }
        let path = args.output.out.join("saturate.json");
        write_json(
            &path,
            &SaturateJson {
                deltas: &deltas,
                skipped_cells,
            },
        )?;
        files.push(path);
    }

    print_sweep_summary(&res, &files, verbose);
    Ok(sweep_exit(&res))
}

pub fn cmd_synth(args: &SynthArgs, _verbose: u8) -> Result<i32, CliError> {
    let ts = match args.mode {
        SynthMode::Logistic => {
            let beta = parse_f64_list(&args.beta, "beta")?;
            if beta.is_empty() {
                return Err(CliError::Usage("--beta must not be empty".to_string()));
            }
            let spec = tiltsweep_core::SynthSpec {
                n: args.n,
                beta,
                seed: args.seed,
                law: match args.law {
                    LawArg::Uniform => RegressorLaw::Uniform01,
                    LawArg::Normal => RegressorLaw::StandardNormal,
                },
            };
            let classifier = match args.classifier {
                ClassifierArg::TrueModel => ClassifierChoice::TrueModel,
                ClassifierArg::Trained => ClassifierChoice::Trained,
            };
            harness::gen_logistic_with(&spec, classifier)?
        }
        SynthMode::Scaling => {
            let p = args.p.ok_or_else(|| {
                CliError::Usage("--p is required in scaling mode".to_string())
            })?;
            harness::gen_scaling(args.n, p, args.seed)?
        }
    };
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    ts.save_csv(&args.out)?;
    let positive_rate =
        ts.truths().iter().filter(|&&y| y == 1.0).count() as f64 / ts.n() as f64;
    println!(
        "generated n={} p={} seed={} positive_rate={positive_rate:.4}",
        ts.n(),
        ts.p(),
        args.seed
    );
    println!("wrote: {}", args.out.display());
    Ok(EXIT_OK)
}
