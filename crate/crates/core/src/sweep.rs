//! Grid sweeps: indicator curves over `(variable, tau)`, ROC point
//! sequences, score tables and saturation maps.
//!
//! Each variable is swept along its own tau chain, walking outward from
//! `tau = 0` so every solve warm-starts from its neighbour. A cell that
//! cannot be solved (inadmissible target, degenerate column, solver failure)
//! becomes a skip marker with the reason; neighbouring cells are unaffected.
//! Variables are independent, so chains may run in parallel — reductions are
//! in fixed index order and results are assembled by variable order, making
//! output identical for any thread count.

use std::io::{self, Write};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetError, Task, TestSet};
use crate::float::Float;
use crate::indicators::{self, IndicatorValues, RateConvention};
use crate::projection::{self, SolverOptions};
use crate::stress::{self, StressSpec};

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid tau grid: {reason}")]
    InvalidGrid { reason: String },
    #[error("variable index {index} out of range (p = {p})")]
    VariableOutOfRange { index: usize, p: usize },
    #[error("indicator '{name}' is not defined for a {task} task")]
    InvalidIndicator { name: String, task: String },
    #[error("tau {tau} is not on the sweep grid")]
    TauNotOnGrid { tau: f64 },
    #[error("indicator '{name}' absent from the sweep result")]
    IndicatorAbsent { name: String },
    #[error("operation requires a {expected} task, dataset is {actual}")]
    TaskMismatch { expected: String, actual: String },
    #[error("saturation maps need the exact grid {{-1, 0, 1}}")]
    NotSaturationGrid,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Sweep parameters: grid, anchors, variable and indicator selection.
#[derive(Debug, Clone)]
pub struct SweepConfig<F> {
    /// Stress levels; sorted, deduplicated and completed with the mandatory
    /// baseline point `0` before use.
    pub tau_grid: Vec<F>,
    pub alpha: F,
    /// Feature indices to sweep; `None` sweeps all.
    pub variables: Option<Vec<usize>>,
    /// Indicator names to report; `None` selects every indicator the task
    /// supports. The weighting's KL divergence is always reported.
    pub indicators: Option<Vec<String>>,
    pub rates: RateConvention,
    /// Sweep variables in parallel. Output is identical either way.
    pub parallel: bool,
    pub solver: SolverOptions<F>,
}

impl<F: Float> Default for SweepConfig<F> {
    fn default() -> Self {
        Self {
            tau_grid: default_tau_grid(21),
            alpha: F::c(0.05),
            variables: None,
            indicators: None,
            rates: RateConvention::Standard,
            parallel: true,
            solver: SolverOptions::default(),
        }
    }
}

/// `points` equally spaced stress levels from -1 to 1.
pub fn default_tau_grid<F: Float>(points: usize) -> Vec<F> {
    assert!(points >= 2, "grid needs at least two points");
    let last = F::from_count(points - 1);
    (0..points)
        .map(|i| -F::one() + F::c(2.0) * F::from_count(i) / last)
        .collect()
}

fn normalize_grid<F: Float>(grid: &[F]) -> Result<Vec<F>, SweepError> {
    if grid.is_empty() {
        return Err(SweepError::InvalidGrid {
            reason: "empty".to_string(),
        });
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(SweepError::InvalidGrid {
            reason: "non-finite tau".to_string(),
        });
    }
    if grid.iter().any(|&t| t < -F::one() || t > F::one()) {
        return Err(SweepError::InvalidGrid {
            reason: "tau outside [-1, 1]".to_string(),
        });
    }
    let mut g = grid.to_vec();
    g.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    g.dedup_by(|a, b| a == b);
    if !g.iter().any(|&t| t == F::zero()) {
        g.push(F::zero());
        g.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    }
    Ok(g)
}

/// One `(variable, tau)` grid cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: serde::Deserialize<'de>"
))]
pub enum Cell<F> {
    Solved {
        tau: F,
        indicators: IndicatorValues<F>,
        kl: F,
        xi: Vec<F>,
        iterations: usize,
        residual: F,
    },
    Skipped { tau: F, reason: String },
}

impl<F: Float> Cell<F> {
    pub fn tau(&self) -> F {
        match self {
            Cell::Solved { tau, .. } | Cell::Skipped { tau, .. } => *tau,
        }
    }

    pub fn is_solved(&self) -> bool {
        matches!(self, Cell::Solved { .. })
    }

    /// Value of a named indicator, with `kl` resolving to the weighting's
    /// KL divergence.
    pub fn value(&self, name: &str) -> Option<F> {
        match self {
            Cell::Solved { indicators, kl, .. } => {
                if name == "kl" {
                    Some(*kl)
                } else {
                    indicators.get(name)
                }
            }
            Cell::Skipped { .. } => None,
        }
    }
}

/// The tau chain of one variable.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: serde::Deserialize<'de>"
))]
pub struct VariableSweep<F> {
    pub index: usize,
    pub name: String,
    pub cells: Vec<Cell<F>>,
    pub warnings: Vec<String>,
    pub solved: usize,
    pub skipped: usize,
    pub max_iterations: usize,
}

/// Full sweep output: config echo plus one cell per `(variable, tau)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: serde::Deserialize<'de>"
))]
pub struct SweepResult<F> {
    pub task: Task,
    pub n: usize,
    pub p: usize,
    pub tau_grid: Vec<F>,
    pub alpha: F,
    pub rates: RateConvention,
    pub indicator_names: Vec<String>,
    pub variables: Vec<VariableSweep<F>>,
    /// Wall time of the sweep; in-memory only so that serialized results are
    /// byte-identical across runs.
    #[serde(skip, default)]
    pub elapsed: Duration,
}

impl<F: Float> SweepResult<F> {
    pub fn total_skipped(&self) -> usize {
        self.variables.iter().map(|v| v.skipped).sum()
    }

    /// Long-format CSV: `variable,tau,indicator,value,skipped,reason`.
    pub fn write_long_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "variable,tau,indicator,value,skipped,reason")?;
        for var in &self.variables {
            for cell in &var.cells {
                match cell {
                    Cell::Solved { tau, .. } => {
                        for name in &self.indicator_names {
                            let value = cell.value(name).expect("selected indicator present");
                            writeln!(
                                w,
                                "{},{},{},{},false,",
                                csv_field(&var.name),
                                tau,
                                name,
                                value
                            )?;
                        }
                    }
                    Cell::Skipped { tau, reason } => {
                        for name in &self.indicator_names {
                            writeln!(
                                w,
                                "{},{},{},,true,{}",
                                csv_field(&var.name),
                                tau,
                                name,
                                csv_field(reason)
                            )?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn resolve_variables<F: Float>(
    ts: &TestSet<F>,
    selection: &Option<Vec<usize>>,
) -> Result<Vec<usize>, SweepError> {
    match selection {
        None => Ok((0..ts.p()).collect()),
        Some(given) => {
            let mut out = Vec::new();
            for &j in given {
                if j >= ts.p() {
                    return Err(SweepError::VariableOutOfRange { index: j, p: ts.p() });
                }
                if !out.contains(&j) {
                    out.push(j);
                }
            }
            if out.is_empty() {
                return Err(SweepError::InvalidGrid {
                    reason: "empty variable selection".to_string(),
                });
            }
            Ok(out)
        }
    }
}

fn resolve_indicators<F: Float>(
    ts: &TestSet<F>,
    selection: &Option<Vec<String>>,
) -> Result<Vec<String>, SweepError> {
    let allowed = indicators::indicator_names(ts.task());
    let mut names = match selection {
        None => allowed.clone(),
        Some(sel) => {
            let mut out = Vec::new();
            for name in sel {
                if name != "kl" && !allowed.contains(name) {
                    return Err(SweepError::InvalidIndicator {
                        name: name.clone(),
                        task: ts.task().to_string(),
                    });
                }
                if !out.contains(name) {
                    out.push(name.clone());
                }
            }
            if out.is_empty() {
                return Err(SweepError::InvalidIndicator {
                    name: "(empty selection)".to_string(),
                    task: ts.task().to_string(),
                });
            }
            out
        }
    };
    if !names.iter().any(|n| n == "kl") {
        names.push("kl".to_string());
    }
    Ok(names)
}

fn solve_cell<F: Float>(
    ts: &TestSet<F>,
    stats: &crate::dataset::ColumnStats<F>,
    j0: usize,
    tau: F,
    cfg: &SweepConfig<F>,
    warm: Option<&Vec<F>>,
) -> Cell<F> {
    let spec = StressSpec {
        variable: j0,
        tau,
        alpha: cfg.alpha,
    };
    let target = match stress::target_for_tau(stats, &spec) {
        Ok(t) => t,
        Err(e) => {
            return Cell::Skipped {
                tau,
                reason: e.to_string(),
            }
        }
    };
    let constraint = match projection::mean_constraint(ts, j0, target) {
        Ok(c) => c,
        Err(e) => {
            return Cell::Skipped {
                tau,
                reason: e.to_string(),
            }
        }
    };
    let mut opts = cfg.solver.clone();
    opts.init = warm.cloned();
    let weights = match projection::solve_weights(&constraint, &opts) {
        Ok(w) => w,
        Err(e) => {
            return Cell::Skipped {
                tau,
                reason: e.to_string(),
            }
        }
    };
    let values = match indicators::evaluate(&weights, ts, cfg.rates) {
        Ok(v) => v,
        Err(e) => {
            return Cell::Skipped {
                tau,
                reason: e.to_string(),
            }
        }
    };
    Cell::Solved {
        tau,
        indicators: values,
        kl: weights.kl,
        xi: weights.dual.xi.clone(),
        iterations: weights.dual.iterations,
        residual: weights.dual.residual,
    }
}

fn run_variable<F: Float>(
    ts: &TestSet<F>,
    j0: usize,
    grid: &[F],
    cfg: &SweepConfig<F>,
) -> VariableSweep<F> {
    let stats = ts.column_stats(j0).expect("variable index validated");
    let warnings = stress::anchor_warnings(&stats, cfg.alpha);
    let zero_idx = grid
        .iter()
        .position(|&t| t == F::zero())
        .expect("normalized grid contains 0");

    let mut cells: Vec<Option<Cell<F>>> = vec![None; grid.len()];
    let baseline = solve_cell(ts, &stats, j0, grid[zero_idx], cfg, None);
    let baseline_xi = match &baseline {
        Cell::Solved { xi, .. } => Some(xi.clone()),
        Cell::Skipped { .. } => None,
    };
    cells[zero_idx] = Some(baseline);

    // Walk outward from tau = 0 so each solve warm-starts near its
    // neighbour's solution.
    let mut warm = baseline_xi.clone();
    for i in (zero_idx + 1)..grid.len() {
        let cell = solve_cell(ts, &stats, j0, grid[i], cfg, warm.as_ref());
        if let Cell::Solved { xi, .. } = &cell {
            warm = Some(xi.clone());
        }
        cells[i] = Some(cell);
    }
    warm = baseline_xi;
    for i in (0..zero_idx).rev() {
        let cell = solve_cell(ts, &stats, j0, grid[i], cfg, warm.as_ref());
        if let Cell::Solved { xi, .. } = &cell {
            warm = Some(xi.clone());
        }
        cells[i] = Some(cell);
    }

    let cells: Vec<Cell<F>> = cells.into_iter().map(|c| c.expect("filled")).collect();
    let solved = cells.iter().filter(|c| c.is_solved()).count();
    let skipped = cells.len() - solved;
    let max_iterations = cells
        .iter()
        .filter_map(|c| match c {
            Cell::Solved { iterations, .. } => Some(*iterations),
            Cell::Skipped { .. } => None,
        })
        .max()
        .unwrap_or(0);
    VariableSweep {
        index: j0,
        name: ts.feature_names()[j0].clone(),
        cells,
        warnings,
        solved,
        skipped,
        max_iterations,
    }
}

/// Sweep the configured variables over the tau grid.
pub fn sweep<F: Float>(ts: &TestSet<F>, cfg: &SweepConfig<F>) -> Result<SweepResult<F>, SweepError> {
    let started = Instant::now();
    let grid = normalize_grid(&cfg.tau_grid)?;
    let vars = resolve_variables(ts, &cfg.variables)?;
    let indicator_names = resolve_indicators(ts, &cfg.indicators)?;

    let variables: Vec<VariableSweep<F>> = if cfg.parallel {
        vars.par_iter()
            .map(|&j0| run_variable(ts, j0, &grid, cfg))
            .collect()
    } else {
        vars.iter()
            .map(|&j0| run_variable(ts, j0, &grid, cfg))
            .collect()
    };

    Ok(SweepResult {
        task: ts.task(),
        n: ts.n(),
        p: ts.p(),
        tau_grid: grid,
        alpha: cfg.alpha,
        rates: cfg.rates,
        indicator_names,
        variables,
        elapsed: started.elapsed(),
    })
}

/// One operating point of the weighted classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint<F> {
    pub tau: F,
    pub fpr: F,
    pub tpr: F,
}

/// ROC points for one variable: one `(fpr, tpr)` pair per admissible tau,
/// in grid order. The `tau = 0` pair is the unweighted operating point.
pub fn roc_sweep<F: Float>(
    ts: &TestSet<F>,
    j0: usize,
    cfg: &SweepConfig<F>,
) -> Result<Vec<RocPoint<F>>, SweepError> {
    if ts.task() != Task::Binary {
        return Err(SweepError::TaskMismatch {
            expected: "binary".to_string(),
            actual: ts.task().to_string(),
        });
    }
    if j0 >= ts.p() {
        return Err(SweepError::VariableOutOfRange { index: j0, p: ts.p() });
    }
    let grid = normalize_grid(&cfg.tau_grid)?;
    let run = run_variable(ts, j0, &grid, cfg);
    Ok(run
        .cells
        .iter()
        .filter_map(|cell| match cell {
            Cell::Solved { tau, indicators, .. } => match indicators {
                IndicatorValues::Binary { fpr, tpr, .. } => Some(RocPoint {
                    tau: *tau,
                    fpr: *fpr,
                    tpr: *tpr,
                }),
                _ => None,
            },
            Cell::Skipped { .. } => None,
        })
        .collect())
}

/// One row of a score table.
#[derive(Debug, Clone, Serialize)]
pub struct ScoreRow<F> {
    pub variable: String,
    /// `indicator(tau_b) - indicator(tau_a)`; absent when either endpoint
    /// was skipped.
    pub score: Option<F>,
    pub note: Option<String>,
}

fn grid_index<F: Float>(grid: &[F], tau: F) -> Result<usize, SweepError> {
    grid.iter()
        .position(|&g| (g - tau).abs() <= F::c(1e-12))
        .ok_or(SweepError::TauNotOnGrid {
            tau: tau.to_f64().unwrap_or(f64::NAN),
        })
}

/// Rank variables by how much an indicator moves between two grid points.
///
/// Variables whose endpoints were skipped are listed after the scored ones,
/// annotated with the reason instead of a score.
pub fn score_table<F: Float>(
    res: &SweepResult<F>,
    indicator: &str,
    tau_a: F,
    tau_b: F,
) -> Result<Vec<ScoreRow<F>>, SweepError> {
    if !res.indicator_names.iter().any(|n| n == indicator) {
        return Err(SweepError::IndicatorAbsent {
            name: indicator.to_string(),
        });
    }
    let ia = grid_index(&res.tau_grid, tau_a)?;
    let ib = grid_index(&res.tau_grid, tau_b)?;

    let mut scored: Vec<ScoreRow<F>> = Vec::new();
    let mut annotated: Vec<ScoreRow<F>> = Vec::new();
    for var in &res.variables {
        let a = &var.cells[ia];
        let b = &var.cells[ib];
        match (a.value(indicator), b.value(indicator)) {
            (Some(va), Some(vb)) => scored.push(ScoreRow {
                variable: var.name.clone(),
                score: Some(vb - va),
                note: None,
            }),
            _ => {
                let mut notes = Vec::new();
                for cell in [a, b] {
                    if let Cell::Skipped { tau, reason } = cell {
                        notes.push(format!("skipped at tau={tau}: {reason}"));
                    }
                }
                annotated.push(ScoreRow {
                    variable: var.name.clone(),
                    score: None,
                    note: Some(notes.join("; ")),
                });
            }
        }
    }
    scored.sort_by(|x, y| {
        y.score
            .partial_cmp(&x.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| x.variable.cmp(&y.variable))
    });
    annotated.sort_by(|x, y| x.variable.cmp(&y.variable));
    scored.extend(annotated);
    Ok(scored)
}

/// Per-class prediction-proportion shifts under full saturation.
#[derive(Debug, Clone, Serialize)]
pub struct SaturationDelta<F> {
    pub variable: String,
    pub class_id: usize,
    /// Class proportion at the unstressed baseline.
    pub base: Option<F>,
    /// `P_class(tau = 1) - P_class(tau = 0)`.
    pub delta_up: Option<F>,
    /// `P_class(tau = -1) - P_class(tau = 0)`.
    pub delta_down: Option<F>,
}

fn class_prop<F: Float>(values: &IndicatorValues<F>, class_id: usize) -> Option<F> {
    match values {
        IndicatorValues::Binary { p1, .. } => match class_id {
            1 => Some(*p1),
            // Weights have mean one, so the class masses partition unit mass.
            0 => Some(F::one() - *p1),
            _ => None,
        },
        IndicatorValues::Multiclass { props, .. } => props.get(class_id).copied(),
        IndicatorValues::Regression { .. } => None,
    }
}

/// Difference maps from a `{-1, 0, 1}` saturation sweep: how each class's
/// predicted proportion moves when a variable is pushed to its quantile
/// anchors.
pub fn saturation_deltas<F: Float>(
    res: &SweepResult<F>,
) -> Result<Vec<SaturationDelta<F>>, SweepError> {
    let classes = res
        .task
        .class_count()
        .ok_or_else(|| SweepError::TaskMismatch {
            expected: "classification".to_string(),
            actual: res.task.to_string(),
        })?;
    if res.tau_grid.len() != 3 {
        return Err(SweepError::NotSaturationGrid);
    }
    let down_idx = grid_index(&res.tau_grid, -F::one()).map_err(|_| SweepError::NotSaturationGrid)?;
    let zero_idx = grid_index(&res.tau_grid, F::zero()).map_err(|_| SweepError::NotSaturationGrid)?;
    let up_idx = grid_index(&res.tau_grid, F::one()).map_err(|_| SweepError::NotSaturationGrid)?;

    let mut out = Vec::new();
    for var in &res.variables {
        let cell_prop = |idx: usize, class_id: usize| -> Option<F> {
            match &var.cells[idx] {
                Cell::Solved { indicators, .. } => class_prop(indicators, class_id),
                Cell::Skipped { .. } => None,
            }
        };
        for class_id in 0..classes {
            let base = cell_prop(zero_idx, class_id);
            let up = cell_prop(up_idx, class_id);
            let down = cell_prop(down_idx, class_id);
            out.push(SaturationDelta {
                variable: var.name.clone(),
                class_id,
                base,
                delta_up: base.and_then(|b| up.map(|u| u - b)),
                delta_down: base.and_then(|b| down.map(|d| d - b)),
            });
        }
    }
    Ok(out)
}
