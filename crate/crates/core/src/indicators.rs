//! Weighted performance indicators of the black box on a re-weighted test
//! set.
//!
//! Every indicator is a plain reduction over the weight vector; with all
//! weights equal to one they reproduce the classical unweighted values
//! exactly. Zero-mass denominators are errors, never NaN.

use serde::{Deserialize, Serialize};

use crate::dataset::{Task, TestSet};
use crate::float::Float;
use crate::math;
use crate::projection::WeightVector;

#[derive(Debug, thiserror::Error)]
pub enum IndicatorError {
    #[error("indicator requires a {expected} task, dataset is {actual}")]
    TaskMismatch { expected: String, actual: String },
    #[error("class {class_id} unknown: task has {classes} classes")]
    UnknownClass { class_id: usize, classes: usize },
    #[error("zero weighted mass of {which}; rate undefined")]
    EmptyClassMass { which: String },
    #[error("weight vector has {len} entries, dataset has {n} rows")]
    LengthMismatch { len: usize, n: usize },
}

/// How FPR/TPR are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RateConvention {
    /// Standard confusion-matrix conditional rates:
    /// `tpr = mass(pred=1, truth=1) / mass(truth=1)`,
    /// `fpr = mass(pred=1, truth=0) / mass(truth=0)`.
    #[default]
    Standard,
    /// Comparison mode with plain mass ratios instead of conditional rates:
    /// `fpr = mass(truth!=1) / mass(pred=1)`,
    /// `tpr = mass(pred=1) / mass(truth=1)`.
    /// ROC endpoints degenerate under this convention; it exists so the two
    /// definitions can be compared side by side.
    AsPrinted,
}

impl std::fmt::Display for RateConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RateConvention::Standard => write!(f, "standard"),
            RateConvention::AsPrinted => write!(f, "as-printed"),
        }
    }
}

fn check_lengths<F: Float>(w: &WeightVector<F>, ts: &TestSet<F>) -> Result<(), IndicatorError> {
    if w.lambdas.len() != ts.n() {
        return Err(IndicatorError::LengthMismatch {
            len: w.lambdas.len(),
            n: ts.n(),
        });
    }
    Ok(())
}

fn require_classification<F: Float>(ts: &TestSet<F>) -> Result<usize, IndicatorError> {
    ts.task()
        .class_count()
        .ok_or_else(|| IndicatorError::TaskMismatch {
            expected: "classification".to_string(),
            actual: ts.task().to_string(),
        })
}

fn require_regression<F: Float>(ts: &TestSet<F>) -> Result<(), IndicatorError> {
    if ts.task() != Task::Regression {
        return Err(IndicatorError::TaskMismatch {
            expected: "regression".to_string(),
            actual: ts.task().to_string(),
        });
    }
    Ok(())
}

/// `(1/n) sum_i lambda_i [select(i)]`, in fixed index order.
fn weighted_mass<F: Float>(lambdas: &[F], mut select: impl FnMut(usize) -> bool) -> F {
    let n = F::from_count(lambdas.len());
    math::sum(
        lambdas
            .iter()
            .enumerate()
            .map(|(i, &l)| if select(i) { l } else { F::zero() }),
    ) / n
}

/// Weighted misclassification proportion.
pub fn error_rate<F: Float>(w: &WeightVector<F>, ts: &TestSet<F>) -> Result<F, IndicatorError> {
    check_lengths(w, ts)?;
    require_classification(ts)?;
    let preds = ts.predictions();
    let truths = ts.truths();
    Ok(weighted_mass(&w.lambdas, |i| preds[i] != truths[i]))
}

/// Weighted proportion of observations predicted as `class_id`.
pub fn prop_predicted<F: Float>(
    w: &WeightVector<F>,
    ts: &TestSet<F>,
    class_id: usize,
) -> Result<F, IndicatorError> {
    check_lengths(w, ts)?;
    let classes = require_classification(ts)?;
    if class_id >= classes {
        return Err(IndicatorError::UnknownClass { class_id, classes });
    }
    let label = F::from_count(class_id);
    let preds = ts.predictions();
    Ok(weighted_mass(&w.lambdas, |i| preds[i] == label))
}

/// Weighted false- and true-positive rates for a binary task.
pub fn fpr_tpr<F: Float>(
    w: &WeightVector<F>,
    ts: &TestSet<F>,
) -> Result<(F, F), IndicatorError> {
    fpr_tpr_with(w, ts, RateConvention::Standard)
}

/// FPR/TPR under an explicit [`RateConvention`].
pub fn fpr_tpr_with<F: Float>(
    w: &WeightVector<F>,
    ts: &TestSet<F>,
    convention: RateConvention,
) -> Result<(F, F), IndicatorError> {
    check_lengths(w, ts)?;
    if ts.task() != Task::Binary {
        return Err(IndicatorError::TaskMismatch {
            expected: "binary".to_string(),
            actual: ts.task().to_string(),
        });
    }
    let one = F::one();
    let preds = ts.predictions();
    let truths = ts.truths();
    match convention {
        RateConvention::Standard => {
            let pos_mass = weighted_mass(&w.lambdas, |i| truths[i] == one);
            let neg_mass = weighted_mass(&w.lambdas, |i| truths[i] != one);
            if pos_mass <= F::zero() {
                return Err(IndicatorError::EmptyClassMass {
                    which: "truth positives".to_string(),
                });
            }
            if neg_mass <= F::zero() {
                return Err(IndicatorError::EmptyClassMass {
                    which: "truth negatives".to_string(),
                });
            }
            let tp = weighted_mass(&w.lambdas, |i| preds[i] == one && truths[i] == one);
            let fp = weighted_mass(&w.lambdas, |i| preds[i] == one && truths[i] != one);
            Ok((fp / neg_mass, tp / pos_mass))
        }
        RateConvention::AsPrinted => {
            let pred_pos = weighted_mass(&w.lambdas, |i| preds[i] == one);
            let truth_pos = weighted_mass(&w.lambdas, |i| truths[i] == one);
            if pred_pos <= F::zero() {
                return Err(IndicatorError::EmptyClassMass {
                    which: "predicted positives".to_string(),
                });
            }
            if truth_pos <= F::zero() {
                return Err(IndicatorError::EmptyClassMass {
                    which: "truth positives".to_string(),
                });
            }
            let truth_neg = weighted_mass(&w.lambdas, |i| truths[i] != one);
            Ok((truth_neg / pred_pos, pred_pos / truth_pos))
        }
    }
}

/// Weighted mean of the predictions (regression).
pub fn regression_mean<F: Float>(
    w: &WeightVector<F>,
    ts: &TestSet<F>,
) -> Result<F, IndicatorError> {
    check_lengths(w, ts)?;
    require_regression(ts)?;
    let n = F::from_count(ts.n());
    Ok(math::sum(w.lambdas.iter().zip(ts.predictions()).map(|(&l, &p)| l * p)) / n)
}

/// Weighted variance of the predictions around their weighted mean.
pub fn regression_variance<F: Float>(
    w: &WeightVector<F>,
    ts: &TestSet<F>,
) -> Result<F, IndicatorError> {
    let m = regression_mean(w, ts)?;
    let n = F::from_count(ts.n());
    Ok(math::sum(
        w.lambdas
            .iter()
            .zip(ts.predictions())
            .map(|(&l, &p)| l * (p - m) * (p - m)),
    ) / n)
}

/// Weighted root-mean-square error of predictions against truths.
pub fn regression_rmse<F: Float>(
    w: &WeightVector<F>,
    ts: &TestSet<F>,
) -> Result<F, IndicatorError> {
    check_lengths(w, ts)?;
    require_regression(ts)?;
    let n = F::from_count(ts.n());
    let mse = math::sum(
        w.lambdas
            .iter()
            .zip(ts.predictions())
            .zip(ts.truths())
            .map(|((&l, &p), &y)| l * (p - y) * (p - y)),
    ) / n;
    Ok(mse.sqrt())
}

/// Full task-appropriate indicator set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: serde::Deserialize<'de>"
))]
pub enum IndicatorValues<F> {
    Binary { er: F, p1: F, fpr: F, tpr: F },
    Multiclass { er: F, props: Vec<F> },
    Regression { mean: F, variance: F, rmse: F },
}

impl<F: Float> IndicatorValues<F> {
    /// `(name, value)` pairs in a fixed order, for CSV output and lookups.
    pub fn named(&self) -> Vec<(String, F)> {
        match self {
            IndicatorValues::Binary { er, p1, fpr, tpr } => vec![
                ("er".to_string(), *er),
                ("p1".to_string(), *p1),
                ("fpr".to_string(), *fpr),
                ("tpr".to_string(), *tpr),
            ],
            IndicatorValues::Multiclass { er, props } => {
                let mut out = vec![("er".to_string(), *er)];
                out.extend(
                    props
                        .iter()
                        .enumerate()
                        .map(|(j, &p)| (format!("p{j}"), p)),
                );
                out
            }
            IndicatorValues::Regression { mean, variance, rmse } => vec![
                ("mean".to_string(), *mean),
                ("variance".to_string(), *variance),
                ("rmse".to_string(), *rmse),
            ],
        }
    }

    pub fn get(&self, name: &str) -> Option<F> {
        self.named().into_iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

/// Names of the indicators available for a task.
pub fn indicator_names(task: Task) -> Vec<String> {
    match task {
        Task::Binary => ["er", "p1", "fpr", "tpr"].map(String::from).to_vec(),
        Task::Multiclass { classes } => {
            let mut out = vec!["er".to_string()];
            out.extend((0..classes).map(|j| format!("p{j}")));
            out
        }
        Task::Regression => ["mean", "variance", "rmse"].map(String::from).to_vec(),
    }
}

/// Evaluate every indicator the task supports.
pub fn evaluate<F: Float>(
    w: &WeightVector<F>,
    ts: &TestSet<F>,
    convention: RateConvention,
) -> Result<IndicatorValues<F>, IndicatorError> {
    match ts.task() {
        Task::Binary => {
            let er = error_rate(w, ts)?;
            let p1 = prop_predicted(w, ts, 1)?;
            let (fpr, tpr) = fpr_tpr_with(w, ts, convention)?;
            Ok(IndicatorValues::Binary { er, p1, fpr, tpr })
        }
        Task::Multiclass { classes } => {
            let er = error_rate(w, ts)?;
            let props = (0..classes)
                .map(|j| prop_predicted(w, ts, j))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(IndicatorValues::Multiclass { er, props })
        }
        Task::Regression => Ok(IndicatorValues::Regression {
            mean: regression_mean(w, ts)?,
            variance: regression_variance(w, ts)?,
            rmse: regression_rmse(w, ts)?,
        }),
    }
}
