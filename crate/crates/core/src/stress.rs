//! Quantile-anchored stress parameterization.
//!
//! A stress level `tau` in `[-1, 1]` maps to a mean shift for one variable:
//! `tau = -1` moves the mean to the lower quantile anchor `q(alpha)`,
//! `tau = 0` leaves it unchanged, `tau = 1` moves it to `q(1 - alpha)`.
//! The shift is piecewise linear in `tau`:
//!
//! ```text
//! eps(tau) = tau * (m - q(alpha))      for tau in [-1, 0]
//! eps(tau) = tau * (q(1-alpha) - m)    for tau in [0, 1]
//! ```
//!
//! so the same `tau` means the same relative push regardless of how the
//! variable is distributed.

use crate::dataset::ColumnStats;
use crate::float::Float;

#[derive(Debug, thiserror::Error)]
pub enum StressError {
    #[error("tau {tau} outside [-1, 1]")]
    TauOutOfRange { tau: f64 },
    #[error("alpha {alpha} outside (0, 0.5)")]
    AlphaOutOfRange { alpha: f64 },
    #[error("degenerate column {variable}: all values identical")]
    DegenerateColumn { variable: usize },
    #[error(
        "inadmissible target for variable {variable} at tau {tau}: \
         t = {target} not strictly inside ({min}, {max})"
    )]
    InadmissibleTarget {
        variable: usize,
        tau: f64,
        target: f64,
        min: f64,
        max: f64,
    },
}

/// One stress request: which variable, how hard, against which anchors.
#[derive(Debug, Clone, Copy)]
pub struct StressSpec<F> {
    pub variable: usize,
    pub tau: F,
    pub alpha: F,
}

impl<F: Float> StressSpec<F> {
    pub fn new(variable: usize, tau: F) -> Self {
        Self {
            variable,
            tau,
            alpha: F::c(0.05),
        }
    }

    pub fn with_alpha(mut self, alpha: F) -> Self {
        self.alpha = alpha;
        self
    }
}

fn check_tau_alpha<F: Float>(tau: F, alpha: F) -> Result<(), StressError> {
    if !(tau >= -F::one() && tau <= F::one()) {
        return Err(StressError::TauOutOfRange {
            tau: tau.to_f64().unwrap_or(f64::NAN),
        });
    }
    if !(alpha > F::zero() && alpha < F::c(0.5)) {
        return Err(StressError::AlphaOutOfRange {
            alpha: alpha.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Mean shift for stress level `tau` against the `alpha` quantile anchors.
pub fn epsilon_for_tau<F: Float>(
    stats: &ColumnStats<F>,
    tau: F,
    alpha: F,
) -> Result<F, StressError> {
    check_tau_alpha(tau, alpha)?;
    let half = if tau <= F::zero() {
        stats.mean - stats.empirical_quantile(alpha).expect("alpha checked")
    } else {
        stats.empirical_quantile(F::one() - alpha).expect("alpha checked") - stats.mean
    };
    Ok(tau * half)
}

/// Mean target `m + eps(tau)`, verified to lie strictly inside the column
/// range.
pub fn target_for_tau<F: Float>(
    stats: &ColumnStats<F>,
    spec: &StressSpec<F>,
) -> Result<F, StressError> {
    if stats.min == stats.max {
        return Err(StressError::DegenerateColumn {
            variable: spec.variable,
        });
    }
    let eps = epsilon_for_tau(stats, spec.tau, spec.alpha)?;
    let target = stats.mean + eps;
    if !(target > stats.min && target < stats.max) {
        return Err(StressError::InadmissibleTarget {
            variable: spec.variable,
            tau: spec.tau.to_f64().unwrap_or(f64::NAN),
            target: target.to_f64().unwrap_or(f64::NAN),
            min: stats.min.to_f64().unwrap_or(f64::NAN),
            max: stats.max.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(target)
}

/// Diagnostics about degenerate or inverted quantile anchors, surfaced as
/// per-variable warnings in sweep summaries.
pub fn anchor_warnings<F: Float>(stats: &ColumnStats<F>, alpha: F) -> Vec<String> {
    let mut warnings = Vec::new();
    if check_tau_alpha(F::zero(), alpha).is_err() {
        return warnings;
    }
    let lo = stats.empirical_quantile(alpha).expect("alpha checked");
    let hi = stats.empirical_quantile(F::one() - alpha).expect("alpha checked");
    if stats.min == stats.max {
        warnings.push("column is constant; no stress admissible".to_string());
        return warnings;
    }
    if lo == stats.min {
        warnings.push(
            "lower quantile anchor equals the column minimum; tau = -1 is inadmissible"
                .to_string(),
        );
    }
    if hi == stats.max {
        warnings.push(
            "upper quantile anchor equals the column maximum; tau = 1 is inadmissible"
                .to_string(),
        );
    }
    if lo == stats.mean {
        warnings.push(
            "lower quantile anchor equals the mean; negative taus leave the target unchanged"
                .to_string(),
        );
    } else if lo > stats.mean {
        warnings.push(
            "lower quantile anchor lies above the mean (skewed column); \
             negative taus raise the target"
                .to_string(),
        );
    }
    if hi == stats.mean {
        warnings.push(
            "upper quantile anchor equals the mean; positive taus leave the target unchanged"
                .to_string(),
        );
    } else if hi < stats.mean {
        warnings.push(
            "upper quantile anchor lies below the mean (skewed column); \
             positive taus lower the target"
                .to_string(),
        );
    }
    if lo == hi {
        warnings.push(
            "quantile anchors coincide (near-constant column); stress range is degenerate"
                .to_string(),
        );
    }
    warnings
}
