//! Entropic projection: the KL-closest re-weighting of the test set that
//! satisfies moment constraints.
//!
//! Given per-observation constraint values `phi_i` in `R^k` and a target
//! `t` in `R^k`, the tilted weights
//!
//! ```text
//! lambda_i = exp(<xi, phi_i> - log Z(xi)),   Z(xi) = (1/n) sum_i exp(<xi, phi_i>)
//! ```
//!
//! solve `min KL(Q, Q_n)` subject to `(1/n) sum_i lambda_i phi_i = t`, where
//! `xi` minimizes the strictly convex dual `H(xi) = log Z(xi) - <xi, t>`.
//! The gradient of `log Z` is the tilted mean of `phi` and its Hessian the
//! tilted covariance, so the dual is solved by a damped Newton iteration,
//! safeguarded by bisection against a sign-change bracket in the
//! one-constraint case.
//!
//! All exponential sums are max-shifted; the largest weight's exponent is at
//! most `log n`, so nothing overflows regardless of how extreme the tilt is.

use serde::{Deserialize, Serialize};

use crate::dataset::TestSet;
use crate::float::Float;
use crate::math;

#[derive(Debug, thiserror::Error)]
pub enum ProjectionError {
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("constraint spec is empty")]
    EmptyConstraint,
    #[error("dimension mismatch: {what}")]
    DimensionMismatch { what: String },
    #[error("infeasible constraint: {reason}")]
    Infeasible { reason: String },
    #[error(
        "dual solve did not converge after {iterations} iterations \
         (residual {residual:e}); {note}"
    )]
    DidNotConverge {
        iterations: usize,
        residual: f64,
        note: String,
    },
    #[error("singular tilted covariance: coordinate '{label}' (index {coordinate}) is degenerate")]
    SingularHessian { coordinate: usize, label: String },
    #[error("dual solution is not converged")]
    NotConverged,
    #[error("variable index {index} out of range (p = {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("mean/covariance constraint needs two distinct variables (got index {index} twice)")]
    SameVariable { index: usize },
}

/// Constraint values `phi` (one column per coordinate, one entry per
/// observation) and the target moments `t`.
#[derive(Debug, Clone)]
pub struct ConstraintSpec<F> {
    phi: Vec<Vec<F>>,
    target: Vec<F>,
    labels: Vec<String>,
}

impl<F: Float> ConstraintSpec<F> {
    pub fn new(
        phi: Vec<Vec<F>>,
        target: Vec<F>,
        labels: Vec<String>,
    ) -> Result<Self, ProjectionError> {
        if phi.is_empty() || phi[0].is_empty() {
            return Err(ProjectionError::EmptyConstraint);
        }
        let n = phi[0].len();
        let k = phi.len();
        if target.len() != k {
            return Err(ProjectionError::DimensionMismatch {
                what: format!("target has {} coordinates, phi has {k}", target.len()),
            });
        }
        if labels.len() != k {
            return Err(ProjectionError::DimensionMismatch {
                what: format!("{} labels for {k} coordinates", labels.len()),
            });
        }
        for col in &phi {
            if col.len() != n {
                return Err(ProjectionError::DimensionMismatch {
                    what: "phi columns have unequal lengths".to_string(),
                });
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(ProjectionError::NonFiniteInput);
            }
        }
        if target.iter().any(|v| !v.is_finite()) {
            return Err(ProjectionError::NonFiniteInput);
        }
        Ok(Self { phi, target, labels })
    }

    pub fn n(&self) -> usize {
        self.phi[0].len()
    }

    pub fn k(&self) -> usize {
        self.phi.len()
    }

    pub fn phi(&self) -> &[Vec<F>] {
        &self.phi
    }

    pub fn target(&self) -> &[F] {
        &self.target
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Per-coordinate `(min, max)` of the constraint values.
    pub fn bounds(&self) -> Vec<(F, F)> {
        self.phi
            .iter()
            .map(|col| {
                col.iter().fold((F::infinity(), F::neg_infinity()), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                })
            })
            .collect()
    }
}

/// Log-partition value with the tilted mean (gradient) and tilted covariance
/// (Hessian) of `phi` under the weights `exp(<xi, phi_i>)`.
#[derive(Debug, Clone)]
pub struct TiltStats<F> {
    pub log_z: F,
    pub mean: Vec<F>,
    /// Row-major `k x k` tilted covariance.
    pub cov: Vec<F>,
}

/// Compute `log Z(xi)`, the tilted mean and the tilted covariance in one
/// max-shifted pass.
pub fn log_partition_stats<F: Float>(
    phi: &[Vec<F>],
    xi: &[F],
) -> Result<TiltStats<F>, ProjectionError> {
    if phi.is_empty() || phi[0].is_empty() {
        return Err(ProjectionError::EmptyConstraint);
    }
    let k = phi.len();
    let n = phi[0].len();
    if xi.len() != k {
        return Err(ProjectionError::DimensionMismatch {
            what: format!("xi has {} coordinates, phi has {k}", xi.len()),
        });
    }
    if xi.iter().any(|v| !v.is_finite()) {
        return Err(ProjectionError::NonFiniteInput);
    }

    let mut scores = vec![F::zero(); n];
    for (j, col) in phi.iter().enumerate() {
        let xj = xi[j];
        for (s, &v) in scores.iter_mut().zip(col) {
            *s = *s + xj * v;
        }
    }
    let shift = scores
        .iter()
        .fold(F::neg_infinity(), |acc, &s| acc.max(s));
    if !shift.is_finite() {
        return Err(ProjectionError::NonFiniteInput);
    }

    // Exponentiate in place and accumulate the partition sum and the mean
    // numerators in the same pass.
    let mut total_acc = math::CompensatedSum::new();
    let mut mean_accs = vec![math::CompensatedSum::new(); k];
    for i in 0..n {
        let w = (scores[i] - shift).exp();
        scores[i] = w;
        total_acc.push(w);
        for (acc, col) in mean_accs.iter_mut().zip(phi) {
            acc.push(w * col[i]);
        }
    }
    let tilts = scores;
    let total = total_acc.value();
    let log_z = shift + (total / F::from_count(n)).ln();
    let mean: Vec<F> = mean_accs.iter().map(|acc| acc.value() / total).collect();

    let mut cov = vec![F::zero(); k * k];
    for j in 0..k {
        for l in j..k {
            let c = math::sum(
                tilts
                    .iter()
                    .zip(&phi[j])
                    .zip(&phi[l])
                    .map(|((&w, &a), &b)| w * (a - mean[j]) * (b - mean[l])),
            ) / total;
            cov[j * k + l] = c;
            cov[l * k + j] = c;
        }
    }

    Ok(TiltStats { log_z, mean, cov })
}

/// Whether the target can be reached at all.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub reason: Option<String>,
}

/// Check that the target lies strictly inside the reachable moments.
///
/// Exact for `k = 1` (the reachable set is the open interval between column
/// min and max). For `k > 1` this is the necessary per-coordinate box check;
/// a target inside the box but outside the convex hull is caught later by
/// the solver diverging.
///
/// Targets closer to a bound than the default solver tolerance are rejected:
/// reaching them would need an effectively infinite tilt.
pub fn feasibility_check<F: Float>(spec: &ConstraintSpec<F>) -> Feasibility {
    let opts = SolverOptions::<F>::default();
    for (j, (lo, hi)) in spec.bounds().into_iter().enumerate() {
        let t = spec.target()[j];
        let coord = if spec.k() == 1 {
            "column".to_string()
        } else {
            format!("coordinate '{}'", spec.labels()[j])
        };
        if lo == hi {
            return Feasibility {
                feasible: false,
                reason: Some(format!("degenerate {coord}: all values identical")),
            };
        }
        let margin = opts.tol_abs + opts.tol_rel * (hi - lo);
        let reason = if t == hi {
            Some(format!("target equals {coord} maximum"))
        } else if t == lo {
            Some(format!("target equals {coord} minimum"))
        } else if t > hi {
            Some(format!("target exceeds {coord} maximum"))
        } else if t < lo {
            Some(format!("target below {coord} minimum"))
        } else if t > hi - margin {
            Some(format!("target within solver tolerance of {coord} maximum"))
        } else if t < lo + margin {
            Some(format!("target within solver tolerance of {coord} minimum"))
        } else {
            None
        };
        if let Some(reason) = reason {
            return Feasibility {
                feasible: false,
                reason: Some(reason),
            };
        }
    }
    Feasibility {
        feasible: true,
        reason: None,
    }
}

/// Tolerances and iteration budget for the dual solve.
///
/// Convergence requires, per coordinate,
/// `|E_xi[phi_j] - t_j| <= tol_abs + tol_rel * (max_j - min_j)`.
#[derive(Debug, Clone)]
pub struct SolverOptions<F> {
    pub tol_abs: F,
    pub tol_rel: F,
    pub max_iter: usize,
    /// Warm-start value for `xi`; defaults to zero (the unstressed solution).
    pub init: Option<Vec<F>>,
}

impl<F: Float> Default for SolverOptions<F> {
    fn default() -> Self {
        Self {
            tol_abs: F::c(1e-10),
            tol_rel: F::c(1e-9),
            max_iter: 100,
            init: None,
        }
    }
}

impl<F: Float> SolverOptions<F> {
    pub fn with_init(mut self, xi: Vec<F>) -> Self {
        self.init = Some(xi);
        self
    }
}

/// Minimizer of the dual together with convergence diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: serde::Deserialize<'de>"
))]
pub struct DualSolution<F> {
    pub xi: Vec<F>,
    pub log_partition: F,
    pub achieved_moment: Vec<F>,
    pub iterations: usize,
    pub converged: bool,
    /// `max_j |achieved_j - t_j|`.
    pub residual: F,
}

/// Positive per-observation weights with mean one, plus the KL divergence of
/// the tilted distribution from the empirical one.
///
/// Weights are exact tilts `exp(<xi, phi_i> - log Z)`; for targets pushed
/// within a few solver tolerances of the feasible boundary the far tail of
/// the tilt can underflow to zero. Quantile-anchored stress targets never
/// get near that regime.
#[derive(Debug, Clone)]
pub struct WeightVector<F> {
    pub lambdas: Vec<F>,
    /// `<xi, t> - log Z(xi)`, the optimal KL divergence.
    pub kl: F,
    pub dual: DualSolution<F>,
}

impl<F: Float + Serialize> Serialize for WeightVector<F> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("WeightVector", 7)?;
        s.serialize_field("xi", &self.dual.xi)?;
        s.serialize_field("log_partition", &self.dual.log_partition)?;
        s.serialize_field("kl", &self.kl)?;
        s.serialize_field("lambdas", &self.lambdas)?;
        s.serialize_field("converged", &self.dual.converged)?;
        s.serialize_field("iterations", &self.dual.iterations)?;
        s.serialize_field("residual", &self.dual.residual)?;
        s.end()
    }
}

impl<F: Float> WeightVector<F> {
    /// Weights as `index,lambda` CSV.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,lambda")?;
        for (i, l) in self.lambdas.iter().enumerate() {
            writeln!(w, "{i},{l}")?;
        }
        Ok(())
    }
}

fn infinity_residual<F: Float>(mean: &[F], target: &[F]) -> F {
    mean.iter()
        .zip(target)
        .fold(F::zero(), |acc, (&m, &t)| acc.max((m - t).abs()))
}

/// Solve the dual problem: find `xi` with tilted mean equal to the target.
pub fn solve_dual<F: Float>(
    spec: &ConstraintSpec<F>,
    opts: &SolverOptions<F>,
) -> Result<DualSolution<F>, ProjectionError> {
    let feas = feasibility_check(spec);
    if !feas.feasible {
        return Err(ProjectionError::Infeasible {
            reason: feas.reason.unwrap_or_else(|| "unknown".to_string()),
        });
    }
    let k = spec.k();
    if let Some(init) = &opts.init {
        if init.len() != k {
            return Err(ProjectionError::DimensionMismatch {
                what: format!("warm start has {} coordinates, phi has {k}", init.len()),
            });
        }
        if init.iter().any(|v| !v.is_finite()) {
            return Err(ProjectionError::NonFiniteInput);
        }
    }

    // Fast path: the starting point already satisfies every constraint in
    // the original coordinates. In particular an unstressed target (t equal
    // to the column mean) returns xi = 0 in zero iterations, bitwise, which
    // keeps tau = 0 baselines exactly unweighted.
    let init_xi: Vec<F> = opts.init.clone().unwrap_or_else(|| vec![F::zero(); k]);
    let stats0 = log_partition_stats(spec.phi(), &init_xi)?;
    let bounds = spec.bounds();
    let at_solution = stats0
        .mean
        .iter()
        .zip(spec.target())
        .zip(&bounds)
        .all(|((&m, &t), &(lo, hi))| {
            let tol = opts.tol_abs + opts.tol_rel * (hi - lo);
            let tol_inner = (tol * F::c(INNER_TOL_FACTOR)).max(residual_floor(t, hi - lo));
            (m - t).abs() <= tol_inner
        });
    if at_solution {
        let residual = infinity_residual(&stats0.mean, spec.target());
        return Ok(DualSolution {
            xi: init_xi,
            log_partition: stats0.log_z,
            achieved_moment: stats0.mean,
            iterations: 0,
            converged: true,
            residual,
        });
    }

    // Solve in target-centered coordinates (phi - t against a zero target):
    // the iteration then works at the magnitude of the column spread rather
    // than of the raw values, so the achieved moment lands within a few ulps
    // of the spread even for columns far from the origin. xi is unchanged by
    // the translation; the log-partition and moments are translated back.
    let centered_phi: Vec<Vec<F>> = spec
        .phi()
        .iter()
        .zip(spec.target())
        .map(|(col, &t)| col.iter().map(|&v| v - t).collect())
        .collect();
    let centered = ConstraintSpec {
        phi: centered_phi,
        target: vec![F::zero(); k],
        labels: spec.labels().to_vec(),
    };
    let mut dual = if k == 1 {
        solve_one_dim(&centered, opts)?
    } else {
        solve_multi_dim(&centered, opts)?
    };
    let xi_dot_t = math::dot(&dual.xi, spec.target());
    dual.log_partition = dual.log_partition + xi_dot_t;
    for (a, &t) in dual.achieved_moment.iter_mut().zip(spec.target()) {
        *a = *a + t;
    }
    Ok(dual)
}

/// Factor between the contract tolerance and the tolerance the iteration
/// actually drives to. Converging well past the contract keeps downstream
/// identities (KL dual/primal agreement, achieved-moment checks) at the
/// `|xi| * residual` level, far inside their stated bounds.
const INNER_TOL_FACTOR: f64 = 1e-5;

/// Smallest residual worth chasing for a coordinate with the given target
/// and range: a few ulps of the quantities being subtracted.
fn residual_floor<F: Float>(target: F, range: F) -> F {
    F::c(4.0) * F::epsilon() * (target.abs() + range)
}

/// One constraint: Newton safeguarded by a sign-change bracket.
///
/// `g(xi) = E_xi[phi] - t` is strictly increasing, so once `g` changes sign
/// between `lo` and `hi` the root is bracketed and bisection bounds every
/// Newton step that would escape.
fn solve_one_dim<F: Float>(
    spec: &ConstraintSpec<F>,
    opts: &SolverOptions<F>,
) -> Result<DualSolution<F>, ProjectionError> {
    let target = spec.target()[0];
    let (min, max) = spec.bounds()[0];
    let scale = max - min;
    let tol = opts.tol_abs + opts.tol_rel * scale;
    let tol_inner = (tol * F::c(INNER_TOL_FACTOR)).max(residual_floor(target, scale));

    let mut xi = opts.init.as_ref().map(|v| v[0]).unwrap_or_else(F::zero);
    let mut stats = log_partition_stats(spec.phi(), &[xi])?;
    let mut lo: Option<F> = None;
    let mut hi: Option<F> = None;
    // Expansion step for the unbracketed side, in units of 1/scale so the
    // solve is equivariant under affine rescaling of phi.
    let mut step = F::one() / scale;
    // Best iterate meeting the contract tolerance, in case the inner
    // tolerance turns out unreachable within the iteration budget.
    let mut best: Option<DualSolution<F>> = None;

    for iter in 0..=opts.max_iter {
        let g = stats.mean[0] - target;
        let residual = g.abs();
        if residual <= tol && best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(DualSolution {
                xi: vec![xi],
                log_partition: stats.log_z,
                achieved_moment: stats.mean.clone(),
                iterations: iter,
                converged: true,
                residual,
            });
        }
        if residual <= tol_inner {
            return Ok(best.expect("tol_inner <= tol"));
        }
        if g < F::zero() {
            lo = Some(xi);
        } else {
            hi = Some(xi);
        }

        let var = stats.cov[0];
        let newton = if var > F::zero() { Some(xi - g / var) } else { None };
        let candidate = match (lo, hi) {
            (Some(l), Some(h)) => match newton {
                Some(c) if c > l && c < h && c.is_finite() => c,
                _ => (l + h) / F::c(2.0),
            },
            // Only one side known: move in the descent direction, but never
            // further than the doubling expansion step.
            (Some(_), None) => {
                let bound = xi + step;
                step = step * F::c(2.0);
                match newton {
                    Some(c) if c.is_finite() && c > xi => c.min(bound),
                    _ => bound,
                }
            }
            (None, Some(_)) => {
                let bound = xi - step;
                step = step * F::c(2.0);
                match newton {
                    Some(c) if c.is_finite() && c < xi => c.max(bound),
                    _ => bound,
                }
            }
            (None, None) => unreachable!("g has a sign"),
        };
        if candidate == xi {
            // The bracket has collapsed to adjacent floats; no further
            // progress is representable.
            break;
        }
        xi = candidate;
        stats = log_partition_stats(spec.phi(), &[xi])?;
    }

    if let Some(solution) = best {
        return Ok(solution);
    }
    let residual = (stats.mean[0] - target).abs();
    Err(ProjectionError::DidNotConverge {
        iterations: opts.max_iter,
        residual: residual.to_f64().unwrap_or(f64::NAN),
        note: format!(
            "|xi| grew to {:e}; target may sit on or outside the feasible range",
            xi.abs().to_f64().unwrap_or(f64::NAN)
        ),
    })
}

/// Several constraints: damped Newton with Armijo backtracking on the dual.
fn solve_multi_dim<F: Float>(
    spec: &ConstraintSpec<F>,
    opts: &SolverOptions<F>,
) -> Result<DualSolution<F>, ProjectionError> {
    let k = spec.k();
    let target = spec.target();
    let tols: Vec<F> = spec
        .bounds()
        .iter()
        .map(|&(lo, hi)| opts.tol_abs + opts.tol_rel * (hi - lo))
        .collect();
    let tols_inner: Vec<F> = spec
        .bounds()
        .iter()
        .zip(&tols)
        .enumerate()
        .map(|(j, (&(lo, hi), &tol))| {
            (tol * F::c(INNER_TOL_FACTOR)).max(residual_floor(target[j], hi - lo))
        })
        .collect();

    let mut xi: Vec<F> = opts
        .init
        .clone()
        .unwrap_or_else(|| vec![F::zero(); k]);
    let mut stats = log_partition_stats(spec.phi(), &xi)?;
    let mut best: Option<DualSolution<F>> = None;

    for iter in 0..=opts.max_iter {
        let grad: Vec<F> = stats
            .mean
            .iter()
            .zip(target)
            .map(|(&m, &t)| m - t)
            .collect();
        let residual = infinity_residual(&stats.mean, target);
        let within_contract = grad.iter().zip(&tols).all(|(g, &tol)| g.abs() <= tol);
        if within_contract && best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(DualSolution {
                xi: xi.clone(),
                log_partition: stats.log_z,
                achieved_moment: stats.mean.clone(),
                iterations: iter,
                converged: true,
                residual,
            });
        }
        if grad
            .iter()
            .zip(&tols_inner)
            .all(|(g, &tol)| g.abs() <= tol)
        {
            return Ok(best.expect("inner tolerance implies contract tolerance"));
        }

        let neg_grad: Vec<F> = grad.iter().map(|&g| -g).collect();
        let direction = cholesky_solve(&stats.cov, &neg_grad, k).map_err(|coordinate| {
            ProjectionError::SingularHessian {
                coordinate,
                label: spec.labels()[coordinate].clone(),
            }
        })?;

        // Armijo backtracking on H(xi) = log Z(xi) - <xi, t>.
        let h0 = stats.log_z - math::dot(&xi, target);
        let slope = math::dot(&grad, &direction);
        let c1 = F::c(1e-4);
        let mut alpha = F::one();
        let mut accepted = None;
        while alpha > F::c(1e-16) {
            let trial: Vec<F> = xi
                .iter()
                .zip(&direction)
                .map(|(&x, &d)| x + alpha * d)
                .collect();
            let trial_stats = log_partition_stats(spec.phi(), &trial)?;
            let h = trial_stats.log_z - math::dot(&trial, target);
            if h <= h0 + c1 * alpha * slope {
                accepted = Some((trial, trial_stats));
                break;
            }
            alpha = alpha / F::c(2.0);
        }
        match accepted {
            Some((trial, trial_stats)) => {
                xi = trial;
                stats = trial_stats;
            }
            None => {
                if let Some(solution) = best {
                    return Ok(solution);
                }
                return Err(ProjectionError::DidNotConverge {
                    iterations: iter,
                    residual: infinity_residual(&stats.mean, target)
                        .to_f64()
                        .unwrap_or(f64::NAN),
                    note: "line search stalled; target may sit on or outside \
                           the convex hull of the constraint values"
                        .to_string(),
                });
            }
        }
    }

    if let Some(solution) = best {
        return Ok(solution);
    }
    let norm = xi.iter().fold(F::zero(), |acc, &x| acc.max(x.abs()));
    Err(ProjectionError::DidNotConverge {
        iterations: opts.max_iter,
        residual: infinity_residual(&stats.mean, target)
            .to_f64()
            .unwrap_or(f64::NAN),
        note: format!(
            "|xi| grew to {:e}; target may sit on or outside the convex hull \
             of the constraint values",
            norm.to_f64().unwrap_or(f64::NAN)
        ),
    })
}

/// Solve `A x = b` for a symmetric positive-definite `k x k` matrix via
/// Cholesky. Returns the index of the first non-positive pivot on failure.
fn cholesky_solve<F: Float>(a: &[F], b: &[F], k: usize) -> Result<Vec<F>, usize> {
    let mut l = vec![F::zero(); k * k];
    let floor = F::epsilon() * a
        .iter()
        .step_by(k + 1)
        .fold(F::zero(), |acc, &d| acc.max(d.abs()))
        * F::from_count(k.max(1));
    for j in 0..k {
        let mut d = a[j * k + j];
        for m in 0..j {
            d = d - l[j * k + m] * l[j * k + m];
        }
        if d <= floor {
            return Err(j);
        }
        let dj = d.sqrt();
        l[j * k + j] = dj;
        for i in (j + 1)..k {
            let mut v = a[i * k + j];
            for m in 0..j {
                v = v - l[i * k + m] * l[j * k + m];
            }
            l[i * k + j] = v / dj;
        }
    }
    // forward substitution L y = b
    let mut y = vec![F::zero(); k];
    for i in 0..k {
        let mut v = b[i];
        for m in 0..i {
            v = v - l[i * k + m] * y[m];
        }
        y[i] = v / l[i * k + i];
    }
    // back substitution L^T x = y
    let mut x = vec![F::zero(); k];
    for i in (0..k).rev() {
        let mut v = y[i];
        for m in (i + 1)..k {
            v = v - l[m * k + i] * x[m];
        }
        x[i] = v / l[i * k + i];
    }
    Ok(x)
}

/// Turn a converged dual solution into the weight vector.
pub fn weights_from_dual<F: Float>(
    spec: &ConstraintSpec<F>,
    dual: &DualSolution<F>,
) -> Result<WeightVector<F>, ProjectionError> {
    if !dual.converged {
        return Err(ProjectionError::NotConverged);
    }
    let n = spec.n();
    // Scores centered at the target: <xi, phi_i - t>. The normalization
    // cancels the constant <xi, t> exactly, so the weights are unchanged,
    // but the magnitudes stay near the divergence itself instead of near
    // |<xi, t>|, which keeps lambda and kl precise on columns far from the
    // origin with a small spread.
    let mut scores = vec![F::zero(); n];
    for (j, col) in spec.phi().iter().enumerate() {
        let xj = dual.xi[j];
        let tj = spec.target()[j];
        for (s, &v) in scores.iter_mut().zip(col) {
            *s = *s + xj * (v - tj);
        }
    }
    let shift = scores
        .iter()
        .fold(F::neg_infinity(), |acc, &s| acc.max(s));
    let mut total_acc = math::CompensatedSum::new();
    for s in scores.iter_mut() {
        let w = (*s - shift).exp();
        *s = w;
        total_acc.push(w);
    }
    let total = total_acc.value();

    // KL in the same centered form: <xi, t> - log Z(xi) rewritten as
    // -log[(1/n) sum_i exp(<xi, phi_i - t>)], immune to the cancellation
    // the direct difference suffers when |<xi, t>| dwarfs the divergence.
    let kl = -(shift + (total / F::from_count(n)).ln());
    // normalize -0 from the identity tilt
    let kl = if kl == F::zero() { F::zero() } else { kl };

    // lambda_i = exp(score_i - log Z) written as tilt_i * (n / sum tilts):
    // same value, but the normalization then holds to a few ulps.
    let norm = F::from_count(n) / total;
    let mut lambdas = scores;
    for l in lambdas.iter_mut() {
        *l = *l * norm;
    }
    Ok(WeightVector {
        lambdas,
        kl,
        dual: dual.clone(),
    })
}

/// Convenience: solve the dual and produce weights in one call.
pub fn solve_weights<F: Float>(
    spec: &ConstraintSpec<F>,
    opts: &SolverOptions<F>,
) -> Result<WeightVector<F>, ProjectionError> {
    let dual = solve_dual(spec, opts)?;
    weights_from_dual(spec, &dual)
}

/// Single-variable mean constraint: `phi` is column `j0`, target `t`.
pub fn mean_constraint<F: Float>(
    ts: &TestSet<F>,
    j0: usize,
    t: F,
) -> Result<ConstraintSpec<F>, ProjectionError> {
    let col = ts.column(j0).map_err(|_| ProjectionError::IndexOutOfRange {
        index: j0,
        len: ts.p(),
    })?;
    ConstraintSpec::new(
        vec![col.to_vec()],
        vec![t],
        vec![ts.feature_names()[j0].clone()],
    )
}

/// Joint constraint on two means and their covariance:
/// `phi = (X^i, X^j, X^i * X^j)` with target `(m_i, m_j, c_ij + m_i * m_j)`.
pub fn mean_cov_constraint<F: Float>(
    ts: &TestSet<F>,
    i: usize,
    j: usize,
    m_i: F,
    m_j: F,
    c_ij: F,
) -> Result<ConstraintSpec<F>, ProjectionError> {
    if i == j {
        return Err(ProjectionError::SameVariable { index: i });
    }
    let p = ts.p();
    let col_i = ts
        .column(i)
        .map_err(|_| ProjectionError::IndexOutOfRange { index: i, len: p })?;
    let col_j = ts
        .column(j)
        .map_err(|_| ProjectionError::IndexOutOfRange { index: j, len: p })?;
    let product: Vec<F> = col_i.iter().zip(col_j).map(|(&a, &b)| a * b).collect();
    let name_i = ts.feature_names()[i].clone();
    let name_j = ts.feature_names()[j].clone();
    let product_label = format!("{name_i}*{name_j}");
    ConstraintSpec::new(
        vec![col_i.to_vec(), col_j.to_vec(), product],
        vec![m_i, m_j, c_ij + m_i * m_j],
        vec![name_i, name_j, product_label],
    )
}
