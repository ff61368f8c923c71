//! Re-weighting engine for stress-testing black-box predictions on a fixed
//! test set.
//!
//! The input is a dump of a trained model's test set: feature columns, the
//! model's predictions and the ground truth. To probe how the model reacts
//! when one variable drifts, the engine shifts that variable's mean and
//! re-weights the observations with the exponential tilt that stays closest
//! to the empirical distribution in Kullback-Leibler divergence. Performance
//! indicators recomputed under the tilted weights then trace how prediction
//! proportions, error rates, ROC behaviour or regression statistics respond,
//! without ever querying the model again.
//!
//! Modules, in pipeline order:
//!
//! * [`dataset`]: load and validate the CSV dump, per-column quantiles.
//! * [`stress`]: map an intuitive level `tau` in `[-1, 1]` to a mean target
//!   between quantile anchors.
//! * [`projection`]: solve the convex dual and produce the tilted weights.
//! * [`indicators`]: weighted error rate, class proportions, FPR/TPR and
//!   regression statistics.
//! * [`sweep`]: grids of `(variable, tau)` cells, ROC point sequences,
//!   score tables, saturation maps.
//! * [`harness`]: seeded synthetic data generators for validation and
//!   timing.
//! * [`plot`]: minimal SVG line charts for sweep output.
//!
//! Everything numeric is generic over [`Float`] (`f32` or `f64`); the aliases
//! below fix `f64`, which is what the command-line front end uses.

pub mod dataset;
pub mod float;
pub mod harness;
pub mod indicators;
pub mod math;
pub mod plot;
pub mod projection;
pub mod stress;
pub mod sweep;

pub use float::Float;

/// `f64` aliases for the common case.
pub type TestSet = dataset::TestSet<f64>;
pub type ColumnStats = dataset::ColumnStats<f64>;
pub type ConstraintSpec = projection::ConstraintSpec<f64>;
pub type DualSolution = projection::DualSolution<f64>;
pub type WeightVector = projection::WeightVector<f64>;
pub type SolverOptions = projection::SolverOptions<f64>;
pub type StressSpec = stress::StressSpec<f64>;
pub type IndicatorValues = indicators::IndicatorValues<f64>;
pub type SweepConfig = sweep::SweepConfig<f64>;
pub type SweepResult = sweep::SweepResult<f64>;
pub type SynthSpec = harness::SynthSpec<f64>;
