//! Seeded synthetic datasets for validating the engine without external
//! trained models, plus sized random dumps for timing runs.
//!
//! Reproducibility contract: the generator is ChaCha12 seeded with the given
//! 64-bit seed, and uniform variates are built from raw output words as
//! `(word >> 11) / 2^53`, so feature values are bit-identical across
//! platforms for a fixed seed. The optional normal law and the label draws
//! go through `exp`/`ln`/`cos`, whose last-ulp rounding the platform's math
//! library controls; in practice mainstream targets agree bit for bit.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::dataset::{DatasetError, Task, TestSet};
use crate::float::Float;
use crate::math;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid spec: {reason}")]
    InvalidSpec { reason: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Distribution of the independent regressors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegressorLaw {
    /// Uniform on `[0, 1)`.
    #[default]
    Uniform01,
    /// Standard normal via Box-Muller.
    StandardNormal,
}

/// Which predictions the generated dump carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassifierChoice {
    /// Threshold the true model: `pred = 1 iff sigmoid(beta . x) >= 0.5`.
    /// No training variance; the dump reflects the generating coefficients
    /// exactly.
    #[default]
    TrueModel,
    /// Fit a logistic regression on the generated data first (full-batch
    /// gradient ascent, 500 iterations, step 0.1, zero init) and threshold
    /// its fitted probabilities.
    Trained,
}

/// Parameters of the synthetic logistic dump.
#[derive(Debug, Clone)]
pub struct SynthSpec<F> {
    pub n: usize,
    pub beta: Vec<F>,
    pub seed: u64,
    pub law: RegressorLaw,
}

impl<F: Float> SynthSpec<F> {
    /// Default coefficient vector `(-4, 2, 0, 2, 4)`.
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            beta: [-4.0, 2.0, 0.0, 2.0, 4.0].iter().map(|&b| F::c(b)).collect(),
            seed,
            law: RegressorLaw::Uniform01,
        }
    }
}

/// Deterministic variate stream over ChaCha12.
struct Draws {
    rng: ChaCha12Rng,
}

impl Draws {
    fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// Uniform on `[0, 1)`: 53 explicit mantissa bits.
    fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform on `(0, 1]`, safe under `ln`.
    fn unit_open(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Standard normal via Box-Muller; two words per variate.
    fn normal(&mut self) -> f64 {
        let u1 = self.unit_open();
        let u2 = self.unit();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    fn regressor(&mut self, law: RegressorLaw) -> f64 {
        match law {
            RegressorLaw::Uniform01 => self.unit(),
            RegressorLaw::StandardNormal => self.normal(),
        }
    }
}

/// Generate a logistic-model dump: independent regressors, Bernoulli truths
/// with success probability `sigmoid(beta . x)`, and predictions from the
/// chosen classifier. Sigmoid ties at exactly 0.5 are classified as 1.
pub fn gen_logistic<F: Float>(spec: &SynthSpec<F>) -> Result<TestSet<F>, HarnessError> {
    gen_logistic_with(spec, ClassifierChoice::TrueModel)
}

/// [`gen_logistic`] with an explicit classifier choice.
pub fn gen_logistic_with<F: Float>(
    spec: &SynthSpec<F>,
    classifier: ClassifierChoice,
) -> Result<TestSet<F>, HarnessError> {
    if spec.n < 100 {
        return Err(HarnessError::InvalidSpec {
            reason: format!("n = {} below the minimum of 100", spec.n),
        });
    }
    if spec.beta.is_empty() {
        return Err(HarnessError::InvalidSpec {
            reason: "beta is empty".to_string(),
        });
    }
    if spec.beta.iter().any(|b| !b.is_finite()) {
        return Err(HarnessError::InvalidSpec {
            reason: "beta has non-finite coordinates".to_string(),
        });
    }
    let p = spec.beta.len();
    let beta_f64: Vec<f64> = spec
        .beta
        .iter()
        .map(|b| b.to_f64().expect("finite"))
        .collect();

    let mut draws = Draws::new(spec.seed);
    let mut columns: Vec<Vec<F>> = vec![Vec::with_capacity(spec.n); p];
    let mut probs: Vec<f64> = Vec::with_capacity(spec.n);
    let mut truths: Vec<F> = Vec::with_capacity(spec.n);

    // Draw order per observation: p regressors, then the label variate.
    for _ in 0..spec.n {
        let mut z = 0.0;
        for (j, col) in columns.iter_mut().enumerate() {
            let x = draws.regressor(spec.law);
            z += beta_f64[j] * x;
            col.push(F::c(x));
        }
        let prob = math::sigmoid(z);
        probs.push(prob);
        let u = draws.unit();
        truths.push(if u < prob { F::one() } else { F::zero() });
    }

    let predictions: Vec<F> = match classifier {
        ClassifierChoice::TrueModel => probs
            .iter()
            .map(|&pr| if pr >= 0.5 { F::one() } else { F::zero() })
            .collect(),
        ClassifierChoice::Trained => {
            let fitted = train_logistic(&columns, &truths, 500, 0.1);
            (0..spec.n)
                .map(|i| {
                    let z: f64 = columns
                        .iter()
                        .zip(&fitted)
                        .map(|(col, &w)| col[i].to_f64().expect("finite") * w)
                        .sum();
                    if math::sigmoid(z) >= 0.5 {
                        F::one()
                    } else {
                        F::zero()
                    }
                })
                .collect()
        }
    };

    let names: Vec<String> = (1..=p).map(|j| format!("x{j}")).collect();
    Ok(TestSet::new(columns, names, predictions, truths, Task::Binary)?)
}

/// Full-batch gradient ascent on the logistic log-likelihood, no intercept:
/// fixed 500-iteration budget in the default pipeline.
pub fn train_logistic<F: Float>(
    columns: &[Vec<F>],
    truths: &[F],
    iterations: usize,
    step: f64,
) -> Vec<f64> {
    let n = truths.len();
    let p = columns.len();
    let mut weights = vec![0.0f64; p];
    let inv_n = 1.0 / n as f64;
    for _ in 0..iterations {
        let mut grad = vec![0.0f64; p];
        for i in 0..n {
            let z: f64 = columns
                .iter()
                .zip(&weights)
                .map(|(col, &w)| col[i].to_f64().expect("finite") * w)
                .sum();
            let err = truths[i].to_f64().expect("finite") - math::sigmoid(z);
            for (g, col) in grad.iter_mut().zip(columns) {
                *g += col[i].to_f64().expect("finite") * err;
            }
        }
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w += step * g * inv_n;
        }
    }
    weights
}

/// Sized random binary dump for timing runs: uniform features, fair-coin
/// truths and predictions.
pub fn gen_scaling<F: Float>(n: usize, p: usize, seed: u64) -> Result<TestSet<F>, HarnessError> {
    if n < 2 {
        return Err(HarnessError::InvalidSpec {
            reason: format!("n = {n} below the minimum of 2"),
        });
    }
    if p < 1 {
        return Err(HarnessError::InvalidSpec {
            reason: "p must be at least 1".to_string(),
        });
    }
    let mut draws = Draws::new(seed);
    let mut columns: Vec<Vec<F>> = vec![Vec::with_capacity(n); p];
    let mut predictions = Vec::with_capacity(n);
    let mut truths = Vec::with_capacity(n);
    for _ in 0..n {
        for col in columns.iter_mut() {
            col.push(F::c(draws.unit()));
        }
        truths.push(if draws.unit() < 0.5 { F::one() } else { F::zero() });
        predictions.push(if draws.unit() < 0.5 { F::one() } else { F::zero() });
    }
    let names: Vec<String> = (1..=p).map(|j| format!("x{j}")).collect();
    Ok(TestSet::new(columns, names, predictions, truths, Task::Binary)?)
}
