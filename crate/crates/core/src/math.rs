//! Small numeric helpers shared across modules.
//!
//! Sums that feed normalization and identity checks use Neumaier compensation
//! so their error stays at a few ulps independent of `n`. Every reduction runs
//! in fixed index order, which keeps results bit-identical across thread
//! counts.

use crate::float::Float;

/// Compensated (Neumaier) accumulator; push order defines the result.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<F> {
    total: F,
    comp: F,
}

impl<F: Float> CompensatedSum<F> {
    pub fn new() -> Self {
        Self {
            total: F::zero(),
            comp: F::zero(),
        }
    }

    #[inline]
    pub fn push(&mut self, v: F) {
        let t = self.total + v;
        if self.total.abs() >= v.abs() {
            self.comp = self.comp + ((self.total - t) + v);
        } else {
            self.comp = self.comp + ((v - t) + self.total);
        }
        self.total = t;
    }

    #[inline]
    pub fn value(&self) -> F {
        self.total + self.comp
    }
}

impl<F: Float> Default for CompensatedSum<F> {
    fn default() -> Self {
        Self::new()
    }
}

/// Compensated (Neumaier) sum over an iterator, in iteration order.
pub fn sum<F: Float, I>(values: I) -> F
where
    I: IntoIterator<Item = F>,
{
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.push(v);
    }
    acc.value()
}

/// Arithmetic mean of a slice. Empty input returns zero.
pub fn mean<F: Float>(values: &[F]) -> F {
    if values.is_empty() {
        return F::zero();
    }
    sum(values.iter().copied()) / F::from_count(values.len())
}

/// Dot product in fixed order.
pub fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    sum(a.iter().zip(b).map(|(&x, &y)| x * y))
}

/// Numerically stable logistic function 1 / (1 + e^{-z}).
pub fn sigmoid<F: Float>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}
