//! Shared test oracles, written independently of the library's solver path:
//! plain sums, no Newton steps, no tilted-covariance Hessians.
//!
//! Each integration-test binary uses its own subset of these helpers.
#![allow(dead_code)]

/// Compensated sum, independent of the library's helper.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut total = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let y = v - comp;
        let t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    total
}

/// Stabilized `log[(1/n) sum_i exp(xi * phi_i)]`.
pub fn oracle_log_z(phi: &[f64], xi: f64) -> f64 {
    let m = phi
        .iter()
        .map(|&v| xi * v)
        .fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = phi.iter().map(|&v| (xi * v - m).exp()).sum();
    m + (s / phi.len() as f64).ln()
}

/// The dual objective `H(xi) = log Z(xi) - xi * t`.
pub fn oracle_dual(phi: &[f64], t: f64, xi: f64) -> f64 {
    oracle_log_z(phi, xi) - xi * t
}

fn grid_argmin(phi: &[f64], t: f64, a: f64, b: f64, points: usize) -> (usize, f64, f64) {
    let step = (b - a) / (points - 1) as f64;
    let mut best_idx = 0;
    let mut best_val = f64::INFINITY;
    for i in 0..points {
        let x = a + step * i as f64;
        let h = oracle_dual(phi, t, x);
        if h < best_val {
            best_val = h;
            best_idx = i;
        }
    }
    (best_idx, a + step * best_idx as f64, step)
}

/// Minimize the dual by pure grid refinement down to a step of 1e-7, then
/// return the tilted weights at the grid minimizer. Convexity of the dual
/// keeps the true minimizer inside the refined window at every stage.
pub fn oracle_solve(phi: &[f64], t: f64) -> (f64, Vec<f64>) {
    let points = 129usize;
    let mut radius = 1.0f64;
    let (mut a, mut b);
    loop {
        let (idx, x, step) = grid_argmin(phi, t, -radius, radius, points);
        if idx > 0 && idx < points - 1 {
            a = x - step;
            b = x + step;
            break;
        }
        radius *= 4.0;
        assert!(
            radius < 1e12,
            "oracle failed to bracket the dual minimizer (target {t})"
        );
    }
    loop {
        let (idx, x, step) = grid_argmin(phi, t, a, b, points);
        if step <= 1e-7 {
            let log_z = oracle_log_z(phi, x);
            let lambdas = phi.iter().map(|&v| (x * v - log_z).exp()).collect();
            return (x, lambdas);
        }
        a = x - step.max(1e-9);
        b = x + step.max(1e-9);
        let _ = idx;
    }
}

/// Deterministic xorshift-based stream for test instance generation,
/// independent of the library's ChaCha streams.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    /// Uniform on [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn usize_in(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }
}
