//! Numeric helpers shared by the analytic and simulation paths.

use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

/// Compensated sum of an iterator.
pub fn sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.extend(iter);
    acc.value()
}

/// Sums non-negative terms from the largest to the smallest.
pub fn sum_descending(mut terms: Vec<f64>) -> f64 {
    terms.sort_unstable_by(|a, b| b.total_cmp(a));
    sum(terms)
}

/// `ln C(n, k)` via log-gamma.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    if k == 0 || k == n {
        return 0.0;
    }
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// `k * ln(x)` with the convention `0^0 = 1`, i.e. returns 0 whenever `k == 0`.
pub fn ln_pow(x: f64, k: u64) -> f64 {
    if k == 0 {
        0.0
    } else if x <= 0.0 {
        f64::NEG_INFINITY
    } else {
        k as f64 * libm::log(x)
    }
}

/// `k * ln(1 - x)` with the convention `0^0 = 1`.
pub fn ln_pow_complement(x: f64, k: u64) -> f64 {
    if k == 0 {
        0.0
    } else if x >= 1.0 {
        f64::NEG_INFINITY
    } else {
        k as f64 * libm::log1p(-x)
    }
}

/// `1 - (1 - x)^k` for `x` in `[0, 1]`, accurate for small `x` and large `k`.
pub fn one_minus_pow_complement(x: f64, k: f64) -> f64 {
    if x >= 1.0 {
        return if k > 0.0 { 1.0 } else { 0.0 };
    }
    -libm::expm1(k * libm::log1p(-x))
}

/// `a^l - (a - d)^l` for `0 <= d <= a <= 1`, without cancellation when `d << a`.
pub fn pow_difference(a: f64, d: f64, l: u64) -> f64 {
    if d <= 0.0 || l == 0 {
        return 0.0;
    }
    if a <= 0.0 {
        return 0.0;
    }
    let ratio = (d / a).min(1.0);
    let lf = l as f64;
    libm::exp(lf * libm::log(a)) * -libm::expm1(lf * libm::log1p(-ratio))
}

/// Deterministic tree of independent random streams.
///
/// A stream is identified by the experiment seed plus a path of labels, e.g.
/// `(seed, placement, trial, user)`. Child streams are derived by hashing the
/// path with SplitMix64, so any node can be reconstructed without touching its
/// siblings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Substream {
    state: u64,
}

impl Substream {
    pub fn new(seed: u64) -> Self {
        Self {
            state: splitmix64(seed ^ 0x6a09_e667_f3bc_c909),
        }
    }

    #[must_use]
    pub fn child(self, label: u64) -> Self {
        Self {
            state: splitmix64(self.state.rotate_left(17) ^ splitmix64(label)),
        }
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.state)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sample mean, sample standard deviation and 95% normal-approximation
/// confidence half-width.
pub fn mean_std_ci95(samples: &[f64]) -> (f64, f64, f64) {
    let k = samples.len();
    if k == 0 {
        return (0.0, 0.0, 0.0);
    }
    let mean = sum(samples.iter().copied()) / k as f64;
    if k == 1 {
        return (mean, 0.0, 0.0);
    }
    let var = sum(samples.iter().map(|x| (x - mean) * (x - mean))) / (k - 1) as f64;
    let std = libm::sqrt(var);
    (
        mean,
        std,
        1.959_963_984_540_054 * std / libm::sqrt(k as f64),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut terms = vec![1.0];
        terms.extend(core::iter::repeat_n(1e-16, 10_000));
        let naive: f64 = terms.iter().sum();
        assert_eq!(naive, 1.0);
        assert!((sum(terms) - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn ln_choose_small_values() {
        assert!((libm::exp(ln_choose(5, 2)) - 10.0).abs() < 1e-9);
        assert_eq!(ln_choose(7, 0), 0.0);
        assert_eq!(ln_choose(7, 7), 0.0);
        // C(5000, 2500) overflows f64 but its log does not.
        assert!(ln_choose(5000, 2500).is_finite());
    }

    #[test]
    fn zero_to_the_zero_is_one() {
        assert_eq!(ln_pow(0.0, 0), 0.0);
        assert_eq!(ln_pow(0.0, 3), f64::NEG_INFINITY);
        assert_eq!(ln_pow_complement(1.0, 0), 0.0);
        assert_eq!(ln_pow_complement(1.0, 2), f64::NEG_INFINITY);
    }

    #[test]
    fn pow_difference_matches_direct_formula() {
        let (a, d) = (0.8, 0.3);
        let direct = libm::pow(a, 4.0) - libm::pow(a - d, 4.0);
        assert!((pow_difference(a, d, 4) - direct).abs() < 1e-15);
        assert!((pow_difference(1.0, 1.0, 3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        use rand::RngCore;
        let a = Substream::new(7).child(1).child(2);
        let b = Substream::new(7).child(1).child(2);
        let c = Substream::new(7).child(2).child(1);
        assert_eq!(a.rng().next_u64(), b.rng().next_u64());
        assert_ne!(a.rng().next_u64(), c.rng().next_u64());
    }

    #[test]
    fn ci_of_constant_samples_is_zero() {
        let (mean, std, ci) = mean_std_ci95(&[2.0, 2.0, 2.0]);
        assert_eq!((mean, std, ci), (2.0, 0.0, 0.0));
    }
}
