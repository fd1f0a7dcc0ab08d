//! Neumaier-compensated accumulation.
//!
//! Moments such as `<G^2>` grow like the fourth power of the photon number while the
//! variance is a difference of two such terms, so plain summation loses digits fast.

use std::iter::Sum;
use std::ops::{Add, AddAssign};

#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

impl AddAssign<f64> for NeumaierSum {
    #[inline]
    fn add_assign(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }
}

impl Add for NeumaierSum {
    type Output = NeumaierSum;

    fn add(mut self, rhs: Self) -> Self {
        self += rhs.s;
        self += rhs.c;
        self
    }
}

impl Sum<f64> for NeumaierSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc += x;
        }
        acc
    }
}

/// Compensated sum of an iterator of `f64`.
pub fn csum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().sum::<NeumaierSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(csum(xs), 2.0);
        let naive: f64 = xs.iter().sum();
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn merge_is_consistent() {
        let a: NeumaierSum = (1..=1000).map(|k| 1.0 / k as f64).sum();
        let b: NeumaierSum = (1001..=2000).map(|k| 1.0 / k as f64).sum();
        let all = csum((1..=2000).map(|k| 1.0 / k as f64));
        assert!(((a + b).value() - all).abs() < 1e-15);
    }
}
