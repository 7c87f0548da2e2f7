//! Compensated floating-point accumulation.
//!
//! The estimators sum tens of thousands of window products per run and the
//! quantity of interest (a bias of order 1e-4 or smaller) sits far below the
//! naive rounding drift, so every long-running sum goes through [`KahanSum`].

use std::ops::AddAssign;

/// Neumaier's variant of Kahan summation.
///
/// Unlike plain Kahan it stays exact when an addend is larger in magnitude
/// than the running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            compensation: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl AddAssign<f64> for KahanSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

impl<'a> FromIterator<&'a f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = &'a f64>>(iter: I) -> Self {
        iter.into_iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_lost_by_naive_sum() {
        let mut acc = KahanSum::new();
        acc += 1.0;
        for _ in 0..10_000 {
            acc += 1e-16;
        }
        let naive = (0..10_000).fold(1.0, |s, _| s + 1e-16);
        assert_eq!(naive, 1.0);
        assert!((acc.value() - (1.0 + 1e-12)).abs() < 1e-20);
    }

    #[test]
    fn large_addend_after_small_sum() {
        let acc: KahanSum = [1.0, 1e100, 1.0, -1e100].iter().collect();
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(KahanSum::new().value(), 0.0);
    }
}
