//! Compensated (Kahan–Babuška–Neumaier) summation.

use std::ops::AddAssign;

#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for v in iter {
            s += v;
        }
        s
    }
}

/// Compensated sum of `values` in iteration order.
pub fn neumaier(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().collect::<NeumaierSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        assert_eq!(neumaier([1.0, 1e100, 1.0, -1e100]), 2.0);
        assert_eq!(neumaier([0.1; 10]), 1.0);
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(neumaier(std::iter::empty()), 0.0);
    }
}
