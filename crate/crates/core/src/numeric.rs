//! Small numerical helpers shared by the solvers.

/// `sinh(k a) / sinh(k b)` for `0 <= a <= b`, stable for large `k b` and
/// continuous at `k = 0` where it equals `a / b`.
pub fn sinh_ratio(k: f64, a: f64, b: f64) -> f64 {
    if k == 0.0 {
        return a / b;
    }
    (k * (a - b)).exp() * (-(-2.0 * k * a).exp_m1()) / (-(-2.0 * k * b).exp_m1())
}

/// `k cosh(k a) / sinh(k b)`; tends to `1 / b` as `k -> 0`.
pub fn cosh_ratio(k: f64, a: f64, b: f64) -> f64 {
    if k == 0.0 {
        return 1.0 / b;
    }
    k * (k * (a - b)).exp() * (1.0 + (-2.0 * k * a).exp()) / (-(-2.0 * k * b).exp_m1())
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Trapezoid rule for node values `f` on nodes `times`.
pub fn trapezoid(times: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    times
        .windows(2)
        .enumerate()
        .map(|(i, w)| 0.5 * (w[1] - w[0]) * (f(i) + f(i + 1)))
        .collect::<CompensatedSum>()
        .value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_match_direct_evaluation() {
        for &(k, a, b) in &[(0.7f64, 0.3f64, 1.2f64), (2.0, 1.0, 1.0), (1e-3, 0.5, 2.0)] {
            let direct = (k * a).sinh() / (k * b).sinh();
            assert!((sinh_ratio(k, a, b) - direct).abs() < 1e-13);
            let direct = k * (k * a).cosh() / (k * b).sinh();
            assert!((cosh_ratio(k, a, b) - direct).abs() < 1e-12 * direct.abs());
        }
    }

    #[test]
    fn ratios_are_continuous_at_zero_rate() {
        assert_eq!(sinh_ratio(0.0, 1.0, 4.0), 0.25);
        assert!((sinh_ratio(1e-12, 1.0, 4.0) - 0.25).abs() < 1e-12);
        assert!((cosh_ratio(1e-12, 1.0, 4.0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn ratios_do_not_overflow() {
        let r = sinh_ratio(500.0, 9.0, 10.0);
        assert!(r.is_finite() && r >= 0.0);
        assert!(cosh_ratio(500.0, 10.0, 10.0).is_finite());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: CompensatedSum = [1e16, 1.0, -1e16].into_iter().collect();
        assert_eq!(s.value(), 1.0);
    }
}
