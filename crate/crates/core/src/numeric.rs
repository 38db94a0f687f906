//! Small floating-point helpers shared across modules.

/// Exponents up to this size use exact-path repeated squaring.
const SQUARING_LIMIT: u64 = 64;

/// `base^exp` for an integer exponent.
pub(crate) fn powu(base: f64, exp: u64) -> f64 {
    if exp > SQUARING_LIMIT {
        return libm::pow(base, exp as f64);
    }
    let mut result = 1.0;
    let mut b = base;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result *= b;
        }
        b *= b;
        e >>= 1;
    }
    result
}

/// `1 - p^2`, computed without cancellation near `p = 1`.
pub(crate) fn one_minus_sq(p: f64) -> f64 {
    (1.0 - p) * (1.0 + p)
}

/// `(1 - p^2)^(n/2)` for an integer `n`, i.e. `sqrt(1 - p^2)^n`.
pub(crate) fn half_power(p: f64, n: u64) -> f64 {
    let base = one_minus_sq(p);
    let whole = powu(base, n / 2);
    if n % 2 == 1 {
        whole * libm::sqrt(base)
    } else {
        whole
    }
}

/// Compensated (Kahan–Babuška–Neumaier) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            compensation: 0.0,
        }
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl core::iter::FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powu_matches_libm() {
        for &b in &[0.0, 0.3, 0.75, 0.999, 1.0] {
            for e in 0..200u64 {
                let got = powu(b, e);
                let want = libm::pow(b, e as f64);
                assert!((got - want).abs() <= 1e-14 * want.max(1e-300), "{b}^{e}");
            }
        }
        assert_eq!(powu(0.0, 0), 1.0);
    }

    #[test]
    fn half_power_odd_and_even() {
        let p: f64 = 0.5;
        assert!((half_power(p, 2) - 0.75).abs() < 1e-15);
        assert!((half_power(p, 3) - 0.75f64.powf(1.5)).abs() < 1e-15);
        assert_eq!(half_power(p, 0), 1.0);
    }

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let acc: NeumaierSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(acc.value(), 2.0);
    }
}
