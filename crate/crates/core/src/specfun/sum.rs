/// Neumaier-compensated running sum that also tracks `Σ|term|`, the scale
/// against which accumulated rounding error is measured.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
    abs_sum: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    #[inline]
    pub fn abs_sum(&self) -> f64 {
        self.abs_sum
    }

    /// Bound on the rounding error of the compensated result, assuming each
    /// term carries a relative error of at most `term_rel_err`.
    pub fn rounding_bound(&self, term_rel_err: f64) -> f64 {
        self.abs_sum * (term_rel_err + 2.0 * f64::EPSILON) + f64::EPSILON * self.value().abs()
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of a slice.
pub fn kahan_sum(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<CompensatedSum>().value()
}
