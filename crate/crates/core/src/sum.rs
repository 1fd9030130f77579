//! Neumaier-compensated summation.

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = Accumulator::default();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub(crate) struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn fast_two_sum(a: f64, b: f64) -> DoubleDouble {
    let s = a + b;
    DoubleDouble {
        hi: s,
        lo: b - (s - a),
    }
}

impl DoubleDouble {
    /// `self / other`, correct to about 2⁻¹⁰⁴ relative.
    pub fn div(self, other: DoubleDouble) -> DoubleDouble {
        let q1 = self.hi / other.hi;
        let r = (-q1).mul_add(other.hi, self.hi) + self.lo - q1 * other.lo;
        fast_two_sum(q1, r / other.hi)
    }
}

/// Double-double accumulator; products enter exactly via FMA.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct DdAccumulator {
    hi: f64,
    lo: f64,
}

impl DdAccumulator {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let (s, e) = two_sum(self.hi, v);
        self.hi = s;
        self.lo += e;
    }

    #[inline]
    pub fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        self.add(p);
        self.lo += a.mul_add(b, -p);
    }

    pub fn total(&self) -> DoubleDouble {
        fast_two_sum(self.hi, self.lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_double_keeps_low_order_bits() {
        let mut acc = DdAccumulator::default();
        acc.add_product(1.0 - f64::EPSILON / 2.0, 5.0);
        acc.add_product(f64::EPSILON / 2.0, 9.0);
        let t = acc.total();
        assert_eq!(t.hi, 5.0);
        assert_eq!(t.lo, 2.0 * f64::EPSILON);

        let mut w = DdAccumulator::default();
        w.add(1.0 - f64::EPSILON / 2.0);
        w.add(f64::EPSILON / 2.0);
        let q = t.div(w.total());
        assert_eq!((q.hi, q.lo), (t.hi, t.lo));
    }

    #[test]
    fn recovers_cancelled_terms() {
        assert_eq!(sum([1.0, 1e100, 1.0, -1e100]), 2.0);
    }

    #[test]
    fn many_small_terms() {
        let s = sum(std::iter::repeat(0.1).take(1_000_000));
        assert!((s - 100_000.0).abs() < 1e-9);
    }
}
