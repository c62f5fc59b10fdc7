//! Minimal double-double arithmetic (about 32 significant digits).
//!
//! Used to evaluate cancellation-prone formulas literally, without first
//! rewriting them into a stable closed form.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
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
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact sum of two doubles.
    pub fn sum(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_sum(a, b);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn scale(self, k: f64) -> Dd {
        Dd { hi: self.hi * k, lo: self.lo * k }
    }

    pub fn sqr(self) -> Dd {
        self * self
    }

    /// `(sin x, cos x)` for moderate `|x|` (a few multiples of π).
    pub fn sin_cos(self) -> (Dd, Dd) {
        // Taylor series at x/16, then four angle doublings
        let y = self.scale(1.0 / 16.0);
        let y2 = y.sqr();
        let (mut s, mut c) = (y, Dd::ONE);
        let (mut ts, mut tc) = (y, Dd::ONE);
        for k in 1..=14 {
            let k = k as f64;
            ts = -(ts * y2) / Dd::new((2.0 * k) * (2.0 * k + 1.0));
            tc = -(tc * y2) / Dd::new((2.0 * k - 1.0) * (2.0 * k));
            s = s + ts;
            c = c + tc;
        }
        for _ in 0..4 {
            let s2 = (s * c).scale(2.0);
            c = c.sqr() - s.sqr();
            s = s2;
        }
        (s, c)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_cos_matches_libm() {
        for k in -40..=40 {
            let x = k as f64 * 0.157;
            let (s, c) = Dd::new(x).sin_cos();
            assert!((s.to_f64() - x.sin()).abs() < 2e-16, "{x}");
            assert!((c.to_f64() - x.cos()).abs() < 2e-16, "{x}");
            let one = s.sqr() + c.sqr() - Dd::ONE;
            assert!(one.to_f64().abs() < 1e-30);
        }
    }

    #[test]
    fn division_is_accurate() {
        let q = Dd::ONE / Dd::new(3.0);
        let back = q * Dd::new(3.0) - Dd::ONE;
        assert!(back.to_f64().abs() < 1e-31);
    }
}
