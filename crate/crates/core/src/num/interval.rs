//! Outward-rounded interval arithmetic over [`Wide`].
//!
//! Not a directed-rounding implementation: every operation widens the result
//! by a fixed slack of 4 ulps (8 for transcendental ops), which dominates the
//! one correctly-rounded floating error each `Wide` op commits. The slack
//! figure is recorded in every certificate that consumes these intervals.

use super::wide::Wide;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Div, Mul, Neg, Sub};

pub const SLACK_ULPS: u32 = 4;
const SLACK_TRANS: u32 = 8;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WInt {
    pub lo: Wide,
    pub hi: Wide,
}

impl WInt {
    pub const ZERO: WInt = WInt { lo: Wide::ZERO, hi: Wide::ZERO };

    pub fn point(x: Wide) -> WInt {
        WInt { lo: x, hi: x }
    }

    pub fn new(lo: Wide, hi: Wide) -> WInt {
        assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        WInt { lo, hi }
    }

    /// Interval from two values in either order.
    pub fn hull(a: Wide, b: Wide) -> WInt {
        if a <= b { WInt { lo: a, hi: b } } else { WInt { lo: b, hi: a } }
    }

    pub fn from_f64(x: f64) -> WInt {
        WInt::point(Wide::from_f64(x))
    }

    fn widened(self, k: u32) -> WInt {
        WInt { lo: self.lo.next_down_ulps(k), hi: self.hi.next_up_ulps(k) }
    }

    /// Public outward widening, for callers assembling exact-form bounds.
    pub fn widen_ulps(self, k: u32) -> WInt {
        self.widened(k)
    }

    pub fn contains(self, x: Wide) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn join(self, other: WInt) -> WInt {
        WInt { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn is_positive(self) -> bool {
        self.lo.is_sign_positive()
    }

    /// Square; tight around sign changes.
    pub fn square(self) -> WInt {
        let a = self.lo;
        let b = self.hi;
        let out = if a.is_sign_positive() || a.is_zero() {
            WInt { lo: a * a, hi: b * b }
        } else if b.is_sign_negative() || b.is_zero() {
            WInt { lo: b * b, hi: a * a }
        } else {
            WInt { lo: Wide::ZERO, hi: (a * a).max(b * b) }
        };
        out.widened(SLACK_ULPS)
    }

    /// x^s for a positive interval and real exponent.
    pub fn powf(self, s: f64) -> WInt {
        assert!(self.lo.is_sign_positive(), "powf on non-positive interval");
        let a = self.lo.powf(s);
        let b = self.hi.powf(s);
        WInt::hull(a, b).widened(SLACK_TRANS)
    }

    pub fn recip(self) -> WInt {
        assert!(
            self.lo.is_sign_positive() || self.hi.is_sign_negative(),
            "recip of interval straddling zero"
        );
        WInt { lo: self.hi.recip(), hi: self.lo.recip() }.widened(SLACK_ULPS)
    }

    pub fn scale(self, c: Wide) -> WInt {
        self * WInt::point(c)
    }
}

impl Add for WInt {
    type Output = WInt;
    fn add(self, rhs: WInt) -> WInt {
        WInt { lo: self.lo + rhs.lo, hi: self.hi + rhs.hi }.widened(SLACK_ULPS)
    }
}

impl Sub for WInt {
    type Output = WInt;
    fn sub(self, rhs: WInt) -> WInt {
        WInt { lo: self.lo - rhs.hi, hi: self.hi - rhs.lo }.widened(SLACK_ULPS)
    }
}

impl Mul for WInt {
    type Output = WInt;
    fn mul(self, rhs: WInt) -> WInt {
        let p1 = self.lo * rhs.lo;
        let p2 = self.lo * rhs.hi;
        let p3 = self.hi * rhs.lo;
        let p4 = self.hi * rhs.hi;
        WInt { lo: p1.min(p2).min(p3.min(p4)), hi: p1.max(p2).max(p3.max(p4)) }
            .widened(SLACK_ULPS)
    }
}

impl Div for WInt {
    type Output = WInt;
    fn div(self, rhs: WInt) -> WInt {
        self * rhs.recip()
    }
}

impl Neg for WInt {
    type Output = WInt;
    fn neg(self) -> WInt {
        WInt { lo: -self.hi, hi: -self.lo }
    }
}

impl From<f64> for WInt {
    fn from(x: f64) -> WInt {
        WInt::from_f64(x)
    }
}

impl From<Wide> for WInt {
    fn from(x: Wide) -> WInt {
        WInt::point(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wi(a: f64, b: f64) -> WInt {
        WInt::new(Wide::from_f64(a), Wide::from_f64(b))
    }

    #[test]
    fn basic_containment() {
        let x = wi(1.0, 2.0);
        let y = wi(-3.0, 5.0);
        let s = x + y;
        assert!(s.contains(Wide::from_f64(1.0 + -3.0)));
        assert!(s.contains(Wide::from_f64(2.0 + 5.0)));
        let p = x * y;
        assert!(p.contains(Wide::from_f64(-6.0)));
        assert!(p.contains(Wide::from_f64(10.0)));
        assert!(p.contains(Wide::from_f64(1.5 * 0.5)));
    }

    #[test]
    fn square_straddling_zero() {
        let x = wi(-2.0, 3.0);
        let s = x.square();
        assert!(s.lo <= Wide::ZERO || s.lo.is_zero());
        assert!(s.contains(Wide::from_f64(9.0)));
        assert!(s.contains(Wide::from_f64(0.0)));
        assert!(!s.contains(Wide::from_f64(-1.0)));
    }

    #[test]
    fn division_positive() {
        let x = wi(1.0, 4.0);
        let y = wi(2.0, 8.0);
        let q = x / y;
        assert!(q.contains(Wide::from_f64(0.125)));
        assert!(q.contains(Wide::from_f64(2.0)));
        assert!(q.lo.to_f64() <= 0.125 && q.hi.to_f64() >= 2.0);
    }

    #[test]
    fn widening_is_outward() {
        let x = WInt::point(Wide::from_f64(1.0));
        let y = x + WInt::point(Wide::from_f64(1.0));
        assert!(y.lo.to_f64() <= 2.0 && y.hi.to_f64() >= 2.0);
        assert!(y.lo < y.hi);
        // exact zero endpoints stay exact
        let z = WInt::ZERO + WInt::ZERO;
        assert!(z.lo.is_zero() && z.hi.is_zero());
    }
}
