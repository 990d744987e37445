//! Extended-range floating point.
//!
//! Constructions in this crate span radii far outside the `f64` exponent
//! range (profile transitions stretch over 10^10 decades and more), so all
//! geometric quantities are carried as `Wide`: an `f64` mantissa normalized
//! to `[0.5, 1)` paired with an `i64` binary exponent. Precision matches
//! `f64` (53-bit mantissa); only the exponent range is extended.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// log2(e) split into a double-double pair, used by `exp_ln`.
const LOG2_E_HI: f64 = 1.4426950408889634;
const LOG2_E_LO: f64 = 2.0355273740931033e-17;

/// Value = `m * 2^e` with `|m| ∈ [0.5, 1)`, or exactly zero (`m = 0, e = 0`).
#[derive(Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Wide {
    m: f64,
    e: i64,
}

/// Splits a finite nonzero f64 into (mantissa in [0.5,1), exponent).
fn frexp(x: f64) -> (f64, i64) {
    debug_assert!(x.is_finite());
    if x == 0.0 {
        return (0.0, 0);
    }
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    if exp_bits == 0 {
        // subnormal: rescale into the normal range first
        let (m, e) = frexp(x * f64::exp2(64.0));
        return (m, e - 64);
    }
    let e = exp_bits - 1022;
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, e)
}

/// 2^k for |k| <= 1023 without table lookups.
fn exp2i(k: i64) -> f64 {
    debug_assert!((-1022..=1023).contains(&k));
    f64::from_bits(((1023 + k) as u64) << 52)
}

/// Error-free product: returns (hi, lo) with hi + lo == a*b exactly.
fn two_product(a: f64, b: f64) -> (f64, f64) {
    let hi = a * b;
    let lo = a.mul_add(b, -hi);
    (hi, lo)
}

/// Error-free sum: returns (hi, lo) with hi + lo == a + b exactly.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

impl Wide {
    pub const ZERO: Wide = Wide { m: 0.0, e: 0 };
    pub const ONE: Wide = Wide { m: 0.5, e: 1 };

    /// Normalizing constructor.
    pub fn new(m: f64, e: i64) -> Wide {
        assert!(m.is_finite(), "Wide::new on non-finite mantissa");
        if m == 0.0 {
            return Wide::ZERO;
        }
        let (f, k) = frexp(m);
        Wide { m: f, e: e.checked_add(k).expect("Wide exponent overflow") }
    }

    pub fn from_f64(x: f64) -> Wide {
        Wide::new(x, 0)
    }

    pub fn to_f64(self) -> f64 {
        if self.m == 0.0 {
            return 0.0;
        }
        if self.e > 1024 {
            return if self.m > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        if self.e < -1070 {
            return if self.m > 0.0 { 0.0 } else { -0.0 };
        }
        if self.e >= -1021 {
            self.m * exp2i(self.e)
        } else {
            // subnormal target: split the scaling
            self.m * exp2i(-1021) * exp2i(self.e + 1021)
        }
    }

    pub fn mantissa(self) -> f64 {
        self.m
    }

    pub fn exponent(self) -> i64 {
        self.e
    }

    pub fn is_zero(self) -> bool {
        self.m == 0.0
    }

    pub fn is_sign_positive(self) -> bool {
        self.m > 0.0
    }

    pub fn is_sign_negative(self) -> bool {
        self.m < 0.0
    }

    pub fn abs(self) -> Wide {
        Wide { m: self.m.abs(), e: if self.m == 0.0 { 0 } else { self.e } }
    }

    pub fn recip(self) -> Wide {
        Wide::ONE / self
    }

    pub fn sqrt(self) -> Wide {
        assert!(self.m >= 0.0, "Wide::sqrt of negative value");
        if self.m == 0.0 {
            return Wide::ZERO;
        }
        if self.e % 2 == 0 {
            Wide::new(self.m.sqrt(), self.e / 2)
        } else {
            Wide::new((self.m * 2.0).sqrt(), (self.e - 1) / 2)
        }
    }

    /// Natural log as f64. Relative error ~1e-16 of the log itself.
    pub fn ln_f64(self) -> f64 {
        assert!(self.m > 0.0, "Wide::ln of non-positive value");
        (self.e as f64) * std::f64::consts::LN_2 + self.m.ln()
    }

    pub fn log10_f64(self) -> f64 {
        assert!(self.m > 0.0, "Wide::log10 of non-positive value");
        (self.e as f64) * std::f64::consts::LOG10_2 + self.m.log10()
    }

    /// log2 as a double-double pair (hi, lo). Exact enough to preserve the
    /// fractional part even when the exponent is ~1e16.
    fn log2_dd(self) -> (f64, f64) {
        assert!(self.m > 0.0, "Wide::log2 of non-positive value");
        let frac = self.m.log2(); // in (-1, 0]
        // |e| may exceed 2^53; split into exactly representable halves.
        let e_hi = (self.e >> 26) as f64 * exp2i(26);
        let e_lo = (self.e & ((1 << 26) - 1)) as f64;
        let (s1, t1) = two_sum(e_hi, e_lo);
        let (s2, t2) = two_sum(s1, frac);
        (s2, t1 + t2)
    }

    /// Builds a Wide from a base-2 exponent given as a double-double pair.
    fn from_log2_dd(hi: f64, lo: f64) -> Wide {
        let k = hi.floor();
        let mut f = (hi - k) + lo; // hi - k is exact (floor of same magnitude)
        let mut ki = k as i64;
        if f < 0.0 {
            f += 1.0;
            ki -= 1;
        } else if f >= 1.0 {
            f -= 1.0;
            ki += 1;
        }
        Wide::new(f64::exp2(f), ki)
    }

    /// self^s for positive self and arbitrary real s.
    pub fn powf(self, s: f64) -> Wide {
        assert!(self.m > 0.0, "Wide::powf of non-positive base");
        if s == 0.0 {
            return Wide::ONE;
        }
        if s == 1.0 {
            return self;
        }
        let (hi, lo) = self.log2_dd();
        let (p_hi, p_lo) = two_product(s, hi);
        Wide::from_log2_dd(p_hi, p_lo + s * lo)
    }

    pub fn powi(self, k: i32) -> Wide {
        if k == 0 {
            return Wide::ONE;
        }
        let mut base = if k > 0 { self } else { self.recip() };
        let mut n = k.unsigned_abs();
        let mut acc = Wide::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    /// e^x as a Wide, for f64 x of any sign (x may be ~1e15).
    pub fn exp_ln(x: f64) -> Wide {
        let (p_hi, p_lo) = two_product(x, LOG2_E_HI);
        Wide::from_log2_dd(p_hi, p_lo + x * LOG2_E_LO)
    }

    pub fn max(self, other: Wide) -> Wide {
        if self >= other { self } else { other }
    }

    pub fn min(self, other: Wide) -> Wide {
        if self <= other { self } else { other }
    }

    /// Nudges the value up by `k` units in the last mantissa place.
    pub fn next_up_ulps(self, k: u32) -> Wide {
        if self.m == 0.0 {
            return self;
        }
        Wide::new(self.m + k as f64 * (f64::EPSILON / 2.0), self.e)
    }

    /// Nudges the value down by `k` units in the last mantissa place.
    pub fn next_down_ulps(self, k: u32) -> Wide {
        if self.m == 0.0 {
            return self;
        }
        Wide::new(self.m - k as f64 * (f64::EPSILON / 2.0), self.e)
    }

    /// |self/other - 1|, as f64, for relative-tolerance comparisons.
    pub fn rel_diff(self, other: Wide) -> f64 {
        if self.is_zero() && other.is_zero() {
            return 0.0;
        }
        if other.is_zero() {
            return f64::INFINITY;
        }
        ((self / other) - Wide::ONE).abs().to_f64()
    }

    /// Geometric mean of two positive values; exact exponent handling.
    pub fn geo_mean(self, other: Wide) -> Wide {
        (self * other).sqrt()
    }

    /// Error-free product: (hi, lo) with hi + lo equal to self * other
    /// exactly (mantissa fma residual).
    pub fn two_product(self, other: Wide) -> (Wide, Wide) {
        if self.is_zero() || other.is_zero() {
            return (Wide::ZERO, Wide::ZERO);
        }
        let p = self.m * other.m;
        let r = self.m.mul_add(other.m, -p);
        let e = self.e + other.e;
        (Wide::new(p, e), Wide::new(r, e))
    }

    /// Neumaier-compensated sum: error ~eps² of the running magnitude, which
    /// keeps structurally-cancelling coefficient sums at their true sign.
    pub fn comp_sum(xs: &[Wide]) -> Wide {
        let mut s = Wide::ZERO;
        let mut c = Wide::ZERO;
        for &x in xs {
            let t = s + x;
            if s.abs() >= x.abs() {
                c = c + ((s - t) + x);
            } else {
                c = c + ((x - t) + s);
            }
            s = t;
        }
        s + c
    }
}

impl Add for Wide {
    type Output = Wide;
    fn add(self, rhs: Wide) -> Wide {
        if self.m == 0.0 {
            return rhs;
        }
        if rhs.m == 0.0 {
            return self;
        }
        let d = self.e - rhs.e;
        if d >= 55 {
            return self;
        }
        if d <= -55 {
            return rhs;
        }
        if d >= 0 {
            Wide::new(self.m * exp2i(d) + rhs.m, rhs.e)
        } else {
            Wide::new(self.m + rhs.m * exp2i(-d), self.e)
        }
    }
}

impl Sub for Wide {
    type Output = Wide;
    fn sub(self, rhs: Wide) -> Wide {
        self + (-rhs)
    }
}

impl Mul for Wide {
    type Output = Wide;
    fn mul(self, rhs: Wide) -> Wide {
        if self.m == 0.0 || rhs.m == 0.0 {
            return Wide::ZERO;
        }
        Wide::new(self.m * rhs.m, self.e + rhs.e)
    }
}

impl Div for Wide {
    type Output = Wide;
    fn div(self, rhs: Wide) -> Wide {
        assert!(rhs.m != 0.0, "Wide division by zero");
        if self.m == 0.0 {
            return Wide::ZERO;
        }
        Wide::new(self.m / rhs.m, self.e - rhs.e)
    }
}

impl Neg for Wide {
    type Output = Wide;
    fn neg(self) -> Wide {
        Wide { m: -self.m, e: self.e }
    }
}

impl From<f64> for Wide {
    fn from(x: f64) -> Wide {
        Wide::from_f64(x)
    }
}

impl PartialOrd for Wide {
    fn partial_cmp(&self, other: &Wide) -> Option<Ordering> {
        let sa = if self.m == 0.0 { 0 } else if self.m > 0.0 { 1 } else { -1 };
        let sb = if other.m == 0.0 { 0 } else if other.m > 0.0 { 1 } else { -1 };
        if sa != sb {
            return sa.partial_cmp(&sb);
        }
        if sa == 0 {
            return Some(Ordering::Equal);
        }
        // same nonzero sign: larger exponent means larger magnitude, so the
        // exponent comparison flips for negatives; equal-exponent mantissas
        // compare directly in both cases.
        let ord = if sa > 0 {
            self.e.cmp(&other.e).then(self.m.partial_cmp(&other.m)?)
        } else {
            other.e.cmp(&self.e).then(self.m.partial_cmp(&other.m)?)
        };
        Some(ord)
    }
}

impl fmt::Debug for Wide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Wide {
    /// Decimal rendering, lossy for extreme exponents (documents use the
    /// exact (m, e) pair; this form is for logs and CSV).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m == 0.0 {
            return write!(f, "0");
        }
        if self.e.abs() < 900 {
            let v = self.to_f64();
            return write!(f, "{v:e}");
        }
        let l10 = self.abs().log10_f64();
        let d_exp = l10.floor();
        let mant = 10f64.powf(l10 - d_exp) * self.m.signum();
        write!(f, "{mant:.15}e{d_exp:+}")
    }
}
