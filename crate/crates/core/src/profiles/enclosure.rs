//! Certified interval enclosures of segments and profiles.
//!
//! Closed-form segments are bounded by monotonicity analysis (endpoints plus
//! interior critical points); bridges by Bernstein-form coefficient bounds.
//! Besides the (value, d1, d2) ranges, each enclosure carries two combined
//! atoms used by the curvature verifier: `r/f` and `r²·f''/f`. These stay
//! bounded across arbitrarily long log-range segments, which is what lets a
//! single subinterval certify a slope blend spanning thousands of decades.

use super::bridge;
use super::{PiecewiseProfile, ProfileError, Segment, SegmentKind};
use crate::num::{WInt, Wide};
use serde::{Deserialize, Serialize};

/// Combined atoms that only exist for windows where the value range is
/// strictly positive.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Atoms {
    /// range of r / f(r)
    pub r_over_f: WInt,
    /// range of r² f''(r) / f(r)
    pub r2_d2_over_f: WInt,
    /// range of r f'(r) / f(r): exactly the exponent for power pieces, which
    /// keeps cross terms tight across huge log-ranges
    pub r_d1_over_f: WInt,
    /// range of 1 - f'(r), exact zero where the slope is exactly one; the
    /// factored curvature form for unit-normalized fibers needs the sign of
    /// this atom pinned at smooth apices
    pub one_minus_d1: WInt,
}

/// Certified bounds for one profile over one r-interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Enclosure {
    pub r_lo: Wide,
    pub r_hi: Wide,
    pub value: WInt,
    pub d1: WInt,
    pub d2: WInt,
    /// present iff the value range is strictly positive on the window
    pub atoms: Option<Atoms>,
}

impl Enclosure {
    fn join(self, other: Enclosure) -> Enclosure {
        let atoms = match (self.atoms, other.atoms) {
            (Some(a), Some(b)) => Some(Atoms {
                r_over_f: a.r_over_f.join(b.r_over_f),
                r2_d2_over_f: a.r2_d2_over_f.join(b.r2_d2_over_f),
                r_d1_over_f: a.r_d1_over_f.join(b.r_d1_over_f),
                one_minus_d1: a.one_minus_d1.join(b.one_minus_d1),
            }),
            _ => None,
        };
        Enclosure {
            r_lo: self.r_lo.min(other.r_lo),
            r_hi: self.r_hi.max(other.r_hi),
            value: self.value.join(other.value),
            d1: self.d1.join(other.d1),
            d2: self.d2.join(other.d2),
            atoms,
        }
    }
}

fn hull3(a: Wide, b: Wide, c: Option<Wide>) -> WInt {
    let mut out = WInt::hull(a, b);
    if let Some(c) = c {
        out = out.join(WInt::point(c));
    }
    out
}

/// Enclosure of a single segment over `[lo, hi]` (must lie inside the
/// segment's own interval).
pub fn enclose_segment(seg: &Segment, lo: Wide, hi: Wide) -> Enclosure {
    debug_assert!(lo >= seg.lo || (lo - seg.lo).abs().to_f64() == 0.0);
    let r = WInt::new(lo, hi);
    match &seg.kind {
        SegmentKind::Linear { a, b } => {
            let vlo = *a * lo + *b;
            let vhi = *a * hi + *b;
            let value = WInt::hull(vlo, vhi);
            // r/f monotone between endpoints (sign of b decides direction)
            let atoms = value.lo.is_sign_positive().then(|| Atoms {
                r_over_f: WInt::hull(lo / vlo, hi / vhi).widen_ulps(8),
                r2_d2_over_f: WInt::ZERO,
                // a·r/(a·r+b) is monotone between the endpoints
                r_d1_over_f: WInt::hull(*a * lo / vlo, *a * hi / vhi).widen_ulps(8),
                one_minus_d1: WInt::point(Wide::ONE - *a),
            });
            Enclosure { r_lo: lo, r_hi: hi, value, d1: WInt::point(*a), d2: WInt::ZERO, atoms }
        }
        SegmentKind::Power { a, s } => {
            let vlo = *a * lo.powf(*s);
            let vhi = *a * hi.powf(*s);
            let value = WInt::hull(vlo, vhi);
            let sv = Wide::from_f64(*s);
            let s1 = Wide::from_f64(*s - 1.0);
            let d1 = WInt::hull(sv * vlo / lo, sv * vhi / hi).widen_ulps(8);
            let d2 = WInt::hull(sv * s1 * vlo / (lo * lo), sv * s1 * vhi / (hi * hi)).widen_ulps(8);
            let atoms = value.lo.is_sign_positive().then(|| Atoms {
                r_over_f: WInt::hull(lo / vlo, hi / vhi).widen_ulps(8),
                r2_d2_over_f: WInt::point(sv * s1).widen_ulps(8),
                r_d1_over_f: WInt::point(sv).widen_ulps(8),
                one_minus_d1: (WInt::point(Wide::ONE) - d1).widen_ulps(8),
            });
            Enclosure { r_lo: lo, r_hi: hi, value, d1, d2, atoms }
        }
        SegmentKind::Constant { v } => Enclosure {
            r_lo: lo,
            r_hi: hi,
            value: WInt::point(*v),
            d1: WInt::ZERO,
            d2: WInt::ZERO,
            atoms: v.is_sign_positive().then(|| Atoms {
                r_over_f: WInt::hull(lo / *v, hi / *v).widen_ulps(8),
                r2_d2_over_f: WInt::ZERO,
                r_d1_over_f: WInt::ZERO,
                one_minus_d1: WInt::point(Wide::ONE),
            }),
        },
        SegmentKind::LogBlend { c, r0, slope, b } => {
            let f = |r: Wide| {
                let l = Wide::from_f64((r / *r0).ln_f64());
                *slope * r + *c * r * (l - Wide::ONE) + *b
            };
            // value: critical point where f' = slope + c ln(r/r0) = 0
            let crit_v = if !c.is_zero() {
                let t = -(*slope / *c).to_f64();
                if t.is_finite() {
                    let rc = *r0 * Wide::exp_ln(t);
                    (rc > lo && rc < hi).then(|| f(rc))
                } else {
                    None
                }
            } else {
                None
            };
            let value = hull3(f(lo), f(hi), crit_v);
            // d1 monotone in r
            let l_lo = Wide::from_f64((lo / *r0).ln_f64());
            let l_hi = Wide::from_f64((hi / *r0).ln_f64());
            let d1 = WInt::hull(*slope + *c * l_lo, *slope + *c * l_hi);
            let d2 = WInt::hull(*c / lo, *c / hi);
            // f/r = slope + c(ln(r/r0) - 1) + b/r has critical point at r = b/c
            let fr = |r: Wide| f(r) / r;
            let crit_fr = if !c.is_zero() && !b.is_zero() {
                let rc = *b / *c;
                (rc > lo && rc < hi).then(|| fr(rc))
            } else {
                None
            };
            let f_over_r = hull3(fr(lo), fr(hi), crit_fr);
            let atoms = (value.lo.is_sign_positive() && f_over_r.lo.is_sign_positive()).then(|| {
                let r_over_f = f_over_r.recip();
                // r² (c/r) / f = c * (r/f)
                Atoms {
                    r_over_f,
                    r2_d2_over_f: r_over_f.scale(*c),
                    r_d1_over_f: d1 * r_over_f,
                    one_minus_d1: WInt::point(Wide::ONE) - d1,
                }
            });
            Enclosure { r_lo: lo, r_hi: hi, value, d1, d2, atoms }
        }
        SegmentKind::Bridge { coef } => {
            let w_lo = seg.lo;
            let h = seg.hi.expect("bridge is bounded") - w_lo;
            let t0 = ((lo - w_lo) / h).to_f64().clamp(0.0, 1.0);
            let t1 = ((hi - w_lo) / h).to_f64().clamp(t0, 1.0);
            let value = bridge::bernstein_range(coef, t0, t1);
            let dcoef = bridge::derive(coef);
            let d1 = bridge::bernstein_range_deg(&dcoef, 4, t0, t1).scale(h.recip());
            let ddcoef = bridge::derive_deg(&dcoef, 4);
            let d2 = bridge::bernstein_range_deg(&ddcoef, 3, t0, t1).scale((h * h).recip());
            // (h - p')/h as its own Bernstein pass: the leading coefficient
            // h - a1 is an exact zero for unit-slope junctions
            let mut omcoef = [Wide::ZERO; 6];
            omcoef[0] = h - dcoef[0];
            for i in 1..5 {
                omcoef[i] = -dcoef[i];
            }
            let one_minus_d1 =
                bridge::bernstein_range_deg(&omcoef, 4, t0, t1).scale(h.recip());
            let atoms = value.lo.is_sign_positive().then(|| Atoms {
                r_over_f: r / value,
                r2_d2_over_f: r.square() * d2 / value,
                r_d1_over_f: r * d1 / value,
                one_minus_d1,
            });
            Enclosure { r_lo: lo, r_hi: hi, value, d1, d2, atoms }
        }
    }
}

/// Certified enclosure of a profile over an interval, splitting at segment
/// breakpoints and joining.
pub fn enclose(profile: &PiecewiseProfile, lo: Wide, hi: Wide) -> Result<Enclosure, ProfileError> {
    if hi < lo {
        return Err(ProfileError::BadParameter("inverted enclosure interval".into()));
    }
    let i0 = profile.segment_index(lo)?;
    let i1 = profile.segment_index(hi)?;
    let mut acc: Option<Enclosure> = None;
    for i in i0..=i1 {
        let seg = &profile.segments[i];
        let s_lo = if seg.lo > lo { seg.lo } else { lo };
        let s_hi = match seg.hi {
            Some(h) if h < hi => h,
            _ => hi,
        };
        if s_hi < s_lo {
            continue;
        }
        // zero-width overlaps at breakpoints are kept: pointwise evaluation
        // at the breakpoint resolves to the right segment, whose jet must be
        // covered by the enclosure too
        let e = enclose_segment(seg, s_lo, s_hi);
        acc = Some(match acc {
            None => e,
            Some(a) => a.join(e),
        });
    }
    Ok(acc.expect("non-empty enclosure"))
}
