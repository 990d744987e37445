//! Whole-profile transforms: rescaling, fiber scaling, gluing.
//!
//! All three act segmentwise on stored parameters, never by refitting
//! samples, so compositions of transforms remain exact piecewise-analytic
//! objects.

use super::{PiecewiseProfile, ProfileError, Segment, SegmentKind, MATCH_RTOL};
use crate::num::Wide;

/// `r ↦ A⁻¹ · profile(A·r)`: the parabolic rescaling of the metric by A.
/// Every segment kind is closed under this map.
pub fn rescale(profile: &PiecewiseProfile, a: Wide) -> PiecewiseProfile {
    assert!(a.is_sign_positive(), "rescale factor must be positive");
    let segments = profile
        .segments
        .iter()
        .map(|seg| {
            let kind = match &seg.kind {
                SegmentKind::Linear { a: sl, b } => {
                    SegmentKind::Linear { a: *sl, b: *b / a }
                }
                // A^(s-1) via A^s / A: the f64 rounding of s-1 would shift
                // the exponent by ~ulp(1)·log2(A), visible at telescope
                // scales; keeping every power on the stored s cancels exactly
                SegmentKind::Power { a: coef, s } => SegmentKind::Power {
                    a: *coef * a.powf(*s) / a,
                    s: *s,
                },
                SegmentKind::LogBlend { c, r0, slope, b } => SegmentKind::LogBlend {
                    c: *c,
                    r0: *r0 / a,
                    slope: *slope,
                    b: *b / a,
                },
                SegmentKind::Constant { v } => SegmentKind::Constant { v: *v / a },
                SegmentKind::Bridge { coef } => {
                    let mut c = *coef;
                    for ci in c.iter_mut() {
                        *ci = *ci / a;
                    }
                    super::bridge::resnap_bridge(&mut c);
                    SegmentKind::Bridge { coef: c }
                }
            };
            Segment::new(seg.lo / a, seg.hi.map(|h| h / a), kind)
        })
        .collect();
    PiecewiseProfile { segments }
}

/// `r ↦ c · profile(r)`: scales one fiber's warp without touching the base.
pub fn scale_fiber(profile: &PiecewiseProfile, c: Wide) -> PiecewiseProfile {
    assert!(c.is_sign_positive(), "fiber scale must be positive");
    let segments = profile
        .segments
        .iter()
        .map(|seg| {
            let kind = match &seg.kind {
                SegmentKind::Linear { a, b } => {
                    SegmentKind::Linear { a: *a * c, b: *b * c }
                }
                SegmentKind::Power { a, s } => SegmentKind::Power { a: *a * c, s: *s },
                SegmentKind::LogBlend { c: cc, r0, slope, b } => SegmentKind::LogBlend {
                    c: *cc * c,
                    r0: *r0,
                    slope: *slope * c,
                    b: *b * c,
                },
                SegmentKind::Constant { v } => SegmentKind::Constant { v: *v * c },
                SegmentKind::Bridge { coef } => {
                    let mut cf = *coef;
                    for ci in cf.iter_mut() {
                        *ci = *ci * c;
                    }
                    super::bridge::resnap_bridge(&mut cf);
                    SegmentKind::Bridge { coef: cf }
                }
            };
            Segment::new(seg.lo, seg.hi, kind)
        })
        .collect();
    PiecewiseProfile { segments }
}

fn kinds_match(a: &SegmentKind, b: &SegmentKind) -> Option<f64> {
    let rel = |x: Wide, y: Wide| -> f64 {
        let scale = x.abs().max(y.abs());
        if scale.is_zero() {
            0.0
        } else {
            ((x - y).abs() / scale).to_f64()
        }
    };
    match (a, b) {
        (SegmentKind::Linear { a: a1, b: b1 }, SegmentKind::Linear { a: a2, b: b2 }) => {
            Some(rel(*a1, *a2).max(rel(*b1, *b2)))
        }
        (SegmentKind::Power { a: a1, s: s1 }, SegmentKind::Power { a: a2, s: s2 }) => {
            let se = (s1 - s2).abs() / s1.abs().max(s2.abs()).max(1e-300);
            Some(rel(*a1, *a2).max(se))
        }
        (SegmentKind::Constant { v: v1 }, SegmentKind::Constant { v: v2 }) => Some(rel(*v1, *v2)),
        (
            SegmentKind::LogBlend { c: c1, r0: r1, slope: s1, b: b1 },
            SegmentKind::LogBlend { c: c2, r0: r2, slope: s2, b: b2 },
        ) => Some(rel(*c1, *c2).max(rel(*r1, *r2)).max(rel(*s1, *s2)).max(rel(*b1, *b2))),
        (SegmentKind::Bridge { coef: ca }, SegmentKind::Bridge { coef: cb }) => {
            let mut worst = 0.0f64;
            for (x, y) in ca.iter().zip(cb) {
                worst = worst.max(rel(*x, *y));
            }
            Some(worst)
        }
        _ => None,
    }
}

/// Glues two profiles that agree on an overlap interval: the result equals
/// `left` before the overlap and `right` after it. Agreement is checked
/// segmentwise (identical kinds, parameters within 1e-12 relative).
pub fn glue(
    left: &PiecewiseProfile,
    right: &PiecewiseProfile,
    overlap_lo: Wide,
    overlap_hi: Wide,
) -> Result<PiecewiseProfile, ProfileError> {
    if overlap_hi <= overlap_lo {
        return Err(ProfileError::BadParameter("empty glue overlap".into()));
    }
    // verify agreement on the overlap
    let l_res = left.restricted(overlap_lo, Some(overlap_hi))?;
    let r_res = right.restricted(overlap_lo, Some(overlap_hi))?;
    if l_res.segments.len() != r_res.segments.len() {
        return Err(ProfileError::GlueMismatch {
            at: overlap_lo,
            discrepancy: f64::INFINITY,
            detail: format!(
                "segment count {} vs {}",
                l_res.segments.len(),
                r_res.segments.len()
            ),
        });
    }
    let mut worst = 0.0f64;
    let mut worst_at = overlap_lo;
    let mut worst_detail = String::new();
    for (ls, rs) in l_res.segments.iter().zip(&r_res.segments) {
        if ls.lo != rs.lo || ls.hi != rs.hi {
            return Err(ProfileError::GlueMismatch {
                at: ls.lo,
                discrepancy: f64::INFINITY,
                detail: "breakpoints differ".into(),
            });
        }
        match kinds_match(&ls.kind, &rs.kind) {
            Some(d) => {
                if d > worst {
                    worst = d;
                    worst_at = ls.lo;
                    worst_detail = format!("{:?} vs {:?}", ls.kind, rs.kind);
                }
            }
            None => {
                return Err(ProfileError::GlueMismatch {
                    at: ls.lo,
                    discrepancy: f64::INFINITY,
                    detail: format!("kinds differ: {:?} vs {:?}", ls.kind, rs.kind),
                })
            }
        }
    }
    if worst > MATCH_RTOL {
        return Err(ProfileError::GlueMismatch {
            at: worst_at,
            discrepancy: worst,
            detail: worst_detail,
        });
    }

    // splice at the geometric middle of the overlap, inside an exact segment
    let splice = overlap_lo.geo_mean(overlap_hi);
    let mut head = left.restricted(left.start(), Some(splice))?;
    let tail = right.restricted(splice, right.end())?;
    head.segments.extend(tail.segments);
    // merge the two segments around the splice if they are the same form
    let merged = merge_adjacent(head.segments);
    let out = PiecewiseProfile { segments: merged };
    out.validate()?;
    Ok(out)
}

fn merge_adjacent(segments: Vec<Segment>) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::with_capacity(segments.len());
    for seg in segments {
        if let Some(prev) = out.last_mut() {
            if prev.hi == Some(seg.lo) {
                if let Some(d) = kinds_match(&prev.kind, &seg.kind) {
                    if d <= MATCH_RTOL && !matches!(seg.kind, SegmentKind::Bridge { .. }) {
                        prev.hi = seg.hi;
                        continue;
                    }
                }
            }
        }
        out.push(seg);
    }
    out
}
