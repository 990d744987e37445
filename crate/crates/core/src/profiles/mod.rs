//! Piecewise-analytic warp profiles.
//!
//! A profile is a positive function on an interval of the ray stored as an
//! ordered list of typed segments, each with exact first and second
//! derivatives. Five segment kinds cover everything the constructions need:
//! linear pieces, power tails `a r^s`, logarithmic slope blends, constants,
//! and quintic polynomial bridges joining adjacent pieces with matching C²
//! data.

pub mod bridge;
pub mod enclosure;
pub mod ops;

use crate::num::Wide;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("radius {r} outside profile domain [{lo}, {hi})")]
    OutOfDomain { r: Wide, lo: Wide, hi: String },
    #[error("segments are not contiguous at index {0}")]
    NotContiguous(usize),
    #[error("profile not positive on segment {index} (min enclosure {min})")]
    NonPositive { index: usize, min: Wide },
    #[error("continuity violation at breakpoint {at}: order {order} jump {jump:e}")]
    ContinuityViolation { at: Wide, order: u8, jump: f64 },
    #[error("gluing mismatch at {at}: max discrepancy {discrepancy:e} ({detail})")]
    GlueMismatch { at: Wide, discrepancy: f64, detail: String },
    #[error("bridge constraint infeasible; smallest feasible half-width ~ {min_half_width}")]
    BridgeInfeasible { min_half_width: Wide },
    #[error("{0}")]
    BadParameter(String),
}

/// Closed-form segment kinds. `Bridge` carries quintic coefficients in the
/// normalized variable t = (r - lo) / (hi - lo).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", deny_unknown_fields)]
pub enum SegmentKind {
    /// a*r + b
    Linear { a: Wide, b: Wide },
    /// a * r^s
    Power { a: Wide, s: f64 },
    /// slope*r + c*(r ln r - (ln r0 + 1) r) + b  ==  slope*r + c*r*(ln(r/r0) - 1) + b
    LogBlend { c: Wide, r0: Wide, slope: Wide, b: Wide },
    /// constant v
    Constant { v: Wide },
    /// quintic in t over the segment window
    Bridge { coef: [Wide; 6] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub lo: Wide,
    /// `None` marks an unbounded tail.
    pub hi: Option<Wide>,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn new(lo: Wide, hi: Option<Wide>, kind: SegmentKind) -> Segment {
        Segment { lo, hi, kind }
    }

    pub fn width(&self) -> Option<Wide> {
        self.hi.map(|h| h - self.lo)
    }

    /// Exact jet (value, d1, d2) of the segment's closed form at r.
    pub fn jet(&self, r: Wide) -> [Wide; 3] {
        match &self.kind {
            SegmentKind::Linear { a, b } => [*a * r + *b, *a, Wide::ZERO],
            SegmentKind::Power { a, s } => {
                let v = *a * r.powf(*s);
                let sv = Wide::from_f64(*s);
                let d1 = sv * v / r;
                let d2 = sv * Wide::from_f64(*s - 1.0) * v / (r * r);
                [v, d1, d2]
            }
            SegmentKind::LogBlend { c, r0, slope, b } => {
                let l = Wide::from_f64((r / *r0).ln_f64());
                let v = *slope * r + *c * r * (l - Wide::ONE) + *b;
                let d1 = *slope + *c * l;
                let d2 = *c / r;
                [v, d1, d2]
            }
            SegmentKind::Constant { v } => [*v, Wide::ZERO, Wide::ZERO],
            SegmentKind::Bridge { coef } => {
                let h = self.hi.expect("bridge segments are bounded") - self.lo;
                let t = (r - self.lo) / h;
                let (p, dp, ddp) = bridge::eval_quintic(coef, t);
                [p, dp / h, ddp / (h * h)]
            }
        }
    }
}

/// An ordered, contiguous, positive piecewise profile on `(start, end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseProfile {
    pub segments: Vec<Segment>,
}

/// Relative tolerance used for breakpoint continuity and glue agreement.
pub const MATCH_RTOL: f64 = 1e-12;

impl PiecewiseProfile {
    pub fn new(segments: Vec<Segment>) -> Result<PiecewiseProfile, ProfileError> {
        let p = PiecewiseProfile { segments };
        p.validate()?;
        Ok(p)
    }

    /// Single-segment profile covering `(lo, ∞)`.
    pub fn whole_ray(kind: SegmentKind) -> PiecewiseProfile {
        PiecewiseProfile { segments: vec![Segment::new(Wide::ZERO, None, kind)] }
    }

    pub fn start(&self) -> Wide {
        self.segments[0].lo
    }

    pub fn end(&self) -> Option<Wide> {
        self.segments.last().unwrap().hi
    }

    fn in_domain(&self, r: Wide) -> bool {
        r >= self.start() && self.end().map_or(true, |e| r <= e)
    }

    /// Index of the segment containing r (ties at a breakpoint resolve to the
    /// right segment).
    pub fn segment_index(&self, r: Wide) -> Result<usize, ProfileError> {
        if !self.in_domain(r) {
            return Err(ProfileError::OutOfDomain {
                r,
                lo: self.start(),
                hi: self.end().map_or("inf".into(), |e| format!("{e}")),
            });
        }
        let mut idx = self.segments.partition_point(|s| s.lo <= r);
        idx = idx.saturating_sub(1);
        Ok(idx)
    }

    /// Exact analytic evaluation of (value, d1, d2) at r.
    pub fn eval(&self, r: Wide) -> Result<[Wide; 3], ProfileError> {
        let idx = self.segment_index(r)?;
        Ok(self.segments[idx].jet(r))
    }

    pub fn eval_f64(&self, r: f64) -> Result<[f64; 3], ProfileError> {
        let j = self.eval(Wide::from_f64(r))?;
        Ok([j[0].to_f64(), j[1].to_f64(), j[2].to_f64()])
    }

    /// Jet at the left end of the domain, evaluated from the first segment's
    /// closed form (the value itself may be zero there for cone apices).
    pub fn jet_at_start(&self) -> [Wide; 3] {
        self.segments[0].jet(self.start())
    }

    /// Contiguity, C¹ continuity at breakpoints, positivity.
    pub fn validate(&self) -> Result<(), ProfileError> {
        if self.segments.is_empty() {
            return Err(ProfileError::BadParameter("empty profile".into()));
        }
        for i in 0..self.segments.len() - 1 {
            let hi = self.segments[i]
                .hi
                .ok_or(ProfileError::NotContiguous(i))?;
            if hi != self.segments[i + 1].lo {
                return Err(ProfileError::NotContiguous(i));
            }
            let jl = self.segments[i].jet(hi);
            let jr = self.segments[i + 1].jet(hi);
            for order in 0..2u8 {
                let a = jl[order as usize];
                let b = jr[order as usize];
                // the natural magnitude of the k-th derivative of a warp
                // profile is value/r^k; slopes far below that scale are
                // dominated by arithmetic noise and compare against it
                let natural = jl[0].abs().max(jr[0].abs()) / hi.powi(order as i32);
                let scale = a.abs().max(b.abs()).max(natural);
                if scale.is_zero() {
                    continue;
                }
                let jump = ((a - b).abs() / scale).to_f64();
                if jump > MATCH_RTOL {
                    return Err(ProfileError::ContinuityViolation { at: hi, order, jump });
                }
            }
        }
        for (index, seg) in self.segments.iter().enumerate() {
            if let Some(h) = seg.hi {
                if h < seg.lo {
                    eprintln!("DEBUG inverted segment {index}: [{}, {}] kind {:?}", seg.lo, h, seg.kind);
                }
            }
            let lo = seg.lo;
            let hi = seg.hi.unwrap_or_else(|| {
                // unbounded tails: positivity is checked on a representative
                // span; the closed forms in use are monotone or bounded below
                lo.max(Wide::ONE) * Wide::from_f64(1e6)
            });
            // linear-through-origin apex: positive on the open interval
            if index == 0 {
                if let SegmentKind::Linear { a, b } = &seg.kind {
                    let at_lo = *a * lo + *b;
                    if at_lo.is_zero() || at_lo.abs().to_f64() < 1e-300 {
                        if a.is_sign_positive() {
                            continue;
                        }
                    }
                }
            }
            let enc = enclosure::enclose_segment(seg, lo, hi);
            if !enc.value.lo.is_sign_positive() {
                return Err(ProfileError::NonPositive { index, min: enc.value.lo });
            }
        }
        Ok(())
    }

    /// Highest continuity order (0, 1 or 2) that holds at each breakpoint to
    /// within `MATCH_RTOL`-relative agreement.
    pub fn breakpoint_smoothness(&self) -> Vec<(Wide, u8)> {
        let mut out = Vec::new();
        for i in 0..self.segments.len() - 1 {
            let Some(hi) = self.segments[i].hi else { continue };
            let jl = self.segments[i].jet(hi);
            let jr = self.segments[i + 1].jet(hi);
            let mut order = 0u8;
            for k in 0..3usize {
                let scale = jl[k].abs().max(jr[k].abs());
                let ok = scale.is_zero()
                    || ((jl[k] - jr[k]).abs() / scale).to_f64() <= 1e-9;
                if ok {
                    order = k as u8;
                } else {
                    break;
                }
            }
            out.push((hi, order));
        }
        out
    }

    pub fn breakpoints(&self) -> Vec<Wide> {
        self.segments
            .iter()
            .filter_map(|s| s.hi)
            .collect()
    }

    /// The segment restricted to `[lo, hi]` keeps its closed form; used when
    /// splitting profiles at glue points.
    pub fn restricted(&self, lo: Wide, hi: Option<Wide>) -> Result<PiecewiseProfile, ProfileError> {
        let mut segs = Vec::new();
        for seg in &self.segments {
            let s_lo = seg.lo;
            let s_hi = seg.hi;
            let new_lo = if s_lo < lo { lo } else { s_lo };
            let new_hi = match (s_hi, hi) {
                (None, None) => None,
                (None, Some(h)) => Some(h),
                (Some(sh), None) => Some(sh),
                (Some(sh), Some(h)) => Some(sh.min(h)),
            };
            if let Some(nh) = new_hi {
                if nh <= new_lo {
                    continue;
                }
            }
            if let Some(h) = hi {
                if new_lo >= h {
                    continue;
                }
            }
            if matches!(seg.kind, SegmentKind::Bridge { .. })
                && (new_lo != s_lo || new_hi != s_hi)
            {
                return Err(ProfileError::BadParameter(
                    "cannot split a bridge segment; choose a splice point inside an exact segment"
                        .into(),
                ));
            }
            segs.push(Segment::new(new_lo, new_hi, seg.kind.clone()));
        }
        if segs.is_empty() {
            return Err(ProfileError::BadParameter("restriction is empty".into()));
        }
        Ok(PiecewiseProfile { segments: segs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(x: f64) -> Wide {
        Wide::from_f64(x)
    }

    #[test]
    fn linear_eval() {
        let p = PiecewiseProfile::whole_ray(SegmentKind::Linear { a: w(3.0), b: Wide::ZERO });
        let j = p.eval_f64(2.0).unwrap();
        assert_eq!(j, [6.0, 3.0, 0.0]);
    }

    #[test]
    fn power_eval_textbook_derivatives() {
        let a = 1.3;
        let s = 0.37;
        let p = PiecewiseProfile::whole_ray(SegmentKind::Power { a: w(a), s });
        let r = 4.2;
        let j = p.eval_f64(r).unwrap();
        assert!((j[0] - a * r.powf(s)).abs() < 1e-12);
        assert!((j[1] - s * a * r.powf(s - 1.0)).abs() < 1e-13);
        assert!((j[2] - s * (s - 1.0) * a * r.powf(s - 2.0)).abs() < 1e-13);
    }

    #[test]
    fn logblend_second_derivative_matches_c_over_r() {
        // d2 of the log blend is c/r; with c < 0 this is the concave descent
        let r3: f64 = 1e5;
        let c = -1.0 / (10.0 * r3.ln());
        // b chosen so the blend continues slope*r + 94 at r = r3
        let b = 94.0 + c * r3;
        let p = PiecewiseProfile::whole_ray(SegmentKind::LogBlend {
            c: w(c),
            r0: w(r3),
            slope: w(0.05),
            b: w(b),
        });
        let j = p.eval_f64(r3).unwrap();
        assert!((j[2] - c / r3).abs() < 1e-20);
        // at r0 itself the log term contributes no slope
        assert!((j[1] - 0.05).abs() < 1e-15);
        assert!((j[0] - (0.05 * r3 + 94.0)).abs() < 1e-9);
    }

    #[test]
    fn out_of_domain_is_error() {
        let p = PiecewiseProfile {
            segments: vec![Segment::new(w(1.0), Some(w(2.0)), SegmentKind::Constant { v: w(1.0) })],
        };
        assert!(p.eval(w(0.5)).is_err());
        assert!(p.eval(w(3.0)).is_err());
        assert!(p.eval(w(1.5)).is_ok());
    }

    #[test]
    fn validate_rejects_gap_and_negative() {
        let gap = PiecewiseProfile {
            segments: vec![
                Segment::new(w(0.0), Some(w(1.0)), SegmentKind::Constant { v: w(1.0) }),
                Segment::new(w(2.0), None, SegmentKind::Constant { v: w(1.0) }),
            ],
        };
        assert!(matches!(gap.validate(), Err(ProfileError::NotContiguous(_))));
        let neg = PiecewiseProfile::whole_ray(SegmentKind::Constant { v: w(-1.0) });
        assert!(matches!(neg.validate(), Err(ProfileError::NonPositive { .. })));
    }
}
