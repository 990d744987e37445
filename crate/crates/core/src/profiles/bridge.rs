//! Quintic Hermite bridges and their certified construction.
//!
//! A bridge is the minimal-degree C² interpolant between the jets of two
//! adjacent closed-form pieces. One-sided second-derivative constraints are
//! certified through Bernstein coefficient bounds of the quintic; when a
//! constraint fails at the requested window the window is widened by factors
//! of two, up to eight attempts, before giving up with the smallest width
//! that was still infeasible.

use super::enclosure::enclose_segment;
use super::{ProfileError, Segment, SegmentKind};
use crate::num::{WInt, Wide};

/// Horner evaluation of zero-padded coefficients, factoring out exact-zero
/// leading coefficients so the relative error stays bounded near roots at
/// t = 0.
fn eval_poly_factored(coef: &[Wide], t: Wide) -> Wide {
    let mut start = 0;
    while start < coef.len() && coef[start].is_zero() {
        start += 1;
    }
    if start == coef.len() {
        return Wide::ZERO;
    }
    let mut p = Wide::ZERO;
    for i in (start..coef.len()).rev() {
        p = p * t + coef[i];
    }
    for _ in 0..start {
        p = p * t;
    }
    p
}

/// Evaluates a quintic and its first two t-derivatives.
///
/// The second derivative of bridges joined to exact segments vanishes at the
/// window ends; it is evaluated in the factored form
/// `t·((1-t)(c + (c+d)t) + z t²)` with `z` the compensated endpoint value,
/// which keeps the error relative (sign-preserving) at both ends.
pub fn eval_quintic(coef: &[Wide; 6], t: Wide) -> (Wide, Wide, Wide) {
    let p = eval_poly_factored(&coef[..], t);
    let dcoef = [
        coef[1],
        coef[2] + coef[2],
        coef[3] * Wide::from_f64(3.0),
        coef[4] * Wide::from_f64(4.0),
        coef[5] * Wide::from_f64(5.0),
    ];
    let dp = eval_poly_factored(&dcoef, t);
    let c = coef[3] * Wide::from_f64(6.0);
    let d = coef[4] * Wide::from_f64(12.0);
    let e = coef[5] * Wide::from_f64(20.0);
    let c0 = coef[2] + coef[2];
    let ddp = if c0.is_zero() {
        let z = Wide::comp_sum(&[c0, c, d, e]);
        let one_t = Wide::ONE - t;
        t * (one_t * (c + (c + d) * t) + z * t * t)
    } else {
        eval_poly_factored(&[c0, c, d, e], t)
    };
    (p, dp, ddp)
}

/// Coefficients of the t-derivative (degree drops by one; kept zero-padded).
pub fn derive(coef: &[Wide; 6]) -> [Wide; 6] {
    let mut out = [Wide::ZERO; 6];
    for i in 1..6 {
        out[i - 1] = coef[i] * Wide::from_f64(i as f64);
    }
    out
}

pub fn derive_deg(coef: &[Wide; 6], deg: usize) -> [Wide; 6] {
    let mut out = [Wide::ZERO; 6];
    for i in 1..=deg {
        out[i - 1] = coef[i] * Wide::from_f64(i as f64);
    }
    out
}

const BINOM: [[f64; 6]; 6] = [
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0, 0.0],
    [1.0, 5.0, 10.0, 10.0, 5.0, 1.0],
];

/// Certified range of a degree-`deg` polynomial (zero-padded coefficients)
/// over `[t0, t1] ⊆ [0, 1]`: Bernstein coefficient bounds on 8 subdivisions,
/// which tightens the single-level bound to within ~2% of the true range.
pub fn bernstein_range_deg(coef: &[Wide; 6], deg: usize, t0: f64, t1: f64) -> WInt {
    let mut acc: Option<WInt> = None;
    let pieces = 8;
    for i in 0..pieces {
        let a = t0 + (t1 - t0) * i as f64 / pieces as f64;
        let b = t0 + (t1 - t0) * (i + 1) as f64 / pieces as f64;
        let r = bernstein_range_one(coef, deg, a, b);
        acc = Some(match acc {
            None => r,
            Some(x) => x.join(r),
        });
    }
    acc.unwrap()
}

fn bernstein_range_one(coef: &[Wide; 6], deg: usize, t0: f64, t1: f64) -> WInt {
    let w = Wide::from_f64(t1 - t0);
    let u0 = Wide::from_f64(t0);
    // restriction q(t) = p(u0 + t w): q_j = w^j * Σ_{i>=j} C(i,j) a_i u0^{i-j}
    let mut q = [Wide::ZERO; 6];
    let mut u0_pows = [Wide::ONE; 6];
    for i in 1..6 {
        u0_pows[i] = u0_pows[i - 1] * u0;
    }
    let mut w_pow = Wide::ONE;
    for (j, qj) in q.iter_mut().enumerate().take(deg + 1) {
        let mut acc = Wide::ZERO;
        for i in j..=deg {
            acc = acc + coef[i] * Wide::from_f64(BINOM[i][j]) * u0_pows[i - j];
        }
        *qj = acc * w_pow;
        w_pow = w_pow * w;
    }
    // Bernstein coefficients: b_k = Σ_{j<=k} C(k,j)/C(deg,j) q_j. The top
    // coefficient is the value at the right end, a structurally-cancelling
    // sum, so it gets compensated summation; exact-zero coefficients carry
    // no padding (they are exact), the rest get a relative pad plus a small
    // absolute pad in the local coefficient scale.
    let mut bs = [Wide::ZERO; 6];
    for k in 0..=deg {
        if k == deg {
            let mut terms = [Wide::ZERO; 6];
            terms[..=deg].copy_from_slice(&q[..=deg]);
            bs[k] = Wide::comp_sum(&terms[..=deg]);
        } else {
            let mut b = Wide::ZERO;
            for j in 0..=k {
                b = b + q[j] * Wide::from_f64(BINOM[k][j] / BINOM[deg][j]);
            }
            bs[k] = b;
        }
    }
    let mut local = Wide::ZERO;
    for b in bs.iter().take(deg + 1) {
        local = local.max(b.abs());
    }
    let mut lo = Wide::ZERO;
    let mut hi = Wide::ZERO;
    for (k, b) in bs.iter().enumerate().take(deg + 1) {
        let padded_lo;
        let padded_hi;
        if b.is_zero() {
            padded_lo = *b;
            padded_hi = *b;
        } else {
            let pad = b.abs() * Wide::from_f64(1e-10) + local * Wide::from_f64(1e-13);
            padded_lo = *b - pad;
            padded_hi = *b + pad;
        }
        if k == 0 {
            lo = padded_lo;
            hi = padded_hi;
        } else {
            lo = lo.min(padded_lo);
            hi = hi.max(padded_hi);
        }
    }
    WInt::new(lo, hi)
}

pub fn bernstein_range(coef: &[Wide; 6], t0: f64, t1: f64) -> WInt {
    bernstein_range_deg(coef, 5, t0, t1)
}

/// When both endpoint curvatures are exactly zero (bridges between exact
/// linear/constant pieces), nudges the cubic coefficient so the compensated
/// second derivative at t = 1 is exactly on the bridge's own convexity side.
/// The nudge is ~1e-14 of coefficient scale, far below every continuity
/// tolerance, and it is what lets boundary-touching certificate pieces carry
/// an exact zero bound.
fn snap_endpoint_curvature(coef: &mut [Wide; 6], toward_nonneg: bool) {
    let q = |c: &[Wide; 6]| {
        Wide::comp_sum(&[
            c[2] + c[2],
            c[3] * Wide::from_f64(6.0),
            c[4] * Wide::from_f64(12.0),
            c[5] * Wide::from_f64(20.0),
        ])
    };
    for _ in 0..4 {
        let z = q(coef);
        if z.is_zero() {
            break;
        }
        coef[3] = coef[3] - z / Wide::from_f64(6.0);
    }
    let scale = coef[3].abs().max(coef[4].abs()).max(coef[5].abs());
    if scale.is_zero() {
        return;
    }
    let bias = scale * Wide::from_f64(if toward_nonneg { 1e-24 } else { -1e-24 });
    for _ in 0..8 {
        let z = q(coef);
        let ok = if toward_nonneg { !z.is_sign_negative() } else { !z.is_sign_positive() };
        if ok {
            break;
        }
        coef[3] = coef[3] + (bias - z) / Wide::from_f64(6.0);
    }
}

/// Restores the snapped endpoint-curvature structure after a transform that
/// rounded the coefficients (rescaling, fiber scaling): when the compensated
/// right-end curvature is at coefficient-noise level, it is re-snapped toward
/// its current side.
pub fn resnap_bridge(coef: &mut [Wide; 6]) {
    let dd = [
        coef[2] + coef[2],
        coef[3] * Wide::from_f64(6.0),
        coef[4] * Wide::from_f64(12.0),
        coef[5] * Wide::from_f64(20.0),
    ];
    let z = Wide::comp_sum(&dd);
    let mut scale = Wide::ZERO;
    for d in &dd {
        scale = scale.max(d.abs());
    }
    if z.abs() <= scale * Wide::from_f64(1e-15) && !scale.is_zero() {
        snap_endpoint_curvature(coef, !z.is_sign_negative());
    }
}

/// Hermite coefficients with the endpoint-curvature snap applied when the
/// right end joins an exactly-flat piece.
pub fn hermite_snapped(left: [Wide; 3], right: [Wide; 3], h: Wide) -> [Wide; 6] {
    let mut coef = hermite_coefficients(left, right, h);
    if right[2].is_zero() {
        let convex = right[1] > left[1];
        snap_endpoint_curvature(&mut coef, convex);
    }
    coef
}

/// Quintic Hermite coefficients in t from endpoint jets over a window of
/// width h. Inputs are jets in r; slopes and curvatures are rescaled to t.
pub fn hermite_coefficients(left: [Wide; 3], right: [Wide; 3], h: Wide) -> [Wide; 6] {
    let y0 = left[0];
    let s0 = left[1] * h;
    let c0 = left[2] * h * h;
    let y1 = right[0];
    let s1 = right[1] * h;
    let c1 = right[2] * h * h;

    let half = Wide::from_f64(0.5);
    let a0 = y0;
    let a1 = s0;
    let a2 = c0 * half;
    let d = y1 - a0 - a1 - a2;
    let s = s1 - a1 - (a2 + a2);
    let c = c1 - (a2 + a2);
    let a3 = Wide::from_f64(10.0) * d - Wide::from_f64(4.0) * s + c * half;
    let a4 = Wide::from_f64(-15.0) * d + Wide::from_f64(7.0) * s - c;
    let a5 = Wide::from_f64(6.0) * d - Wide::from_f64(3.0) * s + c * half;
    [a0, a1, a2, a3, a4, a5]
}

/// One-sided or boxed constraint on the bridge's second derivative, certified
/// over the whole closed window.
#[derive(Debug, Clone, Copy)]
pub enum D2Constraint {
    NonPositive,
    NonNegative,
    /// lo <= d2 <= hi where either side may be absent
    Within { lo: Option<Wide>, hi: Option<Wide> },
    /// d2 never exceeds `factor` times the largest endpoint curvature (or
    /// zero if both endpoints curve downward); for junctions that leave a
    /// convex piece, where the positive curvature budget is already paid at
    /// the endpoint
    CapAboveEndpoints { factor: f64 },
    None,
}

impl D2Constraint {
    /// One-sided bounds are certified up to a 1e-9 relative guard of the
    /// window's curvature scale; the raw enclosures (not this gate) are what
    /// curvature certificates consume.
    fn check(&self, d2: WInt, jl: &[Wide; 3], jr: &[Wide; 3]) -> bool {
        let scale = d2.lo.abs().max(d2.hi.abs());
        let tol = scale * Wide::from_f64(1e-9);
        match self {
            D2Constraint::NonPositive => d2.hi <= tol,
            D2Constraint::NonNegative => d2.lo >= -tol,
            D2Constraint::Within { lo, hi } => {
                lo.map_or(true, |l| d2.lo >= l - tol) && hi.map_or(true, |h| d2.hi <= h + tol)
            }
            D2Constraint::CapAboveEndpoints { factor } => {
                let cap = jl[2].max(jr[2]).max(Wide::ZERO) * Wide::from_f64(*factor);
                d2.hi <= cap + tol
            }
            D2Constraint::None => true,
        }
    }
}

/// A constructed bridge plus its certified derivative envelopes.
#[derive(Debug, Clone)]
pub struct BridgeBuild {
    pub segment: Segment,
    pub value_range: WInt,
    pub d1_range: WInt,
    pub d2_range: WInt,
}

/// Builds the C² bridge between two closed forms over `[center-hw, center+hw]`
/// and certifies the d2 constraint, widening geometrically on failure.
pub fn build_bridge(
    left: &SegmentKind,
    right: &SegmentKind,
    center: Wide,
    half_width: Wide,
    max_half_width: Option<Wide>,
    constraint: D2Constraint,
) -> Result<BridgeBuild, ProfileError> {
    let mut hw = half_width;
    let mut last_feasible_estimate = half_width;
    for attempt in 0..8 {
        if let Some(max) = max_half_width {
            if hw > max {
                break;
            }
        }
        let lo = center - hw;
        let hi = center + hw;
        if !lo.is_sign_positive() {
            break;
        }
        let lseg = Segment::new(lo, Some(hi), left.clone());
        let rseg = Segment::new(lo, Some(hi), right.clone());
        let jl = lseg.jet(lo);
        let jr = rseg.jet(hi);
        let h = hi - lo;
        let coef = hermite_snapped(jl, jr, h);
        let seg = Segment::new(lo, Some(hi), SegmentKind::Bridge { coef });
        let enc = enclose_segment(&seg, lo, hi);
        if constraint.check(enc.d2, &jl, &jr) && enc.value.lo.is_sign_positive() {
            return Ok(BridgeBuild {
                segment: seg,
                value_range: enc.value,
                d1_range: enc.d1,
                d2_range: enc.d2,
            });
        }
        last_feasible_estimate = hw;
        hw = hw * Wide::from_f64(2.0);
        let _ = attempt;
    }
    Err(ProfileError::BridgeInfeasible { min_half_width: last_feasible_estimate })
}

/// Radius at which two closed forms cross, found by bisection on `f - g`.
/// Both forms must be defined on the bracket and cross exactly once.
pub fn crossing_radius(
    f: &SegmentKind,
    g: &SegmentKind,
    lo: Wide,
    hi: Wide,
) -> Result<Wide, ProfileError> {
    // line-line crossings solve exactly
    if let (SegmentKind::Linear { a: a1, b: b1 }, SegmentKind::Linear { a: a2, b: b2 }) = (f, g) {
        if *a1 != *a2 {
            let r = (*b2 - *b1) / (*a1 - *a2);
            if r >= lo && r <= hi {
                return Ok(r);
            }
        }
        return Err(ProfileError::BadParameter(
            "linear pieces do not cross on the given bracket".into(),
        ));
    }
    let diff = |r: Wide| {
        let sf = Segment::new(lo, Some(hi), f.clone());
        let sg = Segment::new(lo, Some(hi), g.clone());
        sf.jet(r)[0] - sg.jet(r)[0]
    };
    let mut a = lo;
    let mut b = hi;
    let fa = diff(a);
    let fb = diff(b);
    if fa.is_zero() {
        return Ok(a);
    }
    if fb.is_zero() {
        return Ok(b);
    }
    if fa.is_sign_positive() == fb.is_sign_positive() {
        return Err(ProfileError::BadParameter(
            "closed forms do not cross on the given bracket".into(),
        ));
    }
    for _ in 0..200 {
        let mid = a.geo_mean(b);
        let fm = diff(mid);
        if fm.is_zero() {
            return Ok(mid);
        }
        if fm.is_sign_positive() == fa.is_sign_positive() {
            a = mid;
        } else {
            b = mid;
        }
        if (b - a).abs().rel_diff(a.abs()).min(1.0) < 1e-14 || (b / a - Wide::ONE).abs().to_f64() < 1e-14 {
            break;
        }
    }
    Ok(a.geo_mean(b))
}

/// Smoothing of `min{f, g}` near their transversal crossing: a concave-side
/// bridge equal to f left of the window and g right of it.
///
/// `center`/`half_width` are taken as hints: the window is re-centered on the
/// actual crossing (the quintic has one-signed curvature only when the corner
/// sits in the middle fifth of the window), then the constraint is certified.
pub fn smooth_min(
    f: &SegmentKind,
    g: &SegmentKind,
    center: Wide,
    half_width: Wide,
    constraint: D2Constraint,
) -> Result<BridgeBuild, ProfileError> {
    if f == g {
        // identical inputs: pass-through, no bridge needed
        let lo = center - half_width;
        let hi = center + half_width;
        let seg = Segment::new(lo, Some(hi), f.clone());
        let enc = enclose_segment(&seg, lo, hi);
        return Ok(BridgeBuild {
            segment: seg,
            value_range: enc.value,
            d1_range: enc.d1,
            d2_range: enc.d2,
        });
    }
    let corner = crossing_radius(f, g, center - half_width, center + half_width)
        .unwrap_or(center);
    let hw = half_width.min(corner * Wide::from_f64(0.9));
    build_bridge(f, g, corner, hw, Some(hw * Wide::from_f64(4.0)), constraint)
}

/// Smoothing of `max{f, g}`; same mechanics with the convexity side reversed.
pub fn smooth_max(
    f: &SegmentKind,
    g: &SegmentKind,
    center: Wide,
    half_width: Wide,
    constraint: D2Constraint,
) -> Result<BridgeBuild, ProfileError> {
    smooth_min(f, g, center, half_width, constraint)
}

/// Concave cap: C² transition from an increasing closed form to a constant
/// over `[start, end]`, with certified d2 <= 0 on the transition. Returns
/// the transition segments and the resulting plateau constant.
///
/// The body of the transition is a log blend whose slope decays linearly in
/// ln r (so it is exactly concave across any number of decades); short
/// quintic patches make the two junctions C².
pub fn concave_cap(
    f: &SegmentKind,
    start: Wide,
    end: Wide,
) -> Result<(Vec<Segment>, Wide), ProfileError> {
    if end <= start {
        return Err(ProfileError::BadParameter("concave cap needs end > start".into()));
    }
    if let SegmentKind::Constant { v } = f {
        return Ok((vec![Segment::new(start, Some(end), f.clone())], *v));
    }
    let fseg = Segment::new(start, Some(end), f.clone());
    let j0 = fseg.jet(start);
    if !j0[1].is_sign_positive() {
        return Err(ProfileError::BadParameter("concave cap needs f increasing at start".into()));
    }

    // patch windows take the first/last 5% of the log gap (at least a factor
    // 1.001 and at most 1.25 wide on each side)
    let ratio = (end / start).ln_f64();
    let pad = (ratio * 0.05).clamp(1e-3, 0.25);
    let p0_hi = start * Wide::exp_ln(pad);
    let p1_lo = end * Wide::exp_ln(-pad);

    // slope dies linearly in ln r, reaching zero at `end`; anchored at p0_hi
    // with the slope f carries there, so a small positive slope remains at
    // p1_lo for the final monotone patch
    let usable = (end / p0_hi).ln_f64();
    let jf = fseg.jet(p0_hi);
    let blend_slope = jf[1];
    let blend_c = -(blend_slope / Wide::from_f64(usable));
    let blend_b = jf[0] - blend_slope * p0_hi + blend_c * p0_hi;
    let blend = SegmentKind::LogBlend { c: blend_c, r0: p0_hi, slope: blend_slope, b: blend_b };

    // left junction: f -> blend (tangential, d2 jump); window exactly [start, p0_hi]
    let left_patch = c2_patch_window(f, &blend, start, p0_hi, 0.5)?;

    let blend_seg = Segment::new(p0_hi, Some(p1_lo), blend.clone());
    let j1 = blend_seg.jet(p1_lo);

    // plateau: the symmetric-corner level, half the remaining tangent rise;
    // the closing quintic is then concave and monotone
    let lambda = j1[0] + j1[1] * (end - p1_lo) * Wide::from_f64(0.5);
    let coef = hermite_snapped(j1, [lambda, Wide::ZERO, Wide::ZERO], end - p1_lo);
    let close_seg = Segment::new(p1_lo, Some(end), SegmentKind::Bridge { coef });
    let enc = enclose_segment(&close_seg, p1_lo, end);
    let tol2 = enc.d2.lo.abs().max(enc.d2.hi.abs()) * Wide::from_f64(1e-9);
    let tol1 = enc.d1.lo.abs().max(enc.d1.hi.abs()) * Wide::from_f64(1e-9);
    if enc.d2.hi > tol2 || enc.d1.lo < -tol1 {
        return Err(ProfileError::BridgeInfeasible { min_half_width: (end - p1_lo) * Wide::from_f64(0.5) });
    }

    let segs = vec![left_patch.segment, blend_seg, close_seg];
    Ok((segs, lambda))
}

/// Bridge on an exact window (no re-centering or widening): the caller
/// guarantees the corner geometry. Used where several profiles must bridge
/// over the same support so their curvatures balance pointwise.
pub fn bridge_on_window(
    left: &SegmentKind,
    right: &SegmentKind,
    lo: Wide,
    hi: Wide,
    constraint: D2Constraint,
) -> Result<BridgeBuild, ProfileError> {
    let lseg = Segment::new(lo, Some(hi), left.clone());
    let rseg = Segment::new(lo, Some(hi), right.clone());
    let jl = lseg.jet(lo);
    let jr = rseg.jet(hi);
    let h = hi - lo;
    let coef = hermite_snapped(jl, jr, h);
    let seg = Segment::new(lo, Some(hi), SegmentKind::Bridge { coef });
    let enc = enclose_segment(&seg, lo, hi);
    if constraint.check(enc.d2, &jl, &jr) && enc.value.lo.is_sign_positive() {
        Ok(BridgeBuild {
            segment: seg,
            value_range: enc.value,
            d1_range: enc.d1,
            d2_range: enc.d2,
        })
    } else {
        Err(ProfileError::BridgeInfeasible { min_half_width: h * Wide::from_f64(0.5) })
    }
}

/// C² patch across a tangential junction (equal value and slope, jumping
/// second derivative). The patch's d2 is certified to stay within the hull of
/// the endpoint curvatures, inflated by `slack_rel`.
pub fn c2_patch(
    left: &SegmentKind,
    right: &SegmentKind,
    center: Wide,
    half_width: Wide,
    slack_rel: f64,
) -> Result<BridgeBuild, ProfileError> {
    c2_patch_window(left, right, center - half_width, center + half_width, slack_rel)
}

/// Jet of a power's deviation from its own tangent at the anchor r0:
/// v0·[ρ^p - 1 - p(ρ-1)] with ρ = r/r0, computed through expm1 so the
/// quadratic-order residual survives even when p is within 1e-14 of 1.
fn power_tangent_residual(a: Wide, p: f64, r0: Wide, r: Wide) -> [Wide; 3] {
    let v0 = a * r0.powf(p);
    let x = (r / r0).ln_f64();
    let dv = v0 * Wide::from_f64((p * x).exp_m1() - p * x.exp_m1());
    let ds = (v0 / r0) * Wide::from_f64(p * ((p - 1.0) * x).exp_m1());
    let seg = Segment::new(r0, None, SegmentKind::Power { a, s: p });
    [dv, ds, seg.jet(r)[2]]
}

/// Jet of a log blend relative to the line (v_anchor, slope) at its own r0:
/// c·[r(ln(r/r0) - 1) + r0], exact in the small structure.
fn blend_tangent_residual(c: Wide, r0: Wide, r: Wide) -> [Wide; 3] {
    let l = Wide::from_f64((r / r0).ln_f64());
    let dv = c * (r * (l - Wide::ONE) + r0);
    let ds = c * l;
    [dv, ds, c / r]
}

/// C² patch with an exact window (breakpoints land bit-exactly on lo/hi).
///
/// The quintic is assembled in residual coordinates relative to a reference
/// line, using per-kind closed forms for the deviations: near-tangent
/// junctions carry curvature data far below the value scale, which plain
/// jet differences cannot resolve.
pub fn c2_patch_window(
    left: &SegmentKind,
    right: &SegmentKind,
    lo: Wide,
    hi: Wide,
    slack_rel: f64,
) -> Result<BridgeBuild, ProfileError> {
    let lseg = Segment::new(lo, Some(hi), left.clone());
    let rseg = Segment::new(lo, Some(hi), right.clone());
    let jl = lseg.jet(lo);
    let jr = rseg.jet(hi);
    let hull = WInt::hull(jl[2], jr[2]);
    let pad = (hull.hi - hull.lo).abs().max(hull.hi.abs().max(hull.lo.abs()))
        * Wide::from_f64(slack_rel)
        + Wide::from_f64(1e-30);
    let constraint =
        D2Constraint::Within { lo: Some(hull.lo - pad), hi: Some(hull.hi + pad) };
    let h = hi - lo;

    // residual jets relative to a reference line (value at lo, slope)
    let (res_l, res_r, line_v, line_s): ([Wide; 3], [Wide; 3], Wide, Wide) =
        match (left, right) {
            (
                SegmentKind::Linear { a: a1, b: b1 },
                SegmentKind::LogBlend { c, r0, slope, b },
            ) => {
                // relative to the left line itself
                let dslope = *slope - *a1;
                let dbb = *b - *b1;
                let l_hi = Wide::from_f64((hi / *r0).ln_f64());
                let dv = dslope * hi + *c * hi * (l_hi - Wide::ONE) + dbb;
                let ds = dslope + *c * l_hi;
                ([Wide::ZERO; 3], [dv, ds, jr[2]], jl[0], *a1)
            }
            (SegmentKind::Power { a, s }, SegmentKind::LogBlend { c, r0, .. }) => {
                // relative to the power's tangent at the blend anchor r0
                let v0 = *a * r0.powf(*s);
                let sigma = Wide::from_f64(*s) * v0 / *r0;
                let rl = power_tangent_residual(*a, *s, *r0, lo);
                let rr = blend_tangent_residual(*c, *r0, hi);
                let line_at_lo = v0 + sigma * (lo - *r0);
                (rl, rr, line_at_lo, sigma)
            }
            _ => {
                let (tan_hi, tan_lo) = jl[1].two_product(h);
                let dv = Wide::comp_sum(&[jr[0], -jl[0], -tan_hi, -tan_lo]);
                let ds = jr[1] - jl[1];
                ([Wide::ZERO, Wide::ZERO, jl[2]], [dv, ds, jr[2]], jl[0], jl[1])
            }
        };

    let mut coef = hermite_snapped(res_l, res_r, h);
    coef[0] = coef[0] + line_v;
    coef[1] = coef[1] + line_s * h;
    let seg = Segment::new(lo, Some(hi), SegmentKind::Bridge { coef });
    let enc = enclose_segment(&seg, lo, hi);
    if constraint.check(enc.d2, &jl, &jr) && enc.value.lo.is_sign_positive() {
        Ok(BridgeBuild {
            segment: seg,
            value_range: enc.value,
            d1_range: enc.d1,
            d2_range: enc.d2,
        })
    } else {
        Err(ProfileError::BridgeInfeasible { min_half_width: h * Wide::from_f64(0.5) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(x: f64) -> Wide {
        Wide::from_f64(x)
    }

    #[test]
    fn hermite_matches_endpoint_jets() {
        let left = [w(2.0), w(1.5), w(-0.3)];
        let right = [w(5.0), w(0.2), w(0.1)];
        let h = w(3.0);
        let coef = hermite_coefficients(left, right, h);
        let (p0, dp0, ddp0) = eval_quintic(&coef, Wide::ZERO);
        let (p1, dp1, ddp1) = eval_quintic(&coef, Wide::ONE);
        assert!(p0.rel_diff(left[0]) < 1e-14);
        assert!((dp0 / h).rel_diff(left[1]) < 1e-13);
        assert!((ddp0 / (h * h)).rel_diff(left[2]) < 1e-12);
        assert!(p1.rel_diff(right[0]) < 1e-14);
        assert!((dp1 / h).rel_diff(right[1]) < 1e-13);
        assert!((ddp1 / (h * h)).rel_diff(right[2]) < 1e-12);
    }

    #[test]
    fn bernstein_bounds_contain_samples() {
        let coef = [w(1.0), w(-2.0), w(0.5), w(3.0), w(-1.5), w(0.25)];
        let range = bernstein_range(&coef, 0.0, 1.0);
        for i in 0..=500 {
            let t = i as f64 / 500.0;
            let (p, _, _) = eval_quintic(&coef, w(t));
            assert!(range.contains(p), "t={t}");
        }
        let sub = bernstein_range(&coef, 0.3, 0.6);
        for i in 0..=200 {
            let t = 0.3 + 0.3 * i as f64 / 200.0;
            let (p, _, _) = eval_quintic(&coef, w(t));
            assert!(sub.contains(p), "sub t={t}");
        }
    }

    #[test]
    fn min_smoothing_concave_certified() {
        // the active-cone corner: min{(1-e)r, (1-e)R1 + k(r-R1)} at R1 = 100
        let eps = 0.01;
        let k = 0.005;
        let r1 = 100.0;
        let f = SegmentKind::Linear { a: w(1.0 - eps), b: Wide::ZERO };
        let g = SegmentKind::Linear { a: w(k), b: w(r1 * (1.0 - eps - k)) };
        let b = smooth_min(&f, &g, w(r1), w(0.9 * r1), D2Constraint::NonPositive).unwrap();
        let guard = b.d2_range.lo.abs().to_f64() * 1e-9;
        assert!(b.d2_range.hi.to_f64() <= guard);
        // slope travels monotonically from 1-e to k
        assert!(b.d1_range.hi.to_f64() <= 1.0 - eps + 1e-9);
        assert!(b.d1_range.lo.to_f64() >= k - 1e-9);
        // interior concavity exceeds the stated threshold on the middle half
        let seg = &b.segment;
        let lo = seg.lo;
        let h = seg.hi.unwrap() - lo;
        let mid_lo = lo + h * w(0.25);
        let mid_hi = lo + h * w(0.75);
        let enc = enclose_segment(seg, mid_lo, mid_hi);
        assert!(
            enc.d2.hi.to_f64() < -(1.0 - eps - k) / (100.0 * r1),
            "middle-half curvature {:?}",
            enc.d2.hi.to_f64()
        );
    }

    #[test]
    fn max_smoothing_convex_certified() {
        // max{delta, delta + delta1 (r - R1)} at R1 = 100
        let delta = 0.05;
        let delta1 = 1e-7;
        let r1 = 100.0;
        let f = SegmentKind::Constant { v: w(delta) };
        let g = SegmentKind::Linear { a: w(delta1), b: w(delta - r1 * delta1) };
        let b = smooth_max(
            &f,
            &g,
            w(r1),
            w(0.9 * r1),
            D2Constraint::Within { lo: Some(Wide::ZERO), hi: Some(w(delta1 / r1)) },
        )
        .unwrap();
        let guard = b.d2_range.hi.abs().to_f64() * 1e-9;
        assert!(b.d2_range.lo.to_f64() >= -guard);
        assert!(b.d2_range.hi.to_f64() <= delta1 / r1 + guard);
    }

    #[test]
    fn identical_inputs_pass_through() {
        let f = SegmentKind::Linear { a: w(2.0), b: w(1.0) };
        let b = smooth_min(&f, &f, w(10.0), w(5.0), D2Constraint::NonPositive).unwrap();
        assert_eq!(b.segment.kind, f);
    }

    #[test]
    fn bridge_envelope_within_range_box() {
        // bridge values stay within [window min, window max] of the inputs
        let eps = 0.01;
        let k = 0.05;
        let r1 = 100.0;
        let f = SegmentKind::Linear { a: w(1.0 - eps), b: Wide::ZERO };
        let g = SegmentKind::Linear { a: w(k), b: w(r1 * (1.0 - eps - k)) };
        let b = smooth_min(&f, &g, w(r1), w(0.9 * r1), D2Constraint::NonPositive).unwrap();
        let seg = &b.segment;
        let lo = seg.lo.to_f64();
        let hi = seg.hi.unwrap().to_f64();
        let fmin = (1.0 - eps) * lo;
        let fmax = (1.0 - eps) * hi;
        let gmin = k * lo + r1 * (1.0 - eps - k);
        let gmax = k * hi + r1 * (1.0 - eps - k);
        let box_lo = fmin.min(gmin);
        let box_hi = fmax.max(gmax);
        for i in 0..=1000 {
            let r = lo + (hi - lo) * i as f64 / 1000.0;
            let v = seg.jet(w(r))[0].to_f64();
            assert!(v >= box_lo - 1e-9 && v <= box_hi + 1e-9, "r={r} v={v}");
        }
    }

    #[test]
    fn concave_cap_properties() {
        let f = SegmentKind::Power { a: w(0.02), s: 0.25 };
        let start = w(1e6);
        let end = w(1e8);
        let (segs, lambda) = concave_cap(&f, start, end).unwrap();
        assert_eq!(segs[0].lo, start);
        assert_eq!(segs.last().unwrap().hi, Some(end));
        // transition is concave (up to the patch guard) and monotone
        let mut prev = f64::MIN;
        let find = |r: f64| {
            segs.iter()
                .find(|s| s.lo.to_f64() <= r && s.hi.unwrap().to_f64() >= r)
                .unwrap()
                .jet(w(r))
        };
        for i in 0..=1000 {
            let r = 1e6 * (1e8f64 / 1e6).powf(i as f64 / 1000.0);
            let j = find(r);
            let v = j[0].to_f64();
            assert!(v >= prev - 1e-10 * prev.abs(), "monotone at {r}");
            assert!(j[2].to_f64() <= 1e-20, "concave at {r}: {}", j[2].to_f64());
            prev = v;
        }
        // plateau matches the transition's right endpoint
        let vend = find(1e8 * (1.0 - 1e-12));
        assert!(vend[0].rel_diff(lambda) < 1e-9);
        // f constant already: trivial cap
        let (cs, l2) = concave_cap(&SegmentKind::Constant { v: w(0.3) }, start, end).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(l2, w(0.3));
    }

    #[test]
    fn infeasible_constraint_reports_retry() {
        // demand positive curvature from a min-type (concave) corner
        let f = SegmentKind::Linear { a: w(1.0), b: Wide::ZERO };
        let g = SegmentKind::Linear { a: w(0.1), b: w(9.0) };
        let r = smooth_min(&f, &g, w(10.0), w(5.0), D2Constraint::NonNegative);
        assert!(matches!(r, Err(ProfileError::BridgeInfeasible { .. })));
    }
}
