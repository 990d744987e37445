//! First local model: a metric that is a near-unit cone over S^m with
//! collapsed S^n and S² fibers near the origin, and an asymptotic cone over
//! S^m x S^n with slope k at infinity.
//!
//! Profile layout (active = phi, collapsed = psi, rho):
//!   phi:  (1-e)r  --[concave bridge at R1]--  kr + b1
//!         --[C² patch at R3]--  log-blend descent  --[concave bridge]--  kr
//!   psi:  delta  --[convex bridge at R1]--  delta1 r + b2
//!         --[bridge at R3]--  power climb r^(1+kappa)  --[bridge]--  kr
//!   rho:  like psi through R1, then  --[concave bridge at R2]--  a r^s
//!         --[concave cap]--  constant
//!
//! The slope climb of psi uses a power segment, whose curvature budget
//! r²·psi''/psi = kappa(1+kappa) is paid for by the S² fiber's 2s(1-s)/r²;
//! this keeps the climb length at exp(ln(k/delta1)/kappa) e-folds, which the
//! extended-range arithmetic absorbs even when delta1 is astronomically
//! small.

use super::constants::{default_k, default_s_model1, BuildLog, Model1Constants, SearchPolicy};
use super::{BuildError, TripleWarpSpec};
use crate::num::Wide;
use crate::profiles::bridge::{
    bridge_on_window, c2_patch_window, concave_cap, smooth_max, smooth_min, D2Constraint,
};
use crate::profiles::enclosure::enclose;
use crate::profiles::{PiecewiseProfile, Segment, SegmentKind};
use crate::verify::{verify_nonneg_ricci, CurvatureCertificate, VerifyInterval};

fn wf(x: f64) -> Wide {
    Wide::from_f64(x)
}

pub struct Model1Build {
    pub spec: TripleWarpSpec,
    pub constants: Model1Constants,
    pub certificate: CurvatureCertificate,
    pub log: BuildLog,
}

struct Assembled {
    spec: TripleWarpSpec,
    constants: Model1Constants,
}

fn assemble(
    m: u32,
    n: u32,
    epsilon: f64,
    delta: Wide,
    k: f64,
    delta1: Wide,
    s: f64,
) -> Result<Assembled, BuildError> {
    let one_eps = wf(1.0 - epsilon);
    let kw = wf(k);
    let r1 = wf(100.0);
    let w1 = r1 * wf(0.9);
    let b1 = r1 * wf(1.0 - epsilon - k);
    let b2 = delta - r1 * delta1;
    if !b2.is_sign_positive() {
        return Err(BuildError::Parameter("delta1 too large: psi intercept nonpositive".into()));
    }

    // step 1: the collapsed profiles bridge strictly inside the active
    // profile's window, so wherever their convexity is switched on the
    // active concavity is already bounded away from zero; at the active
    // window's own ends everything else is exactly flat and the radial
    // component is an exact zero
    let s1_lo = r1 - w1;
    let s1_hi = r1 + w1;
    let gap = w1 * wf(2f64.powi(-9));
    let s1b_lo = s1_lo + gap;
    let s1b_hi = s1_hi - gap;
    let phi_cone = SegmentKind::Linear { a: one_eps, b: Wide::ZERO };
    let phi_lin = SegmentKind::Linear { a: kw, b: b1 };
    let br_phi1 = bridge_on_window(&phi_cone, &phi_lin, s1_lo, s1_hi, D2Constraint::NonPositive)
        .map_err(|e| BuildError::Parameter(format!("step1 phi bridge: {e}")))?;

    let psi_flat = SegmentKind::Constant { v: delta };
    let psi_lin = SegmentKind::Linear { a: delta1, b: b2 };
    let br_psi1 = bridge_on_window(
        &psi_flat,
        &psi_lin,
        s1b_lo,
        s1b_hi,
        D2Constraint::Within { lo: Some(Wide::ZERO), hi: Some(delta1 / r1) },
    )
    .map_err(|e| BuildError::Parameter(format!("step1 psi bridge: {e}")))?;

    // step 2: rho leaves the linear pair for a slow power
    let r2_floor = r1 * wf(1000.0);
    let r2_sep = (b2 * wf(10.0 * s / (1.0 - s))) / delta1;
    let r2 = r2_floor.max(r2_sep);
    let w2 = r2 * wf(0.9);
    let a_rho = (delta1 * r2 + b2) * r2.powf(-s);
    let rho_pow = SegmentKind::Power { a: a_rho, s };
    let br_rho2 = smooth_min(&psi_lin, &rho_pow, r2, w2, D2Constraint::NonPositive)
        .map_err(|e| BuildError::Parameter(format!("step2 rho bridge: {e}")))?;

    // step 3 scale: far enough out that the psi intercept is negligible and
    // the descent re-kink fits the curvature budget
    let mut r3 = (r2 * wf(20.0)).max((b2 / delta1) * wf(1.0e4));
    let mut x;
    loop {
        let crit = wf(10.0 * m as f64 * (1.0 - epsilon - k) * 100.0 / (k * s * (1.0 - s))) / r3;
        x = (1.5 * crit.to_f64().max(0.0).sqrt()).max(0.02);
        if x <= 2.0 {
            break;
        }
        r3 = r3 * wf((x / 2.0) * (x / 2.0));
    }
    let lambda = 1.0 + x;
    let landing = wf(lambda * lambda.ln() - lambda + 1.0);
    let c_log = b1 / (r3 * landing);
    let b3 = b1 - c_log * r3;
    let h3 = (x / 10.0).min(0.05);

    // phi descent: exact linear, C² patch, log blend, concave bridge to kr
    let blend_phi = SegmentKind::LogBlend { c: -c_log, r0: r3, slope: kw, b: b3 };
    let patch_phi = c2_patch_window(&phi_lin, &blend_phi, r3 * wf(1.0 - h3), r3 * wf(1.0 + h3), 0.5)
        .map_err(|e| BuildError::Parameter(format!("step3 phi patch: {e}")))?;
    let phi_out = SegmentKind::Linear { a: kw, b: Wide::ZERO };
    // positive-curvature allowance from the S² budget: m d2 r²/phi stays a
    // quarter of 2 s (1-s) on the window
    let descent_cap = wf(s * (1.0 - s) * k / (4.0 * m as f64 * lambda)) / r3;
    let br_phi3 = smooth_min(
        &blend_phi,
        &phi_out,
        r3 * wf(lambda),
        r3 * wf(0.3 * x),
        D2Constraint::Within { lo: None, hi: Some(descent_cap) },
    )
    .map_err(|e| BuildError::Parameter(format!("step3 phi descent bridge: {e}")))?;

    // psi climb: power segment with exponent 1 + kappa
    let kappa = s * (1.0 - s) / (4.0 * n as f64);
    let p_climb = 1.0 + kappa;
    let a_climb = (delta1 * r3 + b2) * r3.powf(-p_climb);
    let psi_pow = SegmentKind::Power { a: a_climb, s: p_climb };
    let br_psi3a = smooth_max(&psi_lin, &psi_pow, r3, r3 * wf(0.45), D2Constraint::None)
        .map_err(|e| BuildError::Parameter(format!("step3 psi climb start: {e}")))?;

    // landing: the power stops one e-fold before it meets the cone (slope
    // parallel to within kappa²); a log blend with curvature inside the S²
    // budget climbs the remaining gap and meets the cone transversally.
    // Locations come from sign bisection on the stored segments: inverse
    // powers like (k/a)^(1/kappa) only hint the bracket, since the f64
    // rounding of 1/kappa shifts the hint by whole e-folds at telescope
    // scales.
    let psi_out = SegmentKind::Linear { a: kw, b: Wide::ZERO };
    // the hint must invert the segment's effective exponent p-1 (the f64
    // difference), not kappa: their last-ulp mismatch displaces the hint by
    // hundreds of e-folds at telescope scales
    let r4x_hint = (kw / a_climb).powf(1.0 / (p_climb - 1.0));
    let r4x_true = crate::profiles::bridge::crossing_radius(
        &psi_pow,
        &psi_out,
        r4x_hint * Wide::exp_ln(-60.0),
        r4x_hint * Wide::exp_ln(60.0),
    )
    .map_err(|e| BuildError::Parameter(format!("step3 psi cone crossing: {e}")))?;
    let r4s = r4x_true * Wide::exp_ln(-1.0);
    let pow_seg = Segment::new(r3, None, psi_pow.clone());
    let j4s = pow_seg.jet(r4s);
    let c_land = wf(s * (1.0 - s) * k / (8.0 * n as f64));
    let land_b = j4s[0] - j4s[1] * r4s + c_land * r4s;
    let land = SegmentKind::LogBlend { c: c_land, r0: r4s, slope: j4s[1], b: land_b };
    let patch_psi = c2_patch_window(&psi_pow, &land, r4s * wf(0.95), r4s * wf(1.05), 0.5)
        .map_err(|e| BuildError::Parameter(format!("step3 psi landing patch: {e}")))?;
    // the blend crosses the cone within a few e-folds
    let cross_hi = r4s * Wide::exp_ln(6.0);
    let rx_land =
        crate::profiles::bridge::crossing_radius(&land, &psi_out, r4s * wf(1.05), cross_hi)
            .map_err(|e| BuildError::Parameter(format!("step3 psi landing crossing: {e}")))?;
    let br_psi3b = smooth_min(
        &land,
        &psi_out,
        rx_land,
        rx_land * wf(0.3),
        D2Constraint::CapAboveEndpoints { factor: 1.5 },
    )
    .map_err(|e| BuildError::Parameter(format!("step3 psi climb end: {e}")))?;

    for (name, left_hi, right_lo) in [
        ("phi patch/descent", patch_phi.segment.hi.unwrap(), br_phi3.segment.lo),
        ("psi climb", br_psi3a.segment.hi.unwrap(), br_psi3b.segment.lo),
    ] {
        if right_lo <= left_hi {
            return Err(BuildError::Pattern(format!(
                "step-3 windows collide at {name}: {left_hi} vs {right_lo}"
            )));
        }
    }
    let r4 = br_phi3.segment.hi.unwrap().max(br_psi3b.segment.hi.unwrap());

    // step 4: cap rho to a constant
    let cap_lo = r4 * wf(10.0);
    let cap_hi = r4 * wf(1000.0);
    let (cap_segs, lambda_cap) = concave_cap(&rho_pow, cap_lo, cap_hi)
        .map_err(|e| BuildError::Parameter(format!("step4 rho cap: {e}")))?;
    let r_final = r4 * wf(10000.0);

    // profile assembly
    let phi = PiecewiseProfile::new(vec![
        Segment::new(Wide::ZERO, Some(br_phi1.segment.lo), phi_cone.clone()),
        br_phi1.segment.clone(),
        Segment::new(br_phi1.segment.hi.unwrap(), Some(patch_phi.segment.lo), phi_lin.clone()),
        patch_phi.segment.clone(),
        Segment::new(patch_phi.segment.hi.unwrap(), Some(br_phi3.segment.lo), blend_phi),
        br_phi3.segment.clone(),
        Segment::new(br_phi3.segment.hi.unwrap(), None, phi_out),
    ])?;

    let psi = PiecewiseProfile::new(vec![
        Segment::new(Wide::ZERO, Some(br_psi1.segment.lo), psi_flat.clone()),
        br_psi1.segment.clone(),
        Segment::new(br_psi1.segment.hi.unwrap(), Some(br_psi3a.segment.lo), psi_lin.clone()),
        br_psi3a.segment.clone(),
        Segment::new(br_psi3a.segment.hi.unwrap(), Some(patch_psi.segment.lo), psi_pow),
        patch_psi.segment.clone(),
        Segment::new(patch_psi.segment.hi.unwrap(), Some(br_psi3b.segment.lo), land),
        br_psi3b.segment.clone(),
        Segment::new(br_psi3b.segment.hi.unwrap(), None, psi_out),
    ])?;

    let mut rho_segs = vec![
        Segment::new(Wide::ZERO, Some(br_psi1.segment.lo), psi_flat),
        br_psi1.segment.clone(),
        Segment::new(br_psi1.segment.hi.unwrap(), Some(br_rho2.segment.lo), psi_lin),
        br_rho2.segment.clone(),
        Segment::new(br_rho2.segment.hi.unwrap(), Some(cap_lo), rho_pow),
    ];
    rho_segs.extend(cap_segs);
    rho_segs.push(Segment::new(cap_hi, None, SegmentKind::Constant { v: lambda_cap }));
    let rho = PiecewiseProfile::new(rho_segs)?;

    // subwindow of the step-1 phi bridge where the strict concavity premise
    // holds, certified by enclosure
    let strict_bound = -(wf(1.0 - epsilon - k) / (wf(100.0) * r1));
    let step1_phi_strict = strict_subwindow(&br_phi1.segment, strict_bound)
        .unwrap_or((r1, r1));

    let constants = Model1Constants {
        m,
        n,
        epsilon,
        k,
        s,
        delta,
        delta1,
        b1,
        b2,
        r1,
        r2,
        r3,
        r4,
        r_final,
        c_log,
        lambda_log: lambda,
        kappa_climb: kappa,
        a_climb,
        a_rho,
        lambda_cap,
        step1_window: (br_psi1.segment.lo, br_psi1.segment.hi.unwrap()),
        step1_phi_strict,
        step2_window: (br_rho2.segment.lo, br_rho2.segment.hi.unwrap()),
        step3_window: (patch_phi.segment.lo, r4),
        step4_window: (cap_lo, cap_hi),
    };

    let spec = TripleWarpSpec {
        m,
        n,
        phi,
        psi,
        rho,
        origin: Wide::ZERO,
        smooth_apex: false,
    };
    Ok(Assembled { spec, constants })
}

/// Largest centered subwindow of a bridge on which d2 <= bound is certified.
fn strict_subwindow(seg: &Segment, bound: Wide) -> Option<(Wide, Wide)> {
    let lo = seg.lo;
    let hi = seg.hi?;
    let mid = (lo + hi) * wf(0.5);
    let half = (hi - lo) * wf(0.5);
    let mut frac = 0.9;
    for _ in 0..12 {
        let a = mid - half * wf(frac);
        let b = mid + half * wf(frac);
        let e = crate::profiles::enclosure::enclose_segment(seg, a, b);
        if e.d2.hi <= bound {
            return Some((a, b));
        }
        frac *= 0.8;
    }
    None
}

/// Anchor for delta1 from the step-1 sufficiency brackets, then halved for
/// headroom.
fn delta1_anchor(m: u32, n: u32, epsilon: f64, k: f64, delta: Wide) -> Wide {
    let mf = m as f64;
    let nf = n as f64;
    let r1 = 100.0;
    let a = mf * (1.0 - epsilon - k) / (100.0 * r1 * (nf + 2.0) * (1.0 - epsilon + 9.0 * k));
    let b = ((1.0 - epsilon - k) / (100.0 * r1 * (1.0 - epsilon + 9.0 * k))
        + (mf - 1.0) * epsilon * (2.0 - epsilon)
            / (r1 * (1.0 - epsilon + 9.0 * k) * (1.0 - epsilon + 9.0 * k)))
        * (1.0 - epsilon)
        / (20.0 * (nf + 2.0));
    delta * wf(0.5 * a.min(b))
}

/// Executes the four construction steps and certifies the result, shrinking
/// delta1 (and, as a last resort, k) until the certificate passes.
pub fn build_model_i(
    m: u32,
    n: u32,
    epsilon: f64,
    delta: Option<Wide>,
    k_in: Option<f64>,
    policy: &SearchPolicy,
) -> Result<Model1Build, BuildError> {
    if !(epsilon > 0.0 && epsilon <= 0.01) {
        return Err(BuildError::Parameter(format!(
            "epsilon must lie in (0, 1/100], got {epsilon}"
        )));
    }
    if m < 2 || n < 2 {
        return Err(BuildError::Parameter("fiber dimensions must be at least 2".into()));
    }
    let delta = delta.unwrap_or_else(|| wf(0.05));
    if !delta.is_sign_positive() {
        return Err(BuildError::Parameter("delta must be positive".into()));
    }
    let mut k = k_in.unwrap_or_else(|| default_k(m, n));
    if !(k > 0.0 && k < 1.0 - epsilon) {
        return Err(BuildError::Parameter(format!("slope k out of range: {k}")));
    }

    let mut log = BuildLog::default();
    let mut last_err: Option<BuildError> = None;
    {
        let s = default_s_model1(m, n, k);
        let mut delta1 = delta1_anchor(m, n, epsilon, k, delta);
        for _ in 0..policy.budget.max(1) {
            match assemble(m, n, epsilon, delta, k, delta1, s) {
                Ok(asm) => {
                    let cert = verify_nonneg_ricci(
                        &asm.spec,
                        VerifyInterval::whole_ray(),
                        &policy.verify,
                    )
                    .map_err(|e| BuildError::Parameter(e.to_string()))?;
                    if cert.passed() {
                        let c = &asm.constants;
                        log.note("R1", c.r1, "smoothing scale of the first corner");
                        log.note("delta1", c.delta1, "collapsed-fiber slope, step-1 brackets nonneg");
                        log.note("k", c.k, "cone slope, below both model families' caps");
                        log.note("s", c.s, "S² power exponent, step-2 bracket positive");
                        log.note("R2", c.r2, "power takeover radius, slope ordering holds");
                        log.note("R3", c.r3, "descent/climb scale, re-kink inside budget");
                        log.note("lambda", c.lambda_log, "descent landing multiple");
                        log.note("c", c.c_log, "descent blend coefficient, landing identity");
                        log.note("kappa", c.kappa_climb, "climb exponent, |r² psi''/psi| within S² budget");
                        log.note("R4", c.r4, "both profiles exactly conical beyond");
                        log.note("lambda_cap", c.lambda_cap, "S² plateau from the concave cap");
                        log.note("R", c.r_final, "final radius, all asymptotic rows exact");
                        return Ok(Model1Build {
                            spec: asm.spec,
                            constants: asm.constants,
                            certificate: cert,
                            log,
                        });
                    }
                    if let crate::verify::CertStatus::Fail { r_lo, r_hi, component } = cert.status
                    {
                        last_err = Some(BuildError::Certification {
                            stage: "model1".into(),
                            component,
                            bound: cert.margin.to_f64(),
                            lo: r_lo,
                            hi: r_hi,
                        });
                    }
                }
                Err(e) => last_err = Some(e),
            }
            delta1 = delta1 * wf(0.25);
        }
    }
    let _ = &mut k;
    Err(last_err.unwrap_or_else(|| BuildError::SearchExhausted("model1".into())))
}

/// Exact-row check: the profile equals the stated closed form on the stated
/// interval, by segment inspection rather than sampling.
pub fn assert_row(
    profile: &PiecewiseProfile,
    lo: Wide,
    hi: Wide,
    expect: &SegmentKind,
) -> Result<(), BuildError> {
    let restricted = profile
        .restricted(lo, Some(hi))
        .map_err(BuildError::Profile)?;
    for seg in &restricted.segments {
        let matches = match (&seg.kind, expect) {
            (SegmentKind::Linear { a, b }, SegmentKind::Linear { a: ea, b: eb }) => {
                a.rel_diff(*ea) < 1e-12 && (b.rel_diff(*eb) < 1e-12 || (b.is_zero() && eb.is_zero()))
            }
            (SegmentKind::Constant { v }, SegmentKind::Constant { v: ev }) => {
                v.rel_diff(*ev) < 1e-12
            }
            (SegmentKind::Power { a, s }, SegmentKind::Power { a: ea, s: es }) => {
                a.rel_diff(*ea) < 1e-12 && (s - es).abs() < 1e-12 * s.abs().max(1.0)
            }
            _ => false,
        };
        if !matches {
            return Err(BuildError::Pattern(format!(
                "expected {:?} on [{lo}, {hi}], found {:?} at [{}, {:?}]",
                expect, seg.kind, seg.lo, seg.hi
            )));
        }
    }
    Ok(())
}

/// Positivity sanity sweep used in tests: the whole profile family is
/// positive on a log grid.
pub fn positive_on_grid(profile: &PiecewiseProfile, lo: Wide, hi: Wide, samples: usize) -> bool {
    let la = lo.log10_f64();
    let lb = hi.log10_f64();
    (0..=samples).all(|i| {
        let l = la + (lb - la) * i as f64 / samples as f64;
        let r = wf(10.0).powf(l);
        profile.eval(r).map(|j| j[0].is_sign_positive()).unwrap_or(false)
    })
}

/// Convenience: enclosure over a window of a full profile (used by audits).
pub fn profile_enclosure(
    profile: &PiecewiseProfile,
    lo: Wide,
    hi: Wide,
) -> Result<crate::profiles::enclosure::Enclosure, BuildError> {
    enclose(profile, lo, hi).map_err(BuildError::Profile)
}
