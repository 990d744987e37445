//! Second local model: conical over S^m x S^n near the origin, asymptotically
//! a near-unit cone over S^m with the S^n fiber collapsed to a constant and a
//! globally constant S² fiber.
//!
//! Profile layout:
//!   phi:  kr  --[C² patch at R2]--  log-blend slope climb k -> 1-e
//!         --[concave bridge at the cone crossing]--  (1-e) r
//!   psi:  kr  --[concave bridge at R1]--  a r^s  --[concave cap]--  delta
//!   rho:  constant lambda
//!
//! The climb coefficient c = n k s (1-s) / (4m) keeps the radial curvature
//! paid for by the S^n power fiber; the crossing radius is R2·e^(u+1) with
//! u = (1-e-k)/c, far outside f64 range for realistic parameters, which is
//! why profile geometry lives in extended-range arithmetic.

use super::constants::{default_k, default_s_model2, BuildLog, Model2Constants, SearchPolicy};
use super::{BuildError, TripleWarpSpec};
use crate::num::Wide;
use crate::profiles::bridge::{c2_patch_window, concave_cap, smooth_min, D2Constraint};
use crate::profiles::{PiecewiseProfile, Segment, SegmentKind};
use crate::verify::{verify_nonneg_ricci, CurvatureCertificate, VerifyInterval};

fn wf(x: f64) -> Wide {
    Wide::from_f64(x)
}

pub struct Model2Build {
    pub spec: TripleWarpSpec,
    pub constants: Model2Constants,
    pub certificate: CurvatureCertificate,
    pub log: BuildLog,
}

struct Assembled {
    spec: TripleWarpSpec,
    constants: Model2Constants,
}

fn assemble(
    m: u32,
    n: u32,
    epsilon: f64,
    lambda: Wide,
    k: f64,
    s: f64,
) -> Result<Assembled, BuildError> {
    let kw = wf(k);
    let one_eps = wf(1.0 - epsilon);
    let r1 = wf(100.0);

    // step 1: psi leaves the cone for the slow power a r^s at R1
    let a_pow = kw * r1.powf(1.0 - s);
    let psi_cone = SegmentKind::Linear { a: kw, b: Wide::ZERO };
    let psi_pow = SegmentKind::Power { a: a_pow, s };
    let br_psi1 = smooth_min(&psi_cone, &psi_pow, r1, r1 * wf(0.9), D2Constraint::NonPositive)
        .map_err(|e| BuildError::Parameter(format!("step1 psi bridge: {e}")))?;

    // step 2: phi climbs from slope k to 1-e via a log blend
    let r2 = wf(1.0e5);
    let c_blend = wf(n as f64 * k * s * (1.0 - s) / (4.0 * m as f64));
    let blend = SegmentKind::LogBlend { c: c_blend, r0: r2, slope: kw, b: c_blend * r2 };
    let h2 = 0.05;
    let phi_cone = SegmentKind::Linear { a: kw, b: Wide::ZERO };
    let patch_phi = c2_patch_window(&phi_cone, &blend, r2 * wf(1.0 - h2), r2 * wf(1.0 + h2), 0.5)
        .map_err(|e| BuildError::Parameter(format!("step2 phi patch: {e}")))?;

    // crossing with the outer cone: u solves (1-e-k+c) - c u = c R2 / r
    let u1 = (1.0 - epsilon - k + c_blend.to_f64()) / c_blend.to_f64();
    let mut u_x = u1;
    for _ in 0..4 {
        u_x = u1 - (-u_x).exp();
    }
    let r_x = r2 * Wide::exp_ln(u_x);
    let phi_out = SegmentKind::Linear { a: one_eps, b: Wide::ZERO };
    let br_x = smooth_min(&blend, &phi_out, r_x, r_x * wf(0.3), D2Constraint::CapAboveEndpoints { factor: 1.5 })
        .map_err(|e| BuildError::Parameter(format!("step2 crossing bridge: {e}")))?;
    let x3 = br_x.segment.hi.unwrap();

    // step 3: cap psi to its constant
    let cap_lo = x3 * wf(10.0);
    let cap_hi = x3 * wf(1000.0);
    let (cap_segs, delta_out) = concave_cap(&psi_pow, cap_lo, cap_hi)
        .map_err(|e| BuildError::Parameter(format!("step3 psi cap: {e}")))?;
    let r_final = x3 * wf(10000.0);

    let phi = PiecewiseProfile::new(vec![
        Segment::new(Wide::ZERO, Some(patch_phi.segment.lo), phi_cone),
        patch_phi.segment.clone(),
        Segment::new(patch_phi.segment.hi.unwrap(), Some(br_x.segment.lo), blend),
        br_x.segment.clone(),
        Segment::new(x3, None, phi_out),
    ])?;

    let mut psi_segs = vec![
        Segment::new(Wide::ZERO, Some(br_psi1.segment.lo), psi_cone),
        br_psi1.segment.clone(),
        Segment::new(br_psi1.segment.hi.unwrap(), Some(cap_lo), psi_pow),
    ];
    psi_segs.extend(cap_segs);
    psi_segs.push(Segment::new(cap_hi, None, SegmentKind::Constant { v: delta_out }));
    let psi = PiecewiseProfile::new(psi_segs)?;

    let rho = PiecewiseProfile::whole_ray(SegmentKind::Constant { v: lambda });

    let constants = Model2Constants {
        m,
        n,
        epsilon,
        k,
        s,
        lambda,
        a_pow,
        c_blend,
        r1,
        r2,
        r_x,
        x3,
        delta_out,
        r_final,
        step1_window: (br_psi1.segment.lo, br_psi1.segment.hi.unwrap()),
        step2_window: (patch_phi.segment.lo, x3),
        step3_window: (cap_lo, cap_hi),
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

/// Builds and certifies the second model; returns the collapsed-fiber
/// constant delta and the final radius among the constants.
pub fn build_model_ii(
    m: u32,
    n: u32,
    epsilon: f64,
    lambda: Wide,
    k_in: Option<f64>,
    policy: &SearchPolicy,
) -> Result<Model2Build, BuildError> {
    if !(epsilon > 0.0 && epsilon <= 0.01) {
        return Err(BuildError::Parameter(format!(
            "epsilon must lie in (0, 1/100], got {epsilon}"
        )));
    }
    if m < 2 || n < 2 {
        return Err(BuildError::Parameter("fiber dimensions must be at least 2".into()));
    }
    if !lambda.is_sign_positive() {
        return Err(BuildError::Parameter("lambda must be positive".into()));
    }
    let mut k = k_in.unwrap_or_else(|| default_k(m, n));
    let s = default_s_model2(m, n, epsilon);

    let mut log = BuildLog::default();
    let mut last_err: Option<BuildError> = None;
    {
        match assemble(m, n, epsilon, lambda, k, s) {
            Ok(asm) => {
                let cert =
                    verify_nonneg_ricci(&asm.spec, VerifyInterval::whole_ray(), &policy.verify)
                        .map_err(|e| BuildError::Parameter(e.to_string()))?;
                if cert.passed() {
                    let c = &asm.constants;
                    log.note("s", c.s, "collapsing exponent epsilon/(1e6 m n)");
                    log.note("k", c.k, "cone slope within both caps");
                    log.note("a", c.a_pow, "power coefficient k R1^(1-s), continuity at R1");
                    log.note("R2", c.r2, "slope climb start");
                    log.note("c", c.c_blend, "climb coefficient n k s(1-s)/(4m), radial budget");
                    log.note("r_x", c.r_x, "blend meets the outer cone");
                    log.note("delta", c.delta_out, "collapsed S^n constant from the cap");
                    log.note("R", c.r_final, "final radius, asymptotic rows exact");
                    return Ok(Model2Build {
                        spec: asm.spec,
                        constants: asm.constants,
                        certificate: cert,
                        log,
                    });
                }
                if let crate::verify::CertStatus::Fail { r_lo, r_hi, component } = cert.status {
                    last_err = Some(BuildError::Certification {
                        stage: "model2".into(),
                        component,
                        bound: cert.margin.to_f64(),
                        lo: r_lo,
                        hi: r_hi,
                    });
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let _ = &mut k;
    Err(last_err.unwrap_or_else(|| BuildError::SearchExhausted("model2".into())))
}
