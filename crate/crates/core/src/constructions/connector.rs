//! Connector: two blocks with the sphere roles exchanged, the second
//! rescaled into the first and glued where both are conical.
//!
//! The result carries five exact interval rows: conical at both ends and in
//! the middle, with a window where the S^n fiber is the near-unit cone
//! (inherited from the inner, role-swapped block) and a window where the S^m
//! fiber is (the outer block's own middle row).

use super::block::build_block;
use super::constants::{BuildLog, ConnectorConstants, SearchPolicy};
use super::{BuildError, TripleWarpSpec};
use crate::num::Wide;
use crate::profiles::ops::{glue, rescale, scale_fiber};
use crate::verify::{verify_nonneg_ricci, CurvatureCertificate, VerifyInterval};

fn wf(x: f64) -> Wide {
    Wide::from_f64(x)
}

pub struct ConnectorBuild {
    pub spec: TripleWarpSpec,
    pub constants: ConnectorConstants,
    pub certificate: CurvatureCertificate,
    pub log: BuildLog,
}

pub fn build_connector(
    m: u32,
    n: u32,
    epsilon: f64,
    l: f64,
    policy: &SearchPolicy,
) -> Result<ConnectorBuild, BuildError> {
    if !(l > 1.0) {
        return Err(BuildError::Parameter(format!("connector needs L > 1, got {l}")));
    }
    let outer = build_block(m, n, epsilon, l, policy)?;
    let inner = build_block(n, m, epsilon, l, policy)?;
    let k = outer.constants.k;

    let r_c = outer.constants.r_final.max(inner.constants.r_final);
    let a_c = wf(2.0 * l) * r_c * r_c;

    // the inner block lives on swapped sphere roles: its psi-slot warp is the
    // final object's phi and vice versa
    let in_phi = rescale(&inner.spec.psi, a_c);
    let in_psi = rescale(&inner.spec.phi, a_c);
    let mut in_rho = rescale(&inner.spec.rho, a_c);

    // S² matching on the glue overlap: scale whichever side shrinks
    let inner_outer_rho = inner.constants.lambda2 / a_c;
    let target = outer.constants.lambda1;
    let ratio = target / inner_outer_rho;
    let out_phi = outer.spec.phi.clone();
    let out_psi = outer.spec.psi.clone();
    let mut out_rho = outer.spec.rho.clone();
    let rho_scale_note;
    if ratio <= Wide::ONE {
        in_rho = scale_fiber(&in_rho, ratio);
        rho_scale_note = format!("inner S² scaled by {ratio}");
    } else {
        let inv = ratio.recip();
        out_rho = scale_fiber(&out_rho, inv);
        rho_scale_note = format!("outer S² scaled by {inv}");
    }

    let ov_lo = (wf(2.0 * l) * r_c).recip();
    let ov_hi = (wf(l) * r_c).recip();
    let phi = glue(&in_phi, &out_phi, ov_lo, ov_hi)?;
    let psi = glue(&in_psi, &out_psi, ov_lo, ov_hi)?;
    let rho = glue(&in_rho, &out_rho, ov_lo, ov_hi)?;

    let spec = TripleWarpSpec {
        m,
        n,
        phi,
        psi,
        rho,
        origin: Wide::ZERO,
        smooth_apex: false,
    };
    let cert = verify_nonneg_ricci(&spec, VerifyInterval::whole_ray(), &policy.verify)
        .map_err(|e| BuildError::Parameter(e.to_string()))?;
    if !cert.passed() {
        if let crate::verify::CertStatus::Fail { r_lo, r_hi, component } = cert.status {
            return Err(BuildError::Certification {
                stage: "connector".into(),
                component,
                bound: cert.margin.to_f64(),
                lo: r_lo,
                hi: r_hi,
            });
        }
    }

    // lambda chain after matching, probed in the interior of rows 1/3/5
    let row1_hi = (wf(2.0 * l * l) * r_c.powi(3)).recip();
    let lambda1 = spec.rho.eval(row1_hi * wf(0.5)).map_err(BuildError::Profile)?[0];
    let lambda2 = spec.rho.eval(ov_lo * wf(1.5)).map_err(BuildError::Profile)?[0];
    let lambda3 = spec.rho.eval(r_c * wf(3.0)).map_err(BuildError::Profile)?[0];

    let delta1 = inner.constants.delta / a_c;
    let delta2 = outer.constants.delta;
    // L-independent bound constant: delta2·L and delta1·2L²R² are both the
    // per-block ratio delta_out/R of the corresponding inner model
    let c_a = delta2 * wf(l);
    let c_b = delta1 * a_c * wf(l) / r_c;
    let c_bound = c_a.max(c_b) * wf(2.0);

    let mut log = BuildLog::default();
    log.lines.extend(outer.log.lines.iter().map(|s| format!("outer-block.{s}")));
    log.lines.extend(inner.log.lines.iter().map(|s| format!("inner-block.{s}")));
    log.note("R", r_c, "larger of the two block radii; all five rows stated with it");
    log.note("rescale", a_c, "inner block mapped below the outer block's cone region");
    log.note("delta1", delta1, "collapsed S^m constant in the inner window, < c/(L²R²)");
    log.note("delta2", delta2, "collapsed S^n constant in the outer window, < c/L");
    log.note("c", c_bound, "L-independent constant bounding both deltas");
    log.note("rho-match", &rho_scale_note, "S² constants equalized on the glue overlap");

    let constants = ConnectorConstants {
        m,
        n,
        epsilon,
        l,
        k,
        r_final: r_c,
        delta1,
        delta2,
        c_bound,
        lambda1,
        lambda2,
        lambda3,
        rescale: a_c,
        outer: outer.constants,
        inner: inner.constants,
    };
    Ok(ConnectorBuild { spec, constants, certificate: cert, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::model1::assert_row;
    use crate::profiles::SegmentKind;

    #[test]
    fn connector_five_rows_2_3() {
        let b = build_connector(2, 3, 0.01, 10.0, &SearchPolicy::default()).unwrap();
        assert!(b.certificate.passed());
        let c = &b.constants;
        let kw = wf(c.k);
        let one_eps = wf(0.99);
        let l = wf(c.l);
        let r = c.r_final;
        let kind_cone = SegmentKind::Linear { a: kw, b: Wide::ZERO };
        let row = |lo: Wide, hi: Wide| (lo, hi);

        // row 1: (0, (2L²R³)⁻¹): all cones, rho = lambda1
        let (lo, hi) = row((wf(2.0) * l * l * r * r * r).recip() * wf(1.0e-3), (wf(2.0) * l * l * r * r * r).recip());
        assert_row(&b.spec.phi, lo, hi, &kind_cone).unwrap();
        assert_row(&b.spec.psi, lo, hi, &kind_cone).unwrap();
        assert_row(&b.spec.rho, lo, hi, &SegmentKind::Constant { v: c.lambda1 }).unwrap();

        // row 2: [(2L²R²)⁻¹, (2LR²)⁻¹]: phi collapsed, psi near-unit cone
        let (lo, hi) = row((wf(2.0) * l * l * r * r).recip(), (wf(2.0) * l * r * r).recip());
        assert_row(&b.spec.phi, lo, hi, &SegmentKind::Constant { v: c.delta1 }).unwrap();
        assert_row(&b.spec.psi, lo, hi, &SegmentKind::Linear { a: one_eps, b: Wide::ZERO }).unwrap();
        assert_row(&b.spec.rho, lo, hi, &SegmentKind::Constant { v: c.lambda1 }).unwrap();

        // row 3: [(2LR)⁻¹, (LR)⁻¹]: cones again, rho = lambda2
        let (lo, hi) = row((wf(2.0) * l * r).recip(), (l * r).recip());
        assert_row(&b.spec.phi, lo, hi, &kind_cone).unwrap();
        assert_row(&b.spec.psi, lo, hi, &kind_cone).unwrap();
        assert_row(&b.spec.rho, lo, hi, &SegmentKind::Constant { v: c.lambda2 }).unwrap();

        // row 4: [L⁻¹, 1]: phi near-unit cone, psi collapsed
        let (lo, hi) = row(l.recip(), Wide::ONE);
        assert_row(&b.spec.phi, lo, hi, &SegmentKind::Linear { a: one_eps, b: Wide::ZERO }).unwrap();
        assert_row(&b.spec.psi, lo, hi, &SegmentKind::Constant { v: c.delta2 }).unwrap();
        assert_row(&b.spec.rho, lo, hi, &SegmentKind::Constant { v: c.lambda2 }).unwrap();

        // row 5: [R, ∞): cones, rho = lambda3
        assert_row(&b.spec.phi, r, r * wf(7.0), &kind_cone).unwrap();
        assert_row(&b.spec.psi, r, r * wf(7.0), &kind_cone).unwrap();
        assert_row(&b.spec.rho, r, r * wf(7.0), &SegmentKind::Constant { v: c.lambda3 }).unwrap();

        // delta bounds with the found constant
        assert!(c.delta1 < c.c_bound / (l * l * r * r));
        assert!(c.delta2 < c.c_bound / l);
    }

    #[test]
    fn symmetric_connector_swaps() {
        // with m = n the two blocks' tables agree up to the S² constants
        let b = build_connector(2, 2, 0.01, 10.0, &SearchPolicy::default()).unwrap();
        let c = &b.constants;
        assert_eq!(c.outer.m, c.inner.m);
        assert_eq!(c.outer.n, c.inner.n);
        let rel = (c.outer.delta / c.inner.delta - Wide::ONE).abs().to_f64();
        assert!(rel < 1e-12, "block deltas should agree for m = n, rel {rel}");
    }
}
