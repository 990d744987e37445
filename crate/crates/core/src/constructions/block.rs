//! Block: the second model rescaled into the first, glued where both are
//! exactly (cone, constant, constant).
//!
//! The second model is built so its collapsed-fiber constant becomes, after
//! rescaling by (L·R)⁻¹, exactly the delta handed to the first model; its S²
//! profile is the same constant, which makes the glue overlap segmentwise
//! identical on [L⁻¹, 1].

use super::constants::{default_k, BlockConstants, BuildLog, SearchPolicy};
use super::model1::build_model_i;
use super::model2::build_model_ii;
use super::{BuildError, TripleWarpSpec};
use crate::num::Wide;
use crate::profiles::ops::{glue, rescale};
use crate::verify::{verify_nonneg_ricci, CurvatureCertificate, VerifyInterval};

fn wf(x: f64) -> Wide {
    Wide::from_f64(x)
}

pub struct BlockBuild {
    pub spec: TripleWarpSpec,
    pub constants: BlockConstants,
    pub certificate: CurvatureCertificate,
    pub log: BuildLog,
}

pub fn build_block(
    m: u32,
    n: u32,
    epsilon: f64,
    l: f64,
    policy: &SearchPolicy,
) -> Result<BlockBuild, BuildError> {
    if !(l > 1.0) {
        return Err(BuildError::Parameter(format!("block needs L > 1, got {l}")));
    }
    let k = default_k(m, n);

    // the second model's collapsed constant is independent of its S² value;
    // one probe run fixes the constant, the final run carries it as lambda so
    // the rescaled S² profile lands exactly on the first model's
    let probe = build_model_ii(m, n, epsilon, Wide::ONE, Some(k), policy)?;
    let m2 = build_model_ii(m, n, epsilon, probe.constants.delta_out, Some(k), policy)?;
    let a_rescale = wf(l) * m2.constants.r_final;
    let delta = m2.constants.delta_out / a_rescale;

    let m1 = build_model_i(m, n, epsilon, Some(delta), Some(k), policy)?;

    let inner_phi = rescale(&m2.spec.phi, a_rescale);
    let inner_psi = rescale(&m2.spec.psi, a_rescale);
    let inner_rho = rescale(&m2.spec.rho, a_rescale);

    let ov_lo = wf(1.0 / l);
    let ov_hi = Wide::ONE;
    let phi = glue(&inner_phi, &m1.spec.phi, ov_lo, ov_hi)?;
    let psi = glue(&inner_psi, &m1.spec.psi, ov_lo, ov_hi)?;
    let rho = glue(&inner_rho, &m1.spec.rho, ov_lo, ov_hi)?;

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
                stage: "block".into(),
                component,
                bound: cert.margin.to_f64(),
                lo: r_lo,
                hi: r_hi,
            });
        }
    }

    let mut log = BuildLog::default();
    log.lines.extend(m2.log.lines.iter().map(|s| format!("inner.{s}")));
    log.lines.extend(m1.log.lines.iter().map(|s| format!("outer.{s}")));
    log.note("rescale", a_rescale, "inner model mapped onto (0, 1/L]");
    log.note("delta", delta, "collapsed constant shared across the glue overlap");
    log.note("lambda1", delta, "S² constant through the inner region");
    log.note("lambda2", m1.constants.lambda_cap, "S² constant beyond the outer cap");

    let constants = BlockConstants {
        m,
        n,
        epsilon,
        l,
        k,
        delta,
        lambda1: delta,
        lambda2: m1.constants.lambda_cap,
        r_final: m1.constants.r_final,
        rescale: a_rescale,
        model1: m1.constants,
        model2: m2.constants,
    };
    Ok(BlockBuild { spec, constants, certificate: cert, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::model1::assert_row;
    use crate::profiles::SegmentKind;

    #[test]
    fn block_rows_2_2() {
        let b = build_block(2, 2, 0.01, 10.0, &SearchPolicy::default()).unwrap();
        assert!(b.certificate.passed());
        let c = &b.constants;
        let kw = wf(c.k);
        let one_eps = wf(0.99);
        let lr_inv = (wf(c.l) * c.r_final).recip();
        // inner row: both cones with slope k, constant S²
        assert_row(&b.spec.phi, lr_inv * wf(0.01), lr_inv, &SegmentKind::Linear { a: kw, b: Wide::ZERO }).unwrap();
        assert_row(&b.spec.psi, lr_inv * wf(0.01), lr_inv, &SegmentKind::Linear { a: kw, b: Wide::ZERO }).unwrap();
        assert_row(&b.spec.rho, lr_inv * wf(0.01), lr_inv, &SegmentKind::Constant { v: c.lambda1 }).unwrap();
        // middle row on [1/L, 1]
        assert_row(&b.spec.phi, wf(0.1), wf(1.0), &SegmentKind::Linear { a: one_eps, b: Wide::ZERO }).unwrap();
        assert_row(&b.spec.psi, wf(0.1), wf(1.0), &SegmentKind::Constant { v: c.delta }).unwrap();
        assert_row(&b.spec.rho, wf(0.1), wf(1.0), &SegmentKind::Constant { v: c.lambda1 }).unwrap();
        // outer row beyond R
        assert_row(&b.spec.phi, c.r_final, c.r_final * wf(5.0), &SegmentKind::Linear { a: kw, b: Wide::ZERO }).unwrap();
        assert_row(&b.spec.psi, c.r_final, c.r_final * wf(5.0), &SegmentKind::Linear { a: kw, b: Wide::ZERO }).unwrap();
        assert_row(&b.spec.rho, c.r_final, c.r_final * wf(5.0), &SegmentKind::Constant { v: c.lambda2 }).unwrap();
    }
}
