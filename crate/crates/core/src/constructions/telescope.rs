//! The telescope: connectors nested at scales N_i⁻¹, each extending the
//! previous family below its conical core, with per-stage origin smoothing.
//!
//! Stage constants follow the schedule e_i = 100^{-i}, L_i = 10^i,
//! N_1 = 2 L_1² R_1³, N_{i+1} = 4 N_i L_{i+1}² R_{i+1}⁴. Radii and warp
//! values cross the f64 exponent range by stage two; everything stays in
//! extended-range arithmetic.

use super::connector::build_connector;
use super::constants::{BuildLog, ConnectorConstants, SearchPolicy};
use super::origin::smooth_origin_at;
use super::{BuildError, TripleWarpSpec};
use crate::num::Wide;
use crate::profiles::ops::{glue, rescale, scale_fiber};
use crate::profiles::PiecewiseProfile;
use crate::verify::{verify_nonneg_ricci, CurvatureCertificate, VerifyInterval};
use serde::{Deserialize, Serialize};

fn wf(x: f64) -> Wide {
    Wide::from_f64(x)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TelescopeStage {
    pub index: usize,
    pub spec: TripleWarpSpec,
    /// origin-smoothed companion; sphere roles are swapped so the closing
    /// fiber sits in the phi slot
    pub smoothed: TripleWarpSpec,
    pub epsilon: f64,
    pub l_const: f64,
    pub r_const: Wide,
    pub n_const: Wide,
    pub origin_offset: Wide,
    pub rho_sup: Wide,
    pub connector: ConnectorConstants,
    pub certificate: CurvatureCertificate,
    pub certificate_smoothed: CurvatureCertificate,
}

pub struct TelescopeBuild {
    pub stages: Vec<TelescopeStage>,
    pub log: BuildLog,
}

/// Upper bound for a profile that ends in a constant: the largest enclosure
/// value across all segments.
pub(crate) fn profile_sup_impl(p: &PiecewiseProfile) -> Wide {
    let mut sup = Wide::ZERO;
    for seg in &p.segments {
        let lo = seg.lo.max(p.start());
        let hi = seg.hi.unwrap_or_else(|| lo.max(Wide::ONE) * wf(1e6));
        let e = crate::profiles::enclosure::enclose_segment(seg, lo, hi);
        sup = sup.max(e.value.hi);
    }
    sup
}

pub fn build_telescope(
    m: u32,
    n: u32,
    stages: usize,
    rho_exponent: f64,
    policy: &SearchPolicy,
) -> Result<TelescopeBuild, BuildError> {
    if stages < 1 {
        return Err(BuildError::Parameter("telescope needs at least one stage".into()));
    }
    if m < n || n < 2 {
        return Err(BuildError::Parameter(
            "telescope fiber dimensions must satisfy m >= n >= 2".into(),
        ));
    }
    let mut log = BuildLog::default();
    let mut out: Vec<TelescopeStage> = Vec::with_capacity(stages);

    for i in 1..=stages {
        let stage = build_stage(m, n, i, out.last(), rho_exponent, policy, &mut log)
            .map_err(|e| BuildError::Stage { index: i, source: Box::new(e) })?;
        out.push(stage);
    }
    Ok(TelescopeBuild { stages: out, log })
}

fn build_stage(
    m: u32,
    n: u32,
    i: usize,
    prev: Option<&TelescopeStage>,
    rho_exponent: f64,
    policy: &SearchPolicy,
    log: &mut BuildLog,
) -> Result<TelescopeStage, BuildError> {
    let epsilon = 100f64.powi(-(i as i32));
    let l_const = 10f64.powi(i as i32);
    let conn = build_connector(m, n, epsilon, l_const, policy)?;
    let r_i = conn.constants.r_final;

    let (mut spec, n_i) = match prev {
        None => {
            let n1 = wf(2.0) * wf(l_const) * wf(l_const) * r_i * r_i * r_i;
            (conn.spec.clone(), n1)
        }
        Some(p) => {
            let a_g = wf(2.0) * p.n_const * r_i;
            let in_phi = rescale(&conn.spec.phi, a_g);
            let in_psi = rescale(&conn.spec.psi, a_g);
            let mut in_rho = rescale(&conn.spec.rho, a_g);
            let mut out_rho = p.spec.rho.clone();

            // S² matching on the splice overlap
            let ov_lo = (wf(2.0) * p.n_const).recip();
            let ov_hi = p.n_const.recip();
            let inner_val = in_rho.eval(ov_lo * wf(1.5)).map_err(BuildError::Profile)?[0];
            let outer_val = out_rho.eval(ov_lo * wf(1.5)).map_err(BuildError::Profile)?[0];
            let ratio = outer_val / inner_val;
            if ratio <= Wide::ONE {
                in_rho = scale_fiber(&in_rho, ratio);
            } else {
                out_rho = scale_fiber(&out_rho, ratio.recip());
            }

            let phi = glue(&in_phi, &p.spec.phi, ov_lo, ov_hi)?;
            let psi = glue(&in_psi, &p.spec.psi, ov_lo, ov_hi)?;
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
            let n_next = wf(4.0) * p.n_const * wf(l_const) * wf(l_const) * r_i * r_i * r_i * r_i;
            (spec, n_next)
        }
    };

    // global S² normalization: sup rho <= N_i^(-rho_exponent); scaling a
    // fiber down never decreases any Ricci component
    let target = n_i.powf(-rho_exponent);
    let sup = profile_sup_impl(&spec.rho);
    if sup > target {
        let c = target / sup;
        spec.rho = scale_fiber(&spec.rho, c);
        log.note(
            &format!("stage{i}.rho_scale"),
            c,
            "S² warp scaled so sup rho <= N^-p",
        );
    }
    let rho_sup = profile_sup_impl(&spec.rho);

    let certificate = verify_nonneg_ricci(&spec, VerifyInterval::whole_ray(), &policy.verify)
        .map_err(|e| BuildError::Parameter(e.to_string()))?;
    if !certificate.passed() {
        if let crate::verify::CertStatus::Fail { r_lo, r_hi, component } = certificate.status {
            return Err(BuildError::Certification {
                stage: format!("telescope stage {i}"),
                component,
                bound: certificate.margin.to_f64(),
                lo: r_lo,
                hi: r_hi,
            });
        }
    }

    // origin smoothing acts on the window where the S^n fiber carries the
    // near-unit cone, so the roles are swapped first
    let inv_l_eff = r_i / n_i;
    let smoothed = smooth_origin_at(&spec.swapped(), epsilon, inv_l_eff)?;
    let origin_offset = smoothed.origin;
    let certificate_smoothed = verify_nonneg_ricci(
        &smoothed,
        VerifyInterval { lo: origin_offset, hi: None },
        &policy.verify,
    )
    .map_err(|e| BuildError::Parameter(e.to_string()))?;
    if !certificate_smoothed.passed() {
        if let crate::verify::CertStatus::Fail { r_lo, r_hi, component } =
            certificate_smoothed.status
        {
            return Err(BuildError::Certification {
                stage: format!("telescope stage {i} (smoothed)"),
                component,
                bound: certificate_smoothed.margin.to_f64(),
                lo: r_lo,
                hi: r_hi,
            });
        }
    }

    log.note(&format!("stage{i}.epsilon"), epsilon, "cone defect 100^-i");
    log.note(&format!("stage{i}.L"), l_const, "window ratio 10^i");
    log.note(&format!("stage{i}.R"), r_i, "connector radius");
    log.note(&format!("stage{i}.N"), n_i, "nesting scale");
    log.note(&format!("stage{i}.origin"), origin_offset, "smoothed apex e_i R_i / N_i");

    Ok(TelescopeStage {
        index: i,
        spec,
        smoothed,
        epsilon,
        l_const,
        r_const: r_i,
        n_const: n_i,
        origin_offset,
        rho_sup,
        connector: conn.constants,
        certificate,
        certificate_smoothed,
    })
}
