//! N-fiber generalizations: connectors and telescopes over an arbitrary
//! finite collection of closed fibers known only through (dimension, Ricci
//! lower bound).
//!
//! The profile construction is the same as the triple case run at effective
//! dimensions (active fiber, total collapsed dimension); two auxiliary S²
//! fibers are appended, one carrying the near-unit cone used for origin
//! smoothing, one carrying the globally small warp. Certification goes
//! through the N-fold lower-bound curvature path.

use super::block::build_block;
use super::constants::{BuildLog, SearchPolicy};
use super::origin::smooth_origin_at;
use super::{BuildError, MultiWarpSpec, TripleWarpSpec};
use crate::curvature::FiberDescriptor;
use crate::num::Wide;
use crate::profiles::ops::{glue, rescale, scale_fiber};
use crate::profiles::PiecewiseProfile;
use crate::verify::{verify_nonneg_ricci_multi, CurvatureCertificate, VerifyInterval};
use serde::{Deserialize, Serialize};

fn wf(x: f64) -> Wide {
    Wide::from_f64(x)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiStage {
    pub index: usize,
    /// which user fiber carries the near-unit cone in this stage's window
    pub active_fiber: usize,
    pub spec: MultiWarpSpec,
    pub smoothed: MultiWarpSpec,
    pub epsilon: f64,
    pub l_const: f64,
    pub r_const: Wide,
    pub n_const: Wide,
    pub origin_offset: Wide,
    pub certificate: CurvatureCertificate,
    pub certificate_smoothed: CurvatureCertificate,
}

pub struct MultiTelescopeBuild {
    pub fibers: Vec<FiberDescriptor>,
    pub stages: Vec<MultiStage>,
    pub log: BuildLog,
}

fn check_fibers(fibers: &[FiberDescriptor]) -> Result<(), BuildError> {
    if fibers.is_empty() {
        return Err(BuildError::Parameter("fiber list is empty".into()));
    }
    for f in fibers {
        if f.dim < 2 {
            return Err(BuildError::Parameter("every fiber needs dim >= 2".into()));
        }
        if (f.ricci_lower - (f.dim - 1) as f64).abs() > 1e-12 {
            return Err(BuildError::Parameter(
                "fibers must be normalized to Ric >= (dim - 1)".into(),
            ));
        }
    }
    Ok(())
}

/// The full fiber list of the construction: user fibers plus the smoothing
/// S² and the collapsed S².
pub fn extended_fibers(fibers: &[FiberDescriptor]) -> Vec<FiberDescriptor> {
    let mut out = fibers.to_vec();
    out.push(FiberDescriptor::sphere(2));
    out.push(FiberDescriptor::sphere(2));
    out
}

pub struct MultiConnectorBuild {
    pub spec: MultiWarpSpec,
    pub active_fiber: usize,
    pub r_final: Wide,
    pub k: f64,
    pub certificate: CurvatureCertificate,
}

/// Connector whose outer window carries the cone over fiber `i0` and whose
/// inner window carries the cone over the smoothing S².
pub fn build_multi_connector(
    fibers: &[FiberDescriptor],
    i0: usize,
    epsilon: f64,
    l: f64,
    policy: &SearchPolicy,
) -> Result<MultiConnectorBuild, BuildError> {
    check_fibers(fibers)?;
    if i0 >= fibers.len() {
        return Err(BuildError::Parameter(format!("active fiber {i0} out of range")));
    }
    let d_active = fibers[i0].dim;
    let d_rest: u32 = fibers
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i0)
        .map(|(_, f)| f.dim)
        .sum::<u32>()
        + 2; // the smoothing S² collapses in the outer window
    let outer = build_block(d_active, d_rest, epsilon, l, policy)?;
    let inner = build_block(2, d_active + d_rest - 2, epsilon, l, policy)?;
    if (outer.constants.k - inner.constants.k).abs() > 1e-15 {
        return Err(BuildError::Parameter(format!(
            "slope mismatch between role-swapped blocks: {} vs {}",
            outer.constants.k, inner.constants.k
        )));
    }

    let r_c = outer.constants.r_final.max(inner.constants.r_final);
    let a_c = wf(2.0 * l) * r_c * r_c;

    let in_active = rescale(&inner.spec.psi, a_c);
    let in_smooth = rescale(&inner.spec.phi, a_c);
    let mut in_rho = rescale(&inner.spec.rho, a_c);
    let mut out_rho = outer.spec.rho.clone();
    let inner_outer_rho = inner.constants.lambda2 / a_c;
    let ratio = outer.constants.lambda1 / inner_outer_rho;
    if ratio <= Wide::ONE {
        in_rho = scale_fiber(&in_rho, ratio);
    } else {
        out_rho = scale_fiber(&out_rho, ratio.recip());
    }

    let ov_lo = (wf(2.0 * l) * r_c).recip();
    let ov_hi = (wf(l) * r_c).recip();
    let active = glue(&in_active, &outer.spec.phi, ov_lo, ov_hi)?;
    let collapsed = glue(&in_active, &outer.spec.psi, ov_lo, ov_hi)?;
    let smooth_s2 = glue(&in_smooth, &outer.spec.psi, ov_lo, ov_hi)?;
    let rho = glue(&in_rho, &out_rho, ov_lo, ov_hi)?;

    let ext = extended_fibers(fibers);
    let mut profiles: Vec<PiecewiseProfile> = Vec::with_capacity(ext.len());
    for j in 0..fibers.len() {
        profiles.push(if j == i0 { active.clone() } else { collapsed.clone() });
    }
    profiles.push(smooth_s2);
    profiles.push(rho);

    let spec = MultiWarpSpec {
        fibers: ext,
        profiles,
        origin: Wide::ZERO,
        smooth_apex: false,
        apex_fiber: fibers.len(),
    };
    let certificate =
        verify_nonneg_ricci_multi(&spec, VerifyInterval::whole_ray(), &policy.verify)
            .map_err(|e| BuildError::Parameter(e.to_string()))?;
    if !certificate.passed() {
        if let crate::verify::CertStatus::Fail { r_lo, r_hi, component } = certificate.status {
            return Err(BuildError::Certification {
                stage: "multi connector".into(),
                component,
                bound: certificate.margin.to_f64(),
                lo: r_lo,
                hi: r_hi,
            });
        }
    }
    Ok(MultiConnectorBuild {
        spec,
        active_fiber: i0,
        r_final: r_c,
        k: outer.constants.k,
        certificate,
    })
}

/// Stages cycle the active fiber through the collection so every fiber's
/// cone appears in infinitely many windows of the limit; at desk scale, once
/// per cycle.
pub fn build_multi_telescope(
    fibers: &[FiberDescriptor],
    stages: usize,
    rho_exponent: f64,
    policy: &SearchPolicy,
) -> Result<MultiTelescopeBuild, BuildError> {
    check_fibers(fibers)?;
    if stages < 1 {
        return Err(BuildError::Parameter("telescope needs at least one stage".into()));
    }
    let mut out: Vec<MultiStage> = Vec::with_capacity(stages);
    let mut log = BuildLog::default();
    let ext = extended_fibers(fibers);
    let smooth_idx = fibers.len();

    for i in 1..=stages {
        let i0 = (i - 1) % fibers.len();
        let epsilon = 100f64.powi(-(i as i32));
        let l_const = 10f64.powi(i as i32);
        let conn = build_multi_connector(fibers, i0, epsilon, l_const, policy)
            .map_err(|e| BuildError::Stage { index: i, source: Box::new(e) })?;
        let r_i = conn.r_final;

        let (mut spec, n_i) = match out.last() {
            None => {
                let n1 = wf(2.0) * wf(l_const) * wf(l_const) * r_i.powi(3);
                (conn.spec.clone(), n1)
            }
            Some(p) => {
                let a_g = wf(2.0) * p.n_const * r_i;
                let ov_lo = (wf(2.0) * p.n_const).recip();
                let ov_hi = p.n_const.recip();
                let mut profiles = Vec::with_capacity(ext.len());
                for (idx, prof) in conn.spec.profiles.iter().enumerate() {
                    let mut inner = rescale(prof, a_g);
                    let mut outer = p.spec.profiles[idx].clone();
                    if idx == ext.len() - 1 {
                        let iv = inner.eval(ov_lo * wf(1.5)).map_err(BuildError::Profile)?[0];
                        let ov = outer.eval(ov_lo * wf(1.5)).map_err(BuildError::Profile)?[0];
                        let ratio = ov / iv;
                        if ratio <= Wide::ONE {
                            inner = scale_fiber(&inner, ratio);
                        } else {
                            outer = scale_fiber(&outer, ratio.recip());
                        }
                    }
                    profiles.push(glue(&inner, &outer, ov_lo, ov_hi)?);
                }
                let spec = MultiWarpSpec {
                    fibers: ext.clone(),
                    profiles,
                    origin: Wide::ZERO,
                    smooth_apex: false,
                    apex_fiber: smooth_idx,
                };
                let n_next = wf(4.0) * p.n_const * wf(l_const) * wf(l_const) * r_i.powi(4);
                (spec, n_next)
            }
        };

        // S² normalization
        let target = n_i.powf(-rho_exponent);
        let rho_idx = ext.len() - 1;
        let sup = super::telescope_profile_sup(&spec.profiles[rho_idx]);
        if sup > target {
            spec.profiles[rho_idx] = scale_fiber(&spec.profiles[rho_idx], target / sup);
        }

        let certificate =
            verify_nonneg_ricci_multi(&spec, VerifyInterval::whole_ray(), &policy.verify)
                .map_err(|e| BuildError::Parameter(e.to_string()))?;
        if !certificate.passed() {
            if let crate::verify::CertStatus::Fail { r_lo, r_hi, component } = certificate.status
            {
                return Err(BuildError::Stage {
                    index: i,
                    source: Box::new(BuildError::Certification {
                        stage: "multi telescope".into(),
                        component,
                        bound: certificate.margin.to_f64(),
                        lo: r_lo,
                        hi: r_hi,
                    }),
                });
            }
        }

        // origin smoothing on the smoothing-S² cone: run the triple machinery
        // on a view (smoothing S² active, everything else grouped), then put
        // the profiles back
        let inv_l_eff = r_i / n_i;
        let smoothed = smooth_multi_origin(&spec, smooth_idx, epsilon, inv_l_eff)?;
        let origin_offset = smoothed.origin;
        let certificate_smoothed = verify_nonneg_ricci_multi(
            &smoothed,
            VerifyInterval { lo: origin_offset, hi: None },
            &policy.verify,
        )
        .map_err(|e| BuildError::Parameter(e.to_string()))?;
        if !certificate_smoothed.passed() {
            return Err(BuildError::Stage {
                index: i,
                source: Box::new(BuildError::Pattern(
                    "smoothed multi stage failed certification".into(),
                )),
            });
        }

        log.note(&format!("stage{i}.active"), i0, "fiber whose cone fills this window");
        log.note(&format!("stage{i}.N"), n_i, "nesting scale");

        out.push(MultiStage {
            index: i,
            active_fiber: i0,
            spec,
            smoothed,
            epsilon,
            l_const,
            r_const: r_i,
            n_const: n_i,
            origin_offset,
            certificate,
            certificate_smoothed,
        });
    }
    Ok(MultiTelescopeBuild { fibers: fibers.to_vec(), stages: out, log })
}

/// Origin smoothing for the multi spec: the apex profile becomes r - origin
/// with a concave bridge; every other profile continues as its local
/// constant.
fn smooth_multi_origin(
    spec: &MultiWarpSpec,
    apex: usize,
    epsilon: f64,
    inv_l: Wide,
) -> Result<MultiWarpSpec, BuildError> {
    // triple view: apex profile in the phi slot, any collapsed profile in
    // psi, the S² warp in rho; the smoothing machinery only reads phi and
    // the constancy of the others
    let view = TripleWarpSpec {
        m: 2,
        n: 2,
        phi: spec.profiles[apex].clone(),
        psi: spec.profiles[0].clone(),
        rho: spec.profiles[spec.profiles.len() - 1].clone(),
        origin: spec.origin,
        smooth_apex: false,
    };
    let sm = smooth_origin_at(&view, epsilon, inv_l)?;
    let origin = sm.origin;
    let two_inv_l = inv_l * wf(2.0);
    let mut profiles = Vec::with_capacity(spec.profiles.len());
    for (idx, p) in spec.profiles.iter().enumerate() {
        if idx == apex {
            profiles.push(sm.phi.clone());
        } else {
            let v = p.eval(inv_l * wf(1.5)).map_err(BuildError::Profile)?;
            if !v[1].is_zero() {
                return Err(BuildError::Pattern(format!(
                    "profile {idx} not constant on the smoothing window"
                )));
            }
            let mut segs = vec![crate::profiles::Segment::new(
                origin,
                Some(two_inv_l),
                crate::profiles::SegmentKind::Constant { v: v[0] },
            )];
            let outer = p.restricted(two_inv_l, p.end()).map_err(BuildError::Profile)?;
            segs.extend(outer.segments);
            profiles.push(PiecewiseProfile::new(segs).map_err(BuildError::Profile)?);
        }
    }
    Ok(MultiWarpSpec {
        fibers: spec.fibers.clone(),
        profiles,
        origin,
        smooth_apex: true,
        apex_fiber: apex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spheres(dims: &[u32]) -> Vec<FiberDescriptor> {
        dims.iter().map(|&d| FiberDescriptor::sphere(d)).collect()
    }

    #[test]
    fn multi_connector_mirrors_triple_structure() {
        let p = SearchPolicy::default();
        let fibers = spheres(&[3, 2]);
        let c = build_multi_connector(&fibers, 0, 0.01, 10.0, &p).unwrap();
        assert!(c.certificate.passed());
        // active fiber carries the near-unit cone on [1/L, 1]
        let j = c.spec.profiles[0].eval(wf(0.5)).unwrap();
        assert!(j[1].rel_diff(wf(0.99)) < 1e-12);
        // smoothing S² carries it in the inner window
        let r = c.r_final;
        let inner_mid = (wf(2.0 * 10.0) * r * r).recip() * wf(0.9);
        let js = c.spec.profiles[2].eval(inner_mid).unwrap();
        assert!(js[1].rel_diff(wf(0.99)) < 1e-12, "slope {}", js[1]);
        // other fibers collapse there
        let jc = c.spec.profiles[1].eval(inner_mid).unwrap();
        assert!(jc[1].is_zero());
    }

    #[test]
    fn one_stage_multi_telescope() {
        let p = SearchPolicy::default();
        let fibers = spheres(&[2, 2]);
        let t = build_multi_telescope(&fibers, 1, 4.0, &p).unwrap();
        let st = &t.stages[0];
        assert!(st.certificate.passed());
        assert!(st.certificate_smoothed.passed());
        assert_eq!(st.active_fiber, 0);
        // smoothing S² closes at the origin
        assert_eq!(st.smoothed.apex_fiber, 2);
        let j = st.smoothed.profiles[2].jet_at_start();
        assert_eq!(j[1], Wide::ONE);
    }

    #[test]
    fn rejects_unnormalized_fibers() {
        let p = SearchPolicy::default();
        let bad = vec![FiberDescriptor { dim: 3, ricci_lower: 1.0 }];
        assert!(build_multi_connector(&bad, 0, 0.01, 10.0, &p).is_err());
    }
}
