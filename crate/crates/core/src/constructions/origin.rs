//! Origin smoothing: replaces the conical apex by a smooth one at a slightly
//! shifted origin.
//!
//! Requires the pattern (near-unit cone, constant, constant) on [1/L, 2/L];
//! inside that region the active profile becomes r - e/L near the new origin
//! with a concave bridge up to the original cone, and the collapsed profiles
//! continue as their constants down to the origin.

use super::{BuildError, TripleWarpSpec};
use crate::num::Wide;
use crate::profiles::bridge::{bridge_on_window, D2Constraint};
use crate::profiles::{PiecewiseProfile, Segment, SegmentKind};

fn wf(x: f64) -> Wide {
    Wide::from_f64(x)
}

/// Smooths the apex of a spec whose phi equals (1-e)r on [1/L, 2/L] with psi
/// and rho constant there. `inv_l` is 1/L, carried as an extended-range value
/// because telescope stages smooth at astronomically small scales.
pub fn smooth_origin_at(
    spec: &TripleWarpSpec,
    epsilon: f64,
    inv_l: Wide,
) -> Result<TripleWarpSpec, BuildError> {
    let two_inv_l = inv_l * wf(2.0);
    let probe = inv_l * wf(1.5);
    let jphi = spec.phi.eval(probe).map_err(BuildError::Profile)?;
    let jpsi = spec.psi.eval(probe).map_err(BuildError::Profile)?;
    let jrho = spec.rho.eval(probe).map_err(BuildError::Profile)?;
    let one_eps = wf(1.0 - epsilon);
    if jphi[1].rel_diff(one_eps) > 1e-12 || !jphi[2].is_zero() {
        return Err(BuildError::Pattern(format!(
            "phi is not the near-unit cone on the smoothing window (slope {})",
            jphi[1]
        )));
    }
    if !jpsi[1].is_zero() || !jrho[1].is_zero() {
        return Err(BuildError::Pattern(
            "psi and rho must be constant on the smoothing window".into(),
        ));
    }
    let delta = jpsi[0];
    let lambda = jrho[0];

    let origin = inv_l * wf(epsilon);
    let two_origin = origin * wf(2.0);
    let apex = SegmentKind::Linear { a: Wide::ONE, b: -origin };
    let cone = SegmentKind::Linear { a: one_eps, b: Wide::ZERO };
    // corner of min{r - e/L, (1-e)r} sits at 1/L, near the middle of the
    // bridge window, which keeps the quintic concave
    let bridge = bridge_on_window(&apex, &cone, two_origin, two_inv_l, D2Constraint::NonPositive)
        .map_err(|e| BuildError::Parameter(format!("origin bridge: {e}")))?;

    let mut phi_segs = vec![
        Segment::new(origin, Some(two_origin), apex),
        bridge.segment.clone(),
    ];
    let outer_phi = spec
        .phi
        .restricted(two_inv_l, spec.phi.end())
        .map_err(BuildError::Profile)?;
    phi_segs.extend(outer_phi.segments);
    let phi = PiecewiseProfile::new(phi_segs).map_err(BuildError::Profile)?;

    let extend_const = |p: &PiecewiseProfile, v: Wide| -> Result<PiecewiseProfile, BuildError> {
        let mut segs = vec![Segment::new(origin, Some(two_inv_l), SegmentKind::Constant { v })];
        let outer = p.restricted(two_inv_l, p.end()).map_err(BuildError::Profile)?;
        segs.extend(outer.segments);
        PiecewiseProfile::new(segs).map_err(BuildError::Profile)
    };
    let psi = extend_const(&spec.psi, delta)?;
    let rho = extend_const(&spec.rho, lambda)?;

    Ok(TripleWarpSpec {
        m: spec.m,
        n: spec.n,
        phi,
        psi,
        rho,
        origin,
        smooth_apex: true,
    })
}

/// Plain-scale entry point matching the lemma's statement.
pub fn smooth_origin(
    spec: &TripleWarpSpec,
    epsilon: f64,
    l: f64,
) -> Result<TripleWarpSpec, BuildError> {
    if !(l > 2.0) {
        return Err(BuildError::Parameter("origin smoothing needs L > 2".into()));
    }
    smooth_origin_at(spec, epsilon, wf(1.0 / l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::constants::SearchPolicy;
    use crate::verify::boundary::verify_boundary_conditions;
    use crate::verify::{verify_nonneg_ricci, VerifyInterval, VerifyPolicy};

    #[test]
    fn smooths_a_block_origin() {
        let b = crate::constructions::block::build_block(2, 2, 0.01, 10.0, &SearchPolicy::default())
            .unwrap();
        let sm = smooth_origin(&b.spec, 0.01, 10.0).unwrap();
        assert!(sm.smooth_apex);
        // unit slope at the new origin, exactly
        let j = sm.phi.jet_at_start();
        assert!(j[0].is_zero() || j[0].abs().to_f64() < 1e-300);
        assert_eq!(j[1], Wide::ONE);
        let report = verify_boundary_conditions(&sm);
        assert!(report.all_pass, "{:?}", report.checks);
        // psi and rho unchanged beyond the window, constants inside
        let jin = sm.psi.eval(wf(0.05)).unwrap();
        let jout = b.spec.psi.eval(wf(0.5)).unwrap();
        assert!(jin[0].rel_diff(jout[0]) < 1e-14);
        // curvature still certifies from the new origin
        let cert = verify_nonneg_ricci(
            &sm,
            VerifyInterval { lo: sm.origin, hi: None },
            &VerifyPolicy::default(),
        )
        .unwrap();
        assert!(cert.passed(), "{:?}", cert.status);
        // pattern violation detected
        let bad = smooth_origin(&b.spec, 0.005, 10.0);
        assert!(matches!(bad, Err(BuildError::Pattern(_))));
    }
}
