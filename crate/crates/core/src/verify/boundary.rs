//! Apex boundary condition checks.
//!
//! A smooth apex requires the closing profile to vanish with unit slope and
//! even-order derivatives zero, while the surviving fibers stay positive with
//! vanishing odd derivatives. The checks evaluate segment closed forms at the
//! origin, so residuals are exact up to arithmetic rounding.

use crate::constructions::{MultiWarpSpec, TripleWarpSpec};
use crate::num::Wide;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryCheck {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryReport {
    pub origin: Wide,
    pub checks: Vec<BoundaryCheck>,
    pub all_pass: bool,
}

const BTOL: f64 = 1e-12;

fn check(name: &str, residual: f64) -> BoundaryCheck {
    BoundaryCheck { name: name.to_string(), residual, pass: residual.abs() <= BTOL }
}

fn report_for(
    origin: Wide,
    apex_jet: [Wide; 3],
    apex_name: &str,
    others: &[(&str, [Wide; 3])],
) -> BoundaryReport {
    let mut checks = Vec::new();
    // closing profile: value 0, unit slope, vanishing second derivative
    let scale = (apex_jet[0].abs().to_f64()).max(1.0);
    checks.push(check(&format!("{apex_name}(origin) = 0"), apex_jet[0].to_f64() / scale));
    checks.push(check(&format!("{apex_name}'(origin) = 1"), apex_jet[1].to_f64() - 1.0));
    checks.push(check(&format!("{apex_name}''(origin) = 0"), apex_jet[2].to_f64()));
    // surviving fibers: positive value, vanishing first derivative
    for (name, jet) in others {
        let pos = jet[0].is_sign_positive();
        checks.push(BoundaryCheck {
            name: format!("{name}(origin) > 0"),
            residual: if pos { 0.0 } else { jet[0].to_f64() },
            pass: pos,
        });
        let vscale = jet[0].abs().to_f64().max(1e-300);
        checks.push(check(&format!("{name}'(origin) = 0"), jet[1].to_f64() / vscale.min(1.0).max(1e-300)));
    }
    let all_pass = checks.iter().all(|c| c.pass);
    BoundaryReport { origin, checks, all_pass }
}

/// Checks the smooth-apex conditions of a triple spec at its origin.
pub fn verify_boundary_conditions(spec: &TripleWarpSpec) -> BoundaryReport {
    let phi = spec.phi.jet_at_start();
    let psi = spec.psi.jet_at_start();
    let rho = spec.rho.jet_at_start();
    report_for(spec.origin, phi, "phi", &[("psi", psi), ("rho", rho)])
}

/// Multi-spec variant: `apex_fiber` names the closing profile.
pub fn verify_boundary_conditions_multi(spec: &MultiWarpSpec) -> BoundaryReport {
    let jets: Vec<[Wide; 3]> = spec.profiles.iter().map(|p| p.jet_at_start()).collect();
    let names: Vec<String> = (0..jets.len()).map(|i| format!("f{i}")).collect();
    let others: Vec<(&str, [Wide; 3])> = jets
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != spec.apex_fiber)
        .map(|(i, j)| (names[i].as_str(), *j))
        .collect();
    report_for(spec.origin, jets[spec.apex_fiber], &names[spec.apex_fiber], &others)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{PiecewiseProfile, Segment, SegmentKind};

    fn w(x: f64) -> Wide {
        Wide::from_f64(x)
    }

    fn one_seg(lo: f64, kind: SegmentKind) -> PiecewiseProfile {
        PiecewiseProfile { segments: vec![Segment::new(w(lo), None, kind)] }
    }

    #[test]
    fn smoothed_origin_passes_exactly() {
        let o = 0.001;
        let spec = TripleWarpSpec {
            m: 2,
            n: 2,
            phi: one_seg(o, SegmentKind::Linear { a: w(1.0), b: w(-o) }),
            psi: one_seg(o, SegmentKind::Constant { v: w(0.05) }),
            rho: one_seg(o, SegmentKind::Constant { v: w(0.002) }),
            origin: w(o),
            smooth_apex: true,
        };
        let rep = verify_boundary_conditions(&spec);
        assert!(rep.all_pass, "{:?}", rep.checks);
        // phi' residual is exactly zero: the segment is r - origin
        let slope = rep.checks.iter().find(|c| c.name.contains("phi'")).unwrap();
        assert_eq!(slope.residual, 0.0);
    }

    #[test]
    fn cone_apex_fails_unit_slope() {
        let eps = 0.01;
        let spec = TripleWarpSpec {
            m: 2,
            n: 2,
            phi: one_seg(0.0, SegmentKind::Linear { a: w(1.0 - eps), b: Wide::ZERO }),
            psi: one_seg(0.0, SegmentKind::Constant { v: w(0.05) }),
            rho: one_seg(0.0, SegmentKind::Constant { v: w(0.002) }),
            origin: Wide::ZERO,
            smooth_apex: false,
        };
        let rep = verify_boundary_conditions(&spec);
        assert!(!rep.all_pass);
        let slope = rep.checks.iter().find(|c| c.name.contains("phi'")).unwrap();
        assert!((slope.residual + eps).abs() < 1e-15, "residual {}", slope.residual);
    }

    #[test]
    fn nonconstant_rho_fails_odd_derivative() {
        let spec = TripleWarpSpec {
            m: 2,
            n: 2,
            phi: one_seg(0.0, SegmentKind::Linear { a: w(1.0), b: Wide::ZERO }),
            psi: one_seg(0.0, SegmentKind::Constant { v: w(0.05) }),
            rho: one_seg(0.0, SegmentKind::Linear { a: w(0.1), b: w(0.002) }),
            origin: Wide::ZERO,
            smooth_apex: false,
        };
        let rep = verify_boundary_conditions(&spec);
        let rho_d1 = rep.checks.iter().find(|c| c.name.contains("rho'")).unwrap();
        assert!(!rho_d1.pass);
    }
}
