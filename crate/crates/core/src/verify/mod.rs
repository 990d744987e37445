//! Certified verification: Ricci nonnegativity certificates, boundary
//! condition reports, window scans and step audits.

pub mod audit;
pub mod boundary;
pub mod grid;
pub mod tail;
pub mod window;

use crate::curvature::FiberDescriptor;
use crate::num::{Wide, SLACK_ULPS};
use crate::profiles::PiecewiseProfile;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("profile error: {0}")]
    Profile(#[from] crate::profiles::ProfileError),
    #[error("unbounded {side} requires exact closed-form segments; found {found}")]
    UnsupportedSymbolic { side: &'static str, found: String },
    #[error("verification interval is empty or outside the profile domain")]
    BadInterval,
    #[error("{0}")]
    Other(String),
}

/// Grid and refinement parameters. The initial grid is log-uniform per
/// decade, capped per segment gap so constructions spanning 10^10 decades
/// stay tractable; adaptive bisection then refines failing subintervals.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VerifyPolicy {
    pub per_decade: usize,
    pub decade_cap: usize,
    pub max_depth: u32,
}

impl Default for VerifyPolicy {
    fn default() -> Self {
        VerifyPolicy { per_decade: 1, decade_cap: 64, max_depth: 60 }
    }
}

/// One certified subinterval: each Ricci component is bounded below by the
/// stated value everywhere inside it.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SubCert {
    pub r_lo: Wide,
    pub r_hi: Wide,
    pub lower: Vec<Wide>,
    pub depth: u32,
}

/// A region certified by closed-form sign analysis instead of interval
/// evaluation. Used for the open end at the apex and for unbounded tails.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SymbolicRegion {
    pub r_lo: Wide,
    pub r_hi: Option<Wide>,
    pub lower: Vec<Wide>,
    pub kind: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub enum CertStatus {
    Pass,
    Fail { r_lo: Wide, r_hi: Wide, component: usize },
}

/// Grid-plus-enclosure proof object: all Ricci components of the spec are
/// bounded below, subinterval by subinterval, with `margin` the global
/// minimum of the bounds.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CurvatureCertificate {
    pub interval_lo: Wide,
    pub interval_hi: Option<Wide>,
    pub head: Option<SymbolicRegion>,
    pub tail: Option<SymbolicRegion>,
    pub subintervals: Vec<SubCert>,
    pub margin: Wide,
    pub status: CertStatus,
    pub refinement_depth: u32,
    pub slack_ulps: u32,
    pub policy: VerifyPolicy,
}

impl CurvatureCertificate {
    pub fn passed(&self) -> bool {
        matches!(self.status, CertStatus::Pass)
    }

    /// The certified lower bound applying at radius r, if r lies in a
    /// certified subinterval or symbolic region.
    pub fn lower_bound_at(&self, r: Wide) -> Option<&[Wide]> {
        if let Some(h) = &self.head {
            if r >= h.r_lo && h.r_hi.map_or(true, |x| r <= x) {
                return Some(&h.lower);
            }
        }
        if let Some(t) = &self.tail {
            if r >= t.r_lo && t.r_hi.map_or(true, |x| r <= x) {
                return Some(&t.lower);
            }
        }
        let idx = self.subintervals.partition_point(|s| s.r_lo <= r);
        if idx > 0 {
            let s = &self.subintervals[idx - 1];
            if r >= s.r_lo && r <= s.r_hi {
                return Some(&s.lower);
            }
        }
        None
    }
}

/// Verification interval: `hi = None` asks for the whole unbounded ray, where
/// tails are certified symbolically.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VerifyInterval {
    pub lo: Wide,
    pub hi: Option<Wide>,
}

impl VerifyInterval {
    pub fn whole_ray() -> VerifyInterval {
        VerifyInterval { lo: Wide::ZERO, hi: None }
    }

    pub fn bounded(lo: f64, hi: f64) -> VerifyInterval {
        VerifyInterval { lo: Wide::from_f64(lo), hi: Some(Wide::from_f64(hi)) }
    }
}

/// Certifies `Ric >= 0` for a fiber/profile family over `interval`.
pub fn verify_nonneg_ricci_fibers(
    fibers: &[FiberDescriptor],
    profiles: &[&PiecewiseProfile],
    interval: VerifyInterval,
    policy: &VerifyPolicy,
) -> Result<CurvatureCertificate, VerifyError> {
    grid::certify(fibers, profiles, interval, policy)
}

/// Triple-spec entry point.
pub fn verify_nonneg_ricci(
    spec: &crate::constructions::TripleWarpSpec,
    interval: VerifyInterval,
    policy: &VerifyPolicy,
) -> Result<CurvatureCertificate, VerifyError> {
    let fibers = spec.fibers();
    let profiles = spec.profiles();
    grid::certify(&fibers, &profiles, interval, policy)
}

/// Multi-spec entry point.
pub fn verify_nonneg_ricci_multi(
    spec: &crate::constructions::MultiWarpSpec,
    interval: VerifyInterval,
    policy: &VerifyPolicy,
) -> Result<CurvatureCertificate, VerifyError> {
    let profiles = spec.profiles();
    grid::certify(&spec.fibers, &profiles, interval, policy)
}

/// Pointwise Ricci components (radial first) in extended-range arithmetic.
pub fn ricci_point_wide(
    fibers: &[FiberDescriptor],
    profiles: &[&PiecewiseProfile],
    r: Wide,
) -> Result<Vec<Wide>, VerifyError> {
    let mut jets = Vec::with_capacity(profiles.len());
    for p in profiles {
        jets.push(p.eval(r)?);
    }
    Ok(crate::curvature::ricci_multi_jets(fibers, &jets))
}

pub const CERT_SLACK_ULPS: u32 = SLACK_ULPS;
