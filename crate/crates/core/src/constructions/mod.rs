//! Warped-product metric specifications and the builders that produce them.

pub mod block;
pub mod connector;
pub mod constants;
pub mod model1;
pub mod model2;
pub mod multi;
pub mod origin;
pub mod telescope;

pub use constants::*;

/// Upper bound of a bounded warp profile (used by the telescope builders).
pub fn telescope_profile_sup(p: &crate::profiles::PiecewiseProfile) -> Wide {
    telescope::profile_sup_impl(p)
}

use crate::curvature::FiberDescriptor;
use crate::num::Wide;
use crate::profiles::PiecewiseProfile;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("profile construction failed: {0}")]
    Profile(#[from] crate::profiles::ProfileError),
    #[error("certification failed in {stage}: component {component} bound {bound:e} on [{lo}, {hi}]")]
    Certification { stage: String, component: usize, bound: f64, lo: Wide, hi: Wide },
    #[error("constant search exhausted ({0})")]
    SearchExhausted(String),
    #[error("spec does not match the expected pattern: {0}")]
    Pattern(String),
    #[error("stage {index} failed: {source}")]
    Stage {
        index: usize,
        #[source]
        source: Box<BuildError>,
    },
}

/// A metric `dr² + phi² g_{S^m} + psi² g_{S^n} + rho² g_{S²}` given by the
/// fiber dimensions and the three warp profiles.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleWarpSpec {
    pub m: u32,
    pub n: u32,
    pub phi: PiecewiseProfile,
    pub psi: PiecewiseProfile,
    pub rho: PiecewiseProfile,
    /// left end of the ray; 0 for a singular apex, positive after origin
    /// smoothing
    pub origin: Wide,
    /// set when the spec claims the smooth-apex boundary conditions at
    /// `origin` (phi vanishing with unit slope, psi/rho positive and even)
    pub smooth_apex: bool,
}

impl TripleWarpSpec {
    pub fn fibers(&self) -> Vec<FiberDescriptor> {
        crate::curvature::triple_as_fibers(self.m, self.n)
    }

    pub fn profiles(&self) -> Vec<&PiecewiseProfile> {
        vec![&self.phi, &self.psi, &self.rho]
    }

    /// The same metric with the two sphere factors exchanged.
    pub fn swapped(&self) -> TripleWarpSpec {
        TripleWarpSpec {
            m: self.n,
            n: self.m,
            phi: self.psi.clone(),
            psi: self.phi.clone(),
            rho: self.rho.clone(),
            origin: self.origin,
            smooth_apex: self.smooth_apex,
        }
    }

    pub fn as_multi(&self) -> MultiWarpSpec {
        MultiWarpSpec {
            fibers: self.fibers(),
            profiles: vec![self.phi.clone(), self.psi.clone(), self.rho.clone()],
            origin: self.origin,
            smooth_apex: self.smooth_apex,
            apex_fiber: 0,
        }
    }
}

/// N-fold generalization: one profile per fiber.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiWarpSpec {
    pub fibers: Vec<FiberDescriptor>,
    pub profiles: Vec<PiecewiseProfile>,
    pub origin: Wide,
    pub smooth_apex: bool,
    /// which fiber's profile closes at the apex when `smooth_apex` is set
    pub apex_fiber: usize,
}

impl MultiWarpSpec {
    pub fn profiles(&self) -> Vec<&PiecewiseProfile> {
        self.profiles.iter().collect()
    }
}
