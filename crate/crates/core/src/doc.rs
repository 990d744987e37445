//! Document formats: profile documents, telescope documents, certificates,
//! and CSV sample tables.
//!
//! Documents are JSON with unknown fields rejected. Extended-range reals are
//! stored as exact (mantissa, binary exponent) pairs, so build → save → load
//! round-trips bit-exactly and re-verification of a loaded document yields a
//! byte-identical certificate.

use crate::constructions::telescope::TelescopeStage;
use crate::constructions::{MultiWarpSpec, TripleWarpSpec};
use crate::curvature::ricci_multi_jets;
use crate::num::Wide;
use crate::verify::CurvatureCertificate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT: &str = "warpforge/1";
pub const RADIUS_ENCODING: &str = "mantissa-exp2";

#[derive(Debug, Error)]
pub enum DocError {
    #[error("document parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported format `{0}` (expected {FORMAT})")]
    Format(String),
    #[error("document failed validation: {0}")]
    Validation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum SpecPayload {
    Triple(TripleWarpSpec),
    Multi(MultiWarpSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub format: String,
    pub radius_encoding: String,
    pub spec: SpecPayload,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TelescopeDocument {
    pub format: String,
    pub radius_encoding: String,
    pub m: u32,
    pub n: u32,
    pub rho_exponent: f64,
    pub stages: Vec<TelescopeStage>,
}

impl SpecDocument {
    pub fn triple(spec: &TripleWarpSpec) -> SpecDocument {
        SpecDocument {
            format: FORMAT.to_string(),
            radius_encoding: RADIUS_ENCODING.to_string(),
            spec: SpecPayload::Triple(spec.clone()),
        }
    }

    pub fn multi(spec: &MultiWarpSpec) -> SpecDocument {
        SpecDocument {
            format: FORMAT.to_string(),
            radius_encoding: RADIUS_ENCODING.to_string(),
            spec: SpecPayload::Multi(spec.clone()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serialization")
    }

    pub fn from_json(s: &str) -> Result<SpecDocument, DocError> {
        let doc: SpecDocument = serde_json::from_str(s)?;
        if doc.format != FORMAT {
            return Err(DocError::Format(doc.format));
        }
        doc.validate()?;
        Ok(doc)
    }

    /// Positivity and contiguity of every stored profile.
    pub fn validate(&self) -> Result<(), DocError> {
        let profiles: Vec<&crate::profiles::PiecewiseProfile> = match &self.spec {
            SpecPayload::Triple(t) => t.profiles(),
            SpecPayload::Multi(m) => m.profiles(),
        };
        for p in profiles {
            p.validate().map_err(|e| DocError::Validation(e.to_string()))?;
        }
        Ok(())
    }
}

impl TelescopeDocument {
    pub fn new(m: u32, n: u32, rho_exponent: f64, stages: &[TelescopeStage]) -> TelescopeDocument {
        TelescopeDocument {
            format: FORMAT.to_string(),
            radius_encoding: RADIUS_ENCODING.to_string(),
            m,
            n,
            rho_exponent,
            stages: stages.to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serialization")
    }

    pub fn from_json(s: &str) -> Result<TelescopeDocument, DocError> {
        let doc: TelescopeDocument = serde_json::from_str(s)?;
        if doc.format != FORMAT {
            return Err(DocError::Format(doc.format));
        }
        Ok(doc)
    }
}

pub fn certificate_to_json(cert: &CurvatureCertificate) -> String {
    serde_json::to_string_pretty(cert).expect("certificate serialization")
}

pub fn certificate_from_json(s: &str) -> Result<CurvatureCertificate, DocError> {
    Ok(serde_json::from_str(s)?)
}

/// CSV sample table `r,phi,psi,rho,ric00,ric11,ric22,ric33` at the given
/// radii; values rendered as decimal (exact shortest form within f64 range,
/// mantissa/decimal-exponent form beyond it).
pub fn csv_samples(spec: &TripleWarpSpec, radii: &[Wide]) -> Result<String, DocError> {
    let mut out = String::from("r,phi,psi,rho,ric00,ric11,ric22,ric33\n");
    let fibers = spec.fibers();
    for &r in radii {
        let jets = [
            spec.phi.eval(r).map_err(|e| DocError::Validation(e.to_string()))?,
            spec.psi.eval(r).map_err(|e| DocError::Validation(e.to_string()))?,
            spec.rho.eval(r).map_err(|e| DocError::Validation(e.to_string()))?,
        ];
        let ric = ricci_multi_jets(&fibers, &jets);
        out.push_str(&format!(
            "{r},{},{},{},{},{},{},{}\n",
            jets[0][0], jets[1][0], jets[2][0], ric[0], ric[1], ric[2], ric[3]
        ));
    }
    Ok(out)
}

/// Log-uniform radii between lo and hi inclusive.
pub fn log_radii(lo: Wide, hi: Wide, count: usize) -> Vec<Wide> {
    let la = lo.log10_f64();
    let lb = hi.log10_f64();
    (0..count)
        .map(|i| {
            let t = if count <= 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
            Wide::from_f64(10.0).powf(la + (lb - la) * t)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::constants::SearchPolicy;
    use crate::profiles::{PiecewiseProfile, Segment, SegmentKind};

    #[test]
    fn spec_document_roundtrip_bit_exact() {
        let b = crate::constructions::model2::build_model_ii(
            2,
            2,
            0.01,
            Wide::from_f64(1.0),
            None,
            &SearchPolicy::default(),
        )
        .unwrap();
        let doc = SpecDocument::triple(&b.spec);
        let json = doc.to_json();
        let loaded = SpecDocument::from_json(&json).unwrap();
        let SpecPayload::Triple(spec2) = &loaded.spec else { panic!() };
        assert_eq!(&b.spec.phi, &spec2.phi);
        assert_eq!(&b.spec.psi, &spec2.psi);
        assert_eq!(&b.spec.rho, &spec2.rho);
        // serialization is reproducible byte-for-byte
        assert_eq!(json, SpecDocument::triple(spec2).to_json());
    }

    #[test]
    fn negative_profile_rejected_at_parse() {
        let spec = TripleWarpSpec {
            m: 2,
            n: 2,
            phi: PiecewiseProfile::whole_ray(SegmentKind::Linear {
                a: Wide::from_f64(1.0),
                b: Wide::ZERO,
            }),
            psi: PiecewiseProfile {
                segments: vec![Segment::new(
                    Wide::ZERO,
                    None,
                    SegmentKind::Constant { v: Wide::from_f64(-1.0) },
                )],
            },
            rho: PiecewiseProfile::whole_ray(SegmentKind::Constant { v: Wide::from_f64(1.0) }),
            origin: Wide::ZERO,
            smooth_apex: false,
        };
        let doc = SpecDocument {
            format: FORMAT.into(),
            radius_encoding: RADIUS_ENCODING.into(),
            spec: SpecPayload::Triple(spec),
        };
        let json = doc.to_json();
        let err = SpecDocument::from_json(&json);
        assert!(matches!(err, Err(DocError::Validation(_))));
    }

    #[test]
    fn unknown_fields_rejected() {
        let json = r#"{"format":"warpforge/1","radius_encoding":"mantissa-exp2","spec":{"Triple":{}},"extra":1}"#;
        assert!(SpecDocument::from_json(json).is_err());
    }

    #[test]
    fn csv_header_and_flat_row() {
        let spec = TripleWarpSpec {
            m: 2,
            n: 2,
            phi: PiecewiseProfile::whole_ray(SegmentKind::Linear {
                a: Wide::from_f64(1.0),
                b: Wide::ZERO,
            }),
            psi: PiecewiseProfile::whole_ray(SegmentKind::Constant { v: Wide::from_f64(1.0) }),
            rho: PiecewiseProfile::whole_ray(SegmentKind::Constant { v: Wide::from_f64(1.0) }),
            origin: Wide::ZERO,
            smooth_apex: false,
        };
        let csv = csv_samples(&spec, &[Wide::from_f64(1.0)]).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "r,phi,psi,rho,ric00,ric11,ric22,ric33");
        let row = lines.next().unwrap();
        assert_eq!(row, "1e0,1e0,1e0,1e0,0,0,1e0,1e0");
    }
}
