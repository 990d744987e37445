//! Named constants chosen by the builders, plus the construction log that
//! records every choice against the property it satisfies.

use crate::num::Wide;
use serde::{Deserialize, Serialize};

/// Budget knobs for the constant searches inside the builders.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SearchPolicy {
    /// bisection attempts per searched constant
    pub budget: u32,
    pub verify: crate::verify::VerifyPolicy,
}

impl Default for SearchPolicy {
    fn default() -> Self {
        SearchPolicy { budget: 64, verify: crate::verify::VerifyPolicy::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Model1Constants {
    pub m: u32,
    pub n: u32,
    pub epsilon: f64,
    pub k: f64,
    pub s: f64,
    pub delta: Wide,
    pub delta1: Wide,
    pub b1: Wide,
    pub b2: Wide,
    pub r1: Wide,
    pub r2: Wide,
    pub r3: Wide,
    pub r4: Wide,
    pub r_final: Wide,
    /// descent blend coefficient for the active profile
    pub c_log: Wide,
    /// descent landing multiple (the blend meets the cone at lambda_log * r3)
    pub lambda_log: f64,
    /// collapsed-profile climb exponent is 1 + kappa_climb
    pub kappa_climb: f64,
    pub a_climb: Wide,
    pub a_rho: Wide,
    pub lambda_cap: Wide,
    /// shared step-1 bridge window
    pub step1_window: (Wide, Wide),
    /// subwindow where the strict concavity premise of the active profile is
    /// certified
    pub step1_phi_strict: (Wide, Wide),
    pub step2_window: (Wide, Wide),
    pub step3_window: (Wide, Wide),
    pub step4_window: (Wide, Wide),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Model2Constants {
    pub m: u32,
    pub n: u32,
    pub epsilon: f64,
    pub k: f64,
    pub s: f64,
    pub lambda: Wide,
    pub a_pow: Wide,
    pub c_blend: Wide,
    pub r1: Wide,
    pub r2: Wide,
    /// radius where the slope blend meets the cone line
    pub r_x: Wide,
    /// end of the transition structure
    pub x3: Wide,
    pub delta_out: Wide,
    pub r_final: Wide,
    pub step1_window: (Wide, Wide),
    pub step2_window: (Wide, Wide),
    pub step3_window: (Wide, Wide),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BlockConstants {
    pub m: u32,
    pub n: u32,
    pub epsilon: f64,
    pub l: f64,
    pub k: f64,
    pub delta: Wide,
    pub lambda1: Wide,
    pub lambda2: Wide,
    pub r_final: Wide,
    pub rescale: Wide,
    pub model1: Model1Constants,
    pub model2: Model2Constants,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConnectorConstants {
    pub m: u32,
    pub n: u32,
    pub epsilon: f64,
    pub l: f64,
    pub k: f64,
    pub r_final: Wide,
    pub delta1: Wide,
    pub delta2: Wide,
    /// the L-independent constant bounding delta1 and delta2
    pub c_bound: Wide,
    pub lambda1: Wide,
    pub lambda2: Wide,
    pub lambda3: Wide,
    pub rescale: Wide,
    pub outer: BlockConstants,
    pub inner: BlockConstants,
}

/// Structured construction log: one line per chosen constant.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct BuildLog {
    pub lines: Vec<String>,
}

impl BuildLog {
    pub fn note(&mut self, constant: &str, value: impl std::fmt::Display, property: &str) {
        self.lines.push(format!("{constant} = {value}  # {property}"));
    }

    pub fn render(&self) -> String {
        self.lines.join("\n")
    }
}

/// Default cone slope: small enough for every curvature constraint both
/// model families impose; the collapsed-fiber cross terms dominate.
pub fn default_k(m: u32, n: u32) -> f64 {
    let d = m.min(n) as f64;
    let tail = 0.25 * ((d - 1.0) / (m + n + 1) as f64).sqrt();
    tail.min(0.05)
}

/// Power exponent for the S² profile of the first model family; bounded so
/// the step-2 sufficiency bracket stays positive.
pub fn default_s_model1(m: u32, n: u32, k: f64) -> f64 {
    let cap = (m.min(n) as f64 - 1.0) * 0.85 / (400.0 * (m.max(n) + 2) as f64 * k * k);
    (0.15f64).min(cap * 0.5)
}

/// The collapsing-fiber exponent of the second model family.
pub fn default_s_model2(m: u32, n: u32, epsilon: f64) -> f64 {
    epsilon / (1.0e6 * (m * n) as f64)
}
