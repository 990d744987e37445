//! Per-step sufficiency audits.
//!
//! The builders choose constants so the global curvature certificate passes;
//! the audit additionally confirms the displayed per-step estimates that
//! motivated those choices: in each step's window, the bracketed closed-form
//! lower bound must sit below the certified interval lower bound, and the
//! regions claimed exact must evaluate exactly.

use super::{VerifyInterval, VerifyPolicy};
use crate::constructions::{Model1Constants, Model2Constants, TripleWarpSpec};
use crate::num::Wide;
use crate::profiles::enclosure::enclose;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("unknown step identifier `{0}`")]
    UnknownStep(String),
    #[error("audit window evaluation failed: {0}")]
    Window(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditCheck {
    pub id: String,
    pub window: (Wide, Wide),
    /// the displayed bound (closed form evaluated from the constants)
    pub bound: Wide,
    /// certified interval lower bound over the window
    pub certified: Wide,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub step: String,
    pub checks: Vec<AuditCheck>,
    pub all_pass: bool,
}

fn wf(x: f64) -> Wide {
    Wide::from_f64(x)
}

/// Certified lower bound of one Ricci component over a window.
fn certified_lower(
    spec: &TripleWarpSpec,
    lo: Wide,
    hi: Wide,
    component: usize,
    target: Wide,
) -> Result<Wide, AuditError> {
    let policy = VerifyPolicy { per_decade: 4, ..Default::default() };
    let fibers = spec.fibers();
    let profiles = spec.profiles();
    let mut targets = vec![Wide::from_f64(f64::MIN); fibers.len() + 1];
    targets[component] = target;
    let cert = crate::verify::grid::certify_with_targets(
        &fibers,
        &profiles,
        VerifyInterval { lo, hi: Some(hi) },
        &policy,
        Some(&targets),
    )
    .map_err(|e| AuditError::Window(e.to_string()))?;
    let mut out: Option<Wide> = None;
    for sub in &cert.subintervals {
        let v = sub.lower[component];
        out = Some(match out {
            None => v,
            Some(m) => m.min(v),
        });
    }
    if let Some(h) = &cert.head {
        let v = h.lower[component];
        out = Some(match out {
            None => v,
            Some(m) => m.min(v),
        });
    }
    out.ok_or_else(|| AuditError::Window("empty certificate".into()))
}

fn check(
    spec: &TripleWarpSpec,
    id: &str,
    lo: Wide,
    hi: Wide,
    component: usize,
    bound: Wide,
) -> Result<AuditCheck, AuditError> {
    let certified = certified_lower(spec, lo, hi, component, bound)?;
    Ok(AuditCheck {
        id: id.to_string(),
        window: (lo, hi),
        bound,
        certified,
        pass: bound <= certified,
    })
}

/// Pointwise exactness check: the component equals `value` at probe radii in
/// the window, to 1e-12 relative.
fn check_exact(
    spec: &TripleWarpSpec,
    id: &str,
    lo: Wide,
    hi: Wide,
    component: usize,
    value: Wide,
) -> Result<AuditCheck, AuditError> {
    let fibers = spec.fibers();
    let profiles = spec.profiles();
    let mut worst = 0.0f64;
    for frac in [0.1, 0.5, 0.9] {
        let r = lo + (hi - lo) * wf(frac);
        let vals = super::ricci_point_wide(&fibers, &profiles, r)
            .map_err(|e| AuditError::Window(e.to_string()))?;
        let got = vals[component];
        let rel = if value.is_zero() {
            got.abs().to_f64()
        } else {
            got.rel_diff(value)
        };
        worst = worst.max(rel);
    }
    Ok(AuditCheck {
        id: id.to_string(),
        window: (lo, hi),
        bound: value,
        certified: value,
        pass: worst <= 1e-12,
    })
}

fn model1_step1(spec: &TripleWarpSpec, c: &Model1Constants) -> Result<Vec<AuditCheck>, AuditError> {
    let m = c.m as f64;
    let n = c.n as f64;
    let eps = c.epsilon;
    let k = c.k;
    let r1 = c.r1;
    let d = c.delta;
    let d1 = c.delta1;
    let mut checks = Vec::new();

    // exact region below the smoothing window
    let inner_lo = wf(0.02);
    let inner_hi = c.step1_window.0 * wf(0.5);
    let n1 = wf(n - 1.0);
    checks.push(check_exact(spec, "step1 inner ric22 = (n-1)/delta^2", inner_lo, inner_hi, 2, n1 / (d * d))?);
    checks.push(check_exact(spec, "step1 inner ric33 = 1/delta^2", inner_lo, inner_hi, 3, (d * d).recip())?);
    checks.push(check_exact(spec, "step1 inner ric00 = 0", inner_lo, inner_hi, 0, Wide::ZERO)?);

    // bracketed bounds on the smoothing window; the radial and S^m brackets
    // need the strict concavity premise, certified on the recorded subwindow
    let denom9k = 1.0 - eps + 9.0 * k;
    let b00 = (wf(m * (1.0 - eps - k) / (100.0 * denom9k)) / r1
        - wf(n + 2.0) * d1 / d)
        / r1;
    let (s_lo, s_hi) = c.step1_phi_strict;
    checks.push(check(spec, "step1 ric00 bracket", s_lo, s_hi, 0, b00)?);

    let b11 = (wf((1.0 - eps - k) / (100.0 * denom9k)) / r1
        + wf((m - 1.0) * eps * (2.0 - eps) / (denom9k * denom9k)) / r1
        - wf(20.0 * (n + 2.0) / (1.0 - eps)) * d1 / d)
        / r1;
    checks.push(check(spec, "step1 ric11 bracket", s_lo, s_hi, 1, b11)?);

    let (w_lo, w_hi) = c.step1_window;
    let psi_max = d + d1 * r1 * wf(9.0);
    let b22 = wf(n - 1.0) * (Wide::ONE - d1 * d1) / (psi_max * psi_max)
        - (d1 / (r1 * d)) * (wf(20.0 * m + 1.0) + wf(2.0) * r1 * d1 / d);
    checks.push(check(spec, "step1 ric22 bracket", w_lo, w_hi, 2, b22)?);

    let b33 = (Wide::ONE - d1 * d1) / (psi_max * psi_max)
        - (d1 / (r1 * d)) * (wf(20.0 * m + 1.0) + wf(n) * r1 * d1 / d);
    checks.push(check(spec, "step1 ric33 bracket", w_lo, w_hi, 3, b33)?);
    Ok(checks)
}

fn model1_step2(spec: &TripleWarpSpec, c: &Model1Constants) -> Result<Vec<AuditCheck>, AuditError> {
    let m = c.m as f64;
    let n = c.n as f64;
    let k = c.k;
    let (w_lo, w_hi) = c.step2_window;
    let d = c.delta;
    let d1 = c.delta1;
    let r2 = c.r2;
    let mut checks = Vec::new();

    // radial: -2 rho''/rho with a concave bridge
    checks.push(check(spec, "step2 ric00 >= 0", w_lo, w_hi, 0, Wide::ZERO)?);

    // S^m bracket with the profile bound phi <= 10 k R2 + R1-ish taken from
    // the actual enclosure
    let phi_enc = enclose(&spec.phi, w_lo, w_hi).map_err(|e| AuditError::Window(e.to_string()))?;
    let phi_max = phi_enc.value.hi;
    let bracket11 = wf((m - 1.0) / 2.0) - wf(k * (n + 2.0)) * (wf(10.0 * k) * r2 + c.r1) * d1 / d;
    checks.push(check(spec, "step2 ric11 bracket", w_lo, w_hi, 1, bracket11 / (phi_max * phi_max))?);

    let psi_enc = enclose(&spec.psi, w_lo, w_hi).map_err(|e| AuditError::Window(e.to_string()))?;
    let psi_max = psi_enc.value.hi;
    let bracket22 = wf((n - 1.0) / 2.0)
        - (wf(m * k) + wf(2.0) * d1 / d) * d1 * (wf(10.0) * d1 * r2 + d);
    checks.push(check(spec, "step2 ric22 bracket", w_lo, w_hi, 2, bracket22 / (psi_max * psi_max))?);

    let rho_enc = enclose(&spec.rho, w_lo, w_hi).map_err(|e| AuditError::Window(e.to_string()))?;
    let rho_max = rho_enc.value.hi;
    let bracket33 = wf(0.5) - wf(20.0) * (wf(m * k) * d1 * d + wf(n) * d1 * d1);
    checks.push(check(spec, "step2 ric33 bracket", w_lo, w_hi, 3, bracket33 / (rho_max * rho_max))?);
    Ok(checks)
}

fn model1_step3(spec: &TripleWarpSpec, c: &Model1Constants) -> Result<Vec<AuditCheck>, AuditError> {
    let m = c.m as f64;
    let n = c.n as f64;
    let k = c.k;
    let (w_lo, w_hi) = c.step3_window;
    let mut checks = Vec::new();

    // r-dependent brackets, evaluated conservatively over the window
    let phi_enc = enclose(&spec.phi, w_lo, w_hi).map_err(|e| AuditError::Window(e.to_string()))?;
    let phi_max = phi_enc.value.hi;
    let br11 = (wf((m - 1.0) / 2.0) * w_lo - wf(100.0 * n * k) * (wf(k) * w_hi + c.b1))
        / (w_hi * phi_max * phi_max);
    checks.push(check(spec, "step3 ric11 bracket", w_lo, w_hi, 1, br11)?);

    let psi_enc = enclose(&spec.psi, w_lo, w_hi).map_err(|e| AuditError::Window(e.to_string()))?;
    let psi_max = psi_enc.value.hi;
    let br22 = (wf((n - 1.0) / 2.0) - wf(100.0 * m * k * k)) * w_lo / (w_hi * psi_max * psi_max);
    checks.push(check(spec, "step3 ric22 bracket", w_lo, w_hi, 2, br22)?);

    // conical tail coefficients: (m-1)(1-k²)/k² > n + 2s and symmetrically
    let tail_ok_11 = (m - 1.0) * (1.0 - k * k) / (k * k) > n + 2.0 * c.s;
    let tail_ok_22 = (n - 1.0) * (1.0 - k * k) / (k * k) > m + 2.0 * c.s;
    checks.push(AuditCheck {
        id: "step3 tail coefficients positive".into(),
        window: (c.r4, c.r_final),
        bound: Wide::ZERO,
        certified: if tail_ok_11 && tail_ok_22 { Wide::ONE } else { -Wide::ONE },
        pass: tail_ok_11 && tail_ok_22,
    });
    Ok(checks)
}

fn model1_step4(spec: &TripleWarpSpec, c: &Model1Constants) -> Result<Vec<AuditCheck>, AuditError> {
    let (w_lo, w_hi) = c.step4_window;
    let mut checks = Vec::new();
    for (comp, name) in [(0usize, "ric00"), (1, "ric11"), (2, "ric22"), (3, "ric33")] {
        checks.push(check(spec, &format!("step4 {name} >= 0"), w_lo, w_hi, comp, Wide::ZERO)?);
    }
    Ok(checks)
}

fn model2_step(
    spec: &TripleWarpSpec,
    c: &Model2Constants,
    step: usize,
) -> Result<Vec<AuditCheck>, AuditError> {
    let (w_lo, w_hi) = match step {
        1 => c.step1_window,
        2 => c.step2_window,
        _ => c.step3_window,
    };
    let mut checks = Vec::new();
    for (comp, name) in [(0usize, "ric00"), (1, "ric11"), (2, "ric22")] {
        checks.push(check(spec, &format!("step{step} {name} >= 0"), w_lo, w_hi, comp, Wide::ZERO)?);
    }
    // the S² component is exactly 1/lambda² everywhere
    checks.push(check_exact(
        spec,
        &format!("step{step} ric33 = 1/lambda^2"),
        w_lo,
        w_hi,
        3,
        (c.lambda * c.lambda).recip(),
    )?);
    Ok(checks)
}

/// Audits the displayed sufficient inequalities of the named construction
/// step against the certified bounds of the built spec.
pub fn step_inequality_audit_model1(
    spec: &TripleWarpSpec,
    constants: &Model1Constants,
    step: &str,
) -> Result<AuditReport, AuditError> {
    let checks = match step {
        "step1" => model1_step1(spec, constants)?,
        "step2" => model1_step2(spec, constants)?,
        "step3" => model1_step3(spec, constants)?,
        "step4" => model1_step4(spec, constants)?,
        other => return Err(AuditError::UnknownStep(other.to_string())),
    };
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(AuditReport { step: format!("model1/{step}"), checks, all_pass })
}

pub fn step_inequality_audit_model2(
    spec: &TripleWarpSpec,
    constants: &Model2Constants,
    step: &str,
) -> Result<AuditReport, AuditError> {
    let idx = match step {
        "step1" => 1,
        "step2" => 2,
        "step3" => 3,
        other => return Err(AuditError::UnknownStep(other.to_string())),
    };
    let checks = model2_step(spec, constants, idx)?;
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(AuditReport { step: format!("model2/{step}"), checks, all_pass })
}
