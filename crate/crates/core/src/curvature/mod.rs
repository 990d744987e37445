//! Ricci curvature of triple and N-fold warped products.
//!
//! The metric ansatz is `dr² + phi(r)² g_{S^m} + psi(r)² g_{S^n} + rho(r)² g_{S²}`
//! (triple case) or `dr² + Σ f_i(r)² g_i` over a list of closed fibers. The
//! closed forms here are evaluated generically over `f64`, [`Wide`] and the
//! interval type, so the exact same expressions back both pointwise queries
//! and certified bounds.

pub mod oracle;

use serde::{Deserialize, Serialize};
use std::ops::{Add, Div, Mul, Neg, Sub};
use thiserror::Error;

/// Scalar abstraction for the curvature formulas.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + From<f64>
{
}

impl<T> Scalar for T where
    T: Copy
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
        + Neg<Output = T>
        + From<f64>
{
}

#[derive(Debug, Error)]
pub enum CurvatureError {
    #[error("profile `{name}` is not positive at r = {r} (value {value})")]
    NonPositiveProfile { name: String, r: f64, value: f64 },
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("fiber dimensions must satisfy dim >= 1, got {0}")]
    BadFiberDim(u32),
    #[error("fiber list is empty")]
    NoFibers,
    #[error("linear profile pair has zero denominator at r = {0}")]
    ZeroDenominator(f64),
}

/// Ricci eigenvalues of a warped product at one radius: the radial direction
/// plus one value per fiber factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RicciEval {
    pub ric_radial: f64,
    pub ric_fiber: Vec<f64>,
}

impl RicciEval {
    pub fn components(&self) -> Vec<f64> {
        let mut v = vec![self.ric_radial];
        v.extend_from_slice(&self.ric_fiber);
        v
    }

    pub fn is_finite(&self) -> bool {
        self.ric_radial.is_finite() && self.ric_fiber.iter().all(|x| x.is_finite())
    }
}

/// A closed fiber entering an N-fold warped product, described only by its
/// dimension and a Ricci lower bound `Ric >= ricci_lower * g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberDescriptor {
    pub dim: u32,
    pub ricci_lower: f64,
}

impl FiberDescriptor {
    pub fn sphere(dim: u32) -> FiberDescriptor {
        FiberDescriptor { dim, ricci_lower: (dim - 1) as f64 }
    }
}

/// Slopes and intercepts for the linear-profile closed form:
/// `phi = a1 r + b1`, `psi = rho = a2 r + b2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearProfilePair {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

/// (value, first derivative, second derivative) of a profile at one radius.
pub type Jet<T> = [T; 3];

/// Triple warped product Ricci components from profile jets.
///
/// Returns `[ric00, ric11, ric22, ric33]` for the radial, S^m, S^n and S²
/// directions respectively.
pub fn ricci_triple_jets<T: Scalar>(m: u32, n: u32, phi: Jet<T>, psi: Jet<T>, rho: Jet<T>) -> [T; 4] {
    let mf: T = (m as f64).into();
    let nf: T = (n as f64).into();
    let two: T = 2.0.into();
    let one: T = 1.0.into();
    let m1: T = ((m - 1) as f64).into();
    let n1: T = ((n - 1) as f64).into();

    let [p, dp, ddp] = phi;
    let [q, dq, ddq] = psi;
    let [w, dw, ddw] = rho;

    let ric00 = -(mf * (ddp / p) + nf * (ddq / q) + two * (ddw / w));
    let ric11 = -(ddp / p) + m1 * ((one - dp * dp) / (p * p))
        - nf * ((dp * dq) / (p * q))
        - two * ((dp * dw) / (p * w));
    let ric22 = -(ddq / q) + n1 * ((one - dq * dq) / (q * q))
        - mf * ((dp * dq) / (p * q))
        - two * ((dq * dw) / (q * w));
    let ric33 = -(ddw / w) + (one - dw * dw) / (w * w)
        - mf * ((dp * dw) / (p * w))
        - nf * ((dq * dw) / (q * w));
    [ric00, ric11, ric22, ric33]
}

/// N-fold warped product Ricci with lower-bound semantics: the radial
/// component is exact, each fiber component substitutes the fiber's Ricci
/// lower bound for the actual fiber curvature.
pub fn ricci_multi_jets<T: Scalar>(fibers: &[FiberDescriptor], jets: &[Jet<T>]) -> Vec<T> {
    assert_eq!(fibers.len(), jets.len());
    let mut out = Vec::with_capacity(fibers.len() + 1);

    let mut radial: T = 0.0.into();
    for (f, jet) in fibers.iter().zip(jets) {
        let nf: T = (f.dim as f64).into();
        radial = radial + nf * (jet[2] / jet[0]);
    }
    out.push(-radial);

    for (i, (f, jet)) in fibers.iter().zip(jets).enumerate() {
        let ni1: T = ((f.dim - 1) as f64).into();
        let kappa: T = f.ricci_lower.into();
        let [v, d, dd] = *jet;
        let mut comp = -(dd / v) + (kappa - ni1 * (d * d)) / (v * v);
        for (l, (g, jl)) in fibers.iter().zip(jets).enumerate() {
            if l == i {
                continue;
            }
            let nl: T = (g.dim as f64).into();
            comp = comp - nl * ((d * jl[1]) / (v * jl[0]));
        }
        out.push(comp);
    }
    out
}

/// Linear-profile closed form: `phi = a1 r + b1`, `psi = rho = a2 r + b2`.
/// The radial component is identically zero; the others are the displayed
/// rational expressions.
pub fn ricci_linear_jets<T: Scalar>(m: u32, n: u32, p: &LinearProfilePair, r: T) -> [T; 4] {
    let a1: T = p.a1.into();
    let b1: T = p.b1.into();
    let a2: T = p.a2.into();
    let b2: T = p.b2.into();
    let mf: T = (m as f64).into();
    let m1: T = ((m - 1) as f64).into();
    let n1: T = ((n - 1) as f64).into();
    let np1: T = ((n + 1) as f64).into();
    let np2: T = ((n + 2) as f64).into();
    let mn1: T = ((m + n + 1) as f64).into();
    let one: T = 1.0.into();

    let u = a1 * r + b1;
    let v = a2 * r + b2;

    let ric11 = ((m1 - mn1 * (a1 * a1)) * (a2 * r) + m1 * b2
        - (m1 * (a1 * b2) + np2 * (a2 * b1)) * a1)
        / (u * u * v);
    let ric22 = ((n1 - mn1 * (a2 * a2)) * (a1 * r) + n1 * b1
        - (np1 * (a2 * b1) + mf * (a1 * b2)) * a2)
        / (u * v * v);
    let ric33 = ((one - mn1 * (a2 * a2)) * (a1 * r) + b1
        - (np1 * (a2 * b1) + mf * (a1 * b2)) * a2)
        / (u * v * v);
    [0.0.into(), ric11, ric22, ric33]
}

fn check_jet(name: &str, jet: Jet<f64>, r: f64) -> Result<(), CurvatureError> {
    if !(jet[0] > 0.0) {
        return Err(CurvatureError::NonPositiveProfile {
            name: name.to_string(),
            r,
            value: jet[0],
        });
    }
    Ok(())
}

/// Triple warped product Ricci at a point (f64 path with domain checks).
pub fn ricci_triple(
    m: u32,
    n: u32,
    phi: Jet<f64>,
    psi: Jet<f64>,
    rho: Jet<f64>,
    r: f64,
) -> Result<RicciEval, CurvatureError> {
    if !(r > 0.0) {
        return Err(CurvatureError::NonPositiveRadius(r));
    }
    if m < 1 || n < 1 {
        return Err(CurvatureError::BadFiberDim(m.min(n)));
    }
    check_jet("phi", phi, r)?;
    check_jet("psi", psi, r)?;
    check_jet("rho", rho, r)?;
    let [r0, r1, r2, r3] = ricci_triple_jets(m, n, phi, psi, rho);
    Ok(RicciEval { ric_radial: r0, ric_fiber: vec![r1, r2, r3] })
}

/// Lower bounds on the Ricci components of an N-fold warped product.
pub fn ricci_multi(
    fibers: &[FiberDescriptor],
    jets: &[Jet<f64>],
    r: f64,
) -> Result<RicciEval, CurvatureError> {
    if fibers.is_empty() {
        return Err(CurvatureError::NoFibers);
    }
    if !(r > 0.0) {
        return Err(CurvatureError::NonPositiveRadius(r));
    }
    for f in fibers {
        if f.dim < 1 {
            return Err(CurvatureError::BadFiberDim(f.dim));
        }
    }
    for (i, jet) in jets.iter().enumerate() {
        check_jet(&format!("f{i}"), *jet, r)?;
    }
    let vals = ricci_multi_jets(fibers, jets);
    Ok(RicciEval { ric_radial: vals[0], ric_fiber: vals[1..].to_vec() })
}

/// Closed-form Ricci for a linear profile pair.
pub fn ricci_linear(
    m: u32,
    n: u32,
    p: &LinearProfilePair,
    r: f64,
) -> Result<RicciEval, CurvatureError> {
    let u = p.a1 * r + p.b1;
    let v = p.a2 * r + p.b2;
    if u == 0.0 || v == 0.0 {
        return Err(CurvatureError::ZeroDenominator(r));
    }
    if u < 0.0 || v < 0.0 {
        return Err(CurvatureError::NonPositiveProfile {
            name: if u < 0.0 { "phi" } else { "psi" }.to_string(),
            r,
            value: u.min(v),
        });
    }
    let [r0, r1, r2, r3] = ricci_linear_jets(m, n, p, r);
    Ok(RicciEval { ric_radial: r0, ric_fiber: vec![r1, r2, r3] })
}

/// Triple spec expressed as the fiber list of the N-fold formula.
pub fn triple_as_fibers(m: u32, n: u32) -> Vec<FiberDescriptor> {
    vec![FiberDescriptor::sphere(m), FiberDescriptor::sphere(n), FiberDescriptor::sphere(2)]
}
