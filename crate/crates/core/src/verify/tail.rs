//! Closed-form sign analysis for unbounded tails and the open apex end.
//!
//! Supported families:
//!  - all profiles pure powers `a·r^p` (constants are p = 0, cone pieces
//!    p = 1 with zero intercept): every Ricci component collapses to
//!    `α/r² + κ/a² · r^{-2p}`, whose sign over `[r0, ∞)` or `(0, h]` is
//!    decided by the two coefficients and the endpoint value;
//!  - the smoothed-apex head (one profile vanishing linearly, the rest
//!    constant);
//!  - the triple linear-pair tail (phi and the two collapsed profiles linear
//!    with matching parameters), via the rational closed form.

use super::{SymbolicRegion, VerifyError};
use crate::curvature::{ricci_linear_jets, FiberDescriptor, LinearProfilePair};
use crate::num::Wide;
use crate::profiles::{PiecewiseProfile, Segment, SegmentKind};

/// A segment recognized as a pure power `a·r^p`.
fn as_pure_power(seg: &Segment) -> Option<(Wide, f64)> {
    match &seg.kind {
        SegmentKind::Constant { v } => Some((*v, 0.0)),
        SegmentKind::Power { a, s } => Some((*a, *s)),
        SegmentKind::Linear { a, b } => b.is_zero().then_some((*a, 1.0)),
        _ => None,
    }
}

struct PowerFamily {
    dims: Vec<f64>,
    kappas: Vec<Wide>,
    coefs: Vec<Wide>,
    expos: Vec<f64>,
}

fn classify(
    fibers: &[FiberDescriptor],
    segs: &[&Segment],
) -> Option<PowerFamily> {
    let mut coefs = Vec::new();
    let mut expos = Vec::new();
    for seg in segs {
        let (a, p) = as_pure_power(seg)?;
        coefs.push(a);
        expos.push(p);
    }
    Some(PowerFamily {
        dims: fibers.iter().map(|f| f.dim as f64).collect(),
        kappas: fibers.iter().map(|f| Wide::from_f64(f.ricci_lower)).collect(),
        coefs,
        expos,
    })
}

/// α and β for component `i` (None for the radial component, which has only
/// α): comp(r) = α/r² + β·r^{-2p_i}.
fn alpha_beta(fam: &PowerFamily, comp: Option<usize>) -> (Wide, Wide, f64) {
    match comp {
        None => {
            let mut alpha = Wide::ZERO;
            for (k, &p) in fam.expos.iter().enumerate() {
                alpha = alpha - Wide::from_f64(fam.dims[k] * p * (p - 1.0));
            }
            (alpha, Wide::ZERO, 0.0)
        }
        Some(i) => {
            let p = fam.expos[i];
            let mut a = -(p * (p - 1.0)) - (fam.dims[i] - 1.0) * p * p;
            for (l, &pl) in fam.expos.iter().enumerate() {
                if l != i {
                    a -= fam.dims[l] * p * pl;
                }
            }
            let beta = fam.kappas[i] / (fam.coefs[i] * fam.coefs[i]);
            (Wide::from_f64(a), beta, p)
        }
    }
}

/// comp(r) = α/r² + β·r^{-2p}; decide nonnegativity on [r0, ∞).
fn tail_component_bound(alpha: Wide, beta: Wide, p: f64, r0: Wide) -> Wide {
    let g0 = alpha + beta * r0.powf(2.0 - 2.0 * p);
    let nonneg = if beta.is_zero() {
        !alpha.is_sign_negative()
    } else if p < 1.0 {
        // g increasing: min at r0
        !g0.is_sign_negative()
    } else if p == 1.0 {
        !(alpha + beta).is_sign_negative()
    } else {
        // g decreasing to alpha
        !alpha.is_sign_negative()
    };
    if nonneg {
        Wide::ZERO
    } else {
        // sound negative bound: α/r0² + min(β,0)·r0^{-2p}
        let mut b = alpha.min(Wide::ZERO) / (r0 * r0);
        if beta.is_sign_negative() {
            b = b + beta * r0.powf(-2.0 * p);
        }
        b
    }
}

/// comp(r) = α/r² + β·r^{-2p}; decide nonnegativity on (0, h].
fn head_component_bound(alpha: Wide, beta: Wide, p: f64, h: Wide) -> Wide {
    let gh = alpha + beta * h.powf(2.0 - 2.0 * p);
    let nonneg = if beta.is_zero() {
        !alpha.is_sign_negative()
    } else if p < 1.0 {
        // g decreasing toward the apex with limit alpha
        !alpha.is_sign_negative()
    } else if p == 1.0 {
        !(alpha + beta).is_sign_negative()
    } else {
        // g increasing toward the apex: min at h
        !gh.is_sign_negative()
    };
    if nonneg {
        Wide::ZERO
    } else {
        // representative failing bound at the anchor
        (gh / (h * h)).min(Wide::from_f64(-1e-300))
    }
}

/// Last-segment family of every profile, certified on `[r0, ∞)`.
pub fn tail_region(
    fibers: &[FiberDescriptor],
    profiles: &[&PiecewiseProfile],
    r0: Wide,
) -> Result<SymbolicRegion, VerifyError> {
    let segs: Vec<&Segment> = profiles.iter().map(|p| p.segments.last().unwrap()).collect();
    if let Some(fam) = classify(fibers, &segs) {
        let mut lower = vec![tail_component_bound(
            alpha_beta(&fam, None).0,
            Wide::ZERO,
            0.0,
            r0,
        )];
        for i in 0..fibers.len() {
            let (a, b, p) = alpha_beta(&fam, Some(i));
            lower.push(tail_component_bound(a, b, p, r0));
        }
        return Ok(SymbolicRegion { r_lo: r0, r_hi: None, lower, kind: "power-tail".into() });
    }
    if let Some(region) = linear_pair_region(fibers, &segs, r0, None) {
        return Ok(region);
    }
    Err(VerifyError::UnsupportedSymbolic {
        side: "tail",
        found: format!("{:?}", segs.iter().map(|s| &s.kind).collect::<Vec<_>>()),
    })
}

/// First-segment family of every profile, certified on `(start, h]`.
pub fn head_region(
    fibers: &[FiberDescriptor],
    profiles: &[&PiecewiseProfile],
    start: Wide,
    h: Wide,
) -> Result<SymbolicRegion, VerifyError> {
    let segs: Vec<&Segment> = profiles.iter().map(|p| &p.segments[0]).collect();
    if start.is_zero() {
        if let Some(fam) = classify(fibers, &segs) {
            let mut lower =
                vec![head_component_bound(alpha_beta(&fam, None).0, Wide::ZERO, 0.0, h)];
            for i in 0..fibers.len() {
                let (a, b, p) = alpha_beta(&fam, Some(i));
                lower.push(head_component_bound(a, b, p, h));
            }
            return Ok(SymbolicRegion {
                r_lo: start,
                r_hi: Some(h),
                lower,
                kind: "power-head".into(),
            });
        }
        if let Some(region) = linear_pair_region(fibers, &segs, start, Some(h)) {
            return Ok(region);
        }
    } else if let Some(region) = smoothed_apex_region(fibers, &segs, start, h) {
        return Ok(region);
    }
    Err(VerifyError::UnsupportedSymbolic {
        side: "head",
        found: format!("{:?}", segs.iter().map(|s| &s.kind).collect::<Vec<_>>()),
    })
}

/// Offset apex: one profile `a·(r - origin)`, the rest constant. All cross
/// terms vanish; the closing fiber's component is `(κ - (n-1)a²)/f²`.
fn smoothed_apex_region(
    fibers: &[FiberDescriptor],
    segs: &[&Segment],
    origin: Wide,
    h: Wide,
) -> Option<SymbolicRegion> {
    let mut closing: Option<(usize, Wide)> = None;
    let mut consts: Vec<Option<Wide>> = Vec::new();
    for (i, seg) in segs.iter().enumerate() {
        match &seg.kind {
            SegmentKind::Constant { v } => consts.push(Some(*v)),
            SegmentKind::Linear { a, b } => {
                let at_origin = *a * origin + *b;
                if at_origin.abs().rel_diff(*a * origin) < 1e-12 || at_origin.is_zero() {
                    if closing.is_some() {
                        return None;
                    }
                    closing = Some((i, *a));
                    consts.push(None);
                } else {
                    return None;
                }
            }
            _ => return None,
        }
    }
    let (apex_idx, slope) = closing?;
    let mut lower = vec![Wide::ZERO]; // radial: all second derivatives vanish
    for (i, f) in fibers.iter().enumerate() {
        if i == apex_idx {
            let num = Wide::from_f64(f.ricci_lower)
                - Wide::from_f64((f.dim - 1) as f64) * slope * slope;
            if num.is_sign_negative() {
                // diverges near the apex; report at the anchor
                let fh = slope * (h - origin);
                lower.push(num / (fh * fh));
            } else {
                lower.push(Wide::ZERO);
            }
        } else {
            let v = consts[i].expect("non-apex profiles are constant here");
            lower.push(Wide::from_f64(f.ricci_lower) / (v * v));
        }
    }
    Some(SymbolicRegion {
        r_lo: origin,
        r_hi: Some(h),
        lower,
        kind: "smoothed-apex".into(),
    })
}

/// Triple linear-pair family `(a1 r + b1, a2 r + b2, a2 r + b2)`: numerators
/// of the closed form are linear in r, so the sign on a half-line is decided
/// by the endpoint and the slope coefficient.
fn linear_pair_region(
    fibers: &[FiberDescriptor],
    segs: &[&Segment],
    r0: Wide,
    head_hi: Option<Wide>,
) -> Option<SymbolicRegion> {
    if fibers.len() != 3 || fibers[2].dim != 2 {
        return None;
    }
    let all_sphere = fibers
        .iter()
        .all(|f| (f.ricci_lower - (f.dim - 1) as f64).abs() < 1e-15);
    if !all_sphere {
        return None;
    }
    let lin = |s: &Segment| match &s.kind {
        SegmentKind::Linear { a, b } => Some((*a, *b)),
        SegmentKind::Constant { v } => Some((Wide::ZERO, *v)),
        _ => None,
    };
    let (a1, b1) = lin(segs[0])?;
    let (a2, b2) = lin(segs[1])?;
    let (a2b, b2b) = lin(segs[2])?;
    if a2.rel_diff(a2b) > 1e-12 && !(a2.is_zero() && a2b.is_zero()) {
        return None;
    }
    if b2.rel_diff(b2b) > 1e-12 {
        return None;
    }
    let pair = LinearProfilePair {
        a1: a1.to_f64(),
        b1: b1.to_f64(),
        a2: a2.to_f64(),
        b2: b2.to_f64(),
    };
    // component numerators are linear in r: evaluate the closed form at both
    // bracket ends; on a half-line the slope coefficient decides the far end
    let eval = |r: Wide| -> Vec<Wide> {
        ricci_linear_jets::<Wide>(fibers[0].dim, fibers[1].dim, &pair, r).to_vec()
    };
    let near = eval(r0);
    let far_probe = match head_hi {
        Some(h) => eval(h),
        None => eval(r0 * Wide::from_f64(1e12)),
    };
    // numerator slope coefficients per component
    let m = fibers[0].dim as f64;
    let n = fibers[1].dim as f64;
    let mn1 = m + n + 1.0;
    let slope1 = ((m - 1.0) - mn1 * (a1 * a1).to_f64()) * a2.to_f64();
    let slope2 = ((n - 1.0) - mn1 * (a2 * a2).to_f64()) * a1.to_f64();
    let slope3 = (1.0 - mn1 * (a2 * a2).to_f64()) * a1.to_f64();
    let slopes = [0.0, slope1, slope2, slope3];
    let mut lower = Vec::with_capacity(4);
    for c in 0..4 {
        let near_ok = !near[c].is_sign_negative();
        let far_ok = if head_hi.is_some() {
            !far_probe[c].is_sign_negative()
        } else {
            slopes[c] >= 0.0 || near[c].is_zero()
        };
        if near_ok && far_ok {
            lower.push(Wide::ZERO);
        } else {
            lower.push(near[c].min(far_probe[c]));
        }
    }
    Some(SymbolicRegion {
        r_lo: r0,
        r_hi: head_hi,
        lower,
        kind: "linear-pair".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(x: f64) -> Wide {
        Wide::from_f64(x)
    }

    fn sphere_fibers(m: u32, n: u32) -> Vec<FiberDescriptor> {
        crate::curvature::triple_as_fibers(m, n)
    }

    #[test]
    fn flat_tail_passes() {
        // (kr, kr, λ): needs (m-1)(1-k²) >= n k²
        let k = 0.05;
        let phi = PiecewiseProfile::whole_ray(SegmentKind::Linear { a: w(k), b: Wide::ZERO });
        let psi = phi.clone();
        let rho = PiecewiseProfile::whole_ray(SegmentKind::Constant { v: w(0.3) });
        let fibers = sphere_fibers(2, 2);
        let region = tail_region(&fibers, &[&phi, &psi, &rho], w(100.0)).unwrap();
        assert!(region.lower.iter().all(|x| !x.is_sign_negative()), "{:?}", region.lower);
    }

    #[test]
    fn steep_cone_tail_fails() {
        // k too close to 1: (m-1)(1-k²) < n k² for k = 0.9, m = n = 2
        let k = 0.9;
        let phi = PiecewiseProfile::whole_ray(SegmentKind::Linear { a: w(k), b: Wide::ZERO });
        let psi = phi.clone();
        let rho = PiecewiseProfile::whole_ray(SegmentKind::Constant { v: w(0.3) });
        let fibers = sphere_fibers(2, 2);
        let region = tail_region(&fibers, &[&phi, &psi, &rho], w(100.0)).unwrap();
        assert!(region.lower.iter().any(|x| x.is_sign_negative()));
    }

    #[test]
    fn power_tail_with_threshold() {
        // (kr, kr, a r^s): Ric33 nonneg needs r0 past the threshold radius
        let k = 0.05;
        let s = 0.25;
        let a = 5.0;
        let phi = PiecewiseProfile::whole_ray(SegmentKind::Linear { a: w(k), b: Wide::ZERO });
        let psi = phi.clone();
        let rho = PiecewiseProfile::whole_ray(SegmentKind::Power { a: w(a), s });
        let fibers = sphere_fibers(2, 2);
        // threshold: r^{2-2s} >= a² s (2s + m + n - 1)
        let thresh = (a * a * s * (2.0 * s + 3.0)).powf(1.0 / (2.0 - 2.0 * s));
        let good = tail_region(&fibers, &[&phi, &psi, &rho], w(thresh * 2.0)).unwrap();
        assert!(good.lower.iter().all(|x| !x.is_sign_negative()), "{:?}", good.lower);
        let bad = tail_region(&fibers, &[&phi, &psi, &rho], w(thresh / 4.0)).unwrap();
        assert!(bad.lower.iter().any(|x| x.is_sign_negative()));
    }

    #[test]
    fn cone_head_flat_margin_zero() {
        // (r, 1, 1) near the apex: Ric00 = Ric11 = 0 exactly
        let phi = PiecewiseProfile::whole_ray(SegmentKind::Linear { a: w(1.0), b: Wide::ZERO });
        let psi = PiecewiseProfile::whole_ray(SegmentKind::Constant { v: w(1.0) });
        let rho = psi.clone();
        let fibers = sphere_fibers(3, 2);
        let region = head_region(&fibers, &[&phi, &psi, &rho], Wide::ZERO, w(1.0)).unwrap();
        assert!(region.lower.iter().all(|x| !x.is_sign_negative()));
        assert!(region.lower[0].is_zero());
        assert!(region.lower[1].is_zero());
    }

    #[test]
    fn smoothed_apex_head() {
        let o = 0.01;
        let phi = PiecewiseProfile {
            segments: vec![Segment::new(
                w(o),
                Some(w(0.02)),
                SegmentKind::Linear { a: w(1.0), b: w(-o) },
            )],
        };
        let psi = PiecewiseProfile {
            segments: vec![Segment::new(w(o), Some(w(0.02)), SegmentKind::Constant { v: w(0.05) })],
        };
        let rho = PiecewiseProfile {
            segments: vec![Segment::new(w(o), Some(w(0.02)), SegmentKind::Constant { v: w(0.001) })],
        };
        let fibers = sphere_fibers(2, 2);
        let region = head_region(&fibers, &[&phi, &psi, &rho], w(o), w(0.02)).unwrap();
        assert_eq!(region.kind, "smoothed-apex");
        assert!(region.lower.iter().all(|x| !x.is_sign_negative()));
        // collapsed fibers carry their exact positive values
        assert!((region.lower[2].to_f64() - 1.0 / (0.05 * 0.05)).abs() < 1e-9);
        assert!((region.lower[3].to_f64() - 1.0 / (0.001 * 0.001)).abs() < 1e-3);
    }

    #[test]
    fn linear_pair_tail() {
        // Step-1 style linear pair: φ = kr + b1, ψ = ρ = δ1 r + b2
        let fibers = sphere_fibers(2, 2);
        let k = 0.05;
        let b1 = 94.0;
        let d1 = 1e-9;
        let b2 = 0.049;
        let mk = |a: f64, b: f64| {
            PiecewiseProfile::whole_ray(SegmentKind::Linear { a: w(a), b: w(b) })
        };
        let phi = mk(k, b1);
        let psi = mk(d1, b2);
        let rho = mk(d1, b2);
        let region = tail_region(&fibers, &[&phi, &psi, &rho], w(1000.0)).unwrap();
        assert_eq!(region.kind, "linear-pair");
        assert!(region.lower.iter().all(|x| !x.is_sign_negative()), "{:?}", region.lower);
    }
}
