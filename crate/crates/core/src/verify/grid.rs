//! Interval evaluation of the Ricci forms over profile enclosures, with
//! adaptive bisection of failing subintervals.
//!
//! Everything is computed in the scaled variables `r²·Ric`, assembled from
//! the per-segment atoms `r/f`, `r² f''/f` and the plain d1 range. These stay
//! bounded on arbitrarily long log-intervals, so one subinterval routinely
//! certifies a blend spanning thousands of decades; the division by r² is
//! undone only when converting to the stored per-subinterval lower bound.

use super::tail;
use super::{
    CertStatus, CurvatureCertificate, SubCert, SymbolicRegion, VerifyError, VerifyInterval,
    VerifyPolicy, CERT_SLACK_ULPS,
};
use crate::curvature::FiberDescriptor;
use crate::num::{WInt, Wide};
use crate::profiles::enclosure::{enclose, Atoms};
use crate::profiles::PiecewiseProfile;

struct FiberData {
    dim: f64,
    kappa: Wide,
    atoms: Atoms,
}

/// Lower bounds for all components (radial first) on `[a, b]`, or None when
/// some profile is not certifiably positive there.
fn component_bounds(
    fibers: &[FiberDescriptor],
    profiles: &[&PiecewiseProfile],
    a: Wide,
    b: Wide,
) -> Result<Option<Vec<Wide>>, VerifyError> {
    let mut data = Vec::with_capacity(fibers.len());
    for (f, p) in fibers.iter().zip(profiles) {
        let e = enclose(p, a, b)?;
        let Some(atoms) = e.atoms else {
            return Ok(None);
        };
        data.push(FiberData {
            dim: f.dim as f64,
            kappa: Wide::from_f64(f.ricci_lower),
            atoms,
        });
    }

    let n = fibers.len();
    let mut scaled = Vec::with_capacity(n + 1);

    // r² Ric00 = -Σ n_i (r² f_i''/f_i)
    let mut radial = WInt::ZERO;
    for d in &data {
        radial = radial + d.atoms.r2_d2_over_f.scale(Wide::from_f64(d.dim));
    }
    scaled.push(-radial);

    // r² Ric_i = -A_i + κ_i B_i² - (n_i-1) C_i² - Σ_{l≠i} n_l C_i C_l
    // with B = r/f and C = r f'/f; κB² - (n-1)C² is the scaled form of
    // (κ - (n-1) f'²)/f². For unit-normalized fibers (κ = n-1) the middle
    // terms factor through the (1 - f') atom as κ B² (1-f')(2-(1-f')),
    // whose lower bound is an exact zero at a smooth apex.
    for (i, di) in data.iter().enumerate() {
        let ni1 = Wide::from_f64(di.dim - 1.0);
        let bsq = di.atoms.r_over_f.square();
        let ci = di.atoms.r_d1_over_f;
        let sphere_normalized = di.kappa == ni1;
        let middle = if sphere_normalized {
            let d = di.atoms.one_minus_d1;
            let two: WInt = 2.0.into();
            (bsq * d * (two - d)).scale(di.kappa)
        } else {
            bsq.scale(di.kappa) - ci.square().scale(ni1)
        };
        let mut comp = -di.atoms.r2_d2_over_f + middle;
        for (l, dl) in data.iter().enumerate() {
            if l == i {
                continue;
            }
            comp = comp - (ci * dl.atoms.r_d1_over_f).scale(Wide::from_f64(dl.dim));
        }
        scaled.push(comp);
    }

    // undo the r² scaling on the lower end, rounding outward
    let r_lo_sq = (a * a).next_down_ulps(4);
    let r_hi_sq = (b * b).next_up_ulps(4);
    let out = scaled
        .iter()
        .map(|s| {
            let q = if s.lo.is_sign_negative() {
                s.lo / r_lo_sq
            } else {
                s.lo / r_hi_sq
            };
            q.next_down_ulps(4)
        })
        .collect();
    Ok(Some(out))
}

#[allow(clippy::too_many_arguments)]
fn refine(
    fibers: &[FiberDescriptor],
    profiles: &[&PiecewiseProfile],
    a: Wide,
    b: Wide,
    depth: u32,
    policy: &VerifyPolicy,
    targets: Option<&[Wide]>,
    budget: &mut usize,
    out: &mut Vec<SubCert>,
) -> Result<(), VerifyError> {
    let meets = |bs: &[Wide]| -> bool {
        match targets {
            None => bs.iter().all(|x| !x.is_sign_negative()),
            Some(t) => bs.iter().zip(t).all(|(x, ti)| x >= ti),
        }
    };
    let bounds = component_bounds(fibers, profiles, a, b)?;
    let ok = bounds.as_ref().map(|bs| meets(bs)).unwrap_or(false);
    let mid = a.geo_mean(b);
    // a pointwise witness below target means refinement cannot rescue the
    // subinterval: record the failing leaf and stop
    let witness_hopeless = !ok
        && super::ricci_point_wide(fibers, profiles, mid)
            .map(|vals| !meets(&vals))
            .unwrap_or(true);
    if ok || witness_hopeless || depth >= policy.max_depth || *budget == 0 || mid <= a || mid >= b
    {
        let lower = bounds.unwrap_or_else(|| {
            // non-positive enclosure: record an uninformative failing bound
            vec![Wide::from_f64(f64::MIN); fibers.len() + 1]
        });
        out.push(SubCert { r_lo: a, r_hi: b, lower, depth });
        return Ok(());
    }
    *budget -= 1;
    refine(fibers, profiles, a, mid, depth + 1, policy, targets, budget, out)?;
    refine(fibers, profiles, mid, b, depth + 1, policy, targets, budget, out)
}

/// Initial grid points: profile breakpoints inside the window plus log-uniform
/// fill, capped per gap.
fn initial_grid(
    profiles: &[&PiecewiseProfile],
    g_lo: Wide,
    g_hi: Wide,
    policy: &VerifyPolicy,
) -> Vec<(Wide, Wide)> {
    let mut knots: Vec<Wide> = vec![g_lo];
    for p in profiles {
        for bp in p.breakpoints() {
            if bp > g_lo && bp < g_hi {
                knots.push(bp);
            }
        }
    }
    knots.push(g_hi);
    knots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    knots.dedup_by(|x, y| x == y);

    let mut pieces = Vec::new();
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let decades = (b.log10_f64() - a.log10_f64()).max(0.0);
        let n = ((decades * policy.per_decade as f64).ceil() as usize)
            .clamp(1, policy.decade_cap);
        let la = a.log10_f64();
        let lb = b.log10_f64();
        let mut prev = a;
        for i in 1..=n {
            let next = if i == n {
                b
            } else {
                let l = la + (lb - la) * i as f64 / n as f64;
                Wide::from_f64(10f64).powf(l)
            };
            if next > prev {
                pieces.push((prev, next));
                prev = next;
            }
        }
        if prev < b {
            pieces.push((prev, b));
        }
    }
    pieces
}

fn worker_count() -> usize {
    std::env::var("WARPFORGE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
        .min(64)
}

pub fn certify(
    fibers: &[FiberDescriptor],
    profiles: &[&PiecewiseProfile],
    interval: VerifyInterval,
    policy: &VerifyPolicy,
) -> Result<CurvatureCertificate, VerifyError> {
    certify_with_targets(fibers, profiles, interval, policy, None)
}

/// Like `certify`, but refinement keeps splitting until every component's
/// bound clears its target (used by the step audits, which need tight
/// positive bounds rather than mere nonnegativity).
pub fn certify_with_targets(
    fibers: &[FiberDescriptor],
    profiles: &[&PiecewiseProfile],
    interval: VerifyInterval,
    policy: &VerifyPolicy,
    targets: Option<&[Wide]>,
) -> Result<CurvatureCertificate, VerifyError> {
    assert_eq!(fibers.len(), profiles.len());
    let prof_start = profiles.iter().map(|p| p.start()).fold(Wide::ZERO, |a, b| a.max(b));
    let start = interval.lo.max(prof_start);
    if let Some(hi) = interval.hi {
        if hi <= start {
            return Err(VerifyError::BadInterval);
        }
    }

    // does any profile vanish at the left end (apex)?
    let vanishing = profiles.iter().any(|p| {
        let j = p.segments[0].jet(start.max(p.start()));
        j[0].is_zero() || j[0].abs().exponent() < -4000
    });
    let need_head = vanishing || start.is_zero();

    // first knot above start bounds the head region
    let mut first_knot: Option<Wide> = None;
    let mut last_knot: Option<Wide> = None;
    for p in profiles {
        for bp in p.breakpoints() {
            if bp > start && interval.hi.map_or(true, |h| bp < h) {
                first_knot = Some(first_knot.map_or(bp, |x: Wide| x.min(bp)));
                last_knot = Some(last_knot.map_or(bp, |x: Wide| x.max(bp)));
            }
        }
    }
    let anchor_lo = first_knot.unwrap_or_else(|| start.max(Wide::ONE) * Wide::from_f64(2.0));
    let anchor_hi = last_knot.unwrap_or(anchor_lo);

    let head = if need_head {
        let h_end = interval.hi.map_or(anchor_lo, |h| h.min(anchor_lo));
        Some(tail::head_region(fibers, profiles, start, h_end)?)
    } else {
        None
    };
    let tail_region = if interval.hi.is_none() {
        Some(tail::tail_region(fibers, profiles, anchor_hi)?)
    } else {
        None
    };

    let g_lo = if need_head {
        interval.hi.map_or(anchor_lo, |h| h.min(anchor_lo))
    } else {
        start
    };
    let g_hi = interval.hi.unwrap_or(anchor_hi);

    let mut subintervals: Vec<SubCert> = Vec::new();
    if g_hi > g_lo {
        let pieces = initial_grid(profiles, g_lo, g_hi, policy);
        let workers = worker_count();
        if workers <= 1 || pieces.len() < 4 {
            let mut budget = 200_000usize;
            for (a, b) in pieces {
                refine(fibers, profiles, a, b, 0, policy, targets, &mut budget, &mut subintervals)?;
            }
        } else {
            // deterministic parallel map: chunk by index, merge in order
            let chunks: Vec<_> = pieces.chunks(pieces.len().div_ceil(workers)).collect();
            let results: Vec<Result<Vec<SubCert>, VerifyError>> = std::thread::scope(|scope| {
                let handles: Vec<_> = chunks
                    .into_iter()
                    .map(|chunk| {
                        scope.spawn(move || {
                            let mut local = Vec::new();
                            let mut budget = 200_000usize;
                            for &(a, b) in chunk {
                                refine(fibers, profiles, a, b, 0, policy, targets, &mut budget, &mut local)?;
                            }
                            Ok(local)
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().unwrap()).collect()
            });
            for r in results {
                subintervals.extend(r?);
            }
        }
    }

    // margin and status
    let mut margin: Option<Wide> = None;
    let mut status = CertStatus::Pass;
    let mut depth_used = 0;
    let mut consider = |lower: &[Wide], r_lo: Wide, r_hi: Wide, status: &mut CertStatus| {
        for (c, v) in lower.iter().enumerate() {
            margin = Some(match margin {
                None => *v,
                Some(m) => m.min(*v),
            });
            if v.is_sign_negative() {
                if let CertStatus::Pass = status {
                    *status = CertStatus::Fail { r_lo, r_hi, component: c };
                }
            }
        }
    };
    if let Some(h) = &head {
        consider(&h.lower, h.r_lo, h.r_hi.unwrap_or(h.r_lo), &mut status);
    }
    for s in &subintervals {
        depth_used = depth_used.max(s.depth);
        consider(&s.lower, s.r_lo, s.r_hi, &mut status);
    }
    if let Some(t) = &tail_region {
        consider(&t.lower, t.r_lo, t.r_hi.unwrap_or(t.r_lo), &mut status);
    }

    Ok(CurvatureCertificate {
        interval_lo: interval.lo,
        interval_hi: interval.hi,
        head,
        tail: tail_region,
        subintervals,
        margin: margin.unwrap_or(Wide::ZERO),
        status,
        refinement_depth: depth_used,
        slack_ulps: CERT_SLACK_ULPS,
        policy: *policy,
    })
}

#[allow(dead_code)]
pub(crate) fn head_stub() -> Option<SymbolicRegion> {
    None
}
