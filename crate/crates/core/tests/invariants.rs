//! Cross-module invariants that don't belong to a single unit.

use rand::{Rng, SeedableRng};
use warpforge_core::constructions::constants::SearchPolicy;
use warpforge_core::curvature::oracle::ricci_fd_triple;
use warpforge_core::curvature::{ricci_linear, ricci_triple_jets, LinearProfilePair};
use warpforge_core::num::Wide;
use warpforge_core::profiles::ops::rescale;
use warpforge_core::verify::window::{cone_window_scan, ScanMode};

fn wf(x: f64) -> Wide {
    Wide::from_f64(x)
}

/// Curvature scales as the inverse square of distance scaling: for the
/// profile transform f~(r) = A⁻¹ f(A r) applied to all three profiles,
/// Ric(spec~ at r) = A² Ric(spec at A r) componentwise.
#[test]
fn rescale_covariance_of_ricci() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(41);
    for _ in 0..200 {
        let m = rng.gen_range(2u32..=4);
        let n = rng.gen_range(2u32..=4);
        let a = rng.gen_range(0.01..100.0);
        let r = rng.gen_range(0.1..10.0);
        let jet = |v: f64, d1: f64, d2: f64| [wf(v), wf(d1), wf(d2)];
        let (v1, d11, d21) = (rng.gen_range(0.5..2.0) * r, rng.gen_range(0.3..1.0), rng.gen_range(-0.1..0.0));
        let (v2, d12, d22) = (rng.gen_range(0.2..2.0), rng.gen_range(-0.1..0.1), rng.gen_range(-0.05..0.05));
        let (v3, d13, d23) = (rng.gen_range(0.2..2.0), rng.gen_range(-0.1..0.1), rng.gen_range(-0.05..0.05));
        // jets of f~ at r in terms of jets of f at A r
        let scaled_jet = |v: f64, d1: f64, d2: f64| [wf(v / a), wf(d1), wf(d2 * a)];
        let base = ricci_triple_jets(m, n, jet(v1, d11, d21), jet(v2, d12, d22), jet(v3, d13, d23));
        let scaled = ricci_triple_jets(
            m,
            n,
            scaled_jet(v1, d11, d21),
            scaled_jet(v2, d12, d22),
            scaled_jet(v3, d13, d23),
        );
        let a2 = wf(a * a);
        for (s, b) in scaled.iter().zip(&base) {
            let expect = *b * a2;
            if expect.is_zero() {
                assert!(s.abs().to_f64() < 1e-10);
            } else {
                assert!(s.rel_diff(expect) < 1e-12, "{s} vs {expect}");
            }
        }
    }
}

/// The linear-profile closed form's S² numerator begins with coefficient 1
/// (not n-1): confirmed against both the generic evaluator and the
/// finite-difference oracle.
#[test]
fn linear_s2_numerator_coefficient_verdict() {
    let (m, n) = (3u32, 4u32);
    let pair = LinearProfilePair { a1: 0.31, b1: 2.0, a2: 0.12, b2: 0.9 };
    let r = 1.9;
    let lin = ricci_linear(m, n, &pair, r).unwrap();

    // oracle on the same metric
    let phi = move |x: f64| pair.a1 * x + pair.b1;
    let coll = move |x: f64| pair.a2 * x + pair.b2;
    let o = ricci_fd_triple(m, n, &phi, &coll, &coll, r, 1e-4);
    let ric33 = lin.ric_fiber[2];
    assert!(
        (ric33 - o.eval.ric_fiber[2]).abs() / ric33.abs().max(1.0) < 1e-4,
        "closed form {ric33} vs oracle {}",
        o.eval.ric_fiber[2]
    );

    // the alternative reading with (n-1) in place of 1 disagrees with both
    let mn1 = (m + n + 1) as f64;
    let u = pair.a1 * r + pair.b1;
    let v = pair.a2 * r + pair.b2;
    let wrong = (((n - 1) as f64 - mn1 * pair.a2 * pair.a2) * pair.a1 * r
        + (n - 1) as f64 * pair.b1
        - ((n + 1) as f64 * pair.a2 * pair.b1 + m as f64 * pair.a1 * pair.b2) * pair.a2)
        / (u * v * v);
    assert!((wrong - ric33).abs() > 1e-2, "variant readings must be distinguishable");
    assert!((wrong - o.eval.ric_fiber[2]).abs() > 1e-2);
}

/// The window report depends only on the metric, not its presentation:
/// rescaling the stage profiles by A while compensating the stage scale
/// reproduces the report to 1e-12 relative.
#[test]
fn scan_covariance_under_rescale() {
    let t = warpforge_core::constructions::telescope::build_telescope(
        2,
        2,
        1,
        4.0,
        &SearchPolicy::default(),
    )
    .unwrap();
    let base = cone_window_scan(&t.stages, ScanMode::AScale).unwrap();

    let a = wf(37.0);
    let mut moved = t.stages.clone();
    moved[0].spec.phi = rescale(&moved[0].spec.phi, a);
    moved[0].spec.psi = rescale(&moved[0].spec.psi, a);
    moved[0].spec.rho = rescale(&moved[0].spec.rho, a);
    // the same metric presented at 1/A the radius needs an A-times larger
    // rescaling to land on the same window
    moved[0].n_const = moved[0].n_const * a;
    let scanned = cone_window_scan(&moved, ScanMode::AScale).unwrap();

    let b0 = &base[0];
    let s0 = &scanned[0];
    assert!(s0.psi.rel_diff(b0.psi) < 1e-12, "{} vs {}", s0.psi, b0.psi);
    assert!(s0.active_deviation.rel_diff(b0.active_deviation) < 1e-12);
    for (x, y) in s0.collapsing_sups.iter().zip(&b0.collapsing_sups) {
        assert!(x.rel_diff(*y) < 1e-12);
    }
    assert!(s0.active_exact);
}

/// A one-stage telescope is a connector with a smoothed origin: same
/// constants, same profiles away from the smoothing window.
#[test]
fn one_stage_telescope_is_smoothed_connector() {
    let policy = SearchPolicy::default();
    let t = warpforge_core::constructions::telescope::build_telescope(2, 2, 1, 4.0, &policy)
        .unwrap();
    let conn =
        warpforge_core::constructions::connector::build_connector(2, 2, 0.01, 10.0, &policy)
            .unwrap();
    let st = &t.stages[0];
    assert!(st.r_const.rel_diff(conn.constants.r_final) < 1e-12);
    // phi and psi identical to the connector's (rho may carry the N^-4
    // normalization scale)
    for (a, b) in [(&st.spec.phi, &conn.spec.phi), (&st.spec.psi, &conn.spec.psi)] {
        assert_eq!(a.segments.len(), b.segments.len());
        for (sa, sb) in a.segments.iter().zip(&b.segments) {
            assert_eq!(sa.kind, sb.kind);
        }
    }
    // smoothed spec carries the boundary conditions at the shifted origin
    let report = warpforge_core::verify::boundary::verify_boundary_conditions(&st.smoothed);
    assert!(report.all_pass);
    let expect_origin = wf(st.epsilon) * st.r_const / st.n_const;
    assert!(st.origin_offset.rel_diff(expect_origin) < 1e-12);
}

/// Multi-fiber two-sphere telescope mirrors the triple telescope's structure.
#[test]
fn multi_two_fiber_matches_triple_structure() {
    use warpforge_core::curvature::FiberDescriptor;
    let policy = SearchPolicy::default();
    let fibers = vec![FiberDescriptor::sphere(3), FiberDescriptor::sphere(2)];
    let mt = warpforge_core::constructions::multi::build_multi_telescope(&fibers, 2, 4.0, &policy)
        .unwrap();
    assert_eq!(mt.stages.len(), 2);
    // the active fiber cycles
    assert_eq!(mt.stages[0].active_fiber, 0);
    assert_eq!(mt.stages[1].active_fiber, 1);
    for st in &mt.stages {
        assert!(st.certificate.passed());
        assert!(st.certificate_smoothed.passed());
    }
    let reports =
        warpforge_core::verify::window::cone_window_scan_multi(&mt.stages).unwrap();
    // each window's cone is the active fiber's cone
    use warpforge_core::verify::window::ConeModel;
    assert!(matches!(reports[0].cone_model, ConeModel::FiberCone { fiber: 0, dim: 3 }));
    assert!(matches!(reports[1].cone_model, ConeModel::FiberCone { fiber: 1, dim: 2 }));
    for r in &reports {
        assert!(r.active_exact);
    }
}
