//! Acceptance suite: every shipping criterion runs here at its stated
//! tolerance and prints one pass/fail line.

use rand::{Rng, SeedableRng};
use std::time::Instant;
use warpforge_core::constructions::constants::SearchPolicy;
use warpforge_core::constructions::model1::assert_row;
use warpforge_core::curvature::oracle::{ricci_fd_triple, ricci_fd_triple_raw};
use warpforge_core::curvature::{
    ricci_linear, ricci_triple, ricci_triple_jets, LinearProfilePair,
};
use warpforge_core::doc::{certificate_to_json, SpecDocument, SpecPayload};
use warpforge_core::num::Wide;
use warpforge_core::profiles::SegmentKind;
use warpforge_core::verify::window::{cone_window_scan, ConeModel, ScanMode};
use warpforge_core::verify::{
    ricci_point_wide, verify_nonneg_ricci, CurvatureCertificate, VerifyInterval, VerifyPolicy,
};

fn wf(x: f64) -> Wide {
    Wide::from_f64(x)
}

fn report(name: &str, pass: bool, detail: &str) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

#[test]
fn criterion_closed_form_equivalence() {
    let t0 = Instant::now();
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed_0001);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let m = rng.gen_range(2u32..=4);
        let n = rng.gen_range(2u32..=4);
        let a1 = rng.gen_range(0.001..0.9);
        let b1 = rng.gen_range(0.0..100.0);
        let a2 = rng.gen_range(0.0001..0.5);
        let b2 = rng.gen_range(0.01..5.0);
        let r = 10f64.powf(rng.gen_range(-2.0..4.0));
        let pair = LinearProfilePair { a1, b1, a2, b2 };
        let lin = ricci_linear(m, n, &pair, r).unwrap();
        let phi = [a1 * r + b1, a1, 0.0];
        let coll = [a2 * r + b2, a2, 0.0];
        let tri = ricci_triple(m, n, phi, coll, coll, r).unwrap();
        for (x, y) in lin.components().iter().zip(&tri.components()) {
            let denom = x.abs().max(y.abs()).max(1e-300);
            let rel = (x - y).abs() / denom;
            if x.abs().max(y.abs()) > 1e-300 {
                worst = worst.max(rel);
            }
        }
    }
    let elapsed = t0.elapsed();
    report(
        "closed-form equivalence",
        worst <= 1e-12 && elapsed.as_secs_f64() < 1.0,
        &format!("worst rel {worst:.2e} over 1000 configs in {elapsed:?}"),
    );
}

#[test]
fn criterion_oracle_agreement() {
    let t0 = Instant::now();
    // five smooth analytic triples with hand-written jets
    type JetFn = fn(f64) -> [f64; 3];
    type Family = (JetFn, JetFn, JetFn);
    let families: [Family; 5] = [
        (
            |r| [r, 1.0, 0.0],
            |_| [1.0, 0.0, 0.0],
            |_| [1.0, 0.0, 0.0],
        ),
        (
            |r| [r + 0.1 * r.sin(), 1.0 + 0.1 * r.cos(), -0.1 * r.sin()],
            |r| [2.0 + r.cos(), -r.sin(), -r.cos()],
            |r| [3.0 + 0.5 * (2.0 * r).sin(), (2.0 * r).cos(), -2.0 * (2.0 * r).sin()],
        ),
        (
            |r| {
                [
                    0.9 * r + 0.05 * (0.7 * r).sin(),
                    0.9 + 0.035 * (0.7 * r).cos(),
                    -0.0245 * (0.7 * r).sin(),
                ]
            },
            |r| [1.5 + 0.3 * (0.5 * r).cos(), -0.15 * (0.5 * r).sin(), -0.075 * (0.5 * r).cos()],
            |_| [2.0, 0.0, 0.0],
        ),
        (
            |r| {
                [
                    r + 0.02 * r * (0.3 * r).cos(),
                    1.0 + 0.02 * (0.3 * r).cos() - 0.006 * r * (0.3 * r).sin(),
                    -0.012 * (0.3 * r).sin() - 0.0018 * r * (0.3 * r).cos(),
                ]
            },
            |_| [0.8, 0.0, 0.0],
            |r| [1.2 + 0.1 * r.sin(), 0.1 * r.cos(), -0.1 * r.sin()],
        ),
        (
            |r| [0.7 * r + 1.0, 0.7, 0.0],
            |r| [2.0 + 0.2 * (1.3 * r).sin(), 0.26 * (1.3 * r).cos(), -0.338 * (1.3 * r).sin()],
            |r| [1.0 + 0.05 * r.cos(), -0.05 * r.sin(), -0.05 * r.cos()],
        ),
    ];
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed_0002);
    let mut worst = 0.0f64;
    let mut order_ratios = Vec::new();
    for (fi, (jphi, jpsi, jrho)) in families.iter().enumerate() {
        let phi = move |r: f64| jphi(r)[0];
        let psi = move |r: f64| jpsi(r)[0];
        let rho = move |r: f64| jrho(r)[0];
        for _ in 0..10 {
            let r = rng.gen_range(0.7..3.0);
            let o1 = ricci_fd_triple(2, 2, &phi, &psi, &rho, r, 2e-4);
            let exact = ricci_triple(2, 2, jphi(r), jpsi(r), jrho(r), r).unwrap();
            for (a, b) in exact.components().iter().zip(&o1.eval.components()) {
                let denom = a.abs().max(1.0);
                worst = worst.max((a - b).abs() / denom);
            }
            if fi > 0 {
                // observed order-2 convergence of the raw (pre-Richardson)
                // differences: halving the step divides the defect by ~4
                let oh = ricci_fd_triple_raw(2, 2, &phi, &psi, &rho, r, 8e-3);
                let oh2 = ricci_fd_triple_raw(2, 2, &phi, &psi, &rho, r, 4e-3);
                for ((e, a), b) in exact
                    .components()
                    .iter()
                    .zip(&oh.components())
                    .zip(&oh2.components())
                {
                    let c1 = (e - a).abs();
                    let c2 = (e - b).abs();
                    if c1 > 1e-6 && c2 > 1e-9 {
                        order_ratios.push(c1 / c2);
                    }
                }
            }
        }
    }
    let mean_ratio: f64 = order_ratios.iter().sum::<f64>() / order_ratios.len().max(1) as f64;
    let elapsed = t0.elapsed();
    report(
        "oracle agreement",
        worst <= 1e-4 && (2.5..=6.5).contains(&mean_ratio) && elapsed.as_secs_f64() < 30.0,
        &format!(
            "worst rel {worst:.2e} at 50 points, raw step-halving ratio {mean_ratio:.2} (order 2 ~ 4) in {elapsed:?}"
        ),
    );
}

#[test]
fn criterion_model1_certification() {
    let t0 = Instant::now();
    let b = warpforge_core::constructions::model1::build_model_i(
        2,
        2,
        0.01,
        None,
        None,
        &SearchPolicy::default(),
    )
    .expect("model 1 builds");
    // certificate on (origin, 10R]
    let cert = verify_nonneg_ricci(
        &b.spec,
        VerifyInterval { lo: Wide::ZERO, hi: Some(b.constants.r_final * wf(10.0)) },
        &SearchPolicy::default().verify,
    )
    .unwrap();
    let mut ok = cert.passed() && !cert.margin.is_sign_negative();
    let mut detail = format!("margin {} on (0, 10R]", cert.margin);
    // step-wise audit of every displayed sufficient inequality
    for step in ["step1", "step2", "step3", "step4"] {
        let rep = warpforge_core::verify::audit::step_inequality_audit_model1(
            &b.spec,
            &b.constants,
            step,
        )
        .unwrap();
        ok &= rep.all_pass;
        if !rep.all_pass {
            detail.push_str(&format!("; audit {step} FAILED"));
        }
    }
    let elapsed = t0.elapsed();
    ok &= elapsed.as_secs_f64() < 60.0;
    detail.push_str(&format!("; audits pass; {elapsed:?}"));
    report("model 1 certification", ok, &detail);
}

#[test]
fn criterion_model2_certification() {
    let t0 = Instant::now();
    let b = warpforge_core::constructions::model2::build_model_ii(
        2,
        2,
        0.01,
        wf(1.0),
        None,
        &SearchPolicy::default(),
    )
    .expect("model 2 builds");
    let rho_const = b.spec.rho.segments.len() == 1
        && matches!(b.spec.rho.segments[0].kind, SegmentKind::Constant { .. });
    let elapsed = t0.elapsed();
    report(
        "model 2 certification",
        b.certificate.passed() && rho_const && elapsed.as_secs_f64() < 60.0,
        &format!(
            "margin {}, rho globally constant: {rho_const}, {elapsed:?}",
            b.certificate.margin
        ),
    );
}

#[test]
fn criterion_connector_table() {
    let b = warpforge_core::constructions::connector::build_connector(
        2,
        3,
        0.01,
        10.0,
        &SearchPolicy::default(),
    )
    .expect("connector builds");
    let c = &b.constants;
    let l = wf(c.l);
    let r = c.r_final;
    let kw = wf(c.k);
    let one_eps = wf(0.99);
    let cone = SegmentKind::Linear { a: kw, b: Wide::ZERO };
    let near_unit = SegmentKind::Linear { a: one_eps, b: Wide::ZERO };
    let two = wf(2.0);

    let r1_hi = (two * l * l * r.powi(3)).recip();
    let rows: [(&str, Wide, Wide, SegmentKind, SegmentKind, SegmentKind); 5] = [
        ("row1", r1_hi * wf(1e-3), r1_hi, cone.clone(), cone.clone(), SegmentKind::Constant { v: c.lambda1 }),
        (
            "row2",
            (two * l * l * r * r).recip(),
            (two * l * r * r).recip(),
            SegmentKind::Constant { v: c.delta1 },
            near_unit.clone(),
            SegmentKind::Constant { v: c.lambda1 },
        ),
        (
            "row3",
            (two * l * r).recip(),
            (l * r).recip(),
            cone.clone(),
            cone.clone(),
            SegmentKind::Constant { v: c.lambda2 },
        ),
        (
            "row4",
            l.recip(),
            Wide::ONE,
            near_unit,
            SegmentKind::Constant { v: c.delta2 },
            SegmentKind::Constant { v: c.lambda2 },
        ),
        ("row5", r, r * wf(10.0), cone.clone(), cone, SegmentKind::Constant { v: c.lambda3 }),
    ];
    let mut ok = true;
    for (name, lo, hi, phi_k, psi_k, rho_k) in rows {
        let good = assert_row(&b.spec.phi, lo, hi, &phi_k).is_ok()
            && assert_row(&b.spec.psi, lo, hi, &psi_k).is_ok()
            && assert_row(&b.spec.rho, lo, hi, &rho_k).is_ok();
        if !good {
            println!("  connector {name} mismatch");
        }
        ok &= good;
    }
    let bounds_ok =
        c.delta1 < c.c_bound / (l * l * r * r) && c.delta2 < c.c_bound / l;
    report(
        "connector table",
        ok && bounds_ok,
        &format!("five rows exact; delta1/delta2 within c-bounds ({bounds_ok})"),
    );
}

#[test]
fn criterion_telescope_windows() {
    let t0 = Instant::now();
    let t = warpforge_core::constructions::telescope::build_telescope(
        3,
        2,
        3,
        4.0,
        &SearchPolicy::default(),
    )
    .expect("3-stage telescope builds");
    let a_reports = cone_window_scan(&t.stages, ScanMode::AScale).unwrap();
    let b_reports = cone_window_scan(&t.stages, ScanMode::BScale).unwrap();
    let mut ok = true;
    for r in &a_reports {
        ok &= matches!(r.cone_model, ConeModel::Euclidean(3));
        ok &= r.active_exact;
    }
    for r in &b_reports {
        ok &= matches!(r.cone_model, ConeModel::Euclidean(4));
        ok &= r.active_exact;
    }
    for reports in [&a_reports, &b_reports] {
        for w in reports.windows(2) {
            ok &= w[1].psi < w[0].psi;
        }
    }
    let elapsed = t0.elapsed();
    ok &= elapsed.as_secs_f64() < 300.0;
    report(
        "telescope windows",
        ok,
        &format!(
            "A targets R^3, B targets R^4, psi A: {} > {} > {}, {elapsed:?}",
            a_reports[0].psi, a_reports[1].psi, a_reports[2].psi
        ),
    );
}

#[test]
fn criterion_fiber_scale_law() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed_0003);
    let mut worst_unchanged = 0.0f64;
    let mut worst_shift = 0.0f64;
    for _ in 0..100 {
        let m = rng.gen_range(2u32..=4);
        let n = rng.gen_range(2u32..=4);
        let r = rng.gen_range(0.5..50.0);
        let phi = [r * rng.gen_range(0.5..1.0), rng.gen_range(0.3..1.0), rng.gen_range(-0.01..0.0)];
        let psi = [rng.gen_range(0.5..3.0), rng.gen_range(-0.1..0.1), rng.gen_range(-0.01..0.01)];
        let rho = [rng.gen_range(0.5..3.0), rng.gen_range(-0.1..0.1), rng.gen_range(-0.01..0.01)];
        let base = ricci_triple_jets(
            m,
            n,
            phi.map(wf),
            psi.map(wf),
            rho.map(wf),
        );
        for c in [1.0f64, 0.5, 0.1] {
            let rho_scaled = [rho[0] * c, rho[1] * c, rho[2] * c];
            let scaled = ricci_triple_jets(m, n, phi.map(wf), psi.map(wf), rho_scaled.map(wf));
            for idx in 0..3 {
                let rel = scaled[idx].rel_diff(base[idx]);
                if !base[idx].is_zero() {
                    worst_unchanged = worst_unchanged.max(rel);
                } else {
                    worst_unchanged = worst_unchanged.max(scaled[idx].abs().to_f64());
                }
            }
            // Ric33 shifts by exactly (1/c² - 1)/rho²
            let expected = wf((1.0 / (c * c) - 1.0) / (rho[0] * rho[0]));
            let got = scaled[3] - base[3];
            let rel = if expected.is_zero() {
                got.abs().to_f64() / base[3].abs().to_f64().max(1.0)
            } else {
                got.rel_diff(expected)
            };
            worst_shift = worst_shift.max(rel);
        }
    }
    report(
        "fiber-scale law",
        worst_unchanged <= 1e-12 && worst_shift <= 1e-12,
        &format!("radial/sphere components unchanged to {worst_unchanged:.2e}, S² shift matches to {worst_shift:.2e}"),
    );
}

#[test]
fn criterion_certificate_soundness() {
    // pointwise Ricci evaluations inside certified subintervals never fall
    // below the stated bounds, across all built specs
    let policy = SearchPolicy::default();
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed_0004);
    let mut checked = 0usize;
    let mut ok = true;

    let m1 = warpforge_core::constructions::model1::build_model_i(2, 2, 0.01, None, None, &policy)
        .unwrap();
    let m2 = warpforge_core::constructions::model2::build_model_ii(2, 2, 0.01, wf(1.0), None, &policy)
        .unwrap();
    let conn =
        warpforge_core::constructions::connector::build_connector(2, 2, 0.01, 10.0, &policy)
            .unwrap();
    let specs: [(&warpforge_core::constructions::TripleWarpSpec, &CurvatureCertificate); 3] = [
        (&m1.spec, &m1.certificate),
        (&m2.spec, &m2.certificate),
        (&conn.spec, &conn.certificate),
    ];
    'outer: for (spec, cert) in specs {
        let fibers = spec.fibers();
        let profiles = spec.profiles();
        let per_spec = 10_000 / specs.len() + 1;
        for _ in 0..per_spec {
            let sub = &cert.subintervals[rng.gen_range(0..cert.subintervals.len())];
            let t = rng.gen_range(0.0..1.0);
            let r = sub.r_lo + (sub.r_hi - sub.r_lo) * wf(t);
            let vals = ricci_point_wide(&fibers, &profiles, r).unwrap();
            checked += 1;
            for (v, bound) in vals.iter().zip(&sub.lower) {
                if v < bound {
                    println!("  soundness violation at r = {r}: {v} < {bound}");
                    ok = false;
                    break 'outer;
                }
            }
        }
    }
    report(
        "certificate soundness",
        ok && checked >= 10_000,
        &format!("{checked} pointwise evaluations inside certified subintervals"),
    );
}

#[test]
fn criterion_round_trip_determinism() {
    let policy = SearchPolicy::default();
    let b = warpforge_core::constructions::connector::build_connector(2, 2, 0.01, 10.0, &policy)
        .unwrap();
    let vp = VerifyPolicy::default();
    let in_memory = verify_nonneg_ricci(
        &b.spec,
        VerifyInterval { lo: b.spec.origin, hi: None },
        &vp,
    )
    .unwrap();
    let json_doc = SpecDocument::triple(&b.spec).to_json();
    let loaded = SpecDocument::from_json(&json_doc).unwrap();
    let SpecPayload::Triple(spec2) = &loaded.spec else { panic!() };
    let reloaded = verify_nonneg_ricci(
        spec2,
        VerifyInterval { lo: spec2.origin, hi: None },
        &vp,
    )
    .unwrap();
    let a = certificate_to_json(&in_memory);
    let c = certificate_to_json(&reloaded);
    report(
        "round-trip determinism",
        a == c,
        &format!("certificates byte-identical: {} bytes", a.len()),
    );
}
