use std::f64::consts::PI;

use proptest::prelude::*;
use tcflow::bifurcation::{BifurcationBranch, Sign};
use tcflow::chandrasekhar::ChandrasekharMode;
use tcflow::separation::*;

fn mode() -> ChandrasekharMode {
    ChandrasekharMode::for_height(3.022, 0.0).wall_exact()
}

#[test]
fn threshold_examples() {
    let m = mode();
    let c = m.r_bar(0.0, 2);
    assert!((26.0..=33.0).contains(&c), "R''(r1) = {c}");
    assert_eq!(boundary_threshold(0.0, &m).unwrap(), 0.0);
    assert!((boundary_threshold(c, &m).unwrap() - 1.0).abs() < 1e-14);
    let cap = boundary_threshold(0.31, &m).unwrap();
    assert!((cap - 0.31 / c).abs() < 1e-15);
    assert!((cap - 0.01003).abs() < 5e-4, "{cap}");
    assert!(boundary_threshold(-0.1, &m).is_err());
    assert!(boundary_threshold(f64::NAN, &m).is_err());
}

#[test]
fn wall_locations_follow_the_quarter_wavelength_pattern() {
    let m = mode();
    let (inner, outer) = boundary_locations(3.022, &m);
    for (n, z) in inner.iter().enumerate() {
        assert!((z - (4 * n + 1) as f64 * PI / (2.0 * m.a)).abs() < 1e-14);
    }
    for (n, z) in outer.iter().enumerate() {
        assert!((z - (4 * n + 3) as f64 * PI / (2.0 * m.a)).abs() < 1e-14);
    }
    assert_eq!((inner.len(), outer.len()), (2, 1));
}

#[test]
fn vortex_counts_for_two_to_eight_cells() {
    for k in 2..=8usize {
        let m = ChandrasekharMode::with_wavenumber(3.117, k, 0.0);
        let (a, b) = boundary_locations(k as f64 * PI / m.a, &m);
        assert_eq!((a.len(), b.len()), ((k + 1) / 2, k / 2));
        assert_eq!(vortex_counts(k), ((k + 1) / 2, k / 2));
    }
}

#[test]
fn b_zero_threshold_has_closed_form() {
    let (c, alpha, l0, a) = (0.7, 0.55, 49.3, 3.117);
    let br = BifurcationBranch::new(0.0, c, alpha, l0, a).unwrap();
    for cap in [0.0, 0.01, 0.2, 1.3] {
        let l1 = lambda_threshold(&br, cap, Sign::One).unwrap();
        let expect = l0 + (a * c * cap).powi(2) / alpha;
        assert!((l1 - expect).abs() < 1e-12 * expect, "{l1} vs {expect}");
        assert_eq!(lambda_threshold(&br, cap, Sign::Two).unwrap(), l1);
        // inversion: the first state reaches exactly cap at l1
        assert!((br.big_lambda(l1, Sign::One).unwrap() - cap).abs() < 1e-12);
    }
}

#[test]
fn threshold_shift_is_quadratic_in_gamma() {
    let m = mode();
    let br = BifurcationBranch::new(0.0, 0.5, 0.6, 0.0, m.a).unwrap();
    let shift = |g: f64| lambda_threshold(&br, boundary_threshold(g, &m).unwrap(), Sign::One).unwrap();
    for g in [0.05, 0.31, 1.0] {
        assert!((shift(2.0 * g) / shift(g) - 4.0).abs() < 1e-9);
        let c0 = boundary_threshold(g, &m).unwrap();
        assert!((boundary_threshold(2.0 * g, &m).unwrap() / c0 - 2.0).abs() < 1e-12);
    }
}

#[test]
fn second_state_cases() {
    let br = BifurcationBranch::new(0.3, 0.5, 0.6, 41.0, 3.117).unwrap();
    // |b| / aC = 0.1925
    assert_eq!(branch2_case(&br, 0.1), Branch2Case::Immediate);
    assert_eq!(lambda_threshold(&br, 0.1, Sign::Two).unwrap(), 41.0);
    assert_eq!(branch2_case(&br, 0.5), Branch2Case::Delayed);
    let l2 = lambda_threshold(&br, 0.5, Sign::Two).unwrap();
    let l1 = lambda_threshold(&br, 0.5, Sign::One).unwrap();
    assert!(l2 > 41.0 && l1 > l2);
    assert!((br.big_lambda(l2, Sign::Two).unwrap() - 0.5).abs() < 1e-12);
    assert!((br.big_lambda(l1, Sign::One).unwrap() - 0.5).abs() < 1e-12);
    assert!(lambda_threshold_in(&br, 0.5, Sign::One, l1 - 1e-9).is_err());
}

#[test]
fn rstar_near_one_fifth() {
    let (p, m) = rstar(&mode()).unwrap();
    assert!((p - 0.2).abs() <= 0.05, "{p}");
    assert!((m - 0.8).abs() <= 0.05, "{m}");
    assert!((p + m - 1.0).abs() < 1e-9);
}

#[test]
fn interior_solution_is_symmetric_and_ordered() {
    let md = mode();
    let (sp, sm) = rstar(&md).unwrap();
    for w0 in [0.002, 0.01, 0.05] {
        let s = interior_solve(0.31, w0, &md).unwrap();
        assert!((s.r0_plus + s.r0_minus - 1.0).abs() < 1e-6, "{s:?}");
        assert!(s.r0_plus < sp && sp < sm && sm < s.r0_minus, "{s:?}");
        assert!(s.lambda0_cap > 0.0 && !s.multiple);
        // both tangency equations hold at the solution
        let r = s.r0_plus;
        let e1 = s.lambda0_cap * md.r_bar(r, 1) - 0.31 * (r * (1.0 - r) + w0);
        let e2 = s.lambda0_cap * md.r_bar(r, 2) - 0.31 * (1.0 - 2.0 * r);
        assert!(e1.abs() < 1e-8 && e2.abs() < 1e-8, "{e1} {e2}");
    }
}

#[test]
fn tangency_migrates_to_the_wall_as_w0_vanishes() {
    let md = mode();
    let mut prev = f64::INFINITY;
    for w0 in [1e-2, 1e-3, 1e-4, 1e-5] {
        let s = interior_solve(0.31, w0, &md).unwrap();
        assert!(s.r0_plus < prev);
        prev = s.r0_plus;
    }
    assert!(prev < 1e-2, "{prev}");
    let cap = interior_solve(0.31, 1e-6, &md).unwrap().lambda0_cap;
    assert!((cap / boundary_threshold(0.31, &md).unwrap() - 1.0).abs() < 1e-2);
}

#[test]
fn interior_solve_errors() {
    let md = mode();
    assert!(interior_solve(0.31, 0.0, &md).is_err());
    assert!(interior_solve(0.0, 0.01, &md).is_err());
    assert!(matches!(interior_solve(1.0, -0.5, &md), Err(tcflow::Error::NoInteriorSeparation(_))));
}

#[test]
fn center_location_examples() {
    let md = mode();
    let cap = boundary_threshold(0.31, &md).unwrap();
    assert_eq!(center_location(0, cap, cap, &md).unwrap(), None);
    assert_eq!(center_location(0, 0.5 * cap, cap, &md).unwrap(), None);
    let even = center_location(0, 2.0 * cap, cap, &md).unwrap().unwrap();
    assert!(even > 0.0 && even < 0.5);
    let odd = center_location(1, 2.0 * cap, cap, &md).unwrap().unwrap();
    assert!(odd > 0.5 && odd < 1.0);
    assert!((even + odd - 1.0).abs() < 1e-9);
    assert!(center_location(0, 0.0, cap, &md).is_err());
    // large Lambda: the root tends to the zero of R'(r) / (r(1-r)) ratio, which
    // lies at the interior extremum of R on that half
    let far = center_location(0, 1e6 * cap, cap, &md).unwrap().unwrap();
    let next = center_location(0, 1e7 * cap, cap, &md).unwrap().unwrap();
    assert!((far - next).abs() < 1e-4);
}

#[test]
fn inequality_checks_pass() {
    let md = mode();
    let rep = inequality_checks(&md).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert_eq!(rep.samples, 1000);
    assert!(rep.worst_margin > 0.0);
    assert!(rep.sub_threshold_margin > 0.0);
    let at_wall = -md.r_bar(0.0, 3) / md.r_bar(0.0, 2);
    assert!(at_wall > 2.0 && (5.0..8.0).contains(&at_wall), "{at_wall}");
}

#[test]
fn predictions_carry_thresholds_and_ceiling() {
    let md = mode();
    let br = BifurcationBranch::new(0.0, 1.0, 0.55, 49.3, md.a).unwrap();
    let p = predict_boundary(0.31, 3.022, &md, Some(&br), DEFAULT_LAMBDA3_FACTOR).unwrap();
    assert_eq!(p.kind, SeparationKind::Boundary);
    assert_eq!(p.locations.len(), 3);
    let l1 = p.lambda1.unwrap();
    assert!(l1 > 49.3);
    assert!((p.lambda3.unwrap() - 1.5 * l1).abs() < 1e-12);
    let q = predict_interior(0.31, 0.01, 3.022, &md, None, DEFAULT_LAMBDA3_FACTOR).unwrap();
    assert_eq!(q.kind, SeparationKind::Interior);
    assert!(q.lambda1.is_none());
    assert_eq!(q.locations.len(), 3);
    assert!((q.r0_plus.unwrap() + q.r0_minus.unwrap() - 1.0).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn thresholds_exceed_onset(b in -0.5f64..0.5, c in 0.05f64..3.0, alpha in 0.05f64..2.0, cap in 0.0f64..2.0) {
        let br = BifurcationBranch::new(b, c, alpha, 45.0, 3.117).unwrap();
        let l1 = lambda_threshold(&br, cap, Sign::One).unwrap();
        let l2 = lambda_threshold(&br, cap, Sign::Two).unwrap();
        prop_assert!(l1 >= 45.0 && l2 >= 45.0 && l1 >= l2);
    }

    #[test]
    fn roots_found_for_shifted_sines(k in 1usize..20, s in 0.01f64..0.9) {
        let z = roots(|x| (k as f64 * PI * (x - s)).sin(), 0.0, 1.0);
        prop_assert!(!z.is_empty());
        for x in z {
            prop_assert!((k as f64 * PI * (x - s)).sin().abs() < 1e-9);
        }
    }
}
