use std::f64::consts::PI;

use proptest::prelude::*;
use tcflow::baseflow::NondimParams;
use tcflow::bifurcation::*;
use tcflow::boxmodel::{box_mode, cubic_coefficient_spectral, BoxOperator};
use tcflow::chandrasekhar::ChandrasekharMode;
use tcflow::field::Field;
use tcflow::linstab::critical_lambda;
use tcflow::separation::boundary_threshold;
use tcflow::Error;

fn branch(b: f64, c: f64) -> BifurcationBranch {
    BifurcationBranch::new(b, c, 2.0, 41.0, 3.117).unwrap()
}

#[test]
fn amplitude_examples() {
    let (s1, s2) = amplitudes(&branch(0.2, 1.0), 0.0, 0.01).unwrap();
    assert!((s1 - (0.08f64.sqrt() - 0.2) / 2.0).abs() < 1e-12);
    assert!((s2 - (0.08f64.sqrt() + 0.2) / 2.0).abs() < 1e-12);
    assert!((s1 - 0.04142).abs() < 1e-5 && (s2 - 0.24142).abs() < 1e-5);
    let (s1, s2) = amplitudes(&branch(0.0, 0.5), 0.0, 0.09).unwrap();
    assert!((s1 - 0.6).abs() < 1e-12 && (s2 - 0.6).abs() < 1e-12);
    let (s1, s2) = amplitudes(&branch(-0.3, 2.0), 0.0, 0.0).unwrap();
    assert_eq!(s1, 0.0);
    assert!((s2 - 0.15).abs() < 1e-12);
    assert!(matches!(amplitudes(&branch(0.1, 1.0), 0.0, -0.01), Err(Error::BelowSaddleNode(_))));
}

#[test]
fn saddle_node_examples() {
    assert_eq!(branch(0.0, 1.0).saddle_node(), None);
    let l = branch(0.1, 1.0).saddle_node().unwrap();
    assert!((l - (41.0 - 0.00125)).abs() < 1e-12);
    for b in [-0.4, 0.01, 0.3] {
        let br = branch(b, 1.0);
        let ls = br.saddle_node().unwrap();
        assert!(ls < 41.0);
        // the two states meet at the saddle node and do not exist below it
        let (s1, s2) = br.amplitudes(ls + 1e-9).unwrap();
        assert!((s1 - s2).abs() < 1e-4);
        assert!(br.amplitudes(ls - 1e-9).is_err());
    }
}

#[test]
fn branch_rejects_bad_constants() {
    assert!(BifurcationBranch::new(0.0, 0.0, 1.0, 41.0, 3.0).is_err());
    assert!(BifurcationBranch::new(0.0, 1.0, -1.0, 41.0, 3.0).is_err());
    assert!(BifurcationBranch::new(f64::NAN, 1.0, 1.0, 41.0, 3.0).is_err());
}

#[test]
fn calibration_round_trip() {
    let br = BifurcationBranch::new(0.07, 0.29, 0.55, 49.3, 3.117).unwrap();
    for lam in [49.35, 49.6, 51.0] {
        let (s1, s2) = br.amplitudes(lam).unwrap();
        let c1 = calibrate_c(0.07, 0.55, 49.3, lam, s1, Sign::One).unwrap();
        let c2 = calibrate_c(0.07, 0.55, 49.3, lam, s2, Sign::Two).unwrap();
        assert!((c1 - 0.29).abs() < 1e-12 && (c2 - 0.29).abs() < 1e-12);
    }
    assert!(calibrate_c(0.0, 0.55, 49.3, 49.4, 0.0, Sign::One).is_err());
}

fn mode() -> ChandrasekharMode {
    ChandrasekharMode::for_height(3.022, 0.0).wall_exact()
}

#[test]
fn zero_amplitude_field_is_pure_shear() {
    let br = branch(0.0, 1.0);
    let n = NondimParams::new(41.0, 0.31, 1.0, 0.02, 3.022);
    let v = model_field(&br, &n, &mode(), Sign::One, 41.0).unwrap();
    for (z, r) in [(0.3, 0.2), (1.7, 0.5), (2.9, 0.95)] {
        let x = v.value(z, r);
        assert!((x[0] + 0.31 * (r * (1.0 - r) + 0.02)).abs() < 1e-15);
        assert_eq!(x[1], 0.0);
    }
    assert!(model_field(&branch(0.1, 1.0), &n, &mode(), Sign::Two, 40.0).is_err());
}

#[test]
fn wall_shear_vanishes_at_the_threshold() {
    let m = mode();
    let n = NondimParams::new(41.0, 0.31, 1.0, 0.0, 3.022);
    let cap = boundary_threshold(0.31, &m).unwrap();
    let v = model_field_at(&n, &m, cap);
    for k in 0..2 {
        let z = (4 * k + 1) as f64 * PI / (2.0 * m.a);
        let d = v.derivs(z, 0.0);
        assert!(d[0][1][0].abs() < 1e-12, "{}", d[0][1][0]);
    }
    // and not elsewhere on the wall
    assert!(v.derivs(0.2, 0.0)[0][1][0].abs() > 1e-3);
}

#[test]
fn b_vanishes_for_the_symmetric_problem() {
    let n = NondimParams::new(41.0, 0.0, 1.0, 0.0, 1.0079);
    let sol = critical_lambda(&n, 48).unwrap();
    let (e, es) = sol.fields(161, 81);
    let b = b_coefficient(&e, &es).unwrap();
    let scale = e.norm() * e.norm() * es.norm();
    assert!(b.abs() < 1e-6 * scale, "b = {b}, scale {scale}");
}

#[test]
fn b_gauge_and_grid_checks() {
    let m = mode();
    let e = Field::from_fn(61, 31, 3.022, 0.0, |z, r| m.eigenfunction_bar(z, r));
    let es = Field::from_fn(61, 31, 3.022, 0.0, |z, r| {
        let (a, b, c) = m.eigenfunction_bar(z, r);
        (a + 0.3 * (z * r).sin(), b * r, c + z)
    });
    let b0 = b_coefficient(&e, &es).unwrap();
    assert!(b0.abs() > 1e-8);
    let inv = b0 / (e.norm().powi(2) * es.norm());
    for c in [-2.0, 0.5, 7.0] {
        let (f, fs) = (e.scaled(c), es.scaled(1.0 / c));
        let b = b_coefficient(&f, &fs).unwrap();
        assert!((b - c * b0).abs() < 1e-10 * b0.abs());
        assert!((b / (f.norm().powi(2) * fs.norm()) - inv * c.signum()).abs() < 1e-10 * inv.abs());
    }
    let other = Field::zeros(61, 30, 3.022, 0.0);
    assert!(b_coefficient(&e, &other).is_err());
}

#[test]
fn box_b_decreases_as_perturbation_halves() {
    // b needs both the through-flow and mu != 1; it goes away with mu -> 1
    let l = 1.0079;
    let mut seen = Vec::new();
    for j in 0..4 {
        let eps = 0.3 * 0.5f64.powi(j);
        let n = NondimParams::new(41.0, 2.0, 1.0 - eps, 0.05, l);
        let op = BoxOperator::new(&n, 6, 14, false);
        let lc = op.critical(30.0, 70.0).unwrap();
        let op = op.at_lambda(lc);
        let m = ChandrasekharMode::for_height(l, 0.0).wall_exact();
        let reference = op.space.project_function(|z, r| m.eigenfunction_bar(z, r)).unwrap();
        let bm = box_mode(&op, &reference).unwrap();
        seen.push(cubic_coefficient_spectral(&op.space, &bm.right, &bm.left).abs());
    }
    assert!(seen[0] > 1e-5, "{seen:?}");
    assert!(seen.windows(2).all(|w| w[1] < w[0]), "{seen:?}");
    assert!(seen[3] < 0.3 * seen[0], "{seen:?}");
}

#[test]
fn box_b_vanishes_without_throughflow_or_with_mu_one() {
    let l = 1.0079;
    for (g, mu) in [(0.0, 0.7), (2.0, 1.0)] {
        let n = NondimParams::new(41.0, g, mu, 0.05, l);
        let op = BoxOperator::new(&n, 6, 14, false);
        let lc = op.critical(30.0, 70.0).unwrap();
        let op = op.at_lambda(lc);
        let m = ChandrasekharMode::for_height(l, 0.0).wall_exact();
        let reference = op.space.project_function(|z, r| m.eigenfunction_bar(z, r)).unwrap();
        let bm = box_mode(&op, &reference).unwrap();
        let b = cubic_coefficient_spectral(&op.space, &bm.right, &bm.left);
        assert!(b.abs() < 1e-12, "gamma {g} mu {mu}: {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn amplitudes_are_nonnegative(b in -1.0f64..1.0, c in 0.05f64..5.0, beta in -0.2f64..2.0) {
        let br = branch(b, c);
        match amplitudes(&br, 0.0, beta) {
            Ok((s1, s2)) => {
                prop_assert!(s1 >= 0.0 && s2 >= s1);
                prop_assert!(b * b + 4.0 * beta >= 0.0);
            }
            Err(_) => prop_assert!(b * b + 4.0 * beta < 0.0),
        }
    }

    #[test]
    fn symmetric_pitchfork_product(c in 0.05f64..5.0, beta in 0.0f64..2.0) {
        let (s1, s2) = amplitudes(&branch(0.0, c), 0.0, beta).unwrap();
        prop_assert_eq!(s1, s2);
        prop_assert!((s1 * s2 * c * c - beta).abs() <= 1e-12 * (1.0 + beta));
    }

    #[test]
    fn amplitudes_are_monotone(b in -0.5f64..0.5, d1 in 0.0f64..1.0, d2 in 0.0f64..1.0) {
        let br = branch(b, 1.0);
        let (lo, hi) = (41.0 + d1.min(d2), 41.0 + d1.max(d2));
        let (a1, a2) = br.amplitudes(lo).unwrap();
        let (c1, c2) = br.amplitudes(hi).unwrap();
        prop_assert!(c1 >= a1 - 1e-15 && c2 >= a2 - 1e-15);
    }

    #[test]
    fn model_field_is_divergence_free(cap in 0.0f64..1.0, gamma in 0.0f64..2.0, w0 in -0.1f64..0.1, z in 0.0f64..3.022, r in 0.0f64..1.0) {
        let n = NondimParams::new(41.0, gamma, 1.0, w0, 3.022);
        let v = model_field_at(&n, &mode(), cap);
        let d = v.derivs(z, r);
        let div = d[1][0][0] + d[0][1][1];
        prop_assert!(div.abs() <= 1e-10 * (1.0 + cap * 100.0), "{div}");
    }

    #[test]
    fn vortical_part_is_no_slip(cap in 0.01f64..1.0, z in 0.0f64..3.022) {
        let m = ChandrasekharMode::for_height(3.022, 0.0);
        let n = NondimParams::new(41.0, 0.0, 1.0, 0.0, 3.022);
        let v = model_field_at(&n, &m, cap);
        for r in [0.0, 1.0] {
            let d = v.derivs(z, r);
            prop_assert!(d[0][0][0].abs() <= 5e-3 * cap && d[0][0][1].abs() <= 5e-3 * cap * m.a);
            prop_assert!(d[0][1][1].abs() <= 5e-3 * cap * m.a);
        }
    }
}
