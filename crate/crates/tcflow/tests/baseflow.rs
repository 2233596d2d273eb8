use proptest::prelude::*;
use tcflow::baseflow::*;
use tcflow::Error;

fn wide() -> PhysicalParams {
    PhysicalParams { r1: 1.0, r2: 2.0, omega1: 1.5, omega2: 0.1, nu: 2e-2, rho: 3.0, p0: -0.7, w0: 0.05, l: 3.1 }
}

// eighth-order central stencils
const D1: [f64; 9] = [1.0 / 280.0, -4.0 / 105.0, 0.2, -0.8, 0.0, 0.8, -0.2, 4.0 / 105.0, -1.0 / 280.0];
const D2: [f64; 9] = [-1.0 / 560.0, 8.0 / 315.0, -0.2, 1.6, -205.0 / 72.0, 1.6, -0.2, 8.0 / 315.0, -1.0 / 560.0];

fn stencil(f: impl Fn(f64) -> f64, r: f64, h: f64) -> (f64, f64, f64) {
    let vals: Vec<f64> = (0..9).map(|k| f(r + (k as f64 - 4.0) * h)).collect();
    let d1: f64 = D1.iter().zip(&vals).map(|(c, v)| c * v).sum::<f64>() / h;
    let d2: f64 = D2.iter().zip(&vals).map(|(c, v)| c * v).sum::<f64>() / (h * h);
    (vals[4], d1, d2)
}

#[test]
fn alpha_is_one_for_half_eta_squared() {
    let p = PhysicalParams { r1: 1.0, r2: 2f64.sqrt(), omega2: 0.0, ..wide() };
    let n = nondimensionalize(&p).unwrap();
    assert!((n.alpha - 1.0).abs() < 1e-12);
    assert!((n.t - n.lambda * n.lambda).abs() < 1e-9 * n.t);
}

#[test]
fn large_radius_alpha_limit() {
    // (1 - mu) r1 = 2 + delta in gap units; the exact expansion gives delta / 2
    let delta = 0.3;
    let mut prev = f64::INFINITY;
    for r1 in [1e2, 1e3, 1e4, 1e5] {
        let mu = 1.0 - (2.0 + delta) / r1;
        let p = PhysicalParams { r1, r2: r1 + 1.0, omega1: 1.0, omega2: mu, nu: 1.0, rho: 1.0, p0: 0.0, w0: 0.0, l: 3.1 };
        let n = nondimensionalize(&p).unwrap();
        let err = (n.alpha - delta / 2.0).abs();
        assert!(err < prev);
        prev = err;
    }
    assert!(prev < 1e-4, "{prev}");
}

#[test]
fn zero_pressure_gradient_gives_zero_axial_flow() {
    let p = PhysicalParams { p0: 0.0, ..wide() };
    let n = nondimensionalize(&p).unwrap();
    assert_eq!(n.gamma, 0.0);
    for i in 0..=10 {
        assert_eq!(narrow_gap_baseflow(&n, i as f64 / 10.0).unwrap(), 0.0);
        assert_eq!(cp_profile(&p, 1.0 + i as f64 / 10.0).unwrap().w, 0.0);
    }
}

#[test]
fn preconditions_and_degenerate_heights() {
    let p = PhysicalParams { omega2: 1.0, ..wide() };
    assert!(matches!(nondimensionalize(&p), Err(Error::InstabilityPrecondition { .. })));
    let unit = height_unit();
    let p = PhysicalParams { l: 3.0 * unit, ..wide() };
    assert!(matches!(nondimensionalize(&p), Err(Error::DegenerateHeight { k: 3, .. })));
    let p = PhysicalParams { l: 3.0 * unit * (1.0 + 0.01), ..wide() };
    assert!(nondimensionalize(&p).is_ok());
    assert!(nondimensionalize_with(&p, 0.1).is_err());
    let p = PhysicalParams { r2: 0.5, ..wide() };
    assert!(nondimensionalize(&p).is_err());
}

#[test]
fn wall_values() {
    let p = wide();
    let a = cp_profile(&p, p.r1).unwrap();
    let b = cp_profile(&p, p.r2).unwrap();
    assert!((a.v - p.r1 * p.omega1).abs() < 1e-12);
    assert!((b.v - p.r2 * p.omega2).abs() < 1e-12);
    assert!((a.w + p.p0 * p.w0 / (4.0 * p.rho * p.nu)).abs() < 1e-12);
    assert!(matches!(cp_profile(&p, 2.5), Err(Error::Domain(_))));
    assert!(matches!(cp_profile(&p, 0.99), Err(Error::Domain(_))));
}

#[test]
fn azimuthal_profile_solves_its_ode() {
    let p = wide();
    let v = |r: f64| cp_profile(&p, r).unwrap().v;
    for i in 0..=20 {
        let r = 1.1 + 0.8 * i as f64 / 20.0;
        let (f, d1, d2) = stencil(v, r, 0.01);
        let res = d2 + d1 / r - f / (r * r);
        let scale = d2.abs() + (d1 / r).abs() + (f / (r * r)).abs();
        assert!(res.abs() < 1e-10 * scale, "r={r} res={res}");
    }
}

#[test]
fn axial_profile_solves_its_ode() {
    let p = wide();
    let w = |r: f64| cp_profile(&p, r).unwrap().w;
    let rhs = p.p0 / p.rho;
    for i in 0..=20 {
        let r = 1.1 + 0.8 * i as f64 / 20.0;
        let (_, d1, d2) = stencil(w, r, 0.01);
        let res = p.nu * (d2 + d1 / r) - rhs;
        assert!(res.abs() < 1e-10 * rhs.abs(), "r={r} res={res}");
    }
}

#[test]
fn pressure_balances_centrifugal_force() {
    let p = wide();
    for i in 1..10 {
        let r = 1.0 + i as f64 / 10.0;
        let (_, d1, _) = stencil(|s| cp_profile(&p, s).unwrap().p, r, 0.005);
        let c = cp_profile(&p, r).unwrap();
        assert!((d1 - c.dp_dr).abs() < 1e-9 * c.dp_dr.abs());
    }
}

#[test]
fn narrow_gap_examples() {
    let n = NondimParams::new(0.0, 1.0, 1.0, 0.0, 1.0);
    assert!((narrow_gap_baseflow(&n, 0.5).unwrap() + 0.25).abs() < 1e-15);
    assert_eq!(narrow_gap_baseflow(&n, 0.0).unwrap(), 0.0);
    assert_eq!(narrow_gap_baseflow(&n, 1.0).unwrap(), 0.0);
    let n = NondimParams::new(0.0, 2.0, 1.0, 0.3, 1.0);
    assert!((narrow_gap_baseflow(&n, 0.0).unwrap() + 0.6).abs() < 1e-15);
    assert!(matches!(narrow_gap_baseflow(&n, 1.2), Err(Error::Domain(_))));
}

proptest! {
    #[test]
    fn narrow_gap_profile_is_symmetric(gamma in -5.0f64..5.0, w0 in -1.0f64..1.0, r in 0.0f64..=1.0) {
        let n = NondimParams::new(40.0, gamma, 1.0, w0, 3.0);
        let a = narrow_gap_baseflow(&n, r).unwrap();
        let b = narrow_gap_baseflow(&n, 1.0 - r).unwrap();
        prop_assert!((a - b).abs() <= 1e-14 * (1.0 + a.abs()));
    }

    #[test]
    fn nondimensional_groups_are_consistent(r1 in 0.5f64..5.0, gap in 0.05f64..1.0, om in 0.1f64..10.0, frac in -0.5f64..0.9) {
        let r2 = r1 + gap;
        let eta2 = (r1 / r2).powi(2);
        let p = PhysicalParams { r1, r2, omega1: om, omega2: frac * eta2 * om, nu: 0.01, rho: 1.0, p0: 0.2, w0: 0.0, l: 1.234 * gap };
        let n = nondimensionalize(&p).unwrap();
        prop_assert!(n.alpha > 0.0);
        prop_assert!((n.l - 1.234).abs() < 1e-12);
        prop_assert!((n.lambda * n.lambda - n.t).abs() <= 1e-9 * n.t);
        prop_assert!((n.r1 - r1 / gap).abs() < 1e-12 * n.r1);
    }
}
