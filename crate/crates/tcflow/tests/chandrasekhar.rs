use std::f64::consts::PI;

use proptest::prelude::*;
use tcflow::chandrasekhar::*;
use tcflow::spectral::gauss_legendre;
use tcflow::Error;

fn raw() -> ChandrasekharMode {
    ChandrasekharMode::with_wavenumber(PREFERRED_WAVENUMBER, 1, 0.0)
}

#[test]
fn wavenumber_rule() {
    assert_eq!(select_wavenumber(PI), (3, 3.0));
    let (k, a) = select_wavenumber(2.0 * PI);
    assert_eq!(k, 6);
    assert!((a - 3.0).abs() < 1e-14);
    for l in [0.3, 1.0, 10.0, 17.77, 123.4] {
        let best = (1..=1000usize)
            .min_by(|&i, &j| {
                let d = |k: usize| (k as f64 * PI / l - PREFERRED_WAVENUMBER).abs();
                d(i).total_cmp(&d(j))
            })
            .unwrap();
        let (k, a) = select_wavenumber(l);
        assert_eq!(k, best, "L = {l}");
        assert!((a - k as f64 * PI / l).abs() < 1e-14);
    }
}

#[test]
fn tabulated_coefficients() {
    let m = raw();
    assert_eq!((m.beta1, m.beta2), (0.06151664, 0.10388700));
    assert_eq!((m.alpha0, m.alpha1, m.alpha2), (3.973639, 5.195214, 2.126096));
}

#[test]
fn wall_conditions_hold_to_coefficient_truncation() {
    let m = raw();
    for x in [-0.5, 0.5] {
        assert!(m.deriv_x(x, 0).abs() <= 5e-3, "R({x}) = {}", m.deriv_x(x, 0));
        assert!(m.deriv_x(x, 1).abs() <= 5e-3, "R'({x}) = {}", m.deriv_x(x, 1));
    }
    let e = m.wall_exact();
    for x in [-0.5, 0.5] {
        assert!(e.deriv_x(x, 0).abs() < 1e-12 && e.deriv_x(x, 1).abs() < 1e-12);
    }
}

#[test]
fn wall_derivative_bands() {
    for m in [raw(), raw().wall_exact()] {
        let c = m.r_eval(0.0, 2).unwrap();
        assert!((26.0..=33.0).contains(&c), "R'' = {c}");
        let d = m.r_eval(0.0, 3).unwrap();
        assert!((-210.0..=-160.0).contains(&d), "R''' = {d}");
    }
    assert!((raw().r_eval(0.5, 0).unwrap() - (1.0 - BETA1)).abs() < 1e-15);
}

#[test]
fn r_eval_domain() {
    let m = ChandrasekharMode::with_wavenumber(3.117, 1, 5.0);
    assert!(m.r_eval(5.0, 3).is_ok() && m.r_eval(6.0, 0).is_ok());
    assert!(matches!(m.r_eval(4.9, 0), Err(Error::Domain(_))));
    assert!(matches!(m.r_eval(6.1, 0), Err(Error::Domain(_))));
    assert!(matches!(m.r_eval(5.5, 4), Err(Error::Invalid(_))));
    assert!(m.limiting_eigenfunction(0.2, 4.0).is_err());
}

#[test]
fn limiting_eigenvalue_near_1708() {
    let m = raw();
    let l2 = m.lambda0 * m.lambda0;
    assert!((l2 - 1708.0).abs() < 0.01 * 1708.0, "{l2}");
    assert!(m.ode_residual_at(1707.76) <= 2e-2, "{}", m.ode_residual_at(1707.76));
    // the fitted value minimizes the residual
    let r0 = m.ode_residual();
    assert!(r0 <= m.ode_residual_at(l2 * 1.01) && r0 <= m.ode_residual_at(l2 * 0.99));
    assert!(m.ode_residual_at(0.0) > 0.5);
}

#[test]
fn residual_invariant_under_scaling() {
    // explicit evaluation of the residual for c R
    let m = raw();
    let (x, w) = gauss_legendre(64);
    let a2 = m.a * m.a;
    let l2 = 1707.76;
    let rel = |c: f64| {
        let (mut num, mut den) = (0.0, 0.0);
        for (t, wi) in x.iter().zip(&w) {
            let y = 0.5 * t;
            let d = |n: u32| c * m.deriv_x(y, n);
            let s = d(6) - 3.0 * a2 * d(4) + 3.0 * a2 * a2 * d(2) - a2 * a2 * a2 * d(0);
            num += wi * (s + a2 * l2 * d(0)).powi(2);
            den += wi * s * s;
        }
        (num / den).sqrt()
    };
    assert!((rel(1.0) - m.ode_residual_at(l2)).abs() < 1e-12);
    for c in [-3.0, 1e-3, 250.0] {
        assert!((rel(c) - rel(1.0)).abs() < 1e-12);
    }
}

#[test]
fn eigenfunction_examples() {
    let m = raw();
    let l = PI / m.a;
    // cos(az) = 0
    let z = PI / (2.0 * m.a);
    for r in [0.1, 0.4, 0.77] {
        let (_, ur, ut) = m.limiting_eigenfunction(z, r).unwrap();
        assert!(ur.abs() < 1e-14 && ut.abs() < 1e-14);
    }
    // walls
    for r in [0.0, 1.0] {
        for i in 0..=20 {
            let (uz, ur, ut) = m.limiting_eigenfunction(l * i as f64 / 20.0, r).unwrap();
            assert!(uz.abs() <= 5e-3 && ur.abs() <= 5e-3 && ut.abs() <= 5e-3, "{uz} {ur} {ut}");
        }
    }
    // end caps
    for r in [0.2, 0.5, 0.9] {
        for zc in [0.0, l] {
            assert!(m.limiting_eigenfunction(zc, r).unwrap().0.abs() < 1e-14);
            let h = 1e-6;
            let a = m.eigenfunction_bar(zc + h, r);
            let b = m.eigenfunction_bar(zc - h, r);
            assert!(((a.1 - b.1) / (2.0 * h)).abs() < 1e-6);
            assert!(((a.2 - b.2) / (2.0 * h)).abs() < 1e-6);
        }
    }
}

#[test]
fn eigenfunction_is_divergence_free() {
    let m = raw();
    let h = 1e-5;
    for i in 1..10 {
        for j in 1..10 {
            let (z, r) = (0.1 * i as f64, 0.1 * j as f64);
            let duz = (m.eigenfunction_bar(z + h, r).0 - m.eigenfunction_bar(z - h, r).0) / (2.0 * h);
            let dur = (m.eigenfunction_bar(z, r + h).1 - m.eigenfunction_bar(z, r - h).1) / (2.0 * h);
            assert!((duz + dur).abs() < 1e-8, "{}", duz + dur);
        }
    }
}

#[test]
fn rotation_form_is_positive() {
    // <B u0, u0> = 2 int u_r u_theta over one wavelength and the gap
    let m = raw().wall_exact();
    let (x, w) = gauss_legendre(48);
    let lz = 2.0 * PI / m.a;
    let mut s = 0.0;
    let mut lap2 = 0.0;
    for (ti, wi) in x.iter().zip(&w) {
        let r = 0.5 * (ti + 1.0);
        for (tj, wj) in x.iter().zip(&w) {
            let z = 0.5 * lz * (tj + 1.0);
            let (_, ur, ut) = m.eigenfunction_bar(z, r);
            s += 2.0 * wi * wj * 0.25 * lz * ur * ut;
        }
        let d = m.r_bar(r, 2) - m.a * m.a * m.r_bar(r, 0);
        lap2 += 0.5 * wi * d * d;
    }
    assert!(s > 0.0);
    // integration by parts: the form is int |(D^2 - a^2) R|^2 / (a^2 lambda0) times the z average
    let expect = lap2 / (m.a * m.a * m.lambda0) * lz;
    assert!((s - expect).abs() < 1e-8 * expect, "{s} vs {expect}");
}

#[test]
fn degenerate_heights() {
    let unit = PI / ALPHA0;
    for k in 1..5 {
        let lk = k as f64 * unit;
        assert!(matches!(degenerate_height_check(lk, 1e-3), Err(Error::DegenerateHeight { .. })));
        assert!(degenerate_height_check(lk + 2e-3 * unit, 1e-3).is_ok());
    }
}

proptest! {
    #[test]
    fn parity_in_x(x in 0.0f64..0.5) {
        let m = raw();
        for n in 0..4u32 {
            let (p, q) = (m.deriv_x(x, n), m.deriv_x(-x, n));
            let expect = if n % 2 == 0 { p } else { -p };
            prop_assert!((q - expect).abs() <= 1e-12 * (1.0 + p.abs()), "n={n}: {p} {q}");
        }
    }

    #[test]
    fn derivatives_match_differences(r in 0.01f64..0.99) {
        let m = raw();
        let h = 1e-5;
        for n in 1..=3u32 {
            let fd = (m.r_bar(r + h, n - 1) - m.r_bar(r - h, n - 1)) / (2.0 * h);
            let an = m.r_bar(r, n);
            let scale = an.abs().max(m.r_bar(r, n - 1).abs()).max(1.0);
            prop_assert!((fd - an).abs() <= 1e-6 * scale, "n={n}: {fd} vs {an}");
        }
    }
}
