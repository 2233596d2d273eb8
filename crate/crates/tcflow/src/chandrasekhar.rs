//! Closed-form limiting eigenprofile of the narrow-gap Taylor problem.
//!
//! R(x) = cos(a0 x) - b1 cosh(a1 x) cos(a2 x) + b2 sinh(a1 x) sin(a2 x), x = rbar - 1/2.
//!
//! The hyperbolic part is Re[(-b1 - i b2) cosh(p x)] with p = a1 + i a2, which
//! gives derivatives of any order in closed form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::gauss_legendre;

/// Wavenumber the wavenumber rule aims for.
pub const PREFERRED_WAVENUMBER: f64 = 3.117;

pub const BETA1: f64 = 0.06151664;
pub const BETA2: f64 = 0.10388700;
pub const ALPHA0: f64 = 3.973639;
pub const ALPHA1: f64 = 5.195214;
pub const ALPHA2: f64 = 2.126096;

/// Slack allowed on the radial domain check.
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChandrasekharMode {
    pub beta1: f64,
    pub beta2: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub a: f64,
    pub k: usize,
    pub lambda0: f64,
    pub r1: f64,
}

/// `K = argmin_k |k pi / L - 3.117|`, ties to the smaller `k`.
pub fn select_wavenumber(l: f64) -> (usize, f64) {
    assert!(l > 0.0, "height must be positive");
    let guess = (PREFERRED_WAVENUMBER * l / std::f64::consts::PI).floor().max(1.0) as usize;
    let mut best = (1usize, f64::INFINITY);
    for k in guess.saturating_sub(1).max(1)..=guess + 2 {
        let d = (k as f64 * std::f64::consts::PI / l - PREFERRED_WAVENUMBER).abs();
        if d < best.1 {
            best = (k, d);
        }
    }
    (best.0, best.0 as f64 * std::f64::consts::PI / l)
}

impl ChandrasekharMode {
    /// Tabulated coefficients at wavenumber `a`, with lambda0 fitted by least squares.
    pub fn with_wavenumber(a: f64, k: usize, r1: f64) -> Self {
        let mut m = ChandrasekharMode {
            beta1: BETA1,
            beta2: BETA2,
            alpha0: ALPHA0,
            alpha1: ALPHA1,
            alpha2: ALPHA2,
            a,
            k,
            lambda0: 0.0,
            r1,
        };
        m.lambda0 = m.fit_lambda0();
        m
    }

    /// Mode for a cylinder of height `l` using the wavenumber rule.
    pub fn for_height(l: f64, r1: f64) -> Self {
        let (k, a) = select_wavenumber(l);
        Self::with_wavenumber(a, k, r1)
    }

    /// Same exponents, with (beta1, beta2) re-solved so that R(1/2) = R'(1/2) = 0
    /// hold to round-off. The tabulated eight-digit values leave R'(r1) ~ -1.4e-3,
    /// which is enough to create spurious zeros of the model fields a few
    /// 1e-4 from the wall.
    pub fn wall_exact(mut self) -> Self {
        let p = Complex64::new(self.alpha1, self.alpha2);
        let x = 0.5;
        let ch = (p * x).cosh();
        let sh = p * (p * x).sinh();
        // R = cos(a0 x) + Re[(-b1 - i b2) ch]  =  cos - b1 Re ch + b2 Im ch
        // R' = -a0 sin(a0 x) - b1 Re sh + b2 Im sh
        let (c0, d0) = ((self.alpha0 * x).cos(), -self.alpha0 * (self.alpha0 * x).sin());
        let (m11, m12, m21, m22) = (-ch.re, ch.im, -sh.re, sh.im);
        let det = m11 * m22 - m12 * m21;
        self.beta1 = (-c0 * m22 + d0 * m12) / det;
        self.beta2 = (-m11 * d0 + m21 * c0) / det;
        self.lambda0 = self.fit_lambda0();
        self
    }

    /// n-th derivative of R with respect to x (equivalently r), any order.
    pub fn deriv_x(&self, x: f64, n: u32) -> f64 {
        let trig = self.alpha0.powi(n as i32)
            * (self.alpha0 * x + n as f64 * std::f64::consts::FRAC_PI_2).cos();
        let p = Complex64::new(self.alpha1, self.alpha2);
        let hyp = if n % 2 == 0 { (p * x).cosh() } else { (p * x).sinh() };
        let c = Complex64::new(-self.beta1, -self.beta2) * p.powu(n) * hyp;
        trig + c.re
    }

    /// R, R', R'' or R''' at radius `r` in [r1, r1 + 1].
    pub fn r_eval(&self, r: f64, deriv: u32) -> Result<f64> {
        if deriv > 3 {
            return Err(Error::Invalid(format!("derivative order {deriv} > 3")));
        }
        let rbar = r - self.r1;
        if !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&rbar) {
            return Err(Error::Domain(format!("r = {r} outside [{}, {}]", self.r1, self.r1 + 1.0)));
        }
        Ok(self.deriv_x(rbar - 0.5, deriv))
    }

    /// Unchecked evaluation in the gap coordinate rbar = r - r1.
    #[inline]
    pub fn r_bar(&self, rbar: f64, deriv: u32) -> f64 {
        self.deriv_x(rbar - 0.5, deriv)
    }

    /// (D^2 - a^2)^3 R at x.
    fn sixth_order(&self, x: f64) -> f64 {
        let a2 = self.a * self.a;
        self.deriv_x(x, 6) - 3.0 * a2 * self.deriv_x(x, 4) + 3.0 * a2 * a2 * self.deriv_x(x, 2)
            - a2 * a2 * a2 * self.deriv_x(x, 0)
    }

    /// (D^2 - a^2)^2 R in the gap coordinate.
    pub fn fourth_order_bar(&self, rbar: f64) -> f64 {
        let x = rbar - 0.5;
        let a2 = self.a * self.a;
        self.deriv_x(x, 4) - 2.0 * a2 * self.deriv_x(x, 2) + a2 * a2 * self.deriv_x(x, 0)
    }

    fn fit_lambda0(&self) -> f64 {
        let (nodes, weights) = gauss_legendre(64);
        let (mut pr, mut rr) = (0.0, 0.0);
        for (t, w) in nodes.iter().zip(&weights) {
            let x = 0.5 * t;
            let r = self.deriv_x(x, 0);
            pr += w * self.sixth_order(x) * r;
            rr += w * r * r;
        }
        let l2 = -pr / rr / (self.a * self.a);
        l2.max(0.0).sqrt()
    }

    /// Relative L2 residual of (D^2 - a^2)^3 R + a^2 lambda0^2 R over the gap.
    pub fn ode_residual(&self) -> f64 {
        self.ode_residual_at(self.lambda0 * self.lambda0)
    }

    pub fn ode_residual_at(&self, lambda0_sq: f64) -> f64 {
        let (nodes, weights) = gauss_legendre(64);
        let a2 = self.a * self.a;
        let (mut num, mut den) = (0.0, 0.0);
        for (t, w) in nodes.iter().zip(&weights) {
            let x = 0.5 * t;
            let s = self.sixth_order(x);
            let res = s + a2 * lambda0_sq * self.deriv_x(x, 0);
            num += w * res * res;
            den += w * s * s;
        }
        (num / den).sqrt()
    }

    /// Limiting eigenfunction (u_z, u_r, u_theta) at (z, r).
    pub fn limiting_eigenfunction(&self, z: f64, r: f64) -> Result<(f64, f64, f64)> {
        let rbar = r - self.r1;
        if !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&rbar) || z < -DOMAIN_SLACK {
            return Err(Error::Domain(format!("(z, r) = ({z}, {r}) outside the domain")));
        }
        Ok(self.eigenfunction_bar(z, rbar))
    }

    pub fn eigenfunction_bar(&self, z: f64, rbar: f64) -> (f64, f64, f64) {
        let (s, c) = (self.a * z).sin_cos();
        let uz = s * self.r_bar(rbar, 1) / self.a;
        let ur = -c * self.r_bar(rbar, 0);
        let ut = -c * self.fourth_order_bar(rbar) / (self.a * self.a * self.lambda0);
        (uz, ur, ut)
    }

    /// Inner-wall curvature R''(r1).
    pub fn wall_curvature(&self) -> f64 {
        self.r_bar(0.0, 2)
    }
}

/// Heights L_k = k pi / alpha0 at which the leading eigenvalue is double.
pub fn degenerate_height_check(l: f64, tol: f64) -> Result<()> {
    let unit = std::f64::consts::PI / ALPHA0;
    let k = (l / unit).round().max(1.0) as usize;
    let lk = k as f64 * unit;
    if (l - lk).abs() <= tol * unit {
        return Err(Error::DegenerateHeight { l, k, lk, tol: tol * unit });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumber_examples() {
        assert_eq!(select_wavenumber(std::f64::consts::PI), (3, 3.0));
        let (k, a) = select_wavenumber(2.0 * std::f64::consts::PI);
        assert_eq!(k, 6);
        assert!((a - 3.0).abs() < 1e-14);
    }

    #[test]
    fn centre_value() {
        let m = ChandrasekharMode::with_wavenumber(3.117, 1, 0.0);
        assert!((m.r_eval(0.5, 0).unwrap() - (1.0 - BETA1)).abs() < 1e-15);
    }

    #[test]
    fn out_of_gap_is_domain_error() {
        let m = ChandrasekharMode::with_wavenumber(3.117, 1, 2.0);
        assert!(matches!(m.r_eval(1.9, 0), Err(Error::Domain(_))));
        assert!(matches!(m.r_eval(2.5, 4), Err(Error::Invalid(_))));
    }

    #[test]
    fn wall_exact_refit_closes_wall_conditions() {
        let m = ChandrasekharMode::with_wavenumber(3.117, 1, 0.0).wall_exact();
        assert!(m.r_bar(0.0, 0).abs() < 1e-13);
        assert!(m.r_bar(0.0, 1).abs() < 1e-12);
        assert!((m.beta1 - BETA1).abs() < 1e-4 && (m.beta2 - BETA2).abs() < 1e-4);
    }

    #[test]
    fn degenerate_heights_rejected() {
        let unit = std::f64::consts::PI / ALPHA0;
        assert!(degenerate_height_check(2.0 * unit, 1e-3).is_err());
        assert!(degenerate_height_check(2.0 * unit + 0.01, 1e-3).is_ok());
    }
}
