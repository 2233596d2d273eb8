//! Couette-Poiseuille base state and parameter scaling.
//!
//! The axial momentum balance reads nu (d/dr + 1/r) dW/dr = p0 / rho. Some
//! printings carry `p0/p` on the right; the density is the only reading that
//! is dimensionally consistent and reproduces the closed-form W below.

use crate::chandrasekhar::{degenerate_height_check, ALPHA0};
use crate::error::{Error, Result};
use crate::spectral::gauss_legendre;

/// Default exclusion half-width around L_k, in units of pi/alpha0.
pub const DEFAULT_HEIGHT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub r1: f64,
    pub r2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub nu: f64,
    pub rho: f64,
    /// Axial pressure gradient dp/dz.
    pub p0: f64,
    pub w0: f64,
    pub l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NondimParams {
    pub lambda: f64,
    pub t: f64,
    pub gamma: f64,
    pub mu: f64,
    pub alpha: f64,
    pub w0: f64,
    pub l: f64,
    pub r1: f64,
}

impl NondimParams {
    /// Parameters given directly in gap units (alpha is irrelevant to the
    /// narrow-gap operator and set to 1).
    pub fn new(lambda: f64, gamma: f64, mu: f64, w0: f64, l: f64) -> Self {
        NondimParams { lambda, t: lambda * lambda, gamma, mu, alpha: 1.0, w0, l, r1: 0.0 }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self.t = lambda * lambda;
        self
    }

    pub fn validate(&self, height_tol: f64) -> Result<()> {
        if !(self.l > 0.0) || !self.l.is_finite() {
            return Err(Error::Invalid(format!("L = {} must be positive", self.l)));
        }
        if !self.gamma.is_finite() || !self.lambda.is_finite() || !self.w0.is_finite() {
            return Err(Error::Invalid("non-finite parameter".into()));
        }
        degenerate_height_check(self.l, height_tol)
    }
}

impl PhysicalParams {
    pub fn gap(&self) -> f64 {
        self.r2 - self.r1
    }
    pub fn eta(&self) -> f64 {
        self.r1 / self.r2
    }
    pub fn mu(&self) -> f64 {
        self.omega2 / self.omega1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r1 > 0.0 && self.r2 > self.r1) {
            return Err(Error::Invalid(format!("need 0 < r1 < r2, got r1={} r2={}", self.r1, self.r2)));
        }
        if !(self.nu > 0.0 && self.rho > 0.0 && self.l > 0.0) {
            return Err(Error::Invalid("nu, rho and L must be positive".into()));
        }
        if self.omega1 == 0.0 {
            return Err(Error::Invalid("Omega1 must be nonzero".into()));
        }
        let (eta2, mu) = (self.eta().powi(2), self.mu());
        if eta2 <= mu {
            return Err(Error::InstabilityPrecondition { eta2, mu });
        }
        Ok(())
    }
}

pub fn nondimensionalize(p: &PhysicalParams) -> Result<NondimParams> {
    nondimensionalize_with(p, DEFAULT_HEIGHT_TOL)
}

pub fn nondimensionalize_with(p: &PhysicalParams, height_tol: f64) -> Result<NondimParams> {
    p.validate()?;
    let d = p.gap();
    let eta2 = p.eta().powi(2);
    let mu = p.mu();
    let alpha = (eta2 - mu) / (1.0 - eta2);
    let t = 4.0 * alpha * p.omega1 * p.omega1 * d.powi(4) / (p.nu * p.nu);
    let n = NondimParams {
        lambda: t.sqrt(),
        t,
        gamma: p.p0 * d.powi(3) / (4.0 * p.rho * p.nu * p.nu),
        mu,
        alpha,
        w0: p.w0 / (d * d),
        l: p.l / d,
        r1: p.r1 / d,
    };
    degenerate_height_check(n.l, height_tol)?;
    Ok(n)
}

/// Base-state values at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpProfile {
    pub v: f64,
    pub w: f64,
    pub dp_dr: f64,
    /// p(r) - p(r1).
    pub p: f64,
}

fn azimuthal(p: &PhysicalParams, r: f64) -> f64 {
    let eta2 = p.eta().powi(2);
    let mu = p.mu();
    p.omega1 / (1.0 - eta2) * (p.r1 * p.r1 * (1.0 - mu) / r - (eta2 - mu) * r)
}

fn axial(p: &PhysicalParams, r: f64) -> f64 {
    let d = p.gap();
    let c = (2.0 * p.r1 * d + d * d) / (1.0 + d / p.r1).ln();
    -p.p0 / (4.0 * p.rho * p.nu) * (p.r1 * p.r1 - r * r + c * (r / p.r1).ln() + p.w0)
}

pub fn cp_profile(p: &PhysicalParams, r: f64) -> Result<CpProfile> {
    let tol = 1e-12 * p.r2;
    if r < p.r1 - tol || r > p.r2 + tol {
        return Err(Error::Domain(format!("r = {r} outside [{}, {}]", p.r1, p.r2)));
    }
    let v = azimuthal(p, r);
    let (x, w) = gauss_legendre(48);
    let half = 0.5 * (r - p.r1);
    let pressure: f64 = x
        .iter()
        .zip(&w)
        .map(|(t, wi)| {
            let s = p.r1 + half * (t + 1.0);
            wi * half * p.rho * azimuthal(p, s).powi(2) / s
        })
        .sum();
    Ok(CpProfile { v, w: axial(p, r), dp_dr: p.rho * v * v / r, p: pressure })
}

/// Narrow-gap axial base flow W(rbar) = -gamma (rbar (1 - rbar) + W0).
pub fn narrow_gap_baseflow(n: &NondimParams, rbar: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rbar) {
        return Err(Error::Domain(format!("rbar = {rbar} outside [0, 1]")));
    }
    Ok(-n.gamma * (rbar * (1.0 - rbar) + n.w0))
}

/// Unit used by the degenerate-height rule.
pub fn height_unit() -> f64 {
    std::f64::consts::PI / ALPHA0
}
