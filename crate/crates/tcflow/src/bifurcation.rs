//! The bifurcated branch near onset: cubic-interaction coefficient b,
//! amplitudes, the saddle-node point and the leading-order model fields.

use std::f64::consts::FRAC_PI_2;

use crate::baseflow::NondimParams;
use crate::chandrasekhar::ChandrasekharMode;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::topology::FieldView;

/// Which of the two bifurcated states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    /// Smaller amplitude, exists for lambda >= lambda0.
    One,
    /// Larger amplitude, exists from the saddle-node on.
    Two,
}

impl Sign {
    fn pm(self) -> f64 {
        match self {
            Sign::One => -1.0,
            Sign::Two => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifurcationBranch {
    pub b: f64,
    /// Amplitude normalization (positive).
    pub c: f64,
    pub alpha_eps: f64,
    pub lambda0_eps: f64,
    /// Axial wavenumber of the critical mode.
    pub a: f64,
}

impl BifurcationBranch {
    pub fn new(b: f64, c: f64, alpha_eps: f64, lambda0_eps: f64, a: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Invalid(format!("C = {c} must be positive")));
        }
        if !(alpha_eps > 0.0) {
            return Err(Error::Invalid(format!("alpha_eps = {alpha_eps} must be positive")));
        }
        if !(a > 0.0) || !b.is_finite() || !lambda0_eps.is_finite() {
            return Err(Error::Invalid("invalid branch data".into()));
        }
        Ok(BifurcationBranch { b, c, alpha_eps, lambda0_eps, a })
    }

    /// Linearized leading eigenvalue alpha (lambda - lambda0).
    pub fn beta1(&self, lambda: f64) -> f64 {
        self.alpha_eps * (lambda - self.lambda0_eps)
    }

    pub fn amplitudes(&self, lambda: f64) -> Result<(f64, f64)> {
        amplitudes(self, lambda, self.beta1(lambda))
    }

    pub fn saddle_node(&self) -> Option<f64> {
        saddle_node(self)
    }

    /// Lambda of the model field for one of the two states: sigma / a.
    pub fn big_lambda(&self, lambda: f64, sign: Sign) -> Result<f64> {
        let (s1, s2) = self.amplitudes(lambda)?;
        Ok(match sign {
            Sign::One => s1,
            Sign::Two => s2,
        } / self.a)
    }
}

/// Leading-order amplitudes (sqrt(b^2 + 4 beta1) -/+ |b|) / 2C. Between the
/// saddle-node and lambda0 the first one is the magnitude of the unstable
/// partner, |sqrt(b^2 + 4 beta1) - |b|| / 2C.
pub fn amplitudes(branch: &BifurcationBranch, _lambda: f64, beta1: f64) -> Result<(f64, f64)> {
    let d = branch.b * branch.b + 4.0 * beta1;
    if d < 0.0 {
        return Err(Error::BelowSaddleNode(d));
    }
    let s = d.sqrt();
    let b = branch.b.abs();
    Ok(((s - b).abs() / (2.0 * branch.c), (s + b) / (2.0 * branch.c)))
}

/// lambda* = lambda0 - b^2 / (4 alpha), absent for b = 0.
pub fn saddle_node(branch: &BifurcationBranch) -> Option<f64> {
    if branch.b == 0.0 {
        None
    } else {
        Some(branch.lambda0_eps - branch.b * branch.b / (4.0 * branch.alpha_eps))
    }
}

/// C from a measured steady amplitude at one lambda (inverse of the
/// amplitude formula for the given state).
pub fn calibrate_c(b: f64, alpha_eps: f64, lambda0_eps: f64, lambda: f64, sigma: f64, sign: Sign) -> Result<f64> {
    let d = b * b + 4.0 * alpha_eps * (lambda - lambda0_eps);
    if d < 0.0 {
        return Err(Error::BelowSaddleNode(d));
    }
    if !(sigma > 0.0) {
        return Err(Error::Invalid(format!("amplitude {sigma} must be positive")));
    }
    let c = (d.sqrt() + sign.pm() * b.abs()) / (2.0 * sigma);
    if !(c > 0.0) {
        return Err(Error::Numerical(format!("calibrated C = {c} is not positive")));
    }
    Ok(c)
}

/// Second-order finite-difference derivative along one axis, one-sided at ends.
fn diff(v: &[f64], n: usize, stride: usize, offset: usize, h: f64, out: &mut [f64]) {
    let at = |k: usize| v[offset + k * stride];
    for k in 0..n {
        out[offset + k * stride] = if k == 0 {
            (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
        } else if k == n - 1 {
            (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
        } else {
            (at(k + 1) - at(k - 1)) / (2.0 * h)
        };
    }
}

fn gradients(f: &[f64], nz: usize, nr: usize, hz: f64, hr: f64) -> (Vec<f64>, Vec<f64>) {
    let mut dz = vec![0.0; f.len()];
    let mut dr = vec![0.0; f.len()];
    for j in 0..nr {
        diff(f, nz, nr, j, hz, &mut dz);
    }
    for i in 0..nz {
        diff(f, nr, 1, i * nr, hr, &mut dr);
    }
    (dz, dr)
}

/// b = -int ((w~ . grad) w) . w* over the meridional rectangle, where w~ is
/// the (z, r) part of w. Finite differences and Gregory quadrature.
pub fn b_coefficient(eigfun: &Field, adjoint: &Field) -> Result<f64> {
    eigfun.same_grid(adjoint)?;
    let (nz, nr) = (eigfun.nz, eigfun.nr);
    if nz < 3 || nr < 3 {
        return Err(Error::Resolution(format!("{nz} x {nr} grid too small")));
    }
    let (hz, hr) = (eigfun.dz(), eigfun.dr());
    let (wz, wr) = eigfun.weights();
    let mut s = 0.0;
    for (comp, star) in [(&eigfun.uz, &adjoint.uz), (&eigfun.ur, &adjoint.ur), (&eigfun.ut, &adjoint.ut)] {
        let (dz, dr) = gradients(comp, nz, nr, hz, hr);
        for i in 0..nz {
            for j in 0..nr {
                let q = i * nr + j;
                s += wz[i] * wr[j] * (eigfun.uz[q] * dz[q] + eigfun.ur[q] * dr[q]) * star[q];
            }
        }
    }
    Ok(-s)
}

/// d^n/dz^n of sin(a z) (cos when `cosine`).
fn trig_deriv(a: f64, z: f64, n: usize, cosine: bool) -> f64 {
    let phase = if cosine { FRAC_PI_2 } else { 0.0 };
    a.powi(n as i32) * (a * z + phase + n as f64 * FRAC_PI_2).sin()
}

/// The leading-order field (Lambda sin(az) R' - gamma (rbar(1-rbar) + W0),
/// -a Lambda cos(az) R) for a given Lambda.
pub fn model_field_at(n: &NondimParams, mode: &ChandrasekharMode, big_lambda: f64) -> FieldView {
    let (gamma, w0, a) = (n.gamma, n.w0, mode.a);
    let m = *mode;
    FieldView::analytic(n.l, mode.r1, move |z, rb| {
        let rd: [f64; 5] = std::array::from_fn(|k| m.r_bar(rb, k as u32));
        let p = [rb * (1.0 - rb) + w0, 1.0 - 2.0 * rb, -2.0, 0.0];
        let mut d = [[[0.0; 2]; 4]; 4];
        for i in 0..4 {
            let (s, c) = (trig_deriv(a, z, i, false), trig_deriv(a, z, i, true));
            for j in 0..4 {
                let shear = if i == 0 { gamma * p[j] } else { 0.0 };
                d[i][j] = [big_lambda * s * rd[j + 1] - shear, -a * big_lambda * c * rd[j]];
            }
        }
        d
    })
}

/// Model field of state `sign` on the branch at `lambda`.
pub fn model_field(
    branch: &BifurcationBranch,
    n: &NondimParams,
    mode: &ChandrasekharMode,
    sign: Sign,
    lambda: f64,
) -> Result<FieldView> {
    let cap = branch.big_lambda(lambda, sign)?;
    Ok(model_field_at(n, mode, cap))
}
