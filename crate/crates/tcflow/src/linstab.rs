//! Linear stability of the narrow-gap Taylor-Couette-Poiseuille system.
//!
//! Each axial Fourier mode e^{iaz} is treated separately. With the stream
//! function psi = Re[-i f(r) e^{iaz}] the meridional velocity is
//! u_z = Re[i f' e^{iaz}], u_r = Re[a f e^{iaz}], and u_theta = Re[g e^{iaz}].
//! For real (f, g) this is the family u_z ~ sin(az), u_r, u_theta ~ cos(az);
//! the imaginary parts carry the conjugate family. Both are coupled only by
//! the through-flow terms.
//!
//! The radial direction is a Legendre-Galerkin discretization (clamped basis
//! for f, Dirichlet basis for g). The weak form gives a pencil K x = beta M x
//! with M symmetric positive definite, and K symmetric when gamma = 0, mu = 1.
//!
//! Base-flow transport is taken as +c(r) d/dz on every component, with
//! c = gamma (W0 + rbar(1 - rbar)) = -W. The `literal_signs` option flips the
//! sign in the u_r row instead.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::baseflow::{NondimParams, DEFAULT_HEIGHT_TOL};
use crate::chandrasekhar::{ChandrasekharMode, PREFERRED_WAVENUMBER};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::spectral::{Basis, BasisKind, Quadrature};

pub const DEFAULT_NR: usize = 64;
pub const MIN_NR: usize = 16;
/// Relative gap between the leading and second eigenvalue below which the
/// leading one is treated as not simple.
pub const SIMPLICITY_TOL: f64 = 1e-6;
const SCAN_POINTS: usize = 32;
const SECANT_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub literal_signs: bool,
    pub height_tol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options { literal_signs: false, height_tol: DEFAULT_HEIGHT_TOL }
    }
}

/// Galerkin matrices for one axial mode. Unknowns are ordered (f_0..f_{n-1}, g_0..g_{n-1}).
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub n_r: usize,
    pub k: usize,
    pub a: f64,
    pub lambda: f64,
    pub params: NondimParams,
    pub mass: DMatrix<f64>,
    /// Diffusion part A.
    pub diffusion: DMatrix<f64>,
    /// Rotation coupling B (multiplied by lambda).
    pub rotation: DMatrix<f64>,
    /// Curvature-of-rotation term -(1 - mu) rbar u_theta in the u_r row, per unit lambda.
    pub rotation_gradient: DMatrix<f64>,
    /// Through-flow terms (transport and shear production).
    pub throughflow: DMatrix<Complex64>,
}

pub fn assemble(n: &NondimParams, lambda: f64, k: usize, n_r: usize) -> Result<DiscreteOperator> {
    assemble_with(n, lambda, k, n_r, &Options::default())
}

pub fn assemble_with(n: &NondimParams, lambda: f64, k: usize, n_r: usize, opt: &Options) -> Result<DiscreteOperator> {
    if n_r < MIN_NR {
        return Err(Error::Resolution(format!("n_r = {n_r} < {MIN_NR}")));
    }
    if k == 0 {
        return Err(Error::Invalid("axial mode index must be >= 1".into()));
    }
    n.validate(opt.height_tol)?;
    let a = k as f64 * std::f64::consts::PI / n.l;
    Ok(assemble_wavenumber(n, lambda, a, k, n_r, opt))
}

/// Assembly for an arbitrary wavenumber (no height checks).
pub fn assemble_wavenumber(n: &NondimParams, lambda: f64, a: f64, k: usize, n_r: usize, opt: &Options) -> DiscreteOperator {
    let fb = Basis::new(BasisKind::Clamped, n_r);
    let gb = Basis::new(BasisKind::Dirichlet, n_r);
    let nq = n_r + 10;
    let qf = Quadrature::new(&fb, nq, 2);
    let qg = Quadrature::new(&gb, nq, 1);
    let dim = 2 * n_r;
    let a2 = a * a;
    let sgn_r = if opt.literal_signs { -1.0 } else { 1.0 };

    let mut mass = DMatrix::zeros(dim, dim);
    let mut diff = DMatrix::zeros(dim, dim);
    let mut rot = DMatrix::zeros(dim, dim);
    let mut rotg = DMatrix::zeros(dim, dim);
    let mut thr = DMatrix::<Complex64>::zeros(dim, dim);

    for q in 0..nq {
        let w = qf.weights[q];
        let rb = qf.nodes[q];
        let c = n.gamma * (n.w0 + rb * (1.0 - rb));
        let cp = n.gamma * (1.0 - 2.0 * rb);
        let (f0, f1, f2) = (&qf.vals[0][q], &qf.vals[1][q], &qf.vals[2][q]);
        let (g0, g1) = (&qg.vals[0][q], &qg.vals[1][q]);
        for i in 0..n_r {
            for j in 0..n_r {
                mass[(i, j)] += w * (f1[i] * f1[j] + a2 * f0[i] * f0[j]);
                diff[(i, j)] -= w * (f2[i] - a2 * f0[i]) * (f2[j] - a2 * f0[j]);
                mass[(n_r + i, n_r + j)] += w * g0[i] * g0[j];
                diff[(n_r + i, n_r + j)] -= w * (g1[i] * g1[j] + a2 * g0[i] * g0[j]);
                // u_r row: lambda h u_theta against test a phi_i
                rot[(i, n_r + j)] += w * a * f0[i] * g0[j];
                rotg[(i, n_r + j)] -= w * a * rb * f0[i] * g0[j];
                // u_theta row: lambda u_r against test g_i
                rot[(n_r + i, j)] += w * a * g0[i] * f0[j];
                if n.gamma != 0.0 {
                    let ff = a * (c * (f1[i] * f1[j] + sgn_r * a2 * f0[i] * f0[j]) - cp * f1[i] * f0[j]);
                    thr[(i, j)] += Complex64::new(0.0, w * ff);
                    thr[(n_r + i, n_r + j)] += Complex64::new(0.0, w * a * c * g0[i] * g0[j]);
                }
            }
        }
    }
    DiscreteOperator {
        n_r,
        k,
        a,
        lambda,
        params: n.with_lambda(lambda),
        mass,
        diffusion: diff,
        rotation: rot,
        rotation_gradient: rotg * (1.0 - n.mu),
        throughflow: thr,
    }
}

pub(crate) fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

impl DiscreteOperator {
    pub fn at_lambda(&self, lambda: f64) -> Self {
        let mut o = self.clone();
        o.lambda = lambda;
        o.params = o.params.with_lambda(lambda);
        o
    }

    pub fn is_real(&self) -> bool {
        self.throughflow.iter().all(|v| v.im == 0.0 && v.re == 0.0)
    }

    /// Real part of K (gamma-free part).
    fn real_part(&self) -> DMatrix<f64> {
        &self.diffusion + (&self.rotation + &self.rotation_gradient) * self.lambda
    }

    /// K = A + lambda (B + G) + T.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        to_complex(&self.real_part()) + &self.throughflow
    }

    /// dK/dlambda.
    pub fn lambda_derivative(&self) -> DMatrix<f64> {
        &self.rotation + &self.rotation_gradient
    }

    /// Real 4n_r representation [[Re K, -Im K], [Im K, Re K]] acting on
    /// (sine-family psi, sine-family u_theta, conjugate family...).
    pub fn real_form(&self) -> DMatrix<f64> {
        let k = self.matrix();
        let d = k.nrows();
        let mut r = DMatrix::zeros(2 * d, 2 * d);
        for i in 0..d {
            for j in 0..d {
                let v = k[(i, j)];
                r[(i, j)] = v.re;
                r[(d + i, d + j)] = v.re;
                r[(i, d + j)] = -v.im;
                r[(d + i, j)] = v.im;
            }
        }
        r
    }

    /// Mass matrix of the real form.
    pub fn real_mass(&self) -> DMatrix<f64> {
        let d = self.mass.nrows();
        let mut r = DMatrix::zeros(2 * d, 2 * d);
        r.view_mut((0, 0), (d, d)).copy_from(&self.mass);
        r.view_mut((d, d), (d, d)).copy_from(&self.mass);
        r
    }
}

/// Leading eigenpair of a discrete operator.
#[derive(Debug, Clone)]
pub struct LeadingMode {
    pub beta: Complex64,
    pub second: Complex64,
    /// Right eigenvector, normalized to e^H M e = 1.
    pub right: DVector<Complex64>,
    /// Adjoint eigenvector, normalized to e*^H M e = 1.
    pub left: DVector<Complex64>,
    pub residual: f64,
}

impl LeadingMode {
    pub fn beta1(&self) -> f64 {
        self.beta.re
    }
}

/// Eigenvalues of the pencil (K, M) sorted by decreasing real part. For
/// complex K the spectrum of the real form is computed and the spurious
/// conjugate copies are removed; the imaginary sign of the kept copy is not
/// significant for ordering.
pub fn spectrum(op: &DiscreteOperator) -> Result<Vec<Complex64>> {
    let ki = if op.is_real() { None } else { Some(op.throughflow.map(|v| v.im)) };
    let kr = op.real_part() + op.throughflow.map(|v| v.re);
    pencil_spectrum(&kr, ki.as_ref(), &op.mass)
}

/// Eigenvalues of (Kr + i Ki, M), sorted by decreasing real part.
pub fn pencil_spectrum(kr: &DMatrix<f64>, ki: Option<&DMatrix<f64>>, mass: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let chol = mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("mass matrix not positive definite".into()))?;
    let l = chol.l();
    let whiten = |k: &DMatrix<f64>| -> DMatrix<f64> {
        let y = l.solve_lower_triangular(k).expect("triangular solve");
        let yt = y.transpose();
        l.solve_lower_triangular(&yt).expect("triangular solve").transpose()
    };
    let mut ev: Vec<Complex64> = if let Some(ki) = ki {
        let sr = whiten(kr);
        let si = whiten(ki);
        let d = sr.nrows();
        let mut big = DMatrix::zeros(2 * d, 2 * d);
        big.view_mut((0, 0), (d, d)).copy_from(&sr);
        big.view_mut((d, d), (d, d)).copy_from(&sr);
        big.view_mut((0, d), (d, d)).copy_from(&(-&si));
        big.view_mut((d, 0), (d, d)).copy_from(&si);
        let all: Vec<Complex64> = big.complex_eigenvalues().iter().map(|v| Complex64::new(v.re, v.im)).collect();
        remove_conjugate_copies(all)
    } else {
        let s = whiten(kr);
        let asym = (&s - s.transpose()).norm() / s.norm().max(f64::MIN_POSITIVE);
        if asym < 1e-12 {
            let sym = (&s + s.transpose()) * 0.5;
            nalgebra::linalg::SymmetricEigen::new(sym)
                .eigenvalues
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect()
        } else {
            s.complex_eigenvalues().iter().map(|v| Complex64::new(v.re, v.im)).collect()
        }
    };
    if ev.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::EigenNoConvergence { iterations: 0, residual: f64::NAN });
    }
    ev.sort_by(|x, y| y.re.partial_cmp(&x.re).unwrap().then(y.im.partial_cmp(&x.im).unwrap()));
    Ok(ev)
}

fn remove_conjugate_copies(mut all: Vec<Complex64>) -> Vec<Complex64> {
    all.sort_by(|x, y| y.re.partial_cmp(&x.re).unwrap().then(y.im.partial_cmp(&x.im).unwrap()));
    let scale = all.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let mut used = vec![false; all.len()];
    let mut out = Vec::with_capacity(all.len() / 2);
    for i in 0..all.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let target = all[i].conj();
        let mut best: Option<(usize, f64)> = None;
        for j in i + 1..all.len() {
            if used[j] {
                continue;
            }
            let d = (all[j] - target).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
            if (all[j].re - all[i].re).abs() > 1e-6 * scale {
                break;
            }
        }
        if let Some((j, d)) = best {
            if d <= 1e-7 * scale {
                used[j] = true;
            }
        }
        out.push(all[i]);
    }
    out
}

/// Inverse iteration for the right and left eigenvectors near `shift`,
/// followed by a two-sided Rayleigh quotient.
fn refine(k: &DMatrix<Complex64>, m: &DMatrix<f64>, shift: Complex64) -> Result<(Complex64, DVector<Complex64>, DVector<Complex64>, f64)> {
    let d = k.nrows();
    let mc = to_complex(m);
    let scale = k.norm() / (d as f64).sqrt();
    let s = shift + Complex64::new(1e-10 * (1.0 + shift.norm()), 1e-10 * (1.0 + shift.norm()));
    let shifted = k - &mc * s;
    let lu = shifted.clone().lu();
    let lu_h = shifted.adjoint().lu();
    let mut x = DVector::from_fn(d, |i, _| Complex64::new(1.0 + 0.01 * i as f64, 0.3));
    let mut y = x.clone();
    for _ in 0..4 {
        let rhs = &mc * &x;
        x = lu.solve(&rhs).ok_or_else(|| Error::Numerical("singular shifted operator".into()))?;
        let n = x.norm();
        x /= Complex64::new(n, 0.0);
        let rhs = &mc * &y;
        y = lu_h.solve(&rhs).ok_or_else(|| Error::Numerical("singular shifted operator".into()))?;
        let n = y.norm();
        y /= Complex64::new(n, 0.0);
    }
    let mx = &mc * &x;
    let beta = y.dotc(&(k * &x)) / y.dotc(&mx);
    let res = (k * &x - &mx * beta).norm() / (scale * x.norm()).max(f64::MIN_POSITIVE);
    Ok((beta, x, y, res))
}

pub fn leading_eigenvalue(op: &DiscreteOperator) -> Result<LeadingMode> {
    let ev = spectrum(op)?;
    pencil_leading(&op.matrix(), &op.mass, &ev, op.is_real())
}

/// Leading eigenpair of a pencil given its sorted spectrum.
pub fn pencil_leading(k: &DMatrix<Complex64>, mass: &DMatrix<f64>, ev: &[Complex64], real: bool) -> Result<LeadingMode> {
    if ev.len() < 2 {
        return Err(Error::Numerical("spectrum too small".into()));
    }
    let (mut beta, mut x, mut y, res) = refine(k, mass, ev[0])?;
    if res > 1e-8 {
        return Err(Error::EigenNoConvergence { iterations: 4, residual: res });
    }
    if real && beta.im.abs() <= 1e-12 * (1.0 + beta.re.abs()) {
        beta.im = 0.0;
    }
    let mc = to_complex(mass);
    let nx = x.dotc(&(&mc * &x)).re.sqrt();
    x /= Complex64::new(nx, 0.0);
    let p = y.dotc(&(&mc * &x));
    // want y^H M x = 1
    y /= p.conj();
    Ok(LeadingMode { beta, second: ev[1], right: x, left: y, residual: res })
}

/// alpha = <(B + dL/dlambda) e, e*>.
pub fn eigen_derivative(op: &DiscreteOperator, mode: &LeadingMode) -> Result<Complex64> {
    let gap = (mode.beta.re - mode.second.re).abs();
    let tol = SIMPLICITY_TOL * mode.second.norm();
    if gap <= tol {
        return Err(Error::NotSimple { gap, tol });
    }
    let dk = to_complex(&op.lambda_derivative());
    Ok(mode.left.dotc(&(&dk * &mode.right)))
}

#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub lambda: f64,
    pub beta1: f64,
    pub omega: f64,
    pub lambda0_eps: f64,
    pub tc: f64,
    pub k: usize,
    pub a: f64,
    pub n_r: usize,
    pub alpha_eps: f64,
    pub alpha_eps_im: f64,
    pub second: Complex64,
    pub mode: LeadingMode,
    pub operator: DiscreteOperator,
}

/// Result of the per-mode scan.
#[derive(Debug, Clone, Copy)]
pub struct ModeCritical {
    pub k: usize,
    pub a: f64,
    pub lambda_c: f64,
}

/// Limiting lambda0 for the preferred wavenumber, the centre of the scan window.
pub fn reference_lambda0() -> f64 {
    ChandrasekharMode::with_wavenumber(PREFERRED_WAVENUMBER, 1, 0.0).lambda0
}

fn beta_at(base: &DiscreteOperator, lambda: f64) -> Result<f64> {
    let op = base.at_lambda(lambda);
    Ok(spectrum(&op)?[0].re)
}

/// Secant (with bracket safeguard) on Re beta1(lambda) for one axial mode.
pub fn critical_for_mode(base: &DiscreteOperator) -> Result<Option<f64>> {
    let l0 = reference_lambda0();
    let (lo, hi) = (0.5 * l0, 1.5 * l0);
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|i| lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64).collect();
    let mut prev = (grid[0], beta_at(base, grid[0])?);
    for &lam in &grid[1..] {
        let b = beta_at(base, lam)?;
        if prev.1 < 0.0 && b >= 0.0 {
            return secant(base, prev, (lam, b)).map(Some);
        }
        prev = (lam, b);
    }
    Ok(None)
}

fn secant(base: &DiscreteOperator, mut a: (f64, f64), mut b: (f64, f64)) -> Result<f64> {
    if b.1 == 0.0 {
        return Ok(b.0);
    }
    let (mut x0, mut x1) = (a, b);
    for _ in 0..100 {
        let mut x = x1.0 - x1.1 * (x1.0 - x0.0) / (x1.1 - x0.1);
        if !(x > a.0 && x < b.0) {
            x = 0.5 * (a.0 + b.0);
        }
        let fx = beta_at(base, x)?;
        if fx < 0.0 {
            a = (x, fx);
        } else {
            b = (x, fx);
        }
        let step = (x - x1.0).abs();
        x0 = x1;
        x1 = (x, fx);
        if step <= SECANT_RTOL * x.abs() || fx == 0.0 || (b.0 - a.0) <= SECANT_RTOL * x.abs() {
            return Ok(x);
        }
    }
    Err(Error::Numerical("secant iteration did not converge".into()))
}

/// Scan all modes 1..=kmax and return the per-mode critical values.
pub fn scan_modes(n: &NondimParams, n_r: usize, kmax: usize, opt: &Options) -> Result<Vec<ModeCritical>> {
    let mut out = Vec::new();
    for k in 1..=kmax {
        let base = assemble_with(n, 0.0, k, n_r, opt)?;
        if let Some(lc) = critical_for_mode(&base)? {
            out.push(ModeCritical { k, a: base.a, lambda_c: lc });
        }
    }
    Ok(out)
}

pub fn critical_lambda(n: &NondimParams, n_r: usize) -> Result<EigenSolution> {
    let (k, _) = crate::chandrasekhar::select_wavenumber(n.l);
    critical_lambda_with(n, n_r, k + 2, &Options::default())
}

pub fn critical_lambda_with(n: &NondimParams, n_r: usize, kmax: usize, opt: &Options) -> Result<EigenSolution> {
    let modes = scan_modes(n, n_r, kmax, opt)?;
    let best = modes
        .iter()
        .min_by(|x, y| x.lambda_c.partial_cmp(&y.lambda_c).unwrap())
        .copied()
        .ok_or_else(|| {
            let l0 = reference_lambda0();
            Error::NoCriticality { lo: 0.5 * l0, hi: 1.5 * l0 }
        })?;
    let op = assemble_with(n, best.lambda_c, best.k, n_r, opt)?;
    let mode = leading_eigenvalue(&op)?;
    if mode.second.re >= 0.0 || mode.second.re >= mode.beta.re {
        return Err(Error::PesFailed(format!("second eigenvalue {} at lambda {}", mode.second, best.lambda_c)));
    }
    for m in &modes {
        if m.k != best.k {
            let other = assemble_with(n, best.lambda_c, m.k, n_r, opt)?;
            let b = spectrum(&other)?[0].re;
            if b >= 0.0 {
                return Err(Error::PesFailed(format!("mode k={} has beta {} at criticality", m.k, b)));
            }
        }
    }
    let alpha = eigen_derivative(&op, &mode)?;
    Ok(EigenSolution {
        lambda: best.lambda_c,
        beta1: mode.beta.re,
        omega: mode.beta.im,
        lambda0_eps: best.lambda_c,
        tc: best.lambda_c * best.lambda_c,
        k: best.k,
        a: best.a,
        n_r,
        alpha_eps: alpha.re,
        alpha_eps_im: alpha.im,
        second: mode.second,
        mode,
        operator: op,
    })
}

/// Radial amplitudes (u_z, u_r, u_theta) of a coefficient vector at rbar.
pub fn radial_amplitudes(op: &DiscreteOperator, x: &DVector<Complex64>, rbar: f64) -> [Complex64; 3] {
    let n = op.n_r;
    let fb = Basis::new(BasisKind::Clamped, n).eval(rbar, 1);
    let gb = Basis::new(BasisKind::Dirichlet, n).eval(rbar, 0);
    let (mut f, mut fp, mut g) = (Complex64::ZERO, Complex64::ZERO, Complex64::ZERO);
    for i in 0..n {
        f += x[i] * fb[0][i];
        fp += x[i] * fb[1][i];
        g += x[n + i] * gb[0][i];
    }
    [Complex64::new(0.0, 1.0) * fp, f * op.a, g]
}

/// Overlap with the closed-form limiting mode, used to fix the phase.
fn limiting_overlap(op: &DiscreteOperator, x: &DVector<Complex64>, mode: &ChandrasekharMode) -> Complex64 {
    let (nodes, w) = crate::spectral::gauss_legendre(op.n_r + 10);
    let mut s = Complex64::ZERO;
    for (t, wi) in nodes.iter().zip(&w) {
        let rb = 0.5 * (t + 1.0);
        let u = radial_amplitudes(op, x, rb);
        let u0 = limiting_amplitudes(mode, rb);
        for c in 0..3 {
            s += u[c] * u0[c].conj() * (0.5 * wi);
        }
    }
    s
}

/// Complex radial amplitudes of the closed-form limiting eigenfunction.
pub fn limiting_amplitudes(mode: &ChandrasekharMode, rbar: f64) -> [Complex64; 3] {
    let a = mode.a;
    [
        Complex64::new(0.0, -mode.r_bar(rbar, 1) / a),
        Complex64::new(-mode.r_bar(rbar, 0), 0.0),
        Complex64::new(-mode.fourth_order_bar(rbar) / (a * a * mode.lambda0), 0.0),
    ]
}

impl EigenSolution {
    /// Rotate the eigenpair phase so that the overlap with the limiting
    /// closed-form mode is real and positive.
    pub fn phase_aligned(&self, reference: &ChandrasekharMode) -> (DVector<Complex64>, DVector<Complex64>) {
        let ov = limiting_overlap(&self.operator, &self.mode.right, reference);
        let p = if ov.norm() > 0.0 { ov.conj() / ov.norm() } else { Complex64::ONE };
        (&self.mode.right * p, &self.mode.left * p)
    }

    fn field_of(&self, x: &DVector<Complex64>, nz: usize, nr: usize) -> Field {
        let p = &self.operator.params;
        let mut f = Field::zeros(nz, nr, p.l, p.r1);
        f.lambda = self.lambda;
        f.gamma = p.gamma;
        f.w0 = p.w0;
        let rad: Vec<[Complex64; 3]> = (0..nr).map(|j| radial_amplitudes(&self.operator, x, f.rbar(j))).collect();
        for i in 0..nz {
            let e = Complex64::from_polar(1.0, self.a * f.z(i));
            for (j, amp) in rad.iter().enumerate() {
                let q = f.idx(i, j);
                f.uz[q] = (amp[0] * e).re;
                f.ur[q] = (amp[1] * e).re;
                f.ut[q] = (amp[2] * e).re;
            }
        }
        f
    }

    /// Eigenfunction and adjoint sampled on an nz x nr grid, phase aligned
    /// with the limiting mode.
    pub fn fields(&self, nz: usize, nr: usize) -> (Field, Field) {
        let reference = ChandrasekharMode::with_wavenumber(self.a, self.k, self.operator.params.r1);
        let (x, y) = self.phase_aligned(&reference);
        (self.field_of(&x, nz, nr), self.field_of(&y, nz, nr))
    }

    /// Relative L2 distance between the eigenfunction and the best multiple
    /// of the closed-form limiting mode.
    pub fn distance_to_limiting(&self, mode: &ChandrasekharMode) -> f64 {
        let op = &self.operator;
        let x = &self.mode.right;
        let (nodes, w) = crate::spectral::gauss_legendre(op.n_r + 20);
        let (mut uu0, mut u0u0) = (Complex64::ZERO, 0.0);
        let samples: Vec<_> = nodes
            .iter()
            .map(|t| {
                let rb = 0.5 * (t + 1.0);
                (radial_amplitudes(op, x, rb), limiting_amplitudes(mode, rb))
            })
            .collect();
        for ((u, u0), wi) in samples.iter().zip(&w) {
            for c in 0..3 {
                uu0 += u[c] * u0[c].conj() * *wi;
                u0u0 += u0[c].norm_sqr() * wi;
            }
        }
        let c = uu0 / u0u0;
        let (mut num, mut den) = (0.0, 0.0);
        for ((u, u0), wi) in samples.iter().zip(&w) {
            for k in 0..3 {
                num += (u[k] - c * u0[k]).norm_sqr() * wi;
                den += (c * u0[k]).norm_sqr() * wi;
            }
        }
        (num / den).sqrt()
    }
}
