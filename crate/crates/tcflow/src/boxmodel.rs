//! Galerkin space for the closed box [0, L] x [0, 1] with the end conditions
//! u_z = 0, d(u_r)/dz = d(u_theta)/dz = 0.
//!
//! psi = sum_{m>=1} f_m(r) sin(k_m z), u_theta = sum_{m>=0} g_m(r) cos(k_m z),
//! k_m = m pi / L, so u_z = -f_m' sin, u_r = k_m f_m cos. The through-flow
//! couples different m; everything else is diagonal in m.
//!
//! Used both for the box eigenproblem (where the through-flow together with
//! mu != 1 makes the cubic coefficient nonzero) and as the spatial
//! discretization of the time-stepper.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::baseflow::NondimParams;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linstab::{pencil_leading, pencil_spectrum, to_complex, LeadingMode};
use crate::spectral::{gauss_legendre, Basis, BasisKind};

/// Physical-space values of a velocity field and its first derivatives.
#[derive(Debug, Clone, Default)]
pub struct Phys {
    pub uz: Vec<f64>,
    pub ur: Vec<f64>,
    pub ut: Vec<f64>,
    pub uz_z: Vec<f64>,
    pub uz_r: Vec<f64>,
    pub ur_z: Vec<f64>,
    pub ur_r: Vec<f64>,
    pub ut_z: Vec<f64>,
    pub ut_r: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BoxSpace {
    pub l: f64,
    /// Highest axial index.
    pub mz: usize,
    /// Radial functions per field and mode.
    pub nb: usize,
    /// Quadrature grid: midpoints in z, Gauss-Legendre in r.
    pub zq: Vec<f64>,
    pub wz: Vec<f64>,
    pub rq: Vec<f64>,
    pub wr: Vec<f64>,
    /// Radial tables `[q * nb + i]`.
    phi: [Vec<f64>; 3],
    gq: [Vec<f64>; 2],
    /// sin(k_m z_p), cos(k_m z_p) as `[m * nzq + p]`.
    sz: Vec<f64>,
    cz: Vec<f64>,
}

impl BoxSpace {
    pub fn new(l: f64, mz: usize, nb: usize, nzq: usize, nrq: usize) -> Self {
        let fb = Basis::new(BasisKind::Clamped, nb);
        let gb = Basis::new(BasisKind::Dirichlet, nb);
        let (x, w) = gauss_legendre(nrq);
        let rq: Vec<f64> = x.iter().map(|t| 0.5 * (t + 1.0)).collect();
        let wr: Vec<f64> = w.iter().map(|v| 0.5 * v).collect();
        let zq: Vec<f64> = (0..nzq).map(|p| (p as f64 + 0.5) * l / nzq as f64).collect();
        let wz = vec![l / nzq as f64; nzq];
        let mut phi = [vec![0.0; nrq * nb], vec![0.0; nrq * nb], vec![0.0; nrq * nb]];
        let mut gq = [vec![0.0; nrq * nb], vec![0.0; nrq * nb]];
        for (q, &r) in rq.iter().enumerate() {
            let e = fb.eval(r, 2);
            let g = gb.eval(r, 1);
            for i in 0..nb {
                for d in 0..3 {
                    phi[d][q * nb + i] = e[d][i];
                }
                for d in 0..2 {
                    gq[d][q * nb + i] = g[d][i];
                }
            }
        }
        let mut sz = vec![0.0; (mz + 1) * nzq];
        let mut cz = vec![0.0; (mz + 1) * nzq];
        for m in 0..=mz {
            let k = m as f64 * std::f64::consts::PI / l;
            for (p, &z) in zq.iter().enumerate() {
                let (s, c) = (k * z).sin_cos();
                sz[m * nzq + p] = s;
                cz[m * nzq + p] = c;
            }
        }
        BoxSpace { l, mz, nb, zq, wz, rq, wr, phi, gq, sz, cz }
    }

    /// Space sized for a physical grid with dealiasing: mz = nz/3, nb = (2 nr - 9)/3.
    pub fn for_grid(l: f64, nz: usize, nr: usize) -> Result<Self> {
        let mz = nz / 3;
        let nb = (2 * nr).saturating_sub(9) / 3;
        if mz < 2 || nb < 4 {
            return Err(Error::Resolution(format!("grid {nz}x{nr} too coarse")));
        }
        Ok(Self::new(l, mz, nb, nz, nr))
    }

    pub fn kappa(&self, m: usize) -> f64 {
        m as f64 * std::f64::consts::PI / self.l
    }
    pub fn dim(&self) -> usize {
        self.nb * (2 * self.mz + 1)
    }
    /// Offset of f_m (m >= 1).
    pub fn f_off(&self, m: usize) -> usize {
        debug_assert!(m >= 1);
        (m - 1) * self.nb
    }
    /// Offset of g_m (m >= 0).
    pub fn g_off(&self, m: usize) -> usize {
        self.mz * self.nb + m * self.nb
    }
    pub fn nzq(&self) -> usize {
        self.zq.len()
    }
    pub fn nrq(&self) -> usize {
        self.rq.len()
    }

    /// Integral of c(r) a(r) b(r) over the gap for radial tables.
    fn radial_integral(&self, a: &[f64], b: &[f64], weight: impl Fn(f64) -> f64, i: usize, j: usize) -> f64 {
        let nb = self.nb;
        (0..self.nrq()).map(|q| self.wr[q] * weight(self.rq[q]) * a[q * nb + i] * b[q * nb + j]).sum()
    }

    /// Mass and linear operator (diffusion + rotation) for a single mode m.
    /// For m >= 1 the unknowns are (f_m, g_m); for m = 0 only g_0.
    pub fn mode_blocks(&self, m: usize, lambda: f64, mu: f64) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let nb = self.nb;
        let k = self.kappa(m);
        let k2 = k * k;
        let hz = if m == 0 { self.l } else { 0.5 * self.l };
        let [p0, p1, p2] = &self.phi;
        let [g0, g1] = &self.gq;
        let dim = if m == 0 { nb } else { 2 * nb };
        let mut mass = DMatrix::zeros(dim, dim);
        let mut diff = DMatrix::zeros(dim, dim);
        let mut dk = DMatrix::zeros(dim, dim);
        let go = if m == 0 { 0 } else { nb };
        for q in 0..self.nrq() {
            let w = self.wr[q] * hz;
            let rb = self.rq[q];
            for i in 0..nb {
                for j in 0..nb {
                    let (gi, gj) = (g0[q * nb + i], g0[q * nb + j]);
                    mass[(go + i, go + j)] += w * gi * gj;
                    diff[(go + i, go + j)] -= w * (g1[q * nb + i] * g1[q * nb + j] + k2 * gi * gj);
                    if m == 0 {
                        continue;
                    }
                    let (fi, fj) = (p0[q * nb + i], p0[q * nb + j]);
                    let (fi1, fj1) = (p1[q * nb + i], p1[q * nb + j]);
                    let (fi2, fj2) = (p2[q * nb + i], p2[q * nb + j]);
                    mass[(i, j)] += w * (fi1 * fj1 + k2 * fi * fj);
                    diff[(i, j)] -= w * (fi2 - k2 * fi) * (fj2 - k2 * fj);
                    dk[(i, nb + j)] += w * k * (1.0 - (1.0 - mu) * rb) * fi * gj;
                    dk[(nb + i, j)] += w * k * gi * fj;
                }
            }
        }
        let lin = &diff + &dk * lambda;
        (mass, lin, dk)
    }

    /// Through-flow coupling matrix on the full space.
    pub fn throughflow_matrix(&self, gamma: f64, w0: f64, literal_signs: bool) -> DMatrix<f64> {
        let nb = self.nb;
        let mut t = DMatrix::zeros(self.dim(), self.dim());
        if gamma == 0.0 {
            return t;
        }
        let c = |r: f64| gamma * (w0 + r * (1.0 - r));
        let cp = |r: f64| gamma * (1.0 - 2.0 * r);
        let sgn = if literal_signs { -1.0 } else { 1.0 };
        let [p0, p1, _] = &self.phi;
        let [g0, _] = &self.gq;
        let mut c11 = DMatrix::zeros(nb, nb);
        let mut c00 = DMatrix::zeros(nb, nb);
        let mut s10 = DMatrix::zeros(nb, nb);
        let mut cg = DMatrix::zeros(nb, nb);
        for i in 0..nb {
            for j in 0..nb {
                c11[(i, j)] = self.radial_integral(p1, p1, c, i, j);
                c00[(i, j)] = self.radial_integral(p0, p0, c, i, j);
                s10[(i, j)] = self.radial_integral(p1, p0, cp, i, j);
                cg[(i, j)] = self.radial_integral(g0, g0, c, i, j);
            }
        }
        // S(m, j) = int_0^L cos(k_m z) sin(k_j z) dz
        let s = |m: usize, j: usize| -> f64 {
            if (m + j) % 2 == 1 {
                self.l / std::f64::consts::PI * 2.0 * j as f64 / ((j * j) as f64 - (m * m) as f64)
            } else {
                0.0
            }
        };
        for j in 1..=self.mz {
            let kj = self.kappa(j);
            for m in 1..=self.mz {
                let (smj, sjm) = (s(m, j), s(j, m));
                if smj == 0.0 && sjm == 0.0 {
                    continue;
                }
                let km = self.kappa(m);
                let (ro, co) = (self.f_off(j), self.f_off(m));
                for i in 0..nb {
                    for l in 0..nb {
                        t[(ro + i, co + l)] += km * smj * c11[(i, l)] - sgn * km * km * kj * sjm * c00[(i, l)]
                            - km * smj * s10[(i, l)];
                    }
                }
            }
        }
        for j in 0..=self.mz {
            for m in 1..=self.mz {
                let sjm = s(j, m);
                if sjm == 0.0 {
                    continue;
                }
                let km = self.kappa(m);
                let (ro, co) = (self.g_off(j), self.g_off(m));
                for i in 0..nb {
                    for l in 0..nb {
                        t[(ro + i, co + l)] -= km * sjm * cg[(i, l)];
                    }
                }
            }
        }
        t
    }

    /// Radial profiles for mode m: (F, F', F'') or (G, G').
    fn radial_f(&self, x: &[f64], m: usize, d: usize, out: &mut [f64]) {
        let nb = self.nb;
        let c = &x[self.f_off(m)..self.f_off(m) + nb];
        let tab = &self.phi[d];
        for (q, o) in out.iter_mut().enumerate() {
            let row = &tab[q * nb..(q + 1) * nb];
            *o = row.iter().zip(c).map(|(a, b)| a * b).sum();
        }
    }

    fn radial_g(&self, x: &[f64], m: usize, d: usize, out: &mut [f64]) {
        let nb = self.nb;
        let c = &x[self.g_off(m)..self.g_off(m) + nb];
        let tab = &self.gq[d];
        for (q, o) in out.iter_mut().enumerate() {
            let row = &tab[q * nb..(q + 1) * nb];
            *o = row.iter().zip(c).map(|(a, b)| a * b).sum();
        }
    }

    /// Velocity and first derivatives on the quadrature grid, indexed `[p * nrq + q]`.
    pub fn evaluate(&self, x: &[f64], out: &mut Phys) {
        let (nzq, nrq) = (self.nzq(), self.nrq());
        let n = nzq * nrq;
        for v in [
            &mut out.uz, &mut out.ur, &mut out.ut, &mut out.uz_z, &mut out.uz_r, &mut out.ur_z, &mut out.ur_r,
            &mut out.ut_z, &mut out.ut_r,
        ] {
            v.clear();
            v.resize(n, 0.0);
        }
        let mut f0 = vec![0.0; nrq];
        let mut f1 = vec![0.0; nrq];
        let mut f2 = vec![0.0; nrq];
        let mut g0 = vec![0.0; nrq];
        let mut g1 = vec![0.0; nrq];
        for m in 0..=self.mz {
            let k = self.kappa(m);
            self.radial_g(x, m, 0, &mut g0);
            self.radial_g(x, m, 1, &mut g1);
            if m >= 1 {
                self.radial_f(x, m, 0, &mut f0);
                self.radial_f(x, m, 1, &mut f1);
                self.radial_f(x, m, 2, &mut f2);
            }
            for p in 0..nzq {
                let s = self.sz[m * nzq + p];
                let c = self.cz[m * nzq + p];
                let base = p * nrq;
                for q in 0..nrq {
                    out.ut[base + q] += g0[q] * c;
                    out.ut_r[base + q] += g1[q] * c;
                    out.ut_z[base + q] -= k * g0[q] * s;
                }
                if m == 0 {
                    continue;
                }
                for q in 0..nrq {
                    let i = base + q;
                    out.uz[i] -= f1[q] * s;
                    out.ur[i] += k * f0[q] * c;
                    out.uz_z[i] -= k * f1[q] * c;
                    out.uz_r[i] -= f2[q] * s;
                    out.ur_z[i] -= k * k * f0[q] * s;
                    out.ur_r[i] += k * f1[q] * c;
                }
            }
        }
    }

    /// Galerkin projection of a physical-space forcing (n_z, n_r, n_theta)
    /// onto the test functions: the weak-form right-hand side.
    pub fn project(&self, nz_: &[f64], nr_: &[f64], nt_: &[f64], out: &mut [f64]) {
        let (nzq, nrq, nb) = (self.nzq(), self.nrq(), self.nb);
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut zs = vec![0.0; nrq];
        let mut rc = vec![0.0; nrq];
        let mut tc = vec![0.0; nrq];
        for j in 0..=self.mz {
            zs.iter_mut().chain(rc.iter_mut()).chain(tc.iter_mut()).for_each(|v| *v = 0.0);
            for p in 0..nzq {
                let s = self.sz[j * nzq + p] * self.wz[p];
                let c = self.cz[j * nzq + p] * self.wz[p];
                let base = p * nrq;
                for q in 0..nrq {
                    zs[q] += s * nz_[base + q];
                    rc[q] += c * nr_[base + q];
                    tc[q] += c * nt_[base + q];
                }
            }
            let kj = self.kappa(j);
            let go = self.g_off(j);
            for q in 0..nrq {
                let w = self.wr[q];
                let gt = &self.gq[0][q * nb..(q + 1) * nb];
                for i in 0..nb {
                    out[go + i] += w * gt[i] * tc[q];
                }
                if j >= 1 {
                    let fo = self.f_off(j);
                    let p0 = &self.phi[0][q * nb..(q + 1) * nb];
                    let p1 = &self.phi[1][q * nb..(q + 1) * nb];
                    for i in 0..nb {
                        out[fo + i] += w * (-p1[i] * zs[q] + kj * p0[i] * rc[q]);
                    }
                }
            }
        }
    }

    /// Full block-diagonal mass matrix.
    pub fn mass_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for mm in 0..=self.mz {
            let (mass, _, _) = self.mode_blocks(mm, 0.0, 1.0);
            self.scatter(mm, &mass, &mut m);
        }
        m
    }

    fn scatter(&self, m: usize, block: &DMatrix<f64>, full: &mut DMatrix<f64>) {
        let nb = self.nb;
        let idx: Vec<usize> = if m == 0 {
            (0..nb).map(|i| self.g_off(0) + i).collect()
        } else {
            (0..nb).map(|i| self.f_off(m) + i).chain((0..nb).map(|i| self.g_off(m) + i)).collect()
        };
        for (a, &ia) in idx.iter().enumerate() {
            for (b, &ib) in idx.iter().enumerate() {
                full[(ia, ib)] += block[(a, b)];
            }
        }
    }

    /// Sample a coefficient vector onto a uniform node grid.
    pub fn to_field(&self, x: &[f64], nz: usize, nr: usize, r1: f64) -> Field {
        let mut f = Field::zeros(nz, nr, self.l, r1);
        let fb = Basis::new(BasisKind::Clamped, self.nb);
        let gb = Basis::new(BasisKind::Dirichlet, self.nb);
        let nb = self.nb;
        for j in 0..nr {
            let rb = f.rbar(j);
            let e = fb.eval(rb, 1);
            let g = gb.eval(rb, 0);
            let mut fm = vec![(0.0, 0.0); self.mz + 1];
            let mut gm = vec![0.0; self.mz + 1];
            for m in 0..=self.mz {
                gm[m] = (0..nb).map(|i| x[self.g_off(m) + i] * g[0][i]).sum();
                if m >= 1 {
                    let o = self.f_off(m);
                    fm[m] = (
                        (0..nb).map(|i| x[o + i] * e[0][i]).sum(),
                        (0..nb).map(|i| x[o + i] * e[1][i]).sum(),
                    );
                }
            }
            for i in 0..nz {
                let z = f.z(i);
                let q = f.idx(i, j);
                let (mut uz, mut ur, mut ut) = (0.0, 0.0, 0.0);
                for m in 0..=self.mz {
                    let k = self.kappa(m);
                    let (s, c) = (k * z).sin_cos();
                    ut += gm[m] * c;
                    if m >= 1 {
                        uz -= fm[m].1 * s;
                        ur += k * fm[m].0 * c;
                    }
                }
                f.uz[q] = uz;
                f.ur[q] = ur;
                f.ut[q] = ut;
            }
        }
        f
    }

    /// Derivatives d^a/dz^a d^b/drbar^b (a, b <= 3) of (u_z, u_r) at one point,
    /// as `[a][b][component]`.
    pub fn meridional_derivs(&self, x: &[f64], z: f64, rbar: f64) -> [[[f64; 2]; 4]; 4] {
        let fb = Basis::new(BasisKind::Clamped, self.nb);
        let e = fb.eval(rbar, 4);
        let nb = self.nb;
        let mut d = [[[0.0; 2]; 4]; 4];
        for m in 1..=self.mz {
            let o = self.f_off(m);
            let c = &x[o..o + nb];
            let fd: [f64; 5] = std::array::from_fn(|k| e[k].iter().zip(c).map(|(a, b)| a * b).sum());
            let k = self.kappa(m);
            let ph = k * z;
            for a in 0..4 {
                let ka = k.powi(a as i32);
                let sa = ka * (ph + a as f64 * std::f64::consts::FRAC_PI_2).sin();
                let ca = ka * (ph + a as f64 * std::f64::consts::FRAC_PI_2).cos();
                for b in 0..4 {
                    d[a][b][0] -= fd[b + 1] * sa;
                    d[a][b][1] += k * fd[b] * ca;
                }
            }
        }
        d
    }

    /// L2 inner product of two physical samples on the quadrature grid.
    pub fn inner_phys(&self, a: &Phys, b: &Phys) -> f64 {
        let nrq = self.nrq();
        let mut s = 0.0;
        for p in 0..self.nzq() {
            for q in 0..nrq {
                let i = p * nrq + q;
                s += self.wz[p] * self.wr[q] * (a.uz[i] * b.uz[i] + a.ur[i] * b.ur[i] + a.ut[i] * b.ut[i]);
            }
        }
        s
    }

    /// Galerkin coefficients of an analytic field (z, rbar) -> (u_z, u_r, u_theta),
    /// obtained by L2 projection onto the space.
    pub fn project_function(&self, f: impl Fn(f64, f64) -> (f64, f64, f64)) -> Result<Vec<f64>> {
        let (nzq, nrq) = (self.nzq(), self.nrq());
        let n = nzq * nrq;
        let (mut a, mut b, mut c) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for p in 0..nzq {
            for q in 0..nrq {
                let (x, y, z) = f(self.zq[p], self.rq[q]);
                a[p * nrq + q] = x;
                b[p * nrq + q] = y;
                c[p * nrq + q] = z;
            }
        }
        let mut rhs = vec![0.0; self.dim()];
        self.project(&a, &b, &c, &mut rhs);
        self.solve_mass(&rhs)
    }

    /// Solve M x = rhs mode by mode.
    pub fn solve_mass(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.dim()];
        for m in 0..=self.mz {
            let (mass, _, _) = self.mode_blocks(m, 0.0, 1.0);
            let idx = self.mode_indices(m);
            let r = DVector::from_iterator(idx.len(), idx.iter().map(|&i| rhs[i]));
            let sol = mass
                .cholesky()
                .ok_or_else(|| Error::Numerical("mode mass matrix not positive definite".into()))?
                .solve(&r);
            for (a, &i) in idx.iter().enumerate() {
                x[i] = sol[a];
            }
        }
        Ok(x)
    }

    /// Global indices of mode m's unknowns, in block order.
    pub fn mode_indices(&self, m: usize) -> Vec<usize> {
        let nb = self.nb;
        if m == 0 {
            (0..nb).map(|i| self.g_off(0) + i).collect()
        } else {
            (0..nb).map(|i| self.f_off(m) + i).chain((0..nb).map(|i| self.g_off(m) + i)).collect()
        }
    }
}

/// Linear operator of the closed box at one lambda.
#[derive(Debug, Clone)]
pub struct BoxOperator {
    pub space: BoxSpace,
    pub params: NondimParams,
    pub lambda: f64,
    pub mass: DMatrix<f64>,
    pub diffusion: DMatrix<f64>,
    /// dK/dlambda.
    pub rotation: DMatrix<f64>,
    pub throughflow: DMatrix<f64>,
}

impl BoxOperator {
    pub fn new(n: &NondimParams, mz: usize, nb: usize, literal_signs: bool) -> Self {
        let nrq = nb + 10;
        let nzq = 3 * mz + 3;
        let space = BoxSpace::new(n.l, mz, nb, nzq, nrq);
        let d = space.dim();
        let mut mass = DMatrix::zeros(d, d);
        let mut diff = DMatrix::zeros(d, d);
        let mut rot = DMatrix::zeros(d, d);
        for m in 0..=mz {
            let (ms, lin0, dk) = space.mode_blocks(m, 0.0, n.mu);
            space.scatter(m, &ms, &mut mass);
            space.scatter(m, &lin0, &mut diff);
            space.scatter(m, &dk, &mut rot);
        }
        let throughflow = space.throughflow_matrix(n.gamma, n.w0, literal_signs);
        BoxOperator { space, params: *n, lambda: n.lambda, mass, diffusion: diff, rotation: rot, throughflow }
    }

    pub fn at_lambda(&self, lambda: f64) -> Self {
        let mut o = self.clone();
        o.lambda = lambda;
        o.params = o.params.with_lambda(lambda);
        o
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        &self.diffusion + &self.rotation * self.lambda + &self.throughflow
    }

    pub fn spectrum(&self) -> Result<Vec<Complex64>> {
        pencil_spectrum(&self.matrix(), None, &self.mass)
    }

    pub fn leading(&self) -> Result<LeadingMode> {
        let ev = self.spectrum()?;
        pencil_leading(&to_complex(&self.matrix()), &self.mass, &ev, true)
    }

    /// Critical lambda by bracketing on [lo, hi] (32 points) and secant.
    pub fn critical(&self, lo: f64, hi: f64) -> Result<f64> {
        let n = 32;
        let f = |lam: f64| -> Result<f64> { Ok(self.at_lambda(lam).spectrum()?[0].re) };
        let mut prev = (lo, f(lo)?);
        for i in 1..n {
            let lam = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let b = f(lam)?;
            if prev.1 < 0.0 && b >= 0.0 {
                let (mut a, mut c) = (prev, (lam, b));
                for _ in 0..100 {
                    let mut x = c.0 - c.1 * (c.0 - a.0) / (c.1 - a.1);
                    if !(x > a.0 && x < c.0) {
                        x = 0.5 * (a.0 + c.0);
                    }
                    let fx = f(x)?;
                    if fx < 0.0 {
                        a = (x, fx);
                    } else {
                        c = (x, fx);
                    }
                    if (c.0 - a.0) < 1e-10 * x || fx.abs() < 1e-13 {
                        return Ok(x);
                    }
                }
                return Ok(0.5 * (a.0 + c.0));
            }
            prev = (lam, b);
        }
        Err(Error::NoCriticality { lo, hi })
    }
}

/// Leading box eigenpair with real vectors: right e (||e||_M = 1) and adjoint
/// e* (e*^T M e = 1), sign fixed so that e projects positively on `reference`.
#[derive(Debug, Clone)]
pub struct BoxMode {
    pub beta: f64,
    pub second: Complex64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    pub alpha: f64,
}

pub fn box_mode(op: &BoxOperator, reference: &[f64]) -> Result<BoxMode> {
    let lm = op.leading()?;
    if lm.beta.im.abs() > 1e-9 * (1.0 + lm.beta.re.abs()) {
        return Err(Error::Numerical(format!("leading box eigenvalue is complex: {}", lm.beta)));
    }
    // rotate to real vectors
    let imax = (0..lm.right.len()).max_by(|&i, &j| lm.right[i].norm().partial_cmp(&lm.right[j].norm()).unwrap()).unwrap();
    let ph = lm.right[imax].conj() / lm.right[imax].norm();
    let mut right: Vec<f64> = lm.right.iter().map(|v| (v * ph).re).collect();
    let mut left: Vec<f64> = lm.left.iter().map(|v| (v * ph).re).collect();
    let mv = &op.mass * DVector::from_column_slice(&right);
    let nrm = DVector::from_column_slice(&right).dot(&mv).sqrt();
    right.iter_mut().for_each(|v| *v /= nrm);
    let mv = &op.mass * DVector::from_column_slice(&right);
    let p = DVector::from_column_slice(&left).dot(&mv);
    left.iter_mut().for_each(|v| *v /= p);
    let sref = DVector::from_column_slice(reference).dot(&(&op.mass * DVector::from_column_slice(&right)));
    if sref < 0.0 {
        right.iter_mut().for_each(|v| *v = -*v);
        left.iter_mut().for_each(|v| *v = -*v);
    }
    let e = DVector::from_column_slice(&right);
    let es = DVector::from_column_slice(&left);
    let alpha = es.dot(&(&op.rotation * &e));
    Ok(BoxMode { beta: lm.beta.re, second: lm.second, right, left, alpha })
}

/// b = -int ((w . grad) w) . w* over the box, evaluated by exact quadrature
/// in the Galerkin space.
pub fn cubic_coefficient_spectral(space: &BoxSpace, w: &[f64], wstar: &[f64]) -> f64 {
    let mut pw = Phys::default();
    let mut ps = Phys::default();
    space.evaluate(w, &mut pw);
    space.evaluate(wstar, &mut ps);
    let nrq = space.nrq();
    let mut s = 0.0;
    for p in 0..space.nzq() {
        for q in 0..nrq {
            let i = p * nrq + q;
            let az = pw.uz[i] * pw.uz_z[i] + pw.ur[i] * pw.uz_r[i];
            let ar = pw.uz[i] * pw.ur_z[i] + pw.ur[i] * pw.ur_r[i];
            let at = pw.uz[i] * pw.ut_z[i] + pw.ur[i] * pw.ut_r[i];
            s += space.wz[p] * space.wr[q] * (az * ps.uz[i] + ar * ps.ur[i] + at * ps.ut[i]);
        }
    }
    -s
}
