//! Axisymmetric time integration of the narrow-gap perturbation equations in
//! the closed box, on the dealiased Galerkin space of [`crate::boxmodel`].
//!
//! The state is the perturbation u of the Couette-Poiseuille flow. Each
//! step is Crank-Nicolson on diffusion and the rotation coupling (both
//! diagonal in the axial index), second-order Adams-Bashforth on advection
//! and the through-flow terms. The stream-function form makes every state
//! divergence-free to round-off, and the quadrature grid integrates the
//! triple products exactly, so the discrete advection is energy-neutral.

use std::fmt::Write as _;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baseflow::NondimParams;
use crate::boxmodel::{BoxSpace, Phys};
use crate::chandrasekhar::ChandrasekharMode;
use crate::error::{Error, Result};
use crate::field::{fmt17, Field};
use crate::spline::Spline2;
use crate::topology::{self, FieldView, Kind, TopologyReport, Verdict};

pub const DEFAULT_STEADY_TOL: f64 = 1e-8;
pub const DEFAULT_DT_MAX: f64 = 0.01;
/// Target and hard CFL numbers.
pub const CFL_TARGET: f64 = 0.25;
pub const CFL_MAX: f64 = 0.5;
const DT_FLOOR: f64 = 1e-9;
/// States below this L2 norm count as the trivial steady state.
const ZERO_STATE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Zero,
    /// Leading eigenvector of the discrete linear operator, scaled so that
    /// its projection amplitude on u0 equals `amplitude`.
    Eigenmode { amplitude: f64 },
    /// Seeded random solenoidal field with RMS speed `amplitude`.
    Random { amplitude: f64, seed: u64 },
    File(PathBuf),
    /// `amplitude * u0` plus optional seeded noise of RMS `noise`.
    NearCouette { amplitude: f64, noise: f64, seed: Option<u64> },
}

impl InitialCondition {
    /// The standard near-Couette-Poiseuille start: 1e-3 u0 with 1e-4 noise.
    pub fn near_couette(sign: f64, seed: Option<u64>) -> Self {
        InitialCondition::NearCouette { amplitude: 1e-3 * sign, noise: if seed.is_some() { 1e-4 } else { 0.0 }, seed }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DnsConfig {
    pub params: NondimParams,
    pub nz: usize,
    pub nr: usize,
    /// Largest time step; the actual step follows the CFL rule.
    pub dt: f64,
    pub t_end: f64,
    pub initial: InitialCondition,
    /// Diagnostics every this many steps (0 disables).
    pub diag_every: usize,
    pub literal_signs: bool,
    pub steady_tol: f64,
}

impl DnsConfig {
    pub fn new(params: NondimParams, nz: usize, nr: usize) -> Self {
        DnsConfig {
            params,
            nz,
            nr,
            dt: DEFAULT_DT_MAX,
            t_end: 100.0,
            initial: InitialCondition::Zero,
            diag_every: 50,
            literal_signs: false,
            steady_tol: DEFAULT_STEADY_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) {
            return Err(Error::Invalid(format!("need dt > 0 and t_end >= 0, got dt={} t_end={}", self.dt, self.t_end)));
        }
        if self.nz < 8 || self.nr < 8 {
            return Err(Error::Resolution(format!("grid {}x{} below 8x8", self.nz, self.nr)));
        }
        if !(self.params.l > 0.0) {
            return Err(Error::Invalid("L must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostic {
    pub t: f64,
    pub energy: f64,
    pub sigma: f64,
    pub div_norm: f64,
    pub adv_residual: f64,
}

pub fn diagnostics_csv(d: &[Diagnostic]) -> String {
    let mut s = String::from("t,energy,sigma,div_norm,adv_residual\n");
    for x in d {
        let _ = writeln!(s, "{},{},{},{},{}", fmt17(x.t), fmt17(x.energy), fmt17(x.sigma), fmt17(x.div_norm), fmt17(x.adv_residual));
    }
    s
}

/// Per-mode implicit operators.
#[derive(Debug, Clone)]
struct ModeSystem {
    idx: Vec<usize>,
    mass: DMatrix<f64>,
    lin: DMatrix<f64>,
    explicit_op: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub cfg: DnsConfig,
    pub space: BoxSpace,
    pub mode: ChandrasekharMode,
    x: Vec<f64>,
    prev_explicit: Option<Vec<f64>>,
    pub t: f64,
    pub dt: f64,
    pub steps: usize,
    modes: Vec<ModeSystem>,
    phys: Phys,
    /// u0 on the quadrature grid and its squared norm.
    ref_phys: Phys,
    ref_norm2: f64,
    /// Base-flow speed c = gamma (W0 + r(1-r)) and c' per radial node.
    c: Vec<f64>,
    cp: Vec<f64>,
    h: f64,
    pub diagnostics: Vec<Diagnostic>,
    last_change: f64,
}

/// Outcome of a run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub field: Field,
    pub converged: bool,
    pub sigma: f64,
    pub t: f64,
    pub diagnostics: Vec<Diagnostic>,
}

impl Simulation {
    pub fn new(cfg: DnsConfig) -> Result<Self> {
        cfg.validate()?;
        let p = cfg.params;
        let space = BoxSpace::for_grid(p.l, cfg.nz, cfg.nr)?;
        let mode = ChandrasekharMode::for_height(p.l, p.r1).wall_exact();
        let mut ref_phys = Phys::default();
        let xref = space.project_function(|z, r| mode.eigenfunction_bar(z, r))?;
        space.evaluate(&xref, &mut ref_phys);
        let ref_norm2 = space.inner_phys(&ref_phys, &ref_phys);
        let c = space.rq.iter().map(|r| p.gamma * (p.w0 + r * (1.0 - r))).collect();
        let cp = space.rq.iter().map(|r| p.gamma * (1.0 - 2.0 * r)).collect();
        let h = (p.l / (cfg.nz - 1) as f64).min(1.0 / (cfg.nr - 1) as f64);
        let dim = space.dim();
        let mut sim = Simulation {
            dt: cfg.dt,
            cfg,
            space,
            mode,
            x: vec![0.0; dim],
            prev_explicit: None,
            t: 0.0,
            steps: 0,
            modes: Vec::new(),
            phys: Phys::default(),
            ref_phys,
            ref_norm2,
            c,
            cp,
            h,
            diagnostics: Vec::new(),
            last_change: f64::INFINITY,
        };
        sim.build_modes()?;
        let x0 = sim.initial_state()?;
        sim.set_state(x0);
        sim.dt = sim.cfl_dt();
        sim.factor()?;
        Ok(sim)
    }

    fn build_modes(&mut self) -> Result<()> {
        let p = self.cfg.params;
        self.modes.clear();
        for m in 0..=self.space.mz {
            let (mass, lin, _) = self.space.mode_blocks(m, p.lambda, p.mu);
            let n = mass.nrows();
            self.modes.push(ModeSystem {
                idx: self.space.mode_indices(m),
                explicit_op: mass.clone(),
                lu: DMatrix::<f64>::identity(n, n).lu(),
                mass,
                lin,
            });
        }
        Ok(())
    }

    fn factor(&mut self) -> Result<()> {
        let dt = self.dt;
        for ms in &mut self.modes {
            let imp = &ms.mass - &ms.lin * (0.5 * dt);
            ms.explicit_op = &ms.mass + &ms.lin * (0.5 * dt);
            ms.lu = imp.lu();
            if !ms.lu.is_invertible() {
                return Err(Error::Numerical("singular implicit block".into()));
            }
        }
        self.prev_explicit = None;
        Ok(())
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    pub fn set_state(&mut self, x: Vec<f64>) {
        assert_eq!(x.len(), self.space.dim());
        self.x = x;
        self.prev_explicit = None;
        self.space.evaluate(&self.x, &mut self.phys);
    }

    /// u0 projected on the space.
    pub fn reference_state(&self) -> Result<Vec<f64>> {
        let m = self.mode;
        self.space.project_function(|z, r| m.eigenfunction_bar(z, r))
    }

    fn initial_state(&self) -> Result<Vec<f64>> {
        let dim = self.space.dim();
        match &self.cfg.initial {
            InitialCondition::Zero => Ok(vec![0.0; dim]),
            InitialCondition::Eigenmode { amplitude } => {
                let (_, v) = self.leading_linear_mode()?;
                let s = self.sigma_of(&v);
                Ok(v.iter().map(|x| x * amplitude / s).collect())
            }
            InitialCondition::Random { amplitude, seed } => Ok(self.random_state(*amplitude, *seed)),
            InitialCondition::NearCouette { amplitude, noise, seed } => {
                let mut x: Vec<f64> = self.reference_state()?.iter().map(|v| v * amplitude).collect();
                if let Some(seed) = seed {
                    let n = self.random_state(*noise, *seed);
                    x.iter_mut().zip(n).for_each(|(a, b)| *a += b);
                }
                Ok(x)
            }
            InitialCondition::File(path) => {
                let f = Field::read(path)?;
                self.project_field(&f)
            }
        }
    }

    fn random_state(&self, amplitude: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nb = self.space.nb;
        let mut x = vec![0.0; self.space.dim()];
        for m in 0..=self.space.mz {
            let idx = self.space.mode_indices(m);
            for (a, &i) in idx.iter().enumerate() {
                let radial = (a % nb) as f64;
                let decay = 1.0 / ((1.0 + m as f64).powi(2) * (1.0 + radial).powi(2));
                x[i] = rng.random_range(-1.0..1.0) * decay;
            }
        }
        let rms = (self.norm2(&x) / self.space.l).sqrt();
        if rms > 0.0 {
            x.iter_mut().for_each(|v| *v *= amplitude / rms);
        }
        x
    }

    /// Coefficients of a sampled field on this box, by spline interpolation
    /// and L2 projection.
    pub fn project_field(&self, f: &Field) -> Result<Vec<f64>> {
        if (f.l - self.space.l).abs() > 1e-9 * self.space.l {
            return Err(Error::GridMismatch(format!("field height {} vs configured {}", f.l, self.space.l)));
        }
        let (hz, hr) = (f.dz(), f.dr());
        let sz = Spline2::new(f.nz, f.nr, hz, hr, &f.uz);
        let sr = Spline2::new(f.nz, f.nr, hz, hr, &f.ur);
        let st = Spline2::new(f.nz, f.nr, hz, hr, &f.ut);
        self.space.project_function(|z, r| (sz.eval(z, r)[0][0], sr.eval(z, r)[0][0], st.eval(z, r)[0][0]))
    }

    fn norm2(&self, x: &[f64]) -> f64 {
        self.modes
            .iter()
            .map(|ms| {
                let v = DVector::from_iterator(ms.idx.len(), ms.idx.iter().map(|&i| x[i]));
                v.dot(&(&ms.mass * &v))
            })
            .sum()
    }

    fn sigma_of(&self, x: &[f64]) -> f64 {
        let mut p = Phys::default();
        self.space.evaluate(x, &mut p);
        self.space.inner_phys(&p, &self.ref_phys) / self.ref_norm2
    }

    /// Amplitude sigma = <u, u0> / <u0, u0>.
    pub fn sigma(&self) -> f64 {
        self.space.inner_phys(&self.phys, &self.ref_phys) / self.ref_norm2
    }

    /// Kinetic energy (1/2) ||u||^2.
    pub fn energy(&self) -> f64 {
        0.5 * self.norm2(&self.x)
    }

    /// Leading eigenpair of the linear part (rotation, diffusion and
    /// through-flow) on this space. Without through-flow the operator is
    /// block diagonal and each axial block is solved directly; otherwise
    /// Rayleigh-quotient iteration is started from u0.
    pub fn leading_linear_mode(&self) -> Result<(f64, Vec<f64>)> {
        let p = self.cfg.params;
        let dim = self.space.dim();
        if p.gamma == 0.0 {
            let mut best: Option<(f64, Vec<f64>)> = None;
            for ms in &self.modes {
                let ev = crate::linstab::pencil_spectrum(&ms.lin, None, &ms.mass)?;
                let lm = crate::linstab::pencil_leading(&crate::linstab::to_complex(&ms.lin), &ms.mass, &ev, true)?;
                if best.as_ref().map_or(true, |b| lm.beta.re > b.0) {
                    let mut x = vec![0.0; dim];
                    let imax = (0..lm.right.len())
                        .max_by(|&i, &j| lm.right[i].norm().total_cmp(&lm.right[j].norm()))
                        .unwrap_or(0);
                    let ph = lm.right[imax].conj() / lm.right[imax].norm();
                    for (a, &i) in ms.idx.iter().enumerate() {
                        x[i] = (lm.right[a] * ph).re;
                    }
                    best = Some((lm.beta.re, x));
                }
            }
            return best.ok_or_else(|| Error::Numerical("empty space".into()));
        }
        let mut mass = DMatrix::zeros(dim, dim);
        let mut lin = self.space.throughflow_matrix(p.gamma, p.w0, self.cfg.literal_signs);
        for ms in &self.modes {
            for (a, &i) in ms.idx.iter().enumerate() {
                for (b, &j) in ms.idx.iter().enumerate() {
                    mass[(i, j)] += ms.mass[(a, b)];
                    lin[(i, j)] += ms.lin[(a, b)];
                }
            }
        }
        let mut x = DVector::from_vec(self.reference_state()?);
        let mut shift = x.dot(&(&lin * &x)) / x.dot(&(&mass * &x));
        let mut residual = f64::INFINITY;
        for it in 0..12 {
            let lu = (&lin - &mass * shift).lu();
            let mx = &mass * &x;
            let y = lu.solve(&mx).ok_or_else(|| Error::Numerical("singular shifted operator".into()))?;
            let nrm = y.dot(&(&mass * &y)).sqrt();
            x = y / nrm;
            let lx = &lin * &x;
            let mx = &mass * &x;
            let rq = x.dot(&lx) / x.dot(&mx);
            residual = (&lx - &mx * rq).norm() / lx.norm().max(1e-300);
            if residual < 1e-10 {
                return Ok((rq, x.as_slice().to_vec()));
            }
            if it < 3 {
                shift = rq;
            }
        }
        Err(Error::EigenNoConvergence { iterations: 12, residual })
    }

    /// Explicit terms -(u.grad)u plus through-flow transport, projected.
    fn explicit(&self) -> Vec<f64> {
        let (nzq, nrq) = (self.space.nzq(), self.space.nrq());
        let ph = &self.phys;
        let n = nzq * nrq;
        let (mut fz, mut fr, mut ft) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let sgn = if self.cfg.literal_signs { -1.0 } else { 1.0 };
        for p in 0..nzq {
            for q in 0..nrq {
                let i = p * nrq + q;
                let (uz, ur) = (ph.uz[i], ph.ur[i]);
                let (c, cp) = (self.c[q], self.cp[q]);
                fz[i] = -(uz * ph.uz_z[i] + ur * ph.uz_r[i]) + c * ph.uz_z[i] + cp * ur;
                fr[i] = -(uz * ph.ur_z[i] + ur * ph.ur_r[i]) + sgn * c * ph.ur_z[i];
                ft[i] = -(uz * ph.ut_z[i] + ur * ph.ut_r[i]) + c * ph.ut_z[i];
            }
        }
        let mut out = vec![0.0; self.space.dim()];
        self.space.project(&fz, &fr, &ft, &mut out);
        out
    }

    /// Largest meridional speed (base flow included) on the quadrature grid.
    fn max_speed(&self) -> f64 {
        let nrq = self.space.nrq();
        let mut vmax = 0.0f64;
        for (i, (uz, ur)) in self.phys.uz.iter().zip(&self.phys.ur).enumerate() {
            let vz = uz - self.c[i % nrq];
            vmax = vmax.max((vz * vz + ur * ur).sqrt());
        }
        vmax
    }

    fn cfl_dt(&self) -> f64 {
        let v = self.max_speed();
        if v > 0.0 {
            self.cfg.dt.min(CFL_TARGET * self.h / v)
        } else {
            self.cfg.dt
        }
    }

    pub fn cfl(&self) -> f64 {
        self.dt * self.max_speed() / self.h
    }

    /// One step. The step size adapts when the CFL number leaves [0.1, 0.5].
    pub fn step(&mut self) -> Result<()> {
        let c = self.cfl();
        if c > CFL_MAX || (c < 0.1 && self.dt < self.cfg.dt) {
            let dt = self.cfl_dt();
            if dt < DT_FLOOR {
                return Err(Error::Cfl(format!(
                    "time step {dt:e} below floor at t={} (max speed {})",
                    self.t,
                    self.max_speed()
                )));
            }
            if dt != self.dt {
                self.dt = dt;
                self.factor()?;
            }
        }
        let e = self.explicit();
        let ab: Vec<f64> = match &self.prev_explicit {
            Some(prev) => e.iter().zip(prev).map(|(a, b)| 1.5 * a - 0.5 * b).collect(),
            None => e.clone(),
        };
        let mut next = vec![0.0; self.x.len()];
        for ms in &self.modes {
            let xm = DVector::from_iterator(ms.idx.len(), ms.idx.iter().map(|&i| self.x[i]));
            let mut rhs = &ms.explicit_op * xm;
            for (a, &i) in ms.idx.iter().enumerate() {
                rhs[a] += self.dt * ab[i];
            }
            let sol = ms.lu.solve(&rhs).ok_or_else(|| Error::Numerical("implicit solve failed".into()))?;
            for (a, &i) in ms.idx.iter().enumerate() {
                next[i] = sol[a];
            }
        }
        let diff: Vec<f64> = next.iter().zip(&self.x).map(|(a, b)| a - b).collect();
        let dn = self.norm2(&diff).sqrt();
        self.prev_explicit = Some(e);
        self.x = next;
        self.space.evaluate(&self.x, &mut self.phys);
        let xn = self.norm2(&self.x).sqrt();
        self.last_change = if xn < ZERO_STATE { 0.0 } else { dn / (self.dt * xn) };
        self.t += self.dt;
        self.steps += 1;
        if !self.x.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite state at t={}", self.t)));
        }
        if self.cfg.diag_every > 0 && self.steps % self.cfg.diag_every == 0 {
            self.record();
        }
        Ok(())
    }

    pub fn diagnostic(&self) -> Diagnostic {
        let (nzq, nrq) = (self.space.nzq(), self.space.nrq());
        let ph = &self.phys;
        let (mut div, mut adv) = (0.0, 0.0);
        for p in 0..nzq {
            for q in 0..nrq {
                let i = p * nrq + q;
                let w = self.space.wz[p] * self.space.wr[q];
                let d = ph.uz_z[i] + ph.ur_r[i];
                div += w * d * d;
                let az = ph.uz[i] * ph.uz_z[i] + ph.ur[i] * ph.uz_r[i];
                let ar = ph.uz[i] * ph.ur_z[i] + ph.ur[i] * ph.ur_r[i];
                let at = ph.uz[i] * ph.ut_z[i] + ph.ur[i] * ph.ut_r[i];
                adv += w * (az * ph.uz[i] + ar * ph.ur[i] + at * ph.ut[i]);
            }
        }
        Diagnostic { t: self.t, energy: self.energy(), sigma: self.sigma(), div_norm: div.sqrt(), adv_residual: adv }
    }

    fn record(&mut self) {
        let d = self.diagnostic();
        self.diagnostics.push(d);
    }

    /// Relative state change per unit time over the last step.
    pub fn change_rate(&self) -> f64 {
        self.last_change
    }

    pub fn is_steady(&self) -> bool {
        self.last_change < self.cfg.steady_tol
    }

    /// Perturbation sampled on the configured uniform grid.
    pub fn field(&self) -> Field {
        let p = self.cfg.params;
        let mut f = self.space.to_field(&self.x, self.cfg.nz, self.cfg.nr, p.r1);
        f.lambda = p.lambda;
        f.gamma = p.gamma;
        f.w0 = p.w0;
        f.t = self.t;
        f
    }

    /// Full meridional flow: perturbation plus the axial base flow.
    pub fn total_field(&self) -> Field {
        let p = self.cfg.params;
        let mut f = self.field();
        for i in 0..f.nz {
            for j in 0..f.nr {
                let rb = f.rbar(j);
                let q = f.idx(i, j);
                f.uz[q] -= p.gamma * (p.w0 + rb * (1.0 - rb));
            }
        }
        f
    }

    /// Exact evaluator of the perturbation's meridional part.
    pub fn view(&self) -> FieldView {
        let space = self.space.clone();
        let x = self.x.clone();
        FieldView::analytic(space.l, self.cfg.params.r1, move |z, r| space.meridional_derivs(&x, z, r))
    }

    /// Exact evaluator of the full meridional flow (perturbation plus
    /// base through-flow).
    pub fn total_view(&self) -> FieldView {
        let space = self.space.clone();
        let x = self.x.clone();
        let p = self.cfg.params;
        FieldView::analytic(space.l, p.r1, move |z, r| {
            let mut d = space.meridional_derivs(&x, z, r);
            d[0][0][0] -= p.gamma * (p.w0 + r * (1.0 - r));
            d[0][1][0] -= p.gamma * (1.0 - 2.0 * r);
            d[0][2][0] += 2.0 * p.gamma;
            d
        })
    }

    /// Integrate until steady (relative change per unit time below the
    /// configured tolerance) or until `t_end`.
    pub fn run_to_steady(&mut self) -> Result<RunResult> {
        self.run_until(|_| false)
    }

    /// As [`run_to_steady`], with an observer called after every step that
    /// may stop the run early by returning true.
    pub fn run_until(&mut self, mut stop: impl FnMut(&Simulation) -> bool) -> Result<RunResult> {
        if self.cfg.diag_every > 0 && self.diagnostics.is_empty() {
            self.record();
        }
        let mut converged = false;
        while self.t < self.cfg.t_end {
            self.step()?;
            if self.is_steady() {
                converged = true;
                break;
            }
            if stop(self) {
                break;
            }
        }
        if self.cfg.diag_every > 0 {
            self.record();
        }
        Ok(RunResult {
            field: self.field(),
            converged,
            sigma: self.sigma(),
            t: self.t,
            diagnostics: self.diagnostics.clone(),
        })
    }
}

/// One time step applied to a sampled state.
pub fn step(state: &Field, cfg: &DnsConfig) -> Result<Field> {
    let mut c = cfg.clone();
    c.initial = InitialCondition::Zero;
    c.diag_every = 0;
    let mut sim = Simulation::new(c)?;
    state.same_grid(&Field::zeros(cfg.nz, cfg.nr, cfg.params.l, cfg.params.r1))?;
    let x = sim.project_field(state)?;
    sim.set_state(x);
    sim.t = state.t;
    sim.step()?;
    Ok(sim.field())
}

pub fn run_to_steady(cfg: &DnsConfig) -> Result<RunResult> {
    Simulation::new(cfg.clone())?.run_to_steady()
}

/// Topology class of a meridional flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowClass {
    /// No interior singular points.
    Unseparated,
    /// Centers only, each cut off from the shear flow at a wall.
    BoundaryAttached { centers: usize },
    /// Center-saddle pairs in the interior.
    InteriorPairs { centers: usize, saddles: usize },
    Other { centers: usize, saddles: usize, degenerate: usize },
}

impl FlowClass {
    pub fn of(points: &[topology::SingularPoint]) -> Self {
        let count = |k: Kind| points.iter().filter(|p| p.kind == k).count();
        let (c, s, d) = (count(Kind::Center), count(Kind::Saddle), count(Kind::Degenerate));
        match (c, s, d) {
            (0, 0, 0) => FlowClass::Unseparated,
            (c, 0, 0) => FlowClass::BoundaryAttached { centers: c },
            (c, s, 0) if c == s => FlowClass::InteriorPairs { centers: c, saddles: s },
            (c, s, d) => FlowClass::Other { centers: c, saddles: s, degenerate: d },
        }
    }

    pub fn is_separated(self) -> bool {
        self != FlowClass::Unseparated
    }

    pub fn name(self) -> String {
        match self {
            FlowClass::Unseparated => "unseparated".into(),
            FlowClass::BoundaryAttached { centers } => format!("boundary-attached({centers})"),
            FlowClass::InteriorPairs { centers, .. } => format!("interior-pairs({centers})"),
            FlowClass::Other { centers, saddles, degenerate } => format!("other({centers},{saddles},{degenerate})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransitionOptions {
    /// Topology of the full flow is checked every this many time units.
    pub snapshot_every: f64,
    /// Steady tolerance used for these runs.
    pub steady_tol: f64,
    /// Sign of the initial u0 component.
    pub sign: f64,
    pub seed: Option<u64>,
}

impl Default for TransitionOptions {
    fn default() -> Self {
        TransitionOptions { snapshot_every: 1.0, steady_tol: 1e-4, sign: 1.0, seed: None }
    }
}

#[derive(Debug, Clone)]
pub struct TransitionEvent {
    pub lambda: f64,
    /// First snapshot time with a separated topology.
    pub t0: Option<f64>,
    pub t_final: f64,
    pub converged: bool,
    pub sigma: f64,
    pub final_class: FlowClass,
    pub report: TopologyReport,
    pub flags: Vec<String>,
}

impl TransitionEvent {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            fmt17(self.lambda),
            self.t0.map(fmt17).unwrap_or_else(|| "none".into()),
            fmt17(self.t_final),
            self.converged,
            fmt17(self.sigma),
            self.final_class.name(),
            self.flags.join(";")
        )
    }
}

pub const TRANSITION_CSV_HEADER: &str = "lambda,t0,t_final,converged,sigma,class,flags";

/// For each lambda, integrate from the near-Couette-Poiseuille state and
/// watch the topology of the full flow.
pub fn transition_experiment(cfg: &DnsConfig, lambdas: &[f64], opt: &TransitionOptions) -> Result<Vec<TransitionEvent>> {
    if lambdas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Invalid("lambda list must be ordered".into()));
    }
    let mut out = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let mut c = cfg.clone();
        c.params = c.params.with_lambda(lam);
        c.initial = InitialCondition::near_couette(opt.sign, opt.seed);
        c.steady_tol = opt.steady_tol;
        let mut sim = Simulation::new(c)?;
        let mut t0 = None;
        let mut next = opt.snapshot_every;
        let mut err = None;
        let res = sim.run_until(|s| {
            if s.t >= next {
                next += opt.snapshot_every;
                match topology::find_interior_singularities(&s.total_view()) {
                    Ok(p) if t0.is_none() && FlowClass::of(&p).is_separated() => t0 = Some(s.t),
                    Ok(_) => {}
                    Err(e) => err = Some(e.to_string()),
                }
            }
            false
        })?;
        let report = topology::analyze(&sim.total_view())?;
        let class = FlowClass::of(&report.interior);
        let mut flags = Vec::new();
        if let Some(e) = err {
            flags.push(format!("snapshot: {e}"));
        }
        if !res.converged {
            flags.push("not converged".into());
        }
        if let Verdict::Inconclusive(c) = report.verdict {
            flags.push(format!("inconclusive clause {c}"));
        }
        if class.is_separated() && t0.is_none() {
            t0 = Some(res.t);
        }
        out.push(TransitionEvent {
            lambda: lam,
            t0,
            t_final: res.t,
            converged: res.converged,
            sigma: res.sigma,
            final_class: class,
            report,
            flags,
        });
    }
    Ok(out)
}
