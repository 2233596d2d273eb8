//! Topology of 2D incompressible fields on M = [0, L] x [r1, r1 + 1]:
//! interior singular points, boundary (wall-shear) singular points,
//! the structural-stability test for no-slip fields, and detectors for
//! boundary-layer and interior separation along a one-parameter family.
//!
//! Zeros are searched in the wall-reduced field g = v / (rbar (1 - rbar)),
//! which has the same interior zeros as v but does not vanish identically
//! on a no-slip wall; its wall zeros are the points of vanishing wall shear.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::spline::Spline2;

/// Partial derivatives `[a][b][c]` = d^a/dz^a d^b/drbar^b of component c
/// (0 = v_z, 1 = v_r), orders up to 3 in each variable.
pub type Derivs = [[[f64; 2]; 4]; 4];

type Eval = dyn Fn(f64, f64) -> Derivs + Send + Sync;

/// A planar field on the meridional rectangle, given by an evaluator of
/// its derivative table in (z, rbar).
#[derive(Clone)]
pub struct FieldView {
    pub l: f64,
    pub r1: f64,
    /// Node counts when the view interpolates a sampled field.
    pub grid: Option<(usize, usize)>,
    f: Arc<Eval>,
}

impl std::fmt::Debug for FieldView {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldView").field("l", &self.l).field("r1", &self.r1).field("grid", &self.grid).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Wall {
    Inner,
    Outer,
}

impl Wall {
    pub fn name(self) -> &'static str {
        match self {
            Wall::Inner => "inner",
            Wall::Outer => "outer",
        }
    }
    pub fn rbar(self) -> f64 {
        match self {
            Wall::Inner => 0.0,
            Wall::Outer => 1.0,
        }
    }
    /// Sign of d/dn in terms of d/drbar.
    pub fn normal_sign(self) -> f64 {
        match self {
            Wall::Inner => 1.0,
            Wall::Outer => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Center,
    Saddle,
    Degenerate,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Center => "center",
            Kind::Saddle => "saddle",
            Kind::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Context {
    Interior,
    Boundary(Wall),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPoint {
    pub z: f64,
    pub rbar: f64,
    pub r: f64,
    pub kind: Kind,
    pub index: i32,
    pub context: Context,
}

impl FieldView {
    pub fn analytic(l: f64, r1: f64, f: impl Fn(f64, f64) -> Derivs + Send + Sync + 'static) -> Self {
        FieldView { l, r1, grid: None, f: Arc::new(f) }
    }

    /// Cubic-spline view of the meridional components of a sampled field.
    pub fn from_field(field: &Field) -> Self {
        let (hz, hr) = (field.dz(), field.dr());
        let sz = Spline2::new(field.nz, field.nr, hz, hr, &field.uz);
        let sr = Spline2::new(field.nz, field.nr, hz, hr, &field.ur);
        let f = move |z: f64, r: f64| {
            let (a, b) = (sz.eval(z, r), sr.eval(z, r));
            let mut d = [[[0.0; 2]; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    d[i][j] = [a[i][j], b[i][j]];
                }
            }
            d
        };
        FieldView { l: field.l, r1: field.r1, grid: Some((field.nz, field.nr)), f: Arc::new(f) }
    }

    #[inline]
    pub fn derivs(&self, z: f64, rbar: f64) -> Derivs {
        (self.f)(z, rbar)
    }

    #[inline]
    pub fn value(&self, z: f64, rbar: f64) -> [f64; 2] {
        self.derivs(z, rbar)[0][0]
    }

    /// Jacobian `[i][j]` = d v_i / d x_j with x = (z, rbar).
    pub fn jacobian(&self, z: f64, rbar: f64) -> [[f64; 2]; 2] {
        jac_of(&self.derivs(z, rbar))
    }

    /// Field of d/drbar of this one (the shear-derivative field).
    pub fn r_derivative(&self) -> FieldView {
        let inner = self.f.clone();
        let f = move |z: f64, r: f64| {
            let d = inner(z, r);
            let mut o = [[[0.0; 2]; 4]; 4];
            for a in 0..4 {
                for b in 0..3 {
                    o[a][b] = d[a][b + 1];
                }
            }
            o
        };
        FieldView { l: self.l, r1: self.r1, grid: self.grid, f: Arc::new(f) }
    }

    /// Reduced field g = v / (rbar (1 - rbar)) and its Jacobian. At the walls
    /// the limit is taken from the derivatives (valid for no-slip fields).
    pub fn reduced(&self, z: f64, rbar: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let eps = 1e-7;
        let d = self.derivs(z, rbar);
        if rbar < eps || rbar > 1.0 - eps {
            // one-sided limit v / rbar ~ dv/dn, v/rbar^2 terms from second derivatives
            let s = if rbar < eps { 1.0 } else { -1.0 };
            let g = [s * d[0][1][0], s * d[0][1][1]];
            let j = [
                [s * d[1][1][0], 0.5 * s * d[0][2][0] + d[0][1][0]],
                [s * d[1][1][1], 0.5 * s * d[0][2][1] + d[0][1][1]],
            ];
            return (g, j);
        }
        let w = rbar * (1.0 - rbar);
        let dw = 1.0 - 2.0 * rbar;
        let mut g = [0.0; 2];
        let mut j = [[0.0; 2]; 2];
        for c in 0..2 {
            g[c] = d[0][0][c] / w;
            j[c][0] = d[1][0][c] / w;
            j[c][1] = (d[0][1][c] - g[c] * dw) / w;
        }
        (g, j)
    }

    /// Divergence at a point.
    pub fn divergence(&self, z: f64, rbar: f64) -> f64 {
        let d = self.derivs(z, rbar);
        d[1][0][0] + d[0][1][1]
    }
}

fn jac_of(d: &Derivs) -> [[f64; 2]; 2] {
    [[d[1][0][0], d[0][1][0]], [d[1][0][1], d[0][1][1]]]
}

fn det2(j: &[[f64; 2]; 2]) -> f64 {
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

fn fro2(j: &[[f64; 2]; 2]) -> f64 {
    j.iter().flatten().map(|v| v * v).sum()
}

/// Tolerances and resolutions used by the classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopologyOptions {
    /// Sweep cells in z and r (0 picks a default from the view).
    pub nz_sweep: usize,
    pub nr_sweep: usize,
    pub newton_tol: f64,
    /// |det J| < tol |J|^2 counts as degenerate.
    pub degeneracy_tol: f64,
    pub corner_cells: usize,
    pub closure_tol: f64,
    pub seed_offset: f64,
    /// Separatrix arc-length budget in units of (L + 1).
    pub arc_budget: f64,
    /// Wall samples for the boundary scan (0 picks a default).
    pub wall_samples: usize,
}

impl Default for TopologyOptions {
    fn default() -> Self {
        TopologyOptions {
            nz_sweep: 0,
            nr_sweep: 0,
            newton_tol: 1e-10,
            degeneracy_tol: 1e-8,
            corner_cells: 2,
            closure_tol: 1e-4,
            seed_offset: 1e-5,
            arc_budget: 20.0,
            wall_samples: 0,
        }
    }
}

impl TopologyOptions {
    fn sweep(&self, v: &FieldView) -> (usize, usize) {
        if self.nz_sweep > 0 && self.nr_sweep > 0 {
            return (self.nz_sweep, self.nr_sweep);
        }
        match v.grid {
            Some((nz, nr)) => (2 * (nz - 1), 2 * (nr - 1)),
            None => (((96.0 * v.l).ceil() as usize).max(64), 96),
        }
    }

    fn wall_n(&self, v: &FieldView) -> usize {
        if self.wall_samples > 0 {
            return self.wall_samples;
        }
        match v.grid {
            Some((nz, _)) => 8 * (nz - 1),
            None => ((400.0 * v.l).ceil() as usize).max(400),
        }
    }

    /// Corner margin in z.
    fn corner(&self, v: &FieldView) -> f64 {
        let n = match v.grid {
            Some((nz, _)) => nz - 1,
            None => self.sweep(v).0,
        };
        self.corner_cells as f64 * v.l / n as f64
    }
}

/// Newton on the reduced field from (z, rbar), step-limited to `hmax`.
fn newton(v: &FieldView, mut z: f64, mut r: f64, hmax: f64, scale: f64, tol: f64) -> Option<(f64, f64)> {
    for _ in 0..60 {
        let (g, j) = v.reduced(z, r);
        let det = det2(&j);
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dz = (j[1][1] * g[0] - j[0][1] * g[1]) / det;
        let dr = (-j[1][0] * g[0] + j[0][0] * g[1]) / det;
        let n = (dz * dz + dr * dr).sqrt();
        let s = if n > hmax { hmax / n } else { 1.0 };
        z -= s * dz;
        r -= s * dr;
        if !(z > -hmax && z < v.l + hmax && r > -hmax && r < 1.0 + hmax) {
            return None;
        }
        let val = v.value(z.clamp(0.0, v.l), r.clamp(0.0, 1.0));
        if s == 1.0 && n < 1e-13 * (1.0 + v.l) || (val[0].hypot(val[1]) < tol * scale && n < 1e-9) {
            return Some((z, r));
        }
    }
    let val = v.value(z.clamp(0.0, v.l), r.clamp(0.0, 1.0));
    if val[0].hypot(val[1]) < tol * scale {
        Some((z, r))
    } else {
        None
    }
}

/// Classify a zero from its Jacobian.
pub fn classify(j: &[[f64; 2]; 2], tol: f64) -> (Kind, i32) {
    let d = det2(j);
    let n2 = fro2(j);
    if n2 == 0.0 || d.abs() < tol * n2 {
        (Kind::Degenerate, 0)
    } else if d < 0.0 {
        (Kind::Saddle, -1)
    } else {
        (Kind::Center, 1)
    }
}

/// All zeros of v in the open rectangle.
pub fn find_interior_singularities(v: &FieldView) -> Result<Vec<SingularPoint>> {
    find_interior_singularities_with(v, &TopologyOptions::default())
}

pub fn find_interior_singularities_with(v: &FieldView, opt: &TopologyOptions) -> Result<Vec<SingularPoint>> {
    let (nz, nr) = opt.sweep(v);
    let hz = v.l / nz as f64;
    let hr = 1.0 / nr as f64;
    let wall_eps = 1e-6;
    let rnode = |j: usize| (j as f64 * hr).clamp(wall_eps, 1.0 - wall_eps);
    let mut g = vec![[0.0; 2]; (nz + 1) * (nr + 1)];
    let mut scale = 0.0f64;
    for i in 0..=nz {
        for j in 0..=nr {
            let (z, r) = (i as f64 * hz, rnode(j));
            g[i * (nr + 1) + j] = v.reduced(z, r).0;
            let val = v.value(z, r);
            scale = scale.max(val[0].hypot(val[1]));
        }
    }
    if scale == 0.0 {
        return Ok(Vec::new());
    }
    let at = |i: usize, j: usize| g[i * (nr + 1) + j];
    let mut found: Vec<SingularPoint> = Vec::new();
    let hmax = 2.0 * hz.max(hr);
    let dedupe = 1e-6 * (1.0 + v.l);
    for i in 0..nz {
        for j in 0..nr {
            let c = [at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)];
            let changes = |k: usize| {
                let mn = c.iter().map(|x| x[k]).fold(f64::INFINITY, f64::min);
                let mx = c.iter().map(|x| x[k]).fold(f64::NEG_INFINITY, f64::max);
                mn <= 0.0 && mx >= 0.0
            };
            if !(changes(0) && changes(1)) {
                continue;
            }
            let (z0, r0) = ((i as f64 + 0.5) * hz, (j as f64 + 0.5) * hr);
            let root = newton(v, z0, r0, hmax, scale, opt.newton_tol);
            let (z, r) = match root {
                Some(p) => p,
                None => {
                    // keep a near-zero that Newton cannot resolve as degenerate
                    let mut best = (f64::INFINITY, z0, r0);
                    for a in 0..=4 {
                        for b in 0..=4 {
                            let (zz, rr) = ((i as f64 + a as f64 / 4.0) * hz, rnode(j).max((j as f64 + b as f64 / 4.0) * hr));
                            let val = v.value(zz, rr.min(1.0 - wall_eps));
                            let m = val[0].hypot(val[1]);
                            if m < best.0 {
                                best = (m, zz, rr);
                            }
                        }
                    }
                    if best.0 < 1e-6 * scale && best.2 > wall_eps && best.2 < 1.0 - wall_eps {
                        if !found.iter().any(|p| (p.z - best.1).hypot(p.rbar - best.2) < hmax) {
                            found.push(SingularPoint {
                                z: best.1,
                                rbar: best.2,
                                r: v.r1 + best.2,
                                kind: Kind::Degenerate,
                                index: 0,
                                context: Context::Interior,
                            });
                        }
                    }
                    continue;
                }
            };
            if !(z > 0.0 && z < v.l && r > 1e-9 && r < 1.0 - 1e-9) {
                continue;
            }
            if found.iter().any(|p| (p.z - z).hypot(p.rbar - r) < dedupe) {
                continue;
            }
            let j = v.jacobian(z, r);
            let (kind, mut index) = classify(&j, opt.degeneracy_tol);
            if kind == Kind::Degenerate {
                let rad = 0.25 * hz.min(hr).min(r).min(1.0 - r);
                index = index_of(v, &circle(z, r, rad, 64)).unwrap_or(0);
            }
            found.push(SingularPoint { z, rbar: r, r: v.r1 + r, kind, index, context: Context::Interior });
        }
    }
    found.sort_by(|a, b| a.z.total_cmp(&b.z).then(a.rbar.total_cmp(&b.rbar)));
    Ok(found)
}

/// Closed polygon approximating a circle.
pub fn circle(z: f64, r: f64, rad: f64, n: usize) -> Vec<(f64, f64)> {
    (0..n).map(|k| {
        let t = 2.0 * PI * k as f64 / n as f64;
        (z + rad * t.cos(), r + rad * t.sin())
    }).collect()
}

/// Rectangle inset by `d` from the boundary of M, counter-clockwise.
pub fn inset_rectangle(l: f64, d: f64, n: usize) -> Vec<(f64, f64)> {
    let mut p = Vec::new();
    let corners = [(d, d), (l - d, d), (l - d, 1.0 - d), (d, 1.0 - d)];
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        for i in 0..n {
            let t = i as f64 / n as f64;
            p.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
        }
    }
    p
}

/// Winding number of an arbitrary planar map along a closed polyline.
pub fn winding(f: &dyn Fn(f64, f64) -> [f64; 2], path: &[(f64, f64)]) -> Result<i32> {
    if path.len() < 3 {
        return Err(Error::Invalid("loop needs at least three vertices".into()));
    }
    let scale = path.iter().map(|&(z, r)| {
        let v = f(z, r);
        v[0].hypot(v[1])
    }).fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let ang = |z: f64, r: f64| -> Result<f64> {
        let v = f(z, r);
        if v[0].hypot(v[1]) <= tol {
            return Err(Error::LoopThroughSingularity(v[0].hypot(v[1])));
        }
        Ok(v[1].atan2(v[0]))
    };
    let wrap = |d: f64| {
        let mut d = d % (2.0 * PI);
        if d > PI {
            d -= 2.0 * PI;
        } else if d < -PI {
            d += 2.0 * PI;
        }
        d
    };
    fn seg(
        ang: &dyn Fn(f64, f64) -> Result<f64>,
        wrap: &dyn Fn(f64) -> f64,
        a: (f64, f64),
        b: (f64, f64),
        ta: f64,
        tb: f64,
        depth: u32,
    ) -> Result<f64> {
        let d = wrap(tb - ta);
        if d.abs() < 0.5 * PI {
            return Ok(d);
        }
        if depth > 48 {
            return Err(Error::LoopThroughSingularity(0.0));
        }
        let m = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
        let tm = ang(m.0, m.1)?;
        Ok(seg(ang, wrap, a, m, ta, tm, depth + 1)? + seg(ang, wrap, m, b, tm, tb, depth + 1)?)
    }
    let mut total = 0.0;
    let n = path.len();
    let mut ta = ang(path[0].0, path[0].1)?;
    let t0 = ta;
    for k in 0..n {
        let b = path[(k + 1) % n];
        let tb = if k + 1 == n { t0 } else { ang(b.0, b.1)? };
        total += seg(&ang, &wrap, path[k], b, ta, tb, 0)?;
        ta = tb;
    }
    Ok((total / (2.0 * PI)).round() as i32)
}

/// Winding number of the view along a closed polyline in (z, rbar).
pub fn index_of(v: &FieldView, path: &[(f64, f64)]) -> Result<i32> {
    winding(&|z, r| v.value(z, r), path)
}

/// Index of a wall point: winding over the half-disk boundary of the field
/// doubled across the wall (tangential part even, normal part odd), which
/// is a full circle for the extended field.
pub fn boundary_index(v: &FieldView, z: f64, wall: Wall, rad: f64) -> Result<i32> {
    let rw = wall.rbar();
    let f = |zz: f64, rr: f64| {
        let inside = match wall {
            Wall::Inner => rr >= 0.0,
            Wall::Outer => rr <= 1.0,
        };
        if inside {
            v.value(zz, rr)
        } else {
            let m = v.value(zz, 2.0 * rw - rr);
            [m[0], -m[1]]
        }
    };
    winding(&f, &circle(z, rw, rad, 64))
}

/// As [`boundary_index`] for the wall-reduced field v / n.
pub fn reduced_boundary_index(v: &FieldView, z: f64, wall: Wall, rad: f64) -> Result<i32> {
    let rw = wall.rbar();
    let f = |zz: f64, rr: f64| {
        let inside = match wall {
            Wall::Inner => rr >= 0.0,
            Wall::Outer => rr <= 1.0,
        };
        if inside {
            v.reduced(zz, rr).0
        } else {
            let m = v.reduced(zz, 2.0 * rw - rr).0;
            [m[0], -m[1]]
        }
    };
    winding(&f, &circle(z, rw, rad, 64))
}

/// Whether v vanishes along a wall (to 1e-8 of its interior maximum).
pub fn is_no_slip(v: &FieldView, wall: Wall) -> bool {
    let n = 64;
    let mut inner = 0.0f64;
    let mut on = 0.0f64;
    for i in 0..=n {
        let z = v.l * i as f64 / n as f64;
        for j in 1..8 {
            let x = v.value(z, j as f64 / 8.0);
            inner = inner.max(x[0].hypot(x[1]));
        }
        let x = v.value(z, wall.rbar());
        on = on.max(x[0].hypot(x[1]));
    }
    on <= 1e-8 * inner
}

/// Wall shear dv_tau/dn and its z-derivatives at a wall point.
fn wall_shear(v: &FieldView, z: f64, wall: Wall) -> [f64; 3] {
    let d = v.derivs(z, wall.rbar());
    let s = wall.normal_sign();
    [s * d[0][1][0], s * d[1][1][0], s * d[2][1][0]]
}

/// The 2x2 nondegeneracy matrix of a wall point, in (tau, n) = (z, n).
fn wall_matrix(v: &FieldView, z: f64, wall: Wall) -> [[f64; 2]; 2] {
    let d = v.derivs(z, wall.rbar());
    let s = wall.normal_sign();
    // u_tau = v_z, u_n = s v_r; d/dn = s d/drbar
    [[s * d[1][1][0], d[0][2][0]], [d[1][1][1], s * d[0][2][1]]]
}

/// Points of vanishing wall shear on one wall. Those closer than the corner
/// margin to an end are returned in the second list.
pub fn boundary_classify(v: &FieldView, wall: Wall) -> Result<(Vec<SingularPoint>, Vec<SingularPoint>)> {
    boundary_classify_with(v, wall, &TopologyOptions::default())
}

pub fn boundary_classify_with(v: &FieldView, wall: Wall, opt: &TopologyOptions) -> Result<(Vec<SingularPoint>, Vec<SingularPoint>)> {
    if !is_no_slip(v, wall) {
        return Err(Error::Invalid(format!("field does not vanish on the {} wall", wall.name())));
    }
    let n = opt.wall_n(v);
    let h = v.l / n as f64;
    let s: Vec<f64> = (0..=n).map(|i| wall_shear(v, i as f64 * h, wall)[0]).collect();
    let scale = s.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if scale == 0.0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let tol = 1e-9 * scale;
    let mut zs: Vec<f64> = Vec::new();
    let push = |zs: &mut Vec<f64>, z: f64| {
        if !zs.iter().any(|p| (p - z).abs() < 1e-9 * (1.0 + v.l)) {
            zs.push(z);
        }
    };
    for i in 0..n {
        if s[i] == 0.0 {
            push(&mut zs, i as f64 * h);
        } else if s[i] * s[i + 1] < 0.0 {
            let (mut a, mut b) = (i as f64 * h, (i + 1) as f64 * h);
            let fa = s[i];
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = wall_shear(v, m, wall)[0];
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if (fm > 0.0) == (fa > 0.0) {
                    a = m;
                } else {
                    b = m;
                }
                if b - a < 1e-15 * (1.0 + v.l) {
                    break;
                }
            }
            push(&mut zs, 0.5 * (a + b));
        }
    }
    // touching zeros: local extrema of |s| that come within tolerance of 0
    for i in 1..n {
        if s[i].abs() <= s[i - 1].abs() && s[i].abs() <= s[i + 1].abs() && s[i - 1] * s[i + 1] > 0.0 {
            let mut z = i as f64 * h;
            for _ in 0..50 {
                let w = wall_shear(v, z, wall);
                if w[2] == 0.0 {
                    break;
                }
                let dz = (w[1] / w[2]).clamp(-h, h);
                z -= dz;
                if dz.abs() < 1e-15 * (1.0 + v.l) {
                    break;
                }
            }
            if z > 0.0 && z < v.l && wall_shear(v, z, wall)[0].abs() < tol {
                push(&mut zs, z);
            }
        }
    }
    zs.sort_by(f64::total_cmp);
    let margin = opt.corner(v);
    let (mut pts, mut corner) = (Vec::new(), Vec::new());
    for z in zs {
        let m = wall_matrix(v, z, wall);
        let (kind, index) = if det2(&m).abs() < opt.degeneracy_tol * fro2(&m).max(f64::MIN_POSITIVE) {
            (Kind::Degenerate, 0)
        } else {
            (Kind::Saddle, 0)
        };
        let p = SingularPoint { z, rbar: wall.rbar(), r: v.r1 + wall.rbar(), kind, index, context: Context::Boundary(wall) };
        if z < margin || z > v.l - margin {
            corner.push(p);
        } else {
            pts.push(p);
        }
    }
    Ok((pts, corner))
}

/// Dormand-Prince 5(4) integration of dx/ds = f(x)/|f(x)| (arc-length
/// parametrization) until `stop` returns Some or the budget is spent.
pub fn trace<T>(
    f: &dyn Fn(f64, f64) -> [f64; 2],
    start: (f64, f64),
    budget: f64,
    hmax: f64,
    mut stop: impl FnMut(f64, (f64, f64), (f64, f64)) -> Option<T>,
) -> (Vec<(f64, f64)>, Option<T>) {
    const C: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let unit = |x: (f64, f64)| -> Option<[f64; 2]> {
        let v = f(x.0, x.1);
        let n = v[0].hypot(v[1]);
        if n == 0.0 || !n.is_finite() {
            None
        } else {
            Some([v[0] / n, v[1] / n])
        }
    };
    let mut path = vec![start];
    let mut x = start;
    let mut s = 0.0;
    let mut h = hmax.min(1e-3);
    let tol = 1e-12;
    while s < budget {
        let mut k = [[0.0; 2]; 7];
        let Some(k0) = unit(x) else { return (path, None) };
        k[0] = k0;
        let mut ok = true;
        for st in 0..6 {
            let mut y = x;
            for j in 0..=st {
                y.0 += h * C[st][j] * k[j][0];
                y.1 += h * C[st][j] * k[j][1];
            }
            match unit(y) {
                Some(v) => k[st + 1] = v,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            h *= 0.25;
            if h < 1e-14 {
                return (path, None);
            }
            continue;
        }
        let mut xn = x;
        let mut err = [0.0; 2];
        for j in 0..7 {
            if j < 6 {
                xn.0 += h * C[5][j] * k[j][0];
                xn.1 += h * C[5][j] * k[j][1];
            }
            err[0] += h * E[j] * k[j][0];
            err[1] += h * E[j] * k[j][1];
        }
        let e = err[0].hypot(err[1]) / tol;
        if e <= 1.0 {
            let prev = x;
            x = xn;
            s += h;
            path.push(x);
            if let Some(t) = stop(s, prev, x) {
                return (path, Some(t));
            }
        }
        let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * fac).min(hmax);
        if h < 1e-14 {
            return (path, None);
        }
    }
    (path, None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Separatrix {
    /// Identifier of the originating point, e.g. "S0" or "B:inner:1".
    pub from: String,
    pub to: Option<String>,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    /// First violated clause (1, 2 or 3).
    Unstable(u8),
    Inconclusive(u8),
}

#[derive(Debug, Clone)]
pub struct TopologyReport {
    pub l: f64,
    pub r1: f64,
    pub interior: Vec<SingularPoint>,
    pub boundary: Vec<SingularPoint>,
    pub corner: Vec<SingularPoint>,
    pub separatrices: Vec<Separatrix>,
    pub cell_count: usize,
    pub verdict: Verdict,
    pub index_sum: i32,
    /// Winding along a contour just inside the boundary (reduced field).
    pub boundary_winding: Option<i32>,
    pub events: Vec<SeparationEvent>,
}

fn fmtc(v: f64) -> String {
    let v = if v.abs() < 5e-13 { 0.0 } else { v };
    format!("{v:.10}")
}

impl TopologyReport {
    pub fn centers(&self) -> impl Iterator<Item = &SingularPoint> {
        self.interior.iter().filter(|p| p.kind == Kind::Center)
    }
    pub fn saddles(&self) -> impl Iterator<Item = &SingularPoint> {
        self.interior.iter().filter(|p| p.kind == Kind::Saddle)
    }

    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        for p in &self.interior {
            let _ = writeln!(s, "SING interior z={} r={} kind={} index={}", fmtc(p.z), fmtc(p.r), p.kind.name(), p.index);
        }
        for p in self.boundary.iter().filter(|p| p.kind == Kind::Saddle) {
            if let Context::Boundary(w) = p.context {
                let _ = writeln!(s, "BSADDLE wall={} z={}", w.name(), fmtc(p.z));
            }
        }
        for e in &self.events {
            let _ = writeln!(s, "{}", e.line());
        }
        let (st, clause) = match self.verdict {
            Verdict::Stable => ("true", 0),
            Verdict::Unstable(c) => ("false", c),
            Verdict::Inconclusive(c) => ("inconclusive", c),
        };
        let _ = writeln!(s, "VERDICT stable={st} clause={clause}");
        s
    }
}

/// Full classification: singular points, separatrices and the verdict.
pub fn analyze(v: &FieldView) -> Result<TopologyReport> {
    analyze_with(v, &TopologyOptions::default())
}

pub fn analyze_with(v: &FieldView, opt: &TopologyOptions) -> Result<TopologyReport> {
    let interior = find_interior_singularities_with(v, opt)?;
    let mut boundary = Vec::new();
    let mut corner = Vec::new();
    for w in [Wall::Inner, Wall::Outer] {
        // walls with slip carry no wall-shear singular points
        if !is_no_slip(v, w) {
            continue;
        }
        let (p, c) = boundary_classify_with(v, w, opt)?;
        boundary.extend(p);
        corner.extend(c);
    }
    let index_sum = interior.iter().map(|p| p.index).sum();
    let (nz, nr) = opt.sweep(v);
    let inset = 0.25 * (v.l / nz as f64).min(1.0 / nr as f64);
    let boundary_winding = winding(&|z, r| v.reduced(z, r).0, &inset_rectangle(v.l, inset, 400)).ok();
    let (verdict, separatrices) = structural_stability(v, &interior, &boundary, opt);
    Ok(TopologyReport {
        l: v.l,
        r1: v.r1,
        cell_count: interior.iter().filter(|p| p.kind == Kind::Center).count(),
        interior,
        boundary,
        corner,
        separatrices,
        verdict,
        index_sum,
        boundary_winding,
        events: Vec::new(),
    })
}

/// The three structural-stability clauses for a no-slip field.
pub fn structural_stability_check(v: &FieldView) -> Result<(Verdict, Vec<Separatrix>)> {
    let opt = TopologyOptions::default();
    let interior = find_interior_singularities_with(v, &opt)?;
    let mut boundary = Vec::new();
    for w in [Wall::Inner, Wall::Outer] {
        if is_no_slip(v, w) {
            boundary.extend(boundary_classify_with(v, w, &opt)?.0);
        }
    }
    Ok(structural_stability(v, &interior, &boundary, &opt))
}

fn structural_stability(
    v: &FieldView,
    interior: &[SingularPoint],
    boundary: &[SingularPoint],
    opt: &TopologyOptions,
) -> (Verdict, Vec<Separatrix>) {
    if interior.iter().chain(boundary).any(|p| p.kind == Kind::Degenerate) {
        return (Verdict::Unstable(1), Vec::new());
    }
    let g = |z: f64, r: f64| v.reduced(z, r).0;
    let budget = opt.arc_budget * (v.l + 1.0);
    let hmax = 0.02 * (v.l.min(1.0));
    let mut seps = Vec::new();
    let mut inconclusive: Option<u8> = None;
    let inside = |p: (f64, f64)| p.0 >= 0.0 && p.0 <= v.l && p.1 >= 0.0 && p.1 <= 1.0;
    // clause 2
    for (si, sp) in interior.iter().enumerate().filter(|(_, p)| p.kind == Kind::Saddle) {
        let j = v.jacobian(sp.z, sp.rbar);
        let Some((lu, eu)) = unstable_direction(&j) else { return (Verdict::Unstable(1), seps) };
        let _ = lu;
        for sign in [1.0, -1.0] {
            let start = (sp.z + sign * opt.seed_offset * eu[0], sp.rbar + sign * opt.seed_offset * eu[1]);
            let (path, hit) = trace(&g, start, budget, hmax, |s, p, x| {
                if !inside(x) {
                    return Some(None);
                }
                if s > 10.0 * opt.closure_tol && seg_dist(p, x, (sp.z, sp.rbar)) < opt.closure_tol {
                    return Some(Some(()));
                }
                None
            });
            let returned = matches!(hit, Some(Some(())));
            seps.push(Separatrix { from: format!("S{si}"), to: if returned { Some(format!("S{si}")) } else { None }, points: path });
            if hit.is_none() {
                inconclusive.get_or_insert(2);
            } else if !returned {
                return (Verdict::Unstable(2), seps);
            }
        }
    }
    // clause 3
    for (bi, bp) in boundary.iter().enumerate() {
        let Context::Boundary(wall) = bp.context else { continue };
        let (_, jg) = v.reduced(bp.z, wall.rbar());
        let Some((eval_, e)) = transverse_direction(&jg) else { return (Verdict::Unstable(1), seps) };
        let into = if wall == Wall::Inner { 1.0 } else { -1.0 };
        let e = if e[1] * into < 0.0 { [-e[0], -e[1]] } else { e };
        let dir = if eval_ > 0.0 { 1.0 } else { -1.0 };
        let field = move |z: f64, r: f64| {
            let a = g(z, r);
            [dir * a[0], dir * a[1]]
        };
        let start = (bp.z + opt.seed_offset * e[0], wall.rbar() + opt.seed_offset * e[1]);
        let (path, hit) = trace(&field, start, budget, hmax, |s, p, x| {
            if !inside(x) {
                return Some(None);
            }
            if s > 10.0 * opt.closure_tol {
                for (k, q) in boundary.iter().enumerate() {
                    if k != bi && seg_dist(p, x, (q.z, q.rbar)) < opt.closure_tol {
                        return Some(Some(k));
                    }
                }
            }
            None
        });
        let target = hit.flatten();
        seps.push(Separatrix {
            from: format!("B:{}:{bi}", wall.name()),
            to: target.map(|k| format!("B:{}:{k}", match boundary[k].context {
                Context::Boundary(w) => w.name(),
                Context::Interior => "interior",
            })),
            points: path,
        });
        match (hit, target) {
            (None, _) => {
                inconclusive.get_or_insert(3);
            }
            (Some(_), Some(k)) if boundary[k].context == bp.context => {}
            _ => return (Verdict::Unstable(3), seps),
        }
    }
    match inconclusive {
        Some(c) => (Verdict::Inconclusive(c), seps),
        None => (Verdict::Stable, seps),
    }
}

/// Distance from `q` to the segment [a, b].
fn seg_dist(a: (f64, f64), b: (f64, f64), q: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dy * dy;
    let t = if l2 > 0.0 { (((q.0 - a.0) * dx + (q.1 - a.1) * dy) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (a.0 + t * dx - q.0).hypot(a.1 + t * dy - q.1)
}

fn eigen2(j: &[[f64; 2]; 2]) -> Option<[(f64, [f64; 2]); 2]> {
    let tr = j[0][0] + j[1][1];
    let det = det2(j);
    let disc = tr * tr / 4.0 - det;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let mut out = [(0.0, [0.0; 2]); 2];
    for (k, l) in [tr / 2.0 + sq, tr / 2.0 - sq].into_iter().enumerate() {
        // (J - l) e = 0
        let a = [j[0][0] - l, j[0][1]];
        let b = [j[1][0], j[1][1] - l];
        let e = if a[0].hypot(a[1]) >= b[0].hypot(b[1]) { [-a[1], a[0]] } else { [-b[1], b[0]] };
        let n = e[0].hypot(e[1]);
        if n == 0.0 {
            return None;
        }
        out[k] = (l, [e[0] / n, e[1] / n]);
    }
    Some(out)
}

fn unstable_direction(j: &[[f64; 2]; 2]) -> Option<(f64, [f64; 2])> {
    let e = eigen2(j)?;
    if e[0].0 > 0.0 {
        Some(e[0])
    } else {
        None
    }
}

/// Eigenpair of the reduced-field Jacobian at a wall point whose vector
/// leaves the wall.
fn transverse_direction(j: &[[f64; 2]; 2]) -> Option<(f64, [f64; 2])> {
    let e = eigen2(j)?;
    let k = if e[0].1[1].abs() >= e[1].1[1].abs() { 0 } else { 1 };
    if e[k].1[1].abs() < 1e-12 {
        None
    } else {
        Some(e[k])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Boundary(Wall),
    Interior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationEvent {
    pub lambda: f64,
    pub z: f64,
    pub rbar: f64,
    pub r: f64,
    pub kind: EventKind,
    /// k of the tangential-derivative condition, or m of the even-order
    /// condition (0 if not found up to the available order).
    pub order: usize,
    /// Index of the reduced field (boundary) or of v (interior) at the point.
    pub index: Option<i32>,
    /// d/dlambda of the wall shear (boundary) or u1 . e2 (interior).
    pub transversality: f64,
    pub flags: Vec<String>,
}

impl SeparationEvent {
    pub fn line(&self) -> String {
        let t = match self.kind {
            EventKind::Boundary(_) => "boundary",
            EventKind::Interior => "interior",
        };
        format!("SEP lambda={} z={} r={} type={t} order={}", fmtc(self.lambda), fmtc(self.z), fmtc(self.r), self.order)
    }
}

/// Smallest signed wall shear over the wall (corner margin excluded), with
/// its location; the sign convention makes the attached state positive.
fn min_wall_shear(v: &FieldView, wall: Wall, sign: f64, opt: &TopologyOptions) -> (f64, f64) {
    let n = opt.wall_n(v);
    let margin = opt.corner(v);
    let h = (v.l - 2.0 * margin) / n as f64;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=n {
        let z = margin + i as f64 * h;
        let s = sign * wall_shear(v, z, wall)[0];
        if s < best.0 {
            best = (s, z);
        }
    }
    // refine the minimum with Newton on the derivative
    let mut z = best.1;
    for _ in 0..40 {
        let w = wall_shear(v, z, wall);
        if w[2] * sign <= 0.0 {
            break;
        }
        let dz = (w[1] / w[2]).clamp(-h, h);
        let zn = (z - dz).clamp(margin, v.l - margin);
        if (zn - z).abs() < 1e-15 * (1.0 + v.l) {
            z = zn;
            break;
        }
        z = zn;
    }
    let s = sign * wall_shear(v, z, wall)[0];
    if s < best.0 {
        (s, z)
    } else {
        best
    }
}

/// Boundary-layer separation events of a family over `window`.
pub fn detect_boundary_separation(
    family: &dyn Fn(f64) -> FieldView,
    window: (f64, f64),
) -> Result<Vec<SeparationEvent>> {
    detect_boundary_separation_with(family, window, 64, &TopologyOptions::default())
}

pub fn detect_boundary_separation_with(
    family: &dyn Fn(f64) -> FieldView,
    window: (f64, f64),
    scan: usize,
    opt: &TopologyOptions,
) -> Result<Vec<SeparationEvent>> {
    let (lo, hi) = window;
    let mut events = Vec::new();
    for wall in [Wall::Inner, Wall::Outer] {
        let v0 = family(lo);
        if !is_no_slip(&v0, wall) {
            continue;
        }
        let (s0, _) = min_wall_shear(&v0, wall, 1.0, opt);
        let (s0n, _) = min_wall_shear(&v0, wall, -1.0, opt);
        // attached at the window start: wall shear of one sign everywhere
        let sign = if s0 > 0.0 {
            1.0
        } else if s0n > 0.0 {
            -1.0
        } else {
            continue;
        };
        let f = |lam: f64| min_wall_shear(&family(lam), wall, sign, opt).0;
        let mut prev = (lo, s0.max(s0n));
        let mut crossing = None;
        for i in 1..=scan {
            let lam = lo + (hi - lo) * i as f64 / scan as f64;
            let val = f(lam);
            if val <= 0.0 {
                crossing = Some((prev.0, lam));
                break;
            }
            prev = (lam, val);
        }
        let Some((mut a, mut b)) = crossing else { continue };
        while b - a > 1e-13 * (1.0 + a.abs()) {
            let m = 0.5 * (a + b);
            if f(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let lam_c = 0.5 * (a + b);
        let view = family(lam_c);
        let scale = {
            let n = opt.wall_n(&view);
            (0..=n).map(|i| wall_shear(&view, view.l * i as f64 / n as f64, wall)[0].abs()).fold(0.0, f64::max)
        };
        // every local minimum of the shear that touches zero at lam_c
        let n = opt.wall_n(&view);
        let margin = opt.corner(&view);
        let h = (view.l - 2.0 * margin) / n as f64;
        let s: Vec<f64> = (0..=n).map(|i| sign * wall_shear(&view, margin + i as f64 * h, wall)[0]).collect();
        let mut zs: Vec<f64> = Vec::new();
        for i in 0..=n {
            let left = if i > 0 { s[i - 1] } else { f64::INFINITY };
            let right = if i < n { s[i + 1] } else { f64::INFINITY };
            if s[i] <= left && s[i] <= right {
                let mut z = margin + i as f64 * h;
                for _ in 0..40 {
                    let w = wall_shear(&view, z, wall);
                    if w[2] * sign <= 0.0 {
                        break;
                    }
                    let dz = (w[1] / w[2]).clamp(-h, h);
                    z = (z - dz).clamp(margin, view.l - margin);
                    if dz.abs() < 1e-15 {
                        break;
                    }
                }
                if (sign * wall_shear(&view, z, wall)[0]).abs() < 1e-6 * scale
                    && !zs.iter().any(|p| (p - z).abs() < 10.0 * h)
                {
                    zs.push(z);
                }
            }
        }
        zs.sort_by(f64::total_cmp);
        let dl = 1e-4 * (hi - lo).abs().max(1e-8);
        let (vp, vm) = (family(lam_c + dl), family(lam_c - dl));
        for z in zs {
            let mut flags = Vec::new();
            let rad = 0.05f64.min(0.25 * view.l);
            let index = reduced_boundary_index(&view, z, wall, rad).ok();
            if index != Some(0) {
                flags.push(format!("index {index:?}"));
            }
            let tr = (wall_shear(&vp, z, wall)[0] - wall_shear(&vm, z, wall)[0]) / (2.0 * dl);
            if tr.abs() < 1e-8 * scale.max(1e-300) / (hi - lo).abs().max(1e-300) {
                flags.push("non-transversal".into());
            }
            let d = view.derivs(z, wall.rbar());
            let ns = wall.normal_sign();
            let dk = [ns * d[2][1][0], ns * d[3][1][0]];
            let order = if dk[0].abs() > 1e-6 * scale {
                2
            } else if dk[1].abs() > 1e-6 * scale {
                3
            } else {
                0
            };
            if order != 2 {
                flags.push(format!("tangential order {order}"));
            }
            events.push(SeparationEvent {
                lambda: lam_c,
                z,
                rbar: wall.rbar(),
                r: view.r1 + wall.rbar(),
                kind: EventKind::Boundary(wall),
                order,
                index,
                transversality: tr,
                flags,
            });
        }
    }
    events.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.z.total_cmp(&b.z)));
    Ok(events)
}

/// Local minima of |v| over the interior band rbar in [m, 1 - m], refined
/// by Levenberg-Marquardt on v.
fn interior_minima(v: &FieldView, opt: &TopologyOptions, m: f64) -> Vec<(f64, f64, f64)> {
    let (nz, nr) = opt.sweep(v);
    let hz = v.l / nz as f64;
    let hr = (1.0 - 2.0 * m) / nr as f64;
    let mut vals = vec![0.0; (nz + 1) * (nr + 1)];
    for i in 0..=nz {
        for j in 0..=nr {
            let x = v.value(i as f64 * hz, m + j as f64 * hr);
            vals[i * (nr + 1) + j] = x[0].hypot(x[1]);
        }
    }
    let at = |i: isize, j: isize| -> f64 {
        if i < 0 || j < 0 || i > nz as isize || j > nr as isize {
            f64::INFINITY
        } else {
            vals[i as usize * (nr + 1) + j as usize]
        }
    };
    let mut out: Vec<(f64, f64, f64)> = Vec::new();
    for i in 0..=nz as isize {
        for j in 0..=nr as isize {
            let c = at(i, j);
            let mut is_min = true;
            for di in -1..=1 {
                for dj in -1..=1 {
                    if (di, dj) != (0, 0) && at(i + di, j + dj) < c {
                        is_min = false;
                    }
                }
            }
            if !is_min {
                continue;
            }
            let (mut z, mut r) = (i as f64 * hz, m + j as f64 * hr);
            let mut mu = 1e-3;
            let mut cur = c;
            for _ in 0..100 {
                let d = v.derivs(z, r);
                let f = d[0][0];
                let jm = jac_of(&d);
                // (J^T J + mu I) dx = -J^T f
                let a11 = jm[0][0] * jm[0][0] + jm[1][0] * jm[1][0];
                let a12 = jm[0][0] * jm[0][1] + jm[1][0] * jm[1][1];
                let a22 = jm[0][1] * jm[0][1] + jm[1][1] * jm[1][1];
                let g1 = jm[0][0] * f[0] + jm[1][0] * f[1];
                let g2 = jm[0][1] * f[0] + jm[1][1] * f[1];
                let damp = mu * (a11 + a22).max(1e-300);
                let (b11, b22) = (a11 + damp, a22 + damp);
                let det = b11 * b22 - a12 * a12;
                if det == 0.0 {
                    break;
                }
                let dz = -(b22 * g1 - a12 * g2) / det;
                let dr = -(-a12 * g1 + b11 * g2) / det;
                let (zn, rn) = ((z + dz).clamp(0.0, v.l), (r + dr).clamp(m, 1.0 - m));
                let x = v.value(zn, rn);
                let nv = x[0].hypot(x[1]);
                if nv < cur {
                    let moved = (zn - z).hypot(rn - r);
                    z = zn;
                    r = rn;
                    cur = nv;
                    mu = (mu * 0.3).max(1e-12);
                    if moved < 1e-15 * (1.0 + v.l) {
                        break;
                    }
                } else {
                    mu *= 10.0;
                    if mu > 1e8 {
                        break;
                    }
                }
            }
            let clamped = r <= m + 1e-12 || r >= 1.0 - m - 1e-12;
            if !clamped && !out.iter().any(|p| (p.0 - z).hypot(p.1 - r) < 1e-6) {
                out.push((z, r, cur));
            }
        }
    }
    out
}

/// Interior separation events: the first parameter at which an interior
/// degenerate zero of index 0 appears.
pub fn detect_interior_separation(
    family: &dyn Fn(f64) -> FieldView,
    window: (f64, f64),
) -> Result<Vec<SeparationEvent>> {
    detect_interior_separation_with(family, window, 64, &TopologyOptions::default())
}

pub fn detect_interior_separation_with(
    family: &dyn Fn(f64) -> FieldView,
    window: (f64, f64),
    scan: usize,
    opt: &TopologyOptions,
) -> Result<Vec<SeparationEvent>> {
    let (lo, hi) = window;
    let margin = 0.01;
    let scale_of = |v: &FieldView| {
        let (nz, nr) = (64, 32);
        let mut s = 0.0f64;
        for i in 0..=nz {
            for j in 0..=nr {
                let x = v.value(v.l * i as f64 / nz as f64, j as f64 / nr as f64);
                s = s.max(x[0].hypot(x[1]));
            }
        }
        s
    };
    let v0 = family(lo);
    let scale = scale_of(&v0).max(1e-300);
    let tol = 1e-9 * scale;
    let minval = |lam: f64| -> (f64, Vec<(f64, f64, f64)>) {
        let mins = interior_minima(&family(lam), opt, margin);
        (mins.iter().map(|p| p.2).fold(f64::INFINITY, f64::min), mins)
    };
    if minval(lo).0 < tol {
        return Err(Error::Invalid("interior zeros already present at the window start".into()));
    }
    let mut crossing = None;
    let mut prev = lo;
    for i in 1..=scan {
        let lam = lo + (hi - lo) * i as f64 / scan as f64;
        if minval(lam).0 < tol {
            crossing = Some((prev, lam));
            break;
        }
        prev = lam;
    }
    let Some((mut a, mut b)) = crossing else { return Ok(Vec::new()) };
    while b - a > 1e-12 * (1.0 + a.abs()) {
        let m = 0.5 * (a + b);
        if minval(m).0 < tol {
            b = m;
        } else {
            a = m;
        }
    }
    let lam_c = b;
    let view = family(lam_c);
    let (_, mins) = minval(lam_c);
    let dl = 1e-4 * (hi - lo).abs().max(1e-8);
    let (vp, vm) = (family(lam_c + dl), family(lam_c - dl));
    let mut events = Vec::new();
    for (z, r, val) in mins {
        if val > 1e-6 * scale {
            continue;
        }
        let mut flags = Vec::new();
        let d = view.derivs(z, r);
        let j = jac_of(&d);
        let jn = fro2(&j).sqrt();
        if jn < 1e-9 * scale {
            flags.push("vanishing Jacobian".into());
        }
        let nondegenerate = det2(&j).abs() > 1e-4 * jn * jn;
        if nondegenerate {
            flags.push("nondegenerate zero".into());
        }
        // Jordan vectors: e1 spans the kernel, e2 is orthogonal to it
        let col0 = [j[0][0], j[1][0]];
        let col1 = [j[0][1], j[1][1]];
        let e1 = if col0[0].hypot(col0[1]) >= col1[0].hypot(col1[1]) { col0 } else { col1 };
        let n1 = e1[0].hypot(e1[1]);
        let (e1, e2) = if n1 > 0.0 {
            let e1 = [e1[0] / n1, e1[1] / n1];
            (e1, [-e1[1], e1[0]])
        } else {
            flags.push("ill-conditioned Jordan vectors".into());
            ([1.0, 0.0], [0.0, 1.0])
        };
        let rad = 0.5 * margin.min(r - 1e-3).min(1.0 - r - 1e-3).max(1e-4);
        let index = index_of(&view, &circle(z, r, rad.min(0.005), 64)).ok();
        if index != Some(0) {
            if nondegenerate {
                // a zero that entered the band from outside, not a new pair
                continue;
            }
            flags.push(format!("index {index:?}"));
        }
        let (up, um) = (vp.value(z, r), vm.value(z, r));
        let u1 = [(up[0] - um[0]) / (2.0 * dl), (up[1] - um[1]) / (2.0 * dl)];
        let tr = u1[0] * e2[0] + u1[1] * e2[1];
        if tr.abs() < 1e-8 * scale / (hi - lo).abs().max(1e-300) {
            flags.push("non-transversal".into());
        }
        // second directional derivative of v . e2 along e1
        let mut d2 = 0.0;
        for c in 0..2 {
            let h = e1[0] * e1[0] * d[2][0][c] + 2.0 * e1[0] * e1[1] * d[1][1][c] + e1[1] * e1[1] * d[0][2][c];
            d2 += e2[c] * h;
        }
        let order = if d2.abs() > 1e-6 * scale { 2 } else { 0 };
        if order != 2 {
            flags.push("even-order condition not met at m = 2".into());
        }
        events.push(SeparationEvent {
            lambda: lam_c,
            z,
            rbar: r,
            r: view.r1 + r,
            kind: EventKind::Interior,
            order,
            index,
            transversality: tr,
            flags,
        });
    }
    events.sort_by(|a, b| a.z.total_cmp(&b.z).then(a.rbar.total_cmp(&b.rbar)));
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(l: f64, a: [[f64; 2]; 2], z0: f64, r0: f64) -> FieldView {
        FieldView::analytic(l, 0.0, move |z, r| {
            let (x, y) = (z - z0, r - r0);
            let mut d = [[[0.0; 2]; 4]; 4];
            d[0][0] = [a[0][0] * x + a[0][1] * y, a[1][0] * x + a[1][1] * y];
            d[1][0] = [a[0][0], a[1][0]];
            d[0][1] = [a[0][1], a[1][1]];
            d
        })
    }

    #[test]
    fn rigid_vortex_is_a_center() {
        let v = linear(2.0, [[0.0, -1.0], [1.0, 0.0]], 1.1, 0.4);
        let p = find_interior_singularities(&v).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].kind, Kind::Center);
        assert_eq!(p[0].index, 1);
        assert!((p[0].z - 1.1).abs() < 1e-10 && (p[0].rbar - 0.4).abs() < 1e-10);
        assert_eq!(index_of(&v, &circle(1.1, 0.4, 0.1, 16)).unwrap(), 1);
    }

    #[test]
    fn hyperbolic_point_is_a_saddle() {
        let v = linear(1.0, [[1.0, 0.0], [0.0, -1.0]], 0.3, 0.6);
        let p = find_interior_singularities(&v).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].kind, Kind::Saddle);
        assert_eq!(index_of(&v, &circle(0.3, 0.6, 0.05, 8)).unwrap(), -1);
    }

    #[test]
    fn loop_through_zero_is_rejected() {
        let v = linear(1.0, [[1.0, 0.0], [0.0, -1.0]], 0.5, 0.5);
        let path = vec![(0.5, 0.5), (0.7, 0.5), (0.7, 0.7)];
        assert!(matches!(index_of(&v, &path), Err(Error::LoopThroughSingularity(_))));
    }

    #[test]
    fn shear_has_no_wall_points() {
        let v = FieldView::analytic(2.0, 0.0, |_, r| {
            let mut d = [[[0.0; 2]; 4]; 4];
            d[0][0] = [-r * (1.0 - r), 0.0];
            d[0][1] = [-(1.0 - 2.0 * r), 0.0];
            d[0][2] = [2.0, 0.0];
            d
        });
        for w in [Wall::Inner, Wall::Outer] {
            let (p, c) = boundary_classify(&v, w).unwrap();
            assert!(p.is_empty() && c.is_empty());
        }
        let rep = analyze(&v).unwrap();
        assert_eq!(rep.verdict, Verdict::Stable);
        assert!(rep.interior.is_empty());
    }
}
