//! Closed-form separation predictors for the model fields: thresholds,
//! locations, vortex counts, and the inequalities behind them.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::bifurcation::{BifurcationBranch, Sign};
use crate::chandrasekhar::ChandrasekharMode;
use crate::error::{Error, Result};

/// Validity ceiling as a multiple of lambda1.
pub const DEFAULT_LAMBDA3_FACTOR: f64 = 1.5;

const PRESCAN: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationKind {
    Boundary,
    Interior,
}

/// Which alternative holds for the second state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch2Case {
    /// Lambda_2(lambda0) < Lambda0: separation at some lambda2 > lambda0.
    Delayed,
    /// Lambda_2(lambda0) >= Lambda0: separated from lambda0 on.
    Immediate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationPrediction {
    pub kind: SeparationKind,
    pub lambda0_cap: f64,
    /// lambda1 (and its shift lambda1 - lambda0), when a branch was given.
    pub lambda1: Option<f64>,
    pub lambda1_shift: Option<f64>,
    pub lambda2: Option<f64>,
    pub branch2: Option<Branch2Case>,
    pub lambda3: Option<f64>,
    /// (z, r) of the separation points.
    pub locations: Vec<(f64, f64)>,
    pub r0_plus: Option<f64>,
    pub r0_minus: Option<f64>,
    pub rstar_plus: f64,
    pub rstar_minus: f64,
    pub k0_inner: usize,
    pub k0_outer: usize,
}

impl SeparationPrediction {
    /// Report lines in the topology format, one SEP record per location.
    pub fn to_lines(&self) -> String {
        let t = match self.kind {
            SeparationKind::Boundary => "boundary",
            SeparationKind::Interior => "interior",
        };
        let lam = self.lambda1.unwrap_or(f64::NAN);
        let mut s = String::new();
        for &(z, r) in &self.locations {
            let _ = writeln!(s, "SEP lambda={lam:.10} z={z:.10} r={r:.10} type={t} order=2");
        }
        let _ = writeln!(s, "# Lambda0={:.12} k0_inner={} k0_outer={}", self.lambda0_cap, self.k0_inner, self.k0_outer);
        if let (Some(l1), Some(d)) = (self.lambda1, self.lambda1_shift) {
            let _ = writeln!(s, "# lambda1={l1:.12} lambda1-lambda0={d:.12e}");
        }
        if let Some(l2) = self.lambda2 {
            let _ = writeln!(s, "# lambda2={l2:.12} case={:?}", self.branch2.unwrap_or(Branch2Case::Delayed));
        }
        if let Some(l3) = self.lambda3 {
            let _ = writeln!(s, "# predictions asserted for lambda < lambda3={l3:.12}");
        }
        s
    }
}

/// Lambda0 = gamma / R''(r1).
pub fn boundary_threshold(gamma: f64, mode: &ChandrasekharMode) -> Result<f64> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::Invalid(format!("gamma = {gamma} must be non-negative")));
    }
    let c = mode.r_bar(0.0, 2);
    if !(c > 0.0) {
        return Err(Error::Numerical(format!("R''(r1) = {c} is not positive")));
    }
    Ok(gamma / c)
}

/// Wall separation points in [0, L]: z_n = (4n+1)pi/2a on the inner wall,
/// (4n+3)pi/2a on the outer one.
pub fn boundary_locations(l: f64, mode: &ChandrasekharMode) -> (Vec<f64>, Vec<f64>) {
    let at = |off: f64| {
        (0..)
            .map(|n| (4.0 * n as f64 + off) * PI / (2.0 * mode.a))
            .take_while(|&z| z < l)
            .collect::<Vec<_>>()
    };
    (at(1.0), at(3.0))
}

/// Vortex counts per wall for K cells: (inner, outer).
pub fn vortex_counts(k: usize) -> (usize, usize) {
    ((k + 1) / 2, k / 2)
}

/// Inverse of Lambda(lambda) = Lambda0 for one state.
pub fn lambda_threshold(branch: &BifurcationBranch, lambda0_cap: f64, sign: Sign) -> Result<f64> {
    lambda_threshold_in(branch, lambda0_cap, sign, f64::INFINITY)
}

/// As [`lambda_threshold`], failing when the threshold lies beyond `hi`.
pub fn lambda_threshold_in(branch: &BifurcationBranch, lambda0_cap: f64, sign: Sign, hi: f64) -> Result<f64> {
    if !(lambda0_cap >= 0.0) {
        return Err(Error::Invalid(format!("Lambda0 = {lambda0_cap} must be non-negative")));
    }
    let b = branch.b.abs();
    let t = 2.0 * branch.a * branch.c * lambda0_cap;
    let root = match sign {
        Sign::One => t + b,
        Sign::Two => {
            if t <= 2.0 * b {
                // Lambda_2(lambda0) = |b| / aC >= Lambda0
                return Ok(branch.lambda0_eps);
            }
            t - b
        }
    };
    let lam = branch.lambda0_eps + (root * root - b * b) / (4.0 * branch.alpha_eps);
    if lam > hi {
        return Err(Error::ThresholdOutOfRange(format!("lambda = {lam} beyond {hi}")));
    }
    Ok(lam)
}

/// Case of the second state, by direct comparison of Lambda_2(lambda0)
/// with Lambda0.
pub fn branch2_case(branch: &BifurcationBranch, lambda0_cap: f64) -> Branch2Case {
    if branch.b.abs() / (branch.a * branch.c) >= lambda0_cap {
        Branch2Case::Immediate
    } else {
        Branch2Case::Delayed
    }
}

/// Roots of a continuous function on [lo, hi]: 512-point pre-scan, then
/// bisection to 1e-12 on each bracket.
pub fn roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<f64> {
    let h = (hi - lo) / PRESCAN as f64;
    let mut out = Vec::new();
    let mut xa = lo;
    let mut fa = f(lo);
    for i in 1..=PRESCAN {
        let xb = lo + i as f64 * h;
        let fb = f(xb);
        if fa == 0.0 {
            out.push(xa);
        } else if fa * fb < 0.0 {
            let (mut a, mut b, mut ga) = (xa, xb, fa);
            while b - a > 1e-12 {
                let m = 0.5 * (a + b);
                let gm = f(m);
                if gm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if (gm > 0.0) == (ga > 0.0) {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            out.push(0.5 * (a + b));
        }
        xa = xb;
        fa = fb;
    }
    if fa == 0.0 {
        out.push(hi);
    }
    out
}

/// Zeros of R'' in (0, 1) (the extrema of R'), as (r*+, r*-) in gap units.
pub fn rstar(mode: &ChandrasekharMode) -> Result<(f64, f64)> {
    let z = roots(|r| mode.r_bar(r, 2), 0.0, 1.0);
    match (z.first(), z.last()) {
        (Some(&a), Some(&b)) if a < 0.5 && b > 0.5 => Ok((a, b)),
        _ => Err(Error::Numerical(format!("unexpected zeros of R'': {z:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorSolution {
    pub lambda0_cap: f64,
    /// Tangency radii in gap units.
    pub r0_plus: f64,
    pub r0_minus: f64,
    /// Set when more than one admissible root was found on a half-gap.
    pub multiple: bool,
}

/// Tangency of +/-Lambda R' with gamma (rbar(1-rbar) + W0): Lambda eliminated,
/// root of R'(1 - 2 rbar) - R'' (rbar(1 - rbar) + W0) on each half-gap.
pub fn interior_solve(gamma: f64, w0: f64, mode: &ChandrasekharMode) -> Result<InteriorSolution> {
    if !(gamma > 0.0) {
        return Err(Error::Invalid(format!("gamma = {gamma} must be positive")));
    }
    if w0 == 0.0 {
        return Err(Error::Invalid("W0 = 0 has no interior tangency".into()));
    }
    let h = |r: f64| mode.r_bar(r, 1) * (1.0 - 2.0 * r) - mode.r_bar(r, 2) * (r * (1.0 - r) + w0);
    let cap = |r: f64, s: f64| s * gamma * (1.0 - 2.0 * r) / mode.r_bar(r, 2);
    let admissible = |rs: Vec<f64>, s: f64| -> Vec<(f64, f64)> {
        rs.into_iter().map(|r| (r, cap(r, s))).filter(|p| p.1 > 0.0 && p.1.is_finite()).collect()
    };
    let plus = admissible(roots(h, 1e-12, 0.5), 1.0);
    let minus = admissible(roots(h, 0.5, 1.0 - 1e-12), -1.0);
    let (Some(&(rp, lp)), Some(&(rm, _))) = (plus.first(), minus.last()) else {
        return Err(Error::NoInteriorSeparation(format!("no tangency for W0 = {w0}")));
    };
    Ok(InteriorSolution { lambda0_cap: lp, r0_plus: rp, r0_minus: rm, multiple: plus.len() > 1 || minus.len() > 1 })
}

/// All roots in (0, 1) of (-1)^k R'(r) / R''(r1) - (Lambda0/Lambda) rbar(1-rbar),
/// excluding the trivial wall roots.
pub fn center_roots(k: usize, big_lambda: f64, lambda0_cap: f64, mode: &ChandrasekharMode) -> Vec<f64> {
    let s = if k % 2 == 0 { 1.0 } else { -1.0 };
    let c = mode.r_bar(0.0, 2);
    let ratio = lambda0_cap / big_lambda;
    let q = |r: f64| s * mode.r_bar(r, 1) / (c * r * (1.0 - r)) - ratio;
    // q -> 1 - ratio at both walls, so roundoff can bracket a wall root at Lambda = Lambda0
    roots(q, 1e-9, 1.0 - 1e-9).into_iter().filter(|r| r.min(1.0 - r) > 1e-6).collect()
}

/// Center radius (gap units) in cell k, absent when Lambda <= Lambda0.
pub fn center_location(k: usize, big_lambda: f64, lambda0_cap: f64, mode: &ChandrasekharMode) -> Result<Option<f64>> {
    if !(big_lambda > 0.0) {
        return Err(Error::Invalid(format!("Lambda = {big_lambda} must be positive")));
    }
    if big_lambda <= lambda0_cap {
        return Ok(None);
    }
    let r = center_roots(k, big_lambda, lambda0_cap, mode);
    match r.len() {
        0 => Ok(None),
        1 => Ok(Some(r[0])),
        _ => Err(Error::Numerical(format!("multiple center roots {r:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub pass: bool,
    /// Smallest value of -R'''/R'' - 2/(1 - 2 rbar) over the samples.
    pub worst_margin: f64,
    pub worst_at: f64,
    pub samples: usize,
    /// Smallest value of 1 - (Lambda/Lambda0) sin(az) over the sampled
    /// Lambda < Lambda0.
    pub sub_threshold_margin: f64,
}

/// -R'''/R'' > 2/(1 - 2 rbar) on 1000 points of [0, r*+), and
/// 1 - (Lambda/Lambda0) sin(az) > 0 for Lambda < Lambda0.
pub fn inequality_checks(mode: &ChandrasekharMode) -> Result<InequalityReport> {
    let (rs, _) = rstar(mode)?;
    let n = 1000;
    let mut worst = (f64::INFINITY, 0.0);
    for i in 0..n {
        let r = rs * i as f64 / n as f64;
        let m = -mode.r_bar(r, 3) / mode.r_bar(r, 2) - 2.0 / (1.0 - 2.0 * r);
        if m < worst.0 {
            worst = (m, r);
        }
    }
    let mut sub = f64::INFINITY;
    for i in 0..100 {
        let ratio = i as f64 / 100.0;
        for j in 0..=64 {
            let s = (2.0 * PI * j as f64 / 64.0).sin();
            sub = sub.min(1.0 - ratio * s);
        }
    }
    Ok(InequalityReport {
        pass: worst.0 > 0.0 && sub > 0.0,
        worst_margin: worst.0,
        worst_at: worst.1,
        samples: n,
        sub_threshold_margin: sub,
    })
}

/// Prediction for the boundary case (W0 = 0).
pub fn predict_boundary(
    gamma: f64,
    l: f64,
    mode: &ChandrasekharMode,
    branch: Option<&BifurcationBranch>,
    lambda3_factor: f64,
) -> Result<SeparationPrediction> {
    let cap = boundary_threshold(gamma, mode)?;
    let (inner, outer) = boundary_locations(l, mode);
    let (rsp, rsm) = rstar(mode)?;
    let mut locations: Vec<(f64, f64)> = inner.iter().map(|&z| (z, mode.r1)).collect();
    locations.extend(outer.iter().map(|&z| (z, mode.r1 + 1.0)));
    let mut p = SeparationPrediction {
        kind: SeparationKind::Boundary,
        lambda0_cap: cap,
        lambda1: None,
        lambda1_shift: None,
        lambda2: None,
        branch2: None,
        lambda3: None,
        locations,
        r0_plus: None,
        r0_minus: None,
        rstar_plus: mode.r1 + rsp,
        rstar_minus: mode.r1 + rsm,
        k0_inner: inner.len(),
        k0_outer: outer.len(),
    };
    if let Some(br) = branch {
        fill_thresholds(&mut p, br, lambda3_factor)?;
    }
    Ok(p)
}

/// Prediction for the interior case (W0 != 0).
pub fn predict_interior(
    gamma: f64,
    w0: f64,
    l: f64,
    mode: &ChandrasekharMode,
    branch: Option<&BifurcationBranch>,
    lambda3_factor: f64,
) -> Result<SeparationPrediction> {
    let sol = interior_solve(gamma, w0, mode)?;
    let (rsp, rsm) = rstar(mode)?;
    let (k0i, k0o) = {
        let (a, b) = boundary_locations(l, mode);
        (a.len(), b.len())
    };
    let mut locations = Vec::new();
    let mut k = 0;
    loop {
        let z = (2 * k + 1) as f64 * PI / (2.0 * mode.a);
        if z >= l {
            break;
        }
        let r = if k % 2 == 0 { sol.r0_plus } else { sol.r0_minus };
        locations.push((z, mode.r1 + r));
        k += 1;
    }
    let mut p = SeparationPrediction {
        kind: SeparationKind::Interior,
        lambda0_cap: sol.lambda0_cap,
        lambda1: None,
        lambda1_shift: None,
        lambda2: None,
        branch2: None,
        lambda3: None,
        locations,
        r0_plus: Some(mode.r1 + sol.r0_plus),
        r0_minus: Some(mode.r1 + sol.r0_minus),
        rstar_plus: mode.r1 + rsp,
        rstar_minus: mode.r1 + rsm,
        k0_inner: k0i,
        k0_outer: k0o,
    };
    if let Some(br) = branch {
        fill_thresholds(&mut p, br, lambda3_factor)?;
    }
    Ok(p)
}

fn fill_thresholds(p: &mut SeparationPrediction, br: &BifurcationBranch, lambda3_factor: f64) -> Result<()> {
    let l1 = lambda_threshold(br, p.lambda0_cap, Sign::One)?;
    p.lambda1 = Some(l1);
    p.lambda1_shift = Some(l1 - br.lambda0_eps);
    p.lambda2 = Some(lambda_threshold(br, p.lambda0_cap, Sign::Two)?);
    p.branch2 = Some(branch2_case(br, p.lambda0_cap));
    p.lambda3 = Some(lambda3_factor * l1);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode() -> ChandrasekharMode {
        ChandrasekharMode::for_height(3.022, 0.0).wall_exact()
    }

    #[test]
    fn threshold_definition() {
        let m = mode();
        let c = m.r_bar(0.0, 2);
        assert!((boundary_threshold(c, &m).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(boundary_threshold(0.0, &m).unwrap(), 0.0);
        assert!(boundary_threshold(-1.0, &m).is_err());
    }

    #[test]
    fn counts_follow_locations() {
        for k in 1..=8 {
            let m = ChandrasekharMode::with_wavenumber(3.117, k, 0.0);
            let l = k as f64 * PI / m.a;
            let (a, b) = boundary_locations(l, &m);
            assert_eq!((a.len(), b.len()), vortex_counts(k));
        }
    }

    #[test]
    fn b_zero_threshold_inversion() {
        let br = BifurcationBranch::new(0.0, 0.5, 2.0, 41.0, 3.0).unwrap();
        let l1 = lambda_threshold(&br, 0.02, Sign::One).unwrap();
        assert!((l1 - (41.0 + (3.0 * 0.5 * 0.02f64).powi(2) / 2.0)).abs() < 1e-14);
        assert_eq!(lambda_threshold(&br, 0.02, Sign::Two).unwrap(), l1);
        assert_eq!(lambda_threshold(&br, 0.0, Sign::One).unwrap(), 41.0);
    }
}
