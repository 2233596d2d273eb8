//! Legendre machinery for the radial direction.
//!
//! Two Shen-type bases on rbar in [0, 1] (x = 2 rbar - 1 in [-1, 1]):
//! clamped functions (value and slope vanish at both walls) for the stream
//! function, and Dirichlet functions for the azimuthal velocity.

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_deriv(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_deriv(n, t);
        dp = if d != 0.0 { d } else { dp };
        let wt = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wt;
        w[n - 1 - i] = wt;
    }
    (x, w)
}

fn legendre_and_deriv(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * t * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Legendre polynomials L_0..L_{nmax} and their first `nd` x-derivatives at `t`.
/// Result is indexed `[d][k]`.
pub fn legendre_table(t: f64, nmax: usize, nd: usize) -> Vec<Vec<f64>> {
    let mut tab = vec![vec![0.0; nmax + 1]; nd + 1];
    tab[0][0] = 1.0;
    if nmax >= 1 {
        tab[0][1] = t;
    }
    for k in 1..nmax {
        tab[0][k + 1] = ((2 * k + 1) as f64 * t * tab[0][k] - k as f64 * tab[0][k - 1]) / (k + 1) as f64;
    }
    // L^{(d)}_{k+1} = L^{(d)}_{k-1} + (2k+1) L^{(d-1)}_k
    for d in 1..=nd {
        tab[d][0] = 0.0;
        if nmax >= 1 {
            tab[d][1] = if d == 1 { 1.0 } else { 0.0 };
        }
        for k in 1..nmax {
            tab[d][k + 1] = tab[d][k - 1] + (2 * k + 1) as f64 * tab[d - 1][k];
        }
    }
    tab
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// phi_k = L_k - 2(2k+5)/(2k+7) L_{k+2} + (2k+3)/(2k+7) L_{k+4}
    Clamped,
    /// phi_k = L_k - L_{k+2}
    Dirichlet,
}

#[derive(Debug, Clone)]
pub struct Basis {
    pub kind: BasisKind,
    pub n: usize,
}

impl Basis {
    pub fn new(kind: BasisKind, n: usize) -> Self {
        Basis { kind, n }
    }

    pub fn max_degree(&self) -> usize {
        match self.kind {
            BasisKind::Clamped => self.n + 3,
            BasisKind::Dirichlet => self.n + 1,
        }
    }

    fn combo(&self, k: usize) -> [(usize, f64); 3] {
        let kf = k as f64;
        match self.kind {
            BasisKind::Clamped => [
                (k, 1.0),
                (k + 2, -2.0 * (2.0 * kf + 5.0) / (2.0 * kf + 7.0)),
                (k + 4, (2.0 * kf + 3.0) / (2.0 * kf + 7.0)),
            ],
            BasisKind::Dirichlet => [(k, 1.0), (k + 2, -1.0), (k + 2, 0.0)],
        }
    }

    /// Values of all basis functions and their rbar-derivatives up to `nd` at `rbar`.
    /// Indexed `[d][k]`.
    pub fn eval(&self, rbar: f64, nd: usize) -> Vec<Vec<f64>> {
        let t = 2.0 * rbar - 1.0;
        let tab = legendre_table(t, self.max_degree(), nd);
        let mut out = vec![vec![0.0; self.n]; nd + 1];
        for (d, row) in out.iter_mut().enumerate() {
            let scale = 2f64.powi(d as i32);
            for (k, v) in row.iter_mut().enumerate() {
                let mut s = 0.0;
                for (j, c) in self.combo(k) {
                    s += c * tab[d][j];
                }
                *v = scale * s;
            }
        }
        out
    }
}

/// Basis values tabulated on a Gauss-Legendre rule mapped to [0, 1].
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `vals[d][q][k]`
    pub vals: Vec<Vec<Vec<f64>>>,
}

impl Quadrature {
    pub fn new(basis: &Basis, nq: usize, nd: usize) -> Self {
        let (x, w) = gauss_legendre(nq);
        let nodes: Vec<f64> = x.iter().map(|t| 0.5 * (t + 1.0)).collect();
        let weights: Vec<f64> = w.iter().map(|v| 0.5 * v).collect();
        let mut vals = vec![vec![vec![0.0; basis.n]; nq]; nd + 1];
        for (q, &r) in nodes.iter().enumerate() {
            let e = basis.eval(r, nd);
            for d in 0..=nd {
                vals[d][q].copy_from_slice(&e[d]);
            }
        }
        Quadrature { nodes, weights, vals }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        for p in 0..24 {
            let s: f64 = x.iter().zip(&w).map(|(t, wi)| wi * t.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((s - exact).abs() < 1e-14, "p={p} s={s}");
        }
    }

    #[test]
    fn clamped_basis_vanishes_with_slope() {
        let b = Basis::new(BasisKind::Clamped, 30);
        for rb in [0.0, 1.0] {
            let e = b.eval(rb, 1);
            for k in 0..30 {
                assert!(e[0][k].abs() < 1e-12 && e[1][k].abs() < 1e-9, "k={k}");
            }
        }
    }

    #[test]
    fn dirichlet_basis_vanishes() {
        let b = Basis::new(BasisKind::Dirichlet, 20);
        for rb in [0.0, 1.0] {
            let e = b.eval(rb, 0);
            assert!(e[0].iter().all(|v| v.abs() < 1e-13));
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let b = Basis::new(BasisKind::Clamped, 10);
        let h = 1e-6;
        let e = b.eval(0.3, 3);
        let ep = b.eval(0.3 + h, 3);
        let em = b.eval(0.3 - h, 3);
        for d in 0..3 {
            for k in 0..10 {
                let fd = (ep[d][k] - em[d][k]) / (2.0 * h);
                assert!((fd - e[d + 1][k]).abs() < 1e-5 * (1.0 + e[d + 1][k].abs()));
            }
        }
    }
}
