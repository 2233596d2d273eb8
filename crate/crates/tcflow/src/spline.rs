//! Not-a-knot cubic splines on uniform grids, and tensor-product evaluation.

/// Second derivatives of the not-a-knot cubic spline through `y` at spacing `h`.
pub fn second_derivatives(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    if n < 4 {
        // fall back to a natural spline / straight line
        let mut m = vec![0.0; n];
        if n == 3 {
            m[1] = (y[2] - 2.0 * y[1] + y[0]) / (h * h);
            m[0] = m[1];
            m[2] = m[1];
        }
        return m;
    }
    // Unknowns m_0..m_{n-1}. Interior rows: m_{i-1} + 4 m_i + m_{i+1} = 6 d2_i / h^2.
    // Ends: m_0 - 2 m_1 + m_2 = 0 and m_{n-3} - 2 m_{n-2} + m_{n-1} = 0 (continuous third derivative).
    // Eliminate m_0 and m_{n-1} to get a tridiagonal system on m_1..m_{n-2}.
    let k = n - 2;
    let rhs: Vec<f64> = (1..n - 1).map(|i| 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h)).collect();
    let mut a = vec![1.0; k];
    let mut b = vec![4.0; k];
    let mut c = vec![1.0; k];
    // row 1: m_0 + 4 m_1 + m_2 with m_0 = 2 m_1 - m_2 -> 6 m_1 + 0 m_2
    b[0] = 6.0;
    c[0] = 0.0;
    // last row: m_{n-3} + 4 m_{n-2} + m_{n-1}, m_{n-1} = 2 m_{n-2} - m_{n-3} -> 0 m_{n-3} + 6 m_{n-2}
    b[k - 1] = 6.0;
    a[k - 1] = 0.0;
    let mut d = rhs;
    if k == 1 {
        let v = d[0] / b[0];
        return vec![v; 3];
    }
    for i in 1..k {
        let w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    let mut m = vec![0.0; n];
    m[k] = d[k - 1] / b[k - 1];
    for i in (0..k - 1).rev() {
        m[i + 1] = (d[i] - c[i] * m[i + 2]) / b[i];
    }
    m[0] = 2.0 * m[1] - m[2];
    m[n - 1] = 2.0 * m[n - 2] - m[n - 3];
    a.clear();
    c.clear();
    m
}

/// Value and derivatives up to third order of a spline at `x` (grid starts at 0).
pub fn eval(y: &[f64], m: &[f64], h: f64, x: f64) -> [f64; 4] {
    let n = y.len();
    let s = (x / h).floor().clamp(0.0, (n - 2) as f64);
    let i = s as usize;
    let t = x - i as f64 * h;
    let (y0, y1, m0, m1) = (y[i], y[i + 1], m[i], m[i + 1]);
    let b = (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0;
    let c = 0.5 * m0;
    let d = (m1 - m0) / (6.0 * h);
    [
        y0 + t * (b + t * (c + t * d)),
        b + t * (2.0 * c + 3.0 * t * d),
        2.0 * c + 6.0 * t * d,
        6.0 * d,
    ]
}

/// Tensor-product cubic spline of a scalar on an nz x nr node grid (r fastest).
#[derive(Debug, Clone)]
pub struct Spline2 {
    nz: usize,
    nr: usize,
    hz: f64,
    hr: f64,
    vals: Vec<f64>,
    /// z-second-derivatives per r column, `[j * nz + i]`.
    mz: Vec<f64>,
}

impl Spline2 {
    pub fn new(nz: usize, nr: usize, hz: f64, hr: f64, data: &[f64]) -> Self {
        let mut vals = vec![0.0; nz * nr];
        let mut mz = vec![0.0; nz * nr];
        for j in 0..nr {
            let col: Vec<f64> = (0..nz).map(|i| data[i * nr + j]).collect();
            let m = second_derivatives(&col, hz);
            vals[j * nz..(j + 1) * nz].copy_from_slice(&col);
            mz[j * nz..(j + 1) * nz].copy_from_slice(&m);
        }
        Spline2 { nz, nr, hz, hr, vals, mz }
    }

    /// All partial derivatives d^{a+b}/dz^a dr^b, a, b <= 3, as `[a][b]`.
    pub fn eval(&self, z: f64, r: f64) -> [[f64; 4]; 4] {
        let mut cols = [vec![0.0; self.nr], vec![0.0; self.nr], vec![0.0; self.nr], vec![0.0; self.nr]];
        for j in 0..self.nr {
            let e = eval(&self.vals[j * self.nz..(j + 1) * self.nz], &self.mz[j * self.nz..(j + 1) * self.nz], self.hz, z);
            for a in 0..4 {
                cols[a][j] = e[a];
            }
        }
        let mut out = [[0.0; 4]; 4];
        for a in 0..4 {
            let m = second_derivatives(&cols[a], self.hr);
            out[a] = eval(&cols[a], &m, self.hr, r);
        }
        out
    }
}
