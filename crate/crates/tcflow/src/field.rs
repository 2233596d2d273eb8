//! Sampled velocity fields on the meridional rectangle and their text format.
//!
//! ```text
//! TCPFIELD 1
//! nz=<i> nr=<i> L=<f> r1=<f> lambda=<f> gamma=<f> W0=<f> t=<f>
//! z r u_z u_r u_theta        (nz*nr lines, r varying fastest)
//! ```

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub nz: usize,
    pub nr: usize,
    pub l: f64,
    pub r1: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub w0: f64,
    pub t: f64,
    pub uz: Vec<f64>,
    pub ur: Vec<f64>,
    pub ut: Vec<f64>,
}

/// Shortest decimal form carrying 17 significant digits.
pub fn fmt17(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

impl Field {
    pub fn zeros(nz: usize, nr: usize, l: f64, r1: f64) -> Self {
        let n = nz * nr;
        Field { nz, nr, l, r1, lambda: 0.0, gamma: 0.0, w0: 0.0, t: 0.0, uz: vec![0.0; n], ur: vec![0.0; n], ut: vec![0.0; n] }
    }

    #[inline]
    pub fn idx(&self, iz: usize, ir: usize) -> usize {
        iz * self.nr + ir
    }
    #[inline]
    pub fn z(&self, iz: usize) -> f64 {
        self.l * iz as f64 / (self.nz - 1) as f64
    }
    #[inline]
    pub fn rbar(&self, ir: usize) -> f64 {
        ir as f64 / (self.nr - 1) as f64
    }
    pub fn dz(&self) -> f64 {
        self.l / (self.nz - 1) as f64
    }
    pub fn dr(&self) -> f64 {
        1.0 / (self.nr - 1) as f64
    }

    /// Sample an analytic field (z, rbar) -> (u_z, u_r, u_theta).
    pub fn from_fn(nz: usize, nr: usize, l: f64, r1: f64, f: impl Fn(f64, f64) -> (f64, f64, f64)) -> Self {
        let mut out = Field::zeros(nz, nr, l, r1);
        for i in 0..nz {
            for j in 0..nr {
                let (a, b, c) = f(out.z(i), out.rbar(j));
                let q = out.idx(i, j);
                out.uz[q] = a;
                out.ur[q] = b;
                out.ut[q] = c;
            }
        }
        out
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.nz != other.nz || self.nr != other.nr || (self.l - other.l).abs() > 1e-12 * self.l {
            return Err(Error::GridMismatch(format!(
                "{}x{} L={} vs {}x{} L={}",
                self.nz, self.nr, self.l, other.nz, other.nr, other.l
            )));
        }
        Ok(())
    }

    /// Quadrature weights in z and r (trapezoid with Gregory end corrections,
    /// fourth order for smooth integrands).
    pub fn weights(&self) -> (Vec<f64>, Vec<f64>) {
        (gregory(self.nz, self.dz()), gregory(self.nr, self.dr()))
    }

    /// L2 inner product of two fields on the same grid.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        self.same_grid(other)?;
        let (wz, wr) = self.weights();
        let mut s = 0.0;
        for i in 0..self.nz {
            for j in 0..self.nr {
                let q = self.idx(i, j);
                s += wz[i] * wr[j] * (self.uz[q] * other.uz[q] + self.ur[q] * other.ur[q] + self.ut[q] * other.ut[q]);
            }
        }
        Ok(s)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).expect("same grid").sqrt()
    }

    pub fn scaled(&self, c: f64) -> Field {
        let mut f = self.clone();
        for v in f.uz.iter_mut().chain(f.ur.iter_mut()).chain(f.ut.iter_mut()) {
            *v *= c;
        }
        f
    }

    pub fn max_speed(&self) -> f64 {
        self.uz
            .iter()
            .zip(&self.ur)
            .zip(&self.ut)
            .map(|((a, b), c)| (a * a + b * b + c * c).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.nz * self.nr * 120);
        s.push_str("TCPFIELD 1\n");
        let _ = writeln!(
            s,
            "nz={} nr={} L={} r1={} lambda={} gamma={} W0={} t={}",
            self.nz,
            self.nr,
            fmt17(self.l),
            fmt17(self.r1),
            fmt17(self.lambda),
            fmt17(self.gamma),
            fmt17(self.w0),
            fmt17(self.t)
        );
        for i in 0..self.nz {
            for j in 0..self.nr {
                let q = self.idx(i, j);
                let _ = writeln!(
                    s,
                    "{} {} {} {} {}",
                    fmt17(self.z(i)),
                    fmt17(self.r1 + self.rbar(j)),
                    fmt17(self.uz[q]),
                    fmt17(self.ur[q]),
                    fmt17(self.ut[q])
                );
            }
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Field> {
        let f = std::fs::File::open(path)?;
        Self::parse(std::io::BufReader::new(f))
    }

    pub fn parse(reader: impl BufRead) -> Result<Field> {
        let mut lines = reader.lines();
        let mut next = || -> Result<String> {
            lines.next().ok_or_else(|| Error::Parse("unexpected end of field file".into()))?.map_err(Error::from)
        };
        if next()?.trim() != "TCPFIELD 1" {
            return Err(Error::Parse("missing TCPFIELD 1 magic".into()));
        }
        let header = next()?;
        let get = |key: &str| -> Result<String> {
            header
                .split_whitespace()
                .find_map(|t| t.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .map(str::to_string)
                .ok_or_else(|| Error::Parse(format!("header key {key} missing")))
        };
        let num = |s: String| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}")));
        let int = |s: String| s.parse::<usize>().map_err(|e| Error::Parse(format!("{s}: {e}")));
        let nz = int(get("nz")?)?;
        let nr = int(get("nr")?)?;
        if nz < 2 || nr < 2 {
            return Err(Error::Parse("grid needs at least 2x2 nodes".into()));
        }
        let mut f = Field::zeros(nz, nr, num(get("L")?)?, num(get("r1")?)?);
        f.lambda = num(get("lambda")?)?;
        f.gamma = num(get("gamma")?)?;
        f.w0 = num(get("W0")?)?;
        f.t = num(get("t")?)?;
        for q in 0..nz * nr {
            let line = next()?;
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", q + 3))))
                .collect::<Result<_>>()?;
            if v.len() != 5 {
                return Err(Error::Parse(format!("line {}: expected 5 columns", q + 3)));
            }
            f.uz[q] = v[2];
            f.ur[q] = v[3];
            f.ut[q] = v[4];
        }
        Ok(f)
    }
}

/// Gregory-corrected trapezoid weights for n equally spaced points.
pub fn gregory(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n >= 8 {
        let c = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
        for (i, ci) in c.iter().enumerate() {
            w[i] = ci * h;
            w[n - 1 - i] = ci * h;
        }
    } else {
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
    }
    w
}
