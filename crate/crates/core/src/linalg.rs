//! Small dense real matrices and their eigenvalues.
//!
//! Eigenvalues come from Householder reduction to upper Hessenberg form
//! followed by the Francis double-shift QR iteration (the EISPACK `orthes` /
//! `hqr` pair, eigenvalues only). Intended for the Jacobians of the phase
//! space systems, which are at most a dozen rows.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "row {i} has the wrong length");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// All eigenvalues, sorted by descending real part then descending
    /// imaginary part.
    pub fn eigenvalues(&self) -> Result<Vec<Eigenvalue>> {
        let mut h = self.clone();
        h.reduce_to_hessenberg();
        let mut ev = h.hessenberg_qr()?;
        ev.sort_by(|a, b| {
            b.re.partial_cmp(&a.re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        Ok(ev)
    }

    fn reduce_to_hessenberg(&mut self) {
        let n = self.n;
        if n < 3 {
            return;
        }
        let high = n - 1;
        let mut ort = vec![0.0; n];
        for m in 1..high {
            let scale: f64 = (m..=high).map(|i| self.get(i, m - 1).abs()).sum();
            if scale == 0.0 {
                continue;
            }
            let mut h = 0.0;
            for i in (m..=high).rev() {
                ort[i] = self.get(i, m - 1) / scale;
                h += ort[i] * ort[i];
            }
            let mut g = h.sqrt();
            if ort[m] > 0.0 {
                g = -g;
            }
            h -= ort[m] * g;
            ort[m] -= g;

            for j in m..n {
                let f: f64 = (m..=high).rev().map(|i| ort[i] * self.get(i, j)).sum::<f64>() / h;
                for i in m..=high {
                    let v = self.get(i, j) - f * ort[i];
                    self.set(i, j, v);
                }
            }
            for i in 0..=high {
                let f: f64 = (m..=high).rev().map(|j| ort[j] * self.get(i, j)).sum::<f64>() / h;
                for j in m..=high {
                    let v = self.get(i, j) - f * ort[j];
                    self.set(i, j, v);
                }
            }
            ort[m] *= scale;
            self.set(m, m - 1, scale * g);
        }
    }

    fn hessenberg_qr(&mut self) -> Result<Vec<Eigenvalue>> {
        let nn = self.n as isize;
        let mut d = vec![0.0; self.n];
        let mut e = vec![0.0; self.n];
        if nn == 0 {
            return Ok(Vec::new());
        }
        let eps = f64::EPSILON;
        let low: isize = 0;
        let mut n = nn - 1;
        let mut exshift = 0.0;
        let (mut p, mut q, mut r) = (0.0, 0.0, 0.0);
        let (mut s, mut z);
        let (mut w, mut x, mut y);
        let max_sweeps = 60 * self.n.max(1);
        let mut sweeps = 0usize;

        let mut norm = 0.0;
        for i in 0..nn {
            for j in (i - 1).max(0)..nn {
                norm += self.at(i, j).abs();
            }
        }

        let mut iter = 0;
        while n >= low {
            let mut l = n;
            while l > low {
                s = self.at(l - 1, l - 1).abs() + self.at(l, l).abs();
                if s == 0.0 {
                    s = norm;
                }
                if self.at(l, l - 1).abs() <= eps * s {
                    break;
                }
                l -= 1;
            }

            if l == n {
                let v = self.at(n, n) + exshift;
                self.put(n, n, v);
                d[n as usize] = v;
                e[n as usize] = 0.0;
                n -= 1;
                iter = 0;
            } else if l == n - 1 {
                w = self.at(n, n - 1) * self.at(n - 1, n);
                p = (self.at(n - 1, n - 1) - self.at(n, n)) / 2.0;
                q = p * p + w;
                z = q.abs().sqrt();
                let hnn = self.at(n, n) + exshift;
                self.put(n, n, hnn);
                let hmm = self.at(n - 1, n - 1) + exshift;
                self.put(n - 1, n - 1, hmm);
                x = hnn;
                let (i0, i1) = ((n - 1) as usize, n as usize);
                if q >= 0.0 {
                    z = if p >= 0.0 { p + z } else { p - z };
                    d[i0] = x + z;
                    d[i1] = d[i0];
                    if z != 0.0 {
                        d[i1] = x - w / z;
                    }
                    e[i0] = 0.0;
                    e[i1] = 0.0;
                } else {
                    d[i0] = x + p;
                    d[i1] = x + p;
                    e[i0] = z;
                    e[i1] = -z;
                }
                n -= 2;
                iter = 0;
            } else {
                sweeps += 1;
                if sweeps > max_sweeps {
                    return Err(Error::NoConvergence(sweeps));
                }
                x = self.at(n, n);
                y = 0.0;
                w = 0.0;
                if l < n {
                    y = self.at(n - 1, n - 1);
                    w = self.at(n, n - 1) * self.at(n - 1, n);
                }
                // exceptional shifts
                if iter == 10 {
                    exshift += x;
                    for i in low..=n {
                        let v = self.at(i, i) - x;
                        self.put(i, i, v);
                    }
                    s = self.at(n, n - 1).abs() + self.at(n - 1, n - 2).abs();
                    x = 0.75 * s;
                    y = x;
                    w = -0.4375 * s * s;
                }
                if iter == 30 {
                    s = (y - x) / 2.0;
                    s = s * s + w;
                    if s > 0.0 {
                        s = s.sqrt();
                        if y < x {
                            s = -s;
                        }
                        s = x - w / ((y - x) / 2.0 + s);
                        for i in low..=n {
                            let v = self.at(i, i) - s;
                            self.put(i, i, v);
                        }
                        exshift += s;
                        x = 0.964;
                        y = x;
                        w = x;
                    }
                }
                iter += 1;

                let mut m = n - 2;
                while m >= l {
                    z = self.at(m, m);
                    r = x - z;
                    s = y - z;
                    p = (r * s - w) / self.at(m + 1, m) + self.at(m, m + 1);
                    q = self.at(m + 1, m + 1) - z - r - s;
                    r = self.at(m + 2, m + 1);
                    s = p.abs() + q.abs() + r.abs();
                    p /= s;
                    q /= s;
                    r /= s;
                    if m == l {
                        break;
                    }
                    let lhs = self.at(m, m - 1).abs() * (q.abs() + r.abs());
                    let rhs = eps
                        * (p.abs()
                            * (self.at(m - 1, m - 1).abs() + z.abs() + self.at(m + 1, m + 1).abs()));
                    if lhs < rhs {
                        break;
                    }
                    m -= 1;
                }

                for i in (m + 2)..=n {
                    self.put(i, i - 2, 0.0);
                    if i > m + 2 {
                        self.put(i, i - 3, 0.0);
                    }
                }

                let mut k = m;
                while k < n {
                    let notlast = k != n - 1;
                    if k != m {
                        p = self.at(k, k - 1);
                        q = self.at(k + 1, k - 1);
                        r = if notlast { self.at(k + 2, k - 1) } else { 0.0 };
                        x = p.abs() + q.abs() + r.abs();
                        if x == 0.0 {
                            k += 1;
                            continue;
                        }
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                    s = (p * p + q * q + r * r).sqrt();
                    if p < 0.0 {
                        s = -s;
                    }
                    if s != 0.0 {
                        if k != m {
                            self.put(k, k - 1, -s * x);
                        } else if l != m {
                            let v = -self.at(k, k - 1);
                            self.put(k, k - 1, v);
                        }
                        p += s;
                        x = p / s;
                        y = q / s;
                        z = r / s;
                        q /= p;
                        r /= p;

                        for j in k..nn {
                            p = self.at(k, j) + q * self.at(k + 1, j);
                            if notlast {
                                p += r * self.at(k + 2, j);
                                let v = self.at(k + 2, j) - p * z;
                                self.put(k + 2, j, v);
                            }
                            let v = self.at(k, j) - p * x;
                            self.put(k, j, v);
                            let v = self.at(k + 1, j) - p * y;
                            self.put(k + 1, j, v);
                        }

                        for i in 0..=n.min(k + 3) {
                            p = x * self.at(i, k) + y * self.at(i, k + 1);
                            if notlast {
                                p += z * self.at(i, k + 2);
                                let v = self.at(i, k + 2) - p * r;
                                self.put(i, k + 2, v);
                            }
                            let v = self.at(i, k) - p;
                            self.put(i, k, v);
                            let v = self.at(i, k + 1) - p * q;
                            self.put(i, k + 1, v);
                        }
                    }
                    k += 1;
                }
            }
        }
        Ok(d.into_iter()
            .zip(e)
            .map(|(re, im)| Eigenvalue { re, im })
            .collect())
    }

    #[inline]
    fn at(&self, i: isize, j: isize) -> f64 {
        self.get(i as usize, j as usize)
    }

    #[inline]
    fn put(&mut self, i: isize, j: isize, v: f64) {
        self.set(i as usize, j as usize, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl fmt::Display for Eigenvalue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == 0.0 {
            write!(f, "{}", self.re)
        } else {
            write!(f, "{}{:+}i", self.re, self.im)
        }
    }
}
