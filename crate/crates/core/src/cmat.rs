//! Dense matrix kernels: complex floating matrices with the factorizations
//! the spectral analysis needs, and matrices over [`Scalar`] for exact work.
//!
//! [`CMat`] carries LU with partial pivoting (solve, inverse, determinant),
//! column-pivoted Householder QR (rank, nullspace), Householder reduction to
//! Hessenberg form, and eigenvalues by single-shift QR iteration with
//! Wilkinson shifts. Sizes here are small (a few dozen rows), so the kernels
//! favor clarity over blocking.
//!
//! [`SMat`] is a matrix over [`Scalar`]; products stay exact while every
//! entry does. `exact_rank` performs fraction-free-enough Gaussian
//! elimination in the cyclotomic field and underpins the exact spectral
//! path; it returns None as soon as a floating entry appears.

use crate::error::{Error, Result};
use crate::scalar::{CycQ, Scalar};
use num::complex::Complex64;
use num::traits::Zero;

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    e: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            e: vec![Complex64::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut m = CMat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul(&self, o: &CMat) -> CMat {
        assert_eq!(self.cols, o.rows, "dimension mismatch in mul");
        let mut out = CMat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..o.cols {
                    out[(i, j)] += a * o[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn add(&self, o: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let mut m = self.clone();
        for (x, y) in m.e.iter_mut().zip(&o.e) {
            *x += y;
        }
        m
    }

    pub fn sub(&self, o: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let mut m = self.clone();
        for (x, y) in m.e.iter_mut().zip(&o.e) {
            *x -= y;
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        let mut m = self.clone();
        for x in m.e.iter_mut() {
            *x *= s;
        }
        m
    }

    pub fn shift_diag(&self, s: Complex64) -> CMat {
        assert!(self.is_square());
        let mut m = self.clone();
        for i in 0..self.rows {
            m[(i, i)] += s;
        }
        m
    }

    pub fn conj_transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.e.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn pow(&self, mut p: u32) -> CMat {
        assert!(self.is_square());
        let mut acc = CMat::identity(self.rows);
        let mut base = self.clone();
        while p > 0 {
            if p & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            p >>= 1;
        }
        acc
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// LU with partial pivoting: returns (lu, perm, sign-swaps).
    fn lu(&self) -> Result<(CMat, Vec<usize>, usize)> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0usize;
        for k in 0..n {
            let (mut piv, mut best) = (k, a[(k, k)].norm());
            for i in k + 1..n {
                let v = a[(i, k)].norm();
                if v > best {
                    piv = i;
                    best = v;
                }
            }
            if best == 0.0 {
                return Err(Error::Singular(format!(
                    "pivot {} vanished in LU of a {}x{} matrix",
                    k, n, n
                )));
            }
            if piv != k {
                for j in 0..n {
                    a.e.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
                swaps += 1;
            }
            let d = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / d;
                a[(i, k)] = f;
                for j in k + 1..n {
                    let t = f * a[(k, j)];
                    a[(i, j)] -= t;
                }
            }
        }
        Ok((a, perm, swaps))
    }

    pub fn determinant(&self) -> Complex64 {
        match self.lu() {
            Ok((lu, _, swaps)) => {
                let mut d = if swaps % 2 == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(-1.0, 0.0)
                };
                for i in 0..self.rows {
                    d *= lu[(i, i)];
                }
                d
            }
            Err(_) => Complex64::zero(),
        }
    }

    /// Solves self * X = B for each column of B.
    pub fn solve(&self, b: &CMat) -> Result<CMat> {
        assert_eq!(self.rows, b.rows);
        let n = self.rows;
        let (lu, perm, _) = self.lu()?;
        let mut x = CMat::zeros(n, b.cols);
        for c in 0..b.cols {
            // Forward substitution on permuted rhs.
            let mut y = vec![Complex64::zero(); n];
            for i in 0..n {
                let mut s = b[(perm[i], c)];
                for j in 0..i {
                    s -= lu[(i, j)] * y[j];
                }
                y[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = y[i];
                for j in i + 1..n {
                    s -= lu[(i, j)] * x[(j, c)];
                }
                x[(i, c)] = s / lu[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<CMat> {
        self.solve(&CMat::identity(self.rows))
    }

    /// Column-pivoted Householder QR: A P = Q R.
    /// Returns (r, perm) with R upper triangular and |r_00| >= |r_11| >= ...
    fn cpqr_r(&self) -> (CMat, Vec<usize>) {
        let (n, m) = (self.rows, self.cols);
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..m).collect();
        let steps = n.min(m);
        for k in 0..steps {
            // Pivot: remaining column with largest tail norm.
            let (mut piv, mut best) = (k, -1.0f64);
            for j in k..m {
                let s: f64 = (k..n).map(|i| a[(i, j)].norm_sqr()).sum();
                if s > best {
                    piv = j;
                    best = s;
                }
            }
            if piv != k {
                for i in 0..n {
                    let t = a[(i, k)];
                    a[(i, k)] = a[(i, piv)];
                    a[(i, piv)] = t;
                }
                perm.swap(k, piv);
            }
            if best <= 0.0 {
                break;
            }
            // Householder on column k below row k.
            let norm = best.sqrt();
            if norm == 0.0 {
                continue;
            }
            let x0 = a[(k, k)];
            let alpha = if x0.norm() == 0.0 {
                Complex64::new(-norm, 0.0)
            } else {
                -(x0 / x0.norm()) * norm
            };
            let mut v: Vec<Complex64> = (k..n).map(|i| a[(i, k)]).collect();
            v[0] -= alpha;
            let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if vv == 0.0 {
                continue;
            }
            let beta = 2.0 / vv;
            for j in k..m {
                let dot: Complex64 = (0..v.len()).map(|i| v[i].conj() * a[(k + i, j)]).sum();
                let f = beta * dot;
                for i in 0..v.len() {
                    let t = f * v[i];
                    a[(k + i, j)] -= t;
                }
            }
            a[(k, k)] = alpha;
            for i in k + 1..n {
                a[(i, k)] = Complex64::zero();
            }
        }
        (a, perm)
    }

    /// Numerical rank: diagonal of the pivoted R above tol * |r_00|.
    pub fn rank(&self, tol: f64) -> usize {
        let (r, _) = self.cpqr_r();
        let steps = self.rows.min(self.cols);
        let top = r[(0, 0)].norm();
        if top == 0.0 {
            return 0;
        }
        let cut = tol * top;
        (0..steps).take_while(|&i| r[(i, i)].norm() > cut).count()
    }

    /// Rank with the cutoff taken relative to an external scale. A power of
    /// a shifted matrix can be numerically zero while its own top pivot is
    /// pure rounding noise, so the caller supplies the scale the power
    /// should be measured against.
    pub fn rank_scaled(&self, tol: f64, scale: f64) -> usize {
        let (r, _) = self.cpqr_r();
        let steps = self.rows.min(self.cols);
        let cut = tol * scale.max(r[(0, 0)].norm() * 1e-3).max(1e-300);
        (0..steps).take_while(|&i| r[(i, i)].norm() > cut).count()
    }

    /// Orthonormal basis of the (right) nullspace, relative tolerance tol.
    pub fn nullspace(&self, tol: f64) -> Vec<Vec<Complex64>> {
        let top = self.cpqr_r().0[(0, 0)].norm();
        self.nullspace_with_cut(tol * top)
    }

    /// Nullspace with the cutoff taken relative to an external scale; see
    /// rank_scaled.
    pub fn nullspace_scaled(&self, tol: f64, scale: f64) -> Vec<Vec<Complex64>> {
        let top = self.cpqr_r().0[(0, 0)].norm();
        self.nullspace_with_cut(tol * scale.max(top * 1e-3).max(1e-300))
    }

    fn nullspace_with_cut(&self, cut: f64) -> Vec<Vec<Complex64>> {
        let m = self.cols;
        let (r, perm) = self.cpqr_r();
        let steps = self.rows.min(self.cols);
        let top = r[(0, 0)].norm();
        let rank = if top == 0.0 {
            0
        } else {
            (0..steps).take_while(|&i| r[(i, i)].norm() > cut).count()
        };
        let dim = m - rank;
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
        for f in 0..dim {
            // Solve R11 y = -R12 e_f by back substitution.
            let col = rank + f;
            let mut y = vec![Complex64::zero(); rank];
            for i in (0..rank).rev() {
                let mut s = -r[(i, col)];
                for j in i + 1..rank {
                    s -= r[(i, j)] * y[j];
                }
                y[i] = s / r[(i, i)];
            }
            let mut x = vec![Complex64::zero(); m];
            for (i, yi) in y.iter().enumerate() {
                x[perm[i]] = *yi;
            }
            x[perm[col]] = Complex64::new(1.0, 0.0);
            basis.push(x);
        }
        // Modified Gram-Schmidt for a well-conditioned basis.
        let mut ortho: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
        for mut v in basis {
            for _ in 0..2 {
                for u in &ortho {
                    let dot: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (x, u) in v.iter_mut().zip(u) {
                        *x -= dot * u;
                    }
                }
            }
            let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n > 0.0 {
                for x in v.iter_mut() {
                    *x /= n;
                }
                ortho.push(v);
            }
        }
        ortho
    }

    /// Householder reduction to upper Hessenberg form (similar matrix).
    pub fn hessenberg(&self) -> CMat {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        if n < 3 {
            return a;
        }
        for k in 0..n - 2 {
            let tail: f64 = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum();
            let below: f64 = (k + 2..n).map(|i| a[(i, k)].norm_sqr()).sum();
            if below == 0.0 || tail == 0.0 {
                continue;
            }
            let norm = tail.sqrt();
            let x0 = a[(k + 1, k)];
            let alpha = if x0.norm() == 0.0 {
                Complex64::new(-norm, 0.0)
            } else {
                -(x0 / x0.norm()) * norm
            };
            let mut v: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
            v[0] -= alpha;
            let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if vv == 0.0 {
                continue;
            }
            let beta = 2.0 / vv;
            // Left: rows k+1..n, all columns.
            for j in 0..n {
                let dot: Complex64 = (0..v.len()).map(|i| v[i].conj() * a[(k + 1 + i, j)]).sum();
                let f = beta * dot;
                for i in 0..v.len() {
                    let t = f * v[i];
                    a[(k + 1 + i, j)] -= t;
                }
            }
            // Right: columns k+1..n, all rows.
            for i in 0..n {
                let dot: Complex64 = (0..v.len()).map(|j| a[(i, k + 1 + j)] * v[j]).sum();
                let f = beta * dot;
                for j in 0..v.len() {
                    let t = f * v[j].conj();
                    a[(i, k + 1 + j)] -= t;
                }
            }
        }
        a
    }

    /// Eigenvalues by single-shift QR iteration on the Hessenberg form.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut h = self.hessenberg();
        let mut eigs: Vec<Complex64> = Vec::with_capacity(n);
        let mut active = n;
        let eps = 1e-15;
        let mut stuck = 0usize;
        let max_total = 60 * n * n + 600;
        let mut total = 0usize;
        while active > 0 {
            if active == 1 {
                eigs.push(h[(0, 0)]);
                active = 0;
                continue;
            }
            // Deflate negligible subdiagonals.
            let mut deflated = false;
            for i in (0..active - 1).rev() {
                let s = h[(i, i)].norm() + h[(i + 1, i + 1)].norm();
                let s = if s == 0.0 { 1.0 } else { s };
                if h[(i + 1, i)].norm() <= eps * s {
                    h[(i + 1, i)] = Complex64::zero();
                    if i + 1 == active - 1 {
                        eigs.push(h[(active - 1, active - 1)]);
                        active -= 1;
                        stuck = 0;
                        deflated = true;
                        break;
                    }
                }
            }
            if deflated {
                continue;
            }
            total += 1;
            stuck += 1;
            if total > max_total {
                return Err(Error::IllConditioned(format!(
                    "eigenvalue iteration did not converge on a {}x{} matrix",
                    n, n
                )));
            }
            // Unreduced trailing block [l, active).
            let mut l = active - 1;
            while l > 0 && h[(l, l - 1)].norm_sqr() != 0.0 {
                l -= 1;
            }
            // Wilkinson shift from the trailing 2x2, exceptional shift if stuck.
            let a = h[(active - 2, active - 2)];
            let b = h[(active - 2, active - 1)];
            let c = h[(active - 1, active - 2)];
            let d = h[(active - 1, active - 1)];
            let mu = if stuck % 17 == 0 {
                d + Complex64::new(c.norm(), 0.0) * 0.9
            } else {
                let tr = (a + d) * 0.5;
                let disc = ((a - d) * 0.5).powi(2) + b * c;
                let sq = disc.sqrt();
                let l1 = tr + sq;
                let l2 = tr - sq;
                if (l1 - d).norm() <= (l2 - d).norm() {
                    l1
                } else {
                    l2
                }
            };
            for i in l..active {
                h[(i, i)] -= mu;
            }
            // QR by Givens on the subdiagonal, then RQ.
            let mut rot: Vec<(Complex64, Complex64)> = Vec::with_capacity(active - l);
            for i in l..active - 1 {
                let f = h[(i, i)];
                let g = h[(i + 1, i)];
                let r = (f.norm_sqr() + g.norm_sqr()).sqrt();
                let (cs, sn) = if r == 0.0 {
                    (Complex64::new(1.0, 0.0), Complex64::zero())
                } else {
                    (f.conj() / r, g.conj() / r)
                };
                rot.push((cs, sn));
                for j in i..active {
                    let x = h[(i, j)];
                    let y = h[(i + 1, j)];
                    h[(i, j)] = cs * x + sn * y;
                    h[(i + 1, j)] = -sn.conj() * x + cs.conj() * y;
                }
                h[(i + 1, i)] = Complex64::zero();
            }
            for (idx, (cs, sn)) in rot.iter().enumerate() {
                let i = l + idx;
                // Right-multiply by the rotation's adjoint: columns i, i+1.
                let hi = (i + 2).min(active);
                for r2 in l..hi {
                    let x = h[(r2, i)];
                    let y = h[(r2, i + 1)];
                    h[(r2, i)] = x * cs.conj() + y * sn.conj();
                    h[(r2, i + 1)] = -x * *sn + y * *cs;
                }
            }
            for i in l..active {
                h[(i, i)] += mu;
            }
        }
        eigs.reverse();
        Ok(eigs)
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.e[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.e[i * self.cols + j]
    }
}

impl std::fmt::Debug for CMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| format!("{:.4}{:+.4}i", self[(i, j)].re, self[(i, j)].im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Dense matrix over [`Scalar`].
#[derive(Clone, Debug)]
pub struct SMat {
    pub rows: usize,
    pub cols: usize,
    e: Vec<Scalar>,
}

impl SMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SMat {
            rows,
            cols,
            e: vec![Scalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Scalar::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Scalar) -> Self {
        let mut m = SMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn is_exact(&self) -> bool {
        self.e.iter().all(|s| s.is_exact())
    }

    pub fn mul(&self, o: &SMat) -> SMat {
        assert_eq!(self.cols, o.rows, "dimension mismatch in mul");
        let mut out = SMat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    out[(i, j)] = out[(i, j)].add(&a.mul(b));
                }
            }
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> SMat {
        let mut m = self.clone();
        for x in m.e.iter_mut() {
            *x = x.mul(s);
        }
        m
    }

    pub fn pow(&self, mut p: u64) -> SMat {
        assert_eq!(self.rows, self.cols);
        let mut acc = SMat::identity(self.rows);
        let mut base = self.clone();
        while p > 0 {
            if p & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            p >>= 1;
        }
        acc
    }

    /// Gauss-Jordan inverse; exact while the entries stay exact.
    pub fn inverse(&self) -> Result<SMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut b = SMat::identity(n);
        for k in 0..n {
            let piv = (k..n)
                .filter(|&i| !a[(i, k)].is_zero())
                .max_by(|&i, &j| {
                    a[(i, k)]
                        .norm()
                        .partial_cmp(&a[(j, k)].norm())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .ok_or_else(|| {
                    Error::Singular(format!("column {} vanished inverting a {}x{} matrix", k, n, n))
                })?;
            if piv != k {
                for j in 0..n {
                    let t = a[(k, j)].clone();
                    a[(k, j)] = a[(piv, j)].clone();
                    a[(piv, j)] = t;
                    let t = b[(k, j)].clone();
                    b[(k, j)] = b[(piv, j)].clone();
                    b[(piv, j)] = t;
                }
            }
            let inv = a[(k, k)].inv().ok_or_else(|| {
                Error::Singular(format!("zero pivot inverting a {}x{} matrix", n, n))
            })?;
            for j in 0..n {
                a[(k, j)] = a[(k, j)].mul(&inv);
                b[(k, j)] = b[(k, j)].mul(&inv);
            }
            for i in 0..n {
                if i == k || a[(i, k)].is_zero() {
                    continue;
                }
                let f = a[(i, k)].clone();
                for j in 0..n {
                    let t = f.mul(&a[(k, j)]);
                    a[(i, j)] = a[(i, j)].sub(&t);
                    let t = f.mul(&b[(k, j)]);
                    b[(i, j)] = b[(i, j)].sub(&t);
                }
            }
        }
        Ok(b)
    }

    pub fn to_cmat(&self) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_complex())
    }

    pub fn max_abs(&self) -> f64 {
        self.e.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Entrywise comparison: exact where both sides are exact, else within tol.
    pub fn approx_eq(&self, o: &SMat, tol: f64) -> bool {
        self.rows == o.rows
            && self.cols == o.cols
            && self.e.iter().zip(&o.e).all(|(a, b)| a.approx_eq(b, tol))
    }

    /// Exact rank over the cyclotomic field; None if any entry is floating
    /// or an intermediate cyclotomic order overflows.
    pub fn exact_rank(&self) -> Option<usize> {
        let mut rows: Vec<Vec<CycQ>> = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut row = Vec::with_capacity(self.cols);
            for j in 0..self.cols {
                match &self[(i, j)] {
                    Scalar::Exact(c) => row.push(c.clone()),
                    Scalar::Float(_) => return None,
                }
            }
            rows.push(row);
        }
        let mut rank = 0usize;
        let mut col = 0usize;
        while rank < rows.len() && col < self.cols {
            let piv = (rank..rows.len()).find(|&i| !rows[i][col].is_zero());
            let piv = match piv {
                Some(p) => p,
                None => {
                    col += 1;
                    continue;
                }
            };
            rows.swap(rank, piv);
            let inv = rows[rank][col].inv()?;
            for i in rank + 1..rows.len() {
                if rows[i][col].is_zero() {
                    continue;
                }
                let f = rows[i][col].try_mul(&inv)?;
                for j in col..self.cols {
                    let t = f.try_mul(&rows[rank][j])?;
                    rows[i][j] = rows[i][j].try_add(&t.neg())?;
                }
            }
            rank += 1;
            col += 1;
        }
        Some(rank)
    }
}

impl std::ops::Index<(usize, usize)> for SMat {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.e[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        &mut self.e[i * self.cols + j]
    }
}
