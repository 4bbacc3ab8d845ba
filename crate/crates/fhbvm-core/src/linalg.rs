//! Minimal dense real linear algebra: LU factorization with partial
//! pivoting, eigenvalues of small nonsymmetric matrices (balance +
//! Hessenberg reduction + shifted QR), and infinity norms.
//!
//! Everything here is sized for the solver's needs (matrices up to a few
//! dozen rows); robustness is preferred over speed throughout.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Dense real matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Build from slices of rows; all rows must have equal length.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn fill(&mut self, value: f64) {
        self.data.fill(value);
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == 0.0 {
                    continue;
                }
                let (lhs, out_row) = (rhs.row(l), out.row_mut(i));
                for j in 0..lhs.len() {
                    out_row[j] += a * lhs[j];
                }
            }
        }
        out
    }

    /// Matrix-vector product `self · x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Infinity norm: max over rows of the sum of absolute entries.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| math::abs(*v)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl core::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Infinity norm of a vector.
#[inline]
pub fn norm_inf_slice(v: &[f64]) -> f64 {
    v.iter().map(|x| math::abs(*x)).fold(0.0, f64::max)
}

/// LU factorization with partial pivoting, `PA = LU`.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    lu: DenseMatrix,
    piv: Vec<usize>,
    sign: f64,
}

/// Factor a square matrix with partial pivoting.
///
/// Fails with [`Error::SingularMatrix`] when a pivot falls below working
/// precision relative to the matrix norm.
pub fn lu_factor(a: &DenseMatrix) -> Result<LuFactorization> {
    assert!(a.is_square(), "LU requires a square matrix");
    let n = a.rows();
    let mut lu = a.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let tol = f64::EPSILON * a.norm_inf();

    for col in 0..n {
        let mut p = col;
        let mut max = math::abs(lu[(col, col)]);
        for i in col + 1..n {
            let v = math::abs(lu[(i, col)]);
            if v > max {
                max = v;
                p = i;
            }
        }
        if max.is_nan() || max <= tol {
            return Err(Error::SingularMatrix);
        }
        if p != col {
            for j in 0..n {
                let tmp = lu[(p, j)];
                lu[(p, j)] = lu[(col, j)];
                lu[(col, j)] = tmp;
            }
            piv.swap(p, col);
            sign = -sign;
        }
        let pivot = lu[(col, col)];
        for i in col + 1..n {
            let m = lu[(i, col)] / pivot;
            lu[(i, col)] = m;
            if m != 0.0 {
                for j in col + 1..n {
                    let v = lu[(col, j)];
                    lu[(i, j)] -= m * v;
                }
            }
        }
    }
    Ok(LuFactorization { lu, piv, sign })
}

impl LuFactorization {
    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    /// Solve `Ax = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n, "rhs length mismatch");
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        self.solve_permuted_in_place(&mut x);
        x
    }

    /// Solve in place; `x` holds `b` on entry and the solution on exit.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let sol = self.solve(x);
        x.copy_from_slice(&sol);
    }

    fn solve_permuted_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        for i in 1..n {
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(i) {
                s -= self.lu[(i, j)] * xj;
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                s -= self.lu[(i, j)] * xj;
            }
            x[i] = s / self.lu[(i, i)];
        }
    }

    pub fn det(&self) -> f64 {
        let mut d = self.sign;
        for i in 0..self.dim() {
            d *= self.lu[(i, i)];
        }
        d
    }

    /// Explicit inverse, column by column.
    pub fn inverse(&self) -> DenseMatrix {
        let n = self.dim();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.fill(0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

/// Eigenvalues of a real matrix as `(re, im)` pairs.
///
/// Complex eigenvalues of real matrices come in conjugate pairs; the QR
/// sweep below emits both members consecutively.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexSpectrum {
    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.re.iter().copied().zip(self.im.iter().copied())
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> f64 {
        self.iter().map(|(re, im)| math::hypot(re, im)).fold(0.0, f64::max)
    }
}

/// Eigenvalues of a square real matrix.
///
/// Balances the matrix, reduces it to upper Hessenberg form by stabilized
/// elementary similarity transforms, then runs Francis double-shift QR
/// sweeps until all eigenvalues deflate.
pub fn eig(a: &DenseMatrix) -> Result<ComplexSpectrum> {
    assert!(a.is_square(), "eig requires a square matrix");
    let n = a.rows();
    if n == 0 {
        return Ok(ComplexSpectrum { re: Vec::new(), im: Vec::new() });
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    hqr(&mut h)
}

/// In-place radix-2 balancing (diagonal similarity; eigenvalues unchanged).
fn balance(a: &mut DenseMatrix) {
    const RADIX: f64 = 2.0;
    let n = a.rows();
    let sqrdx = RADIX * RADIX;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += math::abs(a[(j, i)]);
                    r += math::abs(a[(i, j)]);
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                let mut c2 = c;
                while c2 < g {
                    f *= RADIX;
                    c2 *= sqrdx;
                }
                g = r * RADIX;
                while c2 > g {
                    f /= RADIX;
                    c2 /= sqrdx;
                }
                if (c2 + r) / f < 0.95 * s {
                    done = false;
                    let ginv = 1.0 / f;
                    for j in 0..n {
                        a[(i, j)] *= ginv;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Reduce to upper Hessenberg form by pivoted elimination similarity.
fn hessenberg(a: &mut DenseMatrix) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    for m in 1..n - 1 {
        let mut x = 0.0;
        let mut pivot = m;
        for j in m..n {
            if math::abs(a[(j, m - 1)]) > math::abs(x) {
                x = a[(j, m - 1)];
                pivot = j;
            }
        }
        if pivot != m {
            for j in m - 1..n {
                let tmp = a[(pivot, j)];
                a[(pivot, j)] = a[(m, j)];
                a[(m, j)] = tmp;
            }
            for j in 0..n {
                let tmp = a[(j, pivot)];
                a[(j, pivot)] = a[(j, m)];
                a[(j, m)] = tmp;
            }
        }
        if x != 0.0 {
            for i in m + 1..n {
                let mut y = a[(i, m - 1)];
                if y != 0.0 {
                    y /= x;
                    a[(i, m - 1)] = 0.0;
                    for j in m..n {
                        let v = a[(m, j)];
                        a[(i, j)] -= y * v;
                    }
                    for j in 0..n {
                        let v = a[(j, i)];
                        a[(j, m)] += y * v;
                    }
                }
            }
        }
    }
    // clear sub-Hessenberg fill-in left by the elimination
    for i in 2..n {
        for j in 0..i - 1 {
            a[(i, j)] = 0.0;
        }
    }
}

#[inline]
fn same_sign(magnitude: f64, sign_of: f64) -> f64 {
    if sign_of >= 0.0 {
        math::abs(magnitude)
    } else {
        -math::abs(magnitude)
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
fn hqr(a: &mut DenseMatrix) -> Result<ComplexSpectrum> {
    const MAX_SWEEPS: usize = 40;
    let n = a.rows();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += math::abs(a[(i, j)]);
        }
    }
    if anorm == 0.0 {
        return Ok(ComplexSpectrum { re: wr, im: wi });
    }

    let mut nn = n as isize - 1;
    let mut t = 0.0;
    'outer: while nn >= 0 {
        let mut its = 0usize;
        loop {
            // look for a single small subdiagonal element
            let mut l = nn;
            while l >= 1 {
                let mut s = math::abs(a[(l as usize - 1, l as usize - 1)])
                    + math::abs(a[(l as usize, l as usize)]);
                if s == 0.0 {
                    s = anorm;
                }
                if math::abs(a[(l as usize, l as usize - 1)]) <= f64::EPSILON * s {
                    a[(l as usize, l as usize - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let nnu = nn as usize;
            let mut x = a[(nnu, nnu)];
            if l == nn {
                // one root found
                wr[nnu] = x + t;
                wi[nnu] = 0.0;
                nn -= 1;
                continue 'outer;
            }
            let mut y = a[(nnu - 1, nnu - 1)];
            let mut w = a[(nnu, nnu - 1)] * a[(nnu - 1, nnu)];
            if l == nn - 1 {
                // two roots found
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = math::sqrt(math::abs(q));
                x += t;
                if q >= 0.0 {
                    let z = p + same_sign(z, p);
                    wr[nnu - 1] = x + z;
                    wr[nnu] = wr[nnu - 1];
                    if z != 0.0 {
                        wr[nnu] = x - w / z;
                    }
                    wi[nnu - 1] = 0.0;
                    wi[nnu] = 0.0;
                } else {
                    wr[nnu - 1] = x + p;
                    wr[nnu] = x + p;
                    wi[nnu - 1] = -z;
                    wi[nnu] = z;
                }
                nn -= 2;
                continue 'outer;
            }
            if its == MAX_SWEEPS {
                return Err(Error::EigenNoConvergence);
            }
            if its > 0 && its.is_multiple_of(10) {
                // exceptional shift
                t += x;
                for i in 0..=nnu {
                    a[(i, i)] -= x;
                }
                let s = math::abs(a[(nnu, nnu - 1)]) + math::abs(a[(nnu - 1, nnu - 2)]);
                y = 0.75 * s;
                x = y;
                w = -0.4375 * s * s;
            }
            its += 1;

            // form shift; look for two consecutive small subdiagonals
            let mut m = nn - 2;
            let (mut p, mut q, mut r) = (0.0, 0.0, 0.0);
            while m >= l {
                let mu = m as usize;
                let z = a[(mu, mu)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(mu + 1, mu)] + a[(mu, mu + 1)];
                q = a[(mu + 1, mu + 1)] - z - rr - ss;
                r = a[(mu + 2, mu + 1)];
                let s = math::abs(p) + math::abs(q) + math::abs(r);
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = math::abs(a[(mu, mu - 1)]) * (math::abs(q) + math::abs(r));
                let v = math::abs(p)
                    * (math::abs(a[(mu - 1, mu - 1)]) + math::abs(z) + math::abs(a[(mu + 1, mu + 1)]));
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            let mu = m as usize;
            for i in mu + 2..=nnu {
                a[(i, i - 2)] = 0.0;
                if i != mu + 2 {
                    a[(i, i - 3)] = 0.0;
                }
            }

            // double QR sweep over rows m..nn
            for k in mu..nnu {
                if k != mu {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = if k != nnu - 1 { a[(k + 2, k - 1)] } else { 0.0 };
                    x = math::abs(p) + math::abs(q) + math::abs(r);
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = same_sign(math::sqrt(p * p + q * q + r * r), p);
                if s == 0.0 {
                    continue;
                }
                if k == mu {
                    if l != m {
                        a[(k, k - 1)] = -a[(k, k - 1)];
                    }
                } else {
                    a[(k, k - 1)] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nnu {
                    let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                    if k != nnu - 1 {
                        pp += r * a[(k + 2, j)];
                        a[(k + 2, j)] -= pp * z;
                    }
                    a[(k + 1, j)] -= pp * y;
                    a[(k, j)] -= pp * x;
                }
                let mmin = if nnu < k + 3 { nnu } else { k + 3 };
                for i in l as usize..=mmin {
                    let mut pp = x * a[(i, k)] + y * a[(i, k + 1)];
                    if k != nnu - 1 {
                        pp += z * a[(i, k + 2)];
                        a[(i, k + 2)] -= pp * r;
                    }
                    a[(i, k + 1)] -= pp * q;
                    a[(i, k)] -= pp;
                }
            }
        }
    }
    Ok(ComplexSpectrum { re: wr, im: wi })
}
