//! Small dense linear algebra: row-major matrices and partial-pivoting LU.
//!
//! Grid sizes stay at or below a few hundred, so everything here is dense and
//! straightforward.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

#[allow(unused_imports)] // float methods come from here without std
use num_traits::Float;
use num_traits::{One, Zero};

use crate::C64;

/// Dense real matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Matrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish_non_exhaustive()
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from equally long rows.
    ///
    /// # Panics
    /// If the rows have different lengths.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.add(&other.scaled(-1.0))
    }

    /// Induced max-norm, i.e. the largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest entry of `|A S - S A|` with `S` the cyclic shift `(Sv)_i = v_{i+1}`.
    pub fn shift_commutator(&self) -> f64 {
        assert!(self.is_square());
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                // (AS)_{ij} = A_{i, j-1};  (SA)_{ij} = A_{i+1, j}
                let a_s = self[(i, (j + n - 1) % n)];
                let s_a = self[((i + 1) % n, j)];
                worst = worst.max((a_s - s_a).abs());
            }
        }
        worst
    }

    pub(crate) fn to_complex(&self) -> Vec<C64> {
        self.data.iter().map(|&v| C64::new(v, 0.0)).collect()
    }
}

impl AsRef<Matrix> for Matrix {
    fn as_ref(&self) -> &Matrix {
        self
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Scalars the LU factorisation can pivot on.
pub trait LuScalar:
    Copy
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn modulus(self) -> f64;
}

impl LuScalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl LuScalar for C64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// The factorisation hit an exactly (or numerically) zero pivot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singular {
    pub column: usize,
}

/// `PA = LU` with partial pivoting, stored packed.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: LuScalar> Lu<T> {
    /// Factors the `n × n` row-major matrix `a`.
    pub fn factor(n: usize, mut a: Vec<T>) -> Result<Self, Singular> {
        assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.modulus()));
        let tiny = scale * f64::EPSILON * 1e-3;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].modulus()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmax > tiny) || !pmax.is_finite() {
                return Err(Singular { column: k });
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / pivot;
                if f.is_zero() {
                    continue;
                }
                a[i * n + k] = f;
                for j in k + 1..n {
                    let u = a[k * n + j];
                    a[i * n + j] = a[i * n + j] - f * u;
                }
            }
        }
        Ok(Self { n, lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`, returning `x`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    /// Smallest and largest pivot moduli, a cheap conditioning indicator.
    pub fn pivot_range(&self) -> (f64, f64) {
        (0..self.n)
            .map(|i| self.lu[i * self.n + i].modulus())
            .fold((f64::INFINITY, 0.0), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

/// Solves `A X = B` for real square `A` and real `B`.
pub fn solve_matrix(a: &Matrix, b: &Matrix) -> Result<Matrix, Singular> {
    assert!(a.is_square());
    assert_eq!(a.rows(), b.rows());
    let lu = Lu::factor(a.rows(), a.as_slice().to_vec())?;
    let mut out = Matrix::zeros(b.rows(), b.cols());
    for j in 0..b.cols() {
        let x = lu.solve(&b.column(j));
        for (i, v) in x.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

/// Least squares `min ‖A x − b‖₂` for a tall complex system via Householder QR.
///
/// Returns the solution and the ratio of the largest to smallest diagonal entry
/// of `R` as a condition estimate.
pub fn least_squares(rows: usize, cols: usize, a: &[C64], b: &[C64]) -> (Vec<C64>, f64) {
    assert!(rows >= cols);
    assert_eq!(a.len(), rows * cols);
    assert_eq!(b.len(), rows);
    let mut r = a.to_vec();
    let mut rhs = b.to_vec();
    for k in 0..cols {
        let norm = (k..rows)
            .map(|i| r[i * cols + k].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            continue;
        }
        let head = r[k * cols + k];
        let phase = if head.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            head / head.norm()
        };
        let alpha = -phase * norm;
        let mut v: Vec<C64> = (k..rows).map(|i| r[i * cols + k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..cols {
            let dot: C64 = (k..rows).map(|i| v[i - k].conj() * r[i * cols + j]).sum();
            let f = dot * (2.0 / vnorm2);
            for i in k..rows {
                r[i * cols + j] -= v[i - k] * f;
            }
        }
        let dot: C64 = (k..rows).map(|i| v[i - k].conj() * rhs[i]).sum();
        let f = dot * (2.0 / vnorm2);
        for i in k..rows {
            rhs[i] -= v[i - k] * f;
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); cols];
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in (0..cols).rev() {
        let d = r[i * cols + i];
        lo = lo.min(d.norm());
        hi = hi.max(d.norm());
        let mut s = rhs[i];
        for j in i + 1..cols {
            s -= r[i * cols + j] * x[j];
        }
        x[i] = if d.norm() == 0.0 { C64::new(0.0, 0.0) } else { s / d };
    }
    let cond = if lo == 0.0 { f64::INFINITY } else { hi / lo };
    (x, cond)
}

/// Discrete Fourier transform `X_k = Σ_j x_j e^{∓2πi jk/n}` (minus sign forward).
///
/// The inverse is unnormalised. Twiddles are indexed by `jk mod n` so every
/// factor is a correctly rounded root of unity.
pub fn dft(x: &[C64], inverse: bool) -> Vec<C64> {
    let n = x.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    let twiddle: Vec<C64> = (0..n)
        .map(|l| {
            let ang = 2.0 * core::f64::consts::PI * l as f64 / n as f64;
            C64::new(ang.cos(), sign * ang.sin())
        })
        .collect();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, v)| v * twiddle[(j * k) % n])
                .sum()
        })
        .collect()
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
