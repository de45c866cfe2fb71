//! Dense complex matrices in row-major storage.
//!
//! `ComplexMatrix` is the carrier for every operator in the crate: Hermitian
//! generators, gradings, projections, Cayley unitaries, assembled circle
//! operators and quantized symbols. Construction validates shape and
//! finiteness; arithmetic assumes shapes agree and panics otherwise.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};
use thiserror::Error;

/// Errors produced by the dense linear algebra kernel.
#[derive(Debug, Error)]
pub enum KernelError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("entry buffer has length {len}, expected {rows}x{cols}={expected}")]
    BadLength {
        rows: usize,
        cols: usize,
        len: usize,
        expected: usize,
    },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("matrix is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("dimension mismatch: {0}x{1} against {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("matrix is numerically singular at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("function value not finite at spectrum point {point}")]
    NonFiniteFunctionValue { point: f64 },
    #[error("rank threshold must be positive (got {tau})")]
    BadThreshold { tau: f64 },
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

const PAR_FLOP_CUTOFF: usize = 1 << 21;

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, validating length and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, KernelError> {
        if data.len() != rows * cols {
            return Err(KernelError::BadLength {
                rows,
                cols,
                len: data.len(),
                expected: rows * cols,
            });
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(KernelError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Diagonal matrix from complex entries.
    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, z) in entries.iter().enumerate() {
            m[(i, i)] = *z;
        }
        m
    }

    /// Diagonal matrix from real entries.
    pub fn diag_real(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, x) in entries.iter().enumerate() {
            m[(i, i)] = Complex64::new(*x, 0.0);
        }
        m
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

    /// Side length of a square matrix.
    pub fn dim(&self) -> Result<usize, KernelError> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(KernelError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scaled_re(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> Complex64 {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm of `A - A*`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = self[(i, j)] - self[(j, i)].conj();
                acc += d.norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_defect() <= tol * self.frobenius_norm().max(1.0)
    }

    /// Symmetrizes in place: `A <- (A + A*)/2`.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        (self + &adj).scaled_re(0.5)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "distance: shape mismatch"
        );
        let mut acc = 0.0;
        for (a, b) in self.data.iter().zip(&other.data) {
            acc += (a - b).norm_sqr();
        }
        acc.sqrt()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.distance(other) <= tol
    }

    /// Matrix product. Parallelizes over rows for large operands; the row
    /// partition makes the result bit-identical regardless of thread count.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "mul: inner dimensions {} vs {}",
            self.cols, rhs.rows
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        let cols = rhs.cols;
        let work = self.rows * self.cols * rhs.cols;
        let body = |(i, out_row): (usize, &mut [Complex64])| {
            let a_row = self.row(i);
            for (k, a) in a_row.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let b_row = &rhs.data[k * cols..(k + 1) * cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        };
        if work >= PAR_FLOP_CUTOFF {
            out.data
                .par_chunks_mut(cols)
                .enumerate()
                .for_each(body);
        } else {
            out.data.chunks_mut(cols).enumerate().for_each(body);
        }
        out
    }

    /// `A · Zᵀ` for a real row-major `z` holding Zᵀ (rows of `z` are columns of Z).
    pub(crate) fn mul_real_transposed(&self, z: &[f64], z_rows: usize) -> Self {
        assert_eq!(z.len(), z_rows * self.cols, "mul_real_transposed: size");
        let n = self.cols;
        let mut out = Self::zeros(self.rows, z_rows);
        let body = |(i, out_row): (usize, &mut [Complex64])| {
            let a_row = self.row(i);
            for (j, o) in out_row.iter_mut().enumerate() {
                let zt_row = &z[j * n..(j + 1) * n];
                let mut acc = Complex64::new(0.0, 0.0);
                for (a, w) in a_row.iter().zip(zt_row) {
                    acc += a * w;
                }
                *o = acc;
            }
        };
        if self.rows * n * z_rows >= PAR_FLOP_CUTOFF {
            out.data.par_chunks_mut(z_rows).enumerate().for_each(body);
        } else {
            out.data.chunks_mut(z_rows).enumerate().for_each(body);
        }
        out
    }

    /// Kronecker product.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (p, q) = (rhs.rows, rhs.cols);
        Self::from_fn(self.rows * p, self.cols * q, |i, j| {
            self[(i / p, j / q)] * rhs[(i % p, j % q)]
        })
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows + rhs.rows, self.cols + rhs.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, self.cols, rhs);
        out
    }

    /// Copies the `rows x cols` block with upper-left corner `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "block: out of range");
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, m: &Self) {
        assert!(
            r0 + m.rows <= self.rows && c0 + m.cols <= self.cols,
            "set_block: out of range"
        );
        for i in 0..m.rows {
            for j in 0..m.cols {
                self[(r0 + i, c0 + j)] = m[(i, j)];
            }
        }
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self, KernelError> {
        let n = self.dim()?;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let (pivot_row, pivot_abs) = (col..n)
                .map(|r| (r, a[(r, col)].norm()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            if pivot_abs < 1e-300 {
                return Err(KernelError::Singular { pivot: col });
            }
            if pivot_row != col {
                a.swap_rows(pivot_row, col);
                inv.swap_rows(pivot_row, col);
            }
            let p = a[(col, col)];
            let pinv = Complex64::new(1.0, 0.0) / p;
            for j in 0..n {
                a[(col, j)] *= pinv;
                inv[(col, j)] *= pinv;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if factor.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let ac = a[(col, j)];
                    let ic = inv[(col, j)];
                    a[(r, j)] -= factor * ac;
                    inv[(r, j)] -= factor * ic;
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, r: usize, s: usize) {
        if r == s {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(r * self.cols + j, s * self.cols + j);
        }
    }

    /// Commutator `AB - BA`.
    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.mul(rhs) - &rhs.mul(self)
    }

    /// Anticommutator `AB + BA`.
    pub fn anticommutator(&self, rhs: &Self) -> Self {
        &self.mul(rhs) + &rhs.mul(self)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add: shape");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub: shape");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix::mul(self, rhs)
    }
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        let show = self.rows.min(8);
        for i in 0..show {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, "{:+.3e}{:+.3e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        if show < self.rows {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

/// Wire form of the matrix JSON schema:
/// `{ "rows": n, "cols": m, "re": [...], "im": [...] }`.
#[derive(Serialize, Deserialize)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixWire {
            rows: self.rows,
            cols: self.cols,
            re: self.data.iter().map(|z| z.re).collect(),
            im: self.data.iter().map(|z| z.im).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = MatrixWire::deserialize(deserializer)?;
        if wire.re.len() != wire.im.len() {
            return Err(serde::de::Error::custom(format!(
                "re/im length mismatch: {} vs {}",
                wire.re.len(),
                wire.im.len()
            )));
        }
        let data: Vec<Complex64> = wire
            .re
            .iter()
            .zip(&wire.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        ComplexMatrix::new(wire.rows, wire.cols, data).map_err(serde::de::Error::custom)
    }
}
